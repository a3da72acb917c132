//! Finite hypothesis spaces over the domain `0..n`, with restriction and
//! shattering tests.
//!
//! A [`Hypothesis`] is packed most-significant-bit first: element `j` of the
//! domain lives at bit `63 - j % 64` of word `j / 64`. With that layout the
//! derived `Ord` on the word vector is exactly the lexicographic order of the
//! `"0101…"` string form, which is the canonical order of a space.

use std::fmt;

use crate::error::{Error, Result};

/// 0-indexed element of a domain.
pub type DomainIndex = usize;

/// Largest domain accepted for an original (non-lifted) space.
pub const MAX_BASE_DOMAIN: usize = 24;

/// Largest pair domain, `C(MAX_BASE_DOMAIN, 2)`.
pub const MAX_PAIR_DOMAIN: usize = MAX_BASE_DOMAIN * (MAX_BASE_DOMAIN - 1) / 2;

/// Widest subset whose full pattern table (`2^m` codes) fits a `u64`.
pub const PATTERN_BITS: usize = 63;

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hypothesis {
    words: Vec<u64>,
    len: usize,
}

impl Hypothesis {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; words_for(len)], len }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut h = Self::zeros(bits.len());
        for (j, b) in bits.into_iter().enumerate() {
            h.set(j, b);
        }
        h
    }

    /// Parses the `"0110"` form; character `j` is the label of element `j`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut h = Self::zeros(s.len());
        for (j, c) in s.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => h.set(j, true),
                _ => return Err(Error::Parse(format!("invalid label character {:?} in {s:?}", c as char))),
            }
        }
        Ok(h)
    }

    /// Builds a hypothesis of length `len` from the low `len` bits of `code`,
    /// element 0 taking the most significant of those bits.
    pub fn from_code(code: u64, len: usize) -> Self {
        debug_assert!(len <= 64);
        let mut h = Self::zeros(len);
        for j in 0..len {
            h.set(j, (code >> (len - 1 - j)) & 1 == 1);
        }
        h
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        debug_assert!(j < self.len);
        (self.words[j / WORD] >> (WORD - 1 - j % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, j: usize, value: bool) {
        assert!(j < self.len, "bit {j} out of range for length {}", self.len);
        let mask = 1u64 << (WORD - 1 - j % WORD);
        if value {
            self.words[j / WORD] |= mask;
        } else {
            self.words[j / WORD] &= !mask;
        }
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |j| self.get(j))
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        for w in &mut out.words {
            *w = !*w;
        }
        let tail = self.len % WORD;
        if tail != 0 {
            let last = out.words.len() - 1;
            out.words[last] &= !0u64 << (WORD - tail);
        }
        out
    }

    /// Projection onto `elements`, packed as an integer whose most
    /// significant bit is the label of `elements[0]`.
    #[inline]
    pub(crate) fn code_on(&self, elements: &[DomainIndex]) -> u64 {
        elements.iter().fold(0u64, |acc, &j| (acc << 1) | self.get(j) as u64)
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.bits().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hypothesis({self})")
    }
}

/// Strictly increasing list of domain elements.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(transparent)]
pub struct Subset(Vec<DomainIndex>);

impl Subset {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn new(elements: Vec<DomainIndex>) -> Result<Self> {
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedSubset);
        }
        Ok(Self(elements))
    }

    pub fn from_unsorted(mut elements: Vec<DomainIndex>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        Self(elements)
    }

    pub(crate) fn from_sorted_unchecked(elements: Vec<DomainIndex>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        Self(elements)
    }

    pub fn elements(&self) -> &[DomainIndex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate(&self, domain_size: usize) -> Result<()> {
        match self.0.last() {
            Some(&index) if index >= domain_size => Err(Error::IndexOutOfRange { index, domain_size }),
            _ => Ok(()),
        }
    }

    /// All subsets of size `len - 1`, each missing one element.
    pub fn facets(&self) -> impl Iterator<Item = Subset> + '_ {
        (0..self.0.len()).map(move |skip| {
            Subset(self.0.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &x)| x).collect())
        })
    }
}

impl<'de> serde::Deserialize<'de> for Subset {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<DomainIndex>::deserialize(d)?;
        Subset::new(v).map_err(serde::de::Error::custom)
    }
}

/// Canonical (deduplicated, lexicographically sorted, non-empty) set of
/// hypotheses over a common domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HypothesisSpace {
    domain_size: usize,
    hypotheses: Vec<Hypothesis>,
}

/// Builds a canonical space over a base domain of at most [`MAX_BASE_DOMAIN`]
/// elements.
pub fn make_space<I>(domain_size: usize, raw: I) -> Result<HypothesisSpace>
where
    I: IntoIterator<Item = Hypothesis>,
{
    HypothesisSpace::with_cap(domain_size, raw, MAX_BASE_DOMAIN)
}

impl HypothesisSpace {
    pub fn with_cap<I>(domain_size: usize, raw: I, max_domain: usize) -> Result<Self>
    where
        I: IntoIterator<Item = Hypothesis>,
    {
        if domain_size == 0 {
            return Err(Error::InvalidParams("domain_size must be at least 1".into()));
        }
        if domain_size > max_domain {
            return Err(Error::DomainTooLarge { size: domain_size, max: max_domain });
        }
        let mut hypotheses = Vec::new();
        for h in raw {
            if h.len() != domain_size {
                return Err(Error::LengthMismatch { expected: domain_size, found: h.len() });
            }
            hypotheses.push(h);
        }
        if hypotheses.is_empty() {
            return Err(Error::EmptySpace);
        }
        Ok(Self::canonicalize(domain_size, hypotheses))
    }

    /// Parses the `"0101"` string form of each hypothesis.
    pub fn from_strings<S: AsRef<str>>(domain_size: usize, raw: &[S]) -> Result<Self> {
        let parsed = raw.iter().map(|s| Hypothesis::parse(s.as_ref())).collect::<Result<Vec<_>>>()?;
        make_space(domain_size, parsed)
    }

    /// Sorts and deduplicates; callers guarantee lengths and non-emptiness.
    pub(crate) fn canonicalize(domain_size: usize, mut hypotheses: Vec<Hypothesis>) -> Self {
        hypotheses.sort_unstable();
        hypotheses.dedup();
        debug_assert!(!hypotheses.is_empty());
        Self { domain_size, hypotheses }
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    /// Always false; a space holds at least one hypothesis.
    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn contains(&self, h: &Hypothesis) -> bool {
        self.hypotheses.binary_search(h).is_ok()
    }

    /// True when every hypothesis of `self` is also in `other`.
    pub fn is_subspace_of(&self, other: &HypothesisSpace) -> bool {
        self.domain_size == other.domain_size && self.hypotheses.iter().all(|h| other.contains(h))
    }

    /// The space of distinct projections onto `subset`; column `i` of the
    /// result is `subset.elements()[i]`.
    pub fn restrict(&self, subset: &Subset) -> Result<HypothesisSpace> {
        subset.validate(self.domain_size)?;
        let elems = subset.elements();
        let projected = self
            .hypotheses
            .iter()
            .map(|h| Hypothesis::from_bits(elems.iter().map(|&j| h.get(j))))
            .collect();
        Ok(Self::canonicalize(elems.len(), projected))
    }

    /// Number of distinct projections onto `subset`, i.e. `|H restricted to S|`.
    pub fn pattern_count(&self, subset: &Subset) -> Result<usize> {
        subset.validate(self.domain_size)?;
        if subset.len() <= 64 {
            Ok(self.sorted_codes(subset.elements()).len())
        } else {
            Ok(self.restrict(subset)?.len())
        }
    }

    pub fn is_shattered(&self, subset: &Subset) -> Result<Shattering> {
        subset.validate(self.domain_size)?;
        let m = subset.len();
        if m > PATTERN_BITS {
            return Err(Error::SubsetTooLarge { size: m, max: PATTERN_BITS });
        }
        let codes = self.sorted_codes(subset.elements());
        if codes.len() as u64 == 1u64 << m {
            return Ok(Shattering::Shattered(ShatterWitness {
                subset: subset.clone(),
                patterns: Self { domain_size: m, hypotheses: codes.iter().map(|&c| Hypothesis::from_code(c, m)).collect() },
            }));
        }
        let missing = codes
            .iter()
            .enumerate()
            .find(|&(i, &c)| c != i as u64)
            .map_or(codes.len() as u64, |(i, _)| i as u64);
        Ok(Shattering::NotShattered { subset: subset.clone(), missing: Hypothesis::from_code(missing, m) })
    }

    fn sorted_codes(&self, elements: &[DomainIndex]) -> Vec<u64> {
        let mut codes: Vec<u64> = self.hypotheses.iter().map(|h| h.code_on(elements)).collect();
        codes.sort_unstable();
        codes.dedup();
        codes
    }
}

/// A subset certified shattered, together with its realised pattern table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShatterWitness {
    pub subset: Subset,
    pub patterns: HypothesisSpace,
}

impl ShatterWitness {
    pub fn is_valid(&self) -> bool {
        self.patterns.domain_size() == self.subset.len()
            && self.subset.len() <= PATTERN_BITS
            && self.patterns.len() as u64 == 1u64 << self.subset.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shattering {
    Shattered(ShatterWitness),
    /// `missing` is the lexicographically smallest unrealised pattern.
    NotShattered { subset: Subset, missing: Hypothesis },
}

impl Shattering {
    pub fn is_shattered(&self) -> bool {
        matches!(self, Shattering::Shattered(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize, hs: &[&str]) -> HypothesisSpace {
        HypothesisSpace::from_strings(n, hs).unwrap()
    }

    fn subset(v: &[usize]) -> Subset {
        Subset::new(v.to_vec()).unwrap()
    }

    fn strings(s: &HypothesisSpace) -> Vec<String> {
        s.hypotheses().iter().map(|h| h.to_string()).collect()
    }

    #[test]
    fn make_space_dedups_and_sorts() {
        let s = space(2, &["01", "01", "10"]);
        assert_eq!(strings(&s), ["01", "10"]);
        assert_eq!(space(2, &["10", "01"]), space(2, &["01", "10", "10"]));
    }

    #[test]
    fn make_space_errors() {
        assert!(matches!(HypothesisSpace::from_strings::<&str>(3, &[]), Err(Error::EmptySpace)));
        assert!(matches!(
            HypothesisSpace::from_strings(2, &["011"]),
            Err(Error::LengthMismatch { expected: 2, found: 3 })
        ));
        assert!(matches!(
            make_space(25, [Hypothesis::zeros(25)]),
            Err(Error::DomainTooLarge { size: 25, max: 24 })
        ));
        assert!(HypothesisSpace::from_strings(2, &["0x"]).is_err());
    }

    #[test]
    fn lexicographic_order_spans_words() {
        let a = Hypothesis::parse(&"0".repeat(70)).unwrap();
        let mut b = a.clone();
        b.set(69, true);
        let mut c = a.clone();
        c.set(3, true);
        assert!(a < b && b < c);
        assert_eq!(c.to_string().len(), 70);
        assert_eq!(c.complement().weight(), 69);
    }

    #[test]
    fn restrict_examples() {
        let cube = space(2, &["00", "01", "10", "11"]);
        assert_eq!(strings(&cube.restrict(&subset(&[0])).unwrap()), ["0", "1"]);
        let s = space(3, &["000", "111"]);
        assert_eq!(strings(&s.restrict(&subset(&[0, 2])).unwrap()), ["00", "11"]);
        let e = s.restrict(&Subset::empty()).unwrap();
        assert_eq!(e.domain_size(), 0);
        assert_eq!(e.len(), 1);
        assert!(e.hypotheses()[0].is_empty());
        assert!(matches!(s.restrict(&subset(&[3])), Err(Error::IndexOutOfRange { index: 3, .. })));
    }

    #[test]
    fn pattern_count_examples() {
        assert_eq!(space(3, &["000", "111"]).pattern_count(&subset(&[0, 1])).unwrap(), 2);
        assert_eq!(space(2, &["00", "01", "10", "11"]).pattern_count(&subset(&[0, 1])).unwrap(), 4);
        let sparse = space(3, &["000", "100", "010", "001"]);
        assert_eq!(sparse.pattern_count(&subset(&[0, 1])).unwrap(), 3);
    }

    #[test]
    fn shattering_examples() {
        let cube = space(2, &["00", "01", "10", "11"]);
        match cube.is_shattered(&subset(&[0, 1])).unwrap() {
            Shattering::Shattered(w) => assert!(w.is_valid()),
            other => panic!("{other:?}"),
        }
        let sparse = space(3, &["000", "100", "010", "001"]);
        match sparse.is_shattered(&subset(&[0, 1, 2])).unwrap() {
            Shattering::NotShattered { missing, .. } => assert_eq!(missing.to_string(), "011"),
            other => panic!("{other:?}"),
        }
        // No hypothesis labels all three elements 1.
        let all = Subset::new(vec![0, 1, 2]).unwrap();
        assert!(!sparse.restrict(&all).unwrap().contains(&Hypothesis::parse("111").unwrap()));
        assert!(sparse.is_shattered(&Subset::empty()).unwrap().is_shattered());
    }

    #[test]
    fn missing_pattern_is_smallest() {
        // {000, 111} on {0,1,2}: realised 000 and 111, smallest gap is 001.
        let s = space(3, &["000", "111"]);
        match s.is_shattered(&subset(&[0, 1, 2])).unwrap() {
            Shattering::NotShattered { missing, .. } => assert_eq!(missing.to_string(), "001"),
            other => panic!("{other:?}"),
        }
        // Only 111 is missing from the sparse space on a 3-set containing all weight-<=2 vectors.
        let s = space(3, &["000", "001", "010", "011", "100", "101", "110"]);
        match s.is_shattered(&subset(&[0, 1, 2])).unwrap() {
            Shattering::NotShattered { missing, .. } => assert_eq!(missing.to_string(), "111"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn subset_validation() {
        assert!(matches!(Subset::new(vec![1, 1]), Err(Error::UnsortedSubset)));
        assert!(matches!(Subset::new(vec![2, 1]), Err(Error::UnsortedSubset)));
        assert_eq!(Subset::from_unsorted(vec![3, 1, 3]).elements(), &[1, 3]);
        let facets: Vec<_> = subset(&[1, 4, 6]).facets().collect();
        assert_eq!(facets, vec![subset(&[4, 6]), subset(&[1, 6]), subset(&[1, 4])]);
    }
}
