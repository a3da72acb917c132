//! Concrete hypothesis spaces and reproducible streams of them.
//!
//! Random spaces use a fixed generator so a `(n, size, seed)` triple names
//! the same space in every build:
//!
//! * SplitMix64 (`state += 0x9E3779B97F4A7C15`, then the two multiply-xorshift
//!   rounds with `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`);
//! * uniform draws below `b` by rejection of outputs `< 2^64 mod b`, then `% b`;
//! * Floyd's subset sampling of `size` distinct codes from `0..2^n`, where a
//!   code's most significant of `n` bits labels element 0.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{make_space, Hypothesis, HypothesisSpace, MAX_BASE_DOMAIN};

/// Largest `n` for [`enumerate_spaces`].
pub const MAX_ENUMERATION_DOMAIN: usize = 4;

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `0..bound`; `bound` must be non-zero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % bound;
            }
        }
    }
}

fn check_domain(n: usize) -> Result<()> {
    if n == 0 || n > MAX_BASE_DOMAIN {
        return Err(Error::InvalidParams(format!("n must be in 1..={MAX_BASE_DOMAIN}, got {n}")));
    }
    Ok(())
}

/// All vectors of length `n` with at most `k` ones.
pub fn k_sparse(n: usize, k: usize) -> Result<HypothesisSpace> {
    check_domain(n)?;
    if k > n {
        return Err(Error::InvalidParams(format!("k = {k} exceeds n = {n}")));
    }
    let hyps = (0..1u64 << n)
        .filter(|c| c.count_ones() as usize <= k)
        .map(|c| Hypothesis::from_code(c, n));
    make_space(n, hyps)
}

pub fn full_cube(n: usize) -> Result<HypothesisSpace> {
    check_domain(n)?;
    make_space(n, (0..1u64 << n).map(|c| Hypothesis::from_code(c, n)))
}

/// `size` distinct hypotheses drawn uniformly from `{0,1}^n`.
pub fn random_space(n: usize, size: u64, seed: u64) -> Result<HypothesisSpace> {
    check_domain(n)?;
    let universe = 1u64 << n;
    if size == 0 || size > universe {
        return Err(Error::InvalidParams(format!("size must be in 1..={universe}, got {size}")));
    }
    let mut rng = SplitMix64::new(seed);
    let mut chosen = BTreeSet::new();
    for j in universe - size..universe {
        let t = rng.below(j + 1);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    make_space(n, chosen.into_iter().map(|c| Hypothesis::from_code(c, n)))
}

/// Number of non-empty spaces over `{0,1}^n`.
pub fn enumeration_len(n: usize) -> Result<u64> {
    if n == 0 || n > MAX_ENUMERATION_DOMAIN {
        return Err(Error::DomainTooLargeForEnumeration { size: n, max: MAX_ENUMERATION_DOMAIN });
    }
    Ok((1u64 << (1u64 << n)) - 1)
}

/// The `index`-th non-empty space over `{0,1}^n`: hypothesis `i` of the
/// sorted cube is present iff bit `i` of `index + 1` is set.
pub fn enumerated_space(n: usize, index: u64) -> Result<HypothesisSpace> {
    let len = enumeration_len(n)?;
    if index >= len {
        return Err(Error::InvalidParams(format!("index {index} out of range for {len} spaces")));
    }
    let mask = index + 1;
    let hyps = (0..1u64 << n).filter(|i| mask >> i & 1 == 1).map(|c| Hypothesis::from_code(c, n));
    make_space(n, hyps)
}

/// Every non-empty subset of `{0,1}^n` exactly once, in binary-counting order
/// over the sorted cube.
pub fn enumerate_spaces(n: usize) -> Result<impl Iterator<Item = HypothesisSpace>> {
    let len = enumeration_len(n)?;
    Ok((0..len).map(move |i| enumerated_space(n, i).expect("index in range")))
}

/// Provenance of a single space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum FamilySpec {
    #[serde(rename = "ksparse")]
    KSparse { n: usize, k: usize },
    #[serde(rename = "cube")]
    FullCube { n: usize },
    #[serde(rename = "random")]
    Random { n: usize, size: u64, seed: u64 },
    #[serde(rename = "exhaustive")]
    Exhaustive { n: usize, index: u64 },
    #[serde(rename = "file")]
    File,
}

impl FamilySpec {
    pub fn build(&self) -> Result<HypothesisSpace> {
        match *self {
            FamilySpec::KSparse { n, k } => k_sparse(n, k),
            FamilySpec::FullCube { n } => full_cube(n),
            FamilySpec::Random { n, size, seed } => random_space(n, size, seed),
            FamilySpec::Exhaustive { n, index } => enumerated_space(n, index),
            FamilySpec::File => Err(Error::InvalidSpec("a file space cannot be rebuilt from its spec".into())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::KSparse { .. } => "ksparse",
            FamilySpec::FullCube { .. } => "cube",
            FamilySpec::Random { .. } => "random",
            FamilySpec::Exhaustive { .. } => "exhaustive",
            FamilySpec::File => "file",
        }
    }

    pub fn k(&self) -> Option<usize> {
        match *self {
            FamilySpec::KSparse { k, .. } => Some(k),
            _ => None,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            FamilySpec::Random { seed, .. } => Some(seed),
            _ => None,
        }
    }
}

fn one() -> u64 {
    1
}

/// A reproducible sequence of spaces, as written in report spec files.
///
/// * `random` item `i` uses seed `seed + i`.
/// * `random_mix` item `i` seeds a SplitMix64 with `seed + i`, draws
///   `n = 1 + below(max_n)`, `size = 1 + below(min(2^n, max_size))` and the
///   space seed, in that order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum StreamSpec {
    #[serde(rename = "ksparse")]
    KSparse { n: usize, k: usize },
    #[serde(rename = "cube")]
    FullCube { n: usize },
    #[serde(rename = "random")]
    Random {
        n: usize,
        size: u64,
        seed: u64,
        #[serde(default = "one")]
        samples: u64,
    },
    #[serde(rename = "random_mix")]
    RandomMix { max_n: usize, max_size: u64, samples: u64, seed: u64 },
    #[serde(rename = "exhaustive")]
    Exhaustive { n: usize },
}

impl StreamSpec {
    pub fn len(&self) -> Result<u64> {
        Ok(match *self {
            StreamSpec::KSparse { .. } | StreamSpec::FullCube { .. } => 1,
            StreamSpec::Random { samples, .. } | StreamSpec::RandomMix { samples, .. } => samples,
            StreamSpec::Exhaustive { n } => enumeration_len(n)?,
        })
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.len()? == 0)
    }

    /// Concrete spec of item `i`.
    pub fn item(&self, i: u64) -> FamilySpec {
        match *self {
            StreamSpec::KSparse { n, k } => FamilySpec::KSparse { n, k },
            StreamSpec::FullCube { n } => FamilySpec::FullCube { n },
            StreamSpec::Random { n, size, seed, .. } => FamilySpec::Random { n, size, seed: seed.wrapping_add(i) },
            StreamSpec::RandomMix { max_n, max_size, seed, .. } => {
                let mut rng = SplitMix64::new(seed.wrapping_add(i));
                let n = 1 + rng.below(max_n as u64) as usize;
                let size = 1 + rng.below((1u64 << n).min(max_size));
                FamilySpec::Random { n, size, seed: rng.next_u64() }
            }
            StreamSpec::Exhaustive { n } => FamilySpec::Exhaustive { n, index: i },
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            StreamSpec::KSparse { n, k } => k_sparse(n, k).map(drop),
            StreamSpec::FullCube { n } => check_domain(n),
            StreamSpec::Random { n, size, .. } => {
                check_domain(n)?;
                if size == 0 || size > 1u64 << n {
                    return Err(Error::InvalidSpec(format!("random size {size} out of range for n = {n}")));
                }
                Ok(())
            }
            StreamSpec::RandomMix { max_n, max_size, .. } => {
                check_domain(max_n)?;
                if max_size == 0 {
                    return Err(Error::InvalidSpec("max_size must be at least 1".into()));
                }
                Ok(())
            }
            StreamSpec::Exhaustive { n } => enumeration_len(n).map(drop),
        }
    }
}

/// Concatenation of stream specs with random access by global index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceStream {
    parts: Vec<StreamSpec>,
    offsets: Vec<u64>,
    len: u64,
}

impl SpaceStream {
    pub fn new(parts: Vec<StreamSpec>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(parts.len());
        let mut len = 0u64;
        for p in &parts {
            p.validate()?;
            offsets.push(len);
            len += p.len()?;
        }
        Ok(Self { parts, offsets, len })
    }

    pub fn single(spec: StreamSpec) -> Result<Self> {
        Self::new(vec![spec])
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spec(&self, index: u64) -> Option<FamilySpec> {
        if index >= self.len {
            return None;
        }
        let part = self.offsets.partition_point(|&o| o <= index) - 1;
        Some(self.parts[part].item(index - self.offsets[part]))
    }

    pub fn get(&self, index: u64) -> Option<Result<(FamilySpec, HypothesisSpace)>> {
        let spec = self.spec(index)?;
        Some(spec.build().map(|s| (spec, s)))
    }
}
