//! Exact VC dimension by level-wise search over shattered subsets.
//!
//! Shattering is hereditary, so the shattered subsets of a space form a
//! downward-closed family. Level `m + 1` candidates are built apriori-style
//! by joining two shattered `m`-sets that share their first `m - 1`
//! elements; a candidate survives if it is shattered. Within a join group the
//! hypotheses are partitioned once by their labels on the shared prefix, so
//! each candidate costs one pass over `2^(m-1)` cells. The search stops at
//! an empty level or at `⌊log2 |H|⌋`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::space::{DomainIndex, HypothesisSpace, ShatterWitness, Shattering, Subset};

/// Predicate restricting which subsets the search may consider. It must be
/// downward closed (if it accepts a set it accepts all its subsets), or the
/// level-wise search will miss candidates.
pub type CandidateFilter<'a> = dyn Fn(&Subset) -> bool + Sync + 'a;

/// Largest domain the brute-force oracle will enumerate.
pub const MAX_ORACLE_DOMAIN: usize = 20;

#[derive(Clone, Copy)]
pub struct VcOptions<'a> {
    /// Worker threads used to test candidates within a level. Results do not
    /// depend on this value.
    pub jobs: usize,
    pub filter: Option<&'a CandidateFilter<'a>>,
}

impl Default for VcOptions<'_> {
    fn default() -> Self {
        Self { jobs: 1, filter: None }
    }
}

impl<'a> VcOptions<'a> {
    pub fn with_filter(filter: &'a CandidateFilter<'a>) -> Self {
        Self { jobs: 1, filter: Some(filter) }
    }

    pub fn jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs.max(1);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VcResult {
    pub dimension: usize,
    /// Lexicographically smallest shattered subset of size `dimension`.
    pub witness: ShatterWitness,
}

pub fn vc_exact(space: &HypothesisSpace) -> VcResult {
    vc_exact_with(space, &VcOptions::default())
}

pub fn vc_exact_with(space: &HypothesisSpace, opts: &VcOptions<'_>) -> VcResult {
    let levels = with_pool(opts.jobs, || search(space, opts));
    let top = levels.last().and_then(|l| l.first()).cloned().unwrap_or_default();
    let witness = match space.is_shattered(&top) {
        Ok(Shattering::Shattered(w)) => w,
        other => unreachable!("search produced an unshattered witness: {other:?}"),
    };
    VcResult { dimension: top.len(), witness }
}

/// Every shattered subset, grouped by size: entry `m` holds the sorted
/// shattered sets of size `m` (entry 0 is `[∅]`).
pub fn shattered_family(space: &HypothesisSpace, opts: &VcOptions<'_>) -> Vec<Vec<Subset>> {
    with_pool(opts.jobs, || search(space, opts))
}

/// Shattered subsets of size `m`, sorted, given the exact shattered family of
/// size `m - 1` (`[∅]` when `m == 1`).
pub fn shattered_level(space: &HypothesisSpace, m: usize, previous_level: &[Subset]) -> Vec<Subset> {
    shattered_level_with(space, m, previous_level, &VcOptions::default())
}

pub fn shattered_level_with(
    space: &HypothesisSpace,
    m: usize,
    previous_level: &[Subset],
    opts: &VcOptions<'_>,
) -> Vec<Subset> {
    with_pool(opts.jobs, || next_level(space, m, previous_level, opts))
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    if jobs <= 1 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

fn search(space: &HypothesisSpace, opts: &VcOptions<'_>) -> Vec<Vec<Subset>> {
    // ⌊log2 |H|⌋: a shattered m-set needs 2^m distinct hypotheses.
    let log_bound = (usize::BITS - 1 - space.len().leading_zeros()) as usize;
    let mut levels = vec![vec![Subset::empty()]];
    for m in 1..=log_bound.min(space.domain_size()) {
        let level = next_level(space, m, levels.last().unwrap(), opts);
        if level.is_empty() {
            break;
        }
        levels.push(level);
    }
    levels
}

fn next_level(space: &HypothesisSpace, m: usize, previous: &[Subset], opts: &VcOptions<'_>) -> Vec<Subset> {
    if m == 0 || m > space.domain_size() || m >= 63 || space.len() < 1 << m {
        return Vec::new();
    }
    let columns = Columns::new(space);
    let accept = |c: &Subset| opts.filter.is_none_or(|f| f(c));
    if m == 1 {
        if !previous.iter().any(Subset::is_empty) {
            return Vec::new();
        }
        return (0..space.domain_size())
            .filter(|&x| columns.splits(&columns.all, x))
            .map(|x| Subset::from_sorted_unchecked(vec![x]))
            .filter(accept)
            .collect();
    }
    let sorted;
    let previous = if previous.windows(2).all(|w| w[0] < w[1]) {
        previous
    } else {
        let mut v = previous.to_vec();
        v.sort_unstable();
        v.dedup();
        sorted = v;
        &sorted[..]
    };
    let prefix_len = m - 2;
    let mut groups = Vec::new();
    let mut start = 0;
    while start < previous.len() {
        let prefix = &previous[start].elements()[..prefix_len];
        let end = start + previous[start..].iter().take_while(|s| &s.elements()[..prefix_len] == prefix).count();
        groups.push(&previous[start..end]);
        start = end;
    }
    let join = |group: &[Subset]| -> Vec<Subset> {
        let mut out = Vec::new();
        let prefix = &group[0].elements()[..prefix_len];
        let cells = prefix.iter().fold(columns.all.clone(), |cells, &x| columns.refine(&cells, x));
        for (i, a) in group.iter().enumerate() {
            let y = a.elements()[prefix_len];
            let with_y = columns.refine(&cells, y);
            if with_y.chunks(columns.words).any(|c| c.iter().all(|&w| w == 0)) {
                continue;
            }
            for b in &group[i + 1..] {
                let z = b.elements()[prefix_len];
                if with_y.chunks(columns.words).all(|c| columns.splits(c, z)) {
                    let mut elems = Vec::with_capacity(m);
                    elems.extend_from_slice(a.elements());
                    elems.push(z);
                    let cand = Subset::from_sorted_unchecked(elems);
                    if accept(&cand) {
                        out.push(cand);
                    }
                }
            }
        }
        out
    };
    let mut level: Vec<Subset> = if opts.jobs > 1 {
        groups.into_par_iter().flat_map_iter(join).collect()
    } else {
        groups.into_iter().flat_map(join).collect()
    };
    level.sort_unstable();
    level
}

/// Column-major view of a space: for each domain element, the set of
/// hypotheses labelling it 1, as a bitset over hypothesis indices. A cell is
/// a bitset of `words` words.
struct Columns {
    words: usize,
    all: Vec<u64>,
    bits: Vec<u64>,
}

impl Columns {
    fn new(space: &HypothesisSpace) -> Self {
        let hyps = space.hypotheses();
        let words = hyps.len().div_ceil(64);
        let mut bits = vec![0u64; space.domain_size() * words];
        for (i, h) in hyps.iter().enumerate() {
            for j in 0..space.domain_size() {
                if h.get(j) {
                    bits[j * words + i / 64] |= 1 << (i % 64);
                }
            }
        }
        let mut all = vec![u64::MAX; words];
        if !hyps.len().is_multiple_of(64) {
            all[words - 1] = (1 << (hyps.len() % 64)) - 1;
        }
        Self { words, all, bits }
    }

    fn column(&self, x: DomainIndex) -> &[u64] {
        &self.bits[x * self.words..][..self.words]
    }

    /// Whether `cell` holds hypotheses with both labels on `x`.
    fn splits(&self, cell: &[u64], x: DomainIndex) -> bool {
        let col = self.column(x);
        let (mut one, mut zero) = (false, false);
        for (c, k) in cell.iter().zip(col) {
            one |= c & k != 0;
            zero |= c & !k != 0;
        }
        one && zero
    }

    /// Splits every cell on `x`: cell `c` becomes `2c` (label 0) and `2c + 1`.
    fn refine(&self, cells: &[u64], x: DomainIndex) -> Vec<u64> {
        let col = self.column(x);
        let mut out = Vec::with_capacity(2 * cells.len());
        for cell in cells.chunks(self.words) {
            out.extend(cell.iter().zip(col).map(|(c, k)| c & !k));
            out.extend(cell.iter().zip(col).map(|(c, k)| c & k));
        }
        out
    }
}

/// Brute-force VC dimension: tests every subset of the domain, no pruning.
pub fn vc_naive(space: &HypothesisSpace) -> Result<usize> {
    let n = space.domain_size();
    if n > MAX_ORACLE_DOMAIN {
        return Err(Error::DomainTooLargeForOracle { size: n, max: MAX_ORACLE_DOMAIN });
    }
    let mut best = 0;
    let mut seen = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let elems: Vec<usize> = (0..n).filter(|&j| mask >> j & 1 == 1).collect();
        seen.clear();
        seen.resize(1usize << elems.len(), false);
        for h in space.hypotheses() {
            let mut code = 0usize;
            for (i, &j) in elems.iter().enumerate() {
                if h.get(j) {
                    code |= 1 << i;
                }
            }
            seen[code] = true;
        }
        if seen.iter().all(|&s| s) {
            best = best.max(elems.len());
        }
    }
    Ok(best)
}
