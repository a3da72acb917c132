//! Similarity lift `h ↦ h_s` with `h_s(w, x) = 1` iff `h(w) = h(x)`.
//!
//! The canonical pair domain holds the unordered pairs `{i < j}` in
//! lexicographic order. Ordered pairs and the diagonal are dropped: the lift is
//! symmetric, and a diagonal pair is labelled 1 by every hypothesis, so
//! neither can change a VC dimension. [`lift_space_ordered`] keeps the full
//! `n × n` domain for checking that claim.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{DomainIndex, Hypothesis, HypothesisSpace, Subset};
use crate::vc::{vc_exact_with, VcOptions, VcResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    first: DomainIndex,
    second: DomainIndex,
}

impl Pair {
    pub fn new(first: DomainIndex, second: DomainIndex) -> Result<Self> {
        if first >= second {
            return Err(Error::InvalidPair(first, second));
        }
        Ok(Self { first, second })
    }

    /// Canonicalises an unordered pair of distinct elements.
    pub fn unordered(a: DomainIndex, b: DomainIndex) -> Result<Self> {
        Self::new(a.min(b), a.max(b))
    }

    pub fn first(&self) -> DomainIndex {
        self.first
    }

    pub fn second(&self) -> DomainIndex {
        self.second
    }
}

impl Serialize for Pair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.first, self.second].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [a, b] = <[DomainIndex; 2]>::deserialize(d)?;
        Pair::new(a, b).map_err(serde::de::Error::custom)
    }
}

/// All `C(n, 2)` canonical pairs of `0..n`, ranked lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairDomain {
    base_size: usize,
    pairs: Vec<Pair>,
}

impl PairDomain {
    pub fn new(base_size: usize) -> Self {
        let pairs = (0..base_size)
            .flat_map(|i| (i + 1..base_size).map(move |j| Pair { first: i, second: j }))
            .collect();
        Self { base_size, pairs }
    }

    pub fn base_size(&self) -> usize {
        self.base_size
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn rank(&self, pair: Pair) -> Result<usize> {
        let n = self.base_size;
        if pair.second >= n {
            return Err(Error::IndexOutOfRange { index: pair.second, domain_size: n });
        }
        let i = pair.first;
        Ok(i * (2 * n - i - 1) / 2 + (pair.second - i - 1))
    }

    pub fn pair(&self, rank: usize) -> Result<Pair> {
        self.pairs
            .get(rank)
            .copied()
            .ok_or(Error::IndexOutOfRange { index: rank, domain_size: self.pairs.len() })
    }

    pub fn to_subset(&self, pairs: &PairSet) -> Result<Subset> {
        // Ranks are monotone in the pair order, so sorted pairs give sorted ranks.
        let ranks = pairs.edges().iter().map(|&p| self.rank(p)).collect::<Result<Vec<_>>>()?;
        Subset::new(ranks)
    }

    pub fn to_pair_set(&self, subset: &Subset) -> Result<PairSet> {
        let edges = subset.elements().iter().map(|&r| self.pair(r)).collect::<Result<Vec<_>>>()?;
        Ok(PairSet::new(edges))
    }
}

/// Sorted set of distinct pairs; also read as the edge set of a graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct PairSet {
    edges: Vec<Pair>,
}

impl PairSet {
    pub fn new(mut edges: Vec<Pair>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        Self { edges }
    }

    pub fn from_tuples(tuples: &[(DomainIndex, DomainIndex)]) -> Result<Self> {
        let edges = tuples.iter().map(|&(a, b)| Pair::new(a, b)).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(edges))
    }

    pub fn edges(&self) -> &[Pair] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

impl<'de> Deserialize<'de> for PairSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let edges = Vec::<Pair>::deserialize(d)?;
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(serde::de::Error::custom("pair set must be sorted and distinct"));
        }
        Ok(Self { edges })
    }
}

pub fn lift_hypothesis(h: &Hypothesis) -> Hypothesis {
    let n = h.len();
    let mut out = Hypothesis::zeros(n * n.saturating_sub(1) / 2);
    let mut r = 0;
    for i in 0..n {
        let hi = h.get(i);
        for j in i + 1..n {
            if h.get(j) == hi {
                out.set(r, true);
            }
            r += 1;
        }
    }
    out
}

/// The similarity space over the canonical pair domain.
pub fn lift_space(space: &HypothesisSpace) -> Result<HypothesisSpace> {
    let n = space.domain_size();
    if n < 2 {
        return Err(Error::PairDomainEmpty(n));
    }
    let lifted = space.hypotheses().iter().map(lift_hypothesis).collect();
    Ok(HypothesisSpace::canonicalize(n * (n - 1) / 2, lifted))
}

/// The similarity space over all ordered pairs `(w, x)`, diagonal included;
/// pair `(w, x)` is element `w * n + x`.
pub fn lift_space_ordered(space: &HypothesisSpace) -> Result<HypothesisSpace> {
    let n = space.domain_size();
    if n < 2 {
        return Err(Error::PairDomainEmpty(n));
    }
    let lifted = space
        .hypotheses()
        .iter()
        .map(|h| Hypothesis::from_bits((0..n * n).map(|e| h.get(e / n) == h.get(e % n))))
        .collect();
    Ok(HypothesisSpace::canonicalize(n * n, lifted))
}

/// Candidate filter accepting only pair subsets that form a forest.
pub fn forest_filter(domain: &PairDomain) -> impl Fn(&Subset) -> bool + Sync + '_ {
    move |subset: &Subset| {
        let mut sets = DisjointSets::new(domain.base_size());
        subset.elements().iter().all(|&r| {
            let p = domain.pairs[r];
            sets.union(p.first, p.second)
        })
    }
}

/// VC dimension of the similarity space, searching forests only. Returns
/// `None` when the base domain has fewer than two elements (the lifted space
/// then has no pairs and its dimension is taken as 0).
pub fn vc_lifted(space: &HypothesisSpace, jobs: usize) -> Result<Option<(VcResult, PairSet)>> {
    let lifted = match lift_space(space) {
        Ok(l) => l,
        Err(Error::PairDomainEmpty(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let domain = PairDomain::new(space.domain_size());
    let filter = forest_filter(&domain);
    let result = vc_exact_with(&lifted, &VcOptions::with_filter(&filter).jobs(jobs));
    let pairs = domain.to_pair_set(&result.witness.subset)?;
    Ok(Some((result, pairs)))
}

fn check_distinct(elements: &[DomainIndex]) -> Result<()> {
    let mut sorted = elements.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DuplicateElements);
    }
    Ok(())
}

/// The consecutive pairs `(x1,x2), (x2,x3), …` of a chain, canonicalised.
pub fn chain_pairs(elements: &[DomainIndex]) -> Result<PairSet> {
    if elements.len() < 2 {
        return Err(Error::DuplicateElements);
    }
    check_distinct(elements)?;
    let edges = elements.windows(2).map(|w| Pair::unordered(w[0], w[1])).collect::<Result<Vec<_>>>()?;
    Ok(PairSet::new(edges))
}

/// A hypothesis whose lift labels the chain's `i`-th consecutive pair with
/// `labels[i]`: value `start_bit` at `elements[0]`, kept across a 1-labelled
/// pair and flipped across a 0-labelled one, and 0 off the chain.
pub fn chain_witness(
    elements: &[DomainIndex],
    labels: &[bool],
    start_bit: bool,
    domain_size: usize,
) -> Result<Hypothesis> {
    if elements.is_empty() || labels.len() != elements.len() - 1 {
        return Err(Error::LengthMismatch { expected: elements.len().saturating_sub(1), found: labels.len() });
    }
    check_distinct(elements)?;
    if let Some(&index) = elements.iter().find(|&&x| x >= domain_size) {
        return Err(Error::IndexOutOfRange { index, domain_size });
    }
    let mut h = Hypothesis::zeros(domain_size);
    let mut bit = start_bit;
    h.set(elements[0], bit);
    for (&x, &same) in elements[1..].iter().zip(labels) {
        if !same {
            bit = !bit;
        }
        h.set(x, bit);
    }
    Ok(h)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ForestCheck {
    Forest,
    /// Edges of one cycle, in traversal order.
    Cycle(Vec<Pair>),
}

impl ForestCheck {
    pub fn is_forest(&self) -> bool {
        matches!(self, ForestCheck::Forest)
    }
}

pub fn is_forest(pairs: &PairSet) -> ForestCheck {
    let index = vertex_index(pairs);
    let mut sets = DisjointSets::new(index.len());
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); index.len()];
    let vertices: Vec<DomainIndex> = index.keys().copied().collect();
    for &p in pairs.edges() {
        let (u, v) = (index[&p.first], index[&p.second]);
        if !sets.union(u, v) {
            let path = bfs_path(&adjacency, v, u);
            let mut cycle = vec![p];
            cycle.extend(path.windows(2).map(|w| {
                Pair::unordered(vertices[w[0]], vertices[w[1]]).expect("path vertices are distinct")
            }));
            return ForestCheck::Cycle(cycle);
        }
        adjacency[u].push(v);
        adjacency[v].push(u);
    }
    ForestCheck::Forest
}

fn bfs_path(adjacency: &[Vec<usize>], from: usize, to: usize) -> Vec<usize> {
    let mut parent = vec![usize::MAX; adjacency.len()];
    parent[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        for &v in &adjacency[u] {
            if parent[v] == usize::MAX {
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = parent[cur];
        path.push(cur);
    }
    path
}

fn vertex_index(pairs: &PairSet) -> BTreeMap<DomainIndex, usize> {
    let mut index = BTreeMap::new();
    for p in pairs.edges() {
        index.entry(p.first).or_insert(0);
        index.entry(p.second).or_insert(0);
    }
    for (i, slot) in index.values_mut().enumerate() {
        *slot = i;
    }
    index
}

/// Connected components of a pair graph over its endpoint set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ComponentPartition {
    /// Each component sorted; components ordered by smallest vertex.
    pub components: Vec<Vec<DomainIndex>>,
}

impl ComponentPartition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.components.iter().map(Vec::len).sum()
    }
}

pub fn components(pairs: &PairSet) -> ComponentPartition {
    let index = vertex_index(pairs);
    let vertices: Vec<DomainIndex> = index.keys().copied().collect();
    let mut sets = DisjointSets::new(vertices.len());
    for p in pairs.edges() {
        sets.union(index[&p.first], index[&p.second]);
    }
    let mut by_root: BTreeMap<usize, Vec<DomainIndex>> = BTreeMap::new();
    for (i, &v) in vertices.iter().enumerate() {
        by_root.entry(sets.find(i)).or_default().push(v);
    }
    let mut components: Vec<Vec<DomainIndex>> = by_root.into_values().collect();
    components.sort_unstable_by_key(|c| c[0]);
    let partition = ComponentPartition { components };
    debug_assert!(
        !is_forest(pairs).is_forest() || partition.vertex_count() == pairs.len() + partition.len(),
        "forest must satisfy |V| = |E| + r"
    );
    partition
}

/// Labels the `⌊|C|/2⌋` smallest vertices of every component `C` with 1 and
/// everything else with 0.
pub fn balanced_labelling(pairs: &PairSet, domain_size: usize) -> Result<Hypothesis> {
    if !is_forest(pairs).is_forest() {
        return Err(Error::NotAForest);
    }
    if let Some(p) = pairs.edges().iter().find(|p| p.second >= domain_size) {
        return Err(Error::IndexOutOfRange { index: p.second, domain_size });
    }
    let mut h = Hypothesis::zeros(domain_size);
    for component in components(pairs).components {
        for &v in &component[..component.len() / 2] {
            h.set(v, true);
        }
    }
    Ok(h)
}

pub fn endpoints(pairs: &PairSet) -> Subset {
    Subset::from_unsorted(pairs.edges().iter().flat_map(|p| [p.first, p.second]).collect())
}

/// Union-find with path halving and union by size.
struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}
