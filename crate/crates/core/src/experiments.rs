//! Per-space bound checks, conjecture-ratio search and report emission.
//!
//! Nothing here asserts the bounds: a violated bound is recorded in the
//! report (and in [`RatioSearchResult`]) so a counterexample is preserved
//! rather than lost to a panic.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::bounds::{theorem_bounds, urner_bound};
use crate::error::{Error, Result};
use crate::families::{FamilySpec, SpaceStream};
use crate::io::SpaceFile;
use crate::similarity::{lift_space, vc_lifted, PairSet};
use crate::space::{HypothesisSpace, Subset};
use crate::vc::{vc_exact_with, vc_naive, VcOptions};

/// Conjectured optimal expansion factor.
pub const CONJECTURED_FACTOR: u64 = 2;

/// `d_sim / d`, undefined when `d = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DimRatio(pub Option<Ratio<u64>>);

impl DimRatio {
    pub fn new(d_sim: u64, d: u64) -> Self {
        Self((d > 0).then(|| Ratio::new(d_sim, d)))
    }

    pub fn exceeds(&self, factor: u64) -> bool {
        self.0.is_some_and(|r| r > Ratio::from_integer(factor))
    }
}

impl fmt::Display for DimRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(r) => write!(f, "{r}"),
            None => f.write_str("undefined"),
        }
    }
}

impl Serialize for DimRatio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub family: FamilySpec,
    pub n: usize,
    pub space_size: usize,
    pub d: u64,
    pub d_sim: u64,
    pub ratio: DimRatio,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub witness_base: Subset,
    pub witness_sim: PairSet,
    pub urner_value: Option<f64>,
    pub wall_time_ms: u64,
}

impl BoundReport {
    pub fn bounds_ok(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VcMethod {
    /// Level-wise search; forest-pruned on the lifted space.
    #[default]
    Exact,
    /// Brute-force oracle on both spaces; witnesses are left empty.
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub method: VcMethod,
    /// Record wall time; when false `wall_time_ms` is 0 so output is
    /// byte-reproducible.
    pub timing: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { method: VcMethod::Exact, timing: true }
    }
}

pub fn verify_theorem(space: &HypothesisSpace, family: FamilySpec) -> Result<BoundReport> {
    verify_theorem_with(space, family, &VerifyOptions::default(), 1)
}

pub fn verify_theorem_with(
    space: &HypothesisSpace,
    family: FamilySpec,
    opts: &VerifyOptions,
    jobs: usize,
) -> Result<BoundReport> {
    let start = Instant::now();
    let (d, witness_base, d_sim, witness_sim) = match opts.method {
        VcMethod::Exact => {
            let base = vc_exact_with(space, &VcOptions::default().jobs(jobs));
            let (d_sim, witness_sim) = match vc_lifted(space, jobs)? {
                Some((r, pairs)) => (r.dimension, pairs),
                None => (0, PairSet::default()),
            };
            (base.dimension, base.witness.subset, d_sim, witness_sim)
        }
        VcMethod::Naive => {
            let d_sim = match lift_space(space) {
                Ok(lifted) => vc_naive(&lifted)?,
                Err(Error::PairDomainEmpty(_)) => 0,
                Err(e) => return Err(e),
            };
            (vc_naive(space)?, Subset::empty(), d_sim, PairSet::default())
        }
    };
    let (d, d_sim) = (d as u64, d_sim as u64);
    let (lower, upper) = theorem_bounds(d);
    Ok(BoundReport {
        family,
        n: space.domain_size(),
        space_size: space.len(),
        d,
        d_sim,
        ratio: DimRatio::new(d_sim, d),
        lower_ok: lower <= d_sim,
        upper_ok: d_sim <= upper,
        witness_base,
        witness_sim,
        urner_value: urner_bound(d).ok(),
        wall_time_ms: if opts.timing { start.elapsed().as_millis() as u64 } else { 0 },
    })
}

const CHUNK: u64 = 512;

/// Computes a report for each of the first `budget` spaces of `stream` and
/// hands them to `sink` in stream order. Spaces are spread over `jobs`
/// workers; the sequence seen by `sink` does not depend on `jobs`.
pub fn run_stream<F>(stream: &SpaceStream, budget: u64, opts: &VerifyOptions, jobs: usize, mut sink: F) -> Result<u64>
where
    F: FnMut(BoundReport, &HypothesisSpace) -> Result<()>,
{
    let total = budget.min(stream.len());
    let work = |i: u64| -> Result<(BoundReport, HypothesisSpace)> {
        let (family, space) = stream.get(i).expect("index below stream length")?;
        Ok((verify_theorem_with(&space, family, opts, 1)?, space))
    };
    let pool = if jobs > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::InvalidParams(e.to_string()))?,
        )
    } else {
        None
    };
    let mut start = 0;
    while start < total {
        let end = (start + CHUNK).min(total);
        let reports: Vec<Result<(BoundReport, HypothesisSpace)>> = match &pool {
            Some(pool) => pool.install(|| (start..end).into_par_iter().map(work).collect()),
            None => (start..end).map(work).collect(),
        };
        for r in reports {
            let (report, space) = r?;
            sink(report, &space)?;
        }
        start = end;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub family: FamilySpec,
    pub d: u64,
    pub d_sim: u64,
    pub ratio: DimRatio,
    pub space: SpaceFile,
}

impl Counterexample {
    fn new(r: &BoundReport, space: &HypothesisSpace) -> Self {
        Self { family: r.family.clone(), d: r.d, d_sim: r.d_sim, ratio: r.ratio, space: SpaceFile::from_space(space, None) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioSearchResult {
    /// Largest `d_sim / d` over spaces with `d ≥ 1`.
    pub max_ratio: DimRatio,
    pub argmax_family: Option<FamilySpec>,
    pub argmax_space: Option<SpaceFile>,
    pub spaces_examined: u64,
    /// Some space had `d_sim / d > 2`.
    pub conjecture_violated: bool,
    pub counterexamples: Vec<Counterexample>,
    /// Spaces breaking either similarity bound.
    pub theorem_violations: Vec<Counterexample>,
}

pub fn ratio_search(stream: &SpaceStream, budget: u64, jobs: usize) -> Result<RatioSearchResult> {
    ratio_search_with(stream, budget, jobs, &VerifyOptions { method: VcMethod::Exact, timing: false })
}

pub fn ratio_search_with(
    stream: &SpaceStream,
    budget: u64,
    jobs: usize,
    opts: &VerifyOptions,
) -> Result<RatioSearchResult> {
    let mut acc = RatioAccumulator::default();
    run_stream(stream, budget, opts, jobs, |r, space| {
        acc.observe(&r, space);
        Ok(())
    })?;
    Ok(acc.finish())
}

/// Folds reports, in stream order, into a [`RatioSearchResult`]. Ties for the
/// maximum ratio keep the earliest space.
#[derive(Clone, Debug, Default)]
pub struct RatioAccumulator {
    best: Option<(DimRatio, FamilySpec, SpaceFile)>,
    examined: u64,
    counterexamples: Vec<Counterexample>,
    theorem_violations: Vec<Counterexample>,
}

impl RatioAccumulator {
    /// `space` is the space `r` was computed on.
    pub fn observe(&mut self, r: &BoundReport, space: &HypothesisSpace) {
        self.examined += 1;
        if r.ratio.0.is_some() && self.best.as_ref().is_none_or(|(b, _, _)| r.ratio > *b) {
            self.best = Some((r.ratio, r.family.clone(), SpaceFile::from_space(space, None)));
        }
        if r.ratio.exceeds(CONJECTURED_FACTOR) {
            self.counterexamples.push(Counterexample::new(r, space));
        }
        if !r.bounds_ok() {
            self.theorem_violations.push(Counterexample::new(r, space));
        }
    }

    pub fn finish(self) -> RatioSearchResult {
        let (max_ratio, argmax_family, argmax_space) = match self.best {
            Some((ratio, family, space)) => (ratio, Some(family), Some(space)),
            None => (DimRatio(None), None, None),
        };
        RatioSearchResult {
            max_ratio,
            argmax_family,
            argmax_space,
            spaces_examined: self.examined,
            conjecture_violated: !self.counterexamples.is_empty(),
            counterexamples: self.counterexamples,
            theorem_violations: self.theorem_violations,
        }
    }
}

/// Process exit status for a finished search or report.
pub const EXIT_OK: u8 = 0;
pub const EXIT_BOUND_VIOLATED: u8 = 2;
pub const EXIT_CONJECTURE_COUNTEREXAMPLE: u8 = 3;

impl RatioSearchResult {
    /// A bound violation outranks a conjecture counterexample.
    pub fn exit_status(&self) -> u8 {
        exit_status(!self.theorem_violations.is_empty(), self.conjecture_violated)
    }
}

fn exit_status(bound_violated: bool, conjecture_violated: bool) -> u8 {
    if bound_violated {
        EXIT_BOUND_VIOLATED
    } else if conjecture_violated {
        EXIT_CONJECTURE_COUNTEREXAMPLE
    } else {
        EXIT_OK
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Jsonl,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "jsonl" => Ok(ReportFormat::Jsonl),
            other => Err(Error::InvalidSpec(format!("unknown report format {other:?}"))),
        }
    }
}

pub const CSV_HEADER: [&str; 12] = [
    "family", "n", "k", "size", "seed", "d", "d_sim", "ratio", "lower_ok", "upper_ok", "urner_value", "wall_time_ms",
];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReportSummary {
    pub rows: u64,
    pub theorem_violations: u64,
    pub conjecture_violations: u64,
}

impl ReportSummary {
    pub fn exit_status(&self) -> u8 {
        exit_status(self.theorem_violations > 0, self.conjecture_violations > 0)
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes one row per space of `stream`, in stream order.
pub fn run_report<W: Write>(
    stream: &SpaceStream,
    format: ReportFormat,
    out: W,
    opts: &VerifyOptions,
    jobs: usize,
) -> Result<ReportSummary> {
    let mut summary = ReportSummary::default();
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER)?;
            run_stream(stream, u64::MAX, opts, jobs, |r, _| {
                tally(&mut summary, &r);
                w.write_record([
                    r.family.name().to_string(),
                    r.n.to_string(),
                    opt(r.family.k()),
                    r.space_size.to_string(),
                    opt(r.family.seed()),
                    r.d.to_string(),
                    r.d_sim.to_string(),
                    r.ratio.to_string(),
                    r.lower_ok.to_string(),
                    r.upper_ok.to_string(),
                    opt(r.urner_value),
                    r.wall_time_ms.to_string(),
                ])?;
                Ok(())
            })?;
            w.flush()?;
        }
        ReportFormat::Jsonl => {
            let mut w = std::io::BufWriter::new(out);
            run_stream(stream, u64::MAX, opts, jobs, |r, _| {
                tally(&mut summary, &r);
                serde_json::to_writer(&mut w, &r)?;
                w.write_all(b"\n")?;
                Ok(())
            })?;
            w.flush()?;
        }
    }
    Ok(summary)
}

fn tally(summary: &mut ReportSummary, r: &BoundReport) {
    summary.rows += 1;
    summary.theorem_violations += !r.bounds_ok() as u64;
    summary.conjecture_violations += r.ratio.exceeds(CONJECTURED_FACTOR) as u64;
}
