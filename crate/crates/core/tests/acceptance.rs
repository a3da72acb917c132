//! Acceptance criteria, one pass/fail line each.
//!
//! Run with `cargo test -p simvc --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use simvc::bounds::{binary_entropy, entropy_sum_holds, solve_optimal_delta, theorem_bounds, BOUND_EPSILON};
use simvc::experiments::{
    ratio_search, run_report, run_stream, BoundReport, DimRatio, RatioAccumulator, ReportFormat, VerifyOptions,
    EXIT_OK,
};
use simvc::families::{full_cube, k_sparse, FamilySpec, SpaceStream, StreamSpec};
use simvc::similarity::{
    chain_pairs, chain_witness, is_forest, lift_hypothesis, lift_space, vc_lifted, Pair, PairDomain, PairSet,
};
use simvc::vc::shattered_family;
use simvc::{vc_exact, vc_naive, HypothesisSpace, Subset, VcOptions};

const C3_RANDOM: StreamSpec = StreamSpec::RandomMix { max_n: 8, max_size: 200, samples: 10_000, seed: 0x511A_2013 };
const C5_RANDOM: StreamSpec = StreamSpec::RandomMix { max_n: 10, max_size: 200, samples: 1_000, seed: 0x2AC1E };
const PARALLEL_JOBS: usize = 4;

/// Set to make time-budget overruns fail the test; by default they are
/// reported on the criterion line only, since they depend on the machine.
const STRICT_TIMING_VAR: &str = "SIMVC_STRICT_TIMING";

struct Outcome {
    id: &'static str,
    passed: bool,
    over_time: bool,
}

fn criterion(
    id: &'static str,
    title: &str,
    limit: Option<Duration>,
    body: impl FnOnce() -> Result<String, String>,
) -> Outcome {
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    let over_time = limit.is_some_and(|l| elapsed > l);
    let (passed, detail) = match result {
        Ok(d) if over_time => (false, format!("{d}; exceeded time budget on {} threads", rayon::current_num_threads())),
        Ok(d) => (true, d),
        Err(e) => (false, e),
    };
    let budget = limit.map_or("no budget".to_string(), |l| format!("budget {}s", l.as_secs()));
    println!(
        "[{}] {id} {title} ({:.2}s, {budget}): {detail}",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
    );
    Outcome { id, passed, over_time }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn example_grid() -> Vec<(usize, usize)> {
    (1..=3).flat_map(|k| (2 * k + 1..=9).map(move |n| (k, n))).collect()
}

fn example_stream() -> SpaceStream {
    SpaceStream::new(example_grid().into_iter().map(|(k, n)| StreamSpec::KSparse { n, k }).collect()).unwrap()
}

fn exhaustive_stream() -> SpaceStream {
    SpaceStream::new(vec![StreamSpec::Exhaustive { n: 3 }, StreamSpec::Exhaustive { n: 4 }]).unwrap()
}

fn theorem_stream() -> SpaceStream {
    SpaceStream::new(vec![StreamSpec::Exhaustive { n: 3 }, StreamSpec::Exhaustive { n: 4 }, C3_RANDOM]).unwrap()
}

fn no_timing() -> VerifyOptions {
    VerifyOptions { timing: false, ..VerifyOptions::default() }
}

fn lifted_dim(space: &HypothesisSpace) -> usize {
    vc_lifted(space, 1).unwrap().map_or(0, |(r, _)| r.dimension)
}

/// Every shattered set of the lifted space, found without forest pruning,
/// must be a forest; returns the unpruned lifted dimension.
fn unpruned_lift_forests(space: &HypothesisSpace) -> Result<usize, String> {
    let Ok(lifted) = lift_space(space) else { return Ok(0) };
    let domain = PairDomain::new(space.domain_size());
    let family = shattered_family(&lifted, &VcOptions::default());
    for set in family.iter().flatten() {
        let pairs = domain.to_pair_set(set).unwrap();
        ensure(is_forest(&pairs).is_forest(), || format!("shattered non-forest {pairs:?} in {space:?}"))?;
    }
    Ok(family.len() - 1)
}

fn c1_example_reproduction() -> Result<String, String> {
    for (k, n) in example_grid() {
        let space = k_sparse(n, k).unwrap();
        let d = vc_exact(&space).dimension;
        let d_sim = lifted_dim(&space);
        ensure(d == k && d_sim == 2 * k, || format!("k={k} n={n}: d={d} d_sim={d_sim}"))?;
    }
    Ok(format!("{} (k, n) cells, d = k and d_sim = 2k everywhere", example_grid().len()))
}

fn c2_tightness() -> Result<String, String> {
    for n in 2..=5 {
        let d_sim = lifted_dim(&full_cube(n).unwrap());
        ensure(d_sim == n - 1, || format!("n={n}: d_sim={d_sim}"))?;
    }
    Ok("d_sim(cube n) = n - 1 for n = 2..5".into())
}

fn c3_universality() -> Result<String, String> {
    let stream = theorem_stream();
    let mut violations = Vec::new();
    let mut seen = 0u64;
    run_stream(&stream, u64::MAX, &no_timing(), rayon::current_num_threads(), |r, _| {
        seen += 1;
        let (lo, hi) = theorem_bounds(r.d);
        if !(lo <= r.d_sim && r.d_sim <= hi && r.bounds_ok()) {
            violations.push(r.family);
        }
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    ensure(seen == 255 + 65_535 + 10_000, || format!("examined {seen} spaces"))?;
    ensure(violations.is_empty(), || format!("{} violations, first {:?}", violations.len(), violations[0]))?;
    Ok(format!("{seen} spaces, 0 violations of d-1 <= d_sim <= floor(91d/20)"))
}

fn c4_conjecture_probe() -> Result<String, String> {
    let result = ratio_search(&exhaustive_stream(), u64::MAX, 1).map_err(|e| e.to_string())?;
    ensure(result.max_ratio == DimRatio::new(2, 1), || format!("max ratio {}", result.max_ratio))?;
    ensure(!result.conjecture_violated && result.exit_status() == EXIT_OK, || "unexpected violation".into())?;

    // A ratio above 2 must survive as a counterexample with a non-pass status.
    let space = k_sparse(3, 1).unwrap();
    let fake = BoundReport {
        family: FamilySpec::KSparse { n: 3, k: 1 },
        n: 3,
        space_size: space.len(),
        d: 1,
        d_sim: 3,
        ratio: DimRatio::new(3, 1),
        lower_ok: true,
        upper_ok: true,
        witness_base: Subset::empty(),
        witness_sim: PairSet::default(),
        urner_value: Some(2.0),
        wall_time_ms: 0,
    };
    let mut acc = RatioAccumulator::default();
    acc.observe(&fake, &space);
    let flagged = acc.finish();
    ensure(
        flagged.conjecture_violated
            && flagged.exit_status() != EXIT_OK
            && flagged.counterexamples.len() == 1
            && flagged.counterexamples[0].space.hypotheses.len() == space.len(),
        || "synthetic counterexample was not preserved".into(),
    )?;
    Ok(format!(
        "max ratio {} over {} exhaustive spaces (argmax {:?}); counterexample path exits {}",
        result.max_ratio,
        result.spaces_examined,
        result.argmax_family,
        flagged.exit_status()
    ))
}

fn c5_oracle_equivalence() -> Result<String, String> {
    let mut checked = 0;
    let mut check = |space: &HypothesisSpace| -> Result<(), String> {
        let (fast, slow) = (vc_exact(space).dimension, vc_naive(space).unwrap());
        checked += 1;
        ensure(fast == slow, || format!("exact {fast} != naive {slow} on {space:?}"))
    };
    for n in 1..=3 {
        for space in simvc::families::enumerate_spaces(n).unwrap() {
            check(&space)?;
        }
    }
    let random = SpaceStream::single(C5_RANDOM).unwrap();
    for i in 0..random.len() {
        check(&random.get(i).unwrap().unwrap().1)?;
    }
    Ok(format!("{checked} spaces agree"))
}

/// Checks every chain extending `chain` (itself included once it has two
/// elements) up to `MAX_CHAIN` elements; returns the number of checks.
fn sweep_chains(chain: &mut Vec<usize>, domain: &PairDomain) -> Result<u64, String> {
    const MAX_CHAIN: usize = 8;
    let n = domain.base_size();
    let mut checks = 0;
    if chain.len() >= 2 {
        let pairs = chain_pairs(chain).unwrap();
        let subset = domain.to_subset(&pairs).unwrap();
        // Column of the restricted pattern holding each consecutive pair.
        let columns: Vec<usize> = chain
            .windows(2)
            .map(|w| pairs.edges().binary_search(&Pair::unordered(w[0], w[1]).unwrap()).unwrap())
            .collect();
        let mut g = vec![false; chain.len() - 1];
        for code in 0u32..(1 << g.len()) {
            for (i, b) in g.iter_mut().enumerate() {
                *b = code >> i & 1 == 1;
            }
            for start in [false, true] {
                let lifted = lift_hypothesis(&chain_witness(chain, &g, start, n).unwrap());
                // Restricting one hypothesis to the sorted subset reads these bits in order.
                let row: Vec<bool> = subset.elements().iter().map(|&r| lifted.get(r)).collect();
                ensure(columns.iter().zip(&g).all(|(&c, &b)| row[c] == b), || {
                    format!("chain {chain:?} g {g:?} start {start}")
                })?;
                checks += 1;
            }
        }
    }
    if chain.len() < MAX_CHAIN {
        for x in 0..n {
            if !chain.contains(&x) {
                chain.push(x);
                checks += sweep_chains(chain, domain)?;
                chain.pop();
            }
        }
    }
    Ok(checks)
}

fn c6_chain_witness() -> Result<String, String> {
    const DOMAIN: usize = 10;
    let domain = PairDomain::new(DOMAIN);
    // The restriction path is checked against restrict() on a sample first.
    let chain = [3, 0, 7, 1];
    let h = chain_witness(&chain, &[true, false, true], false, DOMAIN).unwrap();
    let single = HypothesisSpace::with_cap(domain.len(), [lift_hypothesis(&h)], domain.len()).unwrap();
    let subset = domain.to_subset(&chain_pairs(&chain).unwrap()).unwrap();
    let restricted = single.restrict(&subset).unwrap();
    let expected: Vec<bool> = subset.elements().iter().map(|&r| lift_hypothesis(&h).get(r)).collect();
    ensure(restricted.hypotheses()[0].bits().eq(expected), || "restrict disagrees with direct reads".into())?;

    let prefixes: Vec<Vec<usize>> =
        (0..DOMAIN).flat_map(|a| (0..DOMAIN).filter(move |&b| b != a).map(move |b| vec![a, b])).collect();
    let checks = prefixes
        .into_par_iter()
        .map(|mut chain| sweep_chains(&mut chain, &domain))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(format!(
        "{checks} (chain, labelling, start) triples over all ordered chains of length 2..8 reproduce their labelling on {} threads",
        rayon::current_num_threads()
    ))
}

fn c7_forest_necessity() -> Result<String, String> {
    let mut spaces = 0u64;
    for (k, n) in example_grid() {
        let space = k_sparse(n, k).unwrap();
        ensure(unpruned_lift_forests(&space)? == 2 * k, || format!("unpruned d_sim differs for k={k} n={n}"))?;
        spaces += 1;
    }
    for n in 2..=5 {
        unpruned_lift_forests(&full_cube(n).unwrap())?;
        spaces += 1;
    }
    let stream = theorem_stream();
    for i in 0..stream.len() {
        let (_, space) = stream.get(i).unwrap().unwrap();
        let unpruned = unpruned_lift_forests(&space)?;
        ensure(unpruned == lifted_dim(&space), || format!("pruned and unpruned d_sim differ on {space:?}"))?;
        spaces += 1;
    }

    // Non-forest pair sets of size <= 4 are never shattered by a lifted space.
    let mut rejected = 0u64;
    for n in 3..=4 {
        let domain = PairDomain::new(n);
        let cyclic: Vec<Subset> = (0u32..(1 << domain.len()))
            .filter(|m| m.count_ones() <= 4)
            .map(|m| Subset::new((0..domain.len()).filter(|&r| m >> r & 1 == 1).collect()).unwrap())
            .filter(|s| !is_forest(&domain.to_pair_set(s).unwrap()).is_forest())
            .collect();
        for space in simvc::families::enumerate_spaces(n).unwrap() {
            let lifted = lift_space(&space).unwrap();
            for s in &cyclic {
                ensure(!lifted.is_shattered(s).unwrap().is_shattered(), || format!("{s:?} shattered by {space:?}"))?;
                rejected += 1;
            }
        }
    }
    Ok(format!("all shattered pair sets of {spaces} lifted spaces are forests; {rejected} cyclic sets rejected"))
}

fn c8_bounds_math() -> Result<String, String> {
    let mut checks = 0;
    for n in 1..=20 {
        for i in 1..=49 {
            let eps = i as f64 / 100.0;
            let r = entropy_sum_holds(n, eps).unwrap();
            ensure(r.holds, || format!("n={n} eps={eps}: {} > {}", r.left, r.right))?;
            checks += 1;
        }
    }
    let h = binary_entropy(BOUND_EPSILON).unwrap();
    ensure(h < 0.5, || format!("H(0.11) = {h}"))?;
    let c = solve_optimal_delta(1e-12).unwrap();
    ensure((c.epsilon - 0.1100).abs() <= 1e-4, || format!("eps* = {}", c.epsilon))?;
    ensure(c.delta > 4.54 && c.delta < 4.55, || format!("delta* = {}", c.delta))?;
    Ok(format!("{checks} entropy-sum cells hold; H(0.11) = {h:.6}; eps* = {:.6}, delta* = {:.6}", c.epsilon, c.delta))
}

fn report_bytes(stream: &SpaceStream, format: ReportFormat, jobs: usize) -> Vec<u8> {
    let mut buf = Vec::new();
    run_report(stream, format, &mut buf, &no_timing(), jobs).unwrap();
    buf
}

fn c9_determinism() -> Result<String, String> {
    let mut sizes = Vec::new();
    for (name, stream, formats) in [
        ("example", example_stream(), vec![ReportFormat::Csv, ReportFormat::Jsonl]),
        ("theorem", theorem_stream(), vec![ReportFormat::Jsonl]),
    ] {
        for format in formats {
            let serial = report_bytes(&stream, format, 1);
            let parallel = report_bytes(&stream, format, PARALLEL_JOBS);
            ensure(serial == parallel, || format!("{name} {format:?} report differs between 1 and {PARALLEL_JOBS} jobs"))?;
            sizes.push(format!("{name}/{format:?} {} bytes", serial.len()));
        }
    }
    Ok(sizes.join(", "))
}

#[test]
fn acceptance_criteria() {
    let secs = |s| Some(Duration::from_secs(s));
    let outcomes = [
        criterion("C1", "k-sparse reproduction", secs(60), c1_example_reproduction),
        criterion("C2", "lower-bound tightness on the cube", secs(30), c2_tightness),
        criterion("C3", "similarity bounds on every examined space", secs(600), c3_universality),
        criterion("C4", "conjecture probe over exhaustive n = 3, 4", None, c4_conjecture_probe),
        criterion("C5", "exact engine equals brute-force oracle", secs(120), c5_oracle_equivalence),
        criterion("C6", "chain-witness soundness", secs(10), c6_chain_witness),
        criterion("C7", "forest necessity", None, c7_forest_necessity),
        criterion("C8", "bounds math", secs(5), c8_bounds_math),
        criterion("C9", "determinism across worker counts", None, c9_determinism),
    ];
    let strict = std::env::var_os(STRICT_TIMING_VAR).is_some();
    let over: Vec<&str> = outcomes.iter().filter(|o| o.over_time).map(|o| o.id).collect();
    if !over.is_empty() && !strict {
        println!("time budget exceeded by {over:?}; set {STRICT_TIMING_VAR} to make this fatal");
    }
    let failed: Vec<&str> =
        outcomes.iter().filter(|o| !o.passed && (strict || !o.over_time)).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
