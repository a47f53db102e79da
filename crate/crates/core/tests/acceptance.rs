//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (run with `--nocapture` to see them).
//!
//! Criteria 5-7 share one batch of desk-scale replication runs (six
//! configurations x two functions x 25 seeded runs at 300k evaluations),
//! computed once behind a lazy static.

use std::sync::LazyLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use etide::benchfn::{make_suite, BaseFunction, Category, ObjectiveFunction};
use etide::de::{Budget, Evaluator, Individual, Population};
use etide::eti::{
    destabilizing_impulse, generation_hook, stabilizing_impulse, update_rate, EtiState,
    ImpulseEvent, ImpulseKind, ImpulseReference,
};
use etide::harness::{cell_seed, run_cell, RunRecord};
use etide::stats;
use etide::variants::{named_config, AblationConfig, ReferenceMode};

// ---------------------------------------------------------------------------
// shared fixtures
// ---------------------------------------------------------------------------

fn test_objective(d: usize) -> ObjectiveFunction {
    ObjectiveFunction::shifted_rotated(
        "probe",
        BaseFunction::Rastrigin,
        Category::Multimodal,
        vec![0.0; d],
        None,
    )
    .unwrap()
}

fn random_population(fun: &ObjectiveFunction, np: usize, rng: &mut ChaCha8Rng) -> Population {
    let d = fun.dimension();
    let members = (0..np)
        .map(|_| {
            let position: Vec<f64> =
                (0..d).map(|_| rng.random_range(-100.0..=100.0)).collect();
            let fitness = fun.evaluate(&position);
            Individual {
                position,
                fitness,
                stagnation: rng.random_range(0..25),
            }
        })
        .collect();
    Population {
        members,
        lower: fun.lower().to_vec(),
        upper: fun.upper().to_vec(),
        generation: 0,
    }
}

const REPLICATION_DIM: usize = 30;
const REPLICATION_FES: u64 = 300_000;
const REPLICATION_RUNS: usize = 25;
const REPLICATION_MASTER_SEED: u64 = 1;
const REPLICATION_FUNCTIONS: [&str; 2] = ["rastrigin", "schwefel"];
const REPLICATION_ALGORITHMS: [&str; 6] = [
    "de-rand-1/plain",
    "de-rand-1/eti",
    "de-rand-1/eti1",
    "de-rand-1/eti2",
    "de-rand-1/eti3",
    "de-rand-1/eti4",
];

struct Replication {
    records: Vec<RunRecord>,
    elapsed_s: f64,
}

impl Replication {
    fn errors(&self, algorithm: &str, function: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.algorithm == algorithm && r.function == function)
            .map(|r| r.final_error)
            .collect()
    }

    fn mean(&self, algorithm: &str, function: &str) -> f64 {
        stats::summarize(&self.errors(algorithm, function)).mean
    }
}

static REPLICATION: LazyLock<Replication> = LazyLock::new(|| {
    let start = Instant::now();
    let suite = make_suite(1, REPLICATION_DIM).unwrap();
    let mut cells = Vec::new();
    for algorithm in REPLICATION_ALGORITHMS {
        for function in REPLICATION_FUNCTIONS {
            for run in 0..REPLICATION_RUNS {
                cells.push((algorithm, function, run));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let records: Vec<RunRecord> = pool.install(|| {
        cells
            .par_iter()
            .map(|(algorithm, function, run)| {
                let cfg = named_config(algorithm).unwrap();
                let fun = suite.iter().find(|f| f.id() == *function).unwrap();
                let seed = cell_seed(REPLICATION_MASTER_SEED, algorithm, function, *run);
                run_cell(
                    &cfg,
                    fun,
                    seed,
                    *run,
                    REPLICATION_FES,
                    REPLICATION_FES / 200,
                    None,
                )
                .unwrap()
            })
            .collect()
    });
    Replication {
        records,
        elapsed_s: start.elapsed().as_secs_f64(),
    }
});

// ---------------------------------------------------------------------------
// criterion 1: impulse geometry
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_impulse_geometry() {
    let start = Instant::now();
    let fun = test_objective(8);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let d = fun.dimension();

    for round in 0..100_000u32 {
        // Fresh small populations every so often keep the geometry varied.
        let mut pop = random_population(&fun, 6, &mut rng);
        let i = (round % 6) as usize;
        let before = pop.members[i].position.clone();
        let mut evaluator = Evaluator::new(&fun, Budget::new(1));
        let (_, event) =
            stabilizing_impulse(&mut pop, i, &mut evaluator, &mut rng, ReferenceMode::Mixed)
                .expect("budget covers one impulse");
        let ImpulseReference::State(reference) = &event.reference else {
            panic!("stabilizing impulse must carry a reference state");
        };
        // DM-sparsity of the gain.
        let modified = event.gain.iter().filter(|&&g| g != 0.0).count();
        assert_eq!(modified, event.modified_dims);
        assert!(event.modified_dims >= 1 && event.modified_dims <= d);
        assert!(event.gain.iter().all(|&g| (-1.0..=0.0).contains(&g)));
        // Segment invariant on modified dimensions, bit-identity elsewhere.
        let after = if event.accepted {
            pop.members[i].position.clone()
        } else {
            before.clone()
        };
        for j in 0..d {
            if event.gain[j] == 0.0 {
                assert_eq!(after[j].to_bits(), before[j].to_bits());
            } else if event.accepted {
                let lo = before[j].min(reference[j]);
                let hi = before[j].max(reference[j]);
                assert!(after[j] >= lo && after[j] <= hi, "left the segment");
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for round in 0..100_000u32 {
        // Alternate the two injection modes: every dimension, or a random
        // DM-subset of them.
        let all_dims = round % 2 == 0;
        let mut pop = random_population(&fun, 6, &mut rng);
        let i = (round % 6) as usize;
        let before = pop.members[i].position.clone();
        let (lo, hi) = pop.bounding_box();
        let mut evaluator = Evaluator::new(&fun, Budget::new(1));
        let event =
            destabilizing_impulse(&mut pop, i, &lo, &hi, &mut evaluator, &mut rng, all_dims)
                .expect("budget covers one impulse");
        let modified = event.gain.iter().filter(|&&g| g > 0.0).count();
        assert_eq!(modified, event.modified_dims);
        if all_dims {
            assert_eq!(event.modified_dims, d);
        } else {
            assert!(event.modified_dims >= 1 && event.modified_dims <= d);
        }
        assert!(event
            .gain
            .iter()
            .all(|&g| g == 0.0 || (g > 0.0 && g < 1.0)));
        for j in 0..d {
            let v = pop.members[i].position[j];
            if event.gain[j] == 0.0 {
                assert_eq!(v.to_bits(), before[j].to_bits());
            } else if hi[j] > lo[j] {
                assert!(v > lo[j] && v < hi[j], "left the population box");
            } else {
                assert_eq!(v, lo[j]);
            }
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "geometry suite took {elapsed:.2}s");
    println!(
        "criterion 1 PASS: 2x100000 impulses satisfy geometry invariants in {elapsed:.2}s"
    );
}

// ---------------------------------------------------------------------------
// criterion 2: trigger soundness
// ---------------------------------------------------------------------------

/// Straight-line restatement of the trigger branch logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ExpectedPath {
    NoImpulses,
    Destabilizing,
    Stabilizing,
}

fn reference_branch(ur: f64, ur_prev: f64) -> ExpectedPath {
    if ur == 0.0 {
        ExpectedPath::Destabilizing
    } else if ur < ur_prev {
        ExpectedPath::Stabilizing
    } else {
        ExpectedPath::NoImpulses
    }
}

#[test]
fn criterion_2_trigger_soundness() {
    let fun = test_objective(4);
    let np = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(201);
    let mut pop = random_population(&fun, np, &mut rng);
    let mut state = EtiState::new(1, np, 0.2, pop.best_fitness());
    let mut evaluator = Evaluator::new(&fun, Budget::new(u64::MAX / 2));
    let mut shadow_prev_ur = 0.0;
    let mut mismatches = 0u32;

    for step in 0..10_000u32 {
        let up = [0u32, 0, 1, 2, 3, 5, 8][(step as usize * 31 + step as usize / 7) % 7];
        let expected = reference_branch(update_rate(up, np), shadow_prev_ur);
        let mut events: Vec<ImpulseEvent> = Vec::new();
        generation_hook(
            &mut pop,
            up,
            &mut state,
            &mut evaluator,
            &mut rng,
            &AblationConfig::full(),
            true,
            |e| events.push(e.clone()),
        );
        shadow_prev_ur = update_rate(up, np);

        let ok = match expected {
            ExpectedPath::NoImpulses => events.is_empty(),
            ExpectedPath::Destabilizing => {
                !events.is_empty()
                    && events.iter().all(|e| e.kind == ImpulseKind::Destabilizing)
            }
            ExpectedPath::Stabilizing => {
                let stabilizing: Vec<&ImpulseEvent> = events
                    .iter()
                    .filter(|e| e.kind == ImpulseKind::Stabilizing)
                    .collect();
                let destabilizing =
                    events.iter().filter(|e| e.kind == ImpulseKind::Destabilizing).count();
                // The declining branch always attempts stabilizing impulses;
                // destabilizing ones appear only as the all-failed fallback.
                !stabilizing.is_empty()
                    && (destabilizing == 0 || stabilizing.iter().all(|e| !e.accepted))
                    && (stabilizing.iter().any(|e| e.accepted) || destabilizing > 0
                        || !etide::variants::EtiMode::Full.zeta_fallback())
            }
        };
        if !ok {
            mismatches += 1;
        }
    }
    assert_eq!(mismatches, 0, "trigger mismatches detected");
    println!("criterion 2 PASS: 10000 scripted update-rate steps, zero mismatches");
}

// ---------------------------------------------------------------------------
// criterion 3: Wilcoxon oracle equivalence
// ---------------------------------------------------------------------------

/// Independent oracle: average ranks by counting, exact two-sided tail by
/// bitmask enumeration over all subsets of the pooled sample.
fn oracle_exact_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    assert!(n <= 24, "oracle enumeration limited to 24 observations");
    let ranks: Vec<f64> = pooled
        .iter()
        .map(|&v| {
            let less = pooled.iter().filter(|&&u| u < v).count();
            let equal = pooled.iter().filter(|&&u| u == v).count();
            less as f64 + (equal as f64 + 1.0) / 2.0
        })
        .collect();
    let m = a.len().min(b.len());
    let observed: f64 = if a.len() <= b.len() {
        ranks[..a.len()].iter().sum()
    } else {
        ranks[a.len()..].iter().sum()
    };
    let mu = m as f64 * (n as f64 + 1.0) / 2.0;
    let threshold = (observed - mu).abs();
    let mut hits = 0u64;
    let mut total = 0u64;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let mut sum = 0.0;
        for (j, &r) in ranks.iter().enumerate() {
            if mask & (1 << j) != 0 {
                sum += r;
            }
        }
        if (sum - mu).abs() >= threshold {
            hits += 1;
        }
        total += 1;
    }
    hits as f64 / total as f64
}

#[test]
fn criterion_3_wilcoxon_oracle_equivalence() {
    // Canonical case first: exact p = 0.1.
    let canonical = stats::wilcoxon_ranksum(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], 0.05);
    assert_eq!(canonical.p_value, 0.1);

    let mut rng = ChaCha8Rng::seed_from_u64(301);
    let mut worst: f64 = 0.0;
    for round in 0..200 {
        let n1 = rng.random_range(3..=8);
        let n2 = rng.random_range(3..=12);
        // Alternate continuous samples with tie-heavy grid samples.
        let draw = |rng: &mut ChaCha8Rng| -> f64 {
            if round % 2 == 0 {
                rng.random_range(0.0..10.0)
            } else {
                f64::from(rng.random_range(0..6u32)) / 2.0
            }
        };
        let a: Vec<f64> = (0..n1).map(|_| draw(&mut rng)).collect();
        let b: Vec<f64> = (0..n2).map(|_| draw(&mut rng)).collect();
        if a.iter().chain(&b).all(|&v| v == a[0]) {
            continue;
        }
        let implementation = stats::wilcoxon_ranksum(&a, &b, 0.05).p_value;
        let oracle = oracle_exact_p(&a, &b);
        worst = worst.max((implementation - oracle).abs());
    }
    assert!(worst <= 1e-12, "worst |p_impl - p_oracle| = {worst:e}");
    println!(
        "criterion 3 PASS: 200 instances against the bitmask oracle, worst gap {worst:e}"
    );
}

// ---------------------------------------------------------------------------
// criterion 4: Holm correctness
// ---------------------------------------------------------------------------

/// Prefix-all restatement: H_(k) is rejected iff every sorted p up to and
/// including it clears its own threshold alpha / (m - j + 1).
fn oracle_holm(p_values: &[f64], alpha: f64) -> Vec<bool> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let mut rejected = vec![false; m];
    for k in 0..m {
        let all_prefix_clear = (0..=k).all(|j| {
            let threshold = alpha / (m - j) as f64;
            p_values[order[j]] < threshold
        });
        rejected[order[k]] = all_prefix_clear;
    }
    rejected
}

#[test]
fn criterion_4_holm_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(401);
    let mut checked = 0;
    for _ in 0..50 {
        let m = rng.random_range(1..10);
        let p: Vec<f64> = (0..m)
            .map(|_| {
                if rng.random_range(0..4) == 0 {
                    rng.random_range(0.0..0.02)
                } else {
                    rng.random_range(0.0..1.0)
                }
            })
            .collect();
        let alpha = 0.05;
        assert_eq!(
            stats::holm_bonferroni(&p, alpha),
            oracle_holm(&p, alpha),
            "p = {p:?}"
        );
        checked += 1;
    }
    assert_eq!(checked, 50);
    println!("criterion 4 PASS: 50 random p-vectors match the hand-threshold oracle");
}

// ---------------------------------------------------------------------------
// criterion 5: desk-scale replication of the headline effect
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_desk_scale_replication() {
    let data = &*REPLICATION;
    for function in REPLICATION_FUNCTIONS {
        let plain = data.errors("de-rand-1/plain", function);
        let eti = data.errors("de-rand-1/eti", function);
        assert_eq!(plain.len(), REPLICATION_RUNS);
        assert_eq!(eti.len(), REPLICATION_RUNS);
        let mark = stats::wilcoxon_ranksum(&eti, &plain, 0.05);
        let mean_plain = stats::summarize(&plain).mean;
        let mean_eti = stats::summarize(&eti).mean;
        let ratio = mean_eti / mean_plain;
        assert_eq!(
            mark.mark,
            stats::Mark::Better,
            "{function}: p = {:.3e}",
            mark.p_value
        );
        assert!(mark.p_value < 0.05, "{function}: p = {:.3e}", mark.p_value);
        assert!(
            ratio < 0.5,
            "{function}: mean ratio {ratio:.3} ({mean_eti:.3e} vs {mean_plain:.3e})"
        );
        println!(
            "criterion 5 PASS ({function}): eti mean {mean_eti:.4e} vs plain {mean_plain:.4e}, \
             ratio {ratio:.3}, p {:.3e}",
            mark.p_value
        );
    }
    println!(
        "criterion 5 note: replication batch of {} runs took {:.0}s",
        REPLICATION_ALGORITHMS.len() * REPLICATION_FUNCTIONS.len() * REPLICATION_RUNS,
        data.elapsed_s
    );
}

// ---------------------------------------------------------------------------
// criterion 6: ablation ordering and event routing
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_ablation_ordering() {
    let data = &*REPLICATION;
    for ablation in ["eti1", "eti2", "eti3", "eti4"] {
        let variant = format!("de-rand-1/{ablation}");
        let full_wins = REPLICATION_FUNCTIONS.iter().any(|function| {
            data.mean("de-rand-1/eti", function) <= data.mean(&variant, function)
        });
        assert!(
            full_wins,
            "full impulse scheme lost to {variant} on both functions"
        );
        for function in REPLICATION_FUNCTIONS {
            println!(
                "criterion 6 ({function}): full {:.4e} vs {variant} {:.4e}",
                data.mean("de-rand-1/eti", function),
                data.mean(&variant, function)
            );
        }
    }
    // Event-log confirmation of the routing.
    let stab_eti1: u64 = data
        .records
        .iter()
        .filter(|r| r.algorithm == "de-rand-1/eti1")
        .map(|r| r.stabilizing_events)
        .sum();
    let destab_eti4: u64 = data
        .records
        .iter()
        .filter(|r| r.algorithm == "de-rand-1/eti4")
        .map(|r| r.destabilizing_events)
        .sum();
    assert_eq!(stab_eti1, 0, "eti1 must not emit stabilizing impulses");
    assert_eq!(destab_eti4, 0, "eti4 must not emit destabilizing impulses");
    println!("criterion 6 PASS: full scheme ties or beats every ablation; event routing clean");
}

// ---------------------------------------------------------------------------
// criterion 7: budget exactness and curve monotonicity
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_budget_exactness() {
    let data = &*REPLICATION;
    assert_eq!(
        data.records.len(),
        REPLICATION_ALGORITHMS.len() * REPLICATION_FUNCTIONS.len() * REPLICATION_RUNS
    );
    for record in &data.records {
        assert!(record.fes_used <= REPLICATION_FES);
        assert_eq!(
            record.fes_used,
            record.init_evals + record.trial_evals + record.impulse_evals(),
            "{}/{} run {}: unaccounted evaluations",
            record.algorithm,
            record.function,
            record.run_index
        );
        assert!(
            record.curve.windows(2).all(|w| w[1].error <= w[0].error),
            "{}/{} run {}: curve not monotone",
            record.algorithm,
            record.function,
            record.run_index
        );
        assert_eq!(record.curve.last().unwrap().fes, record.fes_used);
        assert_eq!(
            record.final_error,
            stats::floor_error(record.curve.last().unwrap().error)
        );
    }
    println!(
        "criterion 7 PASS: {} runs, every evaluation accounted, curves monotone",
        data.records.len()
    );
}

// ---------------------------------------------------------------------------
// criterion 8: impulse-layer overhead
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_overhead() {
    // Force the heavy shared batch to finish first so it does not compete
    // with the timing below.
    let _ = &*REPLICATION;

    let suite = make_suite(1, 30).unwrap();
    let fun = suite.iter().find(|f| f.id() == "rastrigin").unwrap();
    let plain = named_config("de-rand-1/plain").unwrap();
    let eti = named_config("de-rand-1/eti").unwrap();
    let budget = 100_000;

    // Warm-up.
    run_cell(&plain, fun, 1, 0, 10_000, 10_000, None).unwrap();
    run_cell(&eti, fun, 1, 0, 10_000, 10_000, None).unwrap();

    let mut plain_s = 0.0;
    let mut eti_s = 0.0;
    for seed in 0..3u64 {
        let t = Instant::now();
        run_cell(&plain, fun, seed, 0, budget, budget, None).unwrap();
        plain_s += t.elapsed().as_secs_f64();
        let t = Instant::now();
        run_cell(&eti, fun, seed, 0, budget, budget, None).unwrap();
        eti_s += t.elapsed().as_secs_f64();
    }
    let ratio = eti_s / plain_s;
    assert!(
        ratio <= 1.5,
        "impulse layer overhead {ratio:.3}x exceeds the 1.5x bound"
    );
    println!(
        "criterion 8 PASS: wall time {eti_s:.2}s vs {plain_s:.2}s at equal budget \
         (ratio {ratio:.3})"
    );
}
