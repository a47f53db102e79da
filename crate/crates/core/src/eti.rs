//! Event-triggered impulsive control for differential evolution.
//!
//! At the end of each generation the population's update rate `UR = UP/NP`
//! is compared with the previous generation's. Two events trigger
//! corrective impulses on the individuals ranked worst by fitness and
//! stagnation combined:
//!
//! * `UR == 0` — the population stalled. A randomly selected subset of the
//!   candidates is relocated inside the population's bounding box
//!   (destabilizing impulses, unconditional replacement).
//! * `0 < UR < UR_prev` — the population is slowing down. Every candidate
//!   is pulled toward a reference state (the population best, or a better
//!   random individual), keeping the move only if it does not worsen the
//!   candidate (stabilizing impulses). If every stabilizing impulse fails,
//!   the destabilizing path runs as a fallback and the candidate count `M`
//!   grows.
//!
//! `M` adapts over the run: it starts at its lower bound `LN`, is capped at
//! `UN` whenever candidates are selected, grows in the fallback branch, and
//! drops to a random integer in `[LN, M]` whenever a new best fitness
//! appears.
//!
//! Per impulse, the generator is consumed in a fixed order: comparison
//! individual `k` (mixed reference mode only), the dimension count `DM`,
//! the dimension subset, then one gain per modified dimension.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::de::{Evaluator, Population};
use crate::variants::{AblationConfig, RankingMode, ReferenceMode};

/// Fraction of the population replaced this generation: `UP / NP`.
///
/// Panics if `np == 0` or `up > np`.
pub fn update_rate(up: u32, np: usize) -> f64 {
    assert!(np > 0, "update rate undefined for an empty population");
    assert!(up as usize <= np, "more updates than individuals");
    f64::from(up) / np as f64
}

/// Ranks of one individual. Both columns are permutations of `1..=NP`,
/// rank 1 being the best fitness / the fewest stagnant generations, with
/// ties broken by lower index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankRecord {
    pub fitness_rank: usize,
    pub stagnation_rank: usize,
    /// Sum of the two ranks; impulse candidates are the largest values.
    pub combined: usize,
}

/// Rank the population by fitness and by stagnation count.
pub fn rank_population(pop: &Population) -> Vec<RankRecord> {
    let np = pop.size();
    let mut by_fitness: Vec<usize> = (0..np).collect();
    by_fitness.sort_by(|&a, &b| {
        pop.members[a]
            .fitness
            .total_cmp(&pop.members[b].fitness)
            .then(a.cmp(&b))
    });
    let mut by_stagnation: Vec<usize> = (0..np).collect();
    by_stagnation.sort_by(|&a, &b| {
        pop.members[a]
            .stagnation
            .cmp(&pop.members[b].stagnation)
            .then(a.cmp(&b))
    });
    let mut records = vec![
        RankRecord {
            fitness_rank: 0,
            stagnation_rank: 0,
            combined: 0,
        };
        np
    ];
    for (rank0, &i) in by_fitness.iter().enumerate() {
        records[i].fitness_rank = rank0 + 1;
    }
    for (rank0, &i) in by_stagnation.iter().enumerate() {
        records[i].stagnation_rank = rank0 + 1;
    }
    for r in &mut records {
        r.combined = r.fitness_rank + r.stagnation_rank;
    }
    records
}

/// Indices of the `m` largest combined ranks, ties by lower index.
pub fn select_candidates(ranks: &[RankRecord], m: usize) -> Vec<usize> {
    select_candidates_by(ranks, m, |r| r.combined)
}

fn select_candidates_by(
    ranks: &[RankRecord],
    m: usize,
    key: impl Fn(&RankRecord) -> usize,
) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ranks.len()).collect();
    order.sort_by(|&a, &b| key(&ranks[b]).cmp(&key(&ranks[a])).then(a.cmp(&b)));
    order.truncate(m.min(ranks.len()));
    order
}

/// Candidate selection under the configured ranking mode.
pub fn candidates_for_mode(
    ranks: &[RankRecord],
    m: usize,
    mode: RankingMode,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let m = m.min(ranks.len());
    match mode {
        RankingMode::Combined => select_candidates(ranks, m),
        RankingMode::FitnessOnly => select_candidates_by(ranks, m, |r| r.fitness_rank),
        RankingMode::StagnationOnly => select_candidates_by(ranks, m, |r| r.stagnation_rank),
        RankingMode::Random => rand::seq::index::sample(rng, ranks.len(), m).into_vec(),
    }
}

/// Pick the candidates that receive destabilizing impulses: one uniform
/// draw per candidate, tested against a probability that starts at
/// `pr_base` and ratchets up by 0.2 (capped at 1) until at least one
/// candidate passes. The result is never empty.
pub fn random_selection(
    candidates: &[usize],
    pr_base: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let draws: Vec<f64> = candidates.iter().map(|_| rng.random()).collect();
    selection_with_draws(candidates, &draws, pr_base)
}

/// The deterministic part of [`random_selection`], with the uniform draws
/// supplied by the caller.
pub fn selection_with_draws(candidates: &[usize], draws: &[f64], pr_base: f64) -> Vec<usize> {
    assert!(!candidates.is_empty(), "no candidates to select from");
    assert!(
        pr_base > 0.0 && pr_base <= 1.0,
        "selection probability out of range"
    );
    let mut pr = pr_base;
    loop {
        let picked: Vec<usize> = candidates
            .iter()
            .zip(draws)
            .filter(|(_, &r)| r < pr)
            .map(|(&c, _)| c)
            .collect();
        if !picked.is_empty() {
            return picked;
        }
        // Draws live in [0, 1), so pr = 1 always selects everything.
        pr = (pr + 0.2).min(1.0);
    }
}

/// Which kind of impulse an event applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpulseKind {
    Stabilizing,
    Destabilizing,
}

/// What the impulse moved the individual toward.
#[derive(Debug, Clone)]
pub enum ImpulseReference {
    /// Stabilizing reference state `s`.
    State(Vec<f64>),
    /// Per-dimension bounds of the population when the impulse fired.
    PopulationBox { lower: Vec<f64>, upper: Vec<f64> },
}

/// One impulse application, with enough detail to audit its geometry.
#[derive(Debug, Clone)]
pub struct ImpulseEvent {
    pub kind: ImpulseKind,
    pub index: usize,
    /// Diagonal of the impulse-strength matrix.
    pub gain: Vec<f64>,
    pub reference: ImpulseReference,
    pub error_vec: Vec<f64>,
    /// Stabilizing impulses set this from the acceptance test; destabilizing
    /// replacements are unconditional, so it is always true for them.
    pub accepted: bool,
    /// DM: how many dimensions the impulse modified.
    pub modified_dims: usize,
}

/// Compact serializable form for JSON-lines event logs.
#[derive(Debug, Clone, Serialize)]
pub struct EventRecord {
    pub generation: u64,
    pub kind: ImpulseKind,
    pub index: usize,
    pub dm: usize,
    pub zeta: bool,
}

impl EventRecord {
    pub fn from_event(generation: u64, event: &ImpulseEvent) -> Self {
        Self {
            generation,
            kind: event.kind,
            index: event.index,
            dm: event.modified_dims,
            zeta: event.accepted,
        }
    }
}

/// `x + K (x - s)` componentwise. Zero gain keeps the coordinate
/// bit-identical, gain -1 lands exactly on the reference, and intermediate
/// gains are clamped onto the segment `[min(x_j, s_j), max(x_j, s_j)]` —
/// the raw expression can overshoot the reference by an ulp.
pub fn apply_stabilizing_gain(x: &[f64], reference: &[f64], gain: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(reference)
        .zip(gain)
        .map(|((&xj, &sj), &kj)| {
            if kj == 0.0 {
                xj
            } else if kj == -1.0 {
                sj
            } else {
                (xj + kj * (xj - sj)).clamp(xj.min(sj), xj.max(sj))
            }
        })
        .collect()
}

/// `x_L + K (x_U - x_L)` on the modified dimensions (gain > 0), the
/// original coordinate elsewhere. Outputs are clamped onto the closed box.
pub fn apply_destabilizing_gain(
    x: &[f64],
    box_lower: &[f64],
    box_upper: &[f64],
    gain: &[f64],
) -> Vec<f64> {
    x.iter()
        .zip(box_lower)
        .zip(box_upper)
        .zip(gain)
        .map(|(((&xj, &lj), &uj), &kj)| {
            if kj > 0.0 {
                (lj + kj * (uj - lj)).clamp(lj, uj)
            } else {
                xj
            }
        })
        .collect()
}

/// Uniform draw from the open interval (0, 1).
fn open01(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v: f64 = rng.random();
        if v > 0.0 {
            return v;
        }
    }
}

/// Pull individual `i` toward a reference state, keeping the move only if
/// it does not worsen the cached fitness (acceptance flag ζ). Costs one
/// evaluation; returns `None` without touching anything when the budget is
/// already spent.
pub fn stabilizing_impulse(
    pop: &mut Population,
    i: usize,
    evaluator: &mut Evaluator,
    rng: &mut ChaCha8Rng,
    reference_mode: ReferenceMode,
) -> Option<(bool, ImpulseEvent)> {
    if evaluator.budget().remaining() == 0 {
        return None;
    }
    let np = pop.size();
    let d = pop.dimension();
    let best = pop.best_index();

    // Reference: compare against a random other individual. If it is worse
    // than x_i, aim for the population best with gains in [-1, 0); if it is
    // at least as good, jump exactly onto it on the modified dimensions.
    let (reference_idx, toward_best) = match reference_mode {
        ReferenceMode::GbestOnly => (best, true),
        ReferenceMode::Mixed => {
            let k = loop {
                let k = rng.random_range(0..np);
                if k != i {
                    break k;
                }
            };
            if pop.members[i].fitness < pop.members[k].fitness {
                (best, true)
            } else {
                (k, false)
            }
        }
    };
    let reference = pop.members[reference_idx].position.clone();

    let dm = rng.random_range(1..=d);
    let dims = rand::seq::index::sample(rng, d, dm);
    let mut gain = vec![0.0; d];
    for j in dims.iter() {
        gain[j] = if toward_best {
            rng.random_range(-1.0..0.0)
        } else {
            -1.0
        };
    }

    let error_vec: Vec<f64> = pop.members[i]
        .position
        .iter()
        .zip(&reference)
        .map(|(a, b)| a - b)
        .collect();
    let candidate = apply_stabilizing_gain(&pop.members[i].position, &reference, &gain);
    let value = evaluator.try_evaluate(&candidate)?;
    let accepted = value <= pop.members[i].fitness;
    if accepted {
        let member = &mut pop.members[i];
        member.position = candidate;
        member.fitness = value;
        member.stagnation = 0;
    }
    let event = ImpulseEvent {
        kind: ImpulseKind::Stabilizing,
        index: i,
        gain,
        reference: ImpulseReference::State(reference),
        error_vec,
        accepted,
        modified_dims: dm,
    };
    Some((accepted, event))
}

/// Relocate individual `i` inside the population box `[box_lower,
/// box_upper]` with per-dimension gains in (0, 1). The replacement is
/// unconditional and costs one evaluation; `None` when the budget is spent.
///
/// The box is computed by the caller once per batch, before any member of
/// the batch moves.
pub fn destabilizing_impulse(
    pop: &mut Population,
    i: usize,
    box_lower: &[f64],
    box_upper: &[f64],
    evaluator: &mut Evaluator,
    rng: &mut ChaCha8Rng,
    all_dims: bool,
) -> Option<ImpulseEvent> {
    if evaluator.budget().remaining() == 0 {
        return None;
    }
    let d = pop.dimension();
    let mut gain = vec![0.0; d];
    let dm = if all_dims {
        for g in &mut gain {
            *g = open01(rng);
        }
        d
    } else {
        let dm = rng.random_range(1..=d);
        for j in rand::seq::index::sample(rng, d, dm).iter() {
            gain[j] = open01(rng);
        }
        dm
    };
    let error_vec: Vec<f64> = box_upper
        .iter()
        .zip(box_lower)
        .map(|(u, l)| u - l)
        .collect();
    let candidate =
        apply_destabilizing_gain(&pop.members[i].position, box_lower, box_upper, &gain);
    let value = evaluator.try_evaluate(&candidate)?;
    let member = &mut pop.members[i];
    member.position = candidate;
    member.fitness = value;
    member.stagnation = 0;
    Some(ImpulseEvent {
        kind: ImpulseKind::Destabilizing,
        index: i,
        gain,
        reference: ImpulseReference::PopulationBox {
            lower: box_lower.to_vec(),
            upper: box_upper.to_vec(),
        },
        error_vec,
        accepted: true,
        modified_dims: dm,
    })
}

/// Trigger bookkeeping for the impulse layer.
#[derive(Debug, Clone)]
pub struct EtiState {
    /// Current impulse-candidate count.
    pub m: usize,
    /// Lower bound on `m`.
    pub ln: usize,
    /// Upper bound on `m`, enforced at the selection sites.
    pub un: usize,
    /// Initial selection probability for destabilizing candidates.
    pub pr_base: f64,
    /// Update rate of the current generation.
    pub ur: f64,
    /// Update rate of the previous generation.
    pub ur_prev: f64,
    /// Best population fitness recorded after the current DE selection.
    pub gbest: f64,
    /// Same, from the previous generation.
    pub gbest_prev: f64,
}

impl EtiState {
    pub fn new(ln: usize, un: usize, pr_base: f64, initial_best: f64) -> Self {
        assert!(ln >= 1 && ln <= un, "need 1 <= LN <= UN");
        Self {
            m: ln,
            ln,
            un,
            pr_base,
            ur: 0.0,
            ur_prev: 0.0,
            gbest: initial_best,
            gbest_prev: initial_best,
        }
    }
}

/// Run the impulse layer once at the end of a DE generation.
///
/// `up` is the number of individuals replaced by the generation's
/// selection. Every impulse event is passed to `on_event`; when the budget
/// is exhausted the hook silently stops firing impulses.
#[allow(clippy::too_many_arguments)]
pub fn generation_hook(
    pop: &mut Population,
    up: u32,
    state: &mut EtiState,
    evaluator: &mut Evaluator,
    rng: &mut ChaCha8Rng,
    ablation: &AblationConfig,
    destab_all_dims: bool,
    mut on_event: impl FnMut(&ImpulseEvent),
) {
    if !ablation.eti_mode.enabled() {
        return;
    }
    let np = pop.size();

    // A strictly better best after DE selection shrinks M.
    state.gbest_prev = state.gbest;
    state.gbest = pop.best_fitness();
    if state.gbest < state.gbest_prev {
        state.m = rng.random_range(state.ln..=state.m);
    }

    let ranks = rank_population(pop);
    state.ur_prev = state.ur;
    state.ur = update_rate(up, np);

    if state.ur == 0.0 {
        if !ablation.eti_mode.stall_branch() {
            return;
        }
        state.m = state.m.min(state.un);
        let candidates = candidates_for_mode(&ranks, state.m, ablation.ranking_mode, rng);
        let selected = random_selection(&candidates, state.pr_base, rng);
        let (box_lower, box_upper) = pop.bounding_box();
        for idx in selected {
            match destabilizing_impulse(
                pop,
                idx,
                &box_lower,
                &box_upper,
                evaluator,
                rng,
                destab_all_dims,
            ) {
                Some(event) => on_event(&event),
                None => break,
            }
        }
    } else if state.ur < state.ur_prev {
        if !ablation.eti_mode.stabilizing_branch() {
            return;
        }
        state.m = state.m.min(state.un);
        let candidates = candidates_for_mode(&ranks, state.m, ablation.ranking_mode, rng);
        let mut any_accepted = false;
        for &idx in &candidates {
            match stabilizing_impulse(pop, idx, evaluator, rng, ablation.reference_mode) {
                Some((zeta, event)) => {
                    any_accepted |= zeta;
                    on_event(&event);
                }
                None => break,
            }
        }
        if !any_accepted && ablation.eti_mode.zeta_fallback() {
            let selected = random_selection(&candidates, state.pr_base, rng);
            let (box_lower, box_upper) = pop.bounding_box();
            for idx in selected {
                match destabilizing_impulse(
                    pop,
                    idx,
                    &box_lower,
                    &box_upper,
                    evaluator,
                    rng,
                    destab_all_dims,
                ) {
                    Some(event) => {
                        state.m += 1;
                        on_event(&event);
                    }
                    None => break,
                }
            }
        }
        // A best produced by the impulses themselves also shrinks M.
        if pop.best_fitness() < state.gbest {
            state.m = rng.random_range(state.ln..=state.m);
        }
    }
}
