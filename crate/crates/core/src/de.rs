//! Core differential evolution: population state, mutation strategies,
//! binomial crossover, boundary repair, and one-to-one selection under a
//! strict function-evaluation budget.
//!
//! All stochastic choices pull from a single seedable generator in a fixed
//! order, so a run replays bit-identically from its seed:
//! per individual, the parameter controller draws first, then mutation
//! indices (`r1`, `r2`, ... each by rejection), then `j_rand`, then one
//! uniform per dimension for the crossover mask, then one uniform per
//! out-of-bounds coordinate during repair.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::benchfn::ObjectiveFunction;
use crate::{Error, Result};

/// Function-evaluation budget. Every objective evaluation anywhere in the
/// system increments `used_fes` by exactly one, and `used_fes` never
/// exceeds `max_fes`.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    max_fes: u64,
    used_fes: u64,
}

impl Budget {
    pub fn new(max_fes: u64) -> Self {
        Self {
            max_fes,
            used_fes: 0,
        }
    }

    pub fn max(&self) -> u64 {
        self.max_fes
    }

    pub fn used(&self) -> u64 {
        self.used_fes
    }

    pub fn remaining(&self) -> u64 {
        self.max_fes - self.used_fes
    }

    /// Reserve one evaluation. Returns `false` when the budget is spent.
    pub fn try_consume(&mut self) -> bool {
        if self.used_fes < self.max_fes {
            self.used_fes += 1;
            true
        } else {
            false
        }
    }
}

/// One candidate solution with its cached objective value and the number of
/// consecutive generations it has survived unchanged.
#[derive(Debug, Clone)]
pub struct Individual {
    pub position: Vec<f64>,
    pub fitness: f64,
    pub stagnation: u32,
}

/// The population plus its search-space bounds.
#[derive(Debug, Clone)]
pub struct Population {
    pub members: Vec<Individual>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub generation: u64,
}

impl Population {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    /// Index of the best (lowest-fitness) member; ties go to the lower index.
    pub fn best_index(&self) -> usize {
        let mut best = 0;
        for (i, m) in self.members.iter().enumerate().skip(1) {
            if m.fitness < self.members[best].fitness {
                best = i;
            }
        }
        best
    }

    pub fn best_fitness(&self) -> f64 {
        self.members[self.best_index()].fitness
    }

    /// Per-dimension (min, max) over the current members.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dimension();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for m in &self.members {
            for j in 0..d {
                lo[j] = lo[j].min(m.position[j]);
                hi[j] = hi[j].max(m.position[j]);
            }
        }
        (lo, hi)
    }
}

/// Mutation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    Rand1,
    Rand2,
    Best1,
    Best2,
    CurrentToBest1,
    /// Already blends target and donors, so its output bypasses crossover.
    CurrentToRand1,
}

impl Mutation {
    /// How many distinct random indices (all different from the target) the
    /// strategy draws.
    pub fn random_indices(self) -> usize {
        match self {
            Mutation::Rand1 | Mutation::CurrentToRand1 => 3,
            Mutation::Rand2 => 5,
            Mutation::Best1 | Mutation::CurrentToBest1 => 2,
            Mutation::Best2 => 4,
        }
    }

    /// Smallest population for which the index constraints are satisfiable.
    pub fn min_population(self) -> usize {
        self.random_indices() + 1
    }

    pub fn skips_crossover(self) -> bool {
        matches!(self, Mutation::CurrentToRand1)
    }
}

/// Control parameters for one trial-vector construction.
#[derive(Debug, Clone, Copy)]
pub struct StrategyParams {
    pub strategy: Mutation,
    /// Scaling factor, > 0.
    pub f: f64,
    /// Crossover probability in [0, 1].
    pub cr: f64,
    /// Combination coefficient for current-to-rand/1; the second difference
    /// is scaled by `k_coeff * f`.
    pub k_coeff: f64,
}

impl StrategyParams {
    pub fn new(strategy: Mutation, f: f64, cr: f64) -> Self {
        Self {
            strategy,
            f,
            cr,
            k_coeff: 0.5,
        }
    }
}

/// Per-individual parameter supplier. Implementations may adapt F/CR over
/// time; candidate values are committed only when the trial wins selection.
pub trait ParamControl {
    fn params_for(&mut self, index: usize, rng: &mut ChaCha8Rng) -> StrategyParams;

    /// Called once per evaluated trial with the selection outcome.
    fn commit(&mut self, index: usize, accepted: bool);
}

/// Fixed F/CR for every individual and generation.
#[derive(Debug, Clone)]
pub struct FixedParams(pub StrategyParams);

impl ParamControl for FixedParams {
    fn params_for(&mut self, _index: usize, _rng: &mut ChaCha8Rng) -> StrategyParams {
        self.0
    }

    fn commit(&mut self, _index: usize, _accepted: bool) {}
}

/// Wraps an objective with the budget, a best-so-far archive updated on
/// every single evaluation, and an optional convergence trace sampled on a
/// fixed FES stride.
pub struct Evaluator<'a> {
    objective: &'a ObjectiveFunction,
    budget: Budget,
    best_value: f64,
    best_point: Vec<f64>,
    trace: Option<Trace>,
}

#[derive(Debug, Clone)]
struct Trace {
    stride: u64,
    points: Vec<(u64, f64)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(objective: &'a ObjectiveFunction, budget: Budget) -> Self {
        Self {
            objective,
            budget,
            best_value: f64::INFINITY,
            best_point: Vec::new(),
            trace: None,
        }
    }

    /// Record `(used_fes, best_so_far)` every `stride` evaluations.
    pub fn with_trace(mut self, stride: u64) -> Self {
        self.trace = Some(Trace {
            stride: stride.max(1),
            points: Vec::new(),
        });
        self
    }

    pub fn objective(&self) -> &ObjectiveFunction {
        self.objective
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn best_value(&self) -> f64 {
        self.best_value
    }

    pub fn best_point(&self) -> &[f64] {
        &self.best_point
    }

    /// Evaluate `x` if budget remains; `None` once the budget is spent.
    pub fn try_evaluate(&mut self, x: &[f64]) -> Option<f64> {
        if !self.budget.try_consume() {
            return None;
        }
        let value = self.objective.evaluate(x);
        if value < self.best_value {
            self.best_value = value;
            self.best_point.clear();
            self.best_point.extend_from_slice(x);
        }
        if let Some(trace) = &mut self.trace {
            if self.budget.used_fes.is_multiple_of(trace.stride) {
                trace.points.push((self.budget.used_fes, self.best_value));
            }
        }
        Some(value)
    }

    /// Sampled trace plus a terminal point at the current FES count.
    pub fn curve_with_terminal(&self) -> Vec<(u64, f64)> {
        let mut points = self
            .trace
            .as_ref()
            .map(|t| t.points.clone())
            .unwrap_or_default();
        if points.last().map(|p| p.0) != Some(self.budget.used_fes) && self.budget.used_fes > 0 {
            points.push((self.budget.used_fes, self.best_value));
        }
        points
    }
}

/// Create a uniform random population inside the bounds and evaluate every
/// member (consumes `np` evaluations).
pub fn initialize(
    np: usize,
    strategy: Mutation,
    evaluator: &mut Evaluator,
    rng: &mut ChaCha8Rng,
) -> Result<Population> {
    if np < 5 {
        return Err(Error::InvalidConfig(format!(
            "population size must be at least 5, got {np}"
        )));
    }
    if np < strategy.min_population() {
        return Err(Error::InvalidConfig(format!(
            "population size {np} too small for {strategy:?} (needs {})",
            strategy.min_population()
        )));
    }
    if evaluator.budget().remaining() < np as u64 {
        return Err(Error::InsufficientBudget {
            needed: np as u64,
            remaining: evaluator.budget().remaining(),
        });
    }
    let objective = evaluator.objective();
    let lower = objective.lower().to_vec();
    let upper = objective.upper().to_vec();
    let d = objective.dimension();
    let mut members = Vec::with_capacity(np);
    for _ in 0..np {
        let position: Vec<f64> = (0..d)
            .map(|j| rng.random_range(lower[j]..=upper[j]))
            .collect();
        let fitness = evaluator
            .try_evaluate(&position)
            .expect("budget was checked above");
        members.push(Individual {
            position,
            fitness,
            stagnation: 0,
        });
    }
    Ok(Population {
        members,
        lower,
        upper,
        generation: 0,
    })
}

/// Draw `count` distinct indices from `0..np`, all different from `target`.
fn draw_distinct(np: usize, target: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    debug_assert!(np > count, "population too small for index constraints");
    let mut picked = Vec::with_capacity(count);
    while picked.len() < count {
        let r = rng.random_range(0..np);
        if r != target && !picked.contains(&r) {
            picked.push(r);
        }
    }
    picked
}

/// Produce a donor vector for member `i` (or a finished trial for
/// current-to-rand/1). Draws the strategy's random indices, then applies
/// the difference formula.
pub fn mutate(
    pop: &Population,
    i: usize,
    params: &StrategyParams,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let indices = draw_distinct(pop.size(), i, params.strategy.random_indices(), rng);
    mutate_with_indices(pop, i, params, &indices)
}

/// The difference formulas themselves, with the random indices supplied by
/// the caller. Exposed so the arithmetic can be checked against pinned
/// index choices.
#[allow(clippy::needless_range_loop)]
pub fn mutate_with_indices(
    pop: &Population,
    i: usize,
    params: &StrategyParams,
    indices: &[usize],
) -> Vec<f64> {
    let d = pop.dimension();
    let f = params.f;
    let pos = |k: usize| &pop.members[k].position;
    let best = pop.best_index();
    let mut v = vec![0.0; d];
    match params.strategy {
        Mutation::Rand1 => {
            let (r1, r2, r3) = (indices[0], indices[1], indices[2]);
            for j in 0..d {
                v[j] = pos(r1)[j] + f * (pos(r2)[j] - pos(r3)[j]);
            }
        }
        Mutation::Rand2 => {
            let (r1, r2, r3, r4, r5) =
                (indices[0], indices[1], indices[2], indices[3], indices[4]);
            for j in 0..d {
                v[j] =
                    pos(r1)[j] + f * (pos(r2)[j] - pos(r3)[j]) + f * (pos(r4)[j] - pos(r5)[j]);
            }
        }
        Mutation::Best1 => {
            let (r1, r2) = (indices[0], indices[1]);
            for j in 0..d {
                v[j] = pos(best)[j] + f * (pos(r1)[j] - pos(r2)[j]);
            }
        }
        Mutation::Best2 => {
            let (r1, r2, r3, r4) = (indices[0], indices[1], indices[2], indices[3]);
            for j in 0..d {
                v[j] = pos(best)[j]
                    + f * (pos(r1)[j] - pos(r2)[j])
                    + f * (pos(r3)[j] - pos(r4)[j]);
            }
        }
        Mutation::CurrentToBest1 => {
            let (r1, r2) = (indices[0], indices[1]);
            for j in 0..d {
                v[j] =
                    pos(i)[j] + f * (pos(best)[j] - pos(i)[j]) + f * (pos(r1)[j] - pos(r2)[j]);
            }
        }
        Mutation::CurrentToRand1 => {
            let (r1, r2, r3) = (indices[0], indices[1], indices[2]);
            let k = params.k_coeff;
            let f_hat = k * f;
            for j in 0..d {
                v[j] = pos(i)[j]
                    + k * (pos(r1)[j] - pos(i)[j])
                    + f_hat * (pos(r2)[j] - pos(r3)[j]);
            }
        }
    }
    v
}

/// Binomial crossover. `j_rand` is redrawn per call, so at least one
/// coordinate always comes from the donor.
pub fn crossover(target: &[f64], donor: &[f64], cr: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    assert_eq!(target.len(), donor.len(), "crossover length mismatch");
    let d = target.len();
    let j_rand = rng.random_range(0..d);
    (0..d)
        .map(|j| {
            let r: f64 = rng.random();
            if r <= cr || j == j_rand {
                donor[j]
            } else {
                target[j]
            }
        })
        .collect()
}

/// Replace every out-of-bounds coordinate by a uniform draw within its
/// bounds; in-bounds coordinates (including boundary values) are untouched.
pub fn repair_bounds(x: &mut [f64], lower: &[f64], upper: &[f64], rng: &mut ChaCha8Rng) {
    for j in 0..x.len() {
        if x[j] < lower[j] || x[j] > upper[j] {
            x[j] = rng.random_range(lower[j]..=upper[j]);
        }
    }
}

/// What a generation's selection step did.
#[derive(Debug, Clone, Copy, Default)]
pub struct GenerationOutcome {
    /// UP: how many trials replaced their targets.
    pub replacements: u32,
    /// How many trials were evaluated before the budget ran out.
    pub evaluated: u32,
}

/// One-to-one selection: a trial replaces its target iff `f(u) <= f(x)`.
/// Replaced members get `stagnation = 0`; survivors get `stagnation + 1`.
///
/// If fewer than `trials.len()` evaluations remain, trials are evaluated in
/// index order until exhaustion and selection runs only for those
/// evaluated.
pub fn select_and_advance(
    pop: &mut Population,
    trials: Vec<Vec<f64>>,
    evaluator: &mut Evaluator,
    control: &mut dyn ParamControl,
) -> GenerationOutcome {
    let mut outcome = GenerationOutcome::default();
    for (i, trial) in trials.into_iter().enumerate() {
        let Some(trial_fitness) = evaluator.try_evaluate(&trial) else {
            break;
        };
        outcome.evaluated += 1;
        let member = &mut pop.members[i];
        if trial_fitness <= member.fitness {
            member.position = trial;
            member.fitness = trial_fitness;
            member.stagnation = 0;
            outcome.replacements += 1;
            control.commit(i, true);
        } else {
            member.stagnation += 1;
            control.commit(i, false);
        }
    }
    pop.generation += 1;
    outcome
}

/// Run one full generation: build all trial vectors from the current
/// population snapshot, then evaluate and select.
pub fn evolve_generation(
    pop: &mut Population,
    control: &mut dyn ParamControl,
    evaluator: &mut Evaluator,
    rng: &mut ChaCha8Rng,
) -> GenerationOutcome {
    let np = pop.size();
    let mut trials = Vec::with_capacity(np);
    for i in 0..np {
        let params = control.params_for(i, rng);
        let donor = mutate(pop, i, &params, rng);
        let mut trial = if params.strategy.skips_crossover() {
            donor
        } else {
            crossover(&pop.members[i].position, &donor, params.cr, rng)
        };
        repair_bounds(&mut trial, &pop.lower, &pop.upper, rng);
        trials.push(trial);
    }
    select_and_advance(pop, trials, evaluator, control)
}
