//! Parameter-control plugins and the named algorithm configurations
//! accepted on the CLI.
//!
//! A configuration name has the form `family/mode`, e.g. `de-rand-1/plain`
//! or `jde/eti3`. The family fixes the mutation strategy, F/CR handling and
//! population size; the mode selects which parts of the impulsive-control
//! hook are active.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::de::{Mutation, ParamControl, StrategyParams};
use crate::{Error, Result};

/// Which branches of the impulsive-control hook run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EtiMode {
    /// Plain DE; the hook is a no-op.
    Off,
    /// Both impulse kinds plus the failed-stabilizing fallback.
    Full,
    /// Only the stalled-population (update rate zero) destabilizing branch.
    Eti1,
    /// Full minus the stalled-population destabilizing branch.
    Eti2,
    /// Full minus the failed-stabilizing destabilizing fallback.
    Eti3,
    /// Stabilizing impulses only.
    Eti4,
}

impl EtiMode {
    pub fn enabled(self) -> bool {
        self != EtiMode::Off
    }

    /// Destabilizing impulses when the update rate hits zero.
    pub fn stall_branch(self) -> bool {
        matches!(self, EtiMode::Full | EtiMode::Eti1 | EtiMode::Eti3)
    }

    /// Stabilizing impulses when the update rate declines.
    pub fn stabilizing_branch(self) -> bool {
        matches!(
            self,
            EtiMode::Full | EtiMode::Eti2 | EtiMode::Eti3 | EtiMode::Eti4
        )
    }

    /// Destabilizing fallback when every stabilizing impulse failed.
    pub fn zeta_fallback(self) -> bool {
        matches!(self, EtiMode::Full | EtiMode::Eti2)
    }
}

/// How the stabilizing reference state is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMode {
    /// Population best or a better random individual, per comparison draw.
    Mixed,
    /// Always the population best.
    GbestOnly,
}

/// How impulse candidates are picked from the population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingMode {
    /// Sum of fitness rank and stagnation rank.
    Combined,
    /// Fitness rank only.
    FitnessOnly,
    /// Stagnation rank only.
    StagnationOnly,
    /// Uniform random candidates, ignoring ranks.
    Random,
}

/// Complete routing switch set for the impulsive-control hook.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AblationConfig {
    pub eti_mode: EtiMode,
    pub reference_mode: ReferenceMode,
    pub ranking_mode: RankingMode,
}

impl AblationConfig {
    pub fn off() -> Self {
        Self {
            eti_mode: EtiMode::Off,
            reference_mode: ReferenceMode::Mixed,
            ranking_mode: RankingMode::Combined,
        }
    }

    pub fn full() -> Self {
        Self {
            eti_mode: EtiMode::Full,
            reference_mode: ReferenceMode::Mixed,
            ranking_mode: RankingMode::Combined,
        }
    }
}

/// Per-individual self-adaptive F/CR pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JdeParams {
    pub f: f64,
    pub cr: f64,
}

/// Candidate F/CR for the next trial: with probability `tau1` a fresh
/// `F' in [0.1, 1.0]`, with probability `tau2` a fresh `CR' in [0, 1]`,
/// otherwise the stored values. The caller commits the candidate only if
/// the trial wins selection.
pub fn jde_adapt(current: JdeParams, tau1: f64, tau2: f64, rng: &mut ChaCha8Rng) -> JdeParams {
    let f = if rng.random::<f64>() < tau1 {
        0.1 + 0.9 * rng.random::<f64>()
    } else {
        current.f
    };
    let cr = if rng.random::<f64>() < tau2 {
        rng.random::<f64>()
    } else {
        current.cr
    };
    JdeParams { f, cr }
}

/// Self-adaptive parameter control with commit-on-success semantics.
#[derive(Debug, Clone)]
pub struct JdeControl {
    strategy: Mutation,
    tau1: f64,
    tau2: f64,
    committed: Vec<JdeParams>,
    pending: Vec<JdeParams>,
}

impl JdeControl {
    pub fn new(np: usize, strategy: Mutation, tau1: f64, tau2: f64) -> Self {
        let initial = JdeParams { f: 0.5, cr: 0.9 };
        Self {
            strategy,
            tau1,
            tau2,
            committed: vec![initial; np],
            pending: vec![initial; np],
        }
    }

    pub fn committed(&self) -> &[JdeParams] {
        &self.committed
    }
}

impl ParamControl for JdeControl {
    fn params_for(&mut self, index: usize, rng: &mut ChaCha8Rng) -> StrategyParams {
        let candidate = jde_adapt(self.committed[index], self.tau1, self.tau2, rng);
        self.pending[index] = candidate;
        StrategyParams::new(self.strategy, candidate.f, candidate.cr)
    }

    fn commit(&mut self, index: usize, accepted: bool) {
        if accepted {
            self.committed[index] = self.pending[index];
        }
    }
}

/// How a named configuration supplies F/CR.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlSpec {
    Fixed { f: f64, cr: f64 },
    Jde { tau1: f64, tau2: f64 },
}

/// A fully resolved algorithm configuration.
#[derive(Debug, Clone, Serialize)]
pub struct AlgorithmConfig {
    pub name: String,
    pub np: usize,
    pub strategy: &'static str,
    #[serde(skip)]
    pub mutation: Mutation,
    pub control: ControlSpec,
    pub ablation: AblationConfig,
    /// Destabilizing impulses randomize every dimension when true; the
    /// alternative injects only a uniformly drawn subset of dimensions.
    pub destab_all_dims: bool,
    /// Initial selection probability for destabilizing candidates.
    pub pr_base: f64,
    /// Lower bound on the impulse-candidate count.
    pub ln: usize,
    /// Upper bound on the impulse-candidate count.
    pub un: usize,
}

impl AlgorithmConfig {
    /// Build the per-run parameter controller.
    pub fn make_control(&self) -> Box<dyn ParamControl> {
        match self.control {
            ControlSpec::Fixed { f, cr } => Box::new(crate::de::FixedParams(
                StrategyParams::new(self.mutation, f, cr),
            )),
            ControlSpec::Jde { tau1, tau2 } => {
                Box::new(JdeControl::new(self.np, self.mutation, tau1, tau2))
            }
        }
    }
}

fn strategy_label(m: Mutation) -> &'static str {
    match m {
        Mutation::Rand1 => "rand/1",
        Mutation::Rand2 => "rand/2",
        Mutation::Best1 => "best/1",
        Mutation::Best2 => "best/2",
        Mutation::CurrentToBest1 => "current-to-best/1",
        Mutation::CurrentToRand1 => "current-to-rand/1",
    }
}

/// Resolve a `family/mode` name into a full configuration.
///
/// Families: `de-rand-1` (rand/1/bin, F=0.5, CR=0.9, NP=100), `de-best-1`
/// (best/1/bin, F=0.7, CR=0.5, NP=50), `jde` (self-adaptive rand/1/bin,
/// tau1=tau2=0.1, NP=100). Modes: `plain`, `eti`, `eti1`..`eti4`, `etigb`,
/// `r1`, `r2`, `nor`.
pub fn named_config(name: &str) -> Result<AlgorithmConfig> {
    let (family, mode) = name
        .split_once('/')
        .ok_or_else(|| Error::UnknownAlgorithm(name.to_string()))?;

    let (mutation, control, np) = match family {
        "de-rand-1" => (Mutation::Rand1, ControlSpec::Fixed { f: 0.5, cr: 0.9 }, 100),
        "de-best-1" => (Mutation::Best1, ControlSpec::Fixed { f: 0.7, cr: 0.5 }, 50),
        "jde" => (
            Mutation::Rand1,
            ControlSpec::Jde {
                tau1: 0.1,
                tau2: 0.1,
            },
            100,
        ),
        _ => return Err(Error::UnknownAlgorithm(name.to_string())),
    };

    let mut ablation = AblationConfig::full();
    match mode {
        "plain" => ablation = AblationConfig::off(),
        "eti" => {}
        "eti1" => ablation.eti_mode = EtiMode::Eti1,
        "eti2" => ablation.eti_mode = EtiMode::Eti2,
        "eti3" => ablation.eti_mode = EtiMode::Eti3,
        "eti4" => ablation.eti_mode = EtiMode::Eti4,
        "etigb" => ablation.reference_mode = ReferenceMode::GbestOnly,
        "r1" => ablation.ranking_mode = RankingMode::FitnessOnly,
        "r2" => ablation.ranking_mode = RankingMode::StagnationOnly,
        "nor" => ablation.ranking_mode = RankingMode::Random,
        _ => return Err(Error::UnknownAlgorithm(name.to_string())),
    }

    Ok(AlgorithmConfig {
        name: name.to_string(),
        np,
        strategy: strategy_label(mutation),
        mutation,
        control,
        ablation,
        // Subset-injection reproduces the published comparisons; the
        // all-dimensions variant is available through this switch.
        destab_all_dims: false,
        pr_base: 0.2,
        ln: 1,
        un: np,
    })
}
