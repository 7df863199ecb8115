use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::learners::{make_learner, Feedback, LearnerConfig, LearnerState};
use crate::metrics::{ExternalRegret, RunRecord};
use crate::Vector;

use super::config::{AdversarialConfig, AdversarySpec};

/// Source of loss gradients for a single learner.
pub trait Adversary {
    /// Gradient for played round `round` (starting at 1) given the action.
    fn gradient(&mut self, round: usize, action: &Vector) -> Vector;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroAdversary;

impl Adversary for ZeroAdversary {
    fn gradient(&mut self, _round: usize, action: &Vector) -> Vector {
        Vector::zeros(action.len())
    }
}

/// Gradient 1 on odd rounds and 0 on even rounds, in every coordinate.
#[derive(Debug, Clone, Copy, Default)]
pub struct AppendixDAdversary;

impl Adversary for AppendixDAdversary {
    fn gradient(&mut self, round: usize, action: &Vector) -> Vector {
        let g = if round % 2 == 1 { 1.0 } else { 0.0 };
        Vector::from_element(action.len(), g)
    }
}

/// Independent uniform gradients in `[-scale, scale]^d`.
#[derive(Debug, Clone)]
pub struct RandomUniformAdversary {
    rng: ChaCha8Rng,
    scale: f64,
}

impl RandomUniformAdversary {
    pub fn new(seed: u64, scale: f64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            scale,
        }
    }
}

impl Adversary for RandomUniformAdversary {
    fn gradient(&mut self, _round: usize, action: &Vector) -> Vector {
        let s = self.scale;
        Vector::from_fn(action.len(), |_, _| self.rng.random_range(-s..=s))
    }
}

/// Replays a fixed list of gradients cyclically.
#[derive(Debug, Clone)]
pub struct ScriptedAdversary {
    gradients: Vec<Vector>,
}

impl ScriptedAdversary {
    pub fn new(gradients: Vec<Vector>) -> Result<Self> {
        if gradients.is_empty() {
            return Err(Error::InvalidArgument("scripted adversary needs gradients".into()));
        }
        Ok(Self { gradients })
    }
}

impl Adversary for ScriptedAdversary {
    fn gradient(&mut self, round: usize, _action: &Vector) -> Vector {
        self.gradients[(round - 1) % self.gradients.len()].clone()
    }
}

/// Output of [`run_adversarial`]. Every played action counts as a round, so
/// EG/EAG use two rounds per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialTrace {
    pub records: Vec<RunRecord>,
    pub plays: Vec<Vector>,
    /// External regret after the last round; absent on unbounded sets.
    pub final_regret: Option<f64>,
    /// Metric-side `Σ_{t≥2} ‖g_t − g_{t−1}‖²` over the received gradients.
    pub variation: f64,
}

/// Single-learner loop: propose, ask the adversary, update.
pub fn run_adversarial(
    mut learner: LearnerState,
    adversary: &mut dyn Adversary,
    rounds: usize,
    stride: usize,
) -> Result<AdversarialTrace> {
    if rounds == 0 || stride == 0 {
        return Err(Error::InvalidArgument("rounds and stride must be positive".into()));
    }
    let set = learner.set().clone();
    let x1 = learner.anchor().clone();
    let mut regret = set.is_bounded().then(|| ExternalRegret::new(set.dim()));
    let mut records = Vec::new();
    let mut plays = Vec::with_capacity(rounds);
    let mut variation = 0.0;
    let mut prev: Option<Vector> = None;
    for t in 1..=rounds {
        let base = learner.base().clone();
        let action = learner.propose();
        let g = adversary.gradient(t, &action);
        if g.len() != action.len() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "adversary returned an invalid gradient at round {t}: {:?}",
                g.as_slice()
            )));
        }
        if let Some(p) = &prev {
            variation += (&g - p).norm_squared();
        }
        if let Some(r) = regret.as_mut() {
            r.push(&action, &g)?;
        }
        learner.update(&Feedback::new(g.clone())?)?;
        if (t - 1).is_multiple_of(stride) || t == rounds {
            records.push(RunRecord {
                t,
                r_tan: None,
                gap: None,
                tgap_exact: None,
                potential: None,
                eta: vec![learner.eta()],
                s: vec![variation],
                ext_regret: vec![regret.as_ref().map(|r| r.value(&set)).transpose()?],
                dyn_regret: vec![None],
                dist_half: (&action - &base).norm(),
                dist_anchor: (&x1 - &base).norm(),
                losses: None,
            });
        }
        plays.push(action);
        prev = Some(g);
    }
    let final_regret = regret.as_ref().map(|r| r.value(&set)).transpose()?;
    Ok(AdversarialTrace {
        records,
        plays,
        final_regret,
        variation,
    })
}

/// Builds learner and adversary from the config and runs it.
pub fn run_adversarial_config(config: &AdversarialConfig) -> Result<AdversarialTrace> {
    config.validate()?;
    let set = config.set.build()?;
    let x1 = match &config.initial {
        Some(x) => Vector::from_column_slice(x),
        None => Vector::zeros(set.dim()),
    };
    let cfg = LearnerConfig {
        eta: config.eta,
        lipschitz: config.lipschitz,
        diameter: config.diameter,
        anchor: true,
    };
    let learner = make_learner(config.algorithm, set, x1, &cfg).map_err(|e| Error::Config(e.to_string()))?;
    let mut adversary: Box<dyn Adversary> = match &config.adversary {
        AdversarySpec::Zero {} => Box::new(ZeroAdversary),
        AdversarySpec::AppendixD {} => Box::new(AppendixDAdversary),
        AdversarySpec::RandomUniform { scale } => Box::new(RandomUniformAdversary::new(config.seed, *scale)),
        AdversarySpec::Scripted { gradients } => Box::new(ScriptedAdversary::new(
            gradients.iter().map(|g| Vector::from_column_slice(g)).collect(),
        )?),
    };
    run_adversarial(learner, adversary.as_mut(), config.horizon, config.stride)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FeasibleSet;
    use crate::learners::Algorithm;

    #[test]
    fn zero_adversary_has_zero_regret() {
        let set = FeasibleSet::cube(3, 1.0).unwrap();
        let l = make_learner(Algorithm::AogAdaptive, set, Vector::from_element(3, 0.2), &LearnerConfig::with_lipschitz(1.0)).unwrap();
        let trace = run_adversarial(l, &mut ZeroAdversary, 100, 10).unwrap();
        assert_eq!(trace.final_regret, Some(0.0));
    }

    #[test]
    fn non_finite_gradient_aborts() {
        struct Bad;
        impl Adversary for Bad {
            fn gradient(&mut self, _round: usize, action: &Vector) -> Vector {
                Vector::from_element(action.len(), f64::NAN)
            }
        }
        let set = FeasibleSet::cube(1, 1.0).unwrap();
        let l = make_learner(Algorithm::Og, set, Vector::zeros(1), &LearnerConfig::with_eta(0.1)).unwrap();
        assert!(run_adversarial(l, &mut Bad, 5, 1).is_err());
    }

    #[test]
    fn random_adversary_is_seeded() {
        let mut a = RandomUniformAdversary::new(9, 1.0);
        let mut b = RandomUniformAdversary::new(9, 1.0);
        let x = Vector::zeros(4);
        for t in 1..20 {
            let g = a.gradient(t, &x);
            assert_eq!(g, b.gradient(t, &x));
            assert!(g.iter().all(|v| v.abs() <= 1.0));
        }
    }
}
