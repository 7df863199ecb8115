use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::{
    make_appendix_d_toy, make_appendix_e_instance, make_bilinear_saddle, make_random_linear_monotone,
    GameOracle,
};
use crate::geometry::FeasibleSet;
use crate::learners::Algorithm;
use crate::Vector;

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn appendix_e_width() -> f64 {
    200.0
}

/// Built-in game, selected by `"id"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameSpec {
    /// `scale·<x, y>` on `[-box_radius, box_radius]^dim` per player.
    Bilinear {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one")]
        box_radius: f64,
        #[serde(default = "one_usize")]
        dim: usize,
    },
    AppendixE {
        n: usize,
        #[serde(default = "appendix_e_width")]
        box_half_width: f64,
    },
    AppendixDToy {},
    /// Seeded skew-plus-diagonal operator; `seed` defaults to the run seed.
    RandomLinearMonotone {
        dims: Vec<usize>,
        #[serde(default)]
        box_half_width: Option<f64>,
        #[serde(default)]
        seed: Option<u64>,
    },
}

impl GameSpec {
    pub fn id(&self) -> &'static str {
        match self {
            GameSpec::Bilinear { .. } => "bilinear",
            GameSpec::AppendixE { .. } => "appendix_e",
            GameSpec::AppendixDToy {} => "appendix_d_toy",
            GameSpec::RandomLinearMonotone { .. } => "random_linear_monotone",
        }
    }

    pub fn build(&self, run_seed: u64) -> Result<Box<dyn GameOracle>> {
        Ok(match self {
            GameSpec::Bilinear { scale, box_radius, dim } => {
                Box::new(make_bilinear_saddle(*scale, *box_radius, (*dim, *dim))?)
            }
            GameSpec::AppendixE { n, box_half_width } => {
                Box::new(make_appendix_e_instance(*n, *box_half_width)?)
            }
            GameSpec::AppendixDToy {} => Box::new(make_appendix_d_toy()?),
            GameSpec::RandomLinearMonotone { dims, box_half_width, seed } => Box::new(
                make_random_linear_monotone(dims, *box_half_width, seed.unwrap_or(run_seed))?,
            ),
        })
    }

    /// Starting profile used when the config gives none: half the box radius
    /// in every coordinate for the bilinear games, `(1/n)·1` for the
    /// quadratic instance, the origin otherwise.
    pub fn default_initial(&self, total_dim: usize) -> Vector {
        match self {
            GameSpec::Bilinear { box_radius, .. } => Vector::from_element(total_dim, 0.5 * box_radius),
            GameSpec::AppendixDToy {} => Vector::from_element(total_dim, 0.5),
            GameSpec::AppendixE { n, .. } => Vector::from_element(total_dim, 1.0 / *n as f64),
            GameSpec::RandomLinearMonotone { .. } => Vector::zeros(total_dim),
        }
    }
}

/// A single value for every player or one value per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerPlayer<T> {
    All(T),
    Each(Vec<T>),
}

impl<T: Clone> PerPlayer<T> {
    pub fn resolve(&self, players: usize, field: &str) -> Result<Vec<T>> {
        match self {
            PerPlayer::All(v) => Ok(vec![v.clone(); players]),
            PerPlayer::Each(vs) if vs.len() == players => Ok(vs.clone()),
            PerPlayer::Each(vs) => Err(Error::Config(format!(
                "{field}: expected 1 or {players} entries, got {}",
                vs.len()
            ))),
        }
    }
}

/// Which per-row metrics to compute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSelection {
    pub gap: bool,
    pub tgap: bool,
    pub external_regret: bool,
    pub dynamic_regret: bool,
    /// `None` tracks the potential whenever every player runs fixed-step AOG
    /// with a common step; `Some(true)` makes that a requirement.
    pub potential: Option<bool>,
}

impl Default for MetricSelection {
    fn default() -> Self {
        Self {
            gap: true,
            tgap: true,
            external_regret: true,
            dynamic_regret: true,
            potential: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfPlayConfig {
    pub game: GameSpec,
    pub algorithm: PerPlayer<Algorithm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<PerPlayer<f64>>,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one_usize")]
    pub stride: usize,
    /// Joint starting profile, player 1 first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    #[serde(default)]
    pub metrics: MetricSelection,
    /// Number of leading rounds whose full vectors are kept.
    #[serde(default)]
    pub log_iterates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Feasible set of a single adversarial learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Cube { dim: usize, half_width: f64 },
    Ball { dim: usize, radius: f64 },
}

impl SetSpec {
    pub fn build(&self) -> Result<FeasibleSet> {
        match self {
            SetSpec::Cube { dim, half_width } => FeasibleSet::cube(*dim, *half_width),
            SetSpec::Ball { dim, radius } => FeasibleSet::ball(Vector::zeros(*dim), *radius),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdversarySpec {
    Zero {},
    /// Gradient 1 on odd rounds and 0 on even rounds, in every coordinate.
    AppendixD {},
    /// Independent uniform gradients in `[-scale, scale]^d`, seeded by the run seed.
    RandomUniform {
        #[serde(default = "one")]
        scale: f64,
    },
    /// Replays the listed gradients cyclically.
    Scripted { gradients: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarialConfig {
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diameter: Option<f64>,
    pub set: SetSpec,
    /// Starting point; the set's center when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    pub adversary: AdversarySpec,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one_usize")]
    pub stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// A config file: `{"mode": "selfplay", …}` or `{"mode": "adversarial", …}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Selfplay(SelfPlayConfig),
    Adversarial(AdversarialConfig),
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentConfig::Selfplay(c) => c.validate(),
            ExperimentConfig::Adversarial(c) => c.validate(),
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            ExperimentConfig::Selfplay(c) => c.seed = seed,
            ExperimentConfig::Adversarial(c) => c.seed = seed,
        }
    }

    pub fn set_stride(&mut self, stride: usize) {
        match self {
            ExperimentConfig::Selfplay(c) => c.stride = stride,
            ExperimentConfig::Adversarial(c) => c.stride = stride,
        }
    }

    pub fn set_horizon(&mut self, horizon: usize) {
        match self {
            ExperimentConfig::Selfplay(c) => c.horizon = horizon,
            ExperimentConfig::Adversarial(c) => c.horizon = horizon,
        }
    }

    pub fn set_algorithm(&mut self, algorithm: Algorithm) {
        match self {
            ExperimentConfig::Selfplay(c) => c.algorithm = PerPlayer::All(algorithm),
            ExperimentConfig::Adversarial(c) => c.algorithm = algorithm,
        }
    }

    pub fn output(&self) -> Option<&Path> {
        match self {
            ExperimentConfig::Selfplay(c) => c.output.as_deref(),
            ExperimentConfig::Adversarial(c) => c.output.as_deref(),
        }
    }
}

fn check_positive(value: f64, field: &str) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{field}: must be positive and finite, got {value}")))
    }
}

impl SelfPlayConfig {
    /// Field-level checks that do not need the game to be built.
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 2 {
            return Err(Error::Config(format!("T: must be at least 2, got {}", self.horizon)));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride: must be at least 1".into()));
        }
        if let Some(eta) = &self.eta {
            let values = match eta {
                PerPlayer::All(v) => vec![*v],
                PerPlayer::Each(vs) => vs.clone(),
            };
            for v in values {
                check_positive(v, "eta")?;
            }
        }
        match &self.game {
            GameSpec::Bilinear { scale, box_radius, dim } => {
                check_positive(*scale, "game.scale")?;
                check_positive(*box_radius, "game.box_radius")?;
                if *dim == 0 {
                    return Err(Error::Config("game.dim: must be positive".into()));
                }
            }
            GameSpec::AppendixE { n, box_half_width } => {
                if *n < 2 {
                    return Err(Error::Config(format!("game.n: must be at least 2, got {n}")));
                }
                check_positive(*box_half_width, "game.box_half_width")?;
            }
            GameSpec::AppendixDToy {} => {}
            GameSpec::RandomLinearMonotone { dims, box_half_width, .. } => {
                if dims.is_empty() || dims.contains(&0) {
                    return Err(Error::Config("game.dims: every player needs a positive dimension".into()));
                }
                if let Some(w) = box_half_width {
                    check_positive(*w, "game.box_half_width")?;
                }
            }
        }
        if let Some(x) = &self.initial {
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("initial: entries must be finite".into()));
            }
        }
        Ok(())
    }
}

impl AdversarialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::Config("T: must be at least 1".into()));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride: must be at least 1".into()));
        }
        if let Some(v) = self.eta {
            check_positive(v, "eta")?;
        }
        if let Some(v) = self.lipschitz {
            check_positive(v, "lipschitz")?;
        }
        if let Some(v) = self.diameter {
            check_positive(v, "diameter")?;
        }
        let dim = match &self.set {
            SetSpec::Cube { dim, half_width } => {
                check_positive(*half_width, "set.half_width")?;
                *dim
            }
            SetSpec::Ball { dim, radius } => {
                check_positive(*radius, "set.radius")?;
                *dim
            }
        };
        if dim == 0 {
            return Err(Error::Config("set.dim: must be positive".into()));
        }
        if let Some(x) = &self.initial {
            if x.len() != dim {
                return Err(Error::Config(format!(
                    "initial: expected {dim} entries, got {}",
                    x.len()
                )));
            }
        }
        match &self.adversary {
            AdversarySpec::RandomUniform { scale } => check_positive(*scale, "adversary.scale")?,
            AdversarySpec::Scripted { gradients } => {
                if gradients.is_empty() {
                    return Err(Error::Config("adversary.gradients: must not be empty".into()));
                }
                if let Some(g) = gradients.iter().find(|g| g.len() != dim) {
                    return Err(Error::Config(format!(
                        "adversary.gradients: expected {dim} entries per gradient, got {}",
                        g.len()
                    )));
                }
            }
            AdversarySpec::Zero {} | AdversarySpec::AppendixD {} => {}
        }
        Ok(())
    }
}

/// Parses and validates a JSON config. Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_selfplay_with_defaults() {
        let cfg = parse_config(
            r#"{"mode": "selfplay", "game": {"id": "appendix_e", "n": 20},
                "algorithm": "aog", "eta": 0.3, "T": 100}"#,
        )
        .unwrap();
        let ExperimentConfig::Selfplay(c) = cfg else { panic!() };
        assert_eq!(c.game, GameSpec::AppendixE { n: 20, box_half_width: 200.0 });
        assert_eq!(c.stride, 1);
        assert_eq!(c.algorithm.resolve(2, "algorithm").unwrap(), vec![Algorithm::Aog; 2]);
        assert_eq!(c.metrics, MetricSelection::default());
    }

    #[test]
    fn rejects_unknown_keys() {
        for text in [
            r#"{"mode": "selfplay", "game": {"id": "appendix_d_toy"}, "algorithm": "aog", "T": 10, "typo": 1}"#,
            r#"{"mode": "selfplay", "game": {"id": "appendix_d_toy", "n": 3}, "algorithm": "aog", "T": 10}"#,
            r#"{"mode": "selfplay", "game": {"id": "appendix_d_toy"}, "algorithm": "aog", "T": 10, "metrics": {"gaps": true}}"#,
        ] {
            assert!(matches!(parse_config(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn field_level_validation() {
        let err = parse_config(
            r#"{"mode": "selfplay", "game": {"id": "bilinear"}, "algorithm": "og", "T": 1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("T:"));
        let err = parse_config(
            r#"{"mode": "adversarial", "algorithm": "aog_adaptive", "lipschitz": 1,
                "set": {"kind": "cube", "dim": 2, "half_width": 1},
                "adversary": {"kind": "scripted", "gradients": [[1.0]]}, "T": 5}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("adversary.gradients"));
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = parse_config(
            r#"{"mode": "adversarial", "algorithm": "eag", "eta": 0.5,
                "set": {"kind": "cube", "dim": 1, "half_width": 1},
                "adversary": {"kind": "appendix_d"}, "T": 10}"#,
        )
        .unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
