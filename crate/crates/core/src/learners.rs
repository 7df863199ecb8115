//! Online learners behind one propose/update interface.
//!
//! Every learner plays an action, receives the gradient of its loss at that
//! action and updates. The single-call learners (GD, OG, AOG, adaptive AOG)
//! play one action per round. EG and EAG are two-phase: they first play the
//! base iterate `x_t`, then the extrapolated point `x_{t+½}`, and the round
//! counter advances after the second phase.
//!
//! AOG uses the anchored optimistic step
//!
//! ```text
//! x_{t+½} = Π[x_t − η_t g_{t−½} + (x₁ − x_t)/(t+1)]
//! x_{t+1} = Π[x_t − η_t g_{t+½} + (x₁ − x_t)/(t+1)]
//! ```
//!
//! with `g_{½} = 0`. OG is the same step with the anchor weight set to zero.
//! The adaptive variant starts from `η₁ = 1/(3L)` and, once the accumulated
//! variation `S = Σ_{s≥2} ‖g_{s+½} − g_{s−½}‖²` exceeds `4500πD²L²`, switches
//! to `η = 1/√(1+S)` for good.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::geometry::FeasibleSet;
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Gd,
    Og,
    Eg,
    Eag,
    Aog,
    AogAdaptive,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Gd,
        Algorithm::Og,
        Algorithm::Eg,
        Algorithm::Eag,
        Algorithm::Aog,
        Algorithm::AogAdaptive,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Gd => "gd",
            Algorithm::Og => "og",
            Algorithm::Eg => "eg",
            Algorithm::Eag => "eag",
            Algorithm::Aog => "aog",
            Algorithm::AogAdaptive => "aog_adaptive",
        }
    }

    /// EG and EAG play two actions per iteration.
    pub fn is_two_phase(self) -> bool {
        matches!(self, Algorithm::Eg | Algorithm::Eag)
    }

    fn anchored(self) -> bool {
        matches!(self, Algorithm::Eag | Algorithm::Aog | Algorithm::AogAdaptive)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm tag {s:?}")))
    }
}

/// Step-size settings for [`make_learner`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerConfig {
    /// Constant step size; overrides the defaults derived from `lipschitz`.
    pub eta: Option<f64>,
    pub lipschitz: Option<f64>,
    /// Diameter used by the adaptive threshold; defaults to the set's diameter.
    pub diameter: Option<f64>,
    /// Setting this to `false` removes the anchor pull from AOG and EAG.
    pub anchor: bool,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            eta: None,
            lipschitz: None,
            diameter: None,
            anchor: true,
        }
    }
}

impl LearnerConfig {
    pub fn with_eta(eta: f64) -> Self {
        Self {
            eta: Some(eta),
            ..Self::default()
        }
    }

    pub fn with_lipschitz(lipschitz: f64) -> Self {
        Self {
            lipschitz: Some(lipschitz),
            ..Self::default()
        }
    }
}

/// Gradient received for the action played this round.
#[derive(Debug, Clone, PartialEq)]
pub struct Feedback {
    gradient: Vector,
}

impl Feedback {
    pub fn new(gradient: Vector) -> Result<Self> {
        ensure_finite(gradient.as_slice(), "feedback gradient")?;
        Ok(Self { gradient })
    }

    pub fn gradient(&self) -> &Vector {
        &self.gradient
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum StepRule {
    Fixed,
    Adaptive { threshold: f64, latched: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Base,
    Extra,
}

/// Full iteration state of one learner.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    algorithm: Algorithm,
    set: FeasibleSet,
    anchor: Vector,
    base: Vector,
    half: Vector,
    prev_grad: Vector,
    round: usize,
    eta: f64,
    variation: f64,
    anchor_enabled: bool,
    rule: StepRule,
    phase: Phase,
    pending: bool,
}

/// Builds a learner at round 1 with `g_{½} = 0`.
///
/// Step-size defaults: adaptive AOG starts at `1/(3L)`; every other learner
/// uses `1/(√6·L)`. An explicit `eta` overrides both.
pub fn make_learner(
    algorithm: Algorithm,
    set: FeasibleSet,
    x1: Vector,
    config: &LearnerConfig,
) -> Result<LearnerState> {
    if x1.len() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: x1.len(),
        });
    }
    ensure_finite(x1.as_slice(), "initial point")?;
    let x1 = set
        .snap(&x1)
        .map_err(|_| Error::InvalidArgument("initial point is not feasible".into()))?;
    if let Some(l) = config.lipschitz {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidArgument(format!("Lipschitz bound must be positive, got {l}")));
        }
    }
    let eta = match (config.eta, config.lipschitz, algorithm) {
        (Some(eta), _, _) => eta,
        (None, Some(l), Algorithm::AogAdaptive) => 1.0 / (3.0 * l),
        (None, Some(l), _) => 1.0 / (6f64.sqrt() * l),
        (None, None, _) => {
            return Err(Error::InvalidArgument(
                "a step size or a Lipschitz bound is required".into(),
            ))
        }
    };
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {eta}")));
    }
    let rule = if algorithm == Algorithm::AogAdaptive {
        let l = config.lipschitz.ok_or_else(|| {
            Error::InvalidArgument("adaptive AOG needs a Lipschitz bound".into())
        })?;
        let d = config.diameter.or_else(|| set.diameter()).ok_or_else(|| {
            Error::InvalidArgument("adaptive AOG on an unbounded set needs a diameter".into())
        })?;
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidArgument(format!("diameter must be positive, got {d}")));
        }
        StepRule::Adaptive {
            threshold: 4500.0 * std::f64::consts::PI * d * d * l * l,
            latched: false,
        }
    } else {
        StepRule::Fixed
    };
    let dim = x1.len();
    Ok(LearnerState {
        algorithm,
        set,
        anchor: x1.clone(),
        base: x1.clone(),
        half: x1,
        prev_grad: Vector::zeros(dim),
        round: 1,
        eta,
        variation: 0.0,
        anchor_enabled: config.anchor,
        rule,
        phase: Phase::Base,
        pending: false,
    })
}

impl LearnerState {
    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    /// `x₁`.
    pub fn anchor(&self) -> &Vector {
        &self.anchor
    }

    /// `x_t`.
    pub fn base(&self) -> &Vector {
        &self.base
    }

    /// The most recent `x_{t+½}`.
    pub fn half(&self) -> &Vector {
        &self.half
    }

    /// `g_{t−½}`.
    pub fn prev_grad(&self) -> &Vector {
        &self.prev_grad
    }

    /// Round counter `t`, starting at 1.
    pub fn round(&self) -> usize {
        self.round
    }

    /// `η_t`.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Accumulated second-order variation `S` (adaptive AOG only, else 0).
    pub fn variation(&self) -> f64 {
        self.variation
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self.rule, StepRule::Adaptive { .. })
    }

    /// Whether the adaptive rule has switched to decreasing steps.
    pub fn has_switched(&self) -> bool {
        matches!(self.rule, StepRule::Adaptive { latched: true, .. })
    }

    pub fn threshold(&self) -> Option<f64> {
        match self.rule {
            StepRule::Adaptive { threshold, .. } => Some(threshold),
            StepRule::Fixed => None,
        }
    }

    /// True when the next [`propose`](Self::propose) starts a new round.
    pub fn at_round_start(&self) -> bool {
        !self.pending && self.phase == Phase::Base
    }

    /// Moves the learner to round `t` with the given `x_t` and `g_{t−½}`,
    /// keeping the anchor and step size.
    pub fn at_round(mut self, base: Vector, prev_grad: Vector, round: usize) -> Result<Self> {
        if round == 0 {
            return Err(Error::InvalidArgument("rounds start at 1".into()));
        }
        if base.len() != self.set.dim() || prev_grad.len() != self.set.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.set.dim(),
                got: base.len().min(prev_grad.len()),
            });
        }
        ensure_finite(prev_grad.as_slice(), "previous gradient")?;
        let base = self
            .set
            .snap(&base)
            .map_err(|_| Error::InvalidArgument("iterate is not feasible".into()))?;
        self.half = base.clone();
        self.base = base;
        self.prev_grad = prev_grad;
        self.round = round;
        self.phase = Phase::Base;
        self.pending = false;
        Ok(self)
    }

    fn anchor_weight(&self) -> f64 {
        if self.anchor_enabled && self.algorithm.anchored() {
            1.0 / (self.round as f64 + 1.0)
        } else {
            0.0
        }
    }

    /// `Π[x_t − η·grad + w(x₁ − x_t)]`.
    fn anchored_step(&self, grad: &Vector) -> Vector {
        let w = self.anchor_weight();
        let mut y = &self.base - grad * self.eta + (&self.anchor - &self.base) * w;
        self.set.project_in_place(&mut y);
        y
    }

    /// Returns the action to play now.
    pub fn propose(&mut self) -> Vector {
        self.pending = true;
        match (self.algorithm, self.phase) {
            (Algorithm::Gd, _) => {
                self.half = self.base.clone();
            }
            (Algorithm::Og | Algorithm::Aog | Algorithm::AogAdaptive, _) => {
                self.half = self.anchored_step(&self.prev_grad);
            }
            (Algorithm::Eg | Algorithm::Eag, Phase::Base) => return self.base.clone(),
            (Algorithm::Eg | Algorithm::Eag, Phase::Extra) => {}
        }
        self.half.clone()
    }

    /// Consumes the gradient at the action returned by the last `propose`.
    pub fn update(&mut self, feedback: &Feedback) -> Result<()> {
        if !self.pending {
            return Err(Error::State("update called before propose".into()));
        }
        let g = feedback.gradient();
        if g.len() != self.set.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.set.dim(),
                got: g.len(),
            });
        }
        self.pending = false;
        match (self.algorithm, self.phase) {
            (Algorithm::Eg | Algorithm::Eag, Phase::Base) => {
                self.half = self.anchored_step(g);
                self.phase = Phase::Extra;
                return Ok(());
            }
            (Algorithm::Eg | Algorithm::Eag, Phase::Extra) => {
                self.base = self.anchored_step(g);
                self.phase = Phase::Base;
            }
            (Algorithm::Gd, _) => {
                let mut y = &self.base - g * self.eta;
                self.set.project_in_place(&mut y);
                self.base = y;
            }
            _ => {
                self.base = self.anchored_step(g);
            }
        }
        if let StepRule::Adaptive { threshold, latched } = &mut self.rule {
            if self.round >= 2 {
                self.variation += (g - &self.prev_grad).norm_squared();
            }
            if *latched || self.variation > *threshold {
                *latched = true;
                self.eta = 1.0 / (1.0 + self.variation).sqrt();
            }
        }
        self.prev_grad.copy_from(g);
        self.round += 1;
        Ok(())
    }
}
