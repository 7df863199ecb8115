//! Per-round measurement of equilibrium quality and regret.
//!
//! - [`measure_equilibrium`]: tangent residual, linearized gap and, when every
//!   player has an exact best response, the exact total gap.
//! - [`external_regret`] / [`ExternalRegret`]: linearized external regret
//!   `max_x Σ_t <g_t, x_t − x>` in closed form.
//! - [`dynamic_regret`] / [`DynamicRegret`]: cumulative per-round gap terms,
//!   exact or linearized.
//! - [`second_order_variation`]: `Σ_{t≥2} ‖g_{t+½} − g_{t−½}‖²`.
//! - [`potential`]: the anchored potential with its explicit normal-cone
//!   witness, and the rate certificates checked on recorded traces.
//! - [`RunRecord`] and [`write_csv`]: the per-round CSV trace.

mod certificates;
mod potential;
mod record;

pub use certificates::{
    check_certificates, check_unbounded_rate, sequence_from_rows, CertificateParams,
    CertificateReport, CertificateRow, Violation,
};
pub use potential::{cone_defect, normal_cone_witness, potential, PotentialInputs, PotentialWitness};
pub use record::{csv_header, write_csv, RunRecord};

use crate::error::{Error, Result};
use crate::games::{ActionProfile, GameOracle};
use crate::geometry::FeasibleSet;
use crate::Vector;

/// Full joint vectors of one round, kept for the first rounds of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateSnapshot {
    pub t: usize,
    /// `x_t`.
    pub base: Vector,
    /// `V(x_t)`.
    pub v_base: Vector,
    /// `x_{t+½}`.
    pub half: Vector,
    /// `V(x_{t+½})`.
    pub v_half: Vector,
}

/// Equilibrium measures of one profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumReport {
    pub r_tan: f64,
    /// Linearized gap; absent on unbounded sets.
    pub gap: Option<f64>,
    /// Exact total gap; present only when every player has a best response.
    pub tgap_exact: Option<f64>,
}

/// Tangent residual, gap and exact total gap of `profile`.
///
/// The linearized gap equals the sum of the per-player linearized gaps, so it
/// doubles as the upper bound on the total gap.
pub fn measure_equilibrium(game: &dyn GameOracle, profile: &ActionProfile) -> Result<EquilibriumReport> {
    let grad = game.gradient(profile)?;
    measure_at(game, profile.values(), grad.values())
}

/// [`measure_equilibrium`] with `V(z)` already evaluated.
pub fn measure_at(game: &dyn GameOracle, z: &Vector, v: &Vector) -> Result<EquilibriumReport> {
    let set = game.joint_set();
    let r_tan = set.tangent_residual(z, v)?;
    let gap = if set.is_bounded() {
        Some(set.linearized_gap(z, v)?)
    } else {
        None
    };
    let tgap_exact = if exact_best_responses(game) {
        let mut total = 0.0;
        for i in 0..game.num_players() {
            total += exact_gap_term(game, i, z)?;
        }
        Some(total)
    } else {
        None
    };
    Ok(EquilibriumReport { r_tan, gap, tgap_exact })
}

/// True when every player exposes losses and an exact best response.
pub fn exact_best_responses(game: &dyn GameOracle) -> bool {
    game.has_losses() && (0..game.num_players()).all(|i| game.supports_best_response(i))
}

/// `ℓ^i(z) − min_{x'} ℓ^i(x', z^{−i})`, clamped at zero against rounding.
fn exact_gap_term(game: &dyn GameOracle, player: usize, z: &Vector) -> Result<f64> {
    let loss = game
        .loss(player, z)
        .ok_or_else(|| Error::Unsupported("game exposes no losses".into()))?;
    let (_, best) = game.best_response(player, z)?;
    Ok((loss - best).max(0.0))
}

/// Player `i`'s linearized gap `max_{x'} <V^i(z), z^i − x'>`.
fn linearized_gap_term(game: &dyn GameOracle, player: usize, z: &Vector, v: &Vector) -> Result<f64> {
    let layout = game.layout();
    let zi = layout.slice(player, z);
    let vi = layout.slice(player, v);
    game.player_sets()[player].linearized_gap(&zi, &vi)
}

/// Streaming linearized external regret on one set.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalRegret {
    grad_sum: Vector,
    inner_sum: f64,
    rounds: usize,
}

impl ExternalRegret {
    pub fn new(dim: usize) -> Self {
        Self {
            grad_sum: Vector::zeros(dim),
            inner_sum: 0.0,
            rounds: 0,
        }
    }

    pub fn push(&mut self, action: &Vector, grad: &Vector) -> Result<()> {
        if action.len() != self.grad_sum.len() || grad.len() != self.grad_sum.len() {
            return Err(Error::DimensionMismatch {
                expected: self.grad_sum.len(),
                got: action.len().max(grad.len()),
            });
        }
        self.inner_sum += grad.dot(action);
        self.grad_sum += grad;
        self.rounds += 1;
        Ok(())
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// `Σ<g_t, x_t> − min_{x ∈ set} <Σ g_t, x>`.
    pub fn value(&self, set: &FeasibleSet) -> Result<f64> {
        if !set.is_bounded() {
            return Err(Error::Unsupported("external regret needs a bounded set".into()));
        }
        Ok(self.inner_sum - set.min_linear(&self.grad_sum)?)
    }
}

/// Linearized external regret of a full trace of plays and gradients.
pub fn external_regret(plays: &[Vector], grads: &[Vector], set: &FeasibleSet) -> Result<f64> {
    if plays.len() != grads.len() {
        return Err(Error::DimensionMismatch {
            expected: plays.len(),
            got: grads.len(),
        });
    }
    let mut acc = ExternalRegret::new(set.dim());
    for (x, g) in plays.iter().zip(grads) {
        acc.push(x, g)?;
    }
    acc.value(set)
}

/// Whether dynamic-regret terms are exact or linearized upper bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicMode {
    Exact,
    UpperBound,
}

/// Streaming per-player dynamic regret. The mode is fixed per game: exact
/// only when every player has a best response.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicRegret {
    totals: Vec<f64>,
    mode: DynamicMode,
}

impl DynamicRegret {
    pub fn new(game: &dyn GameOracle) -> Result<Self> {
        let mode = if exact_best_responses(game) {
            DynamicMode::Exact
        } else if game.joint_set().is_bounded() {
            DynamicMode::UpperBound
        } else {
            return Err(Error::Unsupported(
                "dynamic regret needs exact best responses or bounded sets".into(),
            ));
        };
        Ok(Self {
            totals: vec![0.0; game.num_players()],
            mode,
        })
    }

    pub fn mode(&self) -> DynamicMode {
        self.mode
    }

    pub fn totals(&self) -> &[f64] {
        &self.totals
    }

    /// Adds the gap terms of profile `z` with `v = V(z)`.
    pub fn push(&mut self, game: &dyn GameOracle, z: &Vector, v: &Vector) -> Result<()> {
        for i in 0..self.totals.len() {
            self.totals[i] += match self.mode {
                DynamicMode::Exact => exact_gap_term(game, i, z)?,
                DynamicMode::UpperBound => linearized_gap_term(game, i, z, v)?,
            };
        }
        Ok(())
    }
}

/// Cumulative per-player dynamic regret of a sequence of played profiles.
pub fn dynamic_regret(profiles: &[Vector], game: &dyn GameOracle) -> Result<(Vec<f64>, DynamicMode)> {
    let mut acc = DynamicRegret::new(game)?;
    for z in profiles {
        let z = game.joint_set().snap(z)?;
        let v = game.eval(&z);
        acc.push(game, &z, &v)?;
    }
    Ok((acc.totals, acc.mode))
}

/// `Σ_{k≥1} ‖g_k − g_{k−1}‖²` over a feedback sequence `g_{3/2}, g_{5/2}, …`,
/// i.e. `S_T` for a sequence of length `T`.
pub fn second_order_variation(grads: &[Vector]) -> Result<f64> {
    if grads.len() < 2 {
        return Err(Error::InvalidArgument(
            "second-order variation needs at least two gradients".into(),
        ));
    }
    let mut total = 0.0;
    for w in grads.windows(2) {
        if w[0].len() != w[1].len() {
            return Err(Error::DimensionMismatch {
                expected: w[0].len(),
                got: w[1].len(),
            });
        }
        total += (&w[1] - &w[0]).norm_squared();
    }
    Ok(total)
}
