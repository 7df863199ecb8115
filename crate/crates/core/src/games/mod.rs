//! Game oracles: the joint gradient operator `V`, per-player feasible sets,
//! a Lipschitz bound and, where available, losses and exact best responses.
//!
//! Built-in instances:
//! - [`make_bilinear_saddle`]: `f(x, y) = s <x, y>` over boxes, players `(f, -f)`.
//! - [`make_appendix_e_instance`]: the quadratic-bilinear lower-bound instance
//!   `f(x, y) = ½ xᵀHx − hᵀx − <Ax − b, y>`.
//! - [`make_appendix_d_toy`]: `f(y¹, y²) = y¹·y²` on `[-1, 1]²`.
//! - [`make_random_linear_monotone`]: `V(z) = Mz + r` with `M` skew plus a
//!   nonnegative diagonal.

mod linear;
mod quadratic;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_finite, Error, Result};
use crate::geometry::FeasibleSet;
use crate::Vector;

pub use linear::{make_random_linear_monotone, make_shifted_rotation, LinearGame};
pub use quadratic::{make_appendix_d_toy, make_appendix_e_instance, make_bilinear_saddle, MinMaxQuadratic};

/// Seed used by the construction-time operator probes.
pub const PROBE_SEED: u64 = 42;

/// Per-player block sizes of a joint action vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerLayout {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl PlayerLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidArgument(
                "every player needs a positive action dimension".into(),
            ));
        }
        let offsets = dims
            .iter()
            .scan(0, |acc, d| {
                let start = *acc;
                *acc += d;
                Some(start)
            })
            .collect();
        Ok(Self { dims, offsets })
    }

    pub fn num_players(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn range(&self, player: usize) -> std::ops::Range<usize> {
        let start = self.offsets[player];
        start..start + self.dims[player]
    }

    pub fn slice(&self, player: usize, joint: &Vector) -> Vector {
        let r = self.range(player);
        Vector::from_column_slice(&joint.as_slice()[r])
    }

    pub fn concat(&self, blocks: &[Vector]) -> Result<Vector> {
        if blocks.len() != self.num_players() {
            return Err(Error::DimensionMismatch {
                expected: self.num_players(),
                got: blocks.len(),
            });
        }
        let mut out = Vector::zeros(self.total_dim());
        for (i, b) in blocks.iter().enumerate() {
            if b.len() != self.dims[i] {
                return Err(Error::DimensionMismatch {
                    expected: self.dims[i],
                    got: b.len(),
                });
            }
            out.as_mut_slice()[self.range(i)].copy_from_slice(b.as_slice());
        }
        Ok(out)
    }
}

/// Concatenated per-player action vectors, player 1 first.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionProfile {
    values: Vector,
    layout: Arc<PlayerLayout>,
}

impl ActionProfile {
    pub fn new(values: Vector, layout: Arc<PlayerLayout>) -> Result<Self> {
        if values.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                got: values.len(),
            });
        }
        ensure_finite(values.as_slice(), "action profile")?;
        Ok(Self { values, layout })
    }

    pub fn from_blocks(blocks: &[Vector]) -> Result<Self> {
        let layout = PlayerLayout::new(blocks.iter().map(|b| b.len()).collect())?;
        let values = layout.concat(blocks)?;
        Self::new(values, Arc::new(layout))
    }

    pub fn values(&self) -> &Vector {
        &self.values
    }

    pub fn into_values(self) -> Vector {
        self.values
    }

    pub fn layout(&self) -> &Arc<PlayerLayout> {
        &self.layout
    }

    pub fn num_players(&self) -> usize {
        self.layout.num_players()
    }

    pub fn block(&self, player: usize) -> Vector {
        self.layout.slice(player, &self.values)
    }

    pub fn blocks(&self) -> Vec<Vector> {
        (0..self.num_players()).map(|i| self.block(i)).collect()
    }
}

/// A smooth monotone game seen through its gradient operator.
///
/// Implementors provide the raw operator [`GameOracle::eval`]; the checked
/// entry point is [`GameOracle::gradient`].
pub trait GameOracle: Send + Sync {
    fn layout(&self) -> &Arc<PlayerLayout>;

    fn player_sets(&self) -> &[FeasibleSet];

    /// Product of the player sets.
    fn joint_set(&self) -> &FeasibleSet;

    /// Lipschitz bound `L` of `V`.
    fn lipschitz(&self) -> f64;

    /// `V(z)` on a joint vector, without feasibility checks.
    fn eval(&self, z: &Vector) -> Vector;

    fn num_players(&self) -> usize {
        self.layout().num_players()
    }

    /// Loss `ℓ^i(z)`, when the instance exposes losses.
    fn loss(&self, _player: usize, _z: &Vector) -> Option<f64> {
        None
    }

    fn has_losses(&self) -> bool {
        false
    }

    fn supports_best_response(&self, _player: usize) -> bool {
        false
    }

    /// Exact minimizer and minimum of `ℓ^i(·, z^{-i})`.
    fn best_response(&self, player: usize, _z: &Vector) -> Result<(Vector, f64)> {
        Err(Error::Unsupported(format!(
            "no exact best response for player {}",
            player + 1
        )))
    }

    /// A known Nash equilibrium, if the instance can produce one.
    fn equilibrium(&self) -> Option<Vector> {
        None
    }

    fn is_zero_sum(&self) -> bool {
        false
    }

    /// Checked gradient: the profile must be feasible for every player.
    fn gradient(&self, profile: &ActionProfile) -> Result<ActionProfile> {
        if profile.layout().as_ref() != self.layout().as_ref() {
            return Err(Error::InvalidArgument(
                "profile layout does not match the game".into(),
            ));
        }
        let z = self.joint_set().snap(profile.values())?;
        ActionProfile::new(self.eval(&z), self.layout().clone())
    }
}

/// Worst observed monotonicity defect and Lipschitz ratio on random pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeReport {
    /// `min <V(x) − V(x'), x − x'> / ||x − x'||²` over the sampled pairs.
    pub min_monotone_ratio: f64,
    /// `max ||V(x) − V(x')|| / ||x − x'||` over the sampled pairs.
    pub max_lipschitz_ratio: f64,
}

/// Samples `pairs` feasible pairs and measures monotonicity and smoothness.
/// Unbounded coordinates are sampled from `[-10, 10]`.
pub fn probe_operator(game: &dyn GameOracle, pairs: usize, seed: u64) -> ProbeReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let set = game.joint_set();
    let mut report = ProbeReport {
        min_monotone_ratio: f64::INFINITY,
        max_lipschitz_ratio: 0.0,
    };
    for _ in 0..pairs {
        let a = set.sample(&mut rng, 10.0);
        let b = set.sample(&mut rng, 10.0);
        let dz = &a - &b;
        let sq = dz.norm_squared();
        if sq == 0.0 {
            continue;
        }
        let dv = game.eval(&a) - game.eval(&b);
        report.min_monotone_ratio = report.min_monotone_ratio.min(dv.dot(&dz) / sq);
        report.max_lipschitz_ratio = report.max_lipschitz_ratio.max(dv.norm() / sq.sqrt());
    }
    report
}

/// Rejects an instance whose operator is visibly non-monotone or exceeds its
/// reported Lipschitz bound on a seeded probe.
pub(crate) fn validate_operator(game: &dyn GameOracle, pairs: usize) -> Result<()> {
    let report = probe_operator(game, pairs, PROBE_SEED);
    if report.min_monotone_ratio < -1e-10 {
        return Err(Error::InvalidArgument(format!(
            "operator is not monotone (ratio {:e})",
            report.min_monotone_ratio
        )));
    }
    if report.max_lipschitz_ratio > game.lipschitz() + 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "operator exceeds its Lipschitz bound {} (observed {})",
            game.lipschitz(),
            report.max_lipschitz_ratio
        )));
    }
    Ok(())
}

/// Largest singular value by power iteration on `MᵀM`.
pub fn spectral_norm(m: &nalgebra::DMatrix<f64>, iterations: usize) -> f64 {
    let mut v = Vector::from_element(m.ncols(), 1.0);
    // break symmetry so the start vector is not orthogonal to the top singular vector
    for (j, x) in v.iter_mut().enumerate() {
        *x += 1e-3 * j as f64;
    }
    let mut sigma = 0.0;
    for _ in 0..iterations {
        let w = m.tr_mul(&(m * &v));
        let n = w.norm();
        if n == 0.0 {
            return 0.0;
        }
        v = w / n;
        sigma = (m * &v).norm();
    }
    sigma
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_round_trip() {
        let blocks = vec![
            Vector::from_column_slice(&[1.0, 2.0]),
            Vector::from_column_slice(&[3.0]),
            Vector::from_column_slice(&[4.0, 5.0, 6.0]),
        ];
        let p = ActionProfile::from_blocks(&blocks).unwrap();
        assert_eq!(p.values().as_slice(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(p.blocks(), blocks);
        assert_eq!(p.layout().range(2), 3..6);
    }

    #[test]
    fn layout_rejects_empty_player() {
        assert!(PlayerLayout::new(vec![2, 0]).is_err());
        assert!(PlayerLayout::new(vec![]).is_err());
    }

    #[test]
    fn power_iteration_on_diagonal() {
        let m = nalgebra::DMatrix::from_diagonal(&Vector::from_column_slice(&[0.5, -3.0, 2.0]));
        assert!((spectral_norm(&m, 200) - 3.0).abs() < 1e-9);
    }
}
