use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::{spectral_norm, validate_operator, GameOracle, PlayerLayout};
use crate::error::{ensure_finite, Error, Result};
use crate::geometry::FeasibleSet;
use crate::Vector;

const CONSTRUCTION_PROBES: usize = 64;
const POWER_ITERATIONS: usize = 2000;

/// Game with affine operator `V(z) = Mz + r`.
///
/// Player `i` has loss `½ zᵢᵀMᵢᵢzᵢ + zᵢᵀ(Σ_{j≠i} Mᵢⱼzⱼ + rᵢ)` when every
/// diagonal block is symmetric; otherwise only the operator is exposed.
#[derive(Debug, Clone)]
pub struct LinearGame {
    matrix: DMatrix<f64>,
    offset: Vector,
    sets: Vec<FeasibleSet>,
    joint: FeasibleSet,
    layout: Arc<PlayerLayout>,
    lipschitz: f64,
    losses: bool,
    equilibrium: Option<Vector>,
}

impl LinearGame {
    /// Fails if `sym(M)` has a negative eigenvalue (non-monotone operator).
    pub fn new(matrix: DMatrix<f64>, offset: Vector, sets: Vec<FeasibleSet>) -> Result<Self> {
        let layout = Arc::new(PlayerLayout::new(sets.iter().map(|s| s.dim()).collect())?);
        let n = layout.total_dim();
        if matrix.shape() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, got: matrix.nrows() });
        }
        if offset.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: offset.len() });
        }
        ensure_finite(matrix.as_slice(), "operator matrix")?;
        ensure_finite(offset.as_slice(), "operator offset")?;

        let sym = (&matrix + matrix.transpose()) * 0.5;
        let min_eig = sym.symmetric_eigen().eigenvalues.min();
        if min_eig < -1e-12 * matrix.amax().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "operator is not monotone: sym(M) has eigenvalue {min_eig:e}"
            )));
        }
        let losses = (0..layout.num_players()).all(|i| {
            let r = layout.range(i);
            let block = matrix.view((r.start, r.start), (r.len(), r.len()));
            (block - block.transpose()).amax() <= 1e-14
        });
        let lipschitz = spectral_norm(&matrix, POWER_ITERATIONS).max(f64::MIN_POSITIVE) * (1.0 + 1e-9);
        let joint = FeasibleSet::product(sets.clone())?;
        let equilibrium = if joint_unconstrained(&sets) {
            matrix.clone().lu().solve(&(-&offset))
        } else {
            None
        };
        Ok(Self {
            matrix,
            offset,
            sets,
            joint,
            layout,
            lipschitz,
            losses,
            equilibrium,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    fn own_block_is_zero(&self, player: usize) -> bool {
        let r = self.layout.range(player);
        self.matrix
            .view((r.start, r.start), (r.len(), r.len()))
            .iter()
            .all(|&v| v == 0.0)
    }

    /// `Σ_{j≠i} Mᵢⱼzⱼ + rᵢ`.
    fn cross_term(&self, player: usize, z: &Vector) -> Vector {
        let r = self.layout.range(player);
        let mut own = Vector::zeros(z.len());
        own.as_mut_slice()[r.clone()].copy_from_slice(&z.as_slice()[r.clone()]);
        let full = &self.matrix * (z - own) + &self.offset;
        Vector::from_column_slice(&full.as_slice()[r])
    }
}

fn joint_unconstrained(sets: &[FeasibleSet]) -> bool {
    sets.iter().all(|s| matches!(s, FeasibleSet::Unconstrained(_)))
}

impl GameOracle for LinearGame {
    fn layout(&self) -> &Arc<PlayerLayout> {
        &self.layout
    }

    fn player_sets(&self) -> &[FeasibleSet] {
        &self.sets
    }

    fn joint_set(&self) -> &FeasibleSet {
        &self.joint
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn eval(&self, z: &Vector) -> Vector {
        &self.matrix * z + &self.offset
    }

    fn loss(&self, player: usize, z: &Vector) -> Option<f64> {
        if !self.losses || player >= self.num_players() {
            return None;
        }
        let r = self.layout.range(player);
        let zi = self.layout.slice(player, z);
        let block = self.matrix.view((r.start, r.start), (r.len(), r.len()));
        Some(0.5 * zi.dot(&(block * &zi)) + zi.dot(&self.cross_term(player, z)))
    }

    fn has_losses(&self) -> bool {
        self.losses
    }

    fn supports_best_response(&self, player: usize) -> bool {
        player < self.num_players()
            && self.losses
            && self.sets[player].is_bounded()
            && self.own_block_is_zero(player)
    }

    fn best_response(&self, player: usize, z: &Vector) -> Result<(Vector, f64)> {
        if !self.supports_best_response(player) {
            return Err(Error::Unsupported(format!(
                "no exact best response for player {}",
                player + 1
            )));
        }
        let coef = self.cross_term(player, z);
        let action = self.sets[player].argmin_linear(&coef)?;
        let value = coef.dot(&action);
        Ok((action, value))
    }

    fn equilibrium(&self) -> Option<Vector> {
        self.equilibrium.clone()
    }
}

/// Random monotone linear game: `M` is a skew-symmetric coupling with zero
/// diagonal blocks plus a nonnegative diagonal, `r` is standard normal.
/// With `half_width = None` every player is unconstrained.
pub fn make_random_linear_monotone(
    dims: &[usize],
    half_width: Option<f64>,
    seed: u64,
) -> Result<LinearGame> {
    if let Some(w) = half_width {
        if !(w > 0.0) {
            return Err(Error::InvalidArgument("box half width must be positive".into()));
        }
    }
    let layout = PlayerLayout::new(dims.to_vec())?;
    let n = layout.total_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (n as f64).sqrt();
    let raw = DMatrix::from_fn(n, n, |_, _| {
        let v: f64 = StandardNormal.sample(&mut rng);
        v * scale
    });
    let mut m = (&raw - raw.transpose()) * 0.5;
    for i in 0..layout.num_players() {
        let r = layout.range(i);
        m.view_mut((r.start, r.start), (r.len(), r.len())).fill(0.0);
    }
    let diag = Uniform::new(0.0, 0.5).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    for i in 0..n {
        m[(i, i)] = diag.sample(&mut rng);
    }
    let offset = Vector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
    let sets = dims
        .iter()
        .map(|&d| match half_width {
            Some(w) => FeasibleSet::cube(d, w),
            None => FeasibleSet::unconstrained(d),
        })
        .collect::<Result<Vec<_>>>()?;
    let game = LinearGame::new(m, offset, sets)?;
    validate_operator(&game, CONSTRUCTION_PROBES)?;
    Ok(game)
}

/// Two unconstrained one-dimensional players with
/// `V(z) = [[ε, s], [−s, ε]](z − z⋆)`, so `z⋆` is the unique equilibrium.
pub fn make_shifted_rotation(coupling: f64, eps: f64, nash: [f64; 2]) -> Result<LinearGame> {
    if !(eps >= 0.0) || !coupling.is_finite() {
        return Err(Error::InvalidArgument(
            "rotation game needs finite coupling and eps >= 0".into(),
        ));
    }
    let m = DMatrix::from_row_slice(2, 2, &[eps, coupling, -coupling, eps]);
    let star = Vector::from_column_slice(&nash);
    let offset = -(&m * &star);
    let sets = vec![FeasibleSet::unconstrained(1)?, FeasibleSet::unconstrained(1)?];
    let game = LinearGame::new(m, offset, sets)?;
    validate_operator(&game, CONSTRUCTION_PROBES)?;
    Ok(game)
}
