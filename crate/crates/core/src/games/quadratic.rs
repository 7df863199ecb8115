use std::sync::Arc;

use nalgebra::DMatrix;

use super::{validate_operator, GameOracle, PlayerLayout};
use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::Vector;

const CONSTRUCTION_PROBES: usize = 64;

/// Two-player zero-sum game with
/// `f(x, y) = ½ xᵀHx − hᵀx − <Ax − b, y>`; player 1 minimizes `f` over `x`,
/// player 2 minimizes `−f` over `y`.
///
/// `V(x, y) = (Hx − h − Aᵀy, Ax − b)`.
#[derive(Debug, Clone)]
pub struct MinMaxQuadratic {
    quad: Option<DMatrix<f64>>,
    lin: Vector,
    coupling: DMatrix<f64>,
    offset: Vector,
    sets: Vec<FeasibleSet>,
    joint: FeasibleSet,
    layout: Arc<PlayerLayout>,
    lipschitz: f64,
}

impl MinMaxQuadratic {
    /// `quad = None` means `H = 0`, which makes player 1's loss linear in its
    /// own action and enables an exact best response.
    pub fn new(
        quad: Option<DMatrix<f64>>,
        lin: Vector,
        coupling: DMatrix<f64>,
        offset: Vector,
        x_set: FeasibleSet,
        y_set: FeasibleSet,
        lipschitz: f64,
    ) -> Result<Self> {
        let (m, n) = coupling.shape();
        if x_set.dim() != n || lin.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x_set.dim().max(lin.len()) });
        }
        if y_set.dim() != m || offset.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: y_set.dim().max(offset.len()) });
        }
        if let Some(h) = &quad {
            if h.shape() != (n, n) {
                return Err(Error::InvalidArgument("quadratic term must be n x n".into()));
            }
            if (h - h.transpose()).amax() > 1e-12 {
                return Err(Error::InvalidArgument("quadratic term must be symmetric".into()));
            }
        }
        if !(lipschitz > 0.0) {
            return Err(Error::InvalidArgument("Lipschitz bound must be positive".into()));
        }
        let layout = Arc::new(PlayerLayout::new(vec![n, m])?);
        let sets = vec![x_set, y_set];
        let joint = FeasibleSet::product(sets.clone())?;
        Ok(Self {
            quad,
            lin,
            coupling,
            offset,
            sets,
            joint,
            layout,
            lipschitz,
        })
    }

    pub fn quadratic(&self) -> Option<&DMatrix<f64>> {
        self.quad.as_ref()
    }

    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }

    pub fn linear_term(&self) -> &Vector {
        &self.lin
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    fn split(&self, z: &Vector) -> (Vector, Vector) {
        (self.layout.slice(0, z), self.layout.slice(1, z))
    }

    fn quad_form(&self, x: &Vector) -> f64 {
        self.quad.as_ref().map_or(0.0, |h| 0.5 * x.dot(&(h * x)))
    }

    /// `f(x, y)`.
    pub fn value(&self, z: &Vector) -> f64 {
        let (x, y) = self.split(z);
        let ax_b = &self.coupling * &x - &self.offset;
        self.quad_form(&x) - self.lin.dot(&x) - ax_b.dot(&y)
    }
}

impl GameOracle for MinMaxQuadratic {
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
        let (x, y) = self.split(z);
        let mut vx = -self.coupling.tr_mul(&y) - &self.lin;
        if let Some(h) = &self.quad {
            vx += h * &x;
        }
        let vy = &self.coupling * &x - &self.offset;
        let mut out = Vector::zeros(z.len());
        out.as_mut_slice()[self.layout.range(0)].copy_from_slice(vx.as_slice());
        out.as_mut_slice()[self.layout.range(1)].copy_from_slice(vy.as_slice());
        out
    }

    fn loss(&self, player: usize, z: &Vector) -> Option<f64> {
        match player {
            0 => Some(self.value(z)),
            1 => Some(-self.value(z)),
            _ => None,
        }
    }

    fn has_losses(&self) -> bool {
        true
    }

    fn supports_best_response(&self, player: usize) -> bool {
        match player {
            0 => self.quad.is_none() && self.sets[0].is_bounded(),
            1 => self.sets[1].is_bounded(),
            _ => false,
        }
    }

    fn best_response(&self, player: usize, z: &Vector) -> Result<(Vector, f64)> {
        if !self.supports_best_response(player) {
            return Err(Error::Unsupported(format!(
                "no exact best response for player {}",
                player + 1
            )));
        }
        let (x, y) = self.split(z);
        if player == 0 {
            // f is linear in x: <−h − Aᵀy, x> + <b, y>
            let coef = -self.coupling.tr_mul(&y) - &self.lin;
            let action = self.sets[0].argmin_linear(&coef)?;
            Ok((action.clone(), coef.dot(&action) + self.offset.dot(&y)))
        } else {
            // −f = −½xᵀHx + hᵀx + <Ax − b, y>
            let coef = &self.coupling * &x - &self.offset;
            let action = self.sets[1].argmin_linear(&coef)?;
            let constant = -self.quad_form(&x) + self.lin.dot(&x);
            Ok((action.clone(), coef.dot(&action) + constant))
        }
    }

    fn is_zero_sum(&self) -> bool {
        true
    }
}

/// `f(x, y) = scale · <x, y>` over `[-box_radius, box_radius]^d` for both
/// players; `V(x, y) = (scale·y, −scale·x)` and `L = scale`.
pub fn make_bilinear_saddle(
    payoff_scale: f64,
    box_radius: f64,
    dims: (usize, usize),
) -> Result<MinMaxQuadratic> {
    if !(payoff_scale > 0.0) || !(box_radius > 0.0) {
        return Err(Error::InvalidArgument(
            "bilinear game needs positive scale and radius".into(),
        ));
    }
    if dims.0 != dims.1 || dims.0 == 0 {
        return Err(Error::InvalidArgument(format!(
            "bilinear game needs equal positive player dimensions, got {dims:?}"
        )));
    }
    let d = dims.0;
    let game = MinMaxQuadratic::new(
        None,
        Vector::zeros(d),
        DMatrix::identity(d, d) * -payoff_scale,
        Vector::zeros(d),
        FeasibleSet::cube(d, box_radius)?,
        FeasibleSet::cube(d, box_radius)?,
        payoff_scale,
    )?;
    validate_operator(&game, CONSTRUCTION_PROBES)?;
    Ok(game)
}

/// `f(y¹, y²) = y¹·y²` on `[-1, 1]²`.
pub fn make_appendix_d_toy() -> Result<MinMaxQuadratic> {
    make_bilinear_saddle(1.0, 1.0, (1, 1))
}

/// The quadratic-bilinear instance with `A` a quarter of the signed
/// anti-diagonal band, `b = ¼·1`, `h = ¼·e_n`, `H = 2AᵀA` and both players
/// on `[-w, w]^n`. Reported `L = 1` (`‖A‖ ≤ ½`, `‖H‖ ≤ ½`).
pub fn make_appendix_e_instance(n: usize, box_half_width: f64) -> Result<MinMaxQuadratic> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("instance size must be at least 2, got {n}")));
    }
    if !(box_half_width > 0.0) {
        return Err(Error::InvalidArgument("box half width must be positive".into()));
    }
    let mut a = DMatrix::zeros(n, n);
    a[(0, n - 1)] = 0.25;
    for i in 1..n {
        a[(i, n - 1 - i)] = -0.25;
        a[(i, n - i)] = 0.25;
    }
    let h_mat = a.tr_mul(&a) * 2.0;
    let mut h = Vector::zeros(n);
    h[n - 1] = 0.25;
    let b = Vector::from_element(n, 0.25);
    let game = MinMaxQuadratic::new(
        Some(h_mat),
        h,
        a,
        b,
        FeasibleSet::cube(n, box_half_width)?,
        FeasibleSet::cube(n, box_half_width)?,
        1.0,
    )?;
    validate_operator(&game, CONSTRUCTION_PROBES)?;
    Ok(game)
}
