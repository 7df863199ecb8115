//! Feasible sets with exact Euclidean projection, normal-cone residuals and
//! linear minimization.
//!
//! Every set is closed and convex. Boxes and balls are the primitive shapes,
//! [`FeasibleSet::Product`] glues per-player sets into a joint action space,
//! and [`FeasibleSet::Unconstrained`] stands for all of `R^d`.
//!
//! Boundary tests use a relative tolerance of [`BOUNDARY_TOL`]: projected
//! iterates land on a bound exactly in exact arithmetic but may drift by a
//! few ulps once they pass through arithmetic.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{ensure_finite, Error, Result};
use crate::Vector;

/// Relative tolerance for "on the boundary" and "inside the set" tests.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Axis-aligned box `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lower: Vector,
    upper: Vector,
}

impl BoxSet {
    pub fn lower(&self) -> &Vector {
        &self.lower
    }

    pub fn upper(&self) -> &Vector {
        &self.upper
    }
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSet {
    center: Vector,
    radius: f64,
}

impl BallSet {
    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Cartesian product of sets, laid out factor after factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSet {
    factors: Vec<FeasibleSet>,
    dim: usize,
}

impl ProductSet {
    pub fn factors(&self) -> &[FeasibleSet] {
        &self.factors
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    Box(BoxSet),
    Ball(BallSet),
    Product(ProductSet),
    Unconstrained(usize),
}

impl FeasibleSet {
    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidArgument("box must have positive dimension".into()));
        }
        ensure_finite(lower.as_slice(), "box lower bound")?;
        ensure_finite(upper.as_slice(), "box upper bound")?;
        if let Some(j) = (0..lower.len()).find(|&j| lower[j] > upper[j]) {
            return Err(Error::InvalidArgument(format!(
                "box lower bound exceeds upper bound at coordinate {j}"
            )));
        }
        Ok(FeasibleSet::Box(BoxSet { lower, upper }))
    }

    /// The cube `[-half_width, half_width]^dim`.
    pub fn cube(dim: usize, half_width: f64) -> Result<Self> {
        if !(half_width >= 0.0) {
            return Err(Error::InvalidArgument("cube half width must be nonnegative".into()));
        }
        Self::boxed(
            Vector::from_element(dim, -half_width),
            Vector::from_element(dim, half_width),
        )
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidArgument("ball must have positive dimension".into()));
        }
        ensure_finite(center.as_slice(), "ball center")?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("ball radius must be positive, got {radius}")));
        }
        Ok(FeasibleSet::Ball(BallSet { center, radius }))
    }

    pub fn product(factors: Vec<FeasibleSet>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("product needs at least one factor".into()));
        }
        let dim = factors.iter().map(FeasibleSet::dim).sum();
        Ok(FeasibleSet::Product(ProductSet { factors, dim }))
    }

    pub fn unconstrained(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(FeasibleSet::Unconstrained(dim))
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Box(b) => b.lower.len(),
            FeasibleSet::Ball(b) => b.center.len(),
            FeasibleSet::Product(p) => p.dim,
            FeasibleSet::Unconstrained(d) => *d,
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            FeasibleSet::Box(_) | FeasibleSet::Ball(_) => true,
            FeasibleSet::Product(p) => p.factors.iter().all(FeasibleSet::is_bounded),
            FeasibleSet::Unconstrained(_) => false,
        }
    }

    /// Largest distance between two points of the set, `None` when unbounded.
    pub fn diameter(&self) -> Option<f64> {
        match self {
            FeasibleSet::Box(b) => Some((&b.upper - &b.lower).norm()),
            FeasibleSet::Ball(b) => Some(2.0 * b.radius),
            FeasibleSet::Product(p) => {
                let mut sq = 0.0;
                for f in &p.factors {
                    let d = f.diameter()?;
                    sq += d * d;
                }
                Some(sq.sqrt())
            }
            FeasibleSet::Unconstrained(_) => None,
        }
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, point: &Vector) -> Result<Vector> {
        self.check_dim(point.len())?;
        let mut out = point.clone();
        project_into(self, out.as_mut_slice());
        Ok(out)
    }

    /// Projects `point` in place. The caller guarantees matching dimension.
    pub(crate) fn project_in_place(&self, point: &mut Vector) {
        debug_assert_eq!(point.len(), self.dim());
        project_into(self, point.as_mut_slice());
    }

    /// Returns the projection of `point` if it lies within tolerance of the
    /// set, a domain error otherwise.
    pub fn snap(&self, point: &Vector) -> Result<Vector> {
        let projected = self.project(point)?;
        let dist = (&projected - point).norm();
        let scale = point.amax().max(1.0);
        if dist <= BOUNDARY_TOL * scale {
            Ok(projected)
        } else {
            Err(Error::Domain(format!(
                "point lies outside the feasible set (distance {dist:e})"
            )))
        }
    }

    pub fn contains(&self, point: &Vector) -> bool {
        point.len() == self.dim() && self.snap(point).is_ok()
    }

    /// `min_{c in N(x)} ||grad + c||` at a feasible `point`.
    pub fn tangent_residual(&self, point: &Vector, grad: &Vector) -> Result<f64> {
        self.check_dim(grad.len())?;
        let x = self.snap(point)?;
        Ok(residual_sq(self, x.as_slice(), grad.as_slice()).sqrt())
    }

    /// `min_{x' in set} <dir, x'>`.
    ///
    /// Unbounded factors are only allowed when `dir` vanishes on them.
    pub fn min_linear(&self, dir: &Vector) -> Result<f64> {
        self.check_dim(dir.len())?;
        min_linear_slice(self, dir.as_slice())
    }

    /// A minimizer of `<dir, ·>`; ties go to the componentwise lowest point
    /// (lexicographically smallest for balls).
    pub fn argmin_linear(&self, dir: &Vector) -> Result<Vector> {
        self.check_dim(dir.len())?;
        let mut out = Vector::zeros(self.dim());
        argmin_linear_slice(self, dir.as_slice(), out.as_mut_slice())?;
        Ok(out)
    }

    /// `max_{x' in set} <grad, point - x'>`.
    pub fn linearized_gap(&self, point: &Vector, grad: &Vector) -> Result<f64> {
        self.check_dim(grad.len())?;
        let x = self.snap(point)?;
        let min = self.min_linear(grad).map_err(|_| {
            Error::Unsupported("linearized gap needs a bounded set".into())
        })?;
        Ok((grad.dot(&x) - min).max(0.0))
    }

    /// Draws a point of the set. Unbounded coordinates are drawn uniformly
    /// from `[-unbounded_radius, unbounded_radius]`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, unbounded_radius: f64) -> Vector {
        let mut out = Vector::zeros(self.dim());
        sample_into(self, rng, unbounded_radius, out.as_mut_slice());
        out
    }
}

fn project_into(set: &FeasibleSet, x: &mut [f64]) {
    match set {
        FeasibleSet::Box(b) => {
            for (j, v) in x.iter_mut().enumerate() {
                *v = v.clamp(b.lower[j], b.upper[j]);
            }
        }
        FeasibleSet::Ball(b) => {
            let dist = x
                .iter()
                .zip(b.center.iter())
                .map(|(v, c)| (v - c) * (v - c))
                .sum::<f64>()
                .sqrt();
            // a few ulps of slack keeps projection idempotent
            if dist <= b.radius * (1.0 + 16.0 * f64::EPSILON) {
                return;
            }
            let s = b.radius / dist;
            for (v, c) in x.iter_mut().zip(b.center.iter()) {
                *v = c + s * (*v - c);
            }
        }
        FeasibleSet::Product(p) => {
            let mut offset = 0;
            for f in &p.factors {
                let d = f.dim();
                project_into(f, &mut x[offset..offset + d]);
                offset += d;
            }
        }
        FeasibleSet::Unconstrained(_) => {}
    }
}

fn at_bound(value: f64, bound: f64) -> bool {
    (value - bound).abs() <= BOUNDARY_TOL * bound.abs().max(1.0)
}

fn residual_sq(set: &FeasibleSet, x: &[f64], g: &[f64]) -> f64 {
    match set {
        FeasibleSet::Box(b) => {
            let mut sq = 0.0;
            for j in 0..x.len() {
                let (lo, hi) = (b.lower[j], b.upper[j]);
                let r = if lo == hi {
                    0.0
                } else if at_bound(x[j], lo) {
                    (-g[j]).max(0.0)
                } else if at_bound(x[j], hi) {
                    g[j].max(0.0)
                } else {
                    g[j].abs()
                };
                sq += r * r;
            }
            sq
        }
        FeasibleSet::Ball(b) => {
            let offset: Vec<f64> = x.iter().zip(b.center.iter()).map(|(v, c)| v - c).collect();
            let dist = offset.iter().map(|v| v * v).sum::<f64>().sqrt();
            let g_sq: f64 = g.iter().map(|v| v * v).sum();
            if (dist - b.radius).abs() > BOUNDARY_TOL * b.radius.max(1.0) {
                return g_sq;
            }
            // boundary: normal cone is the ray spanned by the outward normal
            let along: f64 = g.iter().zip(&offset).map(|(gv, o)| gv * o / dist).sum();
            let cut = along.min(0.0);
            g.iter()
                .zip(&offset)
                .map(|(gv, o)| {
                    let r = gv - cut * o / dist;
                    r * r
                })
                .sum()
        }
        FeasibleSet::Product(p) => {
            let mut offset = 0;
            let mut sq = 0.0;
            for f in &p.factors {
                let d = f.dim();
                sq += residual_sq(f, &x[offset..offset + d], &g[offset..offset + d]);
                offset += d;
            }
            sq
        }
        FeasibleSet::Unconstrained(_) => g.iter().map(|v| v * v).sum(),
    }
}

fn min_linear_slice(set: &FeasibleSet, dir: &[f64]) -> Result<f64> {
    match set {
        FeasibleSet::Box(b) => Ok(dir
            .iter()
            .enumerate()
            .map(|(j, &d)| (d * b.lower[j]).min(d * b.upper[j]))
            .sum()),
        FeasibleSet::Ball(b) => {
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let at_center: f64 = dir.iter().zip(b.center.iter()).map(|(d, c)| d * c).sum();
            Ok(at_center - b.radius * norm)
        }
        FeasibleSet::Product(p) => {
            let mut offset = 0;
            let mut total = 0.0;
            for f in &p.factors {
                let d = f.dim();
                total += min_linear_slice(f, &dir[offset..offset + d])?;
                offset += d;
            }
            Ok(total)
        }
        FeasibleSet::Unconstrained(_) => {
            if dir.iter().all(|&d| d == 0.0) {
                Ok(0.0)
            } else {
                Err(Error::Unsupported(
                    "linear minimization over an unbounded set".into(),
                ))
            }
        }
    }
}

fn argmin_linear_slice(set: &FeasibleSet, dir: &[f64], out: &mut [f64]) -> Result<()> {
    match set {
        FeasibleSet::Box(b) => {
            for (j, o) in out.iter_mut().enumerate() {
                *o = if dir[j] < 0.0 { b.upper[j] } else { b.lower[j] };
            }
            Ok(())
        }
        FeasibleSet::Ball(b) => {
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            for (j, o) in out.iter_mut().enumerate() {
                *o = if norm > 0.0 {
                    b.center[j] - b.radius * dir[j] / norm
                } else if j == 0 {
                    b.center[j] - b.radius
                } else {
                    b.center[j]
                };
            }
            Ok(())
        }
        FeasibleSet::Product(p) => {
            let mut offset = 0;
            for f in &p.factors {
                let d = f.dim();
                argmin_linear_slice(f, &dir[offset..offset + d], &mut out[offset..offset + d])?;
                offset += d;
            }
            Ok(())
        }
        FeasibleSet::Unconstrained(_) => Err(Error::Unsupported(
            "linear minimization over an unbounded set".into(),
        )),
    }
}

fn sample_into<R: Rng + ?Sized>(set: &FeasibleSet, rng: &mut R, radius: f64, out: &mut [f64]) {
    match set {
        FeasibleSet::Box(b) => {
            for (j, o) in out.iter_mut().enumerate() {
                let u: f64 = rng.random();
                *o = b.lower[j] + u * (b.upper[j] - b.lower[j]);
            }
        }
        FeasibleSet::Ball(b) => {
            let d = out.len();
            let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            let u: f64 = rng.random();
            let r = b.radius * u.powf(1.0 / d as f64);
            for (j, o) in out.iter_mut().enumerate() {
                *o = b.center[j] + r * dir[j] / norm;
            }
        }
        FeasibleSet::Product(p) => {
            let mut offset = 0;
            for f in &p.factors {
                let d = f.dim();
                sample_into(f, rng, radius, &mut out[offset..offset + d]);
                offset += d;
            }
        }
        FeasibleSet::Unconstrained(_) => {
            for o in out.iter_mut() {
                *o = rng.random_range(-radius..=radius);
            }
        }
    }
}
