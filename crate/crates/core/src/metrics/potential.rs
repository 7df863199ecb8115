use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::Vector;

/// Tolerance for `Π(x + c) = x`, relative to `max(1, ‖x + c‖∞)`.
pub const CONE_TOL: f64 = 1e-9;

/// Iterates needed for the potential at round `t ≥ 2`.
#[derive(Debug, Clone, Copy)]
pub struct PotentialInputs<'a> {
    /// `x₁`.
    pub x1: &'a Vector,
    /// `x_{t−1}`.
    pub x_prev: &'a Vector,
    /// `V(x_{t−½})`.
    pub v_prev_half: &'a Vector,
    /// `x_t`.
    pub x: &'a Vector,
    /// `V(x_t)`.
    pub v: &'a Vector,
}

/// The potential `P_t` together with its normal-cone element `c_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialWitness {
    pub t: usize,
    pub c: Vector,
    /// `P_t`.
    pub value: f64,
    /// `‖ηV(x_t) + ηc_t‖²`.
    pub anchored_sq: f64,
    /// `‖ηV(x_t) − ηV(x_{t−½})‖²`.
    pub variation_sq: f64,
    /// `t<ηV(x_t) + ηc_t, x_t − x₁>`.
    pub inner: f64,
}

/// `c_t = (x_{t−1} − ηV(x_{t−½}) + (x₁ − x_{t−1})/t − x_t)/η`.
///
/// The bracket is evaluated in the same order as the learner's update so
/// that interior coordinates give exactly zero.
pub fn normal_cone_witness(
    x1: &Vector,
    x_prev: &Vector,
    v_prev_half: &Vector,
    x: &Vector,
    eta: f64,
    t: usize,
) -> Vector {
    let w = 1.0 / ((t - 1) as f64 + 1.0);
    let pre = x_prev - v_prev_half * eta + (x1 - x_prev) * w;
    (pre - x) / eta
}

/// `‖Π(x + c) − x‖`.
pub fn cone_defect(set: &FeasibleSet, x: &Vector, c: &Vector) -> f64 {
    let mut y = x + c;
    set.project_in_place(&mut y);
    (y - x).norm()
}

/// Computes `P_t` and checks that every player slice of `c_t` lies in the
/// normal cone at `x_t`.
pub fn potential(inputs: PotentialInputs<'_>, eta: f64, t: usize, set: &FeasibleSet) -> Result<PotentialWitness> {
    if t < 2 {
        return Err(Error::InvalidArgument("the potential is defined for t >= 2".into()));
    }
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument("step size must be positive".into()));
    }
    let n = set.dim();
    for v in [inputs.x1, inputs.x_prev, inputs.v_prev_half, inputs.x, inputs.v] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
    }
    let c = normal_cone_witness(inputs.x1, inputs.x_prev, inputs.v_prev_half, inputs.x, eta, t);
    let defect = cone_defect(set, inputs.x, &c);
    let scale = (inputs.x + &c).amax().max(1.0);
    if defect > CONE_TOL * scale {
        return Err(Error::Certificate(format!(
            "c_{t} is not in the normal cone at x_{t} (defect {defect:e})"
        )));
    }
    let anchored = (inputs.v + &c) * eta;
    let anchored_sq = anchored.norm_squared();
    let variation_sq = ((inputs.v - inputs.v_prev_half) * eta).norm_squared();
    let tf = t as f64;
    let inner = tf * anchored.dot(&(inputs.x - inputs.x1));
    let value = tf * (tf + 1.0) / 2.0 * (anchored_sq + variation_sq) + inner;
    Ok(PotentialWitness {
        t,
        c,
        value,
        anchored_sq,
        variation_sq,
        inner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_run_has_zero_potential() {
        let set = FeasibleSet::cube(2, 1.0).unwrap();
        let x = Vector::from_column_slice(&[0.2, -0.4]);
        let zero = Vector::zeros(2);
        let w = potential(
            PotentialInputs {
                x1: &x,
                x_prev: &x,
                v_prev_half: &zero,
                x: &x,
                v: &zero,
            },
            0.3,
            5,
            &set,
        )
        .unwrap();
        assert_eq!(w.c, zero);
        assert_eq!(w.value, 0.0);
    }

    #[test]
    fn clamped_coordinate_gets_outward_normal() {
        let set = FeasibleSet::cube(1, 1.0).unwrap();
        let x1 = Vector::from_column_slice(&[0.0]);
        let x_prev = Vector::from_column_slice(&[0.9]);
        let v_half = Vector::from_column_slice(&[-2.0]);
        let x = Vector::from_column_slice(&[1.0]);
        // pre-projection point: 0.9 + 0.5·2 + (0 − 0.9)/2 = 1.45
        let c = normal_cone_witness(&x1, &x_prev, &v_half, &x, 0.5, 2);
        assert!((c[0] - 0.9).abs() < 1e-12);
        assert_eq!(cone_defect(&set, &x, &c), 0.0);
    }

    #[test]
    fn rejects_inward_witness() {
        let set = FeasibleSet::cube(1, 1.0).unwrap();
        let zero = Vector::zeros(1);
        let x = Vector::from_column_slice(&[0.5]);
        let x_prev = Vector::from_column_slice(&[0.0]);
        // interior x_t that was not produced by the update
        let r = potential(
            PotentialInputs {
                x1: &zero,
                x_prev: &x_prev,
                v_prev_half: &zero,
                x: &x,
                v: &zero,
            },
            0.1,
            3,
            &set,
        );
        assert!(matches!(r, Err(Error::Certificate(_))));
    }
}
