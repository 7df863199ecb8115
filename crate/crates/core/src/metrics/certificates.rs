use crate::error::{Error, Result};

/// Per-round scalars needed by the rate certificates of fixed-step AOG.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateRow {
    pub t: usize,
    /// `P_t`, absent at `t = 1`.
    pub potential: Option<f64>,
    /// `‖ηV(x_t) + ηc_t‖²`.
    pub anchored_sq: Option<f64>,
    /// `‖ηV(x_t) − ηV(x_{t−½})‖²`.
    pub variation_sq: Option<f64>,
    /// `r_tan(x_{t+½})`.
    pub r_tan_half: f64,
    /// `‖x_{t+½} − x_t‖`.
    pub dist_half: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateParams {
    pub eta: f64,
    pub lipschitz: f64,
    pub diameter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub t: usize,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of one certificate over a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub name: &'static str,
    pub checked: usize,
    pub violations: Vec<Violation>,
    /// Largest `lhs / rhs` seen (0 when nothing was checked).
    pub worst_ratio: f64,
}

impl CertificateReport {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checked: 0,
            violations: Vec::new(),
            worst_ratio: 0.0,
        }
    }

    fn check(&mut self, t: usize, lhs: f64, rhs: f64) {
        self.checked += 1;
        if rhs > 0.0 {
            self.worst_ratio = self.worst_ratio.max(lhs / rhs);
        }
        if !(lhs <= rhs) {
            self.violations.push(Violation { t, lhs, rhs });
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the bounded-domain certificates of fixed-step AOG self-play:
///
/// - `P₂ ≤ 9D²`
/// - `P_{t+1} ≤ P_t + 3q/(2(1−4q))·‖ηV(x_{t+1}) + ηc_{t+1}‖²`, `q = (ηL)²`,
///   up to `1e-8·max(1, |P_t|)`, on consecutive rows
/// - `‖V(x_t) + c_t‖ ≤ 13D/(ηt)` and `‖V(x_t) − V(x_{t−½})‖ ≤ 13D/(ηt)`
/// - `‖x_{t+½} − x_t‖ ≤ 27D/t`
/// - `r_tan(x_{t+½}) ≤ 55D/(ηt)` for `t ≥ 2`
pub fn check_certificates(rows: &[CertificateRow], p: CertificateParams) -> Vec<CertificateReport> {
    let CertificateParams { eta, lipschitz, diameter: d } = p;
    let q = (eta * lipschitz).powi(2);
    let coef = 3.0 * q / (2.0 * (1.0 - 4.0 * q));

    let mut p2 = CertificateReport::new("potential_initial");
    let mut descent = CertificateReport::new("potential_descent");
    let mut anchored = CertificateReport::new("anchored_residual");
    let mut variation = CertificateReport::new("gradient_variation");
    let mut half = CertificateReport::new("half_step_distance");
    let mut rate = CertificateReport::new("tangent_residual_rate");

    for (i, r) in rows.iter().enumerate() {
        let tf = r.t as f64;
        if r.t == 2 {
            if let Some(p) = r.potential {
                p2.check(2, p, 9.0 * d * d);
            }
        }
        if let (Some(a), Some(v)) = (r.anchored_sq, r.variation_sq) {
            anchored.check(r.t, a.sqrt() / eta, 13.0 * d / (eta * tf));
            variation.check(r.t, v.sqrt() / eta, 13.0 * d / (eta * tf));
        }
        half.check(r.t, r.dist_half, 27.0 * d / tf);
        if r.t >= 2 {
            rate.check(r.t, r.r_tan_half, 55.0 * d / (eta * tf));
        }
        if coef > 0.0 && coef.is_finite() {
            if let (Some(prev), Some(pt), Some(a_next)) = (
                i.checked_sub(1).and_then(|j| rows.get(j)).filter(|prev| prev.t + 1 == r.t),
                r.potential,
                r.anchored_sq,
            ) {
                if let Some(pp) = prev.potential {
                    let tol = 1e-8 * pp.abs().max(1.0);
                    descent.check(r.t, pt, pp + coef * a_next + tol);
                }
            }
        }
    }
    vec![p2, descent, anchored, variation, half, rate]
}

/// `r_tan(x_{t+½}) ≤ 1430H/(ηt)` for `t ≥ 2` with
/// `H = max{η·r_tan(x₁), ‖x₁ − x⋆‖}`.
pub fn check_unbounded_rate(rows: &[CertificateRow], eta: f64, h: f64) -> CertificateReport {
    let mut rep = CertificateReport::new("unbounded_tangent_rate");
    for r in rows.iter().filter(|r| r.t >= 2) {
        rep.check(r.t, r.r_tan_half, 1430.0 * h / (eta * r.t as f64));
    }
    rep
}

/// The sequence `a_k = ‖ηV(x_k) + ηc_k‖² + 2‖ηV(x_k) − ηV(x_{k−½})‖²`,
/// `k = 2, 3, …`, from consecutive certificate rows.
pub fn sequence_from_rows(rows: &[CertificateRow]) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for r in rows.iter().filter(|r| r.t >= 2) {
        if r.t != out.len() + 2 {
            return Err(Error::InvalidArgument(format!(
                "certificate rows are not consecutive at t = {}",
                r.t
            )));
        }
        match (r.anchored_sq, r.variation_sq) {
            (Some(a), Some(v)) => out.push(a + 2.0 * v),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "row t = {} has no potential data",
                    r.t
                )))
            }
        }
    }
    Ok(out)
}
