//! Numeric checks of the algebra behind the rate analysis.
//!
//! - [`check_descent_identity`] evaluates both sides of the sum-of-squares
//!   identity that drives the one-step potential bound.
//! - [`check_sequence_bound`] tests the recursive-inequality lemma that turns
//!   the potential bound into an `O(1/k²)` rate, reporting hypothesis and
//!   conclusion separately.
//! - [`run_eag_adversary`] replays the alternating-gradient construction that
//!   gives online EAG linear regret.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::harness::{run_adversarial, AppendixDAdversary};
use crate::learners::{make_learner, Algorithm, LearnerConfig};
use crate::metrics::{normal_cone_witness, IterateSnapshot};
use crate::Vector;

/// Inputs of the descent identity. `a₄` is derived from the others as
/// `a₄ = a₂ − b₃ + (a₀ − a₂)/(t+1) − u₄`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityInstance {
    pub a0: Vector,
    pub a1: Vector,
    pub a2: Vector,
    pub a3: Vector,
    pub b1: Vector,
    pub b2: Vector,
    pub b3: Vector,
    pub b4: Vector,
    pub u2: Vector,
    pub u4: Vector,
    pub t: f64,
    pub q: f64,
}

/// Both sides of the identity and their relative disagreement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / max(1, |lhs|, |rhs|)`.
    pub relative_error: f64,
    /// Set when `(1 − 4q)t − 4q ≤ 0`, where the downstream bound is void.
    pub flagged: bool,
}

impl IdentityInstance {
    fn vectors(&self) -> [&Vector; 10] {
        [
            &self.a0, &self.a1, &self.a2, &self.a3, &self.b1, &self.b2, &self.b3, &self.b4, &self.u2,
            &self.u4,
        ]
    }

    pub fn dim(&self) -> usize {
        self.a0.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if let Some(v) = self.vectors().iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: v.len() });
        }
        if !(self.t >= 1.0) || !(self.q > 0.0) {
            return Err(Error::InvalidArgument("identity needs t >= 1 and q > 0".into()));
        }
        Ok(())
    }

    pub fn a4(&self) -> Vector {
        &self.a2 - &self.b3 + (&self.a0 - &self.a2) / (self.t + 1.0) - &self.u4
    }

    /// Standard-normal vectors in dimension `d`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: usize, t: f64, q: f64) -> Self {
        let mut draw = || Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        Self {
            a0: draw(),
            a1: draw(),
            a2: draw(),
            a3: draw(),
            b1: draw(),
            b2: draw(),
            b3: draw(),
            b4: draw(),
            u2: draw(),
            u4: draw(),
            t,
            q,
        }
    }

    /// Every vector multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let [a0, a1, a2, a3, b1, b2, b3, b4, u2, u4] = self.vectors().map(|v| v * s);
        Self {
            a0,
            a1,
            a2,
            a3,
            b1,
            b2,
            b3,
            b4,
            u2,
            u4,
            t: self.t,
            q: self.q,
        }
    }

    /// Substitutes a fixed-step AOG trace at round `t`:
    /// `a₀ = x₁`, `a_k = x_{t−1+k/2}`, `b_k = ηV(x_{t−1+k/2})`, `u₂ = ηc_t`,
    /// `u₄ = ηc_{t+1}`. `log` must hold rounds `t−1`, `t` and `t+1`.
    pub fn from_run(log: &[IterateSnapshot], t: usize, eta: f64, lipschitz: f64) -> Result<Self> {
        let find = |round: usize| {
            log.iter()
                .find(|s| s.t == round)
                .ok_or_else(|| Error::InvalidArgument(format!("iterate log lacks round {round}")))
        };
        if t < 2 {
            return Err(Error::InvalidArgument("run substitution needs t >= 2".into()));
        }
        let first = find(1)?;
        let prev = find(t - 1)?;
        let cur = find(t)?;
        let next = find(t + 1)?;
        let x1 = &first.base;
        let c_t = normal_cone_witness(x1, &prev.base, &prev.v_half, &cur.base, eta, t);
        let c_next = normal_cone_witness(x1, &cur.base, &cur.v_half, &next.base, eta, t + 1);
        Ok(Self {
            a0: x1.clone(),
            a1: prev.half.clone(),
            a2: cur.base.clone(),
            a3: cur.half.clone(),
            b1: &prev.v_half * eta,
            b2: &cur.v_base * eta,
            b3: &cur.v_half * eta,
            b4: &next.v_base * eta,
            u2: c_t * eta,
            u4: c_next * eta,
            t: t as f64,
            q: (eta * lipschitz).powi(2),
        })
    }
}

/// Evaluates both sides term by term.
///
/// Left side (potential drop minus the nonnegative terms of the one-step
/// argument):
///
/// ```text
/// t(t+1)/2 (‖b₂+u₂‖² + ‖b₂−b₁‖²) + t<b₂+u₂, a₂−a₀>
/// − (t+1)(t+2)/2 (‖b₄+u₄‖² + ‖b₄−b₃‖²) − (t+1)<b₄+u₄, a₄−a₀>
/// − t(t+1)<b₄−b₂, a₄−a₂> − t(t+1)/(4q) (q‖a₄−a₃‖² − ‖b₄−b₃‖²)
/// − t(t+1)<u₄, a₄−a₂> − t(t+1)/2 <u₂, a₂−a₃> − t(t+1)/2 <u₂, a₂−a₄>
/// − t(t+1)/2 <a₂−b₁+(a₀−a₂)/(t+1)−a₃, a₃−a₄>
/// ```
///
/// Right side:
///
/// ```text
/// t(t+1)/2 ‖(a₃−a₄)/2 + b₁ − b₂‖²
/// + t(t+1)/2 ‖(a₃+a₄)/2 − a₂ + b₂ + u₂ − (a₀−a₂)/(t+1)‖²
/// + ((1−4q)t − 4q)/(4q) (t+1) ‖b₃−b₄‖² + (t+1)<b₃−b₄, b₄+u₄>
/// ```
pub fn check_descent_identity(inst: &IdentityInstance) -> IdentityCheck {
    let IdentityInstance {
        a0, a1: _, a2, a3, b1, b2, b3, b4, u2, u4, t, q,
    } = inst;
    let (t, q) = (*t, *q);
    let a4 = inst.a4();
    let k = t * (t + 1.0);
    let pull = (a0 - a2) / (t + 1.0);

    let p_t = k / 2.0 * ((b2 + u2).norm_squared() + (b2 - b1).norm_squared()) + t * (b2 + u2).dot(&(a2 - a0));
    let p_next = (t + 1.0) * (t + 2.0) / 2.0 * ((b4 + u4).norm_squared() + (b4 - b3).norm_squared())
        + (t + 1.0) * (b4 + u4).dot(&(&a4 - a0));
    let lhs = p_t
        - p_next
        - k * (b4 - b2).dot(&(&a4 - a2))
        - k / (4.0 * q) * (q * (&a4 - a3).norm_squared() - (b4 - b3).norm_squared())
        - k * u4.dot(&(&a4 - a2))
        - k / 2.0 * u2.dot(&(a2 - a3))
        - k / 2.0 * u2.dot(&(a2 - &a4))
        - k / 2.0 * (a2 - b1 + &pull - a3).dot(&(a3 - &a4));

    let first = (a3 - &a4) / 2.0 + b1 - b2;
    let second = (a3 + &a4) / 2.0 - a2 + b2 + u2 - &pull;
    let slack = (1.0 - 4.0 * q) * t - 4.0 * q;
    let rhs = k / 2.0 * first.norm_squared()
        + k / 2.0 * second.norm_squared()
        + slack / (4.0 * q) * (t + 1.0) * (b3 - b4).norm_squared()
        + (t + 1.0) * (b3 - b4).dot(&(b4 + u4));

    let relative_error = (lhs - rhs).abs() / 1f64.max(lhs.abs()).max(rhs.abs());
    IdentityCheck {
        lhs,
        rhs,
        relative_error,
        flagged: slack <= 0.0,
    }
}

/// Separate outcomes for the hypothesis and conclusion of the sequence lemma.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceBoundReport {
    pub hypothesis_holds: bool,
    pub conclusion_holds: bool,
    /// First `k` where `(k²/4)a_k ≤ C₁ + p/(1−p) Σ_{t=2}^{k−1} a_t` fails.
    pub hypothesis_failure: Option<usize>,
    /// First `k` where `a_k ≤ 4C₁/((1−3p)k²)` fails.
    pub conclusion_failure: Option<usize>,
    /// Largest `a_k / (4C₁/((1−3p)k²))`.
    pub worst_conclusion_ratio: f64,
}

impl SequenceBoundReport {
    pub fn holds(&self) -> bool {
        self.hypothesis_holds && self.conclusion_holds
    }
}

fn leq(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + (1e-9 * lhs.abs().max(rhs.abs())).max(1e-12)
}

/// `a[0]` is `a_2`. Comparisons allow relative `1e-9` with absolute floor
/// `1e-12`.
pub fn check_sequence_bound(a: &[f64], c1: f64, p: f64) -> Result<SequenceBoundReport> {
    if !(p > 0.0 && p < 1.0 / 3.0) {
        return Err(Error::InvalidArgument(format!("p must lie in (0, 1/3), got {p}")));
    }
    if !(c1 >= 0.0) {
        return Err(Error::InvalidArgument("C1 must be nonnegative".into()));
    }
    if let Some(i) = a.iter().position(|x| !(*x >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "sequence entry a_{} is negative or not finite",
            i + 2
        )));
    }
    let ratio = p / (1.0 - p);
    let mut partial = 0.0;
    let mut report = SequenceBoundReport {
        hypothesis_holds: true,
        conclusion_holds: true,
        hypothesis_failure: None,
        conclusion_failure: None,
        worst_conclusion_ratio: 0.0,
    };
    for (i, &ak) in a.iter().enumerate() {
        let k = (i + 2) as f64;
        if report.hypothesis_failure.is_none() && !leq(k * k / 4.0 * ak, c1 + ratio * partial) {
            report.hypothesis_failure = Some(i + 2);
        }
        let bound = 4.0 * c1 / ((1.0 - 3.0 * p) * k * k);
        if bound > 0.0 {
            report.worst_conclusion_ratio = report.worst_conclusion_ratio.max(ak / bound);
        }
        if report.conclusion_failure.is_none() && !leq(ak, bound) {
            report.conclusion_failure = Some(i + 2);
        }
        partial += ak;
    }
    report.hypothesis_holds = report.hypothesis_failure.is_none();
    report.conclusion_holds = report.conclusion_failure.is_none();
    Ok(report)
}

/// Result of replaying the alternating adversary against online EAG.
#[derive(Debug, Clone, PartialEq)]
pub struct EagAdversaryOutcome {
    /// Player-1 external regret after `rounds` played actions.
    pub regret: f64,
    /// Player 1's played actions `y¹_1, …, y¹_T`.
    pub plays: Vec<f64>,
}

/// Online EAG on `[-1, 1]` from `y¹₁ = 0` against gradients `1, 0, 1, 0, …`,
/// charged on every played action. Fails with a certificate error if the
/// plays deviate from `0, max(−η, −1), 0, …`.
pub fn run_eag_adversary(rounds: usize, eta: f64) -> Result<EagAdversaryOutcome> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("at least one round is required".into()));
    }
    let set = FeasibleSet::cube(1, 1.0)?;
    let learner = make_learner(Algorithm::Eag, set, Vector::zeros(1), &LearnerConfig::with_eta(eta))?;
    let trace = run_adversarial(learner, &mut AppendixDAdversary, rounds, rounds)?;
    let even = (-eta).max(-1.0);
    for (i, y) in trace.plays.iter().enumerate() {
        let expected = if i % 2 == 0 { 0.0 } else { even };
        if y[0] != expected {
            return Err(Error::Certificate(format!(
                "EAG played {} at round {}, expected {expected}",
                y[0],
                i + 1
            )));
        }
    }
    Ok(EagAdversaryOutcome {
        regret: trace.final_regret.unwrap_or(f64::NAN),
        plays: trace.plays.iter().map(|y| y[0]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_instance() {
        let z = Vector::zeros(3);
        let inst = IdentityInstance {
            a0: z.clone(),
            a1: z.clone(),
            a2: z.clone(),
            a3: z.clone(),
            b1: z.clone(),
            b2: z.clone(),
            b3: z.clone(),
            b4: z.clone(),
            u2: z.clone(),
            u4: z,
            t: 3.0,
            q: 0.1,
        };
        let c = check_descent_identity(&inst);
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
        assert!(!c.flagged);
    }

    #[test]
    fn random_instances_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(d, t, q) in &[(1, 1.0, 0.01), (4, 7.5, 0.2), (10, 1000.0, 0.1)] {
            let inst = IdentityInstance::random(&mut rng, d, t, q);
            let c = check_descent_identity(&inst);
            assert!(c.relative_error <= 1e-9, "{c:?}");
        }
        let inst = IdentityInstance::random(&mut rng, 2, 1.0, 0.3);
        assert!(check_descent_identity(&inst).flagged);
    }

    #[test]
    fn sequence_bound_examples() {
        let c1 = 2.0;
        let a: Vec<f64> = (2..200).map(|k| 4.0 * c1 / (k * k) as f64).collect();
        // (k²/4)a_k = C₁ so the hypothesis holds with any p; the conclusion has slack 1/(1−3p)
        let r = check_sequence_bound(&a, c1, 0.05).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(check_sequence_bound(&[0.0; 50], 1.0, 0.25).unwrap().holds());
        assert!(check_sequence_bound(&a, c1, 0.34).is_err());
        assert!(check_sequence_bound(&a, c1, 0.0).is_err());
    }

    #[test]
    fn sequence_bound_separates_failures() {
        // a_2 = 10 breaks the hypothesis (k²/4·a_k = 10 > C₁ = 1) and the conclusion
        let r = check_sequence_bound(&[10.0, 0.0], 1.0, 0.25).unwrap();
        assert_eq!(r.hypothesis_failure, Some(2));
        assert_eq!(r.conclusion_failure, Some(2));
    }

    #[test]
    fn eag_adversary_small_horizons() {
        let out = run_eag_adversary(10, 0.5).unwrap();
        assert_eq!(out.regret, 5.0);
        let out = run_eag_adversary(1, 0.5).unwrap();
        assert_eq!(out.plays, vec![0.0]);
        assert_eq!(out.regret, 1.0);
        let out = run_eag_adversary(6, 2.0).unwrap();
        assert_eq!(out.plays, vec![0.0, -1.0, 0.0, -1.0, 0.0, -1.0]);
    }
}
