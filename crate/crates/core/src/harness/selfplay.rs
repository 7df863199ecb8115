use crate::error::{Error, Result};
use crate::games::GameOracle;
use crate::learners::{make_learner, Algorithm, Feedback, LearnerConfig, LearnerState};
use crate::metrics::{
    measure_at, potential, CertificateRow, DynamicMode, DynamicRegret, ExternalRegret,
    IterateSnapshot, PotentialInputs, RunRecord,
};
use crate::Vector;

use super::config::{MetricSelection, SelfPlayConfig};

/// Everything a self-play run needs besides the game.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfPlaySetup {
    pub algorithms: Vec<Algorithm>,
    /// Per-player step override; `None` uses the learner default for `L`.
    pub etas: Vec<Option<f64>>,
    pub horizon: usize,
    pub stride: usize,
    pub initial: Vector,
    pub metrics: MetricSelection,
    pub log_iterates: usize,
}

impl SelfPlaySetup {
    /// One algorithm for every player, default steps, stride 1, all metrics.
    pub fn uniform(algorithm: Algorithm, eta: Option<f64>, players: usize, horizon: usize, initial: Vector) -> Self {
        Self {
            algorithms: vec![algorithm; players],
            etas: vec![eta; players],
            horizon,
            stride: 1,
            initial,
            metrics: MetricSelection::default(),
            log_iterates: 0,
        }
    }
}

/// Output of [`run_self_play`].
#[derive(Debug, Clone, PartialEq)]
pub struct SelfPlayTrace {
    pub num_players: usize,
    /// Strided rows: rounds `1, 1+k, 1+2k, …` and `T`.
    pub records: Vec<RunRecord>,
    /// One row per round when the potential is tracked, else empty.
    pub certificate_rows: Vec<CertificateRow>,
    /// Full vectors of the first `log_iterates` rounds.
    pub iterates: Vec<IterateSnapshot>,
    pub dynamic_mode: Option<DynamicMode>,
    /// The common step when the potential is tracked.
    pub common_eta: Option<f64>,
    pub lipschitz: f64,
    /// Diameter of the joint set, absent when unbounded.
    pub diameter: Option<f64>,
    pub initial: Vector,
    /// `V(x₁)`.
    pub initial_gradient: Vector,
    /// Learner variations `S` after the last round (0 for non-adaptive learners).
    pub learner_variation: Vec<f64>,
    /// Learner steps after the last round.
    pub learner_eta: Vec<f64>,
}

impl SelfPlayTrace {
    pub fn last(&self) -> &RunRecord {
        self.records.last().expect("a run has at least one row")
    }
}

fn is_recorded(t: usize, stride: usize, horizon: usize) -> bool {
    (t - 1).is_multiple_of(stride) || t == horizon
}

/// Builds the game from the config and runs it.
pub fn run_self_play(config: &SelfPlayConfig) -> Result<SelfPlayTrace> {
    config.validate()?;
    let game = config.game.build(config.seed)?;
    let players = game.num_players();
    let algorithms = config.algorithm.resolve(players, "algorithm")?;
    let etas = match &config.eta {
        Some(e) => e.resolve(players, "eta")?.into_iter().map(Some).collect(),
        None => vec![None; players],
    };
    let total = game.layout().total_dim();
    let initial = match &config.initial {
        Some(x) if x.len() != total => {
            return Err(Error::Config(format!(
                "initial: expected {total} entries, got {}",
                x.len()
            )))
        }
        Some(x) => Vector::from_column_slice(x),
        None => config.game.default_initial(total),
    };
    let setup = SelfPlaySetup {
        algorithms,
        etas,
        horizon: config.horizon,
        stride: config.stride,
        initial,
        metrics: config.metrics.clone(),
        log_iterates: config.log_iterates,
    };
    run_self_play_on(game.as_ref(), &setup)
}

/// Synchronous self-play: every round all players propose, the oracle
/// evaluates `V` at the joint proposal, and every player updates on its
/// slice. EG/EAG players take two such exchanges per round and must not be
/// mixed with single-call learners.
pub fn run_self_play_on(game: &dyn GameOracle, setup: &SelfPlaySetup) -> Result<SelfPlayTrace> {
    let players = game.num_players();
    let layout = game.layout().clone();
    if setup.algorithms.len() != players || setup.etas.len() != players {
        return Err(Error::Config(format!(
            "algorithm/eta: expected {players} entries per player list"
        )));
    }
    if setup.horizon < 2 {
        return Err(Error::Config(format!("T: must be at least 2, got {}", setup.horizon)));
    }
    if setup.stride == 0 {
        return Err(Error::Config("stride: must be at least 1".into()));
    }
    let two_phase = setup.algorithms[0].is_two_phase();
    if setup.algorithms.iter().any(|a| a.is_two_phase() != two_phase) {
        return Err(Error::Config(
            "algorithm: eg/eag cannot be mixed with single-call learners".into(),
        ));
    }
    let joint = game.joint_set();
    let x1 = joint
        .snap(&setup.initial)
        .map_err(|_| Error::Config("initial: profile is not feasible".into()))?;
    let diameter = joint.diameter();

    let mut learners: Vec<LearnerState> = Vec::with_capacity(players);
    for i in 0..players {
        let cfg = LearnerConfig {
            eta: setup.etas[i],
            lipschitz: Some(game.lipschitz()),
            diameter,
            anchor: true,
        };
        let x1_i = layout.slice(i, &x1);
        learners.push(
            make_learner(setup.algorithms[i], game.player_sets()[i].clone(), x1_i, &cfg)
                .map_err(|e| Error::Config(format!("player {}: {e}", i + 1)))?,
        );
    }

    let eligible = setup.algorithms.iter().all(|a| *a == Algorithm::Aog)
        && learners.iter().all(|l| l.eta() == learners[0].eta());
    let track_potential = match setup.metrics.potential {
        Some(true) if !eligible => {
            return Err(Error::Config(
                "metrics.potential: needs fixed-step aog with a common step for every player".into(),
            ))
        }
        Some(flag) => flag,
        None => eligible,
    };
    let common_eta = track_potential.then(|| learners[0].eta());

    let mut ext: Vec<Option<ExternalRegret>> = (0..players)
        .map(|i| {
            (setup.metrics.external_regret && game.player_sets()[i].is_bounded())
                .then(|| ExternalRegret::new(layout.dims()[i]))
        })
        .collect();
    let mut dynamic = if setup.metrics.dynamic_regret {
        DynamicRegret::new(game).ok()
    } else {
        None
    };
    let dynamic_mode = dynamic.as_ref().map(|d| d.mode());

    let mut variation = vec![0.0; players];
    let mut prev_v_half: Option<Vector> = None;
    let mut prev_base: Option<Vector> = None;
    let mut records = Vec::new();
    let mut certificate_rows = Vec::new();
    let mut iterates = Vec::new();
    let initial_gradient = game.eval(&x1);

    let concat = |parts: Vec<Vector>| layout.concat(&parts);

    for t in 1..=setup.horizon {
        let need_v_base = track_potential || t <= setup.log_iterates || two_phase;
        let (base, v_base, half, v_half) = if two_phase {
            let base = concat(learners.iter_mut().map(|l| l.propose()).collect())?;
            let v_base = game.eval(&base);
            for (i, l) in learners.iter_mut().enumerate() {
                l.update(&Feedback::new(layout.slice(i, &v_base))?)?;
            }
            let half = concat(learners.iter_mut().map(|l| l.propose()).collect())?;
            let v_half = game.eval(&half);
            for (i, l) in learners.iter_mut().enumerate() {
                l.update(&Feedback::new(layout.slice(i, &v_half))?)?;
            }
            (base, Some(v_base), half, v_half)
        } else {
            let base = concat(learners.iter().map(|l| l.base().clone()).collect())?;
            let v_base = need_v_base.then(|| game.eval(&base));
            let half = concat(learners.iter_mut().map(|l| l.propose()).collect())?;
            let v_half = game.eval(&half);
            for (i, l) in learners.iter_mut().enumerate() {
                l.update(&Feedback::new(layout.slice(i, &v_half))?)?;
            }
            (base, v_base, half, v_half)
        };
        crate::error::ensure_finite(v_half.as_slice(), "game gradient")?;

        for i in 0..players {
            let xi = layout.slice(i, &half);
            let gi = layout.slice(i, &v_half);
            if let Some(acc) = ext[i].as_mut() {
                acc.push(&xi, &gi)?;
            }
            if let Some(prev) = &prev_v_half {
                if t >= 2 {
                    variation[i] += (&gi - layout.slice(i, prev)).norm_squared();
                }
            }
        }
        if let Some(d) = dynamic.as_mut() {
            d.push(game, &half, &v_half)?;
        }

        let dist_half = (&half - &base).norm();
        let witness = match (track_potential, &prev_base, &prev_v_half, &v_base) {
            (true, Some(xp), Some(vp), Some(vb)) => Some(potential(
                PotentialInputs {
                    x1: &x1,
                    x_prev: xp,
                    v_prev_half: vp,
                    x: &base,
                    v: vb,
                },
                common_eta.unwrap_or(1.0),
                t,
                joint,
            )?),
            _ => None,
        };
        if track_potential {
            certificate_rows.push(CertificateRow {
                t,
                potential: witness.as_ref().map(|w| w.value),
                anchored_sq: witness.as_ref().map(|w| w.anchored_sq),
                variation_sq: witness.as_ref().map(|w| w.variation_sq),
                r_tan_half: joint.tangent_residual(&half, &v_half)?,
                dist_half,
            });
        }
        if t <= setup.log_iterates {
            iterates.push(IterateSnapshot {
                t,
                base: base.clone(),
                v_base: v_base.clone().unwrap_or_else(|| game.eval(&base)),
                half: half.clone(),
                v_half: v_half.clone(),
            });
        }

        if is_recorded(t, setup.stride, setup.horizon) {
            let m = measure_at(game, &half, &v_half)?;
            let losses = game
                .has_losses()
                .then(|| (0..players).map(|i| game.loss(i, &half)).collect::<Option<Vec<f64>>>())
                .flatten();
            let ext_regret = ext
                .iter()
                .enumerate()
                .map(|(i, acc)| acc.as_ref().map(|a| a.value(&game.player_sets()[i])).transpose())
                .collect::<Result<Vec<_>>>()?;
            records.push(RunRecord {
                t,
                r_tan: Some(m.r_tan),
                gap: if setup.metrics.gap { m.gap } else { None },
                tgap_exact: if setup.metrics.tgap { m.tgap_exact } else { None },
                potential: witness.as_ref().map(|w| w.value),
                eta: learners.iter().map(|l| l.eta()).collect(),
                s: variation.clone(),
                ext_regret,
                dyn_regret: match &dynamic {
                    Some(d) => d.totals().iter().map(|v| Some(*v)).collect(),
                    None => vec![None; players],
                },
                dist_half,
                dist_anchor: (&x1 - &base).norm(),
                losses,
            });
        }

        prev_base = Some(base);
        prev_v_half = Some(v_half);
    }

    Ok(SelfPlayTrace {
        num_players: players,
        records,
        certificate_rows,
        iterates,
        dynamic_mode,
        common_eta,
        lipschitz: game.lipschitz(),
        diameter,
        initial: x1,
        initial_gradient,
        learner_variation: learners.iter().map(|l| l.variation()).collect(),
        learner_eta: learners.iter().map(|l| l.eta()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::make_bilinear_saddle;

    #[test]
    fn stride_rows() {
        let g = make_bilinear_saddle(1.0, 1.0, (1, 1)).unwrap();
        let mut setup = SelfPlaySetup::uniform(Algorithm::Aog, None, 2, 23, Vector::from_element(2, 0.5));
        setup.stride = 5;
        let trace = run_self_play_on(&g, &setup).unwrap();
        let ts: Vec<usize> = trace.records.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![1, 6, 11, 16, 21, 23]);
        assert_eq!(trace.certificate_rows.len(), 23);
    }

    #[test]
    fn nash_start_is_a_fixed_point() {
        let g = make_bilinear_saddle(1.0, 1.0, (2, 2)).unwrap();
        for alg in Algorithm::ALL {
            let setup = SelfPlaySetup::uniform(alg, None, 2, 20, Vector::zeros(4));
            let trace = run_self_play_on(&g, &setup).unwrap();
            for r in &trace.records {
                assert_eq!(r.r_tan, Some(0.0), "{alg}");
                assert_eq!(r.dist_anchor, 0.0, "{alg}");
            }
        }
    }

    #[test]
    fn mixed_phases_rejected() {
        let g = make_bilinear_saddle(1.0, 1.0, (1, 1)).unwrap();
        let mut setup = SelfPlaySetup::uniform(Algorithm::Aog, None, 2, 10, Vector::zeros(2));
        setup.algorithms[1] = Algorithm::Eg;
        assert!(matches!(run_self_play_on(&g, &setup), Err(Error::Config(_))));
    }
}
