use std::io::Write;

use crate::error::{Error, Result};

/// One row of a run trace. `eta` and `s` describe each learner after the
/// round's update, so the adaptive step law reads `eta = rule(s)` per row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub t: usize,
    /// `r_tan(x_{t+½})`; absent in single-learner adversarial runs.
    pub r_tan: Option<f64>,
    pub gap: Option<f64>,
    pub tgap_exact: Option<f64>,
    pub potential: Option<f64>,
    pub eta: Vec<f64>,
    pub s: Vec<f64>,
    pub ext_regret: Vec<Option<f64>>,
    pub dyn_regret: Vec<Option<f64>>,
    /// `‖x_{t+½} − x_t‖`.
    pub dist_half: f64,
    /// `‖x₁ − x_t‖`.
    pub dist_anchor: f64,
    /// Per-player losses at `x_{t+½}`, when the game exposes them. Not
    /// written to CSV.
    pub losses: Option<Vec<f64>>,
}

impl RunRecord {
    pub fn num_players(&self) -> usize {
        self.eta.len()
    }

    /// Looks up a CSV column by name, e.g. `r_tan` or `extreg_2`.
    pub fn column(&self, name: &str) -> Option<f64> {
        match name {
            "t" => return Some(self.t as f64),
            "r_tan" => return self.r_tan,
            "gap" => return self.gap,
            "tgap_exact" => return self.tgap_exact,
            "potential" => return self.potential,
            "dist_half" => return Some(self.dist_half),
            "dist_anchor" => return Some(self.dist_anchor),
            _ => {}
        }
        let (prefix, idx) = name.rsplit_once('_')?;
        let i = idx.parse::<usize>().ok()?.checked_sub(1)?;
        match prefix {
            "eta" => self.eta.get(i).copied(),
            "S" => self.s.get(i).copied(),
            "extreg" => self.ext_regret.get(i).copied().flatten(),
            "dynreg" => self.dyn_regret.get(i).copied().flatten(),
            _ => None,
        }
    }
}

/// `t,r_tan,gap,tgap_exact,potential,eta_1..,S_1..,extreg_1..,dynreg_1..,dist_half,dist_anchor`.
pub fn csv_header(num_players: usize) -> Vec<String> {
    let mut h: Vec<String> = ["t", "r_tan", "gap", "tgap_exact", "potential"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for prefix in ["eta", "S", "extreg", "dynreg"] {
        h.extend((1..=num_players).map(|i| format!("{prefix}_{i}")));
    }
    h.push("dist_half".into());
    h.push("dist_anchor".into());
    h
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Writes the trace with its header. Floats use the shortest representation
/// that round-trips; absent values are empty fields.
pub fn write_csv<W: Write>(records: &[RunRecord], num_players: usize, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(csv_header(num_players))?;
    for r in records {
        if r.eta.len() != num_players
            || r.s.len() != num_players
            || r.ext_regret.len() != num_players
            || r.dyn_regret.len() != num_players
        {
            return Err(Error::DimensionMismatch {
                expected: num_players,
                got: r.eta.len(),
            });
        }
        let mut row = vec![
            r.t.to_string(),
            fmt_opt(r.r_tan),
            fmt_opt(r.gap),
            fmt_opt(r.tgap_exact),
            fmt_opt(r.potential),
        ];
        row.extend(r.eta.iter().copied().map(fmt));
        row.extend(r.s.iter().copied().map(fmt));
        row.extend(r.ext_regret.iter().copied().map(fmt_opt));
        row.extend(r.dyn_regret.iter().copied().map(fmt_opt));
        row.push(fmt(r.dist_half));
        row.push(fmt(r.dist_anchor));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
