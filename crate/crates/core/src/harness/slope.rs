use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::RunRecord;

/// Default lower end of the fit window; earlier rounds are transient.
pub const DEFAULT_WINDOW_START: usize = 100;

/// Least-squares line through `(ln t, ln value)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (usize, usize),
    /// Rows that entered the fit.
    pub points: usize,
}

/// Fits `ln value = slope·ln t + intercept` over rows with `t` in `window`.
/// Nonpositive values are skipped; fewer than 10 usable rows is an error.
pub fn fit_loglog_points(points: &[(f64, f64)], window: (usize, usize)) -> Result<SlopeFit> {
    let (lo, hi) = window;
    if lo < 2 || lo > hi {
        return Err(Error::InvalidArgument(format!(
            "fit window must satisfy 2 <= t_min <= t_max, got ({lo}, {hi})"
        )));
    }
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, v)| *t >= lo as f64 && *t <= hi as f64 && *v > 0.0 && v.is_finite())
        .map(|(t, v)| (t.ln(), v.ln()))
        .collect();
    if xy.len() < 10 {
        return Err(Error::InvalidArgument(format!(
            "slope fit needs at least 10 usable rows, got {}",
            xy.len()
        )));
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("slope fit needs distinct t values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
        window,
        points: xy.len(),
    })
}

/// [`fit_loglog_points`] on a named column of a trace.
pub fn fit_loglog_slope(records: &[RunRecord], column: &str, window: (usize, usize)) -> Result<SlopeFit> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.column(column).map(|v| (r.t as f64, v)))
        .collect();
    fit_loglog_points(&points, window)
}

/// Reads `(t, column)` pairs from a trace CSV, skipping empty fields.
pub fn read_csv_column(path: impl AsRef<Path>, column: &str) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidArgument(format!("trace has no column {name:?}")))
    };
    let (ti, ci) = (find("t")?, find(column)?);
    let mut out = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let parse = |i: usize| -> Result<Option<f64>> {
            let field = row.get(i).unwrap_or("");
            if field.is_empty() {
                return Ok(None);
            }
            field.parse::<f64>().map(Some).map_err(|_| {
                Error::InvalidArgument(format!("row {}: cannot parse {field:?}", line + 2))
            })
        };
        if let (Some(t), Some(v)) = (parse(ti)?, parse(ci)?) {
            out.push((t, v));
        }
    }
    Ok(out)
}
