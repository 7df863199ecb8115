//! Experiment runner: config files, self-play and adversarial loops, CSV
//! traces and log-log slope fits.
//!
//! Config files are JSON objects tagged by `"mode"`:
//!
//! ```json
//! {"mode": "selfplay", "game": {"id": "appendix_e", "n": 20},
//!  "algorithm": "aog", "eta": 0.3, "T": 10000, "stride": 10}
//! ```
//!
//! Unknown keys are rejected. Cumulative quantities (regrets, `S`) are
//! updated every round; only row emission follows the stride.

mod adversarial;
mod config;
mod selfplay;
mod slope;

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

pub use adversarial::{
    run_adversarial, run_adversarial_config, Adversary, AdversarialTrace, AppendixDAdversary,
    RandomUniformAdversary, ScriptedAdversary, ZeroAdversary,
};
pub use config::{
    load_config, parse_config, AdversarialConfig, AdversarySpec, ExperimentConfig, GameSpec,
    MetricSelection, PerPlayer, SelfPlayConfig, SetSpec,
};
pub use selfplay::{run_self_play, run_self_play_on, SelfPlaySetup, SelfPlayTrace};
pub use slope::{fit_loglog_points, fit_loglog_slope, read_csv_column, SlopeFit, DEFAULT_WINDOW_START};

use crate::error::Result;
use crate::metrics::{write_csv, RunRecord};

/// Writes a trace CSV to `path`.
pub fn emit_csv(records: &[RunRecord], num_players: usize, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_csv(records, num_players, BufWriter::new(file))
}
