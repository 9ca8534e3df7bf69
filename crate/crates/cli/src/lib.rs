//! Experiment driver: TOML configuration, one run function per subcommand, and
//! deterministic CSV/JSON-lines output.

pub mod config;
pub mod error;
pub mod output;
pub mod runs;

pub use config::{DataConfig, ExperimentConfig, Overrides};
pub use error::CliError;
pub use output::{Check, GridMeta, RunSummary, Status};
pub use runs::{
    initial_data, run, run_lemmas, run_linear, run_norms, run_probe_bilinear, run_sharpness, run_solve, Command,
};

/// Environment variable naming the output directory when neither `--out` nor the config sets one.
pub const OUT_DIR_ENV: &str = "BOUSSINESQ_OUT_DIR";

/// Fallback output directory.
pub const DEFAULT_OUT_DIR: &str = "results";

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::NonConvergence => 2,
        }
    }
}
