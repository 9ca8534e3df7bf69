//! Result files: CSV tables and a one-line JSON summary per run, all tagged with
//! the config hash and grid metadata.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use boussinesq_core::GridSpec;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Text of one CSV field.
pub trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    /// Shortest round-trip form; exponent notation outside `[1e-4, 1e15)`.
    fn cell(&self) -> String {
        let a = self.abs();
        if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
            self.to_string()
        } else {
            format!("{self:e}")
        }
    }
}

macro_rules! plain_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            fn cell(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

plain_cell!(i32, i64, u64, usize, bool, str, String);

impl<T: Cell + ?Sized> Cell for &T {
    fn cell(&self) -> String {
        (**self).cell()
    }
}

/// Builds one CSV row from [`Cell`] values.
#[macro_export]
macro_rules! row {
    ($($v:expr),* $(,)?) => { vec![$($crate::output::Cell::cell(&$v)),*] };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMeta {
    pub num_modes: usize,
    pub tau_max: f64,
    pub tau_points: usize,
    pub tau_spacing: f64,
    pub t_step: f64,
    pub t_final: f64,
}

impl From<&GridSpec> for GridMeta {
    fn from(g: &GridSpec) -> Self {
        GridMeta {
            num_modes: g.num_modes(),
            tau_max: g.tau_max(),
            tau_points: g.tau_points(),
            tau_spacing: g.tau_spacing(),
            t_step: g.t_step(),
            t_final: g.t_final(),
        }
    }
}

/// A pass/fail check together with the tolerance it was judged against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, tolerance: impl Into<String>, pass: bool) -> Self {
        Check { name: name.into(), value, tolerance: tolerance.into(), pass }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NonConvergence,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub experiment_id: String,
    pub command: String,
    pub config_hash: String,
    pub grid: GridMeta,
    pub seed: u64,
    pub status: Status,
    pub results: Map<String, Value>,
    pub verdicts: Vec<Check>,
    pub tables: Vec<String>,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<f64>,
}

impl RunSummary {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

pub struct RunWriter {
    dir: PathBuf,
    command: String,
    hash: String,
    grid: GridMeta,
    tables: Vec<String>,
    results: Map<String, Value>,
    verdicts: Vec<Check>,
}

impl RunWriter {
    pub fn new(dir: &Path, command: &str, cfg: &ExperimentConfig, grid: &GridSpec) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            command: command.into(),
            hash: cfg.hash(),
            grid: grid.into(),
            tables: Vec::new(),
            results: Map::new(),
            verdicts: Vec::new(),
        })
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    /// Writes `<command>_<name>.csv`: two `#` metadata lines, the header, then the rows.
    pub fn table(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
        let file = format!("{}_{name}.csv", self.command.replace('-', "_"));
        let g = &self.grid;
        let mut buf = Vec::new();
        writeln!(buf, "# config_hash={}", self.hash)?;
        writeln!(
            buf,
            "# grid num_modes={} tau_max={} tau_points={} tau_spacing={} t_step={} t_final={}",
            g.num_modes, g.tau_max, g.tau_points, g.tau_spacing, g.t_step, g.t_final
        )?;
        {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut buf);
            w.write_record(header)?;
            for r in rows {
                w.write_record(&r)?;
            }
            w.flush()?;
        }
        fs::write(self.dir.join(&file), buf)?;
        self.tables.push(file);
        Ok(())
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.into(), serde_json::to_value(value).expect("result serializes"));
    }

    pub fn check(&mut self, v: Check) {
        self.verdicts.push(v);
    }

    /// Writes `<command>.jsonl` holding the single summary line and returns the summary.
    pub fn finish(self, cfg: &ExperimentConfig, status: Status, wall_clock_ms: Option<f64>) -> Result<RunSummary, CliError> {
        let summary = RunSummary {
            experiment_id: format!("{}-{}", self.command, &self.hash[..12]),
            command: self.command.clone(),
            config_hash: self.hash,
            grid: self.grid,
            seed: cfg.seed,
            status,
            results: self.results,
            verdicts: self.verdicts,
            tables: self.tables,
            config: cfg.clone(),
            wall_clock_ms,
        };
        let mut line = serde_json::to_string(&summary).expect("summary serializes");
        line.push('\n');
        fs::write(self.dir.join(format!("{}.jsonl", self.command.replace('-', "_"))), line)?;
        Ok(summary)
    }
}
