//! Experiment configuration: a TOML file with one table per module, all keys optional.

use std::path::{Path, PathBuf};

use boussinesq_core::bilinear::SampleBox;
use boussinesq_core::{GridSpec, LemmaSuiteConfig, Nonlinearity, PicardConfig, XsbParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub num_modes: usize,
    pub tau_max: f64,
    pub tau_points: usize,
    pub t_step: f64,
    pub t_final: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            num_modes: 16,
            tau_max: 32.0,
            tau_points: 257,
            t_step: 0.005,
            t_final: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub s: f64,
    pub b: f64,
    pub a: f64,
    /// Source exponent of the Duhamel probe.
    pub b_prime: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig { s: 0.0, b: 0.6, a: 0.3, b_prime: -0.3 }
    }
}

/// Initial data `(φ, ψ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataConfig {
    /// Trigonometric polynomials given as `[mode, amplitude]` pairs.
    Trig {
        #[serde(default)]
        phi_cos: Vec<(i64, f64)>,
        #[serde(default)]
        phi_sin: Vec<(i64, f64)>,
        #[serde(default)]
        psi_cos: Vec<(i64, f64)>,
        #[serde(default)]
        psi_sin: Vec<(i64, f64)>,
    },
    /// Uniform coefficients on `|k| ≤ band` scaled by `amplitude·⟨k⟩^{-decay}`, drawn from the run seed.
    Random { band: i64, amplitude: f64, decay: f64 },
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig::Trig {
            phi_cos: vec![(1, 0.1)],
            phi_sin: vec![],
            psi_cos: vec![],
            psi_sin: vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub sobolev_index: f64,
    pub nonlinearity: Nonlinearity,
    pub reference_dt: f64,
    /// Number of evenly spaced time nodes written to the snapshot table.
    pub snapshots: usize,
    pub deviation_tol: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_iters: 50,
            tol: 1e-13,
            sobolev_index: 0.0,
            nonlinearity: Nonlinearity::Quadratic,
            reference_dt: 0.001,
            snapshots: 5,
            deviation_tol: 1e-6,
        }
    }
}

impl SolveConfig {
    pub fn picard(&self) -> PicardConfig {
        PicardConfig {
            max_iters: self.max_iters,
            tol: self.tol,
            sobolev_index: self.sobolev_index,
            nonlinearity: self.nonlinearity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub n_values: Vec<i64>,
    pub t_values: Vec<f64>,
    pub random_fields: usize,
    pub random_band: i64,
    /// Bound on max/median of the random ratio samples.
    pub spread_tol: f64,
    /// Lower bound on the fitted log-slope of the Duhamel ratio in `T`.
    pub t_slope_tol: f64,
    pub linear_samples: usize,
    pub sup_box: SampleBox,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_values: vec![8, 16, 32, 64, 128],
            t_values: vec![1.0, 0.5, 0.25, 0.125],
            random_fields: 20,
            random_band: 6,
            spread_tol: 10.0,
            t_slope_tol: -0.05,
            linear_samples: 50,
            sup_box: SampleBox { modes: 32, tau: 128.0, sum: 128 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormsConfig {
    pub s_values: Vec<f64>,
    pub b_values: Vec<f64>,
    pub samples: usize,
    pub band: i64,
    pub decay: f64,
}

impl Default for NormsConfig {
    fn default() -> Self {
        NormsConfig {
            s_values: vec![0.0, 0.2],
            b_values: vec![0.6, -0.45, 0.3, 1.0],
            samples: 10,
            band: 6,
            decay: 0.3,
        }
    }
}

/// Not part of the config hash: changing where results go does not change them.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Record wall-clock time in the summary; off by default so replays stay byte-identical.
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub grid: GridConfig,
    pub params: ParamsConfig,
    pub data: DataConfig,
    pub solve: SolveConfig,
    pub sweep: SweepConfig,
    pub lemmas: LemmaSuiteConfig,
    pub norms: NormsConfig,
    pub output: OutputConfig,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub modes: Option<usize>,
    pub tau_max: Option<f64>,
    pub tau_points: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(m) = o.modes {
            self.grid.num_modes = m;
        }
        if let Some(t) = o.tau_max {
            self.grid.tau_max = t;
        }
        if let Some(p) = o.tau_points {
            self.grid.tau_points = p;
        }
        self.lemmas.seed = self.seed;
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        let g = &self.grid;
        Ok(GridSpec::new(g.num_modes)?
            .with_tau(g.tau_max, g.tau_points)?
            .with_time(g.t_step, g.t_final)?)
    }

    pub fn xsb_params(&self) -> XsbParams {
        XsbParams::new(self.params.s, self.params.b, self.params.a)
    }

    /// SHA-256 of the canonical JSON form of everything except the output table.
    pub fn hash(&self) -> String {
        let mut hashed = self.clone();
        hashed.output = OutputConfig::default();
        let bytes = serde_json::to_vec(&hashed).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn sections_parse() {
        let cfg = ExperimentConfig::from_toml(
            r#"
seed = 9
[grid]
num_modes = 32
[params]
s = -0.5
a = 0.45
[data]
family = "random"
band = 4
amplitude = 0.5
decay = 1.0
[lemmas]
quadratic_gammas = [0.4]
"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.grid.num_modes, 32);
        assert_eq!(cfg.grid.tau_points, 257);
        assert_eq!(cfg.params.b, 0.6);
        assert!(matches!(cfg.data, DataConfig::Random { band: 4, .. }));
        assert_eq!(cfg.lemmas.quadratic_gammas, vec![0.4]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("[grid]\nmodes = 4").is_err());
        assert!(ExperimentConfig::from_toml("[data]\nfamily = \"chebyshev\"").is_err());
    }

    #[test]
    fn hash_ignores_output_but_not_seed() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output.dir = Some("elsewhere".into());
        b.output.timing = true;
        assert_eq!(a.hash(), b.hash());
        b.apply(&Overrides { seed: Some(1), ..Default::default() });
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn overrides_reach_grid_and_lemma_seed() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply(&Overrides { seed: Some(5), modes: Some(8), tau_max: Some(16.0), tau_points: Some(129) });
        let g = cfg.grid().unwrap();
        assert_eq!((g.num_modes(), g.tau_points(), g.tau_max()), (8, 129, 16.0));
        assert_eq!(cfg.lemmas.seed, 5);
        cfg.grid.num_modes = 7;
        assert!(matches!(cfg.grid(), Err(CliError::Core(_))));
    }
}
