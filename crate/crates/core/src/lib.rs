//! Numerical toolkit for the periodic "good" Boussinesq equation
//! `u_tt - u_xx + u_xxxx + (u²)_xx = 0`: spectral fields, the linear group,
//! Picard and time-stepping solvers, discretized `X_{s,b}` norms, bilinear
//! estimate probes and checks of the supporting calculus lemmas.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bilinear;
pub mod duhamel;
pub mod error;
pub mod families;
pub mod fit;
pub mod lemmas;
pub mod propagators;
pub mod quadrature;
pub mod spectral;
pub mod xsb;

pub use bilinear::{
    algebraic_relation, algebraic_relation_exact, bilinear_operator, counterexample_grid, counterexample_pair,
    estimate_ratio, k2_tilde_divergence, random_ratio_sweep, region_classify, sharpness_sweep, sup_estimator, Case,
    CounterexamplePair, ProbeReport, Region, RegionLabel, SampleBox, SupEstimate, SupKind, Verdict,
};
pub use duhamel::{
    picard_solve, reference_timestep, Nonlinearity, PicardConfig, PicardHistory, TimeCutoff, Trajectory,
};
pub use error::{Error, Result};
pub use lemmas::{
    calculus_bound, exponent_functions, progression_sum, quadratic_sum, verify_all, weight_equivalence, LemmaId,
    LemmaReport, LemmaSuiteConfig,
};
pub use propagators::{apply_vc, apply_vs_dx, linear_residual, linear_solution, LinearSolution};
pub use spectral::{bracket, dispersion, sobolev_norm, DispersionSymbol, GridSpec, SpectralField};
pub use xsb::{
    duhamel_estimate_probe, linear_estimate_probe, norm_equivalence_ratio, time_space_transform, xsb_norm,
    Admissibility, SpaceTimeField, Weight, XsbParams,
};
