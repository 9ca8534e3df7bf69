//! Seeded random test data: band-limited real fields and space-time bumps near
//! the characteristic parabolas.

use num_complex::Complex64;
use rand::Rng;

use crate::duhamel::{TimeCutoff, Trajectory};
use crate::error::Result;
use crate::spectral::{bracket, GridSpec, SpectralField};
use crate::xsb::SpaceTimeField;

/// Real field `Σ_{k ≤ band} a_k cos(kx) + b_k sin(kx)` with `a_k, b_k` uniform in `[-amp, amp]`.
pub fn random_real_field(grid: &GridSpec, band: i64, amp: f64, rng: &mut impl Rng) -> SpectralField {
    let band = band.min(grid.max_mode() - 1).max(0);
    let cos: Vec<_> = (0..=band).map(|k| (k, amp * rng.gen_range(-1.0..1.0))).collect();
    let sin: Vec<_> = (1..=band).map(|k| (k, amp * rng.gen_range(-1.0..1.0))).collect();
    SpectralField::trig(grid, &cos, &sin).expect("band below the Nyquist mode")
}

/// Same as [`random_real_field`] with the `n = 0` mode removed.
pub fn random_mean_free_field(grid: &GridSpec, band: i64, amp: f64, rng: &mut impl Rng) -> SpectralField {
    random_real_field(grid, band, amp, rng).map_modes(|n, c| if n == 0 { Complex64::new(0.0, 0.0) } else { c })
}

/// For each `|n| ≤ band`, a Gaussian bump in `τ` centered within one unit of
/// `±n²` with random width and phase, scaled by `⟨n⟩^{-decay}`.
pub fn random_spacetime_field(grid: &GridSpec, band: i64, decay: f64, rng: &mut impl Rng) -> SpaceTimeField {
    let mut field = SpaceTimeField::zeros(grid);
    let band = band.min(grid.max_mode());
    for n in -band..=band {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let center = sign * (n * n) as f64 + rng.gen_range(-1.0..1.0);
        let width = rng.gen_range(0.5..2.0);
        let amp = rng.gen_range(0.1..1.0) * bracket(n as f64).powf(-decay);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let lo = grid.tau_index((center - 4.0 * width).max(-grid.tau_max()));
        let hi = grid.tau_index((center + 4.0 * width).min(grid.tau_max()));
        let (Some(lo), Some(hi)) = (lo, hi) else { continue };
        let values = (lo..=hi)
            .map(|j| {
                let z = (grid.tau(j) - center) / width;
                Complex64::from_polar(amp * (-z * z).exp(), phase)
            })
            .collect();
        field.set_row(n, lo, values).expect("window inside the grid");
    }
    field
}

/// Source `g(t) = θ(t)(1 + cos(3t)/2)·base` sampled on `[-2, 2]` with the grid's
/// time step; it vanishes at both ends of the window.
pub fn windowed_source(base: &SpectralField) -> Result<Trajectory> {
    let grid = base.grid();
    let dt = grid.t_step();
    let len = (4.0 / dt).round() as usize + 1;
    Trajectory::from_fn(grid, -2.0, dt, len, |t| {
        base.scale(TimeCutoff::profile(t) * (1.0 + 0.5 * (3.0 * t).cos()))
    })
}
