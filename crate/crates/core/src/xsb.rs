//! Space-time fields and discretized `X_{s,b}` norms.
//!
//! A [`SpaceTimeField`] holds coefficients `F̃(n, τ_j)` on the mode lattice of a
//! [`GridSpec`] times its uniform `τ` grid. Each mode stores only a contiguous
//! window of `τ` nodes, so fields concentrated near the parabolas `τ = ±n²`
//! stay cheap even when the `τ` grid has hundreds of thousands of nodes.
//!
//! `τ` integrals use the trapezoid weights of the grid throughout.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::duhamel::{duhamel_of_source, TimeCutoff, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::{bracket, dispersion, sobolev_norm, GridSpec, SpectralField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Contiguous window of `τ` nodes `start..start + values.len()` for one mode.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TauRow {
    pub start: usize,
    pub values: Vec<Complex64>,
}

impl TauRow {
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end(&self) -> usize {
        self.start + self.values.len()
    }

    pub fn get(&self, j: usize) -> Complex64 {
        if j >= self.start && j < self.end() {
            self.values[j - self.start]
        } else {
            ZERO
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: GridSpec,
    rows: Vec<TauRow>,
}

impl SpaceTimeField {
    pub fn zeros(grid: &GridSpec) -> Self {
        SpaceTimeField {
            grid: *grid,
            rows: vec![TauRow::default(); grid.mode_count()],
        }
    }

    /// Dense field `F̃(n, τ_j) = f(n, τ_j)` on the whole lattice.
    pub fn from_fn(grid: &GridSpec, f: impl Fn(i64, f64) -> Complex64 + Sync) -> Self {
        let rows = grid
            .modes()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|n| TauRow {
                start: 0,
                values: (0..grid.tau_points()).map(|j| f(n, grid.tau(j))).collect(),
            })
            .collect();
        SpaceTimeField { grid: *grid, rows }
    }

    /// Field from one window per lattice mode, ordered from `-M` to `M`.
    pub fn from_rows(grid: &GridSpec, rows: Vec<TauRow>) -> Result<Self> {
        if rows.len() != grid.mode_count() {
            return Err(Error::Shape(format!("{} rows for {} modes", rows.len(), grid.mode_count())));
        }
        if let Some(r) = rows.iter().find(|r| r.end() > grid.tau_points()) {
            return Err(Error::Shape(format!("tau window ends at {} past {} nodes", r.end(), grid.tau_points())));
        }
        Ok(SpaceTimeField { grid: *grid, rows })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn set_row(&mut self, n: i64, start: usize, values: Vec<Complex64>) -> Result<()> {
        let i = self
            .grid
            .mode_index(n)
            .ok_or_else(|| Error::Shape(format!("mode {n} outside lattice ±{}", self.grid.max_mode())))?;
        if start + values.len() > self.grid.tau_points() {
            return Err(Error::Shape(format!(
                "tau window {start}..{} exceeds {} nodes",
                start + values.len(),
                self.grid.tau_points()
            )));
        }
        self.rows[i] = TauRow { start, values };
        Ok(())
    }

    /// The window stored for mode `n` (empty outside the lattice).
    pub fn row(&self, n: i64) -> Option<&TauRow> {
        self.grid.mode_index(n).map(|i| &self.rows[i])
    }

    pub fn rows(&self) -> impl Iterator<Item = (i64, &TauRow)> {
        self.rows.iter().enumerate().map(|(i, r)| (self.grid.mode_at(i), r))
    }

    pub fn get(&self, n: i64, j: usize) -> Complex64 {
        self.row(n).map_or(ZERO, |r| r.get(j))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.values.iter().all(|c| c.norm_sqr() == 0.0))
    }

    pub fn map(&self, f: impl Fn(i64, f64, Complex64) -> Complex64) -> Self {
        let rows = self
            .rows()
            .map(|(n, r)| TauRow {
                start: r.start,
                values: r
                    .values
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| f(n, self.grid.tau(r.start + k), c))
                    .collect(),
            })
            .collect();
        SpaceTimeField { grid: self.grid, rows }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|_, _, c| c * factor)
    }

    /// `(n, τ) ↦ (-n, -τ)`.
    pub fn reflect(&self) -> Self {
        let p = self.grid.tau_points();
        let mut rows: Vec<TauRow> = self
            .rows
            .iter()
            .map(|r| {
                if r.is_empty() {
                    return TauRow::default();
                }
                let mut values = r.values.clone();
                values.reverse();
                TauRow { start: p - r.end(), values }
            })
            .collect();
        rows.reverse();
        SpaceTimeField { grid: self.grid, rows }
    }

    /// `Σ_n ∫ |F̃(n, τ)|² dτ`.
    pub fn mass(&self) -> f64 {
        self.weighted_mass(|_, _| 1.0)
    }

    fn weighted_mass(&self, weight: impl Fn(i64, f64) -> f64 + Sync) -> f64 {
        self.rows
            .par_iter()
            .enumerate()
            .map(|(i, r)| {
                let n = self.grid.mode_at(i);
                r.values
                    .iter()
                    .enumerate()
                    .map(|(k, c)| {
                        let j = r.start + k;
                        self.grid.tau_weight(j) * weight(n, self.grid.tau(j)) * c.norm_sqr()
                    })
                    .sum::<f64>()
            })
            .collect::<Vec<_>>()
            // fixed summation order keeps results independent of the thread count
            .into_iter()
            .sum()
    }

    /// Share of the squared mass carried by nodes with `|τ|` in the top `fraction` of the range.
    pub fn tail_mass_fraction(&self, fraction: f64) -> f64 {
        let total = self.mass();
        if total == 0.0 {
            return 0.0;
        }
        let threshold = (1.0 - fraction) * self.grid.tau_max();
        self.weighted_mass(|_, tau| if tau.abs() > threshold { 1.0 } else { 0.0 }) / total
    }

    /// Resolution sanity check: the top 10% of `|τ|` carries less than 10% of the mass.
    pub fn is_tau_resolved(&self) -> bool {
        self.tail_mass_fraction(0.1) < 0.1
    }
}

/// Which modulation weight an `X_{s,b}` norm uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weight {
    /// `⟨|τ| - γ(n)⟩`.
    Boussinesq,
    /// `⟨|τ| - n²⟩`.
    Schrodinger,
}

impl Weight {
    #[inline]
    pub fn modulation(self, n: i64, tau: f64) -> f64 {
        let surface = match self {
            Weight::Boussinesq => dispersion(n),
            Weight::Schrodinger => (n as f64) * (n as f64),
        };
        bracket(tau.abs() - surface)
    }
}

/// `‖⟨|τ| - ω(n)⟩^b ⟨n⟩^s F̃‖_{ℓ²_n L²_τ}`.
pub fn xsb_norm(field: &SpaceTimeField, s: f64, b: f64, weight: Weight) -> f64 {
    field
        .weighted_mass(|n, tau| bracket(n as f64).powf(2.0 * s) * weight.modulation(n, tau).powf(2.0 * b))
        .sqrt()
}

/// Ratio of the Boussinesq-weighted norm to the Schrödinger-weighted norm.
pub fn norm_equivalence_ratio(field: &SpaceTimeField, s: f64, b: f64) -> Result<f64> {
    let den = xsb_norm(field, s, b, Weight::Schrodinger);
    if den == 0.0 {
        return Err(Error::UndefinedRatio("norm equivalence ratio of a zero field".into()));
    }
    Ok(xsb_norm(field, s, b, Weight::Boussinesq) / den)
}

/// Exponent triple of the bilinear estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XsbParams {
    pub s: f64,
    pub b: f64,
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Admissibility {
    /// `s ≥ 0`, `b > 1/2`, `1/4 < a < 1/2`.
    CaseI,
    /// `-1/4 < s < 0`, `b > 1/2`, `1/4 < a < 1/2`, `|s| < a/2`.
    CaseII,
    Inadmissible,
}

impl XsbParams {
    pub fn new(s: f64, b: f64, a: f64) -> Self {
        XsbParams { s, b, a }
    }

    pub fn classify(&self) -> Admissibility {
        let base = self.b > 0.5 && self.a > 0.25 && self.a < 0.5;
        if base && self.s >= 0.0 {
            Admissibility::CaseI
        } else if base && self.s > -0.25 && self.s < 0.0 && self.s.abs() < self.a / 2.0 {
            Admissibility::CaseII
        } else {
            Admissibility::Inadmissible
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.classify() != Admissibility::Inadmissible
    }
}

/// Trapezoid weights of the trajectory nodes.
fn time_weights(traj: &Trajectory) -> Vec<f64> {
    let len = traj.len();
    (0..len)
        .map(|k| if len > 1 && (k == 0 || k + 1 == len) { 0.5 * traj.dt() } else { traj.dt() })
        .collect()
}

/// `(2π)^{-1/2} ∫ e^{-itτ} w(t) û(n, t) dt` on the `τ` grid of the trajectory's lattice.
fn weighted_time_transform(traj: &Trajectory, window: impl Fn(f64) -> f64) -> SpaceTimeField {
    let grid = *traj.grid();
    let norm = 1.0 / (2.0 * PI).sqrt();
    let weights = time_weights(traj);
    // columns of pre-weighted coefficients for nodes where the window is active
    let active: Vec<(f64, Vec<Complex64>)> = (0..traj.len())
        .filter_map(|k| {
            let t = traj.time(k);
            let w = window(t) * weights[k] * norm;
            (w != 0.0).then(|| (t, traj.state(k).coeffs().iter().map(|c| c * w).collect()))
        })
        .collect();
    let modes = grid.mode_count();
    let columns: Vec<Vec<Complex64>> = (0..grid.tau_points())
        .into_par_iter()
        .map(|j| {
            let tau = grid.tau(j);
            let mut acc = vec![ZERO; modes];
            for (t, coeffs) in &active {
                let phase = Complex64::from_polar(1.0, -t * tau);
                for (a, c) in acc.iter_mut().zip(coeffs) {
                    *a += phase * c;
                }
            }
            acc
        })
        .collect();
    let rows = (0..modes)
        .map(|i| TauRow {
            start: 0,
            values: columns.iter().map(|col| col[i]).collect(),
        })
        .collect();
    SpaceTimeField { grid, rows }
}

fn check_time_resolution(traj: &Trajectory, support_radius: f64) -> Result<()> {
    let grid = traj.grid();
    let h = grid.tau_spacing();
    // trapezoid in τ is exact for |F̃|² when the time support has length < 2π/h
    if h * 2.0 * support_radius >= 2.0 * PI {
        return Err(Error::resolution(
            format!("tau spacing {h} too coarse for a time support of radius {support_radius}"),
            grid.tau_max(),
            grid.num_modes(),
        ));
    }
    if grid.tau_max() > PI / traj.dt() {
        return Err(Error::resolution(
            format!(
                "tau range {} exceeds the Nyquist frequency {} of the time step {}",
                grid.tau_max(),
                PI / traj.dt(),
                traj.dt()
            ),
            PI / traj.dt(),
            grid.num_modes(),
        ));
    }
    Ok(())
}

/// Multiply by the cutoff in `t` and Fourier transform `t → τ` onto the `τ` grid.
/// The trajectory must cover the cutoff support `[-2T, 2T]`.
pub fn time_space_transform(traj: &Trajectory, cutoff: &TimeCutoff) -> Result<SpaceTimeField> {
    let radius = cutoff.support_radius();
    let slack = 1e-9 * traj.dt();
    if traj.t0() > -radius + slack || traj.t_end() < radius - slack {
        return Err(Error::Domain(format!(
            "trajectory [{}, {}] does not cover the cutoff support [-{radius}, {radius}]",
            traj.t0(),
            traj.t_end()
        )));
    }
    check_time_resolution(traj, radius)?;
    Ok(weighted_time_transform(traj, |t| cutoff.eval(t)))
}

/// `Σ_n ∫ |θ(t) û(n, t)|² dt` with the same trapezoid weights the transform uses.
pub fn windowed_mass(traj: &Trajectory, cutoff: &TimeCutoff) -> f64 {
    time_weights(traj)
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let theta = cutoff.eval(traj.time(k));
            w * theta * theta * traj.state(k).coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>()
        })
        .sum()
}

/// `‖θ u‖_{X_{s,b}} / (‖φ‖_{H^s} + ‖ψ‖_{H^{s-1}})` for the linear solution `u`.
/// Time nodes use the grid's `t_step` over the support of `θ`.
pub fn linear_estimate_probe(phi: &SpectralField, psi: &SpectralField, s: f64, b: f64) -> Result<f64> {
    if !(b > 0.5) {
        return Err(Error::Domain(format!("linear estimate probe needs b > 1/2, got {b}")));
    }
    let den = sobolev_norm(phi, s) + sobolev_norm(psi, s - 1.0);
    if den == 0.0 {
        return Err(Error::UndefinedRatio("zero initial data".into()));
    }
    let cutoff = TimeCutoff::unit();
    let traj = Trajectory::linear_window(phi, psi, cutoff.support_radius(), phi.grid().t_step())?;
    let field = time_space_transform(&traj, &cutoff)?;
    Ok(xsb_norm(&field, s, b, Weight::Boussinesq) / den)
}

/// `‖θ_T ∫₀^t V_s(t-t') g dt'‖_{X_{s,b}} / (T^{1-(b-b')} ‖(g̃/2iγ)^∼⁻¹‖_{X_{s,b'}})`.
///
/// The source must have no `n = 0` component, contain `t = 0` as a node and cover
/// `[-2T, 2T]`; it should vanish at the ends of its window, since its transform
/// is taken over the whole window.
pub fn duhamel_estimate_probe(source: &Trajectory, s: f64, b: f64, b_prime: f64, t_scale: f64) -> Result<f64> {
    if !(-0.5 < b_prime && b_prime <= 0.0 && 0.0 <= b && b <= b_prime + 1.0) {
        return Err(Error::Domain(format!(
            "need -1/2 < b' <= 0 <= b <= b' + 1, got b = {b}, b' = {b_prime}"
        )));
    }
    if !(t_scale > 0.0 && t_scale <= 1.0) {
        return Err(Error::Domain(format!("need 0 < T <= 1, got {t_scale}")));
    }
    let scale = source.states().iter().map(SpectralField::max_abs).fold(0.0, f64::max);
    if source.states().iter().any(|g| g.get(0).norm() > 1e-14 * scale) {
        return Err(Error::Domain("source has a nonzero n = 0 component, where γ(0) = 0".into()));
    }
    let cutoff = TimeCutoff::scaled(t_scale)?;
    let radius = cutoff.support_radius();
    if source.t0() > -radius || source.t_end() < radius {
        return Err(Error::Domain(format!(
            "source [{}, {}] does not cover [-{radius}, {radius}]",
            source.t0(),
            source.t_end()
        )));
    }
    check_time_resolution(source, source.t_end().max(-source.t0()))?;

    let rhs_field = weighted_time_transform(source, |_| 1.0).map(|n, _, c| {
        if n == 0 {
            ZERO
        } else {
            c / Complex64::new(0.0, 2.0 * dispersion(n))
        }
    });
    let rhs = xsb_norm(&rhs_field, s, b_prime, Weight::Boussinesq);

    let dt = source.dt();
    let lo = ((-radius - source.t0()) / dt - 1e-9).floor().max(0.0) as usize;
    let hi = (((radius - source.t0()) / dt + 1e-9).ceil() as usize).min(source.len() - 1);
    let states = (lo..=hi)
        .into_par_iter()
        .map(|k| duhamel_of_source(source, source.time(k)))
        .collect::<Result<Vec<_>>>()?;
    let integral = Trajectory::new(source.grid(), source.time(lo), dt, states)?;
    let lhs = xsb_norm(&weighted_time_transform(&integral, |t| cutoff.eval(t)), s, b, Weight::Boussinesq);

    if lhs == 0.0 {
        return Ok(0.0);
    }
    if rhs == 0.0 {
        return Err(Error::UndefinedRatio("right-hand side vanishes for a nonzero integral".into()));
    }
    Ok(lhs / (t_scale.powf(1.0 - (b - b_prime)) * rhs))
}
