//! Discrete Fourier representation of periodic functions on the torus.
//!
//! A [`GridSpec`] fixes the Fourier lattice `n ∈ {-M..M}` (with `M = num_modes / 2`),
//! the physical grid `x_j = 2πj / num_modes`, a uniform symmetric `τ` grid used by
//! space-time fields, and the time step used by the solvers.
//!
//! Coefficients are normalized so that a constant function `c` has `coeffs(0) = c`,
//! i.e. `f(x) = Σ_n f̂(n) e^{inx}`. The physical grid has `2M` points, so the
//! Nyquist frequency `±M` is shared: the forward transform splits it evenly
//! between `+M` and `-M`, which keeps real data Hermitian-symmetric.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible spacing of the `τ` grid.
pub const MAX_TAU_SPACING: f64 = 0.25;

/// `⟨a⟩ = 1 + |a|`.
#[inline]
pub fn bracket(a: f64) -> f64 {
    1.0 + a.abs()
}

/// The Boussinesq dispersion symbol `γ(n) = √(n² + n⁴)`.
#[inline]
pub fn dispersion(n: i64) -> f64 {
    let m = n.unsigned_abs() as f64;
    m * (1.0 + m * m).sqrt()
}

/// `|n|⁴ / γ(n)² = n² / (1 + n²)`, the squared size of the bilinear multiplier.
#[inline]
pub fn multiplier_sq(n: i64) -> f64 {
    let m2 = (n as f64) * (n as f64);
    m2 / (1.0 + m2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    num_modes: usize,
    tau_points: usize,
    tau_max: f64,
    t_step: f64,
    t_final: f64,
}

impl GridSpec {
    /// Grid with `num_modes` physical points and default time/`τ` settings
    /// (`τ ∈ [-32, 32]` at spacing 0.25, `t_step = 0.01`, `t_final = 0.5`).
    pub fn new(num_modes: usize) -> Result<Self> {
        let grid = GridSpec {
            num_modes,
            tau_points: 257,
            tau_max: 32.0,
            t_step: 0.01,
            t_final: 0.5,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn with_tau(mut self, tau_max: f64, tau_points: usize) -> Result<Self> {
        self.tau_max = tau_max;
        self.tau_points = tau_points;
        self.validate()?;
        Ok(self)
    }

    /// Symmetric `τ` grid on `[-tau_max, tau_max]` with the given spacing.
    /// `tau_max` is rounded up to a whole number of steps.
    pub fn with_tau_spacing(self, tau_max: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("tau spacing must be positive, got {spacing}")));
        }
        let half = (tau_max / spacing - 1e-9).ceil().max(1.0) as usize;
        self.with_tau(half as f64 * spacing, 2 * half + 1)
    }

    pub fn with_time(mut self, t_step: f64, t_final: f64) -> Result<Self> {
        self.t_step = t_step;
        self.t_final = t_final;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.num_modes == 0 || !self.num_modes.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "num_modes must be a positive even integer, got {}",
                self.num_modes
            )));
        }
        if self.tau_points < 3 || self.tau_points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "tau_points must be odd and >= 3 so that tau = 0 is a node, got {}",
                self.tau_points
            )));
        }
        if !(self.tau_max > 0.0) || !self.tau_max.is_finite() {
            return Err(Error::InvalidGrid(format!("tau_max must be positive, got {}", self.tau_max)));
        }
        if self.tau_spacing() > MAX_TAU_SPACING + 1e-12 {
            return Err(Error::InvalidGrid(format!(
                "tau spacing {} exceeds {MAX_TAU_SPACING}",
                self.tau_spacing()
            )));
        }
        if !(self.t_step > 0.0) || !(self.t_final > 0.0) {
            return Err(Error::InvalidGrid("t_step and t_final must be positive".into()));
        }
        Ok(())
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    /// `M`: modes run over `-M..=M`.
    pub fn max_mode(&self) -> i64 {
        (self.num_modes / 2) as i64
    }

    /// Number of Fourier coefficients stored per field, `2M + 1`.
    pub fn mode_count(&self) -> usize {
        self.num_modes + 1
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> + Clone {
        let m = self.max_mode();
        -m..=m
    }

    #[inline]
    pub fn mode_index(&self, n: i64) -> Option<usize> {
        let m = self.max_mode();
        (n.abs() <= m).then(|| (n + m) as usize)
    }

    #[inline]
    pub fn mode_at(&self, index: usize) -> i64 {
        index as i64 - self.max_mode()
    }

    pub fn x_points(&self) -> Vec<f64> {
        let j = self.num_modes as f64;
        (0..self.num_modes).map(|k| 2.0 * PI * k as f64 / j).collect()
    }

    pub fn tau_points(&self) -> usize {
        self.tau_points
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn tau_spacing(&self) -> f64 {
        2.0 * self.tau_max / (self.tau_points - 1) as f64
    }

    /// Index of the `τ = 0` node.
    pub fn tau_center(&self) -> usize {
        (self.tau_points - 1) / 2
    }

    #[inline]
    pub fn tau(&self, j: usize) -> f64 {
        (j as f64 - self.tau_center() as f64) * self.tau_spacing()
    }

    /// Trapezoid weight of node `j`.
    #[inline]
    pub fn tau_weight(&self, j: usize) -> f64 {
        let h = self.tau_spacing();
        if j == 0 || j + 1 == self.tau_points {
            0.5 * h
        } else {
            h
        }
    }

    /// Nearest `τ` node, if `tau` lies within the grid.
    pub fn tau_index(&self, tau: f64) -> Option<usize> {
        let k = (tau / self.tau_spacing()).round() as i64 + self.tau_center() as i64;
        (0..self.tau_points as i64).contains(&k).then_some(k as usize)
    }

    pub fn t_step(&self) -> f64 {
        self.t_step
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }
}

/// Precomputed `γ(n)` over the lattice of a grid.
#[derive(Debug, Clone)]
pub struct DispersionSymbol {
    max_mode: i64,
    values: Vec<f64>,
}

impl DispersionSymbol {
    pub fn new(grid: &GridSpec) -> Self {
        DispersionSymbol {
            max_mode: grid.max_mode(),
            values: grid.modes().map(dispersion).collect(),
        }
    }

    #[inline]
    pub fn gamma(&self, n: i64) -> f64 {
        self.values[(n + self.max_mode) as usize]
    }
}

/// Fourier coefficients `f̂(n)` of a periodic function, `n ∈ {-M..M}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &GridSpec) -> Self {
        SpectralField {
            grid: *grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.mode_count()],
        }
    }

    pub fn from_coeffs(grid: &GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.mode_count() {
            return Err(Error::Shape(format!(
                "expected {} coefficients, got {}",
                grid.mode_count(),
                coeffs.len()
            )));
        }
        Ok(SpectralField { grid: *grid, coeffs })
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(i64) -> Complex64) -> Self {
        SpectralField {
            grid: *grid,
            coeffs: grid.modes().map(f).collect(),
        }
    }

    /// Real trigonometric polynomial `Σ a_k cos(kx) + Σ b_k sin(kx)`.
    pub fn trig(grid: &GridSpec, cos_terms: &[(i64, f64)], sin_terms: &[(i64, f64)]) -> Result<Self> {
        let mut field = SpectralField::zeros(grid);
        for &(k, a) in cos_terms {
            if k == 0 {
                field.add_at(0, Complex64::new(a, 0.0))?;
            } else {
                field.add_at(k, Complex64::new(0.5 * a, 0.0))?;
                field.add_at(-k, Complex64::new(0.5 * a, 0.0))?;
            }
        }
        for &(k, b) in sin_terms {
            if k != 0 {
                // sin(kx) = (e^{ikx} - e^{-ikx}) / 2i
                field.add_at(k, Complex64::new(0.0, -0.5 * b))?;
                field.add_at(-k, Complex64::new(0.0, 0.5 * b))?;
            }
        }
        Ok(field)
    }

    fn add_at(&mut self, n: i64, c: Complex64) -> Result<()> {
        let i = self
            .grid
            .mode_index(n)
            .ok_or_else(|| Error::Shape(format!("mode {n} outside lattice ±{}", self.grid.max_mode())))?;
        self.coeffs[i] += c;
        Ok(())
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `f̂(n)`, zero outside the lattice.
    #[inline]
    pub fn get(&self, n: i64) -> Complex64 {
        self.grid
            .mode_index(n)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn set(&mut self, n: i64, value: Complex64) -> Result<()> {
        let i = self
            .grid
            .mode_index(n)
            .ok_or_else(|| Error::Shape(format!("mode {n} outside lattice ±{}", self.grid.max_mode())))?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// Apply a mode-wise multiplier `f̂(n) ↦ m(n, f̂(n))`.
    pub fn map_modes(&self, m: impl Fn(i64, Complex64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| m(self.grid.mode_at(i), c))
            .collect();
        SpectralField { grid: self.grid, coeffs }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map_modes(|_, c| c * factor)
    }

    /// `f(-x)`, i.e. `f̂(n) ↦ f̂(-n)`.
    pub fn reflect(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        SpectralField { grid: self.grid, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == 0.0)
    }

    /// Hermitian symmetry `f̂(-n) = conj(f̂(n))` relative to the largest coefficient.
    pub fn is_real(&self, rel_tol: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        self.grid
            .modes()
            .all(|n| (self.get(-n) - self.get(n).conj()).norm() <= rel_tol * scale)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `Σ_n |f̂(n)|`, an upper bound for the sup norm in `x`.
    pub fn wiener_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// Maximum of `|f(x_j)|` over the physical grid.
    pub fn sup_norm(&self) -> f64 {
        inverse_transform(self).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Evaluate `Σ_n f̂(n) e^{inx}` at an arbitrary point.
    pub fn eval(&self, x: f64) -> Complex64 {
        self.grid
            .modes()
            .zip(&self.coeffs)
            .map(|(n, &c)| c * Complex64::from_polar(1.0, n as f64 * x))
            .sum()
    }

    /// Zero every mode with `|n| > cutoff`.
    pub fn truncate(&self, cutoff: i64) -> Self {
        self.map_modes(|n, c| if n.abs() > cutoff { Complex64::new(0.0, 0.0) } else { c })
    }

    /// Re-express on another lattice, padding with zeros or dropping modes.
    pub fn resample(&self, grid: &GridSpec) -> Self {
        SpectralField::from_fn(grid, |n| self.get(n))
    }

    fn check_same_grid(&self, other: &Self) {
        assert_eq!(
            self.grid.num_modes, other.grid.num_modes,
            "spectral fields live on different lattices"
        );
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;

    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.check_same_grid(rhs);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        SpectralField { grid: self.grid, coeffs }
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.check_same_grid(rhs);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        SpectralField { grid: self.grid, coeffs }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;

    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(rhs)
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Physical samples `f(x_j)`, `x_j = 2πj / num_modes`, to Fourier coefficients.
pub fn forward_transform(grid: &GridSpec, samples: &[Complex64]) -> Result<SpectralField> {
    let len = grid.num_modes;
    if samples.len() != len {
        return Err(Error::Shape(format!("expected {len} samples, got {}", samples.len())));
    }
    let mut buf = samples.to_vec();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len).process(&mut buf));
    let m = grid.max_mode();
    let scale = 1.0 / len as f64;
    let coeffs = grid
        .modes()
        .map(|n| {
            if n.abs() == m {
                buf[m as usize] * (0.5 * scale)
            } else {
                buf[n.rem_euclid(len as i64) as usize] * scale
            }
        })
        .collect();
    Ok(SpectralField { grid: *grid, coeffs })
}

/// Fourier coefficients to samples on the physical grid.
pub fn inverse_transform(field: &SpectralField) -> Vec<Complex64> {
    let grid = &field.grid;
    let len = grid.num_modes;
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for n in grid.modes() {
        buf[n.rem_euclid(len as i64) as usize] += field.get(n);
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len).process(&mut buf));
    buf
}

/// `‖f‖_{H^s} = (Σ_n ⟨n⟩^{2s} |f̂(n)|²)^{1/2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    f.grid
        .modes()
        .zip(&f.coeffs)
        .map(|(n, c)| bracket(n as f64).powf(2.0 * s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n).unwrap()
    }

    #[test]
    fn constant_maps_to_zero_mode() {
        let g = grid(16);
        let f = forward_transform(&g, &vec![Complex64::new(1.0, 0.0); 16]).unwrap();
        assert_relative_eq!(f.get(0).re, 1.0, epsilon = 1e-15);
        for n in g.modes().filter(|&n| n != 0) {
            assert!(f.get(n).norm() < 1e-15);
        }
    }

    #[test]
    fn cosine_maps_to_half_at_pm_one() {
        let g = grid(16);
        let samples: Vec<_> = g.x_points().iter().map(|x| Complex64::new(x.cos(), 0.0)).collect();
        let f = forward_transform(&g, &samples).unwrap();
        for n in g.modes() {
            let expect = if n.abs() == 1 { 0.5 } else { 0.0 };
            assert!((f.get(n) - Complex64::new(expect, 0.0)).norm() < 1e-15, "mode {n}");
        }
    }

    #[test]
    fn nyquist_mode_is_split() {
        let g = grid(8);
        let samples: Vec<_> = (0..8).map(|j| Complex64::new(if j % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
        let f = forward_transform(&g, &samples).unwrap();
        assert_relative_eq!(f.get(4).re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(f.get(-4).re, 0.5, epsilon = 1e-15);
        assert!(f.is_real(1e-12));
    }

    #[test]
    fn wrong_sample_count_is_shape_error() {
        let g = grid(16);
        let err = forward_transform(&g, &[Complex64::new(0.0, 0.0); 15]).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn round_trip_random() {
        let g = grid(64);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples: Vec<_> = (0..64)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let back = inverse_transform(&forward_transform(&g, &samples).unwrap());
        let scale = samples.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (a, b) in samples.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12 * scale);
        }
    }

    #[test]
    fn sobolev_norm_examples() {
        let g = grid(8);
        let one = SpectralField::from_fn(&g, |n| Complex64::new(if n == 0 { 1.0 } else { 0.0 }, 0.0));
        for s in [-2.0, -0.3, 0.0, 1.5] {
            assert_relative_eq!(sobolev_norm(&one, s), 1.0);
        }
        let pm1 = SpectralField::from_fn(&g, |n| Complex64::new(if n.abs() == 1 { 1.0 } else { 0.0 }, 0.0));
        assert_relative_eq!(sobolev_norm(&pm1, 1.0), 2.0 * 2f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(sobolev_norm(&pm1, 0.0), 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn dispersion_examples() {
        assert_eq!(dispersion(0), 0.0);
        assert_relative_eq!(dispersion(1), 2f64.sqrt(), epsilon = 1e-15);
        let g10 = dispersion(10);
        assert!((100.0..=100.5).contains(&g10));
        assert_eq!(dispersion(-7), dispersion(7));
    }

    #[test]
    fn dispersion_within_half_of_parabola_on_lattice() {
        let g = grid(2048);
        let table = DispersionSymbol::new(&g);
        for n in g.modes() {
            let gap = table.gamma(n) - (n * n) as f64;
            assert!((0.0..=0.5).contains(&gap), "n={n} gap={gap}");
            assert_eq!(table.gamma(n), dispersion(n));
        }
    }

    #[test]
    fn trig_builder_matches_samples() {
        let g = grid(16);
        let f = SpectralField::trig(&g, &[(0, 0.3), (2, 1.0)], &[(3, -0.7)]).unwrap();
        assert!(f.is_real(1e-14));
        for x in g.x_points() {
            let expect = 0.3 + (2.0 * x).cos() - 0.7 * (3.0 * x).sin();
            assert!((f.eval(x).re - expect).abs() < 1e-14);
            assert!(f.eval(x).im.abs() < 1e-14);
        }
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(15).is_err());
        assert!(GridSpec::new(0).is_err());
        let g = grid(8);
        assert!(g.with_tau(10.0, 41).is_err(), "spacing 0.5 > 0.25");
        assert!(g.with_tau(10.0, 80).is_err(), "even tau_points");
        let g = g.with_tau(10.0, 81).unwrap();
        assert_eq!(g.tau(g.tau_center()), 0.0);
        assert_relative_eq!(g.tau(0), -10.0);
        assert_relative_eq!(g.tau(80), 10.0);
        let g = g.with_tau_spacing(100.3, 0.25).unwrap();
        assert!(g.tau_max() >= 100.3 && g.tau_spacing() <= 0.25 + 1e-15);
    }
}
