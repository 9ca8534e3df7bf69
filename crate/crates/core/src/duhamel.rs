//! Nonlinear solver for `u_tt - u_xx + u_xxxx + (u²)_xx = 0`.
//!
//! In Fourier variables the equation reads `û_tt = -γ(n)² û + n² (u²)^(n)`.
//! [`picard_solve`] iterates the Duhamel map
//! `u ↦ u_lin + ∫₀^t sin((t-t')γ)/γ · n²(u²)^(t') dt'` on the stored time nodes;
//! [`reference_timestep`] integrates the same system with an integrating-factor
//! Runge-Kutta scheme and serves as an independent check.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagators::{linear_solution, propagate, sinc_kernel};
use crate::spectral::{dispersion, forward_transform, inverse_transform, sobolev_norm, GridSpec, SpectralField};

/// Smooth plateau cutoff `θ_T(t) = θ(t/T)`: `θ ≡ 1` on `[-1, 1]`, `θ = 0` outside `[-2, 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeCutoff {
    scale: f64,
}

fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

impl TimeCutoff {
    /// The unscaled cutoff `θ`.
    pub fn unit() -> Self {
        TimeCutoff { scale: 1.0 }
    }

    pub fn scaled(t: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::Domain(format!("cutoff scale T must lie in (0, 1], got {t}")));
        }
        Ok(TimeCutoff { scale: t })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `θ(t)` for the unscaled profile.
    pub fn profile(t: f64) -> f64 {
        smooth_step(2.0 - t.abs())
    }

    pub fn eval(&self, t: f64) -> f64 {
        Self::profile(t / self.scale)
    }

    /// Radius of the support, `2T`.
    pub fn support_radius(&self) -> f64 {
        2.0 * self.scale
    }
}

/// States `u(t_k)` on uniform time nodes `t_k = t0 + k·dt`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: GridSpec,
    t0: f64,
    dt: f64,
    states: Vec<SpectralField>,
}

impl Trajectory {
    pub fn new(grid: &GridSpec, t0: f64, dt: f64, states: Vec<SpectralField>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        if states.is_empty() {
            return Err(Error::Shape("trajectory needs at least one state".into()));
        }
        if states.iter().any(|s| s.grid().num_modes() != grid.num_modes()) {
            return Err(Error::Shape("trajectory states live on different lattices".into()));
        }
        Ok(Trajectory { grid: *grid, t0, dt, states })
    }

    /// Sample `f(t)` at `t0 + k·dt`, `k = 0..len`.
    pub fn from_fn(grid: &GridSpec, t0: f64, dt: f64, len: usize, f: impl Fn(f64) -> SpectralField + Sync) -> Result<Self> {
        let states = (0..len).into_par_iter().map(|k| f(t0 + k as f64 * dt)).collect();
        Trajectory::new(grid, t0, dt, states)
    }

    /// Linear solution sampled on the symmetric window `[-radius, radius]`.
    pub fn linear_window(phi: &SpectralField, psi: &SpectralField, radius: f64, dt: f64) -> Result<Self> {
        let half = (radius / dt - 1e-9).ceil() as usize;
        Trajectory::from_fn(phi.grid(), -(half as f64) * dt, dt, 2 * half + 1, |t| linear_solution(phi, psi, t))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn states(&self) -> &[SpectralField] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &SpectralField {
        &self.states[k]
    }

    /// Index of the node at time `t`, if `t` is a node.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        let k = ((t - self.t0) / self.dt).round();
        if k < 0.0 || k as usize >= self.len() {
            return None;
        }
        ((self.time(k as usize) - t).abs() <= 1e-9 * self.dt.max(1.0)).then_some(k as usize)
    }

    pub fn at(&self, t: f64) -> Option<&SpectralField> {
        self.node_index(t).map(|k| &self.states[k])
    }

    pub fn map_states(&self, f: impl Fn(f64, &SpectralField) -> SpectralField + Sync) -> Self {
        let states = self
            .states
            .par_iter()
            .enumerate()
            .map(|(k, s)| f(self.time(k), s))
            .collect();
        Trajectory { grid: self.grid, t0: self.t0, dt: self.dt, states }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map_states(|_, s| s.scale(factor))
    }

    pub fn is_real(&self, rel_tol: f64) -> bool {
        self.states.iter().all(|s| s.is_real(rel_tol))
    }

    /// `max_k ‖u(t_k) - v(t_k)‖_{H^s}` over nodes shared by both trajectories.
    pub fn sup_distance(&self, other: &Trajectory, s: f64) -> f64 {
        (0..self.len())
            .filter_map(|k| other.at(self.time(k)).map(|o| sobolev_norm(&(&self.states[k] - o), s)))
            .fold(0.0, f64::max)
    }

    /// `max_k sup_x |u(t_k) - v(t_k)|` over shared nodes.
    pub fn sup_norm_distance(&self, other: &Trajectory) -> f64 {
        (0..self.len())
            .filter_map(|k| other.at(self.time(k)).map(|o| (&self.states[k] - o).sup_norm()))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    /// `f(u) = u²`.
    #[default]
    Quadratic,
    /// Nonlinear term switched off.
    Off,
}

/// Largest mode kept by the 2/3 rule: `3|n| < 2M`.
pub fn dealias_cutoff(grid: &GridSpec) -> i64 {
    (2 * grid.max_mode() - 1) / 3
}

/// Fourier coefficients of `u²`, dealiased by the 2/3 rule before and after squaring.
pub fn nonlinearity(u: &SpectralField) -> SpectralField {
    let grid = u.grid();
    let cutoff = dealias_cutoff(grid);
    let samples: Vec<Complex64> = inverse_transform(&u.truncate(cutoff)).iter().map(|z| z * z).collect();
    forward_transform(grid, &samples)
        .expect("sample count matches grid")
        .truncate(cutoff)
}

/// `n² (u²)^(n)`: the Fourier forcing of `-(u²)_xx`.
pub fn forcing(u: &SpectralField, kind: Nonlinearity) -> SpectralField {
    match kind {
        Nonlinearity::Quadratic => nonlinearity(u).map_modes(|n, c| c * (n * n) as f64),
        Nonlinearity::Off => SpectralField::zeros(u.grid()),
    }
}

/// `∫₀^{t_j} sin((t_j - t')γ)/γ · F(t') dt'` by the composite trapezoid rule on the
/// nodes of `source`. Negative `t_j` integrate backwards. Mode 0 uses the
/// kernel `t_j - t'`.
fn kernel_integral(source: &Trajectory, zero: usize, j: usize) -> SpectralField {
    let grid = source.grid();
    let dt = source.dt();
    let tj = source.time(j);
    let (lo, hi, sign) = if j >= zero { (zero, j, 1.0) } else { (j, zero, -1.0) };
    if lo == hi {
        return SpectralField::zeros(grid);
    }
    let coeffs: Vec<Complex64> = grid
        .modes()
        .map(|n| {
            let g = dispersion(n);
            let mut acc = Complex64::new(0.0, 0.0);
            for i in lo..=hi {
                let w = if i == lo || i == hi { 0.5 * dt } else { dt };
                acc += source.state(i).get(n) * (w * sinc_kernel(g, tj - source.time(i)));
            }
            acc * sign
        })
        .collect();
    SpectralField::from_coeffs(grid, coeffs).expect("coefficient count matches grid")
}

/// `∫₀^t V_s(t - t') g(t') dt'` for a source `g` sampled on a trajectory whose
/// nodes include `0` and `t`.
pub fn duhamel_of_source(source: &Trajectory, t: f64) -> Result<SpectralField> {
    let zero = source
        .node_index(0.0)
        .ok_or_else(|| Error::Domain("source trajectory must contain t = 0 as a node".into()))?;
    let j = source.node_index(t).ok_or_else(|| {
        Error::Domain(format!(
            "t = {t} is not a node of the source trajectory [{}, {}]",
            source.t0(),
            source.t_end()
        ))
    })?;
    Ok(kernel_integral(source, zero, j))
}

/// The nonlinear Duhamel term at node `t` for the trajectory `u`:
/// `∫₀^t sin((t-t')γ)/γ · n²(u²)^(t') dt'`.
pub fn duhamel_integral(u: &Trajectory, t: f64) -> Result<SpectralField> {
    if u.node_index(t).is_none() {
        return Err(Error::Domain(format!(
            "t = {t} outside trajectory range [{}, {}] or not a node",
            u.t0(),
            u.t_end()
        )));
    }
    let forced = u.map_states(|_, s| forcing(s, Nonlinearity::Quadratic));
    duhamel_of_source(&forced, t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    pub max_iters: usize,
    pub tol: f64,
    /// Sobolev index of the sup-in-time distance used for the stopping rule.
    pub sobolev_index: f64,
    pub nonlinearity: Nonlinearity,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            max_iters: 50,
            tol: 1e-13,
            sobolev_index: 0.0,
            nonlinearity: Nonlinearity::Quadratic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PicardHistory {
    /// `sup_t ‖u^{k+1} - u^k‖_{H^s}` for each iteration.
    pub increments: Vec<f64>,
    pub converged: bool,
}

impl PicardHistory {
    pub fn iterations(&self) -> usize {
        self.increments.len()
    }

    pub fn last_increment(&self) -> f64 {
        self.increments.last().copied().unwrap_or(f64::NAN)
    }

    /// Ratios of successive increments (zero increments give ratio 0).
    pub fn contraction_factors(&self) -> Vec<f64> {
        self.increments
            .windows(2)
            .map(|w| if w[0] == 0.0 { 0.0 } else { w[1] / w[0] })
            .collect()
    }
}

fn node_count(t_final: f64, dt: f64) -> Result<usize> {
    let steps = (t_final / dt).round();
    if steps < 1.0 || (steps * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
        return Err(Error::Domain(format!("time step {dt} does not divide T = {t_final}")));
    }
    Ok(steps as usize + 1)
}

/// Picard iteration of the Duhamel equation on `[0, t_final]` with the grid's time step.
pub fn picard_solve(
    phi: &SpectralField,
    psi: &SpectralField,
    t_final: f64,
    config: &PicardConfig,
) -> Result<(Trajectory, PicardHistory)> {
    if !(t_final > 0.0 && t_final < 1.0) {
        return Err(Error::Domain(format!("T must lie in (0, 1), got {t_final}")));
    }
    if !(config.tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {}", config.tol)));
    }
    let grid = *phi.grid();
    let dt = grid.t_step();
    let nodes = node_count(t_final, dt)?;
    let linear = Trajectory::from_fn(&grid, 0.0, dt, nodes, |t| linear_solution(phi, psi, t))?;

    let mut history = PicardHistory::default();
    let mut current = linear.clone();
    for _ in 0..config.max_iters {
        let forced = current.map_states(|_, s| forcing(s, config.nonlinearity));
        let states: Vec<SpectralField> = (0..nodes)
            .into_par_iter()
            .map(|j| &linear.states[j] + &kernel_integral(&forced, 0, j))
            .collect();
        let next = Trajectory::new(&grid, 0.0, dt, states)?;
        let increment = next.sup_distance(&current, config.sobolev_index);
        history.increments.push(increment);
        current = next;
        if !increment.is_finite() {
            return Err(Error::NonConvergence(history));
        }
        if increment < config.tol {
            history.converged = true;
            return Ok((current, history));
        }
    }
    Err(Error::NonConvergence(history))
}

#[derive(Clone)]
struct State {
    u: SpectralField,
    v: SpectralField,
}

impl State {
    fn flow(&self, h: f64) -> State {
        let (u, v) = propagate(&self.u, &self.v, h);
        State { u, v }
    }

    fn axpy(&self, h: f64, k: &SpectralField) -> State {
        State { u: self.u.clone(), v: &self.v + &k.scale(h) }
    }
}

/// Integrating-factor RK4 (Lawson) for `(û, û_t)`: the linear part is advanced by
/// exact rotation, the forcing `n²(u²)^` by the classical four-stage rule.
pub fn reference_timestep(
    phi: &SpectralField,
    psi: &SpectralField,
    t_final: f64,
    dt: f64,
    kind: Nonlinearity,
) -> Result<Trajectory> {
    let grid = *phi.grid();
    let nodes = node_count(t_final, dt)?;
    let zero_vec = SpectralField::zeros(&grid);
    let mut y = State {
        u: phi.clone(),
        v: psi.map_modes(|n, c| c * Complex64::new(0.0, n as f64)),
    };
    let mut states = Vec::with_capacity(nodes);
    states.push(y.u.clone());
    let h = dt;
    let f = |s: &State| forcing(&s.u, kind);
    let lift = |k: &SpectralField| State { u: zero_vec.clone(), v: k.clone() };
    for _ in 1..nodes {
        let k1 = f(&y);
        let a = y.axpy(0.5 * h, &k1).flow(0.5 * h);
        let k2 = f(&a);
        let b = y.flow(0.5 * h).axpy(0.5 * h, &k2);
        let k3 = f(&b);
        let k3_half = lift(&k3).flow(0.5 * h);
        let c = {
            let base = y.flow(h);
            State {
                u: &base.u + &k3_half.u.scale(h),
                v: &base.v + &k3_half.v.scale(h),
            }
        };
        let k4 = f(&c);

        let k1_full = lift(&k1).flow(h);
        let mid = lift(&(&k2 + &k3)).flow(0.5 * h);
        let base = y.flow(h);
        let w = h / 6.0;
        y = State {
            u: &(&base.u + &k1_full.u.scale(w)) + &mid.u.scale(2.0 * w),
            v: &(&(&base.v + &k1_full.v.scale(w)) + &mid.v.scale(2.0 * w)) + &k4.scale(w),
        };
        states.push(y.u.clone());
    }
    Trajectory::new(&grid, 0.0, dt, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(modes: usize, dt: f64) -> GridSpec {
        GridSpec::new(modes).unwrap().with_time(dt, 0.5).unwrap()
    }

    #[test]
    fn cutoff_constraints() {
        let c = TimeCutoff::unit();
        for k in -400..=400 {
            let t = k as f64 * 0.01;
            let v = c.eval(t);
            assert!((0.0..=1.0).contains(&v));
            if t.abs() <= 1.0 {
                assert_eq!(v, 1.0);
            }
            if t.abs() >= 2.0 {
                assert_eq!(v, 0.0);
            }
            assert_eq!(v, c.eval(-t));
        }
        let ct = TimeCutoff::scaled(0.25).unwrap();
        assert_eq!(ct.eval(0.3), TimeCutoff::profile(1.2));
        assert!(TimeCutoff::scaled(0.0).is_err());
        assert!(TimeCutoff::scaled(1.5).is_err());
    }

    #[test]
    fn nonlinearity_examples() {
        let g = grid(16, 0.01);
        assert!(nonlinearity(&SpectralField::zeros(&g)).is_zero());
        let c = SpectralField::trig(&g, &[(0, 1.7)], &[]).unwrap();
        let sq = nonlinearity(&c);
        assert_relative_eq!(sq.get(0).re, 1.7 * 1.7, epsilon = 1e-14);
        let cos = SpectralField::trig(&g, &[(1, 1.0)], &[]).unwrap();
        let sq = nonlinearity(&cos);
        for n in g.modes() {
            let expect = match n.abs() {
                0 => 0.5,
                2 => 0.25,
                _ => 0.0,
            };
            assert!((sq.get(n) - Complex64::new(expect, 0.0)).norm() < 1e-15, "mode {n}");
        }
    }

    #[test]
    fn dealiasing_removes_high_modes() {
        let g = grid(12, 0.01); // M = 6, keep |n| <= 3
        assert_eq!(dealias_cutoff(&g), 3);
        let u = SpectralField::trig(&g, &[(3, 1.0), (5, 1.0)], &[]).unwrap();
        let sq = nonlinearity(&u);
        // only (cos 3x)^2 = 1/2 + cos(6x)/2 survives the input filter; 6 is filtered out
        assert_relative_eq!(sq.get(0).re, 0.5, epsilon = 1e-14);
        for n in g.modes().filter(|&n| n != 0) {
            assert!(sq.get(n).norm() < 1e-14, "mode {n}");
        }
    }

    #[test]
    fn duhamel_trivial_cases() {
        let g = grid(16, 0.01);
        let zero = Trajectory::from_fn(&g, 0.0, 0.01, 11, |_| SpectralField::zeros(&g)).unwrap();
        for k in 0..11 {
            assert!(duhamel_integral(&zero, k as f64 * 0.01).unwrap().is_zero());
        }
        let cos = SpectralField::trig(&g, &[(1, 1.0)], &[]).unwrap();
        let frozen = Trajectory::from_fn(&g, 0.0, 0.01, 11, |_| cos.clone()).unwrap();
        assert!(duhamel_integral(&frozen, 0.0).unwrap().is_zero());
        assert!(matches!(duhamel_integral(&frozen, 0.2), Err(Error::Domain(_))));
        assert!(matches!(duhamel_integral(&frozen, -0.01), Err(Error::Domain(_))));
    }

    /// Simpson's rule on a fine grid, independent of the trapezoid path.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
        let h = (b - a) / intervals as f64;
        let mut acc = f(a) + f(b);
        for i in 1..intervals {
            acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    #[test]
    fn duhamel_frozen_cosine_matches_scalar_oracle() {
        let g = grid(16, 0.001);
        let cos = SpectralField::trig(&g, &[(1, 1.0)], &[]).unwrap();
        let frozen = Trajectory::from_fn(&g, 0.0, 0.001, 101, |_| cos.clone()).unwrap();
        let value = duhamel_integral(&frozen, 0.1).unwrap().get(2);
        let g2 = dispersion(2);
        let oracle = (4.0 / g2) * simpson(|tp| ((0.1 - tp) * g2).sin() * 0.25, 0.0, 0.1, 2000);
        // composite trapezoid: relative error <= dt² γ² / 12 ≈ 1.7e-6
        assert!((value.re - oracle).abs() < 2e-6 * oracle.abs(), "{} vs {oracle}", value.re);
        assert!(value.im.abs() < 1e-16);
    }

    #[test]
    fn zero_data_converges_immediately() {
        let g = grid(16, 0.01);
        let z = SpectralField::zeros(&g);
        let (traj, hist) = picard_solve(&z, &z, 0.1, &PicardConfig::default()).unwrap();
        assert_eq!(hist.iterations(), 1);
        assert!(hist.converged);
        assert!(traj.states().iter().all(SpectralField::is_zero));
    }

    #[test]
    fn linear_mode_reproduces_linear_solution() {
        let g = grid(16, 0.01);
        let phi = SpectralField::trig(&g, &[(1, 0.4), (3, 0.2)], &[(2, 0.1)]).unwrap();
        let psi = SpectralField::trig(&g, &[(2, 0.3)], &[(1, -0.2)]).unwrap();
        let cfg = PicardConfig { nonlinearity: Nonlinearity::Off, ..PicardConfig::default() };
        let (traj, _) = picard_solve(&phi, &psi, 0.2, &cfg).unwrap();
        for (k, s) in traj.states().iter().enumerate() {
            let exact = linear_solution(&phi, &psi, traj.time(k));
            assert!((s - &exact).max_abs() < 1e-12);
        }
        let stepped = reference_timestep(&phi, &psi, 0.2, 0.01, Nonlinearity::Off).unwrap();
        for (k, s) in stepped.states().iter().enumerate() {
            let exact = linear_solution(&phi, &psi, stepped.time(k));
            assert!((s - &exact).max_abs() < 1e-10);
        }
    }

    #[test]
    fn picard_agrees_with_reference_and_contracts() {
        let g = grid(16, 0.005);
        let phi = SpectralField::trig(&g, &[(1, 0.1)], &[]).unwrap();
        let psi = SpectralField::zeros(&g);
        let (traj, hist) = picard_solve(&phi, &psi, 0.1, &PicardConfig::default()).unwrap();
        let factors = hist.contraction_factors();
        assert!(factors.iter().all(|&r| r < 1.0), "{factors:?}");
        assert!(hist.increments.windows(2).all(|w| w[1] < w[0]));
        let reference = reference_timestep(&phi, &psi, 0.1, 0.001, Nonlinearity::Quadratic).unwrap();
        let dev = traj.sup_norm_distance(&reference);
        assert!(dev < 1e-6, "deviation {dev}");
        assert!(traj.is_real(1e-12));
    }

    #[test]
    fn reference_self_convergence() {
        let g = grid(16, 0.01);
        let phi = SpectralField::trig(&g, &[(1, 0.1)], &[]).unwrap();
        let psi = SpectralField::zeros(&g);
        let run = |dt| reference_timestep(&phi, &psi, 0.5, dt, Nonlinearity::Quadratic).unwrap();
        let (a, b, c) = (run(0.05), run(0.025), run(0.0125));
        let e1 = a.sup_norm_distance(&b);
        let e2 = b.sup_norm_distance(&c);
        let order = (e1 / e2).log2();
        assert!(order >= 2.0, "observed order {order} ({e1:e}, {e2:e})");
        let z = SpectralField::zeros(&g);
        let zero = reference_timestep(&z, &z, 0.1, 0.01, Nonlinearity::Quadratic).unwrap();
        assert!(zero.states().iter().all(SpectralField::is_zero));
    }

    #[test]
    fn spectral_resolution_invariance() {
        let coarse = grid(24, 0.01);
        let fine = grid(48, 0.01);
        let solve = |g: &GridSpec| {
            let phi = SpectralField::trig(g, &[(1, 0.1)], &[(2, 0.05)]).unwrap();
            let psi = SpectralField::trig(g, &[(1, 0.05)], &[]).unwrap();
            picard_solve(&phi, &psi, 0.2, &PicardConfig::default()).unwrap().0
        };
        let a = solve(&coarse);
        let b = solve(&fine);
        for k in 0..a.len() {
            let diff = (&b.state(k).resample(&coarse) - a.state(k)).max_abs();
            let tail = b.state(k).max_abs() - b.state(k).truncate(coarse.max_mode()).max_abs();
            assert!(diff < 1e-8 && tail.abs() < 1e-8, "node {k}: {diff:e}");
        }
    }

    #[test]
    fn large_data_does_not_converge() {
        let g = grid(16, 0.01);
        let phi = SpectralField::trig(&g, &[(1, 40.0), (2, 30.0)], &[]).unwrap();
        let psi = SpectralField::trig(&g, &[(1, 20.0)], &[]).unwrap();
        let cfg = PicardConfig { max_iters: 30, ..PicardConfig::default() };
        match picard_solve(&phi, &psi, 0.9, &cfg) {
            Err(Error::NonConvergence(h)) => assert!(!h.converged),
            other => panic!("expected non-convergence, got {:?}", other.map(|r| r.1)),
        }
    }

    #[test]
    fn picard_preconditions() {
        let g = grid(16, 0.01);
        let z = SpectralField::zeros(&g);
        assert!(picard_solve(&z, &z, 1.0, &PicardConfig::default()).is_err());
        assert!(picard_solve(&z, &z, 0.105, &PicardConfig::default()).is_err());
        let bad_tol = PicardConfig { tol: 0.0, ..PicardConfig::default() };
        assert!(picard_solve(&z, &z, 0.1, &bad_tol).is_err());
    }
}
