//! The linear Boussinesq group `u(t) = V_c(t)φ + V_s(t)ψ_x`.
//!
//! Everything here is diagonal in Fourier space: mode `n` oscillates at
//! frequency `γ(n)`. `V_s` is only ever applied after `∂_x`, which removes
//! the `n = 0` mode before the `sin(tγ)/γ` factor could degenerate.

use num_complex::Complex64;

use crate::spectral::{dispersion, inverse_transform, SpectralField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `sin(tγ)/γ`, continued by `t` at `γ = 0`.
#[inline]
pub(crate) fn sinc_kernel(gamma: f64, t: f64) -> f64 {
    if gamma == 0.0 {
        t
    } else {
        (t * gamma).sin() / gamma
    }
}

/// `V_c(t)φ`: multiply mode `n` by `cos(tγ(n))`.
pub fn apply_vc(phi: &SpectralField, t: f64) -> SpectralField {
    phi.map_modes(|n, c| c * (t * dispersion(n)).cos())
}

/// `V_s(t)ψ_x`: multiply mode `n` by `in·sin(tγ(n))/γ(n)`; mode 0 is zero.
pub fn apply_vs_dx(psi: &SpectralField, t: f64) -> SpectralField {
    psi.map_modes(|n, c| {
        if n == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            c * I * (n as f64) * sinc_kernel(dispersion(n), t)
        }
    })
}

/// Solution of the linear equation with `u(0) = φ`, `u_t(0) = ψ_x`.
pub fn linear_solution(phi: &SpectralField, psi: &SpectralField, t: f64) -> SpectralField {
    &apply_vc(phi, t) + &apply_vs_dx(psi, t)
}

/// Exact `u_t(t)` of the linear solution.
pub fn linear_velocity(phi: &SpectralField, psi: &SpectralField, t: f64) -> SpectralField {
    let from_phi = phi.map_modes(|n, c| {
        let g = dispersion(n);
        -c * g * (t * g).sin()
    });
    let from_psi = psi.map_modes(|n, c| c * I * (n as f64) * (t * dispersion(n)).cos());
    &from_phi + &from_psi
}

/// Advance the first-order pair `(û, û_t)` of one mode by `h` under the linear flow.
#[inline]
pub fn rotate(gamma: f64, u: Complex64, v: Complex64, h: f64) -> (Complex64, Complex64) {
    let (s, c) = (h * gamma).sin_cos();
    (u * c + v * sinc_kernel(gamma, h), -u * (gamma * s) + v * c)
}

/// Advance a full state `(u, u_t)` by `h`.
pub fn propagate(u: &SpectralField, ut: &SpectralField, h: f64) -> (SpectralField, SpectralField) {
    let mut next_u = u.clone();
    let mut next_v = ut.clone();
    for n in u.grid().modes() {
        let (a, b) = rotate(dispersion(n), u.get(n), ut.get(n), h);
        // both fields share the lattice, so the mode is always present
        next_u.set(n, a).expect("mode on lattice");
        next_v.set(n, b).expect("mode on lattice");
    }
    (next_u, next_v)
}

/// Linear solution with a cache of evaluated time nodes.
#[derive(Debug, Clone)]
pub struct LinearSolution {
    phi: SpectralField,
    psi: SpectralField,
    cache: Vec<(f64, SpectralField)>,
}

impl LinearSolution {
    pub fn new(phi: SpectralField, psi: SpectralField) -> Self {
        LinearSolution { phi, psi, cache: Vec::new() }
    }

    pub fn phi(&self) -> &SpectralField {
        &self.phi
    }

    pub fn psi(&self) -> &SpectralField {
        &self.psi
    }

    pub fn at(&self, t: f64) -> SpectralField {
        self.cache
            .iter()
            .find(|(tk, _)| *tk == t)
            .map(|(_, u)| u.clone())
            .unwrap_or_else(|| linear_solution(&self.phi, &self.psi, t))
    }

    /// Evaluate and cache `u(t_k)` at every node.
    pub fn evaluate_nodes(&mut self, times: &[f64]) {
        for &t in times {
            if !self.cache.iter().any(|(tk, _)| *tk == t) {
                let u = linear_solution(&self.phi, &self.psi, t);
                self.cache.push((t, u));
            }
        }
    }

    pub fn cached(&self) -> &[(f64, SpectralField)] {
        &self.cache
    }
}

/// Sup-norm in `x` of `u_tt - u_xx + u_xxxx` at time `t`, with `u_tt` from a
/// centered difference of step `dt_fd` and spatial derivatives taken spectrally.
pub fn linear_residual(sol: &LinearSolution, t: f64, dt_fd: f64) -> f64 {
    let prev = sol.at(t - dt_fd);
    let mid = sol.at(t);
    let next = sol.at(t + dt_fd);
    let inv_h2 = 1.0 / (dt_fd * dt_fd);
    let residual = mid.map_modes(|n, c| {
        let utt = (next.get(n) - c * 2.0 + prev.get(n)) * inv_h2;
        let g = dispersion(n);
        utt + c * (g * g)
    });
    inverse_transform(&residual).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> GridSpec {
        GridSpec::new(16).unwrap()
    }

    fn random_real(g: &GridSpec, band: i64, amp: f64, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cos: Vec<_> = (0..=band).map(|k| (k, amp * rng.gen_range(-1.0..1.0))).collect();
        let sin: Vec<_> = (1..=band).map(|k| (k, amp * rng.gen_range(-1.0..1.0))).collect();
        SpectralField::trig(g, &cos, &sin).unwrap()
    }

    #[test]
    fn vc_examples() {
        let g = grid();
        let phi = SpectralField::trig(&g, &[(1, 1.0)], &[]).unwrap();
        assert_eq!(apply_vc(&phi, 0.0), phi);
        let out = apply_vc(&phi, 0.5);
        let expect = (0.5 * 2f64.sqrt()).cos() / 2.0;
        assert_relative_eq!(out.get(1).re, expect, epsilon = 1e-15);
        assert_relative_eq!(out.get(-1).re, expect, epsilon = 1e-15);
        let c = SpectralField::trig(&g, &[(0, 1.0)], &[]).unwrap();
        assert_eq!(apply_vc(&c, 3.7), c);
    }

    #[test]
    fn vs_dx_examples() {
        let g = grid();
        let psi = random_real(&g, 4, 1.0, 1);
        assert!(apply_vs_dx(&psi, 0.0).is_zero());
        let five = SpectralField::trig(&g, &[(0, 5.0)], &[]).unwrap();
        assert_eq!(apply_vs_dx(&five, 0.8).get(0), Complex64::new(0.0, 0.0));
        let sin = SpectralField::trig(&g, &[], &[(1, 1.0)]).unwrap();
        let out = apply_vs_dx(&sin, 0.5);
        let mag = (0.5 * 2f64.sqrt()).sin().abs() / (2.0 * 2f64.sqrt());
        assert_relative_eq!(out.get(1).norm(), mag, epsilon = 1e-15);
        assert_relative_eq!(out.get(-1).norm(), mag, epsilon = 1e-15);
        for n in g.modes().filter(|n| n.abs() != 1) {
            assert_eq!(out.get(n).norm(), 0.0);
        }
    }

    #[test]
    fn cosine_data_closed_form() {
        let g = grid();
        let phi = SpectralField::trig(&g, &[(1, 1.0)], &[]).unwrap();
        let psi = SpectralField::zeros(&g);
        let u = linear_solution(&phi, &psi, 0.5);
        let amp = (2f64.sqrt() * 0.5).cos();
        for x in [0.0, 0.3, 1.9, 4.4] {
            assert!((u.eval(x).re - amp * x.cos()).abs() < 1e-14);
        }
        assert!(linear_solution(&psi, &psi, 1.0).is_zero());
        let psi = random_real(&g, 5, 1.0, 3);
        assert_eq!(linear_solution(&phi, &psi, 0.0), phi);
    }

    #[test]
    fn group_property_of_first_order_system() {
        let g = grid();
        let phi = random_real(&g, 6, 1.0, 11);
        let psi = random_real(&g, 6, 1.0, 12);
        let (t1, t2) = (0.37, 0.51);
        let u1 = linear_solution(&phi, &psi, t1);
        let v1 = linear_velocity(&phi, &psi, t1);
        let (u12, v12) = propagate(&u1, &v1, t2);
        let u_direct = linear_solution(&phi, &psi, t1 + t2);
        let v_direct = linear_velocity(&phi, &psi, t1 + t2);
        for n in g.modes() {
            let scale = 1.0 + dispersion(n);
            assert!((u12.get(n) - u_direct.get(n)).norm() < 1e-12);
            assert!((v12.get(n) - v_direct.get(n)).norm() < 1e-12 * scale);
        }
    }

    #[test]
    fn reality_and_reflection() {
        let g = grid();
        let phi = random_real(&g, 7, 1.0, 21);
        let psi = random_real(&g, 7, 1.0, 22);
        for t in [0.1, 0.9, 2.5] {
            assert!(linear_solution(&phi, &psi, t).is_real(1e-12));
            assert_eq!(apply_vc(&phi.reflect(), t), apply_vc(&phi, t).reflect());
        }
    }

    #[test]
    fn residual_second_order_for_cosine() {
        let g = grid();
        let phi = SpectralField::trig(&g, &[(1, 1.0)], &[]).unwrap();
        let sol = LinearSolution::new(phi, SpectralField::zeros(&g));
        let r: Vec<f64> = [1e-2, 5e-3, 2.5e-3].iter().map(|&h| linear_residual(&sol, 0.5, h)).collect();
        for w in r.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.8..4.2).contains(&ratio), "ratio {ratio}");
        }
        let zero = LinearSolution::new(SpectralField::zeros(&g), SpectralField::zeros(&g));
        assert_eq!(linear_residual(&zero, 0.3, 1e-3), 0.0);
    }

    #[test]
    fn residual_small_for_band_limited_data() {
        let g = grid();
        for seed in 0..5 {
            let phi = random_real(&g, 2, 0.5, 100 + seed);
            let psi = random_real(&g, 2, 0.5, 200 + seed);
            let sol = LinearSolution::new(phi, psi);
            let r = linear_residual(&sol, 0.4, 1e-4);
            assert!(r < 1e-6, "seed {seed}: residual {r}");
        }
    }

    #[test]
    fn cache_reuses_nodes() {
        let g = grid();
        let phi = random_real(&g, 3, 1.0, 5);
        let mut sol = LinearSolution::new(phi.clone(), SpectralField::zeros(&g));
        sol.evaluate_nodes(&[0.0, 0.1, 0.2, 0.1]);
        assert_eq!(sol.cached().len(), 3);
        assert_eq!(sol.at(0.0), phi);
    }
}
