//! The Boussinesq bilinear operator on space-time fields, the high-low
//! counterexample family, and the region-wise sup quantities behind the
//! bilinear estimate.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::random_spacetime_field;
use crate::fit::log_log_slope;
use crate::lemmas::exponent_functions;
use crate::spectral::{bracket, dispersion, multiplier_sq, GridSpec};
use crate::xsb::{xsb_norm, SpaceTimeField, TauRow, Weight, XsbParams};

/// Largest `τ` spacing used for counterexample grids.
pub const COUNTEREXAMPLE_TAU_SPACING: f64 = 0.25;

/// Fitted slopes above this count as growth.
pub const GROWTH_THRESHOLD: f64 = 0.1;

/// `(|n|² ũ*ṽ / 2iγ(n))` where `*` is the convolution in `(n, τ)`.
///
/// The `τ` convolution is a Riemann sum with the grid spacing; products landing
/// outside the `τ` grid are dropped.
pub fn bilinear_operator(u: &SpaceTimeField, v: &SpaceTimeField) -> Result<SpaceTimeField> {
    if u.grid() != v.grid() {
        return Err(Error::Shape("bilinear operator inputs live on different grids".into()));
    }
    let grid = *u.grid();
    let h = grid.tau_spacing();
    let center = grid.tau_center() as i64;
    let last = grid.tau_points() as i64 - 1;
    let modes: Vec<i64> = grid.modes().collect();
    let rows = modes
        .par_iter()
        .map(|&n| {
            if n == 0 {
                return TauRow::default();
            }
            let pairs: Vec<(&TauRow, &TauRow)> = grid
                .modes()
                .filter_map(|n1| {
                    let ru = u.row(n1)?;
                    let rv = v.row(n - n1)?;
                    (!ru.is_empty() && !rv.is_empty()).then_some((ru, rv))
                })
                .collect();
            let mut lo = i64::MAX;
            let mut hi = i64::MIN;
            for (ru, rv) in &pairs {
                lo = lo.min((ru.start + rv.start) as i64 - center);
                hi = hi.max((ru.end() + rv.end()) as i64 - 2 - center);
            }
            let (lo, hi) = (lo.max(0), hi.min(last));
            if lo > hi {
                return TauRow::default();
            }
            let mut acc = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
            for (ru, rv) in &pairs {
                for (dj, &a) in ru.values.iter().enumerate() {
                    let base = (ru.start + dj) as i64 - center + rv.start as i64;
                    for (dk, &b) in rv.values.iter().enumerate() {
                        let i = base + dk as i64;
                        if i >= lo && i <= hi {
                            acc[(i - lo) as usize] += a * b;
                        }
                    }
                }
            }
            let factor = Complex64::new(0.0, -h * (n * n) as f64 / (2.0 * dispersion(n)));
            TauRow {
                start: lo as usize,
                values: acc.into_iter().map(|c| c * factor).collect(),
            }
        })
        .collect();
    SpaceTimeField::from_rows(&grid, rows)
}

/// `‖B(u, v)‖_{X_{s,-a}} / (‖u‖_{X_{s,b}} ‖v‖_{X_{s,b}})` with the Boussinesq weight.
pub fn estimate_ratio(u: &SpaceTimeField, v: &SpaceTimeField, p: &XsbParams) -> Result<f64> {
    estimate_ratio_weighted(u, v, p, Weight::Boussinesq)
}

pub fn estimate_ratio_weighted(u: &SpaceTimeField, v: &SpaceTimeField, p: &XsbParams, weight: Weight) -> Result<f64> {
    let nu = xsb_norm(u, p.s, p.b, weight);
    let nv = xsb_norm(v, p.s, p.b, weight);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::UndefinedRatio("bilinear estimate ratio with a zero input".into()));
    }
    let out = bilinear_operator(u, v)?;
    Ok(xsb_norm(&out, p.s, -p.a, weight) / (nu * nv))
}

/// Unit indicator data concentrated at the frequency pair `(N, 1 - N)` on the
/// parabolas `τ = N²` and `τ = -(1 - N)²`, each of `τ`-width 4.
#[derive(Debug, Clone)]
pub struct CounterexamplePair {
    pub n: i64,
    pub f: SpaceTimeField,
    pub g: SpaceTimeField,
}

/// Grid just large enough for the pair at frequency `n`.
pub fn counterexample_grid(n: i64) -> Result<GridSpec> {
    if n < 2 {
        return Err(Error::Domain(format!("counterexample frequency must be >= 2, got {n}")));
    }
    let nf = n as f64;
    GridSpec::new(2 * (n as usize + 1))?.with_tau_spacing(nf * nf + 4.0, COUNTEREXAMPLE_TAU_SPACING)
}

pub fn counterexample_pair(n: i64, grid: &GridSpec) -> Result<CounterexamplePair> {
    if n < 2 {
        return Err(Error::Domain(format!("counterexample frequency must be >= 2, got {n}")));
    }
    let peak = (n * n) as f64;
    let need_tau = peak + 2.0;
    if grid.max_mode() < n || grid.tau_max() < need_tau {
        return Err(Error::resolution(
            format!(
                "counterexample N = {n} needs modes up to ±{n} and |tau| up to {need_tau} (grid has ±{} and {})",
                grid.max_mode(),
                grid.tau_max()
            ),
            need_tau,
            2 * n as usize,
        ));
    }
    let indicator = |center: f64| -> (usize, Vec<Complex64>) {
        let inside = |j: usize| (grid.tau(j) - center).abs() <= 2.0 + 1e-9;
        let first = grid.tau_index(center - 2.0).expect("range checked above");
        let start = if inside(first) { first } else { first + 1 };
        let len = (start..grid.tau_points()).take_while(|&j| inside(j)).count();
        (start, vec![Complex64::new(1.0, 0.0); len])
    };
    let mut f = SpaceTimeField::zeros(grid);
    let (start, values) = indicator(peak);
    f.set_row(n, start, values)?;
    let low = 1 - n;
    let mut g = SpaceTimeField::zeros(grid);
    let (start, values) = indicator(-((low * low) as f64));
    g.set_row(low, start, values)?;
    Ok(CounterexamplePair { n, f, g })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Growing,
}

impl Verdict {
    pub fn from_slope(slope: f64) -> Self {
        if slope > GROWTH_THRESHOLD {
            Verdict::Growing
        } else {
            Verdict::Bounded
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub params: XsbParams,
    pub family: String,
    pub n_values: Vec<i64>,
    pub ratios: Vec<f64>,
    pub slope: f64,
    pub predicted_slope: f64,
    pub verdict: Verdict,
}

fn check_sweep_list(n_list: &[i64], min_len: usize) -> Result<()> {
    if n_list.len() < min_len {
        return Err(Error::Domain(format!(
            "sweep needs at least {min_len} values of N, got {}",
            n_list.len()
        )));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("sweep values of N must be strictly ascending".into()));
    }
    Ok(())
}

/// Estimate ratio of the counterexample pair at each `N`, fitted against `N` on log scales.
pub fn sharpness_sweep(p: &XsbParams, n_list: &[i64]) -> Result<ProbeReport> {
    check_sweep_list(n_list, 5)?;
    let ratios = n_list
        .par_iter()
        .map(|&n| {
            let grid = counterexample_grid(n)?;
            let pair = counterexample_pair(n, &grid)?;
            estimate_ratio(&pair.f, &pair.g, p)
        })
        .collect::<Result<Vec<f64>>>()?;
    let ns: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let slope = log_log_slope(&ns, &ratios)?;
    Ok(ProbeReport {
        params: *p,
        family: "counterexample".into(),
        n_values: n_list.to_vec(),
        ratios,
        slope,
        predicted_slope: -2.0 * p.s - p.a,
        verdict: Verdict::from_slope(slope),
    })
}

/// Estimate ratios for `count` seeded random fields concentrated near the
/// parabolas; field `i` uses seed `seed + i`.
pub fn random_ratio_sweep(p: &XsbParams, grid: &GridSpec, band: i64, count: usize, seed: u64) -> Result<Vec<f64>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let u = random_spacetime_field(grid, band, 0.0, &mut rng);
            let v = random_spacetime_field(grid, band, 0.0, &mut rng);
            estimate_ratio(&u, &v, p)
        })
        .collect()
}

/// Sign pattern of the three modulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    /// `σ = τ - n²`, `σ₁ = τ₁ + n₁²`, `σ₂ = τ₂ - n₂²`.
    IV,
    /// `σ = τ - n²`, `σ₁ = τ₁ - n₁²`, `σ₂ = τ₂ - n₂²`.
    VI,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionLabel {
    A1,
    A2,
    A31,
    A32,
    B1,
    B2,
    B31,
    B32,
    B33,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub label: RegionLabel,
    /// Case VI only: the roles of `(n₁, τ₁)` and `(n₂, τ₂)` were swapped to
    /// reach the half `|σ₂| ≤ |σ₁|`.
    pub mirrored: bool,
}

/// `(σ, σ₁, σ₂)` with `n₂ = n - n₁`, `τ₂ = τ - τ₁`.
pub fn modulations(n: i64, n1: i64, tau: f64, tau1: f64, case: Case) -> (f64, f64, f64) {
    let (nf, n1f) = (n as f64, n1 as f64);
    let n2f = nf - n1f;
    let sigma = tau - nf * nf;
    let sigma2 = (tau - tau1) - n2f * n2f;
    let sigma1 = match case {
        Case::IV => tau1 + n1f * n1f,
        Case::VI => tau1 - n1f * n1f,
    };
    (sigma, sigma1, sigma2)
}

pub fn region_classify(n: i64, n1: i64, tau: f64, tau1: f64, case: Case) -> Region {
    let (sigma, sigma1, sigma2) = modulations(n, n1, tau, tau1, case);
    match case {
        Case::VI => {
            let mirrored = sigma2.abs() > sigma1.abs();
            let (n1, sigma1) = if mirrored { (n - n1, sigma2) } else { (n1, sigma1) };
            let label = if n == 0 {
                RegionLabel::A1
            } else if n1 == 0 || n1 == n {
                RegionLabel::A2
            } else if sigma1.abs() <= sigma.abs() {
                RegionLabel::A31
            } else {
                RegionLabel::A32
            };
            Region { label, mirrored }
        }
        Case::IV => {
            let (a, a1, a2) = (sigma.abs(), sigma1.abs(), sigma2.abs());
            let label = if n == 0 {
                RegionLabel::B1
            } else if n1 == 0 {
                RegionLabel::B2
            } else if a1 <= a && a2 <= a {
                RegionLabel::B31
            } else if a <= a1 && a2 <= a1 {
                RegionLabel::B32
            } else {
                RegionLabel::B33
            };
            Region { label, mirrored: false }
        }
    }
}

/// Both sides of the resonance identity `-σ + σ₁ + σ₂ = 2n₁n₂` (case VI) or
/// `= 2n₁n` (case IV).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn relation_rhs(n: i64, n1: i64, case: Case) -> i128 {
    let (n, n1) = (n as i128, n1 as i128);
    match case {
        Case::VI => 2 * n1 * (n - n1),
        Case::IV => 2 * n1 * n,
    }
}

/// Floating-point check, relative to the size of the terms involved.
pub fn algebraic_relation(n: i64, n1: i64, tau: f64, tau1: f64, case: Case) -> RelationCheck {
    let (sigma, sigma1, sigma2) = modulations(n, n1, tau, tau1, case);
    let lhs = -sigma + sigma1 + sigma2;
    let rhs = relation_rhs(n, n1, case) as f64;
    let scale = 1.0 + tau.abs() + tau1.abs() + (n as f64).powi(2) + (n1 as f64).powi(2);
    RelationCheck {
        lhs,
        rhs,
        holds: (lhs - rhs).abs() <= 1e-9 * scale,
    }
}

/// Exact check for rational `τ = tau_num / den`, `τ₁ = tau1_num / den`;
/// returns both sides multiplied by `den`.
pub fn algebraic_relation_exact(n: i64, n1: i64, tau_num: i128, tau1_num: i128, den: i128, case: Case) -> (i128, i128) {
    let (n, n1) = (n as i128, n1 as i128);
    let n2 = n - n1;
    let sigma = tau_num - n * n * den;
    let sigma2 = (tau_num - tau1_num) - n2 * n2 * den;
    let sigma1 = match case {
        Case::IV => tau1_num + n1 * n1 * den,
        Case::VI => tau1_num - n1 * n1 * den,
    };
    (-sigma + sigma1 + sigma2, relation_rhs(n as i64, n1 as i64, case) * den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SupKind {
    J1,
    J2,
    K1,
    K2,
    K3,
}

impl SupKind {
    pub const ALL: [SupKind; 5] = [SupKind::J1, SupKind::J2, SupKind::K1, SupKind::K2, SupKind::K3];

    /// Center of the outer-variable sampling: the `τ` where the outer modulation vanishes.
    fn parabola(self, m: i64) -> f64 {
        let m2 = (m * m) as f64;
        match self {
            SupKind::K2 => -m2,
            _ => m2,
        }
    }
}

/// Checks the exponent hypotheses under which each sup quantity is finite.
pub fn check_sup_hypotheses(kind: SupKind, p: &XsbParams) -> Result<()> {
    let (lambda, eta) = exponent_functions(p.s);
    let ok = match kind {
        SupKind::J1 => p.b > 0.5 && lambda <= 2.0 * p.a,
        SupKind::J2 => p.a > 0.0 && p.a < 0.5 && lambda <= (2.0 * p.b).min(2.0 * p.a + 2.0 * p.b - 1.0),
        SupKind::K1 => p.b > 0.5 && eta <= 2.0 * p.a,
        SupKind::K2 => p.a > 0.0 && p.a < 0.5 && eta <= (2.0 * p.b).min(2.0 * p.a + 2.0 * p.b - 1.0),
        SupKind::K3 => p.a > 0.25 && p.b > 0.5 && p.s > -0.25,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{kind:?} is not bounded for s = {}, b = {}, a = {}",
            p.s, p.b, p.a
        )))
    }
}

fn sobolev_factor(s: f64, n: i64, n1: i64, n2: i64) -> f64 {
    (bracket(n as f64).powi(2) / (bracket(n1 as f64) * bracket(n2 as f64)).powi(2)).powf(s)
}

/// One term of the sup quantity `kind` at outer point `(m, t)` and summation index `k`,
/// including the outer prefactor, or 0 when the point lies outside the kind's region.
///
/// The `τ` variable integrated out by the calculus lemma is fixed where the
/// remaining modulation vanishes (`σ₂ = 0`, or `σ₁ = 0` for `K3`), which is
/// where the region is decided.
pub fn sup_summand(kind: SupKind, p: &XsbParams, m: i64, t: f64, k: i64) -> f64 {
    let mf = m as f64;
    let kf = k as f64;
    match kind {
        SupKind::J1 | SupKind::K1 => {
            let (n, n1) = (m, k);
            let n2 = n - n1;
            let tau1 = t - (n2 * n2) as f64;
            let (case, allowed, inner) = if kind == SupKind::J1 {
                (Case::VI, [RegionLabel::A1, RegionLabel::A2, RegionLabel::A31], t - mf * mf - 2.0 * kf * kf + 2.0 * mf * kf)
            } else {
                (Case::IV, [RegionLabel::B1, RegionLabel::B2, RegionLabel::B31], t - mf * mf + 2.0 * mf * kf)
            };
            if !allowed.contains(&region_classify(n, n1, t, tau1, case).label) {
                return 0.0;
            }
            let sigma = t - mf * mf;
            bracket(sigma).powf(-2.0 * p.a) * multiplier_sq(n) * sobolev_factor(p.s, n, n1, n2)
                / bracket(inner).powf(2.0 * p.b)
        }
        SupKind::J2 | SupKind::K2 => {
            let (n1, n) = (m, k);
            let n2 = n - n1;
            let tau = t + (n2 * n2) as f64;
            let (case, want, sigma1) = if kind == SupKind::J2 {
                (Case::VI, RegionLabel::A32, t - mf * mf)
            } else {
                (Case::IV, RegionLabel::B32, t + mf * mf)
            };
            if region_classify(n, n1, tau, t, case).label != want {
                return 0.0;
            }
            let inner = t + mf * mf - 2.0 * kf * mf;
            bracket(sigma1).powf(-2.0 * p.b) * multiplier_sq(n) * sobolev_factor(p.s, n, n1, n2)
                / bracket(inner).powf(2.0 * p.a)
        }
        SupKind::K3 => {
            let (n2, n1) = (m, k);
            let n = n1 + n2;
            let tau1 = -((n1 * n1) as f64);
            if region_classify(n, n1, tau1 + t, tau1, Case::IV).label != RegionLabel::B33 {
                return 0.0;
            }
            let sigma2 = t - mf * mf;
            let inner = sigma2 - 2.0 * kf * kf - 2.0 * kf * mf;
            bracket(sigma2).powf(-2.0 * p.b) * multiplier_sq(n) * sobolev_factor(p.s, n, n1, n2)
                / bracket(inner).powf(2.0 * p.a)
        }
    }
}

/// Finite box for the sup estimator: outer mode `|m| ≤ modes`, outer `|t| ≤ tau`,
/// summation index `|k| ≤ sum`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub modes: i64,
    pub tau: f64,
    pub sum: i64,
}

impl SampleBox {
    pub fn doubled(&self) -> Self {
        SampleBox {
            modes: 2 * self.modes,
            tau: 2.0 * self.tau,
            sum: 2 * self.sum,
        }
    }
}

/// Number of uniformly spaced outer `τ` samples on `[-tau, tau]`.
pub const SUP_UNIFORM_SAMPLES: usize = 65;

/// Outer `τ` samples for mode `m`: the parabola point, geometric offsets
/// `±2^k/2` around it, and a coarse uniform grid.
pub fn sup_tau_samples(kind: SupKind, m: i64, bx: &SampleBox) -> Vec<f64> {
    let c = kind.parabola(m);
    let mut out = vec![c];
    let mut d = 0.5;
    while d <= 2.0 * bx.tau {
        out.push(c - d);
        out.push(c + d);
        d *= 2.0;
    }
    let step = 2.0 * bx.tau / (SUP_UNIFORM_SAMPLES - 1) as f64;
    out.extend((0..SUP_UNIFORM_SAMPLES).map(|i| -bx.tau + step * i as f64));
    out.retain(|t| t.abs() <= bx.tau);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupEstimate {
    pub kind: SupKind,
    pub value: f64,
    pub argmax_mode: i64,
    pub argmax_tau: f64,
    pub samples: usize,
}

/// Largest truncated region-restricted sum over the stratified samples of the box.
pub fn sup_estimator(kind: SupKind, p: &XsbParams, bx: &SampleBox) -> Result<SupEstimate> {
    check_sup_hypotheses(kind, p)?;
    if bx.modes < 0 || bx.sum < 0 || !(bx.tau > 0.0) {
        return Err(Error::Domain(format!("invalid sample box {bx:?}")));
    }
    let per_mode: Vec<(f64, i64, f64, usize)> = (-bx.modes..=bx.modes)
        .into_par_iter()
        .map(|m| {
            let taus = sup_tau_samples(kind, m, bx);
            let mut best = (0.0, m, taus[0], taus.len());
            for &t in &taus {
                let v: f64 = (-bx.sum..=bx.sum).map(|k| sup_summand(kind, p, m, t, k)).sum();
                if v > best.0 {
                    best = (v, m, t, taus.len());
                }
            }
            best
        })
        .collect();
    let samples = per_mode.iter().map(|b| b.3).sum();
    let best = per_mode
        .into_iter()
        .fold((0.0, 0, 0.0, 0), |acc, b| if b.0 > acc.0 { b } else { acc });
    Ok(SupEstimate {
        kind,
        value: best.0,
        argmax_mode: best.1,
        argmax_tau: best.2,
        samples,
    })
}

/// One term of the sup quantity without the Boussinesq multiplier,
/// `⟨σ₁⟩^{-2b} ⟨n⟩^{2s}⟨n₁⟩^{-2s}⟨n₂⟩^{-2s} / ⟨τ₁ + n₁² - 2nn₁⟩^{2a}` with `σ₁ = τ₁ + n₁²`.
pub fn k2_tilde_summand(p: &XsbParams, n1: i64, tau1: f64, n: i64) -> f64 {
    let n1f = n1 as f64;
    let sigma1 = tau1 + n1f * n1f;
    bracket(sigma1).powf(-2.0 * p.b) * sobolev_factor(p.s, n, n1, n - n1)
        / bracket(sigma1 - 2.0 * (n as f64) * n1f).powf(2.0 * p.a)
}

/// The `n = 0` term of the multiplier-free sup at `τ₁ = -N²`, `n₁ = N`, against `N`.
pub fn k2_tilde_divergence(n_list: &[i64], s: f64, a: f64, b: f64) -> Result<ProbeReport> {
    if s > 0.0 {
        return Err(Error::Domain(format!("divergence probe is for s <= 0, got {s}")));
    }
    check_sweep_list(n_list, 2)?;
    if n_list[0] < 1 {
        return Err(Error::Domain("N must be positive".into()));
    }
    let p = XsbParams::new(s, b, a);
    let ratios: Vec<f64> = n_list
        .iter()
        .map(|&n| k2_tilde_summand(&p, n, -((n * n) as f64), 0))
        .collect();
    let ns: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let slope = log_log_slope(&ns, &ratios)?;
    Ok(ProbeReport {
        params: p,
        family: "k2_tilde_lower_bound".into(),
        n_values: n_list.to_vec(),
        ratios,
        slope,
        predicted_slope: -4.0 * s,
        verdict: Verdict::from_slope(slope),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn point_field(grid: &GridSpec, n: i64, tau: f64) -> SpaceTimeField {
        let mut f = SpaceTimeField::zeros(grid);
        f.set_row(n, grid.tau_index(tau).unwrap(), vec![Complex64::new(1.0, 0.0)]).unwrap();
        f
    }

    #[test]
    fn operator_trivial_cases() {
        let g = GridSpec::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = random_spacetime_field(&g, 5, 0.0, &mut rng);
        let z = SpaceTimeField::zeros(&g);
        assert!(bilinear_operator(&u, &z).unwrap().is_zero());
        assert!(bilinear_operator(&z, &u).unwrap().is_zero());
        let out = bilinear_operator(&u, &u.reflect()).unwrap();
        assert!(out.row(0).unwrap().is_empty());
        let other = GridSpec::new(8).unwrap();
        assert!(matches!(bilinear_operator(&u, &SpaceTimeField::zeros(&other)), Err(Error::Shape(_))));
    }

    #[test]
    fn two_lattice_deltas() {
        let g = GridSpec::new(16).unwrap();
        let d = point_field(&g, 1, 0.0);
        let out = bilinear_operator(&d, &d).unwrap();
        let j0 = g.tau_center();
        let expect = 4.0 / (2.0 * dispersion(2)) * g.tau_spacing();
        assert_relative_eq!(out.get(2, j0).norm(), expect, epsilon = 1e-15);
        let mass_elsewhere: f64 = out
            .rows()
            .flat_map(|(n, r)| r.values.iter().enumerate().map(move |(k, c)| (n, r.start + k, c.norm())))
            .filter(|&(n, j, _)| !(n == 2 && j == j0))
            .map(|t| t.2)
            .sum();
        assert_eq!(mass_elsewhere, 0.0);
    }

    #[test]
    fn ratio_invariances() {
        let g = GridSpec::new(16).unwrap().with_tau(40.0, 321).unwrap();
        let p = XsbParams::new(0.0, 0.6, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_spacetime_field(&g, 5, 0.0, &mut rng);
        let v = random_spacetime_field(&g, 5, 0.0, &mut rng);
        let r = estimate_ratio(&u, &v, &p).unwrap();
        assert_relative_eq!(estimate_ratio(&u.scale(3.0), &v.scale(0.2), &p).unwrap(), r, max_relative = 1e-12);
        assert_relative_eq!(estimate_ratio(&v, &u, &p).unwrap(), r, max_relative = 1e-12);
        assert_relative_eq!(estimate_ratio(&u.reflect(), &v.reflect(), &p).unwrap(), r, max_relative = 1e-12);
        assert!(matches!(estimate_ratio(&u, &SpaceTimeField::zeros(&g), &p), Err(Error::UndefinedRatio(_))));
    }

    #[test]
    fn counterexample_supports() {
        let g = counterexample_grid(2).unwrap();
        let pair = counterexample_pair(2, &g).unwrap();
        let taus = |f: &SpaceTimeField, n: i64| -> Vec<f64> {
            let r = f.row(n).unwrap();
            (r.start..r.end()).map(|j| g.tau(j)).collect()
        };
        let tf = taus(&pair.f, 2);
        assert_eq!((tf[0], *tf.last().unwrap()), (2.0, 6.0));
        let tg = taus(&pair.g, -1);
        assert_eq!((tg[0], *tg.last().unwrap()), (-3.0, 1.0));
        for (n, r) in pair.f.rows() {
            assert_eq!(r.is_empty(), n != 2);
        }
        for (n, r) in pair.g.rows() {
            assert_eq!(r.is_empty(), n != -1);
        }
    }

    #[test]
    fn counterexample_convolution_lives_at_one() {
        for n in [2, 5, 9] {
            let g = counterexample_grid(n).unwrap();
            let pair = counterexample_pair(n, &g).unwrap();
            let out = bilinear_operator(&pair.f, &pair.g).unwrap();
            for (m, r) in out.rows() {
                assert_eq!(r.is_empty(), m != 1, "N = {n}, mode {m}");
            }
            // undo the multiplier and the spacing to recover the plain τ-convolution
            let scale = g.tau_spacing() / (2.0 * dispersion(1));
            let center = (2 * n - 1) as f64;
            for j in 0..g.tau_points() {
                if (g.tau(j) - center).abs() <= 1.0 {
                    assert!(out.get(1, j).norm() / scale >= 3.0 * (1.0 / g.tau_spacing()) - 1e-9);
                }
            }
        }
    }

    #[test]
    fn counterexample_resolution_error() {
        let small = GridSpec::new(8).unwrap();
        match counterexample_pair(6, &small) {
            Err(Error::Resolution { required_tau_max, required_modes, .. }) => {
                assert_eq!(required_tau_max, 38.0);
                assert_eq!(required_modes, 12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(counterexample_pair(1, &small), Err(Error::Domain(_))));
    }

    #[test]
    fn sweep_preconditions() {
        let p = XsbParams::new(0.0, 0.6, 0.3);
        assert!(sharpness_sweep(&p, &[8]).is_err());
        assert!(sharpness_sweep(&p, &[8, 4, 16, 32, 64]).is_err());
    }

    #[test]
    fn small_sweep_shapes() {
        let r = sharpness_sweep(&XsbParams::new(-0.5, 0.6, 0.45), &[4, 6, 8, 12, 16]).unwrap();
        assert_eq!(r.ratios.len(), 5);
        assert_relative_eq!(r.predicted_slope, 0.55, epsilon = 1e-12);
        assert_eq!(r.verdict, Verdict::Growing);
        let r = sharpness_sweep(&XsbParams::new(0.0, 0.6, 0.3), &[4, 6, 8, 12, 16]).unwrap();
        assert_eq!(r.verdict, Verdict::Bounded);
    }

    #[test]
    fn region_examples() {
        assert_eq!(region_classify(0, 3, 1.0, 2.0, Case::VI).label, RegionLabel::A1);
        assert_eq!(region_classify(3, 0, 1.0, 2.0, Case::IV).label, RegionLabel::B2);
        assert_eq!(region_classify(3, 1, 9.0, -1.0, Case::IV).label, RegionLabel::B33);
        let r = region_classify(4, 1, 6.0, -3.0, Case::VI);
        assert_eq!(r.label, RegionLabel::A31);
        assert!(!r.mirrored);
        let r = region_classify(4, 1, 16.0, 1.0, Case::VI);
        assert_eq!(r.label, RegionLabel::A32);
        assert!(r.mirrored);
    }

    fn in_b31(s: (f64, f64, f64)) -> bool {
        s.1.abs() <= s.0.abs() && s.2.abs() <= s.0.abs()
    }

    fn in_b32(s: (f64, f64, f64)) -> bool {
        s.0.abs() <= s.1.abs() && s.2.abs() <= s.1.abs()
    }

    fn in_b33(s: (f64, f64, f64)) -> bool {
        s.1.abs() <= s.2.abs() && s.0.abs() <= s.2.abs()
    }

    #[test]
    fn labels_satisfy_their_defining_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20_000 {
            let n = rng.gen_range(-20..=20);
            let n1 = rng.gen_range(-20..=20);
            let tau = rng.gen_range(-500.0..500.0);
            let tau1 = rng.gen_range(-500.0..500.0);
            let s = modulations(n, n1, tau, tau1, Case::IV);
            match region_classify(n, n1, tau, tau1, Case::IV).label {
                RegionLabel::B1 => assert_eq!(n, 0),
                RegionLabel::B2 => assert!(n != 0 && n1 == 0),
                RegionLabel::B31 => assert!(n != 0 && n1 != 0 && in_b31(s)),
                RegionLabel::B32 => assert!(n != 0 && n1 != 0 && in_b32(s) && !in_b31(s)),
                RegionLabel::B33 => assert!(n != 0 && n1 != 0 && in_b33(s) && !in_b31(s) && !in_b32(s)),
                other => panic!("case IV gave {other:?}"),
            }
            let r = region_classify(n, n1, tau, tau1, Case::VI);
            let (sg, s1, s2) = modulations(n, n1, tau, tau1, Case::VI);
            let big = if r.mirrored { s2 } else { s1 };
            assert!((if r.mirrored { s1 } else { s2 }).abs() <= big.abs());
            match r.label {
                RegionLabel::A1 => assert_eq!(n, 0),
                RegionLabel::A2 => assert!(n != 0 && (n1 == 0 || n1 == n)),
                RegionLabel::A31 => assert!(big.abs() <= sg.abs()),
                RegionLabel::A32 => assert!(sg.abs() < big.abs()),
                other => panic!("case VI gave {other:?}"),
            }
        }
    }

    #[test]
    fn relation_examples() {
        for (tau, tau1) in [(0.0, 0.0), (2.5, -7.25), (1e3, 3.3)] {
            let r = algebraic_relation(3, 1, tau, tau1, Case::VI);
            assert!(r.holds && r.rhs == 4.0);
            let r = algebraic_relation(3, 1, tau, tau1, Case::IV);
            assert!(r.holds && r.rhs == 6.0);
        }
        let (l, r) = algebraic_relation_exact(3, 1, 7, -11, 4, Case::VI);
        assert_eq!((l, r), (16, 16));
    }

    #[test]
    fn relation_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20_000 {
            let n = rng.gen_range(-1000..=1000);
            let n1 = rng.gen_range(-1000..=1000);
            let den = rng.gen_range(1..=1_000_000i128);
            let tn = rng.gen_range(-1_000_000_000_000i128..1_000_000_000_000);
            let t1n = rng.gen_range(-1_000_000_000_000i128..1_000_000_000_000);
            for case in [Case::IV, Case::VI] {
                let (l, r) = algebraic_relation_exact(n, n1, tn, t1n, den, case);
                assert_eq!(l, r);
                let f = algebraic_relation(n, n1, tn as f64 / den as f64, t1n as f64 / den as f64, case);
                assert!(f.holds, "{f:?}");
            }
        }
    }

    #[test]
    fn sup_summand_examples() {
        let p = XsbParams::new(0.0, 0.6, 0.3);
        for t in [-5.0, 0.0, 3.0] {
            for k in -4..=4 {
                assert_eq!(sup_summand(SupKind::J1, &p, 0, t, k), 0.0);
            }
        }
        let q = XsbParams::new(0.0, 0.6, 0.6);
        for n in -10..=10 {
            for t in [-50.0, -1.0, 0.0, 4.0, 99.0] {
                let v = sup_summand(SupKind::K1, &q, n, t, 0);
                let sigma = t - (n * n) as f64;
                assert!(v <= bracket(sigma).powf(-2.4) + 1e-15);
                assert!(v <= 1.0);
            }
        }
    }

    #[test]
    fn sup_hypotheses() {
        let bad = XsbParams::new(-0.3, 0.6, 0.45);
        assert!(matches!(sup_estimator(SupKind::K3, &bad, &SampleBox { modes: 4, tau: 16.0, sum: 4 }), Err(Error::Domain(_))));
        let k1 = XsbParams::new(0.0, 0.6, 0.6);
        assert!(check_sup_hypotheses(SupKind::K1, &k1).is_ok());
        assert!(check_sup_hypotheses(SupKind::K2, &k1).is_err());
    }

    #[test]
    fn k2_sup_stable_under_doubling() {
        let p = XsbParams::new(0.0, 0.6, 0.45);
        let bx = SampleBox { modes: 64, tau: 256.0, sum: 256 };
        let a = sup_estimator(SupKind::K2, &p, &bx).unwrap();
        let b = sup_estimator(SupKind::K2, &p, &bx.doubled()).unwrap();
        assert!(a.value.is_finite() && a.value > 0.0);
        assert!((b.value - a.value).abs() / a.value < 0.05, "{} vs {}", a.value, b.value);
    }

    #[test]
    fn every_kind_finite_and_stable_in_admissible_case() {
        let p = XsbParams::new(0.0, 0.6, 0.45);
        let bx = SampleBox { modes: 32, tau: 128.0, sum: 128 };
        for kind in SupKind::ALL {
            let a = sup_estimator(kind, &p, &bx).unwrap();
            let b = sup_estimator(kind, &p, &bx.doubled()).unwrap();
            assert!(a.value.is_finite());
            assert!((b.value - a.value).abs() <= 0.05 * a.value, "{kind:?}: {} vs {}", a.value, b.value);
        }
    }

    #[test]
    fn k2_tilde_examples() {
        let ns = [8, 16, 32, 64, 128, 256];
        let r = k2_tilde_divergence(&ns, 0.0, 0.45, 0.6).unwrap();
        assert!(r.ratios.iter().all(|&v| v == 1.0));
        assert_eq!(r.slope, 0.0);
        let r = k2_tilde_divergence(&ns, -0.1, 0.45, 0.6).unwrap();
        for w in r.ratios.windows(2) {
            assert!((w[1] / w[0] / 2f64.powf(0.4) - 1.0).abs() < 0.05);
        }
        assert!(k2_tilde_divergence(&ns, 0.2, 0.45, 0.6).is_err());
    }
}
