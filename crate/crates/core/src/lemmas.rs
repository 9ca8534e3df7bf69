//! Numerical checks of the calculus and weight lemmas behind the bilinear estimate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::spectral::bracket;

/// Relative change between a quantity and its refinement above which a report fails.
pub const STABILITY_TOL: f64 = 0.05;

/// `(λ(s), η(s)) = (max(0, -2s), max(0, -4s))`.
pub fn exponent_functions(s: f64) -> (f64, f64) {
    let lambda = (-2.0 * s).max(0.0);
    (lambda, 2.0 * lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalculusBound {
    /// `⟨α - β⟩^r · I(α, β)`.
    pub normalized: f64,
    pub integral: f64,
    pub r: f64,
    pub error: f64,
}

/// `r = min(p, q, p + q - 1)`.
pub fn calculus_exponent(p: f64, q: f64) -> f64 {
    p.min(q).min(p + q - 1.0)
}

/// `∫_ℝ dx / (⟨x - α⟩^p ⟨x - β⟩^q)` times `⟨α - β⟩^r`, with quadrature tolerance `tol`.
///
/// The interval between the two peaks is integrated adaptively. Each tail is
/// mapped onto `[0, 1]` exactly: with `y = 1/(1+u)` and `w = y^{p+q-1}` the
/// outer tail becomes `(1/e) ∫₀¹ dw / (1 + d·w^{1/e})^{q'}` where `d = |α - β|`,
/// `e = p + q - 1` and `q'` is the exponent of the far peak.
pub fn calculus_bound_tol(p: f64, q: f64, alpha: f64, beta: f64, tol: f64) -> Result<CalculusBound> {
    if !(p > 0.0 && q > 0.0) || !(p + q > 1.0) {
        return Err(Error::Domain(format!("need p, q > 0 and p + q > 1, got p = {p}, q = {q}")));
    }
    // translate so the lower peak sits at 0; exponents follow their peaks
    let (d, p_lo, p_hi) = if alpha <= beta { (beta - alpha, p, q) } else { (alpha - beta, q, p) };
    let e = p + q - 1.0;
    let tail = |far: f64| {
        integrate(|w| (1.0 + d * w.powf(1.0 / e)).powf(-far), 0.0, 1.0, tol * e / 4.0, 50)
    };
    let right = tail(p_lo);
    let left = tail(p_hi);
    let middle = integrate(
        |x| bracket(x).powf(-p_lo) * bracket(d - x).powf(-p_hi),
        0.0,
        d,
        tol / 2.0,
        60,
    );
    let integral = (right.value + left.value) / e + middle.value;
    let r = calculus_exponent(p, q);
    let scale = bracket(d).powf(r);
    Ok(CalculusBound {
        normalized: scale * integral,
        integral,
        r,
        error: scale * ((right.error + left.error) / e + middle.error),
    })
}

pub fn calculus_bound(p: f64, q: f64, alpha: f64, beta: f64) -> Result<CalculusBound> {
    calculus_bound_tol(p, q, alpha, beta, 1e-10)
}

/// `Σ_{n₁ ∈ [lo, hi]} 1/(1 + |τ ± n₁(n - n₁)|)^γ`.
pub fn quadratic_sum_range(gamma_exp: f64, n: i64, tau: f64, sign: i8, lo: i64, hi: i64) -> Result<f64> {
    if !(gamma_exp > 0.5) {
        return Err(Error::Domain(format!("quadratic sum needs gamma > 1/2, got {gamma_exp}")));
    }
    let sg = if sign >= 0 { 1.0 } else { -1.0 };
    Ok((lo..=hi)
        .map(|n1| {
            let prod = (n1 as f64) * ((n - n1) as f64);
            bracket(tau + sg * prod).powf(-gamma_exp)
        })
        .sum())
}

/// Truncation of the sum to `|n₁| ≤ n1_bound`.
pub fn quadratic_sum(gamma_exp: f64, n: i64, tau: f64, sign: i8, n1_bound: i64) -> Result<f64> {
    quadratic_sum_range(gamma_exp, n, tau, sign, -n1_bound, n1_bound)
}

/// Both sides of the progression inequality, with the left side under three
/// readings of the set `H = {α ± k : |α ± k| ≤ β}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProgressionSum {
    /// `H` as a set: every `h ∈ α + ℤ` with `|h| ≤ β` once.
    pub lhs: f64,
    /// `k ≥ 0` in both branches: `h = α` is hit twice.
    pub lhs_branch_double: f64,
    /// `k ∈ ℤ` in both branches: every point counted twice.
    pub lhs_full_double: f64,
    pub rhs: f64,
    pub points: usize,
}

pub fn progression_sum(a_exp: f64, alpha: f64, beta: f64, nu: f64) -> Result<ProgressionSum> {
    if !(a_exp > 0.0 && a_exp < 0.5) {
        return Err(Error::Domain(format!("need 0 < a < 1/2, got {a_exp}")));
    }
    if !(beta > 0.0 && nu > 0.0) {
        return Err(Error::Domain(format!("need beta, nu > 0, got beta = {beta}, nu = {nu}")));
    }
    let term = |h: f64| (nu + h.abs()).powf(-2.0 * a_exp);
    let lo = (-beta - alpha).ceil() as i64;
    let hi = (beta - alpha).floor() as i64;
    let (lhs, points) = (lo..=hi)
        .map(|k| alpha + k as f64)
        .filter(|h| h.abs() <= beta)
        .fold((0.0, 0usize), |(s, c), h| (s + term(h), c + 1));
    let extra = if alpha.abs() <= beta { term(alpha) } else { 0.0 };
    let e = 1.0 - 2.0 * a_exp;
    let integral = ((nu + beta).powf(e) - nu.powf(e)) / e;
    Ok(ProgressionSum {
        lhs,
        lhs_branch_double: lhs + extra,
        lhs_full_double: 2.0 * lhs,
        rhs: 2.0 * (2.0 * nu.powf(-2.0 * a_exp) + integral),
        points,
    })
}

/// `(1 + |x - y|) / (1 + |x - √(y² + y)|)` for `x, y ≥ 0`.
pub fn weight_equivalence(x: f64, y: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0) {
        return Err(Error::Domain(format!("weight ratio needs x, y >= 0, got ({x}, {y})")));
    }
    Ok(bracket(x - y) / bracket(x - (y * y + y).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaId {
    CalculusBound,
    QuadraticSum,
    WeightEquivalence,
    ProgressionSum,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub lemma: LemmaId,
    pub tuples_tested: usize,
    pub empirical_sup: f64,
    pub refined_sup: f64,
    pub relative_change: f64,
    /// Whether the lemma's qualitative claim held on every tuple.
    pub claim_holds: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub pass: bool,
}

impl LemmaReport {
    fn new(lemma: LemmaId, tuples: usize, sup: f64, refined: f64, claim_holds: bool, diagnostics: Vec<Diagnostic>) -> Self {
        let relative_change = relative_change(sup, refined);
        LemmaReport {
            lemma,
            tuples_tested: tuples,
            empirical_sup: sup,
            refined_sup: refined,
            relative_change,
            claim_holds,
            diagnostics,
            pass: claim_holds && sup.is_finite() && relative_change < STABILITY_TOL,
        }
    }
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (b - a).abs() / a.abs().max(b.abs())
    }
}

fn diag(name: impl Into<String>, value: f64) -> Diagnostic {
    Diagnostic { name: name.into(), value }
}

/// Parameters of the lemma suite; the defaults are the acceptance settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaSuiteConfig {
    pub seed: u64,
    /// `(p, q)` pairs for the calculus bound.
    pub calculus_pairs: Vec<(f64, f64)>,
    /// Largest `|α - β|` sampled.
    pub calculus_max_distance: f64,
    /// Number of distances sampled before refinement.
    pub calculus_points: usize,
    pub quadratic_gammas: Vec<f64>,
    pub quadratic_samples: usize,
    pub quadratic_max_mode: i64,
    pub quadratic_max_tau: f64,
    pub quadratic_n1_bound: i64,
    pub weight_samples: usize,
    pub weight_max: f64,
    pub progression_samples: usize,
}

impl Default for LemmaSuiteConfig {
    fn default() -> Self {
        LemmaSuiteConfig {
            seed: 0,
            calculus_pairs: vec![(0.6, 0.6), (1.2, 0.8), (1.0, 1.0)],
            calculus_max_distance: 1e3,
            calculus_points: 64,
            quadratic_gammas: vec![0.6, 1.0],
            quadratic_samples: 100,
            quadratic_max_mode: 64,
            quadratic_max_tau: 4096.0,
            quadratic_n1_bound: 16384,
            weight_samples: 100_000,
            weight_max: 1e6,
            progression_samples: 10_000,
        }
    }
}

/// Distances `0` and `D·(k/K)³`, `k = 1..K`; doubling `K` keeps every old point.
fn calculus_distances(max: f64, points: usize) -> Vec<f64> {
    let k = points.max(1);
    std::iter::once(0.0)
        .chain((1..=k).map(|i| max * (i as f64 / k as f64).powi(3)))
        .collect()
}

pub fn verify_calculus_bound(cfg: &LemmaSuiteConfig) -> Result<LemmaReport> {
    let sup_over = |p: f64, q: f64, points: usize, tol: f64| -> Result<f64> {
        calculus_distances(cfg.calculus_max_distance, points)
            .par_iter()
            .map(|&d| calculus_bound_tol(p, q, 0.0, d, tol).map(|c| c.normalized))
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
    };
    let mut diagnostics = Vec::new();
    let mut sup: f64 = 0.0;
    let mut refined: f64 = 0.0;
    let mut worst_change: f64 = 0.0;
    for &(p, q) in &cfg.calculus_pairs {
        let coarse = sup_over(p, q, cfg.calculus_points, 1e-8)?;
        let fine = sup_over(p, q, 2 * cfg.calculus_points, 1e-10)?;
        worst_change = worst_change.max(relative_change(coarse, fine));
        diagnostics.push(diag(format!("sup_p{p}_q{q}"), fine));
        sup = sup.max(coarse);
        refined = refined.max(fine);
    }
    let unit = calculus_bound(1.0, 1.0, 0.0, 0.0)?.normalized;
    diagnostics.push(diag("equal_peaks_p1_q1", unit));
    diagnostics.push(diag("worst_pair_change", worst_change));
    let tuples = cfg.calculus_pairs.len() * (3 * cfg.calculus_points + 2);
    let mut report = LemmaReport::new(LemmaId::CalculusBound, tuples, sup, refined, (unit - 2.0).abs() < 1e-6, diagnostics);
    report.relative_change = worst_change;
    report.pass = report.claim_holds && sup.is_finite() && worst_change < STABILITY_TOL;
    Ok(report)
}

pub fn verify_quadratic_sum(cfg: &LemmaSuiteConfig) -> Result<LemmaReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples: Vec<(i64, f64, i8)> = (0..cfg.quadratic_samples)
        .map(|_| {
            let n = rng.gen_range(-cfg.quadratic_max_mode..=cfg.quadratic_max_mode);
            let tau = rng.gen_range(-cfg.quadratic_max_tau..=cfg.quadratic_max_tau);
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            (n, tau, sign)
        })
        .collect();
    let mut diagnostics = Vec::new();
    let mut sup: f64 = 0.0;
    let mut refined: f64 = 0.0;
    let mut worst_change: f64 = 0.0;
    for &g in &cfg.quadratic_gammas {
        let sup_at = |bound: i64| -> Result<f64> {
            samples
                .par_iter()
                .map(|&(n, tau, sign)| quadratic_sum(g, n, tau, sign, bound))
                .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
        };
        let coarse = sup_at(cfg.quadratic_n1_bound)?;
        let fine = sup_at(2 * cfg.quadratic_n1_bound)?;
        worst_change = worst_change.max(relative_change(coarse, fine));
        diagnostics.push(diag(format!("sup_gamma{g}"), fine));
        sup = sup.max(coarse);
        refined = refined.max(fine);
    }
    let series = quadratic_sum(1.0, 0, 0.0, 1, cfg.quadratic_n1_bound)?;
    let target = std::f64::consts::PI / std::f64::consts::PI.tanh();
    diagnostics.push(diag("origin_series_gamma1", series));
    diagnostics.push(diag("origin_series_error", (series - target).abs()));
    diagnostics.push(diag("worst_gamma_change", worst_change));
    let mut report = LemmaReport::new(
        LemmaId::QuadraticSum,
        samples.len() * cfg.quadratic_gammas.len(),
        sup,
        refined,
        (series - target).abs() < 1e-3,
        diagnostics,
    );
    report.relative_change = worst_change;
    report.pass = report.claim_holds && sup.is_finite() && worst_change < STABILITY_TOL;
    Ok(report)
}

fn weight_extremes(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    pairs
        .par_iter()
        .map(|&(x, y)| weight_equivalence(x, y).map(|r| (r, r)))
        .try_reduce(|| (f64::INFINITY, 0.0), |a, b| Ok((a.0.min(b.0), a.1.max(b.1))))
}

/// Uniform samples of `[0, max]²` plus points on the two curves where the
/// ratio is extremal (`x = y` and `x = √(y² + y)`).
fn weight_samples(rng: &mut ChaCha8Rng, count: usize, max: f64) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = (0..count)
        .map(|_| (rng.gen_range(0.0..=max), rng.gen_range(0.0..=max)))
        .collect();
    for _ in 0..count / 10 {
        let y: f64 = rng.gen_range(0.0..=max);
        v.push((y, y));
        v.push(((y * y + y).sqrt(), y));
    }
    v
}

pub fn verify_weight_equivalence(cfg: &LemmaSuiteConfig) -> Result<LemmaReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let first = weight_samples(&mut rng, cfg.weight_samples, cfg.weight_max);
    let second = weight_samples(&mut rng, cfg.weight_samples, cfg.weight_max);
    let (lo1, hi1) = weight_extremes(&first)?;
    let (lo2, hi2) = weight_extremes(&second)?;
    let (lo, hi) = (lo1.min(lo2), hi1.max(hi2));
    let holds = lo >= 2.0 / 3.0 && hi <= 1.5;
    Ok(LemmaReport::new(
        LemmaId::WeightEquivalence,
        first.len() + second.len(),
        hi1,
        hi1.max(hi2),
        holds,
        vec![diag("min_ratio", lo), diag("max_ratio", hi)],
    ))
}

fn progression_tuples(rng: &mut ChaCha8Rng, count: usize) -> Vec<(f64, f64, f64, f64)> {
    (0..count)
        .map(|_| {
            let a = rng.gen_range(0.01..0.49);
            let alpha = rng.gen_range(-10.0..10.0);
            let beta = rng.gen_range(0.01..50.0);
            let nu = rng.gen_range(0.01..10.0);
            (a, alpha, beta, nu)
        })
        .collect()
}

/// `(max lhs/rhs, violations, branch-double violations, full-double violations)`.
fn progression_stats(tuples: &[(f64, f64, f64, f64)]) -> Result<(f64, usize, usize, usize)> {
    tuples
        .par_iter()
        .map(|&(a, alpha, beta, nu)| {
            let p = progression_sum(a, alpha, beta, nu)?;
            Ok((
                p.lhs / p.rhs,
                (p.lhs > p.rhs) as usize,
                (p.lhs_branch_double > p.rhs) as usize,
                (p.lhs_full_double > p.rhs) as usize,
            ))
        })
        .try_reduce(|| (0.0, 0, 0, 0), |x, y| Ok((x.0.max(y.0), x.1 + y.1, x.2 + y.2, x.3 + y.3)))
}

pub fn verify_progression_sum(cfg: &LemmaSuiteConfig) -> Result<LemmaReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xa11ce);
    let first = progression_tuples(&mut rng, cfg.progression_samples);
    let second = progression_tuples(&mut rng, cfg.progression_samples);
    let a = progression_stats(&first)?;
    let b = progression_stats(&second)?;
    Ok(LemmaReport::new(
        LemmaId::ProgressionSum,
        first.len() + second.len(),
        a.0,
        a.0.max(b.0),
        a.1 + b.1 == 0,
        vec![
            diag("violations", (a.1 + b.1) as f64),
            diag("violations_branch_double", (a.2 + b.2) as f64),
            diag("violations_full_double", (a.3 + b.3) as f64),
        ],
    ))
}

/// All four lemma reports, in a fixed order.
pub fn verify_all(cfg: &LemmaSuiteConfig) -> Result<Vec<LemmaReport>> {
    Ok(vec![
        verify_calculus_bound(cfg)?,
        verify_quadratic_sum(cfg)?,
        verify_weight_equivalence(cfg)?,
        verify_progression_sum(cfg)?,
    ])
}
