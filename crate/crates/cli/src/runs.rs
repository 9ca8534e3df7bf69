//! One function per subcommand. Each writes its tables and summary and returns the summary.

use std::path::Path;
use std::result::Result;
use std::time::Instant;

use boussinesq_core::bilinear::{counterexample_grid, SampleBox, GROWTH_THRESHOLD};
use boussinesq_core::families::{random_real_field, random_spacetime_field, windowed_source};
use boussinesq_core::fit::{log_log_slope, median};
use boussinesq_core::lemmas::STABILITY_TOL;
use boussinesq_core::spectral::inverse_transform;
use boussinesq_core::*;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{DataConfig, ExperimentConfig};
use crate::error::CliError;
use crate::output::{Cell, Check, RunSummary, RunWriter, Status};
use crate::row;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Linear,
    ProbeBilinear,
    Sharpness,
    Lemmas,
    Norms,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Linear => "linear",
            Command::ProbeBilinear => "probe-bilinear",
            Command::Sharpness => "sharpness",
            Command::Lemmas => "lemmas",
            Command::Norms => "norms",
        }
    }
}

pub fn run(cmd: Command, cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let grid = cfg.grid()?;
    let mut w = RunWriter::new(out, cmd.name(), cfg, &grid)?;
    let status = match cmd {
        Command::Solve => solve(cfg, &grid, &mut w)?,
        Command::Linear => linear(cfg, &grid, &mut w)?,
        Command::ProbeBilinear => probe_bilinear(cfg, &grid, &mut w)?,
        Command::Sharpness => sharpness(cfg, &mut w)?,
        Command::Lemmas => lemmas(cfg, &mut w)?,
        Command::Norms => norms(cfg, &grid, &mut w)?,
    };
    let elapsed = cfg.output.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    w.finish(cfg, status, elapsed)
}

pub fn run_solve(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    run(Command::Solve, cfg, out)
}

pub fn run_linear(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    run(Command::Linear, cfg, out)
}

pub fn run_probe_bilinear(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    run(Command::ProbeBilinear, cfg, out)
}

pub fn run_sharpness(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    run(Command::Sharpness, cfg, out)
}

pub fn run_lemmas(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    run(Command::Lemmas, cfg, out)
}

pub fn run_norms(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    run(Command::Norms, cfg, out)
}

/// `(φ, ψ)` from the data table; random data draw from the run seed.
pub fn initial_data(cfg: &ExperimentConfig, grid: &GridSpec) -> Result<(SpectralField, SpectralField), CliError> {
    Ok(match &cfg.data {
        DataConfig::Trig { phi_cos, phi_sin, psi_cos, psi_sin } => (
            SpectralField::trig(grid, phi_cos, phi_sin)?,
            SpectralField::trig(grid, psi_cos, psi_sin)?,
        ),
        DataConfig::Random { band, amplitude, decay } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut draw = || {
                random_real_field(grid, *band, *amplitude, &mut rng)
                    .map_modes(|n, c| c * bracket(n as f64).powf(-decay))
            };
            let phi = draw();
            (phi, draw())
        }
    })
}

fn solve(cfg: &ExperimentConfig, grid: &GridSpec, w: &mut RunWriter) -> Result<Status, CliError> {
    let (phi, psi) = initial_data(cfg, grid)?;
    let t_final = grid.t_final();
    let (traj, hist) = match picard_solve(&phi, &psi, t_final, &cfg.solve.picard()) {
        Ok(ok) => ok,
        Err(Error::NonConvergence(hist)) => {
            history_table(w, &hist)?;
            w.result("converged", false);
            w.result("iterations", hist.iterations());
            w.result("last_increment", finite_or_none(hist.last_increment()));
            return Ok(Status::NonConvergence);
        }
        Err(e) => return Err(e.into()),
    };
    history_table(w, &hist)?;

    let reference = reference_timestep(&phi, &psi, t_final, cfg.solve.reference_dt, cfg.solve.nonlinearity)?;
    let deviations: Vec<(f64, f64)> = (0..traj.len())
        .filter_map(|k| {
            let t = traj.time(k);
            reference.at(t).map(|r| (t, (traj.state(k) - r).sup_norm()))
        })
        .collect();
    w.table("deviation", &["t", "sup_abs_deviation"], deviations.iter().map(|(t, d)| row![t, d]))?;

    let count = cfg.solve.snapshots.clamp(1, traj.len());
    let mut picks: Vec<usize> = (0..count)
        .map(|i| if count == 1 { traj.len() - 1 } else { i * (traj.len() - 1) / (count - 1) })
        .collect();
    picks.dedup();
    let xs = grid.x_points();
    let mut rows = Vec::new();
    for &k in &picks {
        let values = inverse_transform(traj.state(k));
        for (x, u) in xs.iter().zip(values) {
            rows.push(row![traj.time(k), x, u.re]);
        }
    }
    w.table("snapshots", &["t", "x", "u"], rows)?;

    let max_dev = deviations.iter().map(|d| d.1).fold(0.0, f64::max);
    let max_u = traj.states().iter().map(|s| s.sup_norm()).fold(0.0, f64::max);
    let factors = hist.contraction_factors();
    let worst = factors.iter().cloned().fold(0.0, f64::max);
    w.result("converged", true);
    w.result("iterations", hist.iterations());
    w.result("last_increment", hist.last_increment());
    w.result("max_deviation", max_dev);
    w.result("max_abs_u", max_u);
    w.result("worst_contraction", worst);
    let tol = cfg.solve.deviation_tol;
    w.check(Check::new("reference_deviation", max_dev, format!("<= {tol:e}"), max_dev <= tol));
    w.check(Check::new("contraction", worst, "< 1", worst < 1.0));
    Ok(Status::Ok)
}

fn history_table(w: &mut RunWriter, hist: &PicardHistory) -> Result<(), CliError> {
    let factors = hist.contraction_factors();
    let rows = hist.increments.iter().enumerate().map(|(i, inc)| {
        let f = if i == 0 { String::new() } else { factors.get(i - 1).map(Cell::cell).unwrap_or_default() };
        row![i + 1, inc, f]
    });
    w.table("history", &["iteration", "increment", "contraction"], rows)
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn spread(values: &[f64]) -> f64 {
    values.iter().cloned().fold(0.0, f64::max) / median(values)
}

fn linear(cfg: &ExperimentConfig, grid: &GridSpec, w: &mut RunWriter) -> Result<Status, CliError> {
    let p = &cfg.params;
    let band = cfg.sweep.random_band;
    let ratios = (0..cfg.sweep.linear_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i));
            let phi = random_real_field(grid, band, 1.0, &mut rng);
            let psi = random_real_field(grid, band, 1.0, &mut rng);
            linear_estimate_probe(&phi, &psi, p.s, p.b)
        })
        .collect::<Result<Vec<f64>, Error>>()?;
    w.table(
        "probe",
        &["sample", "seed", "ratio"],
        ratios.iter().enumerate().map(|(i, r)| row![i, cfg.seed.wrapping_add(i as u64), r]),
    )?;
    let spread_value = spread(&ratios);
    w.result("linear_max_over_median", spread_value);
    w.check(Check::new(
        "linear_ratio_spread",
        spread_value,
        format!("max/median < {}", cfg.sweep.spread_tol),
        spread_value < cfg.sweep.spread_tol,
    ));

    let (phi, psi) = initial_data(cfg, grid)?;
    let base = phi.map_modes(|n, c| if n == 0 { Complex64::new(0.0, 0.0) } else { c });
    let source = windowed_source(&base)?;
    let ts = &cfg.sweep.t_values;
    let duhamel = ts
        .iter()
        .map(|&t| duhamel_estimate_probe(&source, p.s, p.b, p.b_prime, t))
        .collect::<Result<Vec<f64>, Error>>()?;
    w.table("duhamel", &["T", "ratio"], ts.iter().zip(&duhamel).map(|(t, r)| row![t, r]))?;
    let slope = log_log_slope(ts, &duhamel)?;
    w.result("duhamel_t_slope", slope);
    let floor = cfg.sweep.t_slope_tol;
    w.check(Check::new("duhamel_t_slope", slope, format!(">= {floor}"), slope >= floor));

    let sol = LinearSolution::new(phi, psi);
    let steps = [1e-2, 5e-3, 2.5e-3];
    let residuals: Vec<f64> = steps.iter().map(|&h| linear_residual(&sol, grid.t_final(), h)).collect();
    let orders: Vec<f64> = residuals.windows(2).map(|r| (r[0] / r[1]).log2()).collect();
    let rows = steps.iter().zip(&residuals).enumerate().map(|(i, (h, r))| {
        let order = if i == 0 { String::new() } else { orders[i - 1].cell() };
        row![h, r, order]
    });
    w.table("residual", &["dt_fd", "residual", "observed_order"], rows)?;
    if residuals.iter().all(|&r| r > 0.0) {
        let worst = orders.iter().map(|o| (o - 2.0).abs()).fold(0.0, f64::max);
        w.check(Check::new("residual_order", worst, "|order - 2| < 0.1", worst < 0.1));
    }
    Ok(Status::Ok)
}

fn probe_bilinear(cfg: &ExperimentConfig, grid: &GridSpec, w: &mut RunWriter) -> Result<Status, CliError> {
    let p = cfg.xsb_params();
    let sweep = &cfg.sweep;
    let ratios = random_ratio_sweep(&p, grid, sweep.random_band, sweep.random_fields, cfg.seed)?;
    w.table(
        "random",
        &["sample", "seed", "ratio"],
        ratios.iter().enumerate().map(|(i, r)| row![i, cfg.seed.wrapping_add(i as u64), r]),
    )?;
    let spread_value = spread(&ratios);
    w.result("admissibility", p.classify());
    w.result("random_max_over_median", spread_value);
    if p.is_admissible() {
        w.check(Check::new(
            "random_ratio_spread",
            spread_value,
            format!("max/median < {}", sweep.spread_tol),
            spread_value < sweep.spread_tol,
        ));
    }

    let mut rows = Vec::new();
    for kind in SupKind::ALL {
        let name = format!("{kind:?}");
        match sup_stability(kind, &p, &sweep.sup_box) {
            Ok((coarse, fine)) => {
                let change = (fine.value - coarse.value).abs() / fine.value.max(f64::MIN_POSITIVE);
                rows.push(row![name, "ok", coarse.value, fine.value, change, fine.argmax_mode, fine.argmax_tau, fine.samples]);
                w.check(Check::new(
                    &format!("sup_{name}_stable"),
                    change,
                    format!("relative change under box doubling < {STABILITY_TOL}"),
                    fine.value.is_finite() && change < STABILITY_TOL,
                ));
            }
            Err(Error::Domain(_)) => rows.push(row![name, "hypotheses_fail", "", "", "", "", "", ""]),
            Err(e) => return Err(e.into()),
        }
    }
    w.table(
        "sup",
        &["kind", "status", "value", "value_doubled_box", "relative_change", "argmax_mode", "argmax_tau", "samples"],
        rows,
    )?;
    Ok(Status::Ok)
}

fn sup_stability(kind: SupKind, p: &XsbParams, bx: &SampleBox) -> Result<(SupEstimate, SupEstimate), Error> {
    Ok((sup_estimator(kind, p, bx)?, sup_estimator(kind, p, &bx.doubled())?))
}

fn sharpness(cfg: &ExperimentConfig, w: &mut RunWriter) -> Result<Status, CliError> {
    let p = cfg.xsb_params();
    let report = sharpness_sweep(&p, &cfg.sweep.n_values)?;
    let mut rows = Vec::new();
    for (&n, r) in report.n_values.iter().zip(&report.ratios) {
        let g = counterexample_grid(n)?;
        rows.push(row![n, r, g.num_modes(), g.tau_max(), g.tau_points()]);
    }
    w.table("ratios", &["N", "ratio", "num_modes", "tau_max", "tau_points"], rows)?;
    w.result("slope", report.slope);
    w.result("predicted_slope", report.predicted_slope);
    w.result("verdict", report.verdict);
    w.result("growth_threshold", GROWTH_THRESHOLD);
    w.result("admissibility", p.classify());
    let gap = (report.slope - report.predicted_slope).abs();
    w.check(Check::new("slope_matches_prediction", gap, "|slope - (-2s - a)| <= 0.1", gap <= 0.1));
    let consistent = (report.verdict == Verdict::Bounded) == p.is_admissible();
    w.check(Check::new(
        "verdict_matches_admissibility",
        report.slope,
        format!("growing iff slope > {GROWTH_THRESHOLD}"),
        consistent,
    ));
    Ok(Status::Ok)
}

fn lemmas(cfg: &ExperimentConfig, w: &mut RunWriter) -> Result<Status, CliError> {
    let reports = verify_all(&cfg.lemmas)?;
    let rows = reports.iter().map(|r| {
        row![
            lemma_name(r.lemma),
            r.tuples_tested,
            r.empirical_sup,
            r.refined_sup,
            r.relative_change,
            r.claim_holds,
            r.pass
        ]
    });
    w.table(
        "reports",
        &["lemma", "tuples_tested", "empirical_sup", "refined_sup", "relative_change", "claim_holds", "pass"],
        rows,
    )?;
    let diag = reports
        .iter()
        .flat_map(|r| r.diagnostics.iter().map(move |d| row![lemma_name(r.lemma), d.name, d.value]));
    w.table("diagnostics", &["lemma", "name", "value"], diag)?;
    for r in &reports {
        w.check(Check::new(
            lemma_name(r.lemma),
            r.relative_change,
            format!("claim holds and refinement change < {STABILITY_TOL}"),
            r.pass,
        ));
    }
    w.result("all_pass", reports.iter().all(|r| r.pass));
    Ok(Status::Ok)
}

fn lemma_name(id: LemmaId) -> &'static str {
    match id {
        LemmaId::CalculusBound => "calculus_bound",
        LemmaId::QuadraticSum => "quadratic_sum",
        LemmaId::WeightEquivalence => "weight_equivalence",
        LemmaId::ProgressionSum => "progression_sum",
    }
}

fn norms(cfg: &ExperimentConfig, grid: &GridSpec, w: &mut RunWriter) -> Result<Status, CliError> {
    let nc = &cfg.norms;
    let fields: Vec<SpaceTimeField> = (0..nc.samples as u64)
        .into_par_iter()
        .map(|i| random_spacetime_field(grid, nc.band, nc.decay, &mut ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i))))
        .collect();
    let mut rows = Vec::new();
    let mut within = true;
    let mut worst = 0.0f64;
    for (i, f) in fields.iter().enumerate() {
        for &s in &nc.s_values {
            for &b in &nc.b_values {
                let ratio = norm_equivalence_ratio(f, s, b)?;
                let upper = 1.5f64.powf(b.abs());
                let lower = 1.0 / upper;
                let ok = lower * (1.0 - 1e-12) <= ratio && ratio <= upper * (1.0 + 1e-12);
                within &= ok;
                worst = worst.max(ratio.ln().abs() / upper.ln().max(f64::MIN_POSITIVE));
                rows.push(row![
                    i,
                    s,
                    b,
                    xsb_norm(f, s, b, Weight::Boussinesq),
                    xsb_norm(f, s, b, Weight::Schrodinger),
                    ratio,
                    lower,
                    upper,
                    ok
                ]);
            }
        }
    }
    w.table(
        "equivalence",
        &["sample", "s", "b", "norm_boussinesq", "norm_schrodinger", "ratio", "lower", "upper", "within"],
        rows,
    )?;
    w.result("worst_log_ratio_fraction", worst);
    w.check(Check::new("norm_equivalence", worst, "ratio within [(2/3)^|b|, (3/2)^|b|]", within));
    Ok(Status::Ok)
}
