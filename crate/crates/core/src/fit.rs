//! Least-squares line fits used for growth-rate diagnostics.

use crate::error::{Error, Result};

/// Slope and intercept of the least-squares line through `(xs, ys)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::Shape(format!("{} abscissae for {} values", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::Domain("a line fit needs at least two points".into()));
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("abscissae are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Slope of `log y` against `log x`; all values must be positive.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    Ok(linear_fit(&lx, &ly)?.0)
}

/// Median of a non-empty slice (mean of the two middle values for even length).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}
