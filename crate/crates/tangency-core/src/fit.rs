//! Ordinary least squares in one variable, used for all log-log slope fits.

use crate::error::CoreError;
use crate::Result;

/// Slope and intercept of the least-squares line through `(x_i, y_i)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(CoreError::invalid(
            "need at least two points for a line fit",
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(CoreError::Numeric(
            "degenerate fit: all abscissae equal".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
