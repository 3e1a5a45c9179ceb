use crate::{Error, Result};

/// Ordinary least-squares line fit over a window.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual of the fit on the transformed axes.
    pub rms_residual: f64,
    /// The window actually used.
    pub window: (f64, f64),
    pub points: usize,
}

/// Fit `y ≈ slope·x + intercept` over the points with `x` in `window`.
/// Needs at least 3 points; constant `x` is rejected as degenerate.
pub fn fit_line(xs: &[f64], ys: &[f64], window: (f64, f64)) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension(
            "fit_line needs equally many x and y values".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x >= window.0 && **x <= window.1 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (*x, *y))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "fit window [{}, {}] holds {} points, need at least 3",
            window.0,
            window.1,
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx <= 1e-300 {
        return Err(Error::InvalidArgument(
            "degenerate fit: x values are constant".into(),
        ));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1 - slope * p.0 - intercept;
            r * r
        })
        .sum();
    Ok(FitResult {
        slope,
        intercept,
        rms_residual: (ss / n).sqrt(),
        window,
        points: pts.len(),
    })
}
