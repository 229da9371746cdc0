//! Small statistics helpers: log-log slopes, grid checks, Wilson intervals.

use crate::error::{Error, Result};

/// Ordinary least-squares fit `y = slope * x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::input("least squares needs at least two paired points"));
    }
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::input("least squares needs distinct x values"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Slope of `log y` against `log n`. Zero counts are rejected since their
/// logarithm is undefined.
pub fn log_log_slope(ns: &[u32], ys: &[f64]) -> Result<f64> {
    if ys.iter().any(|&y| y <= 0.0) {
        return Err(Error::input("log-log fit needs positive values"));
    }
    let lx: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    Ok(least_squares(&lx, &ly)?.0)
}

/// An audit grid needs at least three distinct positive points spanning a
/// factor of four.
pub fn validate_grid(grid: &[u32]) -> Result<()> {
    let mut sorted = grid.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() < 3 {
        return Err(Error::input("grid needs at least three distinct points"));
    }
    if sorted[0] == 0 {
        return Err(Error::input("grid points must be positive"));
    }
    if (*sorted.last().unwrap() as u64) < 4 * sorted[0] as u64 {
        return Err(Error::input("grid must span at least a factor of 4"));
    }
    Ok(())
}

/// Two-sided 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let t = trials as f64;
    let phat = successes as f64 / t;
    let z2 = z * z;
    let denom = 1.0 + z2 / t;
    let centre = (phat + z2 / (2.0 * t)) / denom;
    let half = z * (phat * (1.0 - phat) / t + z2 / (4.0 * t * t)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let ns = [100, 200, 400];
        let ys: Vec<f64> = ns.iter().map(|&n| 3.0 * (n as f64).powi(2)).collect();
        assert!((log_log_slope(&ns, &ys).unwrap() - 2.0).abs() < 1e-12);
        assert!(log_log_slope(&ns, &[1.0, 0.0, 2.0]).is_err());
    }

    #[test]
    fn grids() {
        assert!(validate_grid(&[100, 200, 400]).is_ok());
        assert!(validate_grid(&[100, 200]).is_err());
        assert!(validate_grid(&[100, 150, 200]).is_err());
        assert!(validate_grid(&[0, 2, 8]).is_err());
    }

    #[test]
    fn wilson_known_values() {
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.27753).abs() < 1e-4);
        let (lo, hi) = wilson_interval(5, 10);
        assert!((lo - 0.23659).abs() < 1e-4 && (hi - 0.76341).abs() < 1e-4);
        let (lo, hi) = wilson_interval(10, 10);
        assert!((lo - 0.72247).abs() < 1e-4);
        assert_eq!(hi, 1.0);
    }
}
