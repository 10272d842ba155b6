//! Log–log rate estimates.

use anyhow::bail;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Slope {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (0 for exactly two points).
    pub stderr: f64,
    pub points: usize,
}

/// Least-squares fit of `ln y = slope·ln x + intercept`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> anyhow::Result<Slope> {
    if xs.len() != ys.len() {
        bail!("length mismatch: {} vs {}", xs.len(), ys.len());
    }
    if xs.len() < 3 {
        bail!("need at least 3 points for a rate, got {}", xs.len());
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        bail!("log-log fit needs positive finite data");
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        bail!("all abscissae coincide");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(Slope { slope, intercept, stderr, points: xs.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_power_law() {
        let xs = [0.1, 0.05, 0.025, 0.0125];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 7.0 * x.powi(3)).collect();
        let s = loglog_fit(&xs, &ys).unwrap();
        assert_abs_diff_eq!(s.slope, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.intercept, 7f64.ln(), epsilon = 1e-12);
        assert!(s.stderr < 1e-12);
    }

    #[test]
    fn noisy_data_has_error_bar() {
        let xs = [0.1, 0.05, 0.025];
        let s = loglog_fit(&xs, &[1e-2, 3e-3, 6e-4]).unwrap();
        assert!(s.stderr > 0.0);
    }

    #[test]
    fn rejects_short_or_bad_input() {
        assert!(loglog_fit(&[0.1, 0.05], &[1.0, 0.5]).is_err());
        assert!(loglog_fit(&[0.1, 0.05, 0.0], &[1.0, 0.5, 0.2]).is_err());
    }
}
