//! Shared numerical primitives: Gauss-Legendre rules, deterministic
//! pairwise summation, and log-log least-squares fits.

use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on (-1, 1).
///
/// Newton iteration on the Legendre polynomial; nodes are symmetric and
/// strictly interior.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss-Legendre rule mapped to (0, 1).
pub fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|v| 0.5 * v).collect(),
    )
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Deterministic pairwise summation; the reduction tree depends only on the
/// slice length, never on thread schedule.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise summation for complex terms.
pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 32 {
        let mut s = Complex64::new(0.0, 0.0);
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
}

/// Relative error |a - b| / max(|b|, tiny).
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Relative error for complex values.
pub fn rel_err_complex(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Result of an ordinary least-squares fit of log y against log x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    /// Fitted slope, i.e. the exponent of the power law y ~ x^slope.
    pub exponent: f64,
    /// Fitted intercept in log space.
    pub intercept: f64,
    /// Coefficient of determination of the fit.
    pub r_squared: f64,
    /// Number of samples that entered the fit.
    pub n_used: usize,
}

/// Least-squares power-law fit through positive samples `(x_i, y_i)`.
///
/// Returns `None` when fewer than two samples are given or the abscissas
/// are degenerate.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Option<LogLogFit> {
    assert_eq!(xs.len(), ys.len());
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys.iter())
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Some(LogLogFit {
        exponent: slope,
        intercept,
        r_squared,
        n_used: pts.len(),
    })
}

/// Format a float with 17 significant digits, enough to round-trip f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        // degree up to 15 exact
        for deg in 0..=15u32 {
            let got: f64 = x
                .iter()
                .zip(&w)
                .map(|(xi, wi)| wi * xi.powi(deg as i32))
                .sum();
            let want = if deg % 2 == 0 {
                2.0 / (deg as f64 + 1.0)
            } else {
                0.0
            };
            assert!((got - want).abs() < 1e-13, "deg {deg}: {got} vs {want}");
        }
    }

    #[test]
    fn gauss_legendre_01_weights_sum_to_one() {
        for n in [4, 17, 40, 80] {
            let (x, w) = gauss_legendre_01(n);
            let s: f64 = w.iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
            assert!(x.iter().all(|&t| t > 0.0 && t < 1.0));
        }
    }

    #[test]
    fn pairwise_sum_matches_naive_on_smooth_data() {
        let xs: Vec<f64> = (0..10_000).map(|i| ((i * 37) % 101) as f64 * 1e-3).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }

    #[test]
    fn log_log_fit_recovers_pure_power_laws() {
        for gamma in [0.25, 0.5, 1.0] {
            let xs: Vec<f64> = (0..10).map(|k| 1e-4 * 2f64.powi(k)).collect();
            let ys: Vec<f64> = xs.iter().map(|x| 3.7 * x.powf(gamma)).collect();
            let fit = log_log_fit(&xs, &ys).unwrap();
            assert!((fit.exponent - gamma).abs() < 1e-6);
            assert!(fit.r_squared > 1.0 - 1e-9);
        }
    }

    #[test]
    fn fmt_f64_round_trips() {
        for &x in &[std::f64::consts::PI, 1.0 / 3.0, 2e-300, -0.125] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x);
        }
    }
}
