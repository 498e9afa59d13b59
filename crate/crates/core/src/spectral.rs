//! Closed-form eigenstructure of the generator and decay-rate fitting.
//!
//! On the linear span of the coordinate maps the generator acts as half the
//! discrete Laplacian, so the sine modes diagonalize it exactly:
//!
//! ```text
//! f^{(j)}(x) = Σ_k sin(jπk/n)(x_k - k),   E[f^{(j)}(X(t))] = f^{(j)}(x₀) e^{-λ_j t},
//! λ_j = 1 - cos(jπ/n).
//! ```
//!
//! `j = 1` is the spectral-gap mode. The same expansion gives the exact mean
//! evolution of every coordinate (`heat_mean_curve`), used as a deterministic
//! oracle against Monte Carlo trajectories. The mean-field exchange process on
//! the complete graph has gap `(αn+1)/((2α+1)n)` with the quadratic symmetric
//! eigenfunction `Σ η_i²`.

use crate::dynamics::MeanFieldState;
use crate::simplex::Configuration;
use crate::{Error, Result};

/// Eigenvalue `λ_j = 1 - cos(jπ/n)` of the negated generator on linear
/// functions, `1 <= j <= n-1`.
pub fn eigenvalue(j: usize, n: usize) -> f64 {
    assert!(n >= 2 && (1..n).contains(&j), "mode index {j} out of range for n = {n}");
    1.0 - (j as f64 * std::f64::consts::PI / n as f64).cos()
}

/// The spectral gap `1 - cos(π/n)`.
pub fn spectral_gap(n: usize) -> f64 {
    eigenvalue(1, n)
}

/// One sine mode: eigenvalue and the orthonormal basis vector
/// `φ_j(k) = sqrt(2/n)·sin(jkπ/n)`, `k = 1..n-1`.
#[derive(Clone, Debug)]
pub struct EigenMode {
    pub j: usize,
    pub lambda: f64,
    pub basis: Vec<f64>,
}

impl EigenMode {
    pub fn new(j: usize, n: usize) -> Result<Self> {
        if n < 2 || j == 0 || j >= n {
            return Err(Error::ModeOutOfRange { j, max: n.saturating_sub(1) });
        }
        let norm = (2.0 / n as f64).sqrt();
        let basis = (1..n)
            .map(|k| norm * ((j * k) as f64 * std::f64::consts::PI / n as f64).sin())
            .collect();
        Ok(EigenMode { j, lambda: eigenvalue(j, n), basis })
    }

    /// `φ_j(k)` for `k = 1..n-1`.
    pub fn basis_value(&self, k: usize) -> f64 {
        self.basis[k - 1]
    }
}

/// The eigenstatistic `f^{(j)}(x) = Σ_k sin(jπk/n)(x_k - k)`; `j = 1` is the
/// gap eigenfunction.
pub fn eigen_stat(j: usize, c: &Configuration) -> Result<f64> {
    let n = c.n();
    if j == 0 || j >= n {
        return Err(Error::ModeOutOfRange { j, max: n - 1 });
    }
    let mut sum = 0.0;
    for k in 1..n {
        let phase = (j * k) as f64 * std::f64::consts::PI / n as f64;
        sum += phase.sin() * (c.position(k) - k as f64);
    }
    Ok(sum)
}

/// Exact mean positions `E[X_k(t)]` of the chain started at `x0`, for each
/// requested time: the sine-basis heat solution of `∂_t a = ½Δa` with zero
/// boundary data, reconstructed coordinate by coordinate.
///
/// Returns one row per time, each row holding `k = 1..n-1`.
pub fn heat_mean_curve(x0: &Configuration, times: &[f64]) -> Vec<Vec<f64>> {
    let n = x0.n();
    let modes: Vec<EigenMode> = (1..n).map(|j| EigenMode::new(j, n).unwrap()).collect();
    let coeffs: Vec<f64> = modes
        .iter()
        .map(|m| (1..n).map(|k| m.basis_value(k) * (x0.position(k) - k as f64)).sum())
        .collect();
    times
        .iter()
        .map(|&t| {
            (1..n)
                .map(|k| {
                    let centered: f64 = modes
                        .iter()
                        .zip(&coeffs)
                        .map(|(m, &a0)| a0 * (-m.lambda * t).exp() * m.basis_value(k))
                        .sum();
                    k as f64 + centered
                })
                .collect()
        })
        .collect()
}

/// Spectral gap `(αn+1)/((2α+1)n)` of the mean-field exchange process.
pub fn meanfield_gap(n: usize, alpha: f64) -> f64 {
    assert!(n >= 2 && alpha > 0.0);
    (alpha * n as f64 + 1.0) / ((2.0 * alpha + 1.0) * n as f64)
}

/// The quadratic eigenstatistic `Σ η_i²` of the mean-field process (up to an
/// irrelevant additive constant).
pub fn meanfield_stat(s: &MeanFieldState) -> f64 {
    s.eta().iter().map(|&e| e * e).sum()
}

/// Stationary mean of [`meanfield_stat`] when the increments follow the
/// scaled Dirichlet law with total mass `n`: `n²(α+1)/(nα+1)`, the Dirichlet
/// second-moment formula. Decay fits center the statistic with this value.
pub fn meanfield_stationary_mean(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    nf * nf * (alpha + 1.0) / (nf * alpha + 1.0)
}

/// Result of an exponential decay fit.
#[derive(Clone, Copy, Debug)]
pub struct DecayFit {
    /// Magnitude of the fitted slope of `log(mean)` against `t`.
    pub rate: f64,
    /// Standard error of the slope.
    pub std_error: f64,
    /// Half-open index range of the points used after truncation.
    pub window: (usize, usize),
    pub points_used: usize,
}

/// Weighted least-squares fit of `log(mean)` against `t`.
///
/// The window keeps the leading points whose mean stays above five standard
/// errors (the log of a near-zero noisy mean is meaningless) and must retain
/// at least three points. Weights are `1/se_log²` with `se_log = se/mean`;
/// when any standard error is zero the fit falls back to an unweighted
/// regression with a residual-based slope error.
pub fn fit_decay_rate(times: &[f64], means: &[f64], std_errors: &[f64]) -> Result<DecayFit> {
    if times.len() != means.len() || times.len() != std_errors.len() {
        return Err(Error::SizeMismatch(format!(
            "times/means/std_errors lengths differ: {} / {} / {}",
            times.len(),
            means.len(),
            std_errors.len()
        )));
    }
    let mut end = 0;
    while end < means.len() {
        let (m, se) = (means[end], std_errors[end]);
        if m <= 0.0 || !m.is_finite() || (se > 0.0 && m <= 5.0 * se) {
            break;
        }
        end += 1;
    }
    if end < 3 {
        return Err(Error::EmptyFitWindow);
    }
    let exact = std_errors[..end].iter().any(|&se| se.is_nan() || se <= 0.0);
    let xs = &times[..end];
    let ys: Vec<f64> = means[..end].iter().map(|&m| m.ln()).collect();
    let ws: Vec<f64> = if exact {
        vec![1.0; end]
    } else {
        means[..end]
            .iter()
            .zip(&std_errors[..end])
            .map(|(&m, &se)| (m / se) * (m / se))
            .collect()
    };
    let wsum: f64 = ws.iter().sum();
    let xbar: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * x).sum::<f64>() / wsum;
    let ybar: f64 = ys.iter().zip(&ws).map(|(&y, &w)| w * y).sum::<f64>() / wsum;
    let sxx: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * (x - xbar) * (x - xbar)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("decay fit needs at least two distinct times".into()));
    }
    let sxy: f64 =
        xs.iter().zip(&ys).zip(&ws).map(|((&x, &y), &w)| w * (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let std_error = if exact {
        let rss: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let fit = ybar + slope * (x - xbar);
                (y - fit) * (y - fit)
            })
            .sum();
        if end > 2 { (rss / (end - 2) as f64 / sxx).sqrt() } else { 0.0 }
    } else {
        (1.0 / sxx).sqrt()
    };
    Ok(DecayFit { rate: slope.abs(), std_error, window: (0, end), points_used: end })
}
