//! Monte Carlo estimators bracketing the distance to equilibrium.
//!
//! The total variation distance of the walk from equilibrium is never
//! estimated directly (it lives in dimension `n-1`); instead it is bracketed:
//!
//! * lower bound — the Wilson witness set `B_t = {f(x) >= ½ E[f(X(t))]}`
//!   built on the gap eigenfunction from the half-concentrated initial
//!   condition, whose probability under the dynamics minus its probability
//!   under equilibrium lower-bounds the distance;
//! * upper bound — the coalescence probability `P[τ > t]` of the two-phase
//!   coupling against an equilibrium partner.
//!
//! All estimators are deterministic in `(seed, arguments)`: replicas draw
//! from private counter-based streams ([`crate::stream::replica_rng`]),
//! replica-level parallelism never reorders the aggregation, and standard
//! errors of probabilities are the binomial `sqrt(p(1-p)/reps)`.

use rayon::prelude::*;

use crate::coupling::coalescence_time_vs_equilibrium;
use crate::dynamics::{
    meanfield_simulate, simulate, CensorScheme, MeanFieldObserver, MeanFieldState, Observer,
};
use crate::simplex::{sample_equilibrium, sample_wilson_initial, Configuration};
use crate::spectral::{eigen_stat, meanfield_stationary_mean, spectral_gap};
use crate::stream::{mix64, replica_rng};
use crate::{Error, Result};

/// Recorded empirical envelope for `Var[f^{(j)}(X(t))]·j²/n³` along
/// trajectories from the half-concentrated initial condition, over
/// `t in [0, 2 log n / gap]`, `n in {16, 32}`, `j in {1, 2, 3}`. The theory
/// gives a finite constant; the measured maximum is near 0.10.
pub const WILSON_VAR_ENVELOPE: f64 = 0.25;

/// A scalar Monte Carlo estimate with its standard error and provenance.
#[derive(Clone, Copy, Debug)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    pub replicas: u64,
    pub seed: u64,
}

/// Starting state of an upper-bound experiment.
#[derive(Clone, Debug)]
pub enum Start {
    Wedge,
    Vee,
    Explicit(Configuration),
}

impl Start {
    fn realize(&self, n: usize) -> Result<Configuration> {
        match self {
            Start::Wedge => Ok(Configuration::wedge(n)),
            Start::Vee => Ok(Configuration::vee(n)),
            Start::Explicit(c) => {
                if c.n() != n {
                    return Err(Error::SizeMismatch(format!(
                        "explicit start has n = {}, expected {n}",
                        c.n()
                    )));
                }
                Ok(c.clone())
            }
        }
    }
}

fn check_args(n: usize, alpha: f64, reps: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
    }
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if reps == 0 {
        return Err(Error::InvalidParameter("need at least one replica".into()));
    }
    Ok(())
}

/// Replica-parallel map with a deterministic, index-ordered result.
fn par_replicas<T: Send>(reps: u64, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    let raw: Vec<Result<T>> = (0..reps).into_par_iter().map(f).collect();
    raw.into_iter().collect()
}

fn binomial_estimate(successes: u64, reps: u64, seed: u64) -> EstimateWithError {
    let p = successes as f64 / reps as f64;
    EstimateWithError {
        value: p,
        std_error: (p * (1.0 - p) / reps as f64).sqrt(),
        replicas: reps,
        seed,
    }
}

/// Mean and standard error columns of observers along replica trajectories.
#[derive(Clone, Debug)]
pub struct MonteCarloCurve {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    /// `mean[ti][obs]`.
    pub mean: Vec<Vec<f64>>,
    pub std_error: Vec<Vec<f64>>,
    pub replicas: u64,
    pub seed: u64,
}

/// Runs `reps` independent trajectories from `initial` and aggregates each
/// observer at each sample time.
pub fn monte_carlo_curve(
    initial: &Configuration,
    alpha: f64,
    observers: &[Observer],
    times: &[f64],
    reps: u64,
    seed: u64,
) -> Result<MonteCarloCurve> {
    check_args(initial.n(), alpha, reps)?;
    let horizon = times.last().copied().unwrap_or(0.0);
    let rows = par_replicas(reps, |rep| {
        let mut rng = replica_rng(seed, rep);
        let s = simulate(initial, alpha, horizon, &CensorScheme::none(), observers, times, &mut rng)?;
        Ok(s.values)
    })?;
    let (nt, no) = (times.len(), observers.len());
    let mut mean = vec![vec![0.0; no]; nt];
    for row in &rows {
        for ti in 0..nt {
            for oi in 0..no {
                mean[ti][oi] += row[ti][oi];
            }
        }
    }
    for row in &mut mean {
        for m in row.iter_mut() {
            *m /= reps as f64;
        }
    }
    // Two-pass variance: the one-pass form cancels catastrophically when the
    // observer is constant across replicas (e.g. any statistic at t = 0).
    let mut std_error = vec![vec![0.0; no]; nt];
    for row in &rows {
        for ti in 0..nt {
            for oi in 0..no {
                let d = row[ti][oi] - mean[ti][oi];
                std_error[ti][oi] += d * d;
            }
        }
    }
    for row in &mut std_error {
        for se in row.iter_mut() {
            *se = (*se / reps as f64 / reps as f64).sqrt();
        }
    }
    Ok(MonteCarloCurve {
        names: observers.iter().map(Observer::name).collect(),
        times: times.to_vec(),
        mean,
        std_error,
        replicas: reps,
        seed,
    })
}

/// Centered decay curve of the mean-field quadratic statistic from the
/// fully concentrated state: `E[Σ η_i²(t)] - π(Σ η_i²)` with standard errors.
pub fn meanfield_decay_curve(
    n: usize,
    alpha: f64,
    times: &[f64],
    reps: u64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_args(n, alpha, reps)?;
    let horizon = times.last().copied().unwrap_or(0.0);
    let initial = MeanFieldState::concentrated(n);
    let obs = [MeanFieldObserver::SumSquares];
    let rows = par_replicas(reps, |rep| {
        let mut rng = replica_rng(seed, rep);
        let s = meanfield_simulate(&initial, alpha, horizon, &obs, times, &mut rng)?;
        Ok(s.values)
    })?;
    let center = meanfield_stationary_mean(n, alpha);
    let mut means = vec![0.0; times.len()];
    for row in &rows {
        for (ti, v) in row.iter().enumerate() {
            means[ti] += v[0];
        }
    }
    for m in &mut means {
        *m /= reps as f64;
    }
    let mut ses = vec![0.0; times.len()];
    for row in &rows {
        for (ti, v) in row.iter().enumerate() {
            let d = v[0] - means[ti];
            ses[ti] += d * d;
        }
    }
    for (ti, se) in ses.iter_mut().enumerate() {
        *se = (*se / reps as f64 / reps as f64).sqrt();
        means[ti] -= center;
    }
    Ok((means, ses))
}

/// Wilson lower bound on the distance to equilibrium at time `t`.
///
/// Runs `reps` trajectories from the half-concentrated initial condition,
/// thresholds the gap eigenfunction at half its exact mean decay (seeded by
/// the empirical initial mean), and subtracts the probability of the same
/// event under `reps` fresh equilibrium samples. Replica streams `0..reps`
/// drive the dynamics, `reps..2·reps` the equilibrium side.
pub fn tv_lower_witness(
    n: usize,
    alpha: f64,
    t: f64,
    reps: u64,
    seed: u64,
) -> Result<EstimateWithError> {
    check_args(n, alpha, reps)?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {t}")));
    }
    let observers = [Observer::EigenStat(1)];
    let dyn_samples = par_replicas(reps, |rep| {
        let mut rng = replica_rng(seed, rep);
        let x0 = sample_wilson_initial(n, alpha, &mut rng)?;
        let f0 = eigen_stat(1, &x0)?;
        let s = simulate(&x0, alpha, t, &CensorScheme::none(), &observers, &[t], &mut rng)?;
        Ok((f0, s.values[0][0]))
    })?;
    let eq_samples = par_replicas(reps, |rep| {
        let mut rng = replica_rng(seed, reps + rep);
        let y = sample_equilibrium(n, alpha, &mut rng)?;
        eigen_stat(1, &y)
    })?;
    let mean_f0: f64 = dyn_samples.iter().map(|(f0, _)| f0).sum::<f64>() / reps as f64;
    let threshold = 0.5 * mean_f0 * (-spectral_gap(n) * t).exp();
    let hits_dyn = dyn_samples.iter().filter(|(_, ft)| *ft >= threshold).count() as u64;
    let hits_eq = eq_samples.iter().filter(|&&fy| fy >= threshold).count() as u64;
    let p_dyn = hits_dyn as f64 / reps as f64;
    let p_eq = hits_eq as f64 / reps as f64;
    let se = ((p_dyn * (1.0 - p_dyn) + p_eq * (1.0 - p_eq)) / reps as f64).sqrt();
    Ok(EstimateWithError {
        value: (p_dyn - p_eq).clamp(0.0, 1.0),
        std_error: se,
        replicas: reps,
        seed,
    })
}

/// Coupling upper bound: `P[τ > t]` for the two-phase coupling of the chain
/// from `start` against an equilibrium partner. Phase one (shared noise)
/// runs to `min(t/2, 4 log n / gap)`, phase two (maximal sticking) to `t`.
pub fn tv_upper_coupling(
    n: usize,
    alpha: f64,
    t: f64,
    start: &Start,
    reps: u64,
    seed: u64,
) -> Result<EstimateWithError> {
    check_args(n, alpha, reps)?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {t}")));
    }
    let x0 = start.realize(n)?;
    let phase1_end = (t / 2.0).min(4.0 * (n as f64).ln() / spectral_gap(n));
    let outcomes = par_replicas(reps, |rep| {
        let mut rng = replica_rng(seed, rep);
        coalescence_time_vs_equilibrium(&x0, alpha, phase1_end, t, &mut rng)
    })?;
    let timeouts = outcomes.iter().filter(|o| o.is_none()).count() as u64;
    Ok(binomial_estimate(timeouts, reps, seed))
}

/// The two-sided bracket of the distance profile on a time grid, with the
/// crossing times of the standard levels.
#[derive(Clone, Debug)]
pub struct MixingProfile {
    pub times: Vec<f64>,
    pub lower: Vec<EstimateWithError>,
    pub upper: Vec<EstimateWithError>,
}

#[derive(Clone, Copy, Debug)]
pub struct CrossingRecord {
    pub level: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// First down-crossing of `level` by linear interpolation between grid
/// points; `None` if the column never passes below the level.
pub fn crossing_time(times: &[f64], values: &[f64], level: f64) -> Option<f64> {
    if values.first().is_some_and(|&v| v < level) {
        return times.first().copied();
    }
    for i in 1..values.len() {
        let (v0, v1) = (values[i - 1], values[i]);
        if v0 >= level && v1 < level {
            let frac = if v0 > v1 { (v0 - level) / (v0 - v1) } else { 1.0 };
            return Some(times[i - 1] + frac * (times[i] - times[i - 1]));
        }
    }
    None
}

impl MixingProfile {
    /// Crossing times of the levels 0.75, 0.5, 0.25 for both columns.
    pub fn crossings(&self) -> Vec<CrossingRecord> {
        let lower: Vec<f64> = self.lower.iter().map(|e| e.value).collect();
        let upper: Vec<f64> = self.upper.iter().map(|e| e.value).collect();
        [0.75, 0.5, 0.25]
            .iter()
            .map(|&level| CrossingRecord {
                level,
                lower: crossing_time(&self.times, &lower, level),
                upper: crossing_time(&self.times, &upper, level),
            })
            .collect()
    }
}

/// Assembles [`tv_lower_witness`] and [`tv_upper_coupling`] (from the maximal
/// configuration) on a sorted time grid. Grid point `g` uses master seeds
/// `mix64(seed ^ 2g)` and `mix64(seed ^ (2g+1))` for the two columns.
pub fn mixing_profile(
    n: usize,
    alpha: f64,
    time_grid: &[f64],
    reps: u64,
    seed: u64,
) -> Result<MixingProfile> {
    check_args(n, alpha, reps)?;
    if time_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("time grid must be sorted".into()));
    }
    let mut lower = Vec::with_capacity(time_grid.len());
    let mut upper = Vec::with_capacity(time_grid.len());
    for (g, &t) in time_grid.iter().enumerate() {
        lower.push(tv_lower_witness(n, alpha, t, reps, mix64(seed ^ (2 * g as u64)))?);
        upper.push(tv_upper_coupling(
            n,
            alpha,
            t,
            &Start::Wedge,
            reps,
            mix64(seed ^ (2 * g as u64 + 1)),
        )?);
    }
    Ok(MixingProfile { times: time_grid.to_vec(), lower, upper })
}

/// A named statistic from the registry of (mostly increasing) observables
/// used by the correlation estimator: `x{k}`, `f` (the gap eigenfunction),
/// `x{k}_ge_{c}` (indicator), and the decreasing `mirror_x{k}` = `n - x_k`.
#[derive(Clone, Debug, PartialEq)]
pub enum Statistic {
    Coordinate(usize),
    GapEigenfunction,
    IndicatorAtLeast { k: usize, c: f64 },
    MirrorCoordinate(usize),
}

impl Statistic {
    pub fn parse(name: &str, n: usize) -> Result<Self> {
        let unknown = || Error::UnknownStatistic(name.to_string());
        let check_k = |k: usize| {
            if k == 0 || k >= n {
                Err(Error::SiteOutOfRange { site: k, max: n - 1 })
            } else {
                Ok(k)
            }
        };
        if name == "f" {
            return Ok(Statistic::GapEigenfunction);
        }
        if let Some(rest) = name.strip_prefix("mirror_x") {
            let k = rest.parse::<usize>().map_err(|_| unknown())?;
            return Ok(Statistic::MirrorCoordinate(check_k(k)?));
        }
        if let Some(rest) = name.strip_prefix('x') {
            if let Some((k_str, c_str)) = rest.split_once("_ge_") {
                let k = k_str.parse::<usize>().map_err(|_| unknown())?;
                let c = c_str.parse::<f64>().map_err(|_| unknown())?;
                return Ok(Statistic::IndicatorAtLeast { k: check_k(k)?, c });
            }
            let k = rest.parse::<usize>().map_err(|_| unknown())?;
            return Ok(Statistic::Coordinate(check_k(k)?));
        }
        Err(unknown())
    }

    pub fn eval(&self, c: &Configuration) -> f64 {
        match *self {
            Statistic::Coordinate(k) => c.position(k),
            Statistic::GapEigenfunction => eigen_stat(1, c).expect("mode 1 always valid"),
            Statistic::IndicatorAtLeast { k, c: cut } => {
                if c.position(k) >= cut {
                    1.0
                } else {
                    0.0
                }
            }
            Statistic::MirrorCoordinate(k) => c.n() as f64 - c.position(k),
        }
    }
}

/// Equilibrium covariance of two named statistics with a jackknife standard
/// error. Nonnegative for two increasing statistics (FKG).
pub fn fkg_correlation(
    n: usize,
    alpha: f64,
    f_name: &str,
    g_name: &str,
    reps: u64,
    seed: u64,
) -> Result<EstimateWithError> {
    check_args(n, alpha, reps)?;
    if reps < 3 {
        return Err(Error::InvalidParameter("jackknife needs at least 3 replicas".into()));
    }
    let f = Statistic::parse(f_name, n)?;
    let g = Statistic::parse(g_name, n)?;
    let pairs = par_replicas(reps, |rep| {
        let mut rng = replica_rng(seed, rep);
        let c = sample_equilibrium(n, alpha, &mut rng)?;
        Ok((f.eval(&c), g.eval(&c)))
    })?;
    let m = reps as f64;
    let (sf, sg, sfg) = pairs.iter().fold((0.0, 0.0, 0.0), |(a, b, c), (x, y)| {
        (a + x, b + y, c + x * y)
    });
    let cov = (sfg - sf * sg / m) / (m - 1.0);
    // Leave-one-out covariances in O(reps) via the sum updates.
    let mut loo = Vec::with_capacity(pairs.len());
    for (x, y) in &pairs {
        let (sf_i, sg_i, sfg_i) = (sf - x, sg - y, sfg - x * y);
        let mi = m - 1.0;
        loo.push((sfg_i - sf_i * sg_i / mi) / (mi - 1.0));
    }
    let loo_mean: f64 = loo.iter().sum::<f64>() / m;
    let jack_var = loo.iter().map(|v| (v - loo_mean) * (v - loo_mean)).sum::<f64>() * (m - 1.0) / m;
    Ok(EstimateWithError { value: cov, std_error: jack_var.sqrt(), replicas: reps, seed })
}

/// The special-particle labels `u_i = ⌊i·n/K⌋`, `i = 1..K-1`.
pub fn special_sites(n: usize, k_groups: usize) -> Vec<usize> {
    (1..k_groups).map(|i| i * n / k_groups).collect()
}

/// Censored-minus-uncensored mean positions at time `t`, per coordinate,
/// starting from the maximal configuration with the special particles frozen.
/// Each difference should be nonnegative up to noise: censoring can only keep
/// a monotone-density law stochastically higher.
pub fn censoring_domination(
    n: usize,
    alpha: f64,
    k_groups: usize,
    t: f64,
    reps: u64,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    check_args(n, alpha, reps)?;
    if k_groups < 2 || k_groups > n {
        return Err(Error::InvalidParameter(format!(
            "K must lie in 2..={n}, got {k_groups}"
        )));
    }
    let wedge = Configuration::wedge(n);
    let censor = CensorScheme::constant(special_sites(n, k_groups))?;
    let run = |scheme: CensorScheme, offset: u64| -> Result<(Vec<f64>, Vec<f64>)> {
        let finals = par_replicas(reps, |rep| {
            let mut rng = replica_rng(seed, offset + rep);
            let s = simulate(&wedge, alpha, t, &scheme, &[], &[], &mut rng)?;
            Ok(s.final_state)
        })?;
        let mut mean = vec![0.0; n - 1];
        for c in &finals {
            for (k, &x) in c.positions().iter().enumerate() {
                mean[k] += x;
            }
        }
        for m in &mut mean {
            *m /= reps as f64;
        }
        let mut se = vec![0.0; n - 1];
        for c in &finals {
            for (k, &x) in c.positions().iter().enumerate() {
                let d = x - mean[k];
                se[k] += d * d;
            }
        }
        for s in &mut se {
            *s = (*s / reps as f64 / reps as f64).sqrt();
        }
        Ok((mean, se))
    };
    let (mean_c, se_c) = run(censor, 0)?;
    let (mean_u, se_u) = run(CensorScheme::none(), reps)?;
    Ok((0..n - 1)
        .map(|k| (mean_c[k] - mean_u[k], (se_c[k] * se_c[k] + se_u[k] * se_u[k]).sqrt()))
        .collect())
}

/// `P[X^∧_{⌊n/2⌋}(t) >= n/2 + 1]`: the midpoint witness of the separation
/// pre-cutoff at half the mixing time.
pub fn separation_witness(
    n: usize,
    alpha: f64,
    t: f64,
    reps: u64,
    seed: u64,
) -> Result<EstimateWithError> {
    check_args(n, alpha, reps)?;
    let wedge = Configuration::wedge(n);
    let mid = n / 2;
    let threshold = n as f64 / 2.0 + 1.0;
    let hits = par_replicas(reps, |rep| {
        let mut rng = replica_rng(seed, rep);
        let s = simulate(&wedge, alpha, t, &CensorScheme::none(), &[], &[], &mut rng)?;
        Ok(u64::from(s.final_state.position(mid) >= threshold))
    })?;
    Ok(binomial_estimate(hits.iter().sum(), reps, seed))
}

/// Monte Carlo mean and variance of a statistic with their standard errors.
#[derive(Clone, Copy, Debug)]
pub struct Moments {
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub replicas: u64,
    pub seed: u64,
}

fn moments_of(samples: &[f64], seed: u64) -> Moments {
    let m = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / m;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    let m4 = samples.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / m;
    let var_of_var = ((m4 - var * var).max(0.0)) / m;
    Moments {
        mean,
        mean_se: (var / m).sqrt(),
        variance: var,
        variance_se: var_of_var.sqrt(),
        replicas: samples.len() as u64,
        seed,
    }
}

/// Moments of the centered special-particle height
/// `W = Σ_i (x_{u_i} - u_i)` from the maximal configuration at time `t`.
pub fn special_particle_w(
    n: usize,
    alpha: f64,
    k_groups: usize,
    t: f64,
    reps: u64,
    seed: u64,
) -> Result<Moments> {
    check_args(n, alpha, reps)?;
    if k_groups < 2 || k_groups > n {
        return Err(Error::InvalidParameter(format!(
            "K must lie in 2..={n}, got {k_groups}"
        )));
    }
    let wedge = Configuration::wedge(n);
    let sites = special_sites(n, k_groups);
    let ws = par_replicas(reps, |rep| {
        let mut rng = replica_rng(seed, rep);
        let s = simulate(&wedge, alpha, t, &CensorScheme::none(), &[], &[], &mut rng)?;
        Ok(sites.iter().map(|&u| s.final_state.position(u) - u as f64).sum::<f64>())
    })?;
    Ok(moments_of(&ws, seed))
}

/// Per-time, per-mode moments of the eigenstatistics along trajectories from
/// the half-concentrated initial condition.
#[derive(Clone, Debug)]
pub struct WilsonMoments {
    pub times: Vec<f64>,
    pub modes: Vec<usize>,
    /// `moments[ti][mi]`.
    pub moments: Vec<Vec<Moments>>,
    pub replicas: u64,
    pub seed: u64,
}

pub fn wilson_moments(
    n: usize,
    alpha: f64,
    times: &[f64],
    modes: &[usize],
    reps: u64,
    seed: u64,
) -> Result<WilsonMoments> {
    check_args(n, alpha, reps)?;
    let observers: Vec<Observer> = modes.iter().map(|&j| Observer::EigenStat(j)).collect();
    let horizon = times.last().copied().unwrap_or(0.0);
    let rows = par_replicas(reps, |rep| {
        let mut rng = replica_rng(seed, rep);
        let x0 = sample_wilson_initial(n, alpha, &mut rng)?;
        let s = simulate(&x0, alpha, horizon, &CensorScheme::none(), &observers, times, &mut rng)?;
        Ok(s.values)
    })?;
    let mut moments = Vec::with_capacity(times.len());
    for ti in 0..times.len() {
        let mut per_mode = Vec::with_capacity(modes.len());
        for mi in 0..modes.len() {
            let samples: Vec<f64> = rows.iter().map(|r| r[ti][mi]).collect();
            per_mode.push(moments_of(&samples, seed));
        }
        moments.push(per_mode);
    }
    Ok(WilsonMoments {
        times: times.to_vec(),
        modes: modes.to_vec(),
        moments,
        replicas: reps,
        seed,
    })
}
