//! Event-driven continuous-time simulation of the adjacent walk.
//!
//! The `n-1` independent rate-one site clocks are superposed into a single
//! exponential clock of rate `n-1` plus a uniform site label; each event also
//! carries a symmetric Beta(α) mark `u`, and the update replaces `x_site` by
//! `u·x_{site-1} + (1-u)·x_{site+1}`. Driving several trajectories with one
//! shared event stream is the graphical construction: it preserves both the
//! coordinate order and the gradient order pathwise, which is the grand
//! coupling used everywhere below.
//!
//! Censoring suppresses the application of updates at scheduled sites but
//! still consumes their randomness, so censored and uncensored runs with the
//! same seed see the identical `(time, site, u)` stream. Observers are
//! recorded at the requested sample times with the càdlàg convention: the
//! value at `t` includes every update at times `<= t`.
//!
//! Draw order per event is fixed (waiting time, then site, then mark);
//! reproducibility of a trajectory depends only on the seed.

use rand::Rng;

use crate::beta::sample_symmetric_beta;
use crate::simplex::Configuration;
use crate::spectral::eigen_stat;
use crate::{Error, Result};

/// One atom of the graphical construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateEvent {
    pub time: f64,
    /// Mobile site in `1..=n-1`.
    pub site: usize,
    /// Symmetric Beta(α) mark in `[0, 1]`.
    pub u: f64,
}

/// Next event after `clock` for an `n`-particle system: exponential waiting
/// time of rate `n-1`, uniform site, Beta(α) mark. The superposition is in
/// law identical to `n-1` independent rate-one site clocks.
pub fn next_event(n: usize, alpha: f64, clock: f64, rng: &mut impl Rng) -> UpdateEvent {
    debug_assert!(n >= 2);
    let rate = (n - 1) as f64;
    let mut wait = 0.0;
    while wait <= 0.0 {
        wait = -(1.0 - rng.random::<f64>()).ln() / rate;
    }
    let site = rng.random_range(1..n);
    let u = sample_symmetric_beta(alpha, rng);
    UpdateEvent { time: clock + wait, site, u }
}

/// The heat-bath move `x_site ← u·x_{site-1} + (1-u)·x_{site+1}` as a pure
/// operation; monotonicity is preserved because the new value is clamped to
/// the resampling interval.
pub fn apply_update(c: &Configuration, site: usize, u: f64) -> Result<Configuration> {
    if site == 0 || site >= c.n() {
        return Err(Error::SiteOutOfRange { site, max: c.n() - 1 });
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidParameter(format!("u must lie in [0, 1], got {u}")));
    }
    let mut out = c.clone();
    apply_site(&mut out, site, u);
    Ok(out)
}

pub(crate) fn apply_site(c: &mut Configuration, site: usize, u: f64) {
    let left = c.position(site - 1);
    let right = c.position(site + 1);
    c.positions_mut()[site - 1] = (u * left + (1.0 - u) * right).clamp(left, right);
}

/// Piecewise-constant censoring schedule: each segment starts at `from` and
/// suppresses updates at the listed sites until the next segment begins.
#[derive(Clone, Debug, Default)]
pub struct CensorScheme {
    segments: Vec<(f64, Vec<usize>)>,
    max_site: usize,
}

impl CensorScheme {
    /// The empty scheme: nothing is ever censored.
    pub fn none() -> Self {
        CensorScheme::default()
    }

    /// Censor the given sites for all times.
    pub fn constant(sites: Vec<usize>) -> Result<Self> {
        CensorScheme::new(vec![(0.0, sites)])
    }

    /// Builds a schedule; `from` times must start at 0 and strictly increase,
    /// site labels must be positive (range against `n` is checked when the
    /// scheme is used).
    pub fn new(mut segments: Vec<(f64, Vec<usize>)>) -> Result<Self> {
        if segments.is_empty() {
            return Ok(CensorScheme::default());
        }
        if segments[0].0 != 0.0 {
            return Err(Error::InvalidCensorSchedule(format!(
                "first segment must start at 0, got {}",
                segments[0].0
            )));
        }
        let mut max_site = 0;
        let mut prev = f64::NEG_INFINITY;
        for (from, sites) in segments.iter_mut() {
            if !from.is_finite() || *from <= prev {
                return Err(Error::InvalidCensorSchedule(format!(
                    "segment start {from} does not increase past {prev}"
                )));
            }
            prev = *from;
            sites.sort_unstable();
            sites.dedup();
            if sites.first() == Some(&0) {
                return Err(Error::InvalidCensorSchedule("site 0 is a wall".into()));
            }
            max_site = max_site.max(sites.last().copied().unwrap_or(0));
        }
        Ok(CensorScheme { segments, max_site })
    }

    /// Largest site label mentioned anywhere in the schedule.
    pub fn max_site(&self) -> usize {
        self.max_site
    }

    /// Whether `site` is censored at time `t` (càdlàg: segment `[from, next)`).
    pub fn is_censored(&self, site: usize, t: f64) -> bool {
        let idx = match self.segments.binary_search_by(|(from, _)| from.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(0) => return false,
            Err(i) => i - 1,
        };
        self.segments[idx].1.binary_search(&site).is_ok()
    }
}

/// A named scalar statistic of a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observer {
    /// `x_k`.
    Coordinate(usize),
    /// The eigenstatistic `f^{(j)}`.
    EigenStat(usize),
    /// `min_k (x_{k+1} - x_{k-1})` over mobile sites.
    MinGradient,
    /// `max_k (x_{k+1} - x_{k-1})` over mobile sites.
    MaxGradient,
    /// `max_k |x_k - k|` over mobile sites.
    MaxCenteredAbs,
}

impl Observer {
    pub fn name(&self) -> String {
        match self {
            Observer::Coordinate(k) => format!("x{k}"),
            Observer::EigenStat(j) => format!("f{j}"),
            Observer::MinGradient => "min_gradient".into(),
            Observer::MaxGradient => "max_gradient".into(),
            Observer::MaxCenteredAbs => "max_centered_abs".into(),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        match *self {
            Observer::Coordinate(k) if k == 0 || k > n => {
                Err(Error::SiteOutOfRange { site: k, max: n })
            }
            Observer::EigenStat(j) if j == 0 || j >= n => {
                Err(Error::ModeOutOfRange { j, max: n - 1 })
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, c: &Configuration) -> f64 {
        match *self {
            Observer::Coordinate(k) => c.position(k),
            Observer::EigenStat(j) => eigen_stat(j, c).expect("observer checked against n"),
            Observer::MinGradient => {
                (1..c.n()).map(|k| c.gradient(k)).fold(f64::INFINITY, f64::min)
            }
            Observer::MaxGradient => (1..c.n()).map(|k| c.gradient(k)).fold(0.0, f64::max),
            Observer::MaxCenteredAbs => {
                (1..c.n()).map(|k| (c.position(k) - k as f64).abs()).fold(0.0, f64::max)
            }
        }
    }
}

/// Time-indexed observer values for one trajectory.
#[derive(Clone, Debug)]
pub struct ObserverSeries {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    /// `values[ti][obs]`, one row per sample time.
    pub values: Vec<Vec<f64>>,
    /// Replica label, filled by replica-level drivers (0 for single runs).
    pub replica: u64,
    pub final_state: Configuration,
    /// Events generated with time inside the horizon (applied or censored).
    pub events_seen: u64,
}

impl ObserverSeries {
    /// Values of observer `obs` across time.
    pub fn column(&self, obs: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[obs]).collect()
    }
}

fn check_sample_times(sample_times: &[f64], horizon: f64) -> Result<()> {
    if horizon < 0.0 || !horizon.is_finite() {
        return Err(Error::InvalidParameter(format!("horizon must be finite >= 0, got {horizon}")));
    }
    let mut prev = 0.0;
    for &t in sample_times {
        if t.is_nan() || t < prev || t > horizon {
            return Err(Error::InvalidParameter(format!(
                "sample times must be sorted within [0, {horizon}], got {t} after {prev}"
            )));
        }
        prev = t;
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// Runs one trajectory to `horizon`, recording `observers` at `sample_times`.
///
/// Censored events consume their `(site, u)` randomness but are not applied,
/// so the event stream is independent of the scheme.
pub fn simulate(
    initial: &Configuration,
    alpha: f64,
    horizon: f64,
    censor: &CensorScheme,
    observers: &[Observer],
    sample_times: &[f64],
    rng: &mut impl Rng,
) -> Result<ObserverSeries> {
    check_alpha(alpha)?;
    check_sample_times(sample_times, horizon)?;
    let n = initial.n();
    if let Some(v) = initial.validate().first() {
        return Err(Error::InvalidConfiguration(v.to_string()));
    }
    if censor.max_site() >= n {
        return Err(Error::InvalidCensorSchedule(format!(
            "site {} out of range for n = {n}",
            censor.max_site()
        )));
    }
    for o in observers {
        o.check(n)?;
    }

    let mut state = initial.clone();
    let mut times_iter = sample_times.iter().copied().peekable();
    let mut series = ObserverSeries {
        names: observers.iter().map(Observer::name).collect(),
        times: Vec::with_capacity(sample_times.len()),
        values: Vec::with_capacity(sample_times.len()),
        replica: 0,
        final_state: state.clone(),
        events_seen: 0,
    };
    let record = |state: &Configuration, t: f64, series: &mut ObserverSeries| {
        series.times.push(t);
        series.values.push(observers.iter().map(|o| o.eval(state)).collect());
    };

    let mut clock = 0.0;
    loop {
        let ev = next_event(n, alpha, clock, rng);
        while times_iter.peek().is_some_and(|&t| t < ev.time) {
            let t = times_iter.next().unwrap();
            record(&state, t, &mut series);
        }
        if ev.time > horizon {
            break;
        }
        clock = ev.time;
        series.events_seen += 1;
        if !censor.is_censored(ev.site, ev.time) {
            apply_site(&mut state, ev.site, ev.u);
        }
    }
    for t in times_iter {
        record(&state, t, &mut series);
    }
    series.final_state = state;
    Ok(series)
}

/// Drives every initial condition with one shared event stream (the grand
/// coupling). Pairs ordered at time zero stay ordered at every sample time,
/// in both the coordinate and the gradient order.
pub fn grand_coupled_simulate(
    initials: &[Configuration],
    alpha: f64,
    horizon: f64,
    observers: &[Observer],
    sample_times: &[f64],
    rng: &mut impl Rng,
) -> Result<Vec<ObserverSeries>> {
    check_alpha(alpha)?;
    check_sample_times(sample_times, horizon)?;
    let first = initials
        .first()
        .ok_or_else(|| Error::InvalidParameter("need at least one initial condition".into()))?;
    let n = first.n();
    for c in initials {
        if c.n() != n || c.pinned() != first.pinned() {
            return Err(Error::SizeMismatch(
                "all coupled initial conditions must share n and pinning".into(),
            ));
        }
        if let Some(v) = c.validate().first() {
            return Err(Error::InvalidConfiguration(v.to_string()));
        }
    }
    for o in observers {
        o.check(n)?;
    }

    let names: Vec<String> = observers.iter().map(Observer::name).collect();
    let mut states: Vec<Configuration> = initials.to_vec();
    let mut all: Vec<ObserverSeries> = states
        .iter()
        .map(|c| ObserverSeries {
            names: names.clone(),
            times: Vec::with_capacity(sample_times.len()),
            values: Vec::with_capacity(sample_times.len()),
            replica: 0,
            final_state: c.clone(),
            events_seen: 0,
        })
        .collect();

    let mut times_iter = sample_times.iter().copied().peekable();
    let mut clock = 0.0;
    loop {
        let ev = next_event(n, alpha, clock, rng);
        while times_iter.peek().is_some_and(|&t| t < ev.time) {
            let t = times_iter.next().unwrap();
            for (series, state) in all.iter_mut().zip(&states) {
                series.times.push(t);
                series.values.push(observers.iter().map(|o| o.eval(state)).collect());
            }
        }
        if ev.time > horizon {
            break;
        }
        clock = ev.time;
        for (series, state) in all.iter_mut().zip(states.iter_mut()) {
            series.events_seen += 1;
            apply_site(state, ev.site, ev.u);
        }
    }
    for t in times_iter {
        for (series, state) in all.iter_mut().zip(&states) {
            series.times.push(t);
            series.values.push(observers.iter().map(|o| o.eval(state)).collect());
        }
    }
    for (series, state) in all.iter_mut().zip(states) {
        series.final_state = state;
    }
    Ok(all)
}

/// Increment state of the mean-field exchange process on the complete graph.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanFieldState {
    eta: Vec<f64>,
}

impl MeanFieldState {
    pub fn new(eta: Vec<f64>) -> Result<Self> {
        if eta.len() < 2 {
            return Err(Error::InvalidParameter("mean-field state needs n >= 2".into()));
        }
        if let Some(&bad) = eta.iter().find(|&&e| e < 0.0 || !e.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mean-field increments must be finite >= 0, got {bad}"
            )));
        }
        Ok(MeanFieldState { eta })
    }

    /// All mass on the first increment: the extreme state `(n, 0, ..., 0)`.
    pub fn concentrated(n: usize) -> Self {
        let mut eta = vec![0.0; n];
        eta[0] = n as f64;
        MeanFieldState { eta }
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn n(&self) -> usize {
        self.eta.len()
    }

    pub fn sum(&self) -> f64 {
        self.eta.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeanFieldObserver {
    /// `Σ η_i²`, the quadratic eigenstatistic.
    SumSquares,
    /// `Σ η_i`, conserved by every exchange.
    Sum,
}

impl MeanFieldObserver {
    pub fn name(&self) -> String {
        match self {
            MeanFieldObserver::SumSquares => "sum_squares".into(),
            MeanFieldObserver::Sum => "sum".into(),
        }
    }

    pub fn eval(&self, s: &MeanFieldState) -> f64 {
        match self {
            MeanFieldObserver::SumSquares => s.eta.iter().map(|&e| e * e).sum(),
            MeanFieldObserver::Sum => s.sum(),
        }
    }
}

/// Observer series of a mean-field trajectory.
#[derive(Clone, Debug)]
pub struct MeanFieldSeries {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub final_state: MeanFieldState,
    pub events_seen: u64,
}

/// Simulates the exchange process on the complete graph: each unordered pair
/// exchanges at rate `1/n` (total rate `(n-1)/2`), splitting the pair mass as
/// `(u·s, (1-u)·s)` with a Beta(α) mark.
pub fn meanfield_simulate(
    initial: &MeanFieldState,
    alpha: f64,
    horizon: f64,
    observers: &[MeanFieldObserver],
    sample_times: &[f64],
    rng: &mut impl Rng,
) -> Result<MeanFieldSeries> {
    check_alpha(alpha)?;
    check_sample_times(sample_times, horizon)?;
    let n = initial.n();
    let rate = (n - 1) as f64 / 2.0;
    let mut state = initial.clone();
    let mut series = MeanFieldSeries {
        names: observers.iter().map(MeanFieldObserver::name).collect(),
        times: Vec::with_capacity(sample_times.len()),
        values: Vec::with_capacity(sample_times.len()),
        final_state: state.clone(),
        events_seen: 0,
    };
    let mut times_iter = sample_times.iter().copied().peekable();
    let mut clock = 0.0;
    loop {
        let mut wait = 0.0;
        while wait <= 0.0 {
            wait = -(1.0 - rng.random::<f64>()).ln() / rate;
        }
        let event_time = clock + wait;
        // Ordered pair drawn uniformly, then canonicalized.
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let u = sample_symmetric_beta(alpha, rng);
        while times_iter.peek().is_some_and(|&t| t < event_time) {
            let t = times_iter.next().unwrap();
            series.times.push(t);
            series.values.push(observers.iter().map(|o| o.eval(&state)).collect());
        }
        if event_time > horizon {
            break;
        }
        clock = event_time;
        series.events_seen += 1;
        let (lo, hi) = (i.min(j), i.max(j));
        let s = state.eta[lo] + state.eta[hi];
        state.eta[lo] = u * s;
        state.eta[hi] = (1.0 - u) * s;
    }
    for t in times_iter {
        series.times.push(t);
        series.values.push(observers.iter().map(|o| o.eval(&state)).collect());
    }
    series.final_state = state;
    Ok(series)
}
