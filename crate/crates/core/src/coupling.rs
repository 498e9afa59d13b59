//! Pairwise couplings that force two trajectories to merge.
//!
//! At each resampling event the two coordinates are redrawn on their own
//! intervals `I^a`, `I^b`; the maximal-sticking coupling glues them to a
//! common value with probability exactly `1 - TV(Beta_α(I^a), Beta_α(I^b))`,
//! the largest possible. The implementation never computes the TV per event:
//! it draws `V` from the first law, sticks with the density-ratio probability
//! `min(1, ρ_b(V)/ρ_a(V))`, and on failure draws the second coordinate from
//! the residual by rejection. Marginally each side remains an exact Beta draw.
//!
//! For coordinatewise-ordered pairs the area `A_t = Σ_k (b_k - a_k)` is a
//! supermartingale whose hitting time of zero (coalescence, tracked
//! bit-exactly) upper-bounds the total variation distance between the two
//! laws. The bracket-rate bound `Σ_k min(δX̄_k ∇_k, ∇_k²)` with `∇_k` the
//! larger of the two gradients is exposed for diagnostics along trajectories.

use rand::Rng;

use crate::beta::{Interval, IntervalBeta};
use crate::dynamics::{next_event, Observer};
use crate::simplex::{compare, sample_equilibrium, Configuration};
use crate::{Error, Result};

/// Proposal budget for one residual rejection loop.
const REJECT_BUDGET: u64 = 1_000_000;

/// Ring of the superposed clock without a resampling mark: the coupled
/// updates draw their own randomness, so events here carry only a time and a
/// site. Same law of rings as [`next_event`].
fn next_ring(n: usize, clock: f64, rng: &mut impl Rng) -> (f64, usize) {
    let rate = (n - 1) as f64;
    let mut wait = 0.0;
    while wait <= 0.0 {
        wait = -(1.0 - rng.random::<f64>()).ln() / rate;
    }
    (clock + wait, rng.random_range(1..n))
}

/// The resampling interval `[x_{site-1}, x_{site+1}]` of a mobile site.
pub fn resampling_interval(c: &Configuration, site: usize) -> Interval {
    Interval::new(c.position(site - 1), c.position(site + 1))
        .expect("ordered positions form an interval")
}

/// Two configurations evolved jointly under the maximal-sticking coupling.
#[derive(Clone, Debug)]
pub struct CoupledPair {
    alpha: f64,
    a: Configuration,
    b: Configuration,
    ordered: bool,
    coalesced: bool,
    /// Number of stored coordinates where the two sides differ bitwise.
    ndiff: usize,
}

impl CoupledPair {
    /// Pairs must share `n` and pinning. `ordered` is set when `a <= b`
    /// coordinatewise at construction and α >= 1, the regime in which the
    /// coupling preserves the order (residual supports are ordered intervals
    /// only for unimodal densities).
    pub fn new(alpha: f64, a: Configuration, b: Configuration) -> Result<Self> {
        if alpha <= 0.0 || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        let rel = compare(&a, &b)?;
        for c in [&a, &b] {
            if let Some(v) = c.validate().first() {
                return Err(Error::InvalidConfiguration(v.to_string()));
            }
        }
        let ndiff =
            a.positions().iter().zip(b.positions()).filter(|(x, y)| x != y).count();
        Ok(CoupledPair {
            alpha,
            ordered: rel.coordinate_le && alpha >= 1.0,
            coalesced: ndiff == 0,
            ndiff,
            a,
            b,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a(&self) -> &Configuration {
        &self.a
    }

    pub fn b(&self) -> &Configuration {
        &self.b
    }

    pub fn is_ordered(&self) -> bool {
        self.ordered
    }

    /// Bit-exact equality of the two sides; once true it stays true.
    pub fn is_coalesced(&self) -> bool {
        self.coalesced
    }

    /// `Σ_{k=1}^{n-1} |b_k - a_k|` over the mobile coordinates.
    pub fn area(&self) -> f64 {
        let n = self.a.n();
        (1..n).map(|k| (self.b.position(k) - self.a.position(k)).abs()).sum()
    }

    /// `max_k |b_k - a_k|`, the widest coordinate gap between the two sides.
    pub fn max_gap(&self) -> f64 {
        let n = self.a.n();
        (1..n).map(|k| (self.b.position(k) - self.a.position(k)).abs()).fold(0.0, f64::max)
    }

    /// `δX̄_site`: distance between the two resampling-interval midpoints.
    pub fn midpoint_gap(&self, site: usize) -> f64 {
        (resampling_interval(&self.b, site).midpoint()
            - resampling_interval(&self.a, site).midpoint())
        .abs()
    }

    /// `Σ_k min(δX̄_k ∇_k, ∇_k²)` with `∇_k` the larger of the two gradients
    /// and `δX̄_k` the distance between the two resampling-interval midpoints.
    pub fn bracket_rate_bound(&self) -> f64 {
        let n = self.a.n();
        (1..n)
            .map(|k| {
                let grad = self.a.gradient(k).max(self.b.gradient(k));
                let mid_gap = self.midpoint_gap(k);
                (mid_gap * grad).min(grad * grad)
            })
            .sum()
    }

    fn set_site(&mut self, site: usize, va: f64, vb: f64) {
        let idx = site - 1;
        let was_diff = self.a.positions()[idx] != self.b.positions()[idx];
        self.a.positions_mut()[idx] = va;
        self.b.positions_mut()[idx] = vb;
        let is_diff = va != vb;
        match (was_diff, is_diff) {
            (true, false) => self.ndiff -= 1,
            (false, true) => self.ndiff += 1,
            _ => {}
        }
        if self.ndiff == 0 {
            self.coalesced = true;
        }
    }
}

/// One maximal-sticking resampling at `site`.
///
/// Marginally each side receives an exact `Beta_α` draw on its own interval;
/// the two values coincide with probability exactly one minus the TV between
/// the two laws. Coalesced pairs (and identical intervals) short-circuit to a
/// single shared draw. Degenerate intervals update deterministically.
pub fn maximal_coupled_update(
    pair: &mut CoupledPair,
    site: usize,
    rng: &mut impl Rng,
) -> Result<()> {
    let n = pair.a.n();
    if site == 0 || site >= n {
        return Err(Error::SiteOutOfRange { site, max: n - 1 });
    }
    let ia = resampling_interval(&pair.a, site);
    let ib = resampling_interval(&pair.b, site);
    let alpha = pair.alpha;

    if pair.coalesced || ia == ib {
        let v = IntervalBeta::new(alpha, ia)?.sample(rng);
        pair.set_site(site, v, v);
        return Ok(());
    }
    if ia.is_degenerate() || ib.is_degenerate() {
        let va =
            if ia.is_degenerate() { ia.lo() } else { IntervalBeta::new(alpha, ia)?.sample(rng) };
        let vb =
            if ib.is_degenerate() { ib.lo() } else { IntervalBeta::new(alpha, ib)?.sample(rng) };
        pair.set_site(site, va, vb);
        return Ok(());
    }

    let da = IntervalBeta::new(alpha, ia)?;
    let db = IntervalBeta::new(alpha, ib)?;
    let v = da.sample(rng);
    let ratio = db.density(v)? / da.density(v)?;
    let stick = if ratio.is_nan() {
        false
    } else {
        ratio >= 1.0 || rng.random::<f64>() < ratio
    };
    if stick {
        pair.set_site(site, v, v);
        return Ok(());
    }
    // Residual draw for the second side: propose from its own law, accept
    // with probability [1 - ρ_a/ρ_b]₊. The overall acceptance rate equals the
    // probability of reaching this branch, so the expected number of
    // proposals per update stays O(1).
    for _ in 0..REJECT_BUDGET {
        let w = db.sample(rng);
        let r = da.density(w)? / db.density(w)?;
        let accept = if r.is_nan() { false } else { rng.random::<f64>() < (1.0 - r).max(0.0) };
        if accept {
            pair.set_site(site, v, w);
            return Ok(());
        }
    }
    Err(Error::RejectionBudget {
        proposals: REJECT_BUDGET,
        context: format!("site {site}, intervals {ia:?} vs {ib:?}, alpha {alpha}"),
    })
}

/// Joint trajectory record of a coupled pair.
#[derive(Clone, Debug)]
pub struct CoupledSeries {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    pub values_a: Vec<Vec<f64>>,
    pub values_b: Vec<Vec<f64>>,
    pub area: Vec<f64>,
    /// `max_k |b_k - a_k|` at each sample time.
    pub max_gap: Vec<f64>,
    pub coalesced: Vec<bool>,
    /// Cumulative sum of squared area jumps up to each sample time (the
    /// realized quadratic variation of the area).
    pub area_sq_jumps: Vec<f64>,
    /// Cumulative time integral of [`CoupledPair::bracket_rate_bound`].
    pub bracket_bound_integral: Vec<f64>,
    /// First time the two sides became bit-identical, if reached.
    pub tau: Option<f64>,
    pub final_pair: CoupledPair,
}

/// Evolves a coupled pair to `horizon`: sites ring at rate one each, every
/// ring applies [`maximal_coupled_update`]. Coalescence is declared at the
/// first event after which all coordinates agree bitwise; from then on the
/// pair moves as a single chain.
pub fn coupled_simulate(
    pair: CoupledPair,
    horizon: f64,
    observers: &[Observer],
    sample_times: &[f64],
    rng: &mut impl Rng,
) -> Result<CoupledSeries> {
    let mut pair = pair;
    let n = pair.a.n();
    let mut series = CoupledSeries {
        names: observers.iter().map(Observer::name).collect(),
        times: Vec::with_capacity(sample_times.len()),
        values_a: Vec::with_capacity(sample_times.len()),
        values_b: Vec::with_capacity(sample_times.len()),
        area: Vec::with_capacity(sample_times.len()),
        max_gap: Vec::with_capacity(sample_times.len()),
        coalesced: Vec::with_capacity(sample_times.len()),
        area_sq_jumps: Vec::with_capacity(sample_times.len()),
        bracket_bound_integral: Vec::with_capacity(sample_times.len()),
        tau: if pair.coalesced { Some(0.0) } else { None },
        final_pair: pair.clone(),
    };
    let mut times_iter = sample_times.iter().copied().peekable();
    let mut clock = 0.0;
    let mut qv = 0.0;
    let mut bound_int = 0.0;
    loop {
        // The bound is evaluated on the pre-jump state and integrated over
        // the flat stretch up to the next event.
        let bound_now = pair.bracket_rate_bound();
        let (ring_time, site) = next_ring(n, clock, rng);
        while times_iter.peek().is_some_and(|&t| t < ring_time) {
            let t = times_iter.next().unwrap();
            series.times.push(t);
            series.values_a.push(observers.iter().map(|o| o.eval(&pair.a)).collect());
            series.values_b.push(observers.iter().map(|o| o.eval(&pair.b)).collect());
            series.area.push(pair.area());
            series.max_gap.push(pair.max_gap());
            series.coalesced.push(pair.coalesced);
            series.area_sq_jumps.push(qv);
            series.bracket_bound_integral.push(bound_int + bound_now * (t - clock));
        }
        if ring_time > horizon {
            break;
        }
        bound_int += bound_now * (ring_time - clock);
        clock = ring_time;
        let area_before = pair.area();
        let was_coalesced = pair.coalesced;
        maximal_coupled_update(&mut pair, site, rng)?;
        let jump = pair.area() - area_before;
        qv += jump * jump;
        if !was_coalesced && pair.coalesced {
            series.tau = Some(ring_time);
        }
    }
    for t in times_iter {
        series.times.push(t);
        series.values_a.push(observers.iter().map(|o| o.eval(&pair.a)).collect());
        series.values_b.push(observers.iter().map(|o| o.eval(&pair.b)).collect());
        series.area.push(pair.area());
        series.max_gap.push(pair.max_gap());
        series.coalesced.push(pair.coalesced);
        series.area_sq_jumps.push(qv);
        series.bracket_bound_integral.push(bound_int + pair.bracket_rate_bound() * (t - clock));
    }
    series.final_pair = pair;
    Ok(series)
}

/// Two-phase coupling of the chain from `x0` against an equilibrium partner:
/// shared graphical-construction noise up to `phase1_end` (which contracts
/// the area), then maximal sticking until `cap`. Returns the first time the
/// two trajectories are bit-identical, or `None` on timeout. `P[τ > t]`
/// upper-bounds the total variation distance of `X^{x0}(t)` from equilibrium.
///
/// The second phase makes no order assumption: the sticking and residual
/// draws work for arbitrary interval pairs, including disconnected residual
/// supports when α < 1.
pub fn coalescence_time_vs_equilibrium(
    x0: &Configuration,
    alpha: f64,
    phase1_end: f64,
    cap: f64,
    rng: &mut impl Rng,
) -> Result<Option<f64>> {
    if phase1_end.is_nan() || cap.is_nan() || phase1_end < 0.0 || cap < phase1_end {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= phase1_end <= cap, got {phase1_end} and {cap}"
        )));
    }
    if !x0.pinned() {
        return Err(Error::InvalidParameter(
            "coalescence against equilibrium needs a pinned initial state".into(),
        ));
    }
    let n = x0.n();
    let partner = sample_equilibrium(n, alpha, rng)?;
    let mut pair = CoupledPair::new(alpha, x0.clone(), partner)?;
    if pair.coalesced {
        return Ok(Some(0.0));
    }

    // Phase A: one shared event stream drives both sides.
    let mut clock = 0.0;
    loop {
        let ev = next_event(n, alpha, clock, rng);
        if ev.time > phase1_end {
            break;
        }
        clock = ev.time;
        let left_a = pair.a.position(ev.site - 1);
        let right_a = pair.a.position(ev.site + 1);
        let left_b = pair.b.position(ev.site - 1);
        let right_b = pair.b.position(ev.site + 1);
        let va = (ev.u * left_a + (1.0 - ev.u) * right_a).clamp(left_a, right_a);
        let vb = (ev.u * left_b + (1.0 - ev.u) * right_b).clamp(left_b, right_b);
        pair.set_site(ev.site, va, vb);
        if pair.coalesced {
            return Ok(Some(ev.time));
        }
    }

    // Phase B: maximal sticking.
    clock = phase1_end;
    loop {
        let (ring_time, site) = next_ring(n, clock, rng);
        if ring_time > cap {
            return Ok(None);
        }
        clock = ring_time;
        maximal_coupled_update(&mut pair, site, rng)?;
        if pair.coalesced {
            return Ok(Some(ring_time));
        }
    }
}
