//! Particle configurations on the simplex and exact equilibrium samplers.
//!
//! A configuration is a non-decreasing interface `0 = x_0 <= x_1 <= ... ` on
//! `[0, n]`. In the pinned state space the right endpoint is fixed, `x_n = n`,
//! and only `x_1..x_{n-1}` are stored; in the unpinned space `x_n` is free and
//! stored as an extra coordinate. The increment variables `η_k = x_k - x_{k-1}`
//! carry the product structure of the problem: under the equilibrium law they
//! are i.i.d. Gamma(α) conditioned to sum to `n`, which is sampled exactly by
//! normalizing independent Gamma draws (Dirichlet scaling).

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::{Error, Result};

/// Retry cap for the measure-zero event that all Gamma draws are zero.
const GAMMA_RETRY_CAP: usize = 100;

/// Ordered particle positions on `[0, n]`.
///
/// `positions` holds `x_1..x_{n-1}` when pinned (with `x_n = n` implicit) and
/// `x_1..x_n` when unpinned. The walls are `x_0 = 0` and, when pinned,
/// `x_n = n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    n: usize,
    positions: Vec<f64>,
    pinned: bool,
}

/// One broken invariant reported by [`Configuration::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// Zero-based index into the stored positions where the violation sits.
    pub index: usize,
    /// How far the invariant is missed (sign convention per kind).
    pub magnitude: f64,
    pub kind: ViolationKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    NonFinite,
    Negative,
    /// `x_k > x_{k+1}`; reported at the later index with the overshoot.
    DecreasingPair,
    /// Pinned configuration with a coordinate above `n`.
    AboveUpperWall,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            ViolationKind::NonFinite => write!(f, "position {} is not finite", self.index),
            ViolationKind::Negative => {
                write!(f, "position {} is negative by {}", self.index, self.magnitude)
            }
            ViolationKind::DecreasingPair => write!(
                f,
                "position {} is below its left neighbour by {}",
                self.index, self.magnitude
            ),
            ViolationKind::AboveUpperWall => write!(
                f,
                "position {} exceeds the wall by {}",
                self.index, self.magnitude
            ),
        }
    }
}

/// Increment variables `η_k = x_k - x_{k-1}`, `k = 1..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Increments {
    eta: Vec<f64>,
}

impl Increments {
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn sum(&self) -> f64 {
        self.eta.iter().sum()
    }
}

/// Outcome of comparing two configurations in the coordinate order `<=` and
/// the gradient order (increment-wise `<=`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderRelation {
    pub coordinate_le: bool,
    pub coordinate_ge: bool,
    pub gradient_le: bool,
    pub gradient_ge: bool,
}

impl OrderRelation {
    pub fn coordinate_incomparable(&self) -> bool {
        !self.coordinate_le && !self.coordinate_ge
    }

    pub fn gradient_incomparable(&self) -> bool {
        !self.gradient_le && !self.gradient_ge
    }
}

impl Configuration {
    /// Builds a configuration after checking every invariant.
    pub fn new(n: usize, positions: Vec<f64>, pinned: bool) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
        }
        let expected = if pinned { n - 1 } else { n };
        if positions.len() != expected {
            return Err(Error::SizeMismatch(format!(
                "expected {expected} positions for n = {n} (pinned = {pinned}), got {}",
                positions.len()
            )));
        }
        let c = Configuration { n, positions, pinned };
        let violations = c.validate();
        if let Some(v) = violations.first() {
            return Err(Error::InvalidConfiguration(format!(
                "{v} ({} violation(s) total)",
                violations.len()
            )));
        }
        Ok(c)
    }

    /// The maximal configuration `∧` with every particle at `n` (pinned).
    pub fn wedge(n: usize) -> Self {
        Configuration { n, positions: vec![n as f64; n - 1], pinned: true }
    }

    /// The minimal configuration `∨` with every particle at `0` (pinned).
    pub fn vee(n: usize) -> Self {
        Configuration { n, positions: vec![0.0; n - 1], pinned: true }
    }

    /// The flat interface `x_k = k`, the equilibrium mean profile (pinned).
    pub fn linear(n: usize) -> Self {
        Configuration { n, positions: (1..n).map(|k| k as f64).collect(), pinned: true }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pinned(&self) -> bool {
        self.pinned
    }

    /// Stored coordinates: `x_1..x_{n-1}` if pinned, else `x_1..x_n`.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub(crate) fn positions_mut(&mut self) -> &mut [f64] {
        &mut self.positions
    }

    /// Position of particle `k` for `k = 0..=n`, walls included.
    pub fn position(&self, k: usize) -> f64 {
        debug_assert!(k <= self.n);
        if k == 0 {
            0.0
        } else if self.pinned && k == self.n {
            self.n as f64
        } else {
            self.positions[k - 1]
        }
    }

    /// Resampling-interval length `∇x_k = x_{k+1} - x_{k-1}` for a mobile
    /// site `k` in `1..=n-1`.
    pub fn gradient(&self, site: usize) -> f64 {
        debug_assert!(site >= 1 && site < self.n);
        self.position(site + 1) - self.position(site - 1)
    }

    /// Returns every violated invariant; an empty list means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let wall = self.n as f64;
        let mut prev = 0.0;
        for (i, &x) in self.positions.iter().enumerate() {
            if !x.is_finite() {
                out.push(Violation { index: i, magnitude: f64::NAN, kind: ViolationKind::NonFinite });
                continue;
            }
            if x < 0.0 {
                out.push(Violation { index: i, magnitude: -x, kind: ViolationKind::Negative });
            }
            if x < prev {
                out.push(Violation {
                    index: i,
                    magnitude: prev - x,
                    kind: ViolationKind::DecreasingPair,
                });
            }
            if self.pinned && x > wall {
                out.push(Violation {
                    index: i,
                    magnitude: x - wall,
                    kind: ViolationKind::AboveUpperWall,
                });
            }
            prev = x;
        }
        out
    }

    /// Increment variables `η_k = x_k - x_{k-1}`, `k = 1..=n`.
    ///
    /// Each entry is the reconstruction gap: left-to-right cumulative
    /// summation of the result reproduces the stored positions bit-exactly
    /// (see [`from_increments`]) whenever the positions are reachable by
    /// cumulative summation at all — true for every configuration built by
    /// this module. A gap can differ from the plain floating point
    /// difference by one ulp, which is what makes the round trip exact.
    /// (A coordinate sitting exactly at a half-ulp tie of its predecessor
    /// has no exact reconstruction in round-to-even; such positions cannot
    /// be produced by summation and reconstruct one ulp off.)
    pub fn increments(&self) -> Increments {
        let mut eta = Vec::with_capacity(self.n);
        let mut acc = 0.0;
        for &x in &self.positions {
            let d = exact_gap(acc, x);
            eta.push(d);
            acc += d;
        }
        if self.pinned {
            eta.push(self.n as f64 - acc);
        }
        Increments { eta }
    }
}

/// The smallest nonnegative `d` with `acc + d == x` in floating point.
/// `x - acc` already rounds to a sum one ulp away from `x` at worst.
fn exact_gap(acc: f64, x: f64) -> f64 {
    debug_assert!(x >= acc);
    let mut d = x - acc;
    while acc + d > x {
        d = d.next_down();
    }
    while acc + d < x {
        d = d.next_up();
    }
    d
}

/// Rebuilds a configuration from increments by left-to-right cumulative
/// summation, the inverse of [`Configuration::increments`].
pub fn from_increments(n: usize, eta: &[f64], pinned: bool) -> Result<Configuration> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
    }
    if eta.len() != n {
        return Err(Error::SizeMismatch(format!(
            "expected {n} increments, got {}",
            eta.len()
        )));
    }
    for (index, &v) in eta.iter().enumerate() {
        if v.is_nan() || v < 0.0 {
            return Err(Error::NegativeIncrement { index, value: v });
        }
    }
    if pinned {
        let sum: f64 = eta.iter().sum();
        if (sum - n as f64).abs() > 1e-9 * n as f64 {
            return Err(Error::BadIncrementSum { sum, n });
        }
    }
    let stored = if pinned { n - 1 } else { n };
    let mut positions = Vec::with_capacity(stored);
    let mut acc = 0.0;
    for &v in &eta[..stored] {
        acc += v;
        positions.push(acc);
    }
    Ok(Configuration { n, positions, pinned })
}

/// Coordinate order and gradient order between two configurations of the same
/// size and pinning.
pub fn compare(a: &Configuration, b: &Configuration) -> Result<OrderRelation> {
    if a.n != b.n || a.pinned != b.pinned {
        return Err(Error::SizeMismatch(format!(
            "cannot compare (n = {}, pinned = {}) with (n = {}, pinned = {})",
            a.n, a.pinned, b.n, b.pinned
        )));
    }
    let mut rel = OrderRelation {
        coordinate_le: true,
        coordinate_ge: true,
        gradient_le: true,
        gradient_ge: true,
    };
    for (&xa, &xb) in a.positions.iter().zip(&b.positions) {
        rel.coordinate_le &= xa <= xb;
        rel.coordinate_ge &= xa >= xb;
    }
    let (ea, eb) = (a.increments(), b.increments());
    for (&ga, &gb) in ea.eta().iter().zip(eb.eta()) {
        rel.gradient_le &= ga <= gb;
        rel.gradient_ge &= ga >= gb;
    }
    Ok(rel)
}

/// `count` i.i.d. Gamma(alpha, 1) draws with a positive sum.
fn gamma_batch(count: usize, alpha: f64, rng: &mut impl Rng) -> Result<(Vec<f64>, f64)> {
    let gamma = Gamma::new(alpha, 1.0)
        .map_err(|e| Error::InvalidParameter(format!("gamma(alpha = {alpha}): {e}")))?;
    for _ in 0..GAMMA_RETRY_CAP {
        let draws: Vec<f64> = (0..count).map(|_| gamma.sample(rng)).collect();
        let sum: f64 = draws.iter().sum();
        if sum > 0.0 && sum.is_finite() {
            return Ok((draws, sum));
        }
    }
    Err(Error::ZeroGammaSum { retries: GAMMA_RETRY_CAP })
}

/// Exact sample from the equilibrium law `π_{n,α}`: `n` i.i.d. Gamma(α) draws
/// normalized to sum to `n`, returned through their partial sums. Marginally
/// `E[x_k] = k`.
pub fn sample_equilibrium(n: usize, alpha: f64, rng: &mut impl Rng) -> Result<Configuration> {
    sample_pinned_equilibrium(n, n, alpha, rng)
}

/// Exact sample from `π_{k,α}`, the equilibrium law conditioned on
/// `x_k = n`: the first `k` increments are a scaled Dirichlet summing to `n`,
/// the rest are zero. `k = 1` gives the maximal configuration
/// deterministically; `k = n` recovers [`sample_equilibrium`].
pub fn sample_pinned_equilibrium(
    k: usize,
    n: usize,
    alpha: f64,
    rng: &mut impl Rng,
) -> Result<Configuration> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k must be in 1..={n}, got {k}")));
    }
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let wall = n as f64;
    if k == 1 {
        return Ok(Configuration::wedge(n));
    }
    let (draws, sum) = gamma_batch(k, alpha, rng)?;
    let mut positions = Vec::with_capacity(n - 1);
    let mut acc = 0.0;
    for &g in &draws[..k - 1] {
        acc += wall * g / sum;
        positions.push(acc.min(wall));
    }
    positions.resize(n - 1, wall);
    Ok(Configuration { n, positions, pinned: true })
}

/// The initial condition of the mixing-time lower bound: the first
/// `⌊n/2⌋` increments are a scaled Dirichlet summing to `n`, the remaining
/// particles sit on the wall. For even `n`, `E[x_k] = min(2k, n)`.
pub fn sample_wilson_initial(n: usize, alpha: f64, rng: &mut impl Rng) -> Result<Configuration> {
    sample_pinned_equilibrium(n / 2, n, alpha, rng)
}
