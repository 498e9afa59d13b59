//! Declarative experiment specs: a flat `key = value` file, one experiment
//! per file, with command-line `--key=value` overrides.
//!
//! Keys: `kind`, `n`, `alpha`, `reps`, `seed`, `out`, `times` (comma list)
//! or the linspace triple `t_min`/`t_max`/`t_points`, `K`, `t`, `f`, `g`,
//! `modes`. Unknown keys are rejected by name. Defaults: `alpha = 1`,
//! `reps = 1000`, `seed = 0`, `out = out`, and a kind-specific time grid.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use adjacent_walk::spectral::{meanfield_gap, spectral_gap};
use anyhow::{anyhow, bail, Context, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    GapDecay,
    HeatCurve,
    MeanfieldGap,
    MixingProfile,
    Coalesce,
    BetaTvScan,
    Fkg,
    CensorDominate,
    Separation,
    WilsonMoments,
}

impl Kind {
    pub const ALL: [Kind; 10] = [
        Kind::GapDecay,
        Kind::HeatCurve,
        Kind::MeanfieldGap,
        Kind::MixingProfile,
        Kind::Coalesce,
        Kind::BetaTvScan,
        Kind::Fkg,
        Kind::CensorDominate,
        Kind::Separation,
        Kind::WilsonMoments,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Kind::GapDecay => "gap-decay",
            Kind::HeatCurve => "heat-curve",
            Kind::MeanfieldGap => "meanfield-gap",
            Kind::MixingProfile => "mixing-profile",
            Kind::Coalesce => "coalesce",
            Kind::BetaTvScan => "beta-tv-scan",
            Kind::Fkg => "fkg",
            Kind::CensorDominate => "censor-dominate",
            Kind::Separation => "separation",
            Kind::WilsonMoments => "wilson-moments",
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Kind::GapDecay => "Monte Carlo decay of the gap eigenfunction from the top state vs the exact rate",
            Kind::HeatCurve => "per-coordinate Monte Carlo means vs the exact heat solution",
            Kind::MeanfieldGap => "decay of the centered quadratic statistic of the mean-field exchange process",
            Kind::MixingProfile => "lower/upper bracket of the distance to equilibrium on a time grid",
            Kind::Coalesce => "coalescence survival P[tau > t] of the two-phase coupling",
            Kind::BetaTvScan => "TV distance vs displacement ratio over the ordered interval-pair grid",
            Kind::Fkg => "equilibrium covariance of two named statistics",
            Kind::CensorDominate => "censored minus uncensored coordinate means from the top state",
            Kind::Separation => "midpoint witness P[X_{n/2}(t) >= n/2 + 1] from the top state",
            Kind::WilsonMoments => "eigenstatistic moments from the half-concentrated initial condition",
        }
    }

    pub fn parse(s: &str) -> Result<Kind> {
        Kind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| anyhow!("unknown kind {s:?}; see `awlab list-kinds`"))
    }
}

/// A fully resolved experiment description.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub kind: Kind,
    pub n: usize,
    pub alpha: f64,
    pub reps: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub times: Vec<f64>,
    pub k_groups: Option<usize>,
    pub t: Option<f64>,
    pub f_stat: Option<String>,
    pub g_stat: Option<String>,
    pub modes: Vec<usize>,
}

const KNOWN_KEYS: &[&str] = &[
    "kind", "n", "alpha", "reps", "seed", "out", "times", "t_min", "t_max", "t_points", "K", "k",
    "t", "f", "g", "modes",
];

fn parse_kv_text(text: &str, source: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{source}:{}: expected key = value, got {line:?}", lineno + 1))?;
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Splits a `--key=value` override argument.
pub fn parse_override(arg: &str) -> Result<(String, String)> {
    let body = arg
        .strip_prefix("--")
        .ok_or_else(|| anyhow!("override {arg:?} must look like --key=value"))?;
    let (k, v) = body
        .split_once('=')
        .ok_or_else(|| anyhow!("override {arg:?} must look like --key=value"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

struct KvBag(Vec<(String, String)>);

impl KvBag {
    /// Last occurrence wins, so overrides simply append.
    fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| anyhow!("key {key:?}: cannot parse {raw:?}")),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.get_parsed(key)?.ok_or_else(|| anyhow!("missing required key {key:?}"))
    }
}

fn parse_list<T: std::str::FromStr>(raw: &str, key: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| anyhow!("key {key:?}: cannot parse entry {s:?}")))
        .collect()
}

/// Default time grid per kind, in units natural to the experiment.
fn default_times(kind: Kind, n: usize, alpha: f64) -> Vec<f64> {
    let linspace = |lo: f64, hi: f64, count: usize| -> Vec<f64> {
        (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
    };
    match kind {
        Kind::GapDecay => linspace(0.0, 2.0 * (n as f64).ln() / spectral_gap(n), 12),
        Kind::HeatCurve => vec![1.0, 5.0, 20.0],
        Kind::MeanfieldGap => linspace(0.0, 3.0 / meanfield_gap(n, alpha), 10),
        Kind::MixingProfile | Kind::Coalesce => {
            let nf = n as f64;
            let scale = nf * nf * nf.ln() / std::f64::consts::PI.powi(2);
            linspace(0.0, 5.0 * scale, 10)
        }
        Kind::Separation => {
            let nf = n as f64;
            let scale = nf * nf * nf.ln() / std::f64::consts::PI.powi(2);
            linspace(0.0, 3.0 * scale, 12)
        }
        Kind::WilsonMoments => linspace(0.0, 2.0 * (n as f64).ln() / spectral_gap(n), 8),
        Kind::BetaTvScan | Kind::Fkg | Kind::CensorDominate => Vec::new(),
    }
}

/// Parses a spec file plus overrides into a validated [`ExperimentSpec`].
pub fn parse_spec(path: &Path, overrides: &[(String, String)]) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read spec file {}", path.display()))?;
    let mut kv = parse_kv_text(&text, &path.display().to_string())?;
    kv.extend(overrides.iter().cloned());
    resolve(KvBag(kv))
}

fn resolve(bag: KvBag) -> Result<ExperimentSpec> {
    for (key, _) in &bag.0 {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            bail!("unknown key {key:?}");
        }
    }
    let kind = Kind::parse(&bag.require::<String>("kind")?)?;
    let n = if kind == Kind::BetaTvScan {
        bag.get_parsed::<usize>("n")?.unwrap_or(2)
    } else {
        bag.require::<usize>("n")?
    };
    if n < 2 {
        bail!("key \"n\": must be >= 2, got {n}");
    }
    let alpha: f64 = bag.get_parsed("alpha")?.unwrap_or(1.0);
    if alpha.is_nan() || alpha <= 0.0 {
        bail!("key \"alpha\": must be positive, got {alpha}");
    }
    let reps: u64 = bag.get_parsed("reps")?.unwrap_or(1000);
    if reps == 0 {
        bail!("key \"reps\": must be >= 1");
    }
    let seed: u64 = bag.get_parsed("seed")?.unwrap_or(0);
    let out = PathBuf::from(bag.get("out").unwrap_or("out"));

    let times = match (bag.get("times"), bag.get("t_max")) {
        (Some(_), Some(_)) => bail!("keys \"times\" and \"t_max\" are mutually exclusive"),
        (Some(raw), None) => {
            let v: Vec<f64> = parse_list(raw, "times")?;
            if v.windows(2).any(|w| w[0] > w[1]) || v.iter().any(|t| t.is_nan() || *t < 0.0) {
                bail!("key \"times\": grid must be sorted and nonnegative");
            }
            v
        }
        (None, Some(_)) => {
            let t_min: f64 = bag.get_parsed("t_min")?.unwrap_or(0.0);
            let t_max: f64 = bag.require("t_max")?;
            let points: usize = bag.get_parsed("t_points")?.unwrap_or(12);
            if points < 2 || t_max <= t_min || t_min < 0.0 || t_min.is_nan() || t_max.is_nan() {
                bail!("keys \"t_min\"/\"t_max\"/\"t_points\": need 0 <= t_min < t_max and >= 2 points");
            }
            (0..points)
                .map(|i| t_min + (t_max - t_min) * i as f64 / (points - 1) as f64)
                .collect()
        }
        (None, None) => default_times(kind, n, alpha),
    };

    let k_groups = match bag.get("K").or_else(|| bag.get("k")) {
        Some(raw) => Some(
            raw.parse::<usize>().map_err(|_| anyhow!("key \"K\": cannot parse {raw:?}"))?,
        ),
        None => None,
    };
    let t: Option<f64> = bag.get_parsed("t")?;
    let f_stat = bag.get("f").map(str::to_string);
    let g_stat = bag.get("g").map(str::to_string);
    let modes: Vec<usize> = match bag.get("modes") {
        Some(raw) => parse_list(raw, "modes")?,
        None => vec![1, 2, 3],
    };

    let spec = ExperimentSpec {
        kind,
        n,
        alpha,
        reps,
        seed,
        out,
        times,
        k_groups,
        t,
        f_stat,
        g_stat,
        modes,
    };
    spec.validate()?;
    Ok(spec)
}

impl ExperimentSpec {
    /// Kind-specific required fields.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            Kind::Fkg => {
                if self.f_stat.is_none() {
                    bail!("missing required key \"f\" for kind fkg");
                }
                if self.g_stat.is_none() {
                    bail!("missing required key \"g\" for kind fkg");
                }
            }
            Kind::CensorDominate => {
                let k = self
                    .k_groups
                    .ok_or_else(|| anyhow!("missing required key \"K\" for kind censor-dominate"))?;
                if k < 2 || k > self.n {
                    bail!("key \"K\": must lie in 2..=n, got {k}");
                }
            }
            Kind::WilsonMoments if self.modes.iter().any(|&j| j == 0 || j >= self.n) => {
                bail!("key \"modes\": entries must lie in 1..n");
            }
            _ => {}
        }
        if self.times.is_empty()
            && !matches!(self.kind, Kind::BetaTvScan | Kind::Fkg | Kind::CensorDominate)
        {
            bail!("missing required key \"times\" (or t_max) for kind {}", self.kind.name());
        }
        Ok(())
    }

    /// The spec as `key = value` lines; parsing them back yields an equal
    /// spec (the echo stored in every summary).
    pub fn to_kv(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("kind".into(), self.kind.name().to_string()),
            ("n".into(), self.n.to_string()),
            ("alpha".into(), fmt_float(self.alpha)),
            ("reps".into(), self.reps.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("out".into(), self.out.display().to_string()),
        ];
        if !self.times.is_empty() {
            let mut list = String::new();
            for (i, t) in self.times.iter().enumerate() {
                if i > 0 {
                    list.push(',');
                }
                let _ = write!(list, "{}", fmt_float(*t));
            }
            kv.push(("times".into(), list));
        }
        if let Some(k) = self.k_groups {
            kv.push(("K".into(), k.to_string()));
        }
        if let Some(t) = self.t {
            kv.push(("t".into(), fmt_float(t)));
        }
        if let Some(f) = &self.f_stat {
            kv.push(("f".into(), f.clone()));
        }
        if let Some(g) = &self.g_stat {
            kv.push(("g".into(), g.clone()));
        }
        kv.push((
            "modes".into(),
            self.modes.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(","),
        ));
        kv
    }
}

/// Shortest decimal that round-trips the f64 (Rust's display already is).
pub fn fmt_float(x: f64) -> String {
    format!("{x}")
}

/// 17-significant-digit scientific notation for CSV cells: bit-faithful
/// round trip, `.` decimal, no separators.
pub fn fmt_csv(x: f64) -> String {
    format!("{x:.16e}")
}
