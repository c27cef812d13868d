//! Monte Carlo probes of weak convergence in `D[0,1]`.
//!
//! Convergence in distribution of paths is checked through finite-dimensional
//! values and continuous functionals. A row compares draws of a functional of
//! `X_n` with the limit law, either in closed form (normal or half-normal when
//! the limit is a Wiener process under a deterministic linear clock) or
//! through an equally sized sample of the limit process. Passing every row is
//! a necessary condition for convergence, not a proof of it.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::error::{param, Error, Result};
use crate::paths::PiecewisePath;
use crate::processes::{InnerFamily, OuterFamily, ProcessSampler};
use crate::rng::{Role, Seed};

/// Asymptotic 99% Kolmogorov constant.
pub const KS_99: f64 = 1.628;

/// A real-valued functional of a path on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum FunctionalSpec {
    ValueAt { t: f64 },
    /// `sup_{[0,1]} x`.
    RunningMax,
    Terminal,
    /// `x(t) - x(s)`.
    Increment { s: f64, t: f64 },
    /// `integral_0^1 x`.
    Integral,
}

impl FunctionalSpec {
    pub fn eval(&self, path: &PiecewisePath) -> Result<f64> {
        match *self {
            FunctionalSpec::ValueAt { t } => path.eval(t),
            FunctionalSpec::RunningMax => Ok(path.restrict(1.0)?.supremum()),
            FunctionalSpec::Terminal => path.eval(1.0),
            FunctionalSpec::Increment { s, t } => Ok(path.eval(t)? - path.eval(s)?),
            FunctionalSpec::Integral => Ok(path.restrict(1.0)?.integral()),
        }
    }

    /// Short label used in reports, e.g. `value_at(0.5)`.
    pub fn label(&self) -> String {
        let mut s = String::new();
        let _ = match *self {
            FunctionalSpec::ValueAt { t } => write!(s, "value_at({t})"),
            FunctionalSpec::RunningMax => write!(s, "running_max"),
            FunctionalSpec::Terminal => write!(s, "terminal"),
            FunctionalSpec::Increment { s: a, t: b } => write!(s, "increment({a},{b})"),
            FunctionalSpec::Integral => write!(s, "integral"),
        };
        s
    }

    /// Law of the functional applied to `W(a t)` for a standard Wiener `W`.
    pub fn wiener_law(&self, a: f64) -> Option<Reference> {
        if !(a > 0.0) {
            return None;
        }
        let normal = |variance: f64| Reference::Normal { mean: 0.0, variance };
        match *self {
            FunctionalSpec::ValueAt { t } if t > 0.0 => Some(normal(a * t)),
            FunctionalSpec::Terminal => Some(normal(a)),
            FunctionalSpec::Increment { s, t } if t > s => Some(normal(a * (t - s))),
            FunctionalSpec::Integral => Some(normal(a / 3.0)),
            FunctionalSpec::RunningMax => Some(Reference::HalfNormal { scale: libm::sqrt(a) }),
            _ => None,
        }
    }
}

/// A closed-form limit law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reference {
    Normal { mean: f64, variance: f64 },
    /// Law of `|N(0, scale^2)|`.
    HalfNormal { scale: f64 },
}

impl Reference {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Reference::Normal { mean, variance } => normal_cdf((x - mean) / libm::sqrt(variance)),
            Reference::HalfNormal { scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    libm::erf(x / (scale * core::f64::consts::SQRT_2))
                }
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Reference::Normal { variance, .. } => variance,
            Reference::HalfNormal { scale } => scale * scale * (1.0 - 2.0 / core::f64::consts::PI),
        }
    }

    pub fn label(&self) -> String {
        let mut s = String::new();
        let _ = match *self {
            Reference::Normal { mean, variance } => write!(s, "normal({mean},{variance})"),
            Reference::HalfNormal { scale } => write!(s, "half_normal({scale})"),
        };
        s
    }
}

/// Standard normal distribution function, `0.5 erfc(-x / sqrt 2)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

fn sorted(u: &[f64]) -> Result<Vec<f64>> {
    if u.is_empty() {
        return Err(Error::EmptySample);
    }
    if u.iter().any(|x| x.is_nan()) {
        return Err(param("sample", "contains NaN"));
    }
    let mut v = u.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `sup_x |F_u(x) - F_v(x)|` for the empirical distribution functions.
pub fn ks_two_sample(u: &[f64], v: &[f64]) -> Result<f64> {
    let a = sorted(u)?;
    let b = sorted(v)?;
    let (m, n) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    // one sample exhausted: the other EDF is below 1 until its end
    d = d.max((i as f64 / m - j as f64 / n).abs());
    Ok(d)
}

/// `sup_x |F_u(x) - F(x)|` for a continuous distribution function `F`.
pub fn ks_against_cdf(u: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let a = sorted(u)?;
    let m = a.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in a.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / m - f).max(f - i as f64 / m);
    }
    Ok(d)
}

pub fn ks_against_normal(u: &[f64], mean: f64, variance: f64) -> Result<f64> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(param("variance", "must be positive and finite"));
    }
    let sd = libm::sqrt(variance);
    ks_against_cdf(u, |x| normal_cdf((x - mean) / sd))
}

/// `integral |F_u - F_v|`, the Wasserstein-1 distance of the two empirical
/// laws.
pub fn wasserstein1(u: &[f64], v: &[f64]) -> Result<f64> {
    let a = sorted(u)?;
    let b = sorted(v)?;
    let (m, n) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut x = a[0].min(b[0]);
    let mut total = 0.0;
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => break,
        };
        total += (i as f64 / m - j as f64 / n).abs() * (next - x);
        while i < a.len() && a[i] <= next {
            i += 1;
        }
        while j < b.len() && b[j] <= next {
            j += 1;
        }
        x = next;
    }
    Ok(total)
}

/// Wasserstein-1 distance between the empirical law of `u` and a reference,
/// by quadrature of `|F_u - F|` between the sample extremes padded by the
/// reference tails.
fn wasserstein_against(u: &[f64], reference: &Reference) -> Result<f64> {
    let a = sorted(u)?;
    let m = a.len() as f64;
    let sd = libm::sqrt(reference.variance().max(1e-300));
    let lo = a[0].min(-8.0 * sd);
    let hi = a[a.len() - 1].max(8.0 * sd);
    // midpoint rule between consecutive sample points, refined by a fixed grid
    let mut pts: Vec<f64> = a.clone();
    let grid = 2048;
    pts.extend((0..=grid).map(|k| lo + (hi - lo) * k as f64 / grid as f64));
    pts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut idx = 0;
    for w in pts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x1 <= x0 {
            continue;
        }
        while idx < a.len() && a[idx] <= x0 {
            idx += 1;
        }
        let fe = idx as f64 / m;
        let mid = 0.5 * (x0 + x1);
        total += (fe - reference.cdf(mid)).abs() * (x1 - x0);
    }
    Ok(total)
}

/// `m` draws of each functional from `sampler`; draw `i` uses
/// `base.with_index(i)`.
pub fn sample_functionals(
    sampler: &ProcessSampler,
    fs: &[FunctionalSpec],
    m: usize,
    base: Seed,
) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = fs.iter().map(|_| Vec::with_capacity(m)).collect();
    for i in 0..m {
        let path = sampler.sample(base.with_index(i as u64))?;
        for (col, f) in out.iter_mut().zip(fs) {
            col.push(f.eval(&path)?);
        }
    }
    Ok(out)
}

pub fn sample_functional(sampler: &ProcessSampler, f: FunctionalSpec, m: usize, seed: Seed) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(param("m", "must be at least 1"));
    }
    Ok(sample_functionals(sampler, &[f], m, seed)?.remove(0))
}

/// Mean and unbiased variance.
pub fn moments(u: &[f64]) -> (f64, f64) {
    let m = u.len() as f64;
    let mean = u.iter().sum::<f64>() / m;
    let var = if u.len() > 1 {
        u.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(deny_unknown_fields))]
pub struct ExperimentConfig {
    /// Portfolio sizes, in report order.
    pub n: Vec<u64>,
    pub outer: OuterFamily,
    pub inner: InnerFamily,
    pub functionals: Vec<FunctionalSpec>,
    pub samples: usize,
    pub seed: u64,
    /// Stream namespace; distinct experiments should use distinct ids.
    #[cfg_attr(feature = "serde", serde(default))]
    pub experiment: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(param("n", "needs at least one positive portfolio size"));
        }
        if self.functionals.is_empty() {
            return Err(param("functionals", "needs at least one functional"));
        }
        if self.samples == 0 {
            return Err(param("samples", "must be at least 1"));
        }
        self.inner.validate()?;
        for f in &self.functionals {
            let ok = match *f {
                FunctionalSpec::ValueAt { t } => (0.0..=1.0).contains(&t),
                FunctionalSpec::Increment { s, t } => (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t) && s <= t,
                _ => true,
            };
            if !ok {
                return Err(param("functionals", "times must lie in [0, 1] with s <= t"));
            }
        }
        Ok(())
    }

    pub fn sampler(&self, n: u64) -> Result<ProcessSampler> {
        ProcessSampler::substitute(
            ProcessSampler::outer(self.outer.clone(), n, 1.0),
            ProcessSampler::inner(self.inner.clone(), n),
        )
    }

    pub fn limit_sampler(&self) -> Result<ProcessSampler> {
        ProcessSampler::substitute(
            ProcessSampler::outer(self.outer.limit(), 1, 1.0),
            ProcessSampler::inner(self.inner.limit(), 1),
        )
    }

    /// Closed-form law of `f` under the limit process, when one is known.
    pub fn closed_form(&self, f: &FunctionalSpec) -> Option<Reference> {
        if !self.outer.limit().is_wiener_like() {
            return None;
        }
        let a = self.inner.limit().deterministic_slope()?;
        f.wiener_law(a)
    }

    fn stream(&self, n: u64) -> Seed {
        Seed::new(self.seed).with_experiment(self.experiment.wrapping_mul(0x1_0000_0001).wrapping_add(n))
    }
}

/// One `(n, functional)` comparison.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ReportRow {
    pub n: u64,
    pub functional: String,
    /// Kolmogorov-Smirnov distance to the limit law.
    pub statistic: f64,
    /// Limit law used: a closed form label or `limit_sample`.
    pub reference: String,
    /// 99% critical value: `1.628 / sqrt m` against a closed form,
    /// `1.628 sqrt(2 / m)` against a limit sample.
    pub critical_99: f64,
    pub pass: bool,
    pub wasserstein: f64,
    pub sample_mean: f64,
    pub sample_variance: f64,
    /// Variance of the limit law, when known.
    pub reference_variance: Option<f64>,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Trend {
    pub functional: String,
    pub first: f64,
    pub last: f64,
    /// Increases between consecutive `n` larger than the critical value.
    pub violations: usize,
    pub non_increasing: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConvergenceReport {
    pub rows: Vec<ReportRow>,
    pub trends: Vec<Trend>,
}

/// Runs every `(n, functional)` row of `config` in order.
pub fn convergence_experiment(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let m = config.samples;
    let fs = &config.functionals;
    let closed: Vec<Option<Reference>> = fs.iter().map(|f| config.closed_form(f)).collect();
    let limit_draws = if closed.iter().any(Option::is_none) {
        let limit = config.limit_sampler()?;
        Some(sample_functionals(
            &limit,
            fs,
            m,
            Seed::new(config.seed).with_experiment(config.experiment).split(Role::Reference),
        )?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(config.n.len() * fs.len());
    for &n in &config.n {
        let draws = sample_functionals(&config.sampler(n)?, fs, m, config.stream(n))?;
        for (k, f) in fs.iter().enumerate() {
            let col = &draws[k];
            let (mean, var) = moments(col);
            let (statistic, reference, critical, w1, ref_var) = match (&closed[k], &limit_draws) {
                (Some(r), _) => (
                    ks_against_cdf(col, |x| r.cdf(x))?,
                    r.label(),
                    KS_99 / libm::sqrt(m as f64),
                    wasserstein_against(col, r)?,
                    Some(r.variance()),
                ),
                (None, Some(lim)) => (
                    ks_two_sample(col, &lim[k])?,
                    String::from("limit_sample"),
                    KS_99 * libm::sqrt(2.0 / m as f64),
                    wasserstein1(col, &lim[k])?,
                    None,
                ),
                (None, None) => unreachable!("limit draws exist whenever a closed form is missing"),
            };
            rows.push(ReportRow {
                n,
                functional: f.label(),
                statistic,
                reference,
                critical_99: critical,
                pass: statistic < critical || statistic == 0.0,
                wasserstein: w1,
                sample_mean: mean,
                sample_variance: var,
                reference_variance: ref_var,
                samples: m,
                seed: config.seed,
            });
        }
    }
    let trends = fs
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let series: Vec<&ReportRow> = rows.iter().skip(k).step_by(fs.len()).collect();
            let violations = series
                .windows(2)
                .filter(|w| w[1].statistic > w[0].statistic + w[1].critical_99)
                .count();
            Trend {
                functional: f.label(),
                first: series[0].statistic,
                last: series[series.len() - 1].statistic,
                violations,
                non_increasing: violations == 0,
            }
        })
        .collect();
    Ok(ConvergenceReport { rows, trends })
}

/// Named configurations.
pub mod presets {
    use super::*;
    use crate::processes::JumpFamily;

    fn probes() -> Vec<FunctionalSpec> {
        alloc::vec![
            FunctionalSpec::ValueAt { t: 0.25 },
            FunctionalSpec::ValueAt { t: 0.5 },
            FunctionalSpec::Terminal,
            FunctionalSpec::RunningMax,
            FunctionalSpec::Integral,
        ]
    }

    /// Insurance model with `Lambda_n / n` converging to a random clock:
    /// Rademacher claims and an integrated-step contract intensity.
    pub fn corollary1(seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            n: alloc::vec![100, 1_000, 10_000],
            outer: OuterFamily::CompoundPoisson {
                jumps: JumpFamily::Rademacher,
            },
            inner: InnerFamily::IntegratedStep {
                pieces: 4,
                low: 0.25,
                high: 1.5,
                endpoint: None,
            },
            functionals: probes(),
            samples: 2_000,
            seed,
            experiment: 1,
        }
    }

    /// Insurance model with deterministic clock `Lambda(t) = a t`; the limit is
    /// `sqrt(a) W`.
    pub fn corollary2(seed: u64, a: f64) -> ExperimentConfig {
        ExperimentConfig {
            n: alloc::vec![100, 1_000, 10_000],
            outer: OuterFamily::CompoundPoisson {
                jumps: JumpFamily::Rademacher,
            },
            inner: InnerFamily::Linear { a },
            functionals: probes(),
            samples: 5_000,
            seed,
            experiment: 2,
        }
    }

    /// Identity outer path under the identity clock; every statistic is 0.
    pub fn identity(seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            n: alloc::vec![1],
            outer: OuterFamily::Identity,
            inner: InnerFamily::Linear { a: 1.0 },
            functionals: probes(),
            samples: 100,
            seed,
            experiment: 3,
        }
    }
}
