//! Seeded samplers for the outer processes (Poisson, compound Poisson,
//! random-walk Wiener approximation), the inner time changes, and their
//! compositions `X(t) = X'(Lambda(t))`.
//!
//! Every sampler is a plain descriptor: `sample(seed)` is a pure function of
//! the descriptor and a [`Seed`]. A substituted sampler draws the inner time
//! change from `seed.split(Role::Inner)` and the outer path from
//! `seed.split(Role::Outer)`, so the two are independent by construction and
//! the outer horizon can be fitted to the inner maximum.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use crate::error::{param, Result};
use crate::paths::{compose, Jump, PathBuilder, PiecewisePath, TimeChange};
use crate::rng::{Role, Seed};

/// Default random-walk resolution per unit of time.
pub const DEFAULT_STEPS_PER_UNIT: u64 = 1 << 14;

/// Zero-mean, unit-variance claim size families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum JumpFamily {
    /// `+-1` with equal probability.
    Rademacher,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    CenteredUniform,
    Normal,
}

impl JumpFamily {
    #[inline]
    fn draw(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            JumpFamily::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            JumpFamily::CenteredUniform => {
                let r3 = libm::sqrt(3.0);
                rng.random_range(-r3..r3)
            }
            JumpFamily::Normal => StandardNormal.sample(rng),
        }
    }
}

/// A unit-variance family scaled by `scale`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JumpDistribution {
    pub family: JumpFamily,
    pub scale: f64,
}

impl JumpDistribution {
    pub fn new(family: JumpFamily, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(param("scale", "must be positive and finite"));
        }
        Ok(Self { family, scale })
    }

    /// Scale `1/sqrt(n)`: `n` summands have total variance 1.
    pub fn portfolio(family: JumpFamily, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(param("n", "must be at least 1"));
        }
        Self::new(family, 1.0 / libm::sqrt(n as f64))
    }

    pub fn mean(&self) -> f64 {
        0.0
    }

    pub fn variance(&self) -> f64 {
        self.scale * self.scale
    }

    #[inline]
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        self.scale * self.family.draw(rng)
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(param("horizon", "must be positive and finite"));
    }
    Ok(())
}

/// Arrival times of a rate-`rate` Poisson process on `[0, horizon]`.
fn arrivals(rate: f64, horizon: f64, rng: &mut ChaCha8Rng, mut each: impl FnMut(f64, &mut ChaCha8Rng)) -> Result<()> {
    let exp = Exp::new(rate).map_err(|_| param("rate", "must be positive and finite"))?;
    let mut t = 0.0;
    loop {
        t += exp.sample(rng);
        if t > horizon {
            return Ok(());
        }
        each(t, rng);
    }
}

fn counting_path(rate: f64, horizon: f64, size: f64, seed: Seed) -> Result<PiecewisePath> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(param("rate", "must be positive and finite"));
    }
    check_horizon(horizon)?;
    let mut rng = seed.rng();
    let mut b = PathBuilder::with_capacity((rate * horizon) as usize + 8);
    b.push(0.0, 0.0, 0.0);
    let mut level = 0.0;
    arrivals(rate, horizon, &mut rng, |t, _| {
        level += size;
        b.push(t, level, 0.0);
    })?;
    Ok(b.finish(horizon, level))
}

/// Poisson counting path with intensity `rate`, started at 0.
pub fn poisson_path(rate: f64, horizon: f64, seed: Seed) -> Result<PiecewisePath> {
    counting_path(rate, horizon, 1.0, seed)
}

/// `sum_{i <= pi(n t)} xi_i` on `[0, horizon]` together with the arrival
/// log `(time, xi_i)`.
pub fn compound_poisson_with_log(
    n: u64,
    jd: &JumpDistribution,
    horizon: f64,
    seed: Seed,
) -> Result<(PiecewisePath, Vec<Jump>)> {
    if n == 0 {
        return Err(param("n", "must be at least 1"));
    }
    check_horizon(horizon)?;
    let rate = n as f64;
    let mut rng = seed.rng();
    let expected = (rate * horizon) as usize;
    let mut b = PathBuilder::with_capacity(expected + 8 + expected / 16);
    let mut log = Vec::with_capacity(expected + 8 + expected / 16);
    b.push(0.0, 0.0, 0.0);
    let mut level = 0.0;
    arrivals(rate, horizon, &mut rng, |t, rng| {
        let size = jd.draw(rng);
        level += size;
        b.push(t, level, 0.0);
        log.push(Jump { time: t, size });
    })?;
    Ok((b.finish(horizon, level), log))
}

/// `X'_n(t) = sum_{i <= pi(n t)} xi_in` on `[0, horizon]`.
pub fn compound_poisson_outer(n: u64, jd: &JumpDistribution, horizon: f64, seed: Seed) -> Result<PiecewisePath> {
    compound_poisson_with_log(n, jd, horizon, seed).map(|(p, _)| p)
}

/// Linear interpolation of a `+-1` random walk with `steps` steps over
/// `[0, horizon]`, scaled so that the value at `i h` is `S_i sqrt(h)`.
pub fn donsker_wiener(steps: u64, horizon: f64, seed: Seed) -> Result<PiecewisePath> {
    if steps == 0 {
        return Err(param("steps", "must be at least 1"));
    }
    check_horizon(horizon)?;
    let h = horizon / steps as f64;
    let amp = libm::sqrt(h);
    let mut rng = seed.rng();
    let mut b = PathBuilder::with_capacity(steps as usize);
    let mut s = 0.0;
    let mut next = 0.0;
    for i in 0..steps {
        let up = rng.random::<bool>();
        let delta = if up { amp } else { -amp };
        next = s + delta;
        b.push(i as f64 * h, s, delta / h);
        s = next;
    }
    Ok(b.finish(horizon, next))
}

/// Random-walk path with a fixed per-unit resolution covering at least
/// `horizon`. Paths for different horizons share their common prefix.
fn wiener_cover(steps_per_unit: u64, horizon: f64, seed: Seed) -> Result<PiecewisePath> {
    if steps_per_unit == 0 {
        return Err(param("steps_per_unit", "must be at least 1"));
    }
    check_horizon(horizon)?;
    let steps = libm::ceil(horizon * steps_per_unit as f64).max(1.0) as u64;
    let span = steps as f64 / steps_per_unit as f64;
    let path = donsker_wiener(steps, span, seed)?;
    if span > horizon {
        path.restrict(horizon)
    } else {
        Ok(path)
    }
}

/// `Lambda(t) = a t` on `[0, 1]`.
pub fn time_change_linear(a: f64) -> Result<TimeChange> {
    TimeChange::linear(a)
}

/// Parametric families of random inner time changes on `[0, 1]`, all started
/// at 0.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum InnerFamily {
    /// Deterministic `a t`.
    Linear { a: f64 },
    /// Integral of a step intensity drawn uniformly from `[low, high]` on
    /// `pieces` equal pieces, optionally rescaled to end at `endpoint`.
    /// Strictly increasing whenever `low > 0`.
    IntegratedStep {
        pieces: u32,
        low: f64,
        high: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        endpoint: Option<f64>,
    },
    /// Pure-jump path: Poisson(`rate`) jump times with exponential sizes of
    /// mean `jump_mean`.
    Subordinator { rate: f64, jump_mean: f64 },
    /// `pi(n a t) / n` for a unit Poisson process `pi`; converges to `a t`.
    ScaledPoisson { a: f64 },
}

impl InnerFamily {
    /// Limit in distribution as the portfolio size grows.
    pub fn limit(&self) -> InnerFamily {
        match *self {
            InnerFamily::ScaledPoisson { a } => InnerFamily::Linear { a },
            ref other => other.clone(),
        }
    }

    /// Deterministic limit slope, when the family is deterministic.
    pub fn deterministic_slope(&self) -> Option<f64> {
        match *self {
            InnerFamily::Linear { a } => Some(a),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InnerFamily::Linear { a } => {
                if !(a >= 0.0) || !a.is_finite() {
                    return Err(param("a", "must be finite and non-negative"));
                }
            }
            InnerFamily::IntegratedStep { pieces, low, high, endpoint } => {
                if pieces == 0 {
                    return Err(param("pieces", "must be at least 1"));
                }
                if !(low >= 0.0) || !(high >= low) || !high.is_finite() {
                    return Err(param("low/high", "need 0 <= low <= high < inf"));
                }
                if let Some(c) = endpoint {
                    if !(c > 0.0) || !c.is_finite() || high == 0.0 {
                        return Err(param("endpoint", "must be positive with a positive intensity"));
                    }
                }
            }
            InnerFamily::Subordinator { rate, jump_mean } => {
                if !(rate > 0.0) || !rate.is_finite() {
                    return Err(param("rate", "must be positive and finite"));
                }
                if !(jump_mean > 0.0) || !jump_mean.is_finite() {
                    return Err(param("jump_mean", "must be positive and finite"));
                }
            }
            InnerFamily::ScaledPoisson { a } => {
                if !(a > 0.0) || !a.is_finite() {
                    return Err(param("a", "must be positive and finite"));
                }
            }
        }
        Ok(())
    }

    /// One draw for portfolio size `n` (only the scaled family uses it).
    pub fn sample(&self, n: u64, seed: Seed) -> Result<TimeChange> {
        self.validate()?;
        match *self {
            InnerFamily::Linear { a } => TimeChange::linear(a),
            InnerFamily::IntegratedStep { pieces, low, high, endpoint } => {
                let mut rng = seed.rng();
                let width = 1.0 / pieces as f64;
                let rates: Vec<f64> = (0..pieces)
                    .map(|_| if high > low { rng.random_range(low..high) } else { low })
                    .collect();
                let total: f64 = rates.iter().map(|r| r * width).sum();
                let factor = match endpoint {
                    Some(c) if total > 0.0 => c / total,
                    _ => 1.0,
                };
                let mut b = PathBuilder::with_capacity(pieces as usize);
                let mut v = 0.0;
                for (i, r) in rates.iter().enumerate() {
                    b.push(i as f64 * width, v, r * factor);
                    v += r * factor * width;
                }
                let end = endpoint.filter(|_| total > 0.0).unwrap_or(v);
                TimeChange::classify(b.finish(1.0, end))
            }
            InnerFamily::Subordinator { rate, jump_mean } => {
                let mut rng = seed.rng();
                let size = Exp::new(1.0 / jump_mean).map_err(|_| param("jump_mean", "must be positive"))?;
                let mut b = PathBuilder::with_capacity((rate as usize) + 8);
                b.push(0.0, 0.0, 0.0);
                let mut level = 0.0;
                arrivals(rate, 1.0, &mut rng, |t, rng| {
                    level += size.sample(rng);
                    b.push(t, level, 0.0);
                })?;
                TimeChange::non_decreasing(b.finish(1.0, level))
            }
            InnerFamily::ScaledPoisson { a } => {
                if n == 0 {
                    return Err(param("n", "must be at least 1"));
                }
                let inv = 1.0 / n as f64;
                let path = counting_path(n as f64 * a, 1.0, 1.0, seed)?;
                let scaled = PiecewisePath::from_parts(
                    path.breakpoints().to_vec(),
                    path.values().iter().map(|v| v * inv).collect(),
                    path.slopes().to_vec(),
                    path.terminal() * inv,
                )?;
                TimeChange::non_decreasing(scaled)
            }
        }
    }
}

/// `Lambda` drawn from `family`; `Lambda(0) = 0` for every shipped family.
pub fn time_change_random(family: &InnerFamily, n: u64, seed: Seed) -> Result<TimeChange> {
    family.sample(n, seed)
}

/// Outer process families indexed by the portfolio size `n`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum OuterFamily {
    /// `X'_n(t) = sum_{i <= pi(n t)} xi_in` with `xi_in = xi / sqrt(n)`;
    /// converges to a standard Wiener process.
    CompoundPoisson { jumps: JumpFamily },
    /// Poisson counting process with intensity `rate`.
    Poisson { rate: f64 },
    /// Random-walk Wiener approximation with `steps_per_unit` steps per unit
    /// of time.
    Wiener {
        #[cfg_attr(feature = "serde", serde(default = "default_steps"))]
        steps_per_unit: u64,
    },
    /// The deterministic path `x(t) = t`.
    Identity,
}

#[cfg(feature = "serde")]
fn default_steps() -> u64 {
    DEFAULT_STEPS_PER_UNIT
}

impl OuterFamily {
    pub fn limit(&self) -> OuterFamily {
        match self {
            OuterFamily::CompoundPoisson { .. } => OuterFamily::Wiener {
                steps_per_unit: DEFAULT_STEPS_PER_UNIT,
            },
            other => other.clone(),
        }
    }

    /// True when the family is a standard Wiener process or converges to one.
    pub fn is_wiener_like(&self) -> bool {
        matches!(self, OuterFamily::Wiener { .. })
    }

    pub fn sample(&self, n: u64, horizon: f64, seed: Seed) -> Result<PiecewisePath> {
        match *self {
            OuterFamily::CompoundPoisson { jumps } => {
                let jd = JumpDistribution::portfolio(jumps, n)?;
                compound_poisson_outer(n, &jd, horizon, seed)
            }
            OuterFamily::Poisson { rate } => poisson_path(rate, horizon, seed),
            OuterFamily::Wiener { steps_per_unit } => wiener_cover(steps_per_unit, horizon, seed),
            OuterFamily::Identity => {
                check_horizon(horizon)?;
                Ok(PiecewisePath::identity(horizon))
            }
        }
    }
}

/// A seeded distribution over paths.
#[derive(Clone, Debug, PartialEq)]
pub enum ProcessSampler {
    /// Outer process of portfolio size `n` on `[0, horizon]`.
    Outer { family: OuterFamily, n: u64, horizon: f64 },
    /// Inner time change on `[0, 1]`.
    Inner { family: InnerFamily, n: u64 },
    /// `outer o inner`, with the outer horizon fitted per sample.
    Substitute {
        outer: Box<ProcessSampler>,
        inner: Box<ProcessSampler>,
    },
}

impl ProcessSampler {
    pub fn outer(family: OuterFamily, n: u64, horizon: f64) -> Self {
        ProcessSampler::Outer { family, n, horizon }
    }

    pub fn inner(family: InnerFamily, n: u64) -> Self {
        ProcessSampler::Inner { family, n }
    }

    /// Sampler of `X'(Lambda(t))` with `X'` and `Lambda` independent.
    pub fn substitute(outer: ProcessSampler, inner: ProcessSampler) -> Result<Self> {
        if !matches!(inner, ProcessSampler::Inner { .. }) {
            return Err(param("inner", "must be a time-change sampler"));
        }
        if !matches!(outer, ProcessSampler::Outer { .. }) {
            return Err(param("outer", "must be an outer-process sampler"));
        }
        Ok(ProcessSampler::Substitute {
            outer: Box::new(outer),
            inner: Box::new(inner),
        })
    }

    /// Horizon of emitted paths.
    pub fn horizon(&self) -> f64 {
        match self {
            ProcessSampler::Outer { horizon, .. } => *horizon,
            _ => 1.0,
        }
    }

    pub fn sample_time_change(&self, seed: Seed) -> Result<TimeChange> {
        match self {
            ProcessSampler::Inner { family, n } => family.sample(*n, seed),
            _ => Err(param("sampler", "does not produce time changes")),
        }
    }

    pub fn sample(&self, seed: Seed) -> Result<PiecewisePath> {
        match self {
            ProcessSampler::Outer { family, n, horizon } => family.sample(*n, *horizon, seed),
            ProcessSampler::Inner { .. } => self.sample_time_change(seed).map(TimeChange::into_path),
            ProcessSampler::Substitute { outer, inner } => {
                let lambda = inner.sample_time_change(seed.split(Role::Inner))?;
                let ProcessSampler::Outer { family, n, .. } = outer.as_ref() else {
                    return Err(param("outer", "must be an outer-process sampler"));
                };
                let reach = lambda.max_value();
                let horizon = if reach > 0.0 { reach } else { 1.0 };
                let x = family.sample(*n, horizon, seed.split(Role::Outer))?;
                compose(&x, &lambda)
            }
        }
    }
}

/// Shorthand for [`ProcessSampler::substitute`].
pub fn substitute(outer: ProcessSampler, inner: ProcessSampler) -> Result<ProcessSampler> {
    ProcessSampler::substitute(outer, inner)
}
