//! Deterministic sequences `(g_n, gamma_n) -> (g, gamma)` probing when the
//! composition `g_n o gamma_n` converges to `g o gamma`.
//!
//! * [`example1`]: step functions `g_n = 1_{[1/2 - 2^-n, inf)}` under linear
//!   clocks whose endpoints `gamma_n(1)` do not converge to a common value
//!   from one side, so the shared-endpoint condition of the strictly
//!   increasing class fails.
//! * [`example2`]: the same `g_n` under constant clocks with a discontinuous
//!   limit `g`.
//! * [`lemma1_family`], [`lemma2_family`]: random sequences satisfying the
//!   hypotheses of the two continuity statements, converging at a known
//!   geometric rate.
//!
//! All distances come from [`crate::metric`] and carry its certified gaps.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{param, Result};
use crate::metric::{required_horizon, rho_infinity, skorokhod_distance, sup_distance};
use crate::paths::{compose, PiecewisePath, TimeChange};
use crate::rng::Seed;

/// `(g_n, gamma_n, g, gamma)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadruple {
    pub g_n: PiecewisePath,
    pub gamma_n: TimeChange,
    pub g: PiecewisePath,
    pub gamma: TimeChange,
}

impl Quadruple {
    pub fn composed_n(&self) -> Result<PiecewisePath> {
        compose(&self.g_n, &self.gamma_n)
    }

    pub fn composed_limit(&self) -> Result<PiecewisePath> {
        compose(&self.g, &self.gamma)
    }
}

/// `alpha_n = 1 - 1/(2^n - 1) - 1/n^2` for `n > 1`, `alpha_1 = 0`.
pub fn alpha(n: u32) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let p = libm::ldexp(1.0, n as i32);
    let nf = n as f64;
    1.0 - 1.0 / (p - 1.0) - 1.0 / (nf * nf)
}

fn pow2(e: i32) -> f64 {
    libm::ldexp(1.0, e)
}

/// `g_n = 1_{[1/2 - 2^-n, inf)}`, `gamma_n(t) = alpha_n (1/2 -+ 2^-(n+1)) t`
/// (minus for even `n`, plus for odd `n`), `g = 1_{[1/2, inf)}`,
/// `gamma(t) = t/2`. Outer paths are truncated to `[0, horizon]`.
pub fn example1(n: u32, horizon: f64) -> Result<Quadruple> {
    if n < 2 {
        return Err(param("n", "example1 starts at n = 2"));
    }
    check_outer_horizon(horizon)?;
    let jump = 0.5 - pow2(-(n as i32));
    let offset = pow2(-(n as i32 + 1));
    let level = if n.is_multiple_of(2) { 0.5 - offset } else { 0.5 + offset };
    Ok(Quadruple {
        g_n: PiecewisePath::indicator(horizon, jump),
        gamma_n: TimeChange::linear(alpha(n) * level)?,
        g: PiecewisePath::indicator(horizon, 0.5),
        gamma: TimeChange::linear(0.5)?,
    })
}

/// Same `g_n` and `g` as [`example1`]; `gamma_n = 1/2 - 2^-(n+1)` and
/// `gamma = 1/2` are constant, so `gamma_n(0) != 0`.
pub fn example2(n: u32, horizon: f64) -> Result<Quadruple> {
    if n < 1 {
        return Err(param("n", "example2 starts at n = 1"));
    }
    check_outer_horizon(horizon)?;
    let jump = 0.5 - pow2(-(n as i32));
    let value = 0.5 - pow2(-(n as i32 + 1));
    Ok(Quadruple {
        g_n: PiecewisePath::indicator(horizon, jump),
        gamma_n: TimeChange::non_decreasing(PiecewisePath::constant(1.0, value))?,
        g: PiecewisePath::indicator(horizon, 0.5),
        gamma: TimeChange::non_decreasing(PiecewisePath::constant(1.0, 0.5))?,
    })
}

fn check_outer_horizon(horizon: f64) -> Result<()> {
    if !(horizon >= 1.0) || !horizon.is_finite() {
        return Err(param("horizon", "must be finite and at least 1"));
    }
    Ok(())
}

/// Random convergent sequence with `gamma_n, gamma` strictly increasing,
/// continuous and sharing the endpoint `C`.
///
/// `g` is a step path with jumps kept at least `0.05` away from `0` and `C`;
/// `g_n` moves each jump time and size by at most `rate^n`. `gamma` is
/// piecewise linear through random nodes; `gamma_n` moves the interior node
/// values by at most `rate^n` times a quarter of the smallest neighbouring
/// increment, so it stays strictly increasing and keeps `gamma_n(1) = C`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lemma1Family {
    rate: f64,
    horizon: f64,
    c: f64,
    jumps: Vec<(f64, f64)>,
    jump_moves: Vec<(f64, f64)>,
    nodes: Vec<(f64, f64)>,
    node_moves: Vec<f64>,
}

pub fn lemma1_family(seed: Seed, rate: f64, horizon: f64) -> Result<Lemma1Family> {
    check_rate(rate)?;
    check_outer_horizon(horizon)?;
    let mut rng = seed.rng();
    let c: f64 = rng.random_range(0.5..2.0);
    let count = rng.random_range(2..=5usize);
    let mut jumps = Vec::with_capacity(count);
    while jumps.len() < count {
        let t: f64 = rng.random_range(0.05..(horizon.min(c + 2.0) - 0.05));
        if (t - c).abs() < 0.05 {
            continue;
        }
        let size = rng.random_range(0.5..1.5) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        jumps.push((t, size));
    }
    jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
    jumps.dedup_by(|a, b| a.0 - b.0 < 0.05);
    let jump_moves = jumps
        .iter()
        .map(|_| (rng.random_range(-0.01..0.01), rng.random_range(-0.5..0.5)))
        .collect();
    let interior = rng.random_range(1..=4usize);
    let mut ts: Vec<f64> = (0..interior).map(|_| rng.random_range(0.05..0.95)).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| *a - *b < 0.02);
    let mut weights: Vec<f64> = (0..=ts.len()).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w *= c / total);
    let mut nodes = Vec::with_capacity(ts.len() + 2);
    let mut v = 0.0;
    nodes.push((0.0, 0.0));
    for (i, &t) in ts.iter().enumerate() {
        v += weights[i];
        nodes.push((t, v));
    }
    nodes.push((1.0, c));
    let node_moves = ts.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
    Ok(Lemma1Family {
        rate,
        horizon,
        c,
        jumps,
        jump_moves,
        nodes,
        node_moves,
    })
}

fn check_rate(rate: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rate) {
        return Err(param("rate", "must lie in [0, 1)"));
    }
    Ok(())
}

impl Lemma1Family {
    pub fn endpoint(&self) -> f64 {
        self.c
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Member `n >= 1` of the sequence.
    pub fn at(&self, n: u32) -> Result<Quadruple> {
        if n == 0 {
            return Err(param("n", "sequences start at n = 1"));
        }
        let q = libm::pow(self.rate, n as f64);
        let g = PiecewisePath::step(self.horizon, 0.0, &self.jumps);
        let moved: Vec<(f64, f64)> = self
            .jumps
            .iter()
            .zip(&self.jump_moves)
            .map(|(&(t, s), &(dt, ds))| (t + q * dt, s + q * ds))
            .collect();
        let g_n = PiecewisePath::step(self.horizon, 0.0, &moved);
        let gamma = TimeChange::strictly_increasing(PiecewisePath::from_nodes(&self.nodes)?)?;
        let mut shifted = self.nodes.clone();
        for (k, mv) in self.node_moves.iter().enumerate() {
            let i = k + 1;
            let room = (self.nodes[i].1 - self.nodes[i - 1].1).min(self.nodes[i + 1].1 - self.nodes[i].1);
            shifted[i].1 += q * mv * 0.25 * room;
        }
        let gamma_n = TimeChange::strictly_increasing(PiecewisePath::from_nodes(&shifted)?)?;
        Ok(Quadruple { g_n, gamma_n, g, gamma })
    }
}

/// Random convergent sequence with `g` continuous and `gamma_n, gamma`
/// non-decreasing with jumps.
///
/// `g` is piecewise linear through random nodes and `g_n = g + rate^n h` for
/// a fixed continuous bump `h` of height at most 1. `gamma` is a staircase
/// with slopes; `gamma_n` moves its jump times by at most `rate^n / 100`
/// and lifts the whole path by `rate^n / 10`, so its endpoint moves too.
#[derive(Clone, Debug, PartialEq)]
pub struct Lemma2Family {
    rate: f64,
    horizon: f64,
    g_nodes: Vec<(f64, f64)>,
    bump: Vec<f64>,
    steps: Vec<(f64, f64)>,
    step_moves: Vec<f64>,
    slope: f64,
}

pub fn lemma2_family(seed: Seed, rate: f64, horizon: f64) -> Result<Lemma2Family> {
    check_rate(rate)?;
    check_outer_horizon(horizon)?;
    let mut rng = seed.rng();
    let knots = 8usize;
    let g_nodes: Vec<(f64, f64)> = (0..=knots)
        .map(|i| (horizon * i as f64 / knots as f64, rng.random_range(-1.0..1.0)))
        .collect();
    let bump = (0..=knots).map(|_| rng.random_range(-1.0..1.0)).collect();
    let count = rng.random_range(1..=3usize);
    let mut steps: Vec<(f64, f64)> = (0..count)
        .map(|_| (rng.random_range(0.1..0.9), rng.random_range(0.05..0.4)))
        .collect();
    steps.sort_by(|a, b| a.0.total_cmp(&b.0));
    steps.dedup_by(|a, b| a.0 - b.0 < 0.05);
    let step_moves = steps.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
    let slope = rng.random_range(0.0..0.5);
    Ok(Lemma2Family {
        rate,
        horizon,
        g_nodes,
        bump,
        steps,
        step_moves,
        slope,
    })
}

impl Lemma2Family {
    pub fn rate(&self) -> f64 {
        self.rate
    }

    fn clock(&self, q: f64) -> Result<TimeChange> {
        let mut steps: Vec<(f64, f64)> = self
            .steps
            .iter()
            .zip(&self.step_moves)
            .map(|(&(t, s), &mv)| (t + q * mv * 0.01, s))
            .collect();
        steps.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut bps = alloc::vec![0.0];
        let mut vals = alloc::vec![q * 0.1];
        for &(t, s) in &steps {
            let (t0, v0) = (bps[bps.len() - 1], vals[vals.len() - 1]);
            bps.push(t);
            vals.push(v0 + self.slope * (t - t0) + s);
        }
        let m = vals.len();
        let terminal = vals[m - 1] + self.slope * (1.0 - bps[m - 1]);
        bps.push(1.0);
        let slopes = alloc::vec![self.slope; m];
        TimeChange::non_decreasing(PiecewisePath::from_parts(bps, vals, slopes, terminal)?)
    }

    pub fn at(&self, n: u32) -> Result<Quadruple> {
        if n == 0 {
            return Err(param("n", "sequences start at n = 1"));
        }
        let q = libm::pow(self.rate, n as f64);
        let g = PiecewisePath::from_nodes(&self.g_nodes)?.canonicalize();
        let moved: Vec<(f64, f64)> = self
            .g_nodes
            .iter()
            .zip(&self.bump)
            .map(|(&(t, v), &h)| (t, v + q * h))
            .collect();
        let g_n = PiecewisePath::from_nodes(&moved)?.canonicalize();
        Ok(Quadruple {
            g_n,
            gamma_n: self.clock(q)?,
            g,
            gamma: self.clock(0.0)?,
        })
    }

    /// Lipschitz constant of `g`.
    pub fn lipschitz(&self) -> f64 {
        self.g_nodes
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
            .fold(0.0, f64::max)
    }
}

/// One index of a counterexample or family report.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExampleRow {
    pub n: u32,
    /// `rho_inf(g_n, g)`.
    pub outer_distance: f64,
    /// `rho_1(gamma_n, gamma)`.
    pub inner_distance: f64,
    /// `gamma_n(1) - gamma(1)`.
    pub endpoint_gap: f64,
    /// `rho_1(g_n o gamma_n, g o gamma)`.
    pub composed_distance: f64,
    /// `rho_1(g_n o gamma_n, 1)`, the distance to the constant path 1.
    pub composed_to_one: Option<f64>,
    /// For odd `n`: `rho_1(g_{n-1} o gamma_{n-1}, g_n o gamma_n)`.
    pub inter_subsequence: Option<f64>,
    /// Time of the jump of `g_n o gamma_n` inside `(0, 1]`, if any.
    pub composed_jump: Option<f64>,
    /// Largest certified gap among the distances in this row.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExampleReport {
    pub name: String,
    pub rows: Vec<ExampleRow>,
    /// Whether the composed sequence converges to the composed limit.
    pub converges: bool,
    pub verdict: String,
    /// Computed facts that differ from the usual reading of the example.
    pub findings: Vec<String>,
}

fn composed_jump(p: &PiecewisePath) -> Option<f64> {
    p.jumps().first().map(|j| j.time)
}

fn row(n: u32, q: &Quadruple, tol: f64, prev: Option<&PiecewisePath>) -> Result<(ExampleRow, PiecewisePath)> {
    let outer_distance = rho_infinity(&q.g_n, &q.g, tol)?;
    let inner = skorokhod_distance(q.gamma_n.path(), q.gamma.path(), 1.0, tol)?;
    let composed = q.composed_n()?;
    let limit = q.composed_limit()?;
    let c = skorokhod_distance(&composed, &limit, 1.0, tol)?;
    let one = skorokhod_distance(&composed, &PiecewisePath::constant(1.0, 1.0), 1.0, tol)?;
    let inter = match prev {
        Some(p) => Some(skorokhod_distance(p, &composed, 1.0, tol)?),
        None => None,
    };
    let gap = [Some(&inner), Some(&c), Some(&one), inter.as_ref()]
        .into_iter()
        .flatten()
        .map(|r| r.certified_gap)
        .fold(0.0, f64::max);
    Ok((
        ExampleRow {
            n,
            outer_distance,
            inner_distance: inner.value,
            endpoint_gap: q.gamma_n.endpoint_value() - q.gamma.endpoint_value(),
            composed_distance: c.value,
            composed_to_one: Some(one.value),
            inter_subsequence: inter.map(|r| r.value),
            composed_jump: composed_jump(&composed),
            gap,
        },
        composed,
    ))
}

/// Rows `n = 2..=n_max` of [`example1`].
pub fn example1_report(n_max: u32, tol: f64) -> Result<ExampleReport> {
    if n_max < 3 {
        return Err(param("n_max", "example1 needs n_max >= 3"));
    }
    let horizon = required_horizon(tol) as f64;
    let mut rows = Vec::new();
    let mut prev: Option<PiecewisePath> = None;
    for n in 2..=n_max {
        let q = example1(n, horizon)?;
        let use_prev = if n % 2 == 1 { prev.as_ref() } else { None };
        let (r, composed) = row(n, &q, tol, use_prev)?;
        rows.push(r);
        prev = Some(composed);
    }
    let mut findings = Vec::new();
    let limit = example1(2, horizon)?.composed_limit()?;
    findings.push(format!(
        "g o gamma is 0 on [0,1) and {} at t = 1, not identically 1",
        limit.terminal()
    ));
    let odd_jumps: Vec<(u32, Option<f64>)> = rows
        .iter()
        .filter(|r| r.n % 2 == 1)
        .map(|r| (r.n, r.composed_jump))
        .collect();
    if let Some(&(n, _)) = odd_jumps.iter().find(|(_, j)| j.is_none()) {
        findings.push(format!(
            "for odd n >= {n}, gamma_n(1) lies below the jump of g_n, so g_n o gamma_n is identically 0"
        ));
    }
    let inter_one = rows
        .iter()
        .filter_map(|r| r.inter_subsequence.map(|d| (r.n, d)))
        .filter(|&(_, d)| (d - 1.0).abs() <= tol)
        .map(|(n, _)| n)
        .collect::<Vec<_>>();
    findings.push(format!(
        "odd/even composed distance equals 1 only at odd n in {inter_one:?}"
    ));
    let converges = rows.iter().rev().take(4).all(|r| r.composed_distance <= 1e-3);
    let verdict = if converges {
        String::from("composed sequence converges to g o gamma")
    } else {
        String::from(
            "g_n -> g and gamma_n -> gamma, endpoints gamma_n(1) differ from gamma(1), \
             and g_n o gamma_n does not converge to g o gamma",
        )
    };
    Ok(ExampleReport {
        name: String::from("example1"),
        rows,
        converges,
        verdict,
        findings,
    })
}

/// Rows `n = 1..=n_max` of [`example2`].
pub fn example2_report(n_max: u32, tol: f64) -> Result<ExampleReport> {
    if n_max < 1 {
        return Err(param("n_max", "must be at least 1"));
    }
    let horizon = required_horizon(tol) as f64;
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let q = example2(n, horizon)?;
        let (mut r, _) = row(n, &q, tol, None)?;
        r.inner_distance = sup_distance(q.gamma_n.path(), q.gamma.path(), 1.0)?.min(r.inner_distance);
        rows.push(r);
    }
    let mut findings = Vec::new();
    let composed_one = rows.iter().all(|r| r.composed_to_one == Some(0.0));
    if composed_one {
        findings.push(String::from(
            "gamma_n = 1/2 - 2^-(n+1) lies right of the jump of g_n at 1/2 - 2^-n, \
             so g_n o gamma_n is identically 1 and equals g o gamma",
        ));
    }
    let converges = rows.iter().rev().take(4).all(|r| r.composed_distance <= 1e-3);
    let verdict = if converges {
        String::from("composed sequence converges to g o gamma despite the discontinuous limit g")
    } else {
        String::from("g_n o gamma_n does not converge to g o gamma")
    };
    Ok(ExampleReport {
        name: String::from("example2"),
        rows,
        converges,
        verdict,
        findings,
    })
}

fn family_report(name: &str, rate: f64, n_max: u32, tol: f64, at: impl Fn(u32) -> Result<Quadruple>) -> Result<ExampleReport> {
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let (mut r, _) = row(n, &at(n)?, tol, None)?;
        r.composed_to_one = None;
        rows.push(r);
    }
    let last = rows.last().map_or(0.0, |r| r.composed_distance);
    let converges = last < 1e-3;
    let verdict = format!(
        "composed distance at n = {n_max} is {last:.3e} (rate^n = {:.3e})",
        libm::pow(rate, n_max as f64)
    );
    Ok(ExampleReport {
        name: String::from(name),
        rows,
        converges,
        verdict,
        findings: Vec::new(),
    })
}

pub fn lemma1_report(seed: Seed, rate: f64, n_max: u32, tol: f64) -> Result<ExampleReport> {
    let fam = lemma1_family(seed, rate, required_horizon(tol) as f64)?;
    family_report("lemma1", rate, n_max, tol, |n| fam.at(n))
}

pub fn lemma2_report(seed: Seed, rate: f64, n_max: u32, tol: f64) -> Result<ExampleReport> {
    let fam = lemma2_family(seed, rate, required_horizon(tol) as f64)?;
    family_report("lemma2", rate, n_max, tol, |n| fam.at(n))
}
