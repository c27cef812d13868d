//! Skorokhod J1 distances on `D[0,k]`, the series metric on `D[0,inf)` and
//! the product metric on path / time-change pairs.
//!
//! `rho_k(x, y)` is the infimum of `eps` such that some `lambda` in
//! `Delta[0,k]` has `sup |x - y o lambda| <= eps` and `sup |lambda - id| <= eps`.
//! [`skorokhod_decision`] answers the fixed-`eps` question exactly for
//! piecewise-linear paths; [`skorokhod_distance`] searches a finite set of
//! critical values with it and bisects the remaining bracket.

mod freespace;

use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::paths::{compose_monotone, PiecewisePath, Reparametrization, TimeChange};
use freespace::{min_gap, strict_nodes, FreeSpace};

/// Default tolerance for exactly representable inputs.
pub const EXACT_TOL: f64 = 1e-9;
/// Default tolerance for Monte Carlo paths.
pub const MONTE_CARLO_TOL: f64 = 1e-6;

/// Candidate lists beyond this size are skipped in favour of plain bisection.
const CANDIDATE_LIMIT: usize = 250_000;

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceResult {
    /// Upper end of the certified bracket.
    pub value: f64,
    /// Certified lower bound; `lower <= value <= lower + certified_gap`.
    pub lower: f64,
    pub certified_gap: f64,
    /// Reparametrization achieving `value` within `certified_gap`.
    pub witness: Option<Reparametrization>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub feasible: bool,
    pub witness: Option<Reparametrization>,
}

fn restrict_pair(x: &PiecewisePath, y: &PiecewisePath, k: f64) -> Result<(PiecewisePath, PiecewisePath)> {
    let short = x.horizon().min(y.horizon());
    if !(k > 0.0) || k > short {
        return Err(Error::InsufficientHorizon {
            required: k,
            horizon: short,
        });
    }
    Ok((x.restrict(k)?, y.restrict(k)?))
}

/// Exact `sup_{0<=t<=k} |x(t) - y(t)|`, segment by segment.
pub fn sup_distance(x: &PiecewisePath, y: &PiecewisePath, k: f64) -> Result<f64> {
    let (x, y) = restrict_pair(x, y, k)?;
    Ok(sup_distance_same_horizon(&x, &y))
}

fn sup_distance_same_horizon(x: &PiecewisePath, y: &PiecewisePath) -> f64 {
    let xb = x.breakpoints();
    let yb = y.breakpoints();
    let (mut i, mut j) = (0, 0);
    let mut a = 0.0;
    let mut best = (x.terminal() - y.terminal()).abs();
    loop {
        let b = xb[i + 1].min(yb[j + 1]);
        let d0 = (x.segment_value(i, a) - y.segment_value(j, a)).abs();
        let d1 = (x.segment_value(i, b) - y.segment_value(j, b)).abs();
        best = best.max(d0).max(d1);
        if xb[i + 1] == b {
            i += 1;
        }
        if yb[j + 1] == b {
            j += 1;
        }
        if i == x.segment_count() || j == y.segment_count() {
            break;
        }
        a = b;
    }
    best
}

/// `y o lambda` on the horizon of `lambda`.
pub fn apply_reparam(y: &PiecewisePath, lambda: &Reparametrization) -> Result<PiecewisePath> {
    compose_monotone(y, lambda.path())
}

/// Largest of `sup |x - y o lambda|` and `sup |lambda - id|` over `[0, k]`.
pub fn reparam_cost(x: &PiecewisePath, y: &PiecewisePath, lambda: &Reparametrization) -> Result<f64> {
    let k = lambda.horizon();
    let (x, y) = restrict_pair(x, y, k)?;
    let moved = apply_reparam(&y, lambda)?;
    Ok(sup_distance_same_horizon(&x, &moved).max(lambda.distortion()))
}

#[inline]
fn slack(x: &PiecewisePath, y: &PiecewisePath) -> f64 {
    let scale = x
        .values()
        .iter()
        .chain(y.values())
        .fold(x.horizon().max(x.terminal().abs()).max(y.terminal().abs()), |m, v| m.max(v.abs()));
    1e-12 * (1.0 + scale)
}

#[inline]
fn feasible(x: &PiecewisePath, y: &PiecewisePath, eps: f64, slack: f64) -> bool {
    FreeSpace::sweep(x, y, eps + slack).feasible()
}

/// Witness from the free-space curve at `eps`, whose cost is at most
/// `eps + budget` when re-evaluated.
fn witness_at(x: &PiecewisePath, y: &PiecewisePath, eps: f64, slack: f64, budget: f64) -> Option<Reparametrization> {
    let fs = FreeSpace::sweep(x, y, eps + slack);
    let legs = fs.curve()?;
    let lipschitz = 1.0
        + x.slopes().iter().chain(y.slopes()).fold(0.0f64, |m, s| m.max(s.abs()));
    let mut delta = (min_gap(&legs) / 4.0).min(budget / (4.0 * lipschitz));
    if !delta.is_finite() {
        delta = budget;
    }
    for _ in 0..64 {
        if let Some(nodes) = strict_nodes(&legs, x, y, delta) {
            if let Ok(lambda) = Reparametrization::from_nodes(&nodes) {
                if let Ok(cost) = reparam_cost(x, y, &lambda) {
                    if cost <= eps + budget {
                        return Some(lambda);
                    }
                }
            }
        }
        delta *= 0.5;
    }
    None
}

/// Is there a `lambda` with both sups at most `eps`? On success a witness is
/// attached whose re-evaluated cost exceeds `eps` by at most `1e-9 * (1 + eps)`.
pub fn skorokhod_decision(x: &PiecewisePath, y: &PiecewisePath, k: f64, eps: f64) -> Result<Decision> {
    if !(eps > 0.0) {
        return Err(param("eps", "must be positive"));
    }
    let (x, y) = restrict_pair(x, y, k)?;
    let slack = slack(&x, &y);
    if !feasible(&x, &y, eps, slack) {
        return Ok(Decision {
            feasible: false,
            witness: None,
        });
    }
    let witness = if sup_distance_same_horizon(&x, &y) == 0.0 {
        Some(Reparametrization::identity(k))
    } else {
        witness_at(&x, &y, eps, slack, 1e-9 * (1.0 + eps))
    };
    Ok(Decision {
        feasible: true,
        witness,
    })
}

/// Values at which feasibility can switch: value differences between the two
/// paths at breakpoints and left limits, half jump sizes, and breakpoint
/// offsets.
fn critical_values(x: &PiecewisePath, y: &PiecewisePath, upper: f64) -> Vec<f64> {
    fn levels(p: &PiecewisePath) -> (Vec<f64>, Vec<f64>) {
        let m = p.segment_count();
        let mut vals = Vec::with_capacity(2 * m + 1);
        let mut halves = Vec::new();
        for i in 0..m {
            vals.push(p.values()[i]);
            let end = p.segment_end(i);
            vals.push(end);
            let next = if i + 1 < m { p.values()[i + 1] } else { p.terminal() };
            if end != next {
                halves.push(0.5 * (next - end).abs());
            }
        }
        vals.push(p.terminal());
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        (vals, halves)
    }
    let (xv, xh) = levels(x);
    let (yv, yh) = levels(y);
    let xb = x.breakpoints();
    let yb = y.breakpoints();
    let total = xv.len() * yv.len() + xb.len() * yb.len() + xh.len() + yh.len();
    let mut out = Vec::new();
    if total <= CANDIDATE_LIMIT {
        out.reserve(total + 1);
        for a in &xv {
            out.extend(yv.iter().map(|b| (a - b).abs()));
        }
        for a in xb {
            out.extend(yb.iter().map(|b| (a - b).abs()));
        }
        out.extend(xh);
        out.extend(yh);
    }
    out.push(upper);
    out.retain(|&c| c > 0.0 && c <= upper);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// `rho_k(x, y)` to within `tol`, with a certified bracket and a witness.
pub fn skorokhod_distance(x: &PiecewisePath, y: &PiecewisePath, k: f64, tol: f64) -> Result<DistanceResult> {
    if !(tol > 0.0) {
        return Err(param("tol", "must be positive"));
    }
    let (x, y) = restrict_pair(x, y, k)?;
    let upper = sup_distance_same_horizon(&x, &y);
    if upper == 0.0 {
        return Ok(DistanceResult {
            value: 0.0,
            lower: 0.0,
            certified_gap: 0.0,
            witness: Some(Reparametrization::identity(k)),
        });
    }
    let slack = slack(&x, &y);
    let cands = critical_values(&x, &y, upper);
    // smallest feasible candidate; the last one (upper) always is
    let first = cands.partition_point(|&c| !feasible(&x, &y, c, slack));
    let first = first.min(cands.len() - 1);
    let mut hi = cands[first];
    let mut lo = if first == 0 { 0.0 } else { cands[first - 1] };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(&x, &y, mid, slack) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lower = lo.min(hi - 0.5 * tol).max(0.0);
    let gap = hi - lower;
    let witness = witness_at(&x, &y, hi, slack, 0.5 * gap);
    Ok(DistanceResult {
        value: hi,
        lower,
        certified_gap: gap,
        witness,
    })
}

/// Truncation depth `K(tol) = ceil(log2(1/tol)) + 1` used by [`rho_infinity`];
/// both paths need horizon at least `K`.
pub fn required_horizon(tol: f64) -> usize {
    let bits = libm::ceil(libm::log2(1.0 / tol));
    (bits.max(0.0) as usize) + 1
}

/// `sum_k 2^-k rho_k / (1 + rho_k)` truncated at `K(tol)`; within `2 tol` of
/// the full series.
pub fn rho_infinity(x: &PiecewisePath, y: &PiecewisePath, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(param("tol", "must be positive"));
    }
    let depth = required_horizon(tol);
    let short = x.horizon().min(y.horizon());
    if short < depth as f64 {
        return Err(Error::InsufficientHorizon {
            required: depth as f64,
            horizon: short,
        });
    }
    let inner_tol = tol / depth as f64;
    let mut total = 0.0;
    let mut weight = 1.0;
    for k in 1..=depth {
        weight *= 0.5;
        let r = skorokhod_distance(x, y, k as f64, inner_tol)?.value;
        total += weight * r / (1.0 + r);
    }
    Ok(total)
}

/// `rho_inf(x1, x2) + rho_1(y1, y2)` on `D[0,inf) x B[0,1]`.
pub fn rho_e(z1: (&PiecewisePath, &TimeChange), z2: (&PiecewisePath, &TimeChange), tol: f64) -> Result<f64> {
    let outer = rho_infinity(z1.0, z2.0, tol)?;
    let inner = skorokhod_distance(z1.1.path(), z2.1.path(), 1.0, tol)?.value;
    Ok(outer + inner)
}
