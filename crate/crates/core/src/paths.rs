//! Piecewise-linear cadlag paths, monotone time changes and reparametrizations.
//!
//! A [`PiecewisePath`] on `[0, k]` stores breakpoints `0 = t0 < t1 < ... < tm = k`,
//! the value and slope of each segment `[ti, ti+1)`, and the value at `t = k`
//! separately so that a jump exactly at the horizon is representable. Values at
//! breakpoints are right limits, which makes every path right-continuous with
//! finite left limits.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Breakpoints closer than this are merged by [`PiecewisePath::canonicalize`].
pub const MIN_SPACING: f64 = 1e-12;

/// Relative tolerance under which two values are treated as equal when merging
/// segments or dropping jumps.
const VALUE_EPS: f64 = 1e-12;

#[inline]
pub(crate) fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= VALUE_EPS * (1.0 + a.abs().max(b.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub size: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePath {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    terminal: f64,
}

impl PiecewisePath {
    /// Builds a path from raw fields without canonicalizing.
    ///
    /// `breakpoints` has one more entry than `values` and `slopes`; the first
    /// breakpoint is 0 and the last is the horizon.
    pub fn from_parts(
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        slopes: Vec<f64>,
        terminal: f64,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidPath("a path needs at least one segment"));
        }
        if values.len() != slopes.len() || breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidPath(
                "expected m values, m slopes and m + 1 breakpoints",
            ));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidPath("first breakpoint must be 0"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidPath("breakpoints must be strictly increasing"));
        }
        let finite = breakpoints
            .iter()
            .chain(values.iter())
            .chain(slopes.iter())
            .all(|v| v.is_finite());
        if !finite || !terminal.is_finite() {
            return Err(Error::InvalidPath("all fields must be finite"));
        }
        Ok(Self {
            breakpoints,
            values,
            slopes,
            terminal,
        })
    }

    pub fn constant(horizon: f64, value: f64) -> Self {
        Self {
            breakpoints: alloc::vec![0.0, horizon],
            values: alloc::vec![value],
            slopes: alloc::vec![0.0],
            terminal: value,
        }
    }

    /// `start + slope * t` on `[0, horizon]`.
    pub fn linear(horizon: f64, start: f64, slope: f64) -> Self {
        Self {
            breakpoints: alloc::vec![0.0, horizon],
            values: alloc::vec![start],
            slopes: alloc::vec![slope],
            terminal: start + slope * horizon,
        }
    }

    /// The identity `t` on `[0, horizon]`.
    pub fn identity(horizon: f64) -> Self {
        let mut p = Self::linear(horizon, 0.0, 1.0);
        p.terminal = horizon;
        p
    }

    /// Indicator `1_{[at, inf)}` truncated to `[0, horizon]`.
    pub fn indicator(horizon: f64, at: f64) -> Self {
        Self::step(horizon, 0.0, &[(at, 1.0)])
    }

    /// Piecewise-constant path starting at `initial` with the given
    /// `(time, size)` jumps. Jumps at or beyond the horizon only affect the
    /// terminal value when they are exactly at the horizon.
    pub fn step(horizon: f64, initial: f64, jumps: &[(f64, f64)]) -> Self {
        let mut b = PathBuilder::with_capacity(jumps.len() + 1);
        let mut level = initial;
        b.push(0.0, level, 0.0);
        let mut terminal_extra = 0.0;
        for &(t, size) in jumps {
            if t <= 0.0 {
                level += size;
                b.push(0.0, level, 0.0);
            } else if t < horizon {
                level += size;
                b.push(t, level, 0.0);
            } else if t == horizon {
                terminal_extra += size;
            }
        }
        b.finish(horizon, level + terminal_extra)
    }

    /// Continuous path through the nodes `(t, value)`, starting at `t = 0`.
    pub fn from_nodes(nodes: &[(f64, f64)]) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidPath("need at least two nodes"));
        }
        let m = nodes.len() - 1;
        let mut breakpoints = Vec::with_capacity(m + 1);
        let mut values = Vec::with_capacity(m);
        let mut slopes = Vec::with_capacity(m);
        for w in nodes.windows(2) {
            let (t0, v0) = w[0];
            let (t1, v1) = w[1];
            breakpoints.push(t0);
            values.push(v0);
            slopes.push((v1 - v0) / (t1 - t0));
        }
        breakpoints.push(nodes[m].0);
        Self::from_parts(breakpoints, values, slopes, nodes[m].1)
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().expect("non-empty breakpoints")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Value at each segment start `t_i` (right limit).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn terminal(&self) -> f64 {
        self.terminal
    }

    pub fn segment_count(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub(crate) fn segment_value(&self, i: usize, t: f64) -> f64 {
        self.values[i] + self.slopes[i] * (t - self.breakpoints[i])
    }

    /// Left limit at the end of segment `i`.
    #[inline]
    pub(crate) fn segment_end(&self, i: usize) -> f64 {
        self.segment_value(i, self.breakpoints[i + 1])
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let h = self.horizon();
        if t >= 0.0 && t <= h {
            Ok(())
        } else {
            Err(Error::OutOfDomain { t, lo: 0.0, hi: h })
        }
    }

    /// Index of the segment `[t_i, t_i+1)` containing `t < horizon`.
    #[inline]
    fn segment_at(&self, t: f64) -> usize {
        let m = self.values.len();
        self.breakpoints[..m].partition_point(|&b| b <= t) - 1
    }

    /// Right-continuous value `x(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.eval_unchecked(t))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        if t >= self.horizon() {
            self.terminal
        } else {
            self.segment_value(self.segment_at(t), t)
        }
    }

    /// `lim_{s -> t-} x(s)` for `t` in `(0, horizon]`.
    pub fn left_limit(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::OutOfDomain {
                t,
                lo: 0.0,
                hi: self.horizon(),
            });
        }
        self.check_domain(t)?;
        Ok(self.left_limit_unchecked(t))
    }

    #[inline]
    pub(crate) fn left_limit_unchecked(&self, t: f64) -> f64 {
        let m = self.values.len();
        let i = self.breakpoints[..m].partition_point(|&b| b < t).max(1) - 1;
        self.segment_value(i, t)
    }

    /// Merges collinear neighbours, drops zero jumps and breakpoints closer
    /// than [`MIN_SPACING`]. Pointwise values are unchanged up to the merge
    /// tolerance; exactly representable inputs are preserved exactly.
    pub fn canonicalize(&self) -> PiecewisePath {
        canonical(
            self.breakpoints.clone(),
            self.values.clone(),
            self.slopes.clone(),
            self.terminal,
        )
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonicalize()
    }

    /// Every discontinuity, including one at the horizon, with its signed size.
    pub fn jumps(&self) -> Vec<Jump> {
        let m = self.values.len();
        let mut out = Vec::new();
        for i in 1..m {
            let before = self.segment_end(i - 1);
            if !nearly_equal(before, self.values[i]) {
                out.push(Jump {
                    time: self.breakpoints[i],
                    size: self.values[i] - before,
                });
            }
        }
        let before = self.segment_end(m - 1);
        if !nearly_equal(before, self.terminal) {
            out.push(Jump {
                time: self.horizon(),
                size: self.terminal - before,
            });
        }
        out
    }

    pub fn is_continuous(&self) -> bool {
        self.jumps().is_empty()
    }

    /// Truncation to `[0, k]`; the new terminal value is `x(k)`.
    pub fn restrict(&self, k: f64) -> Result<PiecewisePath> {
        let h = self.horizon();
        if !(k > 0.0) || k > h {
            return Err(Error::OutOfDomain { t: k, lo: 0.0, hi: h });
        }
        if k == h {
            return Ok(self.clone());
        }
        let m = self.breakpoints.partition_point(|&b| b < k);
        let mut breakpoints = self.breakpoints[..m].to_vec();
        breakpoints.push(k);
        Ok(PiecewisePath {
            breakpoints,
            values: self.values[..m].to_vec(),
            slopes: self.slopes[..m].to_vec(),
            terminal: self.eval_unchecked(k),
        })
    }

    /// Supremum of the path over `[0, horizon]`, left limits included.
    pub fn supremum(&self) -> f64 {
        (0..self.values.len())
            .flat_map(|i| [self.values[i], self.segment_end(i)])
            .fold(self.terminal, f64::max)
    }

    /// `integral_0^horizon x(t) dt`.
    pub fn integral(&self) -> f64 {
        (0..self.values.len())
            .map(|i| {
                let len = self.breakpoints[i + 1] - self.breakpoints[i];
                self.values[i] * len + 0.5 * self.slopes[i] * len * len
            })
            .sum()
    }

    /// Number of segments where the slope is strictly negative or a jump is
    /// negative; zero for non-decreasing paths.
    fn decreasing_pieces(&self) -> usize {
        let neg_slopes = self.slopes.iter().filter(|&&s| s < 0.0).count();
        let neg_jumps = self.jumps().iter().filter(|j| j.size < 0.0).count();
        neg_slopes + neg_jumps
    }
}

/// Incremental construction of paths, used by the samplers and by
/// composition. Segments must be pushed in time order.
pub(crate) struct PathBuilder {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl PathBuilder {
    pub(crate) fn with_capacity(n: usize) -> Self {
        Self {
            breakpoints: Vec::with_capacity(n + 1),
            values: Vec::with_capacity(n),
            slopes: Vec::with_capacity(n),
        }
    }

    /// Starts a segment at `t`; a start within [`MIN_SPACING`] of the previous
    /// one replaces it.
    #[inline]
    pub(crate) fn push(&mut self, t: f64, value: f64, slope: f64) {
        if let Some(&last) = self.breakpoints.last() {
            if t - last < MIN_SPACING {
                *self.values.last_mut().unwrap() = value;
                *self.slopes.last_mut().unwrap() = slope;
                return;
            }
        }
        self.breakpoints.push(t);
        self.values.push(value);
        self.slopes.push(slope);
    }

    pub(crate) fn last_time(&self) -> Option<f64> {
        self.breakpoints.last().copied()
    }

    pub(crate) fn finish(self, horizon: f64, terminal: f64) -> PiecewisePath {
        let mut breakpoints = self.breakpoints;
        breakpoints.push(horizon);
        canonical(breakpoints, self.values, self.slopes, terminal)
    }
}

fn canonical(bps: Vec<f64>, vals: Vec<f64>, slopes: Vec<f64>, terminal: f64) -> PiecewisePath {
    let m = vals.len();
    let horizon = bps[m];
    let mut ob: Vec<f64> = Vec::with_capacity(m + 1);
    let mut ov: Vec<f64> = Vec::with_capacity(m);
    let mut os: Vec<f64> = Vec::with_capacity(m);
    // start of a run of tiny segments absorbed by the next regular one
    let mut pending: Option<f64> = None;
    for i in 0..m {
        let slope = slopes[i] + 0.0;
        if m > 1 && bps[i + 1] - bps[i] < MIN_SPACING {
            if i + 1 < m && pending.is_none() {
                pending = Some(bps[i]);
            }
            continue;
        }
        let (start, mut value) = match pending.take() {
            Some(s) => (s, vals[i] - slope * (bps[i] - s)),
            None => (bps[i], vals[i]),
        };
        if let (Some(&ps), Some(&pv), Some(&pslope)) = (ob.last(), ov.last(), os.last()) {
            let prev_end = pv + pslope * (start - ps);
            if nearly_equal(prev_end, value) {
                if nearly_equal(pslope, slope) {
                    continue;
                }
                value = prev_end;
            }
        }
        ob.push(start);
        ov.push(value);
        os.push(slope);
    }
    if ob.is_empty() {
        ob.push(0.0);
        ov.push(vals[0]);
        os.push(slopes[0] + 0.0);
    }
    ob.push(horizon);
    PiecewisePath {
        breakpoints: ob,
        values: ov,
        slopes: os,
        terminal,
    }
}

/// Membership class of a time change: `B[0,1]` (non-decreasing, non-negative)
/// or `Pi[0,1]` (strictly increasing, continuous, with a stated endpoint).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeChangeClass {
    NonDecreasing,
    StrictlyIncreasing,
}

/// A non-decreasing, non-negative path usable as the inner function of a
/// composition.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeChange {
    path: PiecewisePath,
    class: TimeChangeClass,
}

impl TimeChange {
    /// Accepts any non-decreasing non-negative path (class `B`).
    pub fn non_decreasing(path: PiecewisePath) -> Result<Self> {
        let path = path.canonicalize();
        if path.values[0] < 0.0 {
            return Err(Error::InvalidTimeChange("time change must be non-negative"));
        }
        if path.decreasing_pieces() > 0 {
            return Err(Error::InvalidTimeChange("time change must be non-decreasing"));
        }
        Ok(Self {
            path,
            class: TimeChangeClass::NonDecreasing,
        })
    }

    /// Accepts a continuous path with strictly positive slopes (class `Pi`).
    /// Its endpoint value is `path(horizon)`.
    pub fn strictly_increasing(path: PiecewisePath) -> Result<Self> {
        let tc = Self::non_decreasing(path)?;
        if !tc.path.is_continuous() {
            return Err(Error::InvalidTimeChange("strictly increasing class has no jumps"));
        }
        if tc.path.slopes.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidTimeChange("strictly increasing class needs positive slopes"));
        }
        Ok(Self {
            class: TimeChangeClass::StrictlyIncreasing,
            ..tc
        })
    }

    /// The strongest class the path qualifies for.
    pub fn classify(path: PiecewisePath) -> Result<Self> {
        let tc = Self::non_decreasing(path)?;
        if tc.path.is_continuous() && tc.path.slopes.iter().all(|&s| s > 0.0) {
            Ok(Self {
                class: TimeChangeClass::StrictlyIncreasing,
                ..tc
            })
        } else {
            Ok(tc)
        }
    }

    /// `a * t` on `[0, 1]`.
    pub fn linear(a: f64) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(crate::error::param("a", "must be finite and non-negative"));
        }
        let mut path = PiecewisePath::linear(1.0, 0.0, a);
        path.terminal = a;
        Self::classify(path)
    }

    pub fn identity() -> Self {
        Self::linear(1.0).expect("identity is a valid time change")
    }

    pub fn path(&self) -> &PiecewisePath {
        &self.path
    }

    pub fn into_path(self) -> PiecewisePath {
        self.path
    }

    pub fn class(&self) -> TimeChangeClass {
        self.class
    }

    /// `C` of the strictly increasing class; for any time change this is the
    /// value at the horizon.
    pub fn endpoint_value(&self) -> f64 {
        self.path.terminal
    }

    /// Largest value attained; the range lies in `[path(0), max_value]`.
    pub fn max_value(&self) -> f64 {
        self.path.terminal.max(self.path.segment_end(self.path.segment_count() - 1))
    }

    pub fn starts_at_zero(&self) -> bool {
        self.path.values[0] == 0.0
    }
}

/// `outer(inner(t))` on the inner horizon.
///
/// The result breaks at inner breakpoints and at the inner preimages of outer
/// breakpoints, and is returned in canonical form.
pub fn compose(outer: &PiecewisePath, inner: &TimeChange) -> Result<PiecewisePath> {
    compose_monotone(outer, &inner.path)
}

pub(crate) fn compose_monotone(outer: &PiecewisePath, inner: &PiecewisePath) -> Result<PiecewisePath> {
    let big_k = outer.horizon();
    let m = inner.segment_count();
    let reach = inner.terminal.max(inner.segment_end(m - 1));
    if reach > big_k && !nearly_equal(reach, big_k) {
        return Err(Error::CompositionDomain {
            required: reach,
            horizon: big_k,
        });
    }
    let om = outer.segment_count();
    let mut b = PathBuilder::with_capacity(m + om);
    for j in 0..m {
        let u0 = inner.breakpoints[j];
        let u1 = inner.breakpoints[j + 1];
        let c0 = inner.values[j].min(big_k);
        let d = inner.slopes[j];
        if d == 0.0 {
            b.push(u0, outer.eval_unchecked(c0), 0.0);
            continue;
        }
        let c1 = inner.segment_end(j);
        let mut i = if c0 >= big_k { om - 1 } else { outer.segment_at(c0) };
        b.push(u0, outer.segment_value(i, c0), outer.slopes[i] * d);
        // outer breakpoints strictly inside (c0, c1)
        i += 1;
        while i < om && outer.breakpoints[i] < c1 {
            let tau = outer.breakpoints[i];
            let t = u0 + (tau - c0) / d;
            // a crossing within rounding of u1 belongs to the next segment,
            // which starts from the exact node value
            if t > b.last_time().unwrap_or(u0) && t < u1 && !nearly_equal(t, u1) {
                b.push(t, outer.values[i], outer.slopes[i] * d);
            }
            i += 1;
        }
    }
    let terminal = outer.eval_unchecked(inner.terminal.min(big_k));
    Ok(b.finish(inner.horizon(), terminal))
}

/// A strictly increasing continuous bijection of `[0, k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Reparametrization {
    path: PiecewisePath,
}

impl Reparametrization {
    pub fn identity(k: f64) -> Self {
        Self {
            path: PiecewisePath::identity(k),
        }
    }

    /// Piecewise-linear map through `nodes`, which must run from `(0, 0)` to
    /// `(k, k)` strictly increasing in both coordinates.
    pub fn from_nodes(nodes: &[(f64, f64)]) -> Result<Self> {
        let bad = Error::InvalidPath("reparametrization nodes must increase strictly from (0,0) to (k,k)");
        let (Some(&first), Some(&last)) = (nodes.first(), nodes.last()) else {
            return Err(bad);
        };
        if first != (0.0, 0.0) || last.0 != last.1 || !(last.0 > 0.0) {
            return Err(bad);
        }
        if nodes.windows(2).any(|w| !(w[0].0 < w[1].0 && w[0].1 < w[1].1)) {
            return Err(bad);
        }
        Ok(Self {
            path: PiecewisePath::from_nodes(nodes)?.canonicalize(),
        })
    }

    pub fn horizon(&self) -> f64 {
        self.path.horizon()
    }

    pub fn path(&self) -> &PiecewisePath {
        &self.path
    }

    /// Nodes `(t, lambda(t))` at every breakpoint, endpoints included.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let m = self.path.segment_count();
        let mut out: Vec<(f64, f64)> = (0..m)
            .map(|i| (self.path.breakpoints[i], self.path.values[i]))
            .collect();
        out.push((self.horizon(), self.path.terminal));
        out
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.path.eval(t)
    }

    pub fn inverse(&self) -> Self {
        let nodes: Vec<(f64, f64)> = self.nodes().into_iter().map(|(t, l)| (l, t)).collect();
        Self::from_nodes(&nodes).expect("inverse of a bijection is a bijection")
    }

    /// `self(other(t))`.
    pub fn after(&self, other: &Reparametrization) -> Result<Self> {
        let path = compose_monotone(&self.path, &other.path)?;
        Ok(Self { path })
    }

    /// `sup_t |lambda(t) - t|`, attained at a node.
    pub fn distortion(&self) -> f64 {
        self.nodes()
            .into_iter()
            .map(|(t, l)| (l - t).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_half() -> PiecewisePath {
        PiecewisePath::indicator(2.0, 0.5)
    }

    #[test]
    fn eval_step_and_boundaries() {
        let g = step_half();
        assert_eq!(g.eval(0.4).unwrap(), 0.0);
        assert_eq!(g.eval(0.5).unwrap(), 1.0);
        assert_eq!(g.eval(0.0).unwrap(), g.values()[0]);
        assert_eq!(g.eval(2.0).unwrap(), g.terminal());
        assert!(matches!(g.eval(2.5), Err(Error::OutOfDomain { .. })));
        assert!(g.eval(-0.1).is_err());
    }

    #[test]
    fn eval_on_sloped_segment() {
        let p = PiecewisePath::linear(1.0, 1.0, 2.0);
        assert_eq!(p.eval(0.25).unwrap(), 1.5);
    }

    #[test]
    fn left_limits() {
        let g = step_half();
        assert_eq!(g.left_limit(0.5).unwrap(), 0.0);
        let p = PiecewisePath::linear(1.0, 0.0, 3.0);
        assert_eq!(p.left_limit(0.5).unwrap(), p.eval(0.5).unwrap());
        let q = PiecewisePath::indicator(1.0, 0.3);
        assert_eq!(q.left_limit(0.3).unwrap(), 0.0);
        assert!(q.left_limit(0.0).is_err());
    }

    #[test]
    fn from_parts_rejects_bad_breakpoints() {
        let err = PiecewisePath::from_parts(vec![0.0, 0.5, 0.5, 1.0], vec![0.0; 3], vec![0.0; 3], 0.0);
        assert!(matches!(err, Err(Error::InvalidPath(_))));
        assert!(PiecewisePath::from_parts(vec![0.1, 1.0], vec![0.0], vec![0.0], 0.0).is_err());
        assert!(PiecewisePath::from_parts(vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0], 0.0).is_err());
        assert!(PiecewisePath::from_parts(vec![0.0, 1.0], vec![f64::NAN], vec![0.0], 0.0).is_err());
    }

    #[test]
    fn canonicalize_merges_collinear() {
        let p = PiecewisePath::from_parts(vec![0.0, 0.5, 1.0], vec![3.0, 3.0], vec![0.0, 0.0], 3.0).unwrap();
        let c = p.canonicalize();
        assert_eq!(c.segment_count(), 1);
        assert_eq!(c.canonicalize(), c);
        let sloped =
            PiecewisePath::from_parts(vec![0.0, 0.25, 1.0], vec![0.0, 0.125], vec![0.5, 0.5], 0.5).unwrap();
        assert_eq!(sloped.canonicalize(), PiecewisePath::linear(1.0, 0.0, 0.5));
    }

    #[test]
    fn canonicalize_removes_zero_jump() {
        let p = PiecewisePath::from_parts(vec![0.0, 0.5, 1.0], vec![1.0, 1.0], vec![0.0, 0.0], 1.0).unwrap();
        let c = p.canonicalize();
        assert!(!c.breakpoints().contains(&0.5));
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            assert_eq!(c.eval(t).unwrap(), p.eval(t).unwrap());
        }
    }

    #[test]
    fn canonicalize_drops_tiny_segments() {
        let p = PiecewisePath::from_parts(
            vec![0.0, 0.5, 0.5 + 1e-14, 1.0],
            vec![0.0, 7.0, 1.0],
            vec![0.0, 0.0, 0.0],
            1.0,
        )
        .unwrap();
        let c = p.canonicalize();
        assert_eq!(c.segment_count(), 2);
        assert_eq!(c.eval(0.75).unwrap(), 1.0);
    }

    #[test]
    fn jumps_of_step_and_continuous() {
        assert_eq!(step_half().jumps(), vec![Jump { time: 0.5, size: 1.0 }]);
        assert!(PiecewisePath::linear(1.0, 0.0, 1.0).jumps().is_empty());
        let at_end = PiecewisePath::indicator(1.0, 1.0);
        assert_eq!(at_end.jumps(), vec![Jump { time: 1.0, size: 1.0 }]);
        assert_eq!(at_end.eval(1.0).unwrap(), 1.0);
        assert_eq!(at_end.left_limit(1.0).unwrap(), 0.0);
    }

    #[test]
    fn restrict_truncates() {
        let g = step_half();
        assert_eq!(g.restrict(2.0).unwrap(), g);
        let r = g.restrict(1.0).unwrap();
        assert_eq!(r, PiecewisePath::indicator(1.0, 0.5));
        assert_eq!(r.eval(1.0).unwrap(), g.eval(1.0).unwrap());
        assert!(g.restrict(3.0).is_err());
        let before_jump = g.restrict(0.5).unwrap();
        assert_eq!(before_jump.terminal(), 1.0);
        assert_eq!(before_jump.left_limit(0.5).unwrap(), 0.0);
    }

    #[test]
    fn compose_identity_and_constant() {
        let x = PiecewisePath::from_nodes(&[(0.0, 0.0), (0.25, 1.0), (1.0, -0.5)]).unwrap();
        let id = TimeChange::identity();
        assert_eq!(compose(&x, &id).unwrap(), x.canonicalize());
        let c = PiecewisePath::constant(3.0, 2.5);
        let y = TimeChange::linear(2.0).unwrap();
        assert_eq!(compose(&c, &y).unwrap(), PiecewisePath::constant(1.0, 2.5));
    }

    #[test]
    fn compose_step_with_half_speed() {
        let g = step_half();
        let gamma = TimeChange::linear(0.5).unwrap();
        let z = compose(&g, &gamma).unwrap();
        assert_eq!(z, PiecewisePath::indicator(1.0, 1.0));
        assert_eq!(z.eval(0.999).unwrap(), 0.0);
        assert_eq!(z.eval(1.0).unwrap(), 1.0);
    }

    #[test]
    fn compose_places_preimages() {
        let g = PiecewisePath::indicator(4.0, 1.0);
        let tc = TimeChange::linear(2.0).unwrap();
        let z = compose(&g, &tc).unwrap();
        assert_eq!(z.jumps(), vec![Jump { time: 0.5, size: 1.0 }]);
        let sloped = PiecewisePath::from_nodes(&[(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)]).unwrap();
        let z = compose(&sloped, &tc).unwrap();
        assert_eq!(z.breakpoints(), &[0.0, 0.5, 1.0]);
        assert_eq!(z.slopes(), &[2.0, 4.0]);
    }

    #[test]
    fn compose_rejects_short_outer() {
        let g = PiecewisePath::constant(1.0, 0.0);
        let tc = TimeChange::linear(1.5).unwrap();
        assert!(matches!(compose(&g, &tc), Err(Error::CompositionDomain { .. })));
    }

    #[test]
    fn compose_with_step_inner() {
        let outer = PiecewisePath::identity(2.0);
        let inner = TimeChange::non_decreasing(PiecewisePath::step(1.0, 0.0, &[(0.5, 1.0)])).unwrap();
        let z = compose(&outer, &inner).unwrap();
        assert_eq!(z, PiecewisePath::indicator(1.0, 0.5));
    }

    #[test]
    fn time_change_classes() {
        assert_eq!(TimeChange::linear(0.5).unwrap().class(), TimeChangeClass::StrictlyIncreasing);
        assert_eq!(TimeChange::linear(0.0).unwrap().class(), TimeChangeClass::NonDecreasing);
        let stepped = PiecewisePath::step(1.0, 0.0, &[(0.5, 1.0)]);
        assert!(TimeChange::strictly_increasing(stepped.clone()).is_err());
        assert_eq!(TimeChange::classify(stepped).unwrap().class(), TimeChangeClass::NonDecreasing);
        assert!(TimeChange::non_decreasing(PiecewisePath::linear(1.0, 1.0, -0.5)).is_err());
        assert!(TimeChange::non_decreasing(PiecewisePath::constant(1.0, -1.0)).is_err());
        let tc = TimeChange::linear(0.75).unwrap();
        assert_eq!(tc.endpoint_value(), 0.75);
        assert!(tc.starts_at_zero());
    }

    #[test]
    fn reparametrization_inverse_and_distortion() {
        let l = Reparametrization::from_nodes(&[(0.0, 0.0), (0.4, 0.5), (1.0, 1.0)]).unwrap();
        assert!((l.distortion() - 0.1).abs() < 1e-15);
        let back = l.after(&l.inverse()).unwrap();
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            assert!((back.eval(t).unwrap() - t).abs() < 1e-15);
        }
        assert!(Reparametrization::from_nodes(&[(0.0, 0.0), (0.5, 0.5), (0.5, 0.7), (1.0, 1.0)]).is_err());
        assert!(Reparametrization::from_nodes(&[(0.0, 0.0), (1.0, 0.9)]).is_err());
    }

    #[test]
    fn outer_jump_at_inner_node_stays_at_the_node() {
        // the first segment end rounds past 0.78125
        let lambda = Reparametrization::from_nodes(&[
            (0.0, 0.0),
            (0.65625, 0.71875),
            (0.71875, 0.78125),
            (1.0, 1.0),
        ])
        .unwrap();
        let y = PiecewisePath::step(1.0, 0.0, &[(0.78125, 1.0)]);
        let z = compose(&y, &TimeChange::strictly_increasing(lambda.path().clone()).unwrap()).unwrap();
        let jumps = z.jumps();
        assert_eq!(jumps.len(), 1);
        assert_eq!(jumps[0].time, 0.71875);
        assert_eq!(z.left_limit(0.71875).unwrap(), 0.0);
    }
}
