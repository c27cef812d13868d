//! Free-space reachability for the Skorokhod decision problem.
//!
//! For paths `x`, `y` on `[0, k]` the pairs `(s, u) = (t, lambda(t))` trace a
//! monotone curve from `(0, 0)` to `(k, k)`. Cell `(i, j)` is the closed
//! rectangle of segment `i` of `x` against segment `j` of `y`, with each
//! segment extended linearly to its closed end (left limits on the right and
//! top edges). Inside a cell both constraints `|x(s) - y(u)| <= eps` and
//! `|s - u| <= eps` are affine, so its free set is convex and any two free
//! points in monotone order are joined by a free segment.
//!
//! A curve crossing from one cell to the next uses a point that must be free
//! in both cells; this is where jumps bite. Passing diagonally through a
//! corner matches a jump of `x` with a jump of `y`. The end point `(k, k)` is
//! only reachable through the last cell, and the terminal values must also be
//! within `eps`.
//!
//! Every cell keeps the minimal entry point on its bottom and left edges plus
//! a corner flag. Exits only depend on those minima, which makes the sweep
//! `O(segments(x) * segments(y))`.

use alloc::vec;
use alloc::vec::Vec;

use crate::paths::PiecewisePath;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    #[inline]
    fn new(lo: f64, hi: f64) -> Option<Self> {
        (lo <= hi).then_some(Self { lo, hi })
    }

    #[inline]
    fn meet(self, other: Interval) -> Option<Self> {
        Self::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }
}

/// `{ z in [lo, hi] : |alpha + beta * (z - lo)| <= eps }`.
#[inline]
fn sublevel(alpha: f64, beta: f64, lo: f64, hi: f64, eps: f64) -> Option<Interval> {
    if beta == 0.0 {
        return (alpha.abs() <= eps).then_some(Interval { lo, hi });
    }
    let a = (-eps - alpha) / beta;
    let b = (eps - alpha) / beta;
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    Interval::new(lo + a.max(0.0), lo + b.min(hi - lo))
}

#[inline]
fn corridor(center: f64, eps: f64, lo: f64, hi: f64) -> Option<Interval> {
    Interval::new(lo.max(center - eps), hi.min(center + eps))
}

#[derive(Clone, Copy, Debug, Default)]
struct Cell {
    bottom: Option<f64>,
    left: Option<f64>,
    corner: bool,
}

impl Cell {
    #[inline]
    fn reached(&self) -> bool {
        self.corner || self.bottom.is_some() || self.left.is_some()
    }
}

/// One segment of a monotone free-space curve together with the cell it runs
/// through.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Leg {
    pub from: (f64, f64),
    pub to: (f64, f64),
    pub cell: (usize, usize),
}

type Entry = ((f64, f64), (usize, usize), f64);

pub(crate) struct FreeSpace<'a> {
    x: &'a PiecewisePath,
    y: &'a PiecewisePath,
    eps: f64,
    cells: Vec<Cell>,
    my: usize,
    feasible: bool,
}

impl<'a> FreeSpace<'a> {
    /// Sweeps the cell grid. Both paths must share the horizon `k`.
    pub(crate) fn sweep(x: &'a PiecewisePath, y: &'a PiecewisePath, eps: f64) -> Self {
        let mx = x.segment_count();
        let my = y.segment_count();
        let xb = x.breakpoints();
        let yb = y.breakpoints();
        let xv = x.values();
        let yv = y.values();
        let xsl = x.slopes();
        let ysl = y.slopes();
        let mut cells = vec![Cell::default(); mx * my];
        cells[0].corner = (xv[0] - yv[0]).abs() <= eps;

        for i in 0..mx {
            let (xs, xe) = (xb[i], xb[i + 1]);
            let x_end = x.segment_end(i);
            for j in 0..my {
                let cell = cells[i * my + j];
                if !cell.reached() {
                    continue;
                }
                let (ys, ye) = (yb[j], yb[j + 1]);
                let y_end = y.segment_end(j);
                let s_lo = if cell.corner || cell.left.is_some() {
                    xs
                } else {
                    cell.bottom.unwrap_or(xs)
                };
                let u_lo = if cell.corner || cell.bottom.is_some() {
                    ys
                } else {
                    cell.left.unwrap_or(ys)
                };

                if j + 1 < my {
                    let exit = sublevel(xv[i] - y_end, xsl[i], xs, xe, eps)
                        .and_then(|e| e.meet(corridor(ye, eps, xs, xe)?))
                        .and_then(|e| e.meet(Interval { lo: s_lo, hi: xe }));
                    let entry = exit.and_then(|e| e.meet(sublevel(xv[i] - yv[j + 1], xsl[i], xs, xe, eps)?));
                    if let Some(e) = entry {
                        cells[i * my + j + 1].bottom = Some(e.lo);
                    }
                }
                if i + 1 < mx {
                    let exit = sublevel(x_end - yv[j], -ysl[j], ys, ye, eps)
                        .and_then(|e| e.meet(corridor(xe, eps, ys, ye)?))
                        .and_then(|e| e.meet(Interval { lo: u_lo, hi: ye }));
                    let entry = exit.and_then(|e| e.meet(sublevel(xv[i + 1] - yv[j], -ysl[j], ys, ye, eps)?));
                    if let Some(e) = entry {
                        cells[(i + 1) * my + j].left = Some(e.lo);
                    }
                }
                if i + 1 < mx
                    && j + 1 < my
                    && (x_end - y_end).abs() <= eps
                    && (xe - ye).abs() <= eps
                    && (xv[i + 1] - yv[j + 1]).abs() <= eps
                {
                    cells[(i + 1) * my + j + 1].corner = true;
                }
            }
        }

        let last = cells[mx * my - 1];
        let feasible = last.reached()
            && (x.segment_end(mx - 1) - y.segment_end(my - 1)).abs() <= eps
            && (x.terminal() - y.terminal()).abs() <= eps;
        Self {
            x,
            y,
            eps,
            cells,
            my,
            feasible,
        }
    }

    pub(crate) fn feasible(&self) -> bool {
        self.feasible
    }

    #[allow(dead_code)]
    pub(crate) fn eps(&self) -> f64 {
        self.eps
    }

    /// A weakly monotone free curve from `(0, 0)` to `(k, k)`, as legs in
    /// time order. Among admissible entries the one closest to the diagonal
    /// wins; ties prefer a corner, then the bottom edge.
    pub(crate) fn curve(&self) -> Option<Vec<Leg>> {
        if !self.feasible {
            return None;
        }
        let my = self.my;
        let mx = self.cells.len() / my;
        let xb = self.x.breakpoints();
        let yb = self.y.breakpoints();
        let k = self.x.horizon();
        let (mut i, mut j) = (mx - 1, my - 1);
        let mut q = (k, k);
        let mut legs = Vec::new();
        loop {
            let cell = self.cells[i * my + j];
            // (entry point, source cell, distance to the diagonal)
            let mut best: Option<Entry> = None;
            let mut offer = |p: (f64, f64), src: (usize, usize)| {
                let score = (p.0 - p.1).abs();
                if best.is_none_or(|(_, _, s)| score < s) {
                    best = Some((p, src, score));
                }
            };
            if cell.corner {
                offer((xb[i], yb[j]), (i.wrapping_sub(1), j.wrapping_sub(1)));
            }
            if let Some(b) = cell.bottom {
                if b <= q.0 {
                    offer((b, yb[j]), (i, j.wrapping_sub(1)));
                }
            }
            if let Some(l) = cell.left {
                if l <= q.1 {
                    offer((xb[i], l), (i.wrapping_sub(1), j));
                }
            }
            let (p, src, _) = best?;
            legs.push(Leg {
                from: p,
                to: q,
                cell: (i, j),
            });
            if i == 0 && j == 0 {
                break;
            }
            (i, j) = src;
            q = p;
        }
        legs.reverse();
        Some(legs)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Spread {
    Forward,
    Backward,
}

/// Tilts the vertical and horizontal runs of a weakly monotone curve by at
/// most `delta`, so that the nodes increase strictly in both coordinates.
///
/// A vertical run on the left edge (or inside) of its cell is spread into the
/// cell to the right of the run, one on the right edge is spread to the left,
/// and horizontal runs likewise in `u`. Corner anchors stay fixed.
pub(crate) fn strict_nodes(
    legs: &[Leg],
    x: &PiecewisePath,
    y: &PiecewisePath,
    delta: f64,
) -> Option<Vec<(f64, f64)>> {
    let legs: Vec<Leg> = legs.iter().copied().filter(|l| l.from != l.to).collect();
    if legs.is_empty() {
        return None;
    }
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(legs.len() + 1);
    pts.push(legs[0].from);
    pts.extend(legs.iter().map(|l| l.to));
    let n = pts.len();
    let mut ds = vec![0.0; n];
    let mut du = vec![0.0; n];

    let xb = x.breakpoints();
    let yb = y.breakpoints();
    // runs of legs with a fixed coordinate
    let mut start = 0;
    while start < legs.len() {
        let l = legs[start];
        let vertical = l.from.0 == l.to.0;
        let horizontal = l.from.1 == l.to.1;
        if !vertical && !horizontal {
            start += 1;
            continue;
        }
        let dir_of = |leg: &Leg| {
            if vertical {
                if leg.from.0 == xb[leg.cell.0 + 1] {
                    Spread::Backward
                } else {
                    Spread::Forward
                }
            } else if leg.from.1 == yb[leg.cell.1 + 1] {
                Spread::Backward
            } else {
                Spread::Forward
            }
        };
        let dir = dir_of(&l);
        let mut end = start + 1;
        while end < legs.len() {
            let m = legs[end];
            let same = if vertical {
                m.from.0 == m.to.0 && m.from.0 == l.from.0
            } else {
                m.from.1 == m.to.1 && m.from.1 == l.from.1
            };
            if !same || dir_of(&m) != dir {
                break;
            }
            end += 1;
        }
        // points start..=end form the run
        let coord = |p: (f64, f64)| if vertical { p.1 } else { p.0 };
        let a = coord(pts[start]);
        let b = coord(pts[end]);
        let shifts = if vertical { &mut ds } else { &mut du };
        for p in start..=end {
            let frac = (coord(pts[p]) - a) / (b - a);
            shifts[p] = match dir {
                Spread::Forward => delta * frac,
                Spread::Backward => -delta * (1.0 - frac),
            };
        }
        start = end;
    }

    let out: Vec<(f64, f64)> = pts
        .iter()
        .zip(ds.iter().zip(du.iter()))
        .map(|(&(s, u), (&a, &b))| (s + a, u + b))
        .collect();
    let strict = out.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1);
    strict.then_some(out)
}

/// Smallest positive coordinate increment along the curve.
pub(crate) fn min_gap(legs: &[Leg]) -> f64 {
    legs.iter()
        .flat_map(|l| [l.to.0 - l.from.0, l.to.1 - l.from.1])
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min)
}
