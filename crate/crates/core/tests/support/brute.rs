// Independent reference for the Skorokhod distance on [0, 1].
//
// Minimizes the larger of sup|x - y o lambda| and sup|lambda - id| over
// piecewise-linear lambda whose nodes lie on the lattice (i/N, j/N). Moves
// advance one coordinate by exactly one lattice step and the other by up to
// any number of steps; the identity is included directly. Paths are
// re-evaluated from their raw arrays so no library evaluation is reused.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use timesub_core::PiecewisePath;

pub const GRID: usize = 256;
const MAX_MOVE: usize = GRID;

pub struct Raw {
    bp: Vec<f64>,
    v: Vec<f64>,
    s: Vec<f64>,
    term: f64,
}

impl Raw {
    pub fn of(p: &PiecewisePath) -> Self {
        Self {
            bp: p.breakpoints().to_vec(),
            v: p.values().to_vec(),
            s: p.slopes().to_vec(),
            term: p.terminal(),
        }
    }

    fn horizon(&self) -> f64 {
        *self.bp.last().unwrap()
    }

    fn right(&self, t: f64) -> f64 {
        if t >= self.horizon() {
            return self.term;
        }
        let i = self.bp.iter().rposition(|&b| b <= t).unwrap();
        self.v[i] + self.s[i] * (t - self.bp[i])
    }

    fn left(&self, t: f64) -> f64 {
        let i = self.bp.iter().rposition(|&b| b < t).unwrap();
        self.v[i] + self.s[i] * (t - self.bp[i])
    }
}

/// sup over t in [t0, t1) of |x(t) - y(lambda(t))| for lambda linear from
/// (t0, u0) to (t1, u1).
fn edge_cost(x: &Raw, y: &Raw, t0: f64, u0: f64, t1: f64, u1: f64) -> f64 {
    let rate = (u1 - u0) / (t1 - t0);
    let mut buf = [(0.0, 0.0); 64];
    buf[0] = (t0, u0);
    buf[1] = (t1, u1);
    let mut len = 2;
    for &b in &x.bp {
        if b > t0 && b < t1 {
            buf[len] = (b, u0 + rate * (b - t0));
            len += 1;
        }
    }
    for &c in &y.bp {
        if c > u0 && c < u1 {
            buf[len] = (t0 + (c - u0) / rate, c);
            len += 1;
        }
    }
    let pts = &mut buf[..len];
    pts.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut worst: f64 = 0.0;
    for w in pts.windows(2) {
        let (a, ua) = w[0];
        let (b, ub) = w[1];
        if b <= a {
            continue;
        }
        worst = worst.max((x.right(a) - y.right(ua)).abs());
        worst = worst.max((x.left(b) - y.left(ub)).abs());
    }
    worst
}

pub fn nodes_cost(x: &Raw, y: &Raw, nodes: &[(f64, f64)]) -> f64 {
    let mut c: f64 = (x.term - y.term).abs();
    for w in nodes.windows(2) {
        c = c.max(edge_cost(x, y, w[0].0, w[0].1, w[1].0, w[1].1));
        c = c.max((w[1].0 - w[1].1).abs());
    }
    c
}

/// Minimum over lattice reparametrizations of [0, 1], exact whenever it is
/// below `cap`; otherwise some value at least `cap`.
pub fn brute_distance(xp: &PiecewisePath, yp: &PiecewisePath, cap: f64) -> f64 {
    let x = Raw::of(xp);
    let y = Raw::of(yp);
    assert_eq!(x.horizon(), 1.0);
    assert_eq!(y.horizon(), 1.0);
    let n = GRID;
    let h = 1.0 / n as f64;
    let id = nodes_cost(&x, &y, &[(0.0, 0.0), (1.0, 1.0)]);
    let ub = id.min(cap);
    let idx = |a: usize, b: usize| a * (n + 1) + b;
    let mut best = vec![f64::INFINITY; (n + 1) * (n + 1)];
    best[0] = 0.0;
    let band = (ub * n as f64).ceil() as usize;
    for a in 0..n {
        for b in a.saturating_sub(band)..=(a + band).min(n - 1) {
            let here = best[idx(a, b)];
            if here >= ub {
                continue;
            }
            for steep in [true, false] {
                for d in 1 + usize::from(!steep)..=MAX_MOVE {
                    let (a1, b1) = if steep { (a + 1, b + d) } else { (a + d, b + 1) };
                    if a1 > n || b1 > n {
                        break;
                    }
                    let dist = (a1 as f64 - b1 as f64).abs() * h;
                    let floor = here.max(dist);
                    if floor >= ub {
                        if (b1 > a1) == steep {
                            // distortion only grows along this ray
                            break;
                        }
                        continue;
                    }
                    if floor >= best[idx(a1, b1)] {
                        continue;
                    }
                    let c = edge_cost(&x, &y, a as f64 * h, b as f64 * h, a1 as f64 * h, b1 as f64 * h);
                    let total = floor.max(c);
                    if total < best[idx(a1, b1)] {
                        best[idx(a1, b1)] = total;
                    }
                }
            }
        }
    }
    let end = best[idx(n, n)].max((x.term - y.term).abs());
    end.min(id)
}

const SLOPES: [f64; 9] = [0.0, 0.0, 0.0, 0.125, -0.125, 0.25, -0.25, 0.5, -0.5];

/// Grid description of a path on [0, 1]: cuts in 1/32 units, per-segment
/// jump into the segment and slope, terminal jump; all values in 1/16 units.
#[derive(Clone, Debug)]
struct Shape {
    start: i32,
    cuts: Vec<u32>,
    jumps: Vec<i32>,
    slopes: Vec<f64>,
    terminal_jump: i32,
}

impl Shape {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let count = rng.random_range(0..=6usize);
        let mut cuts: Vec<u32> = (0..count).map(|_| rng.random_range(1..32u32)).collect();
        cuts.sort_unstable();
        cuts.dedup();
        let mut jumps = vec![0; cuts.len() + 1];
        let mut used = 0;
        for j in jumps.iter_mut().skip(1) {
            if used < 4 && rng.random_bool(0.7) {
                *j = loop {
                    let s = rng.random_range(-16..=16i32);
                    if s != 0 {
                        break s;
                    }
                };
                used += 1;
            }
        }
        let slopes = (0..=cuts.len())
            .map(|_| SLOPES[rng.random_range(0..SLOPES.len())])
            .collect();
        let terminal_jump = if used < 4 && rng.random_bool(0.1) { 8 } else { 0 };
        Self {
            start: rng.random_range(-8..=8i32),
            cuts,
            jumps,
            slopes,
            terminal_jump,
        }
    }

    /// Nearby shape: cuts moved by up to two grid cells, jump sizes by up to
    /// one value step.
    fn perturb(&self, rng: &mut ChaCha8Rng) -> Self {
        let mut out = self.clone();
        for c in out.cuts.iter_mut() {
            *c = (*c as i32 + rng.random_range(-2..=2i32)).clamp(1, 31) as u32;
        }
        if out.cuts.windows(2).any(|w| w[0] >= w[1]) {
            out.cuts = self.cuts.clone();
        }
        for j in out.jumps.iter_mut().skip(1) {
            if *j != 0 {
                let moved = *j + rng.random_range(-1..=1i32);
                *j = if moved == 0 { *j } else { moved };
            }
        }
        if rng.random_bool(0.3) || (out.cuts == self.cuts && out.jumps == self.jumps) {
            out.start += if rng.random_bool(0.5) { 1 } else { -1 };
        }
        out
    }

    fn path(&self) -> PiecewisePath {
        let mut bp = vec![0.0];
        bp.extend(self.cuts.iter().map(|&c| c as f64 / 32.0));
        bp.push(1.0);
        let m = bp.len() - 1;
        let mut values: Vec<f64> = Vec::with_capacity(m);
        let mut current = self.start as f64 / 16.0;
        for i in 0..m {
            if i > 0 {
                current = values[i - 1] + self.slopes[i - 1] * (bp[i] - bp[i - 1]);
                current += self.jumps[i] as f64 / 16.0;
            }
            values.push(current);
        }
        let terminal = values[m - 1]
            + self.slopes[m - 1] * (1.0 - bp[m - 1])
            + self.terminal_jump as f64 / 16.0;
        PiecewisePath::from_parts(bp, values, self.slopes.clone(), terminal)
            .unwrap()
            .canonicalize()
    }
}

/// Path on [0, 1] with breakpoints on the 1/32 grid, at most four jumps,
/// values on the 1/16 grid and slopes in {0, +-1/8, +-1/4, +-1/2}.
pub fn random_path(rng: &mut ChaCha8Rng) -> PiecewisePath {
    Shape::random(rng).path()
}

/// Two such paths; most pairs are small perturbations of each other so that
/// time deformation matters.
pub fn random_pair(rng: &mut ChaCha8Rng) -> (PiecewisePath, PiecewisePath) {
    let a = Shape::random(rng);
    let b = if rng.random_bool(0.75) {
        a.perturb(rng)
    } else {
        Shape::random(rng)
    };
    (a.path(), b.path())
}

pub fn pair_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
