//! Brute-force steering oracle.
//!
//! Estimates the Reeds-Shepp distance without any of the closed-form word
//! equations. Each candidate word shape (a sequence of arc/straight primitives
//! with signed free lengths, possibly with tied or quarter-turn arcs) is
//! searched exhaustively: the first arc is eliminated through the heading
//! equation, a straight segment (if any) is eliminated by projection, and the
//! remaining one or two arc parameters are swept on a grid. Every grid cell
//! that brackets a root or holds a local minimum of the residual is refined to
//! machine precision, and the shortest closing parameter vector wins.
//!
//! Signed lengths let one shape stand for every gear pattern, so the search
//! space is a superset of the optimal word family; every accepted solution is
//! a feasible path, so the estimate can only err upwards (a missed basin).

use std::f64::consts::{FRAC_PI_2, PI};

use super::SegmentKind::{self, LeftTurn as L, RightTurn as R, Straight as S};
use crate::pose::Pose;

/// Residual under which a refined parameter vector counts as closing the path.
const ACCEPT: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
enum Slot {
    /// free signed parameter
    Free(usize),
    /// fixed signed length
    Fixed(f64),
    /// `mult ×` an existing free parameter
    Tied(usize, f64),
}

#[derive(Debug, Clone)]
struct Shape {
    kinds: Vec<SegmentKind>,
    slots: Vec<Slot>,
}

/// Best closing path found by the oracle, in normalised (R = 1) units.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub kinds: Vec<SegmentKind>,
    pub lengths: Vec<f64>,
    /// Sum of absolute normalised lengths.
    pub length: f64,
}

fn opposite(k: SegmentKind) -> SegmentKind {
    match k {
        L => R,
        R => L,
        S => S,
    }
}

fn curvature(k: SegmentKind) -> f64 {
    match k {
        L => 1.0,
        R => -1.0,
        S => 0.0,
    }
}

fn wrap(a: f64) -> f64 {
    let v = (a + PI).rem_euclid(2.0 * PI) - PI;
    if v == -PI {
        PI
    } else {
        v
    }
}

fn shapes() -> Vec<Shape> {
    use Slot::*;
    let mut out = Vec::new();
    let mut push = |kinds: Vec<SegmentKind>, slots: Vec<Slot>| out.push(Shape { kinds, slots });
    for a in [L, R] {
        let b = opposite(a);
        for c in [L, R] {
            push(vec![a, S, c], vec![Free(0), Free(1), Free(2)]);
        }
        push(vec![a, b, a], vec![Free(0), Free(1), Free(2)]);
        for tie in [1.0, -1.0] {
            push(vec![a, b, a, b], vec![Free(0), Free(1), Tied(1, tie), Free(2)]);
        }
        for q in [FRAC_PI_2, -FRAC_PI_2] {
            for c in [L, R] {
                push(vec![a, b, S, c], vec![Free(0), Fixed(q), Free(1), Free(2)]);
                push(vec![a, S, c, opposite(c)], vec![Free(0), Free(1), Fixed(q), Free(2)]);
            }
            for q2 in [FRAC_PI_2, -FRAC_PI_2] {
                push(
                    vec![a, b, S, a, b],
                    vec![Free(0), Fixed(q), Free(1), Fixed(q2), Free(2)],
                );
            }
        }
    }
    out
}

/// Forward kinematics from the origin with unit turning radius.
fn integrate(kinds: &[SegmentKind], lens: &[f64]) -> (f64, f64, f64) {
    let (mut x, mut y, mut h) = (0.0f64, 0.0f64, 0.0f64);
    for (&k, &v) in kinds.iter().zip(lens) {
        match k {
            S => {
                x += v * h.cos();
                y += v * h.sin();
            }
            L => {
                x += (h + v).sin() - h.sin();
                y += h.cos() - (h + v).cos();
                h += v;
            }
            R => {
                x += h.sin() - (h - v).sin();
                y += (h - v).cos() - h.cos();
                h -= v;
            }
        }
    }
    (x, y, h)
}

struct Problem<'a> {
    shape: &'a Shape,
    target: (f64, f64, f64),
    /// heading coefficients of p1, p2 and the fixed part
    coef: [f64; 3],
    fixed_turn: f64,
    first_sign: f64,
}

impl<'a> Problem<'a> {
    fn new(shape: &'a Shape, target: (f64, f64, f64)) -> Self {
        let mut coef = [0.0; 3];
        let mut fixed_turn = 0.0;
        for (&k, slot) in shape.kinds.iter().zip(&shape.slots) {
            let c = curvature(k);
            match *slot {
                Slot::Free(j) => coef[j] += c,
                Slot::Tied(j, m) => coef[j] += c * m,
                Slot::Fixed(v) => fixed_turn += c * v,
            }
        }
        Self {
            shape,
            target,
            coef,
            fixed_turn,
            first_sign: curvature(shape.kinds[0]),
        }
    }

    /// Completes `(p1, p2)` with the first arc that closes the heading.
    fn params(&self, p1: f64, p2: f64) -> [f64; 3] {
        let rest = self.coef[1] * p1 + self.coef[2] * p2 + self.fixed_turn;
        [self.first_sign * wrap(self.target.2 - rest), p1, p2]
    }

    fn lengths(&self, p: &[f64; 3]) -> Vec<f64> {
        self.shape
            .slots
            .iter()
            .map(|s| match *s {
                Slot::Free(j) => p[j],
                Slot::Fixed(v) => v,
                Slot::Tied(j, m) => m * p[j],
            })
            .collect()
    }

    fn residual(&self, p: &[f64; 3]) -> (f64, f64) {
        let (x, y, _) = integrate(&self.shape.kinds, &self.lengths(p));
        (x - self.target.0, y - self.target.1)
    }

    fn closes(&self, p: &[f64; 3]) -> Option<f64> {
        let lens = self.lengths(p);
        let (x, y, h) = integrate(&self.shape.kinds, &lens);
        let err = (x - self.target.0)
            .abs()
            .max((y - self.target.1).abs())
            .max(wrap(h - self.target.2).abs());
        (err <= ACCEPT && p.iter().all(|v| v.is_finite())).then(|| lens.iter().map(|v| v.abs()).sum())
    }

    /// Index (1 or 2) of the free straight parameter, if the shape has one.
    fn straight_param(&self) -> Option<usize> {
        self.shape
            .kinds
            .iter()
            .zip(&self.shape.slots)
            .find_map(|(&k, s)| match (k, s) {
                (S, Slot::Free(j)) => Some(*j),
                _ => None,
            })
    }
}

fn grid(n: usize) -> Vec<f64> {
    (0..=n).map(|k| -PI + 2.0 * PI * k as f64 / n as f64).collect()
}

fn even_cells(step: f64) -> usize {
    let n = (2.0 * PI / step).ceil() as usize;
    (n + n % 2).max(4)
}

/// One arc parameter swept, the straight solved by projection.
fn solve_with_straight(pb: &Problem, ls: usize, step: f64, accept: &mut dyn FnMut(&[f64; 3], f64)) {
    let other = 3 - ls;
    let straight_slot = pb
        .shape
        .slots
        .iter()
        .position(|s| matches!(s, Slot::Free(j) if *j == ls))
        .unwrap();
    let assemble = |q: f64| {
        let mut p = if other == 1 {
            pb.params(q, 0.0)
        } else {
            pb.params(0.0, q)
        };
        p[ls] = 0.0;
        p
    };
    // signed perpendicular miss of the straight line, and the projected straight length
    let eval = |q: f64| -> (f64, f64, [f64; 3]) {
        let mut p = assemble(q);
        let lens = pb.lengths(&p);
        let (fx, fy, _) = integrate(&pb.shape.kinds, &lens);
        let (_, _, h) = integrate(&pb.shape.kinds[..straight_slot], &lens[..straight_slot]);
        let (ex, ey) = (h.cos(), h.sin());
        let (dx, dy) = (pb.target.0 - fx, pb.target.1 - fy);
        p[ls] = ex * dx + ey * dy;
        (ex * dy - ey * dx, p[ls], p)
    };
    let qs = grid(even_cells(step));
    let gs: Vec<f64> = qs.iter().map(|&q| eval(q).0).collect();
    let mut try_q = |q: f64| {
        let (_, _, p) = eval(q);
        if let Some(len) = pb.closes(&p) {
            accept(&p, len);
        }
    };
    for k in 0..qs.len() {
        if gs[k] == 0.0 {
            try_q(qs[k]);
        }
        if k + 1 < qs.len() && gs[k] * gs[k + 1] < 0.0 {
            let (mut a, mut b, mut ga) = (qs[k], qs[k + 1], gs[k]);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let gm = eval(m).0;
                if gm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if ga * gm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    ga = gm;
                }
            }
            try_q(0.5 * (a + b));
        }
        if k > 0 && k + 1 < qs.len() && gs[k].abs() < gs[k - 1].abs() && gs[k].abs() < gs[k + 1].abs() {
            // possible tangential root between two samples
            let (mut a, mut b) = (qs[k - 1], qs[k + 1]);
            let ratio = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..200 {
                let c = b - ratio * (b - a);
                let d = a + ratio * (b - a);
                if eval(c).0.abs() < eval(d).0.abs() {
                    b = d;
                } else {
                    a = c;
                }
                if b - a < 1e-15 {
                    break;
                }
            }
            try_q(0.5 * (a + b));
        }
    }
}

/// Two arc parameters swept on a square grid, refined by damped Newton.
fn solve_two_arcs(pb: &Problem, step: f64, accept: &mut dyn FnMut(&[f64; 3], f64)) {
    let qs = grid(even_cells(step));
    let n = qs.len();
    let mut vals = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (rx, ry) = pb.residual(&pb.params(qs[i], qs[j]));
            vals[i * n + j] = rx * rx + ry * ry;
        }
    }
    for i in 0..n {
        for j in 0..n {
            let v = vals[i * n + j];
            let mut is_min = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= n as i64 || jj >= n as i64 {
                        continue;
                    }
                    if vals[ii as usize * n + jj as usize] < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                if let Some(p) = newton(pb, qs[i], qs[j]) {
                    if let Some(len) = pb.closes(&p) {
                        accept(&p, len);
                    }
                }
            }
        }
    }
}

fn newton(pb: &Problem, mut a: f64, mut b: f64) -> Option<[f64; 3]> {
    let norm = |a: f64, b: f64| {
        let (rx, ry) = pb.residual(&pb.params(a, b));
        (rx, ry, rx.hypot(ry))
    };
    let (mut rx, mut ry, mut r) = norm(a, b);
    let h = 1e-7;
    for _ in 0..60 {
        if r < 1e-14 {
            break;
        }
        let (ax1, ay1, _) = norm(a + h, b);
        let (ax0, ay0, _) = norm(a - h, b);
        let (bx1, by1, _) = norm(a, b + h);
        let (bx0, by0, _) = norm(a, b - h);
        let j11 = (ax1 - ax0) / (2.0 * h);
        let j21 = (ay1 - ay0) / (2.0 * h);
        let j12 = (bx1 - bx0) / (2.0 * h);
        let j22 = (by1 - by0) / (2.0 * h);
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-14 {
            return None;
        }
        let da = -(j22 * rx - j12 * ry) / det;
        let db = -(-j21 * rx + j11 * ry) / det;
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-6 {
            let (nx, ny, nr) = norm(a + t * da, b + t * db);
            if nr < r {
                a += t * da;
                b += t * db;
                rx = nx;
                ry = ny;
                r = nr;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (r <= ACCEPT).then(|| pb.params(a, b))
}

/// Shortest closing path over every shape at the given grid resolution
/// (radians; the one-parameter sweeps use an eight times finer grid).
pub fn oracle_solution(from: &Pose, to: &Pose, radius: f64, resolution: f64) -> OracleSolution {
    assert!(resolution > 0.0, "oracle resolution must be positive");
    assert!(radius > 0.0, "turning radius must be positive");
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    let (s, c) = from.theta().sin_cos();
    let target = (
        (c * dx + s * dy) / radius,
        (c * dy - s * dx) / radius,
        wrap(to.theta() - from.theta()),
    );

    let mut best: Option<OracleSolution> = None;
    for shape in shapes() {
        let pb = Problem::new(&shape, target);
        let mut accept = |p: &[f64; 3], len: f64| {
            if best.as_ref().is_none_or(|b| len < b.length) {
                best = Some(OracleSolution {
                    kinds: shape.kinds.clone(),
                    lengths: pb.lengths(p),
                    length: len,
                });
            }
        };
        match pb.straight_param() {
            Some(ls) => solve_with_straight(&pb, ls, resolution / 8.0, &mut accept),
            None => solve_two_arcs(&pb, resolution, &mut accept),
        }
    }
    best.expect("straight-arc shapes always close")
}

/// Brute-force estimate of the Reeds-Shepp distance.
pub fn oracle_distance(from: &Pose, to: &Pose, radius: f64, resolution: f64) -> f64 {
    oracle_solution(from, to, radius, resolution).length * radius
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_inventory() {
        let s = shapes();
        assert_eq!(s.len(), 34);
        assert!(s.iter().all(|sh| sh.kinds[0] != S && sh.kinds.len() == sh.slots.len()));
    }

    #[test]
    fn straight_line() {
        let d = oracle_distance(&Pose::origin(), &Pose::new(4.0, 0.0, 0.0), 1.0, 0.1);
        assert!((d - 4.0).abs() < 1e-6, "{d}");
    }

    #[test]
    fn identity() {
        let p = Pose::new(0.4, -1.0, 2.0);
        assert!(oracle_distance(&p, &p, 1.0, 0.1) < 1e-9);
    }

    #[test]
    fn quarter_arc() {
        let d = oracle_distance(&Pose::origin(), &Pose::new(1.0, 1.0, FRAC_PI_2), 1.0, 0.1);
        assert!((d - FRAC_PI_2).abs() < 1e-6, "{d}");
    }
}
