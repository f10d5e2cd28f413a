//! Optimal steering for the Reeds-Shepp car.
//!
//! The shortest path between two poses for a unit-speed car with turning
//! radius `R` that may drive forward and in reverse belongs to a small family
//! of curve words built from arcs (`C`) and straight lines (`S`), with cusps
//! (`|`) where the gear changes. Each base word is solved in closed form in a
//! frame normalised to `R = 1`; the remaining words are obtained through the
//! time-flip `(x, y, φ) → (-x, y, -φ)`, the reflection `(x, y, φ) → (x, -y, -φ)`
//! and the backwards (time reversal) transform.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::pose::{wrap_angle, Pose};

pub mod oracle;

/// Sign tolerance when classifying solved word parameters.
///
/// Any signed parameter vector that closes the word equations is a feasible
/// path, so the tolerance only decides which near-degenerate solutions are
/// admitted; it can never produce an invalid path.
const SIGN_TOL: f64 = 1e-9;
/// Normalised lengths below this are dropped from the emitted segment list.
const DROP_TOL: f64 = 1e-10;
/// Normalised length difference under which two words count as tied.
const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SegmentKind {
    LeftTurn,
    RightTurn,
    Straight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gear {
    Forward,
    Reverse,
}

impl Gear {
    fn sign(self) -> f64 {
        match self {
            Gear::Forward => 1.0,
            Gear::Reverse => -1.0,
        }
    }

    fn flipped(self) -> Gear {
        match self {
            Gear::Forward => Gear::Reverse,
            Gear::Reverse => Gear::Forward,
        }
    }
}

/// One primitive of a Reeds-Shepp path; `length` is arc length in workspace units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RsSegment {
    pub kind: SegmentKind,
    pub direction: Gear,
    pub length: f64,
}

impl RsSegment {
    /// Pose reached after driving `s ∈ [0, length]` along this segment.
    pub fn advance(&self, from: &Pose, s: f64, radius: f64) -> Pose {
        let v = self.direction.sign() * s;
        let th = from.theta();
        match self.kind {
            SegmentKind::Straight => Pose::new(from.x + v * th.cos(), from.y + v * th.sin(), th),
            SegmentKind::LeftTurn => {
                let phi = v / radius;
                Pose::new(
                    from.x + radius * ((th + phi).sin() - th.sin()),
                    from.y + radius * (th.cos() - (th + phi).cos()),
                    th + phi,
                )
            }
            SegmentKind::RightTurn => {
                let phi = v / radius;
                Pose::new(
                    from.x + radius * (th.sin() - (th - phi).sin()),
                    from.y + radius * ((th - phi).cos() - th.cos()),
                    th - phi,
                )
            }
        }
    }
}

/// A Reeds-Shepp trajectory: at most five primitives driven in order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RsPath {
    pub segments: Vec<RsSegment>,
    pub total_length: f64,
    /// Solver word that produced the path (see [`RsPath::letters`] for the
    /// gear-annotated segment string).
    pub word: &'static str,
    pub radius: f64,
}

impl RsPath {
    pub fn empty(radius: f64) -> Self {
        Self {
            segments: Vec::new(),
            total_length: 0.0,
            word: "empty",
            radius,
        }
    }

    /// Gear-annotated letters, e.g. `L+S+R-`.
    pub fn letters(&self) -> String {
        let mut s = String::with_capacity(2 * self.segments.len());
        for seg in &self.segments {
            s.push(match seg.kind {
                SegmentKind::LeftTurn => 'L',
                SegmentKind::RightTurn => 'R',
                SegmentKind::Straight => 'S',
            });
            s.push(match seg.direction {
                Gear::Forward => '+',
                Gear::Reverse => '-',
            });
        }
        s
    }

    pub fn end_pose(&self, from: &Pose) -> Pose {
        self.segments
            .iter()
            .fold(*from, |p, seg| seg.advance(&p, seg.length, self.radius))
    }

    /// The same curve traversed from its end back to its start.
    pub fn reversed(&self) -> RsPath {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| RsSegment {
                kind: s.kind,
                direction: s.direction.flipped(),
                length: s.length,
            })
            .collect();
        RsPath {
            segments,
            total_length: self.total_length,
            word: self.word,
            radius: self.radius,
        }
    }

    /// Pose at arc length `s` along the path.
    pub fn interpolate(&self, from: &Pose, s: f64) -> Result<Pose> {
        if !(s >= 0.0 && s <= self.total_length) {
            return Err(invalid(format!(
                "arc-length parameter {s} outside [0, {}]",
                self.total_length
            )));
        }
        let mut p = *from;
        let mut rem = s;
        for seg in &self.segments {
            if rem <= seg.length {
                return Ok(seg.advance(&p, rem, self.radius));
            }
            p = seg.advance(&p, seg.length, self.radius);
            rem -= seg.length;
        }
        Ok(p)
    }

    /// Poses at arc lengths `0, step, 2 step, …` plus the end pose.
    ///
    /// This is the polyline used for collision checking: `⌈L/step⌉ + 1` poses,
    /// the last one always the exact end of the path.
    pub fn sample_poses(&self, from: &Pose, step: f64) -> Vec<Pose> {
        let mut out = Vec::new();
        self.for_each_sample(from, step, |p| {
            out.push(*p);
            true
        });
        out
    }

    /// Visits the collision polyline vertices in order until `f` returns false.
    /// Returns false iff the visit was stopped early.
    pub fn for_each_sample(&self, from: &Pose, step: f64, mut f: impl FnMut(&Pose) -> bool) -> bool {
        assert!(step > 0.0, "sampling step must be positive");
        let count = (self.total_length / step).ceil() as usize;
        if !f(from) {
            return false;
        }
        if count == 0 {
            return true;
        }
        let mut seg_idx = 0;
        let mut seg_start = *from;
        let mut seg_offset = 0.0;
        for k in 1..count {
            let s = k as f64 * step;
            while seg_idx + 1 < self.segments.len() && s > seg_offset + self.segments[seg_idx].length {
                let seg = &self.segments[seg_idx];
                seg_start = seg.advance(&seg_start, seg.length, self.radius);
                seg_offset += seg.length;
                seg_idx += 1;
            }
            let seg = &self.segments[seg_idx];
            let local = (s - seg_offset).min(seg.length);
            if !f(&seg.advance(&seg_start, local, self.radius)) {
                return false;
            }
        }
        f(&self.end_pose(from))
    }
}

// ---------------------------------------------------------------------------
// Closed-form word solver (normalised frame, R = 1)
// ---------------------------------------------------------------------------

use SegmentKind::{LeftTurn as L, RightTurn as R, Straight as S};

/// Every word evaluated by the solver, in enumeration order.
///
/// Names follow the base formula they come from; `~t` marks the time-flip,
/// `~r` the reflection and `~b` the backwards transform.
const WORDS: [(&str, &[SegmentKind]); 44] = [
    // CSC
    ("LSL", &[L, S, L]),
    ("LSL~t", &[L, S, L]),
    ("RSR", &[R, S, R]),
    ("RSR~t", &[R, S, R]),
    ("LSR", &[L, S, R]),
    ("LSR~t", &[L, S, R]),
    ("RSL", &[R, S, L]),
    ("RSL~t", &[R, S, L]),
    // C|C|C, C|CC, CC|C
    ("LRL", &[L, R, L]),
    ("LRL~t", &[L, R, L]),
    ("RLR", &[R, L, R]),
    ("RLR~t", &[R, L, R]),
    ("LRL~b", &[L, R, L]),
    ("LRL~bt", &[L, R, L]),
    ("RLR~b", &[R, L, R]),
    ("RLR~bt", &[R, L, R]),
    // CCu|CuC, C|CuCu|C
    ("LRLR", &[L, R, L, R]),
    ("LRLR~t", &[L, R, L, R]),
    ("RLRL", &[R, L, R, L]),
    ("RLRL~t", &[R, L, R, L]),
    ("L|RL|R", &[L, R, L, R]),
    ("L|RL|R~t", &[L, R, L, R]),
    ("R|LR|L", &[R, L, R, L]),
    ("R|LR|L~t", &[R, L, R, L]),
    // C|C(pi/2)SC and its backwards form CSC(pi/2)|C
    ("LRSL", &[L, R, S, L]),
    ("LRSL~t", &[L, R, S, L]),
    ("RLSR", &[R, L, S, R]),
    ("RLSR~t", &[R, L, S, R]),
    ("LRSR", &[L, R, S, R]),
    ("LRSR~t", &[L, R, S, R]),
    ("RLSL", &[R, L, S, L]),
    ("RLSL~t", &[R, L, S, L]),
    ("LSRL", &[L, S, R, L]),
    ("LSRL~t", &[L, S, R, L]),
    ("RSLR", &[R, S, L, R]),
    ("RSLR~t", &[R, S, L, R]),
    ("RSRL", &[R, S, R, L]),
    ("RSRL~t", &[R, S, R, L]),
    ("LSLR", &[L, S, L, R]),
    ("LSLR~t", &[L, S, L, R]),
    // C|C(pi/2)SC(pi/2)|C
    ("LRSLR", &[L, R, S, L, R]),
    ("LRSLR~t", &[L, R, S, L, R]),
    ("RLSRL", &[R, L, S, R, L]),
    ("RLSRL~t", &[R, L, S, R, L]),
];

/// Number of curve words the solver evaluates.
pub const WORD_COUNT: usize = WORDS.len();

#[inline]
fn polar(x: f64, y: f64) -> (f64, f64) {
    (x.hypot(y), y.atan2(x))
}

#[inline]
fn clamp_unit(v: f64) -> f64 {
    v.clamp(-1.0, 1.0)
}

fn lp_sp_lp(x: f64, y: f64, phi: f64) -> Option<[f64; 3]> {
    let (u, t) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if t >= -SIGN_TOL {
        let v = wrap_angle(phi - t);
        if v >= -SIGN_TOL {
            return Some([t, u, v]);
        }
    }
    None
}

fn lp_sp_rp(x: f64, y: f64, phi: f64) -> Option<[f64; 3]> {
    let (u1, t1) = polar(x + phi.sin(), y - 1.0 - phi.cos());
    let u1 = u1 * u1;
    if u1 >= 4.0 {
        let u = (u1 - 4.0).sqrt();
        let theta = 2f64.atan2(u);
        let t = wrap_angle(t1 + theta);
        let v = wrap_angle(t - phi);
        if t >= -SIGN_TOL && v >= -SIGN_TOL {
            return Some([t, u, v]);
        }
    }
    None
}

fn lp_rm_l(x: f64, y: f64, phi: f64) -> Option<[f64; 3]> {
    let (u1, theta) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if u1 <= 4.0 {
        let u = -2.0 * clamp_unit(0.25 * u1).asin();
        let t = wrap_angle(theta + 0.5 * u + PI);
        let v = wrap_angle(phi - t + u);
        if t >= -SIGN_TOL && u <= SIGN_TOL {
            return Some([t, u, v]);
        }
    }
    None
}

fn tau_omega(u: f64, v: f64, xi: f64, eta: f64, phi: f64) -> (f64, f64) {
    let delta = wrap_angle(u - v);
    let a = u.sin() - delta.sin();
    let b = u.cos() - delta.cos() - 1.0;
    let t1 = (eta * a - xi * b).atan2(xi * a + eta * b);
    let t2 = 2.0 * (delta.cos() - v.cos() - u.cos()) + 3.0;
    let tau = if t2 < 0.0 { wrap_angle(t1 + PI) } else { wrap_angle(t1) };
    (tau, wrap_angle(tau - u + v - phi))
}

fn lp_rup_lum_rm(x: f64, y: f64, phi: f64) -> Option<[f64; 3]> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let rho = 0.25 * (2.0 + xi.hypot(eta));
    if rho <= 1.0 {
        let u = rho.acos();
        let (t, v) = tau_omega(u, -u, xi, eta, phi);
        if t >= -SIGN_TOL && v <= SIGN_TOL {
            return Some([t, u, v]);
        }
    }
    None
}

fn lp_rum_lum_rp(x: f64, y: f64, phi: f64) -> Option<[f64; 3]> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let rho = (20.0 - xi * xi - eta * eta) / 16.0;
    if (0.0..=1.0).contains(&rho) {
        let u = -rho.acos();
        if u >= -FRAC_PI_2 {
            let (t, v) = tau_omega(u, u, xi, eta, phi);
            if t >= -SIGN_TOL && v >= -SIGN_TOL {
                return Some([t, u, v]);
            }
        }
    }
    None
}

fn lp_rm_sm_lm(x: f64, y: f64, phi: f64) -> Option<[f64; 3]> {
    let (rho, theta) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if rho >= 2.0 {
        let r = (rho * rho - 4.0).sqrt();
        let u = 2.0 - r;
        let t = wrap_angle(theta + r.atan2(-2.0));
        let v = wrap_angle(phi - FRAC_PI_2 - t);
        if t >= -SIGN_TOL && u <= SIGN_TOL && v <= SIGN_TOL {
            return Some([t, u, v]);
        }
    }
    None
}

fn lp_rm_sm_rm(x: f64, y: f64, phi: f64) -> Option<[f64; 3]> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let (rho, theta) = polar(-eta, xi);
    if rho >= 2.0 {
        let t = theta;
        let u = 2.0 - rho;
        let v = wrap_angle(t + FRAC_PI_2 - phi);
        if t >= -SIGN_TOL && u <= SIGN_TOL && v <= SIGN_TOL {
            return Some([t, u, v]);
        }
    }
    None
}

fn lp_rm_slm_rp(x: f64, y: f64, phi: f64) -> Option<[f64; 3]> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let (rho, _) = polar(xi, eta);
    if rho >= 2.0 {
        let u = 4.0 - (rho * rho - 4.0).sqrt();
        if u <= SIGN_TOL {
            let t = wrap_angle(((4.0 - u) * xi - 2.0 * eta).atan2(-2.0 * xi + (u - 4.0) * eta));
            let v = wrap_angle(t - phi);
            if t >= -SIGN_TOL && v >= -SIGN_TOL {
                return Some([t, u, v]);
            }
        }
    }
    None
}

type BaseFn = fn(f64, f64, f64) -> Option<[f64; 3]>;
type BuildFn = fn([f64; 3], f64) -> ([f64; 5], usize);

/// Evaluates one base formula on its four symmetric images, in
/// (plain, time-flip, reflection, both) order. Time-flipped images negate
/// every length.
fn family(
    solve: BaseFn,
    (x, y, phi): (f64, f64, f64),
    build: BuildFn,
    word: &mut usize,
    visit: &mut dyn FnMut(usize, &[f64]),
) {
    let images = [(x, y, phi), (-x, y, -phi), (x, -y, -phi), (-x, -y, phi)];
    for (i, (ix, iy, iphi)) in images.into_iter().enumerate() {
        if let Some(p) = solve(ix, iy, iphi) {
            let sign = if i % 2 == 1 { -1.0 } else { 1.0 };
            let (lens, n) = build(p, sign);
            visit(*word + i, &lens[..n]);
        }
    }
    *word += 4;
}

/// Visits every admissible word as `(word index, signed normalised lengths)`.
fn for_each_word(x: f64, y: f64, phi: f64, mut visit: impl FnMut(usize, &[f64])) {
    let (sphi, cphi) = phi.sin_cos();
    // target seen from the end pose, for words driven backwards
    let xb = x * cphi + y * sphi;
    let yb = x * sphi - y * cphi;
    let fwd = (x, y, phi);
    let bwd = (xb, yb, phi);

    let fwd3: BuildFn = |p, s| ([s * p[0], s * p[1], s * p[2], 0.0, 0.0], 3);
    let bwd3: BuildFn = |p, s| ([s * p[2], s * p[1], s * p[0], 0.0, 0.0], 3);
    let opp4: BuildFn = |p, s| ([s * p[0], s * p[1], -s * p[1], s * p[2], 0.0], 4);
    let same4: BuildFn = |p, s| ([s * p[0], s * p[1], s * p[1], s * p[2], 0.0], 4);
    let half_fwd: BuildFn = |p, s| ([s * p[0], -s * FRAC_PI_2, s * p[1], s * p[2], 0.0], 4);
    let half_bwd: BuildFn = |p, s| ([s * p[2], s * p[1], -s * FRAC_PI_2, s * p[0], 0.0], 4);
    let double_half: BuildFn = |p, s| ([s * p[0], -s * FRAC_PI_2, s * p[1], -s * FRAC_PI_2, s * p[2]], 5);

    let v: &mut dyn FnMut(usize, &[f64]) = &mut visit;
    let mut word = 0;
    family(lp_sp_lp, fwd, fwd3, &mut word, v);
    family(lp_sp_rp, fwd, fwd3, &mut word, v);
    family(lp_rm_l, fwd, fwd3, &mut word, v);
    family(lp_rm_l, bwd, bwd3, &mut word, v);
    family(lp_rup_lum_rm, fwd, opp4, &mut word, v);
    family(lp_rum_lum_rp, fwd, same4, &mut word, v);
    family(lp_rm_sm_lm, fwd, half_fwd, &mut word, v);
    family(lp_rm_sm_rm, fwd, half_fwd, &mut word, v);
    family(lp_rm_sm_lm, bwd, half_bwd, &mut word, v);
    family(lp_rm_sm_rm, bwd, half_bwd, &mut word, v);
    family(lp_rm_slm_rp, fwd, double_half, &mut word, v);
    debug_assert_eq!(word, WORD_COUNT);
}

/// Winning word in the normalised frame.
#[derive(Debug, Clone, Copy)]
struct Best {
    word: usize,
    lens: [f64; 5],
    n: usize,
    /// Normalised length, sum of absolute parameters.
    length: f64,
    /// Number of segments that survive the zero-length filter.
    nseg: usize,
}

fn normalised_target(from: &Pose, to: &Pose, radius: f64) -> (f64, f64, f64) {
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    let (s, c) = from.theta().sin_cos();
    (
        (c * dx + s * dy) / radius,
        (-s * dx + c * dy) / radius,
        wrap_angle(to.theta() - from.theta()),
    )
}

fn select_best(x: f64, y: f64, phi: f64) -> Best {
    let mut best: Option<Best> = None;
    for_each_word(x, y, phi, |word, lens| {
        let length: f64 = lens.iter().map(|v| v.abs()).sum();
        let nseg = lens.iter().filter(|v| v.abs() > DROP_TOL).count();
        let better = match &best {
            None => true,
            Some(b) => length < b.length - TIE_TOL || (length <= b.length + TIE_TOL && nseg < b.nseg),
        };
        if better {
            let mut arr = [0.0; 5];
            arr[..lens.len()].copy_from_slice(lens);
            best = Some(Best {
                word,
                lens: arr,
                n: lens.len(),
                length,
                nseg,
            });
        }
    });
    // CSC always admits a solution, so the search never comes back empty
    best.expect("Reeds-Shepp solver found no admissible word")
}

fn world_length(best: &Best, radius: f64) -> f64 {
    best.lens[..best.n]
        .iter()
        .filter(|v| v.abs() > DROP_TOL)
        .map(|v| v.abs() * radius)
        .sum()
}

fn check_radius(radius: f64) {
    assert!(
        radius > 0.0 && radius.is_finite(),
        "turning radius must be positive, got {radius}"
    );
}

/// Minimum-length Reeds-Shepp path from `from` to `to` with turning radius `radius`.
pub fn steer(from: &Pose, to: &Pose, radius: f64) -> RsPath {
    check_radius(radius);
    let (x, y, phi) = normalised_target(from, to, radius);
    let best = select_best(x, y, phi);
    let (name, kinds) = WORDS[best.word];
    let segments: Vec<RsSegment> = kinds
        .iter()
        .zip(&best.lens[..best.n])
        .filter(|(_, v)| v.abs() > DROP_TOL)
        .map(|(&kind, &v)| RsSegment {
            kind,
            direction: if v >= 0.0 { Gear::Forward } else { Gear::Reverse },
            length: v.abs() * radius,
        })
        .collect();
    let path = RsPath {
        total_length: world_length(&best, radius),
        word: if segments.is_empty() { "empty" } else { name },
        segments,
        radius,
    };
    #[cfg(debug_assertions)]
    {
        let end = path.end_pose(from);
        let scale = radius.max(1.0);
        debug_assert!(
            (end.x - to.x).abs() <= 1e-9 * scale
                && (end.y - to.y).abs() <= 1e-9 * scale
                && wrap_angle(end.theta() - to.theta()).abs() <= 1e-9,
            "steer({from:?} -> {to:?}) ends at {end:?} via {}",
            path.letters()
        );
    }
    path
}

/// Sub-Riemannian (Reeds-Shepp) distance: the length of [`steer`]'s path.
pub fn rs_distance(from: &Pose, to: &Pose, radius: f64) -> f64 {
    check_radius(radius);
    let (x, y, phi) = normalised_target(from, to, radius);
    world_length(&select_best(x, y, phi), radius)
}

/// Integrates signed normalised segment lengths from the origin.
#[cfg(test)]
fn integrate_normalised(kinds: &[SegmentKind], lens: &[f64]) -> (f64, f64, f64) {
    let (mut x, mut y, mut phi) = (0.0f64, 0.0f64, 0.0f64);
    for (&k, &v) in kinds.iter().zip(lens) {
        match k {
            SegmentKind::Straight => {
                x += v * phi.cos();
                y += v * phi.sin();
            }
            SegmentKind::LeftTurn => {
                x += (phi + v).sin() - phi.sin();
                y += phi.cos() - (phi + v).cos();
                phi += v;
            }
            SegmentKind::RightTurn => {
                x += phi.sin() - (phi - v).sin();
                y += (phi - v).cos() - phi.cos();
                phi -= v;
            }
        }
    }
    (x, y, phi)
}

/// Every admissible word for a query as `(name, normalised signed lengths)`.
/// Exposed for diagnostics and tests.
pub fn candidate_words(from: &Pose, to: &Pose, radius: f64) -> Vec<(&'static str, Vec<f64>)> {
    check_radius(radius);
    let (x, y, phi) = normalised_target(from, to, radius);
    let mut out = Vec::new();
    for_each_word(x, y, phi, |w, lens| out.push((WORDS[w].0, lens.to_vec())));
    out
}

#[cfg(test)]
fn word_kinds(name: &str) -> Option<&'static [SegmentKind]> {
    WORDS.iter().find(|(n, _)| *n == name).map(|(_, k)| *k)
}
