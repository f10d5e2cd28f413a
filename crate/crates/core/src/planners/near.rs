//! Neighborhood queries and the optional near-set cache.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::pose::Pose;
use crate::reeds_shepp::rs_distance;
use crate::subriemannian::{privileged_coords, pseudonorm, rs_constants};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NearMode {
    /// Weighted box `{pseudonorm < r / a_min}` centred at the query.
    Box,
    /// Exact sub-Riemannian ball `{d ≤ r}`.
    #[default]
    ExactBall,
}

impl std::str::FromStr for NearMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "box" => Ok(NearMode::Box),
            "exact_ball" | "exact" | "ball" => Ok(NearMode::ExactBall),
            _ => Err(format!("unknown near mode '{s}' (expected box or exact_ball)")),
        }
    }
}

impl std::fmt::Display for NearMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NearMode::Box => "box",
            NearMode::ExactBall => "exact_ball",
        })
    }
}

/// Brute-force `Near(V, x, r)` over an arbitrary vertex list.
///
/// Returns indices into `vertices` in increasing order. The caller excludes
/// `x` itself by not passing it.
pub fn near(vertices: &[Pose], x: &Pose, r: f64, mode: NearMode, turning_radius: f64) -> Result<Vec<usize>> {
    if !(r > 0.0) {
        return Err(invalid(format!("near radius must be positive, got {r}")));
    }
    let a_min = rs_constants(turning_radius)?.a_min;
    Ok(vertices
        .iter()
        .enumerate()
        .filter(|(_, v)| match mode {
            NearMode::ExactBall => rs_distance(x, v, turning_radius) <= r,
            NearMode::Box => pseudonorm(&privileged_coords(x, v)) < r / a_min,
        })
        .map(|(i, _)| i)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub idx: u32,
    /// Canonical pair distance `d(V[min], V[max])`.
    pub dist: f64,
}

/// Per-vertex near sets with their distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborCache {
    pub radius: f64,
    pub mode: NearMode,
    pub lists: Vec<Vec<Neighbor>>,
    /// Distance evaluations an on-demand query of each vertex performs.
    pub evaluated: Vec<u32>,
}

impl NeighborCache {
    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// Whether the relation `j ∈ near(i) ⇔ i ∈ near(j)` holds.
    pub fn is_symmetric(&self) -> bool {
        self.lists.iter().enumerate().all(|(i, l)| {
            l.iter().all(|nb| {
                self.lists[nb.idx as usize]
                    .binary_search_by_key(&(i as u32), |m| m.idx)
                    .is_ok()
            })
        })
    }
}

/// Bucket grid over the planar projection of the vertex set.
#[derive(Debug, Clone)]
struct PlanarGrid {
    origin: [f64; 2],
    cell: f64,
    dims: [usize; 2],
    buckets: Vec<Vec<u32>>,
}

impl PlanarGrid {
    const MAX_DIM: usize = 1024;

    fn build(vertices: &[Pose], reach: f64) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in vertices {
            lo = [lo[0].min(v.x), lo[1].min(v.y)];
            hi = [hi[0].max(v.x), hi[1].max(v.y)];
        }
        if vertices.is_empty() {
            lo = [0.0; 2];
            hi = [0.0; 2];
        }
        let ext = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
        let cell = reach.max(ext / Self::MAX_DIM as f64);
        let dims = [
            ((hi[0] - lo[0]) / cell) as usize + 1,
            ((hi[1] - lo[1]) / cell) as usize + 1,
        ];
        let mut g = Self {
            origin: lo,
            cell,
            dims,
            buckets: vec![Vec::new(); dims[0] * dims[1]],
        };
        for (k, v) in vertices.iter().enumerate() {
            let (i, j) = g.cell_of(v.x, v.y);
            g.buckets[j * dims[0] + i].push(k as u32);
        }
        g
    }

    fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let f = |v: f64, o: f64, d: usize| (((v - o) / self.cell).floor().max(0.0) as usize).min(d - 1);
        (f(x, self.origin[0], self.dims[0]), f(y, self.origin[1], self.dims[1]))
    }

    /// Visits every vertex with planar distance ≤ `reach` from `(x, y)`.
    fn within(&self, vertices: &[Pose], x: f64, y: f64, reach: f64, mut f: impl FnMut(usize)) {
        let span = (reach / self.cell).ceil() as usize;
        let (ci, cj) = self.cell_of(x, y);
        let r2 = reach * reach;
        for j in cj.saturating_sub(span)..=(cj + span).min(self.dims[1] - 1) {
            for i in ci.saturating_sub(span)..=(ci + span).min(self.dims[0] - 1) {
                for &k in &self.buckets[j * self.dims[0] + i] {
                    let v = &vertices[k as usize];
                    let (dx, dy) = (v.x - x, v.y - y);
                    if dx * dx + dy * dy <= r2 {
                        f(k as usize);
                    }
                }
            }
        }
    }
}

/// Near-set oracle over a fixed vertex set, optionally served from a cache.
pub(crate) struct Neighborhoods<'a> {
    vertices: &'a [Pose],
    r: f64,
    mode: NearMode,
    turning_radius: f64,
    box_side: f64,
    reach: f64,
    grid: PlanarGrid,
    cache: Option<&'a NeighborCache>,
}

/// Canonical pair distance, independent of query direction.
pub(crate) fn pair_distance(vertices: &[Pose], i: usize, j: usize, turning_radius: f64) -> f64 {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    rs_distance(&vertices[a], &vertices[b], turning_radius)
}

impl<'a> Neighborhoods<'a> {
    pub(crate) fn new(
        vertices: &'a [Pose],
        r: f64,
        mode: NearMode,
        turning_radius: f64,
        cache: Option<&'a NeighborCache>,
    ) -> Result<Self> {
        if !(r > 0.0) {
            return Err(invalid(format!("near radius must be positive, got {r}")));
        }
        if let Some(c) = cache {
            if c.radius != r || c.mode != mode || c.lists.len() != vertices.len() {
                return Err(invalid("neighbor cache does not match the vertex set, radius or mode"));
            }
        }
        let box_side = r / rs_constants(turning_radius)?.a_min;
        let reach = match mode {
            NearMode::ExactBall => r,
            // |z1| < ρ and |z3| < ρ² bound the planar offset by ρ √(1 + ρ²)
            NearMode::Box => box_side * (1.0 + box_side * box_side).sqrt() * (1.0 + 1e-9),
        };
        Ok(Self {
            vertices,
            r,
            mode,
            turning_radius,
            box_side,
            reach,
            grid: PlanarGrid::build(vertices, reach),
            cache,
        })
    }

    pub(crate) fn distance(&self, i: usize, j: usize) -> f64 {
        pair_distance(self.vertices, i, j, self.turning_radius)
    }

    /// `Near(V \ {V[i]}, V[i], r)` sorted by index, plus the number of distance
    /// evaluations an uncached query performs.
    pub(crate) fn near_of(&self, i: usize) -> (Cow<'_, [Neighbor]>, u32) {
        if let Some(c) = self.cache {
            return (Cow::Borrowed(&c.lists[i]), c.evaluated[i]);
        }
        let x = &self.vertices[i];
        let mut out = Vec::new();
        let mut evaluated = 0u32;
        self.grid.within(self.vertices, x.x, x.y, self.reach, |j| {
            if j == i {
                return;
            }
            match self.mode {
                NearMode::ExactBall => {
                    evaluated += 1;
                    let d = self.distance(i, j);
                    if d <= self.r {
                        out.push(Neighbor { idx: j as u32, dist: d });
                    }
                }
                NearMode::Box => {
                    if pseudonorm(&privileged_coords(x, &self.vertices[j])) < self.box_side {
                        evaluated += 1;
                        out.push(Neighbor {
                            idx: j as u32,
                            dist: self.distance(i, j),
                        });
                    }
                }
            }
        });
        out.sort_unstable_by_key(|nb| nb.idx);
        (Cow::Owned(out), evaluated)
    }
}

/// Precomputes every vertex's near set and its distances.
pub fn precompute_cache(vertices: &[Pose], r: f64, mode: NearMode, turning_radius: f64) -> Result<NeighborCache> {
    let nb = Neighborhoods::new(vertices, r, mode, turning_radius, None)?;
    let n = vertices.len();
    let (lists, evaluated) = match mode {
        NearMode::ExactBall => {
            // symmetric relation: evaluate each unordered pair once
            let mut lists = vec![Vec::new(); n];
            let mut evaluated = vec![0u32; n];
            for i in 0..n {
                let x = &vertices[i];
                nb.grid.within(vertices, x.x, x.y, nb.reach, |j| {
                    if j == i {
                        return;
                    }
                    evaluated[i] += 1;
                    if j > i {
                        let d = nb.distance(i, j);
                        if d <= r {
                            lists[i].push(Neighbor { idx: j as u32, dist: d });
                            lists[j].push(Neighbor { idx: i as u32, dist: d });
                        }
                    }
                });
            }
            for l in &mut lists {
                l.sort_unstable_by_key(|m| m.idx);
            }
            (lists, evaluated)
        }
        NearMode::Box => (0..n)
            .map(|i| {
                let (l, e) = nb.near_of(i);
                (l.into_owned(), e)
            })
            .unzip(),
    };
    Ok(NeighborCache {
        radius: r,
        mode,
        lists,
        evaluated,
    })
}
