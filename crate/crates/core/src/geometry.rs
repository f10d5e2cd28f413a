//! Planar polygon primitives with closed-set semantics.

pub type Point = [f64; 2];

#[inline]
fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// `c` lies within the bounding box of `ab` (used for collinear cases).
#[inline]
fn within(a: Point, b: Point, c: Point) -> bool {
    c[0] >= a[0].min(b[0]) && c[0] <= a[0].max(b[0]) && c[1] >= a[1].min(b[1]) && c[1] <= a[1].max(b[1])
}

/// Closed segment intersection; touching and collinear overlap count.
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && within(q1, q2, p1))
        || (d2 == 0.0 && within(q1, q2, p2))
        || (d3 == 0.0 && within(p1, p2, q1))
        || (d4 == 0.0 && within(p1, p2, q2))
}

/// Twice the signed area (positive for counterclockwise order).
pub fn signed_area2(pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn of(pts: impl IntoIterator<Item = Point>) -> Aabb {
        let mut b = Aabb {
            min: [f64::INFINITY; 2],
            max: [f64::NEG_INFINITY; 2],
        };
        for p in pts {
            b.min = [b.min[0].min(p[0]), b.min[1].min(p[1])];
            b.max = [b.max[0].max(p[0]), b.max[1].max(p[1])];
        }
        b
    }

    pub fn overlaps(&self, o: &Aabb) -> bool {
        self.min[0] <= o.max[0] && o.min[0] <= self.max[0] && self.min[1] <= o.max[1] && o.min[1] <= self.max[1]
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }
}

/// Simple polygon stored counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pts: Vec<Point>,
    bbox: Aabb,
}

impl Polygon {
    /// Builds a polygon, reorienting it counterclockwise. Fails on fewer than
    /// three vertices, non-finite coordinates, zero area or self-intersection.
    pub fn new(mut pts: Vec<Point>) -> Result<Polygon, String> {
        if pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        if pts.len() < 3 {
            return Err(format!("polygon needs at least 3 vertices, got {}", pts.len()));
        }
        if pts.iter().flatten().any(|v| !v.is_finite()) {
            return Err("polygon has non-finite coordinates".into());
        }
        let a2 = signed_area2(&pts);
        if a2 == 0.0 {
            return Err("polygon has zero area".into());
        }
        if a2 < 0.0 {
            pts.reverse();
        }
        let poly = Polygon {
            bbox: Aabb::of(pts.iter().copied()),
            pts,
        };
        if !poly.is_simple() {
            return Err("polygon is not simple".into());
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.pts
    }

    pub fn bbox(&self) -> &Aabb {
        &self.bbox
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.pts.len();
        (0..n).map(move |i| (self.pts[i], self.pts[(i + 1) % n]))
    }

    /// Enclosed area (shoelace).
    pub fn area(&self) -> f64 {
        0.5 * signed_area2(&self.pts)
    }

    fn is_simple(&self) -> bool {
        let n = self.pts.len();
        let e: Vec<_> = self.edges().collect();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // shared vertex only: the far endpoint of one edge must not lie on the other
                    let (a, b) = if j == i + 1 { (e[i], e[j]) } else { (e[j], e[i]) };
                    // a = (u, v), b = (v, w)
                    if a.0 == a.1 || b.0 == b.1 {
                        return false;
                    }
                    let (u, v, w) = (a.0, a.1, b.1);
                    if orient(u, v, w) == 0.0 && (within(u, v, w) || within(v, w, u)) {
                        return false;
                    }
                } else if segments_intersect(e[i].0, e[i].1, e[j].0, e[j].1) {
                    return false;
                }
            }
        }
        true
    }

    /// Closed containment: boundary points count as inside.
    pub fn contains(&self, p: Point) -> bool {
        if !self.bbox.contains(p) {
            return false;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if orient(a, b, p) == 0.0 && within(a, b, p) {
                return true;
            }
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Whether the closed segment `pq` meets the closed polygon.
    pub fn hits_segment(&self, p: Point, q: Point) -> bool {
        if !self.bbox.overlaps(&Aabb::of([p, q])) {
            return false;
        }
        self.contains(p) || self.edges().any(|(a, b)| segments_intersect(p, q, a, b))
    }

    /// Whether two closed polygons share at least one point.
    pub fn meets(&self, other: &Polygon) -> bool {
        if !self.bbox.overlaps(&other.bbox) {
            return false;
        }
        self.edges()
            .any(|(a, b)| other.edges().any(|(c, d)| segments_intersect(a, b, c, d)))
            || self.contains(other.pts[0])
            || other.contains(self.pts[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x: f64, y: f64, s: f64) -> Polygon {
        Polygon::new(vec![[x, y], [x + s, y], [x + s, y + s], [x, y + s]]).unwrap()
    }

    #[test]
    fn segment_cases() {
        assert!(segments_intersect([0.0, 0.0], [2.0, 2.0], [0.0, 2.0], [2.0, 0.0]));
        assert!(!segments_intersect([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]));
        // touching at an endpoint
        assert!(segments_intersect([0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [1.0, 5.0]));
        // collinear overlap and collinear disjoint
        assert!(segments_intersect([0.0, 0.0], [2.0, 0.0], [1.0, 0.0], [3.0, 0.0]));
        assert!(!segments_intersect([0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]));
    }

    #[test]
    fn orientation_is_normalised() {
        let cw = Polygon::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(cw.area() > 0.0);
        assert_eq!(cw.area(), 1.0);
        assert_eq!(square(0.0, 0.0, 2.0).area(), 4.0);
    }

    #[test]
    fn rejects_bad_polygons() {
        assert!(Polygon::new(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
        assert!(Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).is_err());
        // bow tie
        assert!(Polygon::new(vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).is_err());
        assert!(Polygon::new(vec![[0.0, 0.0], [f64::NAN, 0.0], [0.0, 1.0]]).is_err());
        // closing vertex repeated is accepted
        assert!(Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).is_ok());
    }

    #[test]
    fn closed_containment() {
        let s = square(0.0, 0.0, 1.0);
        assert!(s.contains([0.5, 0.5]));
        assert!(s.contains([0.0, 0.3]));
        assert!(s.contains([1.0, 1.0]));
        assert!(!s.contains([1.0 + 1e-12, 0.5]));
        let l = Polygon::new(vec![
            [0.0, 0.0],
            [2.0, 0.0],
            [2.0, 1.0],
            [1.0, 1.0],
            [1.0, 2.0],
            [0.0, 2.0],
        ])
        .unwrap();
        assert!(!l.contains([1.5, 1.5]));
        assert!(l.contains([0.5, 1.5]));
    }

    #[test]
    fn segment_hits() {
        let s = square(0.0, 0.0, 1.0);
        assert!(s.hits_segment([-1.0, 0.5], [2.0, 0.5]));
        assert!(s.hits_segment([0.2, 0.2], [0.3, 0.3]));
        // grazing along the top edge
        assert!(s.hits_segment([-1.0, 1.0], [2.0, 1.0]));
        assert!(!s.hits_segment([-1.0, 1.0 + 1e-9], [2.0, 1.0 + 1e-9]));
    }

    #[test]
    fn polygon_meets() {
        let a = square(0.0, 0.0, 1.0);
        assert!(a.meets(&square(1.0, 0.0, 1.0)));
        assert!(a.meets(&square(0.25, 0.25, 0.5)));
        assert!(!a.meets(&square(1.5, 0.0, 1.0)));
    }
}
