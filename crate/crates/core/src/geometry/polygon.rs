use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        self.sub(o).norm()
    }

    pub fn lerp(self, o: Point, s: f64) -> Point {
        Point::new(self.x + s * (o.x - self.x), self.y + s * (o.y - self.y))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn of_points<'a>(pts: impl IntoIterator<Item = &'a Point>) -> Self {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in pts {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point {
        self.min.lerp(self.max, 0.5)
    }
}

/// Simple polygon stored counterclockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Validates simplicity and fixes the orientation to counterclockwise.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidDomain(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidDomain("non-finite polygon vertex".into()));
        }
        let area = signed_area(&vertices);
        if area == 0.0 {
            return Err(Error::InvalidDomain("degenerate polygon with zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        if let Some((i, j)) = first_self_intersection(&vertices) {
            return Err(Error::InvalidDomain(format!(
                "self-intersecting polygon: edges {i} and {j} cross"
            )));
        }
        Ok(Self { vertices })
    }

    /// Trusted constructor for vertex lists already known to be simple and ccw.
    pub(crate) fn from_ccw_unchecked(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn centroid(&self) -> Point {
        centroid(&self.vertices)
    }

    pub fn bounding_box(&self) -> BoundingBox {
        BoundingBox::of_points(&self.vertices)
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            b.sub(a).cross(c.sub(b)) >= -1e-14 * self.bounding_box().diagonal().powi(2)
        })
    }

    /// Even-odd point containment.
    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn translated(&self, d: Point) -> Polygon {
        Polygon::from_ccw_unchecked(self.vertices.iter().map(|p| p.add(d)).collect())
    }

    pub fn scaled(&self, s: f64) -> Polygon {
        Polygon::from_ccw_unchecked(self.vertices.iter().map(|p| p.scale(s)).collect())
    }

    /// Exact area of the intersection with the disc of given center and radius.
    pub fn disc_intersection_area(&self, center: Point, radius: f64) -> f64 {
        polygon_disc_area(&self.vertices, center, radius)
    }
}

pub fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

pub fn centroid(v: &[Point]) -> Point {
    let n = v.len();
    let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = v[i];
        let q = v[(i + 1) % n];
        let w = p.cross(q);
        a2 += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    Point::new(cx / (3.0 * a2), cy / (3.0 * a2))
}

fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = q2.sub(q1).cross(p1.sub(q1));
    let d2 = q2.sub(q1).cross(p2.sub(q1));
    let d3 = p2.sub(p1).cross(q1.sub(p1));
    let d4 = p2.sub(p1).cross(q2.sub(p1));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: Point, b: Point, c: Point, d: f64| {
        d == 0.0
            && c.x >= a.x.min(b.x)
            && c.x <= a.x.max(b.x)
            && c.y >= a.y.min(b.y)
            && c.y <= a.y.max(b.y)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

fn first_self_intersection(v: &[Point]) -> Option<(usize, usize)> {
    let n = v.len();
    for i in 0..n {
        for j in (i + 1)..n {
            // adjacent edges share a vertex
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Some((i, j));
            }
        }
    }
    // repeated vertices also make the boundary non-simple
    for i in 0..n {
        for j in (i + 1)..n {
            if v[i] == v[j] {
                return Some((i, j));
            }
        }
    }
    None
}

/// Signed area of (triangle center-a-b) ∩ disc, summed over polygon edges.
pub(crate) fn polygon_disc_area(v: &[Point], center: Point, r: f64) -> f64 {
    let n = v.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = v[i].sub(center);
        let b = v[(i + 1) % n].sub(center);
        total += triangle_disc_area(a, b, r);
    }
    total
}

/// Signed area of the intersection of triangle (0, a, b) with the disc |x| <= r.
pub(crate) fn triangle_disc_area(a: Point, b: Point, r: f64) -> f64 {
    let r2 = r * r;
    let d = b.sub(a);
    // |a + s d|^2 = r^2
    let qa = d.dot(d);
    if qa == 0.0 {
        return 0.0;
    }
    let qb = 2.0 * a.dot(d);
    let qc = a.dot(a) - r2;
    let disc = qb * qb - 4.0 * qa * qc;
    let mut cuts = [0.0, 1.0, 1.0, 1.0];
    let mut ncuts = 1;
    if disc > 0.0 {
        let sq = disc.sqrt();
        let mut s1 = (-qb - sq) / (2.0 * qa);
        let mut s2 = (-qb + sq) / (2.0 * qa);
        if s1 > s2 {
            std::mem::swap(&mut s1, &mut s2);
        }
        for s in [s1, s2] {
            if s > 0.0 && s < 1.0 {
                cuts[ncuts] = s;
                ncuts += 1;
            }
        }
    }
    cuts[ncuts] = 1.0;
    let mut area = 0.0;
    for k in 0..ncuts {
        let p = a.add(d.scale(cuts[k]));
        let q = a.add(d.scale(cuts[k + 1]));
        let mid = p.lerp(q, 0.5);
        if mid.dot(mid) <= r2 {
            area += 0.5 * p.cross(q);
        } else {
            area += 0.5 * r2 * p.cross(q).atan2(p.dot(q));
        }
    }
    area
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_square() -> Polygon {
        Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let p = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(p.area() > 0.0);
        assert_eq!(p.area(), 1.0);
    }

    #[test]
    fn bowtie_is_rejected() {
        let r = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ]);
        assert!(matches!(r, Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn disc_overlap_limits() {
        let sq = unit_square();
        let c = Point::new(0.5, 0.5);
        // disc inside square
        assert!((sq.disc_intersection_area(c, 0.25) - PI / 16.0).abs() < 1e-14);
        // square inside disc
        assert!((sq.disc_intersection_area(c, 2.0) - 1.0).abs() < 1e-14);
        // far away
        assert_eq!(sq.disc_intersection_area(Point::new(10.0, 10.0), 1.0), 0.0);
    }

    #[test]
    fn disc_overlap_of_square_with_equal_area_disc() {
        // closed-form: four circular segments of height r - 1/2 lie outside the square
        let r = (1.0 / PI).sqrt();
        let theta = 2.0 * (0.5 / r).acos();
        let segment = 0.5 * r * r * (theta - theta.sin());
        let inter = unit_square().disc_intersection_area(Point::new(0.5, 0.5), r);
        assert!((inter - (1.0 - 4.0 * segment)).abs() < 1e-14);
    }
}
