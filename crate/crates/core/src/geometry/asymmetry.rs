use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::{BallSpec, Domain};
use super::polygon::{polygon_disc_area, BoundingBox, Point, Polygon};
use super::raster::symmetric_difference_with_ball;
use crate::error::Result;

/// A planar set whose overlap with any disc can be evaluated.
pub trait DiscOverlap {
    fn measure(&self) -> f64;
    fn bounding_box(&self) -> BoundingBox;
    fn centroid(&self) -> Point;
    fn disc_overlap(&self, center: Point, radius: f64) -> f64;
}

impl DiscOverlap for Polygon {
    fn measure(&self) -> f64 {
        self.area()
    }

    fn bounding_box(&self) -> BoundingBox {
        Polygon::bounding_box(self)
    }

    fn centroid(&self) -> Point {
        Polygon::centroid(self)
    }

    fn disc_overlap(&self, center: Point, radius: f64) -> f64 {
        self.disc_intersection_area(center, radius)
    }
}

/// Disjoint union of convex pieces (e.g. a clipped superlevel set).
#[derive(Clone, Debug, Default)]
pub struct PolygonSet {
    pieces: Vec<Vec<Point>>,
    boxes: Vec<BoundingBox>,
    areas: Vec<f64>,
}

impl PolygonSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a counterclockwise piece; degenerate pieces are dropped.
    pub fn push(&mut self, piece: Vec<Point>) {
        if piece.len() < 3 {
            return;
        }
        let a = super::polygon::signed_area(&piece);
        if a <= 0.0 {
            return;
        }
        self.boxes.push(BoundingBox::of_points(&piece));
        self.areas.push(a);
        self.pieces.push(piece);
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }
}

impl DiscOverlap for PolygonSet {
    fn measure(&self) -> f64 {
        self.areas.iter().sum()
    }

    fn bounding_box(&self) -> BoundingBox {
        let mut pts = Vec::with_capacity(2 * self.boxes.len());
        for b in &self.boxes {
            pts.push(b.min);
            pts.push(b.max);
        }
        BoundingBox::of_points(&pts)
    }

    fn centroid(&self) -> Point {
        let (mut sx, mut sy, mut a) = (0.0, 0.0, 0.0);
        for (p, area) in self.pieces.iter().zip(&self.areas) {
            let c = super::polygon::centroid(p);
            sx += c.x * area;
            sy += c.y * area;
            a += area;
        }
        Point::new(sx / a, sy / a)
    }

    fn disc_overlap(&self, center: Point, r: f64) -> f64 {
        let r2 = r * r;
        let mut total = 0.0;
        for ((p, b), area) in self.pieces.iter().zip(&self.boxes).zip(&self.areas) {
            let nx = center.x.clamp(b.min.x, b.max.x) - center.x;
            let ny = center.y.clamp(b.min.y, b.max.y) - center.y;
            if nx * nx + ny * ny >= r2 {
                continue;
            }
            let fx = (b.min.x - center.x).abs().max((b.max.x - center.x).abs());
            let fy = (b.min.y - center.y).abs().max((b.max.y - center.y).abs());
            if fx * fx + fy * fy <= r2 {
                total += area;
                continue;
            }
            total += polygon_disc_area(p, center, r);
        }
        total
    }
}

/// Result of the asymmetry search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Asymmetry {
    pub value: f64,
    pub center: Point,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct AsymmetryOptions {
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    /// Vertices used to polygonize curved boundaries.
    pub boundary_segments: usize,
}

impl Default for AsymmetryOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            tol: 1e-8,
            max_iter: 4000,
            boundary_segments: 2048,
        }
    }
}

/// Derivative-free simplex minimization in the plane.
pub fn nelder_mead(
    f: &impl Fn(Point) -> f64,
    start: Point,
    step: f64,
    tol: f64,
    max_iter: usize,
) -> (Point, f64) {
    let mut s = [
        start,
        Point::new(start.x + step, start.y),
        Point::new(start.x, start.y + step),
    ];
    let mut v = [f(s[0]), f(s[1]), f(s[2])];
    for _ in 0..max_iter {
        // order best .. worst
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(s[a].x.total_cmp(&s[b].x)));
        s = [s[idx[0]], s[idx[1]], s[idx[2]]];
        v = [v[idx[0]], v[idx[1]], v[idx[2]]];
        let size = s[1].dist(s[0]).max(s[2].dist(s[0]));
        if size < tol {
            break;
        }
        let cen = s[0].lerp(s[1], 0.5);
        let refl = cen.add(cen.sub(s[2]));
        let fr = f(refl);
        if fr < v[0] {
            let exp = cen.add(cen.sub(s[2]).scale(2.0));
            let fe = f(exp);
            if fe < fr {
                s[2] = exp;
                v[2] = fe;
            } else {
                s[2] = refl;
                v[2] = fr;
            }
        } else if fr < v[1] {
            s[2] = refl;
            v[2] = fr;
        } else {
            let (con, fc) = if fr < v[2] {
                let c = cen.lerp(refl, 0.5);
                (c, f(c))
            } else {
                let c = cen.lerp(s[2], 0.5);
                (c, f(c))
            };
            if fc < v[2].min(fr) {
                s[2] = con;
                v[2] = fc;
            } else {
                for k in 1..3 {
                    s[k] = s[0].lerp(s[k], 0.5);
                    v[k] = f(s[k]);
                }
            }
        }
    }
    let mut best = 0;
    for k in 1..3 {
        if v[k] < v[best] {
            best = k;
        }
    }
    (s[best], v[best])
}

/// Multi-start minimization of |E Δ B_r(x)| / |B_r| over centers x, with |B_r| = |E|.
pub fn asymmetry_of(set: &(impl DiscOverlap + Sync), measure: f64, opts: AsymmetryOptions) -> Asymmetry {
    let r = (measure / PI).sqrt();
    let ball = PI * r * r;
    let objective = |c: Point| ((measure + ball - 2.0 * set.disc_overlap(c, r)) / ball).max(0.0);
    let bb = set.bounding_box();
    let c0 = set.centroid();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut seeds = vec![c0];
    for j in -1i32..=1 {
        for i in -1i32..=1 {
            if i == 0 && j == 0 {
                continue;
            }
            let jx = rng.gen_range(-1.0..1.0) * bb.width() / 16.0;
            let jy = rng.gen_range(-1.0..1.0) * bb.height() / 16.0;
            let p = Point::new(
                c0.x + i as f64 * bb.width() / 4.0 + jx,
                c0.y + j as f64 * bb.height() / 4.0 + jy,
            );
            seeds.push(Point::new(
                p.x.clamp(bb.min.x, bb.max.x),
                p.y.clamp(bb.min.y, bb.max.y),
            ));
        }
    }
    let step = 0.1 * r;
    let results: Vec<(Point, f64)> = seeds
        .par_iter()
        .map(|s| nelder_mead(&objective, *s, step, opts.tol, opts.max_iter))
        .collect();
    let (center, value) = results
        .into_iter()
        .min_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then(a.0.x.total_cmp(&b.0.x))
                .then(a.0.y.total_cmp(&b.0.y))
        })
        .expect("nine seeds");
    Asymmetry {
        value: value.min(2.0),
        center,
        radius: r,
    }
}

/// Fraenkel asymmetry of a domain: exact disc overlap with a fine
/// boundary polygon, minimized over centers.
pub fn fraenkel_asymmetry(d: &Domain) -> Asymmetry {
    fraenkel_asymmetry_with(d, AsymmetryOptions::default())
}

pub fn fraenkel_asymmetry_with(d: &Domain, opts: AsymmetryOptions) -> Asymmetry {
    let poly = d.boundary_polygon(opts.boundary_segments);
    asymmetry_of(&poly, d.measure(), opts)
}

/// Raster cross-check of a computed asymmetry at cell size `h`: (value, error).
pub fn raster_asymmetry_at(d: &Domain, center: Point, h: f64) -> Result<(f64, f64)> {
    let b = BallSpec::new(center, d.equal_measure_radius())?;
    let sd = symmetric_difference_with_ball(d, &b, h)?;
    Ok((sd.value / b.area(), (sd.error + sd.bound) / b.area()))
}
