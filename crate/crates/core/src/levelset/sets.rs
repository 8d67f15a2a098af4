//! Exact superlevel geometry of piecewise-linear fields.

use crate::error::{Error, Result};
use crate::fem::ScalarField;
use crate::geometry::{Point, PolygonSet};

fn sort3(v: [f64; 3]) -> [f64; 3] {
    let mut s = v;
    s.sort_by(f64::total_cmp);
    s
}

/// Area of {linear interpolant > t} in a triangle of area `area` with nodal values `v`.
pub fn triangle_superlevel_area(area: f64, v: [f64; 3], t: f64) -> f64 {
    let [v0, v1, v2] = sort3(v);
    if t < v0 {
        area
    } else if t >= v2 {
        0.0
    } else if t < v1 {
        area * (1.0 - (t - v0) * (t - v0) / ((v1 - v0) * (v2 - v0)))
    } else {
        area * (v2 - t) * (v2 - t) / ((v2 - v0) * (v2 - v1))
    }
}

pub fn superlevel_measure_exact(u: &ScalarField, t: f64) -> f64 {
    let mesh = u.mesh();
    (0..mesh.triangles().len())
        .map(|k| triangle_superlevel_area(mesh.triangle_area(k), u.triangle_values(k), t))
        .sum()
}

/// Convex piece of a triangle where the interpolant exceeds `t` (counterclockwise).
pub fn clip_triangle(p: [Point; 3], v: [f64; 3], t: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(4);
    for k in 0..3 {
        let (a, b) = (k, (k + 1) % 3);
        let (da, db) = (v[a] - t, v[b] - t);
        if da > 0.0 {
            out.push(p[a]);
        }
        if (da > 0.0) != (db > 0.0) {
            let s = da / (da - db);
            out.push(p[a].lerp(p[b], s));
        }
    }
    out
}

/// The superlevel set as a union of convex pieces.
pub fn superlevel_pieces(u: &ScalarField, t: f64) -> PolygonSet {
    let mesh = u.mesh();
    let mut set = PolygonSet::new();
    for k in 0..mesh.triangles().len() {
        let v = u.triangle_values(k);
        if v.iter().all(|x| *x <= t) {
            continue;
        }
        set.push(clip_triangle(mesh.triangle_points(k), v, t));
    }
    set
}

/// Length of the level segment {interpolant = t} inside one triangle.
pub fn triangle_level_length(p: [Point; 3], v: [f64; 3], t: f64) -> f64 {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(t > lo && t < hi) {
        return 0.0;
    }
    let mut pts = [Point::default(); 3];
    let mut n = 0;
    for k in 0..3 {
        let (a, b) = (k, (k + 1) % 3);
        let (da, db) = (v[a] - t, v[b] - t);
        if da == 0.0 {
            pts[n] = p[a];
            n += 1;
        } else if (da > 0.0) != (db > 0.0) && db != 0.0 {
            pts[n] = p[a].lerp(p[b], da / (da - db));
            n += 1;
        }
    }
    if n == 2 {
        pts[0].dist(pts[1])
    } else {
        0.0
    }
}

/// Total length of the interior level curve ∂U_t ∩ Ω.
pub fn interior_level_perimeter(u: &ScalarField, t: f64) -> f64 {
    let mesh = u.mesh();
    (0..mesh.triangles().len())
        .map(|k| triangle_level_length(mesh.triangle_points(k), u.triangle_values(k), t))
        .sum()
}

/// ∫ ds / u over a segment of length `len` where u runs linearly from `a` to `b` (both > 0).
pub fn inv_linear_integral(len: f64, a: f64, b: f64) -> f64 {
    if (b - a).abs() < 1e-12 * a {
        // expansion of ln(b/a)/(b-a) around b = a
        let d = (b - a) / a;
        len / a * (1.0 - d / 2.0 + d * d / 3.0)
    } else {
        len * (b / a).ln() / (b - a)
    }
}

fn check_boundary_positive(u: &ScalarField) -> Result<()> {
    for e in u.mesh().boundary() {
        for i in e.nodes {
            if !(u.values()[i] > 0.0) {
                return Err(Error::param(
                    "u",
                    format!("boundary value {} at node {i} is not positive", u.values()[i]),
                ));
            }
        }
    }
    Ok(())
}

/// Applies `g(len', a', b')` to the part of each boundary edge where u > t,
/// with a', b' the values at the ends of that part.
fn over_exterior(u: &ScalarField, t: f64, mut g: impl FnMut(f64, f64, f64) -> f64) -> f64 {
    let mut total = 0.0;
    for e in u.mesh().boundary() {
        let a = u.values()[e.nodes[0]];
        let b = u.values()[e.nodes[1]];
        if a > t && b > t {
            total += g(e.length, a, b);
        } else if a > t || b > t {
            let (hi, lo) = if a > t { (a, b) } else { (b, a) };
            let frac = (hi - t) / (hi - lo);
            total += g(e.length * frac, t, hi);
        }
    }
    total
}

/// ∮_{∂U_t ∩ ∂Ω} 1/u.
pub fn exterior_boundary_integral_inv_u(u: &ScalarField, t: f64) -> Result<f64> {
    check_boundary_positive(u)?;
    Ok(over_exterior(u, t, |len, a, b| {
        if a.min(b) > 0.0 {
            inv_linear_integral(len, a, b)
        } else {
            f64::INFINITY
        }
    }))
}

/// Length of ∂U_t ∩ ∂Ω.
pub fn exterior_length(u: &ScalarField, t: f64) -> f64 {
    over_exterior(u, t, |len, _, _| len)
}

/// ∫_0^τ t ∮_{∂U_t ∩ ∂Ω} 1/u dt = ∮ min(u, τ)² / (2u), integrated edge by edge in closed form.
pub fn boundary_moment(u: &ScalarField, tau: f64) -> Result<f64> {
    check_boundary_positive(u)?;
    let mut total = 0.0;
    for e in u.mesh().boundary() {
        let a = u.values()[e.nodes[0]];
        let b = u.values()[e.nodes[1]];
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let l = e.length;
        if hi <= tau {
            total += 0.25 * l * (a + b);
        } else if lo >= tau {
            total += 0.5 * tau * tau * inv_linear_integral(l, a, b);
        } else {
            let frac = (tau - lo) / (hi - lo);
            total += 0.25 * l * frac * (lo + tau);
            total += 0.5 * tau * tau * inv_linear_integral(l * (1.0 - frac), tau, hi);
        }
    }
    Ok(total)
}
