use crate::error::{Error, Result};
use crate::fem::ScalarField;

/// A right-continuous nonincreasing distribution function t ↦ |{u > t}| on t ≥ 0.
pub trait Distribution {
    fn total_measure(&self) -> f64;
    /// Essential supremum; the measure vanishes from here on.
    fn sup(&self) -> f64;
    fn measure(&self, t: f64) -> f64;
    /// Right derivative of the measure.
    fn derivative(&self, t: f64) -> f64;
    /// Points in [0, sup] between which the measure is smooth, starting at 0 and ending at sup.
    fn breakpoints(&self) -> Vec<f64>;

    /// Value of the measure on [a, b) when it is known to be constant there.
    fn constant_on(&self, _a: f64, _b: f64) -> Option<f64> {
        None
    }

    /// Decreasing rearrangement u*(s) = inf{t ≥ 0 : μ(t) < s}.
    fn inverse(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.sup();
        }
        if s > self.total_measure() {
            return 0.0;
        }
        if self.measure(0.0) < s {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, self.sup());
        // invariant: μ(lo) ≥ s, μ(hi) < s
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.measure(mid) < s {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// Exact distribution function of a nonnegative piecewise-linear field:
/// on each [t_j, t_{j+1}) the measure is c0 + c1 s + c2 s² with s = t − t_j.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionFunction {
    breaks: Vec<f64>,
    coeffs: Vec<[f64; 3]>,
    total: f64,
}

/// One elementary contribution to the measure.
enum Piece {
    /// Triangle of area `area` with sorted nodal values.
    Triangle { area: f64, v: [f64; 3] },
    /// Interval of length `len` on which a profile decreases linearly from `hi` to `lo`.
    Linear { len: f64, lo: f64, hi: f64 },
}

impl DistributionFunction {
    fn build(values: &[f64], pieces: &[Piece], total: f64) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::param(
                "u",
                format!("distribution functions need finite nonnegative values, found {v}"),
            ));
        }
        let mut breaks = values.to_vec();
        breaks.push(0.0);
        let breaks = crate::numeric::sorted_unique(breaks);
        let k = breaks.len();
        let seg_of = |t: f64| breaks.partition_point(|b| *b <= t).saturating_sub(1);
        let mut coeffs = vec![[0.0f64; 3]; k];
        // constant parts: a piece lying entirely above [t_j, t_{j+1}) contributes its full size
        let mut below = vec![0.0f64; k + 1];
        let mut add_const = |upto: usize, a: f64| {
            // segments 0..upto
            below[0] += a;
            below[upto] -= a;
        };
        for piece in pieces {
            match *piece {
                Piece::Triangle { area, v: [v0, v1, v2] } => {
                    let j0 = seg_of(v0);
                    add_const(j0, area);
                    if v2 == v0 {
                        continue;
                    }
                    let j2 = seg_of(v2);
                    for j in j0..j2 {
                        let tj = breaks[j];
                        let c = &mut coeffs[j];
                        if tj < v1 {
                            let kk = area / ((v1 - v0) * (v2 - v0));
                            let d = tj - v0;
                            c[0] += area - kk * d * d;
                            c[1] -= 2.0 * kk * d;
                            c[2] -= kk;
                        } else {
                            let kk = area / ((v2 - v0) * (v2 - v1));
                            let e = v2 - tj;
                            c[0] += kk * e * e;
                            c[1] -= 2.0 * kk * e;
                            c[2] += kk;
                        }
                    }
                }
                Piece::Linear { len, lo, hi } => {
                    let j0 = seg_of(lo);
                    add_const(j0, len);
                    if hi == lo {
                        continue;
                    }
                    let j2 = seg_of(hi);
                    let slope = len / (hi - lo);
                    for j in j0..j2 {
                        let c = &mut coeffs[j];
                        c[0] += slope * (hi - breaks[j]);
                        c[1] -= slope;
                    }
                }
            }
        }
        let mut acc = 0.0;
        for j in 0..k {
            acc += below[j];
            coeffs[j][0] += acc;
        }
        Ok(Self { breaks, coeffs, total })
    }

    /// Distribution of a nonnegative piecewise-linear field.
    pub fn from_field(u: &ScalarField) -> Result<Self> {
        let mesh = u.mesh();
        let pieces: Vec<Piece> = (0..mesh.triangles().len())
            .map(|t| {
                let mut v = u.triangle_values(t);
                v.sort_by(f64::total_cmp);
                Piece::Triangle {
                    area: mesh.triangle_area(t),
                    v,
                }
            })
            .collect();
        Self::build(u.values(), &pieces, mesh.area())
    }

    /// Distribution of a nonincreasing piecewise-linear profile on [0, S].
    pub fn from_profile(s: &[f64], v: &[f64]) -> Result<Self> {
        let pieces: Vec<Piece> = s
            .windows(2)
            .zip(v.windows(2))
            .map(|(s, v)| Piece::Linear {
                len: s[1] - s[0],
                lo: v[1].min(v[0]),
                hi: v[0].max(v[1]),
            })
            .collect();
        Self::build(v, &pieces, s[s.len() - 1] - s[0])
    }

    fn segment(&self, t: f64) -> Option<(usize, f64)> {
        if t < 0.0 {
            return Some((0, 0.0));
        }
        let j = self.breaks.partition_point(|b| *b <= t);
        if j >= self.breaks.len() {
            return None;
        }
        let j = j - 1;
        Some((j, t - self.breaks[j]))
    }

    fn poly(&self, j: usize, s: f64) -> f64 {
        let c = self.coeffs[j];
        (c[0] + s * (c[1] + s * c[2])).clamp(0.0, self.total)
    }

    /// Coefficients (c0, c1, c2) of segment `j` in the local variable t − t_j.
    pub fn segment_coefficients(&self, j: usize) -> [f64; 3] {
        self.coeffs[j]
    }

    /// Left limit of the measure at t_{j+1}.
    pub fn left_limit_end(&self, j: usize) -> f64 {
        self.poly(j, self.breaks[j + 1] - self.breaks[j])
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// Measure values at which u* has a kink or a flat part: μ(t_j) and the left limits μ(t_j−).
    pub fn s_breaks(&self) -> Vec<f64> {
        let mut s = vec![0.0, self.total];
        for j in 0..self.breaks.len() - 1 {
            s.push(self.poly(j, 0.0));
            s.push(self.left_limit_end(j));
        }
        s.retain(|x| *x >= 0.0 && *x <= self.total);
        crate::numeric::sorted_unique(s)
    }

    pub fn is_constant_on(&self, j: usize) -> bool {
        self.coeffs[j][1] == 0.0 && self.coeffs[j][2] == 0.0
    }
}

impl Distribution for DistributionFunction {
    fn total_measure(&self) -> f64 {
        self.total
    }

    fn sup(&self) -> f64 {
        self.breaks[self.breaks.len() - 1]
    }

    fn measure(&self, t: f64) -> f64 {
        if t < 0.0 {
            return self.total;
        }
        match self.segment(t) {
            Some((j, s)) => self.poly(j, s),
            None => 0.0,
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        match self.segment(t.max(0.0)) {
            Some((j, s)) => self.coeffs[j][1] + 2.0 * self.coeffs[j][2] * s,
            None => 0.0,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breaks.clone()
    }

    fn constant_on(&self, a: f64, b: f64) -> Option<f64> {
        let (j, _) = self.segment(a)?;
        if b <= self.breaks[j + 1] && self.is_constant_on(j) {
            Some(self.poly(j, 0.0))
        } else {
            None
        }
    }

    /// Exact inverse: locate the segment where μ drops below s, then bisect inside it.
    fn inverse(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.sup();
        }
        if s > self.total || self.measure(0.0) < s {
            return 0.0;
        }
        let k = self.breaks.len() - 1;
        // first segment whose left limit at its end is below s
        let (mut lo, mut hi) = (0usize, k);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.left_limit_end(mid) < s {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if lo >= k {
            return self.sup();
        }
        let j = lo;
        if self.poly(j, 0.0) < s {
            return self.breaks[j];
        }
        let (mut a, mut b) = (0.0, self.breaks[j + 1] - self.breaks[j]);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if self.poly(j, m) < s {
                b = m;
            } else {
                a = m;
            }
        }
        self.breaks[j] + b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::generate_mesh;
    use crate::geometry::Domain;
    use crate::levelset::superlevel_measure_exact;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn square_mesh(h: f64) -> Arc<crate::fem::Mesh> {
        Arc::new(generate_mesh(&"rect w=1 h=1".parse::<Domain>().unwrap(), h).unwrap())
    }

    #[test]
    fn constant_field() {
        let m = square_mesh(0.25);
        let u = ScalarField::interpolate(&m, |_| 2.0).unwrap();
        let mu = DistributionFunction::from_field(&u).unwrap();
        assert!((mu.measure(1.999) - 1.0).abs() < 1e-14);
        assert_eq!(mu.measure(2.0), 0.0);
        assert!((mu.inverse(0.5) - 2.0).abs() < 1e-14);
        assert_eq!(mu.sup(), 2.0);
    }

    #[test]
    fn agrees_with_triangle_sums_at_random_levels() {
        let m = square_mesh(0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vals: Vec<f64> = (0..m.nodes().len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let u = ScalarField::new(Arc::clone(&m), vals).unwrap();
        let mu = DistributionFunction::from_field(&u).unwrap();
        for _ in 0..500 {
            let t = rng.gen_range(-0.1..1.1);
            let a = mu.measure(t);
            let b = superlevel_measure_exact(&u, t);
            assert!((a - b).abs() < 1e-12, "t={t}: {a} vs {b}");
        }
        for t in mu.breakpoints() {
            assert!((mu.measure(t) - superlevel_measure_exact(&u, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let m = square_mesh(0.25);
        let u = ScalarField::interpolate(&m, |p| 1.0 + p.x * p.x + 0.3 * p.y).unwrap();
        let mu = DistributionFunction::from_field(&u).unwrap();
        let b = mu.breakpoints();
        for w in b.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            let e = 1e-7 * (w[1] - w[0]);
            let fd = (mu.measure(t + e) - mu.measure(t - e)) / (2.0 * e);
            assert!((fd - mu.derivative(t)).abs() < 1e-5 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn cone_distribution() {
        let m = Arc::new(generate_mesh(&Domain::disc(1.0).unwrap(), 0.02).unwrap());
        let u = ScalarField::interpolate(&m, |p| 1.0 - p.norm()).unwrap();
        let mu = DistributionFunction::from_field(&u).unwrap();
        for t in [0.1, 0.4, 0.7, 0.95] {
            assert!((mu.measure(t) - PI * (1.0 - t) * (1.0 - t)).abs() < 2e-3);
        }
        for s in [0.3, 1.0, 2.5] {
            assert!((mu.inverse(s) - (1.0 - (s / PI).sqrt())).abs() < 2e-3);
        }
    }

    #[test]
    fn negative_values_rejected() {
        let m = square_mesh(0.25);
        let u = ScalarField::interpolate(&m, |p| p.x - 0.1).unwrap();
        assert!(DistributionFunction::from_field(&u).is_err());
    }

    #[test]
    fn profile_distribution_is_inverse() {
        let s = [0.0, 1.0, 2.0, 3.0];
        let v = [3.0, 2.0, 2.0, 0.5];
        let mu = DistributionFunction::from_profile(&s, &v).unwrap();
        assert!((mu.measure(2.5) - 0.5).abs() < 1e-15);
        assert!((mu.measure(1.0) - (2.0 + 2.0 / 3.0)).abs() < 1e-12);
        assert!((mu.measure(1.9) - 2.0 - 0.1 / 1.5).abs() < 1e-12);
        assert_eq!(mu.measure(3.0), 0.0);
        assert_eq!(mu.total_measure(), 3.0);
        assert!((mu.inverse(0.5) - 2.5).abs() < 1e-12);
    }
}
