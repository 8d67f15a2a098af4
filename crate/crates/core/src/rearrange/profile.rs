use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::numeric::{cosine_grid, sorted_unique};

use super::distribution::{Distribution, DistributionFunction};

/// Nonincreasing piecewise-linear function on [0, S].
#[derive(Clone, Debug, PartialEq)]
pub struct DecreasingProfile {
    s: Vec<f64>,
    v: Vec<f64>,
    // ∫_0^{s_j} at the knots
    cum: Vec<f64>,
}

/// Number of cosine-clustered s-points used to sample u*.
pub const PROFILE_POINTS: usize = 2048;

impl DecreasingProfile {
    pub fn new(s: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if s.len() < 2 || s.len() != v.len() {
            return Err(Error::param("profile", "needs at least two (s, value) pairs of equal length"));
        }
        if s[0] != 0.0 {
            return Err(Error::param("profile", "must start at s = 0"));
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("profile", "s must be strictly increasing"));
        }
        if v.windows(2).any(|w| w[1] > w[0]) || v.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::param("profile", "values must be finite, nonnegative and nonincreasing"));
        }
        let mut cum = vec![0.0; s.len()];
        for j in 1..s.len() {
            cum[j] = cum[j - 1] + 0.5 * (s[j] - s[j - 1]) * (v[j] + v[j - 1]);
        }
        Ok(Self { s, v, cum })
    }

    /// Constant profile on [0, measure].
    pub fn constant(value: f64, measure: f64) -> Result<Self> {
        Self::new(vec![0.0, measure], vec![value, value])
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn measure(&self) -> f64 {
        self.s[self.s.len() - 1]
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.v[0];
        }
        let n = self.s.len();
        if s >= self.s[n - 1] {
            return self.v[n - 1];
        }
        let j = self.s.partition_point(|x| *x <= s) - 1;
        let w = (s - self.s[j]) / (self.s[j + 1] - self.s[j]);
        self.v[j] + w * (self.v[j + 1] - self.v[j])
    }

    /// ∫_0^s profile, exact for the piecewise-linear representation.
    pub fn integral_to(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.measure());
        let j = self.s.partition_point(|x| *x <= s).saturating_sub(1).min(self.s.len() - 1);
        self.cum[j] + 0.5 * (s - self.s[j]) * (self.v[j] + self.eval(s))
    }

    pub fn integral(&self) -> f64 {
        self.integral_to(self.measure())
    }

    pub fn max(&self) -> f64 {
        self.v[0]
    }

    pub fn distribution(&self) -> Result<DistributionFunction> {
        DistributionFunction::from_profile(&self.s, &self.v)
    }

    /// Two-column text `s value`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (s, v) in self.s.iter().zip(&self.v) {
            let _ = writeln!(out, "{s:.16e} {v:.16e}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut s = Vec::new();
        let mut v = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let parse = |x: &str| {
                x.parse::<f64>().map_err(|_| Error::Config {
                    line: i + 1,
                    reason: format!("bad number `{x}`"),
                })
            };
            if f.len() != 2 {
                return Err(Error::Config {
                    line: i + 1,
                    reason: "expected two columns".into(),
                });
            }
            s.push(parse(f[0])?);
            v.push(parse(f[1])?);
        }
        Self::new(s, v)
    }
}

/// u* sampled on cosine-clustered s-points plus every kink of the distribution.
pub fn decreasing_rearrangement(mu: &impl Distribution) -> Result<DecreasingProfile> {
    let total = mu.total_measure();
    if !(total > 0.0) {
        return Err(Error::param("distribution", "total measure must be positive"));
    }
    let mut s = cosine_grid(0.0, total, PROFILE_POINTS);
    for t in mu.breakpoints() {
        let m = mu.measure(t);
        if m > 0.0 && m < total {
            s.push(m);
        }
    }
    let s = sorted_unique(s);
    let mut v: Vec<f64> = s.iter().map(|x| mu.inverse(*x)).collect();
    // enforce monotonicity against last-bit noise of the inverse
    for j in 1..v.len() {
        if v[j] > v[j - 1] {
            v[j] = v[j - 1];
        }
    }
    DecreasingProfile::new(s, v)
}

/// Schwarz symmetrization value u♯(x) = u*(ω_n |x|^n).
pub fn schwarz_value(prof: &DecreasingProfile, x: Point, n: u32) -> Result<f64> {
    if n != 2 {
        return Err(Error::Unsupported(format!("planar points with n = {n}")));
    }
    let s = PI * x.dot(x);
    if s > prof.measure() * (1.0 + 1e-12) {
        return Err(Error::param("x", format!("|x| = {} lies outside the symmetrized ball", x.norm())));
    }
    Ok(prof.eval(s))
}

/// Volume of the unit ball in R^n.
pub fn omega(n: u32) -> f64 {
    let nf = n as f64;
    PI.powf(nf / 2.0) / gamma_half_integer(nf / 2.0 + 1.0)
}

/// Γ(x) for x a positive integer or half-integer.
fn gamma_half_integer(x: f64) -> f64 {
    if (x - x.round()).abs() < 1e-12 {
        (1..x.round() as u64).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut y = 0.5;
        while y < x - 1e-12 {
            g *= y;
            y += 1.0;
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{generate_mesh, ScalarField};
    use crate::geometry::Domain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn unit_ball_volumes() {
        assert!((omega(2) - PI).abs() < 1e-15);
        assert!((omega(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((omega(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_field_profile() {
        let m = Arc::new(generate_mesh(&Domain::disc(1.0).unwrap(), 0.1).unwrap());
        let u = ScalarField::interpolate(&m, |_| 3.0).unwrap();
        let p = decreasing_rearrangement(&DistributionFunction::from_field(&u).unwrap()).unwrap();
        assert!(p.values().iter().all(|v| (*v - 3.0).abs() < 1e-14));
        assert!((p.measure() - m.area()).abs() < 1e-14);
    }

    #[test]
    fn cone_profile_and_schwarz_value() {
        let m = Arc::new(generate_mesh(&Domain::disc(1.0).unwrap(), 0.02).unwrap());
        let u = ScalarField::interpolate(&m, |p| 1.0 - p.norm()).unwrap();
        let p = decreasing_rearrangement(&DistributionFunction::from_field(&u).unwrap()).unwrap();
        for s in [0.1, 1.0, 2.0, 3.0] {
            assert!((p.eval(s) - (1.0 - (s / PI).sqrt())).abs() < 2e-3);
        }
        assert!((schwarz_value(&p, Point::default(), 2).unwrap() - 1.0).abs() < 1e-12);
        assert!((schwarz_value(&p, Point::new(0.5, 0.0), 2).unwrap() - 0.5).abs() < 2e-3);
        assert!(schwarz_value(&p, Point::new(1.1, 0.0), 2).is_err());
    }

    #[test]
    fn generalized_inverse_inequalities() {
        let m = Arc::new(generate_mesh(&"rect w=1 h=1".parse::<Domain>().unwrap(), 0.1).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vals: Vec<f64> = (0..m.nodes().len()).map(|_| rng.gen_range(0.0..2.0)).collect();
        let u = ScalarField::new(Arc::clone(&m), vals).unwrap();
        let mu = DistributionFunction::from_field(&u).unwrap();
        for _ in 0..1000 {
            let s = rng.gen_range(0.0..m.area());
            let t = rng.gen_range(u.min()..2.0);
            assert!(mu.inverse(mu.measure(t)) <= t + 1e-12);
            assert!(mu.measure(mu.inverse(s)) <= s + 1e-12);
        }
    }

    #[test]
    fn text_round_trip() {
        let p = DecreasingProfile::new(vec![0.0, 0.5, 2.0], vec![2.0, 1.0, 0.25]).unwrap();
        let q = DecreasingProfile::from_text(&p.to_text()).unwrap();
        assert_eq!(p, q);
        assert!(DecreasingProfile::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!((p.integral() - (0.5 * 1.5 + 1.5 * 0.625)).abs() < 1e-15);
    }
}
