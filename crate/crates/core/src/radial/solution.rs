use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numeric::{cosine_grid, integrate, sorted_unique, QuadOptions};
use crate::rearrange::{omega, Distribution, DecreasingProfile};

/// Points added to the f* knots when tabulating v.
const EXTRA_POINTS: usize = 513;

fn quad_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-16,
        rel_tol: 1e-13,
        max_panels: 200,
    }
}

/// Radial solution of the symmetrized problem as a function of s = ω_n |x|^n.
#[derive(Clone, Debug)]
pub struct RadialSolution {
    measure: f64,
    n: u32,
    beta: f64,
    fstar: DecreasingProfile,
    grid: Vec<f64>,
    vgrid: Vec<f64>,
    v_m: f64,
}

impl RadialSolution {
    pub fn new(measure: f64, n: u32, beta: f64, fstar: DecreasingProfile) -> Result<Self> {
        if !(measure > 0.0) || !measure.is_finite() {
            return Err(Error::param("measure", format!("must be positive, got {measure}")));
        }
        if n < 2 {
            return Err(Error::param("n", format!("dimension must be at least 2, got {n}")));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::param("beta", format!("must be positive, got {beta}")));
        }
        if (fstar.measure() - measure).abs() > 1e-9 * measure {
            return Err(Error::param(
                "fstar",
                format!("profile lives on [0, {}] but the measure is {measure}", fstar.measure()),
            ));
        }
        if fstar.max() <= 0.0 {
            return Err(Error::InvalidSource("f* vanishes identically".into()));
        }
        let mut pts: Vec<f64> = fstar.s().iter().map(|s| s * measure / fstar.measure()).collect();
        pts.extend(cosine_grid(0.0, measure, EXTRA_POINTS));
        let grid = sorted_unique(pts);
        let mut rs = Self {
            measure,
            n,
            beta,
            fstar,
            grid,
            vgrid: Vec::new(),
            v_m: 0.0,
        };
        rs.v_m = rs.total_source() / (beta * rs.perimeter());
        let m = rs.grid.len();
        let mut vgrid = vec![0.0; m];
        vgrid[m - 1] = rs.v_m;
        for j in (0..m - 1).rev() {
            vgrid[j] = vgrid[j + 1] + rs.slope_integral(rs.grid[j], rs.grid[j + 1]);
        }
        rs.vgrid = vgrid;
        Ok(rs)
    }

    /// Solution for a constant source on the ball of the given measure.
    pub fn constant_source(measure: f64, n: u32, beta: f64, value: f64) -> Result<Self> {
        Self::new(measure, n, beta, DecreasingProfile::constant(value, measure)?)
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn fstar(&self) -> &DecreasingProfile {
        &self.fstar
    }

    /// n ω_n^{1/n} |Ω|^{1−1/n}
    pub fn perimeter(&self) -> f64 {
        let nf = self.n as f64;
        nf * omega(self.n).powf(1.0 / nf) * self.measure.powf(1.0 - 1.0 / nf)
    }

    /// n² ω_n^{2/n}
    pub fn isoperimetric_factor(&self) -> f64 {
        let nf = self.n as f64;
        nf * nf * omega(self.n).powf(2.0 / nf)
    }

    /// ∫_0^t f*.
    pub fn source_integral(&self, t: f64) -> f64 {
        self.fstar.integral_to(t)
    }

    pub fn total_source(&self) -> f64 {
        self.source_integral(self.measure)
    }

    pub fn v_m(&self) -> f64 {
        self.v_m
    }

    pub fn v_max(&self) -> f64 {
        self.vgrid[0]
    }

    /// g(s) = −dv/ds = ∫_0^s f* / (n² ω_n^{2/n} s^{2−2/n}).
    pub fn slope(&self, s: f64) -> f64 {
        let nf = self.n as f64;
        if s <= 0.0 {
            return if self.n == 2 {
                self.fstar.max() / self.isoperimetric_factor()
            } else {
                f64::INFINITY
            };
        }
        self.source_integral(s) / (self.isoperimetric_factor() * s.powf(2.0 - 2.0 / nf))
    }

    /// ∫_a^b g, after the substitution w = t^{2/n} that removes the singularity at 0.
    fn slope_integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let nf = self.n as f64;
        let e = 2.0 / nf;
        let c = self.isoperimetric_factor();
        let integrand = |w: f64| {
            let t = w.powf(1.0 / e);
            0.5 * nf * self.source_integral(t) / (c * t)
        };
        integrate(integrand, a.powf(e), b.powf(e), quad_opts()).0
    }

    /// v as a function of s = ω_n |x|^n.
    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.vgrid[0];
        }
        if s >= self.measure {
            return self.v_m;
        }
        let j = self.grid.partition_point(|x| *x <= s);
        self.vgrid[j] + self.slope_integral(s, self.grid[j])
    }

    /// v at a point of the ball, given |x|.
    pub fn eval_radius(&self, r: f64) -> f64 {
        self.eval(omega(self.n) * r.powi(self.n as i32))
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn grid_values(&self) -> &[f64] {
        &self.vgrid
    }

    /// φ(t) = |{v > t}|.
    pub fn phi(&self) -> Phi<'_> {
        Phi { rs: self }
    }

    /// s with v(s) = t for v_m < t < v_M, by safeguarded Newton.
    fn level_position(&self, t: f64) -> f64 {
        // vgrid is nonincreasing: first index with vgrid <= t
        let j = self.vgrid.partition_point(|v| *v > t);
        if j == 0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (self.grid[j - 1], self.grid[j]);
        let mut s = 0.5 * (lo + hi);
        let tol = 1e-14 * self.measure;
        for _ in 0..100 {
            let r = self.eval(s) - t;
            if r > 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let g = self.slope(s);
            let mut next = s + r / g;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let step = (next - s).abs();
            s = next;
            if step <= tol || hi - lo <= tol {
                break;
            }
        }
        s
    }

    /// ∫_0^∞ φ^{1/k} dt through s = φ(t): v_m |Ω|^{1/k} + ∫_0^{|Ω|} s^{1/k} g(s) ds.
    pub fn lorentz_k1_integral(&self, k: f64) -> f64 {
        let e = 1.0 / k;
        let inner: f64 = self
            .grid
            .windows(2)
            .map(|w| integrate(|s| s.powf(e) * self.slope(s), w[0], w[1], quad_opts()).0)
            .sum();
        self.v_m * self.measure.powf(e) + inner
    }

    /// ∫_0^∞ t φ^{1/k} dt through s = φ(t): v_m² |Ω|^{1/k} / 2 + ∫_0^{|Ω|} v(s) s^{1/k} g(s) ds.
    pub fn lorentz_2k2_integral(&self, k: f64) -> f64 {
        let e = 1.0 / k;
        let inner: f64 = self
            .grid
            .windows(2)
            .enumerate()
            .map(|(j, w)| {
                let b = w[1];
                let vb = self.vgrid[j + 1];
                integrate(
                    |s| (vb + self.slope_integral(s, b)) * s.powf(e) * self.slope(s),
                    w[0],
                    b,
                    quad_opts(),
                )
                .0
            })
            .sum();
        0.5 * self.v_m * self.v_m * self.measure.powf(e) + inner
    }

    /// ∮_{∂V_t ∩ ∂Ω♯} 1/v: P(Ω♯)/v_m below v_m, zero above.
    pub fn exterior_integral(&self, t: f64) -> f64 {
        if t < self.v_m {
            self.perimeter() / self.v_m
        } else {
            0.0
        }
    }

    /// ∫_0^τ t ∮_{∂V_t ∩ ∂Ω♯} 1/v dt.
    pub fn boundary_moment(&self, tau: f64) -> f64 {
        let t = tau.clamp(0.0, self.v_m);
        0.5 * t * t * self.perimeter() / self.v_m
    }

    /// Both sides of the level-set identity at level t: n²ω_n^{2/n} φ^{2−2/n} and
    /// (−φ' + ∮ 1/v / β) ∫_0^φ f*.
    pub fn fundamental_sides(&self, t: f64) -> (f64, f64) {
        let phi = self.phi();
        let p = phi.measure(t);
        let nf = self.n as f64;
        let lhs = self.isoperimetric_factor() * p.powf(2.0 - 2.0 / nf);
        let rhs = (-phi.derivative(t) + self.exterior_integral(t) / self.beta) * self.source_integral(p);
        (lhs, rhs)
    }

    /// Two-column text `s v(s)` on the tabulation grid.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (s, v) in self.grid.iter().zip(&self.vgrid) {
            let _ = writeln!(out, "{s:.16e} {v:.16e}");
        }
        out
    }
}

/// Distribution function of the radial solution.
#[derive(Clone, Copy, Debug)]
pub struct Phi<'a> {
    rs: &'a RadialSolution,
}

impl Distribution for Phi<'_> {
    fn total_measure(&self) -> f64 {
        self.rs.measure
    }

    fn sup(&self) -> f64 {
        self.rs.v_max()
    }

    fn measure(&self, t: f64) -> f64 {
        if t < self.rs.v_m {
            self.rs.measure
        } else if t >= self.rs.v_max() {
            0.0
        } else if t == self.rs.v_m {
            // {v > v_m} misses only the boundary
            self.rs.measure
        } else {
            self.rs.level_position(t)
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        if t < self.rs.v_m || t >= self.rs.v_max() {
            return 0.0;
        }
        -1.0 / self.rs.slope(self.measure(t))
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.rs.vgrid.clone();
        b.push(0.0);
        sorted_unique(b)
    }

    fn constant_on(&self, _a: f64, b: f64) -> Option<f64> {
        if b <= self.rs.v_m {
            Some(self.rs.measure)
        } else {
            None
        }
    }

    fn inverse(&self, s: f64) -> f64 {
        if s <= 0.0 {
            self.rs.v_max()
        } else if s > self.rs.measure {
            0.0
        } else {
            self.rs.eval(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::BallClosedForm;
    use crate::rearrange::{lorentz_norm, LorentzParams};
    use std::f64::consts::PI;

    #[test]
    fn constant_source_on_unit_disc() {
        let rs = RadialSolution::constant_source(PI, 2, 1.0, 1.0).unwrap();
        assert!((rs.v_m() - 0.5).abs() < 1e-15);
        assert!((rs.v_max() - 0.75).abs() < 1e-13);
        // v(s) = (π − s)/(4π) + 1/2
        for s in [0.0, 0.3, 1.0, 2.5, PI] {
            assert!((rs.eval(s) - ((PI - s) / (4.0 * PI) + 0.5)).abs() < 1e-13, "s={s}");
        }
        let ball = BallClosedForm::new(1.0, 1.0).unwrap();
        for r in [0.0, 0.2, 0.5, 0.9, 1.0] {
            assert!((rs.eval_radius(r) - ball.u(r)).abs() < 1e-9);
        }
    }

    #[test]
    fn beta_only_moves_the_boundary_term() {
        let a = RadialSolution::constant_source(2.0, 2, 1.0, 1.0).unwrap();
        let b = RadialSolution::constant_source(2.0, 2, 2.0, 1.0).unwrap();
        assert!((b.v_m() - 0.5 * a.v_m()).abs() < 1e-15);
        for s in [0.0, 0.5, 1.5] {
            let da = a.eval(s) - a.v_m();
            let db = b.eval(s) - b.v_m();
            assert!((da - db).abs() < 1e-14);
        }
    }

    #[test]
    fn phi_of_constant_source() {
        let rs = RadialSolution::constant_source(PI, 2, 1.0, 1.0).unwrap();
        let phi = rs.phi();
        assert_eq!(phi.measure(0.2), PI);
        assert_eq!(phi.measure(0.75), 0.0);
        for t in [0.51, 0.6, 0.7, 0.749] {
            let expect = PI - 4.0 * PI * (t - 0.5);
            assert!((phi.measure(t) - expect).abs() < 1e-11, "t={t}");
            assert!((phi.derivative(t) + 4.0 * PI).abs() < 1e-9);
        }
    }

    fn bump_profile(measure: f64) -> DecreasingProfile {
        let s = cosine_grid(0.0, measure, 300);
        let v = s.iter().map(|x| 1.0 + (-3.0 * x / measure).exp()).collect();
        DecreasingProfile::new(s, v).unwrap()
    }

    #[test]
    fn fundamental_identity_and_moment() {
        let m = 2.7;
        let rs = RadialSolution::new(m, 2, 0.8, bump_profile(m)).unwrap();
        assert!((rs.v_m() * rs.beta() * rs.perimeter() - rs.total_source()).abs() < 1e-13);
        let (lo, hi) = (rs.v_m(), rs.v_max());
        for i in 1..512 {
            let t = lo + (hi - lo) * i as f64 / 512.0;
            let (l, r) = rs.fundamental_sides(t);
            assert!((l - r).abs() <= 1e-6 * l, "t={t}: {l} vs {r}");
        }
        let (l, r) = rs.fundamental_sides(0.5 * lo);
        assert!((l - r).abs() <= 1e-12 * l);
        for tau in [lo, 1.5 * lo, hi] {
            let lhs = rs.boundary_moment(tau);
            assert!((lhs - rs.total_source() / (2.0 * rs.beta())).abs() < 1e-12 * lhs);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let m = 1.3;
        let rs = RadialSolution::new(m, 2, 2.0, bump_profile(m)).unwrap();
        let phi = rs.phi();
        let t = 0.5 * (rs.v_m() + rs.v_max());
        let h = 1e-6;
        let fd = (phi.measure(t + h) - phi.measure(t - h)) / (2.0 * h);
        assert!((fd - phi.derivative(t)).abs() < 1e-5 * fd.abs());
    }

    #[test]
    fn lorentz_routes_agree() {
        let m = 2.0;
        let rs = RadialSolution::new(m, 2, 1.5, bump_profile(m)).unwrap();
        for k in [0.5, 1.0] {
            let a = lorentz_norm(&rs.phi(), LorentzParams::new(k, 1.0).unwrap()).unwrap();
            let b = rs.lorentz_k1_integral(k);
            assert!((a - b).abs() < 1e-9 * b, "k={k}: {a} vs {b}");
            let c = lorentz_norm(&rs.phi(), LorentzParams::new(2.0 * k, 2.0).unwrap()).unwrap();
            let d = rs.lorentz_2k2_integral(k).sqrt();
            assert!((c - d).abs() < 1e-9 * d, "k={k}: {c} vs {d}");
        }
    }

    #[test]
    fn higher_dimension_constant_source() {
        // n = 3, f ≡ 1 on the unit ball: v = (1 − r²)/6 + 1/(3β)
        let vol = 4.0 * PI / 3.0;
        let rs = RadialSolution::constant_source(vol, 3, 2.0, 1.0).unwrap();
        assert!((rs.v_m() - 1.0 / 6.0).abs() < 1e-14);
        for r in [0.0, 0.4, 0.8] {
            assert!((rs.eval_radius(r) - ((1.0 - r * r) / 6.0 + 1.0 / 6.0)).abs() < 1e-9, "r={r}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RadialSolution::constant_source(1.0, 2, 0.0, 1.0).is_err());
        assert!(RadialSolution::constant_source(1.0, 2, 1.0, 0.0).is_err());
        assert!(RadialSolution::new(2.0, 2, 1.0, DecreasingProfile::constant(1.0, 1.0).unwrap()).is_err());
    }
}
