use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::ScalarField;
use crate::geometry::{asymmetry_of, AsymmetryOptions};
use crate::numeric::{cosine_grid, sorted_unique};
use crate::radial::RadialSolution;
use crate::rearrange::{Distribution, DecreasingProfile, DistributionFunction};

use super::sets::{boundary_moment, exterior_boundary_integral_inv_u, interior_level_perimeter, superlevel_pieces};

/// Smallest accepted number of levels strictly between u_m and u_M.
pub const MIN_INTERIOR_LEVELS: usize = 64;

/// Default number of clustered levels.
pub const DEFAULT_LEVELS: usize = 512;

const JITTER: f64 = 1e-12;

/// Levels at which the level-set inequalities are evaluated.
#[derive(Clone, Debug)]
pub struct LevelGrid {
    t: Vec<f64>,
    breakpoints: Vec<f64>,
    u_m: f64,
    u_max: f64,
}

impl LevelGrid {
    /// `levels` cosine-clustered values inside (u_m, u_M), a few levels in [0, u_m),
    /// u_m and v_m; all nodal values are kept as breakpoints and the evaluation
    /// levels are nudged off them.
    pub fn new(u: &ScalarField, v_m: f64, levels: usize) -> Result<Self> {
        let (u_m, u_max) = (u.min(), u.max());
        if levels < MIN_INTERIOR_LEVELS {
            return Err(Error::param(
                "levels",
                format!("{levels} interior levels requested, at least {MIN_INTERIOR_LEVELS} are needed"),
            ));
        }
        if !(u_max > u_m) {
            return Err(Error::param("u", "the field is constant; no interior levels exist"));
        }
        let breakpoints = sorted_unique(u.values().to_vec());
        let scale = u_max - u_m;
        let mut t: Vec<f64> = cosine_grid(u_m, u_max, levels + 2)[1..=levels].to_vec();
        if u_m > 0.0 {
            t.extend((0..8).map(|i| u_m * i as f64 / 8.0));
        }
        t.push(u_m);
        if v_m >= 0.0 && v_m < u_max {
            t.push(v_m);
        }
        for x in t.iter_mut() {
            if breakpoints.binary_search_by(|b| b.total_cmp(x)).is_ok() {
                *x += JITTER * scale;
            }
        }
        let t = sorted_unique(t);
        let interior = t.iter().filter(|x| **x > u_m && **x < u_max).count();
        if interior < MIN_INTERIOR_LEVELS {
            return Err(Error::param("levels", format!("only {interior} levels fall inside (u_m, u_M)")));
        }
        Ok(Self {
            t,
            breakpoints,
            u_m,
            u_max,
        })
    }

    pub fn levels(&self) -> &[f64] {
        &self.t
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn u_m(&self) -> f64 {
        self.u_m
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }
}

/// One level of a residual report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OdeRow {
    pub t: f64,
    pub mu: f64,
    pub dmu: f64,
    pub interior: f64,
    pub exterior: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs
    pub margin: f64,
    pub alpha: Option<f64>,
    /// lhs · (1 + α²/γ_n) where α was evaluated
    pub lhs_quantitative: Option<f64>,
}

impl OdeRow {
    /// Relative violation (lhs − rhs)/lhs, zero for empty levels.
    pub fn relative_excess(&self) -> f64 {
        if self.lhs > 0.0 {
            (self.lhs - self.rhs) / self.lhs
        } else {
            0.0
        }
    }

    pub fn quantitative_excess(&self) -> Option<f64> {
        self.lhs_quantitative.map(|l| if l > 0.0 { (l - self.rhs) / l } else { 0.0 })
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct OdeResidualReport {
    pub rows: Vec<OdeRow>,
}

impl OdeResidualReport {
    /// Fraction of levels with lhs ≤ rhs + rel_tol · lhs.
    pub fn fraction_satisfied(&self, rel_tol: f64) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        let ok = self.rows.iter().filter(|r| r.relative_excess() <= rel_tol).count();
        ok as f64 / self.rows.len() as f64
    }

    /// Same for the quantitative variant, over the levels where it was evaluated.
    pub fn quantitative_fraction_satisfied(&self, rel_tol: f64) -> Option<f64> {
        let ex: Vec<f64> = self.rows.iter().filter_map(OdeRow::quantitative_excess).collect();
        if ex.is_empty() {
            return None;
        }
        Some(ex.iter().filter(|e| **e <= rel_tol).count() as f64 / ex.len() as f64)
    }

    pub fn max_relative_residual(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.lhs > 0.0)
            .map(|r| (r.lhs - r.rhs).abs() / r.lhs)
            .fold(0.0, f64::max)
    }

    /// Columns: t, μ, μ', interior perimeter, exterior integral, LHS, RHS, margin.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# t mu dmu interior exterior lhs rhs margin\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:.12e} {:.12e} {:.12e} {:.12e} {:.12e} {:.12e} {:.12e} {:.12e}",
                r.t, r.mu, r.dmu, r.interior, r.exterior, r.lhs, r.rhs, r.margin
            );
        }
        out
    }
}

/// Settings for the variant with the asymmetry factor.
#[derive(Clone, Copy, Debug)]
pub struct QuantitativeOptions {
    pub gamma_n: f64,
    /// Upper bound on the number of levels where α(U_t) is computed.
    pub max_levels: usize,
    pub asymmetry: AsymmetryOptions,
}

impl QuantitativeOptions {
    pub fn new(gamma_n: f64) -> Self {
        Self {
            gamma_n,
            max_levels: 24,
            asymmetry: AsymmetryOptions::default(),
        }
    }
}

/// Level-set inequality of a planar FEM solution at every level of `grid`:
/// 4π μ(t) ≤ (−μ'(t) + (1/β) ∮_{∂U_t ∩ ∂Ω} 1/u) ∫_0^{μ(t)} f*.
pub fn fem_residuals(
    u: &ScalarField,
    fstar: &DecreasingProfile,
    beta: f64,
    grid: &LevelGrid,
    quantitative: Option<QuantitativeOptions>,
) -> Result<OdeResidualReport> {
    if !(beta > 0.0) {
        return Err(Error::param("beta", format!("must be positive, got {beta}")));
    }
    let mu = DistributionFunction::from_field(u)?;
    let area = u.mesh().area();
    let levels = grid.levels();
    let stride = quantitative.map(|q| (levels.len() / q.max_levels.max(1)).max(1));
    let rows: Result<Vec<OdeRow>> = levels
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let m = mu.measure(t);
            let dmu = mu.derivative(t);
            let interior = interior_level_perimeter(u, t);
            let exterior = exterior_boundary_integral_inv_u(u, t)?;
            let lhs = 4.0 * PI * m;
            let rhs = (-dmu + exterior / beta) * fstar.integral_to(m);
            let (alpha, lhs_quantitative) = match (quantitative, stride) {
                (Some(q), Some(st)) if i % st == 0 && m >= 1e-3 * area => {
                    let pieces = superlevel_pieces(u, t);
                    let a = asymmetry_of(&pieces, m, q.asymmetry).value;
                    (Some(a), Some(lhs * (1.0 + a * a / q.gamma_n)))
                }
                _ => (None, None),
            };
            Ok(OdeRow {
                t,
                mu: m,
                dmu,
                interior,
                exterior,
                lhs,
                rhs,
                margin: rhs - lhs,
                alpha,
                lhs_quantitative,
            })
        })
        .collect();
    Ok(OdeResidualReport { rows: rows? })
}

/// The level-set identity of the radial solution on `levels` points of (v_m, v_M).
pub fn radial_residuals(rs: &RadialSolution, levels: usize) -> Result<OdeResidualReport> {
    if levels < MIN_INTERIOR_LEVELS {
        return Err(Error::param(
            "levels",
            format!("{levels} interior levels requested, at least {MIN_INTERIOR_LEVELS} are needed"),
        ));
    }
    let (lo, hi) = (rs.v_m(), rs.v_max());
    let eps = 1e-9 * (hi - lo);
    let nf = rs.dimension() as f64;
    let phi = rs.phi();
    let ts = cosine_grid(lo + eps, hi - eps, levels);
    let rows = ts
        .par_iter()
        .map(|&t| {
            let (lhs, rhs) = rs.fundamental_sides(t);
            let m = phi.measure(t);
            OdeRow {
                t,
                mu: m,
                dmu: phi.derivative(t),
                interior: nf * crate::rearrange::omega(rs.dimension()).powf(1.0 / nf) * m.powf(1.0 - 1.0 / nf),
                exterior: rs.exterior_integral(t),
                lhs,
                rhs,
                margin: rhs - lhs,
                alpha: None,
                lhs_quantitative: None,
            }
        })
        .collect();
    Ok(OdeResidualReport { rows })
}

/// Both sides of ∫_0^τ t ∮_{∂U_t ∩ ∂Ω} 1/u dt ≤ (1/2β) ∫_0^{|Ω|} f*.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentCheck {
    pub tau: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl MomentCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }

    pub fn relative_residual(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.rhs
    }
}

pub fn fem_moment_checks(u: &ScalarField, fstar: &DecreasingProfile, beta: f64, taus: &[f64]) -> Result<Vec<MomentCheck>> {
    let rhs = fstar.integral() / (2.0 * beta);
    taus.iter()
        .map(|&tau| {
            Ok(MomentCheck {
                tau,
                lhs: boundary_moment(u, tau)?,
                rhs,
            })
        })
        .collect()
}

pub fn radial_moment_checks(rs: &RadialSolution, taus: &[f64]) -> Vec<MomentCheck> {
    let rhs = rs.total_source() / (2.0 * rs.beta());
    taus.iter()
        .map(|&tau| MomentCheck {
            tau,
            lhs: rs.boundary_moment(tau),
            rhs,
        })
        .collect()
}

/// Bounds implied by τ ξ'(τ) ≤ ξ(τ) + C on [τ₀, ∞):
/// (ξ(τ₀) + C) τ/τ₀ − C for ξ(τ) and (ξ(τ₀) + C)/τ₀ for ξ'(τ).
pub fn gronwall_bound(xi_tau0: f64, c: f64, tau0: f64, tau: f64) -> Result<(f64, f64)> {
    if !(tau0 > 0.0) {
        return Err(Error::param("tau0", format!("must be positive, got {tau0}")));
    }
    if !(c >= 0.0) {
        return Err(Error::param("C", format!("must be nonnegative, got {c}")));
    }
    if tau < tau0 {
        return Err(Error::param("tau", format!("{tau} lies below tau0 = {tau0}")));
    }
    Ok(((xi_tau0 + c) * tau / tau0 - c, (xi_tau0 + c) / tau0))
}

/// Sample points where τ ξ' − ξ > C, with ξ' from finite differences of the samples.
pub fn gronwall_violations(tau: &[f64], xi: &[f64], c: f64) -> Result<Vec<f64>> {
    if tau.len() != xi.len() || tau.len() < 3 {
        return Err(Error::param("samples", "need at least three (τ, ξ) pairs of equal length"));
    }
    if tau.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("tau", "must be strictly increasing"));
    }
    let n = tau.len();
    let mut out = Vec::new();
    for i in 0..n {
        let d = if i == 0 {
            (xi[1] - xi[0]) / (tau[1] - tau[0])
        } else if i == n - 1 {
            (xi[n - 1] - xi[n - 2]) / (tau[n - 1] - tau[n - 2])
        } else {
            (xi[i + 1] - xi[i - 1]) / (tau[i + 1] - tau[i - 1])
        };
        if tau[i] * d - xi[i] > c {
            out.push(tau[i]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{generate_mesh, solve_robin, SourceSpec};
    use crate::geometry::Domain;
    use crate::rearrange::decreasing_rearrangement;
    use std::sync::Arc;

    #[test]
    fn grid_contents() {
        let m = Arc::new(generate_mesh(&Domain::disc(1.0).unwrap(), 0.1).unwrap());
        let u = ScalarField::interpolate(&m, |p| 2.0 - p.norm()).unwrap();
        let g = LevelGrid::new(&u, 1.5, 128).unwrap();
        assert!(g.levels().windows(2).all(|w| w[1] > w[0]));
        assert!(g.levels().iter().all(|t| g.breakpoints().binary_search_by(|b| b.total_cmp(t)).is_err()));
        assert!(g.levels().iter().any(|t| (*t - 1.5).abs() < 1e-9));
        assert!(LevelGrid::new(&u, 1.5, 32).is_err());
        let c = ScalarField::interpolate(&m, |_| 1.0).unwrap();
        assert!(LevelGrid::new(&c, 1.0, 128).is_err());
    }

    #[test]
    fn radial_identity() {
        let rs = RadialSolution::constant_source(PI, 2, 1.0, 1.0).unwrap();
        let rep = radial_residuals(&rs, 512).unwrap();
        assert_eq!(rep.rows.len(), 512);
        assert!(rep.max_relative_residual() <= 1e-6, "{}", rep.max_relative_residual());
        for c in radial_moment_checks(&rs, &[0.5, 0.6, 0.75]) {
            assert!(c.relative_residual() <= 1e-6);
        }
        assert!(rep.to_text().lines().count() == 513);
    }

    #[test]
    fn fem_inequality_on_ellipse() {
        let h = 0.04;
        let m = Arc::new(generate_mesh(&Domain::ellipse(1.5, 0.75).unwrap(), h).unwrap());
        let f = SourceSpec::Constant(1.0);
        let u = solve_robin(&m, &f, 1.0).unwrap();
        let fstar = DecreasingProfile::constant(1.0, m.area()).unwrap();
        let rs = RadialSolution::new(m.area(), 2, 1.0, fstar.clone()).unwrap();
        let grid = LevelGrid::new(&u, rs.v_m(), 512).unwrap();
        let rep = fem_residuals(&u, &fstar, 1.0, &grid, None).unwrap();
        assert!(rep.fraction_satisfied(10.0 * h) >= 0.99, "{}", rep.fraction_satisfied(10.0 * h));
        let taus = [rs.v_m(), 0.5 * (u.min() + u.max()), u.max()];
        for c in fem_moment_checks(&u, &fstar, 1.0, &taus).unwrap() {
            assert!(c.holds(1e-9), "{c:?}");
        }
    }

    #[test]
    fn quantitative_variant_on_non_symmetric_source() {
        let h = 0.05;
        let m = Arc::new(generate_mesh(&"rect w=2 h=0.5".parse::<Domain>().unwrap(), h).unwrap());
        let f = SourceSpec::tensor_bump();
        let u = solve_robin(&m, &f, 1.0).unwrap();
        let fi = ScalarField::new(Arc::clone(&m), f.nodal_values(&m).unwrap()).unwrap();
        let fstar = decreasing_rearrangement(&DistributionFunction::from_field(&fi).unwrap()).unwrap();
        let grid = LevelGrid::new(&u, 0.0, 128).unwrap();
        let rep = fem_residuals(&u, &fstar, 1.0, &grid, Some(QuantitativeOptions::new(2.5))).unwrap();
        assert!(rep.rows.iter().filter(|r| r.alpha.is_some()).count() >= 10);
        assert!(rep.quantitative_fraction_satisfied(10.0 * h).unwrap() >= 0.9);
    }

    #[test]
    fn gronwall() {
        let (b, d) = gronwall_bound(2.0, 0.0, 2.0, 5.0).unwrap();
        assert!((b - 5.0).abs() < 1e-15 && (d - 1.0).abs() < 1e-15);
        let (b, _) = gronwall_bound(3.0, 1.5, 2.0, 2.0).unwrap();
        assert!((b - 3.0).abs() < 1e-15);
        assert!(gronwall_bound(1.0, 0.0, 2.0, 1.0).is_err());
        // ξ = τ² on [1, 2]: τ ξ' − ξ = τ², flagged exactly where τ² > C
        let tau: Vec<f64> = (0..=100).map(|i| 1.0 + i as f64 / 100.0).collect();
        let xi: Vec<f64> = tau.iter().map(|t| t * t).collect();
        let bad = gronwall_violations(&tau, &xi, 2.0).unwrap();
        assert!(!bad.is_empty());
        assert!(bad.iter().all(|t| t * t > 2.0 - 0.05));
        assert!(bad.iter().any(|t| *t > 1.99));
        assert!(gronwall_violations(&tau, &xi, 4.1).unwrap().is_empty());
    }
}
