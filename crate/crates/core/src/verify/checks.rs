use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{
    generate_mesh, integrate_field, principal_robin_eigenpair, solve_robin, Integral, Mesh, ScalarField, SourceSpec,
};
use crate::geometry::{asymmetry_of, fraenkel_asymmetry_with, Asymmetry, AsymmetryOptions, Domain, RasterMask};
use crate::numeric::cosine_grid;
use crate::radial::{robin_disc_eigenvalue, BallClosedForm, RadialSolution};
use crate::rearrange::{
    cavalieri, decreasing_rearrangement, lorentz_integral, omega, Distribution, DistributionFunction,
    DecreasingProfile, LorentzParams, LorentzScale, PROFILE_POINTS,
};

use super::constants::{c1, c2, c3, c4, c5};
use super::report::{Extrapolated, Theorem, TheoremReport};

/// Asymmetry above which the eigenvalue estimate leaves the small-α regime of its proof.
pub const BOSSEL_DANERS_ALPHA_LIMIT: f64 = 0.5;

/// A domain meshed at h and h/2, with its asymmetry.
#[derive(Clone, Debug)]
pub struct DomainStudy {
    domain: Domain,
    h: f64,
    coarse: Arc<Mesh>,
    fine: Arc<Mesh>,
    asymmetry: Asymmetry,
}

impl DomainStudy {
    pub fn new(domain: &Domain, h: f64, opts: AsymmetryOptions) -> Result<Self> {
        let coarse = generate_mesh(domain, h)?;
        let fine = coarse.refine()?;
        Ok(Self {
            domain: domain.clone(),
            h,
            coarse: Arc::new(coarse),
            fine: Arc::new(fine),
            asymmetry: fraenkel_asymmetry_with(domain, opts),
        })
    }

    /// Study on caller-supplied meshes (the fine one is the refinement of `coarse`).
    pub fn from_mesh(domain: &Domain, coarse: Mesh, opts: AsymmetryOptions) -> Result<Self> {
        let fine = coarse.refine()?;
        Ok(Self {
            domain: domain.clone(),
            h: coarse.h(),
            coarse: Arc::new(coarse),
            fine: Arc::new(fine),
            asymmetry: fraenkel_asymmetry_with(domain, opts),
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn coarse(&self) -> &Arc<Mesh> {
        &self.coarse
    }

    pub fn fine(&self) -> &Arc<Mesh> {
        &self.fine
    }

    pub fn asymmetry(&self) -> Asymmetry {
        self.asymmetry
    }

    pub fn alpha(&self) -> f64 {
        self.asymmetry.value
    }

    fn label(&self) -> String {
        self.domain.to_string()
    }

    fn both<T: Send>(&self, g: impl Fn(&Arc<Mesh>) -> Result<T> + Sync) -> Result<(T, T)> {
        let (a, b) = rayon::join(|| g(&self.coarse), || g(&self.fine));
        Ok((a?, b?))
    }
}

/// FEM solution on one mesh together with its symmetrized comparison problem.
struct Level {
    mu: DistributionFunction,
    u: ScalarField,
    f_l1: f64,
    radial: RadialSolution,
}

fn source_profile(mesh: &Arc<Mesh>, f: &SourceSpec) -> Result<(DecreasingProfile, f64)> {
    if let SourceSpec::Constant(c) = f {
        return Ok((DecreasingProfile::constant(*c, mesh.area())?, c * mesh.area()));
    }
    let fi = ScalarField::new(Arc::clone(mesh), f.nodal_values(mesh)?)?;
    if fi.min() < 0.0 {
        return Err(Error::InvalidSource(format!("{f} takes negative values")));
    }
    let fstar = decreasing_rearrangement(&DistributionFunction::from_field(&fi)?)?;
    Ok((fstar, integrate_field(&fi, Integral::Domain)?))
}

fn level(mesh: &Arc<Mesh>, f: &SourceSpec, beta: f64) -> Result<Level> {
    let u = solve_robin(mesh, f, beta)?;
    let mu = DistributionFunction::from_field(&u)?;
    let (fstar, f_l1) = source_profile(mesh, f)?;
    let radial = RadialSolution::new(mu.total_measure(), 2, beta, fstar)?;
    Ok(Level { mu, u, f_l1, radial })
}

fn positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and positive, got {x}")))
    }
}

/// Largest μ(t) − φ(t) over t ∈ [0, v_m]; never positive for an admissible pair.
fn measure_excess_below_vm(l: &Level) -> f64 {
    let phi = l.radial.phi();
    cosine_grid(0.0, l.radial.v_m(), 257)
        .into_iter()
        .map(|t| l.mu.measure(t) - phi.measure(t))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn lorentz_check(
    study: &DomainStudy,
    f: &SourceSpec,
    beta: f64,
    k: f64,
    gamma_n: f64,
    scale: LorentzScale,
) -> Result<TheoremReport> {
    positive("beta", beta)?;
    positive("gamma_n", gamma_n)?;
    let params = LorentzParams::for_scale(scale, k, 2, f.is_constant())?;
    let (lc, lf) = study.both(|m| level(m, f, beta))?;
    let sides = |l: &Level| -> Result<(f64, f64)> {
        let u = lorentz_integral(&l.mu, params)?;
        let v = match scale {
            LorentzScale::K1 => l.radial.lorentz_k1_integral(k),
            LorentzScale::TwoK2 => l.radial.lorentz_2k2_integral(k),
        };
        Ok((u, v))
    };
    let (uc, vc) = sides(&lc)?;
    let (uf, vf) = sides(&lf)?;
    let gap = Extrapolated::new(vc - uc, vf - uf);
    let measure = study.domain.measure();
    let (theorem, constant) = match scale {
        LorentzScale::K1 => (Theorem::LorentzK1, c1(2, measure, lf.f_l1, beta, k, gamma_n)),
        LorentzScale::TwoK2 => (Theorem::Lorentz2k2, c2(2, measure, lf.f_l1, beta, k, gamma_n)),
    };
    let mut r = TheoremReport::new(
        theorem,
        study.label(),
        beta,
        Some(k),
        f.to_string(),
        study.h,
        gap,
        study.alpha(),
        constant,
    );
    r.diag("u_norm", uf);
    r.diag("v_norm", vf);
    r.diag("f_l1", lf.f_l1);
    r.diag("ordering_margin", gap.value + gap.error);
    r.diag("measure_excess_below_vm", measure_excess_below_vm(&lf));
    if gap.value + gap.error < 0.0 {
        r.notes.push("comparison ordering violated beyond the discretization estimate".into());
    }
    Ok(r)
}

/// ‖v‖ − ‖u‖ in L^{k,1} (as ∫ μ^{1/k} dt) against C₁ α².
pub fn check_lorentz_k1(study: &DomainStudy, f: &SourceSpec, beta: f64, k: f64, gamma_n: f64) -> Result<TheoremReport> {
    lorentz_check(study, f, beta, k, gamma_n, LorentzScale::K1)
}

/// ‖v‖² − ‖u‖² in L^{2k,2} (as ∫ t μ^{1/k} dt) against C₂ α².
pub fn check_lorentz_2k2(study: &DomainStudy, f: &SourceSpec, beta: f64, k: f64, gamma_n: f64) -> Result<TheoremReport> {
    lorentz_check(study, f, beta, k, gamma_n, LorentzScale::TwoK2)
}

/// sup_s |v(s) − u*(s)| against C₃ α³, f ≡ 1.
pub fn check_pointwise(study: &DomainStudy, beta: f64, gamma_2: f64) -> Result<TheoremReport> {
    positive("beta", beta)?;
    positive("gamma_2", gamma_2)?;
    let one = SourceSpec::Constant(1.0);
    let (lc, lf) = study.both(|m| level(m, &one, beta))?;
    // (sup |v − u*|, min (v − u*))
    let sides = |l: &Level| {
        let s = cosine_grid(0.0, l.radial.measure(), PROFILE_POINTS);
        s.into_iter().fold((0.0f64, f64::INFINITY), |(sup, min), x| {
            let d = l.radial.eval(x) - l.mu.inverse(x);
            (sup.max(d.abs()), min.min(d))
        })
    };
    let (sc, mc) = sides(&lc);
    let (sf, mf) = sides(&lf);
    let gap = Extrapolated::new(sc, sf);
    let ordering = Extrapolated::new(mc, mf);
    let mut r = TheoremReport::new(
        Theorem::Pointwise,
        study.label(),
        beta,
        None,
        one.to_string(),
        study.h,
        gap,
        study.alpha(),
        c3(study.domain.measure(), gamma_2),
    );
    r.diag("min_v_minus_ustar", ordering.value);
    r.diag("ordering_margin", ordering.value + ordering.error);
    r.diag("v_max", lf.radial.v_max());
    r.diag("u_max", lf.u.max());
    if ordering.value + ordering.error < 0.0 {
        r.notes.push("v < u* somewhere on the s-grid beyond the discretization estimate".into());
    }
    Ok(r)
}

/// T_β(Ω♯) − T_β(Ω) against C₄ α², f ≡ 1.
pub fn check_saint_venant(study: &DomainStudy, beta: f64, gamma_2: f64) -> Result<TheoremReport> {
    positive("beta", beta)?;
    positive("gamma_2", gamma_2)?;
    let one = SourceSpec::Constant(1.0);
    let sides = |m: &Arc<Mesh>| -> Result<(f64, f64, f64)> {
        let u = solve_robin(m, &one, beta)?;
        let t = integrate_field(&u, Integral::Domain)?;
        let ball = BallClosedForm::new((m.area() / omega(2)).sqrt(), beta)?;
        let via_mu = cavalieri(&DistributionFunction::from_field(&u)?, 1.0)?;
        Ok((t, ball.torsion(), via_mu))
    };
    let ((tc, bc, _), (tf, bf, cav)) = study.both(sides)?;
    let gap = Extrapolated::new(bc - tc, bf - tf);
    let mut r = TheoremReport::new(
        Theorem::SaintVenant,
        study.label(),
        beta,
        None,
        one.to_string(),
        study.h,
        gap,
        study.alpha(),
        c4(2, study.domain.measure(), beta, gamma_2),
    );
    r.diag("torsion", tf);
    r.diag("torsion_ball", bf);
    r.diag("cavalieri_residual", (cav - tf).abs());
    Ok(r)
}

/// λ_β(Ω) − λ_β(Ω♯) against C₅ α².
pub fn check_bossel_daners(study: &DomainStudy, beta: f64, gamma_2: f64) -> Result<TheoremReport> {
    positive("beta", beta)?;
    positive("gamma_2", gamma_2)?;
    let sides = |m: &Arc<Mesh>| -> Result<(f64, f64)> {
        let pair = principal_robin_eigenpair(m, beta)?;
        let ball = robin_disc_eigenvalue((m.area() / omega(2)).sqrt(), beta)?;
        Ok((pair.lambda, ball))
    };
    let ((lc, bc), (lf, bf)) = study.both(sides)?;
    let gap = Extrapolated::new(lc - bc, lf - bf);
    let mut r = TheoremReport::new(
        Theorem::BosselDaners,
        study.label(),
        beta,
        None,
        "none".to_string(),
        study.h,
        gap,
        study.alpha(),
        c5(study.domain.measure(), beta, gamma_2),
    );
    r.diag("lambda", lf);
    r.diag("lambda_ball", bf);
    r.diag("relative_gap", gap.value / (lf + (lf - lc) / 3.0));
    if study.alpha() > BOSSEL_DANERS_ALPHA_LIMIT {
        r.notes.push(format!(
            "α = {:.4} exceeds {BOSSEL_DANERS_ALPHA_LIMIT}: outside the small-asymmetry regime",
            study.alpha()
        ));
    }
    Ok(r)
}

/// Runs one theorem; `f` and `k` are ignored where the statement fixes them.
pub fn check_theorem(
    study: &DomainStudy,
    theorem: Theorem,
    f: &SourceSpec,
    beta: f64,
    k: f64,
    gamma_n: f64,
) -> Result<TheoremReport> {
    match theorem {
        Theorem::LorentzK1 => check_lorentz_k1(study, f, beta, k, gamma_n),
        Theorem::Lorentz2k2 => check_lorentz_2k2(study, f, beta, k, gamma_n),
        Theorem::Pointwise => check_pointwise(study, beta, gamma_n),
        Theorem::SaintVenant => check_saint_venant(study, beta, gamma_n),
        Theorem::BosselDaners => check_bossel_daners(study, beta, gamma_n),
    }
}

/// Perimeter deficit against the asymmetry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsoperimetricReport {
    pub domain: String,
    pub perimeter: f64,
    pub measure: f64,
    /// 2√(π|Ω|)
    pub ball_perimeter: f64,
    pub alpha: f64,
    pub gamma_n: f64,
    /// P/P♯ − 1
    pub deficit: f64,
    /// α²/deficit, infinite when the deficit vanishes
    pub gamma_star: f64,
    /// P ≥ P♯
    pub classical: bool,
    /// P ≥ P♯ (1 + α²/γ_n)
    pub pass: bool,
}

pub fn check_isoperimetric(d: &Domain, gamma_n: f64, opts: AsymmetryOptions) -> Result<IsoperimetricReport> {
    positive("gamma_n", gamma_n)?;
    let a = fraenkel_asymmetry_with(d, opts).value;
    let p = d.perimeter();
    let m = d.measure();
    let pb = 2.0 * (omega(2) * m).sqrt();
    let deficit = p / pb - 1.0;
    let tol = 1e-9;
    Ok(IsoperimetricReport {
        domain: d.to_string(),
        perimeter: p,
        measure: m,
        ball_perimeter: pb,
        alpha: a,
        gamma_n,
        deficit,
        gamma_star: if deficit > 0.0 { a * a / deficit } else { f64::INFINITY },
        classical: deficit >= -tol,
        pass: deficit + tol >= a * a / gamma_n,
    })
}

/// Asymmetry of a subset U ⊆ Ω under the smallness condition |Ω∖U|/|Ω| ≤ α(Ω)/4.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropagationReport {
    pub alpha_omega: f64,
    /// computed only when applicable
    pub alpha_subset: Option<f64>,
    /// |Ω∖U|/|Ω|
    pub removed_fraction: f64,
    pub applicable: bool,
    /// α(U) ≥ α(Ω)/2, only meaningful when applicable
    pub pass: bool,
}

impl PropagationReport {
    pub fn status(&self) -> &'static str {
        match (self.applicable, self.pass) {
            (false, _) => "not applicable",
            (true, true) => "pass",
            (true, false) => "fail",
        }
    }
}

/// Both sets are rasters on the same grid; α is taken from the rasters.
pub fn check_propagation(omega_mask: &RasterMask, subset: &RasterMask, opts: AsymmetryOptions) -> Result<PropagationReport> {
    if subset.difference_area(omega_mask)? > 0.0 {
        return Err(Error::param("subset", "U is not contained in Ω"));
    }
    let m = omega_mask.area();
    let mu = subset.area();
    if !(m > 0.0) || !(mu > 0.0) {
        return Err(Error::param("mask", "empty raster"));
    }
    let a_omega = asymmetry_of(omega_mask, m, opts).value;
    let removed = (m - mu) / m;
    let applicable = removed <= a_omega / 4.0;
    let (a_sub, pass) = if applicable {
        let a = asymmetry_of(subset, mu, opts).value;
        (Some(a), a >= 0.5 * a_omega)
    } else {
        (None, false)
    };
    Ok(PropagationReport {
        alpha_omega: a_omega,
        alpha_subset: a_sub,
        removed_fraction: removed,
        applicable,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn study(spec: &str, h: f64) -> DomainStudy {
        DomainStudy::new(&spec.parse().unwrap(), h, AsymmetryOptions::default()).unwrap()
    }

    #[test]
    fn disc_is_the_equality_case() {
        let s = study("disc r=1", 0.08);
        assert!(s.alpha() <= 1e-2);
        let one = SourceSpec::Constant(1.0);
        for th in Theorem::ALL {
            let r = check_theorem(&s, th, &one, 1.0, 1.0, 2.5).unwrap();
            assert!(r.gap_within_error(), "{th}: gap {} error {}", r.lhs_gap, r.error);
            assert!(r.pass, "{th}");
        }
    }

    #[test]
    fn ellipse_lorentz_k1() {
        let s = study("ellipse a=2 b=1", 0.08);
        let r = check_lorentz_k1(&s, &SourceSpec::Constant(1.0), 1.0, 1.0, 2.5).unwrap();
        assert!(r.lhs_gap > 0.0 && r.margin > 0.0 && r.pass);
        assert_eq!(r.power, 2);
        assert!((r.rhs - r.constant * r.alpha * r.alpha).abs() < 1e-15);
        assert!(r.diagnostics["measure_excess_below_vm"] <= 1e-9);
    }

    #[test]
    fn k_guard_for_generic_source() {
        let s = study("disc r=1", 0.2);
        match check_lorentz_k1(&s, &SourceSpec::tensor_bump(), 1.0, 2.0, 2.5) {
            Err(Error::KOutOfRange { range, .. }) => assert!(range.contains("n/(2n−2)")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            check_lorentz_2k2(&s, &SourceSpec::tensor_bump(), 1.0, 1.5, 2.5),
            Err(Error::KOutOfRange { .. })
        ));
    }

    #[test]
    fn rectangle_lorentz_2k2_and_ordering() {
        let s = study("rect w=2 h=0.5", 0.05);
        for f in [SourceSpec::Constant(1.0), SourceSpec::tensor_bump()] {
            let r = check_lorentz_2k2(&s, &f, 1.0, 1.0, 2.5).unwrap();
            assert!(r.pass && r.margin > 0.0);
            assert!(r.diagnostics["ordering_margin"] >= 0.0);
        }
    }

    #[test]
    fn pointwise_on_ellipse_and_stadium() {
        let r = check_pointwise(&study("ellipse a=1.5 b=1", 0.08), 1.0, 2.5).unwrap();
        assert_eq!(r.power, 3);
        assert!(r.pass && r.margin > 0.0);
        let r = check_pointwise(&study("stadium l=1 r=0.5", 0.05), 1.0, 2.5).unwrap();
        assert!(r.diagnostics["ordering_margin"] >= 0.0);
    }

    #[test]
    fn saint_venant_disc_and_ellipse() {
        let r = check_saint_venant(&study("disc r=1", 0.05), 1.0, 2.5).unwrap();
        assert!((r.diagnostics["torsion"] - 5.0 * PI / 8.0).abs() < 5e-3 * 5.0 * PI / 8.0);
        assert!(r.diagnostics["cavalieri_residual"] < 1e-8);
        let r = check_saint_venant(&study("ellipse a=2 b=1", 0.08), 1.0, 2.5).unwrap();
        assert!(r.lhs_gap > 0.0 && r.pass);
        assert!((r.constant - c1(2, PI * 2.0, PI * 2.0, 1.0, 1.0, 2.5)).abs() < 1e-15);
    }

    #[test]
    fn bossel_daners_disc_and_ellipse() {
        let r = check_bossel_daners(&study("disc r=1", 0.05), 1.0, 2.5).unwrap();
        let exact = robin_disc_eigenvalue(1.0, 1.0).unwrap();
        assert!((r.diagnostics["lambda"] - exact).abs() < 5e-3 * exact);
        assert!(r.lhs_gap.abs() < 5e-3 * exact);
        let s = study("ellipse a=1.5 b=1", 0.08);
        let r = check_bossel_daners(&s, 1.0, 2.5).unwrap();
        assert!(r.pass && r.margin > 0.0 && r.notes.is_empty());
        let r10 = check_bossel_daners(&s, 10.0, 2.5).unwrap();
        assert!(r10.lhs_gap > 0.0);
        assert!((r10.constant - c5(1.5 * PI, 10.0, 2.5)).abs() < 1e-18);
        assert_ne!(r10.constant, r.constant);
        let wide = check_bossel_daners(&study("rect w=2 h=0.5", 0.1), 1.0, 2.5).unwrap();
        assert!(wide.notes.iter().any(|n| n.contains("small-asymmetry")));
    }

    #[test]
    fn isoperimetric_reports() {
        let d = Domain::disc(1.0).unwrap();
        let r = check_isoperimetric(&d, 2.5, AsymmetryOptions::default()).unwrap();
        assert!(r.classical && r.pass && r.deficit.abs() < 1e-9);
        let sq: Domain = "rect w=1 h=1".parse().unwrap();
        let r = check_isoperimetric(&sq, 2.5, AsymmetryOptions::default()).unwrap();
        assert!((r.deficit - (2.0 / PI.sqrt() - 1.0)).abs() < 1e-12);
        assert!((r.alpha - 0.181).abs() < 2e-3, "{}", r.alpha);
        assert!(r.gamma_star.is_finite() && r.pass);
        let below = check_isoperimetric(&sq, 0.9 * r.gamma_star, AsymmetryOptions::default()).unwrap();
        assert!(!below.pass);
    }

    #[test]
    fn propagation_cases() {
        let d: Domain = "ellipse a=2 b=1".parse().unwrap();
        let h = d.diameter() / 256.0;
        let omega_mask = RasterMask::from_domain(&d, h).unwrap();
        let opts = AsymmetryOptions::default();
        let same = check_propagation(&omega_mask, &omega_mask, opts).unwrap();
        assert!(same.applicable && same.pass);
        assert_eq!(same.alpha_subset, Some(same.alpha_omega));

        // thin layer with |Ω∖U| = α|Ω|/8: scale the ellipse about its center
        let target = same.alpha_omega / 8.0;
        let s = (1.0 - target).sqrt();
        let inner = d.scaled(s).unwrap();
        let mut u = omega_mask.clone();
        u.retain(|p| inner.contains(p));
        let r = check_propagation(&omega_mask, &u, opts).unwrap();
        assert!((r.removed_fraction - target).abs() < 0.2 * target);
        assert!(r.applicable && r.pass, "{r:?}");

        let mut big = omega_mask.clone();
        big.retain(|p| p.x < 0.5);
        let r = check_propagation(&omega_mask, &big, opts).unwrap();
        assert_eq!(r.status(), "not applicable");
        assert!(r.alpha_subset.is_none());
        assert!(check_propagation(&u, &omega_mask, opts).is_err());
    }
}
