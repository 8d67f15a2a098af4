use crate::error::{Error, Result};
use crate::fem::{integrate_product, ScalarField};
use crate::numeric::{integrate, QuadOptions};

use super::distribution::{Distribution, DistributionFunction};

/// Exponents of a Lorentz functional; `q = f64::INFINITY` selects the weak form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzParams {
    pub p: f64,
    pub q: f64,
}

/// The two Lorentz scales controlled by the comparison theorems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LorentzScale {
    /// L^{k,1}
    K1,
    /// L^{2k,2}
    TwoK2,
}

impl LorentzParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::param("p", format!("must be finite and positive, got {p}")));
        }
        if !(q > 0.0) {
            return Err(Error::param("q", format!("must be positive, got {q}")));
        }
        Ok(Self { p, q })
    }

    /// Parameters of the scale for exponent k, after the admissibility guard.
    pub fn for_scale(scale: LorentzScale, k: f64, n: u32, constant_source: bool) -> Result<Self> {
        check_k(scale, k, n, constant_source)?;
        match scale {
            LorentzScale::K1 => Self::new(k, 1.0),
            LorentzScale::TwoK2 => Self::new(2.0 * k, 2.0),
        }
    }
}

/// Upper end of the admissible k-range (infinite when unrestricted).
pub fn k_upper(scale: LorentzScale, n: u32, constant_source: bool) -> f64 {
    let nf = n as f64;
    if constant_source {
        if n <= 2 {
            f64::INFINITY
        } else {
            nf / (nf - 2.0)
        }
    } else {
        match scale {
            LorentzScale::K1 => nf / (2.0 * nf - 2.0),
            LorentzScale::TwoK2 => nf / (3.0 * nf - 4.0),
        }
    }
}

pub fn check_k(scale: LorentzScale, k: f64, n: u32, constant_source: bool) -> Result<()> {
    let upper = k_upper(scale, n, constant_source);
    let range = if constant_source {
        if n <= 2 {
            "0 < k (constant source, n = 2)".to_string()
        } else {
            "0 < k ≤ n/(n−2)".to_string()
        }
    } else {
        match scale {
            LorentzScale::K1 => "0 < k ≤ n/(2n−2)".to_string(),
            LorentzScale::TwoK2 => "0 < k ≤ n/(3n−4)".to_string(),
        }
    };
    if k > 0.0 && k.is_finite() && k <= upper * (1.0 + 1e-12) {
        Ok(())
    } else {
        Err(Error::KOutOfRange { k, range })
    }
}

fn quad_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_panels: 4000,
    }
}

fn finite_sup(mu: &impl Distribution) -> Result<f64> {
    let sup = mu.sup();
    if sup.is_finite() {
        Ok(sup)
    } else {
        Err(Error::Divergent("the field is unbounded".into()))
    }
}

/// ∫_0^sup w(t) μ(t)^e dt, segment by segment, with `w_int(a, b)` the exact
/// integral of the weight used where μ is constant.
fn weighted_measure_integral(
    mu: &impl Distribution,
    e: f64,
    w: impl Fn(f64) -> f64,
    w_int: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    finite_sup(mu)?;
    let breaks = mu.breakpoints();
    let mut total = 0.0;
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        total += match mu.constant_on(a, b) {
            Some(c) => c.powf(e) * w_int(a, b),
            None => integrate(|t| w(t) * mu.measure(t).powf(e), a, b, quad_opts()).0,
        };
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::Divergent(format!("weighted measure integral evaluated to {total}")))
    }
}

/// ∫_0^sup t^{q−1} μ(t)^{q/p} dt, the q-th power of the Lorentz functional.
pub fn lorentz_integral(mu: &impl Distribution, params: LorentzParams) -> Result<f64> {
    let LorentzParams { p, q } = params;
    if !q.is_finite() {
        return Err(Error::param("q", "the integral form needs finite q"));
    }
    weighted_measure_integral(mu, q / p, |t| t.powf(q - 1.0), |a, b| (b.powf(q) - a.powf(q)) / q)
}

/// Lorentz functional built from the distribution function:
/// (∫ t^q μ^{q/p} dt/t)^{1/q}, or sup_t t^p μ(t) for q = ∞.
pub fn lorentz_norm(mu: &impl Distribution, params: LorentzParams) -> Result<f64> {
    if params.q.is_infinite() {
        return weak_lorentz(mu, params.p);
    }
    Ok(lorentz_integral(mu, params)?.powf(1.0 / params.q))
}

fn weak_lorentz(mu: &impl Distribution, p: f64) -> Result<f64> {
    finite_sup(mu)?;
    let g = |t: f64| t.powf(p) * mu.measure(t);
    let breaks = mu.breakpoints();
    let mut best = 0.0f64;
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        // left limit at b, then a coarse scan refined by golden section
        let left = b.powf(p) * mu.measure(b - (b - a) * 1e-12);
        best = best.max(left);
        let m = 32;
        let (mut ib, mut vb) = (0usize, g(a));
        for i in 1..m {
            let v = g(a + (b - a) * i as f64 / m as f64);
            if v > vb {
                ib = i;
                vb = v;
            }
        }
        let (mut lo, mut hi) = (
            a + (b - a) * ib.saturating_sub(1) as f64 / m as f64,
            a + (b - a) * ((ib + 1).min(m)) as f64 / m as f64,
        );
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let x1 = hi - r * (hi - lo);
            let x2 = lo + r * (hi - lo);
            if g(x1) < g(x2) {
                lo = x1;
            } else {
                hi = x2;
            }
        }
        best = best.max(vb).max(g(0.5 * (lo + hi)));
    }
    Ok(best)
}

/// p ∫_0^∞ t^{p−1} μ(t) dt, which equals ∫ u^p.
pub fn cavalieri(mu: &impl Distribution, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::param("p", format!("must be positive, got {p}")));
    }
    weighted_measure_integral(mu, 1.0, |t| p * t.powf(p - 1.0), |a, b| b.powf(p) - a.powf(p))
}

/// ∫_0^|Ω| u*(s)^p ds, integrated between the kinks of u*.
pub fn rearranged_power_integral(mu: &DistributionFunction, p: f64) -> Result<f64> {
    finite_sup(mu)?;
    let s = mu.s_breaks();
    Ok(s.windows(2)
        .map(|w| integrate(|x| mu.inverse(x).powf(p), w[0], w[1], quad_opts()).0)
        .sum())
}

/// ∫_0^|Ω| h* g* ds − ∫_Ω h g, nonnegative up to quadrature error.
pub fn hardy_littlewood_gap(h: &ScalarField, g: &ScalarField) -> Result<f64> {
    let direct = integrate_product(h, g)?;
    let mh = DistributionFunction::from_field(h)?;
    let mg = DistributionFunction::from_field(g)?;
    let mut s = mh.s_breaks();
    s.extend(mg.s_breaks());
    let s = crate::numeric::sorted_unique(s);
    let rearranged: f64 = s
        .windows(2)
        .map(|w| integrate(|x| mh.inverse(x) * mg.inverse(x), w[0], w[1], quad_opts()).0)
        .sum();
    Ok(rearranged - direct)
}
