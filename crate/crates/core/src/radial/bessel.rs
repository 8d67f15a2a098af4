use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::bisect;

/// First positive zero of J₀.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

const ASYMPTOTIC_SWITCH: f64 = 12.0;

fn series(nu: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = h.powi(nu as i32) / (1..=nu).map(|k| k as f64).product::<f64>();
    let mut sum = term;
    let mut m = 0u32;
    loop {
        m += 1;
        term *= -h * h / (m as f64 * (m + nu) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && m as f64 > h {
            break;
        }
        if m > 500 {
            break;
        }
    }
    sum
}

fn asymptotic(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let z = 8.0 * x;
    // Hankel expansion: P = Σ (-1)^k a_{2k}, Q = Σ (-1)^k a_{2k+1}, a_j = Π_{i≤j} (μ − (2i−1)²) / (j! z^j)
    let (mut p, mut q) = (0.0, 0.0);
    let mut a = 1.0f64;
    let mut prev = f64::INFINITY;
    for j in 0..40 {
        if j > 0 {
            let odd = (2 * j - 1) as f64;
            a *= (mu - odd * odd) / (j as f64 * z);
        }
        if a.abs() > prev {
            break;
        }
        prev = a.abs();
        let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if j % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu as f64 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn bessel(nu: u32, x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < ASYMPTOTIC_SWITCH { series(nu, ax) } else { asymptotic(nu, ax) };
    if x < 0.0 && nu % 2 == 1 {
        -v
    } else {
        v
    }
}

pub fn bessel_j0(x: f64) -> f64 {
    bessel(0, x)
}

pub fn bessel_j1(x: f64) -> f64 {
    bessel(1, x)
}

/// Principal Robin eigenvalue of the disc of radius `r`: the smallest root of
/// −√λ J₁(√λ r) + β J₀(√λ r) = 0 in (0, (j₀₁/r)²).
pub fn robin_disc_eigenvalue(r: f64, beta: f64) -> Result<f64> {
    if !(r > 0.0) || !(beta > 0.0) || !r.is_finite() || !beta.is_finite() {
        return Err(Error::param("radius/beta", format!("need r > 0 and β > 0, got r = {r}, β = {beta}")));
    }
    let hi = (J0_FIRST_ZERO / r).powi(2);
    let g = |lam: f64| {
        let k = lam.sqrt();
        -k * bessel_j1(k * r) + beta * bessel_j0(k * r)
    };
    bisect(g, 0.0, hi, 1e-12 * hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_values() {
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-16);
        assert_eq!(bessel_j1(0.0), 0.0);
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!(bessel_j0(J0_FIRST_ZERO).abs() < 1e-15);
        assert!((bessel_j0(20.0) - 0.167_024_664_340_583_1).abs() < 1e-12);
        assert!((bessel_j1(20.0) - 0.066_833_124_175_849_93).abs() < 1e-12);
        assert!((bessel_j1(-1.0) + bessel_j1(1.0)).abs() < 1e-16);
    }

    #[test]
    fn branches_agree_at_switch() {
        for x in [12.0, 13.5] {
            assert!((series(0, x) - asymptotic(0, x)).abs() < 1e-10, "x={x}");
            assert!((series(1, x) - asymptotic(1, x)).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn derivative_identity() {
        // J0' = −J1
        for x in [0.5, 3.0, 11.0, 15.0] {
            let h = 1e-3;
            let d = (bessel_j0(x - 2.0 * h) - 8.0 * bessel_j0(x - h) + 8.0 * bessel_j0(x + h) - bessel_j0(x + 2.0 * h))
                / (12.0 * h);
            assert!((d + bessel_j1(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenvalues() {
        let l = robin_disc_eigenvalue(1.0, 1.0).unwrap();
        assert!((l - 1.576_992_730_808_607).abs() < 1e-9, "{l}");
        assert!((robin_disc_eigenvalue(1.0, 10.0).unwrap() - 4.750_205_414_871_952).abs() < 1e-9);
        let dirichlet = J0_FIRST_ZERO * J0_FIRST_ZERO;
        let big = robin_disc_eigenvalue(1.0, 1e6).unwrap();
        assert!((big - dirichlet).abs() < 2e-5 && big < dirichlet);
        assert!(robin_disc_eigenvalue(1.0, 1e-6).unwrap() < 3e-6);
        // scaling λ(r, β) = λ(1, rβ) / r²
        let a = robin_disc_eigenvalue(2.0, 0.5).unwrap();
        assert!((a - robin_disc_eigenvalue(1.0, 1.0).unwrap() / 4.0).abs() < 1e-10);
        assert!(robin_disc_eigenvalue(0.0, 1.0).is_err());
    }
}
