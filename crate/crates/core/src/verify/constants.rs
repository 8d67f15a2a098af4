use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rearrange::{check_k, omega, LorentzScale};

/// Inputs of the explicit constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantsInput {
    pub n: u32,
    pub measure: f64,
    pub f_l1: f64,
    pub beta: f64,
    pub k: f64,
    pub gamma_n: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstantsBundle {
    pub n: u32,
    pub measure: f64,
    pub f_l1: f64,
    pub beta: f64,
    pub k: f64,
    pub gamma_n: f64,
    pub c1: f64,
    pub c2: f64,
    /// planar only
    pub c3: Option<f64>,
    pub c4: f64,
    /// planar only
    pub c5: Option<f64>,
}

fn positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and positive, got {x}")))
    }
}

/// |Ω|^{1/k+1/n−1} ‖f‖₁/(β n ω_n^{1/n}) · min{1/(2^{1/k+5} γ_n), β|Ω|^{1/n}/(2^{1/k+3+2/n} n ω_n^{1/n})}
pub fn c1(n: u32, measure: f64, f_l1: f64, beta: f64, k: f64, gamma_n: f64) -> f64 {
    let nf = n as f64;
    let w = omega(n).powf(1.0 / nf);
    let e = 1.0 / k;
    let front = measure.powf(e + 1.0 / nf - 1.0) * f_l1 / (beta * nf * w);
    let a = 1.0 / (2f64.powf(e + 5.0) * gamma_n);
    let b = beta * measure.powf(1.0 / nf) / (2f64.powf(e + 3.0 + 2.0 / nf) * nf * w);
    front * a.min(b)
}

/// (|Ω|^{1/n−1} ‖f‖₁/(β n ω_n^{1/n}))² |Ω|^{1/k} · min{1/(2^{1/k+5} γ_n), β|Ω|^{1/n}/(2^{1/k+5+2/n} n ω_n^{1/n})}
pub fn c2(n: u32, measure: f64, f_l1: f64, beta: f64, k: f64, gamma_n: f64) -> f64 {
    let nf = n as f64;
    let w = omega(n).powf(1.0 / nf);
    let e = 1.0 / k;
    let base = measure.powf(1.0 / nf - 1.0) * f_l1 / (beta * nf * w);
    let a = 1.0 / (2f64.powf(e + 5.0) * gamma_n);
    let b = beta * measure.powf(1.0 / nf) / (2f64.powf(e + 5.0 + 2.0 / nf) * nf * w);
    base * base * measure.powf(e) * a.min(b)
}

/// |Ω| min{1/(2⁷π), 1/(2⁸π γ₂)}
pub fn c3(measure: f64, gamma_2: f64) -> f64 {
    measure * (1.0 / (128.0 * PI)).min(1.0 / (256.0 * PI * gamma_2))
}

/// C₁ at k = 1 and f ≡ 1.
pub fn c4(n: u32, measure: f64, beta: f64, gamma_n: f64) -> f64 {
    c1(n, measure, measure, beta, 1.0, gamma_n)
}

/// min{1/(2⁶γ₂), β|Ω|^{1/2}/(2⁸√π)} / (2β²(|Ω|/(2π) + 1/(πβ²) + √|Ω|/(β√π)))
pub fn c5(measure: f64, beta: f64, gamma_2: f64) -> f64 {
    let num = (1.0 / (64.0 * gamma_2)).min(beta * measure.sqrt() / (256.0 * PI.sqrt()));
    let den = 2.0 * beta * beta * (measure / (2.0 * PI) + 1.0 / (PI * beta * beta) + measure.sqrt() / (beta * PI.sqrt()));
    num / den
}

/// Evaluates every constant after checking k against the range of `scale`.
pub fn compute_constants(input: ConstantsInput, scale: LorentzScale, constant_source: bool) -> Result<ConstantsBundle> {
    let ConstantsInput {
        n,
        measure,
        f_l1,
        beta,
        k,
        gamma_n,
    } = input;
    if n < 2 {
        return Err(Error::param("n", format!("dimension must be at least 2, got {n}")));
    }
    positive("measure", measure)?;
    positive("f_l1", f_l1)?;
    positive("beta", beta)?;
    positive("gamma_n", gamma_n)?;
    check_k(scale, k, n, constant_source)?;
    let planar = n == 2;
    Ok(ConstantsBundle {
        n,
        measure,
        f_l1,
        beta,
        k,
        gamma_n,
        c1: c1(n, measure, f_l1, beta, k, gamma_n),
        c2: c2(n, measure, f_l1, beta, k, gamma_n),
        c3: planar.then(|| c3(measure, gamma_n)),
        c4: c4(n, measure, beta, gamma_n),
        c5: planar.then(|| c5(measure, beta, gamma_n)),
    })
}
