use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Closed-form solution for f ≡ 1 on the disc of radius R.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallClosedForm {
    pub radius: f64,
    pub beta: f64,
}

impl BallClosedForm {
    pub fn new(radius: f64, beta: f64) -> Result<Self> {
        if !(radius > 0.0) || !(beta > 0.0) {
            return Err(Error::param("radius/beta", format!("need R > 0 and β > 0, got R = {radius}, β = {beta}")));
        }
        Ok(Self { radius, beta })
    }

    /// u(r) = (R² − r²)/4 + R/(2β)
    pub fn u(&self, r: f64) -> f64 {
        let rr = self.radius;
        (rr * rr - r * r) / 4.0 + rr / (2.0 * self.beta)
    }

    /// du/dr
    pub fn du(&self, r: f64) -> f64 {
        -0.5 * r
    }

    /// T_β = ∫ u = πR⁴/8 + πR³/(2β)
    pub fn torsion(&self) -> f64 {
        let r = self.radius;
        PI * r.powi(4) / 8.0 + PI * r.powi(3) / (2.0 * self.beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::quad;

    #[test]
    fn unit_disc_values() {
        let b = BallClosedForm::new(1.0, 1.0).unwrap();
        assert!((b.torsion() - 5.0 * PI / 8.0).abs() < 1e-15);
        // ∫ u = 2π ∫ u(r) r dr
        let direct = 2.0 * PI * quad(|r| b.u(r) * r, 0.0, 1.0);
        assert!((direct - b.torsion()).abs() < 1e-13);
        // Robin condition u'(R) + β u(R) = 0 and −Δu = −(u'' + u'/r) = 1
        for (r, beta) in [(1.0, 1.0), (2.0, 0.3), (0.5, 7.0)] {
            let b = BallClosedForm::new(r, beta).unwrap();
            assert!((b.du(r) + beta * b.u(r)).abs() < 1e-15);
            let x = 0.37 * r;
            let h = 1e-4;
            let lap = (b.u(x + h) - 2.0 * b.u(x) + b.u(x - h)) / (h * h) + b.du(x) / x;
            assert!((lap + 1.0).abs() < 1e-6);
        }
        let huge = BallClosedForm::new(1.0, 1e12).unwrap();
        assert!((huge.torsion() - PI / 8.0).abs() < 1e-11);
        assert!(BallClosedForm::new(-1.0, 1.0).is_err());
    }
}
