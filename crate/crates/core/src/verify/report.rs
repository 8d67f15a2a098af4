use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

/// The five quantitative statements under test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    LorentzK1,
    Lorentz2k2,
    Pointwise,
    SaintVenant,
    BosselDaners,
}

impl Theorem {
    pub const ALL: [Theorem; 5] = [
        Theorem::LorentzK1,
        Theorem::Lorentz2k2,
        Theorem::Pointwise,
        Theorem::SaintVenant,
        Theorem::BosselDaners,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::LorentzK1 => "lorentz_k1",
            Theorem::Lorentz2k2 => "lorentz_2k2",
            Theorem::Pointwise => "pointwise",
            Theorem::SaintVenant => "saint_venant",
            Theorem::BosselDaners => "bossel_daners",
        }
    }

    pub fn from_name(s: &str) -> Option<Theorem> {
        Theorem::ALL.into_iter().find(|t| t.name() == s)
    }

    /// Power of α on the right-hand side.
    pub fn power(self) -> u32 {
        match self {
            Theorem::Pointwise => 3,
            _ => 2,
        }
    }

    /// Whether k enters the check.
    pub fn uses_k(self) -> bool {
        matches!(self, Theorem::LorentzK1 | Theorem::Lorentz2k2)
    }

    /// Whether the statement is restricted to f ≡ 1.
    pub fn constant_source_only(self) -> bool {
        matches!(self, Theorem::Pointwise | Theorem::SaintVenant | Theorem::BosselDaners)
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Coarse/fine pair of a discretized quantity with its extrapolation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Extrapolated {
    pub coarse: f64,
    pub fine: f64,
    /// fine + (fine − coarse)/3
    pub value: f64,
    /// |fine − coarse|
    pub error: f64,
}

impl Extrapolated {
    pub fn new(coarse: f64, fine: f64) -> Self {
        Self {
            coarse,
            fine,
            value: fine + (fine - coarse) / 3.0,
            error: (fine - coarse).abs(),
        }
    }
}

/// Both sides of one quantitative inequality.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub theorem: Theorem,
    pub domain: String,
    pub beta: f64,
    pub k: Option<f64>,
    pub source: String,
    pub h: f64,
    pub lhs_gap: f64,
    pub alpha: f64,
    pub constant: f64,
    pub power: u32,
    pub rhs: f64,
    /// lhs_gap − rhs
    pub margin: f64,
    pub error: f64,
    /// margin + error ≥ 0
    pub pass: bool,
    pub notes: Vec<String>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl TheoremReport {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        theorem: Theorem,
        domain: String,
        beta: f64,
        k: Option<f64>,
        source: String,
        h: f64,
        gap: Extrapolated,
        alpha: f64,
        constant: f64,
    ) -> Self {
        let power = theorem.power();
        let rhs = constant * alpha.powi(power as i32);
        let margin = gap.value - rhs;
        let mut diagnostics = BTreeMap::new();
        diagnostics.insert("gap_coarse".to_string(), gap.coarse);
        diagnostics.insert("gap_fine".to_string(), gap.fine);
        Self {
            theorem,
            domain,
            beta,
            k,
            source,
            h,
            lhs_gap: gap.value,
            alpha,
            constant,
            power,
            rhs,
            margin,
            error: gap.error,
            pass: margin + gap.error >= 0.0,
            notes: Vec::new(),
            diagnostics,
        }
    }

    pub(crate) fn diag(&mut self, key: &str, value: f64) {
        self.diagnostics.insert(key.to_string(), value);
    }

    /// Equality-case reading: the gap is within its own error estimate.
    pub fn gap_within_error(&self) -> bool {
        self.lhs_gap.abs() <= self.error
    }
}
