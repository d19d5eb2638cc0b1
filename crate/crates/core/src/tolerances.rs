use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances shared by the solvers.
///
/// `root` and `f` are relative to `1 + |λ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Root refinement: `|λ − λ*| ≤ root · (1 + |λ|)`.
    pub root: f64,
    /// Relative accuracy of the transfer-matrix entries.
    pub matrix: f64,
    /// Residual `|Δ₀(λ) − c| ≤ f · (1 + |λ|)` at reported roots.
    pub f: f64,
    /// Extremum distance below which a non-crossing level is treated as touching.
    pub tangent: f64,
    /// `|η|` below which a flat-band eigenfunction uses the degenerate pattern.
    pub eta: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            root: 1e-12,
            matrix: 1e-10,
            f: 1e-10,
            tangent: 1e-9,
            eta: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tol_root", self.root),
            ("tol_matrix", self.matrix),
            ("tol_f", self.f),
            ("tol_tangent", self.tangent),
            ("tol_eta", self.eta),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn root_at(&self, lambda: f64) -> f64 {
        self.root * (1.0 + lambda.abs())
    }

    pub fn f_at(&self, lambda: f64) -> f64 {
        self.f * (1.0 + lambda.abs())
    }
}
