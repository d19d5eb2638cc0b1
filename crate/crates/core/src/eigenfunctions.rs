//! Compactly supported eigenfunctions on the flat bands.
//!
//! In sector `k` the graph reduces to a periodic chain `Γ¹` with cells `n ∈ ℤ`
//! and three edges `j = 0, 1, 2` per cell. At a Dirichlet eigenvalue `μ` every
//! edge function is a multiple of `φ(·, μ)`, so an eigenfunction is a finite
//! map from edges to amplitudes. The vertex conditions are
//!
//! ```text
//! f_{n,0}(1) = f_{n,1}(0) = s^k f_{n,2}(1),     f_{n+1,0}(0) = f_{n,1}(1) = f_{n,2}(0),
//! −f'_{n,0}(1) + f'_{n,1}(0) − s^k f'_{n,2}(1) = 0,   f'_{n+1,0}(0) − f'_{n,1}(1) + f'_{n,2}(0) = 0,
//! ```
//!
//! with `s = e^{i2π/N}`.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hill::HillSolver;
use crate::potential::Potential;
use crate::tolerances::Tolerances;
use crate::Complex64;

/// Edge `j` of cell `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeIndex {
    pub n: i64,
    pub j: u8,
}

impl EdgeIndex {
    pub fn new(n: i64, j: u8) -> Result<Self> {
        if j > 2 {
            return Err(Error::Domain(format!("edge type j = {j} outside 0..=2")));
        }
        Ok(EdgeIndex { n, j })
    }

    fn at(n: i64, j: u8) -> Self {
        EdgeIndex { n, j }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlatBandCase {
    /// `η = 1 − s^k c² ≠ 0`: support on cells `−1` and `0`.
    EtaNonzero,
    /// `η = 0`: support on edges `(0, 1)` and `(0, 2)`.
    EtaZero,
}

impl FlatBandCase {
    pub fn name(self) -> &'static str {
        match self {
            FlatBandCase::EtaNonzero => "eta_nonzero",
            FlatBandCase::EtaZero => "eta_zero",
        }
    }
}

/// An eigenfunction `f_α = coeffs[α] · φ(·, μ)` of sector `k` at the flat band `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatBandEigenfunction {
    pub mu: f64,
    pub k: usize,
    pub n_chains: usize,
    pub case: FlatBandCase,
    /// `φ'(1, μ)`.
    pub c: f64,
    /// `1 − s^k c²`.
    pub eta: Complex64,
    pub coeffs: BTreeMap<EdgeIndex, Complex64>,
}

/// `s^k = e^{i2πk/N}` for `k ∈ ℤ_N`.
fn sector_phase(k: usize, n_chains: usize) -> Result<Complex64> {
    if n_chains == 0 || n_chains.is_multiple_of(2) {
        return Err(Error::Domain(format!("N must be odd, got {n_chains}")));
    }
    if k >= n_chains {
        return Err(Error::Domain(format!("sector k = {k} outside 0..{n_chains}")));
    }
    Ok(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n_chains as f64))
}

/// The eigenfunction `ψ⁽⁰⁾` at the Dirichlet eigenvalue `mu`.
pub fn build_flatband(q: &Potential, mu: f64, k: usize, n_chains: usize) -> Result<FlatBandEigenfunction> {
    build_flatband_with(&HillSolver::new(q.clone()), mu, k, n_chains, Tolerances::default())
}

pub fn build_flatband_with(
    solver: &HillSolver,
    mu: f64,
    k: usize,
    n_chains: usize,
    tol: Tolerances,
) -> Result<FlatBandEigenfunction> {
    let sk = sector_phase(k, n_chains)?;
    let end = solver.fundamental_at(Complex64::new(mu, 0.0), 1.0)?;
    if end.phi.norm() > tol.f_at(mu) {
        return Err(Error::Precondition(format!(
            "mu = {mu} is not a Dirichlet eigenvalue: |phi(1, mu)| = {:e}",
            end.phi.norm()
        )));
    }
    let c = end.dphi.re;
    let eta = Complex64::new(1.0, 0.0) - sk * c * c;
    let one = Complex64::new(1.0, 0.0);
    let (case, coeffs) = if eta.norm() > tol.eta {
        let coeffs = BTreeMap::from([
            (EdgeIndex::at(0, 0), eta),
            (EdgeIndex::at(0, 1), one * c),
            (EdgeIndex::at(0, 2), one * (c * c)),
            (EdgeIndex::at(-1, 0), Complex64::new(0.0, 0.0)),
            (EdgeIndex::at(-1, 1), -sk * c),
            (EdgeIndex::at(-1, 2), -one),
        ]);
        (FlatBandCase::EtaNonzero, coeffs)
    } else {
        let coeffs = BTreeMap::from([(EdgeIndex::at(0, 1), one), (EdgeIndex::at(0, 2), one * c)]);
        (FlatBandCase::EtaZero, coeffs)
    };
    Ok(FlatBandEigenfunction { mu, k, n_chains, case, c, eta, coeffs })
}

impl FlatBandEigenfunction {
    pub fn coeff(&self, n: i64, j: u8) -> Complex64 {
        self.coeffs.get(&EdgeIndex::at(n, j)).copied().unwrap_or_default()
    }

    /// Edges with a nonzero amplitude.
    pub fn support(&self) -> BTreeSet<EdgeIndex> {
        self.coeffs
            .iter()
            .filter(|(_, v)| v.norm() > 0.0)
            .map(|(e, _)| *e)
            .collect()
    }

    fn cell_range(&self) -> Option<(i64, i64)> {
        let support = self.support();
        let lo = support.iter().map(|e| e.n).min()?;
        let hi = support.iter().map(|e| e.n).max()?;
        Some((lo, hi))
    }

    /// `ψ⁽⁰⁾` shifted by `p` cells.
    pub fn translate(&self, p: i64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, v)| (EdgeIndex::at(e.n + p, e.j), *v))
            .collect();
        FlatBandEigenfunction { coeffs, ..self.clone() }
    }

    /// The identically zero function at the same `μ` and sector.
    pub fn zero_like(&self) -> Self {
        FlatBandEigenfunction { coeffs: BTreeMap::new(), ..self.clone() }
    }

    /// Largest `|f|` at any edge endpoint.
    pub fn vertex_max(&self, solver: &HillSolver) -> Result<f64> {
        let lambda = Complex64::new(self.mu, 0.0);
        let a = solver.fundamental_at(lambda, 0.0)?.phi;
        let b = solver.fundamental_at(lambda, 1.0)?.phi;
        Ok(self
            .coeffs
            .values()
            .map(|v| (v * a).norm().max((v * b).norm()))
            .fold(0.0, f64::max))
    }

    /// Largest violation of the vertex conditions over cells adjacent to the support.
    pub fn kirchhoff_residual(&self, solver: &HillSolver) -> Result<f64> {
        let Some((lo, hi)) = self.cell_range() else {
            return Ok(0.0);
        };
        let sk = sector_phase(self.k, self.n_chains)?;
        let lambda = Complex64::new(self.mu, 0.0);
        let start = solver.fundamental_at(lambda, 0.0)?;
        let end = solver.fundamental_at(lambda, 1.0)?;
        let val = |n: i64, j: u8, at_end: bool| self.coeff(n, j) * if at_end { end.phi } else { start.phi };
        let der = |n: i64, j: u8, at_end: bool| self.coeff(n, j) * if at_end { end.dphi } else { start.dphi };
        let mut worst: f64 = 0.0;
        for n in (lo - 1)..=(hi + 1) {
            let residuals = [
                val(n, 0, true) - val(n, 1, false),
                val(n, 1, false) - sk * val(n, 2, true),
                val(n + 1, 0, false) - val(n, 1, true),
                val(n, 1, true) - val(n, 2, false),
                -der(n, 0, true) + der(n, 1, false) - sk * der(n, 2, true),
                der(n + 1, 0, false) - der(n, 1, true) + der(n, 2, false),
            ];
            worst = residuals.iter().map(|r| r.norm()).fold(worst, f64::max);
        }
        Ok(worst)
    }

    /// Edge values `coeff · φ(t, μ)` on a uniform grid of `samples ≥ 2` points.
    pub fn traces(&self, solver: &HillSolver, samples: usize) -> Result<Vec<(EdgeIndex, Vec<f64>, Vec<Complex64>)>> {
        if samples < 2 {
            return Err(Error::Domain("traces need at least 2 samples".into()));
        }
        let lambda = Complex64::new(self.mu, 0.0);
        let t: Vec<f64> = (0..samples).map(|i| i as f64 / (samples - 1) as f64).collect();
        let phi = t
            .iter()
            .map(|&x| solver.fundamental_at(lambda, x).map(|f| f.phi))
            .collect::<Result<Vec<_>>>()?;
        Ok(self
            .support()
            .into_iter()
            .map(|e| {
                let a = self.coeff(e.n, e.j);
                (e, t.clone(), phi.iter().map(|p| a * p).collect())
            })
            .collect())
    }

    pub fn to_json_value(&self) -> Value {
        let coeffs: Vec<Value> = self
            .coeffs
            .iter()
            .map(|(e, v)| json!({"n": e.n, "j": e.j, "re": v.re, "im": v.im}))
            .collect();
        json!({
            "mu": self.mu,
            "k": self.k,
            "N": self.n_chains,
            "case": self.case.name(),
            "c": self.c,
            "eta": {"re": self.eta.re, "im": self.eta.im},
            "coeffs": coeffs,
        })
    }

    /// JSON dump with sampled edge traces attached.
    pub fn to_json_with_traces(&self, solver: &HillSolver, samples: usize) -> Result<Value> {
        let mut v = self.to_json_value();
        let traces: Vec<Value> = self
            .traces(solver, samples)?
            .into_iter()
            .map(|(e, t, values)| {
                json!({
                    "n": e.n,
                    "j": e.j,
                    "t": t,
                    "re": values.iter().map(|z| z.re).collect::<Vec<_>>(),
                    "im": values.iter().map(|z| z.im).collect::<Vec<_>>(),
                })
            })
            .collect();
        v["traces"] = Value::Array(traces);
        Ok(v)
    }
}

/// Residual of the vertex conditions for `f`.
pub fn kirchhoff_residual(f: &FlatBandEigenfunction, q: &Potential) -> Result<f64> {
    f.kirchhoff_residual(&HillSolver::new(q.clone()))
}

pub fn translate(f: &FlatBandEigenfunction, p: i64) -> FlatBandEigenfunction {
    f.translate(p)
}
