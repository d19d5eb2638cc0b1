//! Graph Lyapunov functions, sector monodromy matrices and Floquet multipliers.
//!
//! For odd `N` the operator splits into sectors `k = 0..N`. Sector `k` is
//! described by `Δ₀ = (9Δ² − Δ₋² − 5)/4` through `ξ_k = Δ₀ + s_k²`,
//! `ρ_k = (s_k²/c_k²)(c_k² − ξ_k²)` and `Δ_{k,±} = ξ_k ± √ρ_k`, where
//! `c_k = cos(πk/N)` and `s_k = sin(πk/N)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hill::{HillSolver, TransferMatrix};
use crate::potential::Potential;
use crate::scalar::Field;

/// Constants of sector `k` for the tube with `N` chains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorConstants {
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub c: f64,
    pub s: f64,
    /// `s^k = e^{i2πk/N}`
    pub s_pow: Complex64,
    /// `s^{k/2} = e^{iπk/N}`
    pub s_pow_half: Complex64,
}

impl SectorConstants {
    pub fn new(k: usize, n: usize) -> Result<Self> {
        if n == 0 || n.is_multiple_of(2) {
            return Err(Error::Domain(format!("N must be odd, got {n}")));
        }
        let m = (n - 1) / 2;
        if k > m {
            return Err(Error::Domain(format!("sector k = {k} outside 0..={m} for N = {n}")));
        }
        let angle = PI * k as f64 / n as f64;
        Ok(SectorConstants {
            k,
            n,
            m,
            c: angle.cos(),
            s: angle.sin(),
            s_pow: Complex64::from_polar(1.0, 2.0 * angle),
            s_pow_half: Complex64::from_polar(1.0, angle),
        })
    }

    /// Sectors `0..=m` of an `N`-chain tube.
    pub fn all(n: usize) -> Result<Vec<Self>> {
        let first = Self::new(0, n)?;
        (0..=first.m).map(|k| Self::new(k, n)).collect()
    }

    pub fn s2(&self) -> f64 {
        self.s * self.s
    }

    /// Level of the periodic eigenvalues `λ_{k,2n}^±`: `cos(2πk/N)`.
    pub fn periodic_level(&self) -> f64 {
        (2.0 * PI * self.k as f64 / self.n as f64).cos()
    }

    /// Level `c_k − s_k²` of the even-index resonances.
    pub fn resonance_level_plus(&self) -> f64 {
        self.c - self.s2()
    }

    /// Level `−c_k − s_k²` of the odd-index resonances.
    pub fn resonance_level_minus(&self) -> f64 {
        -self.c - self.s2()
    }

    /// `s^{−k}`.
    pub fn s_pow_inv(&self) -> Complex64 {
        self.s_pow.conj()
    }
}

/// `Δ₀` from the entries of the Hill transfer matrix.
pub(crate) fn delta0_of<T: Field>(theta1: T, _phi1: T, _dtheta1: T, dphi1: T) -> T {
    let d = (dphi1 + theta1) * 0.5;
    let dm = (dphi1 - theta1) * 0.5;
    (d * d * 9.0 - dm * dm - T::from_real(5.0)) * 0.25
}

/// `Δ₀ − 1 = 2Δ₋² + (9/4) φ(1) ϑ'(1)`, accurate near double roots of the level.
pub(crate) fn delta0_minus_one<T: Field>(theta1: T, phi1: T, dtheta1: T, dphi1: T) -> T {
    let dm = (dphi1 - theta1) * 0.5;
    dm * dm * 2.0 + phi1 * dtheta1 * 2.25
}

/// `Δ₀ + 5/4 = (3Δ − Δ₋)(3Δ + Δ₋)/4`.
pub(crate) fn delta0_plus_five_quarters<T: Field>(theta1: T, _phi1: T, _dtheta1: T, dphi1: T) -> T {
    let d = (dphi1 + theta1) * 0.5;
    let dm = (dphi1 - theta1) * 0.5;
    (d * 3.0 - dm) * (d * 3.0 + dm) * 0.25
}

/// `Δ₀` through the trace form `2Δ² + ϑ'(1)φ(1)/4 − 1`.
pub fn delta0_trace_form(m: &TransferMatrix) -> Complex64 {
    let d = m.delta();
    2.0 * d * d + m.dtheta1 * m.phi1 / 4.0 - 1.0
}

pub fn delta0_from_matrix(m: &TransferMatrix) -> Complex64 {
    delta0_of(m.theta1, m.phi1, m.dtheta1, m.dphi1)
}

/// `Δ₀(λ)` for the potential `q`.
pub fn delta0(q: &Potential, lambda: Complex64) -> Result<Complex64> {
    Ok(delta0_from_matrix(&HillSolver::new(q.clone()).transfer(lambda)?))
}

/// Free Lyapunov function `(9 cos 2√λ − 1)/8`.
pub fn delta0_free(lambda: Complex64) -> Complex64 {
    (9.0 * (lambda * 4.0).cosq() - 1.0) / 8.0
}

/// `(ξ_k, ρ_k)` as algebraic images of `Δ₀`.
pub fn xi_rho_from_delta0(delta0: Complex64, sector: &SectorConstants) -> (Complex64, Complex64) {
    let xi = delta0 + sector.s2();
    if sector.k == 0 {
        return (xi, Complex64::new(0.0, 0.0));
    }
    let c2 = sector.c * sector.c;
    let rho = (sector.s2() / c2) * (c2 - xi * xi);
    (xi, rho)
}

pub fn xi_rho(q: &Potential, lambda: Complex64, sector: &SectorConstants) -> Result<(Complex64, Complex64)> {
    Ok(xi_rho_from_delta0(delta0(q, lambda)?, sector))
}

/// Lyapunov data of one sector at one `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovPoint {
    pub lambda: Complex64,
    pub delta0: Complex64,
    pub xi: Complex64,
    pub rho: Complex64,
    pub delta_k_plus: Complex64,
    pub delta_k_minus: Complex64,
    pub tau_plus: Complex64,
    pub tau_minus: Complex64,
    pub sector: SectorConstants,
}

impl LyapunovPoint {
    pub fn from_delta0(lambda: Complex64, delta0: Complex64, sector: &SectorConstants) -> Self {
        let (xi, rho) = xi_rho_from_delta0(delta0, sector);
        let root = rho.sqrt();
        let a = 2.0 * xi / (1.0 + sector.s_pow);
        let disc = (a * a - sector.s_pow_inv()).sqrt();
        LyapunovPoint {
            lambda,
            delta0,
            xi,
            rho,
            delta_k_plus: xi + root,
            delta_k_minus: xi - root,
            tau_plus: a + disc,
            tau_minus: a - disc,
            sector: *sector,
        }
    }
}

pub fn lyapunov_k(q: &Potential, lambda: Complex64, sector: &SectorConstants) -> Result<LyapunovPoint> {
    Ok(LyapunovPoint::from_delta0(lambda, delta0(q, lambda)?, sector))
}

/// 2×2 complex matrix in row-major order.
pub type Matrix2 = [[Complex64; 2]; 2];

/// Sector monodromy matrix `M_k(λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorMonodromy {
    pub entries: Matrix2,
    pub lambda: Complex64,
    pub sector: SectorConstants,
}

impl SectorMonodromy {
    pub fn det(&self) -> Complex64 {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1]
    }
}

fn matmul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `|φ(1, λ)|` below which `λ` counts as a Dirichlet eigenvalue.
pub fn pole_tolerance(lambda: Complex64) -> f64 {
    1e-8 * (1.0 + lambda.norm())
}

fn t_matrix(m: &TransferMatrix, sector: &SectorConstants) -> (Complex64, Matrix2) {
    let d = m.delta();
    let factor = sector.s_pow_half.conj() / (2.0 * sector.c);
    let c2 = sector.c * sector.c;
    (factor, [[2.0 * d, Complex64::new(1.0, 0.0)], [4.0 * d * d - 4.0 * c2, 2.0 * d]])
}

/// `M_k = R⁻¹ T_k R M` with `R = diag(1, φ(1, λ))`.
pub fn monodromy_from_matrix(m: &TransferMatrix, sector: &SectorConstants) -> Result<SectorMonodromy> {
    if m.phi1.norm() < pole_tolerance(m.lambda) {
        return Err(Error::DirichletPole {
            lambda: format!("{}", m.lambda),
            phi1: m.phi1.norm(),
        });
    }
    let (factor, t) = t_matrix(m, sector);
    let phi = m.phi1;
    let conj = [[t[0][0], t[0][1] * phi], [t[1][0] / phi, t[1][1]]];
    let mono = [[m.theta1, m.phi1], [m.dtheta1, m.dphi1]];
    let mut entries = matmul(&conj, &mono);
    for row in entries.iter_mut() {
        for e in row.iter_mut() {
            *e *= factor;
        }
    }
    Ok(SectorMonodromy {
        entries,
        lambda: m.lambda,
        sector: *sector,
    })
}

/// `R M_k R⁻¹ = T_k R M R⁻¹`, entire in `λ`.
pub fn conjugated_monodromy(m: &TransferMatrix, sector: &SectorConstants) -> Matrix2 {
    let (factor, t) = t_matrix(m, sector);
    let rmr = [[m.theta1, Complex64::new(1.0, 0.0)], [m.phi1 * m.dtheta1, m.dphi1]];
    let mut out = matmul(&t, &rmr);
    for row in out.iter_mut() {
        for e in row.iter_mut() {
            *e *= factor;
        }
    }
    out
}

pub fn monodromy_k(q: &Potential, lambda: Complex64, sector: &SectorConstants) -> Result<SectorMonodromy> {
    monodromy_from_matrix(&HillSolver::new(q.clone()).transfer(lambda)?, sector)
}

/// Eigenvalues of `M_k`.
pub fn multipliers_from_matrix(mk: &SectorMonodromy) -> (Complex64, Complex64) {
    eigenvalues(&mk.entries)
}

pub(crate) fn eigenvalues(e: &Matrix2) -> (Complex64, Complex64) {
    let half = (e[0][0] + e[1][1]) / 2.0;
    let det = e[0][0] * e[1][1] - e[0][1] * e[1][0];
    let disc = (half * half - det).sqrt();
    (half + disc, half - disc)
}

/// `½(τ + 1/τ)`; applied to the multipliers of `M_k` it gives `Δ_{k,±}`.
pub fn lyapunov_from_multiplier(tau: Complex64) -> Complex64 {
    (tau + 1.0 / tau) / 2.0
}

/// Compares two unordered pairs.
pub fn pair_distance(a: (Complex64, Complex64), b: (Complex64, Complex64)) -> f64 {
    let direct = (a.0 - b.0).norm().max((a.1 - b.1).norm());
    let swapped = (a.0 - b.1).norm().max((a.1 - b.0).norm());
    direct.min(swapped)
}
