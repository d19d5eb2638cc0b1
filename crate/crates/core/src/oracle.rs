//! Independent checks of the sector monodromy.
//!
//! `M_k` is rebuilt here by solving the vertex conditions across one cell
//! numerically, without the closed form used in [`crate::lyapunov`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hill::{Fundamental, HillSolver};
use crate::lyapunov::{
    eigenvalues, lyapunov_from_multiplier, pair_distance, pole_tolerance, Matrix2, SectorConstants, SectorMonodromy,
};
use crate::potential::Potential;

/// Tolerance on `½(τ + 1/τ)` in [`band_membership`].
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// Affine form `a·x + b·y + c` in the unknowns `x = f₁,₀(0)`, `y = f′₁,₀(0)`.
#[derive(Debug, Clone, Copy)]
struct Affine {
    x: Complex64,
    y: Complex64,
    c: Complex64,
}

impl Affine {
    fn constant(c: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Affine { x: zero, y: zero, c }
    }

    fn x() -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Affine { x: Complex64::new(1.0, 0.0), y: zero, c: zero }
    }

    fn y() -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Affine { x: zero, y: Complex64::new(1.0, 0.0), c: zero }
    }

    fn scale(self, s: Complex64) -> Self {
        Affine { x: self.x * s, y: self.y * s, c: self.c * s }
    }

    fn add(self, o: Self) -> Self {
        Affine { x: self.x + o.x, y: self.y + o.y, c: self.c + o.c }
    }

    fn sub(self, o: Self) -> Self {
        self.add(o.scale(Complex64::new(-1.0, 0.0)))
    }
}

/// Boundary derivatives `(f′(0), f′(1))` of the solution with end values `f(0)`, `f(1)`.
fn edge_derivatives(h: &Fundamental, f0: Affine, f1: Affine) -> (Affine, Affine) {
    let inv = 1.0 / h.phi;
    let d0 = f1.sub(f0.scale(h.theta)).scale(inv);
    let d1 = f1.scale(h.dphi).sub(f0).scale(inv);
    (d0, d1)
}

/// Solves the vertex conditions of one cell for `(f₁,₀(0), f′₁,₀(0))`.
fn propagate(h: &Fundamental, phase: Complex64, f0: Complex64, df0: Complex64) -> Result<(Complex64, Complex64)> {
    // Edge (0,0) from its initial data.
    let a = f0 * h.theta + df0 * h.phi;
    let da = f0 * h.dtheta + df0 * h.dphi;
    let a = Affine::constant(a);
    let da = Affine::constant(da);
    // Edge (0,1) runs from f₀,₀(1) to f₁,₀(0); edge (0,2) from f₁,₀(0) to s^{−k} f₀,₀(1).
    let (d01_0, d01_1) = edge_derivatives(h, a, Affine::x());
    let (d02_0, d02_1) = edge_derivatives(h, Affine::x(), a.scale(phase.inv()));
    let eq1 = d01_0.sub(da).sub(d02_1.scale(phase));
    let eq2 = Affine::y().sub(d01_1).add(d02_0);
    let det = eq1.x * eq2.y - eq1.y * eq2.x;
    let scale = eq1.x.norm().max(eq1.y.norm()).max(eq2.x.norm()).max(eq2.y.norm());
    if !(det.norm() > 1e-14 * scale * scale) {
        return Err(Error::DirichletPole {
            lambda: "cell elimination".into(),
            phi1: h.phi.norm(),
        });
    }
    let x = (-eq1.c * eq2.y + eq2.c * eq1.y) / det;
    let y = (-eq2.c * eq1.x + eq1.c * eq2.x) / det;
    Ok((x, y))
}

/// `M_k` for the phase `s^k`, valid for any residue `k` mod `N`.
fn direct_entries(hill: &HillSolver, lambda: Complex64, phase: Complex64) -> Result<Matrix2> {
    let h = hill.fundamental_at(lambda, 1.0)?;
    if h.phi.norm() <= pole_tolerance(lambda) {
        return Err(Error::DirichletPole {
            lambda: format!("{lambda}"),
            phi1: h.phi.norm(),
        });
    }
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let (t0, dt0) = propagate(&h, phase, one, zero)?;
    let (p0, dp0) = propagate(&h, phase, zero, one)?;
    Ok([[t0, p0], [dt0, dp0]])
}

fn phase(k: usize, n_chains: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n_chains as f64)
}

/// Sector monodromy built from the vertex conditions, `k ∈ 0..=m`.
pub fn monodromy_direct_with(hill: &HillSolver, lambda: Complex64, k: usize, n_chains: usize) -> Result<SectorMonodromy> {
    let sector = SectorConstants::new(k, n_chains)?;
    Ok(SectorMonodromy {
        entries: direct_entries(hill, lambda, sector.s_pow)?,
        lambda,
        sector,
    })
}

pub fn monodromy_direct(q: &Potential, lambda: Complex64, k: usize, n_chains: usize) -> Result<SectorMonodromy> {
    monodromy_direct_with(&HillSolver::new(q.clone()), lambda, k, n_chains)
}

/// Floquet multipliers of sector `k ∈ 0..N`.
pub fn multipliers_direct(hill: &HillSolver, lambda: Complex64, k: usize, n_chains: usize) -> Result<(Complex64, Complex64)> {
    check_sector(k, n_chains)?;
    Ok(eigenvalues(&direct_entries(hill, lambda, phase(k, n_chains))?))
}

fn check_sector(k: usize, n_chains: usize) -> Result<()> {
    if n_chains == 0 || n_chains.is_multiple_of(2) {
        return Err(Error::Domain(format!("N must be odd, got {n_chains}")));
    }
    if k >= n_chains {
        return Err(Error::Domain(format!("sector k = {k} outside 0..{n_chains}")));
    }
    Ok(())
}

/// Whether `λ` lies in the a.c. spectrum of sector `k ∈ 0..N`.
pub fn band_membership_with(hill: &HillSolver, n_chains: usize, k: usize, lambda: f64) -> Result<bool> {
    let (a, b) = multipliers_direct(hill, Complex64::new(lambda, 0.0), k, n_chains)?;
    let inside = |tau: Complex64| {
        let d = lyapunov_from_multiplier(tau);
        d.im.abs() <= MEMBERSHIP_TOL && d.re.abs() <= 1.0 + MEMBERSHIP_TOL
    };
    Ok(inside(a) || inside(b))
}

pub fn band_membership(q: &Potential, n_chains: usize, k: usize, lambda: f64) -> Result<bool> {
    band_membership_with(&HillSolver::new(q.clone()), n_chains, k, lambda)
}

/// Largest residual of the multiplier relations between sectors `k` and `N − k`.
///
/// Checks `τ_{k,+}τ_{k,−} = s^{−k}`, `τ_{k,+} + τ_{k,−} = s^{−k} Tr M_{−k}`
/// and `{τ_{−k,±}} = s^k {τ_{k,∓}}`.
pub fn malk_relations_with(hill: &HillSolver, n_chains: usize, k: usize, lambda: Complex64) -> Result<f64> {
    check_sector(k, n_chains)?;
    let p = phase(k, n_chains);
    let mk = direct_entries(hill, lambda, p)?;
    let mk_neg = direct_entries(hill, lambda, p.conj())?;
    let (tp, tm) = eigenvalues(&mk);
    let (up, um) = eigenvalues(&mk_neg);
    let product = (tp * tm - p.conj()).norm();
    let sum = (tp + tm - p.conj() * (mk_neg[0][0] + mk_neg[1][1])).norm();
    let swap = pair_distance((up, um), (tm * p, tp * p));
    let scale = 1.0 + tp.norm().max(tm.norm());
    Ok(product.max(sum / scale).max(swap / scale))
}

pub fn malk_relations(q: &Potential, n_chains: usize, k: usize, lambda: Complex64) -> Result<f64> {
    malk_relations_with(&HillSolver::new(q.clone()), n_chains, k, lambda)
}

/// Largest entrywise deviation of `monodromy_direct` from the closed form,
/// relative to `max(1, |entry|)`.
pub fn closed_form_deviation(hill: &HillSolver, lambda: Complex64, k: usize, n_chains: usize) -> Result<f64> {
    let direct = monodromy_direct_with(hill, lambda, k, n_chains)?;
    let closed = crate::lyapunov::monodromy_from_matrix(&hill.transfer(lambda)?, &direct.sector)?;
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let e = closed.entries[i][j];
            worst = worst.max((direct.entries[i][j] - e).norm() / e.norm().max(1.0));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::{delta0_from_matrix, monodromy_k};
    use crate::spectra::SpectralSolver;
    use proptest::prelude::*;
    use std::sync::{Arc, OnceLock};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn max_entry_diff(a: &Matrix2, b: &Matrix2) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((a[i][j] - b[i][j]).norm());
            }
        }
        worst
    }

    #[test]
    fn free_n3_matches_closed_form() {
        let q = Potential::zero();
        let lambda = c(PI * PI / 4.0);
        for k in 0..=1 {
            let s = SectorConstants::new(k, 3).unwrap();
            let direct = monodromy_direct(&q, lambda, k, 3).unwrap();
            let closed = monodromy_k(&q, lambda, &s).unwrap();
            assert!(max_entry_diff(&direct.entries, &closed.entries) <= 1e-9);
        }
        let m1 = monodromy_direct(&q, lambda, 1, 3).unwrap();
        let expected = Complex64::from_polar(1.0, -2.0 * PI / 3.0);
        assert!((m1.det() - expected).norm() <= 1e-9);
    }

    #[test]
    fn cosine_n5_matches_closed_form() {
        let q = Potential::cosine(1.0);
        let s = SectorConstants::new(2, 5).unwrap();
        let direct = monodromy_direct(&q, c(7.3), 2, 5).unwrap();
        let closed = monodromy_k(&q, c(7.3), &s).unwrap();
        assert!(max_entry_diff(&direct.entries, &closed.entries) <= 1e-8);
    }

    #[test]
    fn pole_is_reported() {
        // φ(1, π²) = 0 for the free operator.
        let err = monodromy_direct(&Potential::zero(), c(PI * PI), 1, 3).unwrap_err();
        assert!(matches!(err, Error::DirichletPole { .. }));
    }

    #[test]
    fn free_membership() {
        let q = Potential::zero();
        assert!(band_membership(&q, 3, 0, 0.5).unwrap());
        for n in [3, 5, 7] {
            for k in 0..n {
                assert!(!band_membership(&q, n, k, -1.0).unwrap());
            }
        }
    }

    #[test]
    fn membership_matches_sector_bands() {
        let q = Potential::cosine(1.0);
        let solver = SpectralSolver::new(q.clone());
        let bands = solver.assemble_bands(5, 120.0).unwrap();
        let hill = solver.hill().clone();
        let s1 = bands.sector(1).unwrap();
        let (a, b) = s1.gap(1).unwrap();
        assert!(b > a);
        assert!(!band_membership_with(&hill, 5, 1, 0.5 * (a + b)).unwrap());
        let dirichlet = solver.dirichlet_spectrum(120.0).unwrap();
        for k in 0..5 {
            let sb = bands.sector(k.min(5 - k)).unwrap();
            for i in 0..400 {
                let lambda = -2.0 + 0.29 * i as f64 + 0.013;
                if lambda > 110.0 || dirichlet.iter().any(|d| (d - lambda).abs() < 0.05) {
                    continue;
                }
                let edge_dist = sb
                    .bands
                    .iter()
                    .map(|b| (b.interval.0 - lambda).abs().min((b.interval.1 - lambda).abs()))
                    .fold(f64::INFINITY, f64::min);
                if edge_dist < 1e-6 {
                    continue;
                }
                assert_eq!(band_membership_with(&hill, 5, k, lambda).unwrap(), sb.contains(lambda), "k={k} λ={lambda}");
            }
        }
    }

    #[test]
    fn malk_examples() {
        assert!(malk_relations(&Potential::zero(), 3, 1, c(2.0)).unwrap() <= 1e-9);
        assert!(malk_relations(&Potential::cosine(1.0), 5, 2, c(11.0)).unwrap() <= 1e-8);
        let hill = HillSolver::new(Potential::cosine(1.0));
        let (a, b) = multipliers_direct(&hill, c(11.0), 0, 5).unwrap();
        assert!((a * b - 1.0).norm() <= 1e-10);
    }

    #[test]
    fn rejects_bad_sector() {
        let q = Potential::zero();
        assert!(band_membership(&q, 4, 0, 1.0).is_err());
        assert!(band_membership(&q, 3, 3, 1.0).is_err());
        assert!(monodromy_direct(&q, c(1.0), 2, 3).is_err());
    }

    struct Fixture {
        hill: Arc<HillSolver>,
        dirichlet: Vec<f64>,
    }

    fn fixture(q: Potential) -> Fixture {
        let solver = SpectralSolver::new(q);
        Fixture {
            dirichlet: solver.dirichlet_spectrum(300.0).unwrap(),
            hill: solver.hill().clone(),
        }
    }

    fn fixtures() -> &'static [Fixture; 3] {
        static CELL: OnceLock<[Fixture; 3]> = OnceLock::new();
        CELL.get_or_init(|| {
            [
                fixture(Potential::zero()),
                fixture(Potential::cosine(1.0)),
                fixture(Potential::piecewise(vec![0.0, 0.3, 1.0], vec![2.0, -1.0]).unwrap()),
            ]
        })
    }

    fn agreement(fx: &Fixture, re: f64, im: f64, k_raw: usize, n_idx: usize) -> std::result::Result<(), TestCaseError> {
        let n = [3usize, 5, 7, 9][n_idx];
        let k = k_raw % n.div_ceil(2);
        let lambda = Complex64::new(re, im);
        prop_assume!(fx.dirichlet.iter().all(|&x| (lambda - x).norm() >= 0.05));
        let direct = monodromy_direct_with(&fx.hill, lambda, k, n).unwrap();
        let m = fx.hill.transfer(lambda).unwrap();
        let closed = crate::lyapunov::monodromy_from_matrix(&m, &direct.sector).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let e = closed.entries[i][j];
                let err = (direct.entries[i][j] - e).norm();
                prop_assert!(err <= 1e-8f64.max(1e-8 * e.norm()), "entry ({i},{j}) err {err:e} λ={lambda}");
            }
        }
        let s = direct.sector;
        let trace = 2.0 * (delta0_from_matrix(&m) + s.s2()) / (s.s_pow_half * s.c);
        prop_assert!((direct.trace() - trace).norm() <= 1e-8 * trace.norm().max(1.0));
        Ok(())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn direct_agrees_free(re in -5.0f64..150.0, im in -3.0f64..3.0, k in 0usize..5, n in 0usize..4) {
            agreement(&fixtures()[0], re, im, k, n)?;
        }

        #[test]
        fn direct_agrees_cosine(re in -5.0f64..150.0, im in -3.0f64..3.0, k in 0usize..5, n in 0usize..4) {
            agreement(&fixtures()[1], re, im, k, n)?;
        }

        #[test]
        fn direct_agrees_step(re in -5.0f64..150.0, im in -3.0f64..3.0, k in 0usize..5, n in 0usize..4) {
            agreement(&fixtures()[2], re, im, k, n)?;
        }

        #[test]
        fn malk_holds(re in -5.0f64..100.0, k in 0usize..7) {
            let q = Potential::cosine(1.0);
            let r = malk_relations(&q, 7, k, Complex64::new(re, 0.0));
            if let Ok(r) = r {
                prop_assert!(r <= 1e-8, "residual {r:e}");
            }
        }
    }
}
