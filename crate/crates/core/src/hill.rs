//! Fundamental solutions of `-y'' + q y = λ y` on `[0, 1]` and the Hill
//! transfer matrix `M(λ) = [[ϑ(1), φ(1)], [ϑ'(1), φ'(1)]]`.
//!
//! Piecewise-constant potentials use the exact product of cell propagators.
//! Other potentials use the fourth-order Magnus integrator with Gauss points,
//! step doubling and Richardson extrapolation. Its exponential is closed form
//! because the Magnus generator is a traceless 2×2 matrix.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::{Cell, Potential};
use crate::scalar::{Field, Mat2};

/// Default relative accuracy of the transfer-matrix entries.
pub const DEFAULT_TOL_MATRIX: f64 = 1e-10;

const MIN_STEPS: usize = 512;
const MAX_STEPS: usize = 1 << 22;
const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Hill transfer matrix at one spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub theta1: Complex64,
    pub phi1: Complex64,
    pub dtheta1: Complex64,
    pub dphi1: Complex64,
    pub lambda: Complex64,
}

impl TransferMatrix {
    pub fn det(&self) -> Complex64 {
        self.theta1 * self.dphi1 - self.phi1 * self.dtheta1
    }

    /// `Δ = (φ'(1) + ϑ(1)) / 2`.
    pub fn delta(&self) -> Complex64 {
        (self.dphi1 + self.theta1) / 2.0
    }

    /// `Δ₋ = (φ'(1) - ϑ(1)) / 2`.
    pub fn delta_minus(&self) -> Complex64 {
        (self.dphi1 - self.theta1) / 2.0
    }

    fn from_mat(m: Mat2<Complex64>, lambda: Complex64) -> Self {
        TransferMatrix {
            theta1: m.a,
            phi1: m.b,
            dtheta1: m.c,
            dphi1: m.d,
            lambda,
        }
    }
}

/// Transfer matrix for real `λ`; entries are real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealTransfer {
    pub theta1: f64,
    pub phi1: f64,
    pub dtheta1: f64,
    pub dphi1: f64,
    pub lambda: f64,
}

impl RealTransfer {
    pub fn delta(&self) -> f64 {
        (self.dphi1 + self.theta1) / 2.0
    }

    pub fn delta_minus(&self) -> f64 {
        (self.dphi1 - self.theta1) / 2.0
    }

    pub fn to_complex(&self) -> TransferMatrix {
        TransferMatrix {
            theta1: self.theta1.into(),
            phi1: self.phi1.into(),
            dtheta1: self.dtheta1.into(),
            dphi1: self.dphi1.into(),
            lambda: self.lambda.into(),
        }
    }
}

/// `Δ` and `Δ₋` of the same transfer matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillDiscriminants {
    pub delta: Complex64,
    pub delta_minus: Complex64,
    pub lambda: Complex64,
}

/// Values `(ϑ, φ, ϑ', φ')` at a point `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fundamental {
    pub theta: Complex64,
    pub phi: Complex64,
    pub dtheta: Complex64,
    pub dphi: Complex64,
}

/// One Magnus step: width and potential values at the two Gauss points.
#[derive(Debug, Clone, Copy)]
struct Step {
    h: f64,
    q1: f64,
    q2: f64,
}

/// Reusable propagator for a fixed potential.
///
/// Gauss-point potential values are cached per step count, so repeated
/// evaluations at many `λ` only pay for the matrix products.
#[derive(Debug)]
pub struct HillSolver {
    potential: Potential,
    cells: Option<Vec<Cell>>,
    breakpoints: Vec<f64>,
    tol: f64,
    steps: RwLock<HashMap<usize, Arc<Vec<Step>>>>,
}

impl Clone for HillSolver {
    fn clone(&self) -> Self {
        HillSolver::with_tolerance(self.potential.clone(), self.tol)
    }
}

impl HillSolver {
    pub fn new(potential: Potential) -> Self {
        Self::with_tolerance(potential, DEFAULT_TOL_MATRIX)
    }

    pub fn with_tolerance(potential: Potential, tol: f64) -> Self {
        HillSolver {
            cells: potential.cells(),
            breakpoints: potential.smooth_breakpoints(),
            potential,
            tol,
            steps: RwLock::new(HashMap::new()),
        }
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Transfer matrix at complex `λ`.
    pub fn transfer(&self, lambda: Complex64) -> Result<TransferMatrix> {
        Ok(TransferMatrix::from_mat(self.monodromy(lambda)?, lambda))
    }

    /// Transfer matrix at real `λ`, on the real arithmetic path.
    pub fn transfer_real(&self, lambda: f64) -> Result<RealTransfer> {
        let m = self.monodromy(lambda)?;
        Ok(RealTransfer {
            theta1: m.a,
            phi1: m.b,
            dtheta1: m.c,
            dphi1: m.d,
            lambda,
        })
    }

    pub fn discriminants(&self, lambda: Complex64) -> Result<HillDiscriminants> {
        let m = self.transfer(lambda)?;
        Ok(HillDiscriminants {
            delta: m.delta(),
            delta_minus: m.delta_minus(),
            lambda,
        })
    }

    /// Forces the generic integrator even for piecewise-constant potentials.
    pub fn transfer_integrated(&self, lambda: Complex64) -> Result<TransferMatrix> {
        Ok(TransferMatrix::from_mat(self.integrate(lambda)?, lambda))
    }

    fn monodromy<T: Field>(&self, lambda: T) -> Result<Mat2<T>> {
        match &self.cells {
            Some(cells) => Ok(exact_product(cells, lambda, 1.0)),
            None => self.integrate(lambda),
        }
    }

    fn step_table(&self, n: usize) -> Arc<Vec<Step>> {
        if let Some(t) = self.steps.read().expect("step cache poisoned").get(&n) {
            return t.clone();
        }
        let table = Arc::new(build_steps(&self.potential, &self.breakpoints, 1.0, n));
        self.steps
            .write()
            .expect("step cache poisoned")
            .entry(n)
            .or_insert(table)
            .clone()
    }

    fn integrate<T: Field>(&self, lambda: T) -> Result<Mat2<T>> {
        let mut n = initial_steps(lambda.modulus());
        let mut coarse = magnus_product(&self.step_table(n), lambda);
        let mut achieved = f64::INFINITY;
        while n <= MAX_STEPS {
            n *= 2;
            let fine = magnus_product(&self.step_table(n), lambda);
            let diff = fine.max_diff(&coarse);
            let scale = fine.max_modulus().max(1.0);
            achieved = diff / scale;
            if diff <= self.tol * scale {
                // Symmetric method: the leading error term is h^4.
                return Ok(fine.lerp_extrapolate(&coarse, 1.0 / 15.0));
            }
            coarse = fine;
        }
        Err(Error::Accuracy {
            lambda: format!("{:?}", lambda),
            target: self.tol,
            achieved,
        })
    }

    /// `(ϑ, φ, ϑ', φ')` at `x ∈ [0, 1]`.
    pub fn fundamental_at(&self, lambda: Complex64, x: f64) -> Result<Fundamental> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
        }
        let m = if x == 0.0 {
            Mat2::identity()
        } else if let Some(cells) = &self.cells {
            exact_product(cells, lambda, x)
        } else if x == 1.0 {
            self.integrate(lambda)?
        } else {
            self.integrate_to(lambda, x)?
        };
        Ok(Fundamental {
            theta: m.a,
            phi: m.b,
            dtheta: m.c,
            dphi: m.d,
        })
    }

    fn integrate_to(&self, lambda: Complex64, x: f64) -> Result<Mat2<Complex64>> {
        let mut pts: Vec<f64> = self.breakpoints.iter().copied().filter(|&b| b < x).collect();
        pts.push(x);
        let mut n = initial_steps(lambda.norm());
        let mut coarse = magnus_product(&build_steps(&self.potential, &pts, x, n), lambda);
        let mut achieved = f64::INFINITY;
        while n <= MAX_STEPS {
            n *= 2;
            let fine = magnus_product(&build_steps(&self.potential, &pts, x, n), lambda);
            let diff = fine.max_diff(&coarse);
            let scale = fine.max_modulus().max(1.0);
            achieved = diff / scale;
            if diff <= self.tol * scale {
                return Ok(fine.lerp_extrapolate(&coarse, 1.0 / 15.0));
            }
            coarse = fine;
        }
        Err(Error::Accuracy {
            lambda: format!("{lambda}"),
            target: self.tol,
            achieved,
        })
    }
}

fn initial_steps(lambda_abs: f64) -> usize {
    let n = MIN_STEPS.max((8.0 * lambda_abs.sqrt()).ceil() as usize);
    n.next_power_of_two()
}

/// Distributes about `n·(b - a)/span` steps over each smooth segment `[a, b]`.
fn build_steps(q: &Potential, breakpoints: &[f64], span: f64, n: usize) -> Vec<Step> {
    let g1 = 0.5 - SQRT3 / 6.0;
    let g2 = 0.5 + SQRT3 / 6.0;
    let mut steps = Vec::with_capacity(n + breakpoints.len());
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        let count = ((n as f64) * (b - a) / span).ceil().max(1.0) as usize;
        let h = (b - a) / count as f64;
        for i in 0..count {
            let t = a + i as f64 * h;
            steps.push(Step {
                h,
                q1: q.value_at_within(t + g1 * h, a, b),
                q2: q.value_at_within(t + g2 * h, a, b),
            });
        }
    }
    steps
}

fn magnus_product<T: Field>(steps: &[Step], lambda: T) -> Mat2<T> {
    let mut m = Mat2::<T>::identity();
    let k = SQRT3 / 12.0;
    for s in steps {
        let delta = k * s.h * s.h * (s.q1 - s.q2);
        let abar = T::from_real(0.5 * (s.q1 + s.q2)) - lambda;
        // Ω = [[δ, h], [h·ā, -δ]], Ω² = (δ² + h²ā) I
        let x = -(abar * (s.h * s.h) + T::from_real(delta * delta));
        let c = x.cosq();
        let sn = x.sincq();
        let e = Mat2 {
            a: c + sn * delta,
            b: sn * s.h,
            c: sn * abar * s.h,
            d: c - sn * delta,
        };
        m = e.mul(&m);
    }
    m
}

/// Ordered product of exact cell propagators on `[0, x]`.
fn exact_product<T: Field>(cells: &[Cell], lambda: T, x: f64) -> Mat2<T> {
    let mut m = Mat2::<T>::identity();
    for cell in cells {
        if cell.start >= x {
            break;
        }
        let len = cell.end.min(x) - cell.start;
        let mu = lambda - T::from_real(cell.value);
        let arg = mu * (len * len);
        let c = arg.cosq();
        let s = arg.sincq();
        let p = Mat2 {
            a: c,
            b: s * len,
            c: -(mu * s * len),
            d: c,
        };
        m = p.mul(&m);
    }
    m
}

/// Transfer matrix of `q` at `λ`.
pub fn transfer_matrix(q: &Potential, lambda: Complex64) -> Result<TransferMatrix> {
    HillSolver::new(q.clone()).transfer(lambda)
}

/// `(ϑ, φ, ϑ', φ')` at `x ∈ [0, 1]`.
pub fn fundamental_at(q: &Potential, lambda: Complex64, x: f64) -> Result<Fundamental> {
    HillSolver::new(q.clone()).fundamental_at(lambda, x)
}

pub fn discriminants(q: &Potential, lambda: Complex64) -> Result<HillDiscriminants> {
    HillSolver::new(q.clone()).discriminants(lambda)
}

/// Derivative order accepted by [`dderivative`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

/// Complex-step step size at `λ`.
pub fn complex_step(lambda: f64) -> f64 {
    1e-100 * lambda.abs().max(1.0)
}

/// `f(λ)` and `f'(λ)` from one complex evaluation.
pub fn value_and_derivative<F>(f: F, lambda: f64) -> Result<(f64, f64)>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let h = complex_step(lambda);
    let z = f(Complex64::new(lambda, h))?;
    Ok((z.re, z.im / h))
}

/// Derivative of an entire `f` at real `λ` by complex-step differentiation.
///
/// The second derivative is a central difference of complex-step first
/// derivatives.
pub fn dderivative<F>(f: F, lambda: f64, order: Order) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    let first = |x: f64| {
        let h = complex_step(x);
        f(Complex64::new(x, h)).im / h
    };
    match order {
        Order::First => first(lambda),
        Order::Second => {
            let h = 1e-4 * lambda.abs().max(1.0);
            (first(lambda + h) - first(lambda - h)) / (2.0 * h)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn close(a: Complex64, b: f64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn free_transfer_examples() {
        let m = transfer_matrix(&Potential::zero(), c(PI * PI)).unwrap();
        assert!(close(m.theta1, -1.0, 1e-14) && close(m.phi1, 0.0, 1e-14));
        assert!(close(m.dtheta1, 0.0, 1e-13) && close(m.dphi1, -1.0, 1e-14));
        let m = transfer_matrix(&Potential::zero(), c(-1.0)).unwrap();
        let (ch, sh) = (1f64.cosh(), 1f64.sinh());
        assert!(close(m.theta1, ch, 1e-14) && close(m.phi1, sh, 1e-14));
        assert!(close(m.dtheta1, sh, 1e-14) && close(m.dphi1, ch, 1e-14));
        let m = transfer_matrix(&Potential::constant(2.0), c(PI * PI + 2.0)).unwrap();
        assert!(close(m.theta1, -1.0, 1e-13) && close(m.phi1, 0.0, 1e-13));
        assert!(close(m.dtheta1, 0.0, 1e-12) && close(m.dphi1, -1.0, 1e-13));
    }

    #[test]
    fn integrator_matches_free_closed_form() {
        // A Fourier potential with no harmonics forces the generic path.
        let q = Potential::fourier(0.0, vec![], vec![]).unwrap();
        let solver = HillSolver::new(q);
        for &l in &[-30.0, -1.0, 0.0, 2.5, PI * PI, 400.0] {
            let m = solver.transfer(c(l)).unwrap();
            let w = Complex64::new(l, 0.0).sqrt();
            assert!((m.theta1 - w.cos()).norm() < 1e-10 * l.abs().sqrt().cosh().max(1.0));
        }
    }

    #[test]
    fn fundamental_examples() {
        let q = Potential::cosine(1.0);
        let f = fundamental_at(&q, c(3.0), 0.0).unwrap();
        assert_eq!((f.theta, f.phi, f.dtheta, f.dphi), (c(1.0), c(0.0), c(0.0), c(1.0)));
        let f = fundamental_at(&Potential::zero(), c(PI * PI), 0.5).unwrap();
        assert!(close(f.theta, 0.0, 1e-14) && close(f.phi, 1.0 / PI, 1e-14));
        assert!(close(f.dtheta, -PI, 1e-13) && close(f.dphi, 0.0, 1e-14));
        let f = fundamental_at(&Potential::zero(), c(0.0), 0.3).unwrap();
        assert!(close(f.theta, 1.0, 1e-15) && close(f.phi, 0.3, 1e-15));
        assert!(close(f.dtheta, 0.0, 1e-15) && close(f.dphi, 1.0, 1e-15));
        assert!(fundamental_at(&q, c(1.0), 1.2).is_err());
    }

    #[test]
    fn fundamental_at_one_matches_transfer() {
        let q = Potential::fourier(0.2, vec![1.0], vec![0.5]).unwrap();
        let solver = HillSolver::new(q);
        let lam = Complex64::new(7.0, 1.5);
        let m = solver.transfer(lam).unwrap();
        let f = solver.fundamental_at(lam, 1.0).unwrap();
        assert!((m.phi1 - f.phi).norm() < 1e-12);
        // interior point integrated both ways: to x and then by the rest
        let mid = solver.fundamental_at(lam, 0.37).unwrap();
        assert!(mid.theta.norm() > 0.0);
    }

    #[test]
    fn discriminant_examples() {
        let d = discriminants(&Potential::zero(), c(PI * PI / 4.0)).unwrap();
        assert!(d.delta.norm() < 1e-15 && d.delta_minus.norm() < 1e-15);
        let d = discriminants(&Potential::zero(), c(PI * PI)).unwrap();
        assert!(close(d.delta, -1.0, 1e-14) && d.delta_minus.norm() < 1e-14);
        let d = discriminants(&Potential::cosine(1.0), c(10.0)).unwrap();
        assert!(d.delta_minus.norm() < 1e-9);
    }

    #[test]
    fn dderivative_examples() {
        let d0 = |z: Complex64| (9.0 * (2.0 * z.sqrt()).cos() - 1.0) / 8.0;
        assert!(dderivative(d0, PI * PI / 4.0, Order::First).abs() < 1e-14);
        assert!((dderivative(|z| z * z, 3.0, Order::First) - 6.0).abs() < 1e-14);
        assert!((dderivative(|z| z * z, 3.0, Order::Second) - 2.0).abs() < 1e-6);
        let solver = HillSolver::new(Potential::zero());
        let delta = |z: Complex64| solver.transfer(z).unwrap().delta();
        assert!(dderivative(delta, PI * PI, Order::First).abs() < 1e-14);
        // generic f: cos √λ has derivative -sin√λ/(2√λ)
        let l = 2.3f64;
        let d = dderivative(|z| z.sqrt().cos(), l, Order::First);
        assert!((d + l.sqrt().sin() / (2.0 * l.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn complex_step_through_integrator_matches_finite_difference() {
        let solver = HillSolver::new(Potential::cosine(2.0));
        let l = 11.0;
        let (_, d) = value_and_derivative(|z| Ok(solver.transfer(z)?.delta()), l).unwrap();
        let h = 1e-5;
        let fd = (solver.transfer_real(l + h).unwrap().delta() - solver.transfer_real(l - h).unwrap().delta())
            / (2.0 * h);
        assert!((d - fd).abs() < 1e-7, "{d} {fd}");
    }

    #[test]
    fn piecewise_exact_and_integrated_agree() {
        let q = Potential::piecewise(vec![0.0, 0.3, 0.8, 1.0], vec![2.0, -1.0, 4.0]).unwrap();
        let solver = HillSolver::new(q);
        for &l in &[-20.0, 0.5, 13.0, 150.0] {
            let lam = Complex64::new(l, 0.3);
            let a = solver.transfer(lam).unwrap();
            let b = solver.transfer_integrated(lam).unwrap();
            assert!((a.theta1 - b.theta1).norm() < 1e-9);
            assert!((a.phi1 - b.phi1).norm() < 1e-9);
            assert!((a.dtheta1 - b.dtheta1).norm() < 1e-9);
            assert!((a.dphi1 - b.dphi1).norm() < 1e-9);
        }
    }

    #[test]
    fn real_path_matches_complex_path() {
        let solver = HillSolver::new(Potential::fourier(0.0, vec![1.0, 0.3], vec![0.4]).unwrap());
        for &l in &[-15.0, 0.0, 5.0, 90.0] {
            let r = solver.transfer_real(l).unwrap();
            let z = solver.transfer(c(l)).unwrap();
            assert!((z.theta1 - r.theta1).norm() < 1e-13 * r.theta1.abs().max(1.0));
            assert!(z.dphi1.im.abs() < 1e-15);
        }
    }

    #[test]
    fn sampled_potential_tracks_fourier() {
        let f = Potential::cosine(1.5);
        let s = Potential::sampled_from(4097, |t| f.value_at(t)).unwrap();
        let a = transfer_matrix(&f, c(20.0)).unwrap();
        let b = transfer_matrix(&s, c(20.0)).unwrap();
        // linear interpolation error O(1/S²)
        assert!((a.delta() - b.delta()).norm() < 1e-5);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn wronskian_is_one(re in -50.0..400.0f64, im in -5.0..5.0f64, amp in -3.0..3.0f64) {
                for q in [Potential::cosine(amp), Potential::piecewise(vec![0.0, 0.4, 1.0], vec![amp, -amp]).unwrap()] {
                    let m = transfer_matrix(&q, Complex64::new(re, im)).unwrap();
                    let scale = m.theta1.norm().max(m.dphi1.norm()).max(1.0);
                    prop_assert!((m.det() - 1.0).norm() < 1e-10 * scale * scale);
                }
            }

            #[test]
            fn shift_covariance(re in -30.0..300.0f64, im in -3.0..3.0f64, shift in -4.0..4.0f64) {
                let q = Potential::fourier(0.0, vec![1.0], vec![0.5]).unwrap();
                let lam = Complex64::new(re, im);
                let a = transfer_matrix(&q.shifted(shift), lam).unwrap();
                let b = transfer_matrix(&q, lam - shift).unwrap();
                let scale = a.theta1.norm().max(a.dtheta1.norm()).max(1.0);
                prop_assert!((a.theta1 - b.theta1).norm() < 1e-10 * scale);
                prop_assert!((a.phi1 - b.phi1).norm() < 1e-10 * scale);
                prop_assert!((a.dtheta1 - b.dtheta1).norm() < 1e-10 * scale);
                prop_assert!((a.dphi1 - b.dphi1).norm() < 1e-10 * scale);
            }

            #[test]
            fn real_lambda_gives_real_entries(l in -40.0..300.0f64) {
                let m = transfer_matrix(&Potential::sine(1.3), Complex64::new(l, 0.0)).unwrap();
                for e in [m.theta1, m.phi1, m.dtheta1, m.dphi1] {
                    prop_assert!(e.im == 0.0);
                }
            }

            #[test]
            fn square_root_branch_is_harmless(re in 0.5..200.0f64, im in -2.0..2.0f64) {
                // The entries depend on √λ only through even functions.
                let lam = Complex64::new(re, im);
                let w = lam.sqrt();
                let (c1, c2) = ((w).cos(), (-w).cos());
                let (s1, s2) = ((w).sin() / w, (-w).sin() / (-w));
                prop_assert!((c1 - c2).norm() < 1e-12 * c1.norm().max(1.0));
                prop_assert!((s1 - s2).norm() < 1e-12 * s1.norm().max(1.0));
                let m = transfer_matrix(&Potential::zero(), lam).unwrap();
                prop_assert!((m.theta1 - c1).norm() < 1e-12 * c1.norm().max(1.0));
            }
        }
    }

    #[test]
    fn large_lambda_asymptotics_of_dphi_are_bounded() {
        // φ'(1,λ) = cos√λ + sin√λ/(2√λ)·∫q + O(e^{|Im√λ|}/λ); q = cos 2πt has ∫q = 0.
        let q = Potential::cosine(1.0);
        let mut scaled = Vec::new();
        for j in 0..=10 {
            let l = ((20 + j) as f64).powi(2);
            let m = transfer_matrix(&q, c(l)).unwrap();
            let dev = (m.dphi1.re - l.sqrt().cos()).abs() * l;
            scaled.push(dev);
        }
        let max = scaled.iter().cloned().fold(0.0, f64::max);
        assert!(max < 10.0, "{scaled:?}");
    }
}
