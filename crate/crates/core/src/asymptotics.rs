//! Desk-scale checks of the large-`λ` laws for `Δ₀`, `Δ_−` and the spectral points.
//!
//! Each check builds a residual sequence whose boundedness or decay is the
//! numerical content of an asymptotic formula, then applies a trend test.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lyapunov::{delta0_free, SectorConstants};
use crate::potential::Potential;
use crate::spectra::{Sign, SpectralPoint, SpectralSolver};
use crate::Complex64;

/// Residuals at or below this value pass regardless of trend.
pub const EXACT_FLOOR: f64 = 1e-9;
const PROBE_OFFSET: f64 = 0.37;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    Delta0Tail,
    AntiperiodicTail,
    EvenGapTail,
    PeriodicKTail,
    ResonanceTail,
    OddGapTail,
    LevelRootTail,
    DeltaMinusTail,
}

impl Law {
    pub fn name(self) -> &'static str {
        match self {
            Law::Delta0Tail => "delta0_tail",
            Law::AntiperiodicTail => "antiperiodic_tail",
            Law::EvenGapTail => "even_gap_tail",
            Law::PeriodicKTail => "periodic_k_tail",
            Law::ResonanceTail => "resonance_tail",
            Law::OddGapTail => "odd_gap_tail",
            Law::LevelRootTail => "level_root_tail",
            Law::DeltaMinusTail => "delta_minus_tail",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `max ≤ 3 · median`, or a decreasing trend.
    Bounded,
    /// Median of the last third below the median of the first third, and no
    /// residual above ten times the first-third median.
    Decreasing,
}

impl Criterion {
    pub fn describe(self) -> &'static str {
        match self {
            Criterion::Bounded => "bounded: max <= 3 * median or decreasing trend",
            Criterion::Decreasing => "decreasing: median(last third) < median(first third), max <= 10 * median(first third)",
        }
    }

    pub fn holds(self, values: &[f64]) -> bool {
        if values.iter().any(|v| !v.is_finite()) {
            return false;
        }
        if values.iter().all(|&v| v <= EXACT_FLOOR) {
            return true;
        }
        match self {
            Criterion::Bounded => bounded(values) || decreasing(values),
            Criterion::Decreasing => decreasing(values),
        }
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn bounded(values: &[f64]) -> bool {
    let max = values.iter().copied().fold(0.0, f64::max);
    max <= 3.0 * median(values)
}

fn decreasing(values: &[f64]) -> bool {
    let third = values.len() / 3;
    if third == 0 {
        return false;
    }
    let first = median(&values[..third]);
    let last = median(&values[values.len() - third..]);
    let max = values.iter().copied().fold(0.0, f64::max);
    last < first && max <= 10.0 * first
}

/// Residual sequence of one asymptotic law and its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCheck {
    pub law: Law,
    pub n: Vec<usize>,
    pub residuals: Vec<f64>,
    pub pass: bool,
    pub criterion: Criterion,
}

impl AsymptoticCheck {
    fn new(law: Law, n: Vec<usize>, residuals: Vec<f64>, criterion: Criterion) -> Self {
        let pass = criterion.holds(&residuals);
        AsymptoticCheck { law, n, residuals, pass, criterion }
    }

    /// Same residuals judged on `residual · weight`.
    fn weighted(law: Law, n: Vec<usize>, residuals: Vec<f64>, weights: &[f64], criterion: Criterion) -> Self {
        let scaled: Vec<f64> = residuals.iter().zip(weights).map(|(r, w)| r * w).collect();
        let pass = criterion.holds(&scaled) || residuals.iter().all(|&r| r <= EXACT_FLOOR);
        AsymptoticCheck { law, n, residuals, pass, criterion }
    }

    pub fn verdict(&self) -> &'static str {
        if self.pass {
            "pass"
        } else {
            "fail"
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "law": self.law.name(),
            "n": self.n,
            "residual": self.residuals,
            "verdict": self.verdict(),
            "criterion": self.criterion.describe(),
        })
    }
}

fn check_range(range: &RangeInclusive<usize>, lo: usize, hi: usize) -> Result<()> {
    if range.is_empty() || *range.start() < lo || *range.end() > hi {
        return Err(Error::Domain(format!(
            "index range {}..={} outside {lo}..={hi}",
            range.start(),
            range.end()
        )));
    }
    Ok(())
}

/// `λ_max` that covers `√λ ≤ sqrt_max` after the potential shift.
fn cover(q: &Potential, sqrt_max: f64) -> f64 {
    (sqrt_max + 1.0).powi(2) + 2.0 * q.max_abs_bound() + 1.0
}

fn find(points: &[SpectralPoint], n: usize, sign: Sign) -> Result<f64> {
    points
        .iter()
        .find(|p| p.n == n && p.sign == Some(sign))
        .map(|p| p.lambda)
        .ok_or_else(|| Error::Labeling(format!("missing spectral point with index {n}{}", sign.symbol())))
}

/// `max_± n · |λ^± − model^±|`.
fn paired_residuals(
    points: &[SpectralPoint],
    range: &RangeInclusive<usize>,
    index: impl Fn(usize) -> usize,
    model: impl Fn(usize, Sign) -> f64,
) -> Result<Vec<f64>> {
    range
        .clone()
        .map(|n| {
            let mut worst: f64 = 0.0;
            for sign in [Sign::Minus, Sign::Plus] {
                let i = index(n);
                if i == 0 && sign == Sign::Minus {
                    continue;
                }
                let lambda = find(points, i, sign)?;
                worst = worst.max(n as f64 * (lambda - model(n, sign)).abs());
            }
            Ok(worst)
        })
        .collect()
}

/// `|λ| · |Δ₀ − Δ₀⁰ − (9q₀/8) sin 2√λ/√λ|` at `λ_n = (n + 0.37)²`, for `n ⊂ [5, 60]`.
pub fn check_delta0_tail(q: &Potential, range: RangeInclusive<usize>) -> Result<AsymptoticCheck> {
    check_range(&range, 5, 60)?;
    let solver = SpectralSolver::new(q.clone());
    let q0 = q.mean();
    let residuals = range
        .clone()
        .map(|n| {
            let w = n as f64 + PROBE_OFFSET;
            let lambda = w * w;
            let d0 = solver.delta0_real(lambda)?;
            let free = delta0_free(Complex64::new(lambda, 0.0)).re;
            Ok(lambda * (d0 - free - 9.0 * q0 / 8.0 * (2.0 * w).sin() / w).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(AsymptoticCheck::new(Law::Delta0Tail, range.collect(), residuals, Criterion::Bounded))
}

/// `n · |λ_{0,2n+1}^± − (π(2n+1)/2 ± arcsin(1/3))² − q₀|`.
pub fn check_antiperiodic_tail(q: &Potential, range: RangeInclusive<usize>) -> Result<AsymptoticCheck> {
    check_range(&range, 0, 200)?;
    let q0 = q.mean();
    let phi = (1.0f64 / 3.0).asin();
    let lambda_max = cover(q, PI * (*range.end() as f64 + 1.0));
    let solver = SpectralSolver::new(q.clone());
    let points = solver.antiperiodic_eigenvalues(&SectorConstants::new(0, 1)?, lambda_max)?;
    let residuals = paired_residuals(&points, &range, |n| 2 * n + 1, |n, s| {
        (PI * (2 * n + 1) as f64 / 2.0 + s.factor() * phi).powi(2) + q0
    })?;
    Ok(AsymptoticCheck::new(Law::AntiperiodicTail, range.collect(), residuals, Criterion::Decreasing))
}

/// `√(| |q̂_n|² − (Im q̂_n)²/9 |)`, the predicted half-width of `γ_{0,2n}`.
pub fn even_gap_half_width_model(q: &Potential, n: usize) -> Result<f64> {
    let qn = q.fourier_coeff(n)?;
    Ok((qn.norm_sqr() - qn.im * qn.im / 9.0).abs().sqrt())
}

/// Measured half-width `(λ_{0,2n}^+ − λ_{0,2n}^-)/2`.
pub fn even_gap_half_width(q: &Potential, n: usize) -> Result<f64> {
    let solver = SpectralSolver::new(q.clone());
    let points = solver.periodic_eigenvalues(&SectorConstants::new(0, 1)?, cover(q, PI * (n as f64 + 1.0)))?;
    Ok(0.5 * (find(&points, 2 * n, Sign::Plus)? - find(&points, 2 * n, Sign::Minus)?))
}

/// `n · |λ_{0,2n}^± − (πn)² − q₀ ∓ √(|q̂_n|² − q̂_{sn}²/9)|`.
pub fn check_even_gap_tail(q: &Potential, range: RangeInclusive<usize>) -> Result<AsymptoticCheck> {
    check_range(&range, 1, 200)?;
    let q0 = q.mean();
    let widths = range
        .clone()
        .map(|n| even_gap_half_width_model(q, n))
        .collect::<Result<Vec<f64>>>()?;
    let lo = *range.start();
    let solver = SpectralSolver::new(q.clone());
    let points = solver.periodic_eigenvalues(&SectorConstants::new(0, 1)?, cover(q, PI * (*range.end() as f64 + 1.0)))?;
    let residuals = paired_residuals(&points, &range, |n| 2 * n, |n, s| {
        (PI * n as f64).powi(2) + q0 + s.factor() * widths[n - lo]
    })?;
    Ok(AsymptoticCheck::new(Law::EvenGapTail, range.collect(), residuals, Criterion::Bounded))
}

/// `n · |λ_{k,2n}^± − (πn ± φ_k)² − q₀|` with `φ_k = ½ arccos((1 + 8 cos(2πk/N))/9)`.
pub fn check_periodic_k_tail(q: &Potential, n_chains: usize, k: usize, range: RangeInclusive<usize>) -> Result<AsymptoticCheck> {
    check_range(&range, 0, 200)?;
    let sector = SectorConstants::new(k, n_chains)?;
    let q0 = q.mean();
    let level = if k == 0 { 1.0 } else { sector.periodic_level() };
    let phi_k = 0.5 * ((1.0 + 8.0 * level) / 9.0).clamp(-1.0, 1.0).acos();
    let solver = SpectralSolver::new(q.clone());
    let points = solver.periodic_eigenvalues(&sector, cover(q, PI * (*range.end() as f64 + 1.0)))?;
    let residuals = paired_residuals(&points, &range, |n| 2 * n, |n, s| {
        (PI * n as f64 + s.factor() * phi_k).powi(2) + q0
    })?;
    Ok(AsymptoticCheck::new(Law::PeriodicKTail, range.collect(), residuals, Criterion::Decreasing))
}

/// `φ_{k,s} = ½ arccos((1 + (−1)^s 8c_k − 8s_k²)/9)`.
fn resonance_phase(sector: &SectorConstants, parity: usize) -> f64 {
    let sign = if parity.is_multiple_of(2) { 1.0 } else { -1.0 };
    0.5 * ((1.0 + sign * 8.0 * sector.c - 8.0 * sector.s2()) / 9.0).clamp(-1.0, 1.0).acos()
}

/// `n · |r_{k,n}^± − (πn/2 ± b_{k,n})² − q₀|` with `b_{k,2j} = φ_{k,0}` and `b_{k,2j+1} = π/2 − φ_{k,1}`.
pub fn check_resonance_tail(q: &Potential, n_chains: usize, k: usize, range: RangeInclusive<usize>) -> Result<AsymptoticCheck> {
    check_range(&range, 0, 400)?;
    let sector = SectorConstants::new(k, n_chains)?;
    if 3 * k == n_chains {
        return Err(Error::Domain(format!("resonance tail needs k != N/3, got k = {k}, N = {n_chains}")));
    }
    let q0 = q.mean();
    let b = [resonance_phase(&sector, 0), PI / 2.0 - resonance_phase(&sector, 1)];
    let solver = SpectralSolver::new(q.clone());
    let points = solver.resonances(&sector, cover(q, PI * (*range.end() as f64 / 2.0 + 1.0)))?;
    let residuals = paired_residuals(&points, &range, |n| n, |n, s| {
        (PI * n as f64 / 2.0 + s.factor() * b[n % 2]).powi(2) + q0
    })?;
    Ok(AsymptoticCheck::new(Law::ResonanceTail, range.collect(), residuals, Criterion::Decreasing))
}

/// `n · |r_{p,n}^± − π²n²/4 − q₀ ∓ |q̃_{cn}||` for odd `n`, `p = N/3`.
pub fn check_odd_gap_tail(q: &Potential, n_chains: usize, range: RangeInclusive<usize>) -> Result<AsymptoticCheck> {
    check_range(&range, 1, 400)?;
    if !n_chains.is_multiple_of(3) {
        return Err(Error::Domain(format!("odd gap tail needs 3 | N, got N = {n_chains}")));
    }
    let sector = SectorConstants::new(n_chains / 3, n_chains)?;
    let q0 = q.mean();
    let odd: Vec<usize> = range.clone().filter(|n| n % 2 == 1).collect();
    let solver = SpectralSolver::new(q.clone());
    let points = solver.resonances(&sector, cover(q, PI * (*range.end() as f64 / 2.0 + 1.0)))?;
    let mut residuals = Vec::with_capacity(odd.len());
    for &n in &odd {
        let w = q.half_cosine_coeff(n)?.abs();
        let base = PI * PI * (n * n) as f64 / 4.0 + q0;
        let mut worst: f64 = 0.0;
        for sign in [Sign::Minus, Sign::Plus] {
            let r = find(&points, n, sign)?;
            worst = worst.max(n as f64 * (r - base - sign.factor() * w).abs());
        }
        residuals.push(worst);
    }
    Ok(AsymptoticCheck::new(Law::OddGapTail, odd, residuals, Criterion::Decreasing))
}

/// `n² · |√z_n^± − u_n^± − q₀/(2u_n^±)|` with `u_n^± = πn ± ½ arccos((1 + 8c)/9)`.
pub fn check_level_root_tail(q: &Potential, c: f64, range: RangeInclusive<usize>) -> Result<AsymptoticCheck> {
    check_range(&range, 1, 200)?;
    if !(c > -1.25 && c < 1.0) {
        return Err(Error::LevelRange(c));
    }
    let q0 = q.mean();
    let u0 = 0.5 * ((1.0 + 8.0 * c) / 9.0).acos();
    let solver = SpectralSolver::new(q.clone());
    let set = solver.solve_level(c, cover(q, PI * (*range.end() as f64 + 1.0)))?;
    let residuals = range
        .clone()
        .map(|n| {
            let mut worst: f64 = 0.0;
            for sign in [Sign::Minus, Sign::Plus] {
                let z = set
                    .get(n, sign)
                    .ok_or_else(|| Error::Labeling(format!("missing root z_{n}{}", sign.symbol())))?;
                let u = PI * n as f64 + sign.factor() * u0;
                let nn = (n * n) as f64;
                worst = worst.max(nn * (z.sqrt() - u - q0 / (2.0 * u)).abs());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(AsymptoticCheck::new(Law::LevelRootTail, range.collect(), residuals, Criterion::Decreasing))
}

const GAUSS_NODES: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GAUSS_WEIGHTS: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// `∫₀¹ g(t) q(t) dt` by 8-point Gauss–Legendre on `panels` panels per smooth segment.
fn integrate_against(q: &Potential, panels: usize, g: impl Fn(f64) -> f64) -> f64 {
    let bps = q.smooth_breakpoints();
    let mut sum = 0.0;
    for seg in bps.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let h = (b - a) / panels as f64;
        for i in 0..panels {
            let mid = a + (i as f64 + 0.5) * h;
            for (x, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
                for t in [mid - 0.5 * h * x, mid + 0.5 * h * x] {
                    sum += 0.5 * h * w * g(t) * q.value_at_within(t, a, b);
                }
            }
        }
    }
    sum
}

/// `F(λ) = ∫₀¹ sin(√λ (1 − 2t)) q(t) dt` for `λ > 0`.
pub fn sine_transform(q: &Potential, lambda: f64) -> f64 {
    let w = lambda.max(0.0).sqrt();
    let panels = (w.ceil() as usize).max(16);
    integrate_against(q, panels, |t| (w * (1.0 - 2.0 * t)).sin())
}

/// `√λ · |Δ_−(λ) + F(λ)/(2√λ)|` at `λ_n = (n + 0.37)²`; the check is that this decays like `λ^{−1/2}`.
pub fn check_delta_minus_tail(q: &Potential, range: RangeInclusive<usize>) -> Result<AsymptoticCheck> {
    check_range(&range, 1, 200)?;
    let solver = SpectralSolver::new(q.clone());
    let mut residuals = Vec::new();
    let mut weights = Vec::new();
    for n in range.clone() {
        let w = n as f64 + PROBE_OFFSET;
        let lambda = w * w;
        let dm = solver.transfer_real(lambda)?.delta_minus();
        residuals.push(w * (dm + sine_transform(q, lambda) / (2.0 * w)).abs());
        weights.push(w);
    }
    Ok(AsymptoticCheck::weighted(Law::DeltaMinusTail, range.collect(), residuals, &weights, Criterion::Bounded))
}

/// The standard battery used by the CLI and the acceptance suite.
pub fn standard_suite(q: &Potential, n_hi: usize) -> Result<Vec<AsymptoticCheck>> {
    let n_hi = n_hi.max(8);
    let lo = 5.min(n_hi - 3);
    Ok(vec![
        check_delta0_tail(q, lo.max(5)..=n_hi.min(60))?,
        check_antiperiodic_tail(q, lo..=n_hi)?,
        check_even_gap_tail(q, lo..=n_hi)?,
        check_periodic_k_tail(q, 5, 1, lo..=n_hi)?,
        check_resonance_tail(q, 5, 2, lo..=n_hi)?,
        check_odd_gap_tail(q, 9, lo..=n_hi)?,
        check_level_root_tail(q, -0.5, lo..=n_hi)?,
        check_delta_minus_tail(q, lo..=n_hi)?,
    ])
}
