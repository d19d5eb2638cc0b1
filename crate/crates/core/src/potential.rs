//! One-periodic potentials `q` on `[0, 1]` and the integral functionals the
//! spectral formulas consume.
//!
//! Three representations are supported:
//!
//! * piecewise constant, right-continuous at the breakpoints,
//! * a truncated real Fourier series `a0 + Σ a_n cos 2πnt + b_n sin 2πnt`,
//! * uniform samples on `t_i = i / (S - 1)` with linear interpolation.
//!
//! Integrals are exact for the first two representations and use composite
//! Simpson quadrature on the sample nodes for the third.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest Fourier harmonic accepted by [`Potential::fourier`].
pub const FOURIER_MAX_HARMONIC: usize = 128;

/// Number of probe points used by [`Potential::is_even`].
const EVEN_PROBES: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Piecewise { breakpoints: Vec<f64>, values: Vec<f64> },
    Fourier { a0: f64, a: Vec<f64>, b: Vec<f64> },
    Samples { values: Vec<f64> },
}

/// A real one-periodic potential.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    repr: Repr,
}

/// Constant-value cell of a piecewise potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

impl Potential {
    /// The zero potential.
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// The constant potential `q(t) = c`.
    pub fn constant(c: f64) -> Self {
        Potential {
            repr: Repr::Piecewise {
                breakpoints: vec![0.0, 1.0],
                values: vec![c],
            },
        }
    }

    /// Piecewise-constant potential with `values[i]` on `[breakpoints[i], breakpoints[i + 1])`.
    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidPotential("piecewise potential needs at least one cell".into()));
        }
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidPotential(format!(
                "expected {} breakpoints for {} values, got {}",
                values.len() + 1,
                values.len(),
                breakpoints.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidPotential("breakpoints must start at 0 and end at 1".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidPotential("breakpoints must be strictly increasing".into()));
        }
        check_finite(&values)?;
        Ok(Potential {
            repr: Repr::Piecewise { breakpoints, values },
        })
    }

    /// Fourier potential `a0 + Σ_{n≥1} a[n-1] cos 2πnt + b[n-1] sin 2πnt`.
    ///
    /// Without nonzero harmonics this is the constant `a0`, propagated exactly.
    pub fn fourier(a0: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() > FOURIER_MAX_HARMONIC || b.len() > FOURIER_MAX_HARMONIC {
            return Err(Error::InvalidPotential(format!(
                "Fourier harmonics are capped at n = {FOURIER_MAX_HARMONIC}"
            )));
        }
        check_finite(&[a0])?;
        check_finite(&a)?;
        check_finite(&b)?;
        if a.iter().chain(b.iter()).all(|&x| x == 0.0) {
            return Ok(Self::constant(a0));
        }
        Ok(Potential {
            repr: Repr::Fourier { a0, a, b },
        })
    }

    /// Samples on the uniform grid `t_i = i / (S - 1)`, `i = 0..S`.
    pub fn samples(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidPotential("samples need at least 3 values".into()));
        }
        check_finite(&values)?;
        Ok(Potential {
            repr: Repr::Samples { values },
        })
    }

    /// Convenience: `q(t) = amplitude · cos 2πt`.
    pub fn cosine(amplitude: f64) -> Self {
        Self::fourier(0.0, vec![amplitude], vec![]).expect("single harmonic is valid")
    }

    /// Convenience: `q(t) = amplitude · sin 2πt`.
    pub fn sine(amplitude: f64) -> Self {
        Self::fourier(0.0, vec![], vec![amplitude]).expect("single harmonic is valid")
    }

    /// Samples `f` on a uniform grid of `count` nodes including both endpoints.
    pub fn sampled_from(count: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let last = count.saturating_sub(1).max(1) as f64;
        Self::samples((0..count).map(|i| f(i as f64 / last)).collect())
    }

    /// `q + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let repr = match &self.repr {
            Repr::Piecewise { breakpoints, values } => Repr::Piecewise {
                breakpoints: breakpoints.clone(),
                values: values.iter().map(|v| v + c).collect(),
            },
            Repr::Fourier { a0, a, b } => Repr::Fourier {
                a0: a0 + c,
                a: a.clone(),
                b: b.clone(),
            },
            Repr::Samples { values } => Repr::Samples {
                values: values.iter().map(|v| v + c).collect(),
            },
        };
        Potential { repr }
    }

    pub fn kind(&self) -> &'static str {
        match self.repr {
            Repr::Piecewise { .. } => "piecewise",
            Repr::Fourier { .. } => "fourier",
            Repr::Samples { .. } => "samples",
        }
    }

    /// Cells of a piecewise-constant potential, `None` for other representations.
    pub fn cells(&self) -> Option<Vec<Cell>> {
        match &self.repr {
            Repr::Piecewise { breakpoints, values } => Some(
                values
                    .iter()
                    .zip(breakpoints.windows(2))
                    .map(|(&value, w)| Cell {
                        start: w[0],
                        end: w[1],
                        value,
                    })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Breakpoints of the intervals on which `q` is smooth.
    ///
    /// Numerical integrators align their steps with these points.
    pub fn smooth_breakpoints(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Piecewise { breakpoints, .. } => breakpoints.clone(),
            Repr::Fourier { .. } => vec![0.0, 1.0],
            Repr::Samples { values } => {
                let last = (values.len() - 1) as f64;
                (0..values.len()).map(|i| i as f64 / last).collect()
            }
        }
    }

    /// `q(t)` for `t ∈ [0, 1)`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [0, 1)")));
        }
        Ok(self.value_at(t))
    }

    /// `q(t)` for any real `t`, by periodic extension.
    pub fn value_at(&self, t: f64) -> f64 {
        let t = t - t.floor();
        match &self.repr {
            Repr::Piecewise { breakpoints, values } => {
                // Index of the last breakpoint <= t, right-continuous.
                let idx = breakpoints.partition_point(|&b| b <= t);
                values[idx.saturating_sub(1).min(values.len() - 1)]
            }
            Repr::Fourier { a0, a, b } => {
                let mut sum = *a0;
                for (n, an) in a.iter().enumerate() {
                    sum += an * (2.0 * PI * (n + 1) as f64 * t).cos();
                }
                for (n, bn) in b.iter().enumerate() {
                    sum += bn * (2.0 * PI * (n + 1) as f64 * t).sin();
                }
                sum
            }
            Repr::Samples { values } => {
                let cells = (values.len() - 1) as f64;
                let x = t * cells;
                let i = (x.floor() as usize).min(values.len() - 2);
                let frac = x - i as f64;
                values[i] * (1.0 - frac) + values[i + 1] * frac
            }
        }
    }

    /// `q(t)` with `t` known to lie in the smooth segment `[a, b]`.
    pub(crate) fn value_at_within(&self, t: f64, a: f64, b: f64) -> f64 {
        match &self.repr {
            Repr::Samples { values } => {
                let i = (a * (values.len() - 1) as f64).round() as usize;
                let frac = (t - a) / (b - a);
                values[i] * (1.0 - frac) + values[i + 1] * frac
            }
            _ => self.value_at(t),
        }
    }

    /// `q₀ = ∫₀¹ q(t) dt`.
    pub fn mean(&self) -> f64 {
        match &self.repr {
            Repr::Piecewise { breakpoints, values } => values
                .iter()
                .zip(breakpoints.windows(2))
                .map(|(v, w)| v * (w[1] - w[0]))
                .sum(),
            Repr::Fourier { a0, .. } => *a0,
            Repr::Samples { values } => simpson_nodes(values),
        }
    }

    /// `q̂_n = ∫₀¹ q(t) e^{i2πnt} dt`.
    pub fn fourier_coeff(&self, n: usize) -> Result<Complex64> {
        if n == 0 {
            return Err(Error::Domain("Fourier index must be >= 1".into()));
        }
        let omega = 2.0 * PI * n as f64;
        Ok(match &self.repr {
            Repr::Piecewise { breakpoints, values } => {
                let mut sum = Complex64::new(0.0, 0.0);
                for (v, w) in values.iter().zip(breakpoints.windows(2)) {
                    let e1 = Complex64::from_polar(1.0, omega * w[1]);
                    let e0 = Complex64::from_polar(1.0, omega * w[0]);
                    sum += *v * (e1 - e0) / Complex64::new(0.0, omega);
                }
                sum
            }
            Repr::Fourier { a, b, .. } => {
                let an = a.get(n - 1).copied().unwrap_or(0.0);
                let bn = b.get(n - 1).copied().unwrap_or(0.0);
                Complex64::new(an / 2.0, bn / 2.0)
            }
            Repr::Samples { values } => {
                let re = simpson_weighted(values, |t| (omega * t).cos());
                let im = simpson_weighted(values, |t| (omega * t).sin());
                Complex64::new(re, im)
            }
        })
    }

    /// `q̃_{cn} = ∫₀¹ q(t) cos(πnt) dt`.
    pub fn half_cosine_coeff(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("half-cosine index must be >= 1".into()));
        }
        let beta = PI * n as f64;
        Ok(match &self.repr {
            Repr::Piecewise { breakpoints, values } => values
                .iter()
                .zip(breakpoints.windows(2))
                .map(|(v, w)| v * ((beta * w[1]).sin() - (beta * w[0]).sin()) / beta)
                .sum(),
            Repr::Fourier { a, b, .. } => {
                // ∫ cos(2πmt) cos(πnt) and ∫ sin(2πmt) cos(πnt) over [0, 1] in closed form;
                // every frequency is an integer multiple of π, so sin(πj) = 0.
                let mut sum = 0.0;
                for (idx, am) in a.iter().enumerate() {
                    if 2 * (idx + 1) == n {
                        sum += am / 2.0;
                    }
                }
                for (idx, bm) in b.iter().enumerate() {
                    let m2 = 2 * (idx + 1) as i64;
                    let n = n as i64;
                    let mut term = 0.0;
                    for j in [m2 + n, m2 - n] {
                        if j != 0 && j % 2 != 0 {
                            // (1 - cos πj) / (πj) with j odd
                            term += 2.0 / (PI * j as f64);
                        }
                    }
                    sum += bm * term / 2.0;
                }
                sum
            }
            Repr::Samples { values } => simpson_weighted(values, |t| (beta * t).cos()),
        })
    }

    /// `true` iff `sup |q(t) - q(1 - t)| ≤ tol` over a probe grid.
    pub fn is_even(&self, tol: f64) -> bool {
        (0..EVEN_PROBES).all(|i| {
            let t = (i as f64 + 0.5) / EVEN_PROBES as f64;
            (self.value_at(t) - self.value_at(1.0 - t)).abs() <= tol
        })
    }

    /// Upper bound on `max |q|`.
    pub fn max_abs_bound(&self) -> f64 {
        match &self.repr {
            Repr::Piecewise { values, .. } | Repr::Samples { values } => {
                values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
            }
            Repr::Fourier { a0, a, b } => {
                a0.abs() + a.iter().map(|x| x.abs()).sum::<f64>() + b.iter().map(|x| x.abs()).sum::<f64>()
            }
        }
    }

    /// Serialize to the JSON potential format.
    pub fn to_spec(&self) -> PotentialSpec {
        let mut spec = PotentialSpec {
            kind: self.kind().to_string(),
            ..PotentialSpec::default()
        };
        match &self.repr {
            Repr::Piecewise { breakpoints, values } => {
                spec.breakpoints = Some(breakpoints.clone());
                spec.values = Some(values.clone());
            }
            Repr::Fourier { a0, a, b } => {
                spec.a0 = Some(*a0);
                spec.a = Some(a.clone());
                spec.b = Some(b.clone());
            }
            Repr::Samples { values } => spec.samples = Some(values.clone()),
        }
        spec
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: PotentialSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidPotential(e.to_string()))?;
        spec.build()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("potential spec serializes")
    }
}

/// On-disk JSON description of a potential.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
}

impl PotentialSpec {
    pub fn build(self) -> Result<Potential> {
        let reject = |present: bool, key: &str, kind: &str| -> Result<()> {
            if present {
                Err(Error::InvalidPotential(format!("key `{key}` is not valid for a {kind} potential")))
            } else {
                Ok(())
            }
        };
        match self.kind.as_str() {
            "piecewise" => {
                reject(self.a0.is_some(), "a0", "piecewise")?;
                reject(self.a.is_some(), "a", "piecewise")?;
                reject(self.b.is_some(), "b", "piecewise")?;
                reject(self.samples.is_some(), "samples", "piecewise")?;
                let breakpoints = self
                    .breakpoints
                    .ok_or_else(|| Error::InvalidPotential("piecewise potential needs `breakpoints`".into()))?;
                let values = self
                    .values
                    .ok_or_else(|| Error::InvalidPotential("piecewise potential needs `values`".into()))?;
                Potential::piecewise(breakpoints, values)
            }
            "fourier" => {
                reject(self.breakpoints.is_some(), "breakpoints", "fourier")?;
                reject(self.values.is_some(), "values", "fourier")?;
                reject(self.samples.is_some(), "samples", "fourier")?;
                Potential::fourier(
                    self.a0.unwrap_or(0.0),
                    self.a.unwrap_or_default(),
                    self.b.unwrap_or_default(),
                )
            }
            "samples" => {
                reject(self.breakpoints.is_some(), "breakpoints", "samples")?;
                reject(self.values.is_some(), "values", "samples")?;
                reject(self.a0.is_some(), "a0", "samples")?;
                reject(self.a.is_some(), "a", "samples")?;
                reject(self.b.is_some(), "b", "samples")?;
                let samples = self
                    .samples
                    .ok_or_else(|| Error::InvalidPotential("samples potential needs `samples`".into()))?;
                Potential::samples(samples)
            }
            other => Err(Error::InvalidPotential(format!("unknown potential type `{other}`"))),
        }
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidPotential("non-finite value".into()))
    }
}

/// Composite Simpson on equally spaced nodes covering `[0, 1]`.
///
/// An odd number of intervals closes with Simpson's 3/8 rule on the last three.
fn simpson_nodes(f: &[f64]) -> f64 {
    let intervals = f.len() - 1;
    let h = 1.0 / intervals as f64;
    let simpson = |f: &[f64]| -> f64 {
        let n = f.len() - 1;
        let mut s = f[0] + f[n];
        for (i, v) in f.iter().enumerate().take(n).skip(1) {
            s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        s * h / 3.0
    };
    if intervals.is_multiple_of(2) {
        simpson(f)
    } else if intervals == 1 {
        0.5 * h * (f[0] + f[1])
    } else {
        let split = intervals - 3;
        let head = if split > 0 { simpson(&f[..=split]) } else { 0.0 };
        let t = &f[split..];
        head + 3.0 * h / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3])
    }
}

fn simpson_weighted(values: &[f64], w: impl Fn(f64) -> f64) -> f64 {
    let last = (values.len() - 1) as f64;
    let f: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(i, v)| v * w(i as f64 / last))
        .collect();
    simpson_nodes(&f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step() -> Potential {
        Potential::piecewise(vec![0.0, 0.5, 1.0], vec![1.0, -1.0]).unwrap()
    }

    /// Composite Simpson on each smooth segment of `q`, with `f = q·w`.
    fn quad_on(q: &Potential, w: impl Fn(f64) -> f64) -> f64 {
        let n = 20_000;
        q.smooth_breakpoints()
            .windows(2)
            .map(|seg| {
                let (a, b) = (seg[0], seg[1]);
                let h = (b - a) / n as f64;
                // evaluate q inside the segment to respect right-continuity
                let f = |t: f64| q.value_at_within(t, a, b) * w(t);
                let qv = |t: f64| match q.cells() {
                    Some(_) => q.value_at(0.5 * (a + b)) * w(t),
                    None => f(t),
                };
                let mut s = qv(a) + qv(b);
                for i in 1..n {
                    s += if i % 2 == 1 { 4.0 } else { 2.0 } * qv(a + i as f64 * h);
                }
                s * h / 3.0
            })
            .sum()
    }

    fn quad(f: impl Fn(f64) -> f64) -> f64 {
        quad_on(&Potential::constant(1.0), f)
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(Potential::zero().evaluate(0.3).unwrap(), 0.0);
        let c = Potential::fourier(2.0, vec![], vec![]).unwrap();
        assert_eq!(c.evaluate(0.7).unwrap(), 2.0);
        assert_eq!(step().evaluate(0.5).unwrap(), -1.0);
        assert_eq!(step().evaluate(0.0).unwrap(), 1.0);
    }

    #[test]
    fn evaluate_rejects_outside_unit_interval() {
        assert!(matches!(step().evaluate(1.0), Err(Error::Domain(_))));
        assert!(matches!(step().evaluate(-0.1), Err(Error::Domain(_))));
        // periodic extension through value_at
        assert_eq!(step().value_at(1.0), 1.0);
        assert_eq!(step().value_at(1.75), -1.0);
    }

    #[test]
    fn mean_examples() {
        assert_eq!(Potential::zero().mean(), 0.0);
        assert_eq!(Potential::fourier(3.0, vec![5.0], vec![]).unwrap().mean(), 3.0);
        assert_eq!(step().mean(), 0.0);
        let s = Potential::sampled_from(2049, |t| 1.0 + (2.0 * PI * t).cos()).unwrap();
        assert!((s.mean() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fourier_coefficient_examples() {
        assert_eq!(Potential::zero().fourier_coeff(1).unwrap(), Complex64::new(0.0, 0.0));
        let c = Potential::cosine(1.0).fourier_coeff(1).unwrap();
        let oracle = quad(|t| (2.0 * PI * t).cos() * (2.0 * PI * t).cos());
        assert!((c.re - oracle).abs() < 1e-10 && c.im.abs() < 1e-15);
        assert!((c.re - 0.5).abs() < 1e-15);
        let s = Potential::sine(1.0).fourier_coeff(1).unwrap();
        assert!(s.re.abs() < 1e-15 && (s.im - 0.5).abs() < 1e-15);
        assert!(Potential::zero().fourier_coeff(0).is_err());
    }

    #[test]
    fn fourier_coefficients_agree_with_quadrature_for_all_representations() {
        let pw = Potential::piecewise(vec![0.0, 0.2, 0.7, 1.0], vec![1.5, -0.5, 2.0]).unwrap();
        let four = Potential::fourier(0.3, vec![0.2, -0.4], vec![0.7, 0.1, 0.05]).unwrap();
        for q in [&pw, &four] {
            for n in 1..=4 {
                let omega = 2.0 * PI * n as f64;
                let re = quad_on(q, |t| (omega * t).cos());
                let im = quad_on(q, |t| (omega * t).sin());
                let c = q.fourier_coeff(n).unwrap();
                assert!((c.re - re).abs() < 1e-12, "{} n={n}", q.kind());
                assert!((c.im - im).abs() < 1e-12, "{} n={n}", q.kind());
            }
        }
        let smp = Potential::sampled_from(2049, |t| four.value_at(t)).unwrap();
        for n in 1..=4 {
            let a = smp.fourier_coeff(n).unwrap();
            let b = four.fourier_coeff(n).unwrap();
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn half_cosine_examples() {
        assert_eq!(Potential::zero().half_cosine_coeff(3).unwrap(), 0.0);
        let s = Potential::sampled_from(2049, |t| (PI * t).cos()).unwrap();
        assert!((s.half_cosine_coeff(1).unwrap() - 0.5).abs() < 1e-10);
        assert!(Potential::constant(4.0).half_cosine_coeff(2).unwrap().abs() < 1e-15);
    }

    #[test]
    fn half_cosine_fourier_closed_form_matches_quadrature() {
        let four = Potential::fourier(0.3, vec![0.2, -0.4], vec![0.7, 0.1]).unwrap();
        for n in 1..=9 {
            let beta = PI * n as f64;
            let oracle = quad_on(&four, |t| (beta * t).cos());
            assert!((four.half_cosine_coeff(n).unwrap() - oracle).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn evenness() {
        assert!(Potential::cosine(1.0).is_even(1e-12));
        assert!(!Potential::sine(1.0).is_even(1e-12));
        assert!(Potential::zero().is_even(1e-12));
        let sym = Potential::piecewise(vec![0.0, 0.25, 0.75, 1.0], vec![1.0, 0.0, 1.0]).unwrap();
        assert!(sym.is_even(1e-12));
    }

    #[test]
    fn json_round_trip_and_rejection() {
        let q = Potential::from_json(r#"{"type":"piecewise","breakpoints":[0,0.5,1],"values":[1,-1]}"#).unwrap();
        assert_eq!(q, step());
        assert_eq!(Potential::from_json(&q.to_json()).unwrap(), q);
        let f = Potential::from_json(r#"{"type":"fourier","a0":1,"a":[0.5]}"#).unwrap();
        assert_eq!(f.mean(), 1.0);
        assert!(Potential::from_json(r#"{"type":"fourier","a0":1,"colour":2}"#).is_err());
        assert!(Potential::from_json(r#"{"type":"fourier","a0":1,"samples":[1,2,3]}"#).is_err());
        assert!(Potential::from_json(r#"{"type":"spline"}"#).is_err());
        assert!(Potential::from_json(r#"{"type":"piecewise","breakpoints":[0,0.6,0.5,1],"values":[1,2,3]}"#).is_err());
        assert!(Potential::from_json(r#"{"type":"piecewise","breakpoints":[0,0.9],"values":[1]}"#).is_err());
        let too_many = vec![0.0; FOURIER_MAX_HARMONIC + 1];
        assert!(Potential::fourier(0.0, too_many, vec![]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_potential() -> impl Strategy<Value = Potential> {
            prop_oneof![
                (prop::collection::vec(-3.0..3.0f64, 1..6), prop::collection::vec(0.05..1.0f64, 1..6)).prop_map(
                    |(values, widths)| {
                        let n = values.len().min(widths.len());
                        let total: f64 = widths[..n].iter().sum();
                        let mut bps = vec![0.0];
                        let mut acc = 0.0;
                        for w in &widths[..n - 1] {
                            acc += w / total;
                            bps.push(acc);
                        }
                        bps.push(1.0);
                        Potential::piecewise(bps, values[..n].to_vec()).unwrap()
                    }
                ),
                (-2.0..2.0f64, prop::collection::vec(-1.0..1.0f64, 0..4), prop::collection::vec(-1.0..1.0f64, 0..4))
                    .prop_map(|(a0, a, b)| Potential::fourier(a0, a, b).unwrap()),
            ]
        }

        proptest! {
            #[test]
            fn mean_shifts_with_constant(q in arb_potential(), c in -5.0..5.0f64) {
                prop_assert!((q.shifted(c).mean() - q.mean() - c).abs() < 1e-12);
            }

            #[test]
            fn even_potentials_have_real_coefficients(a0 in -2.0..2.0f64, a in prop::collection::vec(-1.0..1.0f64, 0..5)) {
                let q = Potential::fourier(a0, a, vec![]).unwrap();
                prop_assert!(q.is_even(1e-10));
                for n in 1..=6 {
                    prop_assert!(q.fourier_coeff(n).unwrap().im.abs() < 1e-10);
                }
            }

            #[test]
            fn json_round_trip(q in arb_potential()) {
                prop_assert_eq!(Potential::from_json(&q.to_json()).unwrap(), q);
            }
        }
    }
}
