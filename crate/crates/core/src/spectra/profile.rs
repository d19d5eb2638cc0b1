//! Critical-point profile of an oscillating entire function on the real line.
//!
//! Between consecutive critical points the function is monotone, so every
//! level set is found by one bracketed solve per monotone piece. The profile
//! is built once per potential and reused for every level.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hill::{value_and_derivative, HillSolver, RealTransfer};
use crate::lyapunov::{delta0_minus_one, delta0_of, delta0_plus_five_quarters};
use crate::tolerances::Tolerances;

use super::scan_grid;

/// Which function of the transfer matrix is profiled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    /// The graph Lyapunov function `Δ₀`, oscillating between `≤ −5/4` and `≥ 1`.
    Delta0,
    /// The scalar Hill discriminant `Δ`, oscillating between `≤ −1` and `≥ 1`.
    Hill,
}

impl Curve {
    fn bounds(self) -> (f64, f64) {
        match self {
            Curve::Delta0 => (-1.25, 1.0),
            Curve::Hill => (-1.0, 1.0),
        }
    }

    fn value_real(self, m: &RealTransfer) -> f64 {
        match self {
            Curve::Delta0 => delta0_of(m.theta1, m.phi1, m.dtheta1, m.dphi1),
            Curve::Hill => m.delta(),
        }
    }

    fn value_complex(self, m: &crate::hill::TransferMatrix) -> Complex64 {
        match self {
            Curve::Delta0 => delta0_of(m.theta1, m.phi1, m.dtheta1, m.dphi1),
            Curve::Hill => m.delta(),
        }
    }

    /// `f(λ) − level`, using factored forms at the extreme levels where
    /// double roots make the direct difference lose all relative accuracy.
    pub(crate) fn level_gap(self, m: &RealTransfer, level: f64) -> f64 {
        const SNAP: f64 = 1e-12;
        match self {
            Curve::Delta0 if (level - 1.0).abs() < SNAP => {
                delta0_minus_one(m.theta1, m.phi1, m.dtheta1, m.dphi1) + (1.0 - level)
            }
            Curve::Delta0 if (level + 1.25).abs() < SNAP => {
                delta0_plus_five_quarters(m.theta1, m.phi1, m.dtheta1, m.dphi1) + (-1.25 - level)
            }
            Curve::Delta0 => self.value_real(m) - level,
            Curve::Hill => {
                let d = m.delta();
                let dm = m.delta_minus();
                // Δ² − 1 = Δ₋² + φ(1)ϑ'(1)
                let sq = dm * dm + m.phi1 * m.dtheta1;
                if (level - 1.0).abs() < SNAP && d > -0.5 {
                    sq / (d + 1.0) + (1.0 - level)
                } else if (level + 1.0).abs() < SNAP && d < 0.5 {
                    sq / (d - 1.0) + (-1.0 - level)
                } else {
                    d - level
                }
            }
        }
    }
}

/// A local extremum of the profiled function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    /// 1-based position; odd `n` are minima.
    pub n: usize,
    pub lambda: f64,
    pub value: f64,
    pub is_max: bool,
}

/// A root of `f = level` located in monotone piece `piece`.
///
/// Piece `p` runs from critical point `p` to `p + 1`, where critical point 0
/// stands for the lower cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PieceRoot {
    pub lambda: f64,
    pub piece: usize,
    /// The root sits on a critical point that touches the level.
    pub tangent: bool,
}

#[derive(Debug)]
pub struct Profile {
    pub curve: Curve,
    solver: Arc<HillSolver>,
    tol: Tolerances,
    /// Lower cutoff; no roots below it.
    pub floor: f64,
    pub crits: Vec<CriticalPoint>,
    /// Largest `λ` covered by the underlying scan.
    pub scan_end: f64,
}

const MAX_REFINEMENTS: usize = 4;
/// Level roots are refined well past `tol_root`: downstream residuals are scaled by `n`.
const ROOT_POLISH: f64 = 1e-4;
const FLOOR_DOUBLINGS: usize = 60;

impl Profile {
    pub fn build(solver: Arc<HillSolver>, curve: Curve, lambda_max: f64, tol: Tolerances) -> Result<Self> {
        if !(lambda_max > 0.0) {
            return Err(Error::Domain(format!("lambda_max must be positive, got {lambda_max}")));
        }
        let deriv = |l: f64| -> Result<(f64, f64)> {
            value_and_derivative(|z| Ok(curve.value_complex(&solver.transfer(z)?)), l)
        };

        let mut floor = -(4.0 + 2.0 * solver.potential().max_abs_bound());
        let mut found = false;
        for _ in 0..FLOOR_DOUBLINGS {
            let (v, d) = deriv(floor)?;
            if v > 2.0 && d < 0.0 {
                found = true;
                break;
            }
            floor *= 2.0;
        }
        if !found {
            return Err(Error::Bracket("no lower cutoff with a decreasing profile".into()));
        }

        // Two full oscillations of margin past lambda_max keep every piece
        // touching [floor, lambda_max] complete.
        let sqrt_end = lambda_max.sqrt() + 2.0 * PI;
        let mut last_err = None;
        for refinement in 0..MAX_REFINEMENTS {
            let scale = (1usize << refinement) as f64;
            let grid = scan_grid(floor, sqrt_end, 0.125 / scale, PI / 16.0 / scale);
            match Self::locate(&solver, curve, &grid, &deriv, tol) {
                Ok(crits) => {
                    return Ok(Profile {
                        curve,
                        solver,
                        tol,
                        floor,
                        crits,
                        scan_end: sqrt_end * sqrt_end,
                    })
                }
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.unwrap_or_else(|| Error::Labeling("profile could not be built".into())))
    }

    fn locate(
        solver: &HillSolver,
        curve: Curve,
        grid: &[f64],
        deriv: &dyn Fn(f64) -> Result<(f64, f64)>,
        tol: Tolerances,
    ) -> Result<Vec<CriticalPoint>> {
        let mut samples = Vec::with_capacity(grid.len());
        for &l in grid {
            samples.push((l, deriv(l)?.1));
        }
        let mut crits: Vec<CriticalPoint> = Vec::new();
        let mut i = 0;
        while i + 1 < samples.len() {
            let (a, da) = samples[i];
            let (b, db) = samples[i + 1];
            let at = if da == 0.0 {
                Some(a)
            } else if da * db < 0.0 {
                // Tangent roots sit exactly here, so refine to machine precision.
                let f = |l: f64| deriv(l).map(|x| x.1);
                Some(brent(f, a, b, da, db, 0.0)?)
            } else {
                None
            };
            if let Some(lambda) = at {
                if crits.last().is_none_or(|c| lambda > c.lambda) {
                    let value = curve.value_real(&solver.transfer_real(lambda)?);
                    let is_max = if da == 0.0 { db < 0.0 } else { da > 0.0 };
                    crits.push(CriticalPoint {
                        n: crits.len() + 1,
                        lambda,
                        value,
                        is_max,
                    });
                }
            }
            i += 1;
        }
        let (lo, hi) = curve.bounds();
        for c in &crits {
            if c.is_max != (c.n % 2 == 0) {
                return Err(Error::Labeling(format!(
                    "critical points do not alternate at n = {} (lambda = {})",
                    c.n, c.lambda
                )));
            }
            let slack = tol.f_at(c.lambda);
            if c.is_max && c.value < hi - slack {
                return Err(Error::Labeling(format!(
                    "maximum {} at lambda = {} lies below {hi}",
                    c.value, c.lambda
                )));
            }
            if !c.is_max && c.value > lo + slack {
                return Err(Error::Labeling(format!(
                    "minimum {} at lambda = {} lies above {lo}",
                    c.value, c.lambda
                )));
            }
        }
        if crits.len() < 2 {
            return Err(Error::Labeling("fewer than two critical points in range".into()));
        }
        Ok(crits)
    }

    pub fn solver(&self) -> &Arc<HillSolver> {
        &self.solver
    }

    /// Upper end of the last complete monotone piece.
    pub fn end(&self) -> f64 {
        self.crits.last().map_or(self.floor, |c| c.lambda)
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// `f(λ) − level` on the real path.
    pub fn gap_at(&self, lambda: f64, level: f64) -> Result<f64> {
        Ok(self.curve.level_gap(&self.solver.transfer_real(lambda)?, level))
    }

    pub fn value_at(&self, lambda: f64) -> Result<f64> {
        Ok(self.curve.value_real(&self.solver.transfer_real(lambda)?))
    }

    /// One root of `f = level` in each complete monotone piece.
    pub fn level_roots(&self, level: f64) -> Result<Vec<PieceRoot>> {
        let mut touching = Vec::with_capacity(self.crits.len());
        let mut gaps = Vec::with_capacity(self.crits.len());
        for c in &self.crits {
            let g = self.gap_at(c.lambda, level)?;
            let crosses = if c.is_max { g > 0.0 } else { g < 0.0 };
            touching.push(!crosses && g.abs() <= self.tol.tangent);
            gaps.push(g);
        }
        let floor_gap = self.gap_at(self.floor, level)?;
        let mut roots = Vec::with_capacity(self.crits.len());
        for p in 0..self.crits.len() {
            let (a, ga, a_touch) = if p == 0 {
                (self.floor, floor_gap, false)
            } else {
                (self.crits[p - 1].lambda, gaps[p - 1], touching[p - 1])
            };
            let (b, gb, b_touch) = (self.crits[p].lambda, gaps[p], touching[p]);
            let root = if a_touch {
                PieceRoot { lambda: a, piece: p, tangent: true }
            } else if b_touch {
                PieceRoot { lambda: b, piece: p, tangent: true }
            } else if ga * gb < 0.0 {
                let f = |l: f64| self.gap_at(l, level);
                let lambda = brent(f, a, b, ga, gb, ROOT_POLISH * self.tol.root_at(b))?;
                let residual = self.gap_at(lambda, level)?;
                if residual.abs() > self.tol.f_at(lambda) {
                    return Err(Error::Labeling(format!(
                        "level {level} root on piece {p} at lambda = {lambda} has residual {residual:e}"
                    )));
                }
                PieceRoot { lambda, piece: p, tangent: false }
            } else {
                return Err(Error::Labeling(format!(
                    "level {level} has no root on monotone piece {p} = [{a}, {b}] (values {ga:e}, {gb:e})"
                )));
            };
            roots.push(root);
        }
        Ok(roots)
    }
}

/// Brent's method on a bracket `[a, b]` with `f(a) = fa`, `f(b) = fb` of opposite sign.
pub fn brent<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::Bracket(format!("no sign change on [{a}, {b}]")));
    }
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(Error::Bracket(format!("Brent iteration did not converge near {b}")))
}
