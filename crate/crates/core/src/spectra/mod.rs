//! Spectral points, bands and gaps of the zigzag operator.
//!
//! Every spectral point is a real root of `Δ₀(λ) = c` for one of the levels
//!
//! * `1` and `cos(2πk/N)`: periodic eigenvalues `λ_{k,2n}^±`,
//! * `−1`: anti-periodic eigenvalues `λ_{k,2n+1}^±`, shared by all sectors,
//! * `c_k − s_k²` and `−c_k − s_k²`: resonances `r_{k,2n}^±`, `r_{k,2n+1}^±`.
//!
//! The flat bands are the Dirichlet eigenvalues, the zeros of `φ(1, λ)`.

mod bands;
mod output;
pub mod profile;

use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hill::{HillSolver, RealTransfer};
use crate::lyapunov::SectorConstants;
use crate::potential::Potential;
use crate::tolerances::Tolerances;

pub use bands::{BandStructure, GapKind, GlobalBand, GlobalGap, Interval, SectorBands};
pub use profile::{CriticalPoint, Curve, PieceRoot};

use profile::{brent, Profile};

/// Lowest admissible level; below it real roots are not guaranteed.
pub const LEVEL_MIN: f64 = -1.25;
pub const LEVEL_MAX: f64 = 1.0;
const LEVEL_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

impl Sign {
    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Minus => "-",
            Sign::Plus => "+",
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }
}

/// One labeled root of a level set `Δ₀ = c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelRoot {
    pub lambda: f64,
    pub n: usize,
    pub sign: Sign,
    /// Member of a double root (closed gap).
    pub coincident: bool,
    /// Monotone piece of `Δ₀` holding the root.
    pub piece: usize,
}

/// Sorted real roots of `Δ₀(λ) = level` with labels `z_0^+ < z_1^- < z_1^+ < …`.
///
/// At the bottom level `−5/4` the roots come in pairs `z_n^-, z_n^+`, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRootSet {
    pub level: f64,
    pub roots: Vec<LevelRoot>,
}

impl LevelRootSet {
    pub fn lambdas(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.lambda).collect()
    }

    pub fn get(&self, n: usize, sign: Sign) -> Option<f64> {
        self.roots
            .iter()
            .find(|r| r.n == n && r.sign == sign)
            .map(|r| r.lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Periodic,
    Antiperiodic,
    Resonance,
    Dirichlet,
    Neumann,
    Critical,
    Delta0Zero,
}

impl PointKind {
    pub fn name(self) -> &'static str {
        match self {
            PointKind::Periodic => "periodic",
            PointKind::Antiperiodic => "antiperiodic",
            PointKind::Resonance => "resonance",
            PointKind::Dirichlet => "dirichlet",
            PointKind::Neumann => "neumann",
            PointKind::Critical => "critical",
            PointKind::Delta0Zero => "delta0_zero",
        }
    }
}

/// A labeled spectral point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub kind: PointKind,
    pub k: Option<usize>,
    pub n: usize,
    pub sign: Option<Sign>,
    pub lambda: f64,
}

/// Critical points `λ_{0,n}` of `Δ₀` and the zeros `η_{0,n}` of `Δ₀` interlacing them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalData {
    pub critical: Vec<(usize, f64, f64)>,
    pub zeros: Vec<f64>,
}

/// A gap `(λ_n^-, λ_n^+)` of the scalar Hill operator, possibly empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillGap {
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
}

/// `(q₀, κ_n, h_n)` with `μ_n = π²n² + q₀ + κ_n` and `h_n = log|φ'(1, μ_n)|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardData {
    pub q0: f64,
    pub mu: Vec<f64>,
    pub kappa: Vec<f64>,
    pub h: Vec<f64>,
}

/// Which index parity a level carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Parity {
    Even,
    Odd,
}

/// `(n, sign)` of the root in monotone piece `p` for a level of the given parity.
fn spectral_label(parity: Parity, p: usize) -> (usize, Sign) {
    match parity {
        Parity::Even if p == 0 => (0, Sign::Plus),
        Parity::Even if p % 2 == 1 => (p + 1, Sign::Minus),
        Parity::Even => (p, Sign::Plus),
        Parity::Odd if p.is_multiple_of(2) => (p + 1, Sign::Minus),
        Parity::Odd => (p, Sign::Plus),
    }
}

/// Spectral computations for one potential, with cached profiles.
#[derive(Debug)]
pub struct SpectralSolver {
    hill: Arc<HillSolver>,
    tol: Tolerances,
    workers: usize,
    profiles: Mutex<Vec<Arc<Profile>>>,
}

impl SpectralSolver {
    pub fn new(q: Potential) -> Self {
        Self::with_tolerances(q, Tolerances::default())
    }

    pub fn with_tolerances(q: Potential, tol: Tolerances) -> Self {
        SpectralSolver {
            hill: Arc::new(HillSolver::with_tolerance(q, tol.matrix)),
            tol,
            workers: 1,
            profiles: Mutex::new(Vec::new()),
        }
    }

    /// Number of threads used to solve independent level sets.
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn potential(&self) -> &Potential {
        self.hill.potential()
    }

    pub fn hill(&self) -> &Arc<HillSolver> {
        &self.hill
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    pub fn transfer_real(&self, lambda: f64) -> Result<RealTransfer> {
        self.hill.transfer_real(lambda)
    }

    pub fn delta0_real(&self, lambda: f64) -> Result<f64> {
        let m = self.hill.transfer_real(lambda)?;
        Ok(crate::lyapunov::delta0_of(m.theta1, m.phi1, m.dtheta1, m.dphi1))
    }

    fn profile(&self, curve: Curve, lambda_max: f64) -> Result<Arc<Profile>> {
        let needed = (lambda_max.sqrt() + 2.0 * PI).powi(2);
        {
            let cache = self.profiles.lock().expect("profile cache poisoned");
            if let Some(p) = cache.iter().find(|p| p.curve == curve && p.scan_end >= needed * (1.0 - 1e-12)) {
                return Ok(p.clone());
            }
        }
        let p = Arc::new(Profile::build(self.hill.clone(), curve, lambda_max, self.tol)?);
        let mut cache = self.profiles.lock().expect("profile cache poisoned");
        cache.retain(|c| c.curve != curve);
        cache.push(p.clone());
        Ok(p)
    }

    fn check_level(level: f64) -> Result<f64> {
        if !(LEVEL_MIN - LEVEL_SNAP..=LEVEL_MAX + LEVEL_SNAP).contains(&level) || !level.is_finite() {
            return Err(Error::LevelRange(level));
        }
        Ok(level.clamp(LEVEL_MIN, LEVEL_MAX))
    }

    /// Roots of `Δ₀ = level` in every complete monotone piece, possibly past `lambda_max`.
    pub fn level_pieces(&self, level: f64, lambda_max: f64) -> Result<Vec<PieceRoot>> {
        let level = Self::check_level(level)?;
        self.profile(Curve::Delta0, lambda_max)?.level_roots(level)
    }

    /// Labeled roots of `Δ₀ = level` in `[λ_floor, lambda_max]`.
    pub fn solve_level(&self, level: f64, lambda_max: f64) -> Result<LevelRootSet> {
        let level = Self::check_level(level)?;
        let pieces = self.level_pieces(level, lambda_max)?;
        let bottom = (level - LEVEL_MIN).abs() < LEVEL_SNAP;
        let mut roots: Vec<LevelRoot> = pieces
            .iter()
            .map(|r| {
                let p = r.piece;
                let (n, sign) = if bottom {
                    (p / 2 + 1, if p % 2 == 0 { Sign::Minus } else { Sign::Plus })
                } else if p == 0 {
                    (0, Sign::Plus)
                } else if p % 2 == 1 {
                    (p.div_ceil(2), Sign::Minus)
                } else {
                    (p / 2, Sign::Plus)
                };
                LevelRoot {
                    lambda: r.lambda,
                    n,
                    sign,
                    coincident: false,
                    piece: p,
                }
            })
            .collect();
        self.mark_coincident(&mut roots);
        roots.retain(|r| r.lambda <= lambda_max);
        Ok(LevelRootSet { level, roots })
    }

    fn mark_coincident(&self, roots: &mut [LevelRoot]) {
        for i in 1..roots.len() {
            let (a, b) = (roots[i - 1], roots[i]);
            if a.n == b.n && a.sign == Sign::Minus && b.sign == Sign::Plus
                && (b.lambda - a.lambda).abs() <= 10.0 * self.tol.root_at(b.lambda)
            {
                roots[i - 1].coincident = true;
                roots[i].coincident = true;
            }
        }
    }

    fn labeled(&self, level: f64, parity: Parity, lambda_max: f64, kind: PointKind, k: Option<usize>) -> Result<Vec<SpectralPoint>> {
        Ok(self
            .level_pieces(level, lambda_max)?
            .into_iter()
            .map(|r| {
                let (n, sign) = spectral_label(parity, r.piece);
                SpectralPoint { kind, k, n, sign: Some(sign), lambda: r.lambda }
            })
            .collect())
    }

    fn truncate(points: Vec<SpectralPoint>, lambda_max: f64) -> Vec<SpectralPoint> {
        points.into_iter().filter(|p| p.lambda <= lambda_max).collect()
    }

    /// `λ_{k,2n}^±`, roots of `Δ₀ = cos(2πk/N)`, up to `lambda_max`.
    pub fn periodic_eigenvalues(&self, sector: &SectorConstants, lambda_max: f64) -> Result<Vec<SpectralPoint>> {
        Ok(Self::truncate(self.periodic_all(sector, lambda_max)?, lambda_max))
    }

    fn periodic_all(&self, sector: &SectorConstants, lambda_max: f64) -> Result<Vec<SpectralPoint>> {
        let level = if sector.k == 0 { 1.0 } else { sector.periodic_level() };
        self.labeled(level, Parity::Even, lambda_max, PointKind::Periodic, Some(sector.k))
    }

    /// `λ_{k,2n+1}^±`, roots of `Δ₀ = −1`; the same for every sector.
    pub fn antiperiodic_eigenvalues(&self, sector: &SectorConstants, lambda_max: f64) -> Result<Vec<SpectralPoint>> {
        Ok(Self::truncate(self.antiperiodic_all(Some(sector.k), lambda_max)?, lambda_max))
    }

    fn antiperiodic_all(&self, k: Option<usize>, lambda_max: f64) -> Result<Vec<SpectralPoint>> {
        self.labeled(-1.0, Parity::Odd, lambda_max, PointKind::Antiperiodic, k)
    }

    /// `r_{k,n}^±`, merged from the levels `c_k − s_k²` (even `n`) and `−c_k − s_k²` (odd `n`).
    pub fn resonances(&self, sector: &SectorConstants, lambda_max: f64) -> Result<Vec<SpectralPoint>> {
        Ok(Self::truncate(self.resonances_all(sector, lambda_max)?, lambda_max))
    }

    fn resonances_all(&self, sector: &SectorConstants, lambda_max: f64) -> Result<Vec<SpectralPoint>> {
        if sector.k == 0 {
            return Err(Error::Domain("resonances are defined for sectors k >= 1".into()));
        }
        let k = Some(sector.k);
        let mut all = self.labeled(sector.resonance_level_plus(), Parity::Even, lambda_max, PointKind::Resonance, k)?;
        all.extend(self.labeled(sector.resonance_level_minus(), Parity::Odd, lambda_max, PointKind::Resonance, k)?);
        all.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        let thirds = 3 * sector.k == sector.n;
        check_resonance_order(&all, thirds, self.tol)?;
        Ok(all)
    }

    /// Dirichlet eigenvalues `μ_n`, `n ≥ 1`: zeros of `φ(1, ·)`.
    pub fn dirichlet_spectrum(&self, lambda_max: f64) -> Result<Vec<f64>> {
        self.zeros_of(lambda_max, |m| m.phi1)
    }

    /// Neumann eigenvalues `ν_n`, `n ≥ 0`: zeros of `ϑ'(1, ·)`.
    pub fn neumann_spectrum(&self, lambda_max: f64) -> Result<Vec<f64>> {
        self.zeros_of(lambda_max, |m| m.dtheta1)
    }

    fn zeros_of(&self, lambda_max: f64, pick: fn(&RealTransfer) -> f64) -> Result<Vec<f64>> {
        if !(lambda_max > 0.0) {
            return Err(Error::Domain(format!("lambda_max must be positive, got {lambda_max}")));
        }
        let floor = self.profile(Curve::Delta0, lambda_max)?.floor;
        let grid = scan_grid(floor, lambda_max.sqrt(), 0.125, PI / 16.0);
        let f = |l: f64| -> Result<f64> { Ok(pick(&self.hill.transfer_real(l)?)) };
        let mut roots = Vec::new();
        let mut last: Option<(f64, f64)> = None;
        for &l in grid.iter().chain(std::iter::once(&lambda_max)) {
            if l > lambda_max || last.is_some_and(|(x, _)| l <= x) {
                continue;
            }
            let v = f(l)?;
            if v == 0.0 {
                roots.push(l);
                last = None;
                continue;
            }
            if let Some((a, fa)) = last {
                if fa * v < 0.0 {
                    roots.push(brent(f, a, l, fa, v, self.tol.root_at(l))?);
                }
            }
            last = Some((l, v));
        }
        roots.dedup_by(|a, b| (*a - *b).abs() <= self.tol.root_at(*a));
        Ok(roots)
    }

    /// Critical points of `Δ₀` and the zeros of `Δ₀` up to `lambda_max`.
    pub fn critical_points(&self, lambda_max: f64) -> Result<CriticalData> {
        let profile = self.profile(Curve::Delta0, lambda_max)?;
        let critical = profile
            .crits
            .iter()
            .filter(|c| c.lambda <= lambda_max)
            .map(|c| (c.n, c.lambda, c.value))
            .collect();
        let zeros = profile
            .level_roots(0.0)?
            .into_iter()
            .map(|r| r.lambda)
            .filter(|&l| l <= lambda_max)
            .collect();
        Ok(CriticalData { critical, zeros })
    }

    /// Gaps of the scalar Hill operator from the levels `Δ = ±1`.
    pub fn hill_gaps(&self, lambda_max: f64) -> Result<Vec<HillGap>> {
        let profile = self.profile(Curve::Hill, lambda_max)?;
        let plus = profile.level_roots(1.0)?;
        let minus = profile.level_roots(-1.0)?;
        let mut gaps = Vec::new();
        // gap n surrounds critical point n; its edges lie on pieces n − 1 and n
        for n in 1..profile.crits.len() {
            let level = if n % 2 == 0 { &plus } else { &minus };
            let (lower, upper) = (level[n - 1].lambda, level[n].lambda);
            if lower > lambda_max {
                break;
            }
            gaps.push(HillGap { n, lower, upper });
        }
        Ok(gaps)
    }

    /// `(q₀, κ_n, h_n)` for `n = 1..=n_max`.
    pub fn forward_spectral_data(&self, n_max: usize) -> Result<ForwardData> {
        if n_max == 0 {
            return Err(Error::Domain("n_max must be >= 1".into()));
        }
        let q0 = self.potential().mean();
        let mut lambda_max = (PI * (n_max as f64 + 0.5)).powi(2) + 2.0 * self.potential().max_abs_bound();
        let mut mu = self.dirichlet_spectrum(lambda_max)?;
        while mu.len() < n_max {
            lambda_max *= 2.0;
            mu = self.dirichlet_spectrum(lambda_max)?;
        }
        mu.truncate(n_max);
        let mut kappa = Vec::with_capacity(n_max);
        let mut h = Vec::with_capacity(n_max);
        for (i, &m) in mu.iter().enumerate() {
            let n = (i + 1) as f64;
            kappa.push(m - PI * PI * n * n - q0);
            h.push(self.hill.transfer_real(m)?.dphi1.abs().ln());
        }
        Ok(ForwardData { q0, mu, kappa, h })
    }

    /// Full band structure for the `N`-chain tube up to `lambda_max`.
    pub fn assemble_bands(&self, n_chains: usize, lambda_max: f64) -> Result<BandStructure> {
        bands::assemble(self, n_chains, lambda_max)
    }

    /// Spectral points needed by the band assembly, computed per sector.
    fn sector_points(&self, sectors: &[SectorConstants], lambda_max: f64) -> Result<Vec<SectorLevels>> {
        let job = |s: &SectorConstants| -> Result<SectorLevels> {
            let periodic = self.periodic_all(s, lambda_max)?;
            let resonances = if s.k == 0 { Vec::new() } else { self.resonances_all(s, lambda_max)? };
            Ok(SectorLevels { k: s.k, periodic, resonances })
        };
        // Build the shared profile before fanning out.
        self.profile(Curve::Delta0, lambda_max)?;
        if self.workers <= 1 || sectors.len() <= 1 {
            return sectors.iter().map(job).collect();
        }
        let chunk = sectors.len().div_ceil(self.workers);
        std::thread::scope(|scope| {
            let handles: Vec<_> = sectors
                .chunks(chunk)
                .map(|c| scope.spawn(move || c.iter().map(job).collect::<Result<Vec<_>>>()))
                .collect();
            let mut out = Vec::with_capacity(sectors.len());
            for h in handles {
                out.extend(h.join().expect("level worker panicked")?);
            }
            Ok(out)
        })
    }
}

#[derive(Debug, Clone)]
struct SectorLevels {
    k: usize,
    periodic: Vec<SpectralPoint>,
    resonances: Vec<SpectralPoint>,
}

/// Validates `r_{k,0}^+ < r_{k,1}^- < r_{k,1}^+ < r_{k,2}^- < …`; the odd pairs
/// may coincide when `k = N/3`.
fn check_resonance_order(sorted: &[SpectralPoint], thirds: bool, tol: Tolerances) -> Result<()> {
    let mut expected = (0usize, Sign::Plus);
    for (i, p) in sorted.iter().enumerate() {
        let got = (p.n, p.sign.unwrap_or(Sign::Plus));
        if got != expected {
            // a coincident odd pair may come out in either order
            let swapped = i > 0 && {
                let q = sorted[i - 1];
                thirds && p.n % 2 == 1 && q.n == p.n && (p.lambda - q.lambda).abs() <= 10.0 * tol.root_at(p.lambda)
            };
            if !swapped {
                return Err(Error::Labeling(format!(
                    "resonance order broken at lambda = {}: expected r_{}^{}, found r_{}^{}",
                    p.lambda,
                    expected.0,
                    expected.1.symbol(),
                    got.0,
                    got.1.symbol()
                )));
            }
        }
        expected = match got.1 {
            Sign::Plus => (got.0 + 1, Sign::Minus),
            Sign::Minus => (got.0, Sign::Plus),
        };
    }
    Ok(())
}

pub(crate) fn scan_grid(floor: f64, sqrt_end: f64, lambda_step: f64, sqrt_step: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let neg = ((-floor) / lambda_step).ceil().max(0.0) as usize;
    for i in 0..neg {
        grid.push(floor + i as f64 * lambda_step);
    }
    let pos = (sqrt_end / sqrt_step).ceil() as usize;
    for i in 0..=pos {
        let u = i as f64 * sqrt_step;
        grid.push(u * u);
    }
    grid
}

/// Labeled roots of `Δ₀ = c` for `q`.
pub fn solve_level(q: &Potential, c: f64, lambda_max: f64) -> Result<LevelRootSet> {
    SpectralSolver::new(q.clone()).solve_level(c, lambda_max)
}

pub fn periodic_eigenvalues(q: &Potential, n_chains: usize, k: usize, lambda_max: f64) -> Result<Vec<SpectralPoint>> {
    SpectralSolver::new(q.clone()).periodic_eigenvalues(&SectorConstants::new(k, n_chains)?, lambda_max)
}

pub fn antiperiodic_eigenvalues(q: &Potential, n_chains: usize, k: usize, lambda_max: f64) -> Result<Vec<SpectralPoint>> {
    SpectralSolver::new(q.clone()).antiperiodic_eigenvalues(&SectorConstants::new(k, n_chains)?, lambda_max)
}

pub fn resonances(q: &Potential, n_chains: usize, k: usize, lambda_max: f64) -> Result<Vec<SpectralPoint>> {
    SpectralSolver::new(q.clone()).resonances(&SectorConstants::new(k, n_chains)?, lambda_max)
}

pub fn dirichlet_spectrum(q: &Potential, lambda_max: f64) -> Result<Vec<f64>> {
    SpectralSolver::new(q.clone()).dirichlet_spectrum(lambda_max)
}

pub fn neumann_spectrum(q: &Potential, lambda_max: f64) -> Result<Vec<f64>> {
    SpectralSolver::new(q.clone()).neumann_spectrum(lambda_max)
}

pub fn delta0_critical_points(q: &Potential, lambda_max: f64) -> Result<CriticalData> {
    SpectralSolver::new(q.clone()).critical_points(lambda_max)
}

pub fn assemble_bands(q: &Potential, n_chains: usize, lambda_max: f64) -> Result<BandStructure> {
    SpectralSolver::new(q.clone()).assemble_bands(n_chains, lambda_max)
}

pub fn forward_spectral_data(q: &Potential, n_max: usize) -> Result<ForwardData> {
    SpectralSolver::new(q.clone()).forward_spectral_data(n_max)
}
