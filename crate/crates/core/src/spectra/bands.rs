//! Band and gap assembly across sectors.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lyapunov::SectorConstants;

use super::{CriticalPoint, PointKind, Sign, SpectralPoint, SpectralSolver};

/// Closed or open interval stored as `(lower, upper)`; empty when `upper <= lower`.
pub type Interval = (f64, f64);

/// Gaps narrower than `GAP_RESOLUTION · (1 + |λ|)` count as closed.
pub const GAP_RESOLUTION: f64 = 1e-9;

/// An interval carrying its band or gap index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalBand {
    pub n: usize,
    pub interval: Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapKind {
    /// Even index; edges are periodic eigenvalues.
    Stable,
    /// Odd index; edges are resonances.
    Resonance,
}

/// Global gap `G_n = (E_n^-, E_n^+)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalGap {
    pub n: usize,
    pub kind: GapKind,
    pub interval: Interval,
}

impl GlobalGap {
    pub fn width(&self) -> f64 {
        (self.interval.1 - self.interval.0).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.interval.1 <= self.interval.0
    }
}

/// Bands `σ_{k,n}` and gaps `γ_{k,n}` of one sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorBands {
    pub k: usize,
    pub bands: Vec<GlobalBand>,
    pub gaps: Vec<GlobalBand>,
}

impl SectorBands {
    pub fn gap(&self, n: usize) -> Option<Interval> {
        self.gaps.iter().find(|g| g.n == n).map(|g| g.interval)
    }

    pub fn band(&self, n: usize) -> Option<Interval> {
        self.bands.iter().find(|b| b.n == n).map(|b| b.interval)
    }

    pub fn contains(&self, lambda: f64) -> bool {
        self.bands
            .iter()
            .any(|b| lambda >= b.interval.0 && lambda <= b.interval.1)
    }
}

/// Everything known about the spectrum up to `lambda_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    pub n_chains: usize,
    pub m: usize,
    pub lambda_max: f64,
    pub sectors: Vec<SectorBands>,
    /// `S_n = [E_{n−1}^+, E_n^-]`.
    pub global_bands: Vec<GlobalBand>,
    /// `G_n` for every computed `n`, including empty ones.
    pub gaps: Vec<GlobalGap>,
    pub flat_bands: Vec<f64>,
    pub points: Vec<SpectralPoint>,
    pub critical: Vec<(usize, f64, f64)>,
    pub neumann: Vec<f64>,
    pub q0: f64,
    pub kappa: Vec<f64>,
    pub h: Vec<f64>,
}

type EdgeMap = HashMap<(usize, Sign), f64>;

fn edges(points: &[SpectralPoint]) -> EdgeMap {
    points
        .iter()
        .filter_map(|p| p.sign.map(|s| ((p.n, s), p.lambda)))
        .collect()
}

pub(super) fn assemble(solver: &SpectralSolver, n_chains: usize, lambda_max: f64) -> Result<BandStructure> {
    let sectors = SectorConstants::all(n_chains)?;
    if !(lambda_max > 0.0) {
        return Err(Error::Domain(format!("lambda_max must be positive, got {lambda_max}")));
    }
    let anti = solver.antiperiodic_all(None, lambda_max)?;
    let levels = solver.sector_points(&sectors, lambda_max)?;
    let anti_edges = edges(&anti);

    let sector_edges: Vec<EdgeMap> = levels
        .iter()
        .map(|l| {
            if l.k == 0 {
                let mut e = edges(&l.periodic);
                e.extend(anti_edges.iter().map(|(k, v)| (*k, *v)));
                e
            } else {
                edges(&l.resonances)
            }
        })
        .collect();

    let lower = |e: &EdgeMap, n: usize| e.get(&(n, Sign::Minus)).copied();
    let upper = |e: &EdgeMap, n: usize| e.get(&(n, Sign::Plus)).copied();

    let mut bands_per_sector: Vec<SectorBands> = levels
        .iter()
        .map(|l| SectorBands { k: l.k, bands: Vec::new(), gaps: Vec::new() })
        .collect();
    let mut global_bands = Vec::new();
    let mut gaps = Vec::new();

    let mut e_prev_plus = sector_edges
        .iter()
        .map(|e| upper(e, 0))
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| Error::Assembly("missing bottom band edge".into()))?
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    for n in 1.. {
        if e_prev_plus > lambda_max {
            break;
        }
        let mut e_minus = f64::NEG_INFINITY;
        let mut e_plus = f64::INFINITY;
        let mut start_max = f64::NEG_INFINITY;
        let mut end_min = f64::INFINITY;
        let mut complete = true;
        for (s, e) in sector_edges.iter().enumerate() {
            let (Some(start), Some(a), Some(b)) = (upper(e, n - 1), lower(e, n), upper(e, n)) else {
                complete = false;
                break;
            };
            if a < start {
                return Err(Error::Assembly(format!(
                    "sector {} band {n} is inverted: [{start}, {a}]",
                    levels[s].k
                )));
            }
            if b < a - 10.0 * solver.tol.root_at(b) {
                return Err(Error::Assembly(format!(
                    "sector {} gap {n} is inverted: ({a}, {b})",
                    levels[s].k
                )));
            }
            bands_per_sector[s].bands.push(GlobalBand { n, interval: (start, a) });
            bands_per_sector[s].gaps.push(GlobalBand { n, interval: (a, b.max(a)) });
            e_minus = e_minus.max(a);
            e_plus = e_plus.min(b);
            start_max = start_max.max(start);
            end_min = end_min.min(a);
        }
        if !complete {
            for sb in bands_per_sector.iter_mut() {
                sb.bands.retain(|b| b.n < n);
                sb.gaps.retain(|g| g.n < n);
            }
            break;
        }
        if start_max > end_min {
            return Err(Error::Assembly(format!(
                "sector bands sigma_(k,{n}) have empty common part: max start {start_max} > min end {end_min}"
            )));
        }
        global_bands.push(GlobalBand { n, interval: (e_prev_plus, e_minus) });
        let kind = if n % 2 == 0 { GapKind::Stable } else { GapKind::Resonance };
        gaps.push(GlobalGap { n, kind, interval: (e_minus, e_plus) });
        e_prev_plus = e_plus.max(e_minus);
    }

    let mut points: Vec<SpectralPoint> = Vec::new();
    for l in &levels {
        points.extend(l.periodic.iter().copied());
        points.extend(l.resonances.iter().copied());
    }
    points.extend(anti.iter().copied());
    let flat_bands = solver.dirichlet_spectrum(lambda_max)?;
    let neumann = solver.neumann_spectrum(lambda_max)?;
    for (i, &mu) in flat_bands.iter().enumerate() {
        points.push(SpectralPoint { kind: PointKind::Dirichlet, k: None, n: i + 1, sign: None, lambda: mu });
    }
    for (i, &nu) in neumann.iter().enumerate() {
        points.push(SpectralPoint { kind: PointKind::Neumann, k: None, n: i, sign: None, lambda: nu });
    }
    let crit = solver.critical_points(lambda_max)?;
    for &(n, lambda, _) in &crit.critical {
        points.push(SpectralPoint { kind: PointKind::Critical, k: None, n, sign: None, lambda });
    }
    for (i, &eta) in crit.zeros.iter().enumerate() {
        points.push(SpectralPoint { kind: PointKind::Delta0Zero, k: None, n: i + 1, sign: None, lambda: eta });
    }
    points.retain(|p| p.lambda <= lambda_max);
    points.sort_by(|a, b| {
        a.lambda
            .total_cmp(&b.lambda)
            .then_with(|| a.kind.name().cmp(b.kind.name()))
            .then_with(|| a.k.cmp(&b.k))
            .then_with(|| a.n.cmp(&b.n))
            .then_with(|| a.sign.cmp(&b.sign))
    });

    let q0 = solver.potential().mean();
    let mut kappa = Vec::with_capacity(flat_bands.len());
    let mut h = Vec::with_capacity(flat_bands.len());
    for (i, &mu) in flat_bands.iter().enumerate() {
        let n = (i + 1) as f64;
        kappa.push(mu - std::f64::consts::PI.powi(2) * n * n - q0);
        h.push(solver.transfer_real(mu)?.dphi1.abs().ln());
    }

    Ok(BandStructure {
        n_chains,
        m: sectors[0].m,
        lambda_max,
        sectors: bands_per_sector,
        global_bands,
        gaps,
        flat_bands,
        points,
        critical: crit.critical,
        neumann,
        q0,
        kappa,
        h,
    })
}

impl BandStructure {
    /// Connected components of `σ_ac = ∪ S_n`, clipped to `lambda_max`.
    pub fn ac_spectrum(&self) -> Vec<Interval> {
        let mut out: Vec<Interval> = Vec::new();
        for b in &self.global_bands {
            let (lo, hi) = b.interval;
            if lo > self.lambda_max {
                break;
            }
            let hi = hi.min(self.lambda_max);
            match out.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        out
    }

    /// Global gaps wider than the resolution starting below `lambda_max`, clipped to it.
    pub fn open_gaps(&self) -> Vec<GlobalGap> {
        self.gaps
            .iter()
            .filter(|g| g.width() > GAP_RESOLUTION * (1.0 + g.interval.0.abs()) && g.interval.0 < self.lambda_max)
            .map(|g| GlobalGap { interval: (g.interval.0, g.interval.1.min(self.lambda_max)), ..*g })
            .collect()
    }

    pub fn gap(&self, n: usize) -> Option<&GlobalGap> {
        self.gaps.iter().find(|g| g.n == n)
    }

    pub fn sector(&self, k: usize) -> Option<&SectorBands> {
        self.sectors.iter().find(|s| s.k == k)
    }

    pub fn points_of(&self, kind: PointKind) -> impl Iterator<Item = &SpectralPoint> {
        self.points.iter().filter(move |p| p.kind == kind)
    }

    fn point(&self, kind: PointKind, k: Option<usize>, n: usize, sign: Sign) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.kind == kind && p.n == n && p.sign == Some(sign) && (kind == PointKind::Antiperiodic || p.k == k))
            .map(|p| p.lambda)
    }

    /// `λ_{k,n}^±` for any sector and index.
    pub fn eigenvalue(&self, k: usize, n: usize, sign: Sign) -> Option<f64> {
        if n % 2 == 1 {
            self.point(PointKind::Antiperiodic, None, n, sign)
        } else {
            self.point(PointKind::Periodic, Some(k), n, sign)
        }
    }

    /// Ordering and nesting relations that must hold for any potential.
    ///
    /// Returns one message per violation; `tol` is an absolute slack.
    pub fn invariant_violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        let m = self.m;
        let slack = |l: f64| tol * (1.0 + l.abs());

        // periodic eigenvalues: λ_{0,0}^+ < … < λ_{m,0}^+ < λ_{0,1}^-,
        // λ_{m,2n}^- < … < λ_{0,2n}^- ≤ λ_{0,2n}^+ < … < λ_{m,2n}^+
        let bottom: Vec<Option<f64>> = (0..=m).map(|k| self.eigenvalue(k, 0, Sign::Plus)).collect();
        for k in 1..=m {
            if let (Some(a), Some(b)) = (bottom[k - 1], bottom[k]) {
                if !(a < b) {
                    out.push(format!("lambda_({},0)^+ = {a} not below lambda_({k},0)^+ = {b}", k - 1));
                }
            }
        }
        if let (Some(top), Some(anti)) = (bottom[m], self.eigenvalue(0, 1, Sign::Minus)) {
            if !(top < anti) {
                out.push(format!("lambda_({m},0)^+ = {top} not below lambda_(0,1)^- = {anti}"));
            }
        }
        for n in (2..).step_by(2) {
            let minus: Vec<Option<f64>> = (0..=m).map(|k| self.eigenvalue(k, n, Sign::Minus)).collect();
            let plus: Vec<Option<f64>> = (0..=m).map(|k| self.eigenvalue(k, n, Sign::Plus)).collect();
            if minus.iter().chain(plus.iter()).any(|x| x.is_none()) {
                break;
            }
            let (minus, plus): (Vec<f64>, Vec<f64>) =
                (minus.into_iter().flatten().collect(), plus.into_iter().flatten().collect());
            for k in 1..=m {
                if !(minus[k] < minus[k - 1]) {
                    out.push(format!("lambda_({k},{n})^- = {} not below lambda_({},{n})^- = {}", minus[k], k - 1, minus[k - 1]));
                }
                if !(plus[k - 1] < plus[k]) {
                    out.push(format!("lambda_({},{n})^+ = {} not below lambda_({k},{n})^+ = {}", k - 1, plus[k - 1], plus[k]));
                }
            }
            if minus[0] > plus[0] + slack(plus[0]) {
                out.push(format!("lambda_(0,{n})^- = {} above lambda_(0,{n})^+ = {}", minus[0], plus[0]));
            }
        }

        // resonance alternation r_{k,0}^+ < r_{k,1}^- ≤ r_{k,1}^+ < r_{k,2}^- < …
        for k in 1..=m {
            let mut res: Vec<&SpectralPoint> = self
                .points
                .iter()
                .filter(|p| p.kind == PointKind::Resonance && p.k == Some(k))
                .collect();
            res.sort_by_key(|p| (p.n, p.sign));
            for w in res.windows(2) {
                let (a, b) = (w[0], w[1]);
                let tangent_ok = self.n_chains == 3 * k && a.n == b.n && a.n % 2 == 1;
                let ok = if tangent_ok { a.lambda <= b.lambda + slack(b.lambda) } else { a.lambda < b.lambda };
                if !ok {
                    out.push(format!(
                        "resonance order broken in sector {k}: r_{}^{} = {} vs r_{}^{} = {}",
                        a.n,
                        a.sign.map_or("", |s| s.symbol()),
                        a.lambda,
                        b.n,
                        b.sign.map_or("", |s| s.symbol()),
                        b.lambda
                    ));
                }
            }
        }

        // Δ₀(λ_{0,2n}) ≥ 1 and Δ₀(λ_{0,2n−1}) ≤ −5/4
        for &(n, lambda, value) in &self.critical {
            let s = slack(lambda);
            if n % 2 == 0 && value < 1.0 - s {
                out.push(format!("Delta0 at critical point {n} is {value} < 1"));
            }
            if n % 2 == 1 && value > -1.25 + s {
                out.push(format!("Delta0 at critical point {n} is {value} > -5/4"));
            }
        }

        // gap nesting
        let n_top = self.gaps.len();
        let contains = |outer: Interval, inner: Interval| -> bool {
            if inner.1 <= inner.0 && outer.1 <= outer.0 {
                return (inner.0 - outer.0).abs() <= slack(inner.0);
            }
            inner.1 <= inner.0 && inner.0 >= outer.0 - slack(outer.0) && inner.0 <= outer.1 + slack(outer.1)
                || outer.0 <= inner.0 + slack(inner.0) && inner.1 <= outer.1 + slack(outer.1)
        };
        let p = self.n_chains / 3;
        for n in 1..=n_top {
            let g: Vec<Interval> = match self.sectors.iter().map(|s| s.gap(n)).collect::<Option<Vec<_>>>() {
                Some(g) => g,
                None => break,
            };
            let chain: Vec<(usize, usize)> = if n % 2 == 0 {
                (1..=m).map(|k| (k, k - 1)).collect()
            } else {
                let mut c: Vec<(usize, usize)> = (1..=p.min(m)).map(|k| (k - 1, k)).collect();
                let start = if self.n_chains.is_multiple_of(3) { p } else { p + 1 };
                c.extend((start + 1..=m).map(|k| (k, k - 1)));
                c
            };
            for (outer, inner) in chain {
                if !contains(g[outer], g[inner]) {
                    out.push(format!(
                        "gamma_({inner},{n}) = {:?} not inside gamma_({outer},{n}) = {:?}",
                        g[inner], g[outer]
                    ));
                }
            }
            let global = self.gaps[n - 1].interval;
            let expect = if n % 2 == 0 {
                g[0]
            } else if self.n_chains.is_multiple_of(3) {
                g[p]
            } else if p < m {
                (g[p].0.max(g[p + 1].0), g[p].1.min(g[p + 1].1))
            } else {
                g[p]
            };
            let both_empty = global.1 <= global.0 && expect.1 <= expect.0;
            if !both_empty
                && ((global.0 - expect.0).abs() > slack(global.0) || (global.1 - expect.1).abs() > slack(global.1))
            {
                out.push(format!("G_{n} = {global:?} differs from the sector gap {expect:?}"));
            }
        }

        // μ_n, ν_n in the closed even gap [λ_{0,2n}^-, λ_{0,2n}^+]
        for (i, &mu) in self.flat_bands.iter().enumerate() {
            let n = i + 1;
            if let Some(g) = self.sectors[0].gap(2 * n) {
                if mu < g.0 - slack(g.0) || mu > g.1 + slack(g.1) {
                    out.push(format!("mu_{n} = {mu} outside gamma_(0,{}) = {g:?}", 2 * n));
                }
            }
            if let (Some(&nu), Some(g)) = (self.neumann.get(n), self.sectors[0].gap(2 * n)) {
                if nu < g.0 - slack(g.0) || nu > g.1 + slack(g.1) {
                    out.push(format!("nu_{n} = {nu} outside gamma_(0,{}) = {g:?}", 2 * n));
                }
            }
        }

        // λ_{k,n}^- ∈ σ_{k,n} and λ_{k,n}^+ ∈ σ_{k,n+1} for k ≥ 1
        for s in self.sectors.iter().filter(|s| s.k > 0) {
            for b in &s.bands {
                let n = b.n;
                if let Some(l) = self.eigenvalue(s.k, n, Sign::Minus) {
                    if l < b.interval.0 - slack(l) || l > b.interval.1 + slack(l) {
                        out.push(format!("lambda_({},{n})^- = {l} outside sigma_({},{n})", s.k, s.k));
                    }
                }
                if n >= 1 {
                    if let Some(l) = self.eigenvalue(s.k, n - 1, Sign::Plus) {
                        if l <= self.lambda_max && !s.contains(l) {
                            out.push(format!("lambda_({},{})^+ = {l} outside sigma_({},{n})", s.k, n - 1, s.k));
                        }
                    }
                }
            }
        }

        // S_n and G_n partition [E_0^+, λ_max]
        for w in self.global_bands.windows(2) {
            let gap = self.gaps[w[0].n - 1];
            let expected_start = gap.interval.1.max(gap.interval.0);
            if (w[1].interval.0 - expected_start).abs() > slack(expected_start) {
                out.push(format!("S_{} does not start at the end of G_{}", w[1].n, w[0].n));
            }
        }
        out
    }

    pub fn critical_points(&self) -> Vec<CriticalPoint> {
        self.critical
            .iter()
            .map(|&(n, lambda, value)| CriticalPoint { n, lambda, value, is_max: n % 2 == 0 })
            .collect()
    }
}
