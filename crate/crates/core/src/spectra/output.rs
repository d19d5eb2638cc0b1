//! JSON and CSV renderings of a band structure.

use std::fmt::Write as _;

use serde_json::{json, Value};

use super::BandStructure;

impl BandStructure {
    /// Global bands `S_n` clipped to `lambda_max`.
    pub fn clipped_bands(&self) -> Vec<(f64, f64)> {
        self.global_bands
            .iter()
            .filter(|b| b.interval.0 <= self.lambda_max)
            .map(|b| (b.interval.0, b.interval.1.min(self.lambda_max)))
            .collect()
    }

    pub fn to_json_value(&self) -> Value {
        let bands: Vec<Value> = self.clipped_bands().iter().map(|&(a, b)| json!([a, b])).collect();
        let gaps: Vec<Value> = self
            .open_gaps()
            .iter()
            .map(|g| json!({"n": g.n, "kind": g.kind, "interval": [g.interval.0, g.interval.1]}))
            .collect();
        let points: Vec<Value> = self
            .points
            .iter()
            .map(|p| {
                json!({
                    "kind": p.kind.name(),
                    "k": p.k,
                    "n": p.n,
                    "sign": p.sign.map(|s| s.symbol()),
                    "lambda": p.lambda,
                })
            })
            .collect();
        let sectors: Vec<Value> = self
            .sectors
            .iter()
            .map(|s| {
                json!({
                    "k": s.k,
                    "bands": s.bands.iter().map(|b| json!({"n": b.n, "interval": [b.interval.0, b.interval.1]})).collect::<Vec<_>>(),
                    "gaps": s.gaps.iter().map(|g| json!({"n": g.n, "interval": [g.interval.0, g.interval.1]})).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "N": self.n_chains,
            "lambda_max": self.lambda_max,
            "bands": bands,
            "ac_spectrum": self.ac_spectrum().iter().map(|&(a, b)| json!([a, b])).collect::<Vec<_>>(),
            "gaps": gaps,
            "flat_bands": self.flat_bands,
            "points": points,
            "q0": self.q0,
            "kappa": self.kappa,
            "h": self.h,
            "sector_bands": sectors,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("band structure serializes")
    }

    /// One row per spectral point: `kind,k,n,sign,lambda`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,k,n,sign,lambda\n");
        for p in &self.points {
            let k = p.k.map(|k| k.to_string()).unwrap_or_default();
            let sign = p.sign.map(|s| s.symbol()).unwrap_or("");
            let _ = writeln!(out, "{},{},{},{},{:.17e}", p.kind.name(), k, p.n, sign, p.lambda);
        }
        out
    }
}
