//! Cross-product sweeps with a deterministic CSV aggregate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use super::inflation::{run_with_scaling, Manifest, scaling_fits, InflationReport};
use crate::{Error, Result};

/// One CSV row per sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub q: f64,
    pub r: usize,
    pub k: i64,
    pub n: usize,
    pub t_window: f64,
    pub u0_besov: f64,
    pub u10_besov: f64,
    pub u10_over_q2: f64,
    pub u11_xt: f64,
    pub n1_xt: f64,
    pub n2_xt: f64,
    pub n3_xt: f64,
    pub inflation_ratio: Option<f64>,
    pub t_star: Option<f64>,
    pub peak_ratio: Option<f64>,
    pub y_xt: Option<f64>,
    pub y_linf: Option<f64>,
    pub y_xt_over_q4t: Option<f64>,
    pub linf_identity: Option<bool>,
    pub audit_holds: bool,
    pub ladder_monotone: bool,
    pub u0_q_exponent: Option<f64>,
    pub u0_r_exponent: Option<f64>,
    pub u10_q_exponent: Option<f64>,
    pub u11_r_exponent: Option<f64>,
    pub n2_r_exponent: Option<f64>,
    pub n3_r_exponent: Option<f64>,
}

impl SweepRow {
    pub fn from_report(index: usize, r: &InflationReport) -> Self {
        let fit = |c: &str, axis: super::scaling::Axis| {
            r.scaling.iter().find(|f| f.component.as_str() == c && f.axis == axis).map(|f| f.exponent)
        };
        use super::scaling::Axis::{Q, R};
        let w = r.y_window.as_ref();
        Self {
            index,
            q: r.params.q,
            r: r.params.r,
            k: r.params.k,
            n: r.params.n,
            t_window: r.params.t_window,
            u0_besov: r.u0_besov.value,
            u10_besov: r.u10.norm.value,
            u10_over_q2: r.u10.over_q2,
            u11_xt: r.u11_xt.value,
            n1_xt: r.n1_xt.value,
            n2_xt: r.n2_xt.value,
            n3_xt: r.n3_xt.value,
            inflation_ratio: r.inflation.as_ref().map(|i| i.ratio),
            t_star: r.inflation.as_ref().map(|i| i.t_star),
            peak_ratio: r.peak.as_ref().map(|i| i.ratio),
            y_xt: w.map(|w| w.y_xt.value),
            y_linf: w.map(|w| w.y_linf.value),
            y_xt_over_q4t: w.map(|w| w.y_xt_over_q4t),
            linf_identity: w.map(|w| w.linf_identity),
            audit_holds: r.audit.iter().all(|a| a.holds),
            ladder_monotone: r.ladder_monotone,
            u0_q_exponent: fit("u0_besov", Q),
            u0_r_exponent: fit("u0_besov", R),
            u10_q_exponent: fit("u10_besov", Q),
            u11_r_exponent: fit("u11_xt", R),
            n2_r_exponent: fit("n2_xt", R),
            n3_r_exponent: fit("n3_xt", R),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub index: usize,
    pub q: f64,
    pub r: usize,
    pub k: i64,
    pub dir: Option<String>,
    pub manifest_hash: String,
    pub report_sha256: String,
}

/// JSON index of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub manifest_hash: String,
    pub points: Vec<SweepEntry>,
    pub csv_sha256: String,
    /// `(Q, inflation ratio)` in increasing Q, where the solver ran.
    pub ratio_by_q: Vec<(f64, f64)>,
}

pub struct SweepOutcome {
    pub reports: Vec<InflationReport>,
    pub rows: Vec<SweepRow>,
    pub csv: Vec<u8>,
    pub summary: SweepSummary,
}

pub fn rows_to_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Runs every point of the cross product. Points are independent; the
/// scaling fits do not depend on the swept coordinates and are shared.
pub fn sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    if cfg.sweep.is_empty() {
        return Err(Error::Config("sweep axes are empty".into()));
    }
    cfg.validate()?;
    let points = cfg.points();
    if points.len() > cfg.budget {
        return Err(Error::Budget { what: "sweep points", needed: points.len(), budget: cfg.budget });
    }
    for p in &points {
        p.validate()?;
    }
    let shared = if cfg.sweep.k.is_empty() && cfg.sweep.q.is_empty() {
        Some(scaling_fits(cfg)?)
    } else {
        None
    };
    let reports: Vec<InflationReport> = points
        .par_iter()
        .map(|p| run_with_scaling(p, shared.as_deref()))
        .collect::<Result<_>>()?;
    let rows: Vec<SweepRow> = reports.iter().enumerate().map(|(i, r)| SweepRow::from_report(i, r)).collect();
    let csv = rows_to_csv(&rows)?;
    let mut entries = Vec::with_capacity(points.len());
    for (i, (p, r)) in points.iter().zip(&reports).enumerate() {
        entries.push(SweepEntry {
            index: i,
            q: p.q,
            r: p.family.r,
            k: p.family.k,
            dir: p.output.as_ref().map(|d| d.display().to_string()),
            manifest_hash: p.manifest_hash(),
            report_sha256: hex::encode(Sha256::digest(r.to_json()?.as_bytes())),
        });
    }
    let mut ratio_by_q: Vec<(f64, f64)> =
        reports.iter().filter_map(|r| r.inflation.as_ref().map(|i| (r.params.q, i.ratio))).collect();
    ratio_by_q.sort_by(|a, b| a.0.total_cmp(&b.0));
    let summary = SweepSummary {
        manifest_hash: cfg.manifest_hash(),
        points: entries,
        csv_sha256: hex::encode(Sha256::digest(&csv)),
        ratio_by_q,
    };
    if let Some(d) = &cfg.output {
        std::fs::create_dir_all(d)?;
        std::fs::write(d.join("sweep.csv"), &csv)?;
        std::fs::write(d.join("sweep.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
        let m = Manifest { manifest_hash: cfg.manifest_hash(), version: env!("CARGO_PKG_VERSION"), config: cfg };
        std::fs::write(d.join("manifest.json"), serde_json::to_string_pretty(&m)? + "\n")?;
    }
    Ok(SweepOutcome { reports, rows, csv, summary })
}
