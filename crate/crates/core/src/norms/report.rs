use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::vec3::Vec3;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Besov,
    Xt,
    Bmo,
    Linf,
}

impl NormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::Besov => "besov",
            NormKind::Xt => "xt",
            NormKind::Bmo => "bmo",
            NormKind::Linf => "linf",
        }
    }
}

/// Arguments at which the supremum was attained. `t_star`/`x_star` belong
/// to the `√t‖·‖∞` part, `x0_star`/`r_star` to the Carleson part.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Witnesses {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_star: Option<Vec3>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0_star: Option<Vec3>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_star: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    /// Spatial method: `"exact"` for branch-and-bound on trigonometric
    /// fields, otherwise the sampled grid.
    pub spatial: String,
    pub t_samples: usize,
    pub r_samples: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: NormKind,
    pub value: f64,
    pub witnesses: Witnesses,
    /// `(sup part, Carleson part)` for the `X_T` norm.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parts: Option<(f64, f64)>,
    pub grid: Sampling,
    /// Upper limit of the Carleson radius parameter `R`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_cap: Option<f64>,
    pub tolerance_note: String,
}

impl NormReport {
    pub fn zero(kind: NormKind, note: &str) -> Self {
        Self {
            kind,
            value: 0.0,
            witnesses: Witnesses::default(),
            parts: None,
            grid: Sampling::default(),
            r_cap: None,
            tolerance_note: note.into(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    label: &'a str,
    kind: &'a str,
    value: f64,
    t_star: Option<f64>,
    x_star: String,
    x0_star: String,
    r_star: Option<f64>,
}

fn fmt_vec(v: &Option<Vec3>) -> String {
    v.map(|x| format!("{} {} {}", x[0], x[1], x[2])).unwrap_or_default()
}

/// Writes `(label, kind, value, witnesses)` rows.
pub fn write_reports_csv<W: Write>(out: W, rows: &[(String, NormReport)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (label, r) in rows {
        w.serialize(CsvRow {
            label,
            kind: r.kind.as_str(),
            value: r.value,
            t_star: r.witnesses.t_star,
            x_star: fmt_vec(&r.witnesses.x_star),
            x0_star: fmt_vec(&r.witnesses.x0_star),
            r_star: r.witnesses.r_star,
        })?;
    }
    w.flush()?;
    Ok(())
}
