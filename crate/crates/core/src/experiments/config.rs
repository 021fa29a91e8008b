//! Experiment configuration: one JSON document, every field defaulted.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::construction::{build_frequency_family, FrequencyFamily, Preset};
use crate::norms::{BesovOptions, CarlesonOptions};
use crate::solver::grid::band_limit;
use crate::solver::DtPolicy;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyConfig {
    /// `K = |k_0|`.
    pub k: i64,
    pub r: usize,
    pub preset: Preset,
    /// Explicit shell magnitudes, desk preset only. The first `r` are used.
    pub shells: Option<Vec<i64>>,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self { k: 2, r: 2, preset: Preset::Desk, shells: Some(vec![8, 32]) }
    }
}

impl FamilyConfig {
    pub fn build(&self) -> Result<FrequencyFamily> {
        build_frequency_family(self.k, self.r, self.preset, self.shells.as_deref())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Points per resolved axis.
    pub n: usize,
    pub t_end: f64,
    pub dt: DtPolicy,
    pub snapshots_per_decade: usize,
    /// First positive snapshot; default `10⁻⁴/|k_1|²`.
    pub t_first: Option<f64>,
    pub energy_tol: f64,
    pub max_steps: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            n: 128,
            t_end: 1.0,
            dt: DtPolicy::default(),
            snapshots_per_decade: 16,
            t_first: None,
            energy_tol: 1e-8,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormSettings {
    pub besov: BesovOptions,
    pub carleson: CarlesonOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingPlan {
    pub q_grid: Vec<f64>,
    pub r_grid: Vec<usize>,
    /// `N_3` vanishes for a single shell, so its r-axis starts at 2.
    pub n3_r_grid: Vec<usize>,
    /// Ratio of consecutive shell magnitudes along the r axis; the first
    /// shell is `2K²`.
    pub shell_ratio: i64,
    pub bootstrap: usize,
}

impl Default for ScalingPlan {
    fn default() -> Self {
        Self {
            q_grid: vec![1.0, 2.0, 4.0],
            r_grid: vec![1, 2, 4, 8],
            n3_r_grid: vec![2, 4, 8],
            shell_ratio: 64,
            bootstrap: 1000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    pub q: Vec<f64>,
    pub r: Vec<usize>,
    pub k: Vec<i64>,
}

impl SweepAxes {
    pub fn is_empty(&self) -> bool {
        self.q.is_empty() && self.r.is_empty() && self.k.is_empty()
    }

    pub fn size(&self) -> usize {
        [self.q.len(), self.r.len(), self.k.len()].iter().fold(1usize, |a, &n| a.saturating_mul(n.max(1)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilyConfig,
    /// Amplitude `Q` of the datum.
    pub q: f64,
    pub nu: f64,
    pub solver: SolverSettings,
    pub norms: NormSettings,
    /// `T` of the `X_T` measurements; default `1/|k_1|`.
    pub t_window: Option<f64>,
    pub scaling: Option<ScalingPlan>,
    pub sweep: SweepAxes,
    /// Largest admissible sweep cross product.
    pub budget: usize,
    pub seed: u64,
    /// Run the solver and everything downstream of it.
    pub solve: bool,
    /// Reject data whose quadratic interactions leave the solver band.
    pub strict_band: bool,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            family: FamilyConfig::default(),
            q: 2.0,
            nu: 1.0,
            solver: SolverSettings::default(),
            norms: NormSettings::default(),
            t_window: None,
            scaling: None,
            sweep: SweepAxes::default(),
            budget: 64,
            seed: 0,
            solve: true,
            strict_band: false,
            output: None,
        }
    }
}

fn cfg_err(m: impl Into<String>) -> Error {
    Error::Config(m.into())
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fam = self.family.build()?;
        if !(self.q.is_finite() && self.q >= 0.0) {
            return Err(cfg_err(format!("Q must be finite and nonnegative, got {}", self.q)));
        }
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(cfg_err(format!("viscosity must be positive, got {}", self.nu)));
        }
        let s = &self.solver;
        if !s.n.is_power_of_two() || !(8..=4096).contains(&s.n) {
            return Err(cfg_err(format!("solver n must be a power of two in [8, 4096], got {}", s.n)));
        }
        if !(s.t_end.is_finite() && s.t_end > 0.0) {
            return Err(cfg_err(format!("t_end must be positive, got {}", s.t_end)));
        }
        if s.snapshots_per_decade < 16 {
            return Err(cfg_err("at least 16 snapshots per decade are needed for X_T sampling"));
        }
        if let Some(t) = s.t_first {
            if !(t > 0.0 && t < s.t_end) {
                return Err(cfg_err(format!("t_first must lie in (0, t_end), got {t}")));
            }
        }
        if let Some(t) = self.t_window {
            if !(t.is_finite() && t > 0.0) {
                return Err(cfg_err(format!("t_window must be positive, got {t}")));
            }
        }
        if self.solve {
            let top = fam.magnitudes().into_iter().max().unwrap_or(0).max(fam.base);
            if top > band_limit(s.n) {
                return Err(cfg_err(format!(
                    "datum wavenumber {top} outside the dealiased band {} of n = {}",
                    band_limit(s.n),
                    s.n
                )));
            }
            if self.strict_band && 2 * top > band_limit(s.n) {
                return Err(cfg_err(format!(
                    "interaction wavenumber {} outside the dealiased band {}",
                    2 * top,
                    band_limit(s.n)
                )));
            }
        }
        if let Some(p) = &self.scaling {
            if p.shell_ratio < 2 {
                return Err(cfg_err("scaling shell_ratio must be at least 2"));
            }
        }
        if self.sweep.q.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
            return Err(cfg_err("sweep Q values must be finite and nonnegative"));
        }
        let size = self.sweep.size();
        if size > self.budget {
            return Err(Error::Budget { what: "sweep points", needed: size, budget: self.budget });
        }
        Ok(())
    }

    /// `T` used for the `X_T` measurements.
    pub fn window(&self, fam: &FrequencyFamily) -> f64 {
        self.t_window.unwrap_or_else(|| 1.0 / fam.shells[0].magnitude())
    }

    /// SHA-256 of the compact JSON form, ignoring the output directory.
    pub fn manifest_hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        let s = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(s.as_bytes()))
    }

    /// Sets a dotted path (`solver.n`, `family.shells`) to a JSON value;
    /// text that does not parse as JSON is taken as a string.
    pub fn set(&mut self, path: &str, value: &str) -> Result<()> {
        let mut doc = serde_json::to_value(&*self)?;
        let v: serde_json::Value =
            serde_json::from_str(value).unwrap_or_else(|_| serde_json::Value::String(value.to_string()));
        let mut node = &mut doc;
        let keys: Vec<&str> = path.split('.').collect();
        for (i, key) in keys.iter().enumerate() {
            if node.is_null() {
                *node = serde_json::Value::Object(Default::default());
            }
            let obj = node
                .as_object_mut()
                .ok_or_else(|| cfg_err(format!("`{}` is not an object", keys[..i].join("."))))?;
            if i + 1 == keys.len() {
                obj.insert(key.to_string(), v);
                break;
            }
            node = obj.entry(key.to_string()).or_insert(serde_json::Value::Null);
        }
        *self = serde_json::from_value(doc).map_err(|e| cfg_err(format!("{path}: {e}")))?;
        Ok(())
    }

    /// Cross product of the sweep axes, Q outermost, K innermost.
    pub fn points(&self) -> Vec<ExperimentConfig> {
        let qs = if self.sweep.q.is_empty() { vec![self.q] } else { self.sweep.q.clone() };
        let rs = if self.sweep.r.is_empty() { vec![self.family.r] } else { self.sweep.r.clone() };
        let ks = if self.sweep.k.is_empty() { vec![self.family.k] } else { self.sweep.k.clone() };
        let mut out = Vec::with_capacity(qs.len() * rs.len() * ks.len());
        for &q in &qs {
            for &r in &rs {
                for &k in &ks {
                    let mut c = self.clone();
                    c.q = q;
                    c.family.r = r;
                    c.family.k = k;
                    c.sweep = SweepAxes::default();
                    c.output = self.output.as_ref().map(|d| d.join("points").join(format!("{:03}", out.len())));
                    out.push(c);
                }
            }
        }
        out
    }
}
