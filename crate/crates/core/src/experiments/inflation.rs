//! End-to-end inflation run: datum, exact first iterate, norms, solver,
//! remainder, time ladder, audit, artifacts.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::ladder::{build_time_ladder, TimeLadder};
use super::scaling::{measure_scaling, Axis, Component, ScalingBase, ScalingFit};
use crate::calculus::{first_iterate, heat_flow, split_u1, FirstIterate, FrozenField, TrigField};
use crate::construction::{build_initial_data, InitialData};
use crate::norms::{
    besov_norm, besov_norm_grid, linf_frozen, linf_grid, write_reports_csv, xt_norm, xt_norm_sampled,
    LinfEstimate, NormKind, NormReport, SampledTrajectory, Sampling, Witnesses,
};
use crate::solver::grid::{dims_for, GridField};
use crate::solver::{compute_remainder, evolve, snapshot, spectralize, spectralize_truncated};
use crate::solver::{write_diagnostics_csv, SolverConfig};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub q: f64,
    pub k: i64,
    pub r: usize,
    pub shells: Vec<i64>,
    pub nu: f64,
    pub n: usize,
    pub dims: [usize; 3],
    pub t_end: f64,
    pub t_window: f64,
}

/// `u_{1,0}` on the window `1/|k_1|² ≪ t ≪ 1`, evaluated at `t_eval`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub window: (f64, f64),
    pub t_eval: f64,
    pub norm: NormReport,
    /// `‖u_{1,0}(t_eval)‖_B / Q²`.
    pub over_q2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub steps: usize,
    pub snapshots: usize,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub max_divergence: f64,
    /// Distinct `u_1` wavevectors outside the solver band.
    pub out_of_band_modes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub norm: NormReport,
    /// `‖u(t)‖_B / ‖u_0‖_B`.
    pub ratio: f64,
    /// Inside the plateau window of `u_{1,0}`.
    pub in_window: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inflation {
    pub ratio: f64,
    pub t_star: f64,
    pub u_besov: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderPoint {
    pub t: f64,
    pub y_linf: NormReport,
}

/// `‖y‖_{X_T}` with the companion `L∞` identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderWindow {
    pub t: f64,
    pub y_xt: NormReport,
    /// `‖y(T)‖_∞`.
    pub y_linf: NormReport,
    /// `‖y‖_{X_T} / (Q⁴ T)`.
    pub y_xt_over_q4t: f64,
    /// `‖y(T)‖_∞ ≤ T^{-1/2}‖y‖_{X_T}`.
    pub linf_identity: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderNorm {
    pub alpha: usize,
    pub r_alpha: usize,
    pub window: RemainderWindow,
}

/// `‖u(t) − e^{tΔ}u_0‖_B ≥ ‖u_{1,0}(t)‖_B − ‖u_{1,1}(t)‖_∞ − ‖y(t)‖_∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub t: f64,
    pub lhs: NormReport,
    pub u10_besov: NormReport,
    pub u11_linf: NormReport,
    pub y_linf: NormReport,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InflationReport {
    pub manifest_hash: String,
    pub params: RunParams,
    pub u0_besov: NormReport,
    pub u10: Plateau,
    pub u11_xt: NormReport,
    pub n1_xt: NormReport,
    pub n2_xt: NormReport,
    pub n3_xt: NormReport,
    pub resonances: usize,
    pub solver: Option<SolverSummary>,
    pub besov_curve: Vec<CurvePoint>,
    /// Largest ratio inside the plateau window.
    pub inflation: Option<Inflation>,
    /// Largest ratio over every positive snapshot time.
    pub peak: Option<Inflation>,
    pub remainder: Vec<RemainderPoint>,
    pub y_window: Option<RemainderWindow>,
    pub ladder: Option<TimeLadder>,
    pub ladder_norms: Vec<LadderNorm>,
    /// Measured `‖y‖_{X_{T_α}}` nondecreasing along the ladder.
    pub ladder_monotone: bool,
    pub audit: Vec<AuditRow>,
    pub scaling: Vec<ScalingFit>,
}

impl InflationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Every `(label, report)` pair, in a fixed order.
    pub fn norm_rows(&self) -> Vec<(String, NormReport)> {
        let mut rows = vec![
            ("u0_besov".to_string(), self.u0_besov.clone()),
            ("u10_plateau_besov".to_string(), self.u10.norm.clone()),
            ("u11_xt".to_string(), self.u11_xt.clone()),
            ("n1_xt".to_string(), self.n1_xt.clone()),
            ("n2_xt".to_string(), self.n2_xt.clone()),
            ("n3_xt".to_string(), self.n3_xt.clone()),
        ];
        if let Some(w) = &self.y_window {
            rows.push(("y_xt".into(), w.y_xt.clone()));
            rows.push(("y_linf_window".into(), w.y_linf.clone()));
        }
        for l in &self.ladder_norms {
            rows.push((format!("y_xt_ladder_{}", l.alpha), l.window.y_xt.clone()));
        }
        for p in &self.besov_curve {
            rows.push((format!("u_besov@{}", p.t), p.norm.clone()));
        }
        rows
    }
}

pub(crate) fn linf_report(e: &LinfEstimate, spatial: &str, note: &str) -> NormReport {
    NormReport {
        kind: NormKind::Linf,
        value: e.value,
        witnesses: Witnesses { x_star: Some(e.x_star), ..Witnesses::default() },
        parts: None,
        grid: Sampling { spatial: spatial.into(), t_samples: 1, r_samples: 0, evaluations: e.evaluations },
        r_cap: None,
        tolerance_note: note.into(),
    }
}

fn grid_linf(g: &GridField, cfg: &ExperimentConfig) -> Result<NormReport> {
    let e = linf_grid(g, &cfg.norms.besov.linf)?;
    let d = g.dims();
    Ok(linf_report(&e, &format!("grid {}x{}x{}", d[0], d[1], d[2]), "oversampled grid with Newton polish"))
}

fn write_json<T: Serialize>(dir: Option<&Path>, name: &str, v: &T) -> Result<()> {
    if let Some(d) = dir {
        std::fs::write(d.join(name), serde_json::to_string_pretty(v)? + "\n")?;
    }
    Ok(())
}

fn write_csv<T: Serialize>(dir: Option<&Path>, name: &str, rows: &[T]) -> Result<()> {
    if let Some(d) = dir {
        let mut w = csv::Writer::from_path(d.join(name))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Contents of `manifest.json`.
#[derive(Serialize)]
pub(crate) struct Manifest<'a> {
    pub manifest_hash: String,
    pub version: &'static str,
    pub config: &'a ExperimentConfig,
}

#[derive(Serialize)]
struct CurveRow {
    t: f64,
    u_besov: f64,
    ratio: f64,
    t_star: Option<f64>,
    in_window: bool,
}

#[derive(Serialize)]
struct RemainderRow {
    t: f64,
    y_linf: f64,
    sqrt_t_y_linf: f64,
}

#[derive(Serialize)]
struct LadderRow {
    alpha: usize,
    r_alpha: usize,
    t_alpha: f64,
    y_xt: f64,
    y_linf: f64,
    y_xt_over_q4t: f64,
}

#[derive(Serialize)]
struct AuditCsv {
    t: f64,
    lhs: f64,
    u10_besov: f64,
    u11_linf: f64,
    y_linf: f64,
    rhs: f64,
    holds: bool,
}

/// Snapshot times: the log grid plus the exact `extra` times, with grid
/// times coinciding with an extra one dropped.
fn merge_times(grid: Vec<f64>, extra: &[f64], t_end: f64) -> Vec<f64> {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
    let mut t: Vec<f64> = grid.into_iter().filter(|&g| !extra.iter().any(|&e| close(g, e))).collect();
    t.extend(extra.iter().copied().filter(|&e| e > 0.0 && e <= t_end));
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

fn count_out_of_band(u1: &TrigField, probe: &GridField) -> usize {
    let mut ks: Vec<_> = u1.modes().map(|m| m.wavevector).filter(|k| !probe.in_band(k)).collect();
    ks.sort();
    ks.dedup();
    ks.len()
}

fn remainder_window(
    y: &SampledTrajectory,
    t: f64,
    q: f64,
    cfg: &ExperimentConfig,
) -> Result<RemainderWindow> {
    let y_xt = xt_norm_sampled(y, t, &cfg.norms.carleson)?;
    let (ts, yt) = y.at(t);
    if (ts - t).abs() > 1e-9 * t {
        return Err(Error::Numerical(format!("no snapshot at T = {t}")));
    }
    let y_linf = linf_report(
        &linf_grid(yt, &cfg.norms.carleson.linf)?,
        &format!("grid {:?}", yt.dims()),
        "oversampled grid with Newton polish",
    );
    let q4t = q.powi(4) * t;
    Ok(RemainderWindow {
        t,
        linf_identity: y_linf.value <= y_xt.value / t.sqrt() * (1.0 + 1e-12),
        y_xt_over_q4t: if q4t > 0.0 { y_xt.value / q4t } else { f64::NAN },
        y_xt,
        y_linf,
    })
}

/// Scaling fits of the configured plan at the run's `K` and `Q`.
pub fn scaling_fits(cfg: &ExperimentConfig) -> Result<Vec<ScalingFit>> {
    let Some(plan) = &cfg.scaling else { return Ok(Vec::new()) };
    let rmax = plan.r_grid.iter().chain(&plan.n3_r_grid).copied().max().unwrap_or(1);
    let mut base = ScalingBase::geometric(cfg.family.k, cfg.q, cfg.family.r, plan.shell_ratio, rmax)?;
    base.t_window = cfg.t_window;
    base.besov = cfg.norms.besov;
    base.carleson = cfg.norms.carleson;
    let qg = &plan.q_grid;
    let rg: Vec<f64> = plan.r_grid.iter().map(|&r| r as f64).collect();
    let n3g: Vec<f64> = plan.n3_r_grid.iter().map(|&r| r as f64).collect();
    let jobs: [(Component, Axis, &[f64]); 7] = [
        (Component::U0Besov, Axis::Q, qg),
        (Component::U0Besov, Axis::R, &rg),
        (Component::U10Besov, Axis::Q, qg),
        (Component::U10Besov, Axis::R, &rg),
        (Component::U11Xt, Axis::R, &rg),
        (Component::N2Xt, Axis::R, &rg),
        (Component::N3Xt, Axis::R, &n3g),
    ];
    let mut out = Vec::with_capacity(jobs.len());
    for (i, (c, a, g)) in jobs.into_iter().enumerate() {
        // Along Q, hold r at the run's shell count.
        let mut b = base.clone();
        if a == Axis::Q {
            b.r = b.r.min(b.shells.len());
        }
        out.push(measure_scaling(c, a, g, &b, plan.bootstrap, cfg.seed.wrapping_add(i as u64))?);
    }
    Ok(out)
}

pub fn run_inflation_experiment(cfg: &ExperimentConfig) -> Result<InflationReport> {
    run_with_scaling(cfg, None)
}

/// As [`run_inflation_experiment`], reusing precomputed scaling fits.
pub fn run_with_scaling(cfg: &ExperimentConfig, scaling: Option<&[ScalingFit]>) -> Result<InflationReport> {
    cfg.validate()?;
    if cfg.nu != 1.0 {
        return Err(Error::Config(format!(
            "the exact first iterate is computed at unit viscosity; got nu = {}",
            cfg.nu
        )));
    }
    let dir = cfg.output.as_deref();
    if let Some(d) = dir {
        std::fs::create_dir_all(d)?;
    }
    let hash = cfg.manifest_hash();
    write_json(dir, "manifest.json", &Manifest { manifest_hash: hash.clone(), version: env!("CARGO_PKG_VERSION"), config: cfg })?;

    // construct
    let (fam, data): (_, InitialData) = (|| {
        let fam = cfg.family.build()?;
        let data = build_initial_data(&fam, cfg.q)?;
        Ok::<_, Error>((fam, data))
    })()
    .map_err(|e| e.in_stage("construct"))?;
    write_json(dir, "initial.json", &data)?;
    let k1 = fam.shells[0].magnitude();
    let t_window = cfg.window(&fam);
    let plateau = (1.0 / (k1 * k1), 1.0_f64.min(cfg.solver.t_end));

    // iterate
    let it = first_iterate(&data).map_err(|e| e.in_stage("iterate"))?;
    let (u10f, u11f) = split_u1(&it.u1, &fam);
    write_json(dir, "u1.json", &it.u1)?;

    // norms
    let norms = (|| {
        let u0_besov = besov_norm(&FrozenField::from_trig(&data.field, 0.0), &cfg.norms.besov)?;
        let u10n = besov_norm(&FrozenField::from_trig(&u10f, t_window), &cfg.norms.besov)?;
        let co = &cfg.norms.carleson;
        let u11_xt = xt_norm(&u11f, t_window, co)?;
        let n1_xt = xt_norm(&FirstIterate::duhamel_of(&it.n1)?, t_window, co)?;
        let n2_xt = xt_norm(&FirstIterate::duhamel_of(&it.n2)?, t_window, co)?;
        let n3_xt = xt_norm(&FirstIterate::duhamel_of(&it.n3)?, t_window, co)?;
        Ok::<_, Error>((u0_besov, u10n, u11_xt, n1_xt, n2_xt, n3_xt))
    })()
    .map_err(|e| e.in_stage("norms"))?;
    let (u0_besov, u10n, u11_xt, n1_xt, n2_xt, n3_xt) = norms;
    let q2 = cfg.q * cfg.q;
    let u10 = Plateau {
        window: plateau,
        t_eval: t_window,
        over_q2: if q2 > 0.0 { u10n.value / q2 } else { f64::NAN },
        norm: u10n,
    };

    let ladder = if cfg.q >= 1.0 { Some(build_time_ladder(cfg.q, &fam).map_err(|e| e.in_stage("ladder"))?) } else { None };

    let scaling = match scaling {
        Some(s) => s.to_vec(),
        None => scaling_fits(cfg).map_err(|e| e.in_stage("scaling"))?,
    };

    let mut report = InflationReport {
        manifest_hash: hash,
        params: RunParams {
            q: cfg.q,
            k: fam.base,
            r: fam.r(),
            shells: fam.magnitudes(),
            nu: cfg.nu,
            n: cfg.solver.n,
            dims: [0; 3],
            t_end: cfg.solver.t_end,
            t_window,
        },
        u0_besov,
        u10,
        u11_xt,
        n1_xt,
        n2_xt,
        n3_xt,
        resonances: it.resonances.len(),
        solver: None,
        besov_curve: Vec::new(),
        inflation: None,
        peak: None,
        remainder: Vec::new(),
        y_window: None,
        ladder,
        ladder_norms: Vec::new(),
        ladder_monotone: true,
        audit: Vec::new(),
        scaling,
    };

    if cfg.solve {
        solve_stages(cfg, &data, &it.u1, &u10f, &u11f, &mut report).map_err(|e| {
            let _ = write_json(dir, "report.partial.json", &report);
            e
        })?;
    }

    write_artifacts(dir, &report)?;
    Ok(report)
}

fn solve_stages(
    cfg: &ExperimentConfig,
    data: &InitialData,
    u1: &TrigField,
    u10: &TrigField,
    u11: &TrigField,
    report: &mut InflationReport,
) -> Result<()> {
    let dir = cfg.output.as_deref();
    let s = &cfg.solver;
    let k1 = data.family.shells[0].magnitude();
    let dims = dims_for(FrozenField::from_trig(&data.field, 0.0).bandwidth(), s.n);
    report.params.dims = dims;

    // solve
    let (run, out_of_band) = (|| {
        let u0 = spectralize(&data.field, 0.0, dims, cfg.nu)?;
        let mut extra = vec![report.params.t_window, 1.0 / (k1 * k1)];
        if let Some(l) = &report.ladder {
            extra.extend(l.entries.iter().map(|e| e.t_alpha));
        }
        let t_first = s.t_first.unwrap_or(1e-4 / (k1 * k1));
        let grid = crate::norms::carleson::snapshot_times(t_first, s.t_end, s.snapshots_per_decade);
        let scfg = SolverConfig {
            nu: cfg.nu,
            dt: s.dt,
            t_end: s.t_end,
            snapshots: merge_times(grid, &extra, s.t_end),
            linear: false,
            energy_tol: s.energy_tol,
            max_steps: s.max_steps,
        };
        let run = evolve(&u0, &scfg)?;
        Ok::<_, Error>((run, count_out_of_band(u1, &u0)))
    })()
    .map_err(|e| e.in_stage("solve"))?;
    let traj = &run.trajectory;
    report.solver = Some(SolverSummary {
        steps: run.steps,
        snapshots: traj.len(),
        energy_initial: run.diagnostics.first().map_or(0.0, |d| d.energy),
        energy_final: run.diagnostics.last().map_or(0.0, |d| d.energy),
        max_divergence: run.diagnostics.iter().map(|d| d.max_divergence).fold(0.0, f64::max),
        out_of_band_modes: out_of_band,
    });
    if let Some(d) = dir {
        write_diagnostics_csv(std::fs::File::create(d.join("diagnostics.csv"))?, &run.diagnostics)?;
    }
    if let Some(d) = dir {
        snapshot::write(traj.fields().last().expect("nonempty"), &d.join("u_final"))?;
    }

    // remainder
    let y = compute_remainder(traj, data, u1).map_err(|e| e.in_stage("remainder"))?;
    (|| {
        for (&t, yt) in y.times().iter().zip(y.fields()) {
            if t > 0.0 {
                report.remainder.push(RemainderPoint { t, y_linf: grid_linf(yt, cfg)? });
            }
        }
        if report.params.t_window <= s.t_end {
            report.y_window = Some(remainder_window(&y, report.params.t_window, cfg.q, cfg)?);
        }
        Ok::<_, Error>(())
    })()
    .map_err(|e| e.in_stage("remainder"))?;

    // ladder
    (|| {
        if let Some(l) = &report.ladder {
            for e in &l.entries {
                if e.t_alpha <= s.t_end {
                    let window = remainder_window(&y, e.t_alpha, cfg.q, cfg)?;
                    report.ladder_norms.push(LadderNorm { alpha: e.alpha, r_alpha: e.r_alpha, window });
                }
            }
        }
        report.ladder_monotone =
            report.ladder_norms.windows(2).all(|w| w[1].window.y_xt.value >= w[0].window.y_xt.value);
        Ok::<_, Error>(())
    })()
    .map_err(|e| e.in_stage("ladder"))?;

    // besov curve and audit
    (|| {
        let (lo, hi) = report.u10.window;
        let lin = heat_flow(&data.field);
        let u0b = report.u0_besov.value;
        for (i, (&t, u)) in traj.times().iter().zip(traj.fields()).enumerate() {
            if t <= 0.0 {
                continue;
            }
            let norm = besov_norm_grid(u, &cfg.norms.besov)?;
            let ratio = if u0b > 0.0 { norm.value / u0b } else { f64::NAN };
            let in_window = t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12);
            if !in_window {
                report.besov_curve.push(CurvePoint { t, norm, ratio, in_window });
                continue;
            }
            let diff = u.axpy(-1.0, &spectralize_truncated(&lin, t, u.dims(), cfg.nu)?)?;
            let lhs = besov_norm_grid(&diff, &cfg.norms.besov)?;
            let u10b = besov_norm(&FrozenField::from_trig(u10, t), &cfg.norms.besov)?;
            let u11l = linf_report(
                &linf_frozen(&FrozenField::from_trig(u11, t), &cfg.norms.besov.linf)?,
                "exact",
                "branch and bound on the trigonometric field",
            );
            let yl = grid_linf(&y.fields()[i], cfg)?;
            let rhs = u10b.value - u11l.value - yl.value;
            let holds = lhs.value >= rhs - 1e-9 * lhs.value.abs().max(rhs.abs());
            report.audit.push(AuditRow { t, lhs, u10_besov: u10b, u11_linf: u11l, y_linf: yl, rhs, holds });
            report.besov_curve.push(CurvePoint { t, norm, ratio, in_window });
        }
        let best = |window_only: bool| {
            report
                .besov_curve
                .iter()
                .filter(|p| p.ratio.is_finite() && (p.in_window || !window_only))
                .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
                .map(|p| Inflation { ratio: p.ratio, t_star: p.t, u_besov: p.norm.value })
        };
        report.inflation = best(true);
        report.peak = best(false);
        if let (Some(d), Some(inf)) = (dir, &report.inflation) {
            let (_, u) = traj.at(inf.t_star);
            snapshot::write(u, &d.join("u_t_star"))?;
        }
        Ok::<_, Error>(())
    })()
    .map_err(|e| e.in_stage("report"))?;
    Ok(())
}

fn write_artifacts(dir: Option<&Path>, r: &InflationReport) -> Result<()> {
    let Some(d) = dir else { return Ok(()) };
    write_json(dir, "report.json", r)?;
    let _ = std::fs::remove_file(d.join("report.partial.json"));
    write_reports_csv(std::fs::File::create(d.join("norms.csv"))?, &r.norm_rows())?;
    let curve: Vec<CurveRow> = r
        .besov_curve
        .iter()
        .map(|p| CurveRow {
            t: p.t,
            u_besov: p.norm.value,
            ratio: p.ratio,
            t_star: p.norm.witnesses.t_star,
            in_window: p.in_window,
        })
        .collect();
    write_csv(dir, "besov_curve.csv", &curve)?;
    let rem: Vec<RemainderRow> = r
        .remainder
        .iter()
        .map(|p| RemainderRow { t: p.t, y_linf: p.y_linf.value, sqrt_t_y_linf: p.t.sqrt() * p.y_linf.value })
        .collect();
    write_csv(dir, "remainder.csv", &rem)?;
    let lad: Vec<LadderRow> = r
        .ladder_norms
        .iter()
        .map(|l| LadderRow {
            alpha: l.alpha,
            r_alpha: l.r_alpha,
            t_alpha: l.window.t,
            y_xt: l.window.y_xt.value,
            y_linf: l.window.y_linf.value,
            y_xt_over_q4t: l.window.y_xt_over_q4t,
        })
        .collect();
    write_csv(dir, "ladder.csv", &lad)?;
    let audit: Vec<AuditCsv> = r
        .audit
        .iter()
        .map(|a| AuditCsv {
            t: a.t,
            lhs: a.lhs.value,
            u10_besov: a.u10_besov.value,
            u11_linf: a.u11_linf.value,
            y_linf: a.y_linf.value,
            rhs: a.rhs,
            holds: a.holds,
        })
        .collect();
    write_csv(dir, "audit.csv", &audit)?;
    let mut dat = String::from("# t ratio y_linf\n");
    for p in &r.besov_curve {
        let y = r.remainder.iter().find(|y| y.t == p.t).map_or(f64::NAN, |y| y.y_linf.value);
        dat.push_str(&format!("{} {} {}\n", p.t, p.ratio, y));
    }
    std::fs::write(d.join("plot.dat"), dat)?;
    std::fs::write(
        d.join("plot.gp"),
        "set logscale x\nset xlabel 't'\nset key left\n\
         plot 'plot.dat' using 1:2 with linespoints title '|u(t)|_B / |u0|_B', \\\n     \
         'plot.dat' using 1:3 with lines title '|y(t)|_inf'\n",
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merged_times_keep_extras_exactly() {
        let t = merge_times(vec![0.0, 0.1, 0.2 + 1e-14, 0.4], &[0.2, 0.3, 5.0], 1.0);
        assert_eq!(t, vec![0.0, 0.1, 0.2, 0.3, 0.4]);
    }

    #[test]
    fn exact_only_run() {
        let mut cfg = ExperimentConfig::default();
        cfg.solve = false;
        let r = run_inflation_experiment(&cfg).unwrap();
        assert!(r.u0_besov.value > 0.0);
        assert!(r.solver.is_none());
        assert_eq!(r.ladder.as_ref().unwrap().entries.len(), 2);
    }

    #[test]
    fn rejects_non_unit_viscosity() {
        let cfg = ExperimentConfig { nu: 0.5, ..ExperimentConfig::default() };
        assert_eq!(run_inflation_experiment(&cfg).unwrap_err().exit_code(), 2);
    }
}
