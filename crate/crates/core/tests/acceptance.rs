//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! A criterion that is not met is reported as FAIL; the process exits
//! nonzero only when the harness itself breaks (a panic or library error).
//! Pass criterion numbers as arguments to run a subset.

use std::num::NonZeroUsize;
use std::panic::AssertUnwindSafe;
use std::sync::OnceLock;
use std::time::Instant;

use gauss_quad::GaussLegendre;
use nsinflation::calculus::{
    duhamel_integrate, first_iterate, heat_flow, FrozenField, Phase, Profile, Term, TrigField, VectorProfile,
};
use nsinflation::construction::{build_frequency_family, build_initial_data, InitialData, Preset};
use nsinflation::experiments::{run_inflation_experiment, scaling_fits, sweep, ExperimentConfig, InflationReport, ScalingPlan};
use nsinflation::norms::{besov_norm, besov_norm_grid, bmo_neg1_norm, linf_frozen, xt_norm, BesovOptions, CarlesonOptions};
use nsinflation::solver::{evolve, nonlinear_term, spectralize, DtPolicy, GridField, SolverConfig};
use nsinflation::vec3::{self, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = nsinflation::Result<(bool, String)>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn desk(shells: &[i64], q: f64) -> InitialData {
    let fam = build_frequency_family(2, shells.len(), Preset::Desk, Some(shells)).unwrap();
    build_initial_data(&fam, q).unwrap()
}

// ---------------------------------------------------------------------------
// 1. closed-form Duhamel integrals against adaptive quadrature

fn duhamel_vs_quadrature() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let mut m = [0i64; 3];
        while m == [0, 0, 0] {
            m = std::array::from_fn(|_| rng.gen_range(-6..=6));
        }
        if !vec3::is_lex_positive(&m) {
            m = vec3::neg(&m);
        }
        let m2 = vec3::norm2(&m);
        let lambda = if i % 4 == 0 { m2 } else { m2 * rng.gen_range(0.0..3.0) };
        let power = 0u8;
        let t = 10f64.powf(rng.gen_range(-3.0..0.5));
        let coef: Vec3 = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let mut f = TrigField::zero();
        f.insert(m, Phase::Cos, Profile::new(vec![Term { coef, rate: lambda, power }])?);
        let d = duhamel_integrate(&f)?;
        let got = d.get(m, Phase::Cos).map_or([0.0; 3], |p| p.eval(t));

        let g = |s: f64| (-(t - s) * m2 - lambda * s).exp() * s.powi(power as i32);
        let panels = 8;
        let integrate = |tol: f64| -> f64 {
            (0..panels)
                .map(|j| {
                    let (a, b) = (t * j as f64 / panels as f64, t * (j + 1) as f64 / panels as f64);
                    quadrature::double_exponential::integrate(g, a, b, tol / panels as f64).integral
                })
                .sum()
        };
        let rough = integrate(1e-8 * t.powi(power as i32 + 1));
        let exact = integrate(1e-14 * rough.abs());
        let want = vec3::scale(&coef, exact);
        let err = vec3::norm(&vec3::sub(&got, &want)) / vec3::norm(&want);
        worst = worst.max(err);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((worst <= 1e-9 && secs < 10.0, format!("200 cases, max rel err {worst:.2e} (≤ 1e-9), {secs:.2} s (< 10 s)")))
}

// ---------------------------------------------------------------------------
// 2. exact first iterate against pseudospectral time quadrature

/// `∫₀ᵗ e^{(t−s)Δ} P(U·∇U)(s) ds` with `U = e^{sΔ}u₀` on the grid, by
/// composite Gauss–Legendre on panels graded toward both ends.
fn pseudospectral_u1(u0: &TrigField, t: f64, dims: [usize; 3], rule: &GaussLegendre) -> nsinflation::Result<GridField> {
    let lin = heat_flow(u0);
    let levels = 12;
    let mut cuts = vec![0.0];
    cuts.extend((1..=levels).rev().map(|j| t * 0.5f64.powi(j + 1)));
    cuts.push(0.5 * t);
    cuts.extend((1..=levels).map(|j| t - t * 0.5f64.powi(j + 1)));
    cuts.push(t);
    let mut acc = GridField::zeros(dims, t, 1.0)?;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        for &(x, wt) in rule.as_node_weight_pairs() {
            let s = 0.5 * (a + b) + 0.5 * (b - a) * x;
            let us = spectralize(&lin, s, dims, 1.0)?;
            let n = nonlinear_term(&us)?.heat(t - s);
            acc = acc.axpy(-0.5 * (b - a) * wt, &n)?;
        }
    }
    Ok(acc)
}

fn first_iterate_vs_solver() -> Outcome {
    let start = Instant::now();
    let data = desk(&[4, 8], 1.0);
    let u1 = first_iterate(&data)?.u1;
    let dims = [64, 64, 1];
    let rule = GaussLegendre::new(NonZeroUsize::new(16).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cases: Vec<(f64, Vec3)> = (0..100)
        .map(|_| {
            let t = 10f64.powf(rng.gen_range(-3.0..0.0));
            let x = [rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(0.0..std::f64::consts::TAU), 0.0];
            (t, x)
        })
        .collect();
    let errs: Vec<f64> = cases
        .par_iter()
        .map(|&(t, x)| {
            let g = pseudospectral_u1(&data.field, t, dims, &rule)?;
            let exact = u1.evaluate(&x, t);
            let scale = linf_frozen(&FrozenField::from_trig(&u1, t), &Default::default())?.value;
            Ok(vec3::norm(&vec3::sub(&g.evaluate(&x), &exact)) / scale)
        })
        .collect::<nsinflation::Result<_>>()?;
    let worst = errs.iter().copied().fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-6 && secs < 120.0,
        format!("N=64, shells {{4,8}}, 100 (x,t), max rel err {worst:.2e} (≤ 1e-6), {secs:.1} s (< 120 s)"),
    ))
}

// ---------------------------------------------------------------------------
// 3. norm estimator oracles

fn dilate(f: &TrigField, l: i64) -> TrigField {
    let mut g = TrigField::zero();
    for m in f.modes() {
        g.insert(m.wavevector.map(|c| c * l), m.phase, m.profile.scale(l as f64));
    }
    g
}

fn norm_oracles() -> Outcome {
    let bo = BesovOptions::default();
    let co = CarlesonOptions::default();
    let mut closed: f64 = 0.0;
    for m in [1i64, 8, 64] {
        let mut f = TrigField::zero();
        f.insert([m, 0, 0], Phase::Cos, VectorProfile::constant([0.0, 1.0, 0.0]));
        let v = besov_norm(&FrozenField::from_trig(&f, 0.0), &bo)?.value;
        closed = closed.max(rel(v, 1.0 / (m as f64 * (2.0 * std::f64::consts::E).sqrt())));
    }

    let data = desk(&[4, 8], 1.0);
    let u0 = &data.field;
    let d = dilate(u0, 2);
    let t = 0.25;
    let scale = [
        rel(besov_norm(&FrozenField::from_trig(u0, 0.0), &bo)?.value, besov_norm(&FrozenField::from_trig(&d, 0.0), &bo)?.value),
        rel(bmo_neg1_norm(u0, &co)?.value, bmo_neg1_norm(&d, &co)?.value),
        rel(xt_norm(&heat_flow(u0), t, &co)?.value, xt_norm(&heat_flow(&d), t / 4.0, &co)?.value),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let u1 = first_iterate(&data)?.u1;
    let t1 = 1.0 / 16.0;
    let bo2 = BesovOptions { per_decade: 2 * bo.per_decade, t_rtol: 0.5 * bo.t_rtol, starts: 2 * bo.starts, ..bo };
    let co2 = CarlesonOptions {
        t_per_decade: 2 * co.t_per_decade,
        r_per_decade: 2 * co.r_per_decade,
        starts: 2 * co.starts,
        ..co
    };
    let fz = FrozenField::from_trig(&u1, t1);
    let g64 = spectralize(&u1, t1, [64, 64, 1], 1.0)?;
    let g128 = spectralize(&u1, t1, [128, 128, 1], 1.0)?;
    let conv = [
        rel(besov_norm(&fz, &bo)?.value, besov_norm(&fz, &bo2)?.value),
        rel(besov_norm_grid(&g64, &bo)?.value, besov_norm_grid(&g128, &bo2)?.value),
        rel(xt_norm(&u1, t1, &co)?.value, xt_norm(&u1, t1, &co2)?.value),
        rel(bmo_neg1_norm(u0, &co)?.value, bmo_neg1_norm(u0, &co2)?.value),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok((
        closed <= 1e-3 && scale <= 1e-10 && conv <= 0.02,
        format!(
            "single mode max rel err {closed:.2e} (≤ 1e-3), dilation by 2 max rel change {scale:.2e} (≤ 1e-10), \
             resolution doubling max rel change {conv:.2e} (≤ 0.02)"
        ),
    ))
}

// ---------------------------------------------------------------------------
// 4. scaling exponents

fn scaling_laws() -> Outcome {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::default();
    cfg.q = 1.0;
    cfg.solve = false;
    // N₃ vanishes for one shell, so its r-axis starts at two shells.
    cfg.scaling = Some(ScalingPlan { r_grid: vec![1, 2, 4], n3_r_grid: vec![2, 4, 8], ..ScalingPlan::default() });
    let fits = scaling_fits(&cfg)?;
    let targets = [
        ("u0_besov", "q", 1.0, 0.05),
        ("u0_besov", "r", -0.5, 0.1),
        ("u10_besov", "q", 2.0, 0.1),
        ("u11_xt", "r", -0.5, 0.2),
        ("n2_xt", "r", -0.5, 0.2),
        ("n3_xt", "r", -1.0, 0.25),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (c, axis, want, tol) in targets {
        let f = fits
            .iter()
            .find(|f| f.component.as_str() == c && format!("{:?}", f.axis).eq_ignore_ascii_case(axis))
            .expect("fit present");
        let good = (f.exponent - want).abs() <= tol;
        ok &= good;
        parts.push(format!(
            "{c}/{axis} {:+.3} [{:+.3},{:+.3}] want {want:+.2}±{tol} {}",
            f.exponent,
            f.ci.0,
            f.ci.1,
            if good { "ok" } else { "off" }
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 900.0;
    parts.push(format!("{secs:.0} s (< 900 s)"));
    Ok((ok, parts.join("; ")))
}

// ---------------------------------------------------------------------------
// 5. solver validation

fn grid_from(dims: [usize; 3], f: impl Fn(f64, f64, f64) -> [f64; 3], nu: f64) -> nsinflation::Result<GridField> {
    let tau = std::f64::consts::TAU;
    let len = dims.iter().product();
    let mut vals = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            for l in 0..dims[2] {
                let idx = (i * dims[1] + j) * dims[2] + l;
                let v = f(
                    tau * i as f64 / dims[0] as f64,
                    tau * j as f64 / dims[1] as f64,
                    tau * l as f64 / dims[2] as f64,
                );
                for a in 0..3 {
                    vals[a][idx] = v[a];
                }
            }
        }
    }
    GridField::from_physical(dims, vals, 0.0, nu)
}

fn max_diff(a: &GridField, b: &GridField) -> f64 {
    let (pa, pb) = (a.to_physical(), b.to_physical());
    (0..3).flat_map(|c| pa[c].iter().zip(&pb[c]).map(|(x, y)| (x - y).abs()).collect::<Vec<_>>()).fold(0.0, f64::max)
}

fn scfg(nu: f64, t_end: f64, dt: DtPolicy, snapshots: Vec<f64>) -> SolverConfig {
    SolverConfig { nu, dt, t_end, snapshots, ..SolverConfig::default() }
}

fn solver_validation() -> Outcome {
    let cfl = DtPolicy::Cfl { safety: 0.5, max_dt: 0.01 };
    // a single plane wave is an exact solution: its self-advection vanishes
    let wave = |x: f64, y: f64, _z: f64| {
        let s = 5.0 * (3.0 * x + y).sin();
        [s, -3.0 * s, 0.0]
    };
    let u0 = grid_from([16, 16, 1], wave, 1.0)?;
    let run = evolve(&u0, &scfg(1.0, 1.0, cfl, vec![0.0, 1.0]))?;
    let single = max_diff(&run.trajectory.fields()[1], &u0.scale((-10.0f64).exp()));

    let tg = |x: f64, y: f64, _z: f64| [x.sin() * y.cos(), -x.cos() * y.sin(), 0.0];
    let u0 = grid_from([32, 32, 1], tg, 1.0)?;
    let run = evolve(&u0, &scfg(1.0, 0.5, cfl, vec![0.0, 0.5]))?;
    let taylor = max_diff(&run.trajectory.fields()[1], &u0.scale((-1.0f64).exp()));

    let tg3 = |x: f64, y: f64, z: f64| [x.sin() * y.cos() * z.cos(), -x.cos() * y.sin() * z.cos(), 0.0];
    let u0 = grid_from([16, 16, 16], tg3, 0.05)?;
    let at = |dt: f64| -> nsinflation::Result<GridField> {
        Ok(evolve(&u0, &scfg(0.05, 1.0, DtPolicy::Fixed { dt }, vec![0.0, 1.0]))?.trajectory.fields()[1].clone())
    };
    let reference = at(1.0 / 256.0)?;
    let errs = [0.2, 0.1, 0.05].map(|h| at(h).map(|u| max_diff(&u, &reference)));
    let errs: Vec<f64> = errs.into_iter().collect::<nsinflation::Result<_>>()?;
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let order_ok = orders.iter().all(|o| (o - 4.0).abs() <= 0.2);

    let data = desk(&[8, 32], 2.0);
    let g = spectralize(&data.field, 0.0, [128, 128, 1], 1.0)?;
    let snaps = nsinflation::norms::carleson::snapshot_times(1e-4 / 64.0, 0.5, 16);
    let run = evolve(&g, &scfg(1.0, 0.5, DtPolicy::default(), snaps))?;
    let monotone = run.diagnostics.windows(2).all(|w| w[1].energy <= w[0].energy * (1.0 + 1e-12));
    let scale = g.coeffs().iter().flat_map(|c| c.iter()).map(|z| z.norm()).fold(0.0, f64::max);
    let div = run.trajectory.fields().iter().map(|u| u.divergence() / scale).fold(0.0, f64::max);

    Ok((
        single <= 1e-10 && taylor <= 1e-6 && order_ok && monotone && div <= 1e-10,
        format!(
            "single mode {single:.1e} (≤ 1e-10), Taylor-Green t=0.5 {taylor:.1e} (≤ 1e-6), RK4 orders {:?} (4 ± 0.2), \
             energy monotone {monotone} over {} snapshots, max rel divergence {div:.1e} (≤ 1e-10)",
            orders.iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>(),
            run.diagnostics.len()
        ),
    ))
}

// ---------------------------------------------------------------------------
// 6 and 7. desk baseline and its neighbours

struct Desk {
    q: f64,
    n: usize,
    report: InflationReport,
    secs: f64,
}

fn desk_runs() -> &'static nsinflation::Result<Vec<Desk>> {
    static RUNS: OnceLock<nsinflation::Result<Vec<Desk>>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let run = |q: f64, n: usize| -> nsinflation::Result<Desk> {
            let mut c = ExperimentConfig::default();
            c.q = q;
            c.solver.n = n;
            let start = Instant::now();
            let report = run_inflation_experiment(&c)?;
            Ok(Desk { q, n, report, secs: start.elapsed().as_secs_f64() })
        };
        // the baseline alone, for an honest runtime
        let mut out = vec![run(2.0, 128)?];
        let rest: Vec<Desk> = [(2.0, 256), (0.5, 128), (1.0, 128), (4.0, 128)]
            .par_iter()
            .map(|&(q, n)| run(q, n))
            .collect::<nsinflation::Result<_>>()?;
        out.extend(rest);
        Ok(out)
    })
}

fn find(runs: &[Desk], q: f64, n: usize) -> &Desk {
    runs.iter().find(|d| d.q == q && d.n == n).expect("run present")
}

fn mechanism() -> Outcome {
    let runs = desk_runs().as_ref().map_err(|e| nsinflation::Error::Numerical(e.to_string()))?;
    let base = find(runs, 2.0, 128);
    let fine = find(runs, 2.0, 256);
    let inf = base.report.inflation.as_ref().expect("solver ran");
    let inf_fine = fine.report.inflation.as_ref().expect("solver ran");
    let k1 = 8.0f64;
    let inside = inf.t_star > 1.0 / (k1 * k1) && inf.t_star < 1.0;
    let stable = rel(inf.ratio, inf_fine.ratio) <= 0.01;
    let by_q: Vec<f64> = [1.0, 2.0, 4.0].iter().map(|&q| find(runs, q, 128).report.inflation.as_ref().unwrap().ratio).collect();
    let monotone = by_q.windows(2).all(|w| w[1] > w[0]);
    let fast = base.secs <= 1800.0;
    let big = inf.ratio >= 2.0;
    Ok((
        big && inside && stable && monotone && fast,
        format!(
            "ratio {:.4} (≥ 2: {big}) at t* = {:.4e} (inside (1/64, 1): {inside}); N=256 ratio {:.4} (1%: {stable}); \
             ratio over Q=1,2,4 {:?} (increasing: {monotone}); baseline {:.0} s (≤ 1800 s)",
            inf.ratio,
            inf.t_star,
            inf_fine.ratio,
            by_q.iter().map(|r| (r * 1e4).round() / 1e4).collect::<Vec<_>>(),
            base.secs
        ),
    ))
}

fn remainder() -> Outcome {
    let runs = desk_runs().as_ref().map_err(|e| nsinflation::Error::Numerical(e.to_string()))?;
    let mut by_q: Vec<(f64, f64)> = Vec::new();
    let mut identity = true;
    let mut rows = 0;
    for d in runs.iter().filter(|d| d.n == 128) {
        let w = d.report.y_window.as_ref().expect("window inside t_end");
        by_q.push((d.q, w.y_xt_over_q4t));
        for r in std::iter::once(w).chain(d.report.ladder_norms.iter().map(|l| &l.window)) {
            identity &= r.linf_identity;
            rows += 1;
        }
    }
    by_q.sort_by(|a, b| a.0.total_cmp(&b.0));
    let bounded = by_q.iter().all(|&(_, v)| v.is_finite() && v < 3.0);
    let decreasing = by_q.windows(2).all(|w| w[0].1 < w[1].1);
    Ok((
        bounded && decreasing && identity,
        format!(
            "‖y‖_XT/(Q⁴T) at T=1/8 over Q {:?} (bounded by 3: {bounded}, decreasing as Q decreases: {decreasing}); \
             L∞ identity on {rows} rows: {identity}",
            by_q.iter().map(|&(q, v)| (q, (v * 1e5).round() / 1e5)).collect::<Vec<_>>()
        ),
    ))
}

// ---------------------------------------------------------------------------
// 8. determinism

fn determinism() -> Outcome {
    let mut c = ExperimentConfig::default();
    c.family.shells = Some(vec![4, 8]);
    c.solver.n = 32;
    c.solver.t_end = 0.25;
    c.sweep.q = vec![0.5, 1.0, 2.0];
    let a = tempfile::tempdir()?;
    let b = tempfile::tempdir()?;
    let mut ca = c.clone();
    ca.output = Some(a.path().to_path_buf());
    let mut cb = c;
    cb.output = Some(b.path().to_path_buf());
    let sa = sweep(&ca)?;
    let sb = sweep(&cb)?;
    let fa = std::fs::read(a.path().join("sweep.csv"))?;
    let fb = std::fs::read(b.path().join("sweep.csv"))?;
    let same = sa.csv == sb.csv && fa == fb && fa == sa.csv && ca.manifest_hash() == cb.manifest_hash();
    Ok((same, format!("{} rows, {} bytes, sha256 {} (identical: {same})", sa.rows.len(), fa.len(), &sa.summary.csv_sha256[..16])))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("exact Duhamel integrals vs adaptive quadrature", duhamel_vs_quadrature),
        ("first iterate vs pseudospectral quadrature", first_iterate_vs_solver),
        ("norm estimator oracles", norm_oracles),
        ("scaling exponents", scaling_laws),
        ("solver validation", solver_validation),
        ("inflation mechanism on the desk baseline", mechanism),
        ("remainder behaviour", remainder),
        ("sweep determinism", determinism),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut broken = 0;
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let res = std::panic::catch_unwind(AssertUnwindSafe(f));
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(Ok((pass, detail))) => {
                if !pass {
                    failed += 1;
                }
                println!("criterion {n}: {} {name}: {detail} [{secs:.1} s]", if pass { "PASS" } else { "FAIL" });
            }
            Ok(Err(e)) => {
                broken += 1;
                println!("criterion {n}: ERROR {name}: {e}");
            }
            Err(_) => {
                broken += 1;
                println!("criterion {n}: ERROR {name}: panicked");
            }
        }
    }
    println!("acceptance: {failed} failed, {broken} harness errors");
    if broken > 0 {
        std::process::exit(1);
    }
}
