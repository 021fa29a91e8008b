//! Integrating-factor RK4 for `∂_t u = νΔu - P∇·(u⊗u)`.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{band_limit, Fft3, GridField};
use crate::norms::SampledTrajectory;
use crate::vec3;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum DtPolicy {
    Fixed { dt: f64 },
    /// `dt = safety · Δx / ‖u‖∞`, capped by `max_dt`.
    Cfl { safety: f64, max_dt: f64 },
}

impl Default for DtPolicy {
    fn default() -> Self {
        DtPolicy::Cfl { safety: 0.5, max_dt: 1e-2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub nu: f64,
    pub dt: DtPolicy,
    pub t_end: f64,
    /// Snapshot times in `[0, t_end]`, strictly increasing.
    pub snapshots: Vec<f64>,
    /// Disables the nonlinear term (pure heat flow).
    pub linear: bool,
    /// Allowed relative energy increase per step.
    pub energy_tol: f64,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            nu: 1.0,
            dt: DtPolicy::default(),
            t_end: 1.0,
            snapshots: vec![0.0, 1.0],
            linear: false,
            energy_tol: 1e-8,
            max_steps: 10_000_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::Config(format!("viscosity must be nonnegative, got {}", self.nu)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.snapshots.is_empty()
            || self.snapshots[0] < 0.0
            || self.snapshots.windows(2).any(|w| w[1] <= w[0])
            || *self.snapshots.last().unwrap() > self.t_end * (1.0 + 1e-12)
        {
            return Err(Error::Config("snapshot times must increase within [0, t_end]".into()));
        }
        match self.dt {
            DtPolicy::Fixed { dt } if !(dt > 0.0 && dt.is_finite()) => {
                Err(Error::Config(format!("fixed dt must be positive, got {dt}")))
            }
            DtPolicy::Cfl { safety, max_dt } if !(safety > 0.0 && max_dt > 0.0) => {
                Err(Error::Config("CFL safety and max_dt must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Per-snapshot observables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub time: f64,
    pub energy: f64,
    pub enstrophy: f64,
    pub max_divergence: f64,
    /// `(shell index ⌊|k|+½⌋, energy in shell)` for nonempty shells.
    pub spectrum_by_shell: Vec<(u64, f64)>,
}

pub fn diagnostics(u: &GridField) -> Diagnostics {
    let vol = (2.0 * std::f64::consts::PI).powi(3);
    let mut energy = 0.0;
    let mut enstrophy = 0.0;
    let mut shells = std::collections::BTreeMap::new();
    for idx in 0..u.len() {
        let e: f64 = (0..3).map(|a| u.coeffs()[a][idx].norm_sqr()).sum();
        if e == 0.0 {
            continue;
        }
        let k2 = vec3::norm2(&u.wavevector(idx));
        energy += e;
        enstrophy += k2 * e;
        *shells.entry((k2.sqrt() + 0.5).floor() as u64).or_insert(0.0) += 0.5 * vol * e;
    }
    Diagnostics {
        time: u.time,
        energy: 0.5 * vol * energy,
        enstrophy: 0.5 * vol * enstrophy,
        max_divergence: u.divergence(),
        spectrum_by_shell: shells.into_iter().collect(),
    }
}

/// `time,energy,enstrophy,max_divergence` rows.
pub fn write_diagnostics_csv<W: std::io::Write>(out: W, rows: &[Diagnostics]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "energy", "enstrophy", "max_divergence"])?;
    for d in rows {
        w.write_record([d.time, d.energy, d.enstrophy, d.max_divergence].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Workspace for repeated nonlinear evaluations on one grid.
pub struct Nonlinear {
    fft: Fft3,
    dims: [usize; 3],
    kvec: Vec<[f64; 3]>,
    keep: Vec<bool>,
}

impl Nonlinear {
    pub fn new(dims: [usize; 3]) -> Result<Self> {
        let probe = GridField::zeros(dims, 0.0, 0.0)?;
        let band = dims.map(band_limit);
        let mut kvec = Vec::with_capacity(probe.len());
        let mut keep = Vec::with_capacity(probe.len());
        for idx in 0..probe.len() {
            let k = probe.wavevector(idx);
            kvec.push(vec3::to_f64(&k));
            keep.push((0..3).all(|a| k[a].abs() <= band[a]));
        }
        Ok(Self { fft: Fft3::new(dims), dims, kvec, keep })
    }

    /// `-P ∇·(u⊗u)`, dealiased, and `‖u‖∞` on the grid.
    pub fn eval(&self, u: &[Vec<Complex64>; 3]) -> ([Vec<Complex64>; 3], f64) {
        let len = self.fft.len();
        let phys: Vec<Vec<f64>> = u
            .iter()
            .map(|c| {
                let mut b = c.clone();
                self.fft.inverse(&mut b);
                b.into_iter().map(|z| z.re).collect()
            })
            .collect();
        let mut umax: f64 = 0.0;
        for i in 0..len {
            umax = umax.max((phys[0][i].powi(2) + phys[1][i].powi(2) + phys[2][i].powi(2)).sqrt());
        }
        // products u_j u_l, j ≤ l
        let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
        let mut prod: Vec<Vec<Complex64>> = pairs
            .iter()
            .map(|&(j, l)| {
                let mut b: Vec<Complex64> = (0..len).map(|i| Complex64::new(phys[j][i] * phys[l][i], 0.0)).collect();
                self.fft.forward(&mut b);
                b
            })
            .collect();
        let pidx = |j: usize, l: usize| -> usize {
            let (a, b) = if j <= l { (j, l) } else { (l, j) };
            pairs.iter().position(|&p| p == (a, b)).unwrap()
        };
        let mut out = [vec![Complex64::new(0.0, 0.0); len], vec![Complex64::new(0.0, 0.0); len], vec![Complex64::new(0.0, 0.0); len]];
        let i_unit = Complex64::new(0.0, 1.0);
        for idx in 0..len {
            if !self.keep[idx] {
                continue;
            }
            let k = self.kvec[idx];
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 == 0.0 {
                continue;
            }
            let mut f = [Complex64::new(0.0, 0.0); 3];
            for (j, fj) in f.iter_mut().enumerate() {
                let mut s = Complex64::new(0.0, 0.0);
                for l in 0..3 {
                    s += prod[pidx(j, l)][idx] * k[l];
                }
                *fj = -i_unit * s;
            }
            let kf = (f[0] * k[0] + f[1] * k[1] + f[2] * k[2]) / k2;
            for a in 0..3 {
                out[a][idx] = f[a] - kf * k[a];
            }
        }
        prod.clear();
        (out, umax)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    fn k2(&self, idx: usize) -> f64 {
        let k = self.kvec[idx];
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }
}

/// `-P(u·∇)u` of a grid field.
pub fn nonlinear_term(u: &GridField) -> Result<GridField> {
    let nl = Nonlinear::new(u.dims())?;
    let (out, _) = nl.eval(u.coeffs());
    GridField::from_coeffs(u.dims(), out, u.time, u.nu)
}

/// Result of a solver run.
#[derive(Clone, Debug)]
pub struct SolverRun {
    pub trajectory: SampledTrajectory,
    pub diagnostics: Vec<Diagnostics>,
    pub steps: usize,
}

fn energy_of(u: &[Vec<Complex64>; 3]) -> f64 {
    u.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum()
}

/// Advances `u0` to the configured snapshot times.
pub fn evolve(u0: &GridField, cfg: &SolverConfig) -> Result<SolverRun> {
    cfg.validate()?;
    let dims = u0.dims();
    let nl = Nonlinear::new(dims)?;
    let len = u0.len();
    let dx = dims.iter().filter(|&&n| n > 1).map(|&n| 2.0 * std::f64::consts::PI / n as f64).fold(f64::INFINITY, f64::min);
    let nu = cfg.nu;
    let mut u = u0.coeffs().clone();
    // project and dealias the initial state
    for idx in 0..len {
        if !nl.keep[idx] {
            for c in u.iter_mut() {
                c[idx] = Complex64::new(0.0, 0.0);
            }
        }
    }
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut times = Vec::new();
    let mut fields = Vec::new();
    let mut diags = Vec::new();
    let mut energy = energy_of(&u);
    let (mut nl_u, mut umax) = if cfg.linear { (zero3(len), 0.0) } else { nl.eval(&u) };
    for &ts in &cfg.snapshots {
        while t < ts * (1.0 - 1e-14) && ts - t > 1e-300 {
            let mut h = match cfg.dt {
                DtPolicy::Fixed { dt } => dt,
                DtPolicy::Cfl { safety, max_dt } => {
                    if umax > 0.0 {
                        (safety * dx / umax).min(max_dt)
                    } else {
                        max_dt
                    }
                }
            };
            if t + h > ts || ts - (t + h) < 1e-12 * h {
                h = ts - t;
            }
            let next = step(&nl, &u, &nl_u, h, nu, cfg.linear);
            u = next;
            t = if (ts - (t + h)).abs() <= 1e-12 * h { ts } else { t + h };
            steps += 1;
            if steps > cfg.max_steps {
                return Err(Error::Budget { what: "solver steps", needed: steps, budget: cfg.max_steps });
            }
            let e = energy_of(&u);
            if !e.is_finite() {
                return Err(Error::Numerical(format!("non-finite state at t = {t:.6e} after {steps} steps")));
            }
            if e > energy * (1.0 + cfg.energy_tol) + 1e-300 {
                return Err(Error::Numerical(format!(
                    "energy increased by {:.3e} (relative) at t = {t:.6e}; step {steps}",
                    e / energy - 1.0
                )));
            }
            energy = e;
            let r = if cfg.linear { (zero3(len), 0.0) } else { nl.eval(&u) };
            nl_u = r.0;
            umax = r.1;
        }
        let g = GridField::from_coeffs(dims, u.clone(), ts, nu)?;
        diags.push(diagnostics(&g));
        times.push(ts);
        fields.push(g);
    }
    Ok(SolverRun { trajectory: SampledTrajectory::new(times, fields)?, diagnostics: diags, steps })
}

fn zero3(len: usize) -> [Vec<Complex64>; 3] {
    [vec![Complex64::new(0.0, 0.0); len], vec![Complex64::new(0.0, 0.0); len], vec![Complex64::new(0.0, 0.0); len]]
}

/// One Lawson RK4 step; `n0` is the nonlinear term at `u`.
fn step(nl: &Nonlinear, u: &[Vec<Complex64>; 3], n0: &[Vec<Complex64>; 3], h: f64, nu: f64, linear: bool) -> [Vec<Complex64>; 3] {
    let len = u[0].len();
    let e_half: Vec<f64> = (0..len).map(|i| (-nu * nl.k2(i) * h * 0.5).exp()).collect();
    let e_full: Vec<f64> = e_half.iter().map(|e| e * e).collect();
    if linear {
        let mut out = u.clone();
        for c in out.iter_mut() {
            for (z, e) in c.iter_mut().zip(e_full.iter()) {
                *z *= e;
            }
        }
        return out;
    }
    let comb = |f: &dyn Fn(usize, usize) -> Complex64| -> [Vec<Complex64>; 3] {
        [(0..len).map(|i| f(0, i)).collect(), (0..len).map(|i| f(1, i)).collect(), (0..len).map(|i| f(2, i)).collect()]
    };
    let k1 = n0;
    let s2 = comb(&|a, i| e_half[i] * (u[a][i] + k1[a][i] * (0.5 * h)));
    let (k2, _) = nl.eval(&s2);
    let s3 = comb(&|a, i| e_half[i] * u[a][i] + k2[a][i] * (0.5 * h));
    let (k3, _) = nl.eval(&s3);
    let s4 = comb(&|a, i| e_full[i] * u[a][i] + e_half[i] * k3[a][i] * h);
    let (k4, _) = nl.eval(&s4);
    comb(&|a, i| {
        e_full[i] * u[a][i]
            + (e_full[i] * k1[a][i] + e_half[i] * (k2[a][i] + k3[a][i]) * 2.0 + k4[a][i]) * (h / 6.0)
    })
}
