//! Log-log power-law fits of norm components along Q or r.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{first_iterate, split_u1, FirstIterate, FrozenField};
use crate::construction::{build_frequency_family, build_initial_data, Preset};
use crate::norms::{besov_norm, xt_norm, BesovOptions, CarlesonOptions, NormReport};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    U0Besov,
    U10Besov,
    U11Xt,
    #[serde(rename = "n2_xt")]
    N2Xt,
    #[serde(rename = "n3_xt")]
    N3Xt,
}

impl Component {
    pub const ALL: [Component; 5] =
        [Component::U0Besov, Component::U10Besov, Component::U11Xt, Component::N2Xt, Component::N3Xt];

    pub fn as_str(self) -> &'static str {
        match self {
            Component::U0Besov => "u0_besov",
            Component::U10Besov => "u10_besov",
            Component::U11Xt => "u11_xt",
            Component::N2Xt => "n2_xt",
            Component::N3Xt => "n3_xt",
        }
    }

    /// Predicted power-law exponent, if any.
    pub fn expected(self, axis: Axis) -> Option<f64> {
        match (self, axis) {
            (Component::U0Besov, Axis::Q) => Some(1.0),
            (Component::U0Besov, Axis::R) => Some(-0.5),
            (_, Axis::Q) => Some(2.0),
            (Component::U10Besov, Axis::R) => None,
            (Component::U11Xt | Component::N2Xt, Axis::R) => Some(-0.5),
            (Component::N3Xt, Axis::R) => Some(-1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Q,
    R,
}

/// Fixed coordinates of a scaling measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingBase {
    pub k: i64,
    pub q: f64,
    pub r: usize,
    /// Shell magnitudes; at least as many as the largest r requested.
    pub shells: Vec<i64>,
    /// `T` of the `X_T` components and evaluation time of the `u_{1,0}`
    /// plateau; default `1/|k_1|`.
    pub t_window: Option<f64>,
    pub besov: BesovOptions,
    pub carleson: CarlesonOptions,
}

impl ScalingBase {
    /// Geometric shells `2K²·ratio^j`.
    pub fn geometric(k: i64, q: f64, r: usize, ratio: i64, count: usize) -> Result<Self> {
        let mut shells = Vec::with_capacity(count);
        let mut m = 2 * k * k;
        for _ in 0..count {
            shells.push(m);
            m = m
                .checked_mul(ratio)
                .ok_or_else(|| Error::Overflow("geometric shell magnitude overflows".into()))?;
        }
        Ok(Self {
            k,
            q,
            r,
            shells,
            t_window: None,
            besov: BesovOptions::default(),
            carleson: CarlesonOptions::default(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub component: Component,
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub exponent: f64,
    pub intercept: f64,
    /// 95% pairs-bootstrap interval.
    pub ci: (f64, f64),
    pub expected: Option<f64>,
    pub reports: Vec<NormReport>,
}

/// Norm of one component at `(q, r)`.
pub fn component_report(c: Component, base: &ScalingBase, q: f64, r: usize) -> Result<NormReport> {
    let fam = build_frequency_family(base.k, r, Preset::Desk, Some(&base.shells))?;
    let data = build_initial_data(&fam, q)?;
    let t = base.t_window.unwrap_or_else(|| 1.0 / fam.shells[0].magnitude());
    if c == Component::U0Besov {
        return besov_norm(&FrozenField::from_trig(&data.field, 0.0), &base.besov);
    }
    let it = first_iterate(&data)?;
    match c {
        Component::U10Besov => {
            let (u10, _) = split_u1(&it.u1, &fam);
            besov_norm(&FrozenField::from_trig(&u10, t), &base.besov)
        }
        Component::U11Xt => xt_norm(&split_u1(&it.u1, &fam).1, t, &base.carleson),
        Component::N2Xt => xt_norm(&FirstIterate::duhamel_of(&it.n2)?, t, &base.carleson),
        Component::N3Xt => xt_norm(&FirstIterate::duhamel_of(&it.n3)?, t, &base.carleson),
        Component::U0Besov => unreachable!(),
    }
}

fn fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Least-squares exponent of `value ~ C·x^p` with a pairs-bootstrap CI.
pub fn fit_power_law(grid: &[f64], values: &[f64], bootstrap: usize, seed: u64) -> Result<(f64, f64, (f64, f64))> {
    if grid.len() != values.len() || grid.len() < 3 {
        return Err(Error::Config(format!("degenerate scaling grid: {} points, need 3", grid.len())));
    }
    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().copied().fold(0.0, f64::max);
    if !(lo > 0.0 && hi >= 4.0 * lo) {
        return Err(Error::Config(format!("degenerate scaling grid: range [{lo}, {hi}] spans less than ×4")));
    }
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Config("degenerate scaling: zero or non-finite norm values".into()));
    }
    let x: Vec<f64> = grid.iter().map(|g| g.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (slope, icpt) = fit(&x, &y).expect("grid spans a range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slopes = Vec::with_capacity(bootstrap);
    let n = x.len();
    let (mut bx, mut by) = (vec![0.0; n], vec![0.0; n]);
    for _ in 0..bootstrap {
        for j in 0..n {
            let i = rng.gen_range(0..n);
            bx[j] = x[i];
            by[j] = y[i];
        }
        if let Some((s, _)) = fit(&bx, &by) {
            slopes.push(s);
        }
    }
    let ci = if slopes.is_empty() {
        (slope, slope)
    } else {
        slopes.sort_by(f64::total_cmp);
        let at = |p: f64| slopes[((p * (slopes.len() - 1) as f64).round() as usize).min(slopes.len() - 1)];
        (at(0.025), at(0.975))
    };
    Ok((slope, icpt, ci))
}

/// Measures `component` along `axis` at the grid points and fits the
/// exponent. On the r axis the grid values are shell counts.
pub fn measure_scaling(
    component: Component,
    axis: Axis,
    grid: &[f64],
    base: &ScalingBase,
    bootstrap: usize,
    seed: u64,
) -> Result<ScalingFit> {
    if grid.len() < 3 {
        return Err(Error::Config(format!("degenerate scaling grid: {} points, need 3", grid.len())));
    }
    let mut reports = Vec::with_capacity(grid.len());
    for &g in grid {
        let rep = match axis {
            Axis::Q => component_report(component, base, g, base.r)?,
            Axis::R => {
                if !(g >= 1.0 && g.fract() == 0.0) {
                    return Err(Error::Config(format!("r grid value {g} is not a positive integer")));
                }
                component_report(component, base, base.q, g as usize)?
            }
        };
        reports.push(rep);
    }
    let values: Vec<f64> = reports.iter().map(|r| r.value).collect();
    let (exponent, intercept, ci) = fit_power_law(grid, &values, bootstrap, seed)?;
    Ok(ScalingFit {
        component,
        axis,
        grid: grid.to_vec(),
        values,
        exponent,
        intercept,
        ci,
        expected: component.expected(axis),
        reports,
    })
}
