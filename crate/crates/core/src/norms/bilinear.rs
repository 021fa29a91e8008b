//! Empirical check of the bilinear bound `‖B(u,v)‖_{X_T} ≲ ‖u‖_{X_T}‖v‖_{X_T}`.

use serde::{Deserialize, Serialize};

use super::carleson::{xt_norm, CarlesonOptions};
use crate::calculus::{advect, duhamel_integrate, leray_project, TrigField};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilinearReport {
    pub ratio: f64,
    pub b_norm: f64,
    pub u_norm: f64,
    pub v_norm: f64,
    /// Set when the denominator vanished and the ratio was defined as 0.
    pub degenerate: bool,
}

/// `B(u, v) = ∫₀ᵗ e^{(t-τ)Δ} P (u·∇)v dτ` for exact trajectories.
pub fn bilinear(u: &TrigField, v: &TrigField) -> Result<TrigField> {
    duhamel_integrate(&leray_project(&advect(u, v)?))
}

pub fn bilinear_sanity(u: &TrigField, v: &TrigField, t_end: f64, opts: &CarlesonOptions) -> Result<BilinearReport> {
    let un = xt_norm(u, t_end, opts)?.value;
    let vn = xt_norm(v, t_end, opts)?.value;
    if un == 0.0 || vn == 0.0 {
        return Ok(BilinearReport { ratio: 0.0, b_norm: 0.0, u_norm: un, v_norm: vn, degenerate: true });
    }
    let b = bilinear(u, v)?;
    let bn = xt_norm(&b, t_end, opts)?.value;
    Ok(BilinearReport { ratio: bn / (un * vn), b_norm: bn, u_norm: un, v_norm: vn, degenerate: false })
}
