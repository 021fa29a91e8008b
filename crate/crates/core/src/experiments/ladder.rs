//! Shell-adapted time ladder `T_α = |k_{r_α}|^{-2}`.

use serde::{Deserialize, Serialize};

use crate::construction::FrequencyFamily;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderEntry {
    pub alpha: usize,
    pub r_alpha: usize,
    pub t_alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeLadder {
    pub q: f64,
    /// `round(Q³)` before the cap.
    pub beta_uncapped: f64,
    pub beta: usize,
    /// Whether `β` was capped at `r`.
    pub capped: bool,
    pub entries: Vec<LadderEntry>,
}

/// `|k_j|` with `k_0` of magnitude `K`.
pub fn shell_magnitude(fam: &FrequencyFamily, j: usize) -> f64 {
    if j == 0 {
        fam.k0_magnitude()
    } else {
        fam.shells[j - 1].magnitude()
    }
}

/// `β = round(Q³)` capped at `r`; `r_α = round(r − α r/β)` (half away from
/// zero) for `α = 1..β`, repeated `r_α` collapsed.
pub fn build_time_ladder(q: f64, fam: &FrequencyFamily) -> Result<TimeLadder> {
    let r = fam.r();
    if r == 0 {
        return Err(Error::Config("time ladder needs r ≥ 1".into()));
    }
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::Config(format!("time ladder needs Q ≥ 1, got {q}")));
    }
    let beta_uncapped = q.powi(3).round();
    let capped = beta_uncapped > r as f64;
    let beta = if capped { r } else { beta_uncapped as usize };
    let mut entries: Vec<LadderEntry> = Vec::with_capacity(beta);
    for alpha in 1..=beta {
        let r_alpha = (r as f64 - alpha as f64 * r as f64 / beta as f64).round().max(0.0) as usize;
        if entries.last().is_some_and(|e| e.r_alpha == r_alpha) {
            continue;
        }
        entries.push(LadderEntry { alpha, r_alpha, t_alpha: shell_magnitude(fam, r_alpha).powi(-2) });
    }
    if entries.windows(2).any(|w| w[1].t_alpha <= w[0].t_alpha) {
        return Err(Error::Numerical("time ladder is not strictly increasing".into()));
    }
    Ok(TimeLadder { q, beta_uncapped, beta, capped, entries })
}
