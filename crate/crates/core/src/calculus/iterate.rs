//! The first Picard iterate `u_1 = B(e^{tΔ}u_0, e^{tΔ}u_0)` and its pieces.

use serde::Serialize;

use super::field::TrigField;
use super::ops::{self, NearResonance};
use crate::construction::{FrequencyFamily, InitialData};
use crate::vec3;
use crate::{Error, Result};

/// `u_1` with the pre-Duhamel split of `(e^{tΔ}u_0 · ∇) e^{tΔ}u_0`:
/// `n1` holds the same-shell difference modes (wavevector `±η`), `n2` the
/// remaining same-shell modes, `n3` every cross-shell product.
#[derive(Clone, Debug, Serialize)]
pub struct FirstIterate {
    pub u1: TrigField,
    pub n1: TrigField,
    pub n2: TrigField,
    pub n3: TrigField,
    pub resonances: Vec<NearResonance>,
}

impl FirstIterate {
    /// Duhamel image `B` of one forcing piece: `∫ e^{(t-τ)Δ} P n(τ) dτ`.
    pub fn duhamel_of(n: &TrigField) -> Result<TrigField> {
        ops::duhamel_integrate(&ops::leray_project(n))
    }
}

fn shell_field(data: &InitialData, s: usize) -> TrigField {
    let sh = &data.family.shells[s];
    data.field.filter(|k| *k == sh.k || *k == sh.k_prime)
}

pub fn first_iterate(data: &InitialData) -> Result<FirstIterate> {
    first_iterate_with_budget(data, ops::DEFAULT_MODE_BUDGET)
}

pub fn first_iterate_with_budget(data: &InitialData, budget: usize) -> Result<FirstIterate> {
    let fam = &data.family;
    let eta = fam.eta;
    let e: Vec<TrigField> = (0..fam.r()).map(|s| ops::heat_flow(&shell_field(data, s))).collect();
    let mut n1 = TrigField::zero();
    let mut n2 = TrigField::zero();
    let mut n3 = TrigField::zero();
    for (s, es) in e.iter().enumerate() {
        for (q, eq) in e.iter().enumerate() {
            let prod = ops::advect_with_budget(es, eq, budget)?;
            if s == q {
                n1 = n1.add(&prod.filter(|k| *k == eta));
                n2 = n2.add(&prod.filter(|k| *k != eta));
            } else {
                n3 = n3.add(&prod);
            }
        }
    }
    let forcing = ops::leray_project(&n1.add(&n2).add(&n3));
    if forcing.has_mean_mode() {
        return Err(Error::Numerical("first iterate produced a mean mode".into()));
    }
    let (u1, resonances) = ops::duhamel_integrate_logged(&forcing)?;
    Ok(FirstIterate { u1, n1, n2, n3, resonances })
}

/// Splits `u_1` into its `±η` part `u_{1,0}` and the rest `u_{1,1}`.
pub fn split_u1(u1: &TrigField, fam: &FrequencyFamily) -> (TrigField, TrigField) {
    let eta = fam.eta;
    let neg = vec3::neg(&eta);
    let u10 = u1.filter(|k| *k == eta || *k == neg);
    let u11 = u1.filter(|k| *k != eta && *k != neg);
    (u10, u11)
}
