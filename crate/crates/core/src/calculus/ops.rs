//! Heat flow, advection, Leray projection and Duhamel integration on
//! [`TrigField`]s. All operations are exact up to floating-point round-off.

use serde::{Deserialize, Serialize};

use super::field::{Phase, TrigField};
use super::profile::{Coefficient, Term, VectorProfile};
use crate::vec3::{self, IVec3, Vec3};
use crate::{Error, Result};

/// Default cap on the number of profile terms `advect` may produce.
pub const DEFAULT_MODE_BUDGET: usize = 1_000_000;

/// Relative tolerance below which `λ ≈ |m|²` is treated as resonant.
pub const RESONANCE_TOL: f64 = 1e-9;

/// Time-dependent heat flow `t ↦ e^{tΔ} f`: each mode's profile is multiplied
/// by `e^{-|k|² t}`.
pub fn heat_flow(f: &TrigField) -> TrigField {
    let mut out = TrigField::zero();
    for m in f.modes() {
        out.insert(m.wavevector, m.phase, m.profile.shift(vec3::norm2(&m.wavevector)));
    }
    out
}

/// Applies the fixed-time semigroup `e^{sΔ}` (coefficients multiplied by
/// `e^{-|k|² s}`); profiles keep their time dependence.
pub fn heat_semigroup(f: &TrigField, s: f64) -> TrigField {
    let mut out = TrigField::zero();
    for m in f.modes() {
        let damp = (-vec3::norm2(&m.wavevector) * s).exp();
        out.insert(m.wavevector, m.phase, m.profile.scale(damp));
    }
    out
}

/// Product-to-sum table for `φ(a)·χ(b)`: returns `(sign of b, phase, factor)`
/// for the `a + b` and `a - b` outputs.
fn product_to_sum(phi: Phase, chi: Phase) -> [(i64, Phase, f64); 2] {
    match (phi, chi) {
        (Phase::Cos, Phase::Cos) => [(1, Phase::Cos, 0.5), (-1, Phase::Cos, 0.5)],
        (Phase::Cos, Phase::Sin) => [(1, Phase::Sin, 0.5), (-1, Phase::Sin, -0.5)],
        (Phase::Sin, Phase::Cos) => [(1, Phase::Sin, 0.5), (-1, Phase::Sin, 0.5)],
        (Phase::Sin, Phase::Sin) => [(1, Phase::Cos, -0.5), (-1, Phase::Cos, 0.5)],
    }
}

/// `a·m`, with round-off residues of an exactly orthogonal pair set to zero.
fn clean_dot(a: &Vec3, m: &IVec3) -> f64 {
    let d = vec3::dot_lattice(a, m);
    let scale = vec3::norm(a) * vec3::norm2(m).sqrt();
    if d.abs() <= 8.0 * f64::EPSILON * scale {
        0.0
    } else {
        d
    }
}

/// `(u·∇) w` with the default mode budget.
pub fn advect(u: &TrigField, w: &TrigField) -> Result<TrigField> {
    advect_with_budget(u, w, DEFAULT_MODE_BUDGET)
}

/// `(u·∇) w` expanded by product-to-sum identities. Profiles multiply
/// (decay rates add). Fails when the expansion would exceed `budget` terms.
pub fn advect_with_budget(u: &TrigField, w: &TrigField, budget: usize) -> Result<TrigField> {
    let needed = 2 * u.term_count() * w.term_count();
    if needed > budget {
        return Err(Error::Budget { what: "advection terms", needed, budget });
    }
    let mut out = TrigField::zero();
    for um in u.modes() {
        for wm in w.modes() {
            let m = wm.wavevector;
            // ∂ of the w phase: cos' = -sin, sin' = cos.
            let (dsign, chi) = match wm.phase {
                Phase::Cos => (-1.0, Phase::Sin),
                Phase::Sin => (1.0, Phase::Cos),
            };
            let base: VectorProfile =
                um.profile.combine(wm.profile, |a: &Vec3, b: &Vec3| {
                    b.times(clean_dot(a, &m) * dsign)
                })?;
            if base.is_empty() {
                continue;
            }
            for (sign, phase, factor) in product_to_sum(um.phase, chi) {
                let k = if sign > 0 {
                    vec3::checked_add(&um.wavevector, &m)
                } else {
                    vec3::checked_sub(&um.wavevector, &m)
                }
                .ok_or_else(|| Error::Overflow("advection wavevector".into()))?;
                out.insert(k, phase, base.scale(factor));
            }
        }
    }
    Ok(out)
}

/// Leray projection `a ↦ a - (a·k̂) k̂` applied to every coefficient.
/// Mean modes are returned unchanged. Residues at round-off level relative to
/// the input coefficient are set to exactly zero.
pub fn leray_project(f: &TrigField) -> TrigField {
    let mut out = TrigField::zero();
    for m in f.modes() {
        if m.is_mean() {
            out.insert(m.wavevector, m.phase, m.profile.clone());
            continue;
        }
        let k = vec3::to_f64(&m.wavevector);
        let kk = vec3::dot(&k, &k);
        let p = m.profile.map_coef(|c: &Vec3| {
            let proj = vec3::sub(c, &vec3::scale(&k, vec3::dot(c, &k) / kk));
            if vec3::norm(&proj) <= 8.0 * f64::EPSILON * vec3::norm(c) {
                vec3::ZERO
            } else {
                proj
            }
        });
        out.insert(m.wavevector, m.phase, p);
    }
    out
}

/// A term treated as resonant although `λ ≠ |m|²`; `bound` is a bound on the
/// absolute error of the resonant closed form over `t ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearResonance {
    pub wavevector: IVec3,
    pub rate: f64,
    pub mode_rate: f64,
    pub bound: f64,
}

/// `t ↦ ∫₀ᵗ e^{(t-τ)Δ} f(τ) dτ` in closed form.
pub fn duhamel_integrate(f: &TrigField) -> Result<TrigField> {
    duhamel_integrate_logged(f).map(|(g, _)| g)
}

/// As [`duhamel_integrate`], also returning every near-resonant term that was
/// folded into the resonant branch.
pub fn duhamel_integrate_logged(f: &TrigField) -> Result<(TrigField, Vec<NearResonance>)> {
    let mut out = TrigField::zero();
    let mut notes = Vec::new();
    for m in f.modes() {
        let mu = vec3::norm2(&m.wavevector);
        let mut terms = Vec::with_capacity(2 * m.profile.terms().len());
        for t in m.profile.terms() {
            if t.power != 0 {
                return Err(Error::Unsupported(
                    "Duhamel integration of t·e^{-λt} terms (second Picard iterate)".into(),
                ));
            }
            let lambda = t.rate;
            let gap = mu - lambda;
            if gap.abs() <= RESONANCE_TOL * mu.max(lambda) || (mu == 0.0 && lambda == 0.0) {
                terms.push(Term { coef: t.coef, rate: mu, power: 1 });
                if gap != 0.0 {
                    let a = mu.min(lambda);
                    let bound = if a > 0.0 {
                        2.0 * t.coef.magnitude() * gap.abs()
                            / (std::f64::consts::E.powi(2) * a * a)
                    } else {
                        f64::INFINITY
                    };
                    notes.push(NearResonance {
                        wavevector: m.wavevector,
                        rate: lambda,
                        mode_rate: mu,
                        bound,
                    });
                }
            } else {
                let c = t.coef.times(1.0 / gap);
                terms.push(Term { coef: c, rate: lambda, power: 0 });
                terms.push(Term { coef: c.times(-1.0), rate: mu, power: 0 });
            }
        }
        out.insert(m.wavevector, m.phase, VectorProfile::new(terms)?);
    }
    Ok((out, notes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::profile::VectorProfile;

    fn mode(k: IVec3, phase: Phase, a: Vec3) -> TrigField {
        let mut f = TrigField::zero();
        f.insert(k, phase, VectorProfile::constant(a));
        f
    }

    #[test]
    fn heat_flow_of_single_mode() {
        let f = heat_flow(&mode([8, 0, 0], Phase::Cos, [0.0, 1.0, 0.0]));
        let p = f.get([8, 0, 0], Phase::Cos).unwrap();
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.terms()[0].rate, 64.0);
        assert!(heat_flow(&TrigField::zero()).is_empty());
    }

    #[test]
    fn leray_examples() {
        // a ⊥ k: unchanged
        let f = mode([2, 0, 0], Phase::Cos, [0.0, 1.0, 1.0]);
        assert_eq!(leray_project(&f), f);
        // a ∥ k: annihilated
        assert!(leray_project(&mode([2, 0, 0], Phase::Sin, [3.0, 0.0, 0.0])).is_empty());
        // a = (1,1,0), k = (2,0,0): (0,1,0), checked against I - k̂k̂ᵀ
        let p = leray_project(&mode([2, 0, 0], Phase::Cos, [1.0, 1.0, 0.0]));
        let a = p.get([2, 0, 0], Phase::Cos).unwrap().eval(0.0);
        let khat = [1.0, 0.0, 0.0];
        let mut symbol = [[0.0; 3]; 3];
        for (i, row) in symbol.iter_mut().enumerate() {
            for (j, s) in row.iter_mut().enumerate() {
                *s = if i == j { 1.0 } else { 0.0 } - khat[i] * khat[j];
            }
        }
        let expect: Vec<f64> =
            symbol.iter().map(|row| row[0] * 1.0 + row[1] * 1.0 + row[2] * 0.0).collect();
        for i in 0..3 {
            assert!((a[i] - expect[i]).abs() < 1e-15);
        }
        assert_eq!(a, [0.0, 1.0, 0.0]);
    }

    #[test]
    fn mean_modes_pass_projection_unchanged() {
        let f = mode([0, 0, 0], Phase::Cos, [1.0, 2.0, 3.0]);
        assert_eq!(leray_project(&f), f);
    }

    #[test]
    fn single_plane_wave_self_advection_is_a_gradient() {
        let u = heat_flow(&mode([3, 4, 0], Phase::Cos, [0.0, 0.0, 1.0]));
        let n = advect(&u, &u).unwrap();
        assert!(leray_project(&n).is_empty());
        // Generic orientation: a ⊥ k but not axis aligned.
        let u = mode([1, 2, 2], Phase::Sin, [2.0, -1.0, 0.0]);
        assert!(leray_project(&advect(&u, &u).unwrap()).is_empty());
    }

    #[test]
    fn advect_pointwise_matches_finite_differences() {
        let mut u = mode([1, 0, 0], Phase::Cos, [0.0, 1.0, 0.5]);
        u.insert([0, 1, 1], Phase::Sin, VectorProfile::constant([1.0, 0.5, -0.5]));
        let mut w = mode([2, -1, 0], Phase::Cos, [0.3, 0.6, 0.1]);
        w.insert([0, 0, 1], Phase::Sin, VectorProfile::constant([0.2, -0.4, 0.0]));
        let n = advect(&u, &w).unwrap();
        let h = 1e-5;
        for x in [[0.1, 0.2, 0.3], [1.4, -0.7, 2.2], [3.0, 1.0, -2.0]] {
            let uv = u.evaluate(&x, 0.0);
            let mut expect = [0.0; 3];
            for j in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let d = vec3::scale(&vec3::sub(&w.evaluate(&xp, 0.0), &w.evaluate(&xm, 0.0)), 0.5 / h);
                expect = vec3::add(&expect, &vec3::scale(&d, uv[j]));
            }
            let got = n.evaluate(&x, 0.0);
            for i in 0..3 {
                assert!((got[i] - expect[i]).abs() < 1e-8, "{got:?} vs {expect:?}");
            }
        }
    }

    #[test]
    fn advect_budget_is_enforced() {
        let u = mode([1, 0, 0], Phase::Cos, [0.0, 1.0, 0.0]);
        assert!(matches!(advect_with_budget(&u, &u, 1), Err(Error::Budget { .. })));
    }

    #[test]
    fn duhamel_non_resonant_closed_form() {
        // |m|² = 1, source e^{-4τ}
        let mut f = TrigField::zero();
        f.insert([0, 1, 0], Phase::Sin, VectorProfile::exponential([1.0, 0.0, 0.0], 4.0));
        let g = duhamel_integrate(&f).unwrap();
        for t in [0.1, 1.0, 5.0] {
            let got = g.get([0, 1, 0], Phase::Sin).unwrap().eval(t)[0];
            let expect = ((-t as f64).exp() - (-4.0 * t).exp()) / 3.0;
            assert!((got - expect).abs() <= 1e-15 * expect.abs().max(1e-300) + 1e-17);
        }
    }

    #[test]
    fn duhamel_resonant_branch() {
        let mut f = TrigField::zero();
        f.insert([2, 0, 0], Phase::Cos, VectorProfile::exponential([0.0, 1.0, 0.0], 4.0));
        let g = duhamel_integrate(&f).unwrap();
        let p = g.get([2, 0, 0], Phase::Cos).unwrap();
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.terms()[0].power, 1);
        let t = 0.7;
        assert!((p.eval(t)[1] - t * (-4.0 * t).exp()).abs() < 1e-16);
    }

    #[test]
    fn duhamel_logs_near_resonance() {
        let mut f = TrigField::zero();
        f.insert([2, 0, 0], Phase::Cos, VectorProfile::exponential([0.0, 1.0, 0.0], 4.0 * (1.0 + 1e-11)));
        let (_, notes) = duhamel_integrate_logged(&f).unwrap();
        assert_eq!(notes.len(), 1);
        assert!(notes[0].bound < 1e-10);
    }

    #[test]
    fn duhamel_rejects_resonant_input() {
        let mut f = TrigField::zero();
        f.insert([1, 0, 0], Phase::Cos, VectorProfile::exponential([0.0, 1.0, 0.0], 1.0));
        let g = duhamel_integrate(&f).unwrap();
        assert!(matches!(duhamel_integrate(&g), Err(Error::Unsupported(_))));
        assert!(duhamel_integrate(&TrigField::zero()).unwrap().is_empty());
    }

    #[test]
    fn duhamel_vanishes_at_zero() {
        let mut f = TrigField::zero();
        f.insert([1, 2, 0], Phase::Cos, VectorProfile::exponential([0.0, 0.0, 1.0], 3.0));
        f.insert([1, 2, 0], Phase::Cos, VectorProfile::exponential([0.0, 0.0, 2.0], 11.0));
        f.insert([0, 1, 0], Phase::Sin, VectorProfile::exponential([1.0, 0.0, 0.0], 1.0));
        let g = duhamel_integrate(&f).unwrap();
        let v = g.evaluate(&[0.3, 0.2, 0.1], 0.0);
        assert!(v.iter().all(|c| c.abs() < 1e-16), "{v:?}");
    }
}
