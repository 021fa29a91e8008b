//! Lacunary frequency families and the oscillating initial datum
//!
//! ```text
//! u0 = Q/√r Σ_s |k_s| [ v_s cos(k_s·x) + v_s' cos(k_s'·x) ]
//! ```
//!
//! with `k_s ∥ k_0`, `k_s - k_s' = η`, `k_s·v_s = k_s'·v_s' = 0` and
//! `η·v_s = η·v_s' = 1/2`. On the lattice we take `k_0 ∥ (1,0,0)`,
//! `η = (0,1,0)` and `k_s = (m_s, 0, 0)`.
//!
//! JSON layout of a [`FrequencyFamily`]:
//!
//! ```json
//! {
//!   "preset": "desk",
//!   "base": 2,
//!   "eta": [0, 1, 0],
//!   "shells": [
//!     { "k": [8, 0, 0], "k_prime": [8, -1, 0],
//!       "v": ["0", "0.5", "0.8660254037844386"],
//!       "v_prime": ["0.0625", "0.5", "0.8637671850678283"] }
//!   ],
//!   "growth_ratios": []
//! }
//! ```
//!
//! Wavevectors are integer arrays; unit vectors are decimal strings holding
//! the shortest representation that round-trips the `f64` exactly.

use serde::{Deserialize, Serialize};

use crate::calculus::field::{Phase, TrigField};
use crate::calculus::profile::VectorProfile;
use crate::vec3::{self, IVec3, Vec3};
use crate::{Error, Result};

/// Largest admissible shell magnitude. Leaves headroom so that sums of two
/// wavevectors (first-iterate interactions) stay inside `i64`.
pub const MAX_SHELL_MAGNITUDE: i64 = 1 << 60;

/// Tolerance of the orthogonality, normalisation and `η·v = 1/2` checks.
pub const CONSTRAINT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// `|k_1| = 2K²`, `|k_s| = 2^s K |k_{s-1}|`.
    Lacunary,
    /// Lattice-friendly shells: explicit magnitudes with ratio at least 2,
    /// or the lacunary rule when none are given.
    Desk,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub k: IVec3,
    pub k_prime: IVec3,
    #[serde(with = "decimal_vec")]
    pub v: Vec3,
    #[serde(with = "decimal_vec")]
    pub v_prime: Vec3,
}

impl Shell {
    pub fn magnitude(&self) -> f64 {
        vec3::norm2(&self.k).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyFamily {
    pub preset: Preset,
    /// `|k_0|`, written `K`.
    pub base: i64,
    pub eta: IVec3,
    pub shells: Vec<Shell>,
    pub growth_ratios: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyRecord {
    preset: Preset,
    base: i64,
    eta: IVec3,
    shells: Vec<Shell>,
    growth_ratios: Vec<f64>,
}

impl<'de> Deserialize<'de> for FrequencyFamily {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = FamilyRecord::deserialize(d)?;
        let fam = FrequencyFamily {
            preset: rec.preset,
            base: rec.base,
            eta: rec.eta,
            shells: rec.shells,
            growth_ratios: rec.growth_ratios,
        };
        fam.validate().map_err(serde::de::Error::custom)?;
        Ok(fam)
    }
}

/// Unit vector transverse to `(1,0,0)` with `η·v = 1/2`, shared by all `k_s`.
pub fn shell_direction() -> Vec3 {
    [0.0, 0.5, 0.75f64.sqrt()]
}

/// Unit vector orthogonal to `(m,-1,0)` with `η·v' = 1/2`.
pub fn primed_direction(m: i64) -> Vec3 {
    let mf = m as f64;
    [0.5 / mf, 0.5, (0.75 - 0.25 / (mf * mf)).sqrt()]
}

/// Shell magnitudes of the lacunary rule, `m_1 = 2K²`, `m_s = 2^s K m_{s-1}`.
pub fn lacunary_magnitudes(base: i64, r: usize) -> Result<Vec<i64>> {
    let overflow = || Error::Overflow(format!("shell magnitudes for K={base}, r={r}"));
    let mut out = Vec::with_capacity(r);
    let mut m = base.checked_mul(base).and_then(|x| x.checked_mul(2)).ok_or_else(overflow)?;
    out.push(m);
    for s in 2..=r {
        let factor = 1i64
            .checked_shl(s as u32)
            .filter(|&f| f > 0 && s < 63)
            .and_then(|f| f.checked_mul(base))
            .ok_or_else(overflow)?;
        m = m.checked_mul(factor).ok_or_else(overflow)?;
        out.push(m);
    }
    if out.iter().any(|&m| m > MAX_SHELL_MAGNITUDE) {
        return Err(overflow());
    }
    Ok(out)
}

pub fn build_frequency_family(
    base: i64,
    r: usize,
    preset: Preset,
    magnitudes: Option<&[i64]>,
) -> Result<FrequencyFamily> {
    if base < 2 {
        return Err(Error::Config(format!("K must be at least 2, got {base}")));
    }
    if r == 0 {
        return Err(Error::Config("r must be at least 1".into()));
    }
    let mags = match (preset, magnitudes) {
        (Preset::Lacunary, Some(_)) => {
            return Err(Error::Config(
                "explicit shell magnitudes are only accepted by the desk preset".into(),
            ))
        }
        (_, None) => lacunary_magnitudes(base, r)?,
        (Preset::Desk, Some(ms)) => {
            if ms.len() < r {
                return Err(Error::Config(format!(
                    "{} shell magnitudes given for r = {r}",
                    ms.len()
                )));
            }
            let ms = ms[..r].to_vec();
            if ms[0] < 1 {
                return Err(Error::Config("shell magnitudes must be positive".into()));
            }
            for w in ms.windows(2) {
                if w[1] < w[0].saturating_mul(2) {
                    return Err(Error::Config(format!(
                        "lacunarity: shell ratio {}/{} below 2",
                        w[1], w[0]
                    )));
                }
            }
            if ms.iter().any(|&m| m > MAX_SHELL_MAGNITUDE) {
                return Err(Error::Overflow("shell magnitude exceeds 2^60".into()));
            }
            ms
        }
    };
    let eta = [0, 1, 0];
    let shells = mags
        .iter()
        .map(|&m| Shell {
            k: [m, 0, 0],
            k_prime: [m, -1, 0],
            v: shell_direction(),
            v_prime: primed_direction(m),
        })
        .collect();
    let growth_ratios = mags.windows(2).map(|w| w[1] as f64 / w[0] as f64).collect();
    let fam = FrequencyFamily { preset, base, eta, shells, growth_ratios };
    fam.validate()?;
    Ok(fam)
}

impl FrequencyFamily {
    pub fn r(&self) -> usize {
        self.shells.len()
    }

    pub fn magnitudes(&self) -> Vec<i64> {
        self.shells.iter().map(|s| s.k[0].abs().max(s.k[1].abs()).max(s.k[2].abs())).collect()
    }

    /// `|k_0| = K`.
    pub fn k0_magnitude(&self) -> f64 {
        self.base as f64
    }

    /// Checks every structural invariant of the family.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Constraint(msg));
        if self.base < 2 {
            return fail(format!("K = {} < 2", self.base));
        }
        if self.shells.is_empty() {
            return fail("empty shell list".into());
        }
        if vec3::norm2_exact(&self.eta) != 1 {
            return fail("eta must be a unit lattice vector".into());
        }
        let k1 = self.shells[0].k;
        if vec3::is_zero(&k1) {
            return fail("k_1 = 0".into());
        }
        for (i, sh) in self.shells.iter().enumerate() {
            if sh.k.iter().chain(sh.k_prime.iter()).any(|c| c.abs() > MAX_SHELL_MAGNITUDE) {
                return Err(Error::Overflow(format!("shell {} exceeds 2^60", i + 1)));
            }
            // parallel and same orientation as k_1
            let cross = [
                sh.k[1] as i128 * k1[2] as i128 - sh.k[2] as i128 * k1[1] as i128,
                sh.k[2] as i128 * k1[0] as i128 - sh.k[0] as i128 * k1[2] as i128,
                sh.k[0] as i128 * k1[1] as i128 - sh.k[1] as i128 * k1[0] as i128,
            ];
            let same_dir: i128 = (0..3).map(|j| sh.k[j] as i128 * k1[j] as i128).sum();
            if cross.iter().any(|&c| c != 0) || same_dir <= 0 {
                return fail(format!("k_{} not parallel to k_1", i + 1));
            }
            if vec3::checked_sub(&sh.k, &sh.k_prime) != Some(self.eta) {
                return fail(format!("k_{0} - k_{0}' != eta", i + 1));
            }
            let kn = vec3::norm2(&sh.k).sqrt();
            let kpn = vec3::norm2(&sh.k_prime).sqrt();
            let eta = vec3::to_f64(&self.eta);
            for (name, v, k, kn) in [("v", &sh.v, &sh.k, kn), ("v'", &sh.v_prime, &sh.k_prime, kpn)] {
                if !v.iter().all(|c| c.is_finite()) {
                    return fail(format!("{name}_{} not finite", i + 1));
                }
                if vec3::dot_lattice(v, k).abs() > CONSTRAINT_TOL * kn {
                    return fail(format!("{name}_{} not orthogonal to its wavevector", i + 1));
                }
                if (vec3::norm(v) - 1.0).abs() > CONSTRAINT_TOL {
                    return fail(format!("{name}_{} not a unit vector", i + 1));
                }
                if (vec3::dot(&eta, v) - 0.5).abs() > CONSTRAINT_TOL {
                    return fail(format!("eta·{name}_{} != 1/2", i + 1));
                }
            }
        }
        let mags: Vec<f64> = self.shells.iter().map(|s| s.magnitude()).collect();
        if self.growth_ratios.len() != mags.len() - 1 {
            return fail("growth_ratios length must be r - 1".into());
        }
        for (s, w) in mags.windows(2).enumerate() {
            let ratio = w[1] / w[0];
            if ratio < 2.0 {
                return fail(format!("lacunarity ratio {ratio} < 2 at shell {}", s + 2));
            }
            if (self.growth_ratios[s] - ratio).abs() > 1e-9 * ratio {
                return fail("growth_ratios inconsistent with shells".into());
            }
        }
        if self.preset == Preset::Lacunary {
            let k = self.base as f64;
            if mags[0] < 2.0 * k * k {
                return fail("lacunary preset requires |k_1| >= 2K^2".into());
            }
            for (s, r) in self.growth_ratios.iter().enumerate() {
                let expect = 2f64.powi(s as i32 + 2) * k;
                if (r - expect).abs() > 1e-9 * expect {
                    return fail(format!("lacunary preset requires ratio 2^s K at shell {}", s + 2));
                }
            }
        }
        Ok(())
    }

    /// Family restricted to its first `r` shells.
    pub fn truncated(&self, r: usize) -> Result<FrequencyFamily> {
        if r == 0 || r > self.r() {
            return Err(Error::Config(format!("cannot truncate {} shells to {r}", self.r())));
        }
        let fam = FrequencyFamily {
            preset: self.preset,
            base: self.base,
            eta: self.eta,
            shells: self.shells[..r].to_vec(),
            growth_ratios: self.growth_ratios[..r - 1].to_vec(),
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// The realised initial datum together with the data it was built from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InitialData {
    pub family: FrequencyFamily,
    pub q: f64,
    pub field: TrigField,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialRecord {
    family: FrequencyFamily,
    q: f64,
    #[serde(default)]
    field: Option<TrigField>,
}

impl<'de> Deserialize<'de> for InitialData {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = InitialRecord::deserialize(d)?;
        let data = build_initial_data(&rec.family, rec.q).map_err(serde::de::Error::custom)?;
        if let Some(f) = rec.field {
            if f != data.field {
                return Err(serde::de::Error::custom(
                    "stored field does not match the family and Q",
                ));
            }
        }
        Ok(data)
    }
}

pub fn build_initial_data(family: &FrequencyFamily, q: f64) -> Result<InitialData> {
    if !(q.is_finite() && q >= 0.0) {
        return Err(Error::Config(format!("Q must be finite and nonnegative, got {q}")));
    }
    family.validate()?;
    let pref = q / (family.r() as f64).sqrt();
    let mut field = TrigField::zero();
    for sh in &family.shells {
        // Both modes of a shell carry the prefactor |k_s|.
        let amp = pref * sh.magnitude();
        if !amp.is_finite() {
            return Err(Error::Overflow("initial amplitude".into()));
        }
        field.insert(sh.k, Phase::Cos, VectorProfile::constant(vec3::scale(&sh.v, amp)));
        field.insert(sh.k_prime, Phase::Cos, VectorProfile::constant(vec3::scale(&sh.v_prime, amp)));
    }
    debug_assert!(field.is_divergence_free());
    Ok(InitialData { family: family.clone(), q, field })
}

impl InitialData {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

mod decimal_vec {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64; 3], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(|c| format!("{c}")).collect();
        serde::Serialize::serialize(&strs, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; 3], D::Error> {
        let strs = <[String; 3]>::deserialize(d)?;
        let mut out = [0.0; 3];
        for (o, s) in out.iter_mut().zip(strs.iter()) {
            *o = s.trim().parse::<f64>().map_err(serde::de::Error::custom)?;
            if !o.is_finite() {
                return Err(serde::de::Error::custom("non-finite component"));
            }
        }
        Ok(out)
    }
}
