//! Trigonometric vector fields: finite sums of `a(t) cos(k·x)` and
//! `b(t) sin(k·x)` with integer wavevectors and exponential profiles.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::profile::{Coefficient, VectorProfile};
use crate::vec3::{self, IVec3, Vec3};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Cos,
    Sin,
}

impl Phase {
    pub fn apply(self, theta: f64) -> f64 {
        match self {
            Phase::Cos => theta.cos(),
            Phase::Sin => theta.sin(),
        }
    }
}

/// Key of a mode in canonical form: lexicographically positive wavevector
/// (or the zero vector with cosine phase for a mean mode).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeKey {
    pub wavevector: IVec3,
    pub phase: Phase,
}

/// Borrowed view of one mode. The amplitude vector lives inside the
/// vector-valued profile, so `amplitude()` is the profile at `t = 0`.
#[derive(Clone, Copy, Debug)]
pub struct TrigMode<'a> {
    pub wavevector: IVec3,
    pub phase: Phase,
    pub profile: &'a VectorProfile,
}

impl TrigMode<'_> {
    pub fn amplitude(&self) -> Vec3 {
        self.profile.eval(0.0)
    }

    pub fn is_mean(&self) -> bool {
        vec3::is_zero(&self.wavevector)
    }
}

/// A finite trigonometric vector field in canonical form.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrigField {
    modes: BTreeMap<ModeKey, VectorProfile>,
}

impl TrigField {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> impl Iterator<Item = TrigMode<'_>> {
        self.modes.iter().map(|(k, p)| TrigMode {
            wavevector: k.wavevector,
            phase: k.phase,
            profile: p,
        })
    }

    pub fn get(&self, wavevector: IVec3, phase: Phase) -> Option<&VectorProfile> {
        self.modes.get(&ModeKey { wavevector, phase })
    }

    /// Adds `profile · phase(k·x)`, rewriting to canonical sign and merging
    /// with an existing mode of the same key.
    pub fn insert(&mut self, wavevector: IVec3, phase: Phase, profile: VectorProfile) {
        if profile.is_empty() {
            return;
        }
        let (k, profile) = if vec3::is_zero(&wavevector) {
            if phase == Phase::Sin {
                return;
            }
            (wavevector, profile)
        } else if vec3::is_lex_positive(&wavevector) {
            (wavevector, profile)
        } else {
            let p = match phase {
                Phase::Cos => profile,
                Phase::Sin => profile.scale(-1.0),
            };
            (vec3::neg(&wavevector), p)
        };
        let key = ModeKey { wavevector: k, phase };
        match self.modes.get_mut(&key) {
            Some(existing) => {
                let merged = existing.add(&profile);
                if merged.is_empty() {
                    self.modes.remove(&key);
                } else {
                    *existing = merged;
                }
            }
            None => {
                self.modes.insert(key, profile);
            }
        }
    }

    pub fn add(&self, other: &TrigField) -> TrigField {
        let mut out = self.clone();
        for m in other.modes() {
            out.insert(m.wavevector, m.phase, m.profile.clone());
        }
        out
    }

    pub fn sub(&self, other: &TrigField) -> TrigField {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> TrigField {
        let mut out = TrigField::zero();
        for m in self.modes() {
            out.insert(m.wavevector, m.phase, m.profile.scale(s));
        }
        out
    }

    /// Keeps only modes whose wavevector satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(&IVec3) -> bool) -> TrigField {
        TrigField {
            modes: self
                .modes
                .iter()
                .filter(|(k, _)| keep(&k.wavevector))
                .map(|(k, p)| (*k, p.clone()))
                .collect(),
        }
    }

    /// Drops every mode whose coefficient magnitudes are all below `tol`.
    pub fn prune(&self, tol: f64) -> TrigField {
        let mut out = TrigField::zero();
        for m in self.modes() {
            let p = m.profile.map_coef(|c| if c.magnitude() <= tol { [0.0; 3] } else { *c });
            out.insert(m.wavevector, m.phase, p);
        }
        out
    }

    /// Pointwise value at position `x` and time `t`.
    pub fn evaluate(&self, x: &Vec3, t: f64) -> Vec3 {
        let mut acc = vec3::ZERO;
        for m in self.modes() {
            let theta = vec3::dot_lattice(x, &m.wavevector);
            let c = m.profile.eval(t);
            acc = vec3::add(&acc, &vec3::scale(&c, m.phase.apply(theta)));
        }
        acc
    }

    /// Largest `|k_i|` over all modes and axes.
    pub fn max_wavenumber(&self) -> i64 {
        self.modes
            .keys()
            .flat_map(|k| k.wavevector.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn has_mean_mode(&self) -> bool {
        self.modes.keys().any(|k| vec3::is_zero(&k.wavevector))
    }

    /// Every term's amplitude is orthogonal to its wavevector, up to
    /// relative round-off `tol`.
    pub fn divergence_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for m in self.modes() {
            let kn = vec3::norm2(&m.wavevector).sqrt();
            for t in m.profile.terms() {
                let scale = vec3::norm(&t.coef) * kn;
                if scale > 0.0 {
                    worst = worst.max(vec3::dot_lattice(&t.coef, &m.wavevector).abs() / scale);
                }
            }
        }
        worst
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence_defect() <= 1e-12
    }

    /// Largest power of `t` present in any profile.
    pub fn max_power(&self) -> u8 {
        self.modes.values().map(|p| p.max_power()).max().unwrap_or(0)
    }

    /// Total number of profile terms across all modes.
    pub fn term_count(&self) -> usize {
        self.modes.values().map(|p| p.terms().len()).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize, Deserialize)]
struct ModeRecord {
    wavevector: IVec3,
    phase: Phase,
    profile: VectorProfile,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldRecord {
    modes: Vec<ModeRecord>,
}

impl Serialize for TrigField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rec = FieldRecord {
            modes: self
                .modes()
                .map(|m| ModeRecord {
                    wavevector: m.wavevector,
                    phase: m.phase,
                    profile: m.profile.clone(),
                })
                .collect(),
        };
        rec.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrigField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = FieldRecord::deserialize(d)?;
        let mut f = TrigField::zero();
        for m in rec.modes {
            if m.wavevector.iter().any(|&c| c == i64::MIN) {
                return Err(serde::de::Error::custom(Error::Overflow(
                    "wavevector component i64::MIN has no canonical negation".into(),
                )));
            }
            f.insert(m.wavevector, m.phase, m.profile);
        }
        Ok(f)
    }
}

/// Formula rendering: one line per mode, `Σ c e^{-λt}` times the phase.
impl fmt::Display for TrigField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        for (i, m) in self.modes().enumerate() {
            if i > 0 {
                writeln!(f)?;
                write!(f, "+ ")?;
            }
            write!(f, "[")?;
            for (j, t) in m.profile.terms().iter().enumerate() {
                if j > 0 {
                    write!(f, " + ")?;
                }
                write!(
                    f,
                    "({:.6e}, {:.6e}, {:.6e})",
                    t.coef[0], t.coef[1], t.coef[2]
                )?;
                if t.power == 1 {
                    write!(f, " t")?;
                }
                if t.rate != 0.0 {
                    write!(f, " e^{{-{} t}}", t.rate)?;
                }
            }
            let k = m.wavevector;
            let ph = match m.phase {
                Phase::Cos => "cos",
                Phase::Sin => "sin",
            };
            write!(f, "] {}(({}, {}, {})·x)", ph, k[0], k[1], k[2])?;
        }
        Ok(())
    }
}
