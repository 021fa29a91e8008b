//! Exponential time profiles `Σ c · t^p · e^{-λ t}` with `p ∈ {0, 1}`.

use serde::{Deserialize, Serialize};

use crate::vec3::{self, Vec3};
use crate::{Error, Result};

/// Highest supported power of `t`. The first Picard iterate needs `t e^{-μt}`
/// for resonant Duhamel terms and nothing beyond.
pub const MAX_POWER: u8 = 1;

/// Coefficient type of a profile: a scalar or a 3-vector amplitude.
pub trait Coefficient: Copy + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn plus(self, other: Self) -> Self;
    fn times(self, s: f64) -> Self;
    fn magnitude(&self) -> f64;
    fn is_finite(&self) -> bool;

    fn is_zero(&self) -> bool {
        self.magnitude() == 0.0
    }
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }
    fn plus(self, other: Self) -> Self {
        self + other
    }
    fn times(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Coefficient for Vec3 {
    fn zero() -> Self {
        vec3::ZERO
    }
    fn plus(self, other: Self) -> Self {
        vec3::add(&self, &other)
    }
    fn times(self, s: f64) -> Self {
        vec3::scale(&self, s)
    }
    fn magnitude(&self) -> f64 {
        vec3::norm(self)
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|c| c.is_finite())
    }
    fn is_zero(&self) -> bool {
        self.iter().all(|&c| c == 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term<C> {
    pub coef: C,
    pub rate: f64,
    pub power: u8,
}

impl<C: Coefficient> Term<C> {
    pub fn eval(&self, t: f64) -> C {
        let tp = if self.power == 0 { 1.0 } else { t.powi(self.power as i32) };
        self.coef.times(tp * (-self.rate * t).exp())
    }
}

/// Canonical sum of exponential terms. Terms are sorted by `(rate, power)`,
/// no two terms share a key and zero coefficients are pruned.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile<C> {
    terms: Vec<Term<C>>,
}

pub type TimeProfile = Profile<f64>;
pub type VectorProfile = Profile<Vec3>;

impl<C: Coefficient> Default for Profile<C> {
    fn default() -> Self {
        Self { terms: Vec::new() }
    }
}

impl<C: Coefficient> Profile<C> {
    /// Builds a canonical profile. Rejects negative or non-finite rates,
    /// non-finite coefficients and powers above [`MAX_POWER`].
    pub fn new(terms: Vec<Term<C>>) -> Result<Self> {
        for t in &terms {
            if !(t.rate.is_finite() && t.rate >= 0.0) {
                return Err(Error::Parse(format!("invalid decay rate {}", t.rate)));
            }
            if !t.coef.is_finite() {
                return Err(Error::Parse("non-finite profile coefficient".into()));
            }
            if t.power > MAX_POWER {
                return Err(Error::Unsupported(format!(
                    "profile power {} exceeds {}",
                    t.power, MAX_POWER
                )));
            }
        }
        Ok(Self::canonical(terms))
    }

    fn canonical(mut terms: Vec<Term<C>>) -> Self {
        terms.sort_by(|a, b| a.rate.total_cmp(&b.rate).then(a.power.cmp(&b.power)));
        let mut out: Vec<Term<C>> = Vec::with_capacity(terms.len());
        for t in terms {
            match out.last_mut() {
                Some(last) if last.rate == t.rate && last.power == t.power => {
                    last.coef = last.coef.plus(t.coef);
                }
                _ => out.push(t),
            }
        }
        out.retain(|t| !t.coef.is_zero());
        Self { terms: out }
    }

    pub fn constant(c: C) -> Self {
        Self::canonical(vec![Term { coef: c, rate: 0.0, power: 0 }])
    }

    pub fn exponential(c: C, rate: f64) -> Self {
        Self::canonical(vec![Term { coef: c, rate, power: 0 }])
    }

    pub fn terms(&self) -> &[Term<C>] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_time_constant(&self) -> bool {
        self.terms.iter().all(|t| t.rate == 0.0 && t.power == 0)
    }

    pub fn eval(&self, t: f64) -> C {
        self.terms.iter().fold(C::zero(), |acc, term| acc.plus(term.eval(t)))
    }

    /// Multiplies the profile by `e^{-rate t}`.
    pub fn shift(&self, rate: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term { coef: t.coef, rate: t.rate + rate, power: t.power })
            .collect();
        Self::canonical(terms)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::canonical(self.terms.iter().map(|t| Term { coef: t.coef.times(s), ..*t }).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::canonical(terms)
    }

    pub fn map_coef<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Profile<D> {
        Profile::canonical(
            self.terms
                .iter()
                .map(|t| Term { coef: f(&t.coef), rate: t.rate, power: t.power })
                .collect(),
        )
    }

    /// Pointwise product in time with a bilinear rule on the coefficients.
    pub fn combine<D: Coefficient, E: Coefficient>(
        &self,
        other: &Profile<D>,
        f: impl Fn(&C, &D) -> E,
    ) -> Result<Profile<E>> {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let power = a.power + b.power;
                if power > MAX_POWER {
                    return Err(Error::Unsupported(
                        "product of resonant profiles (second Picard iterate)".into(),
                    ));
                }
                terms.push(Term { coef: f(&a.coef, &b.coef), rate: a.rate + b.rate, power });
            }
        }
        Ok(Profile::canonical(terms))
    }

    /// Upper bound of `|profile(t)|` for `t >= 0`, used for pruning.
    pub fn magnitude_bound(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.eval(t).magnitude()).sum()
    }

    pub fn max_power(&self) -> u8 {
        self.terms.iter().map(|t| t.power).max().unwrap_or(0)
    }
}

impl<C: Coefficient + Serialize> Serialize for Profile<C> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.terms.serialize(s)
    }
}

impl<'de, C: Coefficient + Deserialize<'de>> Deserialize<'de> for Profile<C> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<Term<C>>::deserialize(d)?;
        Profile::new(terms).map_err(serde::de::Error::custom)
    }
}
