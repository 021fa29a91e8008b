//! Fixed-time snapshot of a trigonometric field in complex-exponential form,
//! `f(x) = Re Σ_k c_k e^{i k·x}` with one entry per canonical wavevector.
//! This is the common currency of the norm estimators: exact calculus fields
//! and solver grids both reduce to it.

use std::collections::BTreeMap;

use rustfft::num_complex::Complex64;

use super::field::{Phase, TrigField};
use crate::vec3::{self, IVec3, Vec3};

pub type CVec3 = [Complex64; 3];

const CZERO: CVec3 = [Complex64 { re: 0.0, im: 0.0 }; 3];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrozenMode {
    pub k: IVec3,
    pub c: CVec3,
}

impl FrozenMode {
    pub fn magnitude(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrozenField {
    modes: Vec<FrozenMode>,
}

impl FrozenField {
    /// Builds from raw modes, merging duplicates after folding each
    /// wavevector to canonical sign (`c e^{-ikx}` has real part
    /// `Re(conj(c) e^{ikx})`).
    pub fn from_modes(modes: impl IntoIterator<Item = FrozenMode>) -> Self {
        let mut map: BTreeMap<IVec3, CVec3> = BTreeMap::new();
        for m in modes {
            let (k, c) = if vec3::is_zero(&m.k) {
                (m.k, [Complex64::new(m.c[0].re, 0.0), Complex64::new(m.c[1].re, 0.0), Complex64::new(m.c[2].re, 0.0)])
            } else if vec3::is_lex_positive(&m.k) {
                (m.k, m.c)
            } else {
                (vec3::neg(&m.k), [m.c[0].conj(), m.c[1].conj(), m.c[2].conj()])
            };
            let e = map.entry(k).or_insert(CZERO);
            for i in 0..3 {
                e[i] += c[i];
            }
        }
        let modes = map
            .into_iter()
            .filter(|(_, c)| c.iter().any(|z| z.re != 0.0 || z.im != 0.0))
            .map(|(k, c)| FrozenMode { k, c })
            .collect();
        Self { modes }
    }

    /// Snapshot of `f(·, t)`.
    pub fn from_trig(f: &TrigField, t: f64) -> Self {
        Self::from_modes(f.modes().map(|m| {
            let a = m.profile.eval(t);
            let c = match m.phase {
                Phase::Cos => [Complex64::new(a[0], 0.0), Complex64::new(a[1], 0.0), Complex64::new(a[2], 0.0)],
                Phase::Sin => [Complex64::new(0.0, -a[0]), Complex64::new(0.0, -a[1]), Complex64::new(0.0, -a[2])],
            };
            FrozenMode { k: m.wavevector, c }
        }))
    }

    pub fn modes(&self) -> &[FrozenMode] {
        &self.modes
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    /// `e^{sΔ} f`, dropping modes damped to exactly zero.
    pub fn heat(&self, s: f64) -> Self {
        let modes = self
            .modes
            .iter()
            .filter_map(|m| {
                let d = (-vec3::norm2(&m.k) * s).exp();
                if d == 0.0 {
                    None
                } else {
                    Some(FrozenMode { k: m.k, c: [m.c[0] * d, m.c[1] * d, m.c[2] * d] })
                }
            })
            .collect();
        Self { modes }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_modes(self.modes.iter().map(|m| FrozenMode { k: m.k, c: [m.c[0] * s, m.c[1] * s, m.c[2] * s] }))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_modes(self.modes.iter().chain(other.modes.iter()).copied())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Drops modes with magnitude at most `rel` times the largest one.
    pub fn prune(&self, rel: f64) -> Self {
        let top = self.modes.iter().map(|m| m.magnitude()).fold(0.0, f64::max);
        let cut = rel * top;
        Self { modes: self.modes.iter().filter(|m| m.magnitude() > cut).copied().collect() }
    }

    /// `Σ |c_k|`, an upper bound for `sup_x |f(x)|`.
    pub fn amplitude_sum(&self) -> f64 {
        self.modes.iter().map(|m| m.magnitude()).sum()
    }

    pub fn max_k2(&self) -> f64 {
        self.modes.iter().map(|m| vec3::norm2(&m.k)).fold(0.0, f64::max)
    }

    /// Per-axis largest `|k_i|`.
    pub fn bandwidth(&self) -> [i64; 3] {
        let mut b = [0i64; 3];
        for m in &self.modes {
            for i in 0..3 {
                b[i] = b[i].max(m.k[i].saturating_abs());
            }
        }
        b
    }

    pub fn has_mean(&self) -> bool {
        self.modes.iter().any(|m| vec3::is_zero(&m.k))
    }

    pub fn evaluate(&self, x: &Vec3) -> Vec3 {
        let mut out = [0.0; 3];
        for m in &self.modes {
            let th = vec3::dot_lattice(x, &m.k);
            let (s, c) = th.sin_cos();
            for i in 0..3 {
                out[i] += m.c[i].re * c - m.c[i].im * s;
            }
        }
        out
    }

    /// `g = |f|²` with gradient and Hessian at `x`.
    pub fn norm2_derivatives(&self, x: &Vec3) -> (f64, Vec3, [[f64; 3]; 3]) {
        let mut f = [0.0; 3];
        let mut df = [[0.0; 3]; 3]; // df[i][a] = ∂_a f_i
        let mut d2f = [[[0.0; 3]; 3]; 3]; // d2f[i][a][b]
        for m in &self.modes {
            let kf = vec3::to_f64(&m.k);
            let th = vec3::dot(x, &kf);
            let (s, c) = th.sin_cos();
            for i in 0..3 {
                let v = m.c[i].re * c - m.c[i].im * s;
                let dv = -m.c[i].re * s - m.c[i].im * c;
                f[i] += v;
                for a in 0..3 {
                    df[i][a] += dv * kf[a];
                    for b in 0..3 {
                        d2f[i][a][b] -= v * kf[a] * kf[b];
                    }
                }
            }
        }
        let g = vec3::dot(&f, &f);
        let mut grad = [0.0; 3];
        let mut hess = [[0.0; 3]; 3];
        for a in 0..3 {
            for i in 0..3 {
                grad[a] += 2.0 * f[i] * df[i][a];
            }
            for b in 0..3 {
                for i in 0..3 {
                    hess[a][b] += 2.0 * (df[i][a] * df[i][b] + f[i] * d2f[i][a][b]);
                }
            }
        }
        (g, grad, hess)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::profile::VectorProfile;

    #[test]
    fn matches_trig_evaluation() {
        let mut f = TrigField::zero();
        f.insert([1, 2, 0], Phase::Cos, VectorProfile::exponential([0.3, -0.2, 0.1], 5.0));
        f.insert([1, 2, 0], Phase::Sin, VectorProfile::exponential([0.0, 1.0, -2.0], 5.0));
        f.insert([0, 0, 3], Phase::Sin, VectorProfile::constant([1.0, 0.5, 0.0]));
        let t = 0.05;
        let z = FrozenField::from_trig(&f, t);
        assert_eq!(z.len(), 2);
        for x in [[0.1, 0.2, 0.3], [2.0, -1.0, 0.5]] {
            let a = f.evaluate(&x, t);
            let b = z.evaluate(&x);
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn negative_wavevectors_fold_to_conjugates() {
        let c = [Complex64::new(1.0, 2.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)];
        let a = FrozenField::from_modes([FrozenMode { k: [-1, 3, 0], c }]);
        assert_eq!(a.modes()[0].k, [1, -3, 0]);
        let x = [0.4, 0.9, -0.3];
        let direct = {
            let th = -0.4 + 3.0 * 0.9;
            [c[0].re * f64::cos(th) - c[0].im * f64::sin(th), 0.0, c[2].re * f64::cos(th) - c[2].im * f64::sin(th)]
        };
        let v = a.evaluate(&x);
        for i in 0..3 {
            assert!((v[i] - direct[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let z = FrozenField::from_modes([
            FrozenMode { k: [1, 0, 2], c: [Complex64::new(0.5, 0.1), Complex64::new(0.0, 1.0), Complex64::new(-0.2, 0.0)] },
            FrozenMode { k: [0, 3, -1], c: [Complex64::new(0.1, 0.0), Complex64::new(0.2, 0.3), Complex64::new(0.0, 0.4)] },
        ]);
        let x = [0.3, -0.8, 1.7];
        let (_, grad, hess) = z.norm2_derivatives(&x);
        let h = 1e-5;
        for a in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            let (gp, gradp, _) = z.norm2_derivatives(&xp);
            let (gm, gradm, _) = z.norm2_derivatives(&xm);
            assert!(((gp - gm) / (2.0 * h) - grad[a]).abs() < 1e-7);
            for b in 0..3 {
                assert!(((gradp[b] - gradm[b]) / (2.0 * h) - hess[a][b]).abs() < 1e-6);
            }
        }
    }
}
