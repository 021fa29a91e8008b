//! Spectral velocity fields on a periodic lattice.
//!
//! Axes the field does not depend on may have a single grid point; every
//! other axis has a power-of-two resolution. Coefficients are normalised so
//! that `u(x) = Σ_k û_k e^{i k·x}`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::calculus::{FrozenField, FrozenMode, TrigField};
use crate::vec3::{self, IVec3, Vec3};
use crate::{Error, Result};

const CZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Largest dealiased wavenumber on an axis with `n` points (2/3 rule).
pub fn band_limit(n: usize) -> i64 {
    ((n as i64) - 1) / 3
}

pub fn check_dims(dims: [usize; 3]) -> Result<()> {
    for &n in &dims {
        if n == 0 || !n.is_power_of_two() || n > 4096 {
            return Err(Error::Config(format!("grid size {n} is not a power of two in [1, 4096]")));
        }
    }
    Ok(())
}

/// Signed wavenumber of index `i` on an axis of `n` points.
#[inline]
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Index of wavenumber `k` on an axis of `n` points, if representable.
#[inline]
pub fn index_of(k: i64, n: usize) -> Option<usize> {
    let n_i = n as i64;
    if n == 1 {
        return (k == 0).then_some(0);
    }
    if k > n_i / 2 || k <= -n_i / 2 {
        return None;
    }
    Some(k.rem_euclid(n_i) as usize)
}

/// Separable 3D FFT over the non-trivial axes of a row-major buffer.
#[derive(Clone)]
pub struct Fft3 {
    dims: [usize; 3],
    fwd: [Option<Arc<dyn Fft<f64>>>; 3],
    inv: [Option<Arc<dyn Fft<f64>>>; 3],
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft3({:?})", self.dims)
    }
}

impl Fft3 {
    pub fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let mut fwd: [Option<Arc<dyn Fft<f64>>>; 3] = [None, None, None];
        let mut inv: [Option<Arc<dyn Fft<f64>>>; 3] = [None, None, None];
        for a in 0..3 {
            if dims[a] > 1 {
                fwd[a] = Some(planner.plan_fft_forward(dims[a]));
                inv[a] = Some(planner.plan_fft_inverse(dims[a]));
            }
        }
        Self { dims, fwd, inv }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn run(&self, data: &mut [Complex64], plans: &[Option<Arc<dyn Fft<f64>>>; 3]) {
        let [n0, n1, n2] = self.dims;
        assert_eq!(data.len(), n0 * n1 * n2);
        if let Some(p) = &plans[2] {
            p.process(data);
        }
        if let Some(p) = &plans[1] {
            let mut line = vec![CZERO; n1];
            let mut scratch = vec![CZERO; p.get_inplace_scratch_len()];
            for i0 in 0..n0 {
                for i2 in 0..n2 {
                    let base = i0 * n1 * n2 + i2;
                    for (j, l) in line.iter_mut().enumerate() {
                        *l = data[base + j * n2];
                    }
                    p.process_with_scratch(&mut line, &mut scratch);
                    for (j, l) in line.iter().enumerate() {
                        data[base + j * n2] = *l;
                    }
                }
            }
        }
        if let Some(p) = &plans[0] {
            let stride = n1 * n2;
            let mut line = vec![CZERO; n0];
            let mut scratch = vec![CZERO; p.get_inplace_scratch_len()];
            for off in 0..stride {
                for (j, l) in line.iter_mut().enumerate() {
                    *l = data[off + j * stride];
                }
                p.process_with_scratch(&mut line, &mut scratch);
                for (j, l) in line.iter().enumerate() {
                    data[off + j * stride] = *l;
                }
            }
        }
    }

    /// Physical samples to normalised coefficients.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.fwd);
        let s = 1.0 / self.len() as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }

    /// Normalised coefficients to physical samples.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inv);
    }
}

/// A real velocity field held by its spectral coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    dims: [usize; 3],
    coeffs: [Vec<Complex64>; 3],
    pub time: f64,
    pub nu: f64,
}

impl GridField {
    pub fn zeros(dims: [usize; 3], time: f64, nu: f64) -> Result<Self> {
        check_dims(dims)?;
        let len = dims.iter().product();
        Ok(Self { dims, coeffs: [vec![CZERO; len], vec![CZERO; len], vec![CZERO; len]], time, nu })
    }

    pub fn from_coeffs(dims: [usize; 3], coeffs: [Vec<Complex64>; 3], time: f64, nu: f64) -> Result<Self> {
        check_dims(dims)?;
        let len: usize = dims.iter().product();
        if coeffs.iter().any(|c| c.len() != len) {
            return Err(Error::Config("coefficient array size does not match the grid".into()));
        }
        Ok(Self { dims, coeffs, time, nu })
    }

    /// Builds from physical samples `[ux, uy, uz]` in row-major order.
    pub fn from_physical(dims: [usize; 3], values: [Vec<f64>; 3], time: f64, nu: f64) -> Result<Self> {
        check_dims(dims)?;
        let fft = Fft3::new(dims);
        let len = fft.len();
        if values.iter().any(|v| v.len() != len) {
            return Err(Error::Config("sample array size does not match the grid".into()));
        }
        let coeffs = values.map(|v| {
            let mut c: Vec<Complex64> = v.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
            fft.forward(&mut c);
            c
        });
        Ok(Self { dims, coeffs, time, nu })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coeffs(&self) -> &[Vec<Complex64>; 3] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Vec<Complex64>; 3] {
        &mut self.coeffs
    }

    /// Wavevector of flat index `idx`.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> IVec3 {
        let [_, n1, n2] = self.dims;
        let i2 = idx % n2;
        let i1 = (idx / n2) % n1;
        let i0 = idx / (n1 * n2);
        [wavenumber(i0, self.dims[0]), wavenumber(i1, n1), wavenumber(i2, n2)]
    }

    pub fn index(&self, k: &IVec3) -> Option<usize> {
        let i0 = index_of(k[0], self.dims[0])?;
        let i1 = index_of(k[1], self.dims[1])?;
        let i2 = index_of(k[2], self.dims[2])?;
        Some((i0 * self.dims[1] + i1) * self.dims[2] + i2)
    }

    /// Per-axis dealiased band.
    pub fn band(&self) -> [i64; 3] {
        self.dims.map(band_limit)
    }

    pub fn in_band(&self, k: &IVec3) -> bool {
        let b = self.band();
        (0..3).all(|a| k[a].abs() <= b[a])
    }

    /// Physical samples of the three components.
    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        let fft = Fft3::new(self.dims);
        self.coeffs.clone().map(|mut c| {
            fft.inverse(&mut c);
            c.into_iter().map(|z| z.re).collect()
        })
    }

    pub fn scale(&self, s: f64) -> GridField {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            for z in c.iter_mut() {
                *z *= s;
            }
        }
        out
    }

    pub fn axpy(&self, s: f64, other: &GridField) -> Result<GridField> {
        if self.dims != other.dims {
            return Err(Error::Numerical("grid size mismatch".into()));
        }
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            for (z, w) in c.iter_mut().zip(o.iter()) {
                *z += w * s;
            }
        }
        Ok(out)
    }

    /// `e^{sΔ}` applied to the coefficients.
    pub fn heat(&self, s: f64) -> GridField {
        let mut out = self.clone();
        for idx in 0..self.len() {
            let d = (-vec3::norm2(&self.wavevector(idx)) * s).exp();
            for c in out.coeffs.iter_mut() {
                c[idx] *= d;
            }
        }
        out
    }

    /// Complex-exponential form, dropping exact zeros.
    pub fn to_frozen(&self) -> FrozenField {
        let mut modes = Vec::new();
        for idx in 0..self.len() {
            let k = self.wavevector(idx);
            let c = [self.coeffs[0][idx], self.coeffs[1][idx], self.coeffs[2][idx]];
            if c.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                continue;
            }
            if vec3::is_zero(&k) {
                modes.push(FrozenMode { k, c });
            } else if vec3::is_lex_positive(&k) {
                modes.push(FrozenMode { k, c: c.map(|z| z * 2.0) });
            }
        }
        FrozenField::from_modes(modes)
    }

    pub fn evaluate(&self, x: &Vec3) -> Vec3 {
        let mut out = [0.0; 3];
        for idx in 0..self.len() {
            let k = self.wavevector(idx);
            let th = vec3::dot_lattice(x, &k);
            let e = Complex64::new(th.cos(), th.sin());
            for a in 0..3 {
                out[a] += (self.coeffs[a][idx] * e).re;
            }
        }
        out
    }

    /// Relative spectral divergence `‖k·û‖ / ‖|k| û‖`.
    pub fn divergence(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for idx in 0..self.len() {
            let k = vec3::to_f64(&self.wavevector(idx));
            let d = self.coeffs[0][idx] * k[0] + self.coeffs[1][idx] * k[1] + self.coeffs[2][idx] * k[2];
            num += d.norm_sqr();
            let k2 = vec3::dot(&k, &k);
            den += k2 * (0..3).map(|a| self.coeffs[a][idx].norm_sqr()).sum::<f64>();
        }
        if den == 0.0 {
            0.0
        } else {
            (num / den).sqrt()
        }
    }

    /// Largest modulus of an out-of-band coefficient.
    pub fn out_of_band(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in 0..self.len() {
            if !self.in_band(&self.wavevector(idx)) {
                for c in &self.coeffs {
                    worst = worst.max(c[idx].norm());
                }
            }
        }
        worst
    }
}

/// Grid dimensions: `n` points on every axis along which `bandwidth` is
/// nonzero, one point elsewhere.
pub fn dims_for(bandwidth: [i64; 3], n: usize) -> [usize; 3] {
    bandwidth.map(|b| if b == 0 { 1 } else { n })
}

fn inject(f: &FrozenField, dims: [usize; 3], time: f64, nu: f64, truncate: bool) -> Result<GridField> {
    let mut g = GridField::zeros(dims, time, nu)?;
    for m in f.modes() {
        if !g.in_band(&m.k) {
            if truncate {
                continue;
            }
            return Err(Error::Resolution(format!(
                "wavevector {:?} outside the dealiased band {:?} of a {:?} grid",
                m.k,
                g.band(),
                dims
            )));
        }
        if vec3::is_zero(&m.k) {
            for a in 0..3 {
                g.coeffs[a][0] += m.c[a].re;
            }
            continue;
        }
        let ip = g.index(&m.k).expect("in-band wavevector");
        let im = g.index(&vec3::neg(&m.k)).expect("in-band wavevector");
        for a in 0..3 {
            g.coeffs[a][ip] += m.c[a] * 0.5;
            g.coeffs[a][im] += m.c[a].conj() * 0.5;
        }
    }
    Ok(g)
}

/// Exact injection of `f(·, t)` into the coefficients of a grid.
pub fn spectralize(f: &TrigField, t: f64, dims: [usize; 3], nu: f64) -> Result<GridField> {
    inject(&FrozenField::from_trig(f, t), dims, t, nu, false)
}

/// As [`spectralize`], silently dropping modes outside the dealiased band.
pub fn spectralize_truncated(f: &TrigField, t: f64, dims: [usize; 3], nu: f64) -> Result<GridField> {
    inject(&FrozenField::from_trig(f, t), dims, t, nu, true)
}

pub fn spectralize_frozen(f: &FrozenField, dims: [usize; 3], time: f64, nu: f64) -> Result<GridField> {
    inject(f, dims, time, nu, false)
}
