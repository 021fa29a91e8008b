//! Reduction of a trigonometric field to the lattice its wavevectors span.
//!
//! If every wavevector lies in a lattice with basis rows `B`, then
//! `f(x) = F(Bx)` with `F` a trigonometric polynomial in `θ ∈ T^ρ` whose
//! wavevectors are the integer coordinates `n` of `k = nB`. `x ↦ Bx` maps
//! the torus onto `T^ρ`, so `sup f = sup F`, and `F` has no copies of the
//! same extremum.

use crate::calculus::{FrozenField, FrozenMode};
use crate::vec3::{IVec3, Vec3};

/// Lattice basis plus the coordinates map.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    /// Basis rows, `rank` of them.
    pub basis: Vec<[i128; 3]>,
    hnf: Vec<([i128; 3], usize)>,
    /// Change of coordinates from the echelon basis.
    v: Vec<Vec<i128>>,
}

fn first_nonzero(v: &[i128; 3]) -> Option<usize> {
    v.iter().position(|&c| c != 0)
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1, mut s0, mut s1, mut t0, mut t1) = (a, b, 1i128, 0i128, 0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

fn comb(a: i128, x: &[i128; 3], b: i128, y: &[i128; 3]) -> Option<[i128; 3]> {
    let mut o = [0i128; 3];
    for i in 0..3 {
        o[i] = a.checked_mul(x[i])?.checked_add(b.checked_mul(y[i])?)?;
    }
    Some(o)
}

/// Echelon basis with positive pivots, entries above each pivot reduced.
fn hermite(vectors: &[IVec3]) -> Option<Vec<([i128; 3], usize)>> {
    let mut rows: Vec<([i128; 3], usize)> = Vec::new();
    for k in vectors {
        let mut v = k.map(|c| c as i128);
        let mut i = 0;
        loop {
            let Some(c) = first_nonzero(&v) else { break };
            if i == rows.len() || c < rows[i].1 {
                let v = if v[c] < 0 { v.map(|x| -x) } else { v };
                rows.insert(i, (v, c));
                break;
            }
            if c == rows[i].1 {
                let (b, p) = rows[i];
                let (g, s, t) = ext_gcd(b[p], v[p]);
                let nb = comb(s, &b, t, &v)?;
                v = comb(v[p] / g, &b, -(b[p] / g), &v)?;
                rows[i] = (nb, p);
            }
            i += 1;
        }
        // keep entries small: reduce every row modulo the later pivots
        for j in 0..rows.len() {
            let (pj, cj) = rows[j];
            for i in 0..j {
                let q = rows[i].0[cj].div_euclid(pj[cj]);
                if q != 0 {
                    rows[i].0 = comb(1, &rows[i].0, -q, &pj)?;
                }
            }
        }
    }
    Some(rows)
}

fn hnf_coords(rows: &[([i128; 3], usize)], k: &[i128; 3]) -> Option<Vec<i128>> {
    let mut rest = *k;
    let mut n = Vec::with_capacity(rows.len());
    for (b, p) in rows {
        if rest[*p] % b[*p] != 0 {
            return None;
        }
        let q = rest[*p] / b[*p];
        rest = comb(1, &rest, -q, b)?;
        n.push(q);
    }
    if rest.iter().any(|&c| c != 0) {
        return None;
    }
    Some(n)
}

fn to_f(v: &[i128; 3]) -> [f64; 3] {
    v.map(|c| c as f64)
}

/// LLL (`δ = 3/4`) of the standard basis of `Z^n` under the quadratic form
/// `gram`. Returns the reduced basis as the columns of `V` together with
/// `V⁻¹`.
#[allow(clippy::type_complexity)]
fn lll_gram(gram: &[Vec<f64>]) -> Option<(Vec<Vec<i128>>, Vec<Vec<i128>>)> {
    let n = gram.len();
    let ident = |i: usize, j: usize| i128::from(i == j);
    // cols[j] is the j-th basis vector
    let mut cols: Vec<Vec<i128>> = (0..n).map(|j| (0..n).map(|i| ident(i, j)).collect()).collect();
    let mut vinv: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| ident(i, j)).collect()).collect();
    let ip = |a: &[i128], b: &[i128]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += a[i] as f64 * gram[i][j] * b[j] as f64;
            }
        }
        s
    };
    let gso = |cols: &[Vec<i128>]| -> (Vec<f64>, Vec<Vec<f64>>) {
        // Gram-Schmidt in coefficient form: b*_i = b_i - Σ mu_ij b*_j
        let mut bn = vec![0.0; n];
        let mut mu = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..i {
                let mut v = ip(&cols[i], &cols[j]);
                for l in 0..j {
                    v -= mu[j][l] * mu[i][l] * bn[l];
                }
                mu[i][j] = if bn[j] > 0.0 { v / bn[j] } else { 0.0 };
            }
            let mut v = ip(&cols[i], &cols[i]);
            for l in 0..i {
                v -= mu[i][l] * mu[i][l] * bn[l];
            }
            bn[i] = v;
        }
        (bn, mu)
    };
    let mut k = 1;
    let mut guard = 0;
    while k < n {
        guard += 1;
        if guard > 10_000 {
            return None;
        }
        for j in (0..k).rev() {
            let (_, mu) = gso(&cols);
            let q = mu[k][j].round();
            if q != 0.0 && q.is_finite() {
                let qi = q as i128;
                for i in 0..n {
                    cols[k][i] = cols[k][i].checked_sub(qi.checked_mul(cols[j][i])?)?;
                }
                for i in 0..n {
                    vinv[j][i] = vinv[j][i].checked_add(qi.checked_mul(vinv[k][i])?)?;
                }
            }
        }
        let (bn, mu) = gso(&cols);
        if bn[k] >= (0.75 - mu[k][k - 1] * mu[k][k - 1]) * bn[k - 1] {
            k += 1;
        } else {
            cols.swap(k, k - 1);
            vinv.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    Some((cols, vinv))
}

impl Reduction {
    /// Basis adapted to `vectors` weighted by `weights`; `None` when the
    /// lattice computations would overflow.
    pub fn new(vectors: &[IVec3], weights: &[f64]) -> Option<Self> {
        let hnf = hermite(vectors)?;
        let n = hnf.len();
        let mut gram = vec![vec![0.0; n]; n];
        for (k, w) in vectors.iter().zip(weights) {
            let h = hnf_coords(&hnf, &k.map(|c| c as i128))?;
            for i in 0..n {
                for j in 0..n {
                    gram[i][j] += w * h[i] as f64 * h[j] as f64;
                }
            }
        }
        let (cols, vinv) = lll_gram(&gram)?;
        // primal basis V⁻¹ B_h
        let mut basis = vec![[0i128; 3]; n];
        for i in 0..n {
            for (l, (row, _)) in hnf.iter().enumerate() {
                basis[i] = comb(1, &basis[i], vinv[i][l], row)?;
            }
        }
        // coords(k) = h(k) · V, with V's columns in `cols`
        let v: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect();
        Some(Self { basis, hnf, v })
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Integer coordinates of `k` in the adapted basis.
    pub fn coords(&self, k: &IVec3) -> Option<Vec<i128>> {
        let h = hnf_coords(&self.hnf, &k.map(|c| c as i128))?;
        let n = self.rank();
        let mut out = vec![0i128; n];
        for (j, o) in out.iter_mut().enumerate() {
            for (i, hi) in h.iter().enumerate() {
                *o = o.checked_add(hi.checked_mul(self.v[i][j])?)?;
            }
        }
        Some(out)
    }

    /// A point `x` with `Bx = θ`.
    pub fn lift(&self, theta: &Vec3) -> Vec3 {
        let n = self.rank();
        let b: Vec<[f64; 3]> = self.basis.iter().map(to_f).collect();
        let dot = |a: &[f64; 3], c: &[f64; 3]| a[0] * c[0] + a[1] * c[1] + a[2] * c[2];
        // x = Bᵀ (B Bᵀ)⁻¹ θ, by Gaussian elimination on the Gram matrix
        let mut g = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            for j in 0..n {
                g[i][j] = dot(&b[i], &b[j]);
            }
            g[i][n] = theta[i];
        }
        for c in 0..n {
            let piv = (c..n).max_by(|&i, &j| g[i][c].abs().total_cmp(&g[j][c].abs())).unwrap();
            g.swap(c, piv);
            for r in 0..n {
                if r != c && g[c][c] != 0.0 {
                    let f = g[r][c] / g[c][c];
                    for k in c..=n {
                        g[r][k] -= f * g[c][k];
                    }
                }
            }
        }
        let y: Vec<f64> = (0..n).map(|i| if g[i][i] != 0.0 { g[i][n] / g[i][i] } else { 0.0 }).collect();
        let mut x = [0.0; 3];
        for i in 0..n {
            for a in 0..3 {
                x[a] += y[i] * b[i][a];
            }
        }
        x
    }

    /// The field `F` with `f(x) = F(Bx)`; `None` if a coordinate leaves `i64`.
    pub fn reduce(&self, f: &FrozenField) -> Option<FrozenField> {
        let mut modes = Vec::with_capacity(f.len());
        for m in f.modes() {
            let n = self.coords(&m.k)?;
            let mut k = [0i64; 3];
            for (i, c) in n.iter().enumerate() {
                k[i] = i64::try_from(*c).ok()?;
            }
            modes.push(FrozenMode { k, c: m.c });
        }
        Some(FrozenField::from_modes(modes))
    }
}

/// Lattice reduction of `f`, or `None` when it cannot shrink anything.
pub fn reduce_field(f: &FrozenField) -> Option<(Reduction, FrozenField)> {
    let (ks, ws): (Vec<IVec3>, Vec<f64>) =
        f.modes().iter().filter(|m| m.k.iter().any(|&c| c != 0)).map(|m| (m.k, m.magnitude())).unzip();
    if ks.is_empty() {
        return None;
    }
    let top = ws.iter().cloned().fold(0.0, f64::max);
    let ws: Vec<f64> = ws.iter().map(|w| (w / top).max(1e-12)).collect();
    let red = Reduction::new(&ks, &ws)?;
    let g = red.reduce(f)?;
    Some((red, g))
}
