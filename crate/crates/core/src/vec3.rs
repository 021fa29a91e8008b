//! Small fixed-size vector helpers for real and lattice 3-vectors.

pub type Vec3 = [f64; 3];
pub type IVec3 = [i64; 3];

pub const ZERO: Vec3 = [0.0; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn to_f64(k: &IVec3) -> Vec3 {
    [k[0] as f64, k[1] as f64, k[2] as f64]
}

/// Real vector dotted with a lattice vector.
#[inline]
pub fn dot_lattice(a: &Vec3, k: &IVec3) -> f64 {
    a[0] * k[0] as f64 + a[1] * k[1] as f64 + a[2] * k[2] as f64
}

/// Exact squared length of a lattice vector.
#[inline]
pub fn norm2_exact(k: &IVec3) -> i128 {
    k.iter().map(|&c| (c as i128) * (c as i128)).sum()
}

/// Squared length of a lattice vector as a decay rate.
#[inline]
pub fn norm2(k: &IVec3) -> f64 {
    norm2_exact(k) as f64
}

pub fn checked_add(a: &IVec3, b: &IVec3) -> Option<IVec3> {
    Some([
        a[0].checked_add(b[0])?,
        a[1].checked_add(b[1])?,
        a[2].checked_add(b[2])?,
    ])
}

pub fn checked_sub(a: &IVec3, b: &IVec3) -> Option<IVec3> {
    Some([
        a[0].checked_sub(b[0])?,
        a[1].checked_sub(b[1])?,
        a[2].checked_sub(b[2])?,
    ])
}

pub fn neg(k: &IVec3) -> IVec3 {
    [-k[0], -k[1], -k[2]]
}

/// True when the first nonzero component is positive.
pub fn is_lex_positive(k: &IVec3) -> bool {
    for &c in k {
        if c != 0 {
            return c > 0;
        }
    }
    false
}

pub fn is_zero(k: &IVec3) -> bool {
    k.iter().all(|&c| c == 0)
}
