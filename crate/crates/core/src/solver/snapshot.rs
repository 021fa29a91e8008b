//! Flat binary snapshot format with a JSON sidecar.
//!
//! ```text
//! offset  size         field
//! 0       8            magic "NSISNAP1"
//! 8       4            endianness marker 0x01020304 (u32, file byte order)
//! 12      4 x 3        grid sizes n0 n1 n2 (u32)
//! 24      8            time (f64)
//! 32      8            viscosity (f64)
//! 40      8·3·n0n1n2   ux, uy, uz physical samples (f64), row-major, last
//!                      index fastest, point (i0,i1,i2) at 2π(i0/n0, i1/n1, i2/n2)
//! ```
//!
//! The writer always emits little-endian; the reader accepts both orders.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::grid::{check_dims, GridField};
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"NSISNAP1";
pub const HEADER_LEN: usize = 40;
const MARKER: u32 = 0x0102_0304;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub format: String,
    pub dims: [usize; 3],
    pub time: f64,
    pub nu: f64,
    pub endianness: String,
    pub payload_sha256: String,
    pub energy: f64,
}

pub fn encode(g: &GridField) -> Vec<u8> {
    let phys = g.to_physical();
    let d = g.dims();
    let mut out = Vec::with_capacity(HEADER_LEN + 24 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&MARKER.to_le_bytes());
    for n in d {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    out.extend_from_slice(&g.time.to_le_bytes());
    out.extend_from_slice(&g.nu.to_le_bytes());
    for comp in &phys {
        for v in comp {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn sidecar(g: &GridField, bytes: &[u8]) -> Sidecar {
    Sidecar {
        format: "NSISNAP1".into(),
        dims: g.dims(),
        time: g.time,
        nu: g.nu,
        endianness: "little".into(),
        payload_sha256: hex::encode(Sha256::digest(&bytes[HEADER_LEN.min(bytes.len())..])),
        energy: super::evolve::diagnostics(g).energy,
    }
}

pub fn decode(bytes: &[u8]) -> Result<GridField> {
    let bad = |m: &str| Error::Parse(format!("snapshot: {m}"));
    if bytes.len() < HEADER_LEN {
        return Err(bad("truncated header"));
    }
    if &bytes[..8] != MAGIC {
        return Err(bad("bad magic"));
    }
    let marker = <[u8; 4]>::try_from(&bytes[8..12]).unwrap();
    let little = if u32::from_le_bytes(marker) == MARKER {
        true
    } else if u32::from_be_bytes(marker) == MARKER {
        false
    } else {
        return Err(bad("bad endianness marker"));
    };
    let u32_at = |o: usize| {
        let b = <[u8; 4]>::try_from(&bytes[o..o + 4]).unwrap();
        if little {
            u32::from_le_bytes(b)
        } else {
            u32::from_be_bytes(b)
        }
    };
    let f64_at = |o: usize| {
        let b = <[u8; 8]>::try_from(&bytes[o..o + 8]).unwrap();
        if little {
            f64::from_le_bytes(b)
        } else {
            f64::from_be_bytes(b)
        }
    };
    let dims = [u32_at(12) as usize, u32_at(16) as usize, u32_at(20) as usize];
    check_dims(dims).map_err(|_| bad("grid sizes must be powers of two in [1, 4096]"))?;
    let len: usize = dims.iter().product();
    let expected = len
        .checked_mul(24)
        .and_then(|p| p.checked_add(HEADER_LEN))
        .ok_or_else(|| bad("grid too large"))?;
    if bytes.len() != expected {
        return Err(bad(&format!("payload is {} bytes, expected {}", bytes.len() - HEADER_LEN, expected - HEADER_LEN)));
    }
    let time = f64_at(24);
    let nu = f64_at(32);
    if !(time.is_finite() && time >= 0.0 && nu.is_finite() && nu >= 0.0) {
        return Err(bad("time and viscosity must be finite and nonnegative"));
    }
    let mut comps: [Vec<f64>; 3] = [Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len)];
    for (a, comp) in comps.iter_mut().enumerate() {
        for i in 0..len {
            let v = f64_at(HEADER_LEN + 8 * (a * len + i));
            if !v.is_finite() {
                return Err(bad("non-finite sample"));
            }
            comp.push(v);
        }
    }
    GridField::from_physical(dims, comps, time, nu)
}

/// Writes `<stem>.bin` and `<stem>.json`.
pub fn write(g: &GridField, stem: &std::path::Path) -> Result<()> {
    let bytes = encode(g);
    std::fs::write(stem.with_extension("bin"), &bytes)?;
    std::fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&sidecar(g, &bytes))?)?;
    Ok(())
}

pub fn read(path: &std::path::Path) -> Result<GridField> {
    decode(&std::fs::read(path)?)
}
