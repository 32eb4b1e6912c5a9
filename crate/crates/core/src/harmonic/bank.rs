//! Flag-sample banks: a compact binary file with a JSON header.
//!
//! Layout: the 8 magic bytes `FWBANK01`, a little-endian `u32` header
//! length, the UTF-8 JSON header, then for every sample the `d x i` frame
//! (column-major) followed by the `C(d,i)` Plücker coordinates, all as
//! little-endian `f64`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::path::Path;

use super::empirical::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::linalg::{binomial, GrassmannPoint};
use crate::persist::write_atomic;

const MAGIC: &[u8; 8] = b"FWBANK01";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankHeader {
    pub d: usize,
    pub i: usize,
    /// Path length used for the limit-flag estimates.
    pub n: usize,
    pub seed: u64,
    /// Fingerprint of the measure that generated the samples.
    pub mu_hash: String,
    pub count: usize,
}

pub fn encode_bank(header: &BankHeader, nu: &EmpiricalMeasure) -> Result<Vec<u8>> {
    if nu.len() != header.count || nu.rank() != header.i || (!nu.is_empty() && nu.ambient_dim() != header.d) {
        return Err(Error::Invalid("bank header does not describe the samples".into()));
    }
    let json = serde_json::to_vec(header)?;
    let width = binomial(header.d, header.i);
    let mut out = Vec::with_capacity(12 + json.len() + nu.len() * 8 * (header.d * header.i + width));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for p in nu.points() {
        for x in p.frame().iter().chain(p.wedge().iter()) {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_bank(bytes: &[u8]) -> Result<(BankHeader, EmpiricalMeasure)> {
    let bad = |what: &str| Error::Invalid(format!("malformed flag bank: {what}"));
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(bad("missing magic"));
    }
    let hlen = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let body = bytes.get(12 + hlen..).ok_or_else(|| bad("truncated header"))?;
    let header: BankHeader = serde_json::from_slice(&bytes[12..12 + hlen])?;
    let (d, i) = (header.d, header.i);
    if i == 0 || i > d {
        return Err(bad("rank out of range"));
    }
    let width = binomial(d, i);
    let stride = 8 * (d * i + width);
    if body.len() != stride * header.count {
        return Err(bad("payload size does not match the header"));
    }
    let points = body
        .chunks_exact(stride)
        .map(|rec| {
            let vals: Vec<f64> =
                rec.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect();
            let frame = DMatrix::from_column_slice(d, i, &vals[..d * i]);
            GrassmannPoint::from_stored(frame, DVector::from_column_slice(&vals[d * i..]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header, EmpiricalMeasure::from_points(i, points)?))
}

pub fn save_bank(path: impl AsRef<Path>, header: &BankHeader, nu: &EmpiricalMeasure) -> Result<()> {
    write_atomic(path, &encode_bank(header, nu)?)
}

pub fn load_bank(path: impl AsRef<Path>) -> Result<(BankHeader, EmpiricalMeasure)> {
    decode_bank(&std::fs::read(path)?)
}
