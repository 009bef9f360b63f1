//! Matrix file I/O.
//!
//! Binary layout (all little-endian):
//!
//! ```text
//! n:    u64
//! hbar: f64
//! l:    f64
//! data: n*n f64          (real symmetric, row-major), or
//!       2*n*n f64        (complex, row-major, re/im interleaved)
//! ```
//!
//! The two payload shapes are distinguished by the byte length. Text
//! export is provided for small matrices.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::CMat;

#[derive(Debug, Error)]
pub enum MatrixIoError {
    #[error("file too short for header")]
    Truncated,
    #[error("matrix dimension {0} out of range")]
    BadDimension(u64),
    #[error("header field not finite")]
    BadHeader,
    #[error("payload length {got} matches neither real ({real}) nor complex ({complex}) layout")]
    BadPayload {
        got: usize,
        real: usize,
        complex: usize,
    },
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
}

const MAX_N: u64 = 1 << 16;

/// A decoded matrix file.
pub struct MatrixFile {
    pub n: usize,
    pub hbar: f64,
    pub l: f64,
    pub complex: bool,
    pub data: Vec<Complex64>,
}

pub fn encode_complex(mat: &CMat, hbar: f64, l: f64) -> Vec<u8> {
    let n = mat.n;
    let mut out = Vec::with_capacity(24 + 16 * n * n);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&hbar.to_le_bytes());
    out.extend_from_slice(&l.to_le_bytes());
    for z in &mat.data {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn encode_real(rows: &[f64], n: usize, hbar: f64, l: f64) -> Vec<u8> {
    assert_eq!(rows.len(), n * n);
    let mut out = Vec::with_capacity(24 + 8 * n * n);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&hbar.to_le_bytes());
    out.extend_from_slice(&l.to_le_bytes());
    for v in rows {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<MatrixFile, MatrixIoError> {
    if bytes.len() < 24 {
        return Err(MatrixIoError::Truncated);
    }
    let n = u64::from_le_bytes(bytes[0..8].try_into().unwrap());
    if n == 0 || n > MAX_N {
        return Err(MatrixIoError::BadDimension(n));
    }
    let hbar = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let l = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    if !hbar.is_finite() || !l.is_finite() {
        return Err(MatrixIoError::BadHeader);
    }
    let nn = (n as usize).checked_mul(n as usize).ok_or(MatrixIoError::BadDimension(n))?;
    let payload = &bytes[24..];
    let real_len = nn.checked_mul(8).ok_or(MatrixIoError::BadDimension(n))?;
    let complex_len = nn.checked_mul(16).ok_or(MatrixIoError::BadDimension(n))?;
    let complex = if payload.len() == real_len {
        false
    } else if payload.len() == complex_len {
        true
    } else {
        return Err(MatrixIoError::BadPayload {
            got: payload.len(),
            real: real_len,
            complex: complex_len,
        });
    };
    let mut data = Vec::with_capacity(nn);
    if complex {
        for (i, chunk) in payload.chunks_exact(16).enumerate() {
            let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
            let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
            if !re.is_finite() || !im.is_finite() {
                return Err(MatrixIoError::NonFinite(i));
            }
            data.push(Complex64::new(re, im));
        }
    } else {
        for (i, chunk) in payload.chunks_exact(8).enumerate() {
            let v = f64::from_le_bytes(chunk.try_into().unwrap());
            if !v.is_finite() {
                return Err(MatrixIoError::NonFinite(i));
            }
            data.push(Complex64::new(v, 0.0));
        }
    }
    Ok(MatrixFile {
        n: n as usize,
        hbar,
        l,
        complex,
        data,
    })
}

/// Text form for small matrices: a header line, then one row per line.
pub fn encode_text(mat: &CMat, hbar: f64, l: f64) -> String {
    let mut out = format!("# semiweyl matrix n={} hbar={:.17e} L={:.17e}\n", mat.n, hbar, l);
    for i in 0..mat.n {
        for j in 0..mat.n {
            let z = mat.get(i, j);
            if j > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{:+.17e}{:+.17e}i", z.re, z.im));
        }
        out.push('\n');
    }
    out
}
