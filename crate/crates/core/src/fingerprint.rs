//! Precision-rounded canonical text of a matrix and its 128-bit digest.
//!
//! The canonical form is `dim;re,im;re,im;...` in row-major order. Every component is
//! rounded half-away-from-zero to `dp` decimals and rendered with exactly `dp` fractional
//! digits; negative zero is written as positive zero. The digest is XXH3-128 over those
//! bytes, serialized big-endian. Both are frozen for database format `QIDB/1`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;
use xxhash_rust::xxh3::xxh3_128;

use crate::matrix::ComplexMatrix;

/// Identifier written into database headers.
pub const DIGEST_ALGORITHM: &str = "xxh3-128";

pub const MIN_DP: u32 = 1;
pub const MAX_DP: u32 = 15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FingerprintError {
    #[error("decimal precision {0} outside [1, 15]")]
    Precision(u32),
    #[error("entry {index} cannot be rendered at the requested precision")]
    Unrepresentable { index: usize },
    #[error("malformed fingerprint {0:?}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalForm(String);

impl CanonicalForm {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint([u8; 16]);

impl Fingerprint {
    pub fn of_bytes(bytes: &[u8]) -> Self {
        Self(xxh3_128(bytes).to_be_bytes())
    }

    pub fn bytes(&self) -> &[u8; 16] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fingerprint({})", self.to_hex())
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for Fingerprint {
    type Err = FingerprintError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 32 || !s.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase()) {
            return Err(FingerprintError::Parse(s.to_string()));
        }
        let mut out = [0u8; 16];
        for (i, chunk) in out.iter_mut().enumerate() {
            *chunk = u8::from_str_radix(&s[2 * i..2 * i + 2], 16)
                .map_err(|_| FingerprintError::Parse(s.to_string()))?;
        }
        Ok(Self(out))
    }
}

fn check_dp(dp: u32) -> Result<(), FingerprintError> {
    if (MIN_DP..=MAX_DP).contains(&dp) {
        Ok(())
    } else {
        Err(FingerprintError::Precision(dp))
    }
}

/// Appends one component rounded to `dp` decimals.
fn render_component(value: f64, dp: u32, index: usize, out: &mut String) -> Result<(), FingerprintError> {
    let scale = 10f64.powi(dp as i32);
    let scaled = (value * scale).round();
    if !scaled.is_finite() || scaled.abs() >= 9.0e18 {
        return Err(FingerprintError::Unrepresentable { index });
    }
    let units = scaled as i64;
    if units < 0 {
        out.push('-');
    }
    let magnitude = units.unsigned_abs();
    let pow = 10u64.pow(dp);
    out.push_str(&(magnitude / pow).to_string());
    out.push('.');
    let frac = (magnitude % pow).to_string();
    for _ in frac.len()..dp as usize {
        out.push('0');
    }
    out.push_str(&frac);
    Ok(())
}

pub fn canonicalize(m: &ComplexMatrix, dp: u32) -> Result<CanonicalForm, FingerprintError> {
    check_dp(dp)?;
    let mut out = String::with_capacity(m.entries().len() * 2 * (dp as usize + 4) + 4);
    out.push_str(&m.dim().to_string());
    for (index, z) in m.entries().iter().enumerate() {
        out.push(';');
        render_component(z.re, dp, index, &mut out)?;
        out.push(',');
        render_component(z.im, dp, index, &mut out)?;
    }
    Ok(CanonicalForm(out))
}

pub fn fingerprint(m: &ComplexMatrix, dp: u32) -> Result<Fingerprint, FingerprintError> {
    Ok(Fingerprint::of_bytes(canonicalize(m, dp)?.as_str().as_bytes()))
}
