//! The identity database and its `QIDB/1` text format.
//!
//! ```text
//! QIDB/1
//! digest xxh3-128
//! convention temporal-right
//! qubits <n>
//! depth <d>
//! dp <dp>
//! neighbors_only <bool>
//! gates <k>
//! gate <name> <arity> <canonical matrix>     (k lines)
//! FP <32 hex> <count>                        (one per bucket, fingerprint order)
//! <encoding>                                 (count lines)
//! END <total circuits> <16 hex xxh3-64 of the body>
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;
use xxhash_rust::xxh3::xxh3_64;

use crate::circuit::{decode_with, CircuitError, CircuitGrid};
use crate::fingerprint::{canonicalize, Fingerprint, FingerprintError, DIGEST_ALGORITHM, MAX_DP, MIN_DP};
use crate::gates::{resolve, GateDef, GateError, GateSet};
use crate::matrix::ComplexMatrix;

pub const FORMAT_TAG: &str = "QIDB/1";
pub const CONVENTION: &str = "temporal-right";

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("unsupported database version {found:?} (expected {FORMAT_TAG})")]
    VersionMismatch { found: String },
    #[error("database uses digest {found:?}, this build uses {DIGEST_ALGORITHM}")]
    DigestMismatch { found: String },
    #[error("database is truncated: {0}")]
    Truncated(String),
    #[error("database checksum mismatch: footer says {expected}, body hashes to {actual}")]
    ChecksumMismatch { expected: String, actual: String },
    #[error("malformed database at line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbMeta {
    pub qubits: usize,
    pub depth: usize,
    pub dp: u32,
    pub neighbors_only: bool,
    pub gates: GateSet,
}

/// Circuit encodings grouped by the fingerprint of their unitary.
#[derive(Debug, Clone)]
pub struct IdentityDatabase {
    meta: DbMeta,
    by_circuit: HashMap<String, Fingerprint>,
    by_fingerprint: BTreeMap<Fingerprint, Vec<String>>,
}

impl PartialEq for IdentityDatabase {
    fn eq(&self, other: &Self) -> bool {
        self.meta == other.meta
            && self.by_circuit == other.by_circuit
            && self.by_fingerprint == other.by_fingerprint
    }
}

impl IdentityDatabase {
    /// Assembles a database; buckets must already be in cost order.
    pub fn from_parts(
        meta: DbMeta,
        by_circuit: HashMap<String, Fingerprint>,
        by_fingerprint: BTreeMap<Fingerprint, Vec<String>>,
    ) -> Self {
        Self {
            meta,
            by_circuit,
            by_fingerprint,
        }
    }

    pub fn meta(&self) -> &DbMeta {
        &self.meta
    }

    pub fn gates(&self) -> &GateSet {
        &self.meta.gates
    }

    pub fn circuit_count(&self) -> usize {
        self.by_circuit.len()
    }

    pub fn bucket_count(&self) -> usize {
        self.by_fingerprint.len()
    }

    pub fn fingerprint_of(&self, encoding: &str) -> Option<Fingerprint> {
        self.by_circuit.get(encoding).copied()
    }

    pub fn bucket(&self, fp: &Fingerprint) -> Option<&[String]> {
        self.by_fingerprint.get(fp).map(Vec::as_slice)
    }

    /// Buckets in fingerprint order.
    pub fn buckets(&self) -> impl Iterator<Item = (&Fingerprint, &[String])> {
        self.by_fingerprint.iter().map(|(fp, b)| (fp, b.as_slice()))
    }

    pub fn decode(&self, encoding: &str) -> Result<CircuitGrid, CircuitError> {
        CircuitGrid::decode(encoding, &self.meta.gates)
    }

    /// Bucket sizes mapped to how many buckets have that size.
    pub fn histogram(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for bucket in self.by_fingerprint.values() {
            *out.entry(bucket.len()).or_insert(0) += 1;
        }
        out
    }

    pub fn to_text(&self) -> String {
        let m = &self.meta;
        let mut out = String::new();
        out.push_str(FORMAT_TAG);
        out.push('\n');
        out.push_str(&format!("digest {DIGEST_ALGORITHM}\n"));
        out.push_str(&format!("convention {CONVENTION}\n"));
        out.push_str(&format!("qubits {}\n", m.qubits));
        out.push_str(&format!("depth {}\n", m.depth));
        out.push_str(&format!("dp {}\n", m.dp));
        out.push_str(&format!("neighbors_only {}\n", m.neighbors_only));
        out.push_str(&format!("gates {}\n", m.gates.len()));
        for g in m.gates.gates() {
            let form = canonicalize(g.matrix(), m.dp).expect("gate matrices are bounded");
            out.push_str(&format!("gate {} {} {}\n", g.name(), g.arity(), form));
        }
        let body = self.body_text();
        out.push_str(&body);
        out.push_str(&format!("END {} {:016x}\n", self.by_circuit.len(), xxh3_64(body.as_bytes())));
        out
    }

    fn body_text(&self) -> String {
        let mut body = String::new();
        for (fp, bucket) in &self.by_fingerprint {
            body.push_str(&format!("FP {} {}\n", fp.to_hex(), bucket.len()));
            for enc in bucket {
                body.push_str(enc);
                body.push('\n');
            }
        }
        body
    }

    pub fn save(&self, path: impl AsRef<Path>) -> io::Result<()> {
        fs::write(path, self.to_text())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LoadError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, LoadError> {
        Reader::new(text).read()
    }
}

struct Reader<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        let mut lines: Vec<&str> = text.split('\n').collect();
        if lines.last() == Some(&"") {
            lines.pop();
        }
        Self { lines, pos: 0 }
    }

    fn malformed(&self, message: impl Into<String>) -> LoadError {
        LoadError::Malformed {
            line: self.pos,
            message: message.into(),
        }
    }

    fn next_line(&mut self, what: &str) -> Result<&'a str, LoadError> {
        let line = self
            .lines
            .get(self.pos)
            .copied()
            .ok_or_else(|| LoadError::Truncated(format!("missing {what}")))?;
        self.pos += 1;
        Ok(line)
    }

    fn field(&mut self, key: &str) -> Result<&'a str, LoadError> {
        let line = self.next_line(key)?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v),
            _ => Err(self.malformed(format!("expected `{key} <value>`, found {line:?}"))),
        }
    }

    fn number<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, LoadError> {
        let v = self.field(key)?;
        v.parse().map_err(|_| self.malformed(format!("bad {key} value {v:?}")))
    }

    fn read(mut self) -> Result<IdentityDatabase, LoadError> {
        let tag = self.next_line("format tag")?;
        if tag != FORMAT_TAG {
            if tag.starts_with("QIDB/") {
                return Err(LoadError::VersionMismatch { found: tag.to_string() });
            }
            return Err(self.malformed("not a QIDB file"));
        }
        let digest = self.field("digest")?;
        if digest != DIGEST_ALGORITHM {
            return Err(LoadError::DigestMismatch { found: digest.to_string() });
        }
        let convention = self.field("convention")?;
        if convention != CONVENTION {
            return Err(self.malformed(format!("unsupported convention {convention:?}")));
        }
        let qubits: usize = self.number("qubits")?;
        let depth: usize = self.number("depth")?;
        let dp: u32 = self.number("dp")?;
        if !(MIN_DP..=MAX_DP).contains(&dp) {
            return Err(self.malformed(format!("dp {dp} out of range")));
        }
        let neighbors_only: bool = self.number("neighbors_only")?;
        let gate_count: usize = self.number("gates")?;
        let mut gates = Vec::with_capacity(gate_count);
        for _ in 0..gate_count {
            let line = self.next_line("gate line")?;
            gates.push(self.gate(line, dp)?);
        }
        let gates = GateSet::new(gates).map_err(|e| self.malformed(e.to_string()))?;

        let body_start = self.pos;
        let footer = match self.lines.last() {
            Some(l) if l.starts_with("END ") && self.lines.len() > body_start => self.lines.len() - 1,
            _ => return Err(LoadError::Truncated("missing END footer".into())),
        };
        let (total, checksum) = self.lines[footer][4..]
            .split_once(' ')
            .ok_or_else(|| self.malformed("bad END footer"))?;
        let body: String = self.lines[body_start..footer].iter().flat_map(|l| [*l, "\n"]).collect();
        let actual = format!("{:016x}", xxh3_64(body.as_bytes()));
        if actual != checksum {
            return Err(LoadError::ChecksumMismatch {
                expected: checksum.to_string(),
                actual,
            });
        }
        let total: usize = total.parse().map_err(|_| self.malformed("bad END count"))?;

        let mut by_circuit = HashMap::new();
        let mut by_fingerprint = BTreeMap::new();
        let mut previous: Option<Fingerprint> = None;
        while self.pos < footer {
            let line = self.next_line("bucket header")?;
            let mut parts = line.split(' ');
            let (fp, count) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some("FP"), Some(fp), Some(count), None) => (fp, count),
                _ => return Err(self.malformed(format!("expected bucket header, found {line:?}"))),
            };
            let fp: Fingerprint = fp.parse().map_err(|e: FingerprintError| self.malformed(e.to_string()))?;
            if previous.is_some_and(|p| p >= fp) {
                return Err(self.malformed("buckets out of order"));
            }
            previous = Some(fp);
            let count: usize = count.parse().map_err(|_| self.malformed("bad bucket size"))?;
            let mut bucket = Vec::with_capacity(count);
            for _ in 0..count {
                if self.pos >= footer {
                    return Err(LoadError::Truncated(format!("bucket {fp} is short")));
                }
                let enc = self.next_line("bucket entry")?;
                decode_with(enc, |name| gates.get(name).cloned()).map_err(|e| self.malformed(e.to_string()))?;
                if by_circuit.insert(enc.to_string(), fp).is_some() {
                    return Err(self.malformed(format!("duplicate circuit {enc}")));
                }
                bucket.push(enc.to_string());
            }
            by_fingerprint.insert(fp, bucket);
        }
        if total != by_circuit.len() {
            return Err(self.malformed(format!("footer counts {total} circuits, body has {}", by_circuit.len())));
        }

        let meta = DbMeta {
            qubits,
            depth,
            dp,
            neighbors_only,
            gates,
        };
        Ok(IdentityDatabase::from_parts(meta, by_circuit, by_fingerprint))
    }

    /// Re-creates a gate from its stored line, preferring the built-in or template gate of
    /// that name when its rounded matrix matches.
    fn gate(&self, line: &str, dp: u32) -> Result<Arc<GateDef>, LoadError> {
        let mut parts = line.split(' ');
        let (name, arity, form) = match (parts.next(), parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some("gate"), Some(name), Some(arity), Some(form), None) => (name, arity, form),
            _ => return Err(self.malformed(format!("expected gate line, found {line:?}"))),
        };
        let arity: u8 = arity.parse().map_err(|_| self.malformed("bad gate arity"))?;
        if let Ok(known) = resolve(name) {
            if known.arity() == arity
                && known.name() == name
                && canonicalize(known.matrix(), dp).map(|f| f.as_str() == form).unwrap_or(false)
            {
                return Ok(known);
            }
        }
        let matrix = parse_canonical(form).ok_or_else(|| self.malformed(format!("bad matrix for gate {name}")))?;
        let tol = 10f64.powi(-(dp as i32)) * 4.0 * matrix.dim() as f64;
        GateDef::with_tolerance(name, arity, matrix, None, tol.max(1e-10))
            .map(Arc::new)
            .map_err(|e: GateError| self.malformed(e.to_string()))
    }
}

fn parse_canonical(form: &str) -> Option<ComplexMatrix> {
    let mut parts = form.split(';');
    let dim: usize = parts.next()?.parse().ok()?;
    let entries = parts
        .map(|p| {
            let (re, im) = p.split_once(',')?;
            Some(Complex64::new(re.parse().ok()?, im.parse().ok()?))
        })
        .collect::<Option<Vec<_>>>()?;
    ComplexMatrix::new(dim, entries).ok()
}
