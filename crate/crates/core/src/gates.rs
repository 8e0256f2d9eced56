//! Gate definitions, parameterised gate templates and gate sets.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use thiserror::Error;

use crate::angle::{Angle, AngleError};
use crate::matrix::ComplexMatrix;

/// Unitarity tolerance applied when a gate is registered.
pub const REGISTRATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GateError {
    #[error("gate name {0:?} is empty or contains one of ',', '|', ':' or whitespace")]
    BadName(String),
    #[error("gate {name}: arity {arity} needs a {expected}x{expected} matrix, got {found}x{found}")]
    BadMatrixSize {
        name: String,
        arity: u8,
        expected: usize,
        found: usize,
    },
    #[error("gate {name}: unsupported arity {arity}")]
    BadArity { name: String, arity: u8 },
    #[error("gate {0} is not unitary")]
    NonUnitary(String),
    #[error("gate {name} takes {expected} angle(s), got {found}")]
    AngleCount {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate gate name {0}")]
    DuplicateName(String),
    #[error("gate set has more than one identity gate ({0} and {1})")]
    DuplicateIdentity(String, String),
    #[error("unknown gate {0:?}")]
    Unknown(String),
    #[error("unknown gate set preset {0:?}")]
    UnknownPreset(String),
    #[error(transparent)]
    Angle(#[from] AngleError),
}

/// A named gate with a fixed unitary matrix on one or two qubits.
#[derive(Clone)]
pub struct GateDef {
    name: String,
    arity: u8,
    matrix: ComplexMatrix,
    qasm: Option<String>,
    identity: bool,
}

impl GateDef {
    pub fn new(
        name: impl Into<String>,
        arity: u8,
        matrix: ComplexMatrix,
        qasm: Option<String>,
    ) -> Result<Self, GateError> {
        Self::with_tolerance(name, arity, matrix, qasm, REGISTRATION_TOLERANCE)
    }

    /// Like [`GateDef::new`] with a caller-chosen unitarity tolerance (used for matrices
    /// read back from rounded storage).
    pub fn with_tolerance(
        name: impl Into<String>,
        arity: u8,
        matrix: ComplexMatrix,
        qasm: Option<String>,
        tol: f64,
    ) -> Result<Self, GateError> {
        let name = name.into();
        if !valid_gate_name(&name) {
            return Err(GateError::BadName(name));
        }
        let expected = match arity {
            1 => 2,
            2 => 4,
            _ => return Err(GateError::BadArity { name, arity }),
        };
        if matrix.dim() != expected {
            return Err(GateError::BadMatrixSize {
                name,
                arity,
                expected,
                found: matrix.dim(),
            });
        }
        if !matrix.is_unitary(tol) {
            return Err(GateError::NonUnitary(name));
        }
        let identity = arity == 1
            && matrix
                .max_abs_diff(&ComplexMatrix::identity(2))
                .map(|d| d <= 1e-12)
                .unwrap_or(false);
        Ok(Self {
            name,
            arity,
            matrix,
            qasm,
            identity,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> u8 {
        self.arity
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// The QASM call text without operands, e.g. `cx` or `u1(pi/2)`.
    pub fn qasm(&self) -> Option<&str> {
        self.qasm.as_deref()
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }
}

impl PartialEq for GateDef {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.arity == other.arity
    }
}

impl Eq for GateDef {}

impl Hash for GateDef {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state);
        self.arity.hash(state);
    }
}

impl fmt::Debug for GateDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GateDef({}, arity {})", self.name, self.arity)
    }
}

pub(crate) fn valid_gate_name(name: &str) -> bool {
    !name.is_empty()
        && !name
            .chars()
            .any(|c| c == ',' || c == '|' || c == ':' || c.is_whitespace())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Built-in gates. Two-qubit matrices take the first operand as the more significant qubit.
pub mod builtin {
    use super::*;

    struct Entry {
        name: &'static str,
        qasm: &'static str,
        arity: u8,
        matrix: fn() -> ComplexMatrix,
    }

    const ENTRIES: &[Entry] = &[
        Entry { name: "I", qasm: "id", arity: 1, matrix: || ComplexMatrix::identity(2) },
        Entry { name: "X", qasm: "x", arity: 1, matrix: || ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]) },
        Entry {
            name: "Y",
            qasm: "y",
            arity: 1,
            matrix: || ComplexMatrix::from_rows(&[&[c(0.0, 0.0), c(0.0, -1.0)], &[c(0.0, 1.0), c(0.0, 0.0)]]),
        },
        Entry { name: "Z", qasm: "z", arity: 1, matrix: || ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]) },
        Entry {
            name: "H",
            qasm: "h",
            arity: 1,
            matrix: || {
                ComplexMatrix::from_real_rows(&[&[FRAC_1_SQRT_2, FRAC_1_SQRT_2], &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]])
            },
        },
        Entry { name: "S", qasm: "s", arity: 1, matrix: || phase(c(0.0, 1.0)) },
        Entry { name: "Sdg", qasm: "sdg", arity: 1, matrix: || phase(c(0.0, -1.0)) },
        Entry { name: "T", qasm: "t", arity: 1, matrix: || phase(Complex64::from_polar(1.0, FRAC_PI_4)) },
        Entry { name: "Tdg", qasm: "tdg", arity: 1, matrix: || phase(Complex64::from_polar(1.0, -FRAC_PI_4)) },
        Entry {
            name: "CX",
            qasm: "cx",
            arity: 2,
            matrix: || controlled(&[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        },
        Entry {
            name: "CY",
            qasm: "cy",
            arity: 2,
            matrix: || controlled(&[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        },
        Entry {
            name: "CZ",
            qasm: "cz",
            arity: 2,
            matrix: || controlled(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
        },
        Entry {
            name: "SWAP",
            qasm: "swap",
            arity: 2,
            matrix: || {
                ComplexMatrix::from_real_rows(&[
                    &[1.0, 0.0, 0.0, 0.0],
                    &[0.0, 0.0, 1.0, 0.0],
                    &[0.0, 1.0, 0.0, 0.0],
                    &[0.0, 0.0, 0.0, 1.0],
                ])
            },
        },
        Entry {
            name: "ISWAP",
            qasm: "iswap",
            arity: 2,
            matrix: || {
                let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
                ComplexMatrix::from_rows(&[&[o, z, z, z], &[z, z, i, z], &[z, i, z, z], &[z, z, z, o]])
            },
        },
    ];

    fn phase(p: Complex64) -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[c(1.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), p]])
    }

    /// Controlled-U on (control, target) with `u` given row-major.
    fn controlled(u: &[Complex64; 4]) -> ComplexMatrix {
        let mut m = ComplexMatrix::identity(4);
        m.set(2, 2, u[0]);
        m.set(2, 3, u[1]);
        m.set(3, 2, u[2]);
        m.set(3, 3, u[3]);
        m
    }

    fn table() -> &'static HashMap<&'static str, Arc<GateDef>> {
        static TABLE: OnceLock<HashMap<&'static str, Arc<GateDef>>> = OnceLock::new();
        TABLE.get_or_init(|| {
            ENTRIES
                .iter()
                .map(|e| {
                    let gate = GateDef::new(e.name, e.arity, (e.matrix)(), Some(e.qasm.to_string()))
                        .expect("built-in gates are unitary");
                    (e.name, Arc::new(gate))
                })
                .collect()
        })
    }

    /// Canonical names of every built-in gate, in declaration order.
    pub fn names() -> impl Iterator<Item = &'static str> {
        ENTRIES.iter().map(|e| e.name)
    }

    /// Looks up a built-in by canonical name, e.g. `"CX"`.
    pub fn get(name: &str) -> Option<Arc<GateDef>> {
        table().get(name).cloned()
    }

    /// Looks up a built-in by its QASM token, e.g. `"cx"`.
    pub fn by_qasm(token: &str) -> Option<Arc<GateDef>> {
        ENTRIES.iter().find(|e| e.qasm == token).and_then(|e| get(e.name))
    }

    pub fn identity() -> Arc<GateDef> {
        get("I").expect("identity is built in")
    }
}

/// A single-qubit gate family instantiated at fixed angles.
#[derive(Clone, Copy)]
pub struct ParamGateTemplate {
    pub name: &'static str,
    pub qasm: &'static str,
    pub angle_count: usize,
    pub builder: fn(&[f64]) -> ComplexMatrix,
}

impl fmt::Debug for ParamGateTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ParamGateTemplate({})", self.name)
    }
}

fn u3_matrix(theta: f64, psi: f64, lambda: f64) -> ComplexMatrix {
    let (cos, sin) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    ComplexMatrix::from_rows(&[
        &[c(cos, 0.0), -Complex64::from_polar(sin, lambda)],
        &[Complex64::from_polar(sin, psi), Complex64::from_polar(cos, lambda + psi)],
    ])
}

/// `U1(λ) = diag(1, e^{iλ})`.
pub const U1: ParamGateTemplate = ParamGateTemplate {
    name: "U1",
    qasm: "u1",
    angle_count: 1,
    builder: |a| {
        ComplexMatrix::from_rows(&[&[c(1.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), Complex64::from_polar(1.0, a[0])]])
    },
};

/// `U2(ψ, λ) = U3(π/2, ψ, λ)`.
pub const U2: ParamGateTemplate = ParamGateTemplate {
    name: "U2",
    qasm: "u2",
    angle_count: 2,
    builder: |a| {
        let s = FRAC_1_SQRT_2;
        ComplexMatrix::from_rows(&[
            &[c(s, 0.0), -Complex64::from_polar(s, a[1])],
            &[Complex64::from_polar(s, a[0]), Complex64::from_polar(s, a[0] + a[1])],
        ])
    },
};

/// `U3(θ, ψ, λ)`.
pub const U3: ParamGateTemplate = ParamGateTemplate {
    name: "U3",
    qasm: "u3",
    angle_count: 3,
    builder: |a| u3_matrix(a[0], a[1], a[2]),
};

pub const TEMPLATES: [ParamGateTemplate; 3] = [U1, U2, U3];

impl ParamGateTemplate {
    /// Fixes the angles, naming the gate deterministically, e.g. `U1[pi/2]` or `U2[0;pi]`.
    pub fn instantiate(&self, angles: &[Angle]) -> Result<GateDef, GateError> {
        if angles.len() != self.angle_count {
            return Err(GateError::AngleCount {
                name: self.name.to_string(),
                expected: self.angle_count,
                found: angles.len(),
            });
        }
        let rendered: Vec<String> = angles.iter().map(Angle::to_string).collect();
        let name = format!("{}[{}]", self.name, rendered.join(";"));
        let qasm = format!("{}({})", self.qasm, rendered.join(","));
        let radians: Vec<f64> = angles.iter().map(Angle::radians).collect();
        GateDef::new(name, 1, (self.builder)(&radians), Some(qasm))
    }

    pub fn by_name(name: &str) -> Option<ParamGateTemplate> {
        TEMPLATES.iter().copied().find(|t| t.name.eq_ignore_ascii_case(name))
    }
}

/// Resolves a user-facing gate name: built-in names (case-insensitive, with the aliases
/// `S†`, `T†`, `ID`, `CNOT`) or an instantiated template such as `U1[pi/2]` / `U3(pi,0,pi)`.
pub fn resolve(name: &str) -> Result<Arc<GateDef>, GateError> {
    let trimmed = name.trim();
    let open = trimmed.find(['[', '(']);
    if let Some(open) = open {
        let close = match &trimmed[open..open + 1] {
            "[" => ']',
            _ => ')',
        };
        let template = ParamGateTemplate::by_name(&trimmed[..open])
            .ok_or_else(|| GateError::Unknown(name.to_string()))?;
        let inner = trimmed[open + 1..]
            .strip_suffix(close)
            .ok_or_else(|| GateError::Unknown(name.to_string()))?;
        let angles = inner
            .split([';', ','])
            .map(|s| s.parse::<Angle>())
            .collect::<Result<Vec<_>, _>>()?;
        return template.instantiate(&angles).map(Arc::new);
    }
    let canonical = match trimmed.to_ascii_uppercase().as_str() {
        "ID" | "I" => "I",
        "S†" | "SDG" | "SDAG" => "Sdg",
        "T†" | "TDG" | "TDAG" => "Tdg",
        "CNOT" | "CX" => "CX",
        other => {
            return builtin::names()
                .find(|n| n.eq_ignore_ascii_case(other))
                .and_then(builtin::get)
                .ok_or_else(|| GateError::Unknown(name.to_string()))
        }
    };
    Ok(builtin::get(canonical).expect("canonical built-in"))
}

/// Splits a comma-separated gate list, keeping commas inside brackets together.
pub fn split_gate_list(list: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for ch in list.chars() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut current).trim().to_string());
                continue;
            }
            _ => {}
        }
        current.push(ch);
    }
    if !current.trim().is_empty() || !out.is_empty() {
        out.push(current.trim().to_string());
    }
    out
}

/// An ordered collection of gates that always contains exactly one identity gate.
#[derive(Clone, Debug)]
pub struct GateSet {
    gates: Vec<Arc<GateDef>>,
    index: HashMap<String, usize>,
    identity: usize,
}

impl GateSet {
    /// Builds a gate set, inserting the identity gate first when none is supplied.
    pub fn new<I>(gates: I) -> Result<Self, GateError>
    where
        I: IntoIterator<Item = Arc<GateDef>>,
    {
        let mut gates: Vec<Arc<GateDef>> = gates.into_iter().collect();
        let identities: Vec<usize> = gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.is_identity())
            .map(|(i, _)| i)
            .collect();
        if identities.len() > 1 {
            return Err(GateError::DuplicateIdentity(
                gates[identities[0]].name().to_string(),
                gates[identities[1]].name().to_string(),
            ));
        }
        let identity = match identities.first() {
            Some(&i) => i,
            None => {
                gates.insert(0, builtin::identity());
                0
            }
        };
        let mut index = HashMap::with_capacity(gates.len());
        for (i, g) in gates.iter().enumerate() {
            if index.insert(g.name().to_string(), i).is_some() {
                return Err(GateError::DuplicateName(g.name().to_string()));
            }
        }
        Ok(Self {
            gates,
            index,
            identity,
        })
    }

    /// Builds a gate set from user-facing names (see [`resolve`]).
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self, GateError> {
        let gates = names
            .iter()
            .map(|n| resolve(n.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(gates)
    }

    /// Named presets: `standard` and `ibm-legacy`.
    pub fn preset(id: &str) -> Result<Self, GateError> {
        let names: &[&str] = match id {
            "standard" => &["I", "X", "Y", "Z", "H", "S", "Sdg", "T", "Tdg", "CX"],
            "ibm-legacy" => &[
                "I",
                "U1[pi/4]",
                "U1[pi/2]",
                "U1[pi]",
                "U1[-pi/2]",
                "U1[-pi/4]",
                "U2[0;pi]",
                "U3[pi;0;pi]",
                "CX",
            ],
            other => return Err(GateError::UnknownPreset(other.to_string())),
        };
        Self::from_names(names)
    }

    pub fn gates(&self) -> &[Arc<GateDef>] {
        &self.gates
    }

    pub fn get(&self, name: &str) -> Option<&Arc<GateDef>> {
        self.index.get(name).map(|&i| &self.gates[i])
    }

    pub fn identity(&self) -> &Arc<GateDef> {
        &self.gates[self.identity]
    }

    pub fn single_qubit(&self) -> impl Iterator<Item = &Arc<GateDef>> {
        self.gates.iter().filter(|g| g.arity() == 1)
    }

    pub fn two_qubit(&self) -> impl Iterator<Item = &Arc<GateDef>> {
        self.gates.iter().filter(|g| g.arity() == 2)
    }

    /// Number of single-qubit gates, identity included.
    pub fn g(&self) -> usize {
        self.single_qubit().count()
    }

    /// Number of two-qubit gates.
    pub fn t(&self) -> usize {
        self.two_qubit().count()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

impl PartialEq for GateSet {
    fn eq(&self, other: &Self) -> bool {
        self.gates == other.gates
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_unitary_and_named() {
        for name in builtin::names() {
            let g = builtin::get(name).unwrap();
            assert!(g.matrix().is_unitary(REGISTRATION_TOLERANCE), "{name}");
            assert!(g.qasm().is_some());
        }
        assert!(builtin::identity().is_identity());
        assert!(!builtin::get("X").unwrap().is_identity());
    }

    #[test]
    fn u1_instantiations() {
        let z = U1.instantiate(&[Angle::pi_fraction(1, 1)]).unwrap();
        assert_eq!(z.name(), "U1[pi]");
        assert_eq!(z.qasm(), Some("u1(pi)"));
        let diff = z.matrix().max_abs_diff(builtin::get("Z").unwrap().matrix()).unwrap();
        assert!(diff < 1e-15);

        let id = U1.instantiate(&[Angle::ZERO]).unwrap();
        assert!(id.is_identity());
    }

    #[test]
    fn u2_hadamard() {
        // U2(ψ=0, λ=π) is H under the U2 matrix definition used here.
        let h = U2.instantiate(&[Angle::ZERO, Angle::pi_fraction(1, 1)]).unwrap();
        assert_eq!(h.name(), "U2[0;pi]");
        let diff = h.matrix().max_abs_diff(builtin::get("H").unwrap().matrix()).unwrap();
        assert!(diff < 1e-15);
        // With the arguments swapped the result is Z·H·Z, not H.
        let swapped = U2.instantiate(&[Angle::pi_fraction(1, 1), Angle::ZERO]).unwrap();
        let zhz = builtin::get("Z").unwrap().matrix()
            .matmul(builtin::get("H").unwrap().matrix()).unwrap()
            .matmul(builtin::get("Z").unwrap().matrix()).unwrap();
        assert!(swapped.matrix().max_abs_diff(&zhz).unwrap() < 1e-15);
    }

    #[test]
    fn u3_matches_x() {
        let x = resolve("U3(pi,0,pi)").unwrap();
        assert_eq!(x.name(), "U3[pi;0;pi]");
        let diff = x.matrix().max_abs_diff(builtin::get("X").unwrap().matrix()).unwrap();
        assert!(diff < 1e-15);
    }

    #[test]
    fn angle_count_checked() {
        assert!(matches!(
            U2.instantiate(&[Angle::ZERO]),
            Err(GateError::AngleCount { expected: 2, found: 1, .. })
        ));
    }

    #[test]
    fn non_unitary_rejected() {
        let m = ComplexMatrix::identity(2).scale(c(2.0, 0.0));
        assert!(matches!(GateDef::new("Big", 1, m, None), Err(GateError::NonUnitary(n)) if n == "Big"));
    }

    #[test]
    fn bad_names_rejected() {
        for bad in ["", "A,B", "A|B", "A:B", "A B"] {
            assert!(matches!(
                GateDef::new(bad, 1, ComplexMatrix::identity(2), None),
                Err(GateError::BadName(_))
            ));
        }
    }

    #[test]
    fn resolve_aliases() {
        assert_eq!(resolve("S†").unwrap().name(), "Sdg");
        assert_eq!(resolve("tdg").unwrap().name(), "Tdg");
        assert_eq!(resolve("cnot").unwrap().name(), "CX");
        assert_eq!(resolve("iswap").unwrap().name(), "ISWAP");
        assert!(matches!(resolve("Q"), Err(GateError::Unknown(_))));
    }

    #[test]
    fn gate_set_counts_and_identity() {
        let gs = GateSet::from_names(&["I", "X", "H"]).unwrap();
        assert_eq!((gs.g(), gs.t()), (3, 0));
        let gs = GateSet::from_names(&["H", "CX"]).unwrap();
        assert_eq!(gs.gates()[0].name(), "I");
        assert_eq!((gs.g(), gs.t()), (2, 1));
        assert!(matches!(
            GateSet::from_names(&["I", "U1[0]"]),
            Err(GateError::DuplicateIdentity(..))
        ));
        assert!(matches!(GateSet::from_names(&["X", "x"]), Err(GateError::DuplicateName(_))));
    }

    #[test]
    fn presets() {
        let std_set = GateSet::preset("standard").unwrap();
        assert_eq!((std_set.g(), std_set.t()), (9, 1));
        let ibm = GateSet::preset("ibm-legacy").unwrap();
        assert_eq!((ibm.g(), ibm.t()), (8, 1));
        assert!(GateSet::preset("nope").is_err());
    }

    #[test]
    fn gate_list_splitting() {
        assert_eq!(split_gate_list("I,H, CX"), vec!["I", "H", "CX"]);
        assert_eq!(split_gate_list("U3(pi,0,pi),X"), vec!["U3(pi,0,pi)", "X"]);
    }
}
