//! Grid representation of circuits: `layers × qubits` cells, two-qubit gates split into halves.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::gates::{builtin, GateDef, GateSet};
use crate::matrix::ComplexMatrix;

/// Which operand of a two-qubit gate a half occupies. `First` is the control of CX.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    First,
    Second,
}

impl Role {
    fn tag(self) -> char {
        match self {
            Role::First => 'C',
            Role::Second => 'T',
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Cell {
    Single(Arc<GateDef>),
    Half {
        gate: Arc<GateDef>,
        role: Role,
        partner: usize,
    },
}

impl Cell {
    pub fn identity() -> Self {
        Cell::Single(builtin::identity())
    }

    pub fn gate(&self) -> &Arc<GateDef> {
        match self {
            Cell::Single(g) | Cell::Half { gate: g, .. } => g,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Cell::Single(g) if g.is_identity())
    }

    fn write_encoding(&self, out: &mut String) {
        match self {
            Cell::Single(g) => out.push_str(g.name()),
            Cell::Half {
                gate,
                role,
                partner,
            } => {
                out.push_str(gate.name());
                out.push(':');
                out.push(role.tag());
                out.push(':');
                out.push_str(&partner.to_string());
            }
        }
    }
}

impl fmt::Debug for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_encoding(&mut s);
        f.write_str(&s)
    }
}

pub type Layer = Vec<Cell>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    WrongWidth,
    ArityMismatch,
    PartnerOutOfRange,
    SelfPartner,
    UnpairedHalf,
    DuplicateRole,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::WrongWidth => "layer width differs from qubit count",
            Rule::ArityMismatch => "gate arity does not match cell kind",
            Rule::PartnerOutOfRange => "partner qubit out of range",
            Rule::SelfPartner => "two-qubit half partnered with itself",
            Rule::UnpairedHalf => "unpaired two-qubit half",
            Rule::DuplicateRole => "duplicate role",
        })
    }
}

/// A structural problem found by [`CircuitGrid::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub layer: usize,
    pub qubit: usize,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "layer {}, qubit {}: {}", self.layer, self.qubit, self.rule)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("invalid circuit: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("cannot decode circuit {encoding:?}: {reason}")]
    Decode { encoding: String, reason: String },
}

/// `n` qubits by `layers.len()` layers. Layer 0 is applied to the state first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CircuitGrid {
    n: usize,
    layers: Vec<Layer>,
}

impl CircuitGrid {
    /// Wraps raw layers without checking them; see [`CircuitGrid::validate`].
    pub fn from_layers(n: usize, layers: Vec<Layer>) -> Self {
        Self { n, layers }
    }

    /// Builds a grid and rejects it if any invariant fails.
    pub fn new(n: usize, layers: Vec<Layer>) -> Result<Self, CircuitError> {
        let grid = Self { n, layers };
        let violations = grid.validate();
        if violations.is_empty() {
            Ok(grid)
        } else {
            Err(CircuitError::Invalid(violations))
        }
    }

    /// All-identity grid.
    pub fn empty(n: usize, depth: usize) -> Self {
        Self {
            n,
            layers: vec![vec![Cell::identity(); n]; depth],
        }
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn cell(&self, layer: usize, qubit: usize) -> &Cell {
        &self.layers[layer][qubit]
    }

    pub(crate) fn set_cell(&mut self, layer: usize, qubit: usize, cell: Cell) {
        self.layers[layer][qubit] = cell;
    }

    pub fn push_layer(&mut self, layer: Layer) {
        self.layers.push(layer);
    }

    /// Lists every broken invariant; empty means the grid is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (li, layer) in self.layers.iter().enumerate() {
            if layer.len() != self.n {
                out.push(Violation {
                    layer: li,
                    qubit: layer.len().min(self.n),
                    rule: Rule::WrongWidth,
                });
                continue;
            }
            for (q, cell) in layer.iter().enumerate() {
                let mut flag = |rule| out.push(Violation { layer: li, qubit: q, rule });
                match cell {
                    Cell::Single(g) => {
                        if g.arity() != 1 {
                            flag(Rule::ArityMismatch);
                        }
                    }
                    Cell::Half {
                        gate,
                        role,
                        partner,
                    } => {
                        if gate.arity() != 2 {
                            flag(Rule::ArityMismatch);
                        } else if *partner == q {
                            flag(Rule::SelfPartner);
                        } else if *partner >= self.n {
                            flag(Rule::PartnerOutOfRange);
                        } else {
                            match &layer[*partner] {
                                Cell::Half {
                                    gate: other,
                                    role: other_role,
                                    partner: back,
                                } if other == gate && *back == q => {
                                    if other_role == role {
                                        flag(Rule::DuplicateRole);
                                    }
                                }
                                _ => flag(Rule::UnpairedHalf),
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn ensure_valid(&self) -> Result<(), CircuitError> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(CircuitError::Invalid(violations))
        }
    }

    /// Unitary of the whole circuit, `L_m ⋯ L_2 · L_1` with `L_1` the first layer.
    pub fn unitary(&self) -> Result<ComplexMatrix, CircuitError> {
        self.ensure_valid()?;
        let mut acc = ComplexMatrix::identity(1 << self.n);
        for layer in &self.layers {
            let u = layer_unitary_unchecked(layer, self.n);
            acc = u.matmul(&acc).expect("layers share the circuit dimension");
        }
        Ok(acc)
    }

    /// Number of layers holding at least one non-identity cell.
    pub fn effective_depth(&self) -> usize {
        self.layers
            .iter()
            .filter(|l| l.iter().any(|c| !c.is_identity()))
            .count()
    }

    /// Number of non-identity cells (a two-qubit gate counts once per half).
    pub fn gate_cells(&self) -> usize {
        self.layers
            .iter()
            .flatten()
            .filter(|c| !c.is_identity())
            .count()
    }

    /// Drops every layer made only of identity cells.
    pub fn remove_identity_layers(&mut self) {
        self.layers.retain(|l| l.iter().any(|c| !c.is_identity()));
    }

    /// Qubit pairs `(first, second)` of every two-qubit gate, in layer order.
    pub fn two_qubit_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for layer in &self.layers {
            for (q, cell) in layer.iter().enumerate() {
                if let Cell::Half {
                    role: Role::First,
                    partner,
                    ..
                } = cell
                {
                    out.push((q, *partner));
                }
            }
        }
        out
    }

    /// Text encoding: layers joined by `|`, cells by `,`, halves as `NAME:C:p` / `NAME:T:p`.
    pub fn encode(&self) -> String {
        let mut out = String::new();
        for (li, layer) in self.layers.iter().enumerate() {
            if li > 0 {
                out.push('|');
            }
            encode_layer_into(layer, &mut out);
        }
        out
    }

    /// Inverse of [`CircuitGrid::encode`] over the names in `gates`.
    pub fn decode(encoding: &str, gates: &GateSet) -> Result<Self, CircuitError> {
        decode_with(encoding, |name| gates.get(name).cloned())
    }
}

impl fmt::Debug for CircuitGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CircuitGrid(n={}, [{}])", self.n, self.encode())
    }
}

pub(crate) fn encode_layer_into(layer: &[Cell], out: &mut String) {
    for (q, cell) in layer.iter().enumerate() {
        if q > 0 {
            out.push(',');
        }
        cell.write_encoding(out);
    }
}

pub fn encode_layer(layer: &[Cell]) -> String {
    let mut s = String::new();
    encode_layer_into(layer, &mut s);
    s
}

pub(crate) fn decode_with<F>(encoding: &str, mut lookup: F) -> Result<CircuitGrid, CircuitError>
where
    F: FnMut(&str) -> Option<Arc<GateDef>>,
{
    let fail = |reason: String| CircuitError::Decode {
        encoding: encoding.to_string(),
        reason,
    };
    if encoding.is_empty() {
        return Err(fail("empty encoding".into()));
    }
    let mut cache: HashMap<&str, Arc<GateDef>> = HashMap::new();
    let mut layers = Vec::new();
    let mut width = None;
    for layer_text in encoding.split('|') {
        let mut layer = Vec::new();
        for cell_text in layer_text.split(',') {
            let mut parts = cell_text.split(':');
            let name = parts.next().unwrap_or_default();
            let gate = match cache.get(name) {
                Some(g) => g.clone(),
                None => {
                    let g = lookup(name).ok_or_else(|| fail(format!("unknown gate {name:?}")))?;
                    cache.insert(name, g.clone());
                    g
                }
            };
            let cell = match (parts.next(), parts.next(), parts.next()) {
                (None, _, _) => Cell::Single(gate),
                (Some(tag), Some(p), None) => {
                    let role = match tag {
                        "C" => Role::First,
                        "T" => Role::Second,
                        _ => return Err(fail(format!("bad role tag {tag:?}"))),
                    };
                    let partner = p
                        .parse()
                        .map_err(|_| fail(format!("bad partner index {p:?}")))?;
                    Cell::Half {
                        gate,
                        role,
                        partner,
                    }
                }
                _ => return Err(fail(format!("malformed cell {cell_text:?}"))),
            };
            layer.push(cell);
        }
        match width {
            None => width = Some(layer.len()),
            Some(w) if w != layer.len() => return Err(fail("ragged layers".into())),
            _ => {}
        }
        layers.push(layer);
    }
    CircuitGrid::new(width.unwrap_or(0), layers).map_err(|e| fail(e.to_string()))
}

/// Unitary of one layer on `n` qubits; qubit 0 is the most significant tensor factor.
pub fn layer_unitary(layer: &[Cell], n: usize) -> Result<ComplexMatrix, CircuitError> {
    CircuitGrid::from_layers(n, vec![layer.to_vec()]).ensure_valid()?;
    Ok(layer_unitary_unchecked(layer, n))
}

fn layer_unitary_unchecked(layer: &[Cell], n: usize) -> ComplexMatrix {
    let singles = layer
        .iter()
        .map(|cell| match cell {
            Cell::Single(g) => g.matrix().clone(),
            Cell::Half { .. } => ComplexMatrix::identity(2),
        })
        .reduce(|acc, m| acc.kron(&m))
        .unwrap_or_else(|| ComplexMatrix::identity(1));
    let mut acc = singles;
    for (q, cell) in layer.iter().enumerate() {
        if let Cell::Half {
            gate,
            role: Role::First,
            partner,
        } = cell
        {
            let embedded = embed_two_qubit(gate.matrix(), q, *partner, n);
            acc = embedded.matmul(&acc).expect("same dimension");
        }
    }
    acc
}

/// Embeds a 4×4 matrix acting on the ordered pair `(first, second)` into `n` qubits by
/// scattering basis-state amplitudes.
fn embed_two_qubit(gate: &ComplexMatrix, first: usize, second: usize, n: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let bit_first = n - 1 - first;
    let bit_second = n - 1 - second;
    let mask = (1 << bit_first) | (1 << bit_second);
    let mut out = ComplexMatrix::zeros(dim);
    for col in 0..dim {
        let local_in = (((col >> bit_first) & 1) << 1) | ((col >> bit_second) & 1);
        let base = col & !mask;
        for local_out in 0..4 {
            let amp = gate.get(local_out, local_in);
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row = base | (((local_out >> 1) & 1) << bit_first) | ((local_out & 1) << bit_second);
            out.set(row, col, amp);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::GateSet;
    use proptest::prelude::*;

    fn g(name: &str) -> Arc<GateDef> {
        builtin::get(name).unwrap()
    }
    fn s(name: &str) -> Cell {
        Cell::Single(g(name))
    }
    fn half(name: &str, role: Role, partner: usize) -> Cell {
        Cell::Half { gate: g(name), role, partner }
    }

    fn fig2() -> CircuitGrid {
        CircuitGrid::new(
            2,
            vec![
                vec![s("I"), s("H")],
                vec![half("CX", Role::First, 1), half("CX", Role::Second, 0)],
                vec![s("Z"), s("Z")],
                vec![half("CX", Role::First, 1), half("CX", Role::Second, 0)],
                vec![s("I"), s("H")],
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_qubit_layer_is_kron() {
        let u = layer_unitary(&[s("I"), s("X")], 2).unwrap();
        assert_eq!(u, ComplexMatrix::identity(2).kron(g("X").matrix()));
    }

    #[test]
    fn cx_layer_matches_gate() {
        let u = layer_unitary(&[half("CX", Role::First, 1), half("CX", Role::Second, 0)], 2).unwrap();
        assert_eq!(&u, g("CX").matrix());
    }

    #[test]
    fn non_adjacent_cx_by_brute_force() {
        let u = layer_unitary(&[half("CX", Role::First, 2), s("I"), half("CX", Role::Second, 0)], 3).unwrap();
        for col in 0..8usize {
            let b0 = (col >> 2) & 1;
            let expected_row = if b0 == 1 { col ^ 1 } else { col };
            for row in 0..8 {
                let want = if row == expected_row { 1.0 } else { 0.0 };
                assert_eq!(u.get(row, col), Complex64::new(want, 0.0), "row {row} col {col}");
            }
        }
    }

    #[test]
    fn reversed_roles_give_reversed_cx() {
        let u = layer_unitary(&[half("CX", Role::Second, 1), half("CX", Role::First, 0)], 2).unwrap();
        // control is qubit 1 (least significant bit), target qubit 0
        for col in 0..4usize {
            let expected_row = if col & 1 == 1 { col ^ 2 } else { col };
            for row in 0..4 {
                let want = if row == expected_row { 1.0 } else { 0.0 };
                assert_eq!(u.get(row, col).re, want);
            }
        }
    }

    #[test]
    fn circuit_unitary_examples() {
        let hh = CircuitGrid::new(2, vec![vec![s("H"), s("H")]]).unwrap();
        assert_eq!(hh.unitary().unwrap(), g("H").matrix().kron(g("H").matrix()));

        let target = CircuitGrid::new(2, vec![vec![s("I"), s("X")]]).unwrap().unitary().unwrap();
        assert!(fig2().unitary().unwrap().max_abs_diff(&target).unwrap() < 1e-12);

        let h_h = CircuitGrid::new(1, vec![vec![s("H")], vec![s("H")]]).unwrap();
        assert!(h_h.unitary().unwrap().max_abs_diff(&ComplexMatrix::identity(2)).unwrap() < 1e-15);
    }

    #[test]
    fn temporal_order_is_rightmost_first() {
        // X then H: U = H·X
        let c = CircuitGrid::new(1, vec![vec![s("X")], vec![s("H")]]).unwrap();
        let expected = g("H").matrix().matmul(g("X").matrix()).unwrap();
        assert_eq!(c.unitary().unwrap(), expected);
    }

    #[test]
    fn effective_depth_examples() {
        assert_eq!(CircuitGrid::empty(2, 3).effective_depth(), 0);
        assert_eq!(fig2().effective_depth(), 5);
        // Table XI (iii) and (i) tiles
        let gs = GateSet::from_names(&["I", "X", "Y", "H"]).unwrap();
        assert_eq!(CircuitGrid::decode("I,Y|I,I|I,I", &gs).unwrap().effective_depth(), 1);
        assert_eq!(CircuitGrid::decode("I,Y|I,H|I,H", &gs).unwrap().effective_depth(), 3);
    }

    #[test]
    fn validate_examples() {
        let ok = CircuitGrid::from_layers(2, vec![vec![half("CX", Role::First, 1), half("CX", Role::Second, 0)]]);
        assert!(ok.validate().is_empty());

        let unpaired = CircuitGrid::from_layers(3, vec![vec![half("CX", Role::First, 1), s("I"), s("I")]]);
        assert_eq!(
            unpaired.validate(),
            vec![Violation { layer: 0, qubit: 0, rule: Rule::UnpairedHalf }]
        );

        let dup = CircuitGrid::from_layers(2, vec![vec![half("CX", Role::First, 1), half("CX", Role::First, 0)]]);
        let v = dup.validate();
        assert!(v.iter().all(|v| v.rule == Rule::DuplicateRole) && v.len() == 2);

        let wide = CircuitGrid::from_layers(2, vec![vec![s("I")]]);
        assert_eq!(wide.validate()[0].rule, Rule::WrongWidth);

        let arity = CircuitGrid::from_layers(1, vec![vec![s("CX")]]);
        assert_eq!(arity.validate()[0].rule, Rule::ArityMismatch);

        let far = CircuitGrid::from_layers(2, vec![vec![half("CX", Role::First, 5), s("I")]]);
        assert_eq!(far.validate()[0].rule, Rule::PartnerOutOfRange);

        assert!(matches!(unpaired.unitary(), Err(CircuitError::Invalid(_))));
    }

    #[test]
    fn encoding_round_trip() {
        let gs = GateSet::from_names(&["I", "H", "X", "CX"]).unwrap();
        let c = CircuitGrid::new(
            2,
            vec![vec![s("H"), s("I")], vec![s("X"), s("X")], vec![half("CX", Role::First, 1), half("CX", Role::Second, 0)]],
        )
        .unwrap();
        assert_eq!(c.encode(), "H,I|X,X|CX:C:1,CX:T:0");
        assert_eq!(CircuitGrid::decode(&c.encode(), &gs).unwrap(), c);
    }

    #[test]
    fn decode_errors() {
        let gs = GateSet::from_names(&["I", "CX"]).unwrap();
        for bad in ["", "Q", "I,I|I", "CX:C:1,I", "CX:Z:1,CX:T:0", "CX:C:x,CX:T:0", "CX:C:1:2,I"] {
            assert!(CircuitGrid::decode(bad, &gs).is_err(), "{bad}");
        }
    }

    #[test]
    fn identity_layer_removal() {
        let mut c = CircuitGrid::new(1, vec![vec![s("I")], vec![s("X")], vec![s("I")]]).unwrap();
        c.remove_identity_layers();
        assert_eq!(c.depth(), 1);
    }

    fn arb_layer() -> impl Strategy<Value = Layer> {
        let singles = prop::collection::vec(prop::sample::select(vec!["I", "X", "Y", "Z", "H", "S", "T"]), 2)
            .prop_map(|names| names.into_iter().map(s).collect::<Layer>());
        let pairs = (prop::sample::select(vec!["CX", "CZ", "ISWAP", "CY"]), any::<bool>()).prop_map(|(name, flip)| {
            if flip {
                vec![half(name, Role::Second, 1), half(name, Role::First, 0)]
            } else {
                vec![half(name, Role::First, 1), half(name, Role::Second, 0)]
            }
        });
        prop_oneof![3 => singles, 1 => pairs]
    }

    proptest! {
        #[test]
        fn circuits_are_unitary(layers in prop::collection::vec(arb_layer(), 0..6)) {
            let c = CircuitGrid::new(2, layers).unwrap();
            prop_assert!(c.unitary().unwrap().is_unitary(1e-9));
        }

        #[test]
        fn identity_layer_changes_nothing(layers in prop::collection::vec(arb_layer(), 1..5), at in 0usize..5) {
            let c = CircuitGrid::new(2, layers.clone()).unwrap();
            let mut padded_layers = layers;
            let at = at.min(padded_layers.len());
            padded_layers.insert(at, vec![Cell::identity(); 2]);
            let padded = CircuitGrid::new(2, padded_layers).unwrap();
            prop_assert!(c.unitary().unwrap().max_abs_diff(&padded.unitary().unwrap()).unwrap() <= 1e-12);
            prop_assert_eq!(c.effective_depth(), padded.effective_depth());
        }
    }
}
