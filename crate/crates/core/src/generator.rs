//! Exhaustive enumeration of circuits over a gate set and construction of the identity
//! database.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{encode_layer, layer_unitary, Cell, CircuitGrid, Layer, Role};
use crate::database::{DbMeta, IdentityDatabase};
use crate::fingerprint::{fingerprint, Fingerprint, FingerprintError, MAX_DP, MIN_DP};
use crate::gates::{GateDef, GateSet};
use crate::matrix::ComplexMatrix;

/// Default ceiling on the number of enumerated circuits.
pub const DEFAULT_MAX_CIRCUITS: u64 = 10_000_000;
pub const MAX_QUBITS: usize = 4;
pub const MAX_DEPTH: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid generator configuration: {0}")]
    Config(String),
    #[error("{qubits} qubits x depth {depth} exceeds the practical bound ({MAX_QUBITS} x {MAX_DEPTH}); pass the override to proceed")]
    Bounds { qubits: usize, depth: usize },
    #[error("configuration would enumerate {count} circuits, above the limit of {limit}")]
    TooManyCircuits { count: BigUint, limit: u64 },
    #[error(transparent)]
    Fingerprint(#[from] FingerprintError),
}

#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub qubits: usize,
    pub depth: usize,
    pub dp: u32,
    pub gates: GateSet,
    pub neighbors_only: bool,
    /// Ceiling on the circuit count; see [`DEFAULT_MAX_CIRCUITS`].
    pub max_circuits: u64,
    /// Lifts the qubit/depth bound (not the circuit ceiling).
    pub allow_large: bool,
}

impl GeneratorConfig {
    pub fn new(qubits: usize, depth: usize, gates: GateSet) -> Self {
        Self {
            qubits,
            depth,
            dp: 8,
            gates,
            neighbors_only: false,
            max_circuits: DEFAULT_MAX_CIRCUITS,
            allow_large: false,
        }
    }

    pub fn with_dp(mut self, dp: u32) -> Self {
        self.dp = dp;
        self
    }

    pub fn with_neighbors_only(mut self, on: bool) -> Self {
        self.neighbors_only = on;
        self
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.qubits == 0 || self.depth == 0 {
            return Err(GenError::Config("qubits and depth must be at least 1".into()));
        }
        if !(MIN_DP..=MAX_DP).contains(&self.dp) {
            return Err(GenError::Config(format!("dp {} outside [{MIN_DP}, {MAX_DP}]", self.dp)));
        }
        if !self.allow_large && (self.qubits > MAX_QUBITS || self.depth > MAX_DEPTH) {
            return Err(GenError::Bounds {
                qubits: self.qubits,
                depth: self.depth,
            });
        }
        Ok(())
    }
}

/// `S_l` and `S = S_l^d` from the closed-form count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalingCount {
    pub per_layer: BigUint,
    pub total: BigUint,
}

/// `S_l = Σ_{r=0}^{⌊n/2⌋} n!/(r!(n−2r)!) · g^{n−2r} · t^r` and `S = S_l^d`.
pub fn scaling_count(n: usize, d: usize, g: u64, t: u64) -> Result<ScalingCount, GenError> {
    if n == 0 || d == 0 {
        return Err(GenError::Config("n and d must be at least 1".into()));
    }
    let factorial = |k: usize| -> BigUint { (1..=k as u64).map(BigUint::from).product() };
    let mut per_layer = BigUint::zero();
    for r in 0..=n / 2 {
        let placements = factorial(n) / (factorial(r) * factorial(n - 2 * r));
        let singles = BigUint::from(g).pow((n - 2 * r) as u32);
        let pairs = BigUint::from(t).pow(r as u32);
        per_layer += placements * singles * pairs;
    }
    let total = per_layer.pow(d as u32);
    Ok(ScalingCount { per_layer, total })
}

/// Every valid single layer on `n` qubits, in a fixed order: qubits are filled from 0
/// upwards; at each free qubit single-qubit gates come first (gate-set order), then each
/// two-qubit gate with a higher partner, `First` before `Second`.
pub fn enumerate_layers(n: usize, gates: &GateSet, neighbors_only: bool) -> Vec<Layer> {
    let singles: Vec<Arc<GateDef>> = gates.single_qubit().cloned().collect();
    let pairs: Vec<Arc<GateDef>> = gates.two_qubit().cloned().collect();
    let mut out = Vec::new();
    let mut slots: Vec<Option<Cell>> = vec![None; n];
    fill(0, &mut slots, &singles, &pairs, neighbors_only, &mut out);
    out
}

fn fill(
    q: usize,
    slots: &mut Vec<Option<Cell>>,
    singles: &[Arc<GateDef>],
    pairs: &[Arc<GateDef>],
    neighbors_only: bool,
    out: &mut Vec<Layer>,
) {
    let n = slots.len();
    if q == n {
        out.push(slots.iter().map(|c| c.clone().expect("filled")).collect());
        return;
    }
    if slots[q].is_some() {
        fill(q + 1, slots, singles, pairs, neighbors_only, out);
        return;
    }
    for g in singles {
        slots[q] = Some(Cell::Single(g.clone()));
        fill(q + 1, slots, singles, pairs, neighbors_only, out);
    }
    for g in pairs {
        for p in q + 1..n {
            if slots[p].is_some() || (neighbors_only && p != q + 1) {
                continue;
            }
            for (mine, theirs) in [(Role::First, Role::Second), (Role::Second, Role::First)] {
                slots[q] = Some(Cell::Half { gate: g.clone(), role: mine, partner: p });
                slots[p] = Some(Cell::Half { gate: g.clone(), role: theirs, partner: q });
                fill(q + 1, slots, singles, pairs, neighbors_only, out);
                slots[p] = None;
            }
        }
    }
    slots[q] = None;
}

/// Odometer over `depth`-tuples of layer indices, last position fastest.
#[derive(Debug, Clone)]
pub struct LayerIndexTuples {
    base: usize,
    current: Option<Vec<usize>>,
}

impl LayerIndexTuples {
    pub fn new(layer_count: usize, depth: usize) -> Self {
        let current = (layer_count > 0).then(|| vec![0; depth]);
        Self {
            base: layer_count,
            current,
        }
    }
}

impl Iterator for LayerIndexTuples {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().expect("checked above");
        let mut pos = cur.len();
        loop {
            if pos == 0 {
                self.current = None;
                break;
            }
            pos -= 1;
            cur[pos] += 1;
            if cur[pos] < self.base {
                break;
            }
            cur[pos] = 0;
        }
        Some(out)
    }
}

/// Every `depth`-layer circuit as the Cartesian product of single layers, in
/// lexicographic order of layer indices.
pub fn enumerate_circuits(cfg: &GeneratorConfig) -> impl Iterator<Item = CircuitGrid> {
    let layers = enumerate_layers(cfg.qubits, &cfg.gates, cfg.neighbors_only);
    let n = cfg.qubits;
    LayerIndexTuples::new(layers.len(), cfg.depth)
        .map(move |idx| CircuitGrid::from_layers(n, idx.iter().map(|&i| layers[i].clone()).collect()))
}

struct LayerInfo {
    encoding: String,
    unitary: ComplexMatrix,
    non_identity: bool,
}

struct Entry {
    encoding: String,
    fingerprint: Fingerprint,
    cost: usize,
}

/// Enumerates every circuit of `cfg`, fingerprints its unitary and groups equal ones.
pub fn build_database(cfg: &GeneratorConfig) -> Result<IdentityDatabase, GenError> {
    cfg.validate()?;
    let count = scaling_count(cfg.qubits, cfg.depth, cfg.gates.g() as u64, cfg.gates.t() as u64)?;
    let layers = enumerate_layers(cfg.qubits, &cfg.gates, cfg.neighbors_only);
    let expected = BigUint::from(layers.len()).pow(cfg.depth as u32);
    let limit_exceeded = |c: &BigUint| c.to_u64().map_or(true, |c| c > cfg.max_circuits);
    if limit_exceeded(&expected) || limit_exceeded(&count.total) {
        return Err(GenError::TooManyCircuits {
            count: expected.max(count.total),
            limit: cfg.max_circuits,
        });
    }

    let infos: Vec<LayerInfo> = layers
        .iter()
        .map(|l| LayerInfo {
            encoding: encode_layer(l),
            unitary: layer_unitary(l, cfg.qubits).expect("enumerated layers are valid"),
            non_identity: l.iter().any(|c| !c.is_identity()),
        })
        .collect();

    // Partitioned by first layer; collect keeps enumeration order.
    let chunks: Vec<Result<Vec<Entry>, GenError>> = (0..infos.len())
        .into_par_iter()
        .map(|first| enumerate_from(first, &infos, cfg))
        .collect();

    let mut by_circuit = HashMap::new();
    let mut by_fingerprint: BTreeMap<Fingerprint, Vec<(usize, String)>> = BTreeMap::new();
    for chunk in chunks {
        for entry in chunk? {
            by_circuit.insert(entry.encoding.clone(), entry.fingerprint);
            by_fingerprint
                .entry(entry.fingerprint)
                .or_default()
                .push((entry.cost, entry.encoding));
        }
    }
    let by_fingerprint = by_fingerprint
        .into_iter()
        .map(|(fp, mut bucket)| {
            bucket.sort();
            (fp, bucket.into_iter().map(|(_, e)| e).collect())
        })
        .collect();

    let meta = DbMeta {
        qubits: cfg.qubits,
        depth: cfg.depth,
        dp: cfg.dp,
        neighbors_only: cfg.neighbors_only,
        gates: cfg.gates.clone(),
    };
    Ok(IdentityDatabase::from_parts(meta, by_circuit, by_fingerprint))
}

/// All circuits whose first layer is `first`, reusing prefix products.
fn enumerate_from(first: usize, infos: &[LayerInfo], cfg: &GeneratorConfig) -> Result<Vec<Entry>, GenError> {
    let depth = cfg.depth;
    let per_first = infos.len().pow((depth - 1) as u32);
    let mut out = Vec::with_capacity(per_first);
    // prefix[k] = unitary after layers 0..=k
    let mut prefix: Vec<ComplexMatrix> = Vec::with_capacity(depth);
    prefix.push(infos[first].unitary.clone());
    let mut tail = LayerIndexTuples::new(infos.len(), depth - 1);
    let mut previous: Option<Vec<usize>> = None;
    loop {
        let rest = if depth == 1 {
            if previous.is_some() {
                break;
            }
            Vec::new()
        } else {
            match tail.next() {
                Some(r) => r,
                None => break,
            }
        };
        // First position that changed since the previous tuple.
        let changed = previous
            .as_ref()
            .map(|p| p.iter().zip(&rest).position(|(a, b)| a != b).unwrap_or(rest.len()))
            .unwrap_or(0);
        prefix.truncate(changed + 1);
        for &li in &rest[changed..] {
            let next = infos[li]
                .unitary
                .matmul(prefix.last().expect("non-empty"))
                .expect("same dimension");
            prefix.push(next);
        }
        let unitary = prefix.last().expect("non-empty");

        let mut encoding = String::with_capacity((rest.len() + 1) * (infos[first].encoding.len() + 1));
        encoding.push_str(&infos[first].encoding);
        let mut cost = infos[first].non_identity as usize;
        for &li in &rest {
            encoding.push('|');
            encoding.push_str(&infos[li].encoding);
            cost += infos[li].non_identity as usize;
        }
        out.push(Entry {
            encoding,
            fingerprint: fingerprint(unitary, cfg.dp)?,
            cost,
        });
        previous = Some(rest);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::encode_layer;

    fn gs(names: &[&str]) -> GateSet {
        GateSet::from_names(names).unwrap()
    }

    #[test]
    fn single_qubit_layers() {
        let layers = enumerate_layers(2, &gs(&["I", "X", "H"]), false);
        assert_eq!(layers.len(), 9);
        let encoded: Vec<String> = layers.iter().map(|l| encode_layer(l)).collect();
        assert!(encoded.contains(&"H,X".to_string()));
        assert_eq!(encoded[0], "I,I");
    }

    #[test]
    fn two_qubit_layers() {
        let layers = enumerate_layers(2, &gs(&["I", "CX"]), false);
        let encoded: Vec<String> = layers.iter().map(|l| encode_layer(l)).collect();
        assert_eq!(encoded, vec!["I,I", "CX:C:1,CX:T:0", "CX:T:1,CX:C:0"]);

        let layers = enumerate_layers(3, &gs(&["I", "CX"]), false);
        assert_eq!(layers.len(), 7);
        let encoded: Vec<String> = layers.iter().map(|l| encode_layer(l)).collect();
        assert!(encoded.contains(&"CX:C:2,I,CX:T:0".to_string()));
        for l in &layers {
            assert!(CircuitGrid::from_layers(3, vec![l.clone()]).validate().is_empty());
        }
    }

    #[test]
    fn neighbors_only_drops_distant_pairs() {
        let layers = enumerate_layers(3, &gs(&["I", "CX"]), true);
        assert_eq!(layers.len(), 5);
        for l in &layers {
            for (q, c) in l.iter().enumerate() {
                if let Cell::Half { partner, .. } = c {
                    assert_eq!(q.abs_diff(*partner), 1);
                }
            }
        }
    }

    #[test]
    fn scaling_examples() {
        let count = |n, d, g, t| scaling_count(n, d, g, t).unwrap().total;
        assert_eq!(count(2, 1, 3, 0), BigUint::from(9u32));
        assert_eq!(count(3, 1, 1, 1), BigUint::from(7u32));
        assert_eq!(count(2, 3, 4, 1), BigUint::from(5832u32));
        assert_eq!(scaling_count(2, 3, 4, 1).unwrap().per_layer, BigUint::from(18u32));
        assert!(scaling_count(0, 1, 1, 1).is_err());
        assert!(scaling_count(1, 0, 1, 1).is_err());
        // Arbitrary width: 40 qubits, depth 6 overflows u64 comfortably.
        assert!(count(40, 6, 9, 2).bits() > 64);
    }

    #[test]
    fn formula_matches_enumeration_at_four_qubits() {
        // Disjoint ordered pairs: the multinomial term already counts each orientation.
        for t_names in [vec!["CX"], vec!["CX", "CZ"]] {
            let mut names = vec!["I", "X"];
            names.extend(t_names.iter());
            let set = gs(&names);
            let layers = enumerate_layers(4, &set, false);
            let formula = scaling_count(4, 1, set.g() as u64, set.t() as u64).unwrap().total;
            assert_eq!(BigUint::from(layers.len()), formula);
        }
    }

    #[test]
    fn circuit_enumeration_order_and_counts() {
        let cfg = GeneratorConfig::new(1, 2, gs(&["I", "H"]));
        let encoded: Vec<String> = enumerate_circuits(&cfg).map(|c| c.encode()).collect();
        assert_eq!(encoded, vec!["I|I", "I|H", "H|I", "H|H"]);

        let cfg = GeneratorConfig::new(2, 2, gs(&["I", "X", "H"]));
        assert_eq!(enumerate_circuits(&cfg).count(), 81);

        let cfg = GeneratorConfig::new(2, 1, gs(&["I", "CX"]));
        assert_eq!(enumerate_circuits(&cfg).count(), 3);
    }

    #[test]
    fn odometer() {
        let all: Vec<Vec<usize>> = LayerIndexTuples::new(2, 2).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(LayerIndexTuples::new(0, 3).count(), 0);
        assert_eq!(LayerIndexTuples::new(3, 0).count(), 1);
    }

    #[test]
    fn config_validation() {
        let set = gs(&["I", "X"]);
        assert!(GeneratorConfig::new(0, 1, set.clone()).validate().is_err());
        assert!(GeneratorConfig::new(1, 1, set.clone()).with_dp(0).validate().is_err());
        assert!(matches!(
            GeneratorConfig::new(5, 1, set.clone()).validate(),
            Err(GenError::Bounds { .. })
        ));
        let mut big = GeneratorConfig::new(5, 1, set);
        big.allow_large = true;
        assert!(big.validate().is_ok());
    }

    #[test]
    fn resource_guard_names_the_count() {
        let mut cfg = GeneratorConfig::new(2, 3, gs(&["I", "H", "X", "Z", "CX"]));
        cfg.max_circuits = 1000;
        match build_database(&cfg) {
            Err(GenError::TooManyCircuits { count, limit }) => {
                assert_eq!(count, BigUint::from(5832u32));
                assert_eq!(limit, 1000);
            }
            other => panic!("expected guard error, got {other:?}"),
        }
    }

    #[test]
    fn small_database_buckets() {
        let db = build_database(&GeneratorConfig::new(1, 2, gs(&["I", "H"]))).unwrap();
        assert_eq!(db.circuit_count(), 4);
        let id_fp = fingerprint(&ComplexMatrix::identity(2), 8).unwrap();
        assert_eq!(db.bucket(&id_fp).unwrap(), &["I|I".to_string(), "H|H".to_string()]);
        assert_eq!(db.bucket_count(), 2);
    }

    #[test]
    fn prefix_products_match_direct_evaluation() {
        let cfg = GeneratorConfig::new(2, 3, gs(&["I", "H", "S", "CX"]));
        let db = build_database(&cfg).unwrap();
        for circuit in enumerate_circuits(&cfg).step_by(37) {
            let direct = fingerprint(&circuit.unitary().unwrap(), cfg.dp).unwrap();
            assert_eq!(db.fingerprint_of(&circuit.encode()), Some(direct));
        }
    }
}
