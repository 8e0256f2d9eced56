//! Tile-based peephole optimization against an identity database.

use std::fmt;

use thiserror::Error;

use crate::circuit::{Cell, CircuitError, CircuitGrid, Layer};
use crate::database::IdentityDatabase;
use crate::fingerprint::{fingerprint, FingerprintError};
use crate::matrix::ComplexMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("tile {spec} is larger than the {qubits}-qubit, depth-{depth} circuit")]
    TileTooLarge {
        spec: TileSpec,
        qubits: usize,
        depth: usize,
    },
    #[error("tile {spec} must be at least 1x1 and fit the database shape {db_qubits}x{db_depth}")]
    BadSpec {
        spec: TileSpec,
        db_qubits: usize,
        db_depth: usize,
    },
    #[error("tile at layer {layer}, qubit {qubit} cuts a two-qubit gate mid-tile")]
    InvalidTile { layer: usize, qubit: usize },
    #[error("iterations must be at least 1")]
    NoIterations,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Fingerprint(#[from] FingerprintError),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Tile shape: `qubits` rows by `depth` layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileSpec {
    pub qubits: usize,
    pub depth: usize,
}

impl fmt::Display for TileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.qubits, self.depth)
    }
}

/// Position of a tile inside a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileWindow {
    pub qubit_offset: usize,
    pub layer_offset: usize,
    pub qubits: usize,
    pub depth: usize,
}

impl TileWindow {
    fn holds_qubit(&self, q: usize) -> bool {
        (self.qubit_offset..self.qubit_offset + self.qubits).contains(&q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TileClass {
    Valid,
    ValidWithCut,
    Invalid,
}

/// A two-qubit half removed from a tile because its partner lies outside; coordinates are
/// tile-relative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutPosition {
    pub layer: usize,
    pub qubit: usize,
    pub original: Cell,
}

#[derive(Debug, Clone)]
pub struct Tile {
    pub window: TileWindow,
    pub sub: CircuitGrid,
    pub cut_positions: Vec<CutPosition>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    pub layer_offset: usize,
    pub qubit_offset: usize,
    pub before: String,
    pub after: String,
    pub cost_before: usize,
    pub cost_after: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeReport {
    pub initial_depth: usize,
    pub final_depth: usize,
    pub substitutions: Vec<Substitution>,
    pub iterations: usize,
    /// Largest entrywise difference between input and output unitaries.
    pub residual: f64,
    pub collisions_skipped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimizeOptions {
    /// Defaults to the database shape.
    pub tile: Option<TileSpec>,
    pub iterations: usize,
    pub neighbors_only: bool,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            tile: None,
            iterations: 10,
            neighbors_only: false,
        }
    }
}

/// All windows of `spec` over `c`, ordered by layer offset then qubit offset.
pub fn extract_tiles(c: &CircuitGrid, spec: TileSpec) -> Result<Vec<TileWindow>, OptimizeError> {
    if spec.qubits == 0 || spec.depth == 0 || spec.qubits > c.qubits() || spec.depth > c.depth() {
        return Err(OptimizeError::TileTooLarge {
            spec,
            qubits: c.qubits(),
            depth: c.depth(),
        });
    }
    let mut out = Vec::with_capacity((c.qubits() - spec.qubits + 1) * (c.depth() - spec.depth + 1));
    for layer_offset in 0..=c.depth() - spec.depth {
        for qubit_offset in 0..=c.qubits() - spec.qubits {
            out.push(TileWindow {
                qubit_offset,
                layer_offset,
                qubits: spec.qubits,
                depth: spec.depth,
            });
        }
    }
    Ok(out)
}

pub fn classify_tile(c: &CircuitGrid, w: &TileWindow) -> TileClass {
    let mut cut = false;
    for dl in 0..w.depth {
        for dq in 0..w.qubits {
            if let Cell::Half { partner, .. } = c.cell(w.layer_offset + dl, w.qubit_offset + dq) {
                if !w.holds_qubit(*partner) {
                    if dl == 0 || dl + 1 == w.depth {
                        cut = true;
                    } else {
                        return TileClass::Invalid;
                    }
                }
            }
        }
    }
    if cut {
        TileClass::ValidWithCut
    } else {
        TileClass::Valid
    }
}

/// Copies the window into a standalone grid, replacing cut halves by identity.
pub fn normalize_cut_tile(c: &CircuitGrid, w: &TileWindow) -> Result<Tile, OptimizeError> {
    if classify_tile(c, w) == TileClass::Invalid {
        return Err(OptimizeError::InvalidTile {
            layer: w.layer_offset,
            qubit: w.qubit_offset,
        });
    }
    let mut cut_positions = Vec::new();
    let mut layers = Vec::with_capacity(w.depth);
    for dl in 0..w.depth {
        let mut layer = Vec::with_capacity(w.qubits);
        for dq in 0..w.qubits {
            let cell = c.cell(w.layer_offset + dl, w.qubit_offset + dq);
            layer.push(match cell {
                Cell::Single(_) => cell.clone(),
                Cell::Half { gate, role, partner } if w.holds_qubit(*partner) => Cell::Half {
                    gate: gate.clone(),
                    role: *role,
                    partner: partner - w.qubit_offset,
                },
                Cell::Half { .. } => {
                    cut_positions.push(CutPosition {
                        layer: dl,
                        qubit: dq,
                        original: cell.clone(),
                    });
                    Cell::identity()
                }
            });
        }
        layers.push(layer);
    }
    Ok(Tile {
        window: *w,
        sub: CircuitGrid::from_layers(w.qubits, layers),
        cut_positions,
    })
}

/// Effective depth, the optimizer's cost.
pub fn cost(c: &CircuitGrid) -> usize {
    c.effective_depth()
}

pub fn cost_of_encoding(encoding: &str, db: &IdentityDatabase) -> Result<usize, OptimizeError> {
    Ok(cost(&db.decode(encoding)?))
}

/// Re-expresses `sub` in the database shape: identity cells use the database's identity
/// gate, extra rows and layers are identity.
fn pad_to_db(sub: &CircuitGrid, db: &IdentityDatabase) -> CircuitGrid {
    let meta = db.meta();
    let id = Cell::Single(db.gates().identity().clone());
    let mut layers: Vec<Layer> = sub
        .layers()
        .iter()
        .map(|l| {
            let mut row: Layer = l
                .iter()
                .map(|c| if c.is_identity() { id.clone() } else { c.clone() })
                .collect();
            row.resize(meta.qubits, id.clone());
            row
        })
        .collect();
    layers.resize(meta.depth, vec![id.clone(); meta.qubits]);
    CircuitGrid::from_layers(meta.qubits, layers)
}

/// Whether every gate in `c` is the database's gate of the same name.
fn covered(c: &CircuitGrid, db: &IdentityDatabase) -> bool {
    c.layers().iter().flatten().all(|cell| {
        let g = cell.gate();
        db.gates().get(g.name()).is_some_and(|known| {
            known.arity() == g.arity()
                && known
                    .matrix()
                    .max_abs_diff(g.matrix())
                    .is_ok_and(|d| d <= 1e-12)
        })
    })
}

/// Encodings in the tile's bucket, excluding the tile itself.
pub fn lookup(tile: &Tile, db: &IdentityDatabase) -> Result<Vec<String>, OptimizeError> {
    let meta = db.meta();
    if tile.sub.qubits() > meta.qubits || tile.sub.depth() > meta.depth {
        return Err(OptimizeError::BadSpec {
            spec: TileSpec {
                qubits: tile.sub.qubits(),
                depth: tile.sub.depth(),
            },
            db_qubits: meta.qubits,
            db_depth: meta.depth,
        });
    }
    let padded = pad_to_db(&tile.sub, db);
    let encoding = padded.encode();
    let fp = match db.fingerprint_of(&encoding) {
        Some(fp) if covered(&padded, db) => fp,
        _ => fingerprint(&padded.unitary()?, meta.dp)?,
    };
    Ok(db
        .bucket(&fp)
        .map(|b| b.iter().filter(|e| **e != encoding).cloned().collect())
        .unwrap_or_default())
}

/// Shrinks a database circuit to the tile shape: rows beyond the tile must be identity,
/// and its non-identity layers must fit in the tile depth. `None` if it does not fit.
pub fn fit_candidate(encoding: &str, tile: &Tile, db: &IdentityDatabase) -> Result<Option<CircuitGrid>, OptimizeError> {
    let grid = db.decode(encoding)?;
    let (rows, depth) = (tile.sub.qubits(), tile.sub.depth());
    let mut layers: Vec<Layer> = Vec::with_capacity(depth);
    for layer in grid.layers() {
        if layer[rows..].iter().any(|c| !c.is_identity()) {
            return Ok(None);
        }
        if layer[..rows].iter().any(|c| !c.is_identity()) {
            layers.push(layer[..rows].to_vec());
        }
    }
    if layers.len() > depth {
        return Ok(None);
    }
    let id = Cell::Single(db.gates().identity().clone());
    layers.resize(depth, vec![id; rows]);
    Ok(Some(CircuitGrid::from_layers(rows, layers)))
}

fn non_identity_cells(c: &CircuitGrid) -> usize {
    c.layers().iter().flatten().filter(|cell| !cell.is_identity()).count()
}

fn respects_neighbors(c: &CircuitGrid) -> bool {
    c.layers().iter().all(|l| {
        l.iter().enumerate().all(|(q, cell)| match cell {
            Cell::Half { partner, .. } => q.abs_diff(*partner) == 1,
            Cell::Single(_) => true,
        })
    })
}

/// Indices of admissible candidates, best first: identity at every cut position, the
/// neighbour rule when requested, strictly cheaper than the tile; ordered by cost, then
/// non-identity cells, then encoding.
pub fn rank_candidates(tile: &Tile, candidates: &[CircuitGrid], neighbors_only: bool) -> Vec<usize> {
    let tile_cost = cost(&tile.sub);
    let mut ranked: Vec<(usize, usize, String, usize)> = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            tile.cut_positions
                .iter()
                .all(|p| c.cell(p.layer, p.qubit).is_identity())
        })
        .filter(|(_, c)| !neighbors_only || respects_neighbors(c))
        .filter(|(_, c)| cost(c) < tile_cost)
        .map(|(i, c)| (cost(c), non_identity_cells(c), c.encode(), i))
        .collect();
    ranked.sort();
    ranked.into_iter().map(|(.., i)| i).collect()
}

pub fn select_substitution(tile: &Tile, candidates: &[CircuitGrid], neighbors_only: bool) -> Option<usize> {
    rank_candidates(tile, candidates, neighbors_only).first().copied()
}

/// Splices `chosen` into the tile's window, restores the cut halves and drops
/// all-identity layers.
pub fn apply_substitution(c: &CircuitGrid, tile: &Tile, chosen: &CircuitGrid) -> Result<CircuitGrid, OptimizeError> {
    let w = &tile.window;
    if chosen.qubits() != w.qubits || chosen.depth() != w.depth {
        return Err(OptimizeError::Internal(format!(
            "substitution shape {}x{} does not match tile {}x{}",
            chosen.qubits(),
            chosen.depth(),
            w.qubits,
            w.depth
        )));
    }
    let mut out = c.clone();
    for (dl, layer) in chosen.layers().iter().enumerate() {
        for (dq, cell) in layer.iter().enumerate() {
            let placed = match cell {
                Cell::Half { gate, role, partner } => Cell::Half {
                    gate: gate.clone(),
                    role: *role,
                    partner: partner + w.qubit_offset,
                },
                other => other.clone(),
            };
            out.set_cell(w.layer_offset + dl, w.qubit_offset + dq, placed);
        }
    }
    for p in &tile.cut_positions {
        out.set_cell(w.layer_offset + p.layer, w.qubit_offset + p.qubit, p.original.clone());
    }
    out.remove_identity_layers();
    let violations = out.validate();
    if !violations.is_empty() {
        return Err(OptimizeError::Internal(format!(
            "substitution produced an invalid circuit: {}",
            CircuitError::Invalid(violations)
        )));
    }
    Ok(out)
}

/// Repeated tile sweeps; see [`OptimizeOptions`].
pub fn optimize(
    c: &CircuitGrid,
    db: &IdentityDatabase,
    opts: &OptimizeOptions,
) -> Result<(CircuitGrid, OptimizeReport), OptimizeError> {
    let violations = c.validate();
    if !violations.is_empty() {
        return Err(CircuitError::Invalid(violations).into());
    }
    if opts.iterations == 0 {
        return Err(OptimizeError::NoIterations);
    }
    let meta = db.meta();
    let spec = opts.tile.unwrap_or(TileSpec {
        qubits: meta.qubits,
        depth: meta.depth,
    });
    if spec.qubits == 0 || spec.depth == 0 || spec.qubits > meta.qubits || spec.depth > meta.depth {
        return Err(OptimizeError::BadSpec {
            spec,
            db_qubits: meta.qubits,
            db_depth: meta.depth,
        });
    }
    let tolerance = 2.0 * 10f64.powi(-(meta.dp as i32));

    let mut current = c.clone();
    current.remove_identity_layers();
    let mut substitutions = Vec::new();
    let mut collisions_skipped = 0;
    let mut iterations = 0;
    for _ in 0..opts.iterations {
        iterations += 1;
        let applied_before = substitutions.len();
        let mut index = 0;
        loop {
            if current.depth() == 0 {
                break;
            }
            let clamped = TileSpec {
                qubits: spec.qubits.min(current.qubits()),
                depth: spec.depth.min(current.depth()),
            };
            let windows = extract_tiles(&current, clamped)?;
            let Some(window) = windows.get(index).copied() else {
                break;
            };
            index += 1;
            if classify_tile(&current, &window) == TileClass::Invalid {
                continue;
            }
            let tile = normalize_cut_tile(&current, &window)?;
            let tile_cost = cost(&tile.sub);
            if tile_cost == 0 {
                continue;
            }
            let mut candidates = Vec::new();
            for enc in lookup(&tile, db)? {
                if let Some(grid) = fit_candidate(&enc, &tile, db)? {
                    candidates.push(grid);
                }
            }
            let ranked = rank_candidates(&tile, &candidates, opts.neighbors_only);
            if ranked.is_empty() {
                continue;
            }
            let tile_unitary = tile.sub.unitary()?;
            let bound = tolerance * tile_unitary.dim() as f64;
            for k in ranked {
                let chosen = &candidates[k];
                if tile_unitary.max_abs_diff(&chosen.unitary()?).map_err(internal)? > bound {
                    collisions_skipped += 1;
                    continue;
                }
                let next = apply_substitution(&current, &tile, chosen)?;
                if next.effective_depth() > current.effective_depth() {
                    continue;
                }
                substitutions.push(Substitution {
                    layer_offset: window.layer_offset,
                    qubit_offset: window.qubit_offset,
                    before: tile.sub.encode(),
                    after: chosen.encode(),
                    cost_before: tile_cost,
                    cost_after: cost(chosen),
                });
                current = next;
                break;
            }
        }
        if substitutions.len() == applied_before {
            break;
        }
    }

    let residual = residual(c, &current)?;
    let report = OptimizeReport {
        initial_depth: c.effective_depth(),
        final_depth: current.effective_depth(),
        substitutions,
        iterations,
        residual,
        collisions_skipped,
    };
    Ok((current, report))
}

fn internal(e: impl fmt::Display) -> OptimizeError {
    OptimizeError::Internal(e.to_string())
}

/// Largest entrywise difference between the unitaries of two circuits of equal width.
pub fn residual(a: &CircuitGrid, b: &CircuitGrid) -> Result<f64, OptimizeError> {
    let unitary = |c: &CircuitGrid| -> Result<ComplexMatrix, OptimizeError> {
        if c.depth() == 0 {
            Ok(ComplexMatrix::identity(1 << c.qubits()))
        } else {
            Ok(c.unitary()?)
        }
    };
    unitary(a)?.max_abs_diff(&unitary(b)?).map_err(internal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::GateSet;
    use crate::generator::{build_database, GeneratorConfig};

    fn gs(names: &[&str]) -> GateSet {
        GateSet::from_names(names).unwrap()
    }

    fn grid(enc: &str, names: &[&str]) -> CircuitGrid {
        CircuitGrid::decode(enc, &gs(names)).unwrap()
    }

    const FIG11: &str = "H,Y,S|CX:C:1,CX:T:0,H|I,X,I|S,S,H";
    const FIG13: &str = "H,Y,S|CX:C:1,CX:T:0,Y|I,X,H|I,X,H";
    const FIG_GATES: &[&str] = &["I", "H", "X", "Y", "S", "CX"];

    #[test]
    fn tile_counts() {
        let g = |n, m| CircuitGrid::empty(n, m);
        let count = |c: &CircuitGrid, i, j| extract_tiles(c, TileSpec { qubits: i, depth: j }).unwrap().len();
        assert_eq!(count(&g(3, 3), 2, 2), 4);
        assert_eq!(count(&g(2, 3), 2, 3), 1);
        assert_eq!(count(&g(2, 7), 2, 3), 5);
        assert!(extract_tiles(&g(2, 2), TileSpec { qubits: 3, depth: 1 }).is_err());
        let order = extract_tiles(&g(3, 3), TileSpec { qubits: 2, depth: 2 }).unwrap();
        let offsets: Vec<(usize, usize)> = order.iter().map(|w| (w.layer_offset, w.qubit_offset)).collect();
        assert_eq!(offsets, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
    }

    fn window(q: usize, l: usize, i: usize, j: usize) -> TileWindow {
        TileWindow {
            qubit_offset: q,
            layer_offset: l,
            qubits: i,
            depth: j,
        }
    }

    #[test]
    fn classification() {
        let c = grid(FIG11, FIG_GATES);
        assert_eq!(classify_tile(&c, &window(1, 0, 2, 3)), TileClass::Invalid);
        assert_eq!(classify_tile(&c, &window(1, 1, 2, 3)), TileClass::ValidWithCut);
        assert_eq!(classify_tile(&c, &window(0, 0, 2, 3)), TileClass::Valid);
        assert_eq!(classify_tile(&c, &window(0, 0, 3, 4)), TileClass::Valid);
    }

    #[test]
    fn normalization_records_cuts() {
        let c = grid(FIG13, FIG_GATES);
        let tile = normalize_cut_tile(&c, &window(1, 1, 2, 3)).unwrap();
        assert_eq!(tile.sub.encode(), "I,Y|X,H|X,H");
        assert_eq!(tile.cut_positions.len(), 1);
        assert_eq!((tile.cut_positions[0].layer, tile.cut_positions[0].qubit), (0, 0));
        assert_eq!(tile.cut_positions[0].original, *c.cell(1, 1));

        let valid = normalize_cut_tile(&c, &window(0, 0, 2, 2)).unwrap();
        assert!(valid.cut_positions.is_empty());
        assert_eq!(valid.sub.encode(), "H,Y|CX:C:1,CX:T:0");

        let two_cuts = grid("CX:C:1,CX:T:0|X,X|CX:T:1,CX:C:0", &["I", "X", "CX"]);
        let tile = normalize_cut_tile(&two_cuts, &window(1, 0, 1, 3)).unwrap();
        let layers: Vec<usize> = tile.cut_positions.iter().map(|p| p.layer).collect();
        assert_eq!(layers, vec![0, 2]);
        assert_eq!(tile.sub.encode(), "I|X|I");

        assert!(normalize_cut_tile(&grid(FIG11, FIG_GATES), &window(1, 0, 2, 3)).is_err());
    }

    #[test]
    fn costs() {
        let names = FIG_GATES;
        assert_eq!(cost(&grid("I,Y|I,H|I,H", names)), 3);
        assert_eq!(cost(&grid("I,Y|X,I|X,I", names)), 3);
        assert_eq!(cost(&grid("I,Y|I,I|I,I", names)), 1);
        assert_eq!(cost(&grid("I,I|I,I", names)), 0);
    }

    #[test]
    fn figure_thirteen_substitution() {
        let db = build_database(&GeneratorConfig::new(2, 3, gs(FIG_GATES))).unwrap();
        let c = grid(FIG13, FIG_GATES);
        let tile = normalize_cut_tile(&c, &window(1, 1, 2, 3)).unwrap();
        let found = lookup(&tile, &db).unwrap();
        for expected in ["I,Y|I,H|I,H", "I,Y|X,I|X,I", "I,Y|I,I|I,I"] {
            assert!(found.iter().any(|e| e == expected), "{expected} missing");
        }
        assert!(!found.iter().any(|e| e == "I,Y|X,H|X,H"));

        let candidates: Vec<CircuitGrid> = found
            .iter()
            .filter_map(|e| fit_candidate(e, &tile, &db).unwrap())
            .collect();
        let best = select_substitution(&tile, &candidates, false).unwrap();
        assert_eq!(cost(&candidates[best]), 1);
        let out = apply_substitution(&c, &tile, &candidates[best]).unwrap();
        assert_eq!(out.depth(), 2);
        assert!(residual(&c, &out).unwrap() < 1e-12);
        assert!(matches!(out.cell(1, 1), Cell::Half { partner: 0, .. }));
    }

    #[test]
    fn strictness_and_cut_filter() {
        let names = &["I", "X", "CX"];
        let c = grid("CX:C:1,CX:T:0|I,X", names);
        let tile = normalize_cut_tile(&c, &window(1, 0, 1, 2)).unwrap();
        assert_eq!(tile.sub.encode(), "I|X");
        // Same cost as the tile: rejected.
        assert_eq!(select_substitution(&tile, &[grid("X|I", names)], false), None);
        let tile_two = Tile {
            sub: grid("X|X", names),
            ..tile.clone()
        };
        // "X|I" would place X where the cut half is restored.
        assert_eq!(select_substitution(&tile_two, &[grid("X|I", names)], false), None);
        assert_eq!(select_substitution(&tile_two, &[grid("I|I", names)], false), Some(0));
    }

    #[test]
    fn tie_breaks() {
        let names = &["I", "X", "Z"];
        let tile = Tile {
            window: window(0, 0, 2, 2),
            sub: grid("X,X|Z,Z", names),
            cut_positions: vec![],
        };
        let cands = vec![grid("Z,X|I,I", names), grid("X,I|I,I", names), grid("I,X|I,I", names)];
        assert_eq!(rank_candidates(&tile, &cands, false), vec![2, 1, 0]);
    }

    #[test]
    fn neighbour_filter() {
        let names = &["I", "CX"];
        let far = grid("CX:C:2,I,CX:T:0", names);
        assert!(!respects_neighbors(&far));
        assert!(respects_neighbors(&grid("I,CX:C:2,CX:T:1", names)));
    }

    #[test]
    fn optimize_fixpoint_and_reduction() {
        let names = &["I", "H", "X", "Z", "CX"];
        let db = build_database(&GeneratorConfig::new(2, 3, gs(names))).unwrap();
        let fig2 = grid("I,H|CX:C:1,CX:T:0|Z,Z|CX:C:1,CX:T:0|I,H", names);
        let (out, report) = optimize(&fig2, &db, &OptimizeOptions::default()).unwrap();
        assert_eq!(out.encode(), "I,X");
        assert_eq!(report.initial_depth, 5);
        assert_eq!(report.final_depth, 1);
        assert!(report.residual <= 1e-6);

        let (again, report) = optimize(&out, &db, &OptimizeOptions::default()).unwrap();
        assert_eq!(again.encode(), "I,X");
        assert!(report.substitutions.is_empty());
    }

    #[test]
    fn narrower_circuit_and_smaller_tiles() {
        let db = build_database(&GeneratorConfig::new(2, 3, gs(&["I", "H", "CX"]))).unwrap();
        let one = grid("H|H", &["I", "H"]);
        let (out, report) = optimize(&one, &db, &OptimizeOptions::default()).unwrap();
        assert_eq!(out.depth(), 0);
        assert_eq!(report.final_depth, 0);

        let opts = OptimizeOptions {
            tile: Some(TileSpec { qubits: 1, depth: 2 }),
            ..Default::default()
        };
        let two = grid("H,I|H,H|I,H", &["I", "H"]);
        let (out, _) = optimize(&two, &db, &opts).unwrap();
        assert_eq!(out.depth(), 0);

        let bad = OptimizeOptions {
            tile: Some(TileSpec { qubits: 3, depth: 1 }),
            ..Default::default()
        };
        assert!(matches!(optimize(&two, &db, &bad), Err(OptimizeError::BadSpec { .. })));
    }

    #[test]
    fn gates_outside_the_database_are_fingerprinted() {
        let db = build_database(&GeneratorConfig::new(1, 2, gs(&["I", "Z"]))).unwrap();
        // S·S = Z, and S is not in the database gate set.
        let c = grid("S|S", &["I", "S"]);
        let (out, _) = optimize(&c, &db, &OptimizeOptions::default()).unwrap();
        assert_eq!(out.encode(), "Z");
    }
}
