//! Circuit-identity generation and tile-based depth optimization for small quantum circuits.

pub mod angle;
pub mod circuit;
pub mod database;
pub mod fingerprint;
pub mod gates;
pub mod generator;
pub mod matrix;
pub mod optimizer;
pub mod qasm;

pub use angle::Angle;
pub use circuit::{Cell, CircuitError, CircuitGrid, Layer, Role};
pub use database::{IdentityDatabase, LoadError};
pub use fingerprint::{canonicalize, fingerprint, Fingerprint};
pub use gates::{GateDef, GateSet};
pub use generator::{build_database, scaling_count, GeneratorConfig};
pub use matrix::ComplexMatrix;
pub use optimizer::{optimize, OptimizeOptions, OptimizeReport, TileSpec};
