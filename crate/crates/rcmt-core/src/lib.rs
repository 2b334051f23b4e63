//! Lossless bidirectional codec between 3D molecular structure files (SDF
//! V2000) and compact one-line token text, plus compression measurement,
//! batch chemistry metrics, and stability-reward mathematics.
//!
//! Modules mirror the pipeline: [`sdf`] reads and writes structure files,
//! [`codec`] converts graphs to and from compact text, [`analysis`] measures
//! compression, [`metrics`] scores batches of molecules, and [`reward`]
//! provides the stability-weighted reward and PPO surrogate used for
//! reinforcement-learning feedback. [`fixtures`] holds sample data and
//! deterministic generators for tests and benchmarks.

pub mod analysis;
pub mod codec;
pub mod coord;
pub mod element;
pub mod fixtures;
pub mod graph;
pub mod metrics;
pub mod reward;
pub mod sdf;

pub use analysis::{CompressionReport, CorpusSummary};
pub use codec::{decode, encode, quantize, roundtrip_report, CompactText, RoundtripReport};
pub use coord::{Grid, QuantizedCoord};
pub use element::ElementSymbol;
pub use graph::{Atom, Bond, BondOrder, MolecularGraph, Valence, ValenceMode};
pub use metrics::{MetricsReport, StabilityMode, ValenceTable};
pub use reward::{
    EnergyOracle, HarmonicOracle, RewardBreakdown, RewardConfig, RewardWeights, Thermostat,
};
pub use sdf::SdfRecord;
