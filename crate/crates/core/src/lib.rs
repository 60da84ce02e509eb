//! Parameter recycling for the variational quantum eigensolver on MaxCut.
//!
//! Source/target graph pairs are sampled from a road network, the circuit is
//! pre-trained on the source, and its parameters initialize the run on the
//! target. The crate covers every stage: graph ingestion and sampling, exact
//! MaxCut, statevector simulation, a COBYLA optimizer, the experiment driver
//! and SVG/CSV reporting.

pub mod error;
pub mod experiment;
pub mod graph;
pub mod maxcut;
pub mod optimizer;
pub mod qsim;
pub mod report;
pub mod sampler;
pub mod stats;
pub mod synth;
pub mod vqe;

pub use error::{Error, Result};
