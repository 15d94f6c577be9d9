//! Simulation and verification toolkit for Gibbs point processes whose
//! interactions may have infinite range but are stable and hereditary.
//!
//! The crate is organized around a small pipeline:
//!
//! * [`geometry`] and [`configuration`] provide points, boxes, dilations and
//!   finite point configurations with windowed variants.
//! * [`energy`] defines energy models (activity, pairwise, finite-range,
//!   cloud, sums) together with shell-increment bounds and summable tail
//!   envelopes used for truncation certificates.
//! * [`local_energy`] computes shell-truncated local energies with certified
//!   error bounds that split into a realized pathwise part and an expectation
//!   part.
//! * [`sampler`] draws from finite-volume Gibbs measures by exact rejection
//!   or by a birth-death-move Metropolis chain.
//! * [`diagnostics`] checks sampler output against theory: intensity bounds,
//!   partition function sandwiches, and residuals of the spatial Markov
//!   identity satisfied by Gibbs measures.
//! * [`config`] and [`runner`] drive everything from flat key=value
//!   experiment files; the `gibbs` binary is a thin CLI shell over them.
//!
//! All randomness flows through explicitly seeded ChaCha generators and all
//! parallel reductions are index-ordered, so every artifact is reproducible
//! byte for byte regardless of thread count.

pub mod config;
pub mod configuration;
pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod local_energy;
pub mod numeric;
pub mod runner;
pub mod sampler;
pub mod stats;

pub use configuration::{Configuration, WindowedConfiguration};
pub use energy::{EnergyModel, Potential};
pub use error::{Error, Result};
pub use geometry::{BoxRegion, DilatedRegion, Point};
pub use local_energy::CertifiedLocalEnergy;
pub use sampler::{SampleMethod, SampleSet, SamplerSpec};

/// Library version recorded in every run manifest.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
