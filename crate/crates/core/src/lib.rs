//! Finite-volume Gibbs measures on `Z^d` and the Gaussian concentration
//! machinery around them: Dobrushin certificates, exact enumeration, MCMC,
//! oscillation vectors, concentration and blow-up checks, and entropy probes.
// `!(x > y)` comparisons are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concentration;
pub mod defaults;
pub mod dobrushin;
pub mod distribution;
pub mod entropy;
pub mod error;
pub mod experiment;
pub mod lattice;
pub mod observables;
pub mod potential;
pub mod sampler;
pub mod specification;
pub mod stats;

pub use dobrushin::{gcb_certificate, DobrushinReport};
pub use distribution::{DistributionKind, PatternDistribution, PatternKey};
pub use error::{Error, Result};
pub use lattice::{Boundary, Configuration, Geometry, Pattern, Site, Symbol, Window};
pub use potential::{BoundPotential, ModelConfig, ModelKind, Potential};
pub use specification::FiniteGibbsMeasure;
