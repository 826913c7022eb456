//! Coherence as a resource for incoherently controlled quantum systems.
//!
//! * [`state`] and [`linalg`]: density matrices, partial traces, entropies, dephasing.
//! * [`channel`] and [`goia`]: Kraus channels, incoherent/controlled operations,
//!   measurements on B, and programs made of free operations.
//! * [`measures`]: the monotone Δ_𝒵 and its property checks.
//! * [`optimize`]: the LQICC lower bound, basis-minimized Δ, and the pure-state protocol.
//! * [`dqc1`]: trace estimation with partially coherent probes.
//! * [`suites`]: randomized property suites shared by tests and the CLI.

pub mod channel;
pub mod dqc1;
pub mod error;
pub mod fixtures;
pub mod goia;
pub mod io;
pub mod linalg;
pub mod measures;
pub mod optimize;
pub mod state;
pub mod suites;

pub use channel::{controlled_translation, controlled_unitary, is_cq_state, measure_on_b, KrausChannel, MeasurementRecord, Povm};
pub use dqc1::{dqc1_exact, dqc1_sample, precision_vs_coherence, Dqc1Report, ProbeSpec};
pub use error::{Error, Result};
pub use goia::{random_goia_program, GoiaProgram, GoiaStep};
pub use linalg::{eig_hermitian, haar_unitary, ComplexMatrix, ComplexVector, Spectrum};
pub use measures::{coherence_rel_ent, delta_z, MeasureResult};
pub use optimize::{lqicc_lower_bound, min_basis_delta, pure_state_recoverable, BoundResult, OptimizerConfig};
pub use state::{dephase, fidelity, partial_trace, random_state, relative_entropy, tensor, von_neumann_entropy, DensityMatrix, OrthonormalBasis};
