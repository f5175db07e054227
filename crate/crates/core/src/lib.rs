//! Compile operators on a truncated bosonic mode into trapped-ion pulse schedules.
//!
//! A target `V` acting on the Fock states `|0>..|N>` of the x vibrational mode
//! is realized with the y mode and three internal levels `a, b, c` as
//! ancillas: a spreading stage writes column `m` of `V` into row `m` of the
//! two-mode number-state lattice, a superposing stage adds the rows into the
//! `m = 0` row, and a measurement of the internal level `b` keeps the
//! branch holding `|0> ⊗ V|psi>`.
//!
//! * [`fockspace`] state vectors, overlaps and projections
//! * [`iontools`] trap parameters, Stark shifts, sideband couplings, Hamiltonians
//! * [`propagator`] exact per-pulse evolution and the dense oracle
//! * [`synthesis`] the compiler from `V` to a [`synthesis::Schedule`]
//! * [`targets`] Fourier transform, cyclic shift, random and user matrices
//! * [`harness`] execution, post-selection, fidelity sweeps and file output
//! * [`cli`] the `ionsynth` command line

pub mod cli;
pub mod error;
pub mod fockspace;
pub mod harness;
pub mod iontools;
pub mod propagator;
pub mod synthesis;
pub mod targets;

pub use error::{Error, Result};
pub use fockspace::{Dims, Level, StateVector};
pub use iontools::{Channel, TrapParams};
pub use propagator::{Mode, PulseOp};
pub use synthesis::{synthesize, Schedule};
pub use targets::TargetOperator;
