//! Open quantum spin-chain simulation and reduced-rank Koopman operator
//! learning.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`] dense complex matrices and the Pauli-string basis that turns
//!   density matrices into real feature vectors;
//! * [`lindblad`] the dephasing Heisenberg chain, its RK4 integration and the
//!   train/test dataset;
//! * [`koopman`] reduced rank regression, forecasting, and spectral analysis
//!   of the learned operator;
//! * [`config`], [`pipeline`], [`report`] the file-based workflow driven by
//!   the `koopspin` binary.

pub mod algebra;
pub mod config;
pub mod error;
pub mod koopman;
pub mod lindblad;
pub mod oracle;
pub mod par;
pub mod pipeline;
pub mod report;
pub mod textio;

pub use error::{Error, ErrorKind, Result};
pub use par::Exec;
