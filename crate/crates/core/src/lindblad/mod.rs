//! Dissipative Heisenberg chain: model, observables, integration, dataset.

pub mod integrate;
pub mod io;
pub mod model;
pub mod observables;
pub mod params;

pub use integrate::{
    check_density, dataset_split, initial_state, integrate, integrate_with, DatasetSplit,
    Trajectory, HERMITICITY_TOL, POSITIVITY_TOL, TRACE_TOL,
};
pub use io::{load_trajectory, read_trajectory, save_trajectory, write_trajectory};
pub use model::{
    build_dephasing_ops, build_hamiltonian, dephasing_ops, lindblad_rhs, Generator, LindbladModel,
};
pub use observables::{
    expectation, spin_current_op, spin_current_op_raw, spin_polarization_op, total_sz_op,
};
pub use params::SpinChainParams;
