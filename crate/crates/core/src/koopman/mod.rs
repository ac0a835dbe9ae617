//! Reduced-rank Koopman estimator: fitting, forecasting, spectral analysis.

pub mod io;
pub mod rrr;
pub mod spectral;

pub use io::{
    load_estimator, read_estimator, read_spectrum, save_estimator, write_estimator,
    write_spectrum, SPECTRUM_HEADER,
};
pub use rrr::{fit_ridge, fit_rrr, fit_rrr_with_info, rrr_objective, FitInfo, KoopmanEstimator};
pub use spectral::{
    decay_rates_frequencies, eigen_triplets, eigen_triplets_with, eigenfunction_drift,
    eigenfunction_operator, mode_decomposition, numerical_rank, range_factor, spectral_summary,
    steady_mode, steady_mode_index, symmetry_residual, EigenTriplet, ModeDecomposition,
    ModeSpectrum, ModeTerm, RangeFactor, SpectralSummary,
};
