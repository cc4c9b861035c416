//! Dense checks of the theory on small instances: spectral equivalence of
//! the lumping defect, the two-iteration property, monotone profiles, and an
//! independent quadrature oracle.

mod monotone;
mod oracle;
mod schur;
mod spectral;
mod suite;

pub use monotone::{check_monotone, scan_line, OscillationReport};
pub use oracle::{dense_biot_oracle, dense_biot_oracle_with, oracle_fits, AssemblyComparison, DenseOracle, ORACLE_DOF_LIMIT};
pub use schur::{schur_two_iteration_check, SchurCheck, SCHUR_DOF_LIMIT};
pub use spectral::{spectral_equivalence, SpectralReport, SPECTRAL_DOF_LIMIT};
pub use suite::{barry_mercer_scan, run_suite, terzaghi_envelope, NEAR_SOURCE, CheckResult, Suite, VerifyReport};
