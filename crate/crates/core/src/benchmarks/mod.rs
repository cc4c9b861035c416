//! The consolidation column, the pulsating point source and the 3D footing,
//! plus parameter sweeps over them.

mod problems;
mod sweep;

pub use problems::{
    barry_mercer_problem, footing3d_problem, terzaghi_analytic, terzaghi_problem, BarryMercerSpec,
    FootingSpec, TerzaghiSpec,
};
pub use sweep::{
    read_sweep_csv, run_sweep, write_profile_csv, Benchmark, LChoice, SweepAxes, SweepCell,
    SweepResult, SweepSettings, PROFILE_CSV_HEADER, SWEEP_CSV_HEADER,
};
