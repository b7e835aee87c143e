//! Zero counts of combinations of `I_k` and the experiments built on them.

mod experiments;
mod scan;
mod zeros;

pub use experiments::{
    cyclicity_experiment, nocheb_experiment, CyclicityParams, CyclicityReport, NochebReport, MAX_RETRIES,
    NOCHEB_RATIO, SMALL_GRID,
};
pub use scan::{region_scan, RegionSpec, ScanReport, ScanRow, SCAN_CSV_HEADER};
pub use zeros::{
    count_zeros, eval_f, eval_f_family, extrema_on_table, max_zero_count, sigma_grid, zeros_on_table, Extremum,
    FSample, IntegralTable, MaxZeroReport, Zero, ZeroReport, DEFAULT_GRID, GRID_END_GAP, REFINE_TOL,
};
