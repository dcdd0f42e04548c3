//! Occupational wage-dispersion regressions: ingest of OEWS wage
//! percentiles and an AI exposure index, OLS with HC1 errors, and the
//! five-column levels / first-difference design.

pub mod ingest;
pub mod ols;
pub mod table4;

pub use ingest::{load_and_merge, DropReason, MergeReport, OccPair, OccRecord, Panel, Wages};
pub use ols::{ols_hc1, Coefficient, RegressionOutput};
pub use table4::{run_table4, Design, Table4};
