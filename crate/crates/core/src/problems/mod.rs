//! Benchmark problem families.

pub mod io;
pub mod np;
pub mod qcqp;
pub mod ssd;

pub use io::{
    load_scenarios_csv, load_sparse_classification, save_scenarios_csv, save_sparse_classification,
    LabelPartition,
};
pub use np::{np_oracle, synthetic_gaussians, NpBatch, NpClassificationData, NpProblem};
pub use qcqp::{QcqpInstance, QcqpScenario};
pub use ssd::{ssd_oracle, synthetic_scenarios, SsdPortfolioData, SsdProblem};
