//! Distributed block coordinate descent for l1-regularized linear
//! classifiers with the features partitioned across `P` simulated nodes.
//!
//! The objective is `F(w) = (1/n) sum_i loss(x_i^T w; c_i) + lambda ||w||_1`.
//! Supported methods are DBCD-R/S (proximal-Jacobi inner solves plus Armijo
//! line search), PCD-R/S (decoupled diagonal-Newton steps plus line search),
//! and the fixed-step baselines HYDRA and GROCK. Every node works on its
//! feature block, exchanging only length-`n` vectors and scalars through a
//! deterministic binary-tree AllReduce whose cost is tracked in a ledger.
//!
//! ```
//! use dbcd::{run_method, synth_dataset, Method, MethodConfig, SynthConfig};
//!
//! let data = synth_dataset::<f64>(&SynthConfig::new(200, 60, 0.1, 0.1, 7)).unwrap();
//! let mut cfg = MethodConfig::new(Method::DbcdS, 0.01, 3);
//! cfg.max_outer = 50;
//! let run = run_method(&cfg, &data.train).unwrap();
//! assert!(run.records.last().unwrap().f < run.records[0].f);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cluster;
pub mod data;
pub mod driver;
pub mod error;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod subprob;
pub mod synth;

pub use cluster::{Cluster, ClusterConfig, CostLedger};
pub use data::{parse_libsvm, partition_features, write_libsvm, Dataset, Partition, SparseMatrix};
pub use driver::{
    compute_delta_t, line_search, reference_solve, run_method, run_method_observed, InnerStop,
    Method, MethodConfig, RunStop, StepDiagnostics, Trajectory,
};
pub use error::{Error, Result};
pub use metrics::{
    auprc, cost_estimate, emit_csv, rfvd, write_csv, CostParams, CsvOptions, IterationRecord,
};
pub use model::{LossKind, ModelState};
pub use scalar::Scalar;
pub use synth::{synth_dataset, SynthConfig, Synthetic};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type SparseMatrix64 = SparseMatrix<f64>;
pub type SparseMatrix32 = SparseMatrix<f32>;
pub type ModelState64 = ModelState<f64>;
pub type ModelState32 = ModelState<f32>;
pub type MethodConfig64 = MethodConfig<f64>;
pub type MethodConfig32 = MethodConfig<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type Trajectory32 = Trajectory<f32>;
