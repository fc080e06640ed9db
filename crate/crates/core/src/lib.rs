//! A k-server testbed: the Work Function Algorithm, the exact offline
//! optimum over configurations, the anchor construction, and a harness that
//! checks the strict-competitiveness argument on concrete instances.
//!
//! ```
//! use kserver::{Configuration, Instance, MetricSpace};
//!
//! let metric = MetricSpace::new(vec![vec![0, 1, 3], vec![1, 0, 2], vec![3, 2, 0]])?;
//! let inst = Instance::new(metric, Configuration::new([0, 1])?, vec![2])?;
//!
//! let online = kserver::run_wfa(&inst)?;
//! let offline = kserver::opt_trace(&inst, None)?;
//! assert_eq!((online.total_cost, offline.total_cost), (2, 2));
//! # Ok::<(), kserver::Error>(())
//! ```

pub mod anchor;
pub mod error;
pub mod generate;
pub mod harness;
pub mod matching;
pub mod metric;
pub mod offline;
pub mod rng;
pub mod space;
pub mod trace;
pub mod workfunction;

pub use anchor::{anchor_cycles, build_chi, compute_anchor, AnchorSpec};
pub use error::{Error, Result};
pub use generate::{generate_instance, RequestModel};
pub use harness::{
    measure_strict_ratio, run_campaign, verify_anchored_properties, Alpha, CampaignConfig, CheckId, ExperimentReport,
    PropertyReport, RatioRow, Status, VerifyOptions,
};
pub use metric::{
    configuration_distance, min_pairwise_distance, random_metric, validate_metric, AxiomViolation, Configuration,
    Instance, MetricSpace, Point,
};
pub use offline::{opt_cost, opt_cost_to, opt_trace, oracle_opt, oracle_work_vector, WorkHistory};
pub use space::ConfigSpace;
pub use trace::{Discipline, ExecutionTrace, Move, Round};
pub use workfunction::{
    d_equivalence, initial_work_vector, run_wfa, update_work_vector, wfa_decide, wfa_scores, Decision, Wfa, WorkVector,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/work-functions.md")]
    mod work_functions {}
    #[doc = include_str!("../../../book/src/offline.md")]
    mod offline {}
    #[doc = include_str!("../../../book/src/anchor.md")]
    mod anchor {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}
