//! Exact computations on n-adic doubling measures built from piecewise
//! constant densities: intervals, Diophantine centres, re-weighting
//! constructions, doubling and reverse Hölder constants.

pub mod analysis;
pub mod config;
pub mod construction;
pub mod density;
pub mod diophantine;
pub mod driver;
pub mod enclosure;
pub mod error;
pub mod interval;
pub mod oracle;
pub mod rational;
pub mod report;
pub mod weights;

pub use analysis::{
    adjacent_pair_ratio, covering_bound, nadic_doubling_constant, non_doubling_certificate, stabilization_depth,
    uniform_doubling_check, Anchor, Depth, DoublingReport, NonDoublingCertificate,
};
pub use config::ExperimentConfig;
pub use construction::{
    compose_ray, extreme_pair, motivating_measure, nested_stages, nice_decomposition, reweight,
    schedule_for_target, ReweightParams, StageSchedule,
};
pub use density::{Measure, StepDensity};
pub use diophantine::{convergent_candidates, find_witness, Lemma4Witness};
pub use enclosure::Enclosure;
pub use error::{Error, Result};
pub use interval::{nadic_children, nadic_siblings, Interval, NAdicInterval};
pub use rational::{q, ExactRational};
pub use weights::{
    ar_constant, nadic_rh_constant, overall_rh_growth, rh_constant, subdivision_bound_check, RHConstant,
};
