//! Structural credit risk for two firms with cross-ownership of equity and debt.
//!
//! Firm values are the unique solution of the clearing system of the two
//! firms' debt and equity claims. On top of that this crate estimates default
//! probabilities by simulation, compares them with a lognormal model matched to
//! the first two moments of the firm value, studies the limit of full
//! cross-ownership and builds distributions that push the lognormal model into
//! over- or underestimation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod default_risk;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod limit;
pub mod mixture;
pub mod normal;
pub mod valuation;

pub use default_risk::{
    compare_pd, estimate_pd_lognormal, estimate_pd_suzuki, pd_analytic_suzuki_limit_region,
    relative_risk, PdComparison, PdEstimate,
};
pub use distributions::{
    match_lognormal, sample_assets, AssetSampler, BivariateLognormalSpec, LognormalSpec, MomentPair,
};
pub use error::{Result, XosError};
pub use valuation::{
    classify_area, is_default, value_closed_form, value_fixed_point, AssetScenario, ClaimVector,
    Firm, SuzukiArea, XosStructure, XosType,
};
