//! Downlink coverage, average sum rate and energy efficiency for a
//! massive-MIMO cell with zero-forcing precoding and Poisson-distributed
//! underlay D2D pairs.
//!
//! Coverage is available two ways: closed-form expressions in [`analytic`]
//! and a first-principles simulator in [`montecarlo`]. [`metrics`] turns
//! either into rates, sum rate and energy efficiency, and [`sweep`] runs
//! parameter grids and writes CSV.

pub mod analytic;
pub mod config;
pub mod metrics;
pub mod montecarlo;
pub mod quadrature;
pub mod special;
pub mod sweep;

pub use config::{build_config, derive_constants, DerivedConstants, ParamSet, SystemConfig};
pub use analytic::{CoverageQuery, Tier};
pub use metrics::{PowerModel, RateResult};
pub use montecarlo::{McEstimate, McOptions};
pub use quadrature::QuadratureSpec;
