//! Two-dimensional stochastic dominance (2DSD) indices, the minimal
//! violation ratio and bootstrap tests of restricted dominance.

pub mod bootstrap;
pub mod distribution;
pub mod dominance;
pub mod empirical;
pub mod error;
pub mod numeric;
pub mod piecewise;
pub mod quadrature;
pub mod scenarios;
pub mod testing;

pub use bootstrap::{BootstrapConfig, BootstrapDistribution, Parallelism, RateAndBandwidth};
pub use dominance::{
    classify, index, mvr, phi, Classification, Direction, Index2DSD, MVREstimate, OrderKind, Region,
    TailDiagnostics,
};
pub use distribution::DistributionSpec;
pub use empirical::{EmpiricalTargets, Sample};
pub use error::{Error, Result};
pub use piecewise::{BreakpointGrid, Interval, Kind, PiecewiseFunction, SignedAbsIntegrals, Tail};
pub use scenarios::{oracle_mvr, power_curve, ScenarioSpec};
pub use testing::{run_test, Method, TestResult, TestSpec, Variant};
