//! Bounds on causal effects P(y | do(x)) when the back-door or front-door
//! adjustment set is only partially observed, and a state-space reduction that
//! turns a high-dimensional adjustment variable into such a problem.
//!
//! Tables and the optimizer are generic over [`Scalar`] (f32 or f64); the
//! aliases below fix the double-precision instantiation used by the CLI.

pub mod bounds;
pub mod diagram;
pub mod error;
pub mod experiment;
pub mod nlp;
pub mod reduce;
pub mod scalar;
pub mod tables;

pub use diagram::CausalDiagram;
pub use error::{Error, Result};
pub use scalar::Scalar;

pub type JointTable = tables::JointTable<f64>;
pub type Cpt = tables::Cpt<f64>;
pub type Interval = tables::Interval<f64>;
pub type FractionalProgram = nlp::FractionalProgram<f64>;
pub type Solution = nlp::Solution<f64>;
pub type SolverConfig = nlp::SolverConfig<f64>;
pub type BoundsResult = bounds::BoundsResult<f64>;
pub type BackdoorInstance = bounds::BackdoorInstance<f64>;
pub type FrontdoorInstance = bounds::FrontdoorInstance<f64>;
pub type EquivalentTuple = reduce::EquivalentTuple<f64>;
