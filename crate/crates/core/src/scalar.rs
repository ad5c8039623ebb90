use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the probability tables and the solver are written against: f32 or f64.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumCast
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from an f64 literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Widening conversion used by reporting and CSV output.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance for structural checks (row sums, total mass).
    fn structural_tol() -> Self;
}

impl Scalar for f32 {
    fn structural_tol() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    fn structural_tol() -> Self {
        1e-12
    }
}
