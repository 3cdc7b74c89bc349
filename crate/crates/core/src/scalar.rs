//! Floating-point abstraction the numerical core is generic over.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Real scalar type used throughout the library: `f32` or `f64`.
///
/// Everything numerical (matrix functions, manifold geometry, the solvers)
/// is written against this trait; concrete aliases at the crate root pin
/// the usual `f64` instantiation.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Widen to `f64` for reporting and serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Convert an `f64` constant (tolerance, literal) into the working scalar.
pub fn cast<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("constant representable in scalar type")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cast_round_trips_simple_constants() {
        assert_eq!(cast::<f64>(0.5), 0.5);
        assert_eq!(cast::<f32>(0.5), 0.5f32);
        assert_eq!(cast::<f64>(1e-12).as_f64(), 1e-12);
    }
}
