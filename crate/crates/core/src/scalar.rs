//! Floating-point scalar used by the statistical estimators.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

pub trait Real: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite conversion")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
