use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the algebra, generator and Gaussian layers are generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Smallest tolerance that still means something at this precision.
    const TOL_FLOOR: f64;

    /// Absolute chop applied to coefficients after every canonicalization.
    fn chop() -> Self {
        Self::tol(1e-12)
    }

    /// `x` as a tolerance, raised to `TOL_FLOOR` when the type cannot resolve it.
    fn tol(x: f64) -> Self {
        Self::lit(x.max(Self::TOL_FLOOR))
    }

    /// Rounds onto the nearest multiple of 2⁻²⁰ when within a few ulps of it,
    /// so products of `1/√2` factors land back on exact halves.
    fn snap_dyadic(self) -> Self {
        let scale = Self::lit(1048576.0);
        let s = self * scale;
        let r = s.round();
        if (s - r).abs() <= Self::epsilon() * Self::lit(4.0) * r.abs().max(Self::one()) {
            r / scale
        } else {
            self
        }
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const TOL_FLOOR: f64 = 1e-14;
}

impl Real for f32 {
    const TOL_FLOOR: f64 = 1e-5;
}
