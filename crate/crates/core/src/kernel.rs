//! Interpolation kernels used by samplers and splatters.

use crate::math;

/// 1-D separable sampling kernel descriptor.
///
/// `Bilinear` is the tent `max(0, 1 - |x|)`; `BicubicA` is the Keys cubic
/// with `a = -0.5` (Catmull-Rom). Both reproduce constants (partition of
/// unity) and interpolate: integer offsets yield weight 1 at 0 and 0
/// elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingKernel {
    #[default]
    Bilinear,
    BicubicA,
}

impl SamplingKernel {
    /// Support radius in pixels; weights vanish for `|x| >= support`.
    pub fn support(&self) -> usize {
        match self {
            SamplingKernel::Bilinear => 1,
            SamplingKernel::BicubicA => 2,
        }
    }

    /// Kernel weight at offset `x`.
    pub fn value(&self, x: f64) -> f64 {
        let t = math::abs(x);
        match self {
            SamplingKernel::Bilinear => (1.0 - t).max(0.0),
            SamplingKernel::BicubicA => {
                // Keys cubic, a = -0.5
                if t <= 1.0 {
                    (1.5 * t - 2.5) * t * t + 1.0
                } else if t < 2.0 {
                    ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Kernel slope at offset `x`.
    ///
    /// For the bilinear tent the subgradient at the kinks `|x| ∈ {0, 1}`
    /// is fixed to 0 so gradients stay deterministic.
    pub fn derivative(&self, x: f64) -> f64 {
        let t = math::abs(x);
        let sign = if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            0.0
        };
        match self {
            SamplingKernel::Bilinear => {
                if t > 0.0 && t < 1.0 {
                    -sign
                } else {
                    0.0
                }
            }
            SamplingKernel::BicubicA => {
                if t <= 1.0 {
                    sign * ((4.5 * t - 5.0) * t)
                } else if t < 2.0 {
                    sign * ((-1.5 * t + 5.0) * t - 4.0)
                } else {
                    0.0
                }
            }
        }
    }
}
