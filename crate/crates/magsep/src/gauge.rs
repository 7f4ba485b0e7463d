//! Vector potentials and the two Cartesian separation gauges.

use crate::field::CoeffField;
use crate::scalar::ScalarFunction1D;

/// A vector potential with each component in the separable field algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugePotential {
    pub a: [CoeffField; 3],
}

impl GaugePotential {
    pub fn zero() -> Self {
        GaugePotential {
            a: [CoeffField::zero(), CoeffField::zero(), CoeffField::zero()],
        }
    }

    pub fn from_fields(a: [CoeffField; 3]) -> Self {
        GaugePotential { a }
    }

    /// Separation gauge of the first (quadratic-integral) class:
    /// A = (0, 0, u1(x2) - u2(x1)).
    pub fn case_i(u1: &ScalarFunction1D, u2: &ScalarFunction1D) -> Self {
        let a3 = CoeffField::from_scalar(1, u1).sub(&CoeffField::from_scalar(0, u2));
        GaugePotential {
            a: [CoeffField::zero(), CoeffField::zero(), a3],
        }
    }

    /// Separation gauge of the second (linear-integral) class:
    /// A = (0, u3(x1), -u2(x1)).
    pub fn case_ii(u2: &ScalarFunction1D, u3: &ScalarFunction1D) -> Self {
        GaugePotential {
            a: [
                CoeffField::zero(),
                CoeffField::from_scalar(0, u3),
                CoeffField::from_scalar(0, u2).scale(-1.0),
            ],
        }
    }

    /// Exact curl (magnetic field) as three fields.
    pub fn curl_fields(&self) -> [CoeffField; 3] {
        [
            self.a[2].partial(1).sub(&self.a[1].partial(2)),
            self.a[0].partial(2).sub(&self.a[2].partial(0)),
            self.a[1].partial(0).sub(&self.a[0].partial(1)),
        ]
    }

    /// Pointwise curl.
    pub fn curl(&self, x: &[f64; 3]) -> [f64; 3] {
        let b = self.curl_fields();
        [b[0].eval(x), b[1].eval(x), b[2].eval(x)]
    }

    pub fn eval(&self, x: &[f64; 3]) -> [f64; 3] {
        [self.a[0].eval(x), self.a[1].eval(x), self.a[2].eval(x)]
    }
}
