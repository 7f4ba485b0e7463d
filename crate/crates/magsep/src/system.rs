//! Magnetic Hamiltonian systems: H = |p + A|^2 / 2 + W with W = V - |A|^2 / 2.

use crate::error::{Error, Result};
use crate::field::CoeffField;
use crate::gauge::GaugePotential;
use crate::scalar::{Domain, ScalarFunction1D};

/// Hyperplane guard: points with |x_i| below this are rejected for any
/// coordinate carrying a negative-power or logarithmic atom.  Keeps
/// derivative magnitudes bounded for tolerance-based tests.
pub const SINGULAR_GUARD: f64 = 1.0e-3;

/// A point (x, p) of the 6D phase space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: [f64; 3],
    pub p: [f64; 3],
}

impl PhasePoint {
    pub fn new(x: [f64; 3], p: [f64; 3]) -> Self {
        PhasePoint { x, p }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(self.p.iter()).all(|v| v.is_finite())
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.x[0], self.x[1], self.x[2], self.p[0], self.p[1], self.p[2],
        ]
    }

    pub fn from_array(y: &[f64; 6]) -> Self {
        PhasePoint {
            x: [y[0], y[1], y[2]],
            p: [y[3], y[4], y[5]],
        }
    }

    pub fn dist(&self, other: &PhasePoint) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array().iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// The structured data of the two Cartesian separation classes, kept when a
/// system was built from one of them (used by the dimensional reductions).
#[derive(Clone, Debug)]
pub enum CaseForm {
    /// A = (0, 0, u1(x2) - u2(x1)), V = V1(x1) + V2(x2).
    I {
        u1: ScalarFunction1D,
        u2: ScalarFunction1D,
        v1: ScalarFunction1D,
        v2: ScalarFunction1D,
    },
    /// A = (0, u3(x1), -u2(x1)), V = V1(x1).
    II {
        u2: ScalarFunction1D,
        u3: ScalarFunction1D,
        v1: ScalarFunction1D,
    },
}

/// A gauge potential plus scalar potential, with the magnetic field, the
/// effective potential and all first derivatives precomputed analytically.
#[derive(Clone, Debug)]
pub struct MagneticSystem {
    pub gauge: GaugePotential,
    pub scalar_v: CoeffField,
    magnetic_b: [CoeffField; 3],
    effective_w: CoeffField,
    grad_w: [CoeffField; 3],
    /// da[k][j] = d A_k / d x_j
    da: [[CoeffField; 3]; 3],
    pub domain: [Domain; 3],
    pub case_form: Option<CaseForm>,
}

impl MagneticSystem {
    pub fn new(gauge: GaugePotential, scalar_v: CoeffField, case_form: Option<CaseForm>) -> Self {
        let magnetic_b = gauge.curl_fields();
        let a_sq = gauge.a[0]
            .square()
            .add(&gauge.a[1].square())
            .add(&gauge.a[2].square());
        let effective_w = scalar_v.sub(&a_sq.scale(0.5));
        let grad_w = [
            effective_w.partial(0),
            effective_w.partial(1),
            effective_w.partial(2),
        ];
        let da = [0, 1, 2].map(|k: usize| [0, 1, 2].map(|j: usize| gauge.a[k].partial(j)));
        let mut domain = [Domain::All; 3];
        for c in 0..3 {
            for f in gauge.a.iter().chain(std::iter::once(&scalar_v)) {
                domain[c] = domain[c].join(f.domain(c));
            }
            domain[c] = domain[c].join(effective_w.domain(c));
        }
        MagneticSystem {
            gauge,
            scalar_v,
            magnetic_b,
            effective_w,
            grad_w,
            da,
            domain,
            case_form,
        }
    }

    /// Build a first-class (quadratic-integral) separable system from its
    /// four defining univariate functions.
    pub fn case_i(
        u1: ScalarFunction1D,
        u2: ScalarFunction1D,
        v1: ScalarFunction1D,
        v2: ScalarFunction1D,
    ) -> Self {
        let gauge = GaugePotential::case_i(&u1, &u2);
        let v = CoeffField::from_scalar(0, &v1).add(&CoeffField::from_scalar(1, &v2));
        Self::new(gauge, v, Some(CaseForm::I { u1, u2, v1, v2 }))
    }

    /// Build a second-class (linear-integral) separable system.
    pub fn case_ii(u2: ScalarFunction1D, u3: ScalarFunction1D, v1: ScalarFunction1D) -> Self {
        let gauge = GaugePotential::case_ii(&u2, &u3);
        let v = CoeffField::from_scalar(0, &v1);
        Self::new(gauge, v, Some(CaseForm::II { u2, u3, v1 }))
    }

    /// Reject coordinates inside the singular-set guard band.
    pub fn check_admissible(&self, x: &[f64; 3]) -> Result<()> {
        for c in 0..3 {
            match self.domain[c] {
                Domain::All => {}
                Domain::Nonzero => {
                    if x[c].abs() < SINGULAR_GUARD {
                        return Err(Error::SingularPoint {
                            coord: c + 1,
                            value: x[c],
                        });
                    }
                }
                Domain::Positive => {
                    if x[c] < SINGULAR_GUARD {
                        return Err(Error::SingularPoint {
                            coord: c + 1,
                            value: x[c],
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn b_field(&self) -> &[CoeffField; 3] {
        &self.magnetic_b
    }

    pub fn w_field(&self) -> &CoeffField {
        &self.effective_w
    }

    pub fn grad_w_fields(&self) -> &[CoeffField; 3] {
        &self.grad_w
    }

    pub fn da_fields(&self) -> &[[CoeffField; 3]; 3] {
        &self.da
    }

    pub fn b(&self, x: &[f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|i| self.magnetic_b[i].eval(x))
    }

    pub fn w(&self, x: &[f64; 3]) -> f64 {
        self.effective_w.eval(x)
    }

    pub fn grad_w(&self, x: &[f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|i| self.grad_w[i].eval(x))
    }

    /// Covariant momenta p_j + A_j(x).
    pub fn covariant_momentum(&self, pt: &PhasePoint) -> Result<[f64; 3]> {
        self.check_admissible(&pt.x)?;
        let a = self.gauge.eval(&pt.x);
        Ok([pt.p[0] + a[0], pt.p[1] + a[1], pt.p[2] + a[2]])
    }

    /// H = |p^A|^2 / 2 + W(x) (gauge-covariant route).
    pub fn hamiltonian(&self, pt: &PhasePoint) -> Result<f64> {
        let pa = self.covariant_momentum(pt)?;
        Ok(0.5 * (pa[0] * pa[0] + pa[1] * pa[1] + pa[2] * pa[2]) + self.w(&pt.x))
    }

    /// H = |p|^2 / 2 + A.p + V (gauge-dependent route; equal up to roundoff).
    pub fn hamiltonian_gauge_form(&self, pt: &PhasePoint) -> Result<f64> {
        self.check_admissible(&pt.x)?;
        let a = self.gauge.eval(&pt.x);
        let kin = 0.5 * pt.p.iter().map(|p| p * p).sum::<f64>();
        let cross = a[0] * pt.p[0] + a[1] * pt.p[1] + a[2] * pt.p[2];
        Ok(kin + cross + self.scalar_v.eval(&pt.x))
    }

    /// Exact (dH/dx, dH/dp).
    pub fn hamiltonian_gradient(&self, pt: &PhasePoint) -> Result<[f64; 6]> {
        let pa = self.covariant_momentum(pt)?;
        let mut g = [0.0; 6];
        for j in 0..3 {
            let mut gx = self.grad_w[j].eval(&pt.x);
            for k in 0..3 {
                gx += pa[k] * self.da[k][j].eval(&pt.x);
            }
            g[j] = gx;
            g[3 + j] = pa[j];
        }
        Ok(g)
    }

    /// A -> A + grad(chi), V adjusted so the effective potential W (and the
    /// magnetic field) are unchanged.  chi = chi1(x1) + chi2(x2) + chi3(x3).
    pub fn gauge_transform(&self, chi: &[ScalarFunction1D; 3]) -> MagneticSystem {
        let grad_chi: [CoeffField; 3] =
            [0, 1, 2].map(|c: usize| CoeffField::from_scalar(c, &chi[c].derivative()));
        let a_new = [0, 1, 2].map(|c: usize| self.gauge.a[c].add(&grad_chi[c]));
        let a_sq_new = a_new[0]
            .square()
            .add(&a_new[1].square())
            .add(&a_new[2].square());
        // V' = W + |A'|^2 / 2 keeps W' = W identically.
        let v_new = self.effective_w.add(&a_sq_new.scale(0.5));
        MagneticSystem::new(GaugePotential::from_fields(a_new), v_new, None)
    }
}
