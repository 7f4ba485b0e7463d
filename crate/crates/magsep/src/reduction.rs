//! Canonical transformations and dimensional reductions: the kappa
//! reduction of the first separation class, the constant-field map to two
//! degrees of freedom, and the quadratic-potential normal form.

use crate::error::{Error, Result};
use crate::poly::{CanonicalPolynomial, MomentumPolynomial};
use crate::scalar::ScalarFunction1D;
use crate::system::{CaseForm, MagneticSystem, PhasePoint};

/// The 2D natural Hamiltonian obtained from a first-class system by fixing
/// the conserved canonical momentum p3 = kappa:
/// H0 = (p1^2 + p2^2)/2 + kappa (u1(x2) - u2(x1)) + V1(x1) + V2(x2).
#[derive(Clone, Debug)]
pub struct Reduced2DSystem {
    pub source: String,
    pub kappa: f64,
    pub u1: ScalarFunction1D,
    pub u2: ScalarFunction1D,
    pub v1: ScalarFunction1D,
    pub v2: ScalarFunction1D,
}

impl Reduced2DSystem {
    pub fn hamiltonian(&self, x1: f64, x2: f64, p1: f64, p2: f64) -> f64 {
        0.5 * (p1 * p1 + p2 * p2)
            + self.kappa * (self.u1.eval(x2) - self.u2.eval(x1))
            + self.v1.eval(x1)
            + self.v2.eval(x2)
    }

    /// H0 as a polynomial in (p1, p2, kappa) — the third momentum slot
    /// carries kappa, so integrals polynomial in kappa live in the same
    /// algebra and lift by reinterpreting that slot as p3.
    pub fn hamiltonian_poly(&self) -> CanonicalPolynomial {
        use crate::field::CoeffField;
        let u = CoeffField::from_scalar(1, &self.u1).sub(&CoeffField::from_scalar(0, &self.u2));
        let v = CoeffField::from_scalar(0, &self.v1).add(&CoeffField::from_scalar(1, &self.v2));
        CanonicalPolynomial::from_terms(vec![
            (CoeffField::constant(0.5), [2, 0, 0]),
            (CoeffField::constant(0.5), [0, 2, 0]),
            (u, [0, 0, 1]),
            (v, [0, 0, 0]),
        ])
    }
}

/// Poisson bracket in the reduced (x1, x2, p1, p2) space; the third slot
/// (kappa) is treated as a parameter.
pub fn bracket_2d(f: &CanonicalPolynomial, g: &CanonicalPolynomial) -> CanonicalPolynomial {
    let mut out = CanonicalPolynomial::zero();
    for j in 0..2 {
        out = out
            .add(&f.partial_x(j).mul(&g.partial_p(j)))
            .sub(&g.partial_x(j).mul(&f.partial_p(j)));
    }
    out
}

/// Fix p3 = kappa in a first-class system and subtract kappa^2/2.
pub fn reduce_case_i(sys: &MagneticSystem, kappa: f64) -> Result<Reduced2DSystem> {
    match &sys.case_form {
        Some(CaseForm::I { u1, u2, v1, v2 }) => Ok(Reduced2DSystem {
            source: String::new(),
            kappa,
            u1: u1.clone(),
            u2: u2.clone(),
            v1: v1.clone(),
            v2: v2.clone(),
        }),
        _ => Err(Error::Structural(
            "kappa reduction needs a system in the first separation class".into(),
        )),
    }
}

/// Lift a kappa-parametric 2D integral (kappa in the third momentum slot)
/// to a 3D covariant integral by substituting kappa -> p3.
pub fn lift_integral(
    i2d: &CanonicalPolynomial,
    sys: &MagneticSystem,
) -> Result<MomentumPolynomial> {
    if !matches!(sys.case_form, Some(CaseForm::I { .. })) {
        return Err(Error::Structural(
            "integral lifting needs a system in the first separation class".into(),
        ));
    }
    for (c, _) in i2d.terms() {
        for t in c.terms() {
            let a3 = t.a[2];
            if a3.power != 0.0 || a3.exp_rate != 0.0 || a3.log_power != 0 {
                return Err(Error::Structural(
                    "2D integral coefficients must not depend on x3".into(),
                ));
            }
        }
    }
    Ok(MomentumPolynomial::from_canonical(i2d, &sys.gauge))
}

/// The constant-field generating-function map: given gamma != 0 and new
/// variables (X, Y, Z, P1, P2, P3), return the old phase-space point
/// x1 = X + P3/gamma, x2 = Y, x3 = Z + P1/gamma, p = P.
pub fn prop32_map(gamma: f64, pt_new: &PhasePoint) -> Result<PhasePoint> {
    if gamma == 0.0 {
        return Err(Error::Structural("the map needs gamma != 0".into()));
    }
    let [x, y, z] = pt_new.x;
    let [p1, p2, p3] = pt_new.p;
    Ok(PhasePoint {
        x: [x + p3 / gamma, y, z + p1 / gamma],
        p: [p1, p2, p3],
    })
}

/// |H(prop32_map(pt)) - K(pt)| for a constant-field system, where
/// K = (P1^2 + P2^2)/2 + gamma^2 X^2 / 2 + V2(Y) is the reduced
/// two-degrees-of-freedom Hamiltonian.  The system must be of the
/// constant-field form u1 = 0, u2 = gamma x1, V1 = gamma^2 x1^2 / 2.
pub fn prop32_residual(sys: &MagneticSystem, gamma: f64, pt_new: &PhasePoint) -> Result<f64> {
    let (v2,) = match &sys.case_form {
        Some(CaseForm::I { u1, u2, v1, v2 }) => {
            let ok_u1 = u1.is_zero();
            let lin = ScalarFunction1D::monomial(gamma, 1);
            let quad = ScalarFunction1D::monomial(0.5 * gamma * gamma, 2);
            if !ok_u1 || !u2.sub(&lin).is_zero() || !v1.sub(&quad).is_zero() {
                return Err(Error::Structural(
                    "system is not in the constant-field normal form".into(),
                ));
            }
            (v2.clone(),)
        }
        _ => {
            return Err(Error::Structural(
                "the constant-field reduction needs a first-class system".into(),
            ))
        }
    };
    let old = prop32_map(gamma, pt_new)?;
    let h = sys.hamiltonian(&old)?;
    let [x, y, _] = pt_new.x;
    let [p1, p2, _] = pt_new.p;
    let k = 0.5 * (p1 * p1 + p2 * p2) + 0.5 * gamma * gamma * x * x + v2.eval(y);
    Ok((h - k).abs())
}

/// Coefficient of P3^2 in the transformed quadratic-potential Hamiltonian.
/// When it vanishes, Z's conjugate momentum decouples and Z itself is an
/// extra constant of motion (degenerate branch).
pub fn sec8_p3sq_coefficient(a1: f64, a2: f64, v12: f64, v22: f64) -> f64 {
    1.0 - a1 * a1 / (2.0 * v22) - a2 * a2 / (2.0 * v12)
}

/// The quadratic-potential normal-form map (linear fields u1 = a1 x2,
/// u2 = a2 x1, potentials v12 x1^2 + v22 x2^2; linear potential terms are
/// absorbed by translation beforehand).
pub fn sec8_map(a1: f64, a2: f64, v12: f64, v22: f64, pt_new: &PhasePoint) -> Result<PhasePoint> {
    if v12 == 0.0 || v22 == 0.0 {
        return Err(Error::Structural("the map needs v12 != 0 and v22 != 0".into()));
    }
    let [x, y, z] = pt_new.x;
    let [p1, p2, p3] = pt_new.p;
    Ok(PhasePoint {
        x: [
            x + a2 * p3 / (2.0 * v12),
            y - a1 * p3 / (2.0 * v22),
            z + (a2 * v22 * p1 - a1 * v12 * p2) / (2.0 * v12 * v22),
        ],
        p: [p1, p2, p3],
    })
}

/// |H(sec8_map(pt)) - K(pt)| where K is the decoupled-oscillator target
/// form (P1^2 + P2^2 + lambda P3^2)/2 + v12 X^2 + v22 Y^2.
pub fn sec8_residual(a1: f64, a2: f64, v12: f64, v22: f64, pt_new: &PhasePoint) -> Result<f64> {
    let sys = MagneticSystem::case_i(
        ScalarFunction1D::monomial(a1, 1),
        ScalarFunction1D::monomial(a2, 1),
        ScalarFunction1D::monomial(v12, 2),
        ScalarFunction1D::monomial(v22, 2),
    );
    let old = sec8_map(a1, a2, v12, v22, pt_new)?;
    let h = sys.hamiltonian(&old)?;
    let lambda = sec8_p3sq_coefficient(a1, a2, v12, v22);
    let [x, y, _] = pt_new.x;
    let [p1, p2, p3] = pt_new.p;
    let k = 0.5 * (p1 * p1 + p2 * p2 + lambda * p3 * p3) + v12 * x * x + v22 * y * y;
    Ok((h - k).abs())
}

/// Max-entry residual of J^T Omega J - Omega for the numerical Jacobian of
/// a phase-space map at pt.  Central differences are exact through quadratic
/// terms, so the step can be kept large to hold cancellation error below
/// 1e-12 on unit-scale maps.
pub fn symplectic_residual(
    map: impl Fn(&PhasePoint) -> Result<PhasePoint>,
    pt: &PhasePoint,
) -> Result<f64> {
    let h = 1.0e-2;
    let mut jac = [[0.0_f64; 6]; 6]; // jac[i][j] = d out_i / d in_j
    let base = pt.to_array();
    for j in 0..6 {
        let mut up = base;
        let mut dn = base;
        up[j] += h;
        dn[j] -= h;
        let fu = map(&PhasePoint::from_array(&up))?.to_array();
        let fd = map(&PhasePoint::from_array(&dn))?.to_array();
        for i in 0..6 {
            jac[i][j] = (fu[i] - fd[i]) / (2.0 * h);
        }
    }
    // Omega in (x, p) block order: Omega = [[0, I], [-I, 0]]
    let omega = |i: usize, j: usize| -> f64 {
        if j == i + 3 {
            1.0
        } else if i == j + 3 {
            -1.0
        } else {
            0.0
        }
    };
    let mut worst = 0.0_f64;
    for a in 0..6 {
        for b in 0..6 {
            let mut v = 0.0;
            for i in 0..6 {
                for j in 0..6 {
                    v += jac[i][a] * omega(i, j) * jac[j][b];
                }
            }
            worst = worst.max((v - omega(a, b)).abs());
        }
    }
    Ok(worst)
}
