//! Linear-dependence analysis of conserved quantities over a point sample.

use crate::error::{Error, Result};
use crate::poly::MomentumPolynomial;
use crate::system::{MagneticSystem, PhasePoint};
use nalgebra::{DMatrix, DVector};

/// Normalized residual below which a least-squares fit certifies linear
/// dependence.
pub const DEPENDENCE_TOL: f64 = 1.0e-8;

/// Least-squares coefficients c minimizing sum over points of
/// (target - sum c_k basis_k)^2, plus the normalized residual.
pub fn dependence_fit(
    target: &MomentumPolynomial,
    basis: &[MomentumPolynomial],
    sys: &MagneticSystem,
    points: &[PhasePoint],
) -> Result<(Vec<f64>, f64)> {
    if points.len() < 2 * basis.len() {
        return Err(Error::DegenerateSample(format!(
            "need at least {} points for a basis of {}, got {}",
            2 * basis.len(),
            basis.len(),
            points.len()
        )));
    }
    let m = points.len();
    let n = basis.len();
    let mut a = DMatrix::<f64>::zeros(m, n);
    let mut b = DVector::<f64>::zeros(m);
    for (r, pt) in points.iter().enumerate() {
        b[r] = target.evaluate(sys, pt)?;
        for (c, bk) in basis.iter().enumerate() {
            a[(r, c)] = bk.evaluate(sys, pt)?;
        }
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1.0e-10 * smax.max(1.0))
        .count();
    if rank < n {
        return Err(Error::DegenerateSample(format!(
            "design matrix rank {rank} < basis size {n}; sample more points or \
             remove dependent basis members"
        )));
    }
    let coeff = svd
        .solve(&b, 1.0e-12 * smax.max(1.0))
        .map_err(|e| Error::DegenerateSample(e.to_string()))?;
    let misfit = (&a * &coeff - &b).norm();
    let residual = misfit / (1.0 + b.norm());
    Ok((coeff.iter().copied().collect(), residual))
}
