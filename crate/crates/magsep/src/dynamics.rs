//! Numerical flow of Hamilton's equations (adaptive Dormand–Prince 5(4)),
//! conservation drift, functional-independence rank, and orbit recurrence.
//!
//! The integrator is deliberately *not* symplectic: conservation drift is
//! the measurement here, and an energy-biased scheme would mask defects.

use crate::error::{Error, Result};
use crate::poly::MomentumPolynomial;
use crate::system::{MagneticSystem, PhasePoint};
use nalgebra::DMatrix;

/// Butcher tableau of the Dormand–Prince 5(4) pair (the c nodes are not
/// needed: the right-hand side is autonomous).
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// 5th-order solution weights (same as the last A row; FSAL pair).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Embedded 4th-order weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// An integrated orbit with step statistics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<(f64, PhasePoint)>,
    pub accepted: usize,
    pub rejected: usize,
    pub max_error_estimate: f64,
    /// Set when integration stopped early at the singular-set guard.
    pub truncated: Option<String>,
}

fn rhs(sys: &MagneticSystem, y: &[f64; 6]) -> Result<[f64; 6]> {
    let pt = PhasePoint::from_array(y);
    let g = sys.hamiltonian_gradient(&pt)?;
    Ok([g[3], g[4], g[5], -g[0], -g[1], -g[2]])
}

struct Step {
    t0: f64,
    h: f64,
    y0: [f64; 6],
    y1: [f64; 6],
    k: [[f64; 6]; 7],
}

impl Step {
    /// Cubic Hermite interpolation inside the step (ample for sampling:
    /// step sizes at the working tolerances keep the interpolation error
    /// far below the drift thresholds).
    fn interpolate(&self, t: f64) -> [f64; 6] {
        let s = (t - self.t0) / self.h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let mut y = [0.0; 6];
        for i in 0..6 {
            y[i] = h00 * self.y0[i]
                + h10 * self.h * self.k[0][i]
                + h01 * self.y1[i]
                + h11 * self.h * self.k[6][i];
        }
        y
    }
}

fn dp_step(
    sys: &MagneticSystem,
    t0: f64,
    y0: &[f64; 6],
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<(Step, f64)> {
    let mut k = [[0.0; 6]; 7];
    k[0] = rhs(sys, y0)?;
    for stage in 1..7 {
        let mut y = *y0;
        for i in 0..6 {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(stage) {
                acc += A[stage][j] * kj[i];
            }
            y[i] += h * acc;
        }
        k[stage] = rhs(sys, &y)?;
    }
    let mut y1 = *y0;
    let mut y1_low = *y0;
    for i in 0..6 {
        let mut s5 = 0.0;
        let mut s4 = 0.0;
        for j in 0..7 {
            s5 += B5[j] * k[j][i];
            s4 += B4[j] * k[j][i];
        }
        y1[i] += h * s5;
        y1_low[i] += h * s4;
    }
    // normalized error: err <= 1 means the step meets the tolerances
    let err: f64 = ((0..6)
        .map(|i| {
            let sc = abs_tol + rel_tol * y0[i].abs().max(y1[i].abs());
            let e = (y1[i] - y1_low[i]) / sc;
            e * e
        })
        .sum::<f64>()
        / 6.0)
        .sqrt();
    Ok((
        Step {
            t0,
            h,
            y0: *y0,
            y1,
            k,
        },
        err,
    ))
}

fn integrate(
    sys: &MagneticSystem,
    pt0: &PhasePoint,
    t_end: f64,
    rel_tol: f64,
    abs_tol: f64,
    mut on_step: impl FnMut(&Step),
) -> Result<(usize, usize, f64, Option<String>)> {
    sys.check_admissible(&pt0.x)?;
    let dir = if t_end >= 0.0 { 1.0 } else { -1.0 };
    let t_final = t_end;
    let mut t = 0.0;
    let mut y = pt0.to_array();
    let mut h = dir * 1.0e-3 * (1.0 + t_end.abs()).min(1.0);
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut max_err = 0.0_f64;
    let mut truncated = None;

    while (t_final - t) * dir > 1.0e-14 * (1.0 + t_final.abs()) {
        if h.abs() > (t_final - t).abs() {
            h = t_final - t;
        }
        if h.abs() < 1.0e-14 * (1.0 + t.abs()) {
            return Err(Error::Stiffness { t });
        }
        let step = match dp_step(sys, t, &y, h, rel_tol, abs_tol) {
            Ok(v) => v,
            Err(Error::SingularPoint { coord, value }) => {
                truncated = Some(format!(
                    "halted at t = {t}: trajectory approached the singular set \
                     (x{coord} = {value})"
                ));
                break;
            }
            Err(e) => return Err(e),
        };
        let (step, err) = step;
        if err <= 1.0 {
            // accepted
            t += h;
            y = step.y1;
            accepted += 1;
            max_err = max_err.max(err);
            if let Err(Error::SingularPoint { coord, value }) = sys.check_admissible(&[y[0], y[1], y[2]]) {
                truncated = Some(format!(
                    "halted at t = {t}: trajectory entered the singular guard band \
                     (x{coord} = {value})"
                ));
                on_step(&step);
                break;
            }
            on_step(&step);
        } else {
            rejected += 1;
        }
        // standard fifth-order step-size controller
        let fac = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= fac.clamp(0.2, 5.0);
    }
    Ok((accepted, rejected, max_err, truncated))
}

/// Integrate Hamilton's equations from `pt0` to `t_end` (negative values
/// integrate backward in time).  Samples are recorded at every accepted
/// step.
pub fn flow(
    sys: &MagneticSystem,
    pt0: &PhasePoint,
    t_end: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Trajectory> {
    check_tols(rel_tol, abs_tol)?;
    let mut samples = vec![(0.0, *pt0)];
    let (accepted, rejected, max_err, truncated) =
        integrate(sys, pt0, t_end, rel_tol, abs_tol, |step| {
            samples.push((step.t0 + step.h, PhasePoint::from_array(&step.y1)));
        })?;
    Ok(Trajectory {
        samples,
        accepted,
        rejected,
        max_error_estimate: max_err,
        truncated,
    })
}

/// Integrate and emit dense output at the requested sample times (which
/// must be sorted and lie in [0, t_end] or [t_end, 0]).
pub fn flow_sampled(
    sys: &MagneticSystem,
    pt0: &PhasePoint,
    times: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Trajectory> {
    check_tols(rel_tol, abs_tol)?;
    let t_end = times.last().copied().unwrap_or(0.0);
    let mut samples: Vec<(f64, PhasePoint)> = Vec::with_capacity(times.len());
    let mut next = 0usize;
    let dir = if t_end >= 0.0 { 1.0 } else { -1.0 };
    if let Some(&t0) = times.first() {
        if t0 == 0.0 {
            samples.push((0.0, *pt0));
            next = 1;
        }
    }
    let (accepted, rejected, max_err, truncated) =
        integrate(sys, pt0, t_end, rel_tol, abs_tol, |step| {
            let t1 = step.t0 + step.h;
            while next < times.len() && (times[next] - t1) * dir <= 1.0e-12 * (1.0 + t1.abs()) {
                let y = step.interpolate(times[next]);
                samples.push((times[next], PhasePoint::from_array(&y)));
                next += 1;
            }
        })?;
    Ok(Trajectory {
        samples,
        accepted,
        rejected,
        max_error_estimate: max_err,
        truncated,
    })
}

fn check_tols(rel_tol: f64, abs_tol: f64) -> Result<()> {
    for (name, v) in [("rel-tol", rel_tol), ("abs-tol", abs_tol)] {
        if !(1.0e-14..=1.0e-3).contains(&v) {
            return Err(Error::Structural(format!(
                "{name} = {v} outside the supported range [1e-14, 1e-3]"
            )));
        }
    }
    Ok(())
}

/// Fixed-step fifth-order integration (test hook for convergence-order
/// measurements; the adaptive path is the production one).
pub fn flow_fixed_step(
    sys: &MagneticSystem,
    pt0: &PhasePoint,
    t_end: f64,
    steps: usize,
) -> Result<PhasePoint> {
    let h = t_end / steps as f64;
    let mut y = pt0.to_array();
    let mut t = 0.0;
    for _ in 0..steps {
        let (step, _) = dp_step(sys, t, &y, h, 1.0e-3, 1.0e-3)?;
        y = step.y1;
        t += h;
    }
    Ok(PhasePoint::from_array(&y))
}

/// Max over samples of |I(pt) - I(pt0)| / (1 + |I(pt0)|).
pub fn drift(traj: &Trajectory, integral: &MomentumPolynomial, sys: &MagneticSystem) -> Result<f64> {
    let (_, pt0) = traj
        .samples
        .first()
        .ok_or_else(|| Error::DegenerateSample("empty trajectory".into()))?;
    let i0 = integral.evaluate(sys, pt0)?;
    let mut worst = 0.0_f64;
    for (_, pt) in &traj.samples {
        let v = integral.evaluate(sys, pt)?;
        worst = worst.max((v - i0).abs() / (1.0 + i0.abs()));
    }
    Ok(worst)
}

/// Functional-independence rank of the integral set: at each sample point
/// build the 6-column Jacobian (one row-normalized gradient per integral)
/// and count singular values above 1e-6 times the largest; the result is
/// the generic (maximal) pointwise rank across the sample.  Pointwise rank
/// is what detects functional dependence: a relation F(I_1, ..., I_n) = 0
/// ties the gradients together with coefficients that vary from point to
/// point, which any matrix pooling several points would miss.
pub fn independence_rank(
    integrals: &[&MomentumPolynomial],
    sys: &MagneticSystem,
    points: &[PhasePoint],
) -> Result<usize> {
    let admissible: Vec<&PhasePoint> = points
        .iter()
        .filter(|pt| sys.check_admissible(&pt.x).is_ok())
        .collect();
    if admissible.len() < 5 {
        return Err(Error::DegenerateSample(format!(
            "need at least 5 admissible points, got {}",
            admissible.len()
        )));
    }
    let rows = integrals.len();
    let mut rank = 0;
    for pt in &admissible {
        let mut m = DMatrix::<f64>::zeros(rows, 6);
        for (r, integral) in integrals.iter().enumerate() {
            let g = integral.gradient(sys, pt)?;
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            for (c, v) in g.iter().enumerate() {
                m[(r, c)] = v / norm;
            }
        }
        let sv = m.svd(false, false).singular_values;
        let smax = sv.max();
        if smax == 0.0 {
            continue;
        }
        rank = rank.max(sv.iter().filter(|&&s| s > 1.0e-6 * smax).count());
    }
    Ok(rank)
}

/// Minimum phase-space distance of the trajectory back to `pt0` after the
/// transient, with the time at which it is attained.
pub fn recurrence(traj: &Trajectory, pt0: &PhasePoint, transient: f64) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    for (t, pt) in &traj.samples {
        if t.abs() <= transient {
            continue;
        }
        let d = pt.dist(pt0);
        if d < best.0 {
            best = (d, *t);
        }
    }
    best
}
