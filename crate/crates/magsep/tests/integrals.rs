//! Oracle tests for momentum polynomials, Poisson brackets, the quadratic
//! ansatz residuals and dependence fitting.

use approx::assert_abs_diff_eq;
use magsep::catalog;
use magsep::depfit::dependence_fit;
use magsep::field::CoeffField;
use magsep::gauge::GaugePotential;
use magsep::poly::{bracket_residual, poisson, poisson_poly, CanonicalPolynomial, MomentumPolynomial};
use magsep::quadspec::{compatibility_residuals, determining_residuals, QuadraticIntegralSpec};
use magsep::sample::SampleBox;
use magsep::scalar::ScalarFunction1D;
use magsep::system::{MagneticSystem, PhasePoint};
use std::collections::BTreeMap;

fn free_system() -> MagneticSystem {
    MagneticSystem::new(GaugePotential::zero(), CoeffField::zero(), None)
}

fn defaults(id: &str) -> catalog::Instantiated {
    catalog::instantiate(id, &BTreeMap::new()).unwrap()
}

/// The conserved canonical p3 as a covariant polynomial.
fn canonical_p3(sys: &MagneticSystem) -> MomentumPolynomial {
    MomentumPolynomial::from_canonical(&CanonicalPolynomial::momentum(2), &sys.gauge)
}

#[test]
fn poisson_canonical_pairs() {
    let sys = free_system();
    let x1 = MomentumPolynomial::constant_field(CoeffField::coordinate(0));
    let p1 = MomentumPolynomial::momentum(0);
    let pt = PhasePoint::new([0.4, -1.0, 2.0], [0.3, 0.7, -0.2]);
    assert_abs_diff_eq!(poisson(&x1, &p1, &sys, &pt).unwrap(), 1.0);

    // {l3, p1} = p2
    let l3 = MomentumPolynomial::angular(2);
    let pt = PhasePoint::new([1.0, 2.0, 3.0], [0.0, 7.0, 0.0]);
    assert_abs_diff_eq!(poisson(&l3, &p1, &sys, &pt).unwrap(), 7.0);
}

#[test]
fn poisson_antisymmetry_and_symbolic_agreement() {
    let inst = defaults("case1.a");
    let sys = &inst.system;
    let f = &inst.integrals[2].poly;
    let g = MomentumPolynomial::hamiltonian(sys);
    let sym = poisson_poly(f, &g, sys);
    let mut rng = SampleBox::rng(3);
    for _ in 0..50 {
        let pt = inst.sample_box.sample(&mut rng);
        let fg = poisson(f, &g, sys, &pt).unwrap();
        let gf = poisson(&g, f, sys, &pt).unwrap();
        assert_abs_diff_eq!(fg, -gf, epsilon = 1.0e-12 * (1.0 + fg.abs()));
        let sv = sym.evaluate(sys, &pt).unwrap();
        assert_abs_diff_eq!(fg, sv, epsilon = 1.0e-10 * (1.0 + fg.abs()));
    }
}

#[test]
fn evaluate_first_class_cartesian_integral() {
    // u2 = x1, u1 = V1 = V2 = 0: X1 = p1^2 - 2 u2 p3 (canonical p3)
    let u2 = ScalarFunction1D::monomial(1.0, 1);
    let sys = MagneticSystem::case_i(
        ScalarFunction1D::zero(),
        u2,
        ScalarFunction1D::zero(),
        ScalarFunction1D::zero(),
    );
    let mut spec = QuadraticIntegralSpec::default();
    spec.gamma[0][0] = 1.0;
    spec.s[2] = CoeffField::coordinate(0).scale(-2.0);
    spec.m = CoeffField::coordinate(0)
        .mul(&CoeffField::coordinate(0))
        .scale(-2.0);
    let x1 = spec.to_polynomial();
    let pt = PhasePoint::new([2.0, 0.0, 0.0], [1.0, 0.0, 3.0]);
    assert_abs_diff_eq!(x1.evaluate(&sys, &pt).unwrap(), -11.0);
}

#[test]
fn evaluate_second_class_momentum_integral() {
    // The conserved covariant form is X2 = p3^A + u2 = canonical p3 (with
    // A3 = -u2, the often-printed "p3^A - u2" would be p3 - 2 u2, which is
    // not constant along the flow).  At u2 = x1^2, x1 = 1 and p3^A = 3 the
    // canonical p3 is 4.
    let inst = catalog::instantiate(
        "case2.generic",
        &BTreeMap::from([("a".to_string(), 1.0), ("b".to_string(), 0.0), ("c".to_string(), 0.0)]),
    )
    .unwrap();
    let sys = &inst.system;
    let pt = PhasePoint::new([1.0, 0.0, 0.0], [0.0, 0.0, 4.0]);
    assert_eq!(sys.covariant_momentum(&pt).unwrap()[2], 3.0);
    let x2 = &inst.integrals[1];
    assert_eq!(x2.name, "X2");
    assert_abs_diff_eq!(x2.poly.evaluate(sys, &pt).unwrap(), 4.0);
}

#[test]
fn gauge_covariant_evaluation() {
    let inst = defaults("case1.a");
    let sys = &inst.system;
    let chi = [
        ScalarFunction1D::zero(),
        ScalarFunction1D::monomial(1.0, 2),
        ScalarFunction1D::zero(),
    ];
    let sys2 = sys.gauge_transform(&chi);
    let grad_chi = |x: &[f64; 3]| [0.0, 2.0 * x[1], 0.0];
    let mut rng = SampleBox::rng(9);
    for _ in 0..50 {
        let pt = inst.sample_box.sample(&mut rng);
        let g = grad_chi(&pt.x);
        let shifted = PhasePoint::new(pt.x, [pt.p[0] - g[0], pt.p[1] - g[1], pt.p[2] - g[2]]);
        for integral in &inst.integrals {
            let v0 = integral.poly.evaluate(sys, &pt).unwrap();
            let v1 = integral.poly.evaluate(&sys2, &shifted).unwrap();
            assert!((v0 - v1).abs() <= 1.0e-12 * (1.0 + v0.abs()), "{} {v0} {v1}", integral.name);
        }
    }
}

#[test]
fn bracket_residual_examples() {
    let inst = defaults("case1.a");
    let sys = &inst.system;
    let points = inst.sample_box.sample_admissible(sys, 42, 100);
    let x3 = &inst.integrals[2].poly;
    assert!(bracket_residual(sys, x3, &points).unwrap() <= 1.0e-10);

    let h = MomentumPolynomial::hamiltonian(sys);
    assert_eq!(bracket_residual(sys, &h, &points).unwrap(), 0.0);

    // perturbing the potential parameter w must break conservation
    let pert = catalog::instantiate_perturbed("case1.a", &BTreeMap::new(), "w", 0.1).unwrap();
    assert!(bracket_residual(&pert.system, x3, &points).unwrap() > 1.0e-3);
}

#[test]
fn leading_from_constants_examples() {
    // pure p1 p2 term
    let mut spec = QuadraticIntegralSpec::default();
    spec.gamma[0][1] = 1.0;
    let (h, n) = spec.leading_from_constants(&[0.3, -0.8, 0.5]);
    assert_eq!(h, [0.0, 0.0, 0.0]);
    assert_eq!(n, [0.0, 0.0, 1.0]);

    // l3^2 = (x1 p2 - x2 p1)^2
    let mut spec = QuadraticIntegralSpec::default();
    spec.alpha[2][2] = 1.0;
    let (h, n) = spec.leading_from_constants(&[1.0, 2.0, 0.7]);
    assert_eq!(h[0], 4.0);
    assert_eq!(h[1], 1.0);
    assert_eq!(n[2], -4.0);

    // p1 l2 = p1 (x3 p1 - x1 p3): h1 = x3
    let mut spec = QuadraticIntegralSpec::default();
    spec.beta[0][1] = 1.0;
    let (h, _) = spec.leading_from_constants(&[0.0, 0.0, 5.0]);
    assert_eq!(h[0], 5.0);
}

#[test]
fn spec_polynomial_round_trip() {
    let inst = defaults("case1.b");
    let spec = inst.integrals[2].spec.as_ref().unwrap();
    let poly = spec.to_polynomial();
    let back = QuadraticIntegralSpec::from_polynomial(&poly).unwrap();
    let poly2 = back.to_polynomial();
    let mut rng = SampleBox::rng(21);
    for _ in 0..30 {
        let pt = inst.sample_box.sample(&mut rng);
        if inst.system.check_admissible(&pt.x).is_err() {
            continue;
        }
        let v0 = poly.evaluate(&inst.system, &pt).unwrap();
        let v1 = poly2.evaluate(&inst.system, &pt).unwrap();
        assert!((v0 - v1).abs() <= 1.0e-9 * (1.0 + v0.abs()));
    }
}

#[test]
fn determining_residuals_examples() {
    // free system, pure gamma12, no lower-order data: everything vanishes
    let sys = free_system();
    let mut spec = QuadraticIntegralSpec::default();
    spec.gamma[0][1] = 1.0;
    for r in determining_residuals(&sys, &spec, &[0.4, 0.9, -1.1]).unwrap() {
        assert_eq!(r.raw, 0.0, "{}", r.name);
    }

    // shipped second-class integral data
    let inst = defaults("case2.a");
    let spec = inst.integrals[2].spec.as_ref().unwrap();
    for r in determining_residuals(&inst.system, spec, &[0.4, -0.7, 1.2]).unwrap() {
        assert!(r.normalized.abs() <= 1.0e-11, "{}: {}", r.name, r.normalized);
    }

    // adding x1 to m bumps the first first-order equation by exactly 1
    let inst = defaults("case1.generic");
    let mut spec = inst.integrals[0].spec.clone().unwrap();
    spec.m = spec.m.add(&CoeffField::coordinate(0));
    let rs = determining_residuals(&inst.system, &spec, &[0.6, -0.3, 0.8]).unwrap();
    let r = rs.iter().find(|r| r.name == "1ord-1").unwrap();
    assert_abs_diff_eq!(r.raw, 1.0, epsilon = 1.0e-12);
}

#[test]
fn compatibility_residuals_examples() {
    // low-degree polynomial data in a field-free system: identities vanish
    let sys = free_system();
    let mut spec = QuadraticIntegralSpec::default();
    spec.gamma[0][1] = 1.0;
    spec.s[0] = CoeffField::coordinate(1); // degree-1 s
    for r in compatibility_residuals(&sys, &spec, &[0.2, 0.5, -0.7]).unwrap() {
        assert_eq!(r.raw, 0.0, "{}", r.name);
    }

    let inst = defaults("case1.d");
    let spec = inst.integrals[2].spec.as_ref().unwrap();
    let points = inst.sample_box.sample_admissible(&inst.system, 17, 50);
    for pt in &points {
        for r in compatibility_residuals(&inst.system, spec, &pt.x).unwrap() {
            assert!(r.normalized.abs() <= 1.0e-11, "{}: {}", r.name, r.normalized);
        }
    }
}

#[test]
fn dependence_fit_examples() {
    let inst = defaults("case1.a");
    let sys = &inst.system;
    let points = inst.sample_box.sample_admissible(sys, 4, 40);

    // exact linear combination
    let h = MomentumPolynomial::hamiltonian(sys);
    let p3 = canonical_p3(sys);
    let target = h.scale(2.0).add(&p3.scale(3.0));
    let (c, res) = dependence_fit(&target, &[h.clone(), p3.clone()], sys, &points).unwrap();
    assert_abs_diff_eq!(c[0], 2.0, epsilon = 1.0e-9);
    assert_abs_diff_eq!(c[1], 3.0, epsilon = 1.0e-9);
    assert!(res <= 1.0e-10);

    // {X3, p3} lies in span{1, p3, X1, X2, p3^2}
    let x3 = &inst.integrals[2].poly;
    let target = poisson_poly(x3, &p3, sys);
    let basis = vec![
        MomentumPolynomial::constant(1.0),
        p3.clone(),
        inst.integrals[0].poly.clone(),
        inst.integrals[1].poly.clone(),
        p3.mul(&p3),
    ];
    let (_, res) = dependence_fit(&target, &basis, sys, &points).unwrap();
    assert!(res <= 1.0e-10, "residual {res}");

    // an independent integral does not fit (note X2 would: with u3 = 0 it
    // degenerates to the canonical p3 itself)
    let inst2 = defaults("case2.a");
    let points2 = inst2.sample_box.sample_admissible(&inst2.system, 4, 40);
    let h2 = MomentumPolynomial::hamiltonian(&inst2.system);
    let p3_2 = canonical_p3(&inst2.system);
    let (_, res) = dependence_fit(
        &inst2.integrals[2].poly,
        &[h2, p3_2],
        &inst2.system,
        &points2,
    )
    .unwrap();
    assert!(res > 0.1, "residual {res}");
}

#[test]
fn dependence_fit_rejects_thin_samples() {
    let inst = defaults("case1.generic");
    let sys = &inst.system;
    let points = inst.sample_box.sample_admissible(sys, 4, 3);
    let h = MomentumPolynomial::hamiltonian(sys);
    let basis = vec![h.clone(), canonical_p3(sys)];
    assert!(dependence_fit(&h, &basis, sys, &points).is_err());
}
