//! Oracle tests for the field algebra, gauges and Hamiltonian evaluation.

use approx::{assert_abs_diff_eq, assert_relative_eq};
use magsep::field::CoeffField;
use magsep::gauge::GaugePotential;
use magsep::sample::SampleBox;
use magsep::scalar::{Atom, Domain, ScalarFunction1D};
use magsep::system::{MagneticSystem, PhasePoint};

fn case1a(a: f64, b: f64, c: f64, w: f64) -> MagneticSystem {
    MagneticSystem::case_i(
        ScalarFunction1D::exponential(a / b, b),
        ScalarFunction1D::monomial(c, 1),
        ScalarFunction1D::monomial(0.5 * c * c, 2),
        ScalarFunction1D::exponential(a * w, b),
    )
}

/// Uniform field B = (0, gamma, 0) with V(x2) = v x2^2.
fn sec3(gamma: f64, v: f64) -> MagneticSystem {
    MagneticSystem::case_i(
        ScalarFunction1D::zero(),
        ScalarFunction1D::monomial(gamma, 1),
        ScalarFunction1D::monomial(0.5 * gamma * gamma, 2),
        ScalarFunction1D::monomial(v, 2),
    )
}

#[test]
fn scalar_derivatives_are_exact() {
    // d/dx [x^3 e^{2x} ln^2|x|] against central differences
    let f = ScalarFunction1D::from_atoms(vec![Atom::new(1.0, 3.0, 2.0, 2)]);
    let df = f.derivative();
    for &x in &[0.3, 0.9, 1.7, -0.6, -1.4] {
        let h = 1.0e-6_f64;
        let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
        assert_relative_eq!(df.eval(x), fd, max_relative = 1.0e-7);
    }
    // fourth derivative of x^4 is 24 everywhere
    let g = ScalarFunction1D::monomial(1.0, 4);
    assert_abs_diff_eq!(g.nth_derivative(4).eval(0.37), 24.0);
    // derivative of ln|x| is 1/x on both branches
    let l = ScalarFunction1D::log(1.0);
    assert_relative_eq!(l.derivative().eval(-2.0), -0.5, max_relative = 1.0e-14);
}

#[test]
fn scalar_domains() {
    assert_eq!(ScalarFunction1D::monomial(1.0, 2).domain(), Domain::All);
    assert_eq!(ScalarFunction1D::monomial(1.0, -2).domain(), Domain::Nonzero);
    assert_eq!(ScalarFunction1D::log(3.0).domain(), Domain::Nonzero);
    assert_eq!(ScalarFunction1D::power(1.0, 0.5).domain(), Domain::Positive);
    // cancellation drops the restriction
    let f = ScalarFunction1D::log(1.0).sub(&ScalarFunction1D::log(1.0));
    assert!(f.is_zero());
    assert_eq!(f.domain(), Domain::All);
}

#[test]
fn field_partials_match_finite_differences() {
    let f = CoeffField::from_scalar(0, &ScalarFunction1D::exponential(1.5, -0.7))
        .mul(&CoeffField::from_scalar(1, &ScalarFunction1D::monomial(2.0, 3)))
        .add(&CoeffField::from_scalar(2, &ScalarFunction1D::log(1.0)));
    let x = [0.8, -1.1, 0.6];
    for j in 0..3 {
        let h = 1.0e-6;
        let mut xp = x;
        let mut xm = x;
        xp[j] += h;
        xm[j] -= h;
        let fd = (f.eval(&xp) - f.eval(&xm)) / (2.0 * h);
        assert_relative_eq!(f.partial(j).eval(&x), fd, max_relative = 1.0e-6);
    }
}

#[test]
fn curl_examples() {
    // A = (0, 0, -gamma x1), gamma = 2 -> B = (0, 2, 0)
    let a3 = CoeffField::from_scalar(0, &ScalarFunction1D::monomial(-2.0, 1));
    let g = GaugePotential::from_fields([CoeffField::zero(), CoeffField::zero(), a3]);
    assert_eq!(g.curl(&[0.3, -0.4, 1.0]), [0.0, 2.0, 0.0]);

    // constant A has zero curl
    let c = GaugePotential::from_fields([
        CoeffField::constant(1.0),
        CoeffField::constant(-2.0),
        CoeffField::constant(3.0),
    ]);
    assert_eq!(c.curl(&[1.0, 2.0, 3.0]), [0.0, 0.0, 0.0]);

    // first-class gauge: B = (u1'(x2), u2'(x1), 0)
    let g = GaugePotential::case_i(
        &ScalarFunction1D::monomial(1.0, 2),
        &ScalarFunction1D::monomial(1.0, 3),
    );
    assert_eq!(g.curl(&[1.0, 2.0, 0.5]), [4.0, 3.0, 0.0]);
}

#[test]
fn covariant_momentum_examples() {
    let free = MagneticSystem::new(GaugePotential::zero(), CoeffField::zero(), None);
    let pt = PhasePoint::new([0.0, 0.0, 0.0], [1.0, 2.0, 3.0]);
    assert_eq!(free.covariant_momentum(&pt).unwrap(), [1.0, 2.0, 3.0]);

    // first class, u1 = x2, u2 = x1: A3 = x2 - x1
    let sys = MagneticSystem::case_i(
        ScalarFunction1D::monomial(1.0, 1),
        ScalarFunction1D::monomial(1.0, 1),
        ScalarFunction1D::zero(),
        ScalarFunction1D::zero(),
    );
    let pt = PhasePoint::new([1.0, 2.0, 0.0], [0.0, 0.0, 1.0]);
    assert_eq!(sys.covariant_momentum(&pt).unwrap(), [0.0, 0.0, 2.0]);

    // second class, u3 = x1^2, u2 = x1: A = (0, x1^2, -x1)
    let sys = MagneticSystem::case_ii(
        ScalarFunction1D::monomial(1.0, 1),
        ScalarFunction1D::monomial(1.0, 2),
        ScalarFunction1D::zero(),
    );
    let pt = PhasePoint::new([2.0, 0.0, 0.0], [1.0, 1.0, 1.0]);
    assert_eq!(sys.covariant_momentum(&pt).unwrap(), [1.0, 5.0, -1.0]);
}

#[test]
fn hamiltonian_examples() {
    let free = MagneticSystem::new(GaugePotential::zero(), CoeffField::zero(), None);
    let pt = PhasePoint::new([0.0, 0.0, 0.0], [1.0, 2.0, 2.0]);
    assert_eq!(free.hamiltonian(&pt).unwrap(), 4.5);

    // uniform-field system, gamma = 2, V(x2) = 0:
    // H = |p|^2/2 - gamma x1 p3 + gamma^2 x1^2 / 2
    let sys = sec3(2.0, 0.0);
    let pt = PhasePoint::new([2.0, 1.0, 1.0], [2.0, 0.0, 4.0]);
    assert_abs_diff_eq!(sys.hamiltonian(&pt).unwrap(), 2.0, epsilon = 1.0e-14);
}

#[test]
fn hamiltonian_routes_agree() {
    let sys = case1a(1.0, 1.0, 2.0, 1.0);
    let mut rng = SampleBox::rng(11);
    let bx = SampleBox::plain();
    for _ in 0..100 {
        let pt = bx.sample(&mut rng);
        let h1 = sys.hamiltonian(&pt).unwrap();
        let h2 = sys.hamiltonian_gauge_form(&pt).unwrap();
        assert!((h1 - h2).abs() <= 1.0e-12 * (1.0 + h1.abs()), "{h1} vs {h2}");
    }
}

#[test]
fn hamiltonian_gradient_examples() {
    let free = MagneticSystem::new(GaugePotential::zero(), CoeffField::zero(), None);
    let pt = PhasePoint::new([0.3, 0.1, -0.2], [1.0, 0.0, 0.0]);
    assert_eq!(
        free.hamiltonian_gradient(&pt).unwrap(),
        [0.0, 0.0, 0.0, 1.0, 0.0, 0.0]
    );

    // dH/dx1 = gamma^2 x1 - gamma p3 = 1 at gamma=1, x1=1, p3=0
    let sys = sec3(1.0, 0.0);
    let pt = PhasePoint::new([1.0, 0.0, 0.0], [0.0, 0.0, 0.0]);
    let g = sys.hamiltonian_gradient(&pt).unwrap();
    assert_abs_diff_eq!(g[0], 1.0, epsilon = 1.0e-14);
}

#[test]
fn hamiltonian_gradient_matches_finite_differences() {
    let sys = case1a(1.0, 1.0, 2.0, 1.0);
    let pt = PhasePoint::new([0.7, -0.9, 0.4], [0.5, -0.3, 1.1]);
    let g = sys.hamiltonian_gradient(&pt).unwrap();
    let h = f64::EPSILON.powf(1.0 / 3.0);
    let base = pt.to_array();
    for j in 0..6 {
        let mut up = base;
        let mut dn = base;
        up[j] += h;
        dn[j] -= h;
        let fu = sys.hamiltonian(&PhasePoint::from_array(&up)).unwrap();
        let fd = sys.hamiltonian(&PhasePoint::from_array(&dn)).unwrap();
        let fdg = (fu - fd) / (2.0 * h);
        assert!(
            (g[j] - fdg).abs() <= 1.0e-6 * (1.0 + g[j].abs()),
            "component {j}: {} vs {}",
            g[j],
            fdg
        );
    }
}

#[test]
fn gauge_transform_keeps_b_and_w() {
    let sys = sec3(2.0, 1.0);
    // chi = 5 x1 shifts only A1
    let chi = [
        ScalarFunction1D::monomial(5.0, 1),
        ScalarFunction1D::zero(),
        ScalarFunction1D::zero(),
    ];
    let sys2 = sys.gauge_transform(&chi);
    assert_eq!(sys2.gauge.a[0], CoeffField::constant(5.0));
    let x = [0.4, -0.8, 1.3];
    assert_eq!(sys2.b(&x), sys.b(&x));

    // W is invariant for a generic polynomial chi too
    let chi = [
        ScalarFunction1D::monomial(1.0, 2),
        ScalarFunction1D::monomial(-3.0, 3),
        ScalarFunction1D::monomial(0.5, 1),
    ];
    let sys3 = sys.gauge_transform(&chi);
    let mut rng = SampleBox::rng(5);
    let bx = SampleBox::plain();
    for _ in 0..100 {
        let pt = bx.sample(&mut rng);
        let w0 = sys.w(&pt.x);
        let w1 = sys3.w(&pt.x);
        assert!((w0 - w1).abs() <= 1.0e-12 * (1.0 + w0.abs()));
    }
}

#[test]
fn w_matches_v_minus_half_a_squared() {
    let sys = case1a(1.0, 1.0, 2.0, 1.0);
    let mut rng = SampleBox::rng(77);
    let bx = SampleBox::plain();
    for _ in 0..1000 {
        let pt = bx.sample(&mut rng);
        let a = sys.gauge.eval(&pt.x);
        let expect =
            sys.scalar_v.eval(&pt.x) - 0.5 * (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
        let got = sys.w(&pt.x);
        assert!((got - expect).abs() <= 1.0e-12 * (1.0 + expect.abs()));
    }
}

#[test]
fn singular_guard_rejects_near_hyperplane() {
    let sys = MagneticSystem::case_i(
        ScalarFunction1D::monomial(1.0, -2),
        ScalarFunction1D::zero(),
        ScalarFunction1D::zero(),
        ScalarFunction1D::zero(),
    );
    assert_eq!(sys.domain[1], Domain::Nonzero);
    assert!(sys.check_admissible(&[0.0, 1.0e-4, 0.0]).is_err());
    assert!(sys.check_admissible(&[0.0, 0.5, 0.0]).is_ok());
}
