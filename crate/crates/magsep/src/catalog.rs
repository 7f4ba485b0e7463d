//! The authoritative catalog of separable magnetic systems with their full
//! integral sets, parameter validation and classification metadata.
//!
//! Entry naming: `case1.*` are systems of the first separation class
//! (quadratic Cartesian integrals), `case2.*` of the second (linear
//! Cartesian integrals), `const.*` are constant-magnetic-field systems and
//! the remaining ids cover the caged-oscillator extension and the
//! quadratic-potential constant-field family.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::CoeffField;
use crate::poly::MomentumPolynomial;
use crate::quadspec::QuadraticIntegralSpec;
use crate::sample::{CoordRange, SampleBox};
use crate::scalar::{Domain, ScalarFunction1D};
use crate::system::MagneticSystem;

/// How much of the integrable hierarchy an entry realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    /// Only the Cartesian integrals (rank 3 with H).
    Integrable,
    /// One additional independent integral (rank 4).
    Minimal,
    /// Two additional independent integrals (rank 5).
    Maximal,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Integrable => "integrable",
            Classification::Minimal => "minimal",
            Classification::Maximal => "maximal",
        }
    }
}

/// Role of a shipped integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Cartesian,
    Additional,
    HigherOrder,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Cartesian => "cartesian",
            Role::Additional => "additional",
            Role::HigherOrder => "higher-order",
        }
    }
}

/// A conserved quantity with its name, role and (when second order) the
/// structured quadratic ansatz it came from.
#[derive(Clone, Debug)]
pub struct NamedIntegral {
    pub name: &'static str,
    pub role: Role,
    pub poly: MomentumPolynomial,
    pub spec: Option<QuadraticIntegralSpec>,
}

/// Static description of a catalog entry.
#[derive(Clone, Debug)]
pub struct EntryDescriptor {
    pub id: &'static str,
    /// One-line description of the family.
    pub family: &'static str,
    pub classification: Classification,
    pub expected_rank: usize,
    pub params: &'static [(&'static str, f64)],
    /// Human-readable validity predicate.
    pub constraints: &'static str,
}

/// A fully built system with its integrals and verification metadata.
#[derive(Clone, Debug)]
pub struct Instantiated {
    pub id: String,
    pub params: BTreeMap<String, f64>,
    pub system: MagneticSystem,
    pub integrals: Vec<NamedIntegral>,
    pub classification: Classification,
    pub expected_rank: usize,
    /// Box for residual/rank point sampling.
    pub sample_box: SampleBox,
    /// Box for trajectory starts (kept inside bounded or tame regions).
    pub start_box: SampleBox,
}

const ENTRIES: &[EntryDescriptor] = &[
    EntryDescriptor {
        id: "case1.generic",
        family: "first separation class with polynomial example fields; Cartesian integrals only",
        classification: Classification::Integrable,
        expected_rank: 3,
        params: &[("a", 1.0), ("b", 1.0), ("c", 1.0), ("w", 1.0)],
        constraints: "a, b not both 0 (magnetic field must not vanish)",
    },
    EntryDescriptor {
        id: "case2.generic",
        family: "second separation class with polynomial example fields; Cartesian integrals only",
        classification: Classification::Integrable,
        expected_rank: 3,
        params: &[("a", 1.0), ("b", 1.0), ("c", 1.0)],
        constraints: "a, b not both 0 (magnetic field must not vanish)",
    },
    EntryDescriptor {
        id: "case1.a",
        family: "exponential-plus-constant magnetic field B = (a e^{b x2}, c, 0)",
        classification: Classification::Minimal,
        expected_rank: 4,
        params: &[("a", 1.0), ("b", 1.0), ("c", 1.0), ("w", 1.0)],
        constraints: "a != 0, b != 0, c != 0",
    },
    EntryDescriptor {
        id: "case1.b",
        family: "radial-oscillator family with inverse-square barriers in x1 and x2",
        classification: Classification::Minimal,
        expected_rank: 4,
        params: &[
            ("a1", 1.0),
            ("a2", 1.0),
            ("a3", 1.0),
            ("b1", 1.0),
            ("b2", 1.0),
            ("b3", 1.0),
        ],
        constraints: "a1, a2, a3 not all 0 (magnetic field must not vanish)",
    },
    EntryDescriptor {
        id: "case1.c",
        family: "anisotropic 4:1 oscillator family with one inverse-square barrier",
        classification: Classification::Minimal,
        expected_rank: 4,
        params: &[
            ("a1", 1.0),
            ("a2", 1.0),
            ("a3", 1.0),
            ("b1", 1.0),
            ("b2", 1.0),
            ("b3", 1.0),
        ],
        constraints: "a1, a2, a3 not all 0 (magnetic field must not vanish)",
    },
    EntryDescriptor {
        id: "case1.d",
        family: "isotropic oscillator family with linear terms",
        classification: Classification::Minimal,
        expected_rank: 4,
        params: &[
            ("a1", 1.0),
            ("a2", 1.0),
            ("a3", 1.0),
            ("b1", 1.0),
            ("b2", 1.0),
            ("b3", 1.0),
        ],
        constraints: "a1, a2, a3 not all 0 (magnetic field must not vanish)",
    },
    EntryDescriptor {
        id: "case1.d.max",
        family: "constant field B = (0, a, 0) with linear potential; quadratically maximal",
        classification: Classification::Maximal,
        expected_rank: 5,
        params: &[("a", 1.0), ("v", 1.0)],
        constraints: "a != 0",
    },
    EntryDescriptor {
        id: "case2.a",
        family: "exponential magnetic field B = (0, a e^{b x1}, 0)",
        classification: Classification::Minimal,
        expected_rank: 4,
        params: &[("a", 1.0), ("b", 1.0), ("c", 1.0), ("w", 1.0)],
        constraints: "a != 0, b != 0",
    },
    EntryDescriptor {
        id: "case2.b",
        family: "power-law magnetic field B = (0, a (b-2) x1^{b-3}, 0)",
        classification: Classification::Minimal,
        expected_rank: 4,
        params: &[("a", 1.0), ("b", 1.0), ("c", 1.0), ("w", 1.0)],
        constraints: "a != 0, b != 2 (b = 2 kills the magnetic field)",
    },
    EntryDescriptor {
        id: "case2.c",
        family: "inverse-power magnetic field B = (0, a / x1, 0) with log potential",
        classification: Classification::Minimal,
        expected_rank: 4,
        params: &[("a", 1.0), ("b", 1.0), ("w", 1.0)],
        constraints: "a != 0",
    },
    EntryDescriptor {
        id: "case2.d",
        family: "inverse-cube magnetic field B = (0, 0, a / x1^3)",
        classification: Classification::Minimal,
        expected_rank: 4,
        params: &[("a", 1.0), ("b", 1.0), ("w", 1.0)],
        constraints: "a != 0",
    },
    EntryDescriptor {
        id: "const.uniformB",
        family: "uniform field B = (0, gamma, 0) with separated potential V(x2)",
        classification: Classification::Minimal,
        expected_rank: 4,
        params: &[("gamma", 1.0), ("v", 1.0)],
        constraints: "gamma != 0",
    },
    EntryDescriptor {
        id: "const.cagedosc",
        family: "uniform field over the caged-oscillator potential (frequency ratio m/l)",
        classification: Classification::Maximal,
        expected_rank: 5,
        params: &[("gamma", 1.0), ("c", 1.0), ("l", 1.0), ("m", 1.0)],
        constraints: "gamma != 0, l != 0, m != 0; the explicit extra integral ships for l = m",
    },
    EntryDescriptor {
        id: "const.cagedosc.x5",
        family: "uniform field over the isotropic caged oscillator with its third-order integral",
        classification: Classification::Maximal,
        expected_rank: 5,
        params: &[("gamma", 1.0), ("c", 1.0)],
        constraints: "gamma != 0",
    },
    EntryDescriptor {
        id: "extcage",
        family: "caged-oscillator extension with momentum-dependent frequencies",
        classification: Classification::Minimal,
        expected_rank: 4,
        params: &[
            ("om", 1.0),
            ("l1", 1.0),
            ("l2", 1.0),
            ("m1", 1.0),
            ("m2", 1.0),
            ("al1", 1.0),
            ("al2", 1.0),
            ("be1", 1.0),
            ("be2", 1.0),
        ],
        constraints: "om != 0; the explicit extra integral ships for l1 = m1 and l2 = m2",
    },
    EntryDescriptor {
        id: "sec8.quadratic",
        family: "constant in-plane field B = (a1, a2, 0) over quadratic potentials",
        classification: Classification::Minimal,
        expected_rank: 4,
        params: &[
            ("a1", 1.0),
            ("a2", 1.0),
            ("v11", 1.0),
            ("v12", 1.0),
            ("v21", 1.0),
            ("v22", 1.0),
        ],
        constraints: "a1, a2 not both 0; the extra integral ships for v12 = v22",
    },
];

/// Stable list of catalog entries.
pub fn list() -> Vec<EntryDescriptor> {
    ENTRIES.to_vec()
}

pub fn descriptor(id: &str) -> Result<&'static EntryDescriptor> {
    ENTRIES
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::UnknownEntry(id.to_string()))
}

fn resolve_params(
    desc: &EntryDescriptor,
    overrides: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>> {
    let mut params: BTreeMap<String, f64> =
        desc.params.iter().map(|(n, d)| (n.to_string(), *d)).collect();
    for (name, value) in overrides {
        if !params.contains_key(name) {
            return Err(Error::InvalidParams {
                entry: desc.id.to_string(),
                message: format!(
                    "unknown parameter '{name}' (known: {})",
                    desc.params
                        .iter()
                        .map(|(n, _)| *n)
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            });
        }
        params.insert(name.clone(), *value);
    }
    Ok(params)
}

fn require(ok: bool, entry: &str, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParams {
            entry: entry.to_string(),
            message: message.to_string(),
        })
    }
}

fn cf(coord: usize, f: &ScalarFunction1D) -> CoeffField {
    CoeffField::from_scalar(coord, f)
}

/// Cartesian integrals of the first separation class, as quadratic specs:
/// X1 = (p1^A)^2 - 2 u2 p3^A + 2 u1 u2 - 2 u2^2 + 2 V1,
/// X2 = (p2^A)^2 + 2 u1 p3^A - 2 u1^2 + 2 u1 u2 + 2 V2.
fn cartesian_specs_case_i(
    u1: &ScalarFunction1D,
    u2: &ScalarFunction1D,
    v1: &ScalarFunction1D,
    v2: &ScalarFunction1D,
) -> (QuadraticIntegralSpec, QuadraticIntegralSpec) {
    let u1f = cf(1, u1);
    let u2f = cf(0, u2);
    let mut x1 = QuadraticIntegralSpec::default();
    x1.gamma[0][0] = 1.0;
    x1.s[2] = u2f.scale(-2.0);
    x1.m = u1f
        .mul(&u2f)
        .scale(2.0)
        .sub(&u2f.square().scale(2.0))
        .add(&cf(0, v1).scale(2.0));
    let mut x2 = QuadraticIntegralSpec::default();
    x2.gamma[1][1] = 1.0;
    x2.s[2] = u1f.scale(2.0);
    x2.m = u1f
        .square()
        .scale(-2.0)
        .add(&u1f.mul(&u2f).scale(2.0))
        .add(&cf(1, v2).scale(2.0));
    (x1, x2)
}

/// Cartesian integrals of the second separation class: the conserved
/// canonical momenta, written covariantly:
/// X1 = p2^A - u3(x1),  X2 = p3^A + u2(x1).
fn cartesian_specs_case_ii(
    u2: &ScalarFunction1D,
    u3: &ScalarFunction1D,
) -> (QuadraticIntegralSpec, QuadraticIntegralSpec) {
    let mut x1 = QuadraticIntegralSpec::default();
    x1.s[1] = CoeffField::constant(1.0);
    x1.m = cf(0, u3).scale(-1.0);
    let mut x2 = QuadraticIntegralSpec::default();
    x2.s[2] = CoeffField::constant(1.0);
    x2.m = cf(0, u2);
    (x1, x2)
}

fn spec_integral(
    name: &'static str,
    role: Role,
    spec: QuadraticIntegralSpec,
) -> NamedIntegral {
    NamedIntegral {
        name,
        role,
        poly: spec.to_polynomial(),
        spec: Some(spec),
    }
}

/// Kind of oscillator family of the first class (three rows of the 2D
/// superintegrable table, lifted to 3D).
enum OscKind {
    /// barriers in both coordinates; extra integral built on l3^2
    Radial,
    /// 4:1 anisotropic with one barrier; extra integral built on p2 l3
    Aniso,
    /// isotropic with linear terms; extra integral built on p1 p2
    Linear,
}

struct OscParams {
    a: [f64; 3],
    b: [f64; 3],
}

fn osc_fields(kind: &OscKind, p: &OscParams) -> [ScalarFunction1D; 4] {
    let [a1, a2, a3] = p.a;
    let [b1, b2, b3] = p.b;
    match kind {
        OscKind::Radial => [
            // u1 = a1 x2^2 + a3/x2^2, u2 = -a1 x1^2 - a2/x1^2
            ScalarFunction1D::monomial(a1, 2).add(&ScalarFunction1D::monomial(a3, -2)),
            ScalarFunction1D::monomial(-a1, 2).add(&ScalarFunction1D::monomial(-a2, -2)),
            ScalarFunction1D::monomial(b1, 2).add(&ScalarFunction1D::monomial(b2, -2)),
            ScalarFunction1D::monomial(b1, 2).add(&ScalarFunction1D::monomial(b3, -2)),
        ],
        OscKind::Aniso => [
            // u1 = a1 x2^2 + a3/x2^2, u2 = -4 a1 x1^2 - a2 x1
            ScalarFunction1D::monomial(a1, 2).add(&ScalarFunction1D::monomial(a3, -2)),
            ScalarFunction1D::monomial(-4.0 * a1, 2).add(&ScalarFunction1D::monomial(-a2, 1)),
            ScalarFunction1D::monomial(4.0 * b1, 2).add(&ScalarFunction1D::monomial(b2, 1)),
            ScalarFunction1D::monomial(b1, 2).add(&ScalarFunction1D::monomial(b3, -2)),
        ],
        OscKind::Linear => [
            // u1 = a1 x2^2 + a3 x2, u2 = -a1 x1^2 - a2 x1
            ScalarFunction1D::monomial(a1, 2).add(&ScalarFunction1D::monomial(a3, 1)),
            ScalarFunction1D::monomial(-a1, 2).add(&ScalarFunction1D::monomial(-a2, 1)),
            ScalarFunction1D::monomial(b1, 2).add(&ScalarFunction1D::monomial(b2, 1)),
            ScalarFunction1D::monomial(b1, 2).add(&ScalarFunction1D::monomial(b3, 1)),
        ],
    }
}

/// The extra quadratic integral of the oscillator families.  The momentum-
/// dependent coefficients c_j = a_j p3 + b_j enter through the canonical
/// p3 = p3^A - u1 + u2, so the lower-order fields pick up the -(u1 - u2) s3
/// correction.
fn osc_extra_spec(
    kind: &OscKind,
    p: &OscParams,
    u1: &ScalarFunction1D,
    u2: &ScalarFunction1D,
) -> QuadraticIntegralSpec {
    let [a1, a2, a3] = p.a;
    let [b1, b2, b3] = p.b;
    let x1sq = CoeffField::coordinate(0).square();
    let x2sq = CoeffField::coordinate(1).square();
    let inv_x1sq = cf(0, &ScalarFunction1D::monomial(1.0, -2));
    let inv_x2sq = cf(1, &ScalarFunction1D::monomial(1.0, -2));
    let x1 = CoeffField::coordinate(0);
    let x2 = CoeffField::coordinate(1);
    let mut spec = QuadraticIntegralSpec::default();
    let (s3, mb) = match kind {
        OscKind::Radial => {
            spec.alpha[2][2] = 1.0;
            // s3 = 2 (a2 x2^2/x1^2 + a3 x1^2/x2^2), momentum-free part of m
            // analogous with b's
            let shape = |ca: f64, cb: f64| {
                x2sq.mul(&inv_x1sq)
                    .scale(2.0 * ca)
                    .add(&x1sq.mul(&inv_x2sq).scale(2.0 * cb))
            };
            (shape(a2, a3), shape(b2, b3))
        }
        OscKind::Aniso => {
            spec.beta[1][2] = 1.0;
            // -x2^2 (2 c1 x1 + c2/2) + 2 c3 x1 / x2^2
            let shape = |c1: f64, c2: f64, c3: f64| {
                x2sq.mul(&x1)
                    .scale(-2.0 * c1)
                    .sub(&x2sq.scale(0.5 * c2))
                    .add(&x1.mul(&inv_x2sq).scale(2.0 * c3))
            };
            (shape(a1, a2, a3), shape(b1, b2, b3))
        }
        OscKind::Linear => {
            spec.gamma[0][1] = 1.0;
            // 2 c1 x1 x2 + c2 x2 + c3 x1
            let shape = |c1: f64, c2: f64, c3: f64| {
                x1.mul(&x2)
                    .scale(2.0 * c1)
                    .add(&x2.scale(c2))
                    .add(&x1.scale(c3))
            };
            (shape(a1, a2, a3), shape(b1, b2, b3))
        }
    };
    let udiff = cf(1, u1).sub(&cf(0, u2));
    spec.m = mb.sub(&udiff.mul(&s3));
    spec.s[2] = s3;
    spec
}

/// Uniform-field first-order integrals, written covariantly
/// (p3 canonical = p3^A + gamma x1 since A3 = -gamma x1):
/// I1 = p1^A - gamma x3, I2 = p3^A + gamma x1,
/// I3 = 2 x3 p1^A - 2 x1 p3^A - gamma (x1^2 + x3^2).
fn uniform_first_order(gamma: f64) -> Vec<NamedIntegral> {
    let x1 = CoeffField::coordinate(0);
    let x3 = CoeffField::coordinate(2);
    let mut i1 = QuadraticIntegralSpec::default();
    i1.s[0] = CoeffField::constant(1.0);
    i1.m = x3.scale(-gamma);
    let mut i2 = QuadraticIntegralSpec::default();
    i2.s[2] = CoeffField::constant(1.0);
    i2.m = x1.scale(gamma);
    let mut i3 = QuadraticIntegralSpec::default();
    i3.s[0] = x3.scale(2.0);
    i3.s[2] = x1.scale(-2.0);
    i3.m = x1.square().add(&x3.square()).scale(-gamma);
    vec![
        spec_integral("I1", Role::Additional, i1),
        spec_integral("I2", Role::Additional, i2),
        spec_integral("I3", Role::Additional, i3),
    ]
}

/// The third-order integral of the uniform-field isotropic caged
/// oscillator:
/// X5 = 2 g p2 p3 l3 + g^2 (x1^2 p2^2 + x2^2 (p3^2 - p1^2))
///      + 2 g (x1/x2^2)(g^2 x2^4 + 2c) p3 + g^2 (x1^2/x2^2)(g^2 x2^4 + 2c)
/// (all momenta covariant).
fn x5_integral(gamma: f64, c: f64) -> MomentumPolynomial {
    let p1 = MomentumPolynomial::momentum(0);
    let p2 = MomentumPolynomial::momentum(1);
    let p3 = MomentumPolynomial::momentum(2);
    let l3 = MomentumPolynomial::angular(2);
    let x1sq = CoeffField::coordinate(0).square();
    let x2sq = CoeffField::coordinate(1).square();
    let inv_x2sq = cf(1, &ScalarFunction1D::monomial(1.0, -2));
    // g^2 x2^4 + 2c over x2^2
    let barrier = cf(1, &ScalarFunction1D::monomial(gamma * gamma, 2))
        .add(&cf(1, &ScalarFunction1D::monomial(2.0 * c, -2)));
    let g = gamma;
    p2.mul(&p3)
        .mul(&l3)
        .scale(2.0 * g)
        .add(
            &MomentumPolynomial::constant_field(x1sq.clone())
                .mul(&p2.mul(&p2))
                .scale(g * g),
        )
        .add(
            &MomentumPolynomial::constant_field(x2sq)
                .mul(&p3.mul(&p3).sub(&p1.mul(&p1)))
                .scale(g * g),
        )
        .add(
            &MomentumPolynomial::constant_field(CoeffField::coordinate(0).mul(&barrier))
                .mul(&p3)
                .scale(2.0 * g),
        )
        .add(&MomentumPolynomial::constant_field(
            x1sq.mul(&inv_x2sq)
                .mul(
                    &cf(1, &ScalarFunction1D::monomial(g * g, 4))
                        .add(&CoeffField::constant(2.0 * c)),
                )
                .scale(g * g),
        ))
}

/// Default trajectory-start box derived from the instantiated domain.
fn default_start_box(sys: &MagneticSystem) -> SampleBox {
    let x = [0, 1, 2].map(|c| match sys.domain[c] {
        Domain::All => CoordRange::Interval(-0.5, 0.5),
        Domain::Nonzero => CoordRange::Shell(0.7, 1.1),
        Domain::Positive => CoordRange::PositiveShell(0.7, 1.1),
    });
    SampleBox {
        x,
        p: [CoordRange::Interval(-0.35, 0.35); 3],
    }
}

/// Residual/rank sampling box derived from the instantiated domain.
fn default_sample_box(sys: &MagneticSystem) -> SampleBox {
    let x = [0, 1, 2].map(|c| match sys.domain[c] {
        Domain::All => CoordRange::Interval(-1.2, 1.2),
        Domain::Nonzero => CoordRange::Shell(0.35, 1.3),
        Domain::Positive => CoordRange::PositiveShell(0.35, 1.3),
    });
    SampleBox {
        x,
        p: [CoordRange::Interval(-1.0, 1.0); 3],
    }
}

/// Build a catalog entry with explicit parameter overrides.
pub fn instantiate(id: &str, overrides: &BTreeMap<String, f64>) -> Result<Instantiated> {
    let desc = descriptor(id)?;
    let params = resolve_params(desc, overrides)?;
    let g = |name: &str| params[name];

    let mut classification = desc.classification;
    let mut expected_rank = desc.expected_rank;
    let mut start_override: Option<Box<dyn Fn(&mut SampleBox)>> = None;

    let (sys, integrals): (MagneticSystem, Vec<NamedIntegral>) = match id {
        "case1.generic" => {
            let (a, b, c, w) = (g("a"), g("b"), g("c"), g("w"));
            require(a != 0.0 || b != 0.0, id, "a and b must not both vanish")?;
            let u1 = ScalarFunction1D::monomial(a, 2);
            let u2 = ScalarFunction1D::monomial(b, 1);
            let v1 = ScalarFunction1D::monomial(c, 2);
            let v2 = ScalarFunction1D::monomial(w, 2);
            let (x1, x2) = cartesian_specs_case_i(&u1, &u2, &v1, &v2);
            (
                MagneticSystem::case_i(u1, u2, v1, v2),
                vec![
                    spec_integral("X1", Role::Cartesian, x1),
                    spec_integral("X2", Role::Cartesian, x2),
                ],
            )
        }
        "case2.generic" => {
            let (a, b, c) = (g("a"), g("b"), g("c"));
            require(a != 0.0 || b != 0.0, id, "a and b must not both vanish")?;
            let u2 = ScalarFunction1D::monomial(a, 2);
            let u3 = ScalarFunction1D::monomial(b, 1);
            let v1 = ScalarFunction1D::monomial(c, 2);
            let (x1, x2) = cartesian_specs_case_ii(&u2, &u3);
            // keep p3 < 0 at start: the p3-coupled effective potential
            // -u2(x1) p3 is confining only on that side
            start_override = Some(Box::new(|bx: &mut SampleBox| {
                bx.p[2] = CoordRange::Interval(-0.5, -0.15);
            }));
            (
                MagneticSystem::case_ii(u2, u3, v1),
                vec![
                    spec_integral("X1", Role::Cartesian, x1),
                    spec_integral("X2", Role::Cartesian, x2),
                ],
            )
        }
        "case1.a" => {
            let (a, b, c, w) = (g("a"), g("b"), g("c"), g("w"));
            require(a != 0.0, id, "a must not vanish")?;
            require(b != 0.0, id, "b must not vanish (it divides the gauge field)")?;
            require(c != 0.0, id, "c must not vanish")?;
            let u1 = ScalarFunction1D::exponential(a / b, b);
            let u2 = ScalarFunction1D::monomial(c, 1);
            let v1 = ScalarFunction1D::monomial(0.5 * c * c, 2);
            let v2 = ScalarFunction1D::exponential(a * w, b);
            let (x1, x2) = cartesian_specs_case_i(&u1, &u2, &v1, &v2);
            // X3 = p1 p3 + s.p + m with
            // s1 = w b - (a/b) e^{b x2} + c x1, s2 = -c/b, s3 = -c x3,
            // m  = c ((a/b) e^{b x2} - c x1 - w b) x3
            let mut x3 = QuadraticIntegralSpec::default();
            x3.gamma[0][2] = 1.0;
            x3.s[0] = CoeffField::constant(w * b)
                .sub(&cf(1, &ScalarFunction1D::exponential(a / b, b)))
                .add(&CoeffField::coordinate(0).scale(c));
            x3.s[1] = CoeffField::constant(-c / b);
            x3.s[2] = CoeffField::coordinate(2).scale(-c);
            x3.m = cf(1, &ScalarFunction1D::exponential(a / b, b))
                .sub(&CoeffField::coordinate(0).scale(c))
                .sub(&CoeffField::constant(w * b))
                .mul(&CoeffField::coordinate(2))
                .scale(c);
            (
                MagneticSystem::case_i(u1, u2, v1, v2),
                vec![
                    spec_integral("X1", Role::Cartesian, x1),
                    spec_integral("X2", Role::Cartesian, x2),
                    spec_integral("X3", Role::Additional, x3),
                ],
            )
        }
        "case1.b" | "case1.c" | "case1.d" => {
            let p = OscParams {
                a: [g("a1"), g("a2"), g("a3")],
                b: [g("b1"), g("b2"), g("b3")],
            };
            require(
                p.a.iter().any(|v| *v != 0.0),
                id,
                "a1, a2, a3 must not all vanish",
            )?;
            let kind = match id {
                "case1.b" => OscKind::Radial,
                "case1.c" => OscKind::Aniso,
                _ => OscKind::Linear,
            };
            let [u1, u2, v1, v2] = osc_fields(&kind, &p);
            let (x1, x2) = cartesian_specs_case_i(&u1, &u2, &v1, &v2);
            let x3 = osc_extra_spec(&kind, &p, &u1, &u2);
            (
                MagneticSystem::case_i(u1, u2, v1, v2),
                vec![
                    spec_integral("X1", Role::Cartesian, x1),
                    spec_integral("X2", Role::Cartesian, x2),
                    spec_integral("X3", Role::Additional, x3),
                ],
            )
        }
        "case1.d.max" => {
            let (a, v) = (g("a"), g("v"));
            require(a != 0.0, id, "a must not vanish")?;
            let u1 = ScalarFunction1D::zero();
            let u2 = ScalarFunction1D::monomial(a, 1);
            let v1 = ScalarFunction1D::zero();
            let v2 = ScalarFunction1D::monomial(v, 1);
            let (x1s, x2s) = cartesian_specs_case_i(&u1, &u2, &v1, &v2);
            // sub-case of the isotropic-linear family
            let x3 = osc_extra_spec(
                &OscKind::Linear,
                &OscParams {
                    a: [0.0, -a, 0.0],
                    b: [0.0, 0.0, v],
                },
                &u1,
                &u2,
            );
            // X4 = 3 p3 l1 - p1 l3 - (3v/a) l2 + a x1 x2 p3 + 3a x1 l1
            //      + v x1^2 + a^2 x1^2 x2
            let x1c = CoeffField::coordinate(0);
            let x2c = CoeffField::coordinate(1);
            let x3c = CoeffField::coordinate(2);
            let mut x4 = QuadraticIntegralSpec::default();
            x4.beta[2][0] = 3.0;
            x4.beta[0][2] = -1.0;
            x4.s[0] = x3c.scale(-3.0 * v / a);
            x4.s[1] = x1c.mul(&x3c).scale(-3.0 * a);
            x4.s[2] = x1c
                .scale(3.0 * v / a)
                .add(&x1c.mul(&x2c).scale(4.0 * a));
            x4.m = x1c
                .square()
                .scale(v)
                .add(&x1c.square().mul(&x2c).scale(a * a));
            // the x2 motion is secular (x2 ~ -v t^2 / 2): keep the start
            // momenta that feed coordinate growth at zero so integral
            // evaluation stays well conditioned over long spans
            start_override = Some(Box::new(|bx: &mut SampleBox| {
                bx.x = [CoordRange::Interval(-0.4, 0.4); 3];
                bx.p = [
                    CoordRange::Fixed(0.0),
                    CoordRange::Interval(-0.3, 0.3),
                    CoordRange::Fixed(0.0),
                ];
            }));
            (
                MagneticSystem::case_i(u1, u2, v1, v2),
                vec![
                    spec_integral("X1", Role::Cartesian, x1s),
                    spec_integral("X2", Role::Cartesian, x2s),
                    spec_integral("X3", Role::Additional, x3),
                    spec_integral("X4", Role::Additional, x4),
                ],
            )
        }
        "case2.a" => {
            let (a, b, c, w) = (g("a"), g("b"), g("c"), g("w"));
            require(a != 0.0, id, "a must not vanish")?;
            require(b != 0.0, id, "b must not vanish")?;
            let u2 = ScalarFunction1D::exponential(a / b, b);
            let u3 = ScalarFunction1D::zero();
            let v1 =
                ScalarFunction1D::monomial(w, 1).add(&ScalarFunction1D::exponential(c, b));
            let (x1s, x2s) = cartesian_specs_case_ii(&u2, &u3);
            // W' = w + c b e^{b x1} - (a^2/b) e^{2b x1}
            let wprime = ScalarFunction1D::constant(w)
                .add(&ScalarFunction1D::exponential(c * b, b))
                .add(&ScalarFunction1D::exponential(-a * a / b, 2.0 * b));
            let mut x3 = QuadraticIntegralSpec::default();
            x3.gamma[0][1] = 1.0;
            x3.beta[2][0] = -b;
            x3.s[1] = cf(0, &ScalarFunction1D::exponential(a, b))
                .sub(&CoeffField::constant(c * b * b / a))
                .mul(&CoeffField::coordinate(2));
            x3.s[2] = cf(0, &ScalarFunction1D::exponential(-2.0 * a, b))
                .add(&CoeffField::constant(c * b * b / a))
                .mul(&CoeffField::coordinate(1));
            x3.m = CoeffField::coordinate(1).mul(&cf(0, &wprime));
            start_override = Some(Box::new(|bx: &mut SampleBox| {
                bx.p[2] = CoordRange::Interval(-0.5, -0.15);
            }));
            (
                MagneticSystem::case_ii(u2, u3, v1),
                vec![
                    spec_integral("X1", Role::Cartesian, x1s),
                    spec_integral("X2", Role::Cartesian, x2s),
                    spec_integral("X3", Role::Additional, x3),
                ],
            )
        }
        "case2.b" => {
            let (a, b, c, w) = (g("a"), g("b"), g("c"), g("w"));
            require(a != 0.0, id, "a must not vanish")?;
            require(b != 2.0, id, "b must differ from 2 (b = 2 kills the magnetic field)")?;
            let u2 = ScalarFunction1D::power(a, b - 2.0);
            let u3 = ScalarFunction1D::zero();
            let v1 = ScalarFunction1D::power(a * (b - 2.0) * c, b - 2.0)
                .add(&ScalarFunction1D::monomial(w, -2));
            let (x1s, x2s) = cartesian_specs_case_ii(&u2, &u3);
            // x1 W' = -a^2 (b-2) x1^{2(b-2)} + a (b-2)^2 c x1^{b-2} - 2w/x1^2
            let x1wp = ScalarFunction1D::power(-a * a * (b - 2.0), 2.0 * (b - 2.0))
                .add(&ScalarFunction1D::power(a * (b - 2.0) * (b - 2.0) * c, b - 2.0))
                .add(&ScalarFunction1D::monomial(-2.0 * w, -2));
            let mut x3 = QuadraticIntegralSpec::default();
            x3.beta[0][2] = 1.0;
            x3.beta[2][0] = -b;
            x3.s[1] = cf(0, &ScalarFunction1D::power(a * b, b - 2.0))
                .sub(&CoeffField::constant(b * (b - 2.0) * c))
                .mul(&CoeffField::coordinate(2));
            x3.s[2] = cf(0, &ScalarFunction1D::power(-2.0 * (b - 1.0) * a, b - 2.0))
                .add(&CoeffField::constant(b * (b - 2.0) * c))
                .mul(&CoeffField::coordinate(1));
            x3.m = CoeffField::coordinate(1).mul(&cf(0, &x1wp));
            (
                MagneticSystem::case_ii(u2, u3, v1),
                vec![
                    spec_integral("X1", Role::Cartesian, x1s),
                    spec_integral("X2", Role::Cartesian, x2s),
                    spec_integral("X3", Role::Additional, x3),
                ],
            )
        }
        "case2.c" => {
            let (a, b, w) = (g("a"), g("b"), g("w"));
            require(a != 0.0, id, "a must not vanish")?;
            let u2 = ScalarFunction1D::log(a);
            let u3 = ScalarFunction1D::zero();
            let v1 = ScalarFunction1D::log(b).add(&ScalarFunction1D::monomial(w, -2));
            let (x1s, x2s) = cartesian_specs_case_ii(&u2, &u3);
            // x1 W' = -a^2 ln|x1| + b - 2w/x1^2
            let x1wp = ScalarFunction1D::log(-a * a)
                .add(&ScalarFunction1D::constant(b))
                .add(&ScalarFunction1D::monomial(-2.0 * w, -2));
            let mut x3 = QuadraticIntegralSpec::default();
            x3.beta[0][2] = 1.0;
            x3.beta[2][0] = -2.0;
            x3.s[1] = cf(0, &ScalarFunction1D::log(2.0 * a))
                .sub(&CoeffField::constant(2.0 * b / a))
                .mul(&CoeffField::coordinate(2));
            x3.s[2] = cf(0, &ScalarFunction1D::log(-2.0 * a))
                .add(&CoeffField::constant((2.0 * b - a * a) / a))
                .mul(&CoeffField::coordinate(1));
            x3.m = CoeffField::coordinate(1).mul(&cf(0, &x1wp));
            (
                MagneticSystem::case_ii(u2, u3, v1),
                vec![
                    spec_integral("X1", Role::Cartesian, x1s),
                    spec_integral("X2", Role::Cartesian, x2s),
                    spec_integral("X3", Role::Additional, x3),
                ],
            )
        }
        "case2.d" => {
            let (a, b, w) = (g("a"), g("b"), g("w"));
            require(a != 0.0, id, "a must not vanish")?;
            let u2 = ScalarFunction1D::zero();
            let u3 = ScalarFunction1D::monomial(-0.5 * a, -2);
            // V1 = W + u3^2/2 = -a b ln|x1| / x1^2 + w / x1^2
            let v1 = ScalarFunction1D::from_atoms(vec![
                crate::scalar::Atom::new(-a * b, -2.0, 0.0, 1),
                crate::scalar::Atom::new(w, -2.0, 0.0, 0),
            ]);
            let (x1s, x2s) = cartesian_specs_case_ii(&u2, &u3);
            // -x1 W' = a b/x1^2 - 2 a b ln|x1|/x1^2 - a^2/(2 x1^4) + 2w/x1^2
            let neg_x1wp = ScalarFunction1D::from_atoms(vec![
                crate::scalar::Atom::new(a * b, -2.0, 0.0, 0),
                crate::scalar::Atom::new(-2.0 * a * b, -2.0, 0.0, 1),
                crate::scalar::Atom::new(-0.5 * a * a, -4.0, 0.0, 0),
                crate::scalar::Atom::new(2.0 * w, -2.0, 0.0, 0),
            ]);
            let mut x3 = QuadraticIntegralSpec::default();
            x3.beta[0][1] = 1.0;
            x3.s[1] = cf(0, &ScalarFunction1D::monomial(-a, -2))
                .add(&CoeffField::constant(2.0 * b))
                .mul(&CoeffField::coordinate(2));
            x3.s[2] = CoeffField::coordinate(1).scale(-2.0 * b);
            x3.m = CoeffField::coordinate(2).mul(&cf(0, &neg_x1wp));
            (
                MagneticSystem::case_ii(u2, u3, v1),
                vec![
                    spec_integral("X1", Role::Cartesian, x1s),
                    spec_integral("X2", Role::Cartesian, x2s),
                    spec_integral("X3", Role::Additional, x3),
                ],
            )
        }
        "const.uniformB" | "const.cagedosc" | "const.cagedosc.x5" => {
            let gamma = g("gamma");
            require(gamma != 0.0, id, "gamma must not vanish")?;
            let v2 = match id {
                "const.uniformB" => ScalarFunction1D::monomial(g("v"), 2),
                "const.cagedosc" => {
                    let (l, m, c) = (g("l"), g("m"), g("c"));
                    require(l != 0.0, id, "l must not vanish")?;
                    require(m != 0.0, id, "m must not vanish")?;
                    ScalarFunction1D::monomial(c, -2).add(&ScalarFunction1D::monomial(
                        0.5 * (m / l) * (m / l) * gamma * gamma,
                        2,
                    ))
                }
                _ => ScalarFunction1D::monomial(g("c"), -2)
                    .add(&ScalarFunction1D::monomial(0.5 * gamma * gamma, 2)),
            };
            let u1 = ScalarFunction1D::zero();
            let u2 = ScalarFunction1D::monomial(gamma, 1);
            let v1 = ScalarFunction1D::monomial(0.5 * gamma * gamma, 2);
            let (x1s, x2s) = cartesian_specs_case_i(&u1, &u2, &v1, &v2);
            let mut integrals = vec![
                spec_integral("X1", Role::Cartesian, x1s),
                spec_integral("X2", Role::Cartesian, x2s),
            ];
            integrals.extend(uniform_first_order(gamma));
            match id {
                "const.cagedosc" => {
                    if g("l") == g("m") {
                        integrals.push(NamedIntegral {
                            name: "X5",
                            role: Role::HigherOrder,
                            poly: x5_integral(gamma, g("c")),
                            spec: None,
                        });
                    } else {
                        // no explicit extra integral away from l = m;
                        // superintegrability is evidenced by recurrence
                        expected_rank = 4;
                    }
                }
                "const.cagedosc.x5" => {
                    integrals.push(NamedIntegral {
                        name: "X5",
                        role: Role::HigherOrder,
                        poly: x5_integral(gamma, g("c")),
                        spec: None,
                    });
                }
                _ => {}
            }
            (MagneticSystem::case_i(u1, u2, v1, v2), integrals)
        }
        "extcage" => {
            let om = g("om");
            require(om != 0.0, id, "om must not vanish")?;
            let (l1, l2, m1, m2) = (g("l1"), g("l2"), g("m1"), g("m2"));
            let (al1, al2, be1, be2) = (g("al1"), g("al2"), g("be1"), g("be2"));
            let u1 = ScalarFunction1D::monomial(om * m1, 2)
                .add(&ScalarFunction1D::monomial(be1, -2));
            let u2 = ScalarFunction1D::monomial(-om * l1, 2)
                .add(&ScalarFunction1D::monomial(-al1, -2));
            let v1 = ScalarFunction1D::monomial(om * l2, 2)
                .add(&ScalarFunction1D::monomial(al2, -2));
            let v2 = ScalarFunction1D::monomial(om * m2, 2)
                .add(&ScalarFunction1D::monomial(be2, -2));
            let (x1s, x2s) = cartesian_specs_case_i(&u1, &u2, &v1, &v2);
            let mut integrals = vec![
                spec_integral("X1", Role::Cartesian, x1s),
                spec_integral("X2", Role::Cartesian, x2s),
            ];
            if l1 == m1 && l2 == m2 {
                // isotropic sub-family: the radial-barrier extra integral
                let x3 = osc_extra_spec(
                    &OscKind::Radial,
                    &OscParams {
                        a: [om * m1, al1, be1],
                        b: [om * m2, al2, be2],
                    },
                    &u1,
                    &u2,
                );
                integrals.push(spec_integral("X3", Role::Additional, x3));
            } else {
                classification = Classification::Integrable;
                expected_rank = 3;
            }
            (MagneticSystem::case_i(u1, u2, v1, v2), integrals)
        }
        "sec8.quadratic" => {
            let (a1, a2) = (g("a1"), g("a2"));
            let (v11, v12, v21, v22) = (g("v11"), g("v12"), g("v21"), g("v22"));
            require(
                a1 != 0.0 || a2 != 0.0,
                id,
                "a1 and a2 must not both vanish",
            )?;
            let u1 = ScalarFunction1D::monomial(a1, 1);
            let u2 = ScalarFunction1D::monomial(a2, 1);
            let v1 = ScalarFunction1D::monomial(v11, 1).add(&ScalarFunction1D::monomial(v12, 2));
            let v2 = ScalarFunction1D::monomial(v21, 1).add(&ScalarFunction1D::monomial(v22, 2));
            let (x1s, x2s) = cartesian_specs_case_i(&u1, &u2, &v1, &v2);
            let mut integrals = vec![
                spec_integral("X1", Role::Cartesian, x1s),
                spec_integral("X2", Role::Cartesian, x2s),
            ];
            if v12 == v22 {
                let x3 = osc_extra_spec(
                    &OscKind::Linear,
                    &OscParams {
                        a: [0.0, -a2, a1],
                        b: [v12, v11, v21],
                    },
                    &u1,
                    &u2,
                );
                integrals.push(spec_integral("X3", Role::Additional, x3));
            } else {
                classification = Classification::Integrable;
                expected_rank = 3;
            }
            (MagneticSystem::case_i(u1, u2, v1, v2), integrals)
        }
        _ => return Err(Error::UnknownEntry(id.to_string())),
    };

    let sample_box = default_sample_box(&sys);
    let mut start_box = default_start_box(&sys);
    if let Some(f) = start_override {
        f(&mut start_box);
    }

    Ok(Instantiated {
        id: id.to_string(),
        params,
        system: sys,
        integrals,
        classification,
        expected_rank,
        sample_box,
        start_box,
    })
}

/// Rebuild the system with one parameter shifted by `delta` while keeping
/// the integrals of the unperturbed parameters — the negative control for
/// the conservation and determining-equation suites.
pub fn instantiate_perturbed(
    id: &str,
    overrides: &BTreeMap<String, f64>,
    param: &str,
    delta: f64,
) -> Result<Instantiated> {
    let base = instantiate(id, overrides)?;
    let mut shifted = overrides.clone();
    let current = *base.params.get(param).ok_or_else(|| Error::InvalidParams {
        entry: id.to_string(),
        message: format!("unknown parameter '{param}' for perturbation"),
    })?;
    shifted.insert(param.to_string(), current + delta);
    let perturbed = instantiate(id, &shifted)?;
    Ok(Instantiated {
        system: perturbed.system,
        params: perturbed.params,
        ..base
    })
}
