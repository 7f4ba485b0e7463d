//! The structured second-order ansatz for a quadratic integral of motion:
//! constants over the Euclidean generators plus the lower-order fields
//! (s, m), together with the determining-equation and compatibility
//! residuals that certify conservation.

use crate::error::{Error, Result};
use crate::field::CoeffField;
use crate::poly::{CanonicalPolynomial, MomentumPolynomial};
use crate::system::MagneticSystem;
use nalgebra::{DMatrix, DVector};

/// X = sum alpha_ij l_i l_j + sum beta_ij p_i l_j + sum gamma_ij p_i p_j
///     + sum s_j p_j + m,
/// all momenta covariant.  alpha and gamma are used through their i <= j
/// entries only.
#[derive(Clone, Debug, Default)]
pub struct QuadraticIntegralSpec {
    pub alpha: [[f64; 3]; 3],
    pub beta: [[f64; 3]; 3],
    pub gamma: [[f64; 3]; 3],
    pub s: [CoeffField; 3],
    pub m: CoeffField,
}

/// One named determining/compatibility equation evaluated at a point.
#[derive(Clone, Copy, Debug)]
pub struct NamedResidual {
    pub name: &'static str,
    /// Plain sum of the equation's terms.
    pub raw: f64,
    /// raw / (1 + sum of |term|) — scale-free.
    pub normalized: f64,
}

/// Formal angular momentum l_j = eps_jkl x_k p_l in the canonical algebra.
fn angular_formal(j: usize) -> CanonicalPolynomial {
    let (k, l) = match j {
        0 => (1, 2),
        1 => (2, 0),
        2 => (0, 1),
        _ => unreachable!(),
    };
    let mut ik = [0u8; 3];
    ik[l] = 1;
    let mut il = [0u8; 3];
    il[k] = 1;
    CanonicalPolynomial::from_terms(vec![
        (CoeffField::coordinate(k), ik),
        (CoeffField::coordinate(l).scale(-1.0), il),
    ])
}

impl QuadraticIntegralSpec {
    pub fn with_s(s: [CoeffField; 3], m: CoeffField) -> Self {
        QuadraticIntegralSpec {
            s,
            m,
            ..Default::default()
        }
    }

    /// The purely quadratic generator combination, expanded into the
    /// momentum-monomial basis (formal momenta; identical for covariant
    /// ones).
    pub fn quadratic_part(&self) -> CanonicalPolynomial {
        let p: Vec<CanonicalPolynomial> = (0..3).map(CanonicalPolynomial::momentum).collect();
        let l: Vec<CanonicalPolynomial> = (0..3).map(angular_formal).collect();
        let mut q = CanonicalPolynomial::zero();
        for i in 0..3 {
            for j in 0..3 {
                if i <= j && self.alpha[i][j] != 0.0 {
                    q = q.add(&l[i].mul(&l[j]).scale(self.alpha[i][j]));
                }
                if self.beta[i][j] != 0.0 {
                    q = q.add(&p[i].mul(&l[j]).scale(self.beta[i][j]));
                }
                if i <= j && self.gamma[i][j] != 0.0 {
                    q = q.add(&p[i].mul(&p[j]).scale(self.gamma[i][j]));
                }
            }
        }
        q
    }

    /// Leading-coefficient fields (h, n): h_j multiplies p_j^2 and n_j the
    /// off-diagonal pair not containing p_j.
    pub fn leading_fields(&self) -> ([CoeffField; 3], [CoeffField; 3]) {
        let q = self.quadratic_part();
        let h = [
            q.coeff([2, 0, 0]),
            q.coeff([0, 2, 0]),
            q.coeff([0, 0, 2]),
        ];
        let n = [
            q.coeff([0, 1, 1]),
            q.coeff([1, 0, 1]),
            q.coeff([1, 1, 0]),
        ];
        (h, n)
    }

    /// Pointwise (h, n) at x.
    pub fn leading_from_constants(&self, x: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
        let (h, n) = self.leading_fields();
        (
            [h[0].eval(x), h[1].eval(x), h[2].eval(x)],
            [n[0].eval(x), n[1].eval(x), n[2].eval(x)],
        )
    }

    /// Assemble the full covariant momentum polynomial.
    pub fn to_polynomial(&self) -> MomentumPolynomial {
        let mut terms: Vec<(CoeffField, [u8; 3])> = self.quadratic_part().terms().to_vec();
        for j in 0..3 {
            if !self.s[j].is_zero() {
                let mut idx = [0u8; 3];
                idx[j] = 1;
                terms.push((self.s[j].clone(), idx));
            }
        }
        if !self.m.is_zero() {
            terms.push((self.m.clone(), [0, 0, 0]));
        }
        MomentumPolynomial::from_terms(terms)
    }

    /// Recover a spec from a degree-two covariant polynomial.  The linear
    /// and constant parts map to (s, m) directly; the quadratic part is
    /// matched against the 21 generator products by least squares on
    /// monomial coefficients.  Diagonal gamma entries are kept as found
    /// (no automatic reduction against H and the Cartesian integrals).
    pub fn from_polynomial(poly: &MomentumPolynomial) -> Result<Self> {
        if poly.degree() > 2 {
            return Err(Error::Structural(
                "only degree-two polynomials admit a quadratic spec".into(),
            ));
        }
        let mut s: [CoeffField; 3] = Default::default();
        let mut m = CoeffField::zero();
        let mut quad: Vec<(CoeffField, [u8; 3])> = Vec::new();
        for (c, idx) in poly.terms() {
            match idx[0] + idx[1] + idx[2] {
                0 => m = m.add(c),
                1 => {
                    let j = (0..3).find(|&j| idx[j] == 1).unwrap();
                    s[j] = s[j].add(c);
                }
                _ => quad.push((c.clone(), idx)),
            }
        }
        let target = CanonicalPolynomial::from_terms(quad);

        // 21 unknowns: alpha (i<=j), beta (all), gamma (i<=j).
        let mut generators: Vec<(usize, usize, usize, CanonicalPolynomial)> = Vec::new();
        {
            let p: Vec<CanonicalPolynomial> =
                (0..3).map(CanonicalPolynomial::momentum).collect();
            let l: Vec<CanonicalPolynomial> = (0..3).map(angular_formal).collect();
            for i in 0..3 {
                for j in i..3 {
                    generators.push((0, i, j, l[i].mul(&l[j])));
                }
            }
            for i in 0..3 {
                for j in 0..3 {
                    generators.push((1, i, j, p[i].mul(&l[j])));
                }
            }
            for i in 0..3 {
                for j in i..3 {
                    generators.push((2, i, j, p[i].mul(&p[j])));
                }
            }
        }

        // Row space: (momentum index, x-monomial powers) pairs.
        use std::collections::BTreeMap;
        let mut rows: BTreeMap<([u8; 3], [i32; 3]), usize> = BTreeMap::new();
        let collect = |cp: &CanonicalPolynomial,
                           rows: &mut BTreeMap<([u8; 3], [i32; 3]), usize>|
         -> Result<()> {
            for (c, idx) in cp.terms() {
                for t in c.terms() {
                    let mut pows = [0i32; 3];
                    for k in 0..3 {
                        let a = t.a[k];
                        if a.exp_rate != 0.0
                            || a.log_power != 0
                            || a.power.fract() != 0.0
                            || a.power < 0.0
                        {
                            return Err(Error::Structural(
                                "quadratic part is not polynomial in x".into(),
                            ));
                        }
                        pows[k] = a.power as i32;
                    }
                    let nrows = rows.len();
                    rows.entry((*idx, pows)).or_insert(nrows);
                }
            }
            Ok(())
        };
        collect(&target, &mut rows)?;
        for (_, _, _, g) in &generators {
            collect(g, &mut rows)?;
        }

        let nr = rows.len();
        let nc = generators.len();
        let mut a = DMatrix::<f64>::zeros(nr, nc);
        let mut b = DVector::<f64>::zeros(nr);
        let fill = |cp: &CanonicalPolynomial, mut put: Box<dyn FnMut(usize, f64) + '_>| {
            for (c, idx) in cp.terms() {
                for t in c.terms() {
                    let pows = [
                        t.a[0].power as i32,
                        t.a[1].power as i32,
                        t.a[2].power as i32,
                    ];
                    let row = rows[&(*idx, pows)];
                    put(row, t.c);
                }
            }
        };
        fill(&target, Box::new(|r, v| b[r] += v));
        for (col, (_, _, _, g)) in generators.iter().enumerate() {
            fill(g, Box::new(|r, v| a[(r, col)] += v));
        }

        let svd = a.clone().svd(true, true);
        let u = svd.solve(&b, 1.0e-10).map_err(|e| {
            Error::Structural(format!("generator matching failed: {e}"))
        })?;
        let resid = (&a * &u - &b).norm();
        if resid > 1.0e-8 * (1.0 + b.norm()) {
            return Err(Error::Structural(
                "quadratic part is not a generator combination".into(),
            ));
        }

        let mut spec = QuadraticIntegralSpec {
            s,
            m,
            ..Default::default()
        };
        for (col, (kind, i, j, _)) in generators.iter().enumerate() {
            let v = u[col];
            match kind {
                0 => spec.alpha[*i][*j] = v,
                1 => spec.beta[*i][*j] = v,
                _ => spec.gamma[*i][*j] = v,
            }
        }
        Ok(spec)
    }
}

/// One determining (or compatibility) equation as a list of additive term
/// fields; residual = sum of terms, normalization by the term magnitudes.
struct Equation {
    name: &'static str,
    terms: Vec<CoeffField>,
}

/// Precomputed analytic residual fields for a (system, spec) pair;
/// evaluating at many points reuses all the symbolic work.
pub struct ResidualEvaluator {
    determining: Vec<Equation>,
    compatibility: Vec<Equation>,
}

impl ResidualEvaluator {
    pub fn new(sys: &MagneticSystem, spec: &QuadraticIntegralSpec) -> Self {
        let (h, n) = spec.leading_fields();
        let b = sys.b_field();
        let w = sys.grad_w_fields();
        let s = &spec.s;
        let m = &spec.m;
        let neg = |f: CoeffField| f.scale(-1.0);
        let hd = |i: usize, j: usize| h[i].sub(&h[j]).scale(2.0);

        // Right-hand sides of the six second-order equations.
        let r1 = vec![n[1].mul(&b[1]), neg(n[2].mul(&b[2]))];
        let r2 = vec![n[2].mul(&b[2]), neg(n[0].mul(&b[0]))];
        let r3 = vec![n[0].mul(&b[0]), neg(n[1].mul(&b[1]))];
        let r12 = vec![n[0].mul(&b[1]), neg(n[1].mul(&b[0])), hd(0, 1).mul(&b[2])];
        let r13 = vec![n[2].mul(&b[0]), neg(n[0].mul(&b[2])), hd(2, 0).mul(&b[1])];
        let r23 = vec![n[1].mul(&b[2]), neg(n[2].mul(&b[1])), hd(1, 2).mul(&b[0])];

        // Right-hand sides of the three first-order equations.
        let g1 = vec![
            h[0].mul(&w[0]).scale(2.0),
            n[2].mul(&w[1]),
            n[1].mul(&w[2]),
            s[2].mul(&b[1]),
            neg(s[1].mul(&b[2])),
        ];
        let g2 = vec![
            n[2].mul(&w[0]),
            h[1].mul(&w[1]).scale(2.0),
            n[0].mul(&w[2]),
            s[0].mul(&b[2]),
            neg(s[2].mul(&b[0])),
        ];
        let g3 = vec![
            n[1].mul(&w[0]),
            n[0].mul(&w[1]),
            h[2].mul(&w[2]).scale(2.0),
            s[1].mul(&b[0]),
            neg(s[0].mul(&b[1])),
        ];

        let eq = |name: &'static str, lhs: Vec<CoeffField>, rhs: &[CoeffField]| Equation {
            name,
            terms: lhs
                .into_iter()
                .chain(rhs.iter().map(|f| f.scale(-1.0)))
                .collect(),
        };

        let determining = vec![
            eq("2ord-1", vec![s[0].partial(0)], &r1),
            eq("2ord-2", vec![s[1].partial(1)], &r2),
            eq("2ord-3", vec![s[2].partial(2)], &r3),
            eq("2ord-4", vec![s[0].partial(1), s[1].partial(0)], &r12),
            eq("2ord-5", vec![s[0].partial(2), s[2].partial(0)], &r13),
            eq("2ord-6", vec![s[2].partial(1), s[1].partial(2)], &r23),
            eq("1ord-1", vec![m.partial(0)], &g1),
            eq("1ord-2", vec![m.partial(1)], &g2),
            eq("1ord-3", vec![m.partial(2)], &g3),
            eq(
                "0ord",
                vec![s[0].mul(&w[0]), s[1].mul(&w[1]), s[2].mul(&w[2])],
                &[],
            ),
        ];

        // Mixed-derivative compatibility identities with every s-derivative
        // replaced by its second-order right-hand side.
        let sum = |v: &[CoeffField]| {
            v.iter()
                .fold(CoeffField::zero(), |acc, f| acc.add(f))
        };
        let r1f = sum(&r1);
        let r2f = sum(&r2);
        let r3f = sum(&r3);
        let r12f = sum(&r12);
        let r13f = sum(&r13);
        let r23f = sum(&r23);
        let d2 = |f: &CoeffField, i: usize, j: usize| f.partial(i).partial(j);

        let compatibility = vec![
            Equation {
                name: "s-1",
                terms: vec![
                    d2(&r1f, 1, 1),
                    d2(&r2f, 0, 0),
                    neg(d2(&r12f, 0, 1)),
                ],
            },
            Equation {
                name: "s-2",
                terms: vec![
                    d2(&r1f, 2, 2),
                    d2(&r3f, 0, 0),
                    neg(d2(&r13f, 0, 2)),
                ],
            },
            Equation {
                name: "s-3",
                terms: vec![
                    d2(&r2f, 2, 2),
                    d2(&r3f, 1, 1),
                    neg(d2(&r23f, 1, 2)),
                ],
            },
            Equation {
                name: "s-4",
                terms: vec![
                    d2(&r12f, 0, 2),
                    neg(d2(&r1f, 1, 2).scale(2.0)),
                    d2(&r13f, 0, 1),
                    neg(d2(&r23f, 0, 0)),
                ],
            },
            Equation {
                name: "s-5",
                terms: vec![
                    d2(&r12f, 1, 2),
                    neg(d2(&r2f, 0, 2).scale(2.0)),
                    d2(&r23f, 0, 1),
                    neg(d2(&r13f, 1, 1)),
                ],
            },
            Equation {
                name: "s-6",
                terms: vec![
                    d2(&r13f, 1, 2),
                    neg(d2(&r3f, 0, 1).scale(2.0)),
                    d2(&r23f, 0, 2),
                    neg(d2(&r12f, 2, 2)),
                ],
            },
            Equation {
                name: "m-12",
                terms: vec![sum(&g1).partial(1), neg(sum(&g2).partial(0))],
            },
            Equation {
                name: "m-13",
                terms: vec![sum(&g1).partial(2), neg(sum(&g3).partial(0))],
            },
            Equation {
                name: "m-23",
                terms: vec![sum(&g2).partial(2), neg(sum(&g3).partial(1))],
            },
        ];

        ResidualEvaluator {
            determining,
            compatibility,
        }
    }

    fn eval(eqs: &[Equation], x: &[f64; 3]) -> Vec<NamedResidual> {
        eqs.iter()
            .map(|eq| {
                let mut raw = 0.0;
                let mut mag = 0.0;
                for t in &eq.terms {
                    let v = t.eval(x);
                    raw += v;
                    mag += v.abs();
                }
                NamedResidual {
                    name: eq.name,
                    raw,
                    normalized: raw / (1.0 + mag),
                }
            })
            .collect()
    }

    pub fn determining_at(&self, x: &[f64; 3]) -> Vec<NamedResidual> {
        Self::eval(&self.determining, x)
    }

    pub fn compatibility_at(&self, x: &[f64; 3]) -> Vec<NamedResidual> {
        Self::eval(&self.compatibility, x)
    }
}

/// Residuals of the ten determining equations at x.
pub fn determining_residuals(
    sys: &MagneticSystem,
    spec: &QuadraticIntegralSpec,
    x: &[f64; 3],
) -> Result<Vec<NamedResidual>> {
    sys.check_admissible(x)?;
    Ok(ResidualEvaluator::new(sys, spec).determining_at(x))
}

/// Residuals of the six mixed-derivative identities and three symmetry
/// identities, with all s- and m-derivatives replaced by the corresponding
/// determining-equation right-hand sides.
pub fn compatibility_residuals(
    sys: &MagneticSystem,
    spec: &QuadraticIntegralSpec,
    x: &[f64; 3],
) -> Result<Vec<NamedResidual>> {
    sys.check_admissible(x)?;
    Ok(ResidualEvaluator::new(sys, spec).compatibility_at(x))
}
