//! Coordinate fields: sums of separable products of univariate atoms.
//!
//! A `CoeffField` is a finite sum of terms `c * f1(x1) * f2(x2) * f3(x3)`
//! where each factor is a coefficient-free atom from the [`crate::scalar`]
//! family.  The representation is closed under addition, multiplication and
//! partial differentiation, which keeps every derivative in the library
//! analytic.

use crate::scalar::{is_integer, powx, Atom, Domain, ScalarFunction1D};

/// A coefficient-free atom `x^power * exp(exp_rate x) * ln|x|^log_power`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonicAtom {
    pub power: f64,
    pub exp_rate: f64,
    pub log_power: u32,
}

impl MonicAtom {
    pub const ONE: MonicAtom = MonicAtom {
        power: 0.0,
        exp_rate: 0.0,
        log_power: 0,
    };

    fn key(&self) -> (u64, u64, u32) {
        (self.power.to_bits(), self.exp_rate.to_bits(), self.log_power)
    }

    fn is_one(&self) -> bool {
        self.power == 0.0 && self.exp_rate == 0.0 && self.log_power == 0
    }

    fn eval(&self, x: f64) -> f64 {
        if self.is_one() {
            return 1.0;
        }
        let mut v = powx(x, self.power);
        if self.exp_rate != 0.0 {
            v *= (self.exp_rate * x).exp();
        }
        if self.log_power > 0 {
            v *= x.abs().ln().powi(self.log_power as i32);
        }
        v
    }

    /// d/dx as a list of (weight, atom) pairs.
    fn derivative(&self) -> Vec<(f64, MonicAtom)> {
        let mut out = Vec::with_capacity(3);
        if self.power != 0.0 {
            out.push((
                self.power,
                MonicAtom {
                    power: canon(self.power - 1.0),
                    ..*self
                },
            ));
        }
        if self.exp_rate != 0.0 {
            out.push((self.exp_rate, *self));
        }
        if self.log_power > 0 {
            out.push((
                self.log_power as f64,
                MonicAtom {
                    power: canon(self.power - 1.0),
                    exp_rate: self.exp_rate,
                    log_power: self.log_power - 1,
                },
            ));
        }
        out
    }

    fn mul(&self, other: &MonicAtom) -> MonicAtom {
        MonicAtom {
            power: canon(self.power + other.power),
            exp_rate: canon(self.exp_rate + other.exp_rate),
            log_power: self.log_power + other.log_power,
        }
    }

    fn domain(&self) -> Domain {
        if !is_integer(self.power) {
            Domain::Positive
        } else if self.power < 0.0 || self.log_power > 0 {
            Domain::Nonzero
        } else {
            Domain::All
        }
    }
}

fn canon(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// One separable term `c * a[0](x1) * a[1](x2) * a[2](x3)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldTerm {
    pub c: f64,
    pub a: [MonicAtom; 3],
}

impl FieldTerm {
    fn key(&self) -> [(u64, u64, u32); 3] {
        [self.a[0].key(), self.a[1].key(), self.a[2].key()]
    }
}

/// A sum of separable terms over the three spatial coordinates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoeffField {
    terms: Vec<FieldTerm>,
}

impl CoeffField {
    pub fn zero() -> Self {
        CoeffField { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms(vec![FieldTerm {
            c,
            a: [MonicAtom::ONE; 3],
        }])
    }

    pub fn from_terms(terms: Vec<FieldTerm>) -> Self {
        let mut f = CoeffField { terms };
        f.normalize();
        f
    }

    /// Lift a univariate function into the field algebra as a function of
    /// coordinate `coord` (0-based).
    pub fn from_scalar(coord: usize, f: &ScalarFunction1D) -> Self {
        assert!(coord < 3);
        let terms = f
            .terms()
            .iter()
            .map(|t: &Atom| {
                let mut a = [MonicAtom::ONE; 3];
                a[coord] = MonicAtom {
                    power: t.power,
                    exp_rate: t.exp_rate,
                    log_power: t.log_power,
                };
                FieldTerm { c: t.coeff, a }
            })
            .collect();
        Self::from_terms(terms)
    }

    /// The coordinate function x_coord itself.
    pub fn coordinate(coord: usize) -> Self {
        Self::from_scalar(coord, &ScalarFunction1D::monomial(1.0, 1))
    }

    pub fn terms(&self) -> &[FieldTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn normalize(&mut self) {
        self.terms.sort_by(|a, b| a.key().cmp(&b.key()));
        let mut merged: Vec<FieldTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.key() == t.key() => last.c += t.c,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.c != 0.0);
        self.terms = merged;
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::from_terms(terms)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| FieldTerm { c: t.c * k, a: t.a })
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for u in &self.terms {
            for v in &other.terms {
                terms.push(FieldTerm {
                    c: u.c * v.c,
                    a: [
                        u.a[0].mul(&v.a[0]),
                        u.a[1].mul(&v.a[1]),
                        u.a[2].mul(&v.a[2]),
                    ],
                });
            }
        }
        Self::from_terms(terms)
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Exact partial derivative with respect to x_coord.
    pub fn partial(&self, coord: usize) -> Self {
        assert!(coord < 3);
        let mut terms = Vec::new();
        for t in &self.terms {
            for (w, da) in t.a[coord].derivative() {
                let mut a = t.a;
                a[coord] = da;
                terms.push(FieldTerm { c: t.c * w, a });
            }
        }
        Self::from_terms(terms)
    }

    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.c * t.a[0].eval(x[0]) * t.a[1].eval(x[1]) * t.a[2].eval(x[2]))
            .sum()
    }

    /// Domain restriction imposed on coordinate `coord` by any term.
    pub fn domain(&self, coord: usize) -> Domain {
        self.terms
            .iter()
            .fold(Domain::All, |d, t| d.join(t.a[coord].domain()))
    }
}
