//! Univariate analytic functions built from a fixed, differentiation-closed
//! atom family.
//!
//! Every function is a finite sum of atoms of the form
//! `c * x^e * exp(b x) * ln|x|^k` with real `e`, real `b` and small integer
//! `k >= 0`.  The family is closed under d/dx, so all derivatives (to any
//! order) are exact; no numerical differentiation happens anywhere in the
//! production path.

/// Where a function is defined on the real line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Domain {
    /// Entire real line.
    All,
    /// x != 0 (negative integer powers, logarithms).
    Nonzero,
    /// x > 0 (non-integer real powers).
    Positive,
}

impl Domain {
    pub fn join(self, other: Domain) -> Domain {
        self.max(other)
    }
}

/// A single atom `coeff * x^power * exp(exp_rate * x) * ln|x|^log_power`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub coeff: f64,
    pub power: f64,
    pub exp_rate: f64,
    pub log_power: u32,
}

/// Canonicalize -0.0 to 0.0 so bitwise term-merging keys behave.
fn canon(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

pub(crate) fn is_integer(e: f64) -> bool {
    e.fract() == 0.0 && e.abs() < 1.0e9
}

/// x^e, using exact integer exponentiation when possible (valid for x < 0),
/// falling back to powf (x > 0 only) for real exponents.
pub(crate) fn powx(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if is_integer(e) {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

impl Atom {
    pub fn new(coeff: f64, power: f64, exp_rate: f64, log_power: u32) -> Atom {
        Atom {
            coeff,
            power: canon(power),
            exp_rate: canon(exp_rate),
            log_power,
        }
    }

    pub fn key(&self) -> (u64, u64, u32) {
        (self.power.to_bits(), self.exp_rate.to_bits(), self.log_power)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut v = self.coeff * powx(x, self.power);
        if self.exp_rate != 0.0 {
            v *= (self.exp_rate * x).exp();
        }
        if self.log_power > 0 {
            v *= x.abs().ln().powi(self.log_power as i32);
        }
        v
    }

    /// d/dx of the atom; at most three atoms come out.
    pub fn derivative(&self) -> Vec<Atom> {
        let mut out = Vec::with_capacity(3);
        if self.power != 0.0 {
            out.push(Atom::new(
                self.coeff * self.power,
                self.power - 1.0,
                self.exp_rate,
                self.log_power,
            ));
        }
        if self.exp_rate != 0.0 {
            out.push(Atom::new(
                self.coeff * self.exp_rate,
                self.power,
                self.exp_rate,
                self.log_power,
            ));
        }
        if self.log_power > 0 {
            out.push(Atom::new(
                self.coeff * self.log_power as f64,
                self.power - 1.0,
                self.exp_rate,
                self.log_power - 1,
            ));
        }
        out
    }

    pub fn domain(&self) -> Domain {
        if !is_integer(self.power) {
            Domain::Positive
        } else if self.power < 0.0 || self.log_power > 0 {
            Domain::Nonzero
        } else {
            Domain::All
        }
    }
}

/// A finite sum of atoms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScalarFunction1D {
    terms: Vec<Atom>,
}

impl ScalarFunction1D {
    pub fn zero() -> Self {
        ScalarFunction1D { terms: Vec::new() }
    }

    pub fn from_atoms(terms: Vec<Atom>) -> Self {
        let mut f = ScalarFunction1D { terms };
        f.normalize();
        f
    }

    pub fn constant(c: f64) -> Self {
        Self::from_atoms(vec![Atom::new(c, 0.0, 0.0, 0)])
    }

    /// c * x^k for integer k.
    pub fn monomial(c: f64, k: i32) -> Self {
        Self::from_atoms(vec![Atom::new(c, k as f64, 0.0, 0)])
    }

    /// c * x^e for real e (integer e is routed to the monomial case).
    pub fn power(c: f64, e: f64) -> Self {
        Self::from_atoms(vec![Atom::new(c, e, 0.0, 0)])
    }

    /// c * exp(b x).
    pub fn exponential(c: f64, b: f64) -> Self {
        Self::from_atoms(vec![Atom::new(c, 0.0, b, 0)])
    }

    /// c * ln|x|.
    pub fn log(c: f64) -> Self {
        Self::from_atoms(vec![Atom::new(c, 0.0, 0.0, 1)])
    }

    /// c * ln|x|^2.
    pub fn log_squared(c: f64) -> Self {
        Self::from_atoms(vec![Atom::new(c, 0.0, 0.0, 2)])
    }

    pub fn terms(&self) -> &[Atom] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn normalize(&mut self) {
        self.terms.sort_by(|a, b| a.key().cmp(&b.key()));
        let mut merged: Vec<Atom> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.key() == t.key() => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        self.terms = merged;
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::from_atoms(terms)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::from_atoms(
            self.terms
                .iter()
                .map(|t| Atom::new(t.coeff * k, t.power, t.exp_rate, t.log_power))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Atom::new(
                    a.coeff * b.coeff,
                    a.power + b.power,
                    a.exp_rate + b.exp_rate,
                    a.log_power + b.log_power,
                ));
            }
        }
        Self::from_atoms(terms)
    }

    pub fn derivative(&self) -> Self {
        let mut terms = Vec::new();
        for t in &self.terms {
            terms.extend(t.derivative());
        }
        Self::from_atoms(terms)
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        let mut f = self.clone();
        for _ in 0..n {
            f = f.derivative();
        }
        f
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn domain(&self) -> Domain {
        self.terms
            .iter()
            .fold(Domain::All, |d, t| d.join(t.domain()))
    }
}
