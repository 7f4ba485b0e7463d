//! Polynomials in the covariant momenta with coordinate-dependent
//! coefficients — the representation for every conserved quantity (the
//! Hamiltonian included), plus exact Poisson brackets in both pointwise and
//! symbolic form.

use crate::error::{Error, Result};
use crate::field::CoeffField;
use crate::gauge::GaugePotential;
use crate::system::{MagneticSystem, PhasePoint};

/// Highest momentum degree the library ships (a third-order integral is the
/// largest catalog object; one bracket with H tops out at four).
pub const MAX_DEGREE: u8 = 4;

fn binom(n: u8, k: u8) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// A polynomial in the *canonical* momenta (or in any other formal momentum
/// triple, e.g. (p1, p2, kappa) for the parametric 2D integrals).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CanonicalPolynomial {
    terms: Vec<(CoeffField, [u8; 3])>,
}

fn merge_terms(mut terms: Vec<(CoeffField, [u8; 3])>) -> Vec<(CoeffField, [u8; 3])> {
    terms.sort_by(|a, b| a.1.cmp(&b.1));
    let mut out: Vec<(CoeffField, [u8; 3])> = Vec::with_capacity(terms.len());
    for (c, idx) in terms {
        match out.last_mut() {
            Some((lc, lidx)) if *lidx == idx => *lc = lc.add(&c),
            _ => out.push((c, idx)),
        }
    }
    out.retain(|(c, _)| !c.is_zero());
    out
}

impl CanonicalPolynomial {
    pub fn zero() -> Self {
        CanonicalPolynomial { terms: Vec::new() }
    }

    pub fn from_terms(terms: Vec<(CoeffField, [u8; 3])>) -> Self {
        CanonicalPolynomial {
            terms: merge_terms(terms),
        }
    }

    pub fn constant_field(c: CoeffField) -> Self {
        Self::from_terms(vec![(c, [0, 0, 0])])
    }

    pub fn momentum(j: usize) -> Self {
        let mut idx = [0u8; 3];
        idx[j] = 1;
        Self::from_terms(vec![(CoeffField::constant(1.0), idx)])
    }

    pub fn terms(&self) -> &[(CoeffField, [u8; 3])] {
        &self.terms
    }

    pub fn degree(&self) -> u8 {
        self.terms
            .iter()
            .map(|(_, i)| i[0] + i[1] + i[2])
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut t = self.terms.clone();
        t.extend_from_slice(&other.terms);
        Self::from_terms(t)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(c, i)| (c.scale(k), *i))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut t = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ca, ia) in &self.terms {
            for (cb, ib) in &other.terms {
                t.push((ca.mul(cb), [ia[0] + ib[0], ia[1] + ib[1], ia[2] + ib[2]]));
            }
        }
        Self::from_terms(t)
    }

    /// d/dx_j (acts on the coefficient fields only).
    pub fn partial_x(&self, j: usize) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(c, i)| (c.partial(j), *i))
                .collect(),
        )
    }

    /// d/dp_j.
    pub fn partial_p(&self, j: usize) -> Self {
        let mut t = Vec::new();
        for (c, i) in &self.terms {
            if i[j] > 0 {
                let mut idx = *i;
                idx[j] -= 1;
                t.push((c.scale(i[j] as f64), idx));
            }
        }
        Self::from_terms(t)
    }

    /// Canonical Poisson bracket, exact in the algebra.
    pub fn poisson(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for j in 0..3 {
            out = out
                .add(&self.partial_x(j).mul(&other.partial_p(j)))
                .sub(&other.partial_x(j).mul(&self.partial_p(j)));
        }
        out
    }

    /// Coefficient field of a given momentum multi-index.
    pub fn coeff(&self, idx: [u8; 3]) -> CoeffField {
        self.terms
            .iter()
            .find(|(_, i)| *i == idx)
            .map(|(c, _)| c.clone())
            .unwrap_or_else(CoeffField::zero)
    }
}

struct PolyTerm {
    coeff: CoeffField,
    idx: [u8; 3],
    dcoeff: [CoeffField; 3],
}

/// A polynomial in the covariant momenta p^A.
pub struct MomentumPolynomial {
    terms: Vec<PolyTerm>,
}

impl Clone for MomentumPolynomial {
    fn clone(&self) -> Self {
        MomentumPolynomial {
            terms: self
                .terms
                .iter()
                .map(|t| PolyTerm {
                    coeff: t.coeff.clone(),
                    idx: t.idx,
                    dcoeff: t.dcoeff.clone(),
                })
                .collect(),
        }
    }
}

impl std::fmt::Debug for MomentumPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list()
            .entries(self.terms.iter().map(|t| (&t.coeff, t.idx)))
            .finish()
    }
}

impl MomentumPolynomial {
    pub fn from_terms(terms: Vec<(CoeffField, [u8; 3])>) -> Self {
        let merged = merge_terms(terms);
        let terms = merged
            .into_iter()
            .map(|(coeff, idx)| {
                let dcoeff = [coeff.partial(0), coeff.partial(1), coeff.partial(2)];
                PolyTerm { coeff, idx, dcoeff }
            })
            .collect();
        MomentumPolynomial { terms }
    }

    pub fn zero() -> Self {
        Self::from_terms(Vec::new())
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms(vec![(CoeffField::constant(c), [0, 0, 0])])
    }

    pub fn constant_field(c: CoeffField) -> Self {
        Self::from_terms(vec![(c, [0, 0, 0])])
    }

    /// p_j^A (0-based j).
    pub fn momentum(j: usize) -> Self {
        let mut idx = [0u8; 3];
        idx[j] = 1;
        Self::from_terms(vec![(CoeffField::constant(1.0), idx)])
    }

    /// Covariant angular momentum l_j^A = eps_jkl x_k p_l^A.
    pub fn angular(j: usize) -> Self {
        let (k, l) = match j {
            0 => (1, 2),
            1 => (2, 0),
            2 => (0, 1),
            _ => panic!("angular index out of range"),
        };
        let mut ik = [0u8; 3];
        ik[l] = 1;
        let mut il = [0u8; 3];
        il[k] = 1;
        Self::from_terms(vec![
            (CoeffField::coordinate(k), ik),
            (CoeffField::coordinate(l).scale(-1.0), il),
        ])
    }

    /// The Hamiltonian |p^A|^2/2 + W as a member of the algebra.
    pub fn hamiltonian(sys: &MagneticSystem) -> Self {
        Self::from_terms(vec![
            (CoeffField::constant(0.5), [2, 0, 0]),
            (CoeffField::constant(0.5), [0, 2, 0]),
            (CoeffField::constant(0.5), [0, 0, 2]),
            (sys.w_field().clone(), [0, 0, 0]),
        ])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CoeffField, [u8; 3])> {
        self.terms.iter().map(|t| (&t.coeff, t.idx))
    }

    pub fn degree(&self) -> u8 {
        self.terms
            .iter()
            .map(|t| t.idx[0] + t.idx[1] + t.idx[2])
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut t: Vec<_> = self.terms().map(|(c, i)| (c.clone(), i)).collect();
        t.extend(other.terms().map(|(c, i)| (c.clone(), i)));
        Self::from_terms(t)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::from_terms(self.terms().map(|(c, i)| (c.scale(k), i)).collect())
    }

    /// Formal product (covariant momenta commute as symbols).
    pub fn mul(&self, other: &Self) -> Self {
        let mut t = Vec::new();
        for (ca, ia) in self.terms() {
            for (cb, ib) in other.terms() {
                t.push((ca.mul(cb), [ia[0] + ib[0], ia[1] + ib[1], ia[2] + ib[2]]));
            }
        }
        Self::from_terms(t)
    }

    /// Express in canonical momenta: p_j^A = p_j + A_j(x).
    pub fn to_canonical(&self, gauge: &GaugePotential) -> CanonicalPolynomial {
        self.substitute(gauge, 1.0)
    }

    /// Build from a canonical-momentum polynomial: p_j = p_j^A - A_j(x).
    pub fn from_canonical(cp: &CanonicalPolynomial, gauge: &GaugePotential) -> Self {
        // Same binomial substitution with the opposite sign.
        let fake = MomentumPolynomial::from_terms(cp.terms().to_vec());
        let shifted = fake.substitute(gauge, -1.0);
        Self::from_terms(shifted.terms().to_vec())
    }

    /// Substitute p_j -> q_j + sign*A_j for each momentum slot.
    fn substitute(&self, gauge: &GaugePotential, sign: f64) -> CanonicalPolynomial {
        let mut out: Vec<(CoeffField, [u8; 3])> = Vec::new();
        for t in &self.terms {
            // expand prod_j (q_j + sign*A_j)^{n_j}
            let mut partial: Vec<(CoeffField, [u8; 3])> =
                vec![(t.coeff.clone(), [0, 0, 0])];
            for j in 0..3 {
                let n = t.idx[j];
                if n == 0 {
                    continue;
                }
                let mut a_pow = vec![CoeffField::constant(1.0)];
                for k in 1..=n as usize {
                    let prev = a_pow[k - 1].mul(&gauge.a[j]);
                    a_pow.push(prev);
                }
                let mut next = Vec::with_capacity(partial.len() * (n as usize + 1));
                for (c, idx) in &partial {
                    for k in 0..=n {
                        let w = binom(n, k) * sign.powi(k as i32);
                        let mut nidx = *idx;
                        nidx[j] += n - k;
                        next.push((c.mul(&a_pow[k as usize]).scale(w), nidx));
                    }
                }
                partial = next;
            }
            out.extend(partial);
        }
        CanonicalPolynomial::from_terms(out)
    }

    pub fn evaluate(&self, sys: &MagneticSystem, pt: &PhasePoint) -> Result<f64> {
        let pa = sys.covariant_momentum(pt)?;
        let mut v = 0.0;
        for t in &self.terms {
            let mut mono = t.coeff.eval(&pt.x);
            for j in 0..3 {
                for _ in 0..t.idx[j] {
                    mono *= pa[j];
                }
            }
            v += mono;
        }
        Ok(v)
    }

    /// Exact canonical-variable gradient (dI/dx, dI/dp) at a point.
    pub fn gradient(&self, sys: &MagneticSystem, pt: &PhasePoint) -> Result<[f64; 6]> {
        let pa = sys.covariant_momentum(pt)?;
        let da = sys.da_fields();
        let da_val: [[f64; 3]; 3] = [0, 1, 2].map(|k| [0, 1, 2].map(|j| da[k][j].eval(&pt.x)));
        let mut g = [0.0; 6];
        for t in &self.terms {
            let c = t.coeff.eval(&pt.x);
            // monomial and its single-slot reductions
            let mono: f64 = (0..3)
                .map(|j| pa[j].powi(t.idx[j] as i32))
                .product();
            let mut red = [0.0; 3]; // d(mono)/d(pa_k)
            for k in 0..3 {
                if t.idx[k] > 0 {
                    let mut m = t.idx[k] as f64 * pa[k].powi(t.idx[k] as i32 - 1);
                    for j in 0..3 {
                        if j != k {
                            m *= pa[j].powi(t.idx[j] as i32);
                        }
                    }
                    red[k] = m;
                }
            }
            for j in 0..3 {
                let mut gx = t.dcoeff[j].eval(&pt.x) * mono;
                for k in 0..3 {
                    gx += c * red[k] * da_val[k][j];
                }
                g[j] += gx;
                g[3 + j] += c * red[j];
            }
        }
        Ok(g)
    }
}

/// Pointwise canonical Poisson bracket of two momentum polynomials.
pub fn poisson(
    f: &MomentumPolynomial,
    g: &MomentumPolynomial,
    sys: &MagneticSystem,
    pt: &PhasePoint,
) -> Result<f64> {
    let gf = f.gradient(sys, pt)?;
    let gg = g.gradient(sys, pt)?;
    let mut v = 0.0;
    for j in 0..3 {
        v += gf[j] * gg[3 + j] - gg[j] * gf[3 + j];
    }
    Ok(v)
}

/// Symbolic Poisson bracket: stays inside the momentum-polynomial algebra.
pub fn poisson_poly(
    f: &MomentumPolynomial,
    g: &MomentumPolynomial,
    sys: &MagneticSystem,
) -> MomentumPolynomial {
    let fc = f.to_canonical(&sys.gauge);
    let gc = g.to_canonical(&sys.gauge);
    MomentumPolynomial::from_canonical(&fc.poisson(&gc), &sys.gauge)
}

/// Max over the sample of |{H, I}| / (1 + |grad H| |grad I|).
pub fn bracket_residual(
    sys: &MagneticSystem,
    integral: &MomentumPolynomial,
    points: &[PhasePoint],
) -> Result<f64> {
    let h = MomentumPolynomial::hamiltonian(sys);
    let mut worst: Option<f64> = None;
    for pt in points {
        if sys.check_admissible(&pt.x).is_err() {
            continue;
        }
        let gh = h.gradient(sys, pt)?;
        let gi = integral.gradient(sys, pt)?;
        let mut br = 0.0;
        for j in 0..3 {
            br += gh[j] * gi[3 + j] - gi[j] * gh[3 + j];
        }
        let nh = gh.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ni = gi.iter().map(|v| v * v).sum::<f64>().sqrt();
        let r = br.abs() / (1.0 + nh * ni);
        worst = Some(worst.map_or(r, |w: f64| w.max(r)));
    }
    worst.ok_or_else(|| Error::DegenerateSample("no admissible points in sample".into()))
}
