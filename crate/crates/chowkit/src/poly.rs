//! Multivariate polynomial arithmetic over named parameters with exact
//! rational coefficients.
//!
//! `PolyExpr` is the ring every intersection number lives in. Values are
//! kept in canonical form at all times: no zero coefficients, no zero
//! exponents, and a fixed monomial order, so structural equality is
//! mathematical equality and serialization is deterministic.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rat::{as_int, rat, Int, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("polynomial has degree {degree} in {param}, expected exactly 1")]
    NotLinear { param: String, degree: u32 },
    #[error("coefficient of {param} involves parameters: {coeff}")]
    NonConstantCoefficient { param: String, coeff: String },
    #[error("no assignment for parameter {0}")]
    MissingAssignment(String),
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("{dividend} is not exactly divisible by {divisor}")]
    NotDivisible { dividend: String, divisor: String },
}

/// A named formal parameter.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Param(Arc<str>);

impl Param {
    pub fn new(name: impl AsRef<str>) -> Self {
        Param(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A power product of parameters. Kept sorted by name with no zero
/// exponents; the empty monomial is the constant 1.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(Vec<(Param, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(p: Param) -> Self {
        Monomial(vec![(p, 1)])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, p: &Param) -> u32 {
        self.0
            .iter()
            .find(|(q, _)| q == p)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn factors(&self) -> &[(Param, u32)] {
        &self.0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out: Vec<(Param, u32)> = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            match (self.0.get(i), other.0.get(j)) {
                (Some((pa, ea)), Some((pb, eb))) => match pa.cmp(pb) {
                    Ordering::Less => {
                        out.push((pa.clone(), *ea));
                        i += 1;
                    }
                    Ordering::Greater => {
                        out.push((pb.clone(), *eb));
                        j += 1;
                    }
                    Ordering::Equal => {
                        out.push((pa.clone(), ea + eb));
                        i += 1;
                        j += 1;
                    }
                },
                (Some((pa, ea)), None) => {
                    out.push((pa.clone(), *ea));
                    i += 1;
                }
                (None, Some((pb, eb))) => {
                    out.push((pb.clone(), *eb));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Monomial(out)
    }

    fn without(&self, p: &Param) -> Monomial {
        Monomial(self.0.iter().filter(|(q, _)| q != p).cloned().collect())
    }

    /// Divide by `other` if every exponent allows it.
    fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::new();
        for (p, e) in &self.0 {
            let eo = other.exponent(p);
            if eo > *e {
                return None;
            }
            if eo < *e {
                out.push((p.clone(), e - eo));
            }
        }
        for (p, _) in &other.0 {
            if self.exponent(p) == 0 {
                return None;
            }
        }
        Some(Monomial(out))
    }
}

/// Graded order: lower total degree sorts first; within a degree, a higher
/// power of an alphabetically earlier parameter sorts first. This is the
/// serialization order, e.g. `-2*c12 + 2*d - 15*d*r + 3*d*n*r`.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let (mut i, mut j) = (0, 0);
            loop {
                match (self.0.get(i), other.0.get(j)) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Less,
                    (None, Some(_)) => return Ordering::Greater,
                    (Some((pa, ea)), Some((pb, eb))) => match pa.cmp(pb) {
                        Ordering::Less => return Ordering::Less,
                        Ordering::Greater => return Ordering::Greater,
                        Ordering::Equal => match ea.cmp(eb) {
                            Ordering::Less => return Ordering::Greater,
                            Ordering::Greater => return Ordering::Less,
                            Ordering::Equal => {
                                i += 1;
                                j += 1;
                            }
                        },
                    },
                }
            }
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in canonical form: a map from monomials to nonzero
/// rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PolyExpr {
    terms: BTreeMap<Monomial, Rat>,
}

impl PolyExpr {
    pub fn zero() -> Self {
        PolyExpr::default()
    }

    pub fn one() -> Self {
        PolyExpr::constant(rat(1))
    }

    pub fn constant(c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        PolyExpr { terms }
    }

    pub fn int(n: i64) -> Self {
        PolyExpr::constant(rat(n))
    }

    pub fn param(p: &Param) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(p.clone()), rat(1));
        PolyExpr { terms }
    }

    pub fn var(name: &str) -> Self {
        PolyExpr::param(&Param::new(name))
    }

    pub fn monomial(m: Monomial, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        PolyExpr { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The constant value if no parameter occurs.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(rat(0)),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if m.degree() == 0 {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn params(&self) -> BTreeSet<Param> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (p, _) in m.factors() {
                out.insert(p.clone());
            }
        }
        out
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, p: &Param) -> u32 {
        self.terms.keys().map(|m| m.exponent(p)).max().unwrap_or(0)
    }

    fn insert(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &PolyExpr) -> PolyExpr {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> PolyExpr {
        PolyExpr {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &PolyExpr) -> PolyExpr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PolyExpr) -> PolyExpr {
        let mut out = PolyExpr::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> PolyExpr {
        if c.is_zero() {
            return PolyExpr::zero();
        }
        PolyExpr {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> PolyExpr {
        let mut out = PolyExpr::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Replace every occurrence of `x` by `v` and re-canonicalize.
    pub fn substitute(&self, x: &Param, v: &PolyExpr) -> PolyExpr {
        let maxe = self.degree_in(x);
        if maxe == 0 {
            return self.clone();
        }
        let mut powers: Vec<PolyExpr> = Vec::with_capacity(maxe as usize + 1);
        powers.push(PolyExpr::one());
        for k in 1..=maxe {
            let next = powers[(k - 1) as usize].mul(v);
            powers.push(next);
        }
        let mut out = PolyExpr::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(x);
            let rest = PolyExpr::monomial(m.without(x), c.clone());
            out = out.add(&rest.mul(&powers[e as usize]));
        }
        out
    }

    /// Substitute the rational value `num/den` for `x`, clearing
    /// denominators: returns `den^deg_x(p) * p[x := num/den]`.
    pub fn substitute_rational(&self, x: &Param, num: &PolyExpr, den: &PolyExpr) -> PolyExpr {
        let deg = self.degree_in(x);
        let coeffs = self.coefficients_in(x);
        let mut out = PolyExpr::zero();
        for (i, ci) in coeffs.iter().enumerate() {
            let term = ci.mul(&num.pow(i as u32)).mul(&den.pow(deg - i as u32));
            out = out.add(&term);
        }
        out
    }

    /// Coefficients of `self` viewed as a univariate polynomial in `x`,
    /// lowest power first. Always returns `degree_in(x) + 1` entries.
    pub fn coefficients_in(&self, x: &Param) -> Vec<PolyExpr> {
        let deg = self.degree_in(x) as usize;
        let mut out = vec![PolyExpr::zero(); deg + 1];
        for (m, c) in &self.terms {
            let e = m.exponent(x) as usize;
            out[e] = out[e].add(&PolyExpr::monomial(m.without(x), c.clone()));
        }
        out
    }

    /// Solve `self = 0` for `x`. Requires degree exactly 1 in `x` with a
    /// constant rational coefficient.
    pub fn solve_linear(&self, x: &Param) -> Result<PolyExpr, PolyError> {
        let deg = self.degree_in(x);
        if deg != 1 {
            return Err(PolyError::NotLinear {
                param: x.name().to_string(),
                degree: deg,
            });
        }
        let coeffs = self.coefficients_in(x);
        let a = &coeffs[1];
        let b = &coeffs[0];
        let ac = a.as_constant().ok_or_else(|| PolyError::NonConstantCoefficient {
            param: x.name().to_string(),
            coeff: a.to_string(),
        })?;
        if ac.is_zero() {
            return Err(PolyError::NotLinear {
                param: x.name().to_string(),
                degree: deg,
            });
        }
        Ok(b.scale(&(-ac.recip())))
    }

    /// Exact evaluation; the assignment must cover every parameter.
    pub fn eval(&self, assignment: &BTreeMap<Param, Rat>) -> Result<Rat, PolyError> {
        let mut out = rat(0);
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (p, e) in m.factors() {
                let x = assignment
                    .get(p)
                    .ok_or_else(|| PolyError::MissingAssignment(p.name().to_string()))?;
                for _ in 0..*e {
                    v *= x;
                }
            }
            out += v;
        }
        Ok(out)
    }

    /// Exact division, `None` when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &PolyExpr) -> Option<PolyExpr> {
        if divisor.is_zero() {
            return None;
        }
        let (lm, lc) = divisor
            .terms
            .iter()
            .next_back()
            .map(|(m, c)| (m.clone(), c.clone()))?;
        let mut rem = self.clone();
        let mut quot = PolyExpr::zero();
        while !rem.is_zero() {
            let (m, c) = rem.terms.iter().next_back().map(|(m, c)| (m.clone(), c.clone()))?;
            let qm = m.div(&lm)?;
            let qc = &c / &lc;
            let t = PolyExpr::monomial(qm, qc);
            quot = quot.add(&t);
            rem = rem.sub(&t.mul(divisor));
        }
        Some(quot)
    }

    /// Leading term in the graded order (highest degree; ties broken by
    /// the serialization order, last term winning). Used to normalize
    /// signs.
    fn leading(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    /// Primitive integer form: multiply by the lcm of coefficient
    /// denominators, divide by the gcd of the resulting integers, and
    /// normalize the sign of the leading term to be positive. Zero maps
    /// to zero.
    pub fn primitive(&self) -> PolyExpr {
        if self.is_zero() {
            return PolyExpr::zero();
        }
        let mut lcm = Int::one();
        for c in self.terms.values() {
            lcm = num_integer::lcm(lcm, c.denom().clone());
        }
        let mut gcd = Int::zero();
        for c in self.terms.values() {
            let n = c.numer() * &lcm / c.denom();
            gcd = num_integer::gcd(gcd, n);
        }
        let scale = Rat::new(lcm, gcd);
        let mut out = self.scale(&scale);
        if out.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            out = out.neg();
        }
        out
    }

    /// `self * (self-1) * ... * (self-k+1) / k!`, expanded.
    pub fn binom(&self, k: u32) -> PolyExpr {
        let mut num = PolyExpr::one();
        let mut fact = rat(1);
        for i in 0..k {
            num = num.mul(&self.sub(&PolyExpr::int(i as i64)));
            fact *= rat(i as i64 + 1);
        }
        num.scale(&fact.recip())
    }
}

/// Binomial coefficient of a polynomial argument, `p` choose `k`.
pub fn binom_poly(p: &PolyExpr, k: u32) -> PolyExpr {
    p.binom(k)
}

impl fmt::Display for PolyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = if neg { -c } else { c.clone() };
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let show_coeff = !abs.is_one() || m.degree() == 0;
            if show_coeff {
                match as_int(&abs) {
                    Some(n) => write!(f, "{}", n)?,
                    None => write!(f, "{}/{}", abs.numer(), abs.denom())?,
                }
            }
            for (j, (p, e)) in m.factors().iter().enumerate() {
                if show_coeff || j > 0 {
                    write!(f, "*")?;
                }
                write!(f, "{}", p)?;
                if *e > 1 {
                    write!(f, "^{}", e)?;
                }
            }
        }
        Ok(())
    }
}

impl std::ops::Add for &PolyExpr {
    type Output = PolyExpr;
    fn add(self, rhs: &PolyExpr) -> PolyExpr {
        PolyExpr::add(self, rhs)
    }
}

impl std::ops::Sub for &PolyExpr {
    type Output = PolyExpr;
    fn sub(self, rhs: &PolyExpr) -> PolyExpr {
        PolyExpr::sub(self, rhs)
    }
}

impl std::ops::Mul for &PolyExpr {
    type Output = PolyExpr;
    fn mul(self, rhs: &PolyExpr) -> PolyExpr {
        PolyExpr::mul(self, rhs)
    }
}

impl std::ops::Neg for &PolyExpr {
    type Output = PolyExpr;
    fn neg(self) -> PolyExpr {
        PolyExpr::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratq;

    fn p(name: &str) -> Param {
        Param::new(name)
    }

    fn v(name: &str) -> PolyExpr {
        PolyExpr::var(name)
    }

    #[test]
    fn add_cancels() {
        // (c1 + 2) + (-c1) = 2
        let c1 = v("c1");
        let s = c1.add(&PolyExpr::int(2)).add(&c1.neg());
        assert_eq!(s, PolyExpr::int(2));
        // 0 + p = p
        let q = v("d").mul(&v("r"));
        assert_eq!(PolyExpr::zero().add(&q), q);
        // (d + e*r) + (-e*r) = d
        let er = v("e").mul(&v("r"));
        assert_eq!(v("d").add(&er).sub(&er), v("d"));
    }

    #[test]
    fn mul_expands() {
        // (c1 - 2)^2 = c1^2 - 4 c1 + 4
        let b = v("c1").sub(&PolyExpr::int(2));
        let sq = b.mul(&b);
        let want = v("c1")
            .pow(2)
            .add(&v("c1").scale(&rat(-4)))
            .add(&PolyExpr::int(4));
        assert_eq!(sq, want);
        // p * 0 = 0
        assert!(sq.mul(&PolyExpr::zero()).is_zero());
        // (3c1 - 8)(c1 - 4) a^2 / 4 = (3c1^2 - 20c1 + 32) a^2/4
        let lhs = v("c1")
            .scale(&rat(3))
            .sub(&PolyExpr::int(8))
            .mul(&v("c1").sub(&PolyExpr::int(4)))
            .mul(&v("a").pow(2))
            .scale(&ratq(1, 4));
        let want = v("c1")
            .pow(2)
            .scale(&rat(3))
            .add(&v("c1").scale(&rat(-20)))
            .add(&PolyExpr::int(32))
            .mul(&v("a").pow(2))
            .scale(&ratq(1, 4));
        assert_eq!(lhs, want);
    }

    #[test]
    fn substitute_examples() {
        // substitute(c12 - c2, c2, c12 - d) = d
        let e = v("c12").sub(&v("c2"));
        let got = e.substitute(&p("c2"), &v("c12").sub(&v("d")));
        assert_eq!(got, v("d"));
        // substitute(c1^2 - c2, c2, c1^2/4 + c1 - 2) = 3/4 c1^2 - c1 + 2
        let e = v("c1").pow(2).sub(&v("c2"));
        let val = v("c1")
            .pow(2)
            .scale(&ratq(1, 4))
            .add(&v("c1"))
            .sub(&PolyExpr::int(2));
        let got = e.substitute(&p("c2"), &val);
        let want = v("c1")
            .pow(2)
            .scale(&ratq(3, 4))
            .sub(&v("c1"))
            .add(&PolyExpr::int(2));
        assert_eq!(got, want);
        // identity substitution
        let e = v("x").pow(3).mul(&v("y")).add(&v("x"));
        assert_eq!(e.substitute(&p("x"), &v("x")), e);
    }

    #[test]
    fn solve_linear_examples() {
        // 2 c1m1 + 2d - r c12 - 3 r d - r kc1 = 0  ->  c1m1 = (-2d + r c12 + 3rd + r kc1)/2
        let e = v("c1m1")
            .scale(&rat(2))
            .add(&v("d").scale(&rat(2)))
            .sub(&v("r").mul(&v("c12")))
            .sub(&v("r").mul(&v("d")).scale(&rat(3)))
            .sub(&v("r").mul(&v("kc1")));
        let sol = e.solve_linear(&p("c1m1")).unwrap();
        let want = v("d")
            .scale(&rat(-2))
            .add(&v("r").mul(&v("c12")))
            .add(&v("r").mul(&v("d")).scale(&rat(3)))
            .add(&v("r").mul(&v("kc1")))
            .scale(&ratq(1, 2));
        assert_eq!(sol, want);
        // round trip
        assert!(e.substitute(&p("c1m1"), &sol).is_zero());
        // x - 7 = 0 -> 7
        assert_eq!(
            v("x").sub(&PolyExpr::int(7)).solve_linear(&p("x")).unwrap(),
            PolyExpr::int(7)
        );
        // r x + 1: coefficient not constant
        let e = v("r").mul(&v("x")).add(&PolyExpr::int(1));
        assert!(matches!(
            e.solve_linear(&p("x")),
            Err(PolyError::NonConstantCoefficient { .. })
        ));
        // x^2: not linear
        assert!(matches!(
            v("x").pow(2).solve_linear(&p("x")),
            Err(PolyError::NotLinear { .. })
        ));
    }

    #[test]
    fn eval_examples() {
        // n(3r - 2) - 15r + 14 at n=4, r=2 is 0
        let e = v("n")
            .mul(&v("r").scale(&rat(3)).sub(&PolyExpr::int(2)))
            .sub(&v("r").scale(&rat(15)))
            .add(&PolyExpr::int(14));
        let mut asg = BTreeMap::new();
        asg.insert(p("n"), rat(4));
        asg.insert(p("r"), rat(2));
        assert_eq!(e.eval(&asg).unwrap(), rat(0));
        // d + e(r-2) at d=2, e=0, r=5 is 2
        let e2 = v("d").add(&v("e").mul(&v("r").sub(&PolyExpr::int(2))));
        let mut asg = BTreeMap::new();
        asg.insert(p("d"), rat(2));
        asg.insert(p("e"), rat(0));
        asg.insert(p("r"), rat(5));
        assert_eq!(e2.eval(&asg).unwrap(), rat(2));
        // empty polynomial evaluates to zero with no assignment
        assert_eq!(PolyExpr::zero().eval(&BTreeMap::new()).unwrap(), rat(0));
        // missing assignment is an error
        assert!(matches!(
            e2.eval(&BTreeMap::new()),
            Err(PolyError::MissingAssignment(_))
        ));
    }

    #[test]
    fn binom_poly_examples() {
        // binom(n-1, 2) = (n^2 - 3n + 2)/2
        let got = binom_poly(&v("n").sub(&PolyExpr::int(1)), 2);
        let want = v("n")
            .pow(2)
            .sub(&v("n").scale(&rat(3)))
            .add(&PolyExpr::int(2))
            .scale(&ratq(1, 2));
        assert_eq!(got, want);
        assert_eq!(binom_poly(&v("p"), 0), PolyExpr::one());
        assert_eq!(binom_poly(&v("n"), 1), v("n"));
    }

    #[test]
    fn serialization_matches_spec_example() {
        // -2*c12 + 2*d - 15*d*r + 3*d*n*r
        let e = v("c12")
            .scale(&rat(-2))
            .add(&v("d").scale(&rat(2)))
            .sub(&v("d").mul(&v("r")).scale(&rat(15)))
            .add(&v("d").mul(&v("n")).mul(&v("r")).scale(&rat(3)));
        assert_eq!(e.to_string(), "-2*c12 + 2*d - 15*d*r + 3*d*n*r");
    }

    #[test]
    fn rational_coefficients_render() {
        let e = v("d").scale(&ratq(3, 4)).sub(&PolyExpr::constant(ratq(1, 2)));
        assert_eq!(e.to_string(), "-1/2 + 3/4*d");
        assert_eq!(PolyExpr::zero().to_string(), "0");
    }

    #[test]
    fn primitive_form() {
        // (1/12)(-2 c12 + 2d - 15 d r + 3 d n r) -> -2*c12 + 2*d - 15*d*r + 3*d*n*r
        let e = v("c12")
            .scale(&rat(-2))
            .add(&v("d").scale(&rat(2)))
            .sub(&v("d").mul(&v("r")).scale(&rat(15)))
            .add(&v("d").mul(&v("n")).mul(&v("r")).scale(&rat(3)))
            .scale(&ratq(1, 12));
        assert_eq!(
            e.primitive().to_string(),
            "-2*c12 + 2*d - 15*d*r + 3*d*n*r"
        );
        // sign normalization flips when the leading term is negative
        let e = v("c12")
            .mul(&v("r"))
            .add(&v("d").mul(&v("r")).scale(&rat(6)))
            .sub(&v("d").mul(&v("n")).mul(&v("r")))
            .scale(&ratq(1, 12));
        assert_eq!(e.primitive().to_string(), "-c12*r - 6*d*r + d*n*r");
        assert!(PolyExpr::zero().primitive().is_zero());
    }

    #[test]
    fn div_exact_works() {
        let a = v("c1").sub(&PolyExpr::int(2));
        let b = v("r").add(&v("c1"));
        let prod = a.mul(&b).scale(&ratq(-1, 6));
        let q = prod.div_exact(&a).unwrap();
        assert_eq!(q, b.scale(&ratq(-1, 6)));
        assert!(prod.div_exact(&v("d")).is_none());
        assert!(a.div_exact(&PolyExpr::zero()).is_none());
    }

    #[test]
    fn substitute_rational_clears_denominators() {
        // p = x^2 - y, x := u/w  ==>  u^2 - y w^2
        let e = v("x").pow(2).sub(&v("y"));
        let got = e.substitute_rational(&p("x"), &v("u"), &v("w"));
        let want = v("u").pow(2).sub(&v("y").mul(&v("w").pow(2)));
        assert_eq!(got, want);
    }
}
