//! Sparse multivariate polynomials with exact rational coefficients over
//! tagged variables, and their frozen complex counterparts used by the
//! numerical solver.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::IndexSet;
use crate::error::{FockError, Result};
use crate::fd_algebra::Q;

/// A polynomial variable.
///
/// `T` and `C` carry a pair (holes `I ⊆ [d]`, particles `B ⊆ [n]∖[d]`); the
/// coordinate `c_{I,B}` is the same quantity as `ψ_J` for `J = ([d]∖I) ∪ B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    T { holes: IndexSet, parts: IndexSet },
    Psi(IndexSet),
    C { holes: IndexSet, parts: IndexSet },
    Lambda,
    Aux(u32),
}

impl Var {
    pub fn t(holes: IndexSet, parts: IndexSet) -> Var {
        Var::T { holes, parts }
    }

    pub fn c(holes: IndexSet, parts: IndexSet) -> Var {
        Var::C { holes, parts }
    }

    /// `ψ_J` for the pair `(I, B)`.
    pub fn psi_of_pair(holes: IndexSet, parts: IndexSet, d: usize) -> Var {
        Var::Psi(IndexSet::range(d).difference(holes).union(parts))
    }

    /// `(I, B)` for `J`.
    pub fn pair_of(j: IndexSet, d: usize) -> (IndexSet, IndexSet) {
        let ref_set = IndexSet::range(d);
        (ref_set.difference(j), j.difference(ref_set))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::T { holes, parts } => write!(f, "t[{}|{}]", holes.compact(), parts.compact()),
            Var::C { holes, parts } => write!(f, "c[{}|{}]", holes.compact(), parts.compact()),
            Var::Psi(j) => write!(f, "psi[{}]", j.compact()),
            Var::Lambda => write!(f, "lambda"),
            Var::Aux(k) => write!(f, "h{k}"),
        }
    }
}

/// Sorted list of `(variable, exponent)` with positive exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_factors(vars: impl IntoIterator<Item = Var>) -> Self {
        let mut m = BTreeMap::new();
        for v in vars {
            *m.entry(v).or_insert(0u32) += 1;
        }
        Monomial(m.into_iter().collect())
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0.iter().find(|(w, _)| *w == v).map(|&(_, e)| e).unwrap_or(0)
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + o.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < o.0.len() {
            let (a, b) = (self.0[i], o.0[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&o.0[j..]);
        Monomial(out)
    }

    fn without(&self, v: Var) -> (u32, Monomial) {
        let e = self.exponent(v);
        (e, Monomial(self.0.iter().copied().filter(|(w, _)| *w != v).collect()))
    }

    fn with_power(&self, v: Var, e: u32) -> Monomial {
        if e == 0 {
            return self.clone();
        }
        self.mul(&Monomial(vec![(v, e)]))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&(v, e)| if e == 1 { v.to_string() } else { format!("{v}^{e}") })
            .collect();
        write!(f, "{}", parts.join(" * "))
    }
}

/// Exact sparse polynomial.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Monomial, Q>,
}

pub fn q_to_f64(c: Q) -> f64 {
    *c.numer() as f64 / *c.denom() as f64
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Q) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn var(v: Var) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::var(v), Q::one());
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Q)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        use std::collections::btree_map::Entry;
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Q {
        self.terms.get(m).copied().unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(&Monomial::one())
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|m| m.degree());
        match degs.next() {
            None => true,
            Some(d0) => degs.all(|d| d == d0),
        }
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|&(v, _)| v)).collect()
    }

    pub fn scale(&self, c: Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, &k)| (m.clone(), k * c)).collect() }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut r = Poly::one();
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    /// Drops every term that contains a variable matching `pred`, which is
    /// the same as substituting 0 for those variables.
    pub fn zero_out(&self, pred: impl Fn(Var) -> bool) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| !m.0.iter().any(|&(v, _)| pred(v)))
                .map(|(m, &c)| (m.clone(), c))
                .collect(),
        }
    }

    /// Replaces each variable in `subs` by its polynomial.
    pub fn substitute(&self, subs: &HashMap<Var, Poly>) -> Poly {
        let mut powers: HashMap<(Var, u32), Poly> = HashMap::new();
        let mut out = Poly::zero();
        for (m, &c) in &self.terms {
            let mut keep = Monomial::one();
            let mut acc = Poly::constant(c);
            for &(v, e) in &m.0 {
                match subs.get(&v) {
                    Some(p) => {
                        let pe = powers.entry((v, e)).or_insert_with(|| p.pow(e)).clone();
                        acc = &acc * &pe;
                    }
                    None => keep = keep.with_power(v, e),
                }
            }
            for (m2, &c2) in &acc.terms {
                out.add_term(m2.mul(&keep), c2);
            }
        }
        out
    }

    /// Renames variables.
    pub fn map_vars(&self, f: impl Fn(Var) -> Var) -> Poly {
        let mut out = Poly::zero();
        for (m, &c) in &self.terms {
            out.add_term(Monomial::from_factors(m.0.iter().flat_map(|&(v, e)| std::iter::repeat(f(v)).take(e as usize))), c);
        }
        out
    }

    pub fn derivative(&self, v: Var) -> Poly {
        let mut out = Poly::zero();
        for (m, &c) in &self.terms {
            let (e, rest) = m.without(v);
            if e > 0 {
                out.add_term(rest.with_power(v, e - 1), c * Q::from_integer(e as i64));
            }
        }
        out
    }

    /// Pads every term with powers of `h` up to the total degree.
    pub fn homogenize(&self, h: Var) -> Poly {
        let deg = self.degree();
        let mut out = Poly::zero();
        for (m, &c) in &self.terms {
            out.add_term(m.with_power(h, deg - m.degree()), c);
        }
        out
    }

    pub fn evaluate_with(&self, point: impl Fn(Var) -> Option<Complex64>) -> Result<Complex64> {
        let mut s = Complex64::zero();
        for (m, &c) in &self.terms {
            let mut t = Complex64::new(q_to_f64(c), 0.0);
            for &(v, e) in &m.0 {
                let x = point(v).ok_or(FockError::Binding(v))?;
                t *= x.powu(e);
            }
            s += t;
        }
        Ok(s)
    }

    pub fn evaluate(&self, point: &HashMap<Var, Complex64>) -> Result<Complex64> {
        self.evaluate_with(|v| point.get(&v).copied())
    }

    /// Machine form: `[{coef_num, coef_den, monomial: [[var, exp], …]}, …]`.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(m, c)| {
                serde_json::json!({
                    "coef_num": c.numer(),
                    "coef_den": c.denom(),
                    "monomial": m.0.iter().map(|(v, e)| serde_json::json!([v.to_string(), e])).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::Value::Array(terms)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, &c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            if m.0.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a} * {m}")?;
            }
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, &c) in &o.terms {
            r.add_term(m.clone(), c);
        }
        r
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, &c) in &o.terms {
            r.add_term(m.clone(), -c);
        }
        r
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-Q::one())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut r = Poly::zero();
        for (m1, &c1) in &self.terms {
            for (m2, &c2) in &o.terms {
                r.add_term(m1.mul(m2), c1 * c2);
            }
        }
        r
    }
}

/// One term of a frozen polynomial: coefficient and `(unknown index, exponent)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CTerm {
    pub coef: Complex64,
    pub vars: Vec<(usize, u32)>,
}

/// A polynomial with complex coefficients over numbered unknowns.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CPoly {
    pub terms: Vec<CTerm>,
}

impl CPoly {
    pub fn from_poly(p: &Poly, index: &HashMap<Var, usize>) -> Result<CPoly> {
        let mut terms = Vec::with_capacity(p.num_terms());
        for (m, &c) in p.terms() {
            let mut vars = Vec::with_capacity(m.0.len());
            for &(v, e) in &m.0 {
                vars.push((*index.get(&v).ok_or(FockError::Binding(v))?, e));
            }
            vars.sort_unstable();
            terms.push(CTerm { coef: Complex64::new(q_to_f64(c), 0.0), vars });
        }
        Ok(CPoly { terms })
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.vars.iter().map(|&(_, e)| e).sum::<u32>()).max().unwrap_or(0)
    }

    pub fn add_scaled(&mut self, o: &CPoly, c: Complex64) {
        for t in &o.terms {
            self.terms.push(CTerm { coef: t.coef * c, vars: t.vars.clone() });
        }
    }

    /// Multiplies by unknown `k`.
    pub fn mul_var(&self, k: usize) -> CPoly {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut vars = t.vars.clone();
                match vars.iter_mut().find(|(v, _)| *v == k) {
                    Some(f) => f.1 += 1,
                    None => {
                        vars.push((k, 1));
                        vars.sort_unstable();
                    }
                }
                CTerm { coef: t.coef, vars }
            })
            .collect();
        CPoly { terms }
    }

    /// Merges equal monomials and drops exact zeros.
    pub fn compact(&mut self) {
        let mut map: BTreeMap<Vec<(usize, u32)>, Complex64> = BTreeMap::new();
        for t in self.terms.drain(..) {
            *map.entry(t.vars).or_insert_with(Complex64::zero) += t.coef;
        }
        self.terms = map.into_iter().filter(|(_, c)| !c.is_zero()).map(|(vars, coef)| CTerm { coef, vars }).collect();
    }

    /// Pads each term with powers of unknown `h` up to degree `deg`.
    pub fn homogenize(&self, h: usize, deg: u32) -> CPoly {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let td: u32 = t.vars.iter().map(|&(_, e)| e).sum();
                let mut vars = t.vars.clone();
                if deg > td {
                    vars.push((h, deg - td));
                    vars.sort_unstable();
                }
                CTerm { coef: t.coef, vars }
            })
            .collect();
        CPoly { terms }
    }

    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        let mut s = Complex64::zero();
        for t in &self.terms {
            let mut v = t.coef;
            for &(k, e) in &t.vars {
                v *= pow(x[k], e);
            }
            s += v;
        }
        s
    }

    /// Value, with the gradient added into `grad`.
    pub fn eval_grad(&self, x: &[Complex64], grad: &mut [Complex64]) -> Complex64 {
        let mut s = Complex64::zero();
        let mut vals: Vec<Complex64> = Vec::with_capacity(8);
        let mut prefix: Vec<Complex64> = Vec::with_capacity(9);
        for t in &self.terms {
            vals.clear();
            prefix.clear();
            prefix.push(t.coef);
            for &(k, e) in &t.vars {
                let v = pow(x[k], e);
                vals.push(v);
                let last = *prefix.last().unwrap();
                prefix.push(last * v);
            }
            s += *prefix.last().unwrap();
            let mut suffix = Complex64::one();
            for (idx, &(k, e)) in t.vars.iter().enumerate().rev() {
                let d = Complex64::new(e as f64, 0.0) * pow(x[k], e - 1);
                grad[k] += prefix[idx] * d * suffix;
                suffix *= vals[idx];
            }
        }
        s
    }
}

fn pow(x: Complex64, e: u32) -> Complex64 {
    match e {
        0 => Complex64::one(),
        1 => x,
        2 => x * x,
        _ => x.powu(e),
    }
}

/// A list of exact polynomials in an ordered list of unknowns, with a complex
/// copy frozen at construction.
#[derive(Clone, Debug)]
pub struct PolynomialSystem {
    pub polys: Vec<Poly>,
    pub unknowns: Vec<Var>,
    shadow: Vec<CPoly>,
}

impl PolynomialSystem {
    pub fn new(polys: Vec<Poly>, unknowns: Vec<Var>) -> Result<Self> {
        let index: HashMap<Var, usize> = unknowns.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let shadow = polys.iter().map(|p| CPoly::from_poly(p, &index)).collect::<Result<Vec<_>>>()?;
        Ok(PolynomialSystem { polys, unknowns, shadow })
    }

    pub fn shadow(&self) -> &[CPoly] {
        &self.shadow
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.polys.len() == self.unknowns.len()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.polys.iter().map(|p| p.degree()).collect()
    }

    pub fn evaluate(&self, x: &[Complex64]) -> DVector<Complex64> {
        DVector::from_iterator(self.shadow.len(), self.shadow.iter().map(|p| p.eval(x)))
    }

    pub fn jacobian(&self, x: &[Complex64]) -> DMatrix<Complex64> {
        jacobian(&self.shadow, x)
    }
}

/// Complex polynomials over named unknowns, detached from exact arithmetic.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrozenSystem {
    pub unknowns: Vec<String>,
    pub polys: Vec<CPoly>,
}

impl FrozenSystem {
    pub fn nvars(&self) -> usize {
        self.unknowns.len()
    }

    pub fn is_square(&self) -> bool {
        self.polys.len() == self.unknowns.len()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.polys.iter().map(|p| p.degree()).collect()
    }

    /// Product of the equation degrees, saturating.
    pub fn bezout(&self) -> u128 {
        self.polys.iter().fold(1u128, |acc, p| acc.saturating_mul(p.degree() as u128))
    }

    pub fn evaluate(&self, x: &[Complex64]) -> DVector<Complex64> {
        DVector::from_iterator(self.polys.len(), self.polys.iter().map(|p| p.eval(x)))
    }

    pub fn jacobian(&self, x: &[Complex64]) -> DMatrix<Complex64> {
        jacobian(&self.polys, x)
    }
}

impl PolynomialSystem {
    pub fn frozen(&self) -> FrozenSystem {
        FrozenSystem { unknowns: self.unknowns.iter().map(|v| v.to_string()).collect(), polys: self.shadow.clone() }
    }
}

/// Jacobian of frozen polynomials at `x`.
pub fn jacobian(polys: &[CPoly], x: &[Complex64]) -> DMatrix<Complex64> {
    let mut j = DMatrix::zeros(polys.len(), x.len());
    let mut g = vec![Complex64::zero(); x.len()];
    for (i, p) in polys.iter().enumerate() {
        g.iter_mut().for_each(|v| *v = Complex64::zero());
        p.eval_grad(x, &mut g);
        for (k, &v) in g.iter().enumerate() {
            j[(i, k)] = v;
        }
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[u32]) -> IndexSet {
        IndexSet::from_elems(v.iter().copied())
    }

    fn q(a: i64) -> Q {
        Q::from_integer(a)
    }

    #[test]
    fn display_forms() {
        let t = Poly::var(Var::t(s(&[1, 2]), s(&[3, 4])));
        let p = Poly::var(Var::Psi(s(&[1, 3, 4])));
        let m = (&t * &p).scale(q(2));
        assert_eq!(m.to_string(), "2 * t[12|34] * psi[134]");
        assert_eq!(Poly::var(Var::t(IndexSet::EMPTY, s(&[3]))).to_string(), "t[0|3]");
        assert_eq!(Poly::zero().to_string(), "0");
    }

    #[test]
    fn homogenize_basic() {
        let x = Poly::var(Var::Aux(1));
        let p = &(&x * &x) + &Poly::constant(q(3));
        let h = p.homogenize(Var::Aux(0));
        assert!(h.is_homogeneous());
        assert_eq!(h.degree(), 2);
        assert_eq!(h.homogenize(Var::Aux(0)), h);
    }

    #[test]
    fn derivative_and_eval() {
        let x = Poly::var(Var::Aux(1));
        let y = Poly::var(Var::Aux(2));
        let p = &(&(&x * &x) * &y) - &y;
        let dp = p.derivative(Var::Aux(1));
        assert_eq!(dp, (&x * &y).scale(q(2)));
        let mut pt = HashMap::new();
        pt.insert(Var::Aux(1), Complex64::new(2.0, 0.0));
        pt.insert(Var::Aux(2), Complex64::new(3.0, 1.0));
        let v = p.evaluate(&pt).unwrap();
        assert!((v - Complex64::new(9.0, 3.0)).norm() < 1e-14);
        pt.remove(&Var::Aux(2));
        assert!(matches!(p.evaluate(&pt), Err(FockError::Binding(Var::Aux(2)))));
    }

    #[test]
    fn linear_jacobian_is_constant() {
        let x = Poly::var(Var::Aux(0));
        let y = Poly::var(Var::Aux(1));
        let f1 = &x.scale(q(2)) + &y.scale(q(-3));
        let f2 = &(&x + &y) + &Poly::one();
        let sys = PolynomialSystem::new(vec![f1, f2, Poly::zero()], vec![Var::Aux(0), Var::Aux(1)]).unwrap();
        let j = sys.jacobian(&[Complex64::new(0.3, 1.0), Complex64::new(-2.0, 0.5)]);
        assert_eq!(j[(0, 0)], Complex64::new(2.0, 0.0));
        assert_eq!(j[(0, 1)], Complex64::new(-3.0, 0.0));
        assert_eq!(j[(1, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(j[(2, 0)], Complex64::zero());
    }

    #[test]
    fn unknown_missing() {
        let x = Poly::var(Var::Aux(7));
        assert!(PolynomialSystem::new(vec![x], vec![Var::Aux(0)]).is_err());
    }
}
