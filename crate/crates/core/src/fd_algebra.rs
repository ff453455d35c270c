//! The Fermi-Dirac algebra: Wick normal ordering as a rewriting system, the
//! critical-pair check of its Gröbner basis, and Jordan-Wigner matrices.
//!
//! Letters are ordered `a_n > … > a_1 > a_1† > … > a_n†` and words by degree
//! first, then lexicographically. The relations used for rewriting are
//!
//! ```text
//! a_i a_j   -> -a_j a_i              (i >= j; gives 0 when i = j)
//! a_i† a_j† -> -a_j† a_i†            (i <= j; gives 0 when i = j)
//! a_i a_j†  -> -a_j† a_i + δ_ij
//! ```
//!
//! so irreducible words are `a_{b_l}† ⋯ a_{b_1}† a_{i_1} ⋯ a_{i_m}` with
//! `b_l > ⋯ > b_1` and `i_1 < ⋯ < i_m`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::combinatorics::{IndexSet, MAX_ORBITALS};
use crate::error::{FockError, Result};

pub type Q = Rational64;

/// Largest orbital count for explicit operator matrices.
pub const MAX_MATRIX_ORBITALS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Create,
    Annihilate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub kind: Kind,
    pub orbital: u32,
}

impl Letter {
    pub fn create(orbital: u32) -> Self {
        Letter { kind: Kind::Create, orbital }
    }

    pub fn annihilate(orbital: u32) -> Self {
        Letter { kind: Kind::Annihilate, orbital }
    }

    fn weight(self) -> i32 {
        match self.kind {
            Kind::Annihilate => 64 + self.orbital as i32,
            Kind::Create => 64 - self.orbital as i32,
        }
    }

    pub fn dagger(self) -> Self {
        match self.kind {
            Kind::Create => Letter::annihilate(self.orbital),
            Kind::Annihilate => Letter::create(self.orbital),
        }
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight().cmp(&other.weight())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Create => write!(f, "a{}'", self.orbital),
            Kind::Annihilate => write!(f, "a{}", self.orbital),
        }
    }
}

/// A product of letters, read left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn max_orbital(&self) -> u32 {
        self.0.iter().map(|l| l.orbital).max().unwrap_or(0)
    }

    /// The standard monomial `a_B† a_I`: creations descending, then
    /// annihilations ascending.
    pub fn standard(b: IndexSet, i: IndexSet) -> Word {
        let mut v: Vec<Letter> = b.iter().rev().map(Letter::create).collect();
        v.extend(i.iter().map(Letter::annihilate));
        Word(v)
    }

    /// Key `(B, I)` if the word is a standard monomial.
    pub fn standard_key(&self) -> Option<(IndexSet, IndexSet)> {
        if first_reducible(&self.0).is_some() {
            return None;
        }
        let mut b = IndexSet::EMPTY;
        let mut i = IndexSet::EMPTY;
        for l in &self.0 {
            match l.kind {
                Kind::Create => b = b.insert(l.orbital),
                Kind::Annihilate => i = i.insert(l.orbital),
            }
        }
        Some((b, i))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let s: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", s.join(" "))
    }
}

impl FromStr for Word {
    type Err = FockError;

    /// Parses whitespace separated letters such as `"a3' a1 a2'"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        let mut pos = 0;
        for tok in s.split_whitespace() {
            let at = s[pos..].find(tok).map(|k| k + pos).unwrap_or(pos);
            pos = at + tok.len();
            let bad = || FockError::Parse { pos: at, msg: format!("bad operator letter {tok:?}") };
            let body = tok.strip_prefix('a').ok_or_else(bad)?;
            let (num, create) = if let Some(x) = body.strip_suffix('\'') {
                (x, true)
            } else if let Some(x) = body.strip_suffix('†') {
                (x, true)
            } else {
                (body, false)
            };
            let p: u32 = num.parse().map_err(|_| bad())?;
            if p == 0 || p as usize > MAX_ORBITALS {
                return Err(bad());
            }
            letters.push(if create { Letter::create(p) } else { Letter::annihilate(p) });
        }
        Ok(Word(letters))
    }
}

/// Position of the leftmost pair that is a leading term of a relation.
fn first_reducible(w: &[Letter]) -> Option<usize> {
    (0..w.len().saturating_sub(1)).find(|&k| is_leading(w[k], w[k + 1]))
}

fn is_leading(x: Letter, y: Letter) -> bool {
    match (x.kind, y.kind) {
        (Kind::Annihilate, Kind::Annihilate) => x.orbital >= y.orbital,
        (Kind::Create, Kind::Create) => x.orbital <= y.orbital,
        (Kind::Annihilate, Kind::Create) => true,
        (Kind::Create, Kind::Annihilate) => false,
    }
}

/// Right-hand side of the relation with leading term `x y`.
fn relation_rhs(x: Letter, y: Letter) -> Vec<(Q, Vec<Letter>)> {
    let mut out = Vec::new();
    if x.kind == y.kind && x.orbital == y.orbital {
        return out;
    }
    out.push((-Q::one(), vec![y, x]));
    if x.kind == Kind::Annihilate && y.kind == Kind::Create && x.orbital == y.orbital {
        out.push((Q::one(), vec![]));
    }
    out
}

fn rewrite_at(w: &Word, k: usize) -> Vec<(Q, Word)> {
    let l = &w.0;
    relation_rhs(l[k], l[k + 1])
        .into_iter()
        .map(|(c, mid)| {
            let mut v = Vec::with_capacity(l.len());
            v.extend_from_slice(&l[..k]);
            v.extend(mid);
            v.extend_from_slice(&l[k + 2..]);
            (c, Word(v))
        })
        .collect()
}

/// A linear combination of standard monomials `a_B† a_I`, keyed by `(B, I)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NormalForm {
    terms: BTreeMap<(IndexSet, IndexSet), Q>,
}

impl NormalForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        let mut nf = Self::default();
        nf.add_term((IndexSet::EMPTY, IndexSet::EMPTY), Q::one());
        nf
    }

    pub fn add_term(&mut self, key: (IndexSet, IndexSet), c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(key).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> &BTreeMap<(IndexSet, IndexSet), Q> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, b: IndexSet, i: IndexSet) -> Q {
        self.terms.get(&(b, i)).copied().unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(IndexSet::EMPTY, IndexSet::EMPTY)
    }

    pub fn sub(&self, other: &NormalForm) -> NormalForm {
        let mut r = self.clone();
        for (&k, &c) in &other.terms {
            r.add_term(k, -c);
        }
        r
    }

    /// Words of the standard monomials with coefficients.
    pub fn to_words(&self) -> Vec<(Q, Word)> {
        self.terms.iter().map(|(&(b, i), &c)| (c, Word::standard(b, i))).collect()
    }

    /// Normal form of the product.
    pub fn mul(&self, other: &NormalForm) -> NormalForm {
        let mut pending = BTreeMap::new();
        for (c1, w1) in self.to_words() {
            for (c2, w2) in other.to_words() {
                accumulate(&mut pending, w1.concat(&w2), c1 * c2);
            }
        }
        reduce_all(pending)
    }

    /// Runs the rewriting system on the (already standard) terms.
    pub fn reduce(&self) -> NormalForm {
        let mut pending = BTreeMap::new();
        for (c, w) in self.to_words() {
            accumulate(&mut pending, w, c);
        }
        reduce_all(pending)
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (c, w) in self.to_words().into_iter().rev() {
            let neg = c < Q::zero();
            let a = if neg { -c } else { c };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            if w.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{w}")?;
            } else {
                write!(f, "{a} {w}")?;
            }
        }
        Ok(())
    }
}

fn accumulate(map: &mut BTreeMap<Word, Q>, w: Word, c: Q) {
    use std::collections::btree_map::Entry;
    if c.is_zero() {
        return;
    }
    match map.entry(w) {
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

/// Repeatedly rewrites the largest reducible word until only standard
/// monomials remain.
fn reduce_all(mut pending: BTreeMap<Word, Q>) -> NormalForm {
    let mut nf = NormalForm::zero();
    while let Some((w, c)) = pending.pop_last() {
        match first_reducible(&w.0) {
            None => {
                let key = w.standard_key().expect("irreducible word is standard");
                nf.add_term(key, c);
            }
            Some(k) => {
                for (c2, w2) in rewrite_at(&w, k) {
                    accumulate(&mut pending, w2, c * c2);
                }
            }
        }
    }
    nf
}

/// Wick normal ordering of a word.
pub fn normal_order(w: &Word) -> NormalForm {
    let mut pending = BTreeMap::new();
    pending.insert(w.clone(), Q::one());
    reduce_all(pending)
}

/// Normal form of a linear combination of words.
pub fn normal_order_sum(terms: &[(Q, Word)]) -> NormalForm {
    let mut pending = BTreeMap::new();
    for (c, w) in terms {
        accumulate(&mut pending, w.clone(), *c);
    }
    reduce_all(pending)
}

/// The four overlap shapes between leading terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairFamily {
    /// `(a_i a_j, a_j a_k)`, `i ≥ j ≥ k`
    Annihilators,
    /// `(a_i† a_j†, a_j† a_k†)`, `i ≤ j ≤ k`
    Creators,
    /// `(a_i a_j, a_j a_k†)`, `i ≥ j`
    AnnihilatorsThenCreator,
    /// `(a_i a_j†, a_j† a_k†)`, `j ≤ k`
    AnnihilatorThenCreators,
}

#[derive(Clone, Debug)]
pub struct CriticalPair {
    pub family: PairFamily,
    pub overlap: Word,
    pub residue: NormalForm,
}

#[derive(Clone, Debug)]
pub struct GroebnerReport {
    pub n: usize,
    pub pairs: Vec<CriticalPair>,
}

impl GroebnerReport {
    pub fn passed(&self) -> bool {
        self.pairs.iter().all(|p| p.residue.is_zero())
    }

    pub fn count(&self, family: PairFamily) -> usize {
        self.pairs.iter().filter(|p| p.family == family).count()
    }
}

fn classify(x: Letter, y: Letter, z: Letter) -> PairFamily {
    use Kind::*;
    match (x.kind, y.kind, z.kind) {
        (Annihilate, Annihilate, Annihilate) => PairFamily::Annihilators,
        (Create, Create, Create) => PairFamily::Creators,
        (Annihilate, Annihilate, Create) => PairFamily::AnnihilatorsThenCreator,
        (Annihilate, Create, Create) => PairFamily::AnnihilatorThenCreators,
        _ => unreachable!("no other overlaps of leading terms exist"),
    }
}

/// Forms the S-element of every overlap `x y z` where `x y` and `y z` are
/// both leading terms, and reduces it.
pub fn verify_groebner(n: usize) -> Result<GroebnerReport> {
    if n == 0 || n > 6 {
        return Err(FockError::Capacity(format!("verify_groebner supports 1 ≤ n ≤ 6, got {n}")));
    }
    let mut letters = Vec::new();
    for p in 1..=n as u32 {
        letters.push(Letter::annihilate(p));
        letters.push(Letter::create(p));
    }
    let mut pairs = Vec::new();
    for &x in &letters {
        for &y in &letters {
            if !is_leading(x, y) {
                continue;
            }
            for &z in &letters {
                if !is_leading(y, z) {
                    continue;
                }
                // (x y - rhs1) z - x (y z - rhs2) = x rhs2 - rhs1 z
                let mut s = Vec::new();
                for (c, mid) in relation_rhs(y, z) {
                    let mut v = vec![x];
                    v.extend(mid);
                    s.push((c, Word(v)));
                }
                for (c, mid) in relation_rhs(x, y) {
                    let mut v = mid;
                    v.push(z);
                    s.push((-c, Word(v)));
                }
                pairs.push(CriticalPair {
                    family: classify(x, y, z),
                    overlap: Word(vec![x, y, z]),
                    residue: normal_order_sum(&s),
                });
            }
        }
    }
    Ok(GroebnerReport { n, pairs })
}

/// Action of one letter on a basis state `e_J`: the sign and the new state,
/// or `None` when the result is zero.
pub fn apply_letter(l: Letter, state: IndexSet) -> Option<(i32, IndexSet)> {
    let occ = state.contains(l.orbital);
    let sign = if state.count_below(l.orbital) % 2 == 0 { 1 } else { -1 };
    match (l.kind, occ) {
        (Kind::Annihilate, true) => Some((sign, state.remove(l.orbital))),
        (Kind::Create, false) => Some((sign, state.insert(l.orbital))),
        _ => None,
    }
}

/// Action of a word on `e_J`, rightmost letter first.
pub fn apply_word(w: &Word, state: IndexSet) -> Option<(i32, IndexSet)> {
    let mut sign = 1;
    let mut st = state;
    for &l in w.0.iter().rev() {
        let (s, next) = apply_letter(l, st)?;
        sign *= s;
        st = next;
    }
    Some((sign, st))
}

/// Sparse `2^n × 2^n` matrix with rows and columns indexed by revlex rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseOperatorMatrix {
    pub dim: usize,
    entries: BTreeMap<(usize, usize), Q>,
}

impl SparseOperatorMatrix {
    pub fn zero(dim: usize) -> Self {
        SparseOperatorMatrix { dim, entries: BTreeMap::new() }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        for i in 0..dim {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn from_dense(rows: &[&[i64]]) -> Self {
        let mut m = Self::zero(rows.len());
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, Q::from_integer(v));
            }
        }
        m
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        if v.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Q {
        self.entries.get(&(i, j)).copied().unwrap_or_else(Q::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Q)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (i, j, v) in o.entries() {
            let cur = r.get(i, j);
            r.set(i, j, cur + v);
        }
        r
    }

    pub fn scale(&self, c: Q) -> Self {
        let mut r = Self::zero(self.dim);
        for (i, j, v) in self.entries() {
            r.set(i, j, v * c);
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim);
        let mut by_row: Vec<Vec<(usize, Q)>> = vec![Vec::new(); o.dim];
        for (k, j, v) in o.entries() {
            by_row[k].push((j, v));
        }
        let mut acc: BTreeMap<(usize, usize), Q> = BTreeMap::new();
        for (i, k, v) in self.entries() {
            for &(j, w) in &by_row[k] {
                *acc.entry((i, j)).or_insert_with(Q::zero) += v * w;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        SparseOperatorMatrix { dim: self.dim, entries: acc }
    }

    pub fn kron(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.dim * o.dim);
        for (i, j, v) in self.entries() {
            for (k, l, w) in o.entries() {
                r.set(i * o.dim + k, j * o.dim + l, v * w);
            }
        }
        r
    }

    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut r = Self::zero(self.dim);
        for (i, j, v) in self.entries() {
            r.set(perm[i], perm[j], v);
        }
        r
    }
}

/// Maps the Kronecker index (orbital 1 most significant) to revlex rank.
fn kron_to_rank(k: usize, n: usize) -> usize {
    let mut r = 0;
    for q in 1..=n {
        if k >> (n - q) & 1 == 1 {
            r |= 1 << (q - 1);
        }
    }
    r
}

/// `σ_z ⊗ ⋯ ⊗ σ_z ⊗ a(†) ⊗ I ⊗ ⋯ ⊗ I`, reindexed by revlex rank.
pub fn jw_matrix(letter: Letter, n: usize) -> Result<SparseOperatorMatrix> {
    if n > MAX_MATRIX_ORBITALS {
        return Err(FockError::Capacity(format!("jw_matrix supports n ≤ {MAX_MATRIX_ORBITALS}, got {n}")));
    }
    let p = letter.orbital as usize;
    if p == 0 || p > n {
        return Err(FockError::Shape(format!("orbital {p} outside 1..={n}")));
    }
    let sigma_z = SparseOperatorMatrix::from_dense(&[&[1, 0], &[0, -1]]);
    let id = SparseOperatorMatrix::identity(2);
    let a = SparseOperatorMatrix::from_dense(&[&[0, 1], &[0, 0]]);
    let a_dag = SparseOperatorMatrix::from_dense(&[&[0, 0], &[1, 0]]);
    let mut m = SparseOperatorMatrix::identity(1);
    for q in 1..=n {
        let f = match q.cmp(&p) {
            Ordering::Less => &sigma_z,
            Ordering::Equal => match letter.kind {
                Kind::Annihilate => &a,
                Kind::Create => &a_dag,
            },
            Ordering::Greater => &id,
        };
        m = m.kron(f);
    }
    let perm: Vec<usize> = (0..1 << n).map(|k| kron_to_rank(k, n)).collect();
    Ok(m.permute(&perm))
}

/// Product of the Jordan-Wigner matrices of the letters.
pub fn word_matrix(w: &Word, n: usize) -> Result<SparseOperatorMatrix> {
    let mut m = SparseOperatorMatrix::identity(1 << n);
    for &l in &w.0 {
        m = m.mul(&jw_matrix(l, n)?);
    }
    Ok(m)
}

/// `e_I† Ω e_J`, the constant term of the standard representation of
/// `a_{i_m} ⋯ a_{i_1} Ω a_{j_1}† ⋯ a_{j_l}†`, summed over complete matchings.
pub fn matrix_entry(w: &Word, i: IndexSet, j: IndexSet, n: usize) -> Q {
    debug_assert!(w.max_orbital() as usize <= n);
    let mut full: Vec<Letter> = i.iter().rev().map(Letter::annihilate).collect();
    full.extend_from_slice(&w.0);
    full.extend(j.iter().map(Letter::create));
    Q::from_integer(vacuum_value(&full))
}

fn vacuum_value(w: &[Letter]) -> i64 {
    if w.is_empty() {
        return 1;
    }
    if w.len() % 2 == 1 {
        return 0;
    }
    let head = w[0];
    if head.kind != Kind::Annihilate {
        return 0;
    }
    let mut total = 0;
    for k in 1..w.len() {
        let l = w[k];
        if l.kind == Kind::Create && l.orbital == head.orbital {
            let rest: Vec<Letter> = w[1..k].iter().chain(&w[k + 1..]).copied().collect();
            let sign = if (k - 1) % 2 == 0 { 1 } else { -1 };
            total += sign * vacuum_value(&rest);
        }
    }
    total
}
