//! The exponential parameterization `ψ = exp(T(t)) e_[d]` and its inverse.
//!
//! Coordinates are sums over even partitions of the symmetric difference
//! `J ⊕ [d]`, padded with the formal element when its size is odd. Each
//! partition of `[2k]` from the master polynomial is carried to `J ⊕ [d]` by
//! the order-preserving map (formal element first). The sign is then taken on
//! the carried partition with holes on the low side, times the sign `ε_J` of
//! the single-block term `t_{[d]∖J, J∖[d]}`.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::combinatorics::{binom, even_set_partitions, partition_sign, EvenSetPartition, IndexSet};
use crate::error::{FockError, Result};
use crate::fd_algebra::{apply_word, word_matrix, Letter, Word, Q};
use crate::multipoly::{Monomial, Poly, Var};
use crate::truncation::{level_of, LevelSet};

/// Largest `d` for [`master_polynomial`].
pub const MAX_MASTER: usize = 5;
/// Largest `n` for full symbolic maps.
pub const MAX_SYMBOLIC_ORBITALS: usize = 10;
/// Largest `n` for the numeric path.
pub const MAX_NUMERIC_ORBITALS: usize = 12;

/// `a_{b_1}† ⋯ a_{b_l}† a_{i_m} ⋯ a_{i_1}`, the operator multiplying `t_{I,B}`.
pub fn cluster_word(holes: IndexSet, parts: IndexSet) -> Word {
    let mut v: Vec<Letter> = parts.iter().map(Letter::create).collect();
    v.extend(holes.iter().rev().map(Letter::annihilate));
    Word::new(v)
}

/// Sign of `t_{[d]∖J, J∖[d]}` in `ψ_J`.
pub fn reference_sign(j: IndexSet, d: usize) -> i32 {
    let (holes, parts) = Var::pair_of(j, d);
    let (s, out) = apply_word(&cluster_word(holes, parts), IndexSet::range(d)).expect("single block acts on e_[d]");
    debug_assert_eq!(out, j);
    s
}

fn master_partitions(k: usize) -> &'static [EvenSetPartition] {
    static CACHE: [OnceLock<Vec<EvenSetPartition>>; MAX_MASTER + 2] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    CACHE[k].get_or_init(|| even_set_partitions(IndexSet::range(2 * k)).expect("even"))
}

/// `J ⊕ [d]`, with the formal element added when the size is odd.
pub fn padded_support(j: IndexSet, d: usize) -> IndexSet {
    let s = j.sym_diff(IndexSet::range(d));
    if s.len() % 2 == 1 {
        s.insert(0)
    } else {
        s
    }
}

/// Partitions of the padded support, relabeled from the master partitions.
pub fn relabeled_partitions(j: IndexSet, d: usize) -> Result<Vec<EvenSetPartition>> {
    let s = padded_support(j, d);
    let k = s.len() / 2;
    if k > MAX_MASTER + 1 {
        return Err(FockError::Capacity(format!("|J ⊕ [d]| = {} is too large", s.len())));
    }
    let labels = s.elems();
    Ok(master_partitions(k).iter().map(|p| p.relabel(|x| labels[x as usize - 1])).collect())
}

fn block_pair(b: IndexSet, d: usize) -> (IndexSet, IndexSet) {
    (b.low_part(d).remove(0), b.high_part(d))
}

fn t_monomial(p: &EvenSetPartition, d: usize) -> Monomial {
    Monomial::from_factors(p.blocks().iter().map(|&b| {
        let (h, q) = block_pair(b, d);
        Var::t(h, q)
    }))
}

fn c_monomial(p: &EvenSetPartition, d: usize) -> Monomial {
    Monomial::from_factors(p.blocks().iter().map(|&b| {
        let (h, q) = block_pair(b, d);
        Var::c(h, q)
    }))
}

/// `ψ_{[2d]∖[d]} = Σ_π sign(π) t_π` over even partitions of `[2d]`.
pub fn master_polynomial(d: usize) -> Result<Poly> {
    if d == 0 || d > MAX_MASTER {
        return Err(FockError::Capacity(format!("master polynomial needs 1 ≤ d ≤ {MAX_MASTER}, got {d}")));
    }
    Ok(Poly::from_terms(
        master_partitions(d).iter().map(|p| (t_monomial(p, d), Q::from_integer(partition_sign(p, d) as i64))),
    ))
}

fn check_subset(j: IndexSet, n: usize) -> Result<()> {
    if j.has_formal() || !j.is_subset(IndexSet::range(n)) {
        return Err(FockError::Shape(format!("{j:?} is not a subset of [{n}]")));
    }
    Ok(())
}

/// `ψ_J(t)` for the untruncated map.
pub fn psi_coordinate(j: IndexSet, d: usize, n: usize) -> Result<Poly> {
    check_subset(j, n)?;
    if j == IndexSet::range(d) {
        return Ok(Poly::one());
    }
    let eps = reference_sign(j, d);
    let mut p = Poly::zero();
    for part in relabeled_partitions(j, d)? {
        p.add_term(t_monomial(&part, d), Q::from_integer((eps * partition_sign(&part, d)) as i64));
    }
    Ok(p)
}

/// `C(h,2) − Σ_r C(|ρ_r ∩ h|,2)` with `h` the hole side of the padded support.
pub fn nu_exponent(p: &EvenSetPartition, d: usize) -> usize {
    let h = p.support().low_part(d).len();
    let inner: u128 = p.blocks().iter().map(|b| binom(b.low_part(d).len(), 2)).sum();
    (binom(h, 2) - inner) as usize
}

/// `x_J(c)`: the amplitude `t_{[d]∖J, J∖[d]}` as a polynomial in the
/// coordinates `c_{I,B}`.
pub fn inverse_coordinate(j: IndexSet, d: usize, n: usize) -> Result<Poly> {
    check_subset(j, n)?;
    if j == IndexSet::range(d) {
        return Ok(Poly::one());
    }
    let eps = reference_sign(j, d) as i64;
    let mut p = Poly::zero();
    for part in relabeled_partitions(j, d)? {
        let k = part.len();
        let sgn = if (nu_exponent(&part, d) + k - 1) % 2 == 0 { 1 } else { -1 };
        let fact: i64 = (1..k as i64).product();
        let c = eps * sgn * fact * partition_sign(&part, d) as i64;
        p.add_term(c_monomial(&part, d), Q::from_integer(c));
    }
    Ok(p)
}

/// Rewrites `c_{I,B}` as `ψ_{([d]∖I)∪B}`.
pub fn c_to_psi(p: &Poly, d: usize) -> Poly {
    p.map_vars(|v| match v {
        Var::C { holes, parts } => Var::psi_of_pair(holes, parts, d),
        other => other,
    })
}

/// Rewrites `ψ_J` as `c_{[d]∖J, J∖[d]}`.
pub fn psi_to_c(p: &Poly, d: usize) -> Poly {
    p.map_vars(|v| match v {
        Var::Psi(j) => {
            let (h, q) = Var::pair_of(j, d);
            Var::c(h, q)
        }
        other => other,
    })
}

/// All `2^n` coordinates, indexed by revlex rank.
#[derive(Clone, Debug)]
pub struct ParamMap {
    pub d: usize,
    pub n: usize,
    pub coords: Vec<Poly>,
}

impl ParamMap {
    pub fn get(&self, j: IndexSet) -> &Poly {
        &self.coords[j.rank()]
    }

    pub fn to_json(&self) -> serde_json::Value {
        let m: serde_json::Map<String, serde_json::Value> =
            self.coords.iter().enumerate().map(|(r, p)| (IndexSet::from_rank(r).to_string(), p.to_json())).collect();
        serde_json::Value::Object(m)
    }
}

/// `t_{I,B}` for `(|I|,|B|) ∉ σ` set to zero in every coordinate.
pub fn forward_map(d: usize, n: usize, sigma: &LevelSet) -> Result<ParamMap> {
    if n > MAX_SYMBOLIC_ORBITALS || d > n {
        return Err(FockError::Capacity(format!("symbolic maps need d ≤ n ≤ {MAX_SYMBOLIC_ORBITALS}")));
    }
    let coords = (0..1usize << n)
        .into_par_iter()
        .map(|r| {
            let p = psi_coordinate(IndexSet::from_rank(r), d, n)?;
            Ok(p.zero_out(|v| match v {
                Var::T { holes, parts } => !sigma.contains((holes.len(), parts.len())),
                _ => false,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ParamMap { d, n, coords })
}

/// Every `x_J(c)`, indexed by the revlex rank of `J`.
pub fn inverse_map(d: usize, n: usize) -> Result<ParamMap> {
    if n > MAX_SYMBOLIC_ORBITALS || d > n {
        return Err(FockError::Capacity(format!("symbolic maps need d ≤ n ≤ {MAX_SYMBOLIC_ORBITALS}")));
    }
    let coords = (0..1usize << n)
        .into_par_iter()
        .map(|r| inverse_coordinate(IndexSet::from_rank(r), d, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(ParamMap { d, n, coords })
}

/// Pairs `(I, B)` with `(|I|, |B|) ∈ σ`, sorted.
pub fn amplitude_pairs(d: usize, n: usize, sigma: &LevelSet) -> Vec<(IndexSet, IndexSet)> {
    let mut out = Vec::new();
    for r in 0..1usize << n {
        let j = IndexSet::from_rank(r);
        if sigma.contains(level_of(j, d)) {
            out.push(Var::pair_of(j, d));
        }
    }
    out.sort();
    out
}

pub fn amplitude_vars(d: usize, n: usize, sigma: &LevelSet) -> Vec<Var> {
    amplitude_pairs(d, n, sigma).into_iter().map(|(h, q)| Var::t(h, q)).collect()
}

/// The cluster operator `T(t_σ)` as sparse `(row, col, sign)` lists, one per
/// amplitude, built from products of Jordan-Wigner matrices.
#[derive(Clone, Debug)]
pub struct ClusterOperator {
    pub d: usize,
    pub n: usize,
    pub pairs: Vec<(IndexSet, IndexSet)>,
    pattern: Vec<Vec<(usize, usize, f64)>>,
}

impl ClusterOperator {
    pub fn new(d: usize, n: usize, sigma: &LevelSet) -> Result<Self> {
        if n > MAX_NUMERIC_ORBITALS || d > n {
            return Err(FockError::Capacity(format!("numeric maps need d ≤ n ≤ {MAX_NUMERIC_ORBITALS}")));
        }
        let pairs = amplitude_pairs(d, n, sigma);
        let pattern = pairs
            .par_iter()
            .map(|&(h, q)| {
                let m = word_matrix(&cluster_word(h, q), n)?;
                Ok(m.entries().map(|(i, j, v)| (i, j, crate::multipoly::q_to_f64(v))).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ClusterOperator { d, n, pairs, pattern })
    }

    pub fn vars(&self) -> Vec<Var> {
        self.pairs.iter().map(|&(h, q)| Var::t(h, q)).collect()
    }

    /// Entries of `T(t)` for amplitudes given in `pairs` order.
    pub fn matrix(&self, t: &[Complex64]) -> Vec<(usize, usize, Complex64)> {
        let mut acc: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        for (pat, &tv) in self.pattern.iter().zip(t) {
            for &(i, j, s) in pat {
                *acc.entry((i, j)).or_insert_with(Complex64::zero) += tv * s;
            }
        }
        acc.into_iter().filter(|(_, v)| !v.is_zero()).map(|((i, j), v)| (i, j, v)).collect()
    }

    /// `T(t) v`.
    pub fn apply(&self, t: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::zero(); v.len()];
        for (pat, &tv) in self.pattern.iter().zip(t) {
            if tv.is_zero() {
                continue;
            }
            for &(i, j, s) in pat {
                out[i] += tv * s * v[j];
            }
        }
        out
    }

    /// `exp(T(t)) v` as the finite sum `Σ_{k ≤ n} T^k v / k!`.
    pub fn exp_apply(&self, t: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
        let mut out = v.to_vec();
        let mut term = v.to_vec();
        for k in 1..=self.n {
            term = self.apply(t, &term);
            let inv = 1.0 / k as f64;
            term.iter_mut().for_each(|x| *x *= inv);
            if term.iter().all(|x| x.is_zero()) {
                break;
            }
            for (o, x) in out.iter_mut().zip(&term) {
                *o += x;
            }
        }
        out
    }

    /// `exp(T(t)) e_[d]`.
    pub fn forward(&self, t: &[Complex64]) -> Vec<Complex64> {
        let mut e = vec![Complex64::zero(); 1 << self.n];
        e[IndexSet::range(self.d).rank()] = Complex64::one();
        self.exp_apply(t, &e)
    }

    /// Reads amplitudes in `pairs` order from an assignment.
    pub fn values(&self, tvals: &HashMap<Var, Complex64>) -> Result<Vec<Complex64>> {
        self.vars().into_iter().map(|v| tvals.get(&v).copied().ok_or(FockError::Binding(v))).collect()
    }
}

/// `exp(T(t_σ)) e_[d]` as a dense vector indexed by revlex rank.
pub fn numeric_forward(tvals: &HashMap<Var, Complex64>, d: usize, n: usize, sigma: &LevelSet) -> Result<Vec<Complex64>> {
    let op = ClusterOperator::new(d, n, sigma)?;
    let t = op.values(tvals)?;
    Ok(op.forward(&t))
}

/// The cluster matrix with symbolic entries, keyed by `(row, col)` rank.
pub fn cluster_matrix_symbolic(d: usize, n: usize, sigma: &LevelSet) -> Result<BTreeMap<(usize, usize), Poly>> {
    let mut out: BTreeMap<(usize, usize), Poly> = BTreeMap::new();
    for (h, q) in amplitude_pairs(d, n, sigma) {
        let m = word_matrix(&cluster_word(h, q), n)?;
        let t = Poly::var(Var::t(h, q));
        for (i, j, v) in m.entries() {
            let e = out.entry((i, j)).or_default();
            *e = &*e + &t.scale(v);
        }
    }
    out.retain(|_, p| !p.is_zero());
    Ok(out)
}

/// Random complex amplitudes with real and imaginary parts in `[-1, 1]`.
pub fn random_amplitudes<R: Rng>(vars: &[Var], rng: &mut R, real: bool) -> HashMap<Var, Complex64> {
    vars.iter()
        .map(|&v| {
            let re = rng.gen_range(-1.0..1.0);
            let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
            (v, Complex64::new(re, im))
        })
        .collect()
}

/// Amplitudes recovered from a state with `ψ_[d] ≠ 0`, via `x_J(ψ / ψ_[d])`.
pub fn numeric_inverse(psi: &[Complex64], d: usize, n: usize, pairs: &[(IndexSet, IndexSet)]) -> Result<HashMap<Var, Complex64>> {
    let scale = psi[IndexSet::range(d).rank()];
    if scale.norm() < 1e-300 {
        return Err(FockError::Shape("reference coordinate vanishes".into()));
    }
    let mut out = HashMap::new();
    for &(h, q) in pairs {
        let j = IndexSet::range(d).difference(h).union(q);
        let x = inverse_coordinate(j, d, n)?;
        let val = x.evaluate_with(|v| match v {
            Var::C { holes, parts } => {
                let k = IndexSet::range(d).difference(holes).union(parts);
                Some(psi[k.rank()] / scale)
            }
            _ => None,
        })?;
        out.insert(Var::t(h, q), val);
    }
    Ok(out)
}

/// Checks `exp(T_τ + T_σ) e = exp(T_σ) e + T_τ exp(T_σ) e` at random points,
/// with the two summands supported on `|J| = d` and `|J| = d − 1`.
pub fn eom_factorization_check<R: Rng>(tau: &LevelSet, sigma: &LevelSet, d: usize, n: usize, trials: usize, rng: &mut R) -> Result<bool> {
    if tau.iter().any(|(m, l)| m != l + 1) {
        return Err(FockError::Shape("τ must lie on the sub-diagonal m = l + 1".into()));
    }
    if sigma.iter().any(|(m, l)| m != l) {
        return Err(FockError::Shape("σ must lie on the diagonal".into()));
    }
    let both = tau.union(sigma);
    let op_all = ClusterOperator::new(d, n, &both)?;
    let op_s = ClusterOperator::new(d, n, sigma)?;
    let op_t = ClusterOperator::new(d, n, tau)?;
    for _ in 0..trials {
        let tv = random_amplitudes(&op_all.vars(), rng, false);
        let lhs = op_all.forward(&op_all.values(&tv)?);
        let first = op_s.forward(&op_s.values(&tv)?);
        let second = op_t.apply(&op_t.values(&tv)?, &first);
        for r in 0..1usize << n {
            let len = IndexSet::from_rank(r).len();
            if (first[r].norm() > 1e-12 && len != d) || (second[r].norm() > 1e-12 && len + 1 != d) {
                return Ok(false);
            }
            if (lhs[r] - first[r] - second[r]).norm() > 1e-10 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
