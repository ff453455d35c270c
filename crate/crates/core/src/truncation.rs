//! Level sets and the truncation varieties they define: dimension, linearity,
//! particle-hole duality, the even-partition hypothesis, chart equations and
//! the flag and spinor parameterizations.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binom, IndexSet};
use crate::error::{FockError, Result};
use crate::expparam::{c_to_psi, inverse_coordinate, numeric_forward};
use crate::multipoly::{Poly, Var};

/// A grid point `(m, l)`: `m` holes, `l` particles.
pub type Level = (usize, usize);

/// `(|[d]∖J|, |J∖[d]|)`.
pub fn level_of(j: IndexSet, d: usize) -> Level {
    let r = IndexSet::range(d);
    (r.difference(j).len(), j.difference(r).len())
}

fn parity(p: Level) -> usize {
    (p.0 + p.1) % 2
}

/// A subset of the truncation grid.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LevelSet(BTreeSet<Level>);

impl LevelSet {
    pub fn new(levels: impl IntoIterator<Item = Level>) -> Self {
        LevelSet(levels.into_iter().collect())
    }

    pub fn contains(&self, p: Level) -> bool {
        self.0.contains(&p)
    }

    pub fn iter(&self) -> impl Iterator<Item = Level> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&self, o: &LevelSet) -> LevelSet {
        LevelSet(self.0.union(&o.0).copied().collect())
    }

    pub fn is_subset(&self, o: &LevelSet) -> bool {
        self.0.is_subset(&o.0)
    }

    /// `{(l, m) : (m, l) ∈ σ}`.
    pub fn transpose(&self) -> LevelSet {
        LevelSet(self.0.iter().map(|&(m, l)| (l, m)).collect())
    }

    /// Checks `σ ⊆ 𝒢`.
    pub fn validate(&self, d: usize, n: usize) -> Result<()> {
        let g = grid(d, n);
        match self.iter().find(|&p| !g.contains(p)) {
            Some(p) => Err(FockError::Shape(format!("level {p:?} is outside the grid for d = {d}, n = {n}"))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(m, l)| format!("{m},{l}")).collect();
        write!(f, "{}", parts.join(";"))
    }
}

impl FromStr for LevelSet {
    type Err = FockError;

    /// Parses `"1,0;1,1;0,1"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut out = BTreeSet::new();
        let mut pos = 0;
        for item in s.split(';') {
            let trimmed = item.trim();
            if !trimmed.is_empty() {
                let nums: Vec<&str> = trimmed.split(',').collect();
                let bad = |msg: String| FockError::Parse { pos, msg };
                if nums.len() != 2 {
                    return Err(bad(format!("expected \"m,l\", found {trimmed:?}")));
                }
                let m = nums[0].trim().parse().map_err(|_| bad(format!("bad hole count {:?}", nums[0])))?;
                let l = nums[1].trim().parse().map_err(|_| bad(format!("bad particle count {:?}", nums[1])))?;
                out.insert((m, l));
            }
            pos += item.len() + 1;
        }
        Ok(LevelSet(out))
    }
}

/// `𝒢 = {(m, l) : m ≤ d, l ≤ n − d} ∖ {(0, 0)}`.
pub fn grid(d: usize, n: usize) -> LevelSet {
    let mut g = BTreeSet::new();
    for m in 0..=d {
        for l in 0..=n - d {
            if (m, l) != (0, 0) {
                g.insert((m, l));
            }
        }
    }
    LevelSet(g)
}

/// Every proper nonempty level set, in order of the bitmask over the grid.
pub fn all_level_sets(d: usize, n: usize) -> Vec<LevelSet> {
    let g: Vec<Level> = grid(d, n).iter().collect();
    let total = 1u64 << g.len();
    (1..total - 1).map(|mask| LevelSet::new(g.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p))).collect()
}

/// `Σ_{(m,l) ∈ σ} C(d, m) C(n − d, l)`.
pub fn dimension(sigma: &LevelSet, d: usize, n: usize) -> usize {
    sigma.iter().map(|(m, l)| (binom(d, m) * binom(n - d, l)) as usize).sum()
}

/// `p ⪯ q`: componentwise, and `p` has even level or `q` has odd level.
pub fn preceq(p: Level, q: Level) -> bool {
    p.0 <= q.0 && p.1 <= q.1 && (parity(p) == 0 || parity(q) == 1)
}

/// Closure of `σ` under sums `p + q` with `p, q ⪯ p + q` inside the grid.
pub fn is_linear(sigma: &LevelSet, d: usize, n: usize) -> bool {
    let g = grid(d, n);
    for p in sigma.iter() {
        for q in sigma.iter() {
            let s = (p.0 + q.0, p.1 + q.1);
            if g.contains(s) && preceq(p, s) && preceq(q, s) && !sigma.contains(s) {
                return false;
            }
        }
    }
    true
}

/// `J' = {n + 1 − j : j ∉ J}`.
pub fn dual_index(j: IndexSet, n: usize) -> IndexSet {
    IndexSet::from_elems((1..=n as u32).filter(|&x| !j.contains(x)).map(|x| n as u32 + 1 - x))
}

/// The transposed level set and the coordinate relabeling.
pub fn particle_hole_dual(sigma: &LevelSet, n: usize) -> (LevelSet, impl Fn(IndexSet) -> IndexSet) {
    (sigma.transpose(), move |j| dual_index(j, n))
}

/// True when no element of `σ` splits into two or more parts from `σ`
/// (repetition allowed) with at most one part of odd level.
pub fn graph_hypothesis(sigma: &LevelSet) -> bool {
    let parts: Vec<Level> = sigma.iter().collect();
    parts.iter().all(|&x| !has_even_split(x, &parts, 0, 0, 0))
}

fn has_even_split(rest: Level, parts: &[Level], from: usize, used: usize, odd: usize) -> bool {
    if rest == (0, 0) {
        return used >= 2;
    }
    for (i, &p) in parts.iter().enumerate().skip(from) {
        if p.0 > rest.0 || p.1 > rest.1 {
            continue;
        }
        let odd2 = odd + parity(p);
        if odd2 > 1 {
            continue;
        }
        // parts are taken in nondecreasing index order, so each multiset is visited once
        if has_even_split((rest.0 - p.0, rest.1 - p.1), parts, i, used + 1, odd2) {
            return true;
        }
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Flag,
    Spinor,
    Diagonal,
    Ionization,
    ElectronAttachment,
    Generic,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Flag => "Flag",
            Family::Spinor => "Spinor",
            Family::Diagonal => "FixedN-diagonal",
            Family::Ionization => "Ionization",
            Family::ElectronAttachment => "ElectronAttachment",
            Family::Generic => "Generic",
        };
        write!(f, "{s}")
    }
}

pub fn flag_levels() -> LevelSet {
    LevelSet::new([(1, 0), (1, 1), (0, 1)])
}

pub fn spinor_levels() -> LevelSet {
    LevelSet::new([(2, 0), (1, 1), (0, 2)])
}

pub fn recognize_family(sigma: &LevelSet) -> Family {
    if *sigma == flag_levels() {
        Family::Flag
    } else if *sigma == spinor_levels() {
        Family::Spinor
    } else if sigma.is_empty() {
        Family::Generic
    } else if sigma.iter().all(|(m, l)| m == l) {
        Family::Diagonal
    } else if sigma.iter().all(|(m, l)| m == l + 1) {
        Family::Ionization
    } else if sigma.iter().all(|(m, l)| l == m + 1) {
        Family::ElectronAttachment
    } else {
        Family::Generic
    }
}

/// `x_J(ψ)` with `ψ_[d] = 1` for every `J` whose level is outside `σ`.
pub fn chart_ideal_generators(sigma: &LevelSet, d: usize, n: usize) -> Result<Vec<(IndexSet, Poly)>> {
    let g = grid(d, n);
    let ref_set = IndexSet::range(d);
    (0..1usize << n)
        .into_par_iter()
        .map(IndexSet::from_rank)
        .filter(|&j| {
            let lv = level_of(j, d);
            g.contains(lv) && !sigma.contains(lv)
        })
        .map(|j| {
            let x = c_to_psi(&inverse_coordinate(j, d, n)?, d);
            let mut one = HashMap::new();
            one.insert(Var::Psi(ref_set), Poly::one());
            Ok((j, x.substitute(&one)))
        })
        .collect()
}

/// Interreduces the chart generators by increasing level: once a generator
/// reduces to a single coordinate `ψ_K`, that coordinate is set to zero in
/// the later ones. Returns the reduced generators.
pub fn reduced_chart_generators(sigma: &LevelSet, d: usize, n: usize) -> Result<Vec<(IndexSet, Poly)>> {
    let mut gens = chart_ideal_generators(sigma, d, n)?;
    gens.sort_by_key(|&(j, _)| {
        let (m, l) = level_of(j, d);
        (m + l, j)
    });
    let mut vanishing: HashSet<IndexSet> = HashSet::new();
    let mut out = Vec::with_capacity(gens.len());
    for (j, g) in gens {
        let r = g.zero_out(|v| matches!(v, Var::Psi(k) if vanishing.contains(&k)));
        if r.num_terms() == 1 && r.degree() == 1 {
            if let Some(Var::Psi(k)) = r.variables().into_iter().next() {
                vanishing.insert(k);
            }
        }
        out.push((j, r));
    }
    Ok(out)
}

/// Linearity read off from the equations: every reduced generator is affine.
pub fn linear_by_generators(sigma: &LevelSet, d: usize, n: usize) -> Result<bool> {
    Ok(reduced_chart_generators(sigma, d, n)?.iter().all(|(_, g)| g.degree() <= 1))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TruncationReport {
    pub d: usize,
    pub n: usize,
    pub sigma: String,
    pub dimension: usize,
    pub is_linear: bool,
    pub graph_hypothesis: bool,
    pub family: Family,
    pub generator_degrees: Vec<(u32, usize)>,
}

pub fn analyze(sigma: &LevelSet, d: usize, n: usize, with_generators: bool) -> Result<TruncationReport> {
    sigma.validate(d, n)?;
    let mut generator_degrees = Vec::new();
    if with_generators {
        let mut counts = std::collections::BTreeMap::new();
        for (_, g) in chart_ideal_generators(sigma, d, n)? {
            *counts.entry(g.degree()).or_insert(0usize) += 1;
        }
        generator_degrees = counts.into_iter().collect();
    }
    Ok(TruncationReport {
        d,
        n,
        sigma: sigma.to_string(),
        dimension: dimension(sigma, d, n),
        is_linear: is_linear(sigma, d, n),
        graph_hypothesis: graph_hypothesis(sigma),
        family: recognize_family(sigma),
        generator_degrees,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Census {
    pub d: usize,
    pub n: usize,
    pub level_sets: usize,
    pub linear: usize,
    pub hypothesis: usize,
}

pub fn census(d: usize, n: usize) -> Census {
    let all = all_level_sets(d, n);
    let (linear, hypothesis) = all
        .par_iter()
        .map(|s| (is_linear(s, d, n) as usize, graph_hypothesis(s) as usize))
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Census { d, n, level_sets: all.len(), linear, hypothesis }
}

/// Coordinates from a structured construction compared with the exponential map.
#[derive(Clone, Debug)]
pub struct StructuredCheck {
    pub matrix: DMatrix<Complex64>,
    pub coords: Vec<Complex64>,
    pub max_error: f64,
}

fn tval(t: &HashMap<Var, Complex64>, h: IndexSet, p: IndexSet) -> Result<Complex64> {
    let v = Var::t(h, p);
    t.get(&v).copied().ok_or(FockError::Binding(v))
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn minor(m: &DMatrix<Complex64>, rows: &[usize], cols: &[usize]) -> Complex64 {
    if rows.is_empty() {
        return Complex64::one();
    }
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]).determinant()
}

/// The `(d+1) × (n+1)` matrix with rows `0..=d` and columns `0..=n`.
pub fn flag_matrix(t: &HashMap<Var, Complex64>, d: usize, n: usize) -> Result<DMatrix<Complex64>> {
    let mut m = DMatrix::zeros(d + 1, n + 1);
    for b in d + 1..=n {
        m[(0, b)] = tval(t, IndexSet::EMPTY, IndexSet::from_elems([b as u32]))?;
    }
    for i in 1..=d {
        let hi = IndexSet::from_elems([i as u32]);
        m[(i, 0)] = tval(t, hi, IndexSet::EMPTY)?;
        m[(i, i)] = Complex64::one();
        for b in d + 1..=n {
            m[(i, b)] = tval(t, hi, IndexSet::from_elems([b as u32]))?;
        }
    }
    Ok(m)
}

/// Minors of the flag matrix against the exponential map.
pub fn flag_parameterization(t: &HashMap<Var, Complex64>, d: usize, n: usize) -> Result<StructuredCheck> {
    let sigma = flag_levels();
    let m = flag_matrix(t, d, n)?;
    let all_rows: Vec<usize> = (0..=d).collect();
    let low_rows: Vec<usize> = (1..=d).collect();
    let coords: Vec<Complex64> = (0..1usize << n)
        .map(|r| {
            let j = IndexSet::from_rank(r);
            let cols: Vec<usize> = j.iter().map(|x| x as usize).collect();
            match j.len() {
                k if k == d + 1 => minor(&m, &all_rows, &cols),
                k if k == d => minor(&m, &low_rows, &cols),
                k if k + 1 == d => {
                    let mut c = vec![0];
                    c.extend(cols);
                    minor(&m, &low_rows, &c)
                }
                _ => Complex64::zero(),
            }
        })
        .collect();
    let psi = numeric_forward(t, d, n, &sigma)?;
    Ok(StructuredCheck { max_error: max_diff(&coords, &psi), matrix: m, coords })
}

/// Pfaffian by expansion along the first row; `Pf([[0, a], [-a, 0]]) = a`.
pub fn pfaffian(a: &DMatrix<Complex64>) -> Complex64 {
    let idx: Vec<usize> = (0..a.nrows()).collect();
    pf_rec(a, &idx)
}

fn pf_rec(a: &DMatrix<Complex64>, idx: &[usize]) -> Complex64 {
    match idx.len() {
        0 => Complex64::one(),
        k if k % 2 == 1 => Complex64::zero(),
        _ => {
            let mut s = Complex64::zero();
            for j in 1..idx.len() {
                let v = a[(idx[0], idx[j])];
                if v.is_zero() {
                    continue;
                }
                let rest: Vec<usize> = idx[1..].iter().enumerate().filter(|&(k, _)| k + 1 != j).map(|(_, &x)| x).collect();
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                s += v * sign * pf_rec(a, &rest);
            }
            s
        }
    }
}

/// The skew matrix of `T(t_σ)` in the basis `(-1)^{i-1} a_i`, `(-1)^d a_b†`.
pub fn spinor_matrix(t: &HashMap<Var, Complex64>, d: usize, n: usize) -> Result<DMatrix<Complex64>> {
    let mut m = DMatrix::zeros(n, n);
    let sign = |e: usize| if e % 2 == 0 { 1.0 } else { -1.0 };
    for i in 1..=n {
        for j in i + 1..=n {
            let v = if j <= d {
                -sign(i + j) * tval(t, IndexSet::from_elems([i as u32, j as u32]), IndexSet::EMPTY)?
            } else if i <= d {
                sign(i + d) * tval(t, IndexSet::from_elems([i as u32]), IndexSet::from_elems([j as u32]))?
            } else {
                tval(t, IndexSet::EMPTY, IndexSet::from_elems([i as u32, j as u32]))?
            };
            m[(i - 1, j - 1)] = v;
            m[(j - 1, i - 1)] = -v;
        }
    }
    Ok(m)
}

/// Sub-Pfaffians `Pf(T_I)` placed at `ψ_{[d] ⊕ I}` against the exponential map.
pub fn spinor_parameterization(t: &HashMap<Var, Complex64>, d: usize, n: usize) -> Result<StructuredCheck> {
    let sigma = spinor_levels();
    let m = spinor_matrix(t, d, n)?;
    let mut coords = vec![Complex64::zero(); 1 << n];
    for r in 0..1usize << n {
        let i = IndexSet::from_rank(r);
        if i.len() % 2 == 0 {
            let idx: Vec<usize> = i.iter().map(|x| x as usize - 1).collect();
            coords[i.sym_diff(IndexSet::range(d)).rank()] = pf_rec(&m, &idx);
        }
    }
    let psi = numeric_forward(t, d, n, &sigma)?;
    Ok(StructuredCheck { max_error: max_diff(&coords, &psi), matrix: m, coords })
}
