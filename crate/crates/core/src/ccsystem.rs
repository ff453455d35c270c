//! Unlinked CC equations for a random symmetric Hamiltonian, hyperplane
//! sections for variety degrees, and seeds for monodromy.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::IndexSet;
use crate::error::{FockError, Result};
use crate::expparam::{amplitude_vars, forward_map, random_amplitudes, ClusterOperator, ParamMap};
use crate::homotopy::LinearFamily;
use crate::multipoly::{CPoly, FrozenSystem, Var};
use crate::truncation::{dimension, grid, level_of, LevelSet};

pub const MAX_HAMILTONIAN_ORBITALS: usize = 10;

/// Dense real symmetric matrix on Fock space, indexed by revlex rank.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    pub n: usize,
    pub seed: u64,
    pub matrix: DMatrix<f64>,
}

impl Hamiltonian {
    pub fn to_complex(&self) -> DMatrix<Complex64> {
        self.matrix.map(|x| Complex64::new(x, 0.0))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<f64>> = self.matrix.row_iter().map(|r| r.iter().copied().collect()).collect();
        serde_json::json!({ "n": self.n, "seed": self.seed, "matrix": rows })
    }
}

/// Upper triangle row by row from ChaCha20, uniform on `[-1, 1]`, mirrored.
pub fn random_hamiltonian(n: usize, seed: u64) -> Result<Hamiltonian> {
    if n > MAX_HAMILTONIAN_ORBITALS {
        return Err(FockError::Capacity(format!("dense Hamiltonians need n ≤ {MAX_HAMILTONIAN_ORBITALS}")));
    }
    let dim = 1usize << n;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let x: f64 = rng.gen_range(-1.0..=1.0);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    Ok(Hamiltonian { n, seed, matrix: m })
}

/// Uniform on the square `[-1, 1]²`.
pub fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_complex_symmetric<R: Rng>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let x = random_complex(rng);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

/// Ranks of the `J` with level in `σ ∪ {(0,0)}`, increasing.
pub fn projection_indices(d: usize, n: usize, sigma: &LevelSet) -> Vec<usize> {
    (0..1usize << n)
        .filter(|&r| {
            let l = level_of(IndexSet::from_rank(r), d);
            l == (0, 0) || sigma.contains(l)
        })
        .collect()
}

fn check_proper(sigma: &LevelSet, d: usize, n: usize) -> Result<()> {
    sigma.validate(d, n)?;
    if sigma.is_empty() || *sigma == grid(d, n) {
        return Err(FockError::Shape("σ must be a nonempty proper subset of the grid".into()));
    }
    Ok(())
}

/// Coordinates `ψ_K(t_σ)` frozen over the unknowns `unknowns`.
fn frozen_coordinates(map: &ParamMap, unknowns: &[Var]) -> Result<Vec<CPoly>> {
    let index: HashMap<Var, usize> = unknowns.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    map.coords.iter().map(|p| CPoly::from_poly(p, &index)).collect()
}

/// `((H − λ) ψ(t_σ))_J = 0` for `J` in the projection, unknowns `(λ, t_σ)`.
#[derive(Clone, Debug)]
pub struct CcSystem {
    pub d: usize,
    pub n: usize,
    pub sigma: LevelSet,
    pub unknowns: Vec<Var>,
    pub projection: Vec<usize>,
    pub coords: ParamMap,
    pub hamiltonian_seed: Option<u64>,
    pub shadow: Vec<CPoly>,
    basis: Vec<CPoly>,
}

impl CcSystem {
    pub fn dimension(&self) -> usize {
        self.unknowns.len() - 1
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.shadow.iter().map(|p| p.degree()).collect()
    }

    pub fn frozen(&self) -> FrozenSystem {
        FrozenSystem { unknowns: self.unknowns.iter().map(|v| v.to_string()).collect(), polys: self.shadow.clone() }
    }

    /// The CC equations as a family linear in the Hamiltonian rows: the basis
    /// is every `ψ_K` followed by `λ ψ_J` for `J` in the projection.
    pub fn family(&self) -> LinearFamily {
        let mut basis = self.basis.clone();
        for &j in &self.projection {
            basis.push(self.basis[j].mul_var(0));
        }
        LinearFamily { unknowns: self.frozen().unknowns, basis, rows: self.projection.len() }
    }

    /// Coefficient matrix of `family()` for a (complex) symmetric `H`.
    pub fn family_params(&self, h: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let nb = self.basis.len();
        let m = self.projection.len();
        let mut p = DMatrix::zeros(m, nb + m);
        for (i, &j) in self.projection.iter().enumerate() {
            for k in 0..nb {
                p[(i, k)] = h[(j, k)];
            }
            p[(i, nb + i)] = Complex64::new(-1.0, 0.0);
        }
        p
    }

    /// Full Fock-space residual `(H − λ) ψ(t)` at a point `(λ, t)`.
    pub fn full_residual(&self, h: &DMatrix<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
        let psi: Vec<Complex64> = self.basis.iter().map(|p| p.eval(x)).collect();
        (0..psi.len()).map(|j| (0..psi.len()).map(|k| h[(j, k)] * psi[k]).sum::<Complex64>() - x[0] * psi[j]).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": "cc",
            "d": self.d,
            "n": self.n,
            "sigma": self.sigma.to_string(),
            "hamiltonian_seed": self.hamiltonian_seed,
            "projection": self.projection.iter().map(|&r| IndexSet::from_rank(r).to_string()).collect::<Vec<_>>(),
            "degrees": self.degrees(),
            "system": self.frozen(),
        })
    }
}

pub fn assemble_cc_system(h: &Hamiltonian, d: usize, n: usize, sigma: &LevelSet) -> Result<CcSystem> {
    if h.n != n {
        return Err(FockError::Shape(format!("Hamiltonian acts on n = {}, not {n}", h.n)));
    }
    let mut sys = assemble_with_matrix(&h.to_complex(), d, n, sigma)?;
    sys.hamiltonian_seed = Some(h.seed);
    Ok(sys)
}

/// As `assemble_cc_system`, for any complex symmetric matrix.
pub fn assemble_with_matrix(h: &DMatrix<Complex64>, d: usize, n: usize, sigma: &LevelSet) -> Result<CcSystem> {
    check_proper(sigma, d, n)?;
    if h.nrows() != 1 << n || h.ncols() != 1 << n {
        return Err(FockError::Shape(format!("Hamiltonian must be {0}×{0}", 1usize << n)));
    }
    let coords = forward_map(d, n, sigma)?;
    let mut unknowns = vec![Var::Lambda];
    unknowns.extend(amplitude_vars(d, n, sigma));
    let basis = frozen_coordinates(&coords, &unknowns)?;
    let projection = projection_indices(d, n, sigma);
    let shadow = projection
        .iter()
        .map(|&j| {
            let mut p = CPoly::default();
            for (k, psi) in basis.iter().enumerate() {
                if !h[(j, k)].is_zero() {
                    p.add_scaled(psi, h[(j, k)]);
                }
            }
            p.add_scaled(&basis[j].mul_var(0), Complex64::new(-1.0, 0.0));
            p.compact();
            p
        })
        .collect();
    Ok(CcSystem { d, n, sigma: sigma.clone(), unknowns, projection, coords, hamiltonian_seed: None, shadow, basis })
}

/// `dim σ` random linear forms in the coordinates `ψ_K(t_σ)`.
#[derive(Clone, Debug)]
pub struct DegreeSystem {
    pub d: usize,
    pub n: usize,
    pub sigma: LevelSet,
    pub seed: u64,
    pub unknowns: Vec<Var>,
    pub gamma: DMatrix<Complex64>,
    pub shadow: Vec<CPoly>,
    basis: Vec<CPoly>,
}

impl DegreeSystem {
    pub fn frozen(&self) -> FrozenSystem {
        FrozenSystem { unknowns: self.unknowns.iter().map(|v| v.to_string()).collect(), polys: self.shadow.clone() }
    }

    pub fn family(&self) -> LinearFamily {
        LinearFamily { unknowns: self.frozen().unknowns, basis: self.basis.clone(), rows: self.gamma.nrows() }
    }

    /// A point `t*` and slice `Γ` with `Γ ψ(t*) = 0`, found by fixing the
    /// column of the reference coordinate.
    pub fn seed_slice(&self, seed: u64) -> (DMatrix<Complex64>, Vec<Complex64>) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let t: Vec<Complex64> = (0..self.unknowns.len()).map(|_| random_complex(&mut rng)).collect();
        let psi: Vec<Complex64> = self.basis.iter().map(|p| p.eval(&t)).collect();
        let reference = IndexSet::range(self.d).rank();
        let mut g = DMatrix::from_fn(self.gamma.nrows(), self.gamma.ncols(), |_, _| random_complex(&mut rng));
        for i in 0..g.nrows() {
            let s: Complex64 = (0..g.ncols()).filter(|&k| k != reference).map(|k| g[(i, k)] * psi[k]).sum();
            g[(i, reference)] = -s / psi[reference];
        }
        (g, t)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": "degree",
            "d": self.d,
            "n": self.n,
            "sigma": self.sigma.to_string(),
            "seed": self.seed,
            "system": self.frozen(),
        })
    }
}

pub fn assemble_degree_system(sigma: &LevelSet, d: usize, n: usize, seed: u64) -> Result<DegreeSystem> {
    check_proper(sigma, d, n)?;
    let coords = forward_map(d, n, sigma)?;
    let unknowns = amplitude_vars(d, n, sigma);
    let basis = frozen_coordinates(&coords, &unknowns)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dim = dimension(sigma, d, n);
    let gamma = DMatrix::from_fn(dim, basis.len(), |_, _| random_complex(&mut rng));
    let shadow = (0..dim)
        .map(|i| {
            let mut p = CPoly::default();
            for (k, psi) in basis.iter().enumerate() {
                p.add_scaled(psi, gamma[(i, k)]);
            }
            p.compact();
            p
        })
        .collect();
    Ok(DegreeSystem { d, n, sigma: sigma.clone(), seed, unknowns, gamma, shadow, basis })
}

/// A complex symmetric `H` with a known solution `(λ*, t*)` of its CC system.
#[derive(Clone, Debug)]
pub struct SeedTriple {
    pub hamiltonian: DMatrix<Complex64>,
    pub lambda: Complex64,
    /// Amplitudes in the order of `amplitude_vars`.
    pub t: Vec<Complex64>,
    pub constraint_rank: usize,
    pub residual: f64,
}

impl SeedTriple {
    /// `(λ*, t*)` as a point in the unknown order of the CC system.
    pub fn point(&self) -> Vec<Complex64> {
        let mut x = vec![self.lambda];
        x.extend(&self.t);
        x
    }
}

const SEED_RETRIES: usize = 10;

/// Least-norm symmetric correction of a random complex symmetric draw so that
/// a random `(λ*, t*)` solves the projected equations.
pub fn monodromy_seed(d: usize, n: usize, sigma: &LevelSet, seed: u64) -> Result<SeedTriple> {
    check_proper(sigma, d, n)?;
    let op = ClusterOperator::new(d, n, sigma)?;
    let proj = projection_indices(d, n, sigma);
    let vars = op.vars();
    let dim = 1usize << n;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..SEED_RETRIES {
        let tvals = random_amplitudes(&vars, &mut rng, false);
        let t = op.values(&tvals)?;
        let psi = op.forward(&t);
        let lambda = random_complex(&mut rng);
        let mut h = random_complex_symmetric(dim, &mut rng);

        // rows of the constraint map on the upper triangle; its Gram matrix
        // has ‖ψ‖² on the diagonal and conj(ψ_Ja) ψ_Jb off it
        let m = proj.len();
        let norm2: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
        let gram = DMatrix::from_fn(m, m, |a, b| if a == b { Complex64::new(norm2, 0.0) } else { psi[proj[a]].conj() * psi[proj[b]] });
        let svd = gram.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let rank = svd.singular_values.iter().filter(|&&s| s > smax * 1e-12).count();
        if rank < m || norm2 < 1e-20 {
            continue;
        }
        let r = nalgebra::DVector::from_fn(m, |a, _| {
            let j = proj[a];
            (0..dim).map(|k| h[(j, k)] * psi[k]).sum::<Complex64>() - lambda * psi[j]
        });
        let Some(y) = gram.lu().solve(&(-r)) else { continue };
        let mut pos = vec![None; dim];
        for (a, &j) in proj.iter().enumerate() {
            pos[j] = Some(a);
        }
        for j in 0..dim {
            for k in j..dim {
                let mut delta = Complex64::zero();
                if let Some(a) = pos[j] {
                    delta += y[a] * psi[k].conj();
                }
                if k != j {
                    if let Some(b) = pos[k] {
                        delta += y[b] * psi[j].conj();
                    }
                }
                if !delta.is_zero() {
                    h[(j, k)] += delta;
                    if k != j {
                        h[(k, j)] += delta;
                    }
                }
            }
        }
        let residual = proj
            .iter()
            .map(|&j| ((0..dim).map(|k| h[(j, k)] * psi[k]).sum::<Complex64>() - lambda * psi[j]).norm())
            .fold(0.0, f64::max);
        if residual > 1e-12 {
            continue;
        }
        return Ok(SeedTriple { hamiltonian: h, lambda, t, constraint_rank: rank, residual });
    }
    Err(FockError::RejectedSeed(format!("no nondegenerate seed after {SEED_RETRIES} draws")))
}

/// On-disk form of a frozen system with its provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemRecord {
    pub kind: String,
    pub d: usize,
    pub n: usize,
    pub sigma: String,
    pub seed: Option<u64>,
    pub system: FrozenSystem,
}

impl SystemRecord {
    pub fn from_cc(sys: &CcSystem) -> Self {
        SystemRecord { kind: "cc".into(), d: sys.d, n: sys.n, sigma: sys.sigma.to_string(), seed: sys.hamiltonian_seed, system: sys.frozen() }
    }

    pub fn from_degree(sys: &DegreeSystem) -> Self {
        SystemRecord { kind: "degree".into(), d: sys.d, n: sys.n, sigma: sys.sigma.to_string(), seed: Some(sys.seed), system: sys.frozen() }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("records serialize")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| FockError::Parse { pos: e.column(), msg: e.to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::truncation::spinor_levels;

    #[test]
    fn hamiltonian_is_symmetric_and_reproducible() {
        let a = random_hamiltonian(3, 1).unwrap();
        assert_eq!(a.matrix, a.matrix.transpose());
        assert_eq!(a, random_hamiltonian(3, 1).unwrap());
        assert_ne!(a.matrix[(0, 0)], random_hamiltonian(3, 2).unwrap().matrix[(0, 0)]);
        assert!(random_hamiltonian(11, 0).is_err());
    }

    #[test]
    fn square_system() {
        let h = random_hamiltonian(4, 3).unwrap();
        let sys = assemble_cc_system(&h, 2, 4, &spinor_levels()).unwrap();
        assert_eq!(sys.shadow.len(), sys.unknowns.len());
        assert_eq!(sys.dimension(), 6);
    }

    #[test]
    fn seed_solves_system() {
        let s = monodromy_seed(2, 4, &spinor_levels(), 4).unwrap();
        assert!(s.residual <= 1e-12);
        let sys = assemble_with_matrix(&s.hamiltonian, 2, 4, &spinor_levels()).unwrap();
        let f = sys.frozen().evaluate(&s.point());
        assert!(f.iter().all(|v| v.norm() < 1e-12));
    }
}
