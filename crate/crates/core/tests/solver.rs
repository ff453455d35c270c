use fockcc::ccsystem::*;
use fockcc::homotopy::*;
use fockcc::multipoly::{CPoly, CTerm, FrozenSystem};
use fockcc::truncation::{dimension, flag_levels, spinor_levels, LevelSet};
use fockcc::FockError;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type C = Complex64;

fn ls(s: &str) -> LevelSet {
    s.parse().unwrap()
}

fn term(c: f64, vars: &[(usize, u32)]) -> CTerm {
    CTerm { coef: C::new(c, 0.0), vars: vars.to_vec() }
}

#[test]
fn newton_matches_finite_difference_step() {
    // x² y − 3 y + 1, x y² + x − 2
    let sys = FrozenSystem {
        unknowns: vec!["x".into(), "y".into()],
        polys: vec![
            CPoly { terms: vec![term(1.0, &[(0, 2), (1, 1)]), term(-3.0, &[(1, 1)]), term(1.0, &[])] },
            CPoly { terms: vec![term(1.0, &[(0, 1), (1, 2)]), term(1.0, &[(0, 1)]), term(-2.0, &[])] },
        ],
    };
    let x = [C::new(0.7, 0.1), C::new(1.2, -0.3)];
    let f = sys.evaluate(&x);
    let h = 1e-7;
    let mut jac = DMatrix::zeros(2, 2);
    for k in 0..2 {
        let mut xp = x;
        xp[k] += C::new(h, 0.0);
        let fp = sys.evaluate(&xp);
        for i in 0..2 {
            jac[(i, k)] = (fp[i] - f[i]) / h;
        }
    }
    let fd = jac.lu().solve(&(-f)).unwrap();
    let step = newton_step(&sys, &x).unwrap();
    for k in 0..2 {
        assert!((fd[k] - step[k]).norm() < 1e-5);
    }
}

#[test]
fn newton_flags_singular_root() {
    // x^2 - 1 has a vanishing derivative at the start point
    let sys = FrozenSystem {
        unknowns: vec!["x".into()],
        polys: vec![CPoly { terms: vec![term(1.0, &[(0, 2)]), term(-1.0, &[])] }],
    };
    let r = newton_refine(&sys, &[C::new(0.0, 0.0)], &TrackerConfig::default());
    assert_eq!(r.status, NewtonStatus::Singular);
    assert_eq!(r.point, vec![C::new(0.0, 0.0)]);
    assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn generic_linear_system_has_one_solution() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let n = 4;
    let polys = (0..n)
        .map(|_| {
            let mut terms: Vec<CTerm> = (0..n).map(|k| CTerm { coef: random_complex(&mut rng), vars: vec![(k, 1)] }).collect();
            terms.push(CTerm { coef: random_complex(&mut rng), vars: vec![] });
            CPoly { terms }
        })
        .collect();
    let sys = FrozenSystem { unknowns: (0..n).map(|k| format!("x{k}")).collect(), polys };
    let set = total_degree_solve(&sys, &TrackerConfig::default(), 3).unwrap();
    assert_eq!(set.len(), 1);
    assert_eq!(set.paths, 1);
}

#[test]
fn bezout_paths_and_capacity() {
    let h = random_hamiltonian(4, 5).unwrap();
    let sys = assemble_cc_system(&h, 2, 4, &spinor_levels()).unwrap();
    let product: u32 = sys.degrees().iter().product();
    let set = total_degree_solve(&sys.frozen(), &TrackerConfig::default(), 1).unwrap();
    assert_eq!(set.paths as u32, product);
    let cfg = TrackerConfig { max_bezout: 10, ..TrackerConfig::default() };
    assert!(matches!(total_degree_solve(&sys.frozen(), &cfg, 1), Err(FockError::Capacity(_))));
}

#[test]
fn cc_system_is_square() {
    let h = random_hamiltonian(5, 1).unwrap();
    for s in ["1,1", "1,0;1,1;0,1", "2,0;1,1;0,2", "1,1;2,2", "0,1", "2,1;1,0"] {
        let sigma = ls(s);
        let sys = assemble_cc_system(&h, 2, 5, &sigma).unwrap();
        assert_eq!(sys.shadow.len(), dimension(&sigma, 2, 5) + 1);
        assert_eq!(sys.unknowns.len(), sys.shadow.len());
    }
    let full = fockcc::truncation::grid(2, 4);
    assert!(assemble_cc_system(&random_hamiltonian(4, 1).unwrap(), 2, 4, &full).is_err());
}

#[test]
fn linear_truncation_is_an_eigenproblem() {
    let cfg = TrackerConfig::default();
    for (d, n, s) in [(2, 4, "1,0"), (2, 4, "0,1;1,0"), (2, 5, "1,1;2,2;2,1")] {
        let sigma = ls(s);
        assert!(fockcc::truncation::is_linear(&sigma, d, n));
        let dim = dimension(&sigma, d, n);
        let eig = cc_solve(d, n, &sigma, &cfg, 4, SolveMethod::Eigen).unwrap();
        assert_eq!(eig.len(), dim + 1, "σ={s}");
        assert_eq!(eig.real_count(), dim + 1);
        if dim <= 4 {
            let td = cc_solve(d, n, &sigma, &cfg, 4, SolveMethod::TotalDegree).unwrap();
            assert_eq!(td.len(), dim + 1, "σ={s}");
        }
    }
}

#[test]
fn relaxation_leaves_other_rows_nonzero() {
    let h = random_hamiltonian(4, 8).unwrap();
    let sigma = spinor_levels();
    let sys = assemble_cc_system(&h, 2, 4, &sigma).unwrap();
    let set = cc_solve(2, 4, &sigma, &TrackerConfig::default(), 8, SolveMethod::TotalDegree).unwrap();
    for s in &set.solutions {
        let full = sys.full_residual(&h.to_complex(), &s.point);
        let other = (0..16).filter(|r| !sys.projection.contains(r)).map(|r| full[r].norm()).fold(0.0, f64::max);
        let projected = sys.projection.iter().map(|&r| full[r].norm()).fold(0.0, f64::max);
        assert!(projected < 1e-9);
        assert!(other > 1e-6);
    }
}

#[test]
fn seed_constraints_have_full_rank() {
    let sigma = flag_levels();
    let seed = monodromy_seed(2, 4, &sigma, 12).unwrap();
    let proj = projection_indices(2, 4, &sigma);
    assert_eq!(seed.constraint_rank, proj.len());
    assert!(seed.residual <= 1e-12);
    let h = &seed.hamiltonian;
    assert!((h - h.transpose()).iter().all(|z| z.norm() < 1e-15));

    // dense constraint matrix on the upper triangle, rank by SVD
    let sys = assemble_with_matrix(h, 2, 4, &sigma).unwrap();
    let psi: Vec<C> = sys.coords.coords.iter().map(|p| {
        let t = &seed.t;
        let vars = fockcc::expparam::amplitude_vars(2, 4, &sigma);
        p.evaluate_with(|v| vars.iter().position(|&w| w == v).map(|k| t[k])).unwrap()
    }).collect();
    let pairs: Vec<(usize, usize)> = (0..16).flat_map(|j| (j..16).map(move |k| (j, k))).collect();
    let a = DMatrix::from_fn(proj.len(), pairs.len(), |row, col| {
        let (j, k) = pairs[col];
        let r = proj[row];
        let mut v = C::new(0.0, 0.0);
        if j == r {
            v += psi[k];
        }
        if k == r && j != k {
            v += psi[j];
        }
        v
    });
    let sv = a.singular_values();
    let rank = sv.iter().filter(|&&s| s > sv.max() * 1e-12).count();
    assert_eq!(rank, proj.len());
    let f = sys.frozen().evaluate(&seed.point());
    assert!(f.iter().all(|z| z.norm() <= 1e-12));
}

#[test]
fn monodromy_rejects_bad_seed() {
    let h = random_hamiltonian(4, 1).unwrap();
    let sys = assemble_cc_system(&h, 2, 4, &spinor_levels()).unwrap();
    let fam = sys.family();
    let p = sys.family_params(&h.to_complex());
    let sampler = |rng: &mut ChaCha20Rng| sys.family_params(&random_complex_symmetric(16, rng));
    let bad = vec![C::new(1.0, 0.0); sys.unknowns.len()];
    let r = monodromy_solve(&fam, &p, &[bad], &p, &sampler, &TrackerConfig::default(), 1);
    assert!(matches!(r, Err(FockError::RejectedSeed(_))));
}

#[test]
fn spinor_four_both_methods() {
    let cfg = TrackerConfig::default();
    let sigma = spinor_levels();
    let td = cc_solve(2, 4, &sigma, &cfg, 31, SolveMethod::TotalDegree).unwrap();
    let mono = cc_solve(2, 4, &sigma, &cfg, 31, SolveMethod::Monodromy).unwrap();
    assert_eq!(td.len(), 13);
    assert_eq!(mono.len(), 13);
    for a in &td.solutions {
        let hit = mono.solutions.iter().any(|b| a.point.iter().zip(&b.point).all(|(x, y)| (x - y).norm() < 1e-6));
        assert!(hit, "{:?}", a.point);
    }
}

#[test]
fn solution_sets_are_well_formed() {
    let cfg = TrackerConfig::default();
    let sigma = spinor_levels();
    let a = cc_solve(2, 4, &sigma, &cfg, 2, SolveMethod::TotalDegree).unwrap();
    let b = cc_solve(2, 4, &sigma, &cfg, 2, SolveMethod::TotalDegree).unwrap();
    assert_eq!(a, b);
    assert!(a.real_count() <= a.len());
    assert!(a.conjugate_closed(1e-6));
    assert!(a.solutions.iter().all(|s| s.residual <= 1e-9));
    for (i, s) in a.solutions.iter().enumerate() {
        for t in &a.solutions[i + 1..] {
            let gap = s.point.iter().zip(&t.point).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(gap > 1e-8);
        }
    }
    let h = random_hamiltonian(4, 2).unwrap();
    let sys = assemble_cc_system(&h, 2, 4, &sigma).unwrap();
    for s in &a.solutions {
        let f = sys.frozen().evaluate(&s.point);
        assert!(f.iter().all(|z| z.norm() <= 1e-9));
    }
    let csv = a.to_csv();
    assert_eq!(csv.lines().count(), a.len() + 1);
    assert_eq!(a.to_json()["count"], 13);
}

#[test]
fn consensus_and_bound() {
    let cfg = TrackerConfig::default();
    let sigma = spinor_levels();
    let r = cc_degree(2, 4, &sigma, &cfg, &[1, 2, 3], SolveMethod::Auto).unwrap();
    assert_eq!(r.method, "total-degree");
    assert_eq!(r.require_consensus().unwrap(), 13);
    let deg = variety_degree(2, 4, &sigma, &cfg, 1, SolveMethod::Auto).unwrap().degree;
    assert_eq!(deg, 2);
    assert!(upper_bound_holds(13, 6, deg));
}

#[test]
fn linear_slice_degree_is_one() {
    let cfg = TrackerConfig::default();
    for s in ["1,0", "0,1;1,0", "2,2"] {
        let r = variety_degree(2, 4, &ls(s), &cfg, 9, SolveMethod::Auto).unwrap();
        assert_eq!(r.degree, 1, "σ={s}");
    }
}

#[test]
fn system_records_round_trip() {
    let h = random_hamiltonian(4, 6).unwrap();
    let sys = assemble_cc_system(&h, 2, 4, &flag_levels()).unwrap();
    let rec = SystemRecord::from_cc(&sys);
    let back = SystemRecord::from_json_str(&rec.to_json_string()).unwrap();
    assert_eq!(back.system, sys.frozen());
    assert_eq!(back.seed, Some(6));
    let deg = assemble_degree_system(&flag_levels(), 2, 4, 3).unwrap();
    let rec = SystemRecord::from_degree(&deg);
    assert_eq!(SystemRecord::from_json_str(&rec.to_json_string()).unwrap().system, deg.frozen());
    assert!(SystemRecord::from_json_str("{").is_err());
}

#[test]
fn hamiltonian_draws() {
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    for _ in 0..5 {
        let seed: u64 = rng.gen();
        let h = random_hamiltonian(3, seed).unwrap();
        assert!(h.matrix.iter().all(|x| (-1.0..=1.0).contains(x)));
        assert_eq!(h.matrix, h.matrix.transpose());
    }
}
