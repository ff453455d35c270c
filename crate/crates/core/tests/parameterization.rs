use std::collections::{BTreeMap, HashMap};

use fockcc::combinatorics::IndexSet;
use fockcc::expparam::*;
use fockcc::multipoly::{Poly, Var};
use fockcc::truncation::{grid, level_of, LevelSet};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

mod common;

use common::*;

#[test]
fn relabeled_master_matches_direct_construction() {
    for (d, n) in [(1, 2), (1, 3), (2, 4), (2, 5), (3, 6), (2, 6), (1, 5), (3, 5), (4, 6)] {
        for j in subsets(n) {
            let got = psi_coordinate(s(&j), d, n).unwrap();
            assert_eq!(got, oracle_psi(&j, d as u32), "d={d} n={n} J={j:?}");
        }
    }
}

#[test]
fn coordinate_degrees() {
    for d in 1..=4 {
        for n in d..=8 {
            for r in 0..1usize << n {
                let j = IndexSet::from_rank(r);
                let p = psi_coordinate(j, d, n).unwrap();
                let sd = j.sym_diff(IndexSet::range(d)).len() as u32;
                assert_eq!(p.degree(), sd.div_ceil(2), "d={d} n={n} J={j:?}");
            }
        }
    }
}

#[test]
fn master_term_counts() {
    for (d, c) in [(1, 1), (2, 4), (3, 31), (4, 379), (5, 6556)] {
        assert_eq!(master_polynomial(d).unwrap().num_terms(), c);
    }
}


#[test]
fn printed_cluster_matrix() {
    let sym = cluster_matrix_symbolic(2, 4, &grid(2, 4)).unwrap();
    let rows: Vec<&str> = CLUSTER_MATRIX.trim().lines().collect();
    assert_eq!(rows.len(), 16);
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<&str> = row.split('&').collect();
        assert_eq!(cells.len(), 16);
        for (j, cell) in cells.iter().enumerate() {
            let expect = parse_tex_poly(cell);
            let got = sym.get(&(i, j)).cloned().unwrap_or_default();
            assert_eq!(got, expect, "entry ({i},{j})");
        }
    }
}

#[test]
fn printed_state_column() {
    let map = forward_map(2, 4, &grid(2, 4)).unwrap();
    let rows: Vec<&str> = STATE_COLUMN.trim().lines().collect();
    for (r, row) in rows.iter().enumerate() {
        assert_eq!(map.coords[r], parse_tex_poly(row), "coordinate {r}");
    }
}

#[test]
fn printed_relabelings() {
    for (j, tex) in RELABELINGS {
        assert_eq!(psi_coordinate(s(j), 2, 5).unwrap(), parse_tex_poly(tex), "J={j:?}");
    }
    assert_eq!(psi_coordinate(s(&[3, 4, 5]), 2, 5).unwrap().num_terms(), 31);
    let printed = parse_tex_poly(RELABELING_2345);
    assert_eq!(psi_coordinate(s(&[2, 3, 4, 5]), 2, 5).unwrap(), -&printed);
}

#[test]
fn master_displays() {
    assert_eq!(master_polynomial(2).unwrap(), parse_tex_poly(MASTER_TWO));
    assert_eq!(master_polynomial(3).unwrap(), parse_tex_poly(&compact(MASTER_THREE)));
}

fn eval_t(p: &Poly, t: &HashMap<Var, Complex64>) -> Complex64 {
    p.evaluate_with(|v| Some(t.get(&v).copied().unwrap_or_default())).unwrap()
}

#[test]
fn symbolic_agrees_with_matrix_exponential() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for (d, n) in [(1, 3), (2, 4), (2, 5), (3, 6)] {
        let g = grid(d, n);
        let map = forward_map(d, n, &g).unwrap();
        let op = ClusterOperator::new(d, n, &g).unwrap();
        for _ in 0..10 {
            let t = random_amplitudes(&op.vars(), &mut rng, false);
            let psi = op.forward(&op.values(&t).unwrap());
            for r in 0..1 << n {
                assert!((eval_t(&map.coords[r], &t) - psi[r]).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn truncated_map_drops_missing_levels() {
    let sigma = LevelSet::new([(1, 1), (2, 2)]);
    let map = forward_map(2, 4, &sigma).unwrap();
    for p in &map.coords {
        for v in p.variables() {
            if let Var::T { holes, parts } = v {
                assert!(sigma.contains((holes.len(), parts.len())));
            }
        }
    }
    assert_eq!(map.get(s(&[3, 4])), &parse_tex_poly("-t_{1,4}t_{2,3}+t_{1,3}t_{2,4}+t_{12,34}"));
}

#[test]
fn nilpotency() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for (d, n) in [(1, 2), (2, 4), (3, 6), (2, 5)] {
        let op = ClusterOperator::new(d, n, &grid(d, n)).unwrap();
        let t = op.values(&random_amplitudes(&op.vars(), &mut rng, false)).unwrap();
        for r in 0..1usize << n {
            let mut v = vec![Complex64::default(); 1 << n];
            v[r] = Complex64::new(1.0, 0.0);
            for _ in 0..=n {
                v = op.apply(&t, &v);
            }
            assert!(v.iter().all(|x| x.norm() < 1e-12));
        }
    }
}

#[test]
fn zero_amplitudes_give_reference() {
    let op = ClusterOperator::new(2, 4, &grid(2, 4)).unwrap();
    let psi = op.forward(&vec![Complex64::default(); op.pairs.len()]);
    for (r, x) in psi.iter().enumerate() {
        let e = if r == 3 { 1.0 } else { 0.0 };
        assert_eq!(*x, Complex64::new(e, 0.0));
    }
}

#[test]
fn symbolic_round_trip() {
    for (d, n) in [(1, 2), (1, 3), (2, 4), (2, 5), (3, 6), (2, 6), (3, 5)] {
        let map = forward_map(d, n, &grid(d, n)).unwrap();
        let subs: HashMap<Var, Poly> = (0..1usize << n)
            .map(|r| {
                let (h, q) = Var::pair_of(IndexSet::from_rank(r), d);
                (Var::c(h, q), map.coords[r].clone())
            })
            .collect();
        for r in 0..1usize << n {
            let j = IndexSet::from_rank(r);
            let x = inverse_coordinate(j, d, n).unwrap();
            let back = x.substitute(&subs);
            let expect = if j == IndexSet::range(d) {
                Poly::one()
            } else {
                let (h, q) = Var::pair_of(j, d);
                Poly::var(Var::t(h, q))
            };
            assert_eq!(back, expect, "d={d} n={n} J={j:?}");
        }
    }
}

#[test]
fn numeric_round_trip() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    for (d, n) in [(2, 4), (3, 6)] {
        let g = grid(d, n);
        let op = ClusterOperator::new(d, n, &g).unwrap();
        for _ in 0..20 {
            let t = random_amplitudes(&op.vars(), &mut rng, false);
            let psi = op.forward(&op.values(&t).unwrap());
            let back = numeric_inverse(&psi, d, n, &op.pairs).unwrap();
            for (v, x) in &back {
                assert!((t[v] - x).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn spinor_quadric_vanishes() {
    let x = c_to_psi(&inverse_coordinate(s(&[3, 4]), 2, 4).unwrap(), 2);
    let hom = x.homogenize(Var::Psi(s(&[1, 2])));
    let expect = {
        let p = |v: &[u32]| Poly::var(Var::Psi(s(v)));
        let a = &p(&[2, 3]) * &p(&[1, 4]);
        let b = &p(&[1, 3]) * &p(&[2, 4]);
        let c = &p(&[1, 2]) * &p(&[3, 4]);
        let e = &p(&[]) * &p(&[1, 2, 3, 4]);
        &(&(&a - &b) + &c) - &e
    };
    assert_eq!(hom, expect);
    let sigma = LevelSet::new([(1, 1), (0, 2), (2, 0)]);
    let op = ClusterOperator::new(2, 4, &sigma).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    for _ in 0..100 {
        let t = random_amplitudes(&op.vars(), &mut rng, false);
        let psi = op.forward(&op.values(&t).unwrap());
        let v = hom.evaluate_with(|v| match v {
            Var::Psi(j) => Some(psi[j.rank()]),
            _ => None,
        });
        assert!(v.unwrap().norm() < 1e-12);
    }
}

#[test]
fn eom_factorization() {
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    let tau = LevelSet::new([(1, 0), (2, 1)]);
    let sigma = LevelSet::new([(1, 1), (2, 2)]);
    for (d, n) in [(2, 4), (3, 6), (2, 5)] {
        assert!(eom_factorization_check(&tau, &sigma, d, n, 5, &mut rng).unwrap());
    }
    assert!(eom_factorization_check(&LevelSet::default(), &sigma, 2, 4, 3, &mut rng).unwrap());
    assert!(eom_factorization_check(&sigma, &sigma, 2, 4, 1, &mut rng).is_err());
}

#[test]
fn levels_of_coordinates_match_variables() {
    let map = forward_map(2, 5, &grid(2, 5)).unwrap();
    let counts: BTreeMap<(usize, usize), usize> = (0..32).fold(BTreeMap::new(), |mut m, r| {
        *m.entry(level_of(IndexSet::from_rank(r), 2)).or_default() += 1;
        m
    });
    assert_eq!(counts.values().sum::<usize>(), 32);
    assert!(map.coords.iter().all(|p| !p.is_zero()));
}
