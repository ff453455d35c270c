#![allow(dead_code)]

use fockcc::combinatorics::IndexSet;
use fockcc::fd_algebra::Q;
use fockcc::multipoly::{Monomial, Poly, Var};

pub fn s(v: &[u32]) -> IndexSet {
    IndexSet::from_elems(v.iter().copied())
}

// Independent construction: enumerate even partitions of the padded
// symmetric difference and act with each block's operator on e_[d] bit by bit.
pub fn oracle_partitions(elems: &[u32]) -> Vec<Vec<Vec<u32>>> {
    if elems.is_empty() {
        return vec![vec![]];
    }
    let first = elems[0];
    let rest = &elems[1..];
    let mut out = Vec::new();
    for mask in 0u32..1 << rest.len() {
        if mask.count_ones() % 2 == 0 {
            continue;
        }
        let mut block = vec![first];
        let mut remain = Vec::new();
        for (i, &e) in rest.iter().enumerate() {
            if mask >> i & 1 == 1 {
                block.push(e);
            } else {
                remain.push(e);
            }
        }
        for mut p in oracle_partitions(&remain) {
            p.insert(0, block.clone());
            out.push(p);
        }
    }
    out
}

pub fn oracle_apply(holes: &[u32], parts: &[u32], state: (i64, u32)) -> Option<(i64, u32)> {
    // operator a_{b1}' .. a_{bl}' a_{im} .. a_{i1}; rightmost acts first
    let (mut sign, mut bits) = state;
    let mut ops: Vec<(bool, u32)> = holes.iter().map(|&i| (false, i)).collect();
    ops.extend(parts.iter().rev().map(|&b| (true, b)));
    for (create, p) in ops {
        let occ = bits >> (p - 1) & 1 == 1;
        let below = (bits & ((1 << (p - 1)) - 1)).count_ones();
        if occ == create {
            return None;
        }
        bits ^= 1 << (p - 1);
        if below % 2 == 1 {
            sign = -sign;
        }
    }
    Some((sign, bits))
}

pub fn oracle_psi(j: &[u32], d: u32) -> Poly {
    let jbits: u32 = j.iter().map(|&x| 1 << (x - 1)).sum();
    let refbits = (1u32 << d) - 1;
    if jbits == refbits {
        return Poly::one();
    }
    let mut sym: Vec<u32> = (1..=16).filter(|&x| (jbits ^ refbits) >> (x - 1) & 1 == 1).collect();
    if sym.len() % 2 == 1 {
        sym.insert(0, 0);
    }
    let mut p = Poly::zero();
    for part in oracle_partitions(&sym) {
        let mut st = Some((1i64, refbits));
        let mut vars = Vec::new();
        for b in &part {
            let h: Vec<u32> = b.iter().copied().filter(|&x| x >= 1 && x <= d).collect();
            let q: Vec<u32> = b.iter().copied().filter(|&x| x > d).collect();
            vars.push(Var::t(s(&h), s(&q)));
            st = st.and_then(|x| oracle_apply(&h, &q, x));
        }
        let (sign, bits) = st.expect("blocks act disjointly");
        assert_eq!(bits, jbits);
        p.add_term(Monomial::from_factors(vars), Q::from_integer(sign));
    }
    p
}

pub fn subsets(n: usize) -> Vec<Vec<u32>> {
    (0..1u32 << n).map(|m| (1..=n as u32).filter(|&x| m >> (x - 1) & 1 == 1).collect()).collect()
}

pub fn parse_tex_poly(src: &str) -> Poly {
    let mut p = Poly::zero();
    let src = src.replace(' ', "");
    let mut sign = 1i64;
    let mut factors: Vec<Var> = Vec::new();
    let mut rest = src.as_str();
    let flush = |p: &mut Poly, sign: i64, factors: &mut Vec<Var>| {
        if !factors.is_empty() {
            p.add_term(Monomial::from_factors(factors.drain(..)), Q::from_integer(sign));
        }
    };
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix('+') {
            flush(&mut p, sign, &mut factors);
            sign = 1;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('-') {
            flush(&mut p, sign, &mut factors);
            sign = -1;
            rest = r;
        } else if let Some(r) = rest.strip_prefix("t_{") {
            let end = r.find('}').unwrap();
            let (h, q) = r[..end].split_once(',').unwrap();
            let set = |x: &str| if x == "0" { IndexSet::EMPTY } else { IndexSet::from_elems(x.chars().map(|c| c.to_digit(10).unwrap())) };
            factors.push(Var::t(set(h), set(q)));
            rest = &r[end + 1..];
        } else if let Some(r) = rest.strip_prefix('1') {
            p.add_term(Monomial::one(), Q::from_integer(sign));
            rest = r;
        } else if let Some(r) = rest.strip_prefix('0') {
            rest = r;
        } else {
            panic!("unexpected input {rest}");
        }
    }
    flush(&mut p, sign, &mut factors);
    p
}

pub const CLUSTER_MATRIX: &str = r"
0 & t_{1,0} & t_{2,0} & t_{12,0} & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0
0 & 0 & 0 & -t_{2,0} & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0
0 & 0 & 0 & t_{1, 0} & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0
0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0
t_{0,3} & t_{1,3} & t_{2,3} & t_{12,3} & 0 & t_{1,0} & t_{2,0} & t_{12,0} & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0
0 & -t_{0,3} & 0 & t_{2 ,3} & 0 & 0 & 0 & -t_{2,0} & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0
0 & 0 & -t_{0,3} & -t_{1 ,3} & 0 & 0 & 0 & t_{1,0} & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0
0 & 0 & 0 & t_{0,3} & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0
t_{0,4} & t_{1 ,4} & t_{2,4} & t_{12 ,4} & 0 & 0 & 0 & 0 & 0 & t_{1,0} & t_{2,0} & t_{12,0} & 0 & 0 & 0 & 0
0 & -t_{0,4} & 0 & t_{2,4} & 0 & 0 & 0 & 0 & 0 & 0 & 0 & -t_{2,0} & 0 & 0 & 0 & 0
0 & 0 & -t_{0,4} & -t_{1 ,4}  & 0 & 0 & 0 & 0 & 0 & 0 & 0 & t_{1,0} & 0 & 0 & 0 & 0
0 & 0 & 0 & t_{0,4} & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0 & 0
t_{0,34} & t_{1,34} & t_{2,34} & t_{12,34} & -t_{0,4} & -t_{1,4} & -t_{2,4} & -t_{12,4} & t_{0,3} & t_{1 ,3} & t_{2,3} & t_{12,3} & 0 & t_{1,0}  & t_{2,0} & t_ {12,0}
0 & t_{0,34} & 0 & -t_{2,34} & 0 & t_{0,4} & 0 & -t_{2,4} & 0 & -t_{0,3}  & 0 & t_{2,3} & 0 & 0 & 0 & -t_{2,0}
0 & 0 & t_{0,34} & t_{1,34} & 0 & 0 & t_{0,4} & t_{1,4} & 0 & 0 & -t_{0,3} & -t_{1,3} & 0 & 0 & 0 & t_{1,0}
0 & 0 & 0 & t_{0,34}  & 0 & 0 & 0 & -t_{0,4} & 0 & 0 & 0 & t_{0,3} & 0 & 0 & 0 & 0
";

pub const STATE_COLUMN: &str = r"
t_{12,0}
-t_{2,0}
t_{1,0}
1
t_{0,3}t_{12,0}-t_{2,0}t_{1,3}+t_{1,0}t_{2,3}+t_{12,3}
t_{2,3}
-t_{1,3}
t_{0,3}
t_{0,4}t_{12,0}-t_{2,0}t_{1,4}+t_{1,0}t_{2,4}+t_{12,4}
t_{2,4}
-t_{1,4}
t_{0,4}
t_{12,0}t_{0,34}-t_{1,4}t_{2,3}+t_{1,3}t_{2,4}+t_{12,34}
-t_{2,0}t_{0,34}+t_{0,4}t_{2,3}-t_{0,3}t_{2,4}-t_{2,34}
t_{1,0}t_{0,34}-t_{0,4}t_{1,3}+t_{0,3}t_{1,4}+t_{1,34}
t_{0,34}
";
pub const MASTER_TWO: &str = "t_{12,0}t_{0,34}-t_{1,4}t_{2,3}+t_{1,3}t_{2,4}+t_{12,34}";

pub const MASTER_THREE: &str = "t_{23,0}t_{0,56}t_{1,4}-t_{23,0}t_{0,46}t_{1,5}+t_{23,0}t_{0,45}t_{1,6}
        -t_{13,0}t_{0,56}t_{2,4}+t_{13,0}t_{0,46}t_{2,5}-t_{13,0}t_{0,45}t_{2,6}
        +t_{12,0}t_{0,56}t_{3,4}-t_{1,6}t_{2,5}t_{3,4}+t_{1,5}t_{2,6}t_{3,4}
        -t_{12,0}t_{0,46}t_{3,5}+t_{1,6}t_{2,4}t_{3,5}-t_{1,4}t_{2,6}t_{3,5}
        +t_{12,0}t_{0,45}t_{3,6}-t_{1,5}t_{2,4}t_{3,6}+t_{1,4}t_{2,5}t_{3,6}
        +t_{0,56}t_{123,4}-t_{0,46}t_{123,5}+t_{0,45}t_{123,6}+t_{23,0}t_{1,456}
        -t_{13,0}t_{2,456}+t_{12,0}t_{3,456}+t_{3,6}t_{12,45}-t_{3,5}t_{12,46}
        +t_{3,4}t_{12,56}-t_{2,6}t_{13,45}+t_{2,5}t_{13,46}-t_{2,4}t_{13,56}
        +t_{1,6}t_{23,45}-t_{1,5}t_{23,46}+t_{1,4}t_{23,56}+t_{123,456}";

/// Printed relabelings for d=2, n=5.
pub const RELABELINGS: [(&[u32], &str); 6] = [
    (&[3, 5], "t_{12,0}t_{0,35}-t_{1,5}t_{2,3}+t_{1,3}t_{2,5}+t_{12,35}"),
    (&[1, 3, 4, 5], "t_{0,45}t_{2,3}-t_{0,35}t_{2,4}+t_{0,34}t_{2,5}+t_{2,345}"),
    (&[4, 5], "t_{12,0}t_{0,45}-t_{1,5}t_{2,4}+t_{1,4}t_{2,5}+t_{12,45}"),
    (&[5], "t_{12,0}t_{0,5}-t_{1,5}t_{2,0}+t_{1,0}t_{2,5}+t_{12,5}"),
    (&[2, 3, 5], "t_{1,0}t_{0,35}-t_{0,5}t_{1,3}+t_{0,3}t_{1,5}+t_{1,35}"),
    (&[1, 2, 3, 4, 5], "t_{0,34}t_{0,5}-t_{0,35}t_{0,4}+t_{0,45}t_{0,3}+t_{0,345}"),
];

/// Printed with the opposite overall sign; a3' a4' a5' a1 e_12 = -e_2345.
pub const RELABELING_2345: &str = "t_{0,45}t_{1,3}-t_{0,35}t_{1,4}+t_{0,34}t_{1,5}+t_{1,345}";

pub fn compact(tex: &str) -> String {
    tex.split_whitespace().collect()
}
