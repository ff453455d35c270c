//! Index sets over `[n]`, the reverse-lexicographic basis order, even set
//! partitions and their signs.
//!
//! An [`IndexSet`] keeps element `j` in bit `j`. Bit 0 is reserved for the
//! formal element `0` that pads odd symmetric differences to even size; it is
//! never part of an orbital index set and only shows up inside partitions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};

/// Largest orbital count supported anywhere in the crate.
pub const MAX_ORBITALS: usize = 16;

/// Element used to pad odd sets before partitioning.
pub const FORMAL_ELEMENT: u32 = 0;

/// A subset of `{0} ∪ [16]` stored as a bit pattern.
///
/// The derived ordering compares bit patterns, which for sets without the
/// formal element is exactly the reverse-lexicographic order.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IndexSet(u32);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn from_bits(bits: u32) -> Self {
        IndexSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn from_elems<I: IntoIterator<Item = u32>>(elems: I) -> Self {
        let mut bits = 0u32;
        for e in elems {
            assert!(e as usize <= MAX_ORBITALS, "element {e} out of range");
            bits |= 1 << e;
        }
        IndexSet(bits)
    }

    /// `{1, …, k}`.
    pub fn range(k: usize) -> Self {
        IndexSet(((1u32 << k) - 1) << 1)
    }

    /// Inverse of [`IndexSet::rank`].
    pub fn from_rank(rank: usize) -> Self {
        IndexSet((rank as u32) << 1)
    }

    /// Position in the reverse-lexicographic order of all subsets of `[n]`.
    pub fn rank(self) -> usize {
        debug_assert!(!self.has_formal(), "the formal element has no rank");
        (self.0 >> 1) as usize
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, e: u32) -> bool {
        self.0 >> e & 1 == 1
    }

    pub fn has_formal(self) -> bool {
        self.contains(FORMAL_ELEMENT)
    }

    pub fn insert(self, e: u32) -> Self {
        IndexSet(self.0 | 1 << e)
    }

    pub fn remove(self, e: u32) -> Self {
        IndexSet(self.0 & !(1 << e))
    }

    pub fn union(self, o: Self) -> Self {
        IndexSet(self.0 | o.0)
    }

    pub fn intersection(self, o: Self) -> Self {
        IndexSet(self.0 & o.0)
    }

    pub fn difference(self, o: Self) -> Self {
        IndexSet(self.0 & !o.0)
    }

    pub fn sym_diff(self, o: Self) -> Self {
        IndexSet(self.0 ^ o.0)
    }

    pub fn is_subset(self, o: Self) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn min_elem(self) -> Option<u32> {
        (self.0 != 0).then(|| self.0.trailing_zeros())
    }

    pub fn max_elem(self) -> Option<u32> {
        (self.0 != 0).then(|| 31 - self.0.leading_zeros())
    }

    /// Strictly ascending elements.
    pub fn iter(self) -> impl DoubleEndedIterator<Item = u32> + Clone {
        (0..=MAX_ORBITALS as u32).filter(move |&e| self.contains(e))
    }

    pub fn elems(self) -> Vec<u32> {
        self.iter().collect()
    }

    /// Number of elements strictly below `e`.
    pub fn count_below(self, e: u32) -> usize {
        (self.0 & ((1u32 << e) - 1)).count_ones() as usize
    }

    /// Elements `≤ d` (the hole side, including the formal element).
    pub fn low_part(self, d: usize) -> Self {
        IndexSet(self.0 & ((1u32 << (d + 1)) - 1))
    }

    /// Elements `> d`.
    pub fn high_part(self, d: usize) -> Self {
        IndexSet(self.0 & !((1u32 << (d + 1)) - 1))
    }

    /// Compact form used inside variable names: digits run together when all
    /// elements are single digits, otherwise comma separated; `0` for ∅.
    pub fn compact(self) -> String {
        if self.is_empty() {
            return "0".into();
        }
        let e = self.elems();
        if e.iter().all(|&x| x <= 9) {
            e.iter().map(|x| x.to_string()).collect()
        } else {
            join(&e)
        }
    }
}

fn join(e: &[u32]) -> String {
    e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", join(&self.elems()))
        }
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", join(&self.elems()))
    }
}

impl FromStr for IndexSet {
    type Err = FockError;

    /// Parses `"1,3,4"`; `"0"` and the empty string give ∅.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "0" {
            return Ok(IndexSet::EMPTY);
        }
        let mut set = IndexSet::EMPTY;
        let mut pos = 0;
        for tok in s.split(',') {
            let v: u32 = tok.trim().parse().map_err(|_| FockError::Parse {
                pos,
                msg: format!("expected an orbital index, found {tok:?}"),
            })?;
            if v == 0 || v as usize > MAX_ORBITALS {
                return Err(FockError::Parse { pos, msg: format!("orbital {v} out of range 1..=16") });
            }
            set = set.insert(v);
            pos += tok.len() + 1;
        }
        Ok(set)
    }
}

/// All subsets of `[n]` in reverse-lexicographic order.
pub fn revlex_order(n: usize) -> Result<Vec<IndexSet>> {
    if n > MAX_ORBITALS {
        return Err(FockError::Capacity(format!("n = {n} exceeds the limit of {MAX_ORBITALS} orbitals")));
    }
    Ok((0..1usize << n).map(IndexSet::from_rank).collect())
}

/// A partition into even blocks, blocks sorted by minimal element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EvenSetPartition {
    blocks: Vec<IndexSet>,
}

impl EvenSetPartition {
    /// Canonicalizes the block order. Panics on empty or odd blocks.
    pub fn new(mut blocks: Vec<IndexSet>) -> Self {
        assert!(blocks.iter().all(|b| !b.is_empty() && b.len() % 2 == 0), "blocks must be nonempty and even");
        blocks.sort_by_key(|b| b.min_elem());
        EvenSetPartition { blocks }
    }

    pub fn blocks(&self) -> &[IndexSet] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn support(&self) -> IndexSet {
        self.blocks.iter().fold(IndexSet::EMPTY, |a, &b| a.union(b))
    }

    /// Applies an element map to every block.
    pub fn relabel(&self, f: impl Fn(u32) -> u32) -> Self {
        EvenSetPartition::new(self.blocks.iter().map(|b| IndexSet::from_elems(b.iter().map(&f))).collect())
    }
}

/// Every partition of `s` into even blocks, without duplicates.
pub fn even_set_partitions(s: IndexSet) -> Result<Vec<EvenSetPartition>> {
    if s.len() % 2 == 1 {
        return Err(FockError::Parity(format!("cannot split the odd set {s:?} into even blocks")));
    }
    let mut out = Vec::new();
    let mut stack = Vec::new();
    rec_partitions(s, &mut stack, &mut out);
    Ok(out)
}

fn rec_partitions(rest: IndexSet, stack: &mut Vec<IndexSet>, out: &mut Vec<EvenSetPartition>) {
    let Some(first) = rest.min_elem() else {
        // recursion picks blocks by increasing minimum, so the order is canonical already
        out.push(EvenSetPartition { blocks: stack.clone() });
        return;
    };
    let others = rest.remove(first);
    let elems = others.elems();
    let m = elems.len();
    for mask in 0u32..1 << m {
        if mask.count_ones() % 2 == 0 {
            continue;
        }
        let mut block = IndexSet::EMPTY.insert(first);
        for (i, &e) in elems.iter().enumerate() {
            if mask >> i & 1 == 1 {
                block = block.insert(e);
            }
        }
        stack.push(block);
        rec_partitions(rest.difference(block), stack, out);
        stack.pop();
    }
}

/// Number of even partitions of a `2k`-set, computed by recurrence.
pub fn even_partition_count(k: usize) -> u128 {
    // choose the block of the first element: it has 2j elements
    let mut c = vec![1u128; k + 1];
    for m in 1..=k {
        let mut s = 0u128;
        for j in 1..=m {
            s += binom(2 * m - 1, 2 * j - 1) * c[m - j];
        }
        c[m] = s;
    }
    c[k]
}

pub fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r = 1u128;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

pub fn inversions(seq: &[u32]) -> usize {
    let mut c = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                c += 1;
            }
        }
    }
    c
}

/// Product of the signs of the two block concatenations, one over elements
/// `≤ d` and one over elements `> d`. The formal element counts as `≤ d`.
pub fn partition_sign(p: &EvenSetPartition, d: usize) -> i32 {
    sign_for_block_order(p.blocks(), d)
}

/// Sign of the same concatenation for an arbitrary block order.
pub fn sign_for_block_order(blocks: &[IndexSet], d: usize) -> i32 {
    let mut low = Vec::new();
    let mut high = Vec::new();
    for b in blocks {
        low.extend(b.low_part(d).iter());
        high.extend(b.high_part(d).iter());
    }
    if (inversions(&low) + inversions(&high)) % 2 == 0 {
        1
    } else {
        -1
    }
}
