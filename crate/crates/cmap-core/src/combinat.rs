//! Exact combinatorial primitives shared by every other module: binomial
//! coefficients with the `C(n,k) = 0` convention for out-of-range arguments,
//! k-subset enumeration in lexicographic order, and ranking/unranking.
//!
//! Ground sets are 1-based: the k-subsets of `[n]` draw their elements from
//! `{1, ..., n}`, matching the labelling used in all serialized forms.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CombinatError {
    #[error("subset size {k} exceeds ground set size {n}")]
    SizeExceedsGround { n: u32, k: u32 },
    #[error("elements must be strictly increasing and within [1, {n}]")]
    InvalidElements { n: u32 },
    #[error("rank {rank} outside [1, {max}] for C({n},{k})")]
    RankOutOfRange { rank: BigUint, max: BigUint, n: u32, k: u32 },
}

/// Binomial coefficient with the convention `C(n,k) = 0` whenever `n < 0`,
/// `k < 0`, or `n < k`. Exact for all inputs.
pub fn binom(n: i64, k: i64) -> BigUint {
    if n < 0 || k < 0 || n < k {
        return BigUint::zero();
    }
    let (n, k) = (n as u64, k as u64);
    let k = k.min(n - k);
    let mut result = BigUint::one();
    for i in 1..=k {
        result = result * BigUint::from(n - k + i) / BigUint::from(i);
    }
    result
}

/// Binomial coefficient with an arbitrary-precision upper argument, for the
/// nested coefficients `C(C(m, r), t)`. Returns 0 when `n < k`.
pub fn big_binom(n: &BigUint, k: u64) -> BigUint {
    if *n < BigUint::from(k) {
        return BigUint::zero();
    }
    let mut result = BigUint::one();
    for i in 1..=k {
        result = result * (n - BigUint::from(k - i)) / BigUint::from(i);
    }
    result
}

/// `binom` narrowed to `u64`; panics if the coefficient does not fit.
/// Intended for enumeration-sized quantities.
pub fn binom_u64(n: i64, k: i64) -> u64 {
    binom(n, k)
        .to_u64()
        .expect("binomial coefficient exceeds u64 in an enumeration context")
}

/// A k-subset of a 1-based ground set, stored as a strictly increasing
/// element list. The derived ordering is lexicographic on the element lists,
/// which is the canonical order used throughout.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KSubset {
    elements: Vec<u32>,
}

impl KSubset {
    /// Builds a subset of `[n]`, validating that the elements are strictly
    /// increasing and within range.
    pub fn new(elements: Vec<u32>, n: u32) -> Result<Self, CombinatError> {
        let ok = elements.windows(2).all(|w| w[0] < w[1])
            && elements.first().is_none_or(|&e| e >= 1)
            && elements.last().is_none_or(|&e| e <= n);
        if !ok {
            return Err(CombinatError::InvalidElements { n });
        }
        Ok(KSubset { elements })
    }

    /// Builds a subset from any unordered list of positive labels,
    /// sorting and rejecting duplicates.
    pub fn from_unsorted(mut elements: Vec<u32>, n: u32) -> Result<Self, CombinatError> {
        elements.sort_unstable();
        Self::new(elements, n)
    }

    pub fn empty() -> Self {
        KSubset { elements: Vec::new() }
    }

    pub(crate) fn from_sorted_unchecked(elements: Vec<u32>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        KSubset { elements }
    }

    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    pub fn cardinality(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, e: u32) -> bool {
        self.elements.binary_search(&e).is_ok()
    }

    pub fn is_disjoint(&self, other: &KSubset) -> bool {
        self.elements.iter().all(|&e| !other.contains(e))
    }

    pub fn intersect(&self, other: &KSubset) -> KSubset {
        let elements = self
            .elements
            .iter()
            .copied()
            .filter(|&e| other.contains(e))
            .collect();
        KSubset { elements }
    }

    pub fn union(&self, other: &KSubset) -> KSubset {
        let mut elements: Vec<u32> =
            self.elements.iter().chain(other.elements.iter()).copied().collect();
        elements.sort_unstable();
        elements.dedup();
        KSubset { elements }
    }

    pub fn difference(&self, other: &KSubset) -> KSubset {
        let elements = self
            .elements
            .iter()
            .copied()
            .filter(|&e| !other.contains(e))
            .collect();
        KSubset { elements }
    }

    /// Complement within `[n]`.
    pub fn complement(&self, n: u32) -> KSubset {
        let elements = (1..=n).filter(|&e| !self.contains(e)).collect();
        KSubset { elements }
    }

    pub(crate) fn to_mask(&self) -> u32 {
        mask::from_elements(&self.elements)
    }

    pub(crate) fn from_mask(m: u32) -> Self {
        KSubset { elements: mask::to_elements(m) }
    }
}

impl fmt::Display for KSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

/// All k-subsets of `[n]` in lexicographic order of their element lists.
pub fn k_subsets(n: u32, k: u32) -> Result<KSubsetIter, CombinatError> {
    if k > n {
        return Err(CombinatError::SizeExceedsGround { n, k });
    }
    Ok(KSubsetIter {
        n,
        next: Some((1..=k).collect()),
    })
}

/// All k-subsets of an arbitrary strictly increasing ground list, in
/// lexicographic order. The subsets keep the ground's labels.
pub fn k_subsets_of(ground: &KSubset, k: u32) -> Result<SubsetsOfIter, CombinatError> {
    let m = ground.cardinality() as u32;
    if k > m {
        return Err(CombinatError::SizeExceedsGround { n: m, k });
    }
    Ok(SubsetsOfIter {
        ground: ground.elements.clone(),
        inner: k_subsets(m, k)?,
    })
}

pub struct KSubsetIter {
    n: u32,
    next: Option<Vec<u32>>,
}

impl Iterator for KSubsetIter {
    type Item = KSubset;

    fn next(&mut self) -> Option<KSubset> {
        let current = self.next.take()?;
        self.next = lex_successor(&current, self.n);
        Some(KSubset::from_sorted_unchecked(current))
    }
}

pub struct SubsetsOfIter {
    ground: Vec<u32>,
    inner: KSubsetIter,
}

impl Iterator for SubsetsOfIter {
    type Item = KSubset;

    fn next(&mut self) -> Option<KSubset> {
        let positions = self.inner.next()?;
        let elements = positions
            .elements()
            .iter()
            .map(|&p| self.ground[(p - 1) as usize])
            .collect();
        Some(KSubset::from_sorted_unchecked(elements))
    }
}

fn lex_successor(current: &[u32], n: u32) -> Option<Vec<u32>> {
    let k = current.len();
    if k == 0 {
        return None;
    }
    let mut next = current.to_vec();
    // rightmost position that can still advance
    let mut i = k;
    while i > 0 {
        let limit = n - (k - i) as u32;
        if next[i - 1] < limit {
            next[i - 1] += 1;
            for j in i..k {
                next[j] = next[j - 1] + 1;
            }
            return Some(next);
        }
        i -= 1;
    }
    None
}

/// 1-based position of `s` in the lexicographic enumeration of
/// `C(n, |s|)` subsets.
pub fn lex_rank(s: &KSubset, n: u32) -> Result<BigUint, CombinatError> {
    if s.elements.last().is_some_and(|&e| e > n) {
        return Err(CombinatError::InvalidElements { n });
    }
    let k = s.cardinality() as i64;
    let mut rank = BigUint::one();
    let mut prev = 0u32;
    for (i, &c) in s.elements.iter().enumerate() {
        for j in (prev + 1)..c {
            rank += binom((n - j) as i64, k - i as i64 - 1);
        }
        prev = c;
    }
    Ok(rank)
}

/// Inverse of [`lex_rank`]: the k-subset of `[n]` at the given 1-based rank.
pub fn lex_unrank(rank: &BigUint, n: u32, k: u32) -> Result<KSubset, CombinatError> {
    let total = binom(n as i64, k as i64);
    if rank.is_zero() || *rank > total {
        return Err(CombinatError::RankOutOfRange {
            rank: rank.clone(),
            max: total,
            n,
            k,
        });
    }
    let mut remaining = rank - BigUint::one();
    let mut elements = Vec::with_capacity(k as usize);
    let mut candidate = 1u32;
    for i in 0..k {
        loop {
            let below = binom((n - candidate) as i64, (k - i - 1) as i64);
            if remaining < below {
                elements.push(candidate);
                candidate += 1;
                break;
            }
            remaining -= below;
            candidate += 1;
        }
    }
    Ok(KSubset::from_sorted_unchecked(elements))
}

/// Bitmask helpers for the enumeration-heavy inner loops. Element `e` of a
/// 1-based ground set maps to bit `e - 1`; the mask form is only used
/// internally, with `KSubset` at every public boundary.
pub(crate) mod mask {
    use super::Ordering;

    pub type Mask = u32;

    /// Ground sets larger than this cannot be enumerated with u32 masks.
    pub const MAX_MASK_GROUND: u32 = 30;

    pub fn from_elements(elements: &[u32]) -> Mask {
        elements.iter().fold(0, |m, &e| m | 1 << (e - 1))
    }

    pub fn to_elements(m: Mask) -> Vec<u32> {
        (0..32).filter(|b| m & (1 << b) != 0).map(|b| b + 1).collect()
    }

    pub fn full(n: u32) -> Mask {
        if n == 0 {
            0
        } else {
            (u32::MAX) >> (32 - n)
        }
    }

    /// Lexicographic order on the element lists of two equal-size sets:
    /// the set owning the smallest element of the symmetric difference
    /// comes first.
    pub fn lex_cmp(a: Mask, b: Mask) -> Ordering {
        let x = a ^ b;
        if x == 0 {
            return Ordering::Equal;
        }
        let low = x & x.wrapping_neg();
        if a & low != 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    /// Index combinations `0 <= c_0 < ... < c_{k-1} < m` in lexicographic
    /// order, reused as the canonical enumeration of subsets of any sorted
    /// candidate list.
    pub struct IndexCombIter {
        m: usize,
        next: Option<Vec<usize>>,
    }

    pub fn index_combinations(m: usize, k: usize) -> IndexCombIter {
        let next = if k <= m { Some((0..k).collect()) } else { None };
        IndexCombIter { m, next }
    }

    impl Iterator for IndexCombIter {
        type Item = Vec<usize>;

        fn next(&mut self) -> Option<Vec<usize>> {
            let current = self.next.take()?;
            let k = current.len();
            if k > 0 {
                let mut succ = current.clone();
                let mut i = k;
                while i > 0 {
                    if succ[i - 1] < self.m - (k - i) - 1 {
                        succ[i - 1] += 1;
                        for j in i..k {
                            succ[j] = succ[j - 1] + 1;
                        }
                        self.next = Some(succ);
                        break;
                    }
                    i -= 1;
                }
            }
            Some(current)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binom_small_values() {
        assert_eq!(binom(5, 3), BigUint::from(10u32));
        assert_eq!(binom(0, 0), BigUint::one());
        assert_eq!(binom(7, 0), BigUint::one());
        assert_eq!(binom(60, 30).to_string(), "118264581564861424");
    }

    #[test]
    fn binom_zero_conventions() {
        assert_eq!(binom(2, 3), BigUint::zero());
        assert_eq!(binom(-1, 2), BigUint::zero());
        assert_eq!(binom(4, -1), BigUint::zero());
    }

    #[test]
    fn big_binom_matches_binom() {
        for n in 0..20i64 {
            for k in 0..20u64 {
                assert_eq!(big_binom(&BigUint::from(n as u64), k), binom(n, k as i64));
            }
        }
    }

    #[test]
    fn pascal_identity_up_to_60() {
        for n in 1..=60i64 {
            for k in 1..n {
                assert_eq!(binom(n, k), binom(n - 1, k - 1) + binom(n - 1, k));
            }
        }
    }

    #[test]
    fn k_subsets_4_choose_3() {
        let subsets: Vec<_> = k_subsets(4, 3).unwrap().collect();
        let expected: Vec<Vec<u32>> =
            vec![vec![1, 2, 3], vec![1, 2, 4], vec![1, 3, 4], vec![2, 3, 4]];
        let got: Vec<Vec<u32>> = subsets.iter().map(|s| s.elements().to_vec()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn k_subsets_5_choose_3_endpoints() {
        let subsets: Vec<_> = k_subsets(5, 3).unwrap().collect();
        assert_eq!(subsets.len(), 10);
        assert_eq!(subsets[0].elements(), &[1, 2, 3]);
        assert_eq!(subsets[9].elements(), &[3, 4, 5]);
        let mut sorted = subsets.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, subsets);
    }

    #[test]
    fn k_subsets_empty_k() {
        let subsets: Vec<_> = k_subsets(3, 0).unwrap().collect();
        assert_eq!(subsets, vec![KSubset::empty()]);
        let subsets: Vec<_> = k_subsets(0, 0).unwrap().collect();
        assert_eq!(subsets.len(), 1);
    }

    #[test]
    fn k_subsets_rejects_oversize() {
        assert!(k_subsets(3, 4).is_err());
    }

    #[test]
    fn rank_endpoints() {
        let first = KSubset::new(vec![1, 2, 3], 5).unwrap();
        assert_eq!(lex_rank(&first, 5).unwrap(), BigUint::one());
        let last = lex_unrank(&BigUint::from(10u32), 5, 3).unwrap();
        assert_eq!(last.elements(), &[3, 4, 5]);
    }

    #[test]
    fn rank_unrank_round_trip() {
        for n in 0..=12u32 {
            for k in 0..=n {
                let total = binom_u64(n as i64, k as i64);
                for (i, s) in k_subsets(n, k).unwrap().enumerate() {
                    let rank = lex_rank(&s, n).unwrap();
                    assert_eq!(rank, BigUint::from(i as u64 + 1));
                    assert_eq!(lex_unrank(&rank, n, k).unwrap(), s);
                }
                assert!(lex_unrank(&BigUint::from(total + 1), n, k).is_err());
                assert!(lex_unrank(&BigUint::zero(), n, k).is_err());
            }
        }
    }

    #[test]
    fn subsets_of_ground_preserves_labels() {
        let ground = KSubset::new(vec![2, 4, 5, 7], 7).unwrap();
        let got: Vec<Vec<u32>> = k_subsets_of(&ground, 2)
            .unwrap()
            .map(|s| s.elements().to_vec())
            .collect();
        assert_eq!(
            got,
            vec![vec![2, 4], vec![2, 5], vec![2, 7], vec![4, 5], vec![4, 7], vec![5, 7]]
        );
    }

    #[test]
    fn mask_round_trip_and_lex() {
        let a = KSubset::new(vec![1, 4], 5).unwrap();
        let b = KSubset::new(vec![2, 3], 5).unwrap();
        assert_eq!(KSubset::from_mask(a.to_mask()), a);
        // {1,4} < {2,3} lexicographically even though its mask value is larger
        assert!(a.to_mask() > b.to_mask());
        assert_eq!(mask::lex_cmp(a.to_mask(), b.to_mask()), Ordering::Less);
        assert_eq!(mask::lex_cmp(b.to_mask(), a.to_mask()), Ordering::Greater);
        assert_eq!(mask::lex_cmp(a.to_mask(), a.to_mask()), Ordering::Equal);
    }

    #[test]
    fn index_combinations_lex() {
        let combos: Vec<_> = mask::index_combinations(4, 2).collect();
        assert_eq!(
            combos,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(mask::index_combinations(3, 0).count(), 1);
        assert_eq!(mask::index_combinations(2, 3).count(), 0);
    }

    proptest! {
        #[test]
        fn prop_rank_round_trip(n in 1u32..=12, seed in 0u64..10_000) {
            let k = (seed % (n as u64 + 1)) as u32;
            let total = binom_u64(n as i64, k as i64);
            let rank = BigUint::from(seed % total + 1);
            let s = lex_unrank(&rank, n, k).unwrap();
            prop_assert_eq!(lex_rank(&s, n).unwrap(), rank);
        }

        #[test]
        fn prop_mask_lex_matches_subset_order(n in 1u32..=10, a in 0u64..1024, b in 0u64..1024) {
            let full = mask::full(n) as u64;
            let (ma, mb) = ((a & full) as u32, (b & full) as u32);
            if ma.count_ones() == mb.count_ones() {
                let sa = KSubset::from_mask(ma);
                let sb = KSubset::from_mask(mb);
                prop_assert_eq!(mask::lex_cmp(ma, mb), sa.cmp(&sb));
            }
        }
    }
}
