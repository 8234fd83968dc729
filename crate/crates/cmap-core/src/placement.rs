//! Uncoded placement: subfile layout across the access caches, mini-subfile
//! layout across the private caches, and the per-user demand and known sets
//! that the delivery scheme operates on.
//!
//! A mini-subfile of file `n` is addressed by a subfile index set `S`
//! (`|S| = t_a`, the access caches storing it) together with `t_p` distinct
//! user index sets `T_1, ..., T_tp` (the users privately caching it), each an
//! r-subset of `[lambda] \ S`. The canonical text form of an index is
//! `S={4}|T={1,2,5},{1,3,5}` with 1-based labels and lexicographically
//! sorted `T` sets.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::combinat::{self, binom, big_binom, KSubset};
use crate::model::SystemParams;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlacementError {
    #[error("index sets must share one cardinality")]
    MixedCardinality,
    #[error("index sets must be pairwise distinct")]
    DuplicateIndexSets,
    #[error("index sets must be disjoint from the subfile index set")]
    OverlapsSubfileIndex,
    #[error("subset does not fit the system parameters: {reason}")]
    InvalidForParams { reason: String },
    #[error("no such cache label: {label}")]
    UnknownCache { label: u32 },
    #[error(transparent)]
    Combinat(#[from] combinat::CombinatError),
}

/// Index of one mini-subfile: the subfile index set `S` and the
/// lexicographically sorted list of index sets `T_i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MiniSubfileIndex {
    s: KSubset,
    t_list: Vec<KSubset>,
}

impl MiniSubfileIndex {
    /// Canonicalizes (sorts the `T` sets) and validates the structural
    /// invariants: pairwise distinct sets of one cardinality, disjoint
    /// from `S`.
    pub fn new(s: KSubset, mut t_sets: Vec<KSubset>) -> Result<Self, PlacementError> {
        if let Some(first) = t_sets.first() {
            if t_sets.iter().any(|t| t.cardinality() != first.cardinality()) {
                return Err(PlacementError::MixedCardinality);
            }
        }
        if t_sets.iter().any(|t| !t.is_disjoint(&s)) {
            return Err(PlacementError::OverlapsSubfileIndex);
        }
        t_sets.sort();
        if t_sets.windows(2).any(|w| w[0] == w[1]) {
            return Err(PlacementError::DuplicateIndexSets);
        }
        Ok(MiniSubfileIndex { s, t_list: t_sets })
    }

    pub fn s(&self) -> &KSubset {
        &self.s
    }

    pub fn t_list(&self) -> &[KSubset] {
        &self.t_list
    }

    /// Intersection set `I = (T_1 ∩ ... ∩ T_tp) ∩ user` of this index when
    /// demanded by `user`.
    pub fn intersection_with(&self, user: &KSubset) -> KSubset {
        self.t_list.iter().fold(user.clone(), |acc, t| acc.intersect(t))
    }

    /// Checks cardinalities and ranges against the system parameters.
    pub fn validate_for(&self, p: &SystemParams) -> Result<(), PlacementError> {
        let fail = |reason: &str| PlacementError::InvalidForParams { reason: reason.into() };
        if self.s.cardinality() != p.t_a() as usize {
            return Err(fail("subfile index cardinality != t_a"));
        }
        if self.s.elements().last().is_some_and(|&e| e > p.lambda()) {
            return Err(fail("subfile index outside ground set"));
        }
        if self.t_list.len() != p.t_p() as usize {
            return Err(fail("index set count != t_p"));
        }
        for t in &self.t_list {
            if t.cardinality() != p.r() as usize {
                return Err(fail("index set cardinality != r"));
            }
            if t.elements().last().is_some_and(|&e| e > p.lambda()) {
                return Err(fail("index set outside ground set"));
            }
        }
        Ok(())
    }
}

impl fmt::Display for MiniSubfileIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S={}|T=", self.s)?;
        for (i, t) in self.t_list.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// A file-level mini-subfile identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MiniSubfileId {
    pub file: u64,
    pub index: MiniSubfileIndex,
}

impl fmt::Display for MiniSubfileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W[{}]|{}", self.file, self.index)
    }
}

/// A demand-level mini-subfile: the index together with the user demanding
/// it. These are the XOR terms of the delivery phase; the concrete file is
/// resolved through the demand vector only at payload time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub user: KSubset,
    pub index: MiniSubfileIndex,
}

impl Term {
    pub fn new(user: KSubset, index: MiniSubfileIndex) -> Self {
        Term { user, index }
    }

    /// A term is demanded iff its user misses the subfile through the access
    /// caches and does not hold the mini-subfile privately.
    pub fn is_demanded(&self, p: &SystemParams) -> bool {
        self.user.cardinality() == p.r() as usize
            && self.user.elements().last().is_some_and(|&e| e <= p.lambda())
            && self.index.validate_for(p).is_ok()
            && self.index.s().is_disjoint(&self.user)
            && !self.index.t_list().contains(&self.user)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d[")?;
        for (i, e) in self.user.elements().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]|{}", self.index)
    }
}

/// The uncoded placement of one parameter point. Access-cache contents are
/// materialized; private-cache contents and the per-user demand/known sets
/// are computed on demand, so a layout stays small regardless of the user
/// count.
#[derive(Debug, Clone)]
pub struct CacheLayout {
    params: SystemParams,
    access: Vec<Vec<KSubset>>,
}

/// Populates both cache tiers for the given parameters.
pub fn build_layout(p: &SystemParams) -> CacheLayout {
    let mut access = vec![Vec::new(); p.lambda() as usize];
    for s in combinat::k_subsets(p.lambda(), p.t_a()).expect("t_a <= lambda") {
        for &a in s.elements() {
            access[(a - 1) as usize].push(s.clone());
        }
    }
    CacheLayout { params: p.clone(), access }
}

impl CacheLayout {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Subfile indices stored in access cache `a` (those `S` with `a ∈ S`),
    /// one copy per file.
    pub fn access_cache(&self, a: u32) -> Result<&[KSubset], PlacementError> {
        if a < 1 || a > self.params.lambda() {
            return Err(PlacementError::UnknownCache { label: a });
        }
        Ok(&self.access[(a - 1) as usize])
    }

    /// Mini-subfile indices stored in the private cache of `user`, one copy
    /// per file: all indices with `S ∩ user = ∅` and `user` among the
    /// `T` sets, in lexicographic order.
    pub fn private_cache(&self, user: &KSubset) -> Result<Vec<MiniSubfileIndex>, PlacementError> {
        let p = &self.params;
        validate_user(p, user)?;
        let t_p = p.t_p() as usize;
        let mut out = Vec::new();
        for s in combinat::k_subsets_of(&user.complement(p.lambda()), p.t_a())? {
            let others = t_candidates_without(p, &s, user)?;
            for rest in combinat::mask::index_combinations(others.len(), t_p - 1) {
                let mut t_sets: Vec<KSubset> = rest.iter().map(|&i| others[i].clone()).collect();
                t_sets.push(user.clone());
                let index = MiniSubfileIndex::new(s.clone(), t_sets)
                    .expect("candidate sets are valid");
                out.push(index);
            }
        }
        out.sort();
        Ok(out)
    }

    /// Whether `user` can retrieve the mini-subfile at `index` (for any
    /// file) from the caches it reaches: through an access cache when
    /// `S ∩ user ≠ ∅`, or from its private cache when it appears among the
    /// `T` sets.
    pub fn knows_index(&self, user: &KSubset, index: &MiniSubfileIndex) -> bool {
        !index.s().is_disjoint(user) || index.t_list().contains(user)
    }

    /// All mini-subfile indices known to `user`, per file. Complements the
    /// demand set within the index universe.
    pub fn known_set(&self, user: &KSubset) -> Result<BTreeSet<MiniSubfileIndex>, PlacementError> {
        validate_user(&self.params, user)?;
        Ok(index_universe(&self.params)
            .into_iter()
            .filter(|idx| self.knows_index(user, idx))
            .collect())
    }
}

fn validate_user(p: &SystemParams, user: &KSubset) -> Result<(), PlacementError> {
    if user.cardinality() != p.r() as usize
        || user.elements().last().is_some_and(|&e| e > p.lambda())
    {
        return Err(PlacementError::InvalidForParams {
            reason: format!("user must be an r-subset of [{}]", p.lambda()),
        });
    }
    Ok(())
}

fn t_candidates_without(
    p: &SystemParams,
    s: &KSubset,
    user: &KSubset,
) -> Result<Vec<KSubset>, PlacementError> {
    Ok(combinat::k_subsets_of(&s.complement(p.lambda()), p.r())?
        .filter(|c| c != user)
        .collect())
}

/// The user-demand set: all mini-subfile indices user `U` wants, i.e. those
/// with `S ∩ U = ∅` and `U` not among the `T` sets, in lexicographic order.
pub fn demand_set(p: &SystemParams, user: &KSubset) -> Result<Vec<MiniSubfileIndex>, PlacementError> {
    validate_user(p, user)?;
    let t_p = p.t_p() as usize;
    let mut out = Vec::new();
    for s in combinat::k_subsets_of(&user.complement(p.lambda()), p.t_a())? {
        let others = t_candidates_without(p, &s, user)?;
        for combo in combinat::mask::index_combinations(others.len(), t_p) {
            let t_sets: Vec<KSubset> = combo.iter().map(|&i| others[i].clone()).collect();
            out.push(MiniSubfileIndex::new(s.clone(), t_sets).expect("candidates are valid"));
        }
    }
    Ok(out)
}

/// Union of the demand set and the known set, by complementation: every
/// index of the universe, in lexicographic order.
pub fn index_universe(p: &SystemParams) -> Vec<MiniSubfileIndex> {
    let t_p = p.t_p() as usize;
    let mut out = Vec::new();
    for s in combinat::k_subsets(p.lambda(), p.t_a()).expect("t_a <= lambda") {
        let candidates: Vec<KSubset> = combinat::k_subsets_of(&s.complement(p.lambda()), p.r())
            .expect("r <= lambda - t_a")
            .collect();
        for combo in combinat::mask::index_combinations(candidates.len(), t_p) {
            let t_sets: Vec<KSubset> = combo.iter().map(|&i| candidates[i].clone()).collect();
            out.push(MiniSubfileIndex::new(s.clone(), t_sets).expect("candidates are valid"));
        }
    }
    out
}

/// Files' worth of data stored per access cache:
/// `N * C(lambda-1, t_a-1) / C(lambda, t_a)`; equals `Ma` exactly.
pub fn access_files_per_cache(p: &SystemParams) -> BigRational {
    let per_cache = binom(p.lambda() as i64 - 1, p.t_a() as i64 - 1);
    let subfiles = binom(p.lambda() as i64, p.t_a() as i64);
    BigRational::new(
        BigInt::from(p.n_files()) * BigInt::from(per_cache),
        BigInt::from(subfiles),
    )
}

/// Files' worth of data stored per private cache; equals `Mp` exactly.
pub fn private_files_per_user(p: &SystemParams) -> BigRational {
    let candidates = p.t_set_candidates();
    let per_subfile = big_binom(&(candidates - num_bigint::BigUint::from(1u32)), p.t_p() - 1);
    let numer = BigInt::from(p.n_files())
        * BigInt::from(binom((p.lambda() - p.r()) as i64, p.t_a() as i64))
        * BigInt::from(per_subfile);
    BigRational::new(numer, BigInt::from(p.subpacketization().clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_params, params_from_replication};
    use num_traits::ToPrimitive;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn example1() -> SystemParams {
        derive_params(5, 3, rat(2, 1), rat(2, 1), 10).unwrap()
    }

    fn ks(elements: &[u32], n: u32) -> KSubset {
        KSubset::new(elements.to_vec(), n).unwrap()
    }

    #[test]
    fn canonical_index_form() {
        let idx = MiniSubfileIndex::new(
            ks(&[4], 5),
            vec![ks(&[1, 3, 5], 5), ks(&[1, 2, 5], 5)],
        )
        .unwrap();
        assert_eq!(idx.to_string(), "S={4}|T={1,2,5},{1,3,5}");
    }

    #[test]
    fn index_rejects_overlap_and_duplicates() {
        let err = MiniSubfileIndex::new(ks(&[1], 5), vec![ks(&[1, 2, 3], 5)]).unwrap_err();
        assert!(matches!(err, PlacementError::OverlapsSubfileIndex));
        let err =
            MiniSubfileIndex::new(ks(&[4], 5), vec![ks(&[1, 2, 5], 5), ks(&[1, 2, 5], 5)])
                .unwrap_err();
        assert!(matches!(err, PlacementError::DuplicateIndexSets));
    }

    #[test]
    fn example1_access_cache_contents() {
        let p = example1();
        let layout = build_layout(&p);
        // Z_1 = {W_{n,1}}: cache 1 stores exactly the subfile indexed {1}
        assert_eq!(layout.access_cache(1).unwrap(), &[ks(&[1], 5)]);
        for a in 1..=5 {
            assert_eq!(layout.access_cache(a).unwrap().len(), 1);
        }
        assert!(layout.access_cache(6).is_err());
    }

    #[test]
    fn example1_private_cache_contents() {
        let p = example1();
        let layout = build_layout(&p);
        let user = ks(&[1, 2, 3], 5);
        let got = layout.private_cache(&user).unwrap();
        let expect = vec![
            MiniSubfileIndex::new(ks(&[4], 5), vec![ks(&[1, 2, 3], 5), ks(&[1, 2, 5], 5)]).unwrap(),
            MiniSubfileIndex::new(ks(&[4], 5), vec![ks(&[1, 2, 3], 5), ks(&[1, 3, 5], 5)]).unwrap(),
            MiniSubfileIndex::new(ks(&[4], 5), vec![ks(&[1, 2, 3], 5), ks(&[2, 3, 5], 5)]).unwrap(),
            MiniSubfileIndex::new(ks(&[5], 5), vec![ks(&[1, 2, 3], 5), ks(&[1, 2, 4], 5)]).unwrap(),
            MiniSubfileIndex::new(ks(&[5], 5), vec![ks(&[1, 2, 3], 5), ks(&[1, 3, 4], 5)]).unwrap(),
            MiniSubfileIndex::new(ks(&[5], 5), vec![ks(&[1, 2, 3], 5), ks(&[2, 3, 4], 5)]).unwrap(),
        ];
        assert_eq!(got, expect);
    }

    #[test]
    fn memory_accounting_identities() {
        for p in [
            example1(),
            derive_params(10, 8, rat(9, 2), rat(1, 1), 45).unwrap(),
            params_from_replication(6, 4, 1, 2, 15).unwrap(),
            params_from_replication(7, 5, 2, 1, 21).unwrap(),
        ] {
            assert_eq!(&access_files_per_cache(&p), p.m_a());
            assert_eq!(&private_files_per_user(&p), p.m_p());
        }
    }

    #[test]
    fn demand_known_partition_universe() {
        let p = example1();
        let layout = build_layout(&p);
        let universe = index_universe(&p);
        assert_eq!(universe.len() as u64, p.subpacketization_u64().unwrap());
        for user in p.users() {
            let demand = demand_set(&p, &user).unwrap();
            assert_eq!(demand.len(), 6);
            let known = layout.known_set(&user).unwrap();
            assert_eq!(known.len() + demand.len(), universe.len());
            assert!(demand.iter().all(|idx| !known.contains(idx)));
            for idx in &demand {
                assert!(Term::new(user.clone(), idx.clone()).is_demanded(&p));
            }
        }
    }

    #[test]
    fn demand_set_fig2_size() {
        // lambda=10, r=8, t_a=1, t_p=1: C(2,1) * (C(9,8) - C(8,0)) = 2 * 8 = 16
        let p = derive_params(10, 8, rat(9, 2), rat(1, 1), 45).unwrap();
        let user = ks(&[1, 2, 3, 4, 5, 6, 7, 8], 10);
        let demand = demand_set(&p, &user).unwrap();
        let candidates = p.t_set_candidates().to_u64().unwrap();
        let expected = binom(2, 1).to_u64().unwrap()
            * (big_binom(&p.t_set_candidates(), 1).to_u64().unwrap()
                - big_binom(&(p.t_set_candidates() - num_bigint::BigUint::from(1u32)), 0)
                    .to_u64()
                    .unwrap());
        assert_eq!(candidates, 9);
        assert_eq!(demand.len() as u64, expected);
        assert_eq!(demand.len(), 16);
    }

    #[test]
    fn private_placement_single_copy_when_tp_1() {
        // t_p = 1: each (S, T) index lives in exactly one private cache.
        let p = params_from_replication(6, 4, 1, 1, 15).unwrap();
        let layout = build_layout(&p);
        let mut seen = std::collections::BTreeMap::new();
        for user in p.users() {
            for idx in layout.private_cache(&user).unwrap() {
                *seen.entry(idx).or_insert(0u32) += 1;
            }
        }
        let universe = index_universe(&p);
        assert_eq!(seen.len(), universe.len());
        assert!(seen.values().all(|&c| c == 1));
    }

    #[test]
    fn demand_set_t_a_zero() {
        // t_a = 0: S is always empty.
        let p = params_from_replication(5, 4, 0, 2, 5).unwrap();
        let user = ks(&[1, 2, 3, 4], 5);
        let demand = demand_set(&p, &user).unwrap();
        let c = p.t_set_candidates().to_u64().unwrap() as i64;
        let expected = binom(c, 2) - binom(c - 1, 1);
        assert_eq!(demand.len() as u64, expected.to_u64().unwrap());
        assert!(demand.iter().all(|idx| idx.s().is_empty()));
    }
}
