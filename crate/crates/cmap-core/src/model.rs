//! Validated system parameters for the combinatorial multi-access network
//! with private caches, plus the class-membership predicates that decide
//! whether the flip/swap delivery scheme applies: the intersection-class
//! threshold test, the uniform-intersection level, the explicit
//! empty-intersection witness construction at boundary points, and a
//! brute-force intersection profile used as the oracle for all of them.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::combinat::{self, binom, big_binom, mask, KSubset};
use crate::placement::{MiniSubfileIndex, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("access degree must satisfy 1 <= r < lambda (got r={r}, lambda={lambda})")]
    AccessDegree { lambda: u32, r: u32 },
    #[error("library too small: K = C(lambda, r) = {k_users} users exceed N = {n_files} files")]
    TooManyUsers { k_users: BigUint, n_files: u64 },
    #[error("memory out of range: r*Ma + Mp = {total} must lie strictly inside (0, {n_files})")]
    MemoryOutOfRange { total: BigRational, n_files: u64 },
    #[error("access replication factor t_a = lambda*Ma/N = {value} is not an integer")]
    NonIntegerAccessReplication { value: BigRational },
    #[error("access replication factor t_a = {t_a} outside [0, lambda - r] = [0, {max}]")]
    AccessReplicationOutOfRange { t_a: BigInt, max: u32 },
    #[error("private replication factor t_p = K*Mp/N = {value} is not an integer")]
    NonIntegerPrivateReplication { value: BigRational },
    #[error("private replication factor t_p = {t_p} outside [1, {max}]")]
    PrivateReplicationOutOfRange { t_p: BigInt, max: BigUint },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("profile enumeration guarded at lambda <= {max} (got {lambda})")]
    ProfileGuard { lambda: u32, max: u32 },
    #[error("profile enumeration of {estimate} mini-subfiles exceeds the work limit {max}")]
    ProfileTooLarge { estimate: BigUint, max: u64 },
    #[error("witness construction requires lambda = t_a + r + r/t_p (threshold {threshold})")]
    WitnessNotAtBoundary { threshold: BigRational },
    #[error("witness construction requires t_p | r (got r={r}, t_p={t_p})")]
    WitnessDivisibility { r: u32, t_p: u64 },
}

/// Fully validated parameters of a `(lambda, r, Ma, Mp, N)` system with the
/// derived replication factors, user count, and subpacketization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemParams {
    lambda: u32,
    r: u32,
    m_a: BigRational,
    m_p: BigRational,
    n_files: u64,
    t_a: u32,
    t_p: u64,
    k_users: u64,
    subpacketization: BigUint,
}

impl SystemParams {
    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn m_a(&self) -> &BigRational {
        &self.m_a
    }

    pub fn m_p(&self) -> &BigRational {
        &self.m_p
    }

    pub fn n_files(&self) -> u64 {
        self.n_files
    }

    /// Access replication factor `t_a = lambda * Ma / N`.
    pub fn t_a(&self) -> u32 {
        self.t_a
    }

    /// Private replication factor `t_p = K * Mp / N`.
    pub fn t_p(&self) -> u64 {
        self.t_p
    }

    pub fn k_users(&self) -> u64 {
        self.k_users
    }

    /// Subpacketization `F = C(lambda, t_a) * C(C(lambda - t_a, r), t_p)`.
    pub fn subpacketization(&self) -> &BigUint {
        &self.subpacketization
    }

    pub fn subpacketization_u64(&self) -> Option<u64> {
        self.subpacketization.to_u64()
    }

    /// Number of subfile-index candidates `C(lambda - t_a, r)` that the
    /// mini-subfile index sets are drawn from.
    pub fn t_set_candidates(&self) -> BigUint {
        binom((self.lambda - self.t_a) as i64, self.r as i64)
    }

    /// All user index sets (the r-subsets of `[lambda]`) in lexicographic
    /// order.
    pub fn users(&self) -> Vec<KSubset> {
        combinat::k_subsets(self.lambda, self.r)
            .expect("r < lambda by construction")
            .collect()
    }
}

/// Validates the raw parameter tuple and derives every dependent quantity.
pub fn derive_params(
    lambda: u32,
    r: u32,
    m_a: BigRational,
    m_p: BigRational,
    n_files: u64,
) -> Result<SystemParams, ParamError> {
    if r < 1 || r >= lambda {
        return Err(ParamError::AccessDegree { lambda, r });
    }
    let k_big = binom(lambda as i64, r as i64);
    if k_big > BigUint::from(n_files) {
        return Err(ParamError::TooManyUsers { k_users: k_big, n_files });
    }
    let k_users = k_big.to_u64().expect("K <= N fits in u64");

    let n_rat = BigRational::from_integer(BigInt::from(n_files));
    let t_a_rat = BigRational::from_integer(BigInt::from(lambda)) * &m_a / &n_rat;
    if !t_a_rat.is_integer() {
        return Err(ParamError::NonIntegerAccessReplication { value: t_a_rat });
    }
    let t_a_int = t_a_rat.to_integer();
    if t_a_int.is_negative() || t_a_int > BigInt::from(lambda - r) {
        return Err(ParamError::AccessReplicationOutOfRange {
            t_a: t_a_int,
            max: lambda - r,
        });
    }
    let t_a = t_a_int.to_u32().expect("t_a <= lambda");

    let t_p_rat = BigRational::from_integer(BigInt::from(k_users)) * &m_p / &n_rat;
    if !t_p_rat.is_integer() {
        return Err(ParamError::NonIntegerPrivateReplication { value: t_p_rat });
    }
    let t_p_int = t_p_rat.to_integer();
    let candidates = binom((lambda - t_a) as i64, r as i64);
    let t_p_max = &candidates - BigUint::one();
    let in_range = t_p_int >= BigInt::one()
        && BigUint::try_from(t_p_int.clone()).map(|v| v <= t_p_max).unwrap_or(false);
    if !in_range {
        return Err(ParamError::PrivateReplicationOutOfRange {
            t_p: t_p_int,
            max: t_p_max,
        });
    }
    let t_p = t_p_int.to_u64().expect("t_p bounded by enumeration sizes");

    let total = BigRational::from_integer(BigInt::from(r)) * &m_a + &m_p;
    if total <= BigRational::zero() || total >= n_rat {
        return Err(ParamError::MemoryOutOfRange { total, n_files });
    }

    let subpacketization = binom(lambda as i64, t_a as i64) * big_binom(&candidates, t_p);

    Ok(SystemParams {
        lambda,
        r,
        m_a,
        m_p,
        n_files,
        t_a,
        t_p,
        k_users,
        subpacketization,
    })
}

/// Builds the memory pair realizing the given replication factors with
/// library size `n_files`: `Ma = t_a*N/lambda`, `Mp = t_p*N/K`.
pub fn params_from_replication(
    lambda: u32,
    r: u32,
    t_a: u32,
    t_p: u64,
    n_files: u64,
) -> Result<SystemParams, ParamError> {
    if r < 1 || r >= lambda {
        return Err(ParamError::AccessDegree { lambda, r });
    }
    let k_big = binom(lambda as i64, r as i64);
    if k_big > BigUint::from(n_files) {
        return Err(ParamError::TooManyUsers { k_users: k_big, n_files });
    }
    let k = k_big.to_u64().expect("K <= N");
    let n = BigInt::from(n_files);
    let m_a = BigRational::new(BigInt::from(t_a) * &n, BigInt::from(lambda));
    let m_p = BigRational::new(BigInt::from(t_p) * &n, BigInt::from(k));
    derive_params(lambda, r, m_a, m_p, n_files)
}

/// Intersection-class threshold `t_a + r + r/t_p`; the system is in the
/// class iff `lambda` is strictly below it.
pub fn class_threshold(p: &SystemParams) -> BigRational {
    BigRational::from_integer(BigInt::from(p.t_a + p.r))
        + BigRational::new(BigInt::from(p.r), BigInt::from(p.t_p))
}

/// The threshold test alone, with no witness search.
pub fn in_intersection_class(p: &SystemParams) -> bool {
    BigRational::from_integer(BigInt::from(p.lambda)) < class_threshold(p)
}

/// Outcome of the class-membership checks for one parameter point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassReport {
    pub in_intersection_class: bool,
    pub threshold: BigRational,
    pub uniform_level: Option<u32>,
    /// Demanded mini-subfile with empty intersection set; present iff the
    /// system is outside the class.
    pub witness: Option<Term>,
}

/// Decides class membership by the exact threshold comparison and, for
/// out-of-class systems, produces a verified empty-intersection witness:
/// via the partition construction when the parameters sit exactly at an
/// integer boundary with `t_p | r`, and by lexicographic brute-force search
/// otherwise.
pub fn intersection_class_check(p: &SystemParams) -> ClassReport {
    let threshold = class_threshold(p);
    let in_class = BigRational::from_integer(BigInt::from(p.lambda)) < threshold;
    let witness = if in_class {
        None
    } else {
        let at_boundary =
            BigRational::from_integer(BigInt::from(p.lambda)) == threshold;
        let divides = p.r as u64 % p.t_p == 0;
        let w = if at_boundary && divides {
            construct_empty_witness(p).expect("boundary preconditions checked")
        } else {
            brute_force_empty_witness(p).expect("witness exists outside the class")
        };
        Some(w)
    };
    ClassReport {
        in_intersection_class: in_class,
        threshold,
        uniform_level: uniform_intersection_level(p),
        witness,
    }
}

/// Partition construction of an empty-intersection mini-subfile at the
/// boundary `lambda = t_a + r + r/t_p` with `t_p | r`: split
/// `[lambda] \ S` into `t_p + 1` blocks of size `r/t_p` and take the
/// complements of the blocks as the user and index sets.
pub fn construct_empty_witness(p: &SystemParams) -> Result<Term, ModelError> {
    let threshold = class_threshold(p);
    if p.r as u64 % p.t_p != 0 {
        return Err(ModelError::WitnessDivisibility { r: p.r, t_p: p.t_p });
    }
    if BigRational::from_integer(BigInt::from(p.lambda)) != threshold {
        return Err(ModelError::WitnessNotAtBoundary { threshold });
    }
    let s = KSubset::from_sorted_unchecked((1..=p.t_a).collect());
    let rest: Vec<u32> = (p.t_a + 1..=p.lambda).collect();
    let block = (p.r as u64 / p.t_p) as usize;
    let q_sets: Vec<KSubset> = rest
        .chunks(block)
        .map(|chunk| {
            let q: Vec<u32> = rest.iter().copied().filter(|e| !chunk.contains(e)).collect();
            KSubset::from_sorted_unchecked(q)
        })
        .collect();
    debug_assert_eq!(q_sets.len() as u64, p.t_p + 1);
    let user = q_sets[0].clone();
    let t_sets = q_sets[1..].to_vec();
    let common = t_sets
        .iter()
        .fold(user.clone(), |acc, t| acc.intersect(t));
    debug_assert!(common.is_empty());
    let index = MiniSubfileIndex::new(s, t_sets).expect("partition blocks are valid");
    Ok(Term::new(user, index))
}

fn brute_force_empty_witness(p: &SystemParams) -> Option<Term> {
    let lambda = p.lambda;
    let full = KSubset::from_sorted_unchecked((1..=lambda).collect());
    for s in combinat::k_subsets(lambda, p.t_a).expect("t_a <= lambda") {
        let ground = s.complement(lambda);
        let candidates: Vec<KSubset> =
            combinat::k_subsets_of(&ground, p.r).expect("r <= lambda - t_a").collect();
        for user in &candidates {
            let others: Vec<&KSubset> = candidates.iter().filter(|c| *c != user).collect();
            if let Some(t_sets) = first_empty_collection(user, &others, p.t_p as usize) {
                let index = MiniSubfileIndex::new(s.clone(), t_sets)
                    .expect("candidates are valid index sets");
                return Some(Term::new(user.clone(), index));
            }
        }
    }
    let _ = full;
    None
}

/// Depth-first scan of t_p-subsets of `others` in lexicographic order,
/// returning the first whose intersection with `user` is empty. Once the
/// running intersection dies, the lexicographically smallest completion is
/// taken immediately.
fn first_empty_collection(
    user: &KSubset,
    others: &[&KSubset],
    t_p: usize,
) -> Option<Vec<KSubset>> {
    fn rec(
        user: &KSubset,
        others: &[&KSubset],
        t_p: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        running: &KSubset,
    ) -> bool {
        if running.is_empty() {
            // any completion works; take the next indices in order
            let need = t_p - chosen.len();
            if others.len() - start >= need {
                chosen.extend(start..start + need);
                return true;
            }
            return false;
        }
        if chosen.len() == t_p {
            return false;
        }
        let need = t_p - chosen.len();
        for i in start..=others.len().saturating_sub(need) {
            chosen.push(i);
            let next = running.intersect(others[i]);
            if rec(user, others, t_p, i + 1, chosen, &next) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    let mut chosen = Vec::new();
    if rec(user, others, t_p, 0, &mut chosen, user) {
        Some(chosen.into_iter().map(|i| others[i].clone()).collect())
    } else {
        None
    }
}

/// Uniform-intersection level: the unique `i` in `[1, r-1]` for which both
/// the counting identity and the window condition hold, if any.
pub fn uniform_intersection_level(p: &SystemParams) -> Option<u32> {
    let m = (p.lambda - p.t_a) as i64;
    let r = p.r as i64;
    let tp_plus_1 = BigUint::from(p.t_p + 1);
    for i in 1..p.r {
        let i = i as i64;
        let upper = binom(m - i, r - i);
        let lower = binom(m - i - 1, r - i - 1);
        let window = lower < tp_plus_1 && tp_plus_1 <= upper;
        if !window {
            continue;
        }
        let lhs = binom(r, i) * big_binom(&(upper - BigUint::one()), p.t_p);
        let rhs = big_binom(&(binom(m, r) - BigUint::one()), p.t_p);
        return (lhs == rhs).then_some(i as u32);
    }
    None
}

pub const PROFILE_LAMBDA_GUARD: u32 = 12;
pub const PROFILE_WORK_GUARD: u64 = 50_000_000;

/// Total number of demanded mini-subfiles across all users:
/// `C(lambda, r) * C(lambda - r, t_a) * C(C(lambda - t_a, r) - 1, t_p)`.
pub fn total_demanded(p: &SystemParams) -> BigUint {
    let candidates = p.t_set_candidates();
    binom(p.lambda as i64, p.r as i64)
        * binom((p.lambda - p.r) as i64, p.t_a as i64)
        * big_binom(&(candidates - BigUint::one()), p.t_p)
}

/// Enumerates every demanded mini-subfile and tallies the cardinality of
/// its intersection set. This is the oracle behind the class predicates and
/// the closed-form counts.
pub fn brute_force_intersection_profile(
    p: &SystemParams,
) -> Result<BTreeMap<u32, u64>, ModelError> {
    brute_force_intersection_profile_guarded(p, PROFILE_LAMBDA_GUARD, PROFILE_WORK_GUARD)
}

pub fn brute_force_intersection_profile_guarded(
    p: &SystemParams,
    max_lambda: u32,
    max_work: u64,
) -> Result<BTreeMap<u32, u64>, ModelError> {
    if p.lambda > max_lambda || p.lambda > mask::MAX_MASK_GROUND {
        return Err(ModelError::ProfileGuard {
            lambda: p.lambda,
            max: max_lambda.min(mask::MAX_MASK_GROUND),
        });
    }
    let estimate = total_demanded(p);
    if estimate > BigUint::from(max_work) {
        return Err(ModelError::ProfileTooLarge { estimate, max: max_work });
    }

    let full = mask::full(p.lambda);
    let t_p = p.t_p as usize;
    let mut profile: BTreeMap<u32, u64> = BTreeMap::new();
    for user in combinat::k_subsets(p.lambda, p.r).expect("valid r") {
        let user_m = user.to_mask();
        let s_ground = KSubset::from_mask(full & !user_m);
        for s in combinat::k_subsets_of(&s_ground, p.t_a).expect("t_a fits") {
            let s_m = s.to_mask();
            let cand_ground = KSubset::from_mask(full & !s_m);
            let candidates: Vec<mask::Mask> = combinat::k_subsets_of(&cand_ground, p.r)
                .expect("r fits")
                .map(|c| c.to_mask())
                .filter(|&c| c != user_m)
                .collect();
            for combo in mask::index_combinations(candidates.len(), t_p) {
                let mut inter = user_m;
                for &ci in &combo {
                    inter &= candidates[ci];
                }
                *profile.entry(inter.count_ones()).or_insert(0) += 1;
            }
        }
    }
    Ok(profile)
}
