//! Dyadic weight preprocessing, legal profiles, fragments, minimum fragments,
//! the cover U(W), and the bad-W cost ledger.
//!
//! Weights are snapped to the grid `base^-j` (base 100 by default), bucket
//! sizes are regularized to powers of the base inside their legal range, and
//! the minimum fragment of a pair (S, W) is searched by ascending index `b`
//! and then ascending cardinality with a lexicographic tie-break. All
//! threshold comparisons run in exact rationals because the defining
//! inequalities are routinely tight.

use crate::bitset::{subsets_by_cardinality, GroundSet, Subset};
use crate::error::Error;
use crate::exec::{map_slice, ExecPolicy};
use crate::family::{Cover, WeightedFamily};
use crate::rational::{big_binomial, rat_pow, rat_to_f64, rat_to_string, rat_u, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Grid and threshold constants. Defaults are the values the proof fixes;
/// they are exposed so desk-scale experiments can explore slack, but the
/// verified inequality chains are only guaranteed at the defaults.
#[derive(Clone, Debug)]
pub struct FragmentConfig {
    /// Dyadic grid base (default 100): weights live on `base^-j`.
    pub base: u64,
    /// Scale exponent in the bucket floor `base^j / (base^floor_pow (j+1)^2)`
    /// (default 4).
    pub floor_pow: u32,
    /// Capture fraction on the right side of the fragment inequality
    /// (default 1/100).
    pub capture: Rat,
    /// Fragment-size fraction in the ledger ranges (default 9/10).
    pub t_frac: Rat,
    /// Weight-inside-W threshold separating good from bad W (default 1e-10).
    pub good_threshold: Rat,
    /// Max |S \ W| for the exhaustive fragment search.
    pub search_limit: u32,
}

impl Default for FragmentConfig {
    fn default() -> Self {
        FragmentConfig {
            base: 100,
            floor_pow: 4,
            capture: Rat::new(1.into(), 100.into()),
            t_frac: Rat::new(9.into(), 10.into()),
            good_threshold: Rat::new(1.into(), BigInt::from(10u64.pow(10))),
            search_limit: 24,
        }
    }
}

impl FragmentConfig {
    pub fn grid_weight(&self, j: u32) -> Rat {
        Rat::new(1.into(), BigInt::from(self.base).pow(j))
    }

    /// `tau = floor(log_base n) + 2`.
    pub fn tau_for(&self, n: u32) -> u32 {
        let mut t = 0u32;
        let mut pow = self.base;
        while pow <= n as u64 {
            t += 1;
            pow = pow.saturating_mul(self.base);
        }
        t + 2
    }

    /// The lower cutoff `base^j / (base^floor_pow (j+1)^2)` of the legal
    /// range, before the `max{1, .}`.
    pub fn bucket_floor(&self, j: u32) -> Rat {
        let num = BigInt::from(self.base).pow(j);
        let den =
            BigInt::from(self.base).pow(self.floor_pow) * BigInt::from((j + 1) as u64).pow(2);
        Rat::new(num, den)
    }

    /// Powers of the base inside `[max{1, floor_j}, 2 base^j)`, ascending.
    /// Every power is at least 1 and `base^m <= base^j < 2 base^j` for
    /// `m <= j`, so the only live constraint is the floor.
    pub fn legal_bucket_sizes(&self, j: u32) -> Vec<u64> {
        let floor = self.bucket_floor(j);
        let mut out = Vec::new();
        let mut pow = BigInt::one();
        for _ in 0..=j {
            if Rat::from_integer(pow.clone()) >= floor {
                out.push(pow.to_u64().expect("bucket size fits u64"));
            }
            pow *= BigInt::from(self.base);
        }
        out
    }
}

/// A member after preprocessing: every element of `set` carries an exponent
/// `j`, meaning weight `base^-j`.
#[derive(Clone, Debug)]
pub struct DyadicMember {
    pub set: Subset,
    exps: BTreeMap<u32, u32>,
}

impl DyadicMember {
    pub fn new(exps: BTreeMap<u32, u32>) -> Self {
        let set = Subset::from_ids(exps.keys().copied());
        DyadicMember { set, exps }
    }

    pub fn exponent(&self, i: u32) -> Option<u32> {
        self.exps.get(&i).copied()
    }

    pub fn exponents(&self) -> &BTreeMap<u32, u32> {
        &self.exps
    }

    /// The bucket `S_j`.
    pub fn bucket(&self, j: u32) -> Subset {
        Subset::from_ids(self.exps.iter().filter(|(_, &e)| e == j).map(|(&i, _)| i))
    }

    /// Union of buckets with `j <= b`; empty for `b < 0`.
    pub fn low_buckets(&self, b: i32) -> Subset {
        if b < 0 {
            return Subset::empty();
        }
        Subset::from_ids(
            self.exps
                .iter()
                .filter(|(_, &e)| e as i32 <= b)
                .map(|(&i, _)| i),
        )
    }

    /// `sum_{i in A, exp(i) >= from_j} base^-exp(i)`; `from_j = 0` gives the
    /// whole weight inside A.
    pub fn weight_in_from(&self, cfg: &FragmentConfig, a: &Subset, from_j: i32) -> Rat {
        self.exps
            .iter()
            .filter(|(&i, &e)| a.contains(i) && e as i32 >= from_j)
            .fold(Rat::zero(), |acc, (_, &e)| acc + cfg.grid_weight(e))
    }

    pub fn total_weight(&self, cfg: &FragmentConfig) -> Rat {
        self.weight_in_from(cfg, &self.set, 0)
    }

    /// Bucket sizes `(s_0, ..., s_tau)`.
    pub fn profile(&self, tau: u32) -> Vec<u64> {
        let mut s = vec![0u64; tau as usize + 1];
        for &e in self.exps.values() {
            s[e as usize] += 1;
        }
        s
    }

    /// `(s_j : j <= b)`; empty for `b < 0`.
    pub fn partial_profile(&self, b: i32, tau: u32) -> Vec<u64> {
        if b < 0 {
            return Vec::new();
        }
        let mut p = self.profile(tau);
        p.truncate(b as usize + 1);
        p
    }
}

/// A family on the dyadic grid, as produced by `preprocess_weights` (and
/// typically `regularize_profiles`).
#[derive(Clone, Debug)]
pub struct DyadicFamily {
    pub ground: GroundSet,
    pub p: Rat,
    pub members: Vec<DyadicMember>,
    pub tau: u32,
    pub config: FragmentConfig,
}

impl DyadicFamily {
    pub fn member_sets(&self) -> Vec<Subset> {
        self.members.iter().map(|m| m.set).collect()
    }

    /// Indices of members whose partial profile up to `b` matches `sb`.
    pub fn matching_partial(&self, b: i32, sb: &[u64]) -> Vec<usize> {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, m)| m.partial_profile(b, self.tau) == sb)
            .map(|(i, _)| i)
            .collect()
    }

    /// Back to a plain weighted family with explicit rational weights.
    pub fn to_weighted(&self) -> Result<WeightedFamily, Error> {
        let members = self
            .members
            .iter()
            .map(|m| {
                let weights = m
                    .exps
                    .iter()
                    .map(|(&i, &e)| (i, self.config.grid_weight(e)))
                    .collect();
                crate::family::WeightedMember::new(m.set, weights)
            })
            .collect::<Result<Vec<_>, _>>()?;
        WeightedFamily::new(self.ground, self.p.clone(), members)
    }
}

/// Per-member account of what preprocessing kept and dropped.
#[derive(Clone, Debug, Serialize)]
pub struct PreprocessReport {
    pub tau: u32,
    pub members: Vec<MemberLoss>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MemberLoss {
    /// Total input weight after capping at 1.
    pub capped_weight: String,
    /// Total weight on the grid after rounding and tail dropping.
    pub dyadic_weight: String,
    pub dropped_elements: Vec<u32>,
}

/// Snaps weights to the grid: caps at 1, rounds `[base^-j, base^-(j-1))` down
/// to `base^-j`, and drops elements with `j > tau`. Keeps at least a
/// `1/base^2` fraction of any unit total: the cap+round costs a factor of at
/// most `base`, and the dropped tail totals at most `base^-2`.
pub fn preprocess_weights(
    family: &WeightedFamily,
    config: FragmentConfig,
) -> Result<(DyadicFamily, PreprocessReport), Error> {
    let tau = config.tau_for(family.ground.size());
    let mut members = Vec::with_capacity(family.members.len());
    let mut losses = Vec::with_capacity(family.members.len());
    for m in &family.members {
        let mut exps = BTreeMap::new();
        let mut capped_total = Rat::zero();
        let mut kept_total = Rat::zero();
        let mut dropped = Vec::new();
        for (&i, w) in &m.weights {
            if w.is_negative() {
                return Err(Error::NegativeWeight(format!(
                    "element {i} carries weight {}",
                    rat_to_string(w)
                )));
            }
            if w.is_zero() {
                continue;
            }
            let capped = if *w > Rat::one() { Rat::one() } else { w.clone() };
            capped_total += &capped;
            // smallest j >= 0 with base^-j <= capped
            let mut j = 0u32;
            while j <= tau && config.grid_weight(j) > capped {
                j += 1;
            }
            if j > tau {
                dropped.push(i);
                continue;
            }
            kept_total += config.grid_weight(j);
            exps.insert(i, j);
        }
        losses.push(MemberLoss {
            capped_weight: rat_to_string(&capped_total),
            dyadic_weight: rat_to_string(&kept_total),
            dropped_elements: dropped,
        });
        members.push(DyadicMember::new(exps));
    }
    Ok((
        DyadicFamily {
            ground: family.ground,
            p: family.p.clone(),
            members,
            tau,
            config,
        },
        PreprocessReport { tau, members: losses },
    ))
}

/// Regularizes every member to a legal profile: trims total weight below 2,
/// deletes buckets under the legal floor, rounds surviving bucket sizes down
/// to powers of the base, and re-applies the floor to buckets the rounding
/// pushed below it (possible once the floor exceeds 1, i.e. j >= 5 at
/// defaults). Removal order is ascending element id throughout. At defaults
/// the output keeps `sum >= base^-4` whenever the input had
/// `sum >= base^-2`.
pub fn regularize_profiles(family: &DyadicFamily) -> DyadicFamily {
    let cfg = &family.config;
    let two = rat_u(2);
    let members = family
        .members
        .iter()
        .map(|m| {
            let mut exps = m.exps.clone();
            // trim until total weight < 2 (ascending id)
            let ids: Vec<u32> = exps.keys().copied().collect();
            let mut total = ids
                .iter()
                .fold(Rat::zero(), |acc, i| acc + cfg.grid_weight(exps[i]));
            for i in ids {
                if total < two {
                    break;
                }
                total -= cfg.grid_weight(exps[&i]);
                exps.remove(&i);
            }
            // delete buckets below the legal floor
            let mut by_bucket: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
            for (&i, &e) in &exps {
                by_bucket.entry(e).or_default().push(i);
            }
            for (j, ids) in &by_bucket {
                if rat_u(ids.len() as u64) < cfg.bucket_floor(*j) {
                    for i in ids {
                        exps.remove(i);
                    }
                }
            }
            // round each surviving bucket down to a power of the base
            // (remove ascending ids), then re-check the floor
            let mut by_bucket: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
            for (&i, &e) in &exps {
                by_bucket.entry(e).or_default().push(i);
            }
            for (j, ids) in &by_bucket {
                let keep = largest_base_power_at_most(cfg.base, ids.len() as u64);
                if rat_u(keep) < cfg.bucket_floor(*j) {
                    for i in ids {
                        exps.remove(i);
                    }
                } else {
                    let excess = ids.len() - keep as usize;
                    for i in ids.iter().take(excess) {
                        exps.remove(i);
                    }
                }
            }
            DyadicMember::new(exps)
        })
        .collect();
    DyadicFamily {
        ground: family.ground,
        p: family.p.clone(),
        members,
        tau: family.tau,
        config: family.config.clone(),
    }
}

fn largest_base_power_at_most(base: u64, x: u64) -> u64 {
    debug_assert!(x >= 1);
    let mut pow = 1u64;
    while pow.saturating_mul(base) <= x {
        pow *= base;
    }
    pow
}

/// Is `s` a legal (partial) profile: every nonzero `s_j` a power of the base
/// inside `[max{1, floor_j}, 2 base^j)`.
pub fn is_legal_profile(cfg: &FragmentConfig, s: &[u64]) -> bool {
    s.iter()
        .enumerate()
        .all(|(j, &sj)| sj == 0 || cfg.legal_bucket_sizes(j as u32).contains(&sj))
}

/// All legal partial profiles `(s_j : j <= b)` including zero coordinates
/// (and the all-zero vector), in lexicographic coordinate order. The count is
/// exactly `prod_{j <= b} (1 + #legal powers at j)`.
pub fn enumerate_legal_partial_profiles(cfg: &FragmentConfig, b: u32) -> Vec<Vec<u64>> {
    let mut out: Vec<Vec<u64>> = vec![Vec::new()];
    for j in 0..=b {
        let mut choices = vec![0u64];
        choices.extend(cfg.legal_bucket_sizes(j));
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for prefix in &out {
            for &c in &choices {
                let mut v = prefix.clone();
                v.push(c);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// The feasibility predicate: `S'` (by index) is (Z, b, s_b, t)-feasible when
/// its low buckets sit inside Z and the high-bucket weight captured by Z
/// reaches the capture fraction of what remains after the low-bucket credit.
pub fn is_feasible(
    family: &DyadicFamily,
    sprime: usize,
    z: &Subset,
    b: i32,
    sb: &[u64],
    t: u64,
) -> Result<bool, Error> {
    let m = family
        .members
        .get(sprime)
        .ok_or_else(|| Error::InvalidInput(format!("no member {sprime}")))?;
    if m.partial_profile(b, family.tau) != sb {
        return Err(Error::ProfileMismatch(format!(
            "member {sprime} has partial profile {:?}, expected {:?}",
            m.partial_profile(b, family.tau),
            sb
        )));
    }
    Ok(feasible_unchecked(family, m, z, b, sb, t))
}

fn feasible_unchecked(
    family: &DyadicFamily,
    m: &DyadicMember,
    z: &Subset,
    b: i32,
    sb: &[u64],
    t: u64,
) -> bool {
    let cfg = &family.config;
    if !m.low_buckets(b).is_subset_of(z) {
        return false;
    }
    let lhs = m.weight_in_from(cfg, z, b + 1);
    let high_total = m.weight_in_from(cfg, &m.set, b + 1);
    let nb: u64 = sb.iter().sum();
    let slack = rat_pow(&rat_u(cfg.base), -(b as i64)) * (rat_u(nb) - rat_u(t));
    let rhs = &cfg.capture * (high_total - slack);
    lhs >= rhs
}

/// Fragment test for an explicit candidate `U` at index `b`: some member
/// matching S's partial profile must be (W cup U, b, s_b, |U|)-feasible.
/// Returns the first witness in member order.
pub fn is_fragment(
    family: &DyadicFamily,
    u: &Subset,
    s_idx: usize,
    w: &Subset,
    b: i32,
) -> Result<(bool, Option<usize>), Error> {
    let s = family
        .members
        .get(s_idx)
        .ok_or_else(|| Error::InvalidInput(format!("no member {s_idx}")))?;
    if !u.is_subset_of(&s.set.difference(w)) {
        return Err(Error::InvalidInput(format!(
            "candidate {u:?} is not inside S \\ W = {:?}",
            s.set.difference(w)
        )));
    }
    let sb = s.partial_profile(b, family.tau);
    let z = w.union(u);
    let t = u.len() as u64;
    for (idx, m) in family.members.iter().enumerate() {
        if m.partial_profile(b, family.tau) != sb {
            continue;
        }
        if feasible_unchecked(family, m, &z, b, &sb, t) {
            return Ok((true, Some(idx)));
        }
    }
    Ok((false, None))
}

/// The minimum fragment of (S, W) with its index, size, and witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentResult {
    pub fragment: Subset,
    pub index: i32,
    pub witness: usize,
    pub size: u32,
}

/// Scans `b = -1, 0, ..., tau`; at the first index admitting a fragment,
/// returns the minimum-cardinality one (lexicographically smallest element-id
/// set on ties), with the first feasible witness in member order.
///
/// Candidates at index b are restricted to the union of matching members'
/// low buckets intersected with S \ W: any fragment contains the canonical
/// set `(union_{j<=b} S'_j) \ W` of its witness, and shrinking a fragment to
/// that canonical set preserves the fragment inequality (each dropped
/// element lowers the left side by at most `base^-(b+1)` and the right side
/// by exactly that), so the restriction misses no index and no smaller
/// fragment. `S \ W` itself is always a fragment at index tau via S, so the
/// scan terminates.
pub fn minimum_fragment(
    family: &DyadicFamily,
    s_idx: usize,
    w: &Subset,
) -> Result<FragmentResult, Error> {
    let s = family
        .members
        .get(s_idx)
        .ok_or_else(|| Error::InvalidInput(format!("no member {s_idx}")))?;
    let rest = s.set.difference(w);
    if rest.len() > family.config.search_limit {
        return Err(Error::TooLarge {
            guard: "fragment-search",
            detail: format!(
                "|S \\ W| = {} exceeds {}",
                rest.len(),
                family.config.search_limit
            ),
        });
    }
    for b in -1..=(family.tau as i32) {
        let sb = s.partial_profile(b, family.tau);
        let matching = family.matching_partial(b, &sb);
        let mut space = Subset::empty();
        for &idx in &matching {
            space = space.union(&family.members[idx].low_buckets(b));
        }
        space = space.intersect(&rest);
        for u in subsets_by_cardinality(&space) {
            let z = w.union(&u);
            let t = u.len() as u64;
            for &idx in &matching {
                if feasible_unchecked(family, &family.members[idx], &z, b, &sb, t) {
                    return Ok(FragmentResult {
                        fragment: u,
                        index: b,
                        witness: idx,
                        size: u.len(),
                    });
                }
            }
        }
    }
    unreachable!("S \\ W is a fragment at index tau with witness S")
}

/// Minimum fragments of every member against the same W.
pub fn fragments_for(family: &DyadicFamily, w: &Subset) -> Result<Vec<FragmentResult>, Error> {
    (0..family.members.len())
        .map(|i| minimum_fragment(family, i, w))
        .collect()
}

/// The cover `U(W) = {T(S, W) : S in F}` (deduplicated). Covers F because
/// every minimum fragment is a subset of its member.
pub fn build_cover(family: &DyadicFamily, w: &Subset) -> Result<Cover, Error> {
    let frags = fragments_for(family, w)?;
    Ok(Cover::new(frags.into_iter().map(|f| f.fragment).collect()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WClass {
    Good,
    Bad,
}

/// W is good when some member's weight inside W reaches the threshold.
pub fn classify_w(family: &DyadicFamily, w: &Subset) -> WClass {
    let cfg = &family.config;
    let best = family
        .members
        .iter()
        .map(|m| m.weight_in_from(cfg, w, 0))
        .max()
        .unwrap_or_else(Rat::zero);
    if best >= cfg.good_threshold {
        WClass::Good
    } else {
        WClass::Bad
    }
}

/// One (b, s_b, t) bucket of the bad-W cost ledger.
#[derive(Clone, Debug, Serialize)]
pub struct LedgerBucket {
    pub b: i32,
    pub sb: Vec<u64>,
    pub t: u64,
    /// Number of (W, T) incidences, T deduplicated within its bucket per W.
    pub fragments: u64,
    /// `sum_{W bad} sum_{U in U_W(s_b, t)} p^|U|`, exact.
    pub cost: String,
    /// `C(n, w) J^-t 2^{n_b}` at the effective J = w/(np), exact.
    pub bound: String,
    #[serde(skip)]
    pub cost_rat: Rat,
    #[serde(skip)]
    pub bound_rat: Rat,
}

/// Full accounting of `sum_{W bad} sum_{U in U(W)} p^|U|` against the
/// bucketwise bound chain.
#[derive(Clone, Debug, Serialize)]
pub struct CostLedger {
    pub n: u32,
    pub w: u64,
    pub p: String,
    pub j_requested: String,
    /// `w / (n p)`: the J actually realized by the integer w.
    pub j_effective: String,
    pub total_w_count: String,
    pub bad_w_count: u64,
    /// Exact global left side (fragments deduplicated within each U(W)).
    pub lhs_total: String,
    /// Sum of occupied-bucket bounds.
    pub bound_total: String,
    pub buckets: Vec<LedgerBucket>,
    /// Every bad-W minimum fragment had b >= 0.
    pub all_b_nonnegative: bool,
    /// Every bad-W minimum fragment had t_frac * n_b <= t <= n_b.
    pub all_t_in_range: bool,
    /// Every occupied bucket's s_b was legal with a nonzero last coordinate.
    pub all_profiles_legal: bool,
    /// LHS <= sum of bucket bounds and each bucket under its own bound.
    pub chain_holds: bool,
    /// `C(n, w+t) <= C(n, w) (Jp)^-t` at every occupied t.
    pub counting_holds: bool,
    #[serde(skip)]
    pub lhs_rat: Rat,
    #[serde(skip)]
    pub bound_rat: Rat,
}

/// `C(n, w+t) <= C(n, w) (Jp)^-t` with `Jp = w/n`, exactly.
pub fn counting_bound_holds(n: u64, w: u64, t: u64) -> bool {
    if w == 0 || w + t > n {
        return true; // vacuous: no Z to choose or an undefined ratio
    }
    let lhs = Rat::from_integer(big_binomial(n, w + t).into());
    let rhs = Rat::from_integer(big_binomial(n, w).into())
        * rat_pow(&Rat::new(BigInt::from(n), BigInt::from(w)), t as i64);
    lhs <= rhs
}

/// Exhaustively enumerates `W in C(X, w)` with `w = floor(J n p)`, accounts
/// the bad-W cover costs into (b, s_b, t) buckets, and verifies the bound
/// chain at the effective `J = w/(np)`.
pub fn aggregate_bad_cost(
    family: &DyadicFamily,
    j: &Rat,
    max_w_enumeration: u64,
    policy: ExecPolicy,
) -> Result<CostLedger, Error> {
    let cfg = &family.config;
    let n = family.ground.size();
    let np = rat_u(n as u64) * &family.p;
    let w = crate::rational::rat_floor_u64(&(j * &np))
        .ok_or_else(|| Error::InvalidInput("J n p is negative".into()))?;
    if w == 0 {
        return Err(Error::Inconsistent(
            "floor(J n p) = 0: the ledger needs at least one W element".into(),
        ));
    }
    if w > n as u64 {
        return Err(Error::TooLarge {
            guard: "ledger-w",
            detail: format!("w = floor(J n p) = {w} exceeds n = {n}"),
        });
    }
    let count = big_binomial(n as u64, w);
    if count > num_bigint::BigUint::from(max_w_enumeration) {
        return Err(Error::TooLarge {
            guard: "ledger-w-enumeration",
            detail: format!("C({n},{w}) = {count} exceeds {max_w_enumeration}"),
        });
    }
    let j_eff = rat_u(w) / &np;
    let ws = family.ground.subsets_of_size(w as u32);

    struct WOut {
        bad: bool,
        /// (b, s_b, t, fragment) per member; filled only for bad W.
        frags: Vec<(i32, Vec<u64>, u64, Subset)>,
        dedup_cost: Rat,
    }

    let per_w: Vec<Result<WOut, Error>> = map_slice(policy, &ws, |wset| {
        if classify_w(family, wset) == WClass::Good {
            return Ok(WOut { bad: false, frags: Vec::new(), dedup_cost: Rat::zero() });
        }
        let frags = fragments_for(family, wset)?;
        let mut seen = BTreeSet::new();
        let mut dedup_cost = Rat::zero();
        for f in &frags {
            if seen.insert(f.fragment.bits()) {
                dedup_cost += rat_pow(&family.p, f.size as i64);
            }
        }
        let frags = frags
            .into_iter()
            .enumerate()
            .map(|(mi, f)| {
                let sb = family.members[mi].partial_profile(f.index, family.tau);
                (f.index, sb, f.size as u64, f.fragment)
            })
            .collect();
        Ok(WOut { bad: true, frags, dedup_cost })
    });

    let mut buckets: BTreeMap<(i32, Vec<u64>, u64), u64> = BTreeMap::new();
    let mut lhs = Rat::zero();
    let mut bad_count = 0u64;
    let mut all_b_nonneg = true;
    let mut all_t_in_range = true;
    let mut all_profiles_legal = true;
    for out in per_w {
        let out = out?;
        if !out.bad {
            continue;
        }
        bad_count += 1;
        lhs += out.dedup_cost;
        let mut per_bucket: BTreeMap<(i32, Vec<u64>, u64), BTreeSet<u64>> = BTreeMap::new();
        for (b, sb, t, frag) in out.frags {
            if b < 0 {
                all_b_nonneg = false;
            }
            let nb: u64 = sb.iter().sum();
            if rat_u(t) < &cfg.t_frac * rat_u(nb) || t > nb {
                all_t_in_range = false;
            }
            let last_nonzero = sb.last().map_or(true, |&last| last != 0);
            if !is_legal_profile(cfg, &sb) || !last_nonzero {
                all_profiles_legal = false;
            }
            per_bucket.entry((b, sb, t)).or_default().insert(frag.bits());
        }
        for (key, set) in per_bucket {
            *buckets.entry(key).or_insert(0) += set.len() as u64;
        }
    }

    let cnw = Rat::from_integer(count.clone().into());
    let mut bucket_rows = Vec::new();
    let mut bound_total = Rat::zero();
    let mut counting_holds = true;
    for ((b, sb, t), fragments) in buckets {
        let nb: u64 = sb.iter().sum();
        let cost = rat_u(fragments) * rat_pow(&family.p, t as i64);
        let bound = &cnw * rat_pow(&j_eff, -(t as i64)) * rat_pow(&rat_u(2), nb as i64);
        if !counting_bound_holds(n as u64, w, t) {
            counting_holds = false;
        }
        bound_total += &bound;
        bucket_rows.push(LedgerBucket {
            b,
            sb,
            t,
            fragments,
            cost: rat_to_string(&cost),
            bound: rat_to_string(&bound),
            cost_rat: cost,
            bound_rat: bound,
        });
    }
    let chain_holds =
        bucket_rows.iter().all(|r| r.cost_rat <= r.bound_rat) && lhs <= bound_total;

    Ok(CostLedger {
        n,
        w,
        p: rat_to_string(&family.p),
        j_requested: rat_to_string(j),
        j_effective: rat_to_string(&j_eff),
        total_w_count: count.to_string(),
        bad_w_count: bad_count,
        lhs_total: rat_to_string(&lhs),
        bound_total: rat_to_string(&bound_total),
        buckets: bucket_rows,
        all_b_nonnegative: all_b_nonneg,
        all_t_in_range,
        all_profiles_legal,
        chain_holds,
        counting_holds,
        lhs_rat: lhs,
        bound_rat: bound_total,
    })
}

/// The decay series `a_j` controlling the profile sum, with its tail bound.
#[derive(Clone, Debug, Serialize)]
pub struct AjSeries {
    pub j_param: f64,
    pub tau: u32,
    pub values: Vec<f64>,
    pub sum: f64,
    /// `exp(sum a_j) - 1`.
    pub bound: f64,
    /// Exact enumeration of `sum_b sum_{s_b legal, last coordinate nonzero}
    /// (J/4)^{-t_frac n_b}` when tau <= 3; None above that.
    pub enumerated: Option<f64>,
    /// `enumerated <= prod(1 + a_j) - 1 <= bound` when enumerated.
    pub enumeration_dominated: Option<bool>,
}

/// Evaluates `a_j = log_base[2 base^4 (j+1)^2] (J/4)^{-.9 max{1, floor_j}}`
/// and the chain `sum_b sum_{s_b} (J/4)^{-.9 n_b} <= prod(1+a_j) - 1 <=
/// exp(sum a_j) - 1`. Requires `J > 4`. The enumerated middle term counts
/// partial profiles with a nonzero last coordinate, which is exactly the set
/// a bad-W minimum fragment can occupy: with a trailing empty bucket the same
/// witness would certify a smaller index.
pub fn aj_series(cfg: &FragmentConfig, j_param: f64, tau: u32) -> Result<AjSeries, Error> {
    if !(j_param > 4.0) {
        return Err(Error::InvalidInput(format!("J = {j_param} must exceed 4")));
    }
    let base = cfg.base as f64;
    let t_frac = rat_to_f64(&cfg.t_frac);
    let mut values = Vec::with_capacity(tau as usize + 1);
    for j in 0..=tau {
        let count_bound =
            (2.0 * base.powi(cfg.floor_pow as i32) * ((j + 1) as f64).powi(2)).log(base);
        let floor = rat_to_f64(&cfg.bucket_floor(j)).max(1.0);
        values.push(count_bound * (j_param / 4.0).powf(-t_frac * floor));
    }
    let sum: f64 = values.iter().sum();
    let bound = sum.exp_m1();
    let (enumerated, dominated) = if tau <= 3 {
        let mut total = 0.0f64;
        for b in 0..=tau {
            for sb in enumerate_legal_partial_profiles(cfg, b) {
                if sb.last() == Some(&0) {
                    continue;
                }
                let nb: u64 = sb.iter().sum();
                total += (j_param / 4.0).powf(-t_frac * nb as f64);
            }
        }
        let prod_minus_one: f64 = values.iter().map(|a| 1.0 + a).product::<f64>() - 1.0;
        (
            Some(total),
            Some(total <= prod_minus_one && prod_minus_one <= bound + 1e-12),
        )
    } else {
        (None, None)
    };
    Ok(AjSeries {
        j_param,
        tau,
        values,
        sum,
        bound,
        enumerated,
        enumeration_dominated: dominated,
    })
}
