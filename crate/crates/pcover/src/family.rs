//! Weighted set families, covers, and the exact p-smallness oracle.
//!
//! A family `F` of subsets of a ground set is p-small when some cover `G`
//! (every member of `F` contains an element of `G`) has total price
//! `sum_{T in G} p^|T| <= 1/2`. The oracle computes the exact minimum price
//! over all covers by branch and bound on the induced weighted set-cover
//! instance, so verdicts on small instances are unconditional.

use crate::bitset::{GroundSet, Subset};
use crate::error::Error;
use crate::logfloat::LogNum;
use crate::rational::{rat_pow, rat_to_string, Rat};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// One member set with its weight sequence (keys lie inside the set; weights
/// off the set are implicitly zero).
#[derive(Clone, Debug)]
pub struct WeightedMember {
    pub set: Subset,
    pub weights: BTreeMap<u32, Rat>,
}

impl WeightedMember {
    pub fn new(set: Subset, weights: BTreeMap<u32, Rat>) -> Result<Self, Error> {
        for (&i, w) in &weights {
            if !set.contains(i) {
                return Err(Error::InvalidInput(format!(
                    "weight key {i} lies outside its set {set:?}"
                )));
            }
            if w.is_negative() {
                return Err(Error::NegativeWeight(format!(
                    "element {i} carries weight {}",
                    rat_to_string(w)
                )));
            }
        }
        Ok(WeightedMember { set, weights })
    }

    /// Total weight inside `a` (intersected with the member's set).
    pub fn weight_in(&self, a: &Subset) -> Rat {
        self.weights
            .iter()
            .filter(|(&i, _)| a.contains(i))
            .fold(Rat::zero(), |acc, (_, w)| acc + w)
    }

    pub fn total_weight(&self) -> Rat {
        self.weights.values().fold(Rat::zero(), |acc, w| acc + w)
    }
}

/// A finite, nonempty weighted set family over a ground set, with the
/// probability parameter it is certified against.
#[derive(Clone, Debug)]
pub struct WeightedFamily {
    pub ground: GroundSet,
    pub p: Rat,
    pub members: Vec<WeightedMember>,
}

impl WeightedFamily {
    pub fn new(ground: GroundSet, p: Rat, members: Vec<WeightedMember>) -> Result<Self, Error> {
        check_probability(&p)?;
        if members.is_empty() {
            return Err(Error::InvalidInput("family must be nonempty".into()));
        }
        for m in &members {
            if !m.set.is_subset_of(&ground.full_set()) {
                return Err(Error::GroundMismatch(format!(
                    "member {:?} not within ground set of size {}",
                    m.set,
                    ground.size()
                )));
            }
        }
        Ok(WeightedFamily { ground, p, members })
    }

    pub fn sets(&self) -> Vec<Subset> {
        self.members.iter().map(|m| m.set).collect()
    }

    /// `max_S sum_{i in S cap A} lambda^S(i)`.
    pub fn sup_weight(&self, a: &Subset) -> Rat {
        self.members
            .iter()
            .map(|m| m.weight_in(a))
            .max()
            .unwrap_or_else(Rat::zero)
    }
}

pub fn check_probability(p: &Rat) -> Result<(), Error> {
    if !p.is_positive() || *p >= Rat::one() {
        return Err(Error::BadProbability(format!(
            "p = {} must lie in (0,1)",
            rat_to_string(p)
        )));
    }
    Ok(())
}

/// `true` iff `t` generates an upset containing `s`, i.e. `t` is a subset of
/// `s`.
pub fn upset_contains(ground: &GroundSet, t: &Subset, s: &Subset) -> Result<bool, Error> {
    let full = ground.full_set();
    if !t.is_subset_of(&full) || !s.is_subset_of(&full) {
        return Err(Error::GroundMismatch(
            "subset uses ids outside the ground set".into(),
        ));
    }
    Ok(t.is_subset_of(s))
}

/// A cover: a list of subsets priced by `sum p^|T|`. Canonical form is
/// deduplicated and sorted in element-id lex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    elements: Vec<Subset>,
}

impl Cover {
    pub fn new(mut elements: Vec<Subset>) -> Self {
        elements.sort_by(|a, b| a.lex_cmp(b));
        elements.dedup();
        Cover { elements }
    }

    pub fn elements(&self) -> &[Subset] {
        &self.elements
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// True iff every set in `sets` contains some element of the cover.
    pub fn covers_sets(&self, sets: &[Subset]) -> bool {
        sets.iter()
            .all(|s| self.elements.iter().any(|t| t.is_subset_of(s)))
    }

    pub fn covers(&self, family: &WeightedFamily) -> bool {
        self.covers_sets(&family.sets())
    }

    /// Exact cost `sum_{T in G} p^|T|`.
    pub fn cost(&self, p: &Rat) -> Result<Rat, Error> {
        check_probability(p)?;
        Ok(self
            .elements
            .iter()
            .fold(Rat::zero(), |acc, t| acc + rat_pow(p, t.len() as i64)))
    }

    /// Log-space float cost for instances where rationals are too slow.
    pub fn cost_log(&self, p: f64) -> Result<LogNum, Error> {
        if !(0.0 < p && p < 1.0) {
            return Err(Error::BadProbability(format!("p = {p} must lie in (0,1)")));
        }
        let lp = LogNum::from_value(p);
        Ok(LogNum::sum(
            self.elements.iter().map(|t| lp.powi(t.len() as i64)),
        ))
    }

    /// Lexicographic order on the canonical element sequence; the tie-break
    /// among equal-cost covers.
    pub fn lex_cmp(&self, other: &Cover) -> Ordering {
        let mut a = self.elements.iter();
        let mut b = other.elements.iter();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(x), Some(y)) => match x.lex_cmp(y) {
                    Ordering::Equal => continue,
                    o => return o,
                },
            }
        }
    }

    pub fn to_id_lists(&self) -> Vec<Vec<u32>> {
        self.elements.iter().map(|t| t.to_vec()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    PSmall,
    NotPSmall,
}

/// Outcome of a p-smallness query. Self-validating: a p-small verdict always
/// carries a cover that the caller can re-check with `covers` and `cost`.
#[derive(Clone, Debug)]
pub struct SmallnessCertificate {
    pub verdict: Verdict,
    pub witness_cover: Option<Cover>,
    pub min_cost: Rat,
    /// True when the cost is the exact minimum over all covers (oracle ran to
    /// completion), so a not-p-small verdict is unconditional.
    pub exhaustive: bool,
}

#[derive(Clone, Debug)]
pub enum SmallnessMethod {
    Exact { guard: u64 },
    GivenCover(Cover),
}

impl Default for SmallnessMethod {
    fn default() -> Self {
        SmallnessMethod::Exact { guard: DEFAULT_ENUM_GUARD }
    }
}

/// Default ceiling on `sum_S 2^|S|`, the candidate-pool size of the exact
/// oracle.
pub const DEFAULT_ENUM_GUARD: u64 = 1 << 20;

fn half() -> Rat {
    Rat::new(1.into(), 2.into())
}

/// Exact minimum cover cost for plain sets, plus one optimal cover.
///
/// Candidate cover elements are restricted to subsets of members of `F`: an
/// element `T` covers some member `S` only when `T` is a subset of `S`, so any
/// element outside the pool covers nothing and dropping it preserves coverage
/// while lowering the price. Hence some optimal cover lies entirely in the
/// restricted pool. Note the price `p^|T|` DECREASES with `|T|`: the cheapest
/// element covering a single member `S` is `S` itself. Ties among optimal
/// covers break to the lexicographically smallest canonical element sequence.
pub fn min_cover_cost_exact(
    sets: &[Subset],
    p: &Rat,
    guard: u64,
) -> Result<(Rat, Cover), Error> {
    check_probability(p)?;
    if sets.is_empty() {
        return Err(Error::InvalidInput("family must be nonempty".into()));
    }
    let pool_size: u64 = sets.iter().map(|s| 1u64 << s.len().min(63)).sum();
    if pool_size > guard {
        return Err(Error::TooLarge {
            guard: "cover-candidate-pool",
            detail: format!("sum 2^|S| = {pool_size} exceeds {guard}"),
        });
    }
    if sets.len() > 128 {
        return Err(Error::TooLarge {
            guard: "family-size",
            detail: format!("|F| = {} exceeds 128", sets.len()),
        });
    }

    // Candidate pool: all subsets of members, deduplicated, with the bitmask
    // of members each candidate covers.
    let mut pool: BTreeMap<u64, u128> = BTreeMap::new();
    for s in sets {
        for t in s.subsets() {
            pool.entry(t.bits()).or_insert(0);
        }
    }
    let coverage: Vec<(Subset, u128)> = pool
        .into_keys()
        .map(|bits| {
            let t = Subset::from_bits(bits);
            let mut mask = 0u128;
            for (idx, s) in sets.iter().enumerate() {
                if t.is_subset_of(s) {
                    mask |= 1 << idx;
                }
            }
            (t, mask)
        })
        .collect();

    // Per-member candidate lists ordered cheapest-first (cost p^|T| falls as
    // |T| grows, so larger sets come first), then lex for determinism.
    let mut per_member: Vec<Vec<usize>> = vec![Vec::new(); sets.len()];
    for (ci, (_, mask)) in coverage.iter().enumerate() {
        for (mi, lst) in per_member.iter_mut().enumerate() {
            if mask >> mi & 1 == 1 {
                lst.push(ci);
            }
        }
    }
    for lst in &mut per_member {
        lst.sort_by(|&a, &b| {
            let (ta, tb) = (&coverage[a].0, &coverage[b].0);
            tb.len().cmp(&ta.len()).then(ta.lex_cmp(tb))
        });
    }

    let all_mask: u128 = if sets.len() == 128 {
        u128::MAX
    } else {
        (1u128 << sets.len()) - 1
    };

    struct Search<'a> {
        sets: &'a [Subset],
        coverage: &'a [(Subset, u128)],
        per_member: &'a [Vec<usize>],
        p: Rat,
        all_mask: u128,
        best_cost: Rat,
        best: Option<Cover>,
    }

    impl Search<'_> {
        /// Price floor for the still-uncovered members. No nonempty element
        /// can sit inside two disjoint members, so a greedy pairwise-disjoint
        /// bundle needs a distinct element each, the cheapest being the
        /// member itself at p^|S|; buying the empty set instead costs 1, as
        /// does an uncovered empty member.
        fn lower_bound(&self, covered: u128) -> Rat {
            let mut bundle = Rat::zero();
            let mut taken = Subset::empty();
            for (mi, s) in self.sets.iter().enumerate() {
                if covered >> mi & 1 == 1 {
                    continue;
                }
                if s.is_empty() {
                    return Rat::one();
                }
                if s.intersect(&taken).is_empty() {
                    bundle += rat_pow(&self.p, s.len() as i64);
                    taken = taken.union(s);
                }
            }
            if bundle > Rat::one() {
                Rat::one()
            } else {
                bundle
            }
        }

        fn consider(&mut self, cost: &Rat, chosen: &[usize]) {
            let cover = Cover::new(chosen.iter().map(|&c| self.coverage[c].0).collect());
            match cost.cmp(&self.best_cost) {
                Ordering::Less => {
                    self.best_cost = cost.clone();
                    self.best = Some(cover);
                }
                Ordering::Equal => {
                    if let Some(b) = &self.best {
                        if cover.lex_cmp(b) == Ordering::Less {
                            self.best = Some(cover);
                        }
                    } else {
                        self.best = Some(cover);
                    }
                }
                Ordering::Greater => {}
            }
        }

        fn recurse(&mut self, covered: u128, cost: Rat, chosen: &mut Vec<usize>) {
            if covered == self.all_mask {
                self.consider(&cost, chosen);
                return;
            }
            // Prune strictly above the incumbent; equal-cost branches stay
            // alive so the lex tie-break sees every optimal cover.
            if &cost + self.lower_bound(covered) > self.best_cost {
                return;
            }
            // Branch on the uncovered member with the fewest candidates.
            let mut pick = usize::MAX;
            let mut pick_len = usize::MAX;
            for mi in 0..self.sets.len() {
                if covered >> mi & 1 == 0 {
                    let len = self.per_member[mi].len();
                    if len < pick_len {
                        pick_len = len;
                        pick = mi;
                    }
                }
            }
            for &ci in &self.per_member[pick] {
                if chosen.contains(&ci) {
                    continue;
                }
                let (t, mask) = &self.coverage[ci];
                let next_cost = &cost + rat_pow(&self.p, t.len() as i64);
                if &next_cost + self.lower_bound(covered | mask) > self.best_cost {
                    continue;
                }
                chosen.push(ci);
                self.recurse(covered | mask, next_cost, chosen);
                chosen.pop();
            }
        }
    }

    let mut search = Search {
        sets,
        coverage: &coverage,
        per_member: &per_member,
        p: p.clone(),
        all_mask,
        // The empty-set cover prices at 1 and always covers, so it seeds the
        // incumbent.
        best_cost: Rat::one(),
        best: Some(Cover::new(vec![Subset::empty()])),
    };
    search.recurse(0, Rat::zero(), &mut Vec::new());
    let best = search.best.expect("incumbent always set");
    debug_assert!(best.covers_sets(sets));
    debug_assert_eq!(best.cost(p).unwrap(), search.best_cost);
    Ok((search.best_cost, best))
}

/// p-smallness verdict per the `<= 1/2` threshold.
pub fn is_p_small(
    family: &WeightedFamily,
    method: SmallnessMethod,
) -> Result<SmallnessCertificate, Error> {
    let sets = family.sets();
    match method {
        SmallnessMethod::Exact { guard } => {
            let (min_cost, cover) = min_cover_cost_exact(&sets, &family.p, guard)?;
            let small = min_cost <= half();
            Ok(SmallnessCertificate {
                verdict: if small { Verdict::PSmall } else { Verdict::NotPSmall },
                witness_cover: small.then_some(cover),
                min_cost,
                exhaustive: true,
            })
        }
        SmallnessMethod::GivenCover(cover) => {
            let covers = cover.covers_sets(&sets);
            let cost = cover.cost(&family.p)?;
            let small = covers && cost <= half();
            Ok(SmallnessCertificate {
                verdict: if small { Verdict::PSmall } else { Verdict::NotPSmall },
                witness_cover: small.then_some(cover),
                min_cost: cost,
                exhaustive: false,
            })
        }
    }
}

/// Checks the shrinking direction of p-smallness: given members in bijection
/// with `big[i]` containing `small[i]`, p-smallness of the shrunk family must
/// imply p-smallness of the original (any cover of the shrunk members covers
/// the bigger ones). Returns whether the implication held.
pub fn shrink_monotone_check(
    big: &WeightedFamily,
    small: &WeightedFamily,
    guard: u64,
) -> Result<bool, Error> {
    if big.members.len() != small.members.len() {
        return Err(Error::BijectionViolated(format!(
            "family sizes differ: {} vs {}",
            big.members.len(),
            small.members.len()
        )));
    }
    for (i, (b, s)) in big.members.iter().zip(&small.members).enumerate() {
        if !s.set.is_subset_of(&b.set) {
            return Err(Error::BijectionViolated(format!(
                "member {i}: {:?} is not a superset of {:?}",
                b.set, s.set
            )));
        }
    }
    if big.p != small.p {
        return Err(Error::BijectionViolated("p differs between families".into()));
    }
    let small_cert = is_p_small(small, SmallnessMethod::Exact { guard })?;
    if small_cert.verdict == Verdict::NotPSmall {
        return Ok(true); // implication vacuous
    }
    let big_cert = is_p_small(big, SmallnessMethod::Exact { guard })?;
    Ok(big_cert.verdict == Verdict::PSmall)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat_from_str, rat_to_f64};

    fn r(s: &str) -> Rat {
        rat_from_str(s).unwrap()
    }

    fn plain_family(n: u32, p: &str, sets: &[&[u32]]) -> WeightedFamily {
        let ground = GroundSet::new(n).unwrap();
        let members = sets
            .iter()
            .map(|ids| {
                WeightedMember::new(Subset::from_ids(ids.iter().copied()), BTreeMap::new()).unwrap()
            })
            .collect();
        WeightedFamily::new(ground, r(p), members).unwrap()
    }

    /// Independent oracle: enumerate every sub-collection of the candidate
    /// pool and take the cheapest that covers. Exponential, so only for tiny
    /// pools; validates the branch-and-bound.
    fn brute_force_min_cover(sets: &[Subset], p: &Rat) -> (Rat, Vec<Subset>) {
        let mut pool: Vec<Subset> = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for s in sets {
            for t in s.subsets() {
                if seen.insert(t.bits()) {
                    pool.push(t);
                }
            }
        }
        assert!(pool.len() <= 20, "brute-force pool too big");
        let mut best_cost: Option<Rat> = None;
        let mut best: Vec<Subset> = Vec::new();
        for pick in 0u32..(1 << pool.len()) {
            let chosen: Vec<Subset> = (0..pool.len())
                .filter(|i| pick >> i & 1 == 1)
                .map(|i| pool[i])
                .collect();
            let ok = sets
                .iter()
                .all(|s| chosen.iter().any(|t| t.is_subset_of(s)));
            if !ok {
                continue;
            }
            let cost = chosen
                .iter()
                .fold(Rat::zero(), |acc, t| acc + rat_pow(p, t.len() as i64));
            if best_cost.as_ref().map_or(true, |b| &cost < b) {
                best_cost = Some(cost);
                best = chosen;
            }
        }
        (best_cost.unwrap(), best)
    }

    #[test]
    fn upset_contains_examples() {
        let g = GroundSet::new(4).unwrap();
        let t1 = Subset::from_ids([1]);
        let s12 = Subset::from_ids([1, 2]);
        assert!(upset_contains(&g, &t1, &s12).unwrap());
        assert!(upset_contains(&g, &Subset::empty(), &Subset::empty()).unwrap());
        let t2 = Subset::from_ids([2]);
        let s1 = Subset::from_ids([1]);
        assert!(!upset_contains(&g, &t2, &s1).unwrap());
        // ids outside the ground set are rejected
        let g2 = GroundSet::new(2).unwrap();
        assert!(upset_contains(&g2, &Subset::from_ids([3]), &s1).is_err());
    }

    #[test]
    fn covers_examples() {
        let f = plain_family(4, "1/8", &[&[1, 2], &[1, 3]]);
        assert!(Cover::new(vec![Subset::from_ids([1])]).covers(&f));
        assert!(Cover::new(vec![Subset::empty()]).covers(&f));
        let f2 = plain_family(4, "1/8", &[&[1]]);
        assert!(!Cover::new(vec![Subset::from_ids([2])]).covers(&f2));
    }

    #[test]
    fn cover_cost_examples() {
        let g_empty = Cover::new(vec![Subset::empty()]);
        assert_eq!(g_empty.cost(&r("3/10")).unwrap(), Rat::one());
        let g2 = Cover::new(vec![Subset::from_ids([1]), Subset::from_ids([2])]);
        assert_eq!(g2.cost(&r("3/10")).unwrap(), r("3/5"));
        let g3 = Cover::new(vec![Subset::from_ids([1, 2])]);
        assert_eq!(g3.cost(&r("1/2")).unwrap(), r("1/4"));
        assert!(g3.cost(&r("0")).is_err());
        assert!(g3.cost(&r("1")).is_err());
    }

    #[test]
    fn cost_log_matches_rational_within_1e12() {
        let cover = Cover::new(vec![
            Subset::empty(),
            Subset::from_ids([0]),
            Subset::from_ids([1, 2, 3]),
            Subset::from_ids([0, 1, 2, 3, 4, 5, 6, 7]),
        ]);
        for p in ["1/8", "1/3", "9/10", "1/100"] {
            let exact = rat_to_f64(&cover.cost(&r(p)).unwrap());
            let logf = cover.cost_log(rat_to_f64(&r(p))).unwrap().value();
            assert!((exact - logf).abs() / exact < 1e-12, "p={p}");
        }
    }

    #[test]
    fn disjoint_singletons_min_cost() {
        // Four disjoint singletons at p = 1/8: the four singletons price at
        // 4p = 1/2, cheaper than the empty-set cover's 1. Frozen from the
        // brute-force enumeration below.
        let f = plain_family(4, "1/8", &[&[0], &[1], &[2], &[3]]);
        let (cost, cover) = min_cover_cost_exact(&f.sets(), &f.p, DEFAULT_ENUM_GUARD).unwrap();
        let (bf_cost, _) = brute_force_min_cover(&f.sets(), &f.p);
        assert_eq!(cost, bf_cost);
        assert_eq!(cost, r("1/2"));
        assert_eq!(cover.elements().len(), 4);
        assert!(cover.elements().iter().all(|t| t.len() == 1));
    }

    #[test]
    fn empty_member_forces_cost_one() {
        let f = plain_family(2, "1/8", &[&[]]);
        let (cost, cover) = min_cover_cost_exact(&f.sets(), &f.p, DEFAULT_ENUM_GUARD).unwrap();
        assert_eq!(cost, Rat::one());
        assert_eq!(cover.elements(), &[Subset::empty()]);
    }

    #[test]
    fn single_member_is_its_own_cheapest_cover() {
        // F = {{1,2}} at p = 0.1: enumerating all T inside {1,2} prices the
        // empty set at 1, either singleton at 1/10, and {1,2} itself at
        // 1/100. The member itself wins.
        let f = plain_family(4, "1/10", &[&[1, 2]]);
        let (cost, cover) = min_cover_cost_exact(&f.sets(), &f.p, DEFAULT_ENUM_GUARD).unwrap();
        let (bf_cost, _) = brute_force_min_cover(&f.sets(), &f.p);
        assert_eq!(cost, bf_cost);
        assert_eq!(cost, r("1/100"));
        assert_eq!(cover.elements(), &[Subset::from_ids([1, 2])]);
    }

    #[test]
    fn equal_cost_ties_break_lexicographically() {
        // Two disjoint pairs: both {{0,1},{2,3}} (cost 2p^2) is optimal and
        // unique, but shrink p so singletons never compete; then check a
        // genuine tie: F = {{0},{1}} vs elements {0},{1} forced, and the
        // canonical sequence sorts ascending.
        let f = plain_family(4, "1/10", &[&[0], &[1]]);
        let (_, cover) = min_cover_cost_exact(&f.sets(), &f.p, DEFAULT_ENUM_GUARD).unwrap();
        assert_eq!(
            cover.elements(),
            &[Subset::from_ids([0]), Subset::from_ids([1])]
        );
    }

    #[test]
    fn oracle_matches_brute_force_randomized() {
        use rand::Rng;
        let mut rng = crate::rng::stream_rng(11, 0);
        for trial in 0..60 {
            let n = rng.gen_range(2..=4);
            let g = GroundSet::new(n).unwrap();
            let k = rng.gen_range(1..=3);
            let sets: Vec<Subset> = (0..k)
                .map(|_| {
                    // keep members at <= 3 elements so the brute-force pool
                    // stays enumerable
                    let mut s = Subset::from_bits(rng.gen_range(0..=g.full_mask()));
                    while s.len() > 3 {
                        let drop = s.to_vec()[rng.gen_range(0..s.len() as usize)];
                        s.remove(drop);
                    }
                    s
                })
                .collect();
            let p = Rat::new((rng.gen_range(1..=9) as i64).into(), 10.into());
            let (cost, cover) = min_cover_cost_exact(&sets, &p, DEFAULT_ENUM_GUARD).unwrap();
            let (bf_cost, _) = brute_force_min_cover(&sets, &p);
            assert_eq!(cost, bf_cost, "trial {trial}: sets {sets:?} p {p}");
            assert!(cover.covers_sets(&sets));
            assert_eq!(cover.cost(&p).unwrap(), cost);
        }
    }

    #[test]
    fn is_p_small_examples() {
        let f = plain_family(4, "1/8", &[&[0], &[1], &[2], &[3]]);
        let cert = is_p_small(&f, SmallnessMethod::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::PSmall);
        assert_eq!(cert.min_cost, r("1/2"));
        assert!(cert.exhaustive);
        let cover = cert.witness_cover.unwrap();
        assert!(cover.covers(&f));
        assert!(cover.cost(&f.p).unwrap() <= r("1/2"));

        let f2 = plain_family(4, "1/5", &[&[0], &[1], &[2], &[3]]);
        let cert2 = is_p_small(&f2, SmallnessMethod::default()).unwrap();
        assert_eq!(cert2.verdict, Verdict::NotPSmall);
        assert_eq!(cert2.min_cost, r("4/5"));
        assert!(cert2.witness_cover.is_none());

        let f3 = plain_family(2, "1/8", &[&[]]);
        let cert3 = is_p_small(&f3, SmallnessMethod::default()).unwrap();
        assert_eq!(cert3.verdict, Verdict::NotPSmall);
        assert_eq!(cert3.min_cost, Rat::one());
    }

    #[test]
    fn given_cover_method_validates() {
        let f = plain_family(4, "1/8", &[&[0, 1], &[0, 2]]);
        let good = Cover::new(vec![Subset::from_ids([0])]);
        let cert = is_p_small(&f, SmallnessMethod::GivenCover(good)).unwrap();
        assert_eq!(cert.verdict, Verdict::PSmall);
        assert!(!cert.exhaustive);
        let bad = Cover::new(vec![Subset::from_ids([3])]);
        let cert2 = is_p_small(&f, SmallnessMethod::GivenCover(bad)).unwrap();
        assert_eq!(cert2.verdict, Verdict::NotPSmall);
    }

    #[test]
    fn monotone_in_family_growth() {
        // Adding sets never decreases minimum cost.
        let p = r("1/8");
        let base = vec![Subset::from_ids([0, 1])];
        let mut grown = base.clone();
        grown.push(Subset::from_ids([2]));
        let (c1, _) = min_cover_cost_exact(&base, &p, DEFAULT_ENUM_GUARD).unwrap();
        let (c2, _) = min_cover_cost_exact(&grown, &p, DEFAULT_ENUM_GUARD).unwrap();
        assert!(c2 >= c1);
    }

    #[test]
    fn shrink_monotone_examples() {
        // Supersets of singletons vs the singletons themselves.
        let big = plain_family(4, "1/8", &[&[0, 1], &[2, 3]]);
        let small = plain_family(4, "1/8", &[&[0], &[2]]);
        assert!(shrink_monotone_check(&big, &small, DEFAULT_ENUM_GUARD).unwrap());
        // Reflexive.
        assert!(shrink_monotone_check(&big, &big, DEFAULT_ENUM_GUARD).unwrap());
        // Violated bijection is an error.
        let wrong = plain_family(4, "1/8", &[&[3], &[2]]);
        assert!(shrink_monotone_check(&big, &wrong, DEFAULT_ENUM_GUARD).is_err());
    }

    #[test]
    fn common_element_gives_cheap_cover() {
        let f = plain_family(5, "3/10", &[&[0, 1], &[0, 2], &[0, 3, 4]]);
        let (cost, _) = min_cover_cost_exact(&f.sets(), &f.p, DEFAULT_ENUM_GUARD).unwrap();
        assert!(cost <= r("3/10"));
    }

    #[test]
    fn guard_fails_closed() {
        let g = GroundSet::new(40).unwrap();
        let sets = vec![g.full_set()];
        match min_cover_cost_exact(&sets, &r("1/2"), 1 << 10) {
            Err(Error::TooLarge { guard, .. }) => assert_eq!(guard, "cover-candidate-pool"),
            other => panic!("expected guard failure, got {other:?}"),
        }
    }
}
