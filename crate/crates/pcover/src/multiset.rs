//! Multisets over a ground set, the multinomial sampling law, Poissonized
//! cover costs, and the exact minimum-cost multiset cover oracle.
//!
//! A cover element G prices at `prod_x (e N mu(x))^{G(x)} / G(x)!`, which is
//! `e^{|G|}` times a rational; sums of these are [`ECost`] polynomials in e,
//! so the 1/2 budget comparison stays exact.

use crate::bitset::GroundSet;
use crate::ecost::ECost;
use crate::error::Error;
use crate::logfloat::LogNum;
use crate::rational::{big_factorial, rat_pow, rat_to_string, rat_u, Rat};
use crate::rng::StreamRng;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// A multiset over ground-set ids: element -> multiplicity. Zero counts are
/// never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Multiset {
    counts: BTreeMap<u32, u32>,
}

impl Multiset {
    pub fn empty() -> Self {
        Multiset::default()
    }

    pub fn from_counts<I: IntoIterator<Item = (u32, u32)>>(counts: I) -> Self {
        let counts = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        Multiset { counts }
    }

    pub fn from_vec(counts: &[u32]) -> Self {
        Multiset::from_counts(counts.iter().enumerate().map(|(i, &c)| (i as u32, c)))
    }

    pub fn count(&self, x: u32) -> u32 {
        self.counts.get(&x).copied().unwrap_or(0)
    }

    pub fn contains(&self, x: u32) -> bool {
        self.count(x) > 0
    }

    pub fn set_count(&mut self, x: u32, c: u32) {
        if c == 0 {
            self.counts.remove(&x);
        } else {
            self.counts.insert(x, c);
        }
    }

    pub fn size(&self) -> u64 {
        self.counts.values().map(|&c| c as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Elements with positive multiplicity, ascending.
    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.counts.keys().copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.counts.iter().map(|(&x, &c)| (x, c))
    }

    /// Pointwise max.
    pub fn union(&self, other: &Multiset) -> Multiset {
        let mut out = self.counts.clone();
        for (&x, &c) in &other.counts {
            let e = out.entry(x).or_insert(0);
            *e = (*e).max(c);
        }
        Multiset { counts: out }
    }

    /// Pointwise min.
    pub fn intersect(&self, other: &Multiset) -> Multiset {
        let counts = self
            .counts
            .iter()
            .filter_map(|(&x, &c)| {
                let m = c.min(other.count(x));
                (m > 0).then_some((x, m))
            })
            .collect();
        Multiset { counts }
    }

    /// Disjoint union: pointwise sum.
    pub fn plus(&self, other: &Multiset) -> Multiset {
        let mut out = self.counts.clone();
        for (&x, &c) in &other.counts {
            *out.entry(x).or_insert(0) += c;
        }
        Multiset { counts: out }
    }

    /// Truncated difference: pointwise `max(a - b, 0)`.
    pub fn minus(&self, other: &Multiset) -> Multiset {
        let counts = self
            .counts
            .iter()
            .filter_map(|(&x, &c)| {
                let d = c.saturating_sub(other.count(x));
                (d > 0).then_some((x, d))
            })
            .collect();
        Multiset { counts }
    }

    /// `self(x) <= other(x)` for all x.
    pub fn is_subset_of(&self, other: &Multiset) -> bool {
        self.counts.iter().all(|(&x, &c)| c <= other.count(x))
    }

    /// Lexicographic order on the expanded element sequence (each element
    /// repeated by multiplicity, ascending ids). For equal sizes this means
    /// more copies of a smaller id sorts earlier; a proper prefix sorts
    /// earlier than its extensions.
    pub fn lex_cmp(&self, other: &Multiset) -> Ordering {
        let mut a = self.entries();
        let mut b = other.entries();
        let (mut ca, mut cb): (Option<(u32, u32)>, Option<(u32, u32)>) = (a.next(), b.next());
        loop {
            match (ca, cb) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some((xa, na)), Some((xb, nb))) => {
                    if xa != xb {
                        return xa.cmp(&xb);
                    }
                    match na.cmp(&nb) {
                        Ordering::Equal => {
                            ca = a.next();
                            cb = b.next();
                        }
                        // same element, fewer copies: the side that runs out
                        // moves to its next (larger or absent) element
                        Ordering::Less => {
                            ca = a.next();
                            return match ca {
                                None => Ordering::Less,
                                Some((xa2, _)) => xa2.cmp(&xb).then(Ordering::Greater),
                            };
                        }
                        Ordering::Greater => {
                            cb = b.next();
                            return match cb {
                                None => Ordering::Greater,
                                Some((xb2, _)) => xa.cmp(&xb2).then(Ordering::Less),
                            };
                        }
                    }
                }
            }
        }
    }

    /// All sub-multisets, ordered by ascending size then lex.
    pub fn submultisets(&self) -> Vec<Multiset> {
        let items: Vec<(u32, u32)> = self.entries().collect();
        let mut out = vec![Multiset::empty()];
        for (x, c) in items {
            let mut next = Vec::with_capacity(out.len() * (c as usize + 1));
            for base in &out {
                for k in 0..=c {
                    let mut m = base.clone();
                    m.set_count(x, k);
                    next.push(m);
                }
            }
            out = next;
        }
        out.sort_by(|a, b| a.size().cmp(&b.size()).then(a.lex_cmp(b)));
        out
    }

    pub fn to_json_counts(&self) -> BTreeMap<String, u32> {
        self.entries().map(|(x, c)| (x.to_string(), c)).collect()
    }
}

impl std::fmt::Debug for Multiset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (k, (x, c)) in self.entries().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}:{c}")?;
        }
        write!(f, "}}")
    }
}

/// Enumerates all multisets of size `n_total` over `width` elements in colex
/// order of count vectors via the next-composition step. Memory-free aside
/// from the current vector.
pub struct CompositionIter {
    counts: Vec<u32>,
    total: u32,
    started: bool,
    done: bool,
}

impl CompositionIter {
    pub fn new(width: u32, total: u32) -> Self {
        assert!(width >= 1);
        let mut counts = vec![0u32; width as usize];
        counts[0] = total;
        CompositionIter { counts, total, started: false, done: false }
    }
}

impl Iterator for CompositionIter {
    type Item = Multiset;
    fn next(&mut self) -> Option<Multiset> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(Multiset::from_vec(&self.counts));
        }
        let last = self.counts.len() - 1;
        if self.counts[last] == self.total {
            self.done = true;
            return None;
        }
        // classic colex step: empty the first nonzero cell into position 0
        // minus one unit, which carries into the next cell
        let k = self.counts.iter().position(|&c| c > 0).expect("nonzero total");
        if k == last {
            self.done = true;
            return None;
        }
        let v = self.counts[k];
        self.counts[k] = 0;
        self.counts[0] = v - 1;
        self.counts[k + 1] += 1;
        Some(Multiset::from_vec(&self.counts))
    }
}

/// All multisets of size `total` over the ground set, colex order.
pub fn multisets_of_size(ground: &GroundSet, total: u32) -> CompositionIter {
    CompositionIter::new(ground.size(), total)
}

/// The sampling law: `N` i.i.d. draws from `mu` aggregated into counts, with
/// an optional multiplier K (the `M = K N` variants sample KN draws).
#[derive(Clone, Debug)]
pub struct MultisetDistribution {
    pub ground: GroundSet,
    pub mu: Vec<Rat>,
    pub n_samples: u32,
    pub k_mult: Option<u32>,
}

impl MultisetDistribution {
    pub fn new(
        ground: GroundSet,
        mu: Vec<Rat>,
        n_samples: u32,
        k_mult: Option<u32>,
    ) -> Result<Self, Error> {
        if mu.len() != ground.size() as usize {
            return Err(Error::SizeMismatch(format!(
                "mu has {} entries, ground set has {}",
                mu.len(),
                ground.size()
            )));
        }
        if mu.iter().any(|m| m.is_negative()) {
            return Err(Error::InvalidInput("mu has a negative entry".into()));
        }
        let total: Rat = mu.iter().fold(Rat::zero(), |a, m| a + m);
        if !total.is_one() {
            return Err(Error::InvalidInput(format!(
                "mu sums to {}, not 1",
                rat_to_string(&total)
            )));
        }
        if n_samples == 0 {
            return Err(Error::InvalidInput("N must be at least 1".into()));
        }
        Ok(MultisetDistribution { ground, mu, n_samples, k_mult })
    }

    /// `P[W = w]` under `n_samples` draws; errors unless `|w| = n_samples`.
    pub fn prob(&self, w: &Multiset) -> Result<Rat, Error> {
        multinomial_prob(&self.mu, w, self.n_samples as u64)
    }
}

/// `n! prod_x mu(x)^{w(x)} / w(x)!`, exact; requires `|w| = n`.
pub fn multinomial_prob(mu: &[Rat], w: &Multiset, n: u64) -> Result<Rat, Error> {
    if w.size() != n {
        return Err(Error::SizeMismatch(format!(
            "multiset has size {}, law draws {n}",
            w.size()
        )));
    }
    let mut out = Rat::from_integer(big_factorial(n).into());
    for (x, c) in w.entries() {
        let mx = mu
            .get(x as usize)
            .ok_or_else(|| Error::GroundMismatch(format!("element {x} outside mu")))?;
        out *= rat_pow(mx, c as i64);
        out /= Rat::from_integer(big_factorial(c as u64).into());
    }
    Ok(out)
}

/// Draws the multiset of `n_draws` categorical samples.
pub fn sample_multiset(mu_f64: &[f64], n_draws: u32, rng: &mut StreamRng) -> Multiset {
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    for _ in 0..n_draws {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = mu_f64.len() - 1;
        for (i, m) in mu_f64.iter().enumerate() {
            acc += m;
            if u < acc {
                chosen = i;
                break;
            }
        }
        *counts.entry(chosen as u32).or_insert(0) += 1;
    }
    Multiset { counts }
}

/// Exact Poissonized price `prod_x (e N mu(x))^{G(x)} / G(x)! =
/// e^{|G|} prod_x (N mu(x))^{G(x)} / G(x)!`.
pub fn poissonized_cost(g: &Multiset, mu: &[Rat], n: u64) -> Result<ECost, Error> {
    let mut coeff = Rat::one();
    for (x, c) in g.entries() {
        let mx = mu
            .get(x as usize)
            .ok_or_else(|| Error::GroundMismatch(format!("element {x} outside mu")))?;
        coeff *= rat_pow(&(rat_u(n) * mx), c as i64);
        coeff /= Rat::from_integer(big_factorial(c as u64).into());
    }
    let k = u32::try_from(g.size()).map_err(|_| Error::TooLarge {
        guard: "poissonized-exponent",
        detail: format!("|G| = {} too large", g.size()),
    })?;
    Ok(ECost::term(coeff, k))
}

/// Log-space float price, for scales where rationals are too slow.
pub fn poissonized_cost_log(g: &Multiset, mu_f64: &[f64], n: u64) -> LogNum {
    let mut ln = 0.0f64;
    for (x, c) in g.entries() {
        let lam = n as f64 * mu_f64[x as usize];
        ln += c as f64 * (1.0 + lam.ln());
        ln -= (1..=c as u64).map(|i| (i as f64).ln()).sum::<f64>();
    }
    LogNum::from_ln(ln)
}

/// Drops every element with `N mu(x) / G(x) > 1` (count set to 0). In the
/// removed regime each factor `(e N mu(x))^{G(x)} / G(x)!` is at least
/// `(e N mu(x) / G(x))^{G(x)} >= 1`, so pruning never increases the price,
/// and a pruned element only shrinks G, preserving every cover relation.
pub fn prune_cover_element(g: &Multiset, mu: &[Rat], n: u64) -> Result<Multiset, Error> {
    let mut out = g.clone();
    for (x, c) in g.entries() {
        let mx = mu
            .get(x as usize)
            .ok_or_else(|| Error::GroundMismatch(format!("element {x} outside mu")))?;
        if rat_u(n) * mx > rat_u(c as u64) {
            out.set_count(x, 0);
        }
    }
    Ok(out)
}

/// Is G pruned: `N mu(x) <= G(x)` on its support.
pub fn is_pruned(g: &Multiset, mu: &[Rat], n: u64) -> bool {
    g.entries()
        .all(|(x, c)| rat_u(n) * &mu[x as usize] <= rat_u(c as u64))
}

/// A multiset cover in canonical (size, lex) order, priced Poissonized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultisetCover {
    elements: Vec<Multiset>,
}

impl MultisetCover {
    pub fn new(mut elements: Vec<Multiset>) -> Self {
        elements.sort_by(|a, b| a.size().cmp(&b.size()).then(a.lex_cmp(b)));
        elements.dedup();
        MultisetCover { elements }
    }

    pub fn elements(&self) -> &[Multiset] {
        &self.elements
    }

    pub fn covers(&self, sets: &[Multiset]) -> bool {
        sets.iter()
            .all(|s| self.elements.iter().any(|t| t.is_subset_of(s)))
    }

    pub fn cost(&self, mu: &[Rat], n: u64) -> Result<ECost, Error> {
        let mut total = ECost::zero();
        for g in &self.elements {
            total += &poissonized_cost(g, mu, n)?;
        }
        Ok(total)
    }

    pub fn lex_cmp(&self, other: &MultisetCover) -> Ordering {
        let mut a = self.elements.iter();
        let mut b = other.elements.iter();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(x), Some(y)) => match x.size().cmp(&y.size()).then(x.lex_cmp(y)) {
                    Ordering::Equal => continue,
                    o => return o,
                },
            }
        }
    }
}

/// Exact minimum Poissonized cover cost over a multiset family, with one
/// optimal cover. Candidates are sub-multisets of members (anything else
/// covers nothing); branch and bound mirrors the set oracle with exact
/// e-polynomial comparisons.
pub fn min_multiset_cover_cost_exact(
    sets: &[Multiset],
    mu: &[Rat],
    n: u64,
    guard: u64,
) -> Result<(ECost, MultisetCover), Error> {
    if sets.is_empty() {
        return Err(Error::InvalidInput("family must be nonempty".into()));
    }
    let pool_size: u64 = sets
        .iter()
        .map(|s| {
            s.entries()
                .map(|(_, c)| c as u64 + 1)
                .product::<u64>()
        })
        .sum();
    if pool_size > guard {
        return Err(Error::TooLarge {
            guard: "multiset-candidate-pool",
            detail: format!("sum prod(S(x)+1) = {pool_size} exceeds {guard}"),
        });
    }
    if sets.len() > 64 {
        return Err(Error::TooLarge {
            guard: "multiset-family-size",
            detail: format!("|F| = {} exceeds 64", sets.len()),
        });
    }

    let mut pool: Vec<Multiset> = Vec::new();
    {
        let mut seen = std::collections::BTreeSet::new();
        for s in sets {
            for t in s.submultisets() {
                let key = format!("{t:?}");
                if seen.insert(key) {
                    pool.push(t);
                }
            }
        }
    }
    pool.sort_by(|a, b| a.size().cmp(&b.size()).then(a.lex_cmp(b)));

    struct Cand {
        mset: Multiset,
        cost: ECost,
        mask: u64,
    }
    let cands: Vec<Cand> = pool
        .into_iter()
        .map(|t| {
            let cost = poissonized_cost(&t, mu, n)?;
            let mut mask = 0u64;
            for (mi, s) in sets.iter().enumerate() {
                if t.is_subset_of(s) {
                    mask |= 1 << mi;
                }
            }
            Ok(Cand { mset: t, cost, mask })
        })
        .collect::<Result<Vec<_>, Error>>()?;

    // cheapest nonempty candidate inside each member, for the disjoint
    // lower bound
    let cheapest_inside: Vec<ECost> = sets
        .iter()
        .map(|s| {
            cands
                .iter()
                .filter(|c| !c.mset.is_empty() && c.mset.is_subset_of(s))
                .map(|c| c.cost.clone())
                .reduce(|a, b| if b.cmp_cost(&a) == Ordering::Less { b } else { a })
                .unwrap_or_else(|| ECost::from_rat(Rat::one()))
        })
        .collect();

    let mut per_member: Vec<Vec<usize>> = vec![Vec::new(); sets.len()];
    for (ci, c) in cands.iter().enumerate() {
        for (mi, lst) in per_member.iter_mut().enumerate() {
            if c.mask >> mi & 1 == 1 {
                lst.push(ci);
            }
        }
    }
    // cheapest-first order, lex tie-break
    for lst in &mut per_member {
        lst.sort_by(|&a, &b| {
            cands[a]
                .cost
                .cmp_cost(&cands[b].cost)
                .then(cands[a].mset.lex_cmp(&cands[b].mset))
        });
    }

    let all_mask: u64 = if sets.len() == 64 { u64::MAX } else { (1u64 << sets.len()) - 1 };

    struct Search<'a> {
        sets: &'a [Multiset],
        cands: &'a [Cand],
        per_member: &'a [Vec<usize>],
        cheapest_inside: &'a [ECost],
        all_mask: u64,
        best_cost: ECost,
        best: Option<MultisetCover>,
    }

    impl Search<'_> {
        fn lower_bound(&self, covered: u64) -> ECost {
            let one = ECost::from_rat(Rat::one());
            let mut bundle = ECost::zero();
            let mut taken = Multiset::empty();
            for (mi, s) in self.sets.iter().enumerate() {
                if covered >> mi & 1 == 1 {
                    continue;
                }
                if s.is_empty() {
                    return one;
                }
                if s.intersect(&taken).is_empty() {
                    bundle += &self.cheapest_inside[mi];
                    taken = taken.plus(s);
                }
            }
            if bundle.cmp_cost(&one) == Ordering::Greater {
                one
            } else {
                bundle
            }
        }

        fn consider(&mut self, cost: &ECost, chosen: &[usize]) {
            let cover =
                MultisetCover::new(chosen.iter().map(|&c| self.cands[c].mset.clone()).collect());
            match cost.cmp_cost(&self.best_cost) {
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

        fn recurse(&mut self, covered: u64, cost: ECost, chosen: &mut Vec<usize>) {
            if covered == self.all_mask {
                self.consider(&cost, chosen);
                return;
            }
            let with_lb = cost.clone() + &self.lower_bound(covered);
            if with_lb.cmp_cost(&self.best_cost) == Ordering::Greater {
                return;
            }
            let mut pick = usize::MAX;
            let mut pick_len = usize::MAX;
            for mi in 0..self.sets.len() {
                if covered >> mi & 1 == 0 && self.per_member[mi].len() < pick_len {
                    pick_len = self.per_member[mi].len();
                    pick = mi;
                }
            }
            for &ci in &self.per_member[pick] {
                if chosen.contains(&ci) {
                    continue;
                }
                let cand = &self.cands[ci];
                let next_cost = cost.clone() + &cand.cost;
                let bound = next_cost.clone() + &self.lower_bound(covered | cand.mask);
                if bound.cmp_cost(&self.best_cost) == Ordering::Greater {
                    continue;
                }
                chosen.push(ci);
                self.recurse(covered | cand.mask, next_cost, chosen);
                chosen.pop();
            }
        }
    }

    let mut search = Search {
        sets,
        cands: &cands,
        per_member: &per_member,
        cheapest_inside: &cheapest_inside,
        all_mask,
        best_cost: ECost::from_rat(Rat::one()),
        best: Some(MultisetCover::new(vec![Multiset::empty()])),
    };
    search.recurse(0, ECost::zero(), &mut Vec::new());
    let best = search.best.expect("incumbent always set");
    debug_assert!(best.covers(sets));
    Ok((search.best_cost, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_from_str;
    use crate::rng::stream_rng;

    fn r(s: &str) -> Rat {
        rat_from_str(s).unwrap()
    }

    fn ms(counts: &[(u32, u32)]) -> Multiset {
        Multiset::from_counts(counts.iter().copied())
    }

    #[test]
    fn algebra_examples() {
        let a = ms(&[(0, 2)]);
        let b = ms(&[(0, 1), (1, 1)]);
        assert_eq!(a.union(&b), ms(&[(0, 2), (1, 1)]));
        assert_eq!(a.intersect(&b), ms(&[(0, 1)]));
        assert_eq!(a.plus(&b), ms(&[(0, 3), (1, 1)]));
        assert_eq!(a.minus(&ms(&[(0, 3)])), Multiset::empty());
        assert!(ms(&[(0, 1)]).is_subset_of(&ms(&[(0, 2)])));
        assert!(!ms(&[(0, 3)]).is_subset_of(&ms(&[(0, 2)])));
        assert_eq!(a.size(), 2);
        assert!(ms(&[]).is_empty());
    }

    #[test]
    fn lex_order_on_expansions() {
        // [0,0] < [0,1] < [0] extended? equal sizes: {0:2} < {0:1, 1:1}
        assert_eq!(ms(&[(0, 2)]).lex_cmp(&ms(&[(0, 1), (1, 1)])), Ordering::Less);
        assert_eq!(ms(&[(1, 2)]).lex_cmp(&ms(&[(0, 1), (1, 1)])), Ordering::Greater);
        // prefix rule: {0:1} < {0:2}
        assert_eq!(ms(&[(0, 1)]).lex_cmp(&ms(&[(0, 2)])), Ordering::Less);
        assert_eq!(ms(&[]).lex_cmp(&ms(&[(0, 1)])), Ordering::Less);
        assert_eq!(ms(&[(0, 1)]).lex_cmp(&ms(&[(0, 1)])), Ordering::Equal);
        // {0:1,2:1} vs {0:1,1:1}: [0,2] > [0,1]
        assert_eq!(
            ms(&[(0, 1), (2, 1)]).lex_cmp(&ms(&[(0, 1), (1, 1)])),
            Ordering::Greater
        );
    }

    #[test]
    fn submultiset_enumeration() {
        let s = ms(&[(0, 2), (1, 1)]);
        let subs = s.submultisets();
        assert_eq!(subs.len(), 6); // (2+1)(1+1)
        assert_eq!(subs[0], Multiset::empty());
        assert!(subs.iter().all(|t| t.is_subset_of(&s)));
        // ascending size then lex
        for w in subs.windows(2) {
            let ord = w[0].size().cmp(&w[1].size()).then(w[0].lex_cmp(&w[1]));
            assert_eq!(ord, Ordering::Less);
        }
    }

    #[test]
    fn composition_enumeration_counts() {
        let g = GroundSet::new(3).unwrap();
        for total in 0..=5u32 {
            let all: Vec<Multiset> = multisets_of_size(&g, total).collect();
            let expect: usize = crate::rational::big_binomial(total as u64 + 2, 2)
                .try_into()
                .unwrap();
            assert_eq!(all.len(), expect, "total={total}");
            assert!(all.iter().all(|m| m.size() == total as u64));
            let mut dedup: Vec<String> = all.iter().map(|m| format!("{m:?}")).collect();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), all.len());
        }
    }

    #[test]
    fn multinomial_law_examples() {
        // X = {a, b} uniform, N = 2
        let mu = vec![r("1/2"), r("1/2")];
        assert_eq!(multinomial_prob(&mu, &ms(&[(0, 2)]), 2).unwrap(), r("1/4"));
        assert_eq!(
            multinomial_prob(&mu, &ms(&[(0, 1), (1, 1)]), 2).unwrap(),
            r("1/2")
        );
        // size mismatch is an error
        assert!(multinomial_prob(&mu, &ms(&[(0, 1)]), 2).is_err());
    }

    #[test]
    fn multinomial_normalizes_exactly() {
        for n_elems in 1..=4u32 {
            let g = GroundSet::new(n_elems).unwrap();
            // a deliberately lopsided rational mu
            let mut mu: Vec<Rat> = (1..=n_elems as u64)
                .map(|i| Rat::new((i as i64).into(), 1.into()))
                .collect();
            let total: Rat = mu.iter().fold(Rat::zero(), |a, m| a + m);
            for m in &mut mu {
                *m /= &total;
            }
            for n_draws in 1..=6u32 {
                let mut sum = Rat::zero();
                for w in multisets_of_size(&g, n_draws) {
                    sum += multinomial_prob(&mu, &w, n_draws as u64).unwrap();
                }
                assert!(sum.is_one(), "|X|={n_elems} N={n_draws}: sum = {sum}");
            }
        }
    }

    #[test]
    fn sampler_matches_law() {
        // degenerate mu always yields {x: N}
        let mut rng = stream_rng(5, 0);
        let m = sample_multiset(&[0.0, 1.0, 0.0], 4, &mut rng);
        assert_eq!(m, ms(&[(1, 4)]));
        // size is always N
        for _ in 0..100 {
            assert_eq!(sample_multiset(&[0.3, 0.3, 0.4], 7, &mut rng).size(), 7);
        }
        // empirical P({a:2}) at N = 2 uniform over two elements: 1/4
        let trials = 100_000u64;
        let mut hits = 0u64;
        for _ in 0..trials {
            if sample_multiset(&[0.5, 0.5], 2, &mut rng) == ms(&[(0, 2)]) {
                hits += 1;
            }
        }
        let sigma = (0.25f64 * 0.75 / trials as f64).sqrt();
        assert!((hits as f64 / trials as f64 - 0.25).abs() < 4.0 * sigma);
    }

    #[test]
    fn poissonized_cost_examples() {
        // empty G prices at 1
        let mu = vec![r("1/2"), r("1/2")];
        let c0 = poissonized_cost(&Multiset::empty(), &mu, 2).unwrap();
        assert_eq!(c0.cmp_rat(&Rat::one()), Ordering::Equal);
        // G = {x:1}, N mu(x) = 1: cost e
        let c1 = poissonized_cost(&ms(&[(0, 1)]), &mu, 2).unwrap();
        assert_eq!(c1, ECost::term(Rat::one(), 1));
        // G = {x:2}, N mu(x) = 1: cost e^2/2, and pruning leaves it alone
        let c2 = poissonized_cost(&ms(&[(0, 2)]), &mu, 2).unwrap();
        assert_eq!(c2, ECost::term(r("1/2"), 2));
        let pruned = prune_cover_element(&ms(&[(0, 2)]), &mu, 2).unwrap();
        assert_eq!(pruned, ms(&[(0, 2)]));
        // log-space agrees loosely
        let lf = poissonized_cost_log(&ms(&[(0, 2)]), &[0.5, 0.5], 2);
        assert!((lf.value() - c2.to_f64()).abs() < 1e-12);
    }

    #[test]
    fn pruning_removes_heavy_mu_and_never_raises_cost() {
        use rand::Rng;
        let mut rng = stream_rng(9, 0);
        for _ in 0..200 {
            let n_elems = rng.gen_range(1..=3u32);
            let mut mu: Vec<Rat> = (0..n_elems)
                .map(|_| Rat::new((rng.gen_range(1..=5) as i64).into(), 1.into()))
                .collect();
            let total: Rat = mu.iter().fold(Rat::zero(), |a, m| a + m);
            for m in &mut mu {
                *m /= &total;
            }
            let n_draws = rng.gen_range(1..=4u64);
            let g = Multiset::from_counts(
                (0..n_elems).filter_map(|x| {
                    let c = rng.gen_range(0..=3u32);
                    (c > 0).then_some((x, c))
                }),
            );
            let pruned = prune_cover_element(&g, &mu, n_draws).unwrap();
            assert!(is_pruned(&pruned, &mu, n_draws));
            assert!(pruned.is_subset_of(&g));
            let before = poissonized_cost(&g, &mu, n_draws).unwrap();
            let after = poissonized_cost(&pruned, &mu, n_draws).unwrap();
            assert_ne!(after.cmp_cost(&before), Ordering::Greater);
        }
    }

    #[test]
    fn stirling_direction_inequality() {
        // cost(G) >= prod (e N mu / G)^G = e^{|G|} prod (N mu / G)^G, with
        // equality iff all counts are at most 1
        let mu = vec![r("1/3"), r("2/3")];
        let cases = [ms(&[(0, 1)]), ms(&[(0, 1), (1, 1)]), ms(&[(1, 3)]), ms(&[(0, 2), (1, 2)])];
        for g in &cases {
            let cost = poissonized_cost(g, &mu, 3).unwrap();
            let mut coeff = Rat::one();
            for (x, c) in g.entries() {
                coeff *= rat_pow(&(rat_u(3) * &mu[x as usize] / rat_u(c as u64)), c as i64);
            }
            let stirling = ECost::term(coeff, g.size() as u32);
            let ord = cost.cmp_cost(&stirling);
            let all_low = g.entries().all(|(_, c)| c <= 1);
            if all_low {
                assert_eq!(ord, Ordering::Equal, "{g:?}");
            } else {
                assert_eq!(ord, Ordering::Greater, "{g:?}");
            }
        }
    }

    #[test]
    fn multiset_cover_oracle_examples() {
        // F = {empty}: only the empty element covers, cost 1
        let mu = vec![r("1/10"), r("9/10")];
        let (cost, cover) =
            min_multiset_cover_cost_exact(&[Multiset::empty()], &mu, 1, 1 << 20).unwrap();
        assert_eq!(cost.cmp_rat(&Rat::one()), Ordering::Equal);
        assert_eq!(cover.elements(), &[Multiset::empty()]);

        // F = {{x:1}} with N mu(x) = 1/10: min(1, e/10) = e/10
        let (cost2, cover2) =
            min_multiset_cover_cost_exact(&[ms(&[(0, 1)])], &mu, 1, 1 << 20).unwrap();
        assert_eq!(cost2, ECost::term(r("1/10"), 1));
        assert_eq!(cover2.elements(), &[ms(&[(0, 1)])]);

        // F = {{x:2}}: candidates price 1, e/10, (e/10)^2/2; the last wins
        let (cost3, cover3) =
            min_multiset_cover_cost_exact(&[ms(&[(0, 2)])], &mu, 1, 1 << 20).unwrap();
        assert_eq!(cost3, ECost::term(r("1/200"), 2));
        assert_eq!(cover3.elements(), &[ms(&[(0, 2)])]);
    }

    #[test]
    fn multiset_cover_oracle_matches_brute_force() {
        use rand::Rng;
        let mut rng = stream_rng(23, 0);
        for trial in 0..30 {
            let n_elems = rng.gen_range(1..=3u32);
            let mut mu: Vec<Rat> = (0..n_elems)
                .map(|_| Rat::new((rng.gen_range(1..=4) as i64).into(), 1.into()))
                .collect();
            let total: Rat = mu.iter().fold(Rat::zero(), |a, m| a + m);
            for m in &mut mu {
                *m /= &total;
            }
            let n_draws = rng.gen_range(1..=3u64);
            let k = rng.gen_range(1..=2usize);
            let sets: Vec<Multiset> = (0..k)
                .map(|_| {
                    Multiset::from_counts((0..n_elems).filter_map(|x| {
                        let c = rng.gen_range(0..=2u32);
                        (c > 0).then_some((x, c))
                    }))
                })
                .collect();
            let (cost, cover) =
                min_multiset_cover_cost_exact(&sets, &mu, n_draws, 1 << 20).unwrap();
            assert!(cover.covers(&sets), "trial {trial}");
            assert_eq!(
                cover.cost(&mu, n_draws).unwrap().cmp_cost(&cost),
                Ordering::Equal
            );
            // brute force over all subsets of the candidate pool
            let mut pool: Vec<Multiset> = Vec::new();
            let mut seen = std::collections::BTreeSet::new();
            for s in &sets {
                for t in s.submultisets() {
                    if seen.insert(format!("{t:?}")) {
                        pool.push(t);
                    }
                }
            }
            assert!(pool.len() <= 18);
            let mut best: Option<ECost> = None;
            for pick in 0u32..(1 << pool.len()) {
                let chosen: Vec<&Multiset> = (0..pool.len())
                    .filter(|i| pick >> i & 1 == 1)
                    .map(|i| &pool[i])
                    .collect();
                if !sets
                    .iter()
                    .all(|s| chosen.iter().any(|t| t.is_subset_of(s)))
                {
                    continue;
                }
                let mut c = ECost::zero();
                for t in &chosen {
                    c += &poissonized_cost(t, &mu, n_draws).unwrap();
                }
                if best.as_ref().map_or(true, |b| c.cmp_cost(b) == Ordering::Less) {
                    best = Some(c);
                }
            }
            assert_eq!(best.unwrap().cmp_cost(&cost), Ordering::Equal, "trial {trial}");
        }
    }
}
