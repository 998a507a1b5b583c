//! Ground sets and subsets as u64 bitmasks.
//!
//! Elements are dense ids `0..n-1`. Every exhaustive enumeration in the crate
//! is guarded well below 64 elements, so a single word suffices.

use crate::error::Error;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A finite ground set of `n` elements with ids `0..n-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroundSet {
    n: u32,
}

impl GroundSet {
    pub fn new(n: u32) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::InvalidInput("ground set must be nonempty".into()));
        }
        if n > 64 {
            return Err(Error::TooLarge {
                guard: "ground-set-width",
                detail: format!("n = {n} exceeds 64"),
            });
        }
        Ok(GroundSet { n })
    }

    pub fn size(&self) -> u32 {
        self.n
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.n
    }

    pub fn full_mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    pub fn full_set(&self) -> Subset {
        Subset { bits: self.full_mask() }
    }

    /// All subsets, empty set first, in increasing mask order.
    pub fn all_subsets(&self) -> impl Iterator<Item = Subset> {
        (0..=self.full_mask()).map(|bits| Subset { bits })
    }

    /// All subsets of size exactly `w`, in lexicographic element-id order.
    pub fn subsets_of_size(&self, w: u32) -> Vec<Subset> {
        let n = self.n;
        let mut out = Vec::new();
        if w > n {
            return out;
        }
        if w == 0 {
            out.push(Subset::empty());
            return out;
        }
        // Gosper-style enumeration restricted to `n` bits gives ascending mask
        // order; we sort into element-id lex order afterward.
        let mut ids: Vec<u32> = (0..w).collect();
        loop {
            let mut bits = 0u64;
            for &i in &ids {
                bits |= 1 << i;
            }
            out.push(Subset { bits });
            // next combination in lex order
            let mut i = w as usize;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if ids[i] != n - (w - i as u32) {
                    break;
                }
                if i == 0 {
                    return out;
                }
            }
            ids[i] += 1;
            for j in i + 1..w as usize {
                ids[j] = ids[j - 1] + 1;
            }
        }
    }
}

/// A subset of a ground set, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Subset {
    bits: u64,
}

impl Subset {
    pub fn empty() -> Self {
        Subset { bits: 0 }
    }

    pub fn from_bits(bits: u64) -> Self {
        Subset { bits }
    }

    pub fn from_ids<I: IntoIterator<Item = u32>>(ids: I) -> Self {
        let mut bits = 0u64;
        for i in ids {
            debug_assert!(i < 64);
            bits |= 1 << i;
        }
        Subset { bits }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, id: u32) -> bool {
        self.bits >> id & 1 == 1
    }

    pub fn insert(&mut self, id: u32) {
        self.bits |= 1 << id;
    }

    pub fn remove(&mut self, id: u32) {
        self.bits &= !(1 << id);
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn union(&self, other: &Subset) -> Subset {
        Subset { bits: self.bits | other.bits }
    }

    pub fn intersect(&self, other: &Subset) -> Subset {
        Subset { bits: self.bits & other.bits }
    }

    pub fn difference(&self, other: &Subset) -> Subset {
        Subset { bits: self.bits & !other.bits }
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        (0..64).filter(move |i| self.contains(*i))
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.ids().collect()
    }

    /// All subsets of `self`, ascending by submask value.
    pub fn subsets(&self) -> SubmaskIter {
        SubmaskIter { mask: self.bits, cur: 0, done: false }
    }

    /// Lexicographic order on the sorted element-id sequence. For equal
    /// cardinalities this is the tie-break order used everywhere; it is NOT
    /// the numeric order on masks ({0,3} precedes {1,2}).
    pub fn lex_cmp(&self, other: &Subset) -> std::cmp::Ordering {
        let mut a = self.ids();
        let mut b = other.ids();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return std::cmp::Ordering::Equal,
                (None, Some(_)) => return std::cmp::Ordering::Less,
                (Some(_), None) => return std::cmp::Ordering::Greater,
                (Some(x), Some(y)) => {
                    if x != y {
                        return x.cmp(&y);
                    }
                }
            }
        }
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, id) in self.ids().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "}}")
    }
}

/// Iterates submasks of a fixed mask, ascending.
pub struct SubmaskIter {
    mask: u64,
    cur: u64,
    done: bool,
}

impl Iterator for SubmaskIter {
    type Item = Subset;
    fn next(&mut self) -> Option<Subset> {
        if self.done {
            return None;
        }
        let out = Subset { bits: self.cur };
        if self.cur == self.mask {
            self.done = true;
        } else {
            self.cur = (self.cur.wrapping_sub(self.mask)) & self.mask;
        }
        Some(out)
    }
}

/// Subsets of `base` grouped by ascending cardinality, lex-id order within a
/// cardinality class.
pub fn subsets_by_cardinality(base: &Subset) -> Vec<Subset> {
    let mut all: Vec<Subset> = base.subsets().collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then(a.lex_cmp(b)));
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_set_bounds() {
        assert!(GroundSet::new(0).is_err());
        assert!(GroundSet::new(65).is_err());
        let g = GroundSet::new(4).unwrap();
        assert_eq!(g.full_mask(), 0b1111);
        assert_eq!(g.all_subsets().count(), 16);
    }

    #[test]
    fn subset_relations() {
        let a = Subset::from_ids([1]);
        let b = Subset::from_ids([1, 2]);
        assert!(a.is_subset_of(&b));
        assert!(!b.is_subset_of(&a));
        assert!(Subset::empty().is_subset_of(&Subset::empty()));
        let c = Subset::from_ids([2]);
        let d = Subset::from_ids([1]);
        assert!(!c.is_subset_of(&d));
        assert_eq!(b.difference(&a), Subset::from_ids([2]));
        assert_eq!(b.intersect(&c), c);
        assert_eq!(a.union(&c), b);
    }

    #[test]
    fn submask_iteration_is_complete() {
        let s = Subset::from_ids([0, 2, 5]);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|t| t.is_subset_of(&s)));
        assert_eq!(subs[0], Subset::empty());
        assert_eq!(subs[7], s);
    }

    #[test]
    fn lex_order_differs_from_mask_order() {
        let a = Subset::from_ids([0, 3]); // mask 9
        let b = Subset::from_ids([1, 2]); // mask 6
        assert_eq!(a.lex_cmp(&b), std::cmp::Ordering::Less);
        assert!(a.bits() > b.bits());
    }

    #[test]
    fn size_enumeration_counts() {
        let g = GroundSet::new(6).unwrap();
        assert_eq!(g.subsets_of_size(0).len(), 1);
        assert_eq!(g.subsets_of_size(2).len(), 15);
        assert_eq!(g.subsets_of_size(6).len(), 1);
        assert_eq!(g.subsets_of_size(7).len(), 0);
        // lex order: first pair is {0,1}, last is {4,5}
        let pairs = g.subsets_of_size(2);
        assert_eq!(pairs[0], Subset::from_ids([0, 1]));
        assert_eq!(pairs[14], Subset::from_ids([4, 5]));
    }

    #[test]
    fn cardinality_grouping() {
        let base = Subset::from_ids([0, 1, 3]);
        let ordered = subsets_by_cardinality(&base);
        assert_eq!(ordered[0], Subset::empty());
        assert_eq!(ordered[1], Subset::from_ids([0]));
        assert_eq!(ordered[2], Subset::from_ids([1]));
        assert_eq!(ordered[3], Subset::from_ids([3]));
        assert_eq!(ordered[4], Subset::from_ids([0, 1]));
        assert_eq!(ordered[5], Subset::from_ids([0, 3]));
        assert_eq!(ordered[6], Subset::from_ids([1, 3]));
        assert_eq!(ordered[7], base);
    }
}
