//! Fixed-width state sets.
//!
//! Beliefs, regions and level sets are all subsets of a finite, densely
//! numbered state space, so they are stored as bitsets sized to that space.
//! Equality, ordering and hashing only look at membership, which makes a
//! `StateSet` usable directly as (part of) an interning key.

use fixedbitset::FixedBitSet;
use std::fmt;

use crate::mdp::StateId;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct StateSet(FixedBitSet);

impl StateSet {
    /// Empty set over a universe of `universe` states.
    pub fn empty(universe: usize) -> Self {
        StateSet(FixedBitSet::with_capacity(universe))
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        StateSet(bits)
    }

    pub fn singleton(universe: usize, s: StateId) -> Self {
        let mut set = Self::empty(universe);
        set.insert(s);
        set
    }

    pub fn from_ids<I: IntoIterator<Item = StateId>>(universe: usize, ids: I) -> Self {
        let mut set = Self::empty(universe);
        for s in ids {
            set.insert(s);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, s: StateId) {
        self.0.insert(s);
    }

    pub fn remove(&mut self, s: StateId) {
        self.0.set(s, false);
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.0.contains(s)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    /// Members in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.0.ones()
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &StateSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn intersects(&self, other: &StateSet) -> bool {
        !self.0.is_disjoint(&other.0)
    }

    pub fn union_with(&mut self, other: &StateSet) {
        self.0.union_with(&other.0);
    }

    pub fn intersect_with(&mut self, other: &StateSet) {
        self.0.intersect_with(&other.0);
    }

    pub fn difference_with(&mut self, other: &StateSet) {
        self.0.difference_with(&other.0);
    }

    pub fn intersection(&self, other: &StateSet) -> StateSet {
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn difference(&self, other: &StateSet) -> StateSet {
        let mut out = self.clone();
        out.difference_with(other);
        out
    }

    pub fn to_vec(&self) -> Vec<StateId> {
        self.iter().collect()
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_membership() {
        let mut s = StateSet::empty(70);
        assert!(s.is_empty());
        s.insert(3);
        s.insert(65);
        assert_eq!(s.len(), 2);
        assert_eq!(s.to_vec(), vec![3, 65]);
        s.remove(3);
        assert!(!s.contains(3));
        assert_eq!(StateSet::full(5).len(), 5);
    }

    #[test]
    fn equality_ignores_insertion_order() {
        let a = StateSet::from_ids(10, [1, 4, 7]);
        let b = StateSet::from_ids(10, [7, 1, 4]);
        assert_eq!(a, b);
        assert!(StateSet::from_ids(10, [1]).is_subset(&a));
        assert!(a.is_disjoint(&StateSet::from_ids(10, [0, 2])));
    }
}
