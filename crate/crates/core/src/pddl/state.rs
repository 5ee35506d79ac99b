use std::fmt;

use serde::{Deserialize, Serialize};

/// Dense index into a task's fact table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FactId(pub u32);

impl FactId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for FactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Index into a task's ground action list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionId(pub u32);

impl ActionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A set of true facts, stored as a fixed-width bitset over the fact table.
///
/// Equality and hashing are over the bit pattern, which is canonical for a
/// given task.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    bits: Box<[u64]>,
}

impl State {
    pub fn empty(num_facts: usize) -> Self {
        State {
            bits: vec![0; num_facts.div_ceil(64)].into_boxed_slice(),
        }
    }

    pub fn from_facts(num_facts: usize, facts: impl IntoIterator<Item = FactId>) -> Self {
        let mut s = State::empty(num_facts);
        for f in facts {
            s.insert(f);
        }
        s
    }

    #[inline]
    pub fn contains(&self, f: FactId) -> bool {
        let i = f.index();
        self.bits
            .get(i / 64)
            .is_some_and(|w| w & (1 << (i % 64)) != 0)
    }

    #[inline]
    pub fn insert(&mut self, f: FactId) {
        let i = f.index();
        self.bits[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, f: FactId) {
        let i = f.index();
        self.bits[i / 64] &= !(1 << (i % 64));
    }

    /// Capacity in facts (a multiple of 64).
    pub fn capacity(&self) -> usize {
        self.bits.len() * 64
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|w| *w == 0)
    }

    pub fn is_superset_of(&self, facts: &[FactId]) -> bool {
        facts.iter().all(|f| self.contains(*f))
    }

    /// Facts in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = FactId> + '_ {
        self.bits.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros();
                w &= w - 1;
                Some(FactId(wi as u32 * 64 + b))
            })
        })
    }

    pub fn to_vec(&self) -> Vec<FactId> {
        self.iter().collect()
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|x| x.0)).finish()
    }
}
