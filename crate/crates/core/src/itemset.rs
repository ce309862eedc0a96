//! Compact bitset of item indices.

use std::fmt;

use serde::{Serialize, Serializer};

const WORD: usize = 64;

/// A set of item indices. Trailing zero words are trimmed so that equal sets
/// compare and hash equal regardless of their history.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemSet {
    words: Vec<u64>,
}

impl ItemSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// The set `{0, 1, .., m-1}`.
    pub fn full(m: usize) -> Self {
        let mut words = vec![u64::MAX; m / WORD];
        if !m.is_multiple_of(WORD) {
            words.push((1u64 << (m % WORD)) - 1);
        }
        Self { words }
    }

    pub fn singleton(item: usize) -> Self {
        let mut s = Self::new();
        s.insert(item);
        s
    }

    /// Builds a set from a bitmask over positions of `universe`.
    pub fn from_mask(universe: &[usize], mask: u64) -> Self {
        universe
            .iter()
            .enumerate()
            .filter(|(pos, _)| mask >> pos & 1 == 1)
            .map(|(_, &item)| item)
            .collect()
    }

    pub fn insert(&mut self, item: usize) -> bool {
        let (w, b) = (item / WORD, item % WORD);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        let had = self.words[w] >> b & 1 == 1;
        self.words[w] |= 1 << b;
        !had
    }

    pub fn remove(&mut self, item: usize) -> bool {
        let (w, b) = (item / WORD, item % WORD);
        if w >= self.words.len() {
            return false;
        }
        let had = self.words[w] >> b & 1 == 1;
        self.words[w] &= !(1 << b);
        self.trim();
        had
    }

    pub fn contains(&self, item: usize) -> bool {
        let (w, b) = (item / WORD, item % WORD);
        self.words.get(w).is_some_and(|x| x >> b & 1 == 1)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Largest item index plus one, or 0 for the empty set.
    pub fn bound(&self) -> usize {
        match self.words.last() {
            None => 0,
            Some(&w) => (self.words.len() - 1) * WORD + (WORD - w.leading_zeros() as usize),
        }
    }

    /// Items in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + b)
            })
        })
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn with(&self, item: usize) -> Self {
        let mut s = self.clone();
        s.insert(item);
        s
    }

    pub fn without(&self, item: usize) -> Self {
        let mut s = self.clone();
        s.remove(item);
        s
    }

    pub fn union(&self, other: &Self) -> Self {
        let n = self.words.len().max(other.words.len());
        let words = (0..n)
            .map(|i| self.word(i) | other.word(i))
            .collect();
        Self { words }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let n = self.words.len().min(other.words.len());
        let mut s = Self {
            words: (0..n).map(|i| self.word(i) & other.word(i)).collect(),
        };
        s.trim();
        s
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut s = Self {
            words: (0..self.words.len())
                .map(|i| self.word(i) & !other.word(i))
                .collect(),
        };
        s.trim();
        s
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        (0..self.words.len()).all(|i| self.word(i) & !other.word(i) == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.intersection(other).is_empty()
    }

    fn word(&self, i: usize) -> u64 {
        self.words.get(i).copied().unwrap_or(0)
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

impl FromIterator<usize> for ItemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = Self::new();
        for item in iter {
            s.insert(item);
        }
        s
    }
}

impl<const N: usize> From<[usize; N]> for ItemSet {
    fn from(items: [usize; N]) -> Self {
        items.into_iter().collect()
    }
}

/// Serialized as an ascending list of item indices.
impl Serialize for ItemSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
