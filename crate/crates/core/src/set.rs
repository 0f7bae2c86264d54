//! Subsets of a finite universe.
//!
//! Items are 0-based internally: item `i` of the user-facing 1-based numbering
//! lives at bit `i - 1`. [`ItemSet`] is the single-word representation used by
//! every exhaustive routine; [`LargeSet`] backs the learner and the hardness
//! instance, whose universes are far wider than a machine word.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Widest universe an [`ItemSet`] can describe.
pub const MAX_ITEMS: usize = 64;

/// Anything that can answer "is item `i` in this set?".
pub trait Members {
    fn universe(&self) -> usize;
    fn contains(&self, item: usize) -> bool;

    fn members(&self) -> Vec<usize> {
        (0..self.universe()).filter(|&i| self.contains(i)).collect()
    }

    fn len(&self) -> usize {
        self.members().len()
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub(crate) fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A subset of `{0, .., n-1}` stored in one 64-bit word.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ItemSet {
    mask: u64,
    n: u8,
}

impl ItemSet {
    pub fn new(mask: u64, n: usize) -> Result<Self> {
        if n > MAX_ITEMS {
            return Err(Error::Capacity {
                what: "ItemSet",
                n,
                limit: MAX_ITEMS,
            });
        }
        if mask & !low_mask(n) != 0 {
            return Err(Error::Domain(format!(
                "mask {mask:#x} has bits outside a universe of {n} items"
            )));
        }
        Ok(Self { mask, n: n as u8 })
    }

    /// Caller guarantees `mask` fits in `n` bits and `n <= 64`.
    #[inline]
    pub(crate) fn from_raw(mask: u64, n: usize) -> Self {
        debug_assert!(n <= MAX_ITEMS && mask & !low_mask(n) == 0);
        Self { mask, n: n as u8 }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_raw(0, n)
    }

    pub fn full(n: usize) -> Self {
        Self::from_raw(low_mask(n), n)
    }

    pub fn from_items(n: usize, items: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = 0u64;
        for i in items {
            if i >= n {
                return Err(Error::Domain(format!("item index {i} outside universe of {n}")));
            }
            mask |= 1 << i;
        }
        Self::new(mask, n)
    }

    #[inline]
    pub fn mask(self) -> u64 {
        self.mask
    }

    #[inline]
    pub fn n(self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    #[inline]
    pub fn contains(self, item: usize) -> bool {
        item < self.n() && self.mask >> item & 1 == 1
    }

    #[inline]
    pub fn complement(self) -> Self {
        Self::from_raw(!self.mask & low_mask(self.n()), self.n())
    }

    #[inline]
    pub fn union(self, other: Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self::from_raw(self.mask | other.mask, self.n())
    }

    #[inline]
    pub fn intersection(self, other: Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self::from_raw(self.mask & other.mask, self.n())
    }

    #[inline]
    pub fn is_subset(self, other: Self) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.mask & other.mask == 0
    }

    pub fn items(self) -> impl Iterator<Item = usize> {
        let mut m = self.mask;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(i)
            }
        })
    }

    pub fn to_large(self) -> LargeSet {
        LargeSet::from_items(self.n(), self.items())
    }

    /// Renders as a 1-based item list, e.g. `{1,3,5}`.
    pub fn to_item_list(self) -> String {
        let parts: Vec<String> = self.items().map(|i| (i + 1).to_string()).collect();
        format!("{{{}}}", parts.join(","))
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.to_item_list(), self.n)
    }
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_item_list())
    }
}

impl Members for ItemSet {
    fn universe(&self) -> usize {
        self.n()
    }
    fn contains(&self, item: usize) -> bool {
        ItemSet::contains(*self, item)
    }
    fn members(&self) -> Vec<usize> {
        self.items().collect()
    }
    fn len(&self) -> usize {
        ItemSet::len(*self)
    }
}

/// A subset of an arbitrarily wide universe.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LargeSet {
    words: Vec<u64>,
    n: usize,
}

impl LargeSet {
    pub fn empty(n: usize) -> Self {
        Self {
            words: vec![0; n.div_ceil(64)],
            n,
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for w in 0..s.words.len() {
            s.words[w] = low_mask(n - 64 * w);
        }
        s
    }

    pub fn from_items(n: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n);
        for i in items {
            s.insert(i);
        }
        s
    }

    pub fn from_fn(n: usize, mut pred: impl FnMut(usize) -> bool) -> Self {
        Self::from_items(n, (0..n).filter(|&i| pred(i)).collect::<Vec<_>>())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn insert(&mut self, item: usize) {
        assert!(item < self.n, "item {item} outside universe of {}", self.n);
        self.words[item / 64] |= 1 << (item % 64);
    }

    pub fn contains(&self, item: usize) -> bool {
        item < self.n && self.words[item / 64] >> (item % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn complement(&self) -> Self {
        let words = self
            .words
            .iter()
            .enumerate()
            .map(|(w, &x)| !x & low_mask(self.n - 64 * w))
            .collect();
        Self { words, n: self.n }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        Self { words, n: self.n }
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect();
        Self { words, n: self.n }
    }

    pub fn items(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut m = word;
            std::iter::from_fn(move || {
                if m == 0 {
                    None
                } else {
                    let i = m.trailing_zeros() as usize;
                    m &= m - 1;
                    Some(64 * w + i)
                }
            })
        })
    }

    /// Restricts to the first `n` items.
    pub fn truncate(&self, n: usize) -> Self {
        Self::from_items(n, self.items().filter(|&i| i < n).collect::<Vec<_>>())
    }

    /// Re-embeds into a universe of `n >= self.n()` items.
    pub fn widen(&self, n: usize) -> Self {
        assert!(n >= self.n);
        Self::from_items(n, self.items().collect::<Vec<_>>())
    }

    pub fn to_item_set(&self) -> Result<ItemSet> {
        if self.n > MAX_ITEMS {
            return Err(Error::Capacity {
                what: "ItemSet",
                n: self.n,
                limit: MAX_ITEMS,
            });
        }
        Ok(ItemSet::from_raw(self.words.first().copied().unwrap_or(0), self.n))
    }
}

impl fmt::Debug for LargeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.items().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}#{}", parts.join(","), self.n)
    }
}

impl Members for LargeSet {
    fn universe(&self) -> usize {
        self.n
    }
    fn contains(&self, item: usize) -> bool {
        LargeSet::contains(self, item)
    }
    fn members(&self) -> Vec<usize> {
        self.items().collect()
    }
    fn len(&self) -> usize {
        LargeSet::len(self)
    }
}

/// A multiset of sets over one universe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collection {
    n: usize,
    sets: Vec<ItemSet>,
}

impl Collection {
    pub fn new(n: usize, sets: Vec<ItemSet>) -> Result<Self> {
        if let Some(bad) = sets.iter().find(|s| s.n() != n) {
            return Err(Error::WidthMismatch {
                expected: n,
                found: bad.n(),
            });
        }
        Ok(Self { n, sets })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sets(&self) -> &[ItemSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn complement(&self) -> Self {
        Self {
            n: self.n,
            sets: self.sets.iter().map(|s| s.complement()).collect(),
        }
    }

    /// Number of member sets containing each item.
    pub fn item_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n];
        for s in &self.sets {
            for i in s.items() {
                counts[i] += 1;
            }
        }
        counts
    }

    /// `Some(count)` when every item appears in exactly `count` sets.
    pub fn uniform_frequency(&self) -> Option<usize> {
        let counts = self.item_counts();
        let first = *counts.first()?;
        counts.iter().all(|&c| c == first).then_some(first)
    }

    /// Average of `m - f(S)` over the collection.
    pub fn average_deficit(&self, m: f64, f: impl Fn(ItemSet) -> f64) -> f64 {
        self.sets.iter().map(|&s| m - f(s)).sum::<f64>() / self.sets.len() as f64
    }

    /// Average of `f(S) + m` over the collection.
    pub fn average_surplus(&self, m: f64, f: impl Fn(ItemSet) -> f64) -> f64 {
        self.sets.iter().map(|&s| f(s) + m).sum::<f64>() / self.sets.len() as f64
    }
}
