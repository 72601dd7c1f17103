use serde::Serialize;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// A fixed-universe bitset over the vertices `0..host_n` of some host graph.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet {
    words: Vec<u64>,
    host_n: usize,
}

impl VertexSet {
    pub fn empty(host_n: usize) -> Self {
        VertexSet {
            words: vec![0; host_n.div_ceil(WORD)],
            host_n,
        }
    }

    pub fn full(host_n: usize) -> Self {
        let mut s = Self::empty(host_n);
        for (i, w) in s.words.iter_mut().enumerate() {
            let lo = i * WORD;
            let hi = (lo + WORD).min(host_n);
            *w = if hi - lo == WORD {
                u64::MAX
            } else {
                (1u64 << (hi - lo)) - 1
            };
        }
        s
    }

    /// Builds a set from vertex indices, rejecting indices `>= host_n`.
    pub fn from_vertices<I: IntoIterator<Item = usize>>(host_n: usize, vs: I) -> Result<Self> {
        let mut s = Self::empty(host_n);
        for v in vs {
            if v >= host_n {
                return Err(Error::VertexOutOfRange { vertex: v, n: host_n });
            }
            s.insert(v);
        }
        Ok(s)
    }

    pub fn range(host_n: usize, lo: usize, hi: usize) -> Self {
        let mut s = Self::empty(host_n);
        for v in lo..hi.min(host_n) {
            s.insert(v);
        }
        s
    }

    #[inline]
    pub fn host_n(&self) -> usize {
        self.host_n
    }

    #[inline]
    pub fn insert(&mut self, v: usize) {
        debug_assert!(v < self.host_n);
        self.words[v / WORD] |= 1u64 << (v % WORD);
    }

    #[inline]
    pub fn remove(&mut self, v: usize) {
        debug_assert!(v < self.host_n);
        self.words[v / WORD] &= !(1u64 << (v % WORD));
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        v < self.host_n && self.words[v / WORD] & (1u64 << (v % WORD)) != 0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            idx: 0,
            cur: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.difference_with(other);
        s
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn difference_with(&mut self, other: &VertexSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !*b;
        }
    }

    /// `|self ∩ other|` without allocating.
    #[inline]
    pub fn intersection_len(&self, other: &VertexSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

impl std::fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for VertexSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// Ascending iterator over the members of a [`VertexSet`].
pub struct Iter<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let t = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.idx * WORD + t);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = VertexSet::from_vertices(130, [0, 5, 64, 129]).unwrap();
        let b = VertexSet::from_vertices(130, [5, 64, 100]).unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a.intersection(&b).to_vec(), vec![5, 64]);
        assert_eq!(a.union(&b).len(), 5);
        assert_eq!(a.difference(&b).to_vec(), vec![0, 129]);
        assert_eq!(a.intersection_len(&b), 2);
        assert!(!a.is_disjoint(&b));
        assert_eq!(a.first(), Some(0));
        assert!(VertexSet::empty(7).first().is_none());
    }

    #[test]
    fn full_respects_universe() {
        for n in [0, 1, 63, 64, 65, 128, 129] {
            let f = VertexSet::full(n);
            assert_eq!(f.len(), n);
            assert_eq!(f.iter().last(), n.checked_sub(1));
        }
    }

    #[test]
    fn out_of_range_rejected() {
        assert_eq!(
            VertexSet::from_vertices(3, [3]),
            Err(Error::VertexOutOfRange { vertex: 3, n: 3 })
        );
    }
}
