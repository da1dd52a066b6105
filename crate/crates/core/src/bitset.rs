//! Fixed-capacity bitset over element ids.

use std::fmt;

type Block = u64;
const BITS: usize = Block::BITS as usize;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Bitset {
    len: usize,
    blocks: Vec<Block>,
}

impl Bitset {
    pub fn new(len: usize) -> Self {
        Bitset {
            len,
            blocks: vec![0; len.div_ceil(BITS)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::new(len);
        for b in s.blocks.iter_mut() {
            *b = !0;
        }
        s.trim();
        s
    }

    pub fn from_ids<I: IntoIterator<Item = u32>>(len: usize, ids: I) -> Self {
        let mut s = Self::new(len);
        for i in ids {
            s.insert(i);
        }
        s
    }

    fn trim(&mut self) {
        let extra = self.blocks.len() * BITS - self.len;
        if extra > 0 {
            if let Some(last) = self.blocks.last_mut() {
                *last &= !0 >> extra;
            }
        }
    }

    /// Capacity (the group order), not the number of members.
    #[inline]
    pub fn capacity(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn insert(&mut self, i: u32) -> bool {
        let i = i as usize;
        debug_assert!(i < self.len, "id {i} out of range {}", self.len);
        let (b, o) = (i / BITS, i % BITS);
        let was = self.blocks[b] & (1 << o) != 0;
        self.blocks[b] |= 1 << o;
        !was
    }

    #[inline]
    pub fn remove(&mut self, i: u32) {
        let i = i as usize;
        self.blocks[i / BITS] &= !(1 << (i % BITS));
    }

    #[inline]
    pub fn contains(&self, i: u32) -> bool {
        let i = i as usize;
        i < self.len && self.blocks[i / BITS] & (1 << (i % BITS)) != 0
    }

    pub fn count(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn union_with(&mut self, other: &Bitset) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= *b;
        }
    }

    pub fn intersect_with(&mut self, other: &Bitset) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= *b;
        }
    }

    pub fn difference_with(&mut self, other: &Bitset) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= !*b;
        }
    }

    pub fn union(&self, other: &Bitset) -> Bitset {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &Bitset) -> Bitset {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn intersection_count(&self, other: &Bitset) -> usize {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset(&self, other: &Bitset) -> bool {
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Bitset) -> bool {
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & b == 0)
    }

    /// First member of `self` missing from `other`, if any.
    pub fn first_not_in(&self, other: &Bitset) -> Option<u32> {
        for (bi, (a, b)) in self.blocks.iter().zip(&other.blocks).enumerate() {
            let d = a & !b;
            if d != 0 {
                return Some((bi * BITS + d.trailing_zeros() as usize) as u32);
            }
        }
        None
    }

    pub fn first(&self) -> Option<u32> {
        self.iter().next()
    }

    pub fn iter(&self) -> Ones<'_> {
        Ones {
            blocks: &self.blocks,
            block: 0,
            cur: self.blocks.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }
}

pub struct Ones<'a> {
    blocks: &'a [Block],
    block: usize,
    cur: Block,
}

impl Iterator for Ones<'_> {
    type Item = u32;

    #[inline]
    fn next(&mut self) -> Option<u32> {
        loop {
            if self.cur != 0 {
                let t = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some((self.block * BITS + t) as u32);
            }
            self.block += 1;
            if self.block >= self.blocks.len() {
                return None;
            }
            self.cur = self.blocks[self.block];
        }
    }
}

impl fmt::Debug for Bitset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_iter_count() {
        let mut s = Bitset::new(130);
        for i in [0, 5, 63, 64, 129] {
            assert!(s.insert(i));
        }
        assert!(!s.insert(5));
        assert_eq!(s.to_vec(), vec![0, 5, 63, 64, 129]);
        assert_eq!(s.count(), 5);
        assert!(!s.contains(130));
    }

    #[test]
    fn full_is_trimmed() {
        let s = Bitset::full(70);
        assert_eq!(s.count(), 70);
        assert_eq!(s.iter().last(), Some(69));
    }

    #[test]
    fn subset_and_difference() {
        let a = Bitset::from_ids(100, [1, 2, 3]);
        let b = Bitset::from_ids(100, [1, 2, 3, 99]);
        assert!(a.is_subset(&b));
        assert!(!b.is_subset(&a));
        assert_eq!(b.first_not_in(&a), Some(99));
        assert_eq!(a.first_not_in(&b), None);
        assert_eq!(a.intersection_count(&b), 3);
    }
}
