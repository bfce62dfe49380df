//! Fixed-width bit vectors used for states, operator conditions and
//! ordering-matrix rows.

use std::fmt;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet { words: vec![0; len.div_ceil(WORD)], len }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = BitSet::new(len);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Number of addressable bits.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD] & (1 << (i % WORD)) != 0
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD] &= !(1 << (i % WORD));
    }

    pub fn set(&mut self, i: usize, value: bool) {
        if value {
            self.insert(i)
        } else {
            self.remove(i)
        }
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &BitSet) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn union_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn difference_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    /// Indices of set bits in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + tz)
            })
        })
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.ones()).finish()
    }
}

impl fmt::Display for BitSet {
    /// Bit string, lowest index first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.contains(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn word_boundaries() {
        let mut s = BitSet::new(130);
        for i in [0, 63, 64, 127, 128, 129] {
            s.insert(i);
        }
        assert_eq!(s.ones().collect::<Vec<_>>(), vec![0, 63, 64, 127, 128, 129]);
        s.remove(64);
        assert!(!s.contains(64));
        assert_eq!(s.count(), 5);
    }

    #[test]
    fn zero_width() {
        let s = BitSet::new(0);
        assert!(s.is_empty());
        assert!(s.is_subset(&BitSet::new(0)));
        assert_eq!(s.to_string(), "");
    }

    fn set_strategy() -> impl Strategy<Value = (BTreeSet<usize>, BTreeSet<usize>)> {
        (proptest::collection::btree_set(0usize..150, 0..40), proptest::collection::btree_set(0usize..150, 0..40))
    }

    proptest! {
        #[test]
        fn matches_set_algebra((a, b) in set_strategy()) {
            let x = BitSet::from_indices(150, a.iter().copied());
            let y = BitSet::from_indices(150, b.iter().copied());
            prop_assert_eq!(x.is_subset(&y), a.is_subset(&b));
            prop_assert_eq!(x.is_disjoint(&y), a.is_disjoint(&b));
            let mut u = x.clone();
            u.union_with(&y);
            prop_assert_eq!(u.ones().collect::<BTreeSet<_>>(), a.union(&b).copied().collect());
            let mut d = x.clone();
            d.difference_with(&y);
            prop_assert_eq!(d.ones().collect::<BTreeSet<_>>(), a.difference(&b).copied().collect());
        }
    }
}
