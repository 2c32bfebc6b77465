//! Fixed-width bitmap over a finite index range, backing membership sets.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut b = BitSet::new(len);
        for i in indices {
            b.set(i);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn unset(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn intersection_count(&self, other: &BitSet) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// self |= other << shift; requires other.len() + shift <= self.len().
    pub fn or_shifted(&mut self, other: &BitSet, shift: usize) {
        assert!(other.len + shift <= self.len);
        let wshift = shift / 64;
        let bshift = shift % 64;
        for (i, &w) in other.words.iter().enumerate() {
            if w == 0 {
                continue;
            }
            if bshift == 0 {
                self.words[i + wshift] |= w;
            } else {
                self.words[i + wshift] |= w << bshift;
                let hi = w >> (64 - bshift);
                if hi != 0 {
                    self.words[i + wshift + 1] |= hi;
                }
            }
        }
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            std::iter::successors(
                if w == 0 { None } else { Some(w) },
                |w| {
                    let next = w & (w - 1);
                    if next == 0 {
                        None
                    } else {
                        Some(next)
                    }
                },
            )
            .map(move |w| wi * 64 + w.trailing_zeros() as usize)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_count() {
        let mut b = BitSet::new(130);
        assert!(b.is_empty());
        for i in [0, 1, 63, 64, 65, 129] {
            b.set(i);
        }
        assert_eq!(b.count(), 6);
        assert!(b.get(64));
        assert!(!b.get(2));
        b.unset(64);
        assert_eq!(b.count(), 5);
        assert!(!b.get(64));
    }

    #[test]
    fn iter_ones_matches_membership() {
        let indices = [3usize, 5, 63, 64, 100, 127, 128, 199];
        let b = BitSet::from_indices(200, indices);
        assert_eq!(b.iter_ones().collect::<Vec<_>>(), indices.to_vec());
    }

    #[test]
    fn intersection_counts() {
        let a = BitSet::from_indices(100, 0..50);
        let b = BitSet::from_indices(100, 25..75);
        assert_eq!(a.intersection_count(&b), 25);
    }

    #[test]
    fn or_shifted_matches_per_bit() {
        let src = BitSet::from_indices(70, [0, 1, 40, 63, 64, 69]);
        for shift in [0usize, 1, 17, 63, 64, 65, 130] {
            let mut dst = BitSet::from_indices(200, [5]);
            dst.or_shifted(&src, shift);
            let mut expect = BitSet::from_indices(200, [5]);
            for i in src.iter_ones() {
                expect.set(i + shift);
            }
            assert_eq!(dst, expect, "shift {shift}");
        }
    }
}
