//! Fixed-width bit vectors indexed by canonical world order.

use std::fmt;

use smallvec::SmallVec;

const WORD_BITS: usize = 64;

/// A set of worlds, stored as a bit vector over `0..universe`.
///
/// Frames with up to 128 worlds keep their sets inline, which keeps the
/// valuation enumeration allocation free.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WorldSet {
    universe: usize,
    words: SmallVec<[u64; 2]>,
}

impl WorldSet {
    pub fn empty(universe: usize) -> Self {
        let n_words = universe.div_ceil(WORD_BITS);
        WorldSet {
            universe,
            words: SmallVec::from_elem(0, n_words),
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut set = WorldSet::empty(universe);
        for w in set.words.iter_mut() {
            *w = u64::MAX;
        }
        set.trim();
        set
    }

    pub fn singleton(universe: usize, world: usize) -> Self {
        let mut set = WorldSet::empty(universe);
        set.insert(world);
        set
    }

    /// Builds a set from the low `universe` bits of `mask` (universe ≤ 64).
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        assert!(universe <= WORD_BITS, "from_mask supports at most 64 worlds");
        let mut set = WorldSet::empty(universe);
        if universe > 0 {
            set.words[0] = mask;
            set.trim();
        }
        set
    }

    /// Returns the low word; only meaningful for universes of at most 64 worlds.
    pub fn to_mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn from_worlds<I: IntoIterator<Item = usize>>(universe: usize, worlds: I) -> Self {
        let mut set = WorldSet::empty(universe);
        for w in worlds {
            set.insert(w);
        }
        set
    }

    fn trim(&mut self) {
        let rem = self.universe % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains(&self, world: usize) -> bool {
        world < self.universe && self.words[world / WORD_BITS] & (1 << (world % WORD_BITS)) != 0
    }

    #[inline]
    pub fn insert(&mut self, world: usize) {
        assert!(world < self.universe, "world {world} outside universe {}", self.universe);
        self.words[world / WORD_BITS] |= 1 << (world % WORD_BITS);
    }

    #[inline]
    pub fn remove(&mut self, world: usize) {
        if world < self.universe {
            self.words[world / WORD_BITS] &= !(1 << (world % WORD_BITS));
        }
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union_with(&mut self, other: &WorldSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn intersect_with(&mut self, other: &WorldSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    pub fn difference_with(&mut self, other: &WorldSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !*b;
        }
    }

    pub fn union(&self, other: &WorldSet) -> WorldSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn intersection(&self, other: &WorldSet) -> WorldSet {
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    pub fn difference(&self, other: &WorldSet) -> WorldSet {
        let mut out = self.clone();
        out.difference_with(other);
        out
    }

    pub fn complement(&self) -> WorldSet {
        let mut out = self.clone();
        for w in out.words.iter_mut() {
            *w = !*w;
        }
        out.trim();
        out
    }

    #[inline]
    pub fn intersects(&self, other: &WorldSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// True when `self ∩ a ∩ b` is nonempty, without materialising the intersection.
    #[inline]
    pub fn intersects_both(&self, a: &WorldSet, b: &WorldSet) -> bool {
        self.words
            .iter()
            .zip(&a.words)
            .zip(&b.words)
            .any(|((x, y), z)| x & y & z != 0)
    }

    pub fn is_subset(&self, other: &WorldSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * WORD_BITS + bit);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

impl<'a> IntoIterator for &'a WorldSet {
    type Item = usize;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

impl fmt::Debug for WorldSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
