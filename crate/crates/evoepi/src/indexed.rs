//! Indexed dynamic set: O(1) insert, remove, membership and uniform sampling
//! over a fixed integer universe. Backed by a swap-remove array plus a
//! position map, the standard structure for aggregate-rate event selection.

use rand::Rng;

const ABSENT: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct IndexedSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

impl IndexedSet {
    pub fn new(universe: usize) -> Self {
        IndexedSet {
            items: Vec::new(),
            pos: vec![ABSENT; universe],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.items.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    #[inline]
    pub fn contains(&self, x: u32) -> bool {
        self.pos[x as usize] != ABSENT
    }

    /// Insert `x`; no-op if already present.
    #[inline]
    pub fn insert(&mut self, x: u32) {
        if self.pos[x as usize] == ABSENT {
            self.pos[x as usize] = self.items.len() as u32;
            self.items.push(x);
        }
    }

    /// Remove `x`; no-op if absent.
    #[inline]
    pub fn remove(&mut self, x: u32) {
        let p = self.pos[x as usize];
        if p == ABSENT {
            return;
        }
        let last = *self.items.last().unwrap();
        self.items[p as usize] = last;
        self.pos[last as usize] = p;
        self.items.pop();
        self.pos[x as usize] = ABSENT;
    }

    /// Uniformly random member. Panics if empty.
    #[inline]
    pub fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        let i = crate::rng::uniform_index(rng.gen::<u64>(), self.items.len());
        self.items[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.items.iter().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    #[test]
    fn insert_remove_sample() {
        let mut s = IndexedSet::new(10);
        for x in [3u32, 7, 1] {
            s.insert(x);
        }
        s.insert(3); // duplicate insert is a no-op
        assert_eq!(s.len(), 3);
        s.remove(7);
        s.remove(7);
        assert_eq!(s.len(), 2);
        assert!(s.contains(1) && s.contains(3) && !s.contains(7));
        let mut rng = rng_from(5, 0);
        for _ in 0..100 {
            let x = s.sample(&mut rng);
            assert!(x == 1 || x == 3);
        }
    }

    #[test]
    fn sampling_is_roughly_uniform() {
        let mut s = IndexedSet::new(4);
        for x in 0..4 {
            s.insert(x);
        }
        let mut rng = rng_from(11, 0);
        let mut counts = [0u32; 4];
        let n = 40_000;
        for _ in 0..n {
            counts[s.sample(&mut rng) as usize] += 1;
        }
        let expect = n as f64 / 4.0;
        let sd = (expect * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - expect).abs() < 4.0 * sd, "counts {counts:?}");
        }
    }
}
