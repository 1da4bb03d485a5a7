//! Disjoint sets over a contiguous universe where only adjacent runs merge.
//!
//! Each set is a contiguous interval; its minimum and maximum are kept on the
//! root so `find_min`/`find_max` answer "start of run" and "end of run"
//! queries directly.

#[derive(Debug, Clone)]
pub struct IntervalUnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    min: Vec<usize>,
    max: Vec<usize>,
    finds: u64,
    unions: u64,
}

impl IntervalUnionFind {
    /// `len` singleton sets `{0}, {1}, ..., {len - 1}`.
    pub fn new(len: usize) -> Self {
        Self {
            parent: (0..len).collect(),
            size: vec![1; len],
            min: (0..len).collect(),
            max: (0..len).collect(),
            finds: 0,
            unions: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Representative of the set holding `x`.
    pub fn find(&mut self, x: usize) -> usize {
        self.finds += 1;
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub fn find_min(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.min[r]
    }

    pub fn find_max(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.max[r]
    }

    pub fn same_set(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Merges the set of `a` with the set of `b`. The sets must be adjacent:
    /// `max(set(a)) + 1 == min(set(b))`.
    pub fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        assert_eq!(self.max[ra] + 1, self.min[rb], "union of non-adjacent runs");
        self.unions += 1;
        let (lo, hi) = (self.min[ra], self.max[rb]);
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        self.min[big] = lo;
        self.max[big] = hi;
    }

    /// Total `find` and `union` calls so far.
    pub fn operations(&self) -> (u64, u64) {
        (self.finds, self.unions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn runs_track_bounds() {
        let mut uf = IntervalUnionFind::new(6);
        uf.union(1, 2);
        uf.union(3, 4);
        assert_eq!((uf.find_min(2), uf.find_max(2)), (1, 2));
        uf.union(2, 3);
        assert_eq!((uf.find_min(4), uf.find_max(1)), (1, 4));
        assert!(uf.same_set(1, 4));
        assert!(!uf.same_set(0, 1));
    }

    #[test]
    #[should_panic(expected = "non-adjacent")]
    fn rejects_gap() {
        let mut uf = IntervalUnionFind::new(4);
        uf.union(0, 2);
    }

    proptest! {
        #[test]
        fn sets_stay_contiguous(merges in proptest::collection::vec(0usize..15, 0..40)) {
            let mut uf = IntervalUnionFind::new(16);
            for m in merges {
                let hi = uf.find_max(m);
                if hi + 1 < 16 {
                    uf.union(m, hi + 1);
                }
            }
            for x in 0..16 {
                let (lo, hi) = (uf.find_min(x), uf.find_max(x));
                prop_assert!(lo <= x && x <= hi);
                for y in lo..=hi {
                    prop_assert!(uf.same_set(x, y));
                }
                if lo > 0 { prop_assert!(!uf.same_set(x, lo - 1)); }
                if hi < 15 { prop_assert!(!uf.same_set(x, hi + 1)); }
            }
        }
    }
}
