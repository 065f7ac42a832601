use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// A scored seed ordered by ascending loss, ties by ascending seed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Entry {
    pub loss: f64,
    pub seed: u64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.loss.total_cmp(&other.loss).then(self.seed.cmp(&other.seed))
    }
}

/// The `k` smallest entries seen. Because the order is total, the retained
/// set does not depend on insertion order, so partial results merge
/// deterministically.
#[derive(Debug, Clone)]
pub(crate) struct TopK {
    k: usize,
    heap: BinaryHeap<Entry>,
}

impl TopK {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    #[inline]
    pub fn push(&mut self, e: Entry) {
        if self.heap.len() < self.k {
            self.heap.push(e);
        } else if let Some(mut worst) = self.heap.peek_mut() {
            if e < *worst {
                *worst = e;
            }
        }
    }

    pub fn merge(&mut self, other: TopK) {
        for e in other.heap {
            self.push(e);
        }
    }

    pub fn into_sorted(self) -> Vec<Entry> {
        self.heap.into_sorted_vec()
    }
}
