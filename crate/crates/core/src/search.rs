//! Pieces shared by the two branch-and-bound searches over `b`.

use std::cmp::{Ordering, Reverse};

pub const INT_TOL: f64 = 1e-6;

pub(crate) fn is_integral(b: &[f64]) -> bool {
    b.iter().all(|v| (v - v.round()).abs() <= INT_TOL)
}

/// Smallest integer objective compatible with an LP bound.
pub(crate) fn ceil_bound(bound: f64) -> usize {
    (bound - INT_TOL).ceil().max(0.0) as usize
}

/// Index whose value is closest to one half; ties to the lowest index.
pub(crate) fn most_fractional(b: &[f64]) -> usize {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (j, &v) in b.iter().enumerate() {
        if (v - v.round()).abs() <= INT_TOL {
            continue;
        }
        let dist = (v - 0.5).abs();
        if dist < best_dist {
            best_dist = dist;
            best = j;
        }
    }
    best
}

/// Open node with per-indicator bounds. Heap order: smallest rounded-up
/// bound, then deepest, then oldest.
#[derive(Debug)]
pub(crate) struct Node {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub bound: f64,
    pub depth: usize,
    pub id: u64,
}

impl Node {
    pub fn root(m: usize) -> Self {
        Node {
            lo: vec![0.0; m],
            hi: vec![1.0; m],
            bound: 0.0,
            depth: 0,
            id: 0,
        }
    }

    /// Child with `b_j` fixed to `value`.
    pub fn child(&self, j: usize, value: f64, bound: f64, id: u64) -> Self {
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        lo[j] = value;
        hi[j] = value;
        Node {
            lo,
            hi,
            bound,
            depth: self.depth + 1,
            id,
        }
    }

    fn key(&self) -> (usize, Reverse<usize>, u64) {
        (ceil_bound(self.bound), Reverse(self.depth), self.id)
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap.
        other.key().cmp(&self.key())
    }
}
