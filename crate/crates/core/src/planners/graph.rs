use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Min-heap entry ordered by `(cost, index)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Entry {
    pub cost: f64,
    pub idx: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path costs from `source` and predecessors.
///
/// `adjacency[u]` lists `(v, w)` with `w ≥ 0`. Unreachable vertices get
/// `f64::INFINITY` and no predecessor.
pub fn dijkstra(adjacency: &[Vec<(usize, f64)>], source: usize) -> (Vec<f64>, Vec<Option<usize>>) {
    let n = adjacency.len();
    let mut cost = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    if source >= n {
        return (cost, pred);
    }
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    cost[source] = 0.0;
    heap.push(Entry { cost: 0.0, idx: source });
    while let Some(Entry { cost: c, idx: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(v, w) in &adjacency[u] {
            debug_assert!(w >= 0.0, "negative edge weight");
            let nc = c + w;
            if nc < cost[v] {
                cost[v] = nc;
                pred[v] = Some(u);
                heap.push(Entry { cost: nc, idx: v });
            }
        }
    }
    (cost, pred)
}

/// Vertex sequence from the root of a predecessor map to `target`.
pub fn trace_back(pred: &[Option<usize>], target: usize) -> Vec<usize> {
    let mut path = vec![target];
    let mut cur = target;
    while let Some(p) = pred[cur] {
        path.push(p);
        cur = p;
    }
    path.reverse();
    path
}
