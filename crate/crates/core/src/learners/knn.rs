//! Exact k-nearest-neighbour search: a brute-force scan and a k-d tree that
//! return identical results, ties broken by ascending row index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{KnnWeights, LearnError};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

/// Minkowski distance of order `p >= 1`, kept in its `p`-th power for
/// comparisons. `p = 2` squares directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Minkowski {
    pub p: f64,
}

impl Minkowski {
    pub const EUCLIDEAN: Minkowski = Minkowski { p: 2.0 };

    #[inline]
    fn term(self, diff: f64) -> f64 {
        let a = diff.abs();
        if self.p == 2.0 {
            a * a
        } else if self.p == 1.0 {
            a
        } else {
            a.powf(self.p)
        }
    }

    /// Sum of per-axis terms, in index order.
    #[inline]
    pub fn powered(self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| self.term(x - y)).sum()
    }

    pub fn finish(self, powered: f64) -> f64 {
        if self.p == 2.0 {
            powered.sqrt()
        } else if self.p == 1.0 {
            powered
        } else {
            powered.powf(1.0 / self.p)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    dist: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The `k` rows of `store` closest to `query` under the Euclidean metric,
/// optionally skipping one row.
pub fn brute_force_neighbors(store: &Matrix, query: &[f64], k: usize, exclude: Option<usize>) -> Vec<Neighbor> {
    brute_force_metric(store, query, k, exclude, Minkowski::EUCLIDEAN)
}

pub(crate) fn brute_force_metric(
    store: &Matrix,
    query: &[f64],
    k: usize,
    exclude: Option<usize>,
    metric: Minkowski,
) -> Vec<Neighbor> {
    let mut all: Vec<Candidate> = (0..store.rows())
        .filter(|&i| Some(i) != exclude)
        .map(|i| Candidate {
            dist: metric.powered(store.row(i), query),
            index: i,
        })
        .collect();
    all.sort_unstable();
    all.truncate(k);
    all.into_iter()
        .map(|c| Neighbor {
            index: c.index,
            distance: metric.finish(c.dist),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum KdNode {
    Leaf {
        start: usize,
        end: usize,
    },
    Inner {
        left: usize,
        right: usize,
    },
}

/// k-d tree over the rows of a matrix. Nodes split at the median of their
/// widest dimension until at most `leaf_size` points remain; every node
/// keeps its bounding box for pruning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdTree {
    leaf_size: usize,
    order: Vec<usize>,
    nodes: Vec<KdNode>,
    lower: Vec<Vec<f64>>,
    upper: Vec<Vec<f64>>,
}

impl KdTree {
    pub fn build(points: &Matrix, leaf_size: usize) -> Self {
        let mut tree = KdTree {
            leaf_size: leaf_size.max(1),
            order: (0..points.rows()).collect(),
            nodes: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
        };
        if points.rows() > 0 {
            tree.build_node(points, 0, points.rows());
        }
        tree
    }

    fn build_node(&mut self, points: &Matrix, start: usize, end: usize) -> usize {
        let d = points.cols();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &i in &self.order[start..end] {
            for (j, &v) in points.row(i).iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        let idx = self.nodes.len();
        self.nodes.push(KdNode::Leaf { start, end });
        let widest = (0..d).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)));
        self.lower.push(lo);
        self.upper.push(hi);
        let n = end - start;
        let Some(axis) = widest else { return idx };
        if n <= self.leaf_size || self.upper[idx][axis] == self.lower[idx][axis] {
            return idx;
        }
        let mid = start + n / 2;
        self.order[start..end].sort_by(|&a, &b| {
            points.get(a, axis).total_cmp(&points.get(b, axis)).then(a.cmp(&b))
        });
        let left = self.build_node(points, start, mid);
        let right = self.build_node(points, mid, end);
        self.nodes[idx] = KdNode::Inner { left, right };
        idx
    }

    /// Lower bound on the powered distance from `q` to any point in the box.
    fn box_bound(&self, node: usize, q: &[f64], metric: Minkowski) -> f64 {
        let (lo, hi) = (&self.lower[node], &self.upper[node]);
        q.iter()
            .enumerate()
            .map(|(j, &v)| {
                let gap = if v < lo[j] {
                    lo[j] - v
                } else if v > hi[j] {
                    v - hi[j]
                } else {
                    0.0
                };
                metric.term(gap)
            })
            .sum()
    }

    pub fn query(&self, points: &Matrix, q: &[f64], k: usize, metric: Minkowski) -> Vec<Neighbor> {
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        if k > 0 && !self.nodes.is_empty() {
            self.visit(0, points, q, k, metric, &mut heap);
        }
        let mut found = heap.into_sorted_vec();
        found.truncate(k);
        found
            .into_iter()
            .map(|c| Neighbor {
                index: c.index,
                distance: metric.finish(c.dist),
            })
            .collect()
    }

    fn visit(
        &self,
        node: usize,
        points: &Matrix,
        q: &[f64],
        k: usize,
        metric: Minkowski,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        if heap.len() == k {
            let worst = heap.peek().expect("heap is full").dist;
            // equal bounds are still visited: a tie may carry a smaller index
            if self.box_bound(node, q, metric) > worst {
                return;
            }
        }
        match self.nodes[node] {
            KdNode::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let c = Candidate {
                        dist: metric.powered(points.row(i), q),
                        index: i,
                    };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().expect("heap is full") {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            KdNode::Inner { left, right } => {
                let (bl, br) = (self.box_bound(left, q, metric), self.box_bound(right, q, metric));
                let (first, second) = if bl <= br { (left, right) } else { (right, left) };
                self.visit(first, points, q, k, metric, heap);
                self.visit(second, points, q, k, metric, heap);
            }
        }
    }
}

/// Neighbour store used by the KNN classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnIndex {
    pub points: Matrix,
    pub metric: Minkowski,
    pub tree: KdTree,
}

impl KnnIndex {
    pub fn new(points: Matrix, metric: Minkowski, leaf_size: usize) -> Self {
        let tree = KdTree::build(&points, leaf_size);
        Self {
            points,
            metric,
            tree,
        }
    }
}

/// The `k` nearest stored rows to `x`, nearest first.
pub fn knn_query(store: &KnnIndex, x: &[f64], k: usize) -> Result<Vec<Neighbor>, LearnError> {
    if k > store.points.rows() {
        return Err(LearnError::KTooLarge {
            k,
            n: store.points.rows(),
        });
    }
    if x.len() != store.points.cols() {
        return Err(LearnError::DimensionMismatch {
            expected: store.points.cols(),
            actual: x.len(),
        });
    }
    Ok(store.tree.query(&store.points, x, k, store.metric))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub index: KnnIndex,
    pub labels: Vec<u8>,
    pub k: usize,
    pub weights: KnnWeights,
}

impl KnnModel {
    /// Share of the `k` neighbours' vote going to class 1. With distance
    /// weights, neighbours at distance zero outvote everything else.
    pub fn score(&self, x: &[f64]) -> f64 {
        let found = self
            .index
            .tree
            .query(&self.index.points, x, self.k, self.index.metric);
        let vote = |n: &Neighbor| match self.weights {
            KnnWeights::Uniform => 1.0,
            KnnWeights::Distance => 1.0 / n.distance,
        };
        let exact: Vec<&Neighbor> = found.iter().filter(|n| n.distance == 0.0).collect();
        let (positive, total) = if self.weights == KnnWeights::Distance && !exact.is_empty() {
            let pos = exact.iter().filter(|n| self.labels[n.index] == 1).count();
            (pos as f64, exact.len() as f64)
        } else {
            found.iter().fold((0.0, 0.0), |(p, t), n| {
                let w = vote(n);
                (if self.labels[n.index] == 1 { p + w } else { p }, t + w)
            })
        };
        positive / total
    }
}
