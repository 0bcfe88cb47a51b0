//! Exact nearest-neighbor queries over a static point set.
//!
//! A balanced kd-tree stored implicitly: each subtree occupies a contiguous
//! range of the permutation array with its splitting point at the middle.
//! Results are exact; ties on distance are broken by point index so queries
//! are deterministic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    order: Vec<usize>,
    split_axis: Vec<u8>,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist2: f64,
    index: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.index.cmp(&other.index))
    }
}

impl KdTree {
    /// Builds a tree over `coords`, a flat row-major array of `dim`-vectors.
    pub fn new(dim: usize, coords: Vec<f64>) -> Self {
        assert!(dim > 0 && dim <= u8::MAX as usize, "unsupported dimension {dim}");
        assert_eq!(coords.len() % dim, 0, "coordinate array is not a multiple of dim");
        let n = coords.len() / dim;
        let mut tree = KdTree {
            dim,
            coords,
            order: (0..n).collect(),
            split_axis: vec![0; n],
        };
        tree.build(0, n);
        tree
    }

    pub fn from_points<P: AsRef<[f64]>>(dim: usize, points: &[P]) -> Self {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            assert_eq!(p.len(), dim);
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.coords[index * self.dim..(index + 1) * self.dim]
    }

    fn build(&mut self, lo: usize, hi: usize) {
        if hi - lo <= 1 {
            return;
        }
        let axis = self.widest_axis(lo, hi);
        let mid = lo + (hi - lo) / 2;
        let (dim, coords) = (self.dim, &self.coords);
        self.order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
            coords[a * dim + axis].total_cmp(&coords[b * dim + axis])
        });
        self.split_axis[mid] = axis as u8;
        self.build(lo, mid);
        self.build(mid + 1, hi);
    }

    fn widest_axis(&self, lo: usize, hi: usize) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for axis in 0..self.dim {
            let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &self.order[lo..hi] {
                let c = self.coords[i * self.dim + axis];
                min = min.min(c);
                max = max.max(c);
            }
            if max - min > best.1 {
                best = (axis, max - min);
            }
        }
        best.0
    }

    fn dist2(&self, index: usize, query: &[f64]) -> f64 {
        self.point(index)
            .iter()
            .zip(query)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Nearest point to `query` as `(index, distance)`.
    pub fn nearest(&self, query: &[f64]) -> Option<(usize, f64)> {
        self.knn(query, 1).into_iter().next()
    }

    /// The `k` nearest points sorted by increasing distance.
    pub fn knn(&self, query: &[f64], k: usize) -> Vec<(usize, f64)> {
        assert_eq!(query.len(), self.dim);
        if k == 0 {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.knn_rec(0, self.len(), query, k, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.index, c.dist2.sqrt())).collect()
    }

    fn knn_rec(
        &self,
        lo: usize,
        hi: usize,
        query: &[f64],
        k: usize,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let index = self.order[mid];
        let cand = Candidate {
            dist2: self.dist2(index, query),
            index,
        };
        if heap.len() < k {
            heap.push(cand);
        } else if cand < *heap.peek().unwrap() {
            heap.pop();
            heap.push(cand);
        }
        let axis = self.split_axis[mid] as usize;
        let diff = query[axis] - self.coords[index * self.dim + axis];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.knn_rec(near.0, near.1, query, k, heap);
        if heap.len() < k || diff * diff <= heap.peek().unwrap().dist2 {
            self.knn_rec(far.0, far.1, query, k, heap);
        }
    }

    /// All points with distance `<= radius`, sorted by increasing distance.
    pub fn within_radius(&self, query: &[f64], radius: f64) -> Vec<(usize, f64)> {
        assert_eq!(query.len(), self.dim);
        let mut out = Vec::new();
        self.radius_rec(0, self.len(), query, radius * radius, &mut out);
        out.sort();
        out.into_iter().map(|c| (c.index, c.dist2.sqrt())).collect()
    }

    fn radius_rec(&self, lo: usize, hi: usize, query: &[f64], r2: f64, out: &mut Vec<Candidate>) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let index = self.order[mid];
        let d2 = self.dist2(index, query);
        if d2 <= r2 {
            out.push(Candidate { dist2: d2, index });
        }
        let axis = self.split_axis[mid] as usize;
        let diff = query[axis] - self.coords[index * self.dim + axis];
        if diff < 0.0 || diff * diff <= r2 {
            self.radius_rec(lo, mid, query, r2, out);
        }
        if diff >= 0.0 || diff * diff <= r2 {
            self.radius_rec(mid + 1, hi, query, r2, out);
        }
    }
}
