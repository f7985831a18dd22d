//! Sliding order-statistic structure behind the MOSUM detector.

use std::cmp::Reverse;
use std::collections::BTreeSet;

/// Ordering key for window members: radius first (as raw IEEE bits, valid
/// for positive finite values), then earlier time index wins ties.
type Key = (u64, Reverse<usize>);

/// Rebuild the running top-k sum from scratch this often (counted in
/// insert/delete operations) to keep incremental floating-point drift far
/// below oracle tolerances.
const REFRESH_INTERVAL: usize = 1024;

/// A sliding window over time indices that maintains the k members with the
/// largest radii and the running sum of their product vectors.
///
/// The structure borrows a radius per time index and a flat panel of product
/// vectors (`stride` values per index; for the detector these are the
/// d(d+1)/2 pairwise terms X_i X_j / R^2). Inserting or deleting an index
/// costs O(stride + log(window length)); ties in radius are broken in favour
/// of the earlier time index, which makes the top-k set deterministic.
#[derive(Debug, Clone)]
pub struct SlidingTopK<'a> {
    radii: &'a [f64],
    products: &'a [f64],
    stride: usize,
    k: usize,
    /// The k largest keys currently in the window (fewer while filling).
    top: BTreeSet<Key>,
    /// All remaining window members, every key smaller than `top`'s minimum.
    rest: BTreeSet<Key>,
    top_sum: Vec<f64>,
    ops_since_refresh: usize,
}

impl<'a> SlidingTopK<'a> {
    /// Creates an empty window over `radii` and a row-major `products` panel
    /// with `stride` values per time index.
    ///
    /// Panics if the panel shape is inconsistent or `k` is zero.
    pub fn new(radii: &'a [f64], products: &'a [f64], stride: usize, k: usize) -> Self {
        assert!(k >= 1, "top-k window requires k >= 1");
        assert_eq!(
            products.len(),
            radii.len() * stride,
            "product panel does not match radii length"
        );
        Self {
            radii,
            products,
            stride,
            k,
            top: BTreeSet::new(),
            rest: BTreeSet::new(),
            top_sum: vec![0.0; stride],
            ops_since_refresh: 0,
        }
    }

    fn key(&self, t: usize) -> Key {
        (self.radii[t].to_bits(), Reverse(t))
    }

    fn products_of(&self, t: usize) -> &'a [f64] {
        &self.products[t * self.stride..(t + 1) * self.stride]
    }

    fn add_products(&mut self, t: usize) {
        let row = self.products_of(t);
        for (acc, v) in self.top_sum.iter_mut().zip(row) {
            *acc += v;
        }
    }

    fn sub_products(&mut self, t: usize) {
        let row = self.products_of(t);
        for (acc, v) in self.top_sum.iter_mut().zip(row) {
            *acc -= v;
        }
    }

    fn tick(&mut self) {
        self.ops_since_refresh += 1;
        if self.ops_since_refresh >= REFRESH_INTERVAL {
            self.refresh_sum();
        }
    }

    /// Recomputes the top-k sum exactly from the current top set.
    fn refresh_sum(&mut self) {
        self.top_sum.iter_mut().for_each(|v| *v = 0.0);
        let members: Vec<usize> = self.top.iter().map(|&(_, Reverse(t))| t).collect();
        for t in members {
            self.add_products(t);
        }
        self.ops_since_refresh = 0;
    }

    /// Adds time index `t` to the window.
    pub fn insert(&mut self, t: usize) {
        let key = self.key(t);
        if self.top.len() < self.k {
            self.top.insert(key);
            self.add_products(t);
        } else if key > *self.top.first().expect("top set is non-empty") {
            let (_, Reverse(demoted)) = self.top.pop_first().expect("top set is non-empty");
            self.sub_products(demoted);
            self.rest.insert(self.key(demoted));
            self.top.insert(key);
            self.add_products(t);
        } else {
            self.rest.insert(key);
        }
        self.tick();
    }

    /// Removes time index `t` from the window.
    ///
    /// Panics if `t` is not a member.
    pub fn remove(&mut self, t: usize) {
        let key = self.key(t);
        if self.top.remove(&key) {
            self.sub_products(t);
            if let Some(promoted) = self.rest.pop_last() {
                let Reverse(p) = promoted.1;
                self.add_products(p);
                self.top.insert(promoted);
            }
        } else {
            assert!(self.rest.remove(&key), "removed index not in window");
        }
        self.tick();
    }

    /// Number of indices currently in the window.
    pub fn len(&self) -> usize {
        self.top.len() + self.rest.len()
    }

    /// True if the window is empty.
    pub fn is_empty(&self) -> bool {
        self.top.is_empty()
    }

    /// True if index `t` is currently among the top k radii.
    pub fn in_top_k(&self, t: usize) -> bool {
        self.top.contains(&self.key(t))
    }

    /// The running sum of product vectors over the current top-k set.
    pub fn top_sum(&self) -> &[f64] {
        &self.top_sum
    }
}
