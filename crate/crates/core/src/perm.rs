//! Finite permutations in one-line notation, 0-based.
//!
//! Products compose like functions: `(p * q)(i) = p(q(i))`, so the right
//! factor acts first. This matches the composition convention used for
//! automorphisms throughout the crate.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    /// Builds a permutation from its one-line image vector; `map[i]` is the
    /// image of `i`. Fails if the vector is not a bijection on `0..map.len()`.
    pub fn from_images(map: Vec<usize>) -> Option<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || seen[v] {
                return None;
            }
            seen[v] = true;
        }
        Some(Perm(map))
    }

    pub fn transposition(n: usize, i: usize, j: usize) -> Option<Self> {
        if i >= n || j >= n || i == j {
            return None;
        }
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(i, j);
        Some(Perm(map))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.len(), other.len());
        Perm(other.0.iter().map(|&v| self.0[v]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Perm(inv)
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// Decomposes into transpositions `t_1, ..., t_k` such that folding them
    /// with `compose` left to right (`t_1 ∘ t_2 ∘ ... ∘ t_k`) rebuilds `self`.
    /// Every transposition swaps two points of a common cycle, so a
    /// class-preserving permutation only yields class-internal swaps.
    pub fn transpositions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut visited = vec![false; self.0.len()];
        for start in 0..self.0.len() {
            if visited[start] || self.0[start] == start {
                visited[start] = true;
                continue;
            }
            // Collect the cycle (start, p(start), p²(start), ...).
            let mut cycle = vec![start];
            visited[start] = true;
            let mut cur = self.0[start];
            while cur != start {
                visited[cur] = true;
                cycle.push(cur);
                cur = self.0[cur];
            }
            // (c0 c1 ... ck) = (c0 ck)(c0 ck-1)...(c0 c1) applied right-first.
            for idx in (1..cycle.len()).rev() {
                out.push((cycle[0], cycle[idx]));
            }
        }
        out
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.0)
    }
}
