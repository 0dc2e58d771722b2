//! Exact maximum matching: Edmonds' blossom algorithm and a bitmask search
//! for very small graphs.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::IntersectionGraph;
use crate::matching::Matching;

const NONE: usize = usize::MAX;

struct Blossom<'a> {
    g: &'a IntersectionGraph,
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
    queue: VecDeque<usize>,
}

impl<'a> Blossom<'a> {
    fn new(g: &'a IntersectionGraph, mate: Vec<usize>) -> Self {
        let n = g.n();
        Blossom {
            g,
            mate,
            parent: vec![NONE; n],
            base: (0..n).collect(),
            used: vec![false; n],
            in_blossom: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.g.n()];
        loop {
            a = self.base[a];
            seen[a] = true;
            if self.mate[a] == NONE {
                break;
            }
            a = self.parent[self.mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[self.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    /// Alternating BFS from `root`; returns the exposed endpoint of an
    /// augmenting path if one exists (path stored in `parent`).
    fn find_path(&mut self, root: usize) -> Option<usize> {
        let n = self.g.n();
        self.used.iter_mut().for_each(|x| *x = false);
        self.parent.iter_mut().for_each(|x| *x = NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        self.queue.clear();
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for idx in 0..self.g.degree(v) {
                let to = self.g.neighbors(v)[idx];
                if self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                if to == root || (self.mate[to] != NONE && self.parent[self.mate[to]] != NONE) {
                    let cur = self.lca(v, to);
                    self.in_blossom.iter_mut().for_each(|x| *x = false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if self.mate[to] == NONE {
                        return Some(to);
                    }
                    let m = self.mate[to];
                    self.used[m] = true;
                    self.queue.push_back(m);
                }
            }
        }
        None
    }

    fn augment(&mut self, mut v: usize) {
        while v != NONE {
            let pv = self.parent[v];
            let ppv = self.mate[pv];
            self.mate[v] = pv;
            self.mate[pv] = v;
            v = ppv;
        }
    }
}

fn greedy_mates(g: &IntersectionGraph) -> Vec<usize> {
    let mut mate = vec![NONE; g.n()];
    for (u, v) in g.edges() {
        if mate[u] == NONE && mate[v] == NONE {
            mate[u] = v;
            mate[v] = u;
        }
    }
    mate
}

/// Maximum matching by augmenting paths with blossom contraction, O(V^3).
/// Deterministic: vertices and neighbors are scanned in index order.
pub fn blossom_maximum_matching(g: &IntersectionGraph) -> Matching {
    let mut b = Blossom::new(g, greedy_mates(g));
    for v in 0..g.n() {
        if b.mate[v] == NONE {
            if let Some(end) = b.find_path(v) {
                b.augment(end);
            }
        }
    }
    Matching::from_mates(&b.mate)
}

/// Whether `m` admits an augmenting path, searched from every exposed
/// vertex. Panics if `m` is not a matching of `g`.
pub fn has_augmenting_path(g: &IntersectionGraph, m: &Matching) -> bool {
    m.validate(g).expect("matching of g");
    let mate = m.mates(g.n());
    let mut b = Blossom::new(g, mate);
    (0..g.n()).any(|v| b.mate[v] == NONE && b.find_path(v).is_some())
}

/// Exact matching number by memoized search over vertex subsets.
pub fn exhaustive_matching_size(g: &IntersectionGraph) -> Result<usize> {
    let n = g.n();
    if n > 16 {
        return Err(Error::TooLarge(n));
    }
    let masks: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect();
    let full = if n == 0 { 0 } else { (1u32 << n) - 1 };
    let mut memo = vec![u8::MAX; 1usize << n];
    fn solve(mask: u32, nbr: &[u32], memo: &mut [u8]) -> u8 {
        if mask == 0 {
            return 0;
        }
        if memo[mask as usize] != u8::MAX {
            return memo[mask as usize];
        }
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        let mut best = solve(rest, nbr, memo);
        let mut cand = nbr[v] & rest;
        while cand != 0 {
            let u = cand.trailing_zeros();
            cand &= cand - 1;
            best = best.max(1 + solve(rest & !(1 << u), nbr, memo));
        }
        memo[mask as usize] = best;
        best
    }
    Ok(solve(full, &masks, &mut memo) as usize)
}
