use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;

use super::tutte::{allowed_edge, corner_inverse_on, matchable_rows, maximal_allowed_submatching, rabin_vazirani_perfect_matching, tutte_sparse};
use super::Matching;
use crate::error::{Error, Result};
use crate::field::{gen_prime_capped, Field};
use crate::geom::GeomObject;
use crate::graph::{build_graph, induced_subgraph, IntersectionGraph};
use crate::separator::{build_separator_tree_on, unsplit_matching, SeparatorParams, SeparatorTree};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraicConfig {
    pub seed: u64,
    /// Full restarts with fresh randomness after a failed attempt.
    pub max_retries: usize,
    /// Fresh Tutte matrices tried per tree node before the attempt fails.
    pub max_rounds: usize,
    pub separator: SeparatorParams,
}

impl Default for AlgebraicConfig {
    fn default() -> Self {
        AlgebraicConfig {
            seed: 0,
            max_retries: 3,
            max_rounds: 16,
            separator: SeparatorParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicOutcome {
    /// Matching over positions in the input object list.
    pub matching: Matching,
    /// Attempts made, including the successful one.
    pub attempts: usize,
    /// Errors of the failed attempts, in order.
    pub failures: Vec<String>,
    /// Vertices of the split graph.
    pub split_vertices: usize,
    pub splits: usize,
    pub tree_nodes: usize,
    /// Size of the matchable subset of the split graph.
    pub matchable: usize,
    /// Tutte matrices drawn over all internal nodes and leaves.
    pub rounds: usize,
}

/// Maximum matching of the intersection graph of `objects`, with high
/// probability. The result is always a valid matching.
pub fn algebraic_maximum_matching(objects: &[GeomObject], config: &AlgebraicConfig) -> Result<AlgebraicOutcome> {
    let g = build_graph(objects);
    algebraic_matching_on_graph(objects, &g, config)
}

/// As [`algebraic_maximum_matching`] with the intersection graph supplied.
pub fn algebraic_matching_on_graph(objects: &[GeomObject], g: &IntersectionGraph, config: &AlgebraicConfig) -> Result<AlgebraicOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut failures = Vec::new();
    for attempt in 0..=config.max_retries {
        match run_attempt(objects, g, config, &mut rng) {
            Ok(mut out) => {
                out.attempts = attempt + 1;
                out.failures = failures;
                return Ok(out);
            }
            Err(e @ (Error::InvalidParams(_) | Error::InvalidObject(_))) => return Err(e),
            Err(e) => failures.push(e.to_string()),
        }
    }
    Err(Error::RetryExhausted(config.max_retries + 1))
}

struct State<'a> {
    g: &'a IntersectionGraph,
    tree: &'a SeparatorTree,
    field: Field,
    alive: Vec<bool>,
    mate: Vec<usize>,
    rounds: usize,
    max_rounds: usize,
}

fn run_attempt(objects: &[GeomObject], g: &IntersectionGraph, config: &AlgebraicConfig, rng: &mut ChaCha8Rng) -> Result<AlgebraicOutcome> {
    let tb = build_separator_tree_on(objects, g, &config.separator, rng)?;
    let gp = tb.graph();
    let n = gp.n();
    let field = gen_prime_capped(n.max(2));
    let (a, _) = tutte_sparse(&gp, field, rng);
    let w = matchable_rows(&a, &gp, &tb.tree)?;
    let mut st = State {
        g: &gp,
        tree: &tb.tree,
        field,
        alive: vec![false; n],
        mate: vec![usize::MAX; n],
        rounds: 0,
        max_rounds: config.max_rounds,
    };
    for &v in &w {
        st.alive[v] = true;
    }
    for t in tb.tree.pre_order() {
        let verts = st.alive_below(t);
        if verts.is_empty() {
            continue;
        }
        if tb.tree.is_leaf(t) {
            st.match_leaf(&verts, rng)?;
        } else {
            st.match_node(t, rng)?;
        }
    }
    let m = Matching::from_mates(&st.mate);
    if 2 * m.len() != w.len() {
        return Err(Error::RankMismatch(w.len() - 2 * m.len()));
    }
    m.validate(&gp)?;
    let back = unsplit_matching(&m, &tb.split)?;
    back.validate(g)?;
    Ok(AlgebraicOutcome {
        matching: back,
        attempts: 0,
        failures: Vec::new(),
        split_vertices: n,
        splits: tb.split.split_count(),
        tree_nodes: tb.tree.nodes.len(),
        matchable: w.len(),
        rounds: st.rounds,
    })
}

impl State<'_> {
    /// Unmatched matchable vertices in the subtree of `t`, sorted.
    fn alive_below(&self, t: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![t];
        while let Some(s) = stack.pop() {
            out.extend(self.tree.nodes[s].z.iter().copied().filter(|&v| self.alive[v]));
            stack.extend_from_slice(&self.tree.nodes[s].children);
        }
        out.sort_unstable();
        out
    }

    fn take(&mut self, u: usize, v: usize) {
        self.mate[u] = v;
        self.mate[v] = u;
        self.alive[u] = false;
        self.alive[v] = false;
    }

    /// Perfect matching of the remaining vertices of a leaf.
    fn match_leaf(&mut self, verts: &[usize], rng: &mut ChaCha8Rng) -> Result<()> {
        let h = induced_subgraph(self.g, verts);
        for _ in 0..self.max_rounds {
            self.rounds += 1;
            let (a, _) = tutte_sparse(&h, self.field, rng);
            match rabin_vazirani_perfect_matching(&h, &a) {
                Ok(m) => {
                    for &(x, y) in m.pairs() {
                        self.take(verts[x], verts[y]);
                    }
                    return Ok(());
                }
                Err(Error::Singular | Error::RankMismatch(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Err(Error::RetryExhausted(self.max_rounds))
    }

    /// Matches every remaining vertex of `Z_t` along edges that extend to a
    /// perfect matching of the remaining subtree graph.
    fn match_node(&mut self, t: usize, rng: &mut ChaCha8Rng) -> Result<()> {
        let mut discarded: FxHashSet<(usize, usize)> = FxHashSet::default();
        for _ in 0..self.max_rounds {
            let zt: Vec<usize> = self.tree.nodes[t].z.iter().copied().filter(|&v| self.alive[v]).collect();
            if zt.is_empty() {
                return Ok(());
            }
            self.rounds += 1;
            let verts = self.alive_below(t);
            let h = induced_subgraph(self.g, &verts);
            let local = |v: usize| verts.binary_search(&v).expect("alive vertex below t");
            let ltree = self.tree.restrict(&verts);
            let (a, _) = tutte_sparse(&h, self.field, rng);
            let zl: Vec<usize> = zt.iter().map(|&v| local(v)).collect();
            let mut in_z = vec![false; h.n()];
            let mut nset = zl.clone();
            for &z in &zl {
                in_z[z] = true;
                nset.extend_from_slice(h.neighbors(z));
            }
            nset.sort_unstable();
            nset.dedup();
            let mut corner = match corner_inverse_on(&a, &h, &nset, &ltree) {
                Ok(c) => c,
                Err(Error::Singular) => continue,
                Err(e) => return Err(e),
            };
            let mut z_left = zl.len();
            loop {
                // Greedy maximal matching over allowed candidates, edges at
                // Z first.
                let mut cand: Vec<(bool, usize, usize)> = Vec::new();
                for &x in &nset {
                    for &y in h.neighbors(x) {
                        if x < y && nset.binary_search(&y).is_ok() && !discarded.contains(&(verts[x], verts[y])) {
                            cand.push((!(in_z[x] || in_z[y]), x, y));
                        }
                    }
                }
                cand.sort_unstable();
                let mut used = FxHashSet::default();
                let mut greedy = Vec::new();
                for &(_, x, y) in &cand {
                    if !used.contains(&x) && !used.contains(&y) && allowed_edge(&corner, x, y) {
                        used.insert(x);
                        used.insert(y);
                        greedy.push((x, y));
                    }
                }
                if greedy.is_empty() {
                    break;
                }
                let greedy = Matching::new(greedy);
                let kept = maximal_allowed_submatching(&greedy, &mut corner);
                for &(x, y) in greedy.pairs() {
                    if kept.pairs().binary_search(&(x, y)).is_err() {
                        discarded.insert((verts[x], verts[y]));
                    }
                }
                for &(x, y) in kept.pairs() {
                    z_left -= usize::from(in_z[x]) + usize::from(in_z[y]);
                    self.take(verts[x], verts[y]);
                }
                if z_left == 0 {
                    return Ok(());
                }
            }
        }
        let covered = self.tree.nodes[t].z.iter().all(|&v| !self.alive[v]);
        if covered {
            Ok(())
        } else {
            Err(Error::RetryExhausted(self.max_rounds))
        }
    }
}
