//! Rooted oriented trees: canonical codes, automorphisms, the rooted-tree
//! probability formula and empirical censuses over a digraph.

use std::collections::{BTreeMap, HashMap};

use super::{ln_f1, AnalyticsError};
use crate::digraph::{Digraph, Vertex};
use crate::farm;

/// An oriented tree on `0..k` rooted at 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTreeShape {
    k: usize,
    edges: Vec<(usize, usize)>,
}

/// Neighbour lists tagged with `true` for an out-edge of the owning vertex.
type Tagged = Vec<Vec<(usize, bool)>>;

impl RootedTreeShape {
    pub fn new(k: usize, edges: Vec<(usize, usize)>) -> Result<Self, AnalyticsError> {
        let bad = |m: &str| Err(AnalyticsError::BadShape(m.to_string()));
        if k == 0 {
            return bad("empty tree");
        }
        if edges.len() != k - 1 {
            return bad("a tree on k vertices has k - 1 edges");
        }
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b) in &edges {
            if a >= k || b >= k || a == b {
                return bad("edge endpoint out of range or loop");
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return bad("edges close a cycle");
            }
            parent[ra] = rb;
        }
        Ok(RootedTreeShape { k, edges })
    }

    /// Root with `ins` in-leaves and `outs` out-leaves.
    pub fn star(ins: usize, outs: usize) -> Self {
        let edges = (1..=ins).map(|i| (i, 0)).chain((ins + 1..=ins + outs).map(|o| (0, o))).collect();
        RootedTreeShape { k: 1 + ins + outs, edges }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.k];
        for &(_, b) in &self.edges {
            d[b] += 1;
        }
        d
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.k];
        for &(a, _) in &self.edges {
            d[a] += 1;
        }
        d
    }

    fn tagged(&self) -> Tagged {
        let mut adj = vec![Vec::new(); self.k];
        for &(a, b) in &self.edges {
            adj[a].push((b, true));
            adj[b].push((a, false));
        }
        adj
    }

    /// Largest distance from the root.
    pub fn depth(&self) -> usize {
        let adj = self.tagged();
        let mut dist = vec![usize::MAX; self.k];
        dist[0] = 0;
        let mut queue = vec![0];
        let mut i = 0;
        while i < queue.len() {
            let v = queue[i];
            i += 1;
            for &(w, _) in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push(w);
                }
            }
        }
        dist.into_iter().max().unwrap_or(0)
    }

    /// Canonical string of the rooted shape: equal iff rooted-isomorphic.
    pub fn canonical_code(&self) -> String {
        code_and_aut(&self.tagged(), 0).0
    }

    /// Automorphisms fixing the root: the product over vertices of the
    /// factorials of the multiplicities of identical child subtrees.
    pub fn aut(&self) -> u64 {
        code_and_aut(&self.tagged(), 0).1
    }

    /// Automorphism count by trying every permutation fixing the root.
    pub fn aut_brute(&self) -> u64 {
        let edges: std::collections::HashSet<(usize, usize)> = self.edges.iter().copied().collect();
        let mut perm: Vec<usize> = (0..self.k).collect();
        let mut count = 0;
        permute(&mut perm, 1, &mut |p| {
            if self.edges.iter().all(|&(a, b)| edges.contains(&(p[a], p[b]))) {
                count += 1;
            }
        });
        count
    }

    /// The same shape with vertex `i` renamed `perm[i]`; `perm[0]` must be 0.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self, AnalyticsError> {
        if perm.len() != self.k || perm[0] != 0 {
            return Err(AnalyticsError::BadShape("relabelling must fix the root".into()));
        }
        RootedTreeShape::new(self.k, self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect())
    }
}

fn permute(p: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
    if i >= p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permute(p, i + 1, f);
        p.swap(i, j);
    }
}

fn code_and_aut(adj: &Tagged, root: usize) -> (String, u64) {
    fn go(adj: &Tagged, v: usize, parent: usize) -> (String, u64) {
        let mut aut = 1u64;
        let mut kids: Vec<String> = Vec::new();
        for &(w, out) in &adj[v] {
            if w == parent {
                continue;
            }
            let (c, a) = go(adj, w, v);
            aut *= a;
            kids.push(format!("{}{}", if out { '+' } else { '-' }, c));
        }
        kids.sort_unstable();
        let mut groups: BTreeMap<&str, u64> = BTreeMap::new();
        for k in &kids {
            *groups.entry(k.as_str()).or_default() += 1;
        }
        for &m in groups.values() {
            aut *= (1..=m).product::<u64>();
        }
        (format!("({})", kids.concat()), aut)
    }
    go(adj, root, usize::MAX)
}

/// `ln` of `(1/Aut) (N/M)^{k-1} lambda^{2k-2} e^{2k lambda} / f_1(lambda)^{2k}`.
pub fn rho_tree_ln(shape: &RootedTreeShape, n: f64, m: f64, lambda: f64) -> f64 {
    let k = shape.k() as f64;
    -(shape.aut() as f64).ln() + (k - 1.0) * (n / m).ln() + (2.0 * k - 2.0) * lambda.ln() + 2.0 * k * lambda
        - 2.0 * k * ln_f1(lambda)
}

pub fn rho_tree(shape: &RootedTreeShape, n: f64, m: f64, lambda: f64) -> f64 {
    rho_tree_ln(shape, n, m, lambda).exp()
}

/// Fraction of vertices whose radius-`depth` ball in the underlying graph
/// induces a tree rooted-isomorphic to `shape`.
pub fn neighborhood_census(d: &Digraph, depth: usize, shape: &RootedTreeShape) -> f64 {
    let target = shape.canonical_code();
    let limit = shape.k();
    let vs: Vec<Vertex> = (0..d.n() as Vertex).collect();
    let hits = farm::map(&vs, |&v| ball_matches(d, v, depth, limit, &target));
    hits.iter().filter(|&&h| h).count() as f64 / d.n().max(1) as f64
}

fn ball_matches(d: &Digraph, v: Vertex, depth: usize, limit: usize, target: &str) -> bool {
    let mut local: HashMap<Vertex, usize> = HashMap::new();
    let mut order = vec![v];
    local.insert(v, 0);
    let mut frontier = vec![v];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &u in &frontier {
            for &w in d.out_neighbors(u).iter().chain(d.in_neighbors(u)) {
                if !local.contains_key(&w) {
                    local.insert(w, order.len());
                    order.push(w);
                    next.push(w);
                    if order.len() > limit {
                        return false;
                    }
                }
            }
        }
        frontier = next;
    }
    if order.len() != limit {
        return false;
    }
    let mut adj: Tagged = vec![Vec::new(); order.len()];
    let mut edges = 0;
    for (i, &u) in order.iter().enumerate() {
        for &w in d.out_neighbors(u) {
            if let Some(&j) = local.get(&w) {
                edges += 1;
                adj[i].push((j, true));
                adj[j].push((i, false));
            }
        }
    }
    edges + 1 == order.len() && code_and_aut(&adj, 0).0 == target
}

/// Mean number of copies of `shape` rooted at a vertex: injective
/// edge-preserving maps sending the root to it, divided by `Aut`. Copies need
/// not be induced.
pub fn rooted_copy_density(d: &Digraph, shape: &RootedTreeShape) -> f64 {
    // Shape vertices in BFS order, each attached to an earlier one.
    let adj = shape.tagged();
    let mut order = vec![0usize];
    let mut attach = vec![(usize::MAX, false)];
    let mut seen = vec![false; shape.k()];
    seen[0] = true;
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        for &(w, out) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                attach.push((i, out));
                order.push(w);
            }
        }
        i += 1;
    }
    let vs: Vec<Vertex> = (0..d.n() as Vertex).collect();
    let counts = farm::map(&vs, |&v| {
        let mut img = vec![v];
        extend(d, &attach, &mut img)
    });
    let total: u64 = counts.iter().sum();
    total as f64 / shape.aut() as f64 / d.n().max(1) as f64
}

fn extend(d: &Digraph, attach: &[(usize, bool)], img: &mut Vec<Vertex>) -> u64 {
    if img.len() == attach.len() {
        return 1;
    }
    let (p, out) = attach[img.len()];
    let base = img[p];
    let cands = if out { d.out_neighbors(base) } else { d.in_neighbors(base) };
    let mut total = 0;
    for &w in cands {
        if img.contains(&w) {
            continue;
        }
        img.push(w);
        total += extend(d, attach, img);
        img.pop();
    }
    total
}
