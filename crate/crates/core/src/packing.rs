//! Minimum-uncovered packings of properly oriented paths in the trees of Γ_L.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::{ColoredDigraph, Vertex, VertexMask};
use crate::peel::{union_out_within, GammaComponent};

/// Default size cap for the brute-force oracle.
pub const BRUTE_CAP: usize = 12;

const INF: i64 = i64::MAX / 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EligibilityMode {
    /// Endpoints need any in-/out-neighbour in `K1 \ V(T)`.
    Upper,
    /// Endpoints need a blue in-neighbour / red out-neighbour in `V1`.
    Lower,
}

impl fmt::Display for EligibilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EligibilityMode::Upper => "upper",
            EligibilityMode::Lower => "lower",
        })
    }
}

impl FromStr for EligibilityMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "upper" => Ok(EligibilityMode::Upper),
            "lower" => Ok(EligibilityMode::Lower),
            _ => Err(format!("unknown eligibility mode {s:?}")),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("{vertices} vertices but {edges} edges")]
    EdgeCount { vertices: usize, edges: usize },
    #[error("underlying graph is disconnected")]
    Disconnected,
    #[error("edge ({0}, {1}) has an endpoint outside the tree")]
    BadEdge(Vertex, Vertex),
    #[error("vertex list must be sorted and distinct")]
    UnsortedVertices,
    #[error("flag vectors have the wrong length")]
    FlagLength,
    #[error("tree has {size} vertices, brute force is capped at {cap}")]
    TooLarge { size: usize, cap: usize },
}

/// A tree of Γ_L with its orientation and endpoint eligibility flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientedTree {
    vertices: Vec<Vertex>,
    /// Directed edges in local indices.
    edges: Vec<(u32, u32)>,
    start_ok: Vec<bool>,
    end_ok: Vec<bool>,
    mode: EligibilityMode,
}

impl OrientedTree {
    /// `vertices` must be sorted; `edges` use the same (global) ids.
    pub fn new(
        vertices: Vec<Vertex>,
        edges: &[(Vertex, Vertex)],
        start_ok: Vec<bool>,
        end_ok: Vec<bool>,
        mode: EligibilityMode,
    ) -> Result<Self, TreeError> {
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TreeError::UnsortedVertices);
        }
        let k = vertices.len();
        if start_ok.len() != k || end_ok.len() != k {
            return Err(TreeError::FlagLength);
        }
        if edges.len() + 1 != k {
            return Err(TreeError::EdgeCount { vertices: k, edges: edges.len() });
        }
        let local = |v: Vertex| vertices.binary_search(&v).map(|i| i as u32);
        let mut local_edges = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            match (local(a), local(b)) {
                (Ok(x), Ok(y)) if x != y => local_edges.push((x, y)),
                _ => return Err(TreeError::BadEdge(a, b)),
            }
        }
        let tree = OrientedTree { vertices, edges: local_edges, start_ok, end_ok, mode };
        // |E| = |V| - 1 plus connectivity rules out cycles
        let adj = tree.adjacency();
        let mut seen = vec![false; k];
        let mut stack = vec![0usize];
        let mut reached = 0;
        if k > 0 {
            seen[0] = true;
        }
        while let Some(v) = stack.pop().filter(|_| k > 0) {
            reached += 1;
            for &(w, _) in &adj[v] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w as usize);
                }
            }
        }
        if reached != k {
            return Err(TreeError::Disconnected);
        }
        Ok(tree)
    }

    /// Builds the oriented tree for a tree component of Γ_L.
    pub fn from_component(
        cd: &ColoredDigraph,
        comp: &GammaComponent,
        k1: &VertexMask,
        v1: &VertexMask,
        mode: EligibilityMode,
    ) -> Result<Self, TreeError> {
        let within = VertexMask::from_vertices(cd.n(), comp.vertices.iter().copied());
        let edges: Vec<(Vertex, Vertex)> = comp
            .vertices
            .iter()
            .flat_map(|&v| union_out_within(cd, v, &within).map(move |w| (v, w)))
            .collect();
        let (start_ok, end_ok) = eligibility(cd, &comp.vertices, k1, v1, mode);
        OrientedTree::new(comp.vertices.clone(), &edges, start_ok, end_ok, mode)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn mode(&self) -> EligibilityMode {
        self.mode
    }

    pub fn start_ok(&self) -> &[bool] {
        &self.start_ok
    }

    pub fn end_ok(&self) -> &[bool] {
        &self.end_ok
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.edges.iter().map(|&(a, b)| (self.vertices[a as usize], self.vertices[b as usize]))
    }

    pub fn with_flags(&self, start_ok: Vec<bool>, end_ok: Vec<bool>) -> Result<Self, TreeError> {
        if start_ok.len() != self.len() || end_ok.len() != self.len() {
            return Err(TreeError::FlagLength);
        }
        Ok(OrientedTree { start_ok, end_ok, ..self.clone() })
    }

    /// Local adjacency: `(neighbour, v_is_tail)`.
    fn adjacency(&self) -> Vec<Vec<(u32, bool)>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adj[a as usize].push((b, true));
            adj[b as usize].push((a, false));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    fn local(&self, v: Vertex) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    fn has_local_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a as u32, b as u32))
    }

    /// Writes the tree as `tree <k> <mode>`, then `v <id> <start> <end>` and
    /// `e <tail> <head>` lines.
    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "tree {} {}", self.len(), self.mode)?;
        for (i, &v) in self.vertices.iter().enumerate() {
            writeln!(out, "v {v} {} {}", self.start_ok[i] as u8, self.end_ok[i] as u8)?;
        }
        for (a, b) in self.edges() {
            writeln!(out, "e {a} {b}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self, String> {
        let mut mode = None;
        let mut verts: Vec<(Vertex, bool, bool)> = Vec::new();
        let mut edges = Vec::new();
        let flag = |s: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(format!("bad flag {s:?}")),
        };
        let num = |s: &str| s.parse::<Vertex>().map_err(|e| e.to_string());
        for line in input.lines() {
            let line = line.map_err(|e| e.to_string())?;
            let f: Vec<&str> = line.split_whitespace().collect();
            match f.as_slice() {
                [] => {}
                ["tree", _, m] => mode = Some(m.parse()?),
                ["v", id, s, e] => verts.push((num(id)?, flag(s)?, flag(e)?)),
                ["e", a, b] => edges.push((num(a)?, num(b)?)),
                _ => return Err(format!("unrecognised line {line:?}")),
            }
        }
        verts.sort_unstable_by_key(|t| t.0);
        let mode = mode.ok_or("missing tree header")?;
        OrientedTree::new(
            verts.iter().map(|t| t.0).collect(),
            &edges,
            verts.iter().map(|t| t.1).collect(),
            verts.iter().map(|t| t.2).collect(),
            mode,
        )
        .map_err(|e| e.to_string())
    }
}

/// Endpoint eligibility flags for the vertices of a tree (in the given order).
pub fn eligibility(
    cd: &ColoredDigraph,
    tree: &[Vertex],
    k1: &VertexMask,
    v1: &VertexMask,
    mode: EligibilityMode,
) -> (Vec<bool>, Vec<bool>) {
    let inside = VertexMask::from_vertices(cd.n(), tree.iter().copied());
    match mode {
        EligibilityMode::Upper => {
            let outside = |w: &Vertex| k1.contains(*w) && !inside.contains(*w);
            let start = tree
                .iter()
                .map(|&v| cd.blue_in(v).iter().chain(cd.red_in(v)).any(outside))
                .collect();
            let end = tree
                .iter()
                .map(|&v| cd.blue_out(v).iter().chain(cd.red_out(v)).any(outside))
                .collect();
            (start, end)
        }
        EligibilityMode::Lower => {
            let start = tree.iter().map(|&v| cd.blue_in(v).iter().any(|&w| v1.contains(w))).collect();
            let end = tree.iter().map(|&v| cd.red_out(v).iter().any(|&w| v1.contains(w))).collect();
            (start, end)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingResult {
    pub phi: usize,
    /// Paths as sequences of (global) vertex ids.
    pub packing: Vec<Vec<Vertex>>,
    pub mode: EligibilityMode,
}

impl PackingResult {
    pub fn covered(&self) -> usize {
        self.packing.iter().map(Vec::len).sum()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Up {
    Closed,
    OpenOut,
    OpenIn,
}

struct Node {
    children_in: Vec<u32>,
    children_out: Vec<u32>,
    closed: i64,
    open_out: i64,
    open_in: i64,
    base: i64,
    /// `None` means the path starts at v (cost 0); only meaningful when the
    /// corresponding cost is finite.
    in_pick: Option<u32>,
    in_cost: i64,
    out_pick: Option<u32>,
    out_cost: i64,
}

/// Exact φ(T) and an optimal packing via a linear-time tree DP.
pub fn phi_dp(t: &OrientedTree) -> PackingResult {
    let k = t.len();
    if k == 0 {
        return PackingResult { phi: 0, packing: Vec::new(), mode: t.mode };
    }
    let adj = t.adjacency();
    let mut parent = vec![u32::MAX; k];
    let mut order = Vec::with_capacity(k);
    let mut stack = vec![0u32];
    parent[0] = 0;
    while let Some(v) = stack.pop() {
        order.push(v);
        for &(w, _) in adj[v as usize].iter().rev() {
            if parent[w as usize] == u32::MAX {
                parent[w as usize] = v;
                stack.push(w);
            }
        }
    }
    let mut nodes: Vec<Node> = (0..k)
        .map(|v| {
            let mut children_in = Vec::new();
            let mut children_out = Vec::new();
            for &(w, v_is_tail) in &adj[v] {
                if v != 0 && w == parent[v] {
                    continue;
                }
                if v_is_tail {
                    children_out.push(w);
                } else {
                    children_in.push(w);
                }
            }
            Node {
                children_in,
                children_out,
                closed: INF,
                open_out: INF,
                open_in: INF,
                base: 0,
                in_pick: None,
                in_cost: INF,
                out_pick: None,
                out_cost: INF,
            }
        })
        .collect();

    for &v in order.iter().rev() {
        let vi = v as usize;
        let base: i64 = nodes[vi]
            .children_in
            .iter()
            .chain(&nodes[vi].children_out)
            .map(|&c| nodes[c as usize].closed)
            .fold(0, |a, b| (a + b).min(INF));
        // prefer extending a child fragment over starting here; smallest child first
        let mut in_cost = if t.start_ok[vi] { 0 } else { INF };
        let mut in_pick = None;
        for &c in &nodes[vi].children_in {
            let n = &nodes[c as usize];
            let d = n.open_out - n.closed;
            if n.open_out < INF && (d < in_cost || (d == in_cost && in_pick.is_none())) {
                in_cost = d;
                in_pick = Some(c);
            }
        }
        let mut out_cost = if t.end_ok[vi] { 0 } else { INF };
        let mut out_pick = None;
        for &c in &nodes[vi].children_out {
            let n = &nodes[c as usize];
            let d = n.open_in - n.closed;
            if n.open_in < INF && (d < out_cost || (d == out_cost && out_pick.is_none())) {
                out_cost = d;
                out_pick = Some(c);
            }
        }
        let covered = (base + in_cost + out_cost).min(INF);
        let node = &mut nodes[vi];
        node.base = base;
        node.in_cost = in_cost;
        node.in_pick = in_pick;
        node.out_cost = out_cost;
        node.out_pick = out_pick;
        node.closed = covered.min(base + 1);
        if vi != 0 {
            let p = parent[vi] as usize;
            if t.has_local_edge(vi, p) {
                node.open_out = (base + in_cost).min(INF);
            }
            if t.has_local_edge(p, vi) {
                node.open_in = (base + out_cost).min(INF);
            }
        }
    }

    // top-down backtrace
    let mut state = vec![Up::Closed; k];
    let mut next = vec![u32::MAX; k];
    let mut covered = vec![false; k];
    for &v in &order {
        let vi = v as usize;
        let n = &nodes[vi];
        let (use_in, use_out) = match state[vi] {
            Up::Closed => {
                let cover = n.base + n.in_cost + n.out_cost <= n.base + 1;
                (cover, cover)
            }
            Up::OpenOut => (true, false),
            Up::OpenIn => (false, true),
        };
        covered[vi] = use_in || use_out;
        if use_in {
            if let Some(c) = n.in_pick {
                state[c as usize] = Up::OpenOut;
                next[c as usize] = v;
            }
        }
        if use_out {
            if let Some(c) = n.out_pick {
                state[c as usize] = Up::OpenIn;
                next[vi] = c;
            }
        }
        if state[vi] == Up::OpenOut {
            next[vi] = parent[vi];
        }
    }
    let mut has_prev = vec![false; k];
    for &w in &next {
        if w != u32::MAX {
            has_prev[w as usize] = true;
        }
    }
    let mut packing = Vec::new();
    for s in 0..k {
        if covered[s] && !has_prev[s] {
            let mut path = vec![t.vertices[s]];
            let mut cur = s;
            while next[cur] != u32::MAX {
                cur = next[cur] as usize;
                path.push(t.vertices[cur]);
            }
            packing.push(path);
        }
    }
    let phi = nodes[0].closed as usize;
    debug_assert_eq!(phi, k - covered.iter().filter(|&&c| c).count());
    PackingResult { phi, packing, mode: t.mode }
}

/// Exact φ(T) by exhaustive search over all valid packings.
pub fn phi_brute(t: &OrientedTree) -> Result<usize, TreeError> {
    phi_brute_capped(t, BRUTE_CAP)
}

pub fn phi_brute_capped(t: &OrientedTree, cap: usize) -> Result<usize, TreeError> {
    let k = t.len();
    if k > cap || k > 20 {
        return Err(TreeError::TooLarge { size: k, cap });
    }
    let adj = t.adjacency();
    // every properly oriented path with eligible endpoints, as a vertex mask
    let mut by_min: Vec<Vec<u32>> = vec![Vec::new(); k];
    let mut stack = Vec::new();
    for s in 0..k {
        if !t.start_ok[s] {
            continue;
        }
        stack.push((s, 1u32 << s));
        while let Some((v, mask)) = stack.pop() {
            if t.end_ok[v] {
                by_min[mask.trailing_zeros() as usize].push(mask);
            }
            for &(w, v_is_tail) in &adj[v] {
                if v_is_tail && mask & (1 << w) == 0 {
                    stack.push((w as usize, mask | (1 << w)));
                }
            }
        }
    }
    let full = if k == 32 { u32::MAX } else { (1u32 << k) - 1 };
    let mut memo: HashMap<u32, usize> = HashMap::new();
    fn go(decided: u32, full: u32, by_min: &[Vec<u32>], memo: &mut HashMap<u32, usize>) -> usize {
        if decided == full {
            return 0;
        }
        if let Some(&r) = memo.get(&decided) {
            return r;
        }
        let v = (!decided).trailing_zeros() as usize;
        let mut best = 1 + go(decided | (1 << v), full, by_min, memo);
        // a path through v with all vertices undecided has v as its minimum
        for &p in &by_min[v] {
            if p & decided == 0 {
                best = best.min(go(decided | p, full, by_min, memo));
            }
        }
        memo.insert(decided, best);
        best
    }
    Ok(go(0, full, &by_min, &mut memo))
}

/// Checks that a packing is a valid witness for its claimed φ.
pub fn validate_packing(t: &OrientedTree, r: &PackingResult) -> Result<(), String> {
    let mut used = vec![false; t.len()];
    for path in &r.packing {
        let local: Vec<usize> = path
            .iter()
            .map(|&v| t.local(v).ok_or_else(|| format!("vertex {v} not in tree")))
            .collect::<Result<_, _>>()?;
        let (&first, &last) = match (local.first(), local.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err("empty path".into()),
        };
        if !t.start_ok[first] || !t.end_ok[last] {
            return Err(format!("path {path:?} has an ineligible endpoint"));
        }
        for w in local.windows(2) {
            if !t.has_local_edge(w[0], w[1]) {
                return Err(format!("path {path:?} uses a non-edge"));
            }
        }
        for &i in &local {
            if std::mem::replace(&mut used[i], true) {
                return Err(format!("vertex {} covered twice", t.vertices[i]));
            }
        }
    }
    let uncovered = used.iter().filter(|&&u| !u).count();
    if uncovered != r.phi {
        return Err(format!("phi {} but {} uncovered", r.phi, uncovered));
    }
    Ok(())
}
