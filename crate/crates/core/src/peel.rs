//! The Case a / Case b peeling process on the giant strong component.
//!
//! Starting from `S = ∅`, a vertex `v ∈ K1` with at most four blue
//! in-neighbours (or red out-neighbours) in `K1 \ S` pulls those neighbours into
//! `S`, together with itself when `v ∉ S` (Case b). When `v ∈ S` already (Case a)
//! the step only fires if it adds something. The closure `S_L` does not depend
//! on the order in which rules are applied.

use std::collections::VecDeque;
use std::io::{self, BufRead, Write};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::digraph::{ColorSide, ColoredDigraph, Vertex, VertexMask};
use crate::rng::Seed;

/// Deficiency threshold: a count at or below this fires a step.
pub const MAX_DEFICIENT: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeelCase {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeelStep {
    pub case: PeelCase,
    pub pivot: Vertex,
    pub added: Vec<Vertex>,
}

/// Order in which pending rule applications are taken off the worklist.
#[derive(Clone, Copy, Debug)]
pub enum PeelOrder {
    Fifo,
    /// Uniformly random pending entry at every step.
    Shuffled(Seed),
}

#[derive(Clone, Debug)]
pub struct GammaComponent {
    /// Sorted vertex ids.
    pub vertices: Vec<Vertex>,
    /// Directed union edges with both ends in the component. A 2-cycle counts
    /// twice, so it makes the component a non-tree.
    pub edges: usize,
    pub is_tree: bool,
    /// Number of peeling steps whose pivot lies in this component.
    pub pivot_steps: usize,
    /// Number of distinct pivot vertices in this component.
    pub pivots: usize,
}

#[derive(Clone, Debug)]
pub struct PeelResult {
    pub k1: Vec<Vertex>,
    pub s_l: VertexMask,
    pub v1: Vec<Vertex>,
    pub v2: Vec<Vertex>,
    pub components: Vec<GammaComponent>,
    pub steps: Vec<PeelStep>,
}

impl PeelResult {
    pub fn in_k1(&self) -> VertexMask {
        VertexMask::from_vertices(self.s_l.universe(), self.k1.iter().copied())
    }

    pub fn v1_mask(&self) -> VertexMask {
        VertexMask::from_vertices(self.s_l.universe(), self.v1.iter().copied())
    }

    pub fn tree_components(&self) -> impl Iterator<Item = &GammaComponent> {
        self.components.iter().filter(|c| c.is_tree)
    }

    pub fn nontree_vertex_count(&self) -> usize {
        self.components.iter().filter(|c| !c.is_tree).map(|c| c.vertices.len()).sum()
    }
}

struct Counts<'a> {
    cd: &'a ColoredDigraph,
    in_k1: VertexMask,
    in_s: VertexMask,
    blue: Vec<u32>,
    red: Vec<u32>,
}

impl Counts<'_> {
    fn count(&self, v: Vertex, side: ColorSide) -> u32 {
        match side {
            ColorSide::BlueIn => self.blue[v as usize],
            ColorSide::RedOut => self.red[v as usize],
        }
    }

    fn neighbours(&self, v: Vertex, side: ColorSide) -> &[Vertex] {
        match side {
            ColorSide::BlueIn => self.cd.blue_in(v),
            ColorSide::RedOut => self.cd.red_out(v),
        }
    }

    /// Moves `w` into S; returns entries whose count just dropped to the threshold.
    fn add(&mut self, w: Vertex, crossed: &mut Vec<(Vertex, ColorSide)>) {
        self.in_s.insert(w);
        // w stops being an outside blue in-neighbour of its blue out-neighbours
        for &u in self.cd.blue_out(w) {
            if self.in_k1.contains(u) {
                self.blue[u as usize] -= 1;
                if self.blue[u as usize] == MAX_DEFICIENT {
                    crossed.push((u, ColorSide::BlueIn));
                }
            }
        }
        for &u in self.cd.red_in(w) {
            if self.in_k1.contains(u) {
                self.red[u as usize] -= 1;
                if self.red[u as usize] == MAX_DEFICIENT {
                    crossed.push((u, ColorSide::RedOut));
                }
            }
        }
    }
}

pub fn peel(cd: &ColoredDigraph, k1: &[Vertex]) -> PeelResult {
    peel_with_order(cd, k1, PeelOrder::Fifo)
}

pub fn peel_with_order(cd: &ColoredDigraph, k1: &[Vertex], order: PeelOrder) -> PeelResult {
    let n = cd.n();
    let in_k1 = VertexMask::from_vertices(n, k1.iter().copied());
    let mut blue = vec![0u32; n];
    let mut red = vec![0u32; n];
    for &v in k1 {
        blue[v as usize] = cd.blue_in(v).iter().filter(|&&w| in_k1.contains(w)).count() as u32;
        red[v as usize] = cd.red_out(v).iter().filter(|&&w| in_k1.contains(w)).count() as u32;
    }
    let mut st = Counts { cd, in_k1, in_s: VertexMask::empty(n), blue, red };

    let mut sorted_k1 = k1.to_vec();
    sorted_k1.sort_unstable();
    let mut pending: VecDeque<(Vertex, ColorSide)> = VecDeque::new();
    for &v in &sorted_k1 {
        for side in [ColorSide::BlueIn, ColorSide::RedOut] {
            if st.count(v, side) <= MAX_DEFICIENT {
                pending.push_back((v, side));
            }
        }
    }

    let mut rng = match order {
        PeelOrder::Fifo => None,
        PeelOrder::Shuffled(seed) => Some(seed.rng()),
    };
    let mut steps = Vec::new();
    let mut crossed = Vec::new();
    loop {
        let next = match rng.as_mut() {
            None => pending.pop_front(),
            Some(r) if !pending.is_empty() => {
                let i = r.random_range(0..pending.len());
                pending.swap_remove_back(i)
            }
            Some(_) => None,
        };
        let Some((v, side)) = next else { break };
        let count = st.count(v, side);
        let was_in = st.in_s.contains(v);
        if count > MAX_DEFICIENT || (was_in && count == 0) {
            continue;
        }
        let outside: Vec<Vertex> = st
            .neighbours(v, side)
            .iter()
            .copied()
            .filter(|&w| st.in_k1.contains(w) && !st.in_s.contains(w))
            .collect();
        let mut added = Vec::with_capacity(outside.len() + 1);
        if !was_in {
            st.add(v, &mut crossed);
            added.push(v);
        }
        for w in outside {
            st.add(w, &mut crossed);
            added.push(w);
        }
        pending.extend(crossed.drain(..));
        steps.push(PeelStep { case: if was_in { PeelCase::A } else { PeelCase::B }, pivot: v, added });
    }

    let v1: Vec<Vertex> = sorted_k1.iter().copied().filter(|&v| !st.in_s.contains(v)).collect();
    let v2: Vec<Vertex> = sorted_k1
        .iter()
        .copied()
        .filter(|&v| st.in_s.contains(v) && st.blue[v as usize] >= 1 && st.red[v as usize] >= 1)
        .collect();
    let components = gamma_components(cd, &st.in_s, &steps);
    PeelResult { k1: sorted_k1, s_l: st.in_s, v1, v2, components, steps }
}

/// Connected components of the undirected graph underlying the sub-digraph
/// induced by `s_l`, each classified tree / non-tree.
pub fn gamma_components(cd: &ColoredDigraph, s_l: &VertexMask, steps: &[PeelStep]) -> Vec<GammaComponent> {
    let n = cd.n();
    let mut comp_of = vec![u32::MAX; n];
    let mut components = Vec::new();
    let mut queue = Vec::new();
    for root in s_l.iter() {
        if comp_of[root as usize] != u32::MAX {
            continue;
        }
        let id = components.len() as u32;
        comp_of[root as usize] = id;
        queue.clear();
        queue.push(root);
        let mut vertices = Vec::new();
        while let Some(v) = queue.pop() {
            vertices.push(v);
            let around = cd.red_out(v).iter().chain(cd.red_in(v)).chain(cd.blue_out(v)).chain(cd.blue_in(v));
            for &w in around {
                if s_l.contains(w) && comp_of[w as usize] == u32::MAX {
                    comp_of[w as usize] = id;
                    queue.push(w);
                }
            }
        }
        vertices.sort_unstable();
        components.push(GammaComponent { vertices, edges: 0, is_tree: false, pivot_steps: 0, pivots: 0 });
    }
    for c in &mut components {
        c.edges = c.vertices.iter().map(|&v| union_out_within(cd, v, s_l).count()).sum();
        c.is_tree = c.edges + 1 == c.vertices.len();
    }
    let mut seen_pivot = VertexMask::empty(n);
    for step in steps {
        let id = comp_of[step.pivot as usize];
        if id != u32::MAX {
            let c = &mut components[id as usize];
            c.pivot_steps += 1;
            if seen_pivot.insert(step.pivot) {
                c.pivots += 1;
            }
        }
    }
    components
}

/// Union out-neighbours of `v` inside `within`, each listed once.
pub(crate) fn union_out_within<'a>(
    cd: &'a ColoredDigraph,
    v: Vertex,
    within: &'a VertexMask,
) -> impl Iterator<Item = Vertex> + 'a {
    let red = cd.red_out(v);
    let blue = cd.blue_out(v);
    red.iter()
        .copied()
        .chain(blue.iter().copied().filter(move |w| red.binary_search(w).is_err()))
        .filter(move |&w| within.contains(w))
}

/// Per-component `(|V|, |E|)` and whether every component has `|E| < 3|V|/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityReport {
    pub sizes: Vec<(usize, usize)>,
    pub all_sparse: bool,
}

pub fn density_diagnostic(components: &[GammaComponent]) -> DensityReport {
    let sizes: Vec<(usize, usize)> = components.iter().map(|c| (c.vertices.len(), c.edges)).collect();
    let all_sparse = sizes.iter().all(|&(v, e)| 2 * e < 3 * v);
    DensityReport { sizes, all_sparse }
}

/// Checks the fixpoint characterisation and the pivot-density bound.
pub fn check_fixpoint(cd: &ColoredDigraph, pr: &PeelResult) -> Result<(), String> {
    let v1 = pr.v1_mask();
    let k1 = pr.in_k1();
    let in_v1 = |list: &[Vertex]| list.iter().filter(|&&w| v1.contains(w)).count() as u32;
    for &v in &pr.k1 {
        let (b, r) = (in_v1(cd.blue_in(v)), in_v1(cd.red_out(v)));
        if v1.contains(v) {
            if b <= MAX_DEFICIENT || r <= MAX_DEFICIENT {
                return Err(format!("V1 vertex {v} has {b} blue-in / {r} red-out in V1"));
            }
        } else if (1..=MAX_DEFICIENT).contains(&b) || (1..=MAX_DEFICIENT).contains(&r) {
            return Err(format!("S_L vertex {v} has {b} blue-in / {r} red-out in V1"));
        }
    }
    for v in pr.s_l.iter() {
        if !k1.contains(v) {
            return Err(format!("S_L vertex {v} is outside K1"));
        }
    }
    for c in &pr.components {
        if 5 * c.pivot_steps < c.vertices.len() {
            return Err(format!(
                "component of size {} has only {} pivot steps",
                c.vertices.len(),
                c.pivot_steps
            ));
        }
    }
    Ok(())
}

/// Replays a trace from `S = ∅`, checking that every step was a legal rule
/// application at the moment it was taken. Returns the final set.
pub fn replay(cd: &ColoredDigraph, k1: &[Vertex], steps: &[PeelStep]) -> Result<VertexMask, String> {
    let n = cd.n();
    let in_k1 = VertexMask::from_vertices(n, k1.iter().copied());
    let mut s = VertexMask::empty(n);
    for (i, step) in steps.iter().enumerate() {
        let v = step.pivot;
        if !in_k1.contains(v) {
            return Err(format!("step {i}: pivot {v} outside K1"));
        }
        let legal = [ColorSide::BlueIn, ColorSide::RedOut].into_iter().any(|side| {
            let mut expect: Vec<Vertex> = cd
                .color_neighbors(v, side, &in_k1)
                .into_iter()
                .filter(|&w| !s.contains(w))
                .collect();
            if expect.len() as u32 > MAX_DEFICIENT {
                return false;
            }
            match step.case {
                PeelCase::A if !s.contains(v) || expect.is_empty() => return false,
                PeelCase::B if s.contains(v) => return false,
                PeelCase::B => expect.insert(0, v),
                PeelCase::A => {}
            }
            let mut got = step.added.clone();
            got.sort_unstable();
            expect.sort_unstable();
            got == expect
        });
        if !legal {
            return Err(format!("step {i}: {step:?} is not a legal rule application"));
        }
        for &w in &step.added {
            s.insert(w);
        }
    }
    Ok(s)
}

pub fn write_trace_jsonl<W: Write>(steps: &[PeelStep], mut out: W) -> io::Result<()> {
    for step in steps {
        serde_json::to_writer(&mut out, step)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace_jsonl<R: BufRead>(input: R) -> io::Result<Vec<PeelStep>> {
    let mut steps = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        steps.push(serde_json::from_str(&line)?);
    }
    Ok(steps)
}
