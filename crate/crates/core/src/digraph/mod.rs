//! Two-colour random digraphs, their union, and strong components.
//!
//! `D_{n,p}` is realised as the union of a red and a blue copy of `D_{n,q}`
//! with `(1-q)^2 = 1-p`. Blue edges supply in-neighbours and red edges supply
//! out-neighbours to the peeling process; everything colour-specific is read
//! from the per-colour adjacency, never from the union.

mod csr;
mod io;
mod scc;

pub use csr::Adjacency;
pub use io::{read_edge_list, write_edge_list, FormatError};
pub use scc::{giant_component, strong_components};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{stream, Seed};

pub type Vertex = u32;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("need at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("mean-degree parameter must be positive and finite, got {0}")]
    BadDegree(f64),
    #[error("edge probability {0} is outside (0, 1]")]
    BadProbability(f64),
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("vertex {v} out of range for n = {n}")]
    OutOfRange { v: Vertex, n: usize },
}

/// `n`, `c`, `p = c/n` and the per-colour probability `q = 1 - sqrt(1-p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub c: f64,
    pub p: f64,
    pub q: f64,
}

impl ModelParams {
    pub fn new(n: usize, c: f64) -> Result<Self, ParamError> {
        if !(c.is_finite() && c > 0.0) {
            return Err(ParamError::BadDegree(c));
        }
        Self::with_p(n, c / n as f64).map(|mut m| {
            m.c = c;
            m
        })
    }

    pub fn with_p(n: usize, p: f64) -> Result<Self, ParamError> {
        if n < 2 {
            return Err(ParamError::TooFewVertices(n));
        }
        if !(p.is_finite() && p > 0.0 && p <= 1.0) {
            return Err(ParamError::BadProbability(p));
        }
        // 1 - sqrt(1-p) loses precision for tiny p; the conjugate form does not.
        let q = p / (1.0 + (1.0 - p).sqrt());
        Ok(ModelParams { n, c: p * n as f64, p, q })
    }
}

/// Which colour class / direction a neighbour query reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColorSide {
    BlueIn,
    RedOut,
}

/// Membership bitmap over `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexMask {
    bits: Vec<bool>,
    len: usize,
}

impl VertexMask {
    pub fn empty(n: usize) -> Self {
        VertexMask { bits: vec![false; n], len: 0 }
    }

    pub fn from_vertices(n: usize, vs: impl IntoIterator<Item = Vertex>) -> Self {
        let mut m = Self::empty(n);
        for v in vs {
            m.insert(v);
        }
        m
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        self.bits.get(v as usize).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, v: Vertex) -> bool {
        let slot = &mut self.bits[v as usize];
        if *slot {
            return false;
        }
        *slot = true;
        self.len += 1;
        true
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as Vertex)
    }
}

/// Red and blue edge sets over `0..n` with both-direction indices per colour.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredDigraph {
    n: usize,
    red_out: Adjacency,
    red_in: Adjacency,
    blue_out: Adjacency,
    blue_in: Adjacency,
}

impl ColoredDigraph {
    /// Builds from explicit edge lists. Duplicates within a colour collapse;
    /// self-loops are rejected.
    pub fn from_edges(
        n: usize,
        red: &[(Vertex, Vertex)],
        blue: &[(Vertex, Vertex)],
    ) -> Result<Self, GraphError> {
        let red_out = Adjacency::from_edges(n, red)?;
        let blue_out = Adjacency::from_edges(n, blue)?;
        Ok(Self::from_out_lists(n, red_out, blue_out))
    }

    fn from_out_lists(n: usize, red_out: Adjacency, blue_out: Adjacency) -> Self {
        let red_in = red_out.transpose(n);
        let blue_in = blue_out.transpose(n);
        ColoredDigraph { n, red_out, red_in, blue_out, blue_in }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn red_count(&self) -> usize {
        self.red_out.edge_count()
    }

    pub fn blue_count(&self) -> usize {
        self.blue_out.edge_count()
    }

    pub fn red_out(&self, v: Vertex) -> &[Vertex] {
        self.red_out.neighbors(v)
    }

    pub fn red_in(&self, v: Vertex) -> &[Vertex] {
        self.red_in.neighbors(v)
    }

    pub fn blue_out(&self, v: Vertex) -> &[Vertex] {
        self.blue_out.neighbors(v)
    }

    pub fn blue_in(&self, v: Vertex) -> &[Vertex] {
        self.blue_in.neighbors(v)
    }

    pub fn red_edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.red_out.edges()
    }

    pub fn blue_edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.blue_out.edges()
    }

    pub fn has_red(&self, v: Vertex, w: Vertex) -> bool {
        self.red_out.neighbors(v).binary_search(&w).is_ok()
    }

    pub fn has_blue(&self, v: Vertex, w: Vertex) -> bool {
        self.blue_out.neighbors(v).binary_search(&w).is_ok()
    }

    /// Blue in-neighbours or red out-neighbours of `v` that lie in `within`.
    pub fn color_neighbors(&self, v: Vertex, side: ColorSide, within: &VertexMask) -> Vec<Vertex> {
        let list = match side {
            ColorSide::BlueIn => self.blue_in(v),
            ColorSide::RedOut => self.red_out(v),
        };
        list.iter().copied().filter(|&w| within.contains(w)).collect()
    }

    /// The uncoloured union: an ordered pair is an edge iff it is red or blue.
    pub fn union_view(&self) -> Digraph {
        let n = self.n;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(self.red_count() + self.blue_count());
        offsets.push(0);
        for v in 0..n as Vertex {
            let (a, b) = (self.red_out(v), self.blue_out(v));
            let (mut i, mut j) = (0, 0);
            while i < a.len() || j < b.len() {
                let next = match (a.get(i), b.get(j)) {
                    (Some(&x), Some(&y)) if x == y => {
                        i += 1;
                        j += 1;
                        x
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        i += 1;
                        x
                    }
                    (Some(_), Some(&y)) => {
                        j += 1;
                        y
                    }
                    (Some(&x), None) => {
                        i += 1;
                        x
                    }
                    (None, Some(&y)) => {
                        j += 1;
                        y
                    }
                    (None, None) => unreachable!(),
                };
                targets.push(next);
            }
            offsets.push(targets.len());
        }
        Digraph::from_out(n, Adjacency::from_raw(offsets, targets))
    }
}

/// A simple digraph with out- and in-adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    out: Adjacency,
    inc: Adjacency,
}

impl Digraph {
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        Ok(Self::from_out(n, Adjacency::from_edges(n, edges)?))
    }

    fn from_out(n: usize, out: Adjacency) -> Self {
        let inc = out.transpose(n);
        Digraph { n, out, inc }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.out.edge_count()
    }

    pub fn out_neighbors(&self, v: Vertex) -> &[Vertex] {
        self.out.neighbors(v)
    }

    pub fn in_neighbors(&self, v: Vertex) -> &[Vertex] {
        self.inc.neighbors(v)
    }

    pub fn has_edge(&self, v: Vertex, w: Vertex) -> bool {
        (v as usize) < self.n && self.out.neighbors(v).binary_search(&w).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.out.edges()
    }

    /// Sub-digraph induced by `vs`, relabelled to `0..vs.len()` in the given order.
    pub fn induced(&self, vs: &[Vertex]) -> Digraph {
        let mut local = vec![u32::MAX; self.n];
        for (i, &v) in vs.iter().enumerate() {
            local[v as usize] = i as u32;
        }
        let mut edges = Vec::new();
        for (i, &v) in vs.iter().enumerate() {
            for &w in self.out_neighbors(v) {
                let j = local[w as usize];
                if j != u32::MAX {
                    edges.push((i as Vertex, j));
                }
            }
        }
        Digraph::from_edges(vs.len(), &edges).expect("induced edges are in range and loop-free")
    }
}

/// Samples every ordered pair `(v, w)`, `v != w`, into red with probability `q`
/// and independently into blue with probability `q`.
///
/// Each colour walks the `n(n-1)` ordered pairs in lexicographic order with
/// geometric skips, so the work is proportional to the number of edges.
pub fn sample_colored(params: &ModelParams, seed: Seed) -> ColoredDigraph {
    let n = params.n;
    let red = sample_pairs(n, params.q, &mut seed.stream(stream::RED));
    let blue = sample_pairs(n, params.q, &mut seed.stream(stream::BLUE));
    ColoredDigraph::from_out_lists(n, red, blue)
}

fn sample_pairs(n: usize, q: f64, rng: &mut impl rand::Rng) -> Adjacency {
    let total = n as u64 * (n as u64 - 1);
    let row = n as u64 - 1;
    let mut offsets = vec![0usize; n + 1];
    let mut targets = Vec::with_capacity((total as f64 * q * 1.01) as usize + 16);
    let log_fail = (-q).ln_1p();
    let mut pos: u64 = 0;
    let mut first = true;
    loop {
        let skip = if q >= 1.0 {
            0
        } else {
            let u: f64 = rng.random();
            let s = (-u).ln_1p() / log_fail;
            if s >= total as f64 {
                break;
            }
            s as u64
        };
        pos = if first { skip } else { pos.saturating_add(skip + 1) };
        first = false;
        if pos >= total {
            break;
        }
        let v = pos / row;
        let r = pos % row;
        let w = if r < v { r } else { r + 1 };
        offsets[v as usize + 1] += 1;
        targets.push(w as Vertex);
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    Adjacency::from_raw(offsets, targets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(n: usize, vs: &[Vertex]) -> VertexMask {
        VertexMask::from_vertices(n, vs.iter().copied())
    }

    #[test]
    fn q_from_p() {
        let m = ModelParams::with_p(10, 0.5).unwrap();
        assert!((m.q - 0.292_893_218_813_452_4).abs() < 1e-15);
        assert!(((1.0 - m.q).powi(2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_params() {
        assert_eq!(ModelParams::new(1, 2.0), Err(ParamError::TooFewVertices(1)));
        assert!(matches!(ModelParams::new(10, 20.0), Err(ParamError::BadProbability(_))));
        assert!(matches!(ModelParams::new(10, -1.0), Err(ParamError::BadDegree(_))));
        assert!(ModelParams::new(10, 10.0).is_ok());
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = ModelParams::new(500, 6.0).unwrap();
        assert_eq!(sample_colored(&p, Seed(7)), sample_colored(&p, Seed(7)));
        assert_ne!(sample_colored(&p, Seed(7)), sample_colored(&p, Seed(8)));
    }

    #[test]
    fn full_probability_gives_complete_colours() {
        let p = ModelParams::with_p(5, 1.0).unwrap();
        let cd = sample_colored(&p, Seed(1));
        assert_eq!(cd.red_count(), 20);
        assert_eq!(cd.blue_count(), 20);
        assert!(cd.red_edges().all(|(v, w)| v != w));
    }

    #[test]
    fn union_collapses_shared_pairs() {
        let cd = ColoredDigraph::from_edges(3, &[(1, 2)], &[(1, 2)]).unwrap();
        let u = cd.union_view();
        assert_eq!(u.edges().collect::<Vec<_>>(), vec![(1, 2)]);

        let cd = ColoredDigraph::from_edges(3, &[(1, 2)], &[(2, 1)]).unwrap();
        assert_eq!(cd.union_view().edge_count(), 2);

        let cd = ColoredDigraph::from_edges(3, &[], &[]).unwrap();
        assert_eq!(cd.union_view().edge_count(), 0);
    }

    #[test]
    fn self_loops_rejected() {
        assert!(matches!(
            ColoredDigraph::from_edges(3, &[(1, 1)], &[]),
            Err(GraphError::SelfLoop(1))
        ));
    }

    #[test]
    fn colour_neighbour_queries() {
        let cd = ColoredDigraph::from_edges(10, &[(5, 1), (5, 2)], &[(3, 7)]).unwrap();
        assert_eq!(cd.color_neighbors(7, ColorSide::BlueIn, &mask(10, &[3])), vec![3]);
        assert_eq!(cd.color_neighbors(7, ColorSide::BlueIn, &mask(10, &[])), Vec::<Vertex>::new());
        assert_eq!(cd.color_neighbors(5, ColorSide::RedOut, &mask(10, &[1, 2, 9])), vec![1, 2]);
    }

    #[test]
    fn red_edge_count_matches_binomial_mean() {
        let p = ModelParams::new(100_000, 6.0).unwrap();
        let cd = sample_colored(&p, Seed(3));
        let trials = (p.n as f64) * (p.n as f64 - 1.0);
        let mean = trials * p.q;
        let sd = (trials * p.q * (1.0 - p.q)).sqrt();
        let red = cd.red_count() as f64;
        assert!((red - mean).abs() <= 5.0 * sd, "red={red} mean={mean} sd={sd}");
    }

    #[test]
    fn union_edge_frequency_matches_p() {
        // n = 50, 1000 samples: each ordered pair is a union edge with probability p.
        let p = ModelParams::new(50, 10.0).unwrap();
        let pairs = 50.0 * 49.0;
        let samples = 1000;
        let hits: usize = (0..samples)
            .map(|i| sample_colored(&p, Seed(1000 + i)).union_view().edge_count())
            .sum();
        let trials = pairs * samples as f64;
        let freq = hits as f64 / trials;
        let sd = (p.p * (1.0 - p.p) / trials).sqrt();
        assert!((freq - p.p).abs() <= 3.0 * sd, "freq={freq} p={}", p.p);
    }

    #[test]
    fn induced_relabels() {
        let d = Digraph::from_edges(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap();
        let h = d.induced(&[2, 0, 1]);
        assert_eq!(h.edge_count(), 3);
        assert!(h.has_edge(0, 1));
        assert!(h.has_edge(1, 2));
        assert!(h.has_edge(2, 0));
    }
}
