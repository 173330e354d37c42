use super::{GraphError, Vertex};

/// Compressed sparse rows: `targets[offsets[v]..offsets[v+1]]` are the sorted,
/// duplicate-free neighbours of `v`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<Vertex>,
}

impl Adjacency {
    pub(crate) fn from_raw(offsets: Vec<usize>, targets: Vec<Vertex>) -> Self {
        debug_assert_eq!(*offsets.last().unwrap_or(&0), targets.len());
        Adjacency { offsets, targets }
    }

    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        let mut sorted = Vec::with_capacity(edges.len());
        for &(v, w) in edges {
            for x in [v, w] {
                if x as usize >= n {
                    return Err(GraphError::OutOfRange { v: x, n });
                }
            }
            if v == w {
                return Err(GraphError::SelfLoop(v));
            }
            sorted.push((v, w));
        }
        sorted.sort_unstable();
        sorted.dedup();
        let mut offsets = vec![0usize; n + 1];
        for &(v, _) in &sorted {
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets = sorted.into_iter().map(|(_, w)| w).collect();
        Ok(Adjacency { offsets, targets })
    }

    /// Reverse every edge. Rows of the result come out sorted because sources
    /// are visited in increasing order.
    pub fn transpose(&self, n: usize) -> Adjacency {
        let mut offsets = vec![0usize; n + 1];
        for &w in &self.targets {
            offsets[w as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0 as Vertex; self.targets.len()];
        for v in 0..self.rows() {
            for &w in self.neighbors(v as Vertex) {
                targets[fill[w as usize]] = v as Vertex;
                fill[w as usize] += 1;
            }
        }
        Adjacency { offsets, targets }
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn rows(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.rows()).flat_map(move |v| self.neighbors(v as Vertex).iter().map(move |&w| (v as Vertex, w)))
    }
}
