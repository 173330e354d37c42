use super::{Digraph, Vertex};

const UNVISITED: u32 = u32::MAX;

/// Strongly connected components by an iterative Tarjan search, O(n + m).
///
/// Each component is sorted; components are ordered by their minimum vertex.
pub fn strong_components(d: &Digraph) -> Vec<Vec<Vertex>> {
    let n = d.n();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<Vertex> = Vec::new();
    // (vertex, position in its out-list)
    let mut call: Vec<(Vertex, usize)> = Vec::new();
    let mut next = 0u32;
    let mut comps = Vec::new();

    for root in 0..n as Vertex {
        if index[root as usize] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root as usize] = next;
        low[root as usize] = next;
        next += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let out = d.out_neighbors(v);
            if *pos < out.len() {
                let w = out[*pos];
                *pos += 1;
                if index[w as usize] == UNVISITED {
                    index[w as usize] = next;
                    low[w as usize] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    call.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent as usize] = low[parent as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack holds the component");
                    on_stack[w as usize] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps.sort_unstable_by_key(|c| c[0]);
    comps
}

/// The largest strong component, ties broken towards the smallest minimum
/// vertex id. Empty only when `d` has no vertices.
pub fn giant_component(d: &Digraph) -> Vec<Vertex> {
    // components are already ordered by minimum vertex, so the first maximum wins
    let mut best: Vec<Vertex> = Vec::new();
    for comp in strong_components(d) {
        if comp.len() > best.len() {
            best = comp;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;
    use rand::Rng;

    fn graph(n: usize, e: &[(Vertex, Vertex)]) -> Digraph {
        Digraph::from_edges(n, e).unwrap()
    }

    #[test]
    fn triangle() {
        let d = graph(4, &[(1, 2), (2, 3), (3, 1)]);
        let c = strong_components(&d);
        assert!(c.contains(&vec![1, 2, 3]));
        assert_eq!(giant_component(&d), vec![1, 2, 3]);
    }

    #[test]
    fn path_is_singletons() {
        let d = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(strong_components(&d), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn two_triangles_joined_by_one_edge() {
        let d = graph(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]);
        let c = strong_components(&d);
        assert_eq!(c, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert_eq!(giant_component(&d), vec![0, 1, 2]);
    }

    #[test]
    fn empty_digraph_tie_break() {
        let d = graph(4, &[]);
        assert_eq!(giant_component(&d), vec![0]);
        assert!(giant_component(&graph(0, &[])).is_empty());
    }

    fn brute_components(d: &Digraph) -> Vec<Vec<Vertex>> {
        let n = d.n();
        let mut reach = vec![vec![false; n]; n];
        for (v, row) in reach.iter_mut().enumerate() {
            row[v] = true;
        }
        for (v, w) in d.edges() {
            reach[v as usize][w as usize] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for v in 0..n {
            if seen[v] {
                continue;
            }
            let comp: Vec<Vertex> =
                (0..n).filter(|&w| reach[v][w] && reach[w][v]).map(|w| w as Vertex).collect();
            for &w in &comp {
                seen[w as usize] = true;
            }
            comps.push(comp);
        }
        comps
    }

    #[test]
    fn agrees_with_reachability_matrix() {
        let mut rng = Seed(99).rng();
        for _ in 0..10_000 {
            let n = rng.random_range(1..=6usize);
            let p: f64 = rng.random_range(0.05..0.6);
            let mut edges = Vec::new();
            for v in 0..n as Vertex {
                for w in 0..n as Vertex {
                    if v != w && rng.random::<f64>() < p {
                        edges.push((v, w));
                    }
                }
            }
            let d = graph(n, &edges);
            assert_eq!(strong_components(&d), brute_components(&d), "edges={edges:?}");
        }
    }

    #[test]
    fn deep_path_does_not_overflow() {
        let n = 200_000;
        let edges: Vec<_> = (0..n as Vertex - 1).map(|v| (v, v + 1)).chain([(n as Vertex - 1, 0)]).collect();
        let d = graph(n, &edges);
        assert_eq!(giant_component(&d).len(), n);
    }
}
