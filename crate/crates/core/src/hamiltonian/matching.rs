//! Phase 1: a perfect matching of the light bipartite graph, read as a
//! permutation digraph.

use std::collections::VecDeque;

use super::{ContractedDigraph, HamError, Permutation, LIGHT};
use crate::rng::Rng;

const NIL: u32 = u32::MAX;

/// Maximum bipartite matching (Hopcroft–Karp). `adj[a]` lists the right-side
/// neighbours of left vertex `a`; returns the partner of each left vertex.
pub fn hopcroft_karp(adj: &[Vec<u32>], right: usize) -> Vec<u32> {
    let left = adj.len();
    let mut pair_l = vec![NIL; left];
    let mut pair_r = vec![NIL; right];
    let mut dist = vec![u32::MAX; left];
    let mut it = vec![0usize; left];
    let mut queue = VecDeque::new();
    let mut stack: Vec<u32> = Vec::new();
    let mut via: Vec<u32> = Vec::new();
    loop {
        queue.clear();
        for a in 0..left {
            if pair_l[a] == NIL {
                dist[a] = 0;
                queue.push_back(a as u32);
            } else {
                dist[a] = u32::MAX;
            }
        }
        let mut found = false;
        while let Some(a) = queue.pop_front() {
            for &b in &adj[a as usize] {
                let a2 = pair_r[b as usize];
                if a2 == NIL {
                    found = true;
                } else if dist[a2 as usize] == u32::MAX {
                    dist[a2 as usize] = dist[a as usize] + 1;
                    queue.push_back(a2);
                }
            }
        }
        if !found {
            return pair_l;
        }
        it.fill(0);
        for root in 0..left as u32 {
            if pair_l[root as usize] != NIL {
                continue;
            }
            stack.clear();
            via.clear();
            stack.push(root);
            while let Some(&a) = stack.last() {
                let ai = a as usize;
                if it[ai] == adj[ai].len() {
                    dist[ai] = u32::MAX;
                    stack.pop();
                    via.pop();
                    continue;
                }
                let b = adj[ai][it[ai]];
                it[ai] += 1;
                let a2 = pair_r[b as usize];
                if a2 == NIL {
                    via.push(b);
                    for (&x, &y) in stack.iter().zip(&via) {
                        pair_l[x as usize] = y;
                        pair_r[y as usize] = x;
                    }
                    break;
                } else if dist[a2 as usize] == dist[ai] + 1 {
                    via.push(b);
                    stack.push(a2);
                }
            }
        }
    }
}

/// Left vertex `a` is adjacent to right vertex `b` iff `(a, b)` is a light edge.
pub fn light_graph(d: &ContractedDigraph) -> Vec<Vec<u32>> {
    let n = d.len();
    let mut adj: Vec<Vec<u32>> = (0..n as u32).map(|a| d.out_choices(a)[..LIGHT].to_vec()).collect();
    for b in 0..n as u32 {
        for &a in &d.in_choices(b)[..LIGHT] {
            adj[a as usize].push(b);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// One matching attempt on the current light split.
pub fn perfect_matching(d: &ContractedDigraph) -> Option<Permutation> {
    let pairs = hopcroft_karp(&light_graph(d), d.len());
    if pairs.iter().any(|&b| b == NIL) {
        return None;
    }
    Some(Permutation::from_succ(pairs).expect("a perfect matching is a bijection"))
}

/// Phase 1 with re-drawn light splits. Returns the permutation and the number
/// of splits tried.
pub fn phase1_matching(d: &mut ContractedDigraph, rng: &mut Rng, budget: usize) -> Result<(Permutation, usize), HamError> {
    for attempt in 1..=budget.max(1) {
        if let Some(p) = perfect_matching(d) {
            return Ok((p, attempt));
        }
        d.shuffle_roles(rng);
    }
    Err(HamError::NoPerfectMatching { attempts: budget.max(1) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;
    use rand::Rng as _;

    fn brute_matching_size(adj: &[Vec<u32>], right: usize) -> usize {
        fn go(a: usize, adj: &[Vec<u32>], used: &mut Vec<bool>) -> usize {
            if a == adj.len() {
                return 0;
            }
            let mut best = go(a + 1, adj, used);
            for &b in &adj[a] {
                if !used[b as usize] {
                    used[b as usize] = true;
                    best = best.max(1 + go(a + 1, adj, used));
                    used[b as usize] = false;
                }
            }
            best
        }
        go(0, adj, &mut vec![false; right])
    }

    #[test]
    fn matches_brute_force_on_small_graphs() {
        let mut rng = Seed(8).rng();
        for _ in 0..300 {
            let l = rng.random_range(1..7);
            let r = rng.random_range(1..7);
            let adj: Vec<Vec<u32>> = (0..l)
                .map(|_| (0..r as u32).filter(|_| rng.random_bool(0.35)).collect())
                .collect();
            let pairs = hopcroft_karp(&adj, r);
            let mut seen = vec![false; r];
            let mut size = 0;
            for (a, &b) in pairs.iter().enumerate() {
                if b != NIL {
                    assert!(adj[a].contains(&b));
                    assert!(!std::mem::replace(&mut seen[b as usize], true));
                    size += 1;
                }
            }
            assert_eq!(size, brute_matching_size(&adj, r));
        }
    }

    #[test]
    fn complete_graph_matches() {
        let adj: Vec<Vec<u32>> = (0..5).map(|_| (0..5).collect()).collect();
        assert!(hopcroft_karp(&adj, 5).iter().all(|&b| b != NIL));
    }

    #[test]
    fn long_augmenting_chain() {
        // a_i -> {b_i, b_{i+1}}, greedy order forces long augmenting paths
        let n = 50_000u32;
        let adj: Vec<Vec<u32>> = (0..n).map(|i| if i + 1 < n { vec![i + 1, i] } else { vec![0, i] }).collect();
        assert!(hopcroft_karp(&adj, n as usize).iter().all(|&b| b != NIL));
    }
}
