//! Phase 3: join the cycles of the Phase 2 permutation into one Hamilton cycle.

use std::collections::HashMap;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{ContractedDigraph, HamError, Permutation, PhaseParams};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase3Mode {
    /// Merge cycle pairs through crossing edge pairs, then fall back to the
    /// break-vertex search.
    #[default]
    MergeThenSearch,
    /// Only the break-vertex search over ρ ∈ R_φ.
    SearchOnly,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Phase3Stats {
    pub cycles_in: usize,
    pub merges: usize,
    pub rho_searches: usize,
}

/// Edges still available to Phase 3: every D5 choice, plus (unless strict)
/// every D4 choice that is not an edge of the permutation.
#[derive(Clone, Debug)]
pub struct EdgePool {
    out: Vec<Vec<u32>>,
}

impl EdgePool {
    pub fn new(d: &ContractedDigraph, pi: &Permutation, strict: bool) -> Self {
        let n = d.len();
        let mut out = vec![Vec::new(); n];
        for v in 0..n as u32 {
            out[v as usize].push(d.out5(v));
            out[d.in5(v) as usize].push(v);
            if !strict {
                if pi.succ(v) != d.out4(v) {
                    out[v as usize].push(d.out4(v));
                }
                if pi.succ(d.in4(v)) != v {
                    out[d.in4(v) as usize].push(v);
                }
            }
        }
        for list in &mut out {
            list.sort_unstable();
            list.dedup();
        }
        EdgePool { out }
    }

    pub fn has(&self, a: u32, b: u32) -> bool {
        self.out[a as usize].contains(&b)
    }

    pub fn out(&self, a: u32) -> &[u32] {
        &self.out[a as usize]
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

/// Repeatedly merges two cycles through v ∈ C, w ∈ C' with available edges
/// (v, succ w) and (w, succ v). Returns the number of merges.
pub fn merge_cycles(pi: &mut Permutation, pool: &EdgePool) -> usize {
    let n = pi.len();
    let mut pred = pi.pred_table();
    let cycles = pi.cycles();
    let mut label = vec![0u32; n];
    for (c, list) in cycles.iter().enumerate() {
        for &v in list {
            label[v as usize] = c as u32;
        }
    }
    let mut parent: Vec<u32> = (0..cycles.len() as u32).collect();
    let mut size: Vec<usize> = cycles.iter().map(Vec::len).collect();
    let mut remaining = cycles.len();
    let mut merges = 0;
    let mut progress = true;
    while remaining > 1 && progress {
        progress = false;
        for a in 0..n as u32 {
            for &b in pool.out(a) {
                let (ca, cb) = (find(&mut parent, label[a as usize]), find(&mut parent, label[b as usize]));
                if ca == cb {
                    continue;
                }
                let w = pred[b as usize];
                let sa = pi.succ(a);
                if !pool.has(w, sa) {
                    continue;
                }
                pi.set_succ(a, b);
                pi.set_succ(w, sa);
                pred[b as usize] = a;
                pred[sa as usize] = w;
                let (big, small) = if size[ca as usize] >= size[cb as usize] { (ca, cb) } else { (cb, ca) };
                parent[small as usize] = big;
                size[big as usize] += size[small as usize];
                remaining -= 1;
                merges += 1;
                progress = true;
            }
        }
    }
    merges
}

/// Number of break vertices for a cycle with `c` vertices in V1.
pub fn break_count(c: usize, a: f64) -> usize {
    2 * (c as f64 / a).floor() as usize + 1
}

fn is_cyclic(f: &[usize]) -> bool {
    if f.is_empty() {
        return true;
    }
    let mut len = 1;
    let mut x = f[0];
    while x != 0 {
        x = f[x];
        len += 1;
        if len > f.len() {
            return false;
        }
    }
    len == f.len()
}

/// One break-vertex selection followed by a backtracking search for
/// ρ ∈ R_φ whose joining edges are all in the pool.
pub fn rho_search(pi: &Permutation, d: &ContractedDigraph, pool: &EdgePool, rng: &mut Rng) -> Option<Permutation> {
    let n = pi.len();
    let mut cycles = pi.cycles();
    if cycles.len() <= 1 {
        return Some(pi.clone());
    }
    let in_v1 = |v: &u32| !d.is_super(*v);
    cycles.sort_by_key(|c| (c.iter().filter(|v| in_v1(v)).count(), c[0]));
    let a = n as f64 / (n as f64).ln();
    // v_j in cycle order, with phi(j) the previous break in the same cycle
    let mut v: Vec<u32> = Vec::new();
    let mut phi: Vec<usize> = Vec::new();
    for c in &cycles {
        let ones: Vec<(usize, u32)> = c.iter().copied().enumerate().filter(|(_, v)| in_v1(v)).collect();
        let m = break_count(ones.len(), a).min(ones.len());
        let mut picked: Vec<(usize, u32)> = index::sample(rng, ones.len(), m).into_iter().map(|i| ones[i]).collect();
        picked.sort_unstable();
        let lowest = (0..picked.len()).min_by_key(|&i| picked[i].1).unwrap_or(0);
        picked.rotate_left(lowest);
        let base = v.len();
        for (k, &(_, x)) in picked.iter().enumerate() {
            v.push(x);
            phi.push(base + (k + m - 1) % m);
        }
    }
    let m = v.len();
    let u: Vec<u32> = v.iter().map(|&x| pi.succ(x)).collect();
    // section j starts at u[phi[j]]
    let start_of: HashMap<u32, usize> = (0..m).map(|j| (u[phi[j]], j)).collect();
    let mut rho = vec![usize::MAX; m];
    let mut used = vec![false; m];
    used[0] = true;
    fn search(
        i: usize,
        depth: usize,
        ctx: (&[u32], &[u32], &[usize], &HashMap<u32, usize>, &EdgePool),
        rho: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        let (v, u, phi, start_of, pool) = ctx;
        let m = v.len();
        if depth == m {
            if !pool.has(v[i], u[phi[0]]) {
                return false;
            }
            rho[i] = 0;
            let lambda: Vec<usize> = (0..m).map(|k| phi[rho[k]]).collect();
            return is_cyclic(&lambda);
        }
        for &b in pool.out(v[i]) {
            let Some(&j) = start_of.get(&b) else { continue };
            if used[j] {
                continue;
            }
            used[j] = true;
            rho[i] = j;
            if search(j, depth + 1, ctx, rho, used) {
                return true;
            }
            used[j] = false;
        }
        false
    }
    if !search(0, 1, (&v, &u, &phi, &start_of, pool), &mut rho, &mut used) {
        return None;
    }
    let mut out = pi.clone();
    for i in 0..m {
        out.set_succ(v[i], u[phi[rho[i]]]);
    }
    Some(out)
}

pub fn phase3_reassemble(
    pi: &Permutation,
    d: &ContractedDigraph,
    params: &PhaseParams,
    mut rng: Rng,
) -> (Result<Permutation, HamError>, Phase3Stats) {
    let mut stats = Phase3Stats { cycles_in: pi.cycle_count(), ..Default::default() };
    if stats.cycles_in <= 1 {
        return (Ok(pi.clone()), stats);
    }
    let pool = EdgePool::new(d, pi, params.strict_paper_edges);
    let mut current = pi.clone();
    if params.phase3 == Phase3Mode::MergeThenSearch {
        stats.merges = merge_cycles(&mut current, &pool);
        if current.cycle_count() == 1 {
            return (Ok(current), stats);
        }
    }
    for _ in 0..params.break_budget.max(1) {
        stats.rho_searches += 1;
        if let Some(h) = rho_search(&current, d, &pool, &mut rng) {
            return (Ok(h), stats);
        }
    }
    let cycles = current.cycle_count();
    (Err(HamError::ReassemblyFailed { cycles }), stats)
}
