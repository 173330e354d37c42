//! Phase 2: eliminate cycles shorter than N0 with Out-Phase / In-Phase trees
//! of near permutation digraphs (NPDs), using only D4 edges.
//!
//! An NPD is stored relative to the current permutation Π: its path and the
//! cycles it created are lists of segments of Π's cycles, and the Π cycles it
//! has absorbed are listed as consumed. Every other Π cycle is still intact.

use std::collections::HashMap;

use super::{ClosingRule, ContractedDigraph, HamError, Permutation, PhaseParams};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BoostStats {
    /// Small cycles in the input permutation.
    pub small_cycles: usize,
    pub eliminated: usize,
    pub attempts: usize,
    pub w_peak: usize,
}

struct Root {
    cycles: Vec<Vec<u32>>,
    cyc: Vec<u32>,
    pos: Vec<u32>,
}

impl Root {
    fn new(p: &Permutation) -> Self {
        let cycles = p.cycles();
        let mut cyc = vec![0; p.len()];
        let mut pos = vec![0; p.len()];
        for (c, list) in cycles.iter().enumerate() {
            for (i, &v) in list.iter().enumerate() {
                cyc[v as usize] = c as u32;
                pos[v as usize] = i as u32;
            }
        }
        Root { cycles, cyc, pos }
    }

    fn cycle_len(&self, c: u32) -> u32 {
        self.cycles[c as usize].len() as u32
    }

    fn seg_vertex(&self, s: Seg, i: u32) -> u32 {
        let c = &self.cycles[s.cyc as usize];
        c[((s.start + i) % c.len() as u32) as usize]
    }

    fn seg_offset(&self, s: Seg, w: u32) -> Option<u32> {
        if self.cyc[w as usize] != s.cyc {
            return None;
        }
        let l = self.cycle_len(s.cyc);
        let off = (self.pos[w as usize] + l - s.start) % l;
        (off < s.len).then_some(off)
    }

    /// The whole Π cycle of `w`, starting at `w`.
    fn from(&self, w: u32) -> Seg {
        let c = self.cyc[w as usize];
        Seg { cyc: c, start: self.pos[w as usize], len: self.cycle_len(c) }
    }
}

/// `len` consecutive vertices of a Π cycle, starting at position `start`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Seg {
    cyc: u32,
    start: u32,
    len: u32,
}

#[derive(Clone, Debug)]
struct Chain {
    segs: Vec<Seg>,
    len: u32,
}

impl Chain {
    fn new(segs: Vec<Seg>) -> Self {
        let len = segs.iter().map(|s| s.len).sum();
        Chain { segs, len }
    }

    fn offset(&self, root: &Root, w: u32) -> Option<u32> {
        let mut acc = 0;
        for &s in &self.segs {
            if let Some(o) = root.seg_offset(s, w) {
                return Some(acc + o);
            }
            acc += s.len;
        }
        None
    }

    fn at(&self, root: &Root, mut i: u32) -> u32 {
        for &s in &self.segs {
            if i < s.len {
                return root.seg_vertex(s, i);
            }
            i -= s.len;
        }
        unreachable!("index past the end of a chain")
    }

    /// First `k` vertices and the rest.
    fn split(&self, root: &Root, k: u32) -> (Chain, Chain) {
        let mut head = Vec::new();
        let mut tail = Vec::new();
        let mut acc = 0;
        for &s in &self.segs {
            if acc + s.len <= k {
                head.push(s);
            } else if acc >= k {
                tail.push(s);
            } else {
                let cut = k - acc;
                let l = root.cycle_len(s.cyc);
                head.push(Seg { len: cut, ..s });
                tail.push(Seg { cyc: s.cyc, start: (s.start + cut) % l, len: s.len - cut });
            }
            acc += s.len;
        }
        (Chain::new(head), Chain::new(tail))
    }

    fn then(mut self, other: Chain) -> Chain {
        self.segs.extend(other.segs);
        self.len += other.len;
        self
    }

    fn vertices<'a>(&'a self, root: &'a Root) -> impl Iterator<Item = u32> + 'a {
        self.segs.iter().flat_map(move |&s| (0..s.len).map(move |i| root.seg_vertex(s, i)))
    }
}

#[derive(Clone, Debug)]
struct Npd {
    path: Chain,
    cycles: Vec<Chain>,
    consumed: Vec<u32>,
}

enum Loc {
    Path(u32),
    Cycle(usize, u32),
    Intact,
}

impl Npd {
    fn locate(&self, root: &Root, w: u32) -> Loc {
        if let Some(o) = self.path.offset(root, w) {
            return Loc::Path(o);
        }
        for (ci, c) in self.cycles.iter().enumerate() {
            if let Some(o) = c.offset(root, w) {
                return Loc::Cycle(ci, o);
            }
        }
        debug_assert!(!self.consumed.contains(&root.cyc[w as usize]));
        Loc::Intact
    }

    fn start(&self, root: &Root) -> u32 {
        self.path.at(root, 0)
    }

    fn end(&self, root: &Root) -> u32 {
        self.path.at(root, self.path.len - 1)
    }

    /// Closes the path and writes the result over Π.
    fn materialize(&self, root: &Root, base: &Permutation) -> Permutation {
        let mut p = base.clone();
        for chain in std::iter::once(&self.path).chain(&self.cycles) {
            let vs: Vec<u32> = chain.vertices(root).collect();
            for (i, &v) in vs.iter().enumerate() {
                p.set_succ(v, vs[(i + 1) % vs.len()]);
            }
        }
        p
    }
}

/// The conditioning set W.
struct Used {
    mark: Vec<bool>,
    list: Vec<u32>,
    cap: usize,
    peak: usize,
}

impl Used {
    fn contains(&self, v: u32) -> bool {
        self.mark[v as usize]
    }

    fn insert(&mut self, v: u32) {
        if !std::mem::replace(&mut self.mark[v as usize], true) {
            self.list.push(v);
            self.peak = self.peak.max(self.list.len());
        }
    }

    fn full(&self) -> bool {
        self.list.len() + 2 > self.cap
    }

    fn clear(&mut self) {
        for v in self.list.drain(..) {
            self.mark[v as usize] = false;
        }
    }
}

enum Step {
    Child(Npd),
    Closed(Npd),
    Rejected,
    Full,
}

struct Ctx<'a> {
    d: &'a ContractedDigraph,
    params: &'a PhaseParams,
    root: Root,
    /// `rev_in4[v]` lists every w with in_4(w) = v.
    rev_in4: &'a [Vec<u32>],
    rev_out4: &'a [Vec<u32>],
}

impl Ctx<'_> {
    fn n0(&self) -> u32 {
        self.params.n0 as u32
    }

    /// Out-Phase exchange through the D4 edge (v, w), v the path end.
    fn out_step(&self, g: &Npd, w: u32, used: &mut Used) -> Step {
        if used.contains(w) {
            return Step::Rejected;
        }
        if used.full() {
            return Step::Full;
        }
        let root = &self.root;
        used.insert(g.end(root));
        used.insert(w);
        let n0 = self.n0();
        match g.locate(root, w) {
            Loc::Path(0) => {
                if g.path.len >= n0 {
                    Step::Closed(g.clone())
                } else {
                    Step::Rejected
                }
            }
            Loc::Path(k) => {
                let x = g.path.at(root, k - 1);
                if used.contains(x) || k < n0 || g.path.len - k < n0 {
                    return Step::Rejected;
                }
                let (head, tail) = g.path.split(root, k);
                let mut child = g.clone();
                child.path = head;
                child.cycles.push(tail);
                Step::Child(child)
            }
            Loc::Cycle(ci, k) => {
                let c = &g.cycles[ci];
                let x = c.at(root, (k + c.len - 1) % c.len);
                if used.contains(x) || g.path.len + c.len < n0 {
                    return Step::Rejected;
                }
                let (a, b) = c.split(root, k);
                let mut child = g.clone();
                child.cycles.swap_remove(ci);
                child.path = child.path.then(b).then(a);
                Step::Child(child)
            }
            Loc::Intact => {
                let seg = root.from(w);
                let x = root.seg_vertex(seg, seg.len - 1);
                if used.contains(x) || g.path.len + seg.len < n0 {
                    return Step::Rejected;
                }
                let mut child = g.clone();
                child.consumed.push(seg.cyc);
                child.path = child.path.then(Chain::new(vec![seg]));
                Step::Child(child)
            }
        }
    }

    /// In-Phase exchange through the D4 edge (w, u), u the path start. Only
    /// structural validity is checked; C(i) is enforced on replay.
    fn in_step(&self, g: &Npd, w: u32, check_lengths: bool) -> Option<(Npd, u32)> {
        let root = &self.root;
        let n0 = self.n0();
        match g.locate(root, w) {
            Loc::Path(k) if k + 1 == g.path.len => None,
            Loc::Path(k) => {
                let (head, tail) = g.path.split(root, k + 1);
                if check_lengths && (head.len < n0 || tail.len < n0) {
                    return None;
                }
                let x = tail.at(root, 0);
                let mut child = g.clone();
                child.path = tail;
                child.cycles.push(head);
                Some((child, x))
            }
            Loc::Cycle(ci, k) => {
                let c = &g.cycles[ci];
                let (a, b) = c.split(root, (k + 1) % c.len);
                let rotated = b.then(a);
                let x = rotated.at(root, 0);
                let mut child = g.clone();
                child.cycles.swap_remove(ci);
                child.path = rotated.then(child.path);
                Some((child, x))
            }
            Loc::Intact => {
                let c = root.cyc[w as usize];
                let l = root.cycle_len(c);
                let seg = Seg { cyc: c, start: (root.pos[w as usize] + 1) % l, len: l };
                let x = root.seg_vertex(seg, 0);
                let mut child = g.clone();
                child.consumed.push(c);
                child.path = Chain::new(vec![seg]).then(child.path);
                Some((child, x))
            }
        }
    }

    fn closes(&self, v: u32, u: u32) -> bool {
        let d = self.d;
        match self.params.closing {
            ClosingRule::StartInChoice => d.in4(u) == v,
            ClosingRule::EndOutChoice => d.out4(v) == u,
            ClosingRule::Either => d.in4(u) == v || d.out4(v) == u,
        }
    }

    fn out_phase(&self, root_npd: Npd, used: &mut Used) -> Result<Vec<Npd>, Npd> {
        let (nu, t2) = (self.params.nu.max(1), self.params.t2);
        let mut level = vec![root_npd];
        let mut depth = 0;
        while level.len() < nu && depth < t2 {
            let mut next = Vec::new();
            let mut full = false;
            for g in &level {
                let v = g.end(&self.root);
                full |= push(self.out_step(g, self.d.out4(v), used), &mut next)?;
            }
            for g in &level {
                let v = g.end(&self.root);
                for &w in &self.rev_in4[v as usize] {
                    full |= push(self.out_step(g, w, used), &mut next)?;
                }
            }
            next.truncate(3 * nu);
            if next.is_empty() {
                break;
            }
            level = next;
            depth += 1;
            if full {
                break;
            }
        }
        Ok(level)
    }

    /// Grows one In-Phase tree on `g` under C(ii) only and returns every node
    /// as (path start, chain of w's), shallowest first.
    fn in_phase(&self, g: &Npd, used: &mut Used) -> Vec<(u32, Vec<u32>)> {
        let (nu, t2) = (self.params.nu.max(1), self.params.t2);
        let root = &self.root;
        let mut level = vec![(g.clone(), Vec::<u32>::new())];
        let mut nodes = vec![(g.start(root), Vec::new())];
        let mut depth = 0;
        'grow: while level.len() < nu && depth < t2 {
            let mut next = Vec::new();
            let mut candidates = Vec::new();
            for (i, (h, _)) in level.iter().enumerate() {
                candidates.push((i, self.d.in4(h.start(root))));
            }
            for (i, (h, _)) in level.iter().enumerate() {
                for &w in &self.rev_out4[h.start(root) as usize] {
                    candidates.push((i, w));
                }
            }
            for (i, w) in candidates {
                let (h, chain) = &level[i];
                if used.contains(w) {
                    continue;
                }
                if used.full() {
                    break 'grow;
                }
                used.insert(w);
                used.insert(h.start(root));
                if let Some((child, x)) = self.in_step(h, w, false) {
                    if used.contains(x) {
                        continue;
                    }
                    let mut c = chain.clone();
                    c.push(w);
                    next.push((child, c));
                }
            }
            next.truncate(3 * nu);
            if next.is_empty() {
                break;
            }
            nodes.extend(next.iter().map(|(h, c)| (h.start(root), c.clone())));
            level = next;
            depth += 1;
        }
        nodes
    }

    /// Replays an In-Phase chain on an Out-Phase leaf under C(i).
    fn replay(&self, leaf: &Npd, chain: &[u32], u: u32) -> Option<Npd> {
        let root = &self.root;
        let mut g = leaf.clone();
        for &w in chain {
            g = self.in_step(&g, w, true)?.0;
        }
        (g.start(root) == u && g.path.len >= self.n0()).then_some(g)
    }

    /// One attempt at eliminating a small cycle, broken before position `cut`.
    fn attempt(&self, c: u32, cut: u32, used: &mut Used) -> Option<Npd> {
        let root = &self.root;
        let seg = Seg { cyc: c, start: cut, len: root.cycle_len(c) };
        let g0 = Npd { path: Chain::new(vec![seg]), cycles: Vec::new(), consumed: vec![c] };
        let leaves = match self.out_phase(g0, used) {
            Ok(l) => l,
            Err(closed) => return Some(closed),
        };
        if leaves.iter().any(|g| g.path.len < self.n0()) {
            return None;
        }
        let Some(first) = leaves.first() else { return None };
        if !self.params.global_w {
            used.clear();
        }
        let in_leaves = self.in_phase(first, used);
        let mut by_start: HashMap<u32, Vec<usize>> = HashMap::new();
        let mut by_in4: HashMap<u32, Vec<usize>> = HashMap::new();
        for (j, &(u, _)) in in_leaves.iter().enumerate() {
            if self.d.is_super(u) {
                continue;
            }
            by_start.entry(u).or_default().push(j);
            by_in4.entry(self.d.in4(u)).or_default().push(j);
        }
        for leaf in &leaves {
            let v = leaf.end(root);
            let mut cands: Vec<usize> = by_start
                .get(&self.d.out4(v))
                .into_iter()
                .chain(by_in4.get(&v))
                .flatten()
                .copied()
                .collect();
            cands.sort_unstable();
            cands.dedup();
            for j in cands {
                let (u, chain) = &in_leaves[j];
                if !self.closes(v, *u) {
                    continue;
                }
                if let Some(g) = self.replay(leaf, chain, *u) {
                    return Some(g);
                }
            }
        }
        None
    }
}

fn push(s: Step, next: &mut Vec<Npd>) -> Result<bool, Npd> {
    match s {
        Step::Child(c) => next.push(c),
        Step::Closed(c) => return Err(c),
        Step::Full => return Ok(true),
        Step::Rejected => {}
    }
    Ok(false)
}

fn reverse_index(n: usize, f: impl Fn(u32) -> u32) -> Vec<Vec<u32>> {
    let mut rev = vec![Vec::new(); n];
    for v in 0..n as u32 {
        rev[f(v) as usize].push(v);
    }
    rev
}

/// Boosts the minimum cycle length to at least N0, one small cycle at a time.
pub fn phase2_boost(
    pi: &Permutation,
    d: &ContractedDigraph,
    params: &PhaseParams,
) -> (Result<Permutation, HamError>, BoostStats) {
    let n = d.len();
    let n0 = params.n0.min(n);
    let params = &PhaseParams { n0, ..params.clone() };
    let rev_in4 = reverse_index(n, |v| d.in4(v));
    let rev_out4 = reverse_index(n, |v| d.out4(v));
    let mut used = Used { mark: vec![false; n], list: Vec::new(), cap: params.w_cap, peak: 0 };
    let mut stats = BoostStats::default();
    let mut current = pi.clone();
    let mut first = true;
    loop {
        let ctx = Ctx { d, params, root: Root::new(&current), rev_in4: &rev_in4, rev_out4: &rev_out4 };
        let small: Vec<u32> =
            (0..ctx.root.cycles.len() as u32).filter(|&c| (ctx.root.cycle_len(c) as usize) < n0).collect();
        if first {
            stats.small_cycles = small.len();
            first = false;
        }
        let Some(&c) = small.first() else {
            stats.w_peak = used.peak;
            return (Ok(current), stats);
        };
        let len = ctx.root.cycle_len(c);
        let tries = if params.global_w {
            if len >= 4 { 2 } else { 1 }
        } else {
            params.cuts_per_cycle.clamp(1, len as usize) as u32
        };
        let mut done = None;
        for cut in (0..tries).map(|i| i * len / tries) {
            stats.attempts += 1;
            if !params.global_w {
                used.clear();
            }
            if let Some(g) = ctx.attempt(c, cut, &mut used) {
                done = Some(g.materialize(&ctx.root, &current));
                break;
            }
        }
        match done {
            Some(next) => {
                current = next;
                stats.eliminated += 1;
            }
            None => {
                stats.w_peak = used.peak;
                return (Err(HamError::BoostFailed { remaining: small.len() }), stats);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{perfect_matching, synthetic};
    use super::*;
    use crate::rng::Seed;

    #[test]
    fn chain_split_and_rotate() {
        let p = Permutation::from_succ(vec![1, 2, 3, 4, 0]).unwrap();
        let root = Root::new(&p);
        let c = Chain::new(vec![Seg { cyc: 0, start: 3, len: 5 }]);
        assert_eq!(c.vertices(&root).collect::<Vec<_>>(), vec![3, 4, 0, 1, 2]);
        let (a, b) = c.split(&root, 2);
        assert_eq!(a.vertices(&root).collect::<Vec<_>>(), vec![3, 4]);
        assert_eq!(b.vertices(&root).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(b.offset(&root, 1), Some(1));
        assert_eq!(a.offset(&root, 1), None);
        assert_eq!(b.then(a).at(&root, 4), 4);
    }

    #[test]
    fn no_small_cycles_is_identity() {
        let d = synthetic(400, 0, Seed(2));
        let pi = perfect_matching(&d).unwrap();
        let params = PhaseParams { n0: 1, ..PhaseParams::desk(d.len()) };
        let (out, stats) = phase2_boost(&pi, &d, &params);
        assert_eq!(out.unwrap(), pi);
        assert_eq!(stats.small_cycles, 0);
    }

    #[test]
    fn boosts_synthetic_instances() {
        let mut ok = 0;
        for s in 0..10 {
            let d = synthetic(20_000, 1_000, Seed(s));
            let Some(pi) = perfect_matching(&d) else { continue };
            let params = PhaseParams::desk(d.len());
            let (out, _) = phase2_boost(&pi, &d, &params);
            if let Ok(p) = out {
                p.verify_realized(&d).unwrap();
                assert!(p.cycles().iter().all(|c| c.len() >= params.n0));
                ok += 1;
            }
        }
        assert!(ok >= 8, "only {ok}/10 boosted");
    }
}
