//! The contracted digraph D*: V1 plus one super-vertex per packed path, each
//! with five blue in-choices and five red out-choices in V1.

use rand::seq::{index, SliceRandom};
use rand::Rng as _;

use super::HamError;
use crate::digraph::{ColoredDigraph, Vertex};
use crate::packing::PackingResult;
use crate::peel::PeelResult;
use crate::rng::{stream, Rng, Seed};

pub const CHOICES: usize = 5;
pub const LIGHT: usize = 3;
/// Role slot of the D4 choice; slot 4 is D5.
pub const D4: usize = 3;
pub const D5: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Light,
    D4,
    D5,
}

pub fn role_of(slot: usize) -> Role {
    match slot {
        s if s < LIGHT => Role::Light,
        D4 => Role::D4,
        _ => Role::D5,
    }
}

/// Choices are stored role-ordered: slots 0..3 light, slot 3 D4, slot 4 D5.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractedDigraph {
    n1: usize,
    members: Vec<Vec<Vertex>>,
    in_choice: Vec<[u32; CHOICES]>,
    out_choice: Vec<[u32; CHOICES]>,
}

impl ContractedDigraph {
    /// Validates and builds D* from explicit choices (D* indices).
    pub fn from_choices(
        n1: usize,
        members: Vec<Vec<Vertex>>,
        in_choice: Vec<[u32; CHOICES]>,
        out_choice: Vec<[u32; CHOICES]>,
    ) -> Result<Self, HamError> {
        let n = members.len();
        if in_choice.len() != n || out_choice.len() != n || n1 > n {
            return Err(HamError::VerificationFailed("choice tables have the wrong size".into()));
        }
        for v in 0..n {
            for list in [&in_choice[v], &out_choice[v]] {
                let mut s = *list;
                s.sort_unstable();
                if s.windows(2).any(|w| w[0] == w[1]) || s.iter().any(|&w| w as usize >= n1 || w as usize == v) {
                    return Err(HamError::VerificationFailed(format!("bad choice list at {v}: {list:?}")));
                }
            }
            if members[v].is_empty() {
                return Err(HamError::VerificationFailed(format!("vertex {v} has no members")));
            }
        }
        Ok(ContractedDigraph { n1, members, in_choice, out_choice })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn is_super(&self, v: u32) -> bool {
        v as usize >= self.n1
    }

    pub fn members(&self, v: u32) -> &[Vertex] {
        &self.members[v as usize]
    }

    pub fn in_choices(&self, v: u32) -> &[u32; CHOICES] {
        &self.in_choice[v as usize]
    }

    pub fn out_choices(&self, v: u32) -> &[u32; CHOICES] {
        &self.out_choice[v as usize]
    }

    pub fn in4(&self, v: u32) -> u32 {
        self.in_choice[v as usize][D4]
    }

    pub fn out4(&self, v: u32) -> u32 {
        self.out_choice[v as usize][D4]
    }

    pub fn in5(&self, v: u32) -> u32 {
        self.in_choice[v as usize][D5]
    }

    pub fn out5(&self, v: u32) -> u32 {
        self.out_choice[v as usize][D5]
    }

    /// Roles under which `(a, b)` is an edge of D*, via a's out-choices or b's in-choices.
    pub fn edge_roles(&self, a: u32, b: u32) -> impl Iterator<Item = Role> + '_ {
        let outs = self.out_choice[a as usize].iter().enumerate().filter(move |(_, &w)| w == b);
        let ins = self.in_choice[b as usize].iter().enumerate().filter(move |(_, &w)| w == a);
        outs.chain(ins).map(|(slot, _)| role_of(slot))
    }

    pub fn is_edge(&self, a: u32, b: u32) -> bool {
        self.edge_roles(a, b).next().is_some()
    }

    pub fn is_light_edge(&self, a: u32, b: u32) -> bool {
        self.edge_roles(a, b).any(|r| r == Role::Light)
    }

    /// Re-draws the light / D4 / D5 split on every side of every vertex.
    pub fn shuffle_roles(&mut self, rng: &mut Rng) {
        for list in self.in_choice.iter_mut().chain(self.out_choice.iter_mut()) {
            list.shuffle(rng);
        }
    }
}

fn pick5(pool: &[u32], rng: &mut Rng) -> [u32; CHOICES] {
    let mut out = [0u32; CHOICES];
    for (slot, i) in out.iter_mut().zip(index::sample(rng, pool.len(), CHOICES)) {
        *slot = pool[i];
    }
    out.shuffle(rng);
    out
}

/// Contracts every packed path to a super-vertex and samples the 5 + 5 choices.
/// `packings` must be LOWER-mode packings of the tree components.
pub fn contract(
    cd: &ColoredDigraph,
    pr: &PeelResult,
    packings: &[PackingResult],
    seed: Seed,
) -> Result<ContractedDigraph, HamError> {
    let mut index_of = vec![u32::MAX; cd.n()];
    for (i, &v) in pr.v1.iter().enumerate() {
        index_of[v as usize] = i as u32;
    }
    let n1 = pr.v1.len();
    let mut members: Vec<Vec<Vertex>> = pr.v1.iter().map(|&v| vec![v]).collect();
    for packing in packings {
        members.extend(packing.packing.iter().cloned());
    }
    let mut rng = seed.stream(stream::CONTRACT);
    let mut in_choice = Vec::with_capacity(members.len());
    let mut out_choice = Vec::with_capacity(members.len());
    let mut pool = Vec::new();
    for (x, path) in members.iter().enumerate() {
        let (start, end) = (path[0], path[path.len() - 1]);
        for (side, list, dest) in [
            ("blue-in", cd.blue_in(start), &mut in_choice),
            ("red-out", cd.red_out(end), &mut out_choice),
        ] {
            pool.clear();
            pool.extend(list.iter().map(|&w| index_of[w as usize]).filter(|&i| i != u32::MAX));
            if pool.len() < CHOICES {
                return Err(HamError::InsufficientNeighbors { vertex: x as u32, side, available: pool.len() });
            }
            dest.push(pick5(&pool, &mut rng));
        }
    }
    let mut d = ContractedDigraph { n1, members, in_choice, out_choice };
    d.shuffle_roles(&mut seed.stream(stream::ROLES));
    Ok(d)
}

/// A random 5-in / 5-out structure with `n1` ordinary and `n2` super-vertices,
/// every choice uniform over the other ordinary vertices.
pub fn synthetic(n1: usize, n2: usize, seed: Seed) -> ContractedDigraph {
    assert!(n1 > CHOICES, "need more than {CHOICES} ordinary vertices");
    let mut rng = seed.stream(stream::CONTRACT);
    let n = n1 + n2;
    let mut draw = |v: usize| {
        let mut out = [0u32; CHOICES];
        let mut k = 0;
        while k < CHOICES {
            let w = rng.random_range(0..n1 as u32);
            if w as usize != v && !out[..k].contains(&w) {
                out[k] = w;
                k += 1;
            }
        }
        out
    };
    let in_choice: Vec<_> = (0..n).map(&mut draw).collect();
    let out_choice: Vec<_> = (0..n).map(&mut draw).collect();
    let members = (0..n as u32).map(|v| vec![v]).collect();
    ContractedDigraph { n1, members, in_choice, out_choice }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_structure() {
        let d = synthetic(200, 20, Seed(3));
        assert_eq!(d.len(), 220);
        for v in 0..220u32 {
            for &w in d.in_choices(v).iter().chain(d.out_choices(v)) {
                assert!((w as usize) < 200 && w != v);
                assert!(d.is_edge(v, w) || d.is_edge(w, v));
            }
            assert!(d.is_edge(v, d.out4(v)));
            assert!(d.is_edge(d.in5(v), v));
        }
        // super-vertices only touch V1
        for a in 200..220u32 {
            for b in 200..220u32 {
                assert!(!d.is_edge(a, b));
            }
        }
        let again = ContractedDigraph::from_choices(
            200,
            (0..220).map(|v| vec![v]).collect(),
            d.in_choice.clone(),
            d.out_choice.clone(),
        )
        .unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn from_choices_rejects_super_targets() {
        let ins = vec![[1, 2, 3, 4, 5]; 7];
        let mut outs = ins.clone();
        outs[0] = [1, 2, 3, 4, 6];
        let members = (0..7).map(|v| vec![v]).collect();
        assert!(ContractedDigraph::from_choices(6, members, ins, outs).is_err());
    }

    #[test]
    fn forced_choice_keeps_all_five() {
        let mut rng = Seed(1).rng();
        let mut got = pick5(&[9, 8, 7, 6, 5], &mut rng);
        got.sort_unstable();
        assert_eq!(got, [5, 6, 7, 8, 9]);
    }
}
