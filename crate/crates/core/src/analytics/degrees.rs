//! Truncated-Poisson degrees and the random pairing model of the giant.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::Serialize;

use super::{ln_f1, ln_factorial, solve_lambda, truncated_mean, AnalyticsError};
use crate::digraph::{Digraph, Vertex};
use crate::rng::{stream, Rng, Seed};

/// Rejection rounds per degree sequence before falling back to repair.
pub const DEFAULT_REJECTIONS: usize = 5_000;

/// Poisson law conditioned on being at least 1.
#[derive(Clone, Debug)]
pub struct TruncatedPoisson {
    lambda: f64,
    cdf: Vec<f64>,
}

impl TruncatedPoisson {
    pub fn new(lambda: f64) -> Result<Self, AnalyticsError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(AnalyticsError::BadRate(lambda));
        }
        let mut cdf = Vec::new();
        let mut acc = 0.0;
        let mut t = 1u32;
        loop {
            let p = pmf_at(lambda, t);
            acc += p;
            cdf.push(acc);
            if t as f64 > lambda && p < 1e-18 {
                break;
            }
            t += 1;
        }
        Ok(TruncatedPoisson { lambda, cdf })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `P(t) = lambda^t / (t! f_1(lambda))` for `t >= 1`.
    pub fn pmf(&self, t: u32) -> f64 {
        if t == 0 {
            0.0
        } else {
            pmf_at(self.lambda, t)
        }
    }

    /// Largest value the sampler can return.
    pub fn support_max(&self) -> u32 {
        self.cdf.len() as u32
    }

    pub fn mean(&self) -> f64 {
        truncated_mean(self.lambda)
    }

    pub fn variance(&self) -> f64 {
        let l = self.lambda;
        let e = -(-l).exp_m1();
        // lambda(lambda+1)/e - lambda^2/e^2 with e = f_1/e^lambda.
        l * (l + 1.0) / e - (l / e).powi(2)
    }

    pub fn sample(&self, rng: &mut Rng) -> u32 {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1) as u32 + 1
    }

    fn max_pmf(&self) -> f64 {
        (1..=self.support_max()).map(|t| self.pmf(t)).fold(0.0, f64::max)
    }
}

fn pmf_at(lambda: f64, t: u32) -> f64 {
    (t as f64 * lambda.ln() - ln_factorial(t) - ln_f1(lambda)).exp()
}

/// In- and out-degree sequences, each summing to `m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeSequences {
    pub ins: Vec<u32>,
    pub outs: Vec<u32>,
    pub lambda: f64,
    /// Rounds used by the in and out draws.
    pub attempts: [usize; 2],
    /// True when a draw ran out of rejections and was repaired instead.
    pub repaired: bool,
}

/// Independent iid truncated-Poisson sequences conditioned on summing to `m`.
///
/// Each round draws `n - 1` entries, sets the last to the remainder and keeps
/// the round with probability `P(last) / max_t P(t)`; accepted rounds follow
/// the conditional law exactly. After `max_rejections` rounds the last draw is
/// repaired by resampling single entries towards the target and the result is
/// flagged.
pub fn sample_degree_sequences(
    n: usize,
    m: u64,
    seed: Seed,
    max_rejections: usize,
) -> Result<DegreeSequences, AnalyticsError> {
    let lambda = solve_lambda(m, n as u64)?;
    let law = TruncatedPoisson::new(lambda)?;
    let (ins, a_in, r_in) = conditioned(&law, n, m, &mut seed.stream(stream::DEGREES_IN), max_rejections)?;
    let (outs, a_out, r_out) =
        conditioned(&law, n, m, &mut seed.stream(stream::DEGREES_OUT), max_rejections)?;
    Ok(DegreeSequences { ins, outs, lambda, attempts: [a_in, a_out], repaired: r_in || r_out })
}

fn conditioned(
    law: &TruncatedPoisson,
    n: usize,
    m: u64,
    rng: &mut Rng,
    max_rejections: usize,
) -> Result<(Vec<u32>, usize, bool), AnalyticsError> {
    let pmax = law.max_pmf();
    let mut ys = vec![0u32; n];
    for round in 1..=max_rejections.max(1) {
        let mut sum = 0u64;
        for y in ys.iter_mut().take(n - 1) {
            *y = law.sample(rng);
            sum += *y as u64;
        }
        if sum >= m {
            continue;
        }
        let last = m - sum;
        if last > u32::MAX as u64 {
            continue;
        }
        let u: f64 = rng.random();
        if u * pmax < law.pmf(last as u32) {
            ys[n - 1] = last as u32;
            return Ok((ys, round, false));
        }
    }
    ys[n - 1] = law.sample(rng);
    let mut sum: u64 = ys.iter().map(|&y| y as u64).sum();
    let budget = 1000 * n + 10_000;
    for _ in 0..budget {
        if sum == m {
            return Ok((ys, max_rejections, true));
        }
        let i = rng.random_range(0..n);
        let t = law.sample(rng);
        let next = sum - ys[i] as u64 + t as u64;
        if next.abs_diff(m) < sum.abs_diff(m) {
            sum = next;
            ys[i] = t;
        }
    }
    Err(AnalyticsError::SamplingFailed { attempts: max_rejections, sum, target: m })
}

/// A multi-digraph from a uniform pairing of out-stubs with in-stubs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoDigraph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
}

impl PseudoDigraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn loops(&self) -> usize {
        self.edges.iter().filter(|(a, b)| a == b).count()
    }

    /// Edges beyond the first copy of each ordered pair.
    pub fn repeated_edges(&self) -> usize {
        let mut sorted = self.edges.clone();
        sorted.sort_unstable();
        sorted.windows(2).filter(|w| w[0] == w[1]).count()
    }

    pub fn is_simple(&self) -> bool {
        self.loops() == 0 && self.repeated_edges() == 0
    }

    pub fn in_degrees(&self) -> Vec<u32> {
        let mut d = vec![0; self.n];
        for &(_, b) in &self.edges {
            d[b as usize] += 1;
        }
        d
    }

    pub fn out_degrees(&self) -> Vec<u32> {
        let mut d = vec![0; self.n];
        for &(a, _) in &self.edges {
            d[a as usize] += 1;
        }
        d
    }

    /// The simple digraph on the same edges, if there are no loops or repeats.
    pub fn to_digraph(&self) -> Option<Digraph> {
        if !self.is_simple() {
            return None;
        }
        Digraph::from_edges(self.n, &self.edges).ok()
    }

    /// Degree-preserving switchings `(a,b),(c,d) -> (a,d),(c,b)` applied to
    /// loops and repeated edges until none remain. Returns the switch count.
    pub fn switch_to_simple(&mut self, rng: &mut Rng, budget: usize) -> Result<usize, AnalyticsError> {
        let mut count: HashMap<(Vertex, Vertex), u32> = HashMap::with_capacity(self.edges.len());
        for &e in &self.edges {
            *count.entry(e).or_default() += 1;
        }
        let bad = |e: (Vertex, Vertex), count: &HashMap<(Vertex, Vertex), u32>| e.0 == e.1 || count[&e] > 1;
        let mut queue: Vec<usize> = (0..self.edges.len()).filter(|&i| bad(self.edges[i], &count)).collect();
        let mut switches = 0;
        let mut tries = 0;
        while let Some(&i) = queue.last() {
            if !bad(self.edges[i], &count) {
                queue.pop();
                continue;
            }
            tries += 1;
            if tries > budget {
                let left = (0..self.edges.len()).filter(|&i| bad(self.edges[i], &count)).count();
                return Err(AnalyticsError::NotSimple(left));
            }
            let j = rng.random_range(0..self.edges.len());
            let (a, b) = self.edges[i];
            let (c, d) = self.edges[j];
            let (e1, e2) = ((a, d), (c, b));
            if i == j || a == d || c == b || e1 == e2 || count.contains_key(&e1) || count.contains_key(&e2) {
                continue;
            }
            for old in [(a, b), (c, d)] {
                let k = count.get_mut(&old).expect("edge is counted");
                *k -= 1;
                if *k == 0 {
                    count.remove(&old);
                }
            }
            count.insert(e1, 1);
            count.insert(e2, 1);
            self.edges[i] = e1;
            self.edges[j] = e2;
            switches += 1;
            queue.push(j);
        }
        Ok(switches)
    }
}

/// Pairs out-stubs with in-stubs uniformly at random.
pub fn build_pseudo_digraph(ins: &[u32], outs: &[u32], seed: Seed) -> Result<PseudoDigraph, AnalyticsError> {
    let n = ins.len().max(outs.len());
    let sum_in: u64 = ins.iter().map(|&d| d as u64).sum();
    let sum_out: u64 = outs.iter().map(|&d| d as u64).sum();
    if sum_in != sum_out || ins.len() != outs.len() {
        return Err(AnalyticsError::StubMismatch { ins: sum_in, outs: sum_out });
    }
    let mut heads: Vec<Vertex> = Vec::with_capacity(sum_in as usize);
    for (v, &d) in ins.iter().enumerate() {
        heads.extend(std::iter::repeat_n(v as Vertex, d as usize));
    }
    heads.shuffle(&mut seed.stream(stream::PAIRING));
    let mut edges = Vec::with_capacity(heads.len());
    let mut h = heads.into_iter();
    for (v, &d) in outs.iter().enumerate() {
        for _ in 0..d {
            edges.push((v as Vertex, h.next().expect("stub counts agree")));
        }
    }
    Ok(PseudoDigraph { n, edges })
}

/// How a simple pseudo-digraph was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SimpleVia {
    /// Fresh pairings until one was simple: the exact conditional law.
    Rejection { attempts: usize },
    /// The last pairing repaired by switchings.
    Switching { switches: usize },
}

/// Conditions the pairing on simplicity: up to `max_retries` fresh pairings,
/// then switchings on the last one.
pub fn condition_simple(
    ins: &[u32],
    outs: &[u32],
    seed: Seed,
    max_retries: usize,
) -> Result<(PseudoDigraph, SimpleVia), AnalyticsError> {
    let mut last = None;
    for attempt in 0..max_retries.max(1) {
        let g = build_pseudo_digraph(ins, outs, seed.derive(attempt as u64))?;
        if g.is_simple() {
            return Ok((g, SimpleVia::Rejection { attempts: attempt + 1 }));
        }
        last = Some(g);
    }
    let mut g = last.expect("at least one pairing");
    let mut rng = seed.derive(u64::MAX).stream(stream::PAIRING);
    let budget = 100 * g.edges.len() + 1000;
    let switches = g.switch_to_simple(&mut rng, budget)?;
    Ok((g, SimpleVia::Switching { switches }))
}
