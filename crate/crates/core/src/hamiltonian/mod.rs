//! Hamilton cycle of the contracted digraph D* in three phases, then
//! uncontraction to a long directed cycle of the original digraph.

mod boost;
mod dstar;
mod matching;
mod reassemble;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use boost::{phase2_boost, BoostStats};
pub use dstar::{contract, role_of, synthetic, ContractedDigraph, Role, CHOICES, D4, D5, LIGHT};
pub use matching::{hopcroft_karp, light_graph, perfect_matching, phase1_matching};
pub use reassemble::{
    break_count, merge_cycles, phase3_reassemble, rho_search, EdgePool, Phase3Mode, Phase3Stats,
};

use crate::digraph::{ColoredDigraph, Vertex};
use crate::rng::{stream, Seed};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HamError {
    #[error("D* vertex {vertex} has only {available} {side} choices in V1")]
    InsufficientNeighbors { vertex: u32, side: &'static str, available: usize },
    #[error("no perfect matching in the light graph after {attempts} splits")]
    NoPerfectMatching { attempts: usize },
    #[error("phase 2 left {remaining} small cycles")]
    BoostFailed { remaining: usize },
    #[error("phase 3 could not join {cycles} cycles")]
    ReassemblyFailed { cycles: usize },
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl HamError {
    pub fn phase(&self) -> &'static str {
        match self {
            HamError::InsufficientNeighbors { .. } => "contract",
            HamError::NoPerfectMatching { .. } => "phase1",
            HamError::BoostFailed { .. } => "phase2",
            HamError::ReassemblyFailed { .. } => "phase3",
            HamError::VerificationFailed(_) => "verify",
        }
    }
}

/// A successor bijection on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    succ: Vec<u32>,
}

impl Permutation {
    pub fn from_succ(succ: Vec<u32>) -> Result<Self, HamError> {
        let mut seen = vec![false; succ.len()];
        for &s in &succ {
            if s as usize >= succ.len() || std::mem::replace(&mut seen[s as usize], true) {
                return Err(HamError::VerificationFailed("successor map is not a bijection".into()));
            }
        }
        Ok(Permutation { succ })
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn succ(&self, v: u32) -> u32 {
        self.succ[v as usize]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.succ
    }

    pub(crate) fn set_succ(&mut self, v: u32, w: u32) {
        self.succ[v as usize] = w;
    }

    pub fn pred_table(&self) -> Vec<u32> {
        let mut pred = vec![0; self.succ.len()];
        for (v, &s) in self.succ.iter().enumerate() {
            pred[s as usize] = v as u32;
        }
        pred
    }

    /// Cycles, each starting at its smallest vertex, ordered by that vertex.
    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.succ.len()];
        let mut out = Vec::new();
        for s in 0..self.succ.len() {
            if seen[s] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut v = s;
            while !seen[v] {
                seen[v] = true;
                cyc.push(v as u32);
                v = self.succ[v] as usize;
            }
            out.push(cyc);
        }
        out
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles().len()
    }

    /// Every edge `(v, succ v)` must be an edge of D*.
    pub fn verify_realized(&self, d: &ContractedDigraph) -> Result<(), HamError> {
        if self.len() != d.len() {
            return Err(HamError::VerificationFailed("permutation size differs from D*".into()));
        }
        for (v, &s) in self.succ.iter().enumerate() {
            if !d.is_edge(v as u32, s) {
                return Err(HamError::VerificationFailed(format!("edge ({v}, {s}) is not a choice of D*")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum N0Mode {
    #[default]
    Desk,
    Paper,
}

impl std::str::FromStr for N0Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "desk" => Ok(N0Mode::Desk),
            "paper" => Ok(N0Mode::Paper),
            _ => Err(format!("unknown n0 mode {s:?}")),
        }
    }
}

/// Which D4 edge may close an In-Phase path `u -> ... -> v` into a cycle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosingRule {
    /// `in_4(u) = v`.
    StartInChoice,
    /// `out_4(v) = u`.
    EndOutChoice,
    #[default]
    Either,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseParams {
    pub n0: usize,
    pub nu: usize,
    pub t2: usize,
    pub w_cap: usize,
    /// Keep one conditioning set W across all of Phase 2 instead of a fresh
    /// one for every Out-Phase and In-Phase tree.
    pub global_w: bool,
    pub strict_paper_edges: bool,
    pub closing: ClosingRule,
    pub phase3: Phase3Mode,
    /// Cut edges tried per small cycle when W is per tree.
    pub cuts_per_cycle: usize,
    pub split_budget: usize,
    pub break_budget: usize,
    pub restarts: usize,
}

impl PhaseParams {
    /// Desk-scale constants for a D* with `n` vertices.
    pub fn desk(n: usize) -> Self {
        let nf = n.max(3) as f64;
        let ln = nf.ln();
        let nu = (nf * ln).sqrt().ceil() as usize;
        PhaseParams {
            n0: (nf / ln.ceil()).ceil() as usize,
            nu,
            t2: ((nu as f64).ln() / 1.9f64.ln()).ceil() as usize + 10,
            w_cap: (nf.powf(0.75).floor() as usize).max(16 * nu).min(n),
            global_w: false,
            strict_paper_edges: false,
            closing: ClosingRule::Either,
            phase3: Phase3Mode::MergeThenSearch,
            cuts_per_cycle: 4,
            split_budget: 5,
            break_budget: 10,
            restarts: 5,
        }
    }

    /// The appendix constants as written.
    pub fn paper(n: usize) -> Self {
        let nf = n.max(3) as f64;
        let ln = nf.ln();
        let nu = (nf * ln).sqrt().ceil() as usize;
        PhaseParams {
            n0: (200.0 * nf / ln).ceil() as usize,
            nu,
            t2: ((nu as f64).ln() / 1.9f64.ln() + 1000.0 * ln.ln().max(0.0)).ceil() as usize,
            w_cap: nf.powf(0.75).floor() as usize,
            global_w: true,
            strict_paper_edges: true,
            phase3: Phase3Mode::SearchOnly,
            ..PhaseParams::desk(n)
        }
    }

    pub fn for_mode(n: usize, mode: N0Mode, strict: bool) -> Self {
        let mut p = match mode {
            N0Mode::Desk => PhaseParams::desk(n),
            N0Mode::Paper => PhaseParams::paper(n),
        };
        if strict {
            p.strict_paper_edges = true;
            p.global_w = true;
            p.phase3 = Phase3Mode::SearchOnly;
            p.w_cap = p.w_cap.min((n as f64).powf(0.75).floor() as usize);
        }
        p
    }
}

/// Expands a Hamilton cycle of D* (successor map with one cycle) into the
/// original vertex sequence and checks it against the union digraph.
pub fn uncontract_and_verify(
    ham: &Permutation,
    d: &ContractedDigraph,
    cd: &ColoredDigraph,
) -> Result<Vec<Vertex>, HamError> {
    if ham.is_empty() {
        return Ok(Vec::new());
    }
    if ham.cycle_count() != 1 {
        return Err(HamError::VerificationFailed(format!("{} cycles, expected 1", ham.cycle_count())));
    }
    let mut cycle = Vec::new();
    let mut v = 0u32;
    loop {
        cycle.extend_from_slice(d.members(v));
        v = ham.succ(v);
        if v == 0 {
            break;
        }
    }
    verify_cycle(&cycle, cd)?;
    Ok(cycle)
}

/// Distinct vertices, consecutive pairs (and the wrap-around) are union edges.
pub fn verify_cycle(cycle: &[Vertex], cd: &ColoredDigraph) -> Result<(), HamError> {
    let mut seen = vec![false; cd.n()];
    for &v in cycle {
        if v as usize >= cd.n() || std::mem::replace(&mut seen[v as usize], true) {
            return Err(HamError::VerificationFailed(format!("vertex {v} repeated or out of range")));
        }
    }
    if cycle.len() == 1 {
        return Err(HamError::VerificationFailed("a single vertex is not a cycle".into()));
    }
    for (i, &a) in cycle.iter().enumerate() {
        let b = cycle[(i + 1) % cycle.len()];
        if !cd.has_red(a, b) && !cd.has_blue(a, b) {
            return Err(HamError::VerificationFailed(format!("({a}, {b}) is not an edge")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    /// Vertex sequence of the verified cycle, empty when none was built.
    pub cycle: Vec<Vertex>,
    pub restarts: usize,
    pub phase1_ok: bool,
    pub phase2_ok: bool,
    pub phase3_ok: bool,
    pub phase1_cycles: usize,
    pub small_cycles: usize,
    pub w_peak: usize,
    pub merges: usize,
    pub rho_searches: usize,
    /// Error of the last failed attempt, tagged `phase: message`.
    pub last_error: Option<String>,
    /// Wall seconds spent in contraction, phase 1, phase 2, phase 3.
    pub seconds: [f64; 4],
}

/// Runs phases 1–3 on a fixed D*, with full restarts that re-draw the light
/// split (synthetic instances have no colored digraph to resample from).
pub fn hamilton_cycle(d: &ContractedDigraph, params: &PhaseParams, seed: Seed) -> (Option<Permutation>, PipelineReport) {
    run_restarts(params, seed, |attempt| {
        let mut d = d.clone();
        if attempt > 0 {
            d.shuffle_roles(&mut seed.derive(attempt as u64).stream(stream::ROLES));
        }
        Ok(d)
    })
}

/// Contract, build a Hamilton cycle of D*, and uncontract. Each restart
/// re-samples the choices from a fresh derived seed.
pub fn construct_cycle(
    cd: &ColoredDigraph,
    pr: &crate::peel::PeelResult,
    lower_packings: &[crate::packing::PackingResult],
    params: &PhaseParams,
    seed: Seed,
) -> PipelineReport {
    let mut last_d = None;
    let (ham, mut report) = run_restarts(params, seed, |attempt| {
        let d = contract(cd, pr, lower_packings, seed.derive(attempt as u64))?;
        last_d = Some(d.clone());
        Ok(d)
    });
    if let (Some(ham), Some(d)) = (ham, last_d) {
        match uncontract_and_verify(&ham, &d, cd) {
            Ok(cycle) => report.cycle = cycle,
            Err(e) => {
                report.phase3_ok = false;
                report.last_error = Some(format!("{}: {e}", e.phase()));
            }
        }
    }
    report
}

fn run_restarts(
    params: &PhaseParams,
    seed: Seed,
    mut make: impl FnMut(usize) -> Result<ContractedDigraph, HamError>,
) -> (Option<Permutation>, PipelineReport) {
    let mut report = PipelineReport::default();
    for attempt in 0..=params.restarts {
        report.restarts = attempt;
        let t = Instant::now();
        let d = make(attempt);
        report.seconds[0] += t.elapsed().as_secs_f64();
        let outcome = d.and_then(|d| {
            if d.is_empty() {
                return Ok(None);
            }
            attempt_once(d, params, seed.derive(attempt as u64), &mut report).map(Some)
        });
        match outcome {
            Ok(p) => {
                report.last_error = None;
                return (p, report);
            }
            Err(e @ HamError::InsufficientNeighbors { .. }) | Err(e @ HamError::VerificationFailed(_)) => {
                report.last_error = Some(format!("{}: {e}", e.phase()));
                return (None, report);
            }
            Err(e) => report.last_error = Some(format!("{}: {e}", e.phase())),
        }
    }
    (None, report)
}

fn attempt_once(
    mut d: ContractedDigraph,
    params: &PhaseParams,
    seed: Seed,
    report: &mut PipelineReport,
) -> Result<Permutation, HamError> {
    report.phase1_ok = false;
    report.phase2_ok = false;
    report.phase3_ok = false;
    let t = Instant::now();
    let pi1 = phase1_matching(&mut d, &mut seed.stream(stream::PHASE1), params.split_budget);
    report.seconds[1] += t.elapsed().as_secs_f64();
    let (pi1, _) = pi1?;
    pi1.verify_realized(&d)?;
    report.phase1_ok = true;
    report.phase1_cycles = pi1.cycle_count();

    let t = Instant::now();
    let boosted = phase2_boost(&pi1, &d, params);
    report.seconds[2] += t.elapsed().as_secs_f64();
    let (pi2, stats) = boosted;
    report.small_cycles = stats.small_cycles;
    report.w_peak = report.w_peak.max(stats.w_peak);
    let pi2 = pi2?;
    pi2.verify_realized(&d)?;
    if pi2.cycles().iter().any(|c| c.len() < params.n0.min(d.len())) {
        return Err(HamError::VerificationFailed("phase 2 output has a small cycle".into()));
    }
    report.phase2_ok = true;

    let t = Instant::now();
    let (ham, stats3) = phase3_reassemble(&pi2, &d, params, seed.stream(stream::PHASE3));
    report.seconds[3] += t.elapsed().as_secs_f64();
    report.merges += stats3.merges;
    report.rho_searches += stats3.rho_searches;
    let ham = ham?;
    ham.verify_realized(&d)?;
    report.phase3_ok = true;
    Ok(ham)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_cycles() {
        let p = Permutation::from_succ(vec![1, 0, 3, 4, 2]).unwrap();
        assert_eq!(p.cycles(), vec![vec![0, 1], vec![2, 3, 4]]);
        assert_eq!(p.pred_table(), vec![1, 0, 4, 2, 3]);
        assert!(Permutation::from_succ(vec![1, 1]).is_err());
    }

    #[test]
    fn desk_constants() {
        let p = PhaseParams::desk(50_000);
        // ln 50000 = 10.82
        assert_eq!(p.n0, 4546);
        assert_eq!(p.nu, 736);
        assert_eq!(p.t2, 21);
        let paper = PhaseParams::paper(50_000);
        assert!(paper.n0 > 50_000);
        assert!(paper.w_cap as f64 <= 50_000f64.powf(0.75));
    }
}
