//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use rand::Rng as _;

use longcycle::analytics::{
    condition_simple, corollary_bound, k1_fraction, neighborhood_census, phi_density_prediction, rho_tree,
    rooted_copy_density, sample_degree_sequences, RootedTreeShape, SimpleVia, TruncatedPoisson,
    DEFAULT_REJECTIONS,
};
use longcycle::digraph::{giant_component, sample_colored, ModelParams};
use longcycle::exact::longest_cycle_exact;
use longcycle::hamiltonian::{perfect_matching, synthetic};
use longcycle::harness::{exact_in_k1, mean_sd, phi_components, run_trial, ExperimentConfig};
use longcycle::packing::{phi_brute, phi_dp, EligibilityMode, OrientedTree};
use longcycle::peel::{peel, peel_with_order, PeelOrder};
use longcycle::rng::Seed;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let mut o = f();
    let took = t.elapsed();
    o.detail.push_str(&format!(" [{:.1}s]", took.as_secs_f64()));
    if let Some(l) = limit {
        if took > l {
            o.pass = false;
            o.detail.push_str(&format!(" over the {}s budget", l.as_secs()));
        }
    }
    o
}

fn trial_config(restarts: usize) -> ExperimentConfig {
    ExperimentConfig { seed: 2024, restarts, ..ExperimentConfig::default() }
}

fn giant_component_size() -> Outcome {
    let n = 200_000;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for c in [5.0, 6.0, 8.0] {
        let p = ModelParams::new(n, c).unwrap();
        let fr: Vec<f64> = (0..10)
            .map(|s| giant_component(&sample_colored(&p, Seed(100 + s)).union_view()).len() as f64 / n as f64)
            .collect();
        let (m, _) = mean_sd(&fr);
        let dev = (m - k1_fraction(c).unwrap()).abs();
        worst = worst.max(dev);
        parts.push(format!("c={c}: {m:.5} vs {:.5}", k1_fraction(c).unwrap()));
    }
    outcome(worst <= 0.003, format!("{} (max |dev| {worst:.5}, tol 0.003)", parts.join("; ")))
}

fn phi_density() -> Outcome {
    let (n, c) = (1_000_000, 5.0);
    let cfg = ExperimentConfig { construct: false, ..trial_config(0) };
    let recs: Vec<_> = (0..5).map(|t| run_trial(&cfg, n, c, t)).collect();
    let (m, _) = mean_sd(&recs.iter().map(|r| r.sum_phi_upper as f64 / n as f64).collect::<Vec<_>>());
    let pred = phi_density_prediction(c);
    let v1: usize = recs.iter().map(|r| r.k1 - r.s_l).sum();
    outcome(
        ((m - pred) / pred).abs() <= 0.25,
        format!("mean sum_phi_upper/n {m:.3e} vs {pred:.3e} (tol 25%); |V1| summed over seeds {v1}"),
    )
}

fn scaling_limit() -> Outcome {
    let (n, c) = (1_000_000, 6.0);
    let cfg = trial_config(5);
    let recs: Vec<_> = (0..5).map(|t| run_trial(&cfg, n, c, t)).collect();
    let (m, _) = mean_sd(&recs.iter().map(|r| r.cycle_length as f64 / n as f64).collect::<Vec<_>>());
    let b = corollary_bound(c);
    let err = recs.iter().find_map(|r| r.error.clone()).unwrap_or_default();
    outcome((m - b).abs() <= 1.5e-3, format!("mean cycle/n {m:.5} vs {b:.5} (tol 1.5e-3); {err}"))
}

fn upper_bound_small() -> Outcome {
    let mut rng = Seed(4).rng();
    let mut violations = 0;
    let mut nontrivial = 0;
    for i in 0..500 {
        let n = rng.random_range(4..=16usize);
        let c = rng.random_range(3.0..=8.0f64).min(n as f64 - 1.0);
        let cd = sample_colored(&ModelParams::new(n, c).unwrap(), Seed(9000 + i));
        let k1 = giant_component(&cd.union_view());
        let pr = peel(&cd, &k1);
        let phi: usize = phi_components(&cd, &pr, EligibilityMode::Upper).unwrap().iter().map(|p| p.phi).sum();
        let exact = if k1.len() >= 2 {
            exact_in_k1(&cd, &k1, Default::default()).unwrap()
        } else {
            0
        };
        nontrivial += (phi > 0) as usize;
        if exact + phi > k1.len() {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("{violations} violations in 500 instances ({nontrivial} with phi > 0)"))
}

fn dp_oracle() -> Outcome {
    let mut rng = Seed(5).rng();
    let (mut shapes, mut random_flags, mut mismatches) = (0usize, 0usize, 0usize);
    for k in 1..=9 {
        for tree in common::rooted_trees(k) {
            for edges in common::orientations(&tree) {
                shapes += 1;
                let edges: Vec<(u32, u32)> = edges.iter().map(|&(a, b)| (a as u32, b as u32)).collect();
                let vs: Vec<u32> = (0..k as u32).collect();
                let mut flag_sets = vec![(vec![true; k], vec![true; k]), (vec![false; k], vec![false; k])];
                for _ in 0..2 {
                    flag_sets.push(((0..k).map(|_| rng.random()).collect(), (0..k).map(|_| rng.random()).collect()));
                }
                random_flags += 2;
                for (s, e) in flag_sets {
                    let t = OrientedTree::new(vs.clone(), &edges, s, e, EligibilityMode::Upper).unwrap();
                    if phi_dp(&t).phi != phi_brute(&t).unwrap() {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    outcome(
        mismatches == 0 && random_flags >= 10_000,
        format!("{mismatches} mismatches over {shapes} oriented shapes, {random_flags} random flag sets"),
    )
}

fn peel_order() -> Outcome {
    let cd = sample_colored(&ModelParams::new(3000, 7.0).unwrap(), Seed(6));
    let k1 = giant_component(&cd.union_view());
    let base = peel(&cd, &k1).s_l;
    let differ = (0..50)
        .filter(|&s| peel_with_order(&cd, &k1, PeelOrder::Shuffled(Seed(600 + s))).s_l != base)
        .count();
    outcome(differ == 0, format!("{differ}/50 orders differ; |S_L| = {} of |K1| = {}", base.len(), k1.len()))
}

fn phase1_structure() -> Outcome {
    let mk = |n: usize, s: u64| synthetic(n - n / 20, n / 20, Seed(s));
    let matched = (0..20).filter(|&s| perfect_matching(&mk(10_000, 700 + s)).is_some()).count();
    let n = 100_000;
    let bound = 3.0 * (n as f64).ln();
    let counts: Vec<usize> =
        (0..20).map(|s| perfect_matching(&mk(n, 800 + s)).map_or(usize::MAX, |p| p.cycle_count())).collect();
    let short = counts.iter().filter(|&&c| c as f64 <= bound).count();
    outcome(
        matched >= 19 && short >= 18,
        format!("matched {matched}/20 at N=1e4; cycles <= {bound:.1} in {short}/20 at N=1e5 (max {})",
            counts.iter().max().unwrap()),
    )
}

fn end_to_end() -> Outcome {
    let (n, c) = (50_000, 8.0);
    let cfg = trial_config(5);
    let recs: Vec<_> = (0..10).map(|t| run_trial(&cfg, n, c, t)).collect();
    let ok = recs.iter().filter(|r| r.cycle_length > 0).count();
    let exact = recs.iter().filter(|r| r.cycle_length > 0).all(|r| r.cycle_length == r.v_star);
    let err = recs.iter().find_map(|r| r.error.clone()).unwrap_or_default();
    outcome(ok >= 7 && exact, format!("{ok}/10 verified cycles spanning V*; first error: {err}"))
}

fn degree_model() -> Outcome {
    let (n, m) = (100_000usize, 700_000u64);
    let s = sample_degree_sequences(n, m, Seed(9), DEFAULT_REJECTIONS).unwrap();
    let sums_ok = [&s.ins, &s.outs].iter().all(|q| q.iter().map(|&d| d as u64).sum::<u64>() == m)
        && s.ins.iter().chain(&s.outs).all(|&d| d >= 1);
    let law = TruncatedPoisson::new(s.lambda).unwrap();
    let top = *s.ins.iter().max().unwrap() as usize + 1;
    let mut hist = vec![0usize; top.max(law.support_max() as usize + 1) + 1];
    for &d in &s.ins {
        hist[d as usize] += 1;
    }
    let tv = 0.5 * hist.iter().enumerate().map(|(t, &h)| (h as f64 / n as f64 - law.pmf(t as u32)).abs()).sum::<f64>();
    outcome(
        tv <= 0.01 && sums_ok && !s.repaired,
        format!("TV {tv:.4} (tol 0.01); sums exact {sums_ok}; exact rejection draw {}", !s.repaired),
    )
}

fn rho_spot() -> Outcome {
    let (n, m) = (100_000usize, 700_000u64);
    let s = sample_degree_sequences(n, m, Seed(10), DEFAULT_REJECTIONS).unwrap();
    let (g, via) = condition_simple(&s.ins, &s.outs, Seed(11), 20).unwrap();
    let d = g.to_digraph().unwrap();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (a, b) in [(0, 2), (1, 1), (2, 0), (0, 3), (1, 2), (2, 1), (3, 0)] {
        let shape = RootedTreeShape::star(a, b);
        let rho = rho_tree(&shape, n as f64, m as f64, s.lambda);
        let copies = rooted_copy_density(&d, &shape);
        let induced = neighborhood_census(&d, 1, &shape);
        let dev = (copies - rho) / rho;
        worst = worst.max(dev.abs());
        parts.push(format!("({a},{b}) rho {rho:.3} copies {copies:.3} exact-ball {induced:.2e}"));
    }
    let via = match via {
        SimpleVia::Rejection { attempts } => format!("simple by rejection after {attempts}"),
        SimpleVia::Switching { switches } => format!("simple by {switches} switchings"),
    };
    outcome(worst <= 0.2, format!("max rel dev {worst:.4} (tol 0.2); {via}; {}", parts.join("; ")))
}

fn concentration() -> Outcome {
    let c = 7.0;
    let cfg = trial_config(5);
    let sd = |n: usize| {
        let xs: Vec<f64> = (0..20).map(|t| run_trial(&cfg, n, c, t).cycle_length as f64 / n as f64).collect();
        mean_sd(&xs)
    };
    let (m1, s1) = sd(100_000);
    let (m2, s2) = sd(200_000);
    outcome(
        s1 <= 0.002 && s2 < s1,
        format!("n=1e5 mean {m1:.4} sd {s1:.5}; n=2e5 mean {m2:.4} sd {s2:.5} (need sd <= 0.002 and a decrease)"),
    )
}

fn main() {
    // A tiny sanity check that the exact oracle links in before the long runs.
    assert_eq!(longest_cycle_exact(&longcycle::digraph::Digraph::from_edges(2, &[(0, 1), (1, 0)]).unwrap()), Ok(2));
    let mins = |m: u64| Some(Duration::from_secs(60 * m));
    let criteria: Vec<(&str, Option<Duration>, fn() -> Outcome)> = vec![
        ("giant component size", mins(2), giant_component_size),
        ("phi density", mins(10), phi_density),
        ("scaling-limit match", None, scaling_limit),
        ("deterministic upper bound", mins(5), upper_bound_small),
        ("DP-oracle equivalence", None, dp_oracle),
        ("peel order independence", None, peel_order),
        ("phase-1 structure", None, phase1_structure),
        ("end-to-end construction", None, end_to_end),
        ("degree-model fidelity", None, degree_model),
        ("rho-formula spot validation", None, rho_spot),
        ("concentration proxy", None, concentration),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let id = format!("{}", i + 1);
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let o = timed(limit, run);
        println!("{} criterion {id:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.pass as usize;
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
