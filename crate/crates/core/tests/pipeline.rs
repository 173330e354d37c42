//! End-to-end construction where peeling leaves a large V1.

use longcycle::digraph::{sample_colored, ModelParams};
use longcycle::hamiltonian::verify_cycle;
use longcycle::harness::{analyze, construct, run_trial, sweep, write_records_jsonl, ExperimentConfig};
use longcycle::rng::Seed;

#[test]
fn builds_cycle_spanning_v_star_at_large_c() {
    let cfg = ExperimentConfig { seed: 77, ..ExperimentConfig::default() };
    let mut built = 0;
    for s in 0..4 {
        let cd = sample_colored(&ModelParams::new(20_000, 38.0).unwrap(), Seed(s));
        let a = analyze(&cd).unwrap();
        assert!(!a.peel.v1.is_empty());
        let report = construct(&cd, &a, &cfg, Seed(s));
        if report.cycle.is_empty() {
            continue;
        }
        built += 1;
        assert_eq!(report.cycle.len(), a.v_star());
        verify_cycle(&report.cycle, &cd).unwrap();
    }
    assert!(built >= 3, "only {built}/4 cycles built");
}

#[test]
fn trial_record_invariants_at_large_c() {
    let cfg = ExperimentConfig { seed: 5, oracle_limit: 0, ..ExperimentConfig::default() };
    let r = run_trial(&cfg, 10_000, 40.0, 0);
    r.check_invariants().unwrap();
    assert!(r.cycle_length > 0, "{:?}", r.error);
    assert_eq!(r.cycle_length, r.v_star);
}

#[test]
fn sweep_is_identical_across_thread_counts() {
    let base: ExperimentConfig = "n=3000\nn=4000\nc=6\nc=36\ntrials=3\nseed=11\n".parse().unwrap();
    let mut outputs = Vec::new();
    for threads in [1, 4] {
        let cfg = ExperimentConfig { threads, ..base.clone() };
        let recs = sweep(&cfg);
        assert_eq!(recs.len(), 12);
        for r in &recs {
            r.check_invariants().unwrap();
        }
        let mut buf = Vec::new();
        write_records_jsonl(&recs, &mut buf).unwrap();
        outputs.push(buf);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn oracle_cross_check_on_tiny_instances() {
    let cfg = ExperimentConfig { seed: 3, oracle_limit: 18, construct: false, ..ExperimentConfig::default() };
    for t in 0..40 {
        let r = run_trial(&cfg, 14, 5.0, t);
        r.check_invariants().unwrap();
        if r.k1 >= 2 {
            assert!(r.exact_longest.is_some());
        }
    }
}
