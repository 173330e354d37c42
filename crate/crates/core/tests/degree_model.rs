//! Random pairing model: simplicity rate and rooted-copy densities.

use longcycle::analytics::{
    build_pseudo_digraph, condition_simple, rho_tree, rooted_copy_density, sample_degree_sequences, RootedTreeShape,
    DEFAULT_REJECTIONS,
};
use longcycle::rng::Seed;

/// Loops are Poisson with mean sum(in*out)/M and repeated pairs with mean
/// sum(out(out-1)) sum(in(in-1)) / 2M^2; the pairing is simple with
/// probability close to exp(-(both)).
#[test]
fn simple_fraction_matches_poisson_prediction() {
    let (n, m) = (2_000usize, 3_000u64);
    let s = sample_degree_sequences(n, m, Seed(1), DEFAULT_REJECTIONS).unwrap();
    let mf = m as f64;
    let loops: f64 = s.ins.iter().zip(&s.outs).map(|(&a, &b)| a as f64 * b as f64).sum::<f64>() / mf;
    let fall = |q: &[u32]| q.iter().map(|&d| d as f64 * (d as f64 - 1.0)).sum::<f64>();
    let doubles = fall(&s.ins) * fall(&s.outs) / (2.0 * mf * mf);
    let predicted = (-(loops + doubles)).exp();
    let draws = 2_000;
    let simple = (0..draws).filter(|&i| build_pseudo_digraph(&s.ins, &s.outs, Seed(100 + i)).unwrap().is_simple()).count();
    let observed = simple as f64 / draws as f64;
    assert!(observed > 0.05, "simple fraction {observed} is not bounded away from 0");
    assert!((observed - predicted).abs() < 0.04, "observed {observed} predicted {predicted}");
}

/// Rooted copies of small non-star trees against the formula.
#[test]
fn copy_density_matches_rho_for_paths() {
    let (n, m) = (30_000usize, 120_000u64);
    let s = sample_degree_sequences(n, m, Seed(2), DEFAULT_REJECTIONS).unwrap();
    let (g, _) = condition_simple(&s.ins, &s.outs, Seed(3), 5).unwrap();
    let d = g.to_digraph().unwrap();
    let shapes = [
        RootedTreeShape::new(3, vec![(0, 1), (1, 2)]).unwrap(),
        RootedTreeShape::new(3, vec![(1, 0), (2, 1)]).unwrap(),
        RootedTreeShape::new(4, vec![(0, 1), (2, 1), (1, 3)]).unwrap(),
    ];
    for shape in &shapes {
        let rho = rho_tree(shape, n as f64, m as f64, s.lambda);
        let got = rooted_copy_density(&d, shape);
        assert!(((got - rho) / rho).abs() < 0.2, "{shape:?}: copies {got} rho {rho}");
    }
}
