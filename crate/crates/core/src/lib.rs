pub mod digraph;
pub mod analytics;
pub mod exact;
pub mod farm;
pub mod hamiltonian;
pub mod harness;
pub mod packing;
pub mod peel;
pub mod rng;
