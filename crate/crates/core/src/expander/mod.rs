//! Expander graphs, set recombination and the upper-bound formulas.

pub mod bounds;
pub mod graph;
pub mod recombine;

pub use bounds::{
    bound_suite, kfirst, kprime, kr, ks_final, ks_v1, ks_v2, ks_v2_optimized, kw_min, m_upper_bound,
    published_profile, stirling_base, stirling_bracket, union_bound_rate, BoundProfile, BoundSuite, STRONG_PAIR,
};
pub use graph::{sample_biregular, verify_expansion, BipartiteGraph, ExpansionReport};
pub use recombine::{check_recombination, frequent_collection, recombine, Recombination};
