//! Witness functions: small explicit examples, the (k, M)-symmetric
//! constructions and the adversarial learning instance.

pub mod adversarial;
pub mod basic;
pub mod km;

pub use adversarial::{adversarial, noisy_linear, random_linear, AdversarialInstance};
pub use basic::{four_item_supports, four_item_worstcase, pawlik, symmetric_example, symmetric_example_delta};
pub use km::{
    intersection_deficit_profile, km20, km70, km_certificates, km_universe, structural_claims, KmFunction,
    KmOracle, KmUniverse, Level, WideSet,
};
