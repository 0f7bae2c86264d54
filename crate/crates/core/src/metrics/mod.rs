//! Modularity violations, closest-linear fitting, support certificates and
//! the small-universe worst-ratio search.

pub mod certificate;
pub mod fit;
pub mod modularity;
pub mod search;

pub use certificate::{support_certificate, zero_closest_certificate, SupportCertificate};
pub use fit::{chebyshev_fit, closest_linear, normalize_zero_closest, BandFit, FitMode, LinearFit};
pub use modularity::{
    kalton_ratio, modularity_eps, modularity_report, pair_violation, symmetric_eps,
    symmetric_modularity_eps, KaltonRatio, ModularityReport, SymmetricViolation, Variant, Violation,
};
pub use search::{kalton_search, SearchResult};

pub use crate::constructions::km::reduce_pair;
