//! Center-outward depths for temporal point processes.
//!
//! A realization `s` is a finite ordered set of event times on `[t1, t2]`.
//! Its depth combines how typical the event count is with how evenly the
//! events sit relative to a conditional centre:
//!
//! ```text
//! D(s) = w(|s|)^r * D_c(s | |s|),    w(k) = P(k) / max_j P(j)
//! ```
//!
//! ```
//! use ppdepth::{hpp_conditional_depth, Realization, TimeDomain};
//!
//! let s = Realization::new(TimeDomain::unit(), vec![0.25]).unwrap();
//! assert!((hpp_conditional_depth(&s) - 0.75f64.sqrt()).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is used on purpose: it rejects NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cardinality;
pub mod depth;
pub mod error;
pub mod process;
pub mod rescale;
pub mod simulate;
pub mod stats;

pub use cardinality::{
    fit_empirical, fit_poisson_mixture_em, fit_poisson_mle, select_mixture_bic, CardinalityModel,
    CountDistribution, EmConfig, MixtureFit,
};
pub use depth::{
    bootstrap_conditional_means, dirichlet_conditional_depth, fit, hpp_conditional_depth,
    mahalanobis_conditional_depth, Bootstrap, CardinalityFit, ConditionalDepth, ConditionalKind,
    ConditionalMeanTable, DepthBreakdown, DepthModel, FitConfig, MahalanobisTable,
};
pub use error::{Error, Result};
pub use process::{sniff_domain, Dataset, IetVector, Realization, TimeDomain};
pub use rescale::{estimate_intensity, rescale, ts_conditional_depth, IntensityModel};
pub use simulate::{
    apply_warp, sample_hpp, sample_ipp, simulate_hpp, simulate_ipp, stream_rng, WarpFunction,
};
