//! Conditional and combined depths for point-process realizations.

pub mod bootstrap;
pub mod dirichlet;
pub mod mahalanobis;
pub mod model;

pub use bootstrap::{bootstrap_conditional_means, Bootstrap};
pub use dirichlet::{
    dirichlet_conditional_depth, hpp_center_row, hpp_conditional_depth, repair_row, ConditionalMeanTable,
};
pub use mahalanobis::{mahalanobis_conditional_depth, MahalanobisRow, MahalanobisTable};
pub use model::{
    fit, fit_with_notes, CardinalityFit, ConditionalDepth, ConditionalKind, DepthBreakdown, DepthModel,
    FitConfig, FitNotes,
};
