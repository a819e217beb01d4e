//! Ranking, classification, goodness of fit and contour export.

pub mod classify;
pub mod contour;
pub mod gof;
pub mod rank;

pub use classify::{
    ipp_log_likelihood, likelihood_classify, loo_r_search, train_classifier, AccuracyTable, Classifier,
    ClassifierConfig, LikelihoodClassifier, Prediction, ACCURACY_HEADER,
};
pub use contour::{contour_csv, contour_grid, ContourDepth, ContourPoint};
pub use gof::{gof_csv, gof_table, kolmogorov_sf, ks_test_uniform, ks_uniformity, GofRow, KsTest};
pub use rank::{depth_csv, rank, score, RankEntry, RankReport};
