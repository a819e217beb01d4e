//! Regularized Mahalanobis conditional depth, kept as a baseline.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::depth::bootstrap::Bootstrap;
use crate::error::{Error, Result};
use crate::process::{Dataset, Realization, TimeDomain};

/// `1 / (1 + (s - mean)^T (cov + ridge I)^-1 (s - mean))`.
pub fn mahalanobis_conditional_depth(
    s: &Realization,
    mean: &[f64],
    covariance: &[Vec<f64>],
    ridge: f64,
) -> Result<f64> {
    mahalanobis_depth_of(s.events(), mean, covariance, ridge)
}

pub(crate) fn mahalanobis_depth_of(
    x: &[f64],
    mean: &[f64],
    covariance: &[Vec<f64>],
    ridge: f64,
) -> Result<f64> {
    let k = mean.len();
    if x.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: x.len() });
    }
    if covariance.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: covariance.len() });
    }
    if let Some(row) = covariance.iter().find(|row| row.len() != k) {
        return Err(Error::DimensionMismatch { expected: k, got: row.len() });
    }
    if k == 0 {
        return Ok(1.0);
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidParameter(format!("ridge must be nonnegative, got {ridge}")));
    }
    let sigma = DMatrix::from_fn(k, k, |i, j| covariance[i][j] + if i == j { ridge } else { 0.0 });
    let chol = sigma
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("regularized covariance is not positive definite".into()))?;
    let diff = DVector::from_iterator(k, x.iter().zip(mean).map(|(a, m)| a - m));
    let d2 = diff.dot(&chol.solve(&diff));
    Ok(1.0 / (1.0 + d2.max(0.0)))
}

/// Mean, covariance and ridge for one cardinality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MahalanobisRow {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub ridge: f64,
}

impl MahalanobisRow {
    /// Row with the default ridge `1e-6 trace / k` (or `1e-6 span^2` if the
    /// covariance vanishes).
    pub fn with_default_ridge(domain: TimeDomain, mean: Vec<f64>, covariance: Vec<Vec<f64>>) -> Self {
        let k = mean.len().max(1) as f64;
        let trace: f64 = covariance.iter().enumerate().map(|(i, r)| r[i]).sum();
        let ridge = if trace > 0.0 { 1e-6 * trace / k } else { 1e-6 * domain.span().powi(2) };
        Self { mean, covariance, ridge }
    }

    fn check(&self, k: usize) -> Result<()> {
        if self.mean.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: self.mean.len() });
        }
        let sizes = std::iter::once(self.covariance.len()).chain(self.covariance.iter().map(Vec::len));
        if let Some(got) = sizes.into_iter().find(|&n| n != k) {
            return Err(Error::DimensionMismatch { expected: k, got });
        }
        if !(self.ridge > 0.0 && self.ridge.is_finite()) {
            return Err(Error::InvalidParameter(format!("ridge must be positive, got {}", self.ridge)));
        }
        Ok(())
    }
}

/// Per-cardinality Mahalanobis parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MahalanobisTable {
    domain: TimeDomain,
    rows: BTreeMap<usize, MahalanobisRow>,
}

impl MahalanobisTable {
    pub fn new(domain: TimeDomain, rows: BTreeMap<usize, MahalanobisRow>) -> Result<Self> {
        for (&k, row) in &rows {
            row.check(k)?;
        }
        Ok(Self { domain, rows })
    }

    /// Homogeneous Poisson reference: uniform order-statistic means and
    /// covariances `i (k + 1 - j) / ((k + 1)^2 (k + 2)) span^2` for `i <= j`.
    pub fn hpp(domain: TimeDomain, max_k: usize) -> Self {
        let span = domain.span();
        let rows = (1..=max_k)
            .map(|k| {
                let m = (k + 1) as f64;
                let mean = (1..=k).map(|i| domain.t1() + span * i as f64 / m).collect();
                let covariance = (1..=k)
                    .map(|i| {
                        (1..=k)
                            .map(|j| {
                                let (a, b) = (i.min(j) as f64, i.max(j) as f64);
                                a * (m - b) / (m * m * (m + 1.0)) * span * span
                            })
                            .collect()
                    })
                    .collect();
                (k, MahalanobisRow::with_default_ridge(domain, mean, covariance))
            })
            .collect();
        Self { domain, rows }
    }

    /// Bootstrap moments for `k = 1..=max_k`.
    pub fn fit(data: &Dataset, bootstrap: Bootstrap) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let max_k = bootstrap.max_k.unwrap_or_else(|| data.max_cardinality());
        let domain = data.domain();
        let mut rows = BTreeMap::new();
        for k in 1..=max_k {
            let m = bootstrap.moments(data, k, true)?;
            let cov = m.covariance().expect("moments tracked with covariance");
            rows.insert(k, MahalanobisRow::with_default_ridge(domain, m.mean, cov));
        }
        Self::new(domain, rows)
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn row(&self, k: usize) -> Option<&MahalanobisRow> {
        self.rows.get(&k)
    }

    pub fn rows(&self) -> &BTreeMap<usize, MahalanobisRow> {
        &self.rows
    }

    pub fn depth(&self, s: &Realization) -> Result<f64> {
        if s.domain() != self.domain {
            return Err(Error::DomainMismatch);
        }
        let k = s.cardinality();
        if k == 0 {
            return Ok(1.0);
        }
        let row = self.row(k).ok_or(Error::MissingCardinality(k))?;
        mahalanobis_conditional_depth(s, &row.mean, &row.covariance, row.ridge)
    }

    /// Table transported along `t -> a t + b`; the ridge scales with `a^2`.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        let domain = self.domain.affine(a, b)?;
        let rows = self
            .rows
            .iter()
            .map(|(&k, r)| {
                let row = MahalanobisRow {
                    mean: r.mean.iter().map(|&m| a * m + b).collect(),
                    covariance: r
                        .covariance
                        .iter()
                        .map(|row| row.iter().map(|c| c * a * a).collect())
                        .collect(),
                    ridge: r.ridge * a * a,
                };
                (k, row)
            })
            .collect();
        Self::new(domain, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth::hpp_conditional_depth;

    fn identity(k: usize) -> Vec<Vec<f64>> {
        (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
    }

    #[test]
    fn examples() {
        let d = TimeDomain::unit();
        let s = Realization::new(d, vec![0.3, 0.6]).unwrap();
        assert_eq!(mahalanobis_conditional_depth(&s, &[0.3, 0.6], &identity(2), 1e-9).unwrap(), 1.0);

        let one = Realization::new(TimeDomain::new(0.0, 3.0).unwrap(), vec![2.0]).unwrap();
        let v = mahalanobis_conditional_depth(&one, &[1.0], &identity(1), 0.0).unwrap();
        assert!((v - 0.5).abs() < 1e-15);

        let err = mahalanobis_conditional_depth(&s, &[0.5], &identity(1), 1e-6).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 1, got: 2 });
    }

    #[test]
    fn boundary_points_keep_positive_depth() {
        let d = TimeDomain::unit();
        let table = MahalanobisTable::hpp(d, 3);
        let s = Realization::new(d, vec![0.0, 0.4]).unwrap();
        assert!(table.depth(&s).unwrap() > 0.0);
        assert_eq!(hpp_conditional_depth(&s), 0.0);
    }

    #[test]
    fn hpp_covariance_matches_order_statistics() {
        let table = MahalanobisTable::hpp(TimeDomain::unit(), 2);
        let row = table.row(2).unwrap();
        // Var U(1) of 2 uniforms = 2/36, Cov = 1/36.
        assert!((row.covariance[0][0] - 2.0 / 36.0).abs() < 1e-15);
        assert!((row.covariance[0][1] - 1.0 / 36.0).abs() < 1e-15);
        assert!((row.covariance[1][1] - 2.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn affine_transport_preserves_depth() {
        let d = TimeDomain::unit();
        let table = MahalanobisTable::hpp(d, 2);
        let moved = table.affine(4.0, -1.0).unwrap();
        let s = Realization::new(d, vec![0.2, 0.9]).unwrap();
        let t = s.affine(4.0, -1.0).unwrap();
        assert!((table.depth(&s).unwrap() - moved.depth(&t).unwrap()).abs() < 1e-12);
    }
}
