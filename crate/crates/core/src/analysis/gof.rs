//! Kolmogorov-Smirnov uniformity of time-rescaled events.

use std::fmt::Write as _;

use crate::depth::DepthModel;
use crate::error::{Error, Result};
use crate::process::{Dataset, Realization};
use crate::rescale::{rescale, IntensityModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sided one-sample KS statistic of `xs` against Uniform[0, 1].
pub fn ks_statistic_uniform(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let u = u.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - u).max(u - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-theta form converges quickly for small arguments.
        let c = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let sum: f64 = (1..=20).map(|j| (c * ((2 * j - 1) as f64).powi(2)).exp()).sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * sum).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS test with Stephens' small-sample scaling `(sqrt n + 0.12 + 0.11 / sqrt n) D`.
pub fn ks_test_uniform(xs: &[f64]) -> KsTest {
    let statistic = ks_statistic_uniform(xs);
    let rn = (xs.len() as f64).sqrt();
    KsTest { statistic, p_value: kolmogorov_sf((rn + 0.12 + 0.11 / rn) * statistic) }
}

/// KS test of `Lambda(s_i) / Lambda(t2)` against Uniform[0, 1].
pub fn ks_uniformity(s: &Realization, intensity: &IntensityModel) -> Result<KsTest> {
    if s.is_empty() {
        return Err(Error::EmptyRealization);
    }
    let u = rescale(s, intensity)?;
    Ok(ks_test_uniform(u.events()))
}

/// One row of the depth versus goodness-of-fit table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofRow {
    pub index: usize,
    pub cardinality: usize,
    pub conditional_depth: f64,
    pub depth: f64,
    /// Absent for empty realizations.
    pub ks: Option<KsTest>,
}

/// Depth and KS p-value of every realization, with events rescaled by
/// `intensity`.
pub fn gof_table(data: &Dataset, model: &DepthModel, intensity: &IntensityModel) -> Result<Vec<GofRow>> {
    data.realizations()
        .iter()
        .enumerate()
        .map(|(index, s)| {
            let b = model.breakdown(s)?;
            let ks = if s.is_empty() { None } else { Some(ks_uniformity(s, intensity)?) };
            Ok(GofRow {
                index,
                cardinality: b.cardinality,
                conditional_depth: b.conditional,
                depth: b.depth,
                ks,
            })
        })
        .collect()
}

pub fn gof_csv(rows: &[GofRow]) -> String {
    let mut out = String::from("index,cardinality,conditional_depth,depth,ks_statistic,p_value\n");
    for r in rows {
        let (d, p) = match r.ks {
            Some(k) => (k.statistic.to_string(), k.p_value.to_string()),
            None => (String::new(), String::new()),
        };
        let _ =
            writeln!(out, "{},{},{},{},{},{}", r.index, r.cardinality, r.conditional_depth, r.depth, d, p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::TimeDomain;

    #[test]
    fn statistic_examples() {
        assert_eq!(ks_statistic_uniform(&[0.5]), 0.5);
        for k in 1..8 {
            let q: Vec<f64> = (1..=k).map(|i| i as f64 / (k + 1) as f64).collect();
            assert!((ks_statistic_uniform(&q) - 1.0 / (k + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn series_branches_agree() {
        for lam in [1.1, 1.15, 1.18, 1.2, 1.25] {
            let c = -std::f64::consts::PI.powi(2) / (8.0 * lam * lam);
            let small: f64 = 1.0
                - (2.0 * std::f64::consts::PI).sqrt() / lam
                    * (1..=20).map(|j| (c * ((2 * j - 1) as f64).powi(2)).exp()).sum::<f64>();
            let large: f64 = 2.0
                * (1..=100)
                    .map(|j| {
                        let t = (-2.0 * (j * j) as f64 * lam * lam).exp();
                        if j % 2 == 1 {
                            t
                        } else {
                            -t
                        }
                    })
                    .sum::<f64>();
            assert!((small - large).abs() < 1e-12, "{lam}");
        }
        // Reference values from scipy.special.kolmogorov.
        assert!((kolmogorov_sf(0.5) - 0.9639452436648751).abs() < 1e-12);
        assert!((kolmogorov_sf(1.36) - 0.049485876755377876).abs() < 1e-12);
        assert!((kolmogorov_sf(1.63) - 0.009846364888486529).abs() < 1e-12);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn empty_realization_rejected() {
        let lam = IntensityModel::constant(TimeDomain::unit(), 1.0).unwrap();
        let s = Realization::empty(TimeDomain::unit());
        assert_eq!(ks_uniformity(&s, &lam).unwrap_err(), Error::EmptyRealization);
    }
}
