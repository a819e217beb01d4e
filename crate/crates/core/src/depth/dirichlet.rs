//! Dirichlet conditional depths and the conditional-mean table they use.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::process::{Realization, TimeDomain};

/// `(k+1) * prod_i (gap_i / total)^(1/(k+1))`, evaluated in the log domain.
///
/// `gaps` must yield exactly `k + 1` nonnegative values; any zero gap gives 0.
pub(crate) fn symmetric_depth(gaps: impl Iterator<Item = f64>, k: usize, total: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let m = (k + 1) as f64;
    let mut log_sum = 0.0;
    for g in gaps {
        if g <= 0.0 {
            return 0.0;
        }
        log_sum += (g / total).ln();
    }
    (m.ln() + log_sum / m).exp().min(1.0)
}

/// Conditional depth of a homogeneous Poisson process given `|s|`; 1 for the
/// empty realization.
pub fn hpp_conditional_depth(s: &Realization) -> f64 {
    let span = s.domain().span();
    symmetric_depth(s.to_iet().gaps().iter().copied(), s.cardinality(), span)
}

/// Per-cardinality mean event vectors, strictly increasing and strictly
/// inside the window.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalMeanTable {
    domain: TimeDomain,
    rows: BTreeMap<usize, Vec<f64>>,
}

fn check_row(domain: TimeDomain, k: usize, row: &[f64]) -> Result<()> {
    if row.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: row.len() });
    }
    let mut prev = domain.t1();
    for &m in row.iter().chain(std::iter::once(&domain.t2())) {
        if !(m.is_finite() && m > prev) {
            return Err(Error::NonMonotoneMeans { k });
        }
        prev = m;
    }
    Ok(())
}

impl ConditionalMeanTable {
    pub fn new(domain: TimeDomain, rows: BTreeMap<usize, Vec<f64>>) -> Result<Self> {
        for (&k, row) in &rows {
            check_row(domain, k, row)?;
        }
        Ok(Self { domain, rows })
    }

    /// Builds the table after forcing every row to keep consecutive means at
    /// least `min_gap` apart. Returns the cardinalities that were adjusted.
    pub fn repaired(
        domain: TimeDomain,
        mut rows: BTreeMap<usize, Vec<f64>>,
        min_gap: f64,
    ) -> Result<(Self, Vec<usize>)> {
        let mut touched = Vec::new();
        for (&k, row) in rows.iter_mut() {
            if row.len() != k {
                return Err(Error::DimensionMismatch { expected: k, got: row.len() });
            }
            if check_row(domain, k, row).is_err() {
                *row = repair_row(domain, row, min_gap)?;
                touched.push(k);
            }
        }
        Ok((Self::new(domain, rows)?, touched))
    }

    /// Population centre of a homogeneous Poisson process,
    /// `theta_k = (i (t2 - t1) / (k + 1))_i`, for `k = 1..=max_k`.
    pub fn hpp_center(domain: TimeDomain, max_k: usize) -> Self {
        let rows = (1..=max_k).map(|k| (k, hpp_center_row(domain, k))).collect();
        Self { domain, rows }
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn row(&self, k: usize) -> Option<&[f64]> {
        self.rows.get(&k).map(Vec::as_slice)
    }

    pub fn rows(&self) -> &BTreeMap<usize, Vec<f64>> {
        &self.rows
    }

    pub fn max_cardinality(&self) -> usize {
        self.rows.keys().next_back().copied().unwrap_or(0)
    }

    /// Table transported along `t -> a t + b`.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        let domain = self.domain.affine(a, b)?;
        let rows = self.rows.iter().map(|(&k, row)| (k, row.iter().map(|&m| a * m + b).collect())).collect();
        Self::new(domain, rows)
    }
}

pub fn hpp_center_row(domain: TimeDomain, k: usize) -> Vec<f64> {
    (1..=k).map(|i| domain.t1() + domain.span() * i as f64 / (k + 1) as f64).collect()
}

/// Least-squares isotonic fit of `row` subject to consecutive gaps (with the
/// window edges as sentinels) of at least `min_gap`.
pub fn repair_row(domain: TimeDomain, row: &[f64], min_gap: f64) -> Result<Vec<f64>> {
    let k = row.len();
    if !(min_gap > 0.0) || (k + 1) as f64 * min_gap >= domain.span() {
        return Err(Error::InvalidParameter(format!("min gap {min_gap} cannot be met")));
    }
    // With v_i = mu_i - i * gap the constraint becomes v nondecreasing.
    let shifted: Vec<f64> = row.iter().enumerate().map(|(i, m)| m - (i + 1) as f64 * min_gap).collect();
    let mut fitted = pool_adjacent_violators(&shifted);
    let (lo, hi) = (domain.t1(), domain.t2() - (k + 1) as f64 * min_gap);
    fitted.iter_mut().for_each(|v| *v = v.clamp(lo, hi));
    Ok(fitted.iter().enumerate().map(|(i, v)| v + (i + 1) as f64 * min_gap).collect())
}

fn pool_adjacent_violators(ys: &[f64]) -> Vec<f64> {
    // (mean, weight) blocks
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(ys.len());
    for &y in ys {
        blocks.push((y, 1));
        while blocks.len() > 1 {
            let (m2, w2) = blocks[blocks.len() - 1];
            let (m1, w1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let w = w1 + w2;
            *blocks.last_mut().unwrap() = ((m1 * w1 as f64 + m2 * w2 as f64) / w as f64, w);
        }
    }
    blocks.into_iter().flat_map(|(m, w)| std::iter::repeat_n(m, w)).collect()
}

/// Dirichlet depth relative to a conditional mean:
/// `prod_i (gap_i / dmu_i)^(dmu_i / (t2 - t1))`, 1 at the mean, 0 on the
/// boundary, 1 for the empty realization.
pub fn dirichlet_conditional_depth(s: &Realization, means: &ConditionalMeanTable) -> Result<f64> {
    if s.domain() != means.domain {
        return Err(Error::DomainMismatch);
    }
    let k = s.cardinality();
    if k == 0 {
        return Ok(1.0);
    }
    let row = means.row(k).ok_or(Error::MissingCardinality(k))?;
    let domain = s.domain();
    let span = domain.span();
    let mut log_sum = 0.0;
    let mut prev_s = domain.t1();
    let mut prev_m = domain.t1();
    let ends = s.events().iter().zip(row).map(|(&a, &b)| (a, b));
    for (si, mi) in ends.chain(std::iter::once((domain.t2(), domain.t2()))) {
        let gap = si - prev_s;
        let dmu = mi - prev_m;
        if gap <= 0.0 {
            return Ok(0.0);
        }
        log_sum += dmu / span * (gap / dmu).ln();
        prev_s = si;
        prev_m = mi;
    }
    Ok(log_sum.exp().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> TimeDomain {
        TimeDomain::unit()
    }

    fn real(events: &[f64]) -> Realization {
        Realization::new(unit(), events.to_vec()).unwrap()
    }

    #[test]
    fn hpp_examples() {
        assert_eq!(hpp_conditional_depth(&real(&[1.0 / 3.0, 2.0 / 3.0])), 1.0);
        assert!((hpp_conditional_depth(&real(&[0.25])) - 0.8660254037844386).abs() < 1e-12);
        assert_eq!(hpp_conditional_depth(&real(&[0.0, 0.4])), 0.0);
        assert_eq!(hpp_conditional_depth(&real(&[])), 1.0);
        assert_eq!(hpp_conditional_depth(&real(&[0.3, 0.3])), 0.0);
    }

    #[test]
    fn dirichlet_examples() {
        let table = ConditionalMeanTable::new(unit(), [(1, vec![0.25])].into()).unwrap();
        let d = dirichlet_conditional_depth(&real(&[0.5]), &table).unwrap();
        // Independent evaluation: 2^(1/4) (2/3)^(3/4).
        assert!((d - 0.8773826753016616).abs() < 1e-12);
        assert_eq!(dirichlet_conditional_depth(&real(&[0.25]), &table).unwrap(), 1.0);
        assert_eq!(
            dirichlet_conditional_depth(&real(&[0.1, 0.2]), &table).unwrap_err(),
            Error::MissingCardinality(2)
        );
        assert_eq!(dirichlet_conditional_depth(&real(&[]), &table).unwrap(), 1.0);
    }

    #[test]
    fn table_rejects_non_monotone_rows() {
        let bad: BTreeMap<usize, Vec<f64>> = [(2, vec![0.5, 0.5])].into();
        assert_eq!(ConditionalMeanTable::new(unit(), bad).unwrap_err(), Error::NonMonotoneMeans { k: 2 });
        let edge: BTreeMap<usize, Vec<f64>> = [(1, vec![1.0])].into();
        assert!(ConditionalMeanTable::new(unit(), edge).is_err());
        let short: BTreeMap<usize, Vec<f64>> = [(3, vec![0.1, 0.2])].into();
        assert!(ConditionalMeanTable::new(unit(), short).is_err());
    }

    #[test]
    fn repair_enforces_min_gap() {
        let rows: BTreeMap<usize, Vec<f64>> =
            [(3, vec![0.4, 0.3, 0.9]), (1, vec![0.5]), (2, vec![0.0, 1.0])].into();
        let (table, touched) = ConditionalMeanTable::repaired(unit(), rows, 1e-6).unwrap();
        assert_eq!(touched, vec![2, 3]);
        assert_eq!(table.row(1).unwrap(), &[0.5]);
        let r3 = table.row(3).unwrap();
        assert!((r3[0] - 0.35).abs() < 1e-5 && (r3[1] - 0.35).abs() < 1e-5);
        assert!(r3[1] - r3[0] >= 1e-6 * 0.999);
        let r2 = table.row(2).unwrap();
        assert!(r2[0] > 0.0 && r2[1] < 1.0);
    }

    #[test]
    fn pava_matches_hand_fit() {
        assert_eq!(pool_adjacent_violators(&[1.0, 3.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(pool_adjacent_violators(&[3.0, 2.0, 1.0]), vec![2.0, 2.0, 2.0]);
    }
}
