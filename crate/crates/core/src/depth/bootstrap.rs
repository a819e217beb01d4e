//! Bootstrap estimation of per-cardinality conditional means.
//!
//! Every realization is resampled to exactly `k` events, by deleting a
//! uniformly chosen subset when it has too many or by padding with events
//! drawn with replacement from the pooled event list when it has too few.
//! The sorted resamples are averaged elementwise.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;

use crate::depth::dirichlet::ConditionalMeanTable;
use crate::error::{Error, Result};
use crate::process::{Dataset, Realization};
use crate::simulate::stream_rng;

/// Bootstrap settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bootstrap {
    /// Largest cardinality to estimate; defaults to the largest observed.
    pub max_k: Option<usize>,
    /// Independent repetitions averaged together.
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for Bootstrap {
    fn default() -> Self {
        Self { max_k: None, repetitions: 10, seed: 0 }
    }
}

/// Running mean and covariance of the resampled vectors for one `k`.
#[derive(Debug, Clone)]
pub(crate) struct Moments {
    pub count: usize,
    pub mean: Vec<f64>,
    pub scatter: Option<Vec<f64>>,
}

impl Moments {
    fn new(k: usize, with_cov: bool) -> Self {
        Self { count: 0, mean: vec![0.0; k], scatter: with_cov.then(|| vec![0.0; k * k]) }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        let k = self.mean.len();
        let delta: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        for (m, d) in self.mean.iter_mut().zip(&delta) {
            *m += d / n;
        }
        if let Some(s) = self.scatter.as_mut() {
            for i in 0..k {
                let after_i = x[i] - self.mean[i];
                for j in 0..k {
                    s[i * k + j] += delta[j] * after_i;
                }
            }
        }
    }

    pub fn covariance(&self) -> Option<Vec<Vec<f64>>> {
        let s = self.scatter.as_ref()?;
        let k = self.mean.len();
        let denom = (self.count.max(2) - 1) as f64;
        Some((0..k).map(|i| (0..k).map(|j| s[i * k + j] / denom).collect()).collect())
    }
}

fn resample_into<R: Rng>(s: &Realization, k: usize, pool: &[f64], rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    let events = s.events();
    if events.len() >= k {
        let mut keep = index::sample(rng, events.len(), k).into_vec();
        keep.sort_unstable();
        out.extend(keep.into_iter().map(|i| events[i]));
    } else {
        out.extend_from_slice(events);
        for _ in events.len()..k {
            out.push(pool[rng.random_range(0..pool.len())]);
        }
        out.sort_by(f64::total_cmp);
    }
}

impl Bootstrap {
    fn resolve_max_k(&self, data: &Dataset) -> Result<usize> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter("need at least one bootstrap repetition".into()));
        }
        Ok(self.max_k.unwrap_or_else(|| data.max_cardinality()))
    }

    pub(crate) fn moments(&self, data: &Dataset, k: usize, with_cov: bool) -> Result<Moments> {
        let pool: Vec<f64> = data.realizations().iter().flat_map(|s| s.events().iter().copied()).collect();
        if pool.is_empty() && data.realizations().iter().any(|s| s.cardinality() < k) {
            return Err(Error::PoolEmpty { k });
        }
        let mut moments = Moments::new(k, with_cov);
        let mut buf = Vec::with_capacity(k);
        for rep in 0..self.repetitions {
            let mut rng = stream_rng(self.seed, ((rep as u64) << 32) | k as u64);
            for s in data.realizations() {
                resample_into(s, k, &pool, &mut rng, &mut buf);
                moments.push(&buf);
            }
        }
        Ok(moments)
    }

    /// Unvalidated mean rows for `k = 1..=max_k`.
    pub fn raw_means(&self, data: &Dataset) -> Result<BTreeMap<usize, Vec<f64>>> {
        let max_k = self.resolve_max_k(data)?;
        (1..=max_k).map(|k| Ok((k, self.moments(data, k, false)?.mean))).collect()
    }

    /// Mean table; fails with `NonMonotoneMeans` on any row that is not
    /// strictly increasing inside the window.
    pub fn means(&self, data: &Dataset) -> Result<ConditionalMeanTable> {
        ConditionalMeanTable::new(data.domain(), self.raw_means(data)?)
    }

    /// Mean table with offending rows repaired to a minimum spacing of
    /// `1e-6 (t2 - t1)`; also returns the repaired cardinalities.
    pub fn means_repaired(&self, data: &Dataset) -> Result<(ConditionalMeanTable, Vec<usize>)> {
        let min_gap = 1e-6 * data.domain().span();
        ConditionalMeanTable::repaired(data.domain(), self.raw_means(data)?, min_gap)
    }
}

/// Conditional mean table for `k = 1..=max_k` (largest observed cardinality
/// by default), averaged over `repetitions` bootstrap passes.
pub fn bootstrap_conditional_means(
    data: &Dataset,
    max_k: Option<usize>,
    repetitions: usize,
    seed: u64,
) -> Result<ConditionalMeanTable> {
    Bootstrap { max_k, repetitions, seed }.means(data)
}
