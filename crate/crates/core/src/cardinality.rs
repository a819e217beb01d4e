//! Event-count models and the normalized cardinality weight `w(k)^r`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::stream_rng;
use crate::stats::{ln_factorial, log_sum_exp, poisson_ln_pmf};

/// Parametric family and parameters of a count model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum CountDistribution {
    /// Probability mass over `0..=K`.
    Empirical {
        pmf: Vec<f64>,
    },
    Poisson {
        mean: f64,
    },
    PoissonMixture {
        weights: Vec<f64>,
        means: Vec<f64>,
    },
}

/// Distribution of the number of events, supported on `0..=K`.
///
/// Mass beyond the cap is ignored: it is never normalized back in, and the
/// weight normalizer `max_k P(k)` only ranges over `0..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct CardinalityModel {
    cap: usize,
    dist: CountDistribution,
    pmf: Vec<f64>,
    peak: f64,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawModel {
    #[serde(rename = "K")]
    cap: usize,
    #[serde(flatten)]
    dist: CountDistribution,
}

impl TryFrom<RawModel> for CardinalityModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        CardinalityModel::new(raw.dist, raw.cap)
    }
}

impl From<CardinalityModel> for RawModel {
    fn from(m: CardinalityModel) -> Self {
        RawModel { cap: m.cap, dist: m.dist }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

impl CardinalityModel {
    pub fn new(dist: CountDistribution, cap: usize) -> Result<Self> {
        match &dist {
            CountDistribution::Empirical { pmf } => {
                if pmf.len() != cap + 1 {
                    return Err(Error::DimensionMismatch { expected: cap + 1, got: pmf.len() });
                }
                if pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(invalid("pmf values must be finite and nonnegative"));
                }
                let total: f64 = pmf.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(invalid(format!("empirical pmf sums to {total}")));
                }
            }
            CountDistribution::Poisson { mean } => {
                if !(mean.is_finite() && *mean >= 0.0) {
                    return Err(invalid(format!("poisson mean {mean}")));
                }
            }
            CountDistribution::PoissonMixture { weights, means } => {
                if weights.is_empty() || weights.len() != means.len() {
                    return Err(invalid("mixture needs matching nonempty weights and means"));
                }
                if weights.iter().any(|w| !(*w > 0.0 && *w <= 1.0)) {
                    return Err(invalid("mixture weights must lie in (0, 1]"));
                }
                if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(invalid("mixture weights must sum to 1"));
                }
                if means.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
                    return Err(invalid("mixture means must be finite and nonnegative"));
                }
            }
        }
        let pmf: Vec<f64> = (0..=cap).map(|k| dist_pmf(&dist, k)).collect();
        let peak = pmf.iter().copied().fold(0.0, f64::max);
        if !(peak > 0.0) {
            return Err(invalid("count model puts no mass on 0..=K"));
        }
        Ok(Self { cap, dist, pmf, peak })
    }

    /// Cap `K`: the largest cardinality with possibly nonzero mass.
    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn distribution(&self) -> &CountDistribution {
        &self.dist
    }

    /// `P(k)`, zero above the cap.
    pub fn pmf(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    /// Most probable cardinality in `0..=K` (smallest on ties).
    pub fn mode(&self) -> usize {
        self.pmf.iter().position(|&p| p == self.peak).unwrap_or(0)
    }

    /// `(P(k) / max_j P(j))^r`, defined as 0 where `P(k) = 0`.
    pub fn weight(&self, k: usize, r: f64) -> f64 {
        let p = self.pmf(k);
        if p == 0.0 {
            return 0.0;
        }
        if r == 0.0 {
            return 1.0;
        }
        (p / self.peak).powf(r)
    }

    /// Log-likelihood of the counts under the untruncated distribution.
    pub fn log_likelihood(&self, counts: &[usize]) -> f64 {
        counts.iter().map(|&k| self.pmf(k).ln()).sum()
    }
}

fn dist_pmf(dist: &CountDistribution, k: usize) -> f64 {
    match dist {
        CountDistribution::Empirical { pmf } => pmf.get(k).copied().unwrap_or(0.0),
        CountDistribution::Poisson { mean } => poisson_ln_pmf(k as u64, *mean).exp(),
        CountDistribution::PoissonMixture { weights, means } => {
            weights.iter().zip(means).map(|(w, m)| w * poisson_ln_pmf(k as u64, *m).exp()).sum()
        }
    }
}

/// Default cap: five above the largest observed count.
pub fn default_cap(counts: &[usize]) -> usize {
    counts.iter().copied().max().unwrap_or(0) + 5
}

fn check_counts(counts: &[usize], cap: usize) -> Result<()> {
    if counts.is_empty() {
        return Err(Error::EmptyDataset);
    }
    match counts.iter().find(|&&c| c > cap) {
        Some(&count) => Err(Error::CapExceeded { count, cap }),
        None => Ok(()),
    }
}

/// Empirical mass function of the counts over `0..=K`.
pub fn fit_empirical(counts: &[usize], cap: Option<usize>) -> Result<CardinalityModel> {
    let cap = cap.unwrap_or_else(|| default_cap(counts));
    check_counts(counts, cap)?;
    let mut pmf = vec![0.0; cap + 1];
    for &c in counts {
        pmf[c] += 1.0;
    }
    let n = counts.len() as f64;
    pmf.iter_mut().for_each(|p| *p /= n);
    CardinalityModel::new(CountDistribution::Empirical { pmf }, cap)
}

/// Poisson with the maximum-likelihood mean (the sample mean).
pub fn fit_poisson_mle(counts: &[usize], cap: Option<usize>) -> Result<CardinalityModel> {
    let cap = cap.unwrap_or_else(|| default_cap(counts));
    check_counts(counts, cap)?;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / counts.len() as f64;
    CardinalityModel::new(CountDistribution::Poisson { mean }, cap)
}

/// Settings for [`fit_poisson_mixture_em`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmConfig {
    pub components: usize,
    /// Stop once the per-count log-likelihood gain drops below this.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self { components: 2, tol: 1e-8, max_iter: 500, seed: 0 }
    }
}

/// Result of an EM run.
#[derive(Debug, Clone)]
pub struct MixtureFit {
    pub model: CardinalityModel,
    /// Total log-likelihood after initialization and after every iteration.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Components whose weight fell below `1e-6` and were removed.
    pub dropped: usize,
}

const MIN_COMPONENT_WEIGHT: f64 = 1e-6;

/// k-means++ style seeding on the counts.
fn seed_means<R: Rng>(xs: &[f64], m: usize, rng: &mut R) -> Vec<f64> {
    let mut centres = vec![xs[rng.random_range(0..xs.len())]];
    while centres.len() < m {
        let d2: Vec<f64> = xs
            .iter()
            .map(|x| centres.iter().map(|c| (x - c) * (x - c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = xs.len() - 1;
            for (i, d) in d2.iter().enumerate() {
                if u < *d {
                    pick = i;
                    break;
                }
                u -= d;
            }
            xs[pick]
        } else {
            xs[rng.random_range(0..xs.len())]
        };
        centres.push(next);
    }
    centres.iter().map(|c| c.max(0.5)).collect()
}

/// Distinct counts with multiplicities and `ln x!`.
struct Tally {
    values: Vec<f64>,
    mult: Vec<f64>,
    ln_fact: Vec<f64>,
}

impl Tally {
    fn new(counts: &[usize]) -> Self {
        let mut sorted = counts.to_vec();
        sorted.sort_unstable();
        let (mut values, mut mult, mut ln_fact) = (Vec::new(), Vec::new(), Vec::new());
        for c in sorted {
            if values.last() == Some(&(c as f64)) {
                *mult.last_mut().unwrap() += 1.0;
            } else {
                values.push(c as f64);
                mult.push(1.0);
                ln_fact.push(ln_factorial(c as u64));
            }
        }
        Self { values, mult, ln_fact }
    }

    /// Fills `out[j] = ln w_j + ln P(x_i; mean_j)`.
    fn joint(&self, i: usize, weights: &[f64], means: &[f64], out: &mut [f64]) {
        let x = self.values[i];
        for (j, (w, m)) in weights.iter().zip(means).enumerate() {
            let ln_p = if *m == 0.0 {
                if x == 0.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                x * m.ln() - m - self.ln_fact[i]
            };
            out[j] = w.ln() + ln_p;
        }
    }

    fn log_likelihood(&self, weights: &[f64], means: &[f64], scratch: &mut [f64]) -> f64 {
        (0..self.values.len())
            .map(|i| {
                self.joint(i, weights, means, scratch);
                self.mult[i] * log_sum_exp(scratch)
            })
            .sum()
    }
}

/// Poisson mixture by expectation-maximization.
pub fn fit_poisson_mixture_em(counts: &[usize], cap: Option<usize>, config: EmConfig) -> Result<MixtureFit> {
    let cap = cap.unwrap_or_else(|| default_cap(counts));
    check_counts(counts, cap)?;
    let m = config.components;
    if m == 0 {
        return Err(invalid("mixture needs at least one component"));
    }
    let n = counts.len();
    let xf: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let tally = Tally::new(counts);
    let u = tally.values.len();

    let mut rng = stream_rng(config.seed, 0);
    let mut means = seed_means(&xf, m, &mut rng);
    let mut weights = vec![1.0 / m as f64; m];
    let mut scratch = vec![0.0; m];
    let mut resp = vec![0.0; u * m];
    let mut trace = vec![tally.log_likelihood(&weights, &means, &mut scratch)];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iter {
        iterations += 1;
        // E-step
        for i in 0..u {
            tally.joint(i, &weights, &means, &mut scratch);
            let lse = log_sum_exp(&scratch);
            for j in 0..m {
                resp[i * m + j] = (scratch[j] - lse).exp();
            }
        }
        // M-step
        for j in 0..m {
            let mut mass = 0.0;
            let mut moment = 0.0;
            for i in 0..u {
                let r = tally.mult[i] * resp[i * m + j];
                mass += r;
                moment += r * tally.values[i];
            }
            weights[j] = (mass / n as f64).min(1.0);
            if mass > 0.0 {
                means[j] = moment / mass;
            }
        }
        let ll = tally.log_likelihood(&weights, &means, &mut scratch);
        let gain = (ll - trace[trace.len() - 1]) / n as f64;
        trace.push(ll);
        if gain < config.tol {
            converged = true;
            break;
        }
    }

    let keep: Vec<usize> = (0..m).filter(|&j| weights[j] >= MIN_COMPONENT_WEIGHT).collect();
    let dropped = m - keep.len();
    let kept_mass: f64 = keep.iter().map(|&j| weights[j]).sum();
    let mut final_weights: Vec<f64> = keep.iter().map(|&j| weights[j] / kept_mass).collect();
    let final_means: Vec<f64> = keep.iter().map(|&j| means[j]).collect();
    if dropped == 0 {
        final_weights = weights;
    }
    let model = CardinalityModel::new(
        CountDistribution::PoissonMixture { weights: final_weights, means: final_means },
        cap,
    )?;
    Ok(MixtureFit { model, log_likelihood: trace, iterations, converged, dropped })
}

/// Fits `1..=max_components` mixtures and keeps the lowest BIC.
/// Returns the winning fit and every `(m, bic)` pair tried.
pub fn select_mixture_bic(
    counts: &[usize],
    cap: Option<usize>,
    max_components: usize,
    config: EmConfig,
) -> Result<(MixtureFit, Vec<(usize, f64)>)> {
    let n = counts.len() as f64;
    let mut best: Option<(f64, MixtureFit)> = None;
    let mut table = Vec::new();
    for m in 1..=max_components.max(1) {
        let fit = fit_poisson_mixture_em(counts, cap, EmConfig { components: m, ..config })?;
        let ll = fit.log_likelihood[fit.log_likelihood.len() - 1];
        let bic = -2.0 * ll + (2 * m - 1) as f64 * n.ln();
        table.push((m, bic));
        if best.as_ref().is_none_or(|(b, _)| bic < *b) {
            best = Some((bic, fit));
        }
    }
    Ok((best.expect("at least one candidate").1, table))
}
