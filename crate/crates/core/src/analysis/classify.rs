//! Maximum-depth classification and a likelihood baseline.

use std::fmt::Write as _;

use crate::cardinality::default_cap;
use crate::depth::{fit_with_notes, CardinalityFit, ConditionalKind, DepthModel, FitConfig};
use crate::error::{Error, Result};
use crate::process::{Dataset, Realization, TimeDomain};
use crate::rescale::{estimate_intensity, IntensityModel};

/// Settings for [`train_classifier`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    pub kind: ConditionalKind,
    pub r: f64,
    /// Cardinality cap shared by every class; defaults to the largest count
    /// in the whole training set plus five.
    pub cap: Option<usize>,
    pub cardinality: CardinalityFit,
    pub repetitions: usize,
    pub bins: Option<usize>,
    pub bandwidth: Option<f64>,
    pub seed: u64,
    pub repair: bool,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            kind: ConditionalKind::TsDirichlet,
            r: 1.0,
            cap: None,
            cardinality: CardinalityFit::Mixture(None),
            repetitions: 10,
            bins: None,
            bandwidth: None,
            seed: 0,
            repair: true,
        }
    }
}

/// One depth model per class, labels in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    labels: Vec<String>,
    models: Vec<DepthModel>,
}

/// Outcome for a single realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// `None` means abstain (every class scored 0).
    pub label: Option<String>,
    /// Combined depth per class, in label order.
    pub depths: Vec<f64>,
    /// More than one class reached the maximum depth.
    pub tie: bool,
    /// Chosen by cardinality probability because every depth was 0.
    pub forced: bool,
}

fn labeled_classes(data: &Dataset) -> Result<(Vec<String>, Vec<Dataset>)> {
    if data.labels().is_none() {
        return Err(Error::InsufficientData("training data must be labeled".into()));
    }
    let labels = data.classes();
    if labels.len() < 2 {
        return Err(Error::InsufficientData(format!("need at least two classes, found {}", labels.len())));
    }
    let parts: Vec<Dataset> = labels.iter().map(|l| data.class(l)).collect();
    if let Some((l, _)) = labels.iter().zip(&parts).find(|(_, d)| d.is_empty()) {
        return Err(Error::InsufficientData(format!("class '{l}' has no realizations")));
    }
    Ok((labels, parts))
}

/// Argmax with ties resolved to the first (smallest-label) class.
fn argmax(values: &[f64]) -> (usize, bool) {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    let tie = values.iter().filter(|&&v| v == values[best]).count() > 1;
    (best, tie)
}

/// Fits one depth model per class.
pub fn train_classifier(data: &Dataset, config: &ClassifierConfig) -> Result<Classifier> {
    let (labels, parts) = labeled_classes(data)?;
    let cap = config.cap.unwrap_or_else(|| default_cap(&data.counts()));
    let fit_config = FitConfig {
        kind: config.kind,
        r: config.r,
        cap: Some(cap),
        cardinality: config.cardinality,
        repetitions: config.repetitions,
        bins: config.bins,
        bandwidth: config.bandwidth,
        seed: config.seed,
        repair: config.repair,
    };
    let models =
        parts.iter().map(|d| fit_with_notes(d, &fit_config).map(|(m, _)| m)).collect::<Result<Vec<_>>>()?;
    Ok(Classifier { labels, models })
}

impl Classifier {
    pub fn new(labels: Vec<String>, models: Vec<DepthModel>) -> Result<Self> {
        if labels.len() != models.len() || labels.len() < 2 {
            return Err(Error::InsufficientData("need one model for each of at least two classes".into()));
        }
        let (domain, kind) = (models[0].domain(), models[0].kind());
        if models.iter().any(|m| m.domain() != domain || m.kind() != kind) {
            return Err(Error::InvalidParameter("class models must share domain and kind".into()));
        }
        let mut pairs: Vec<(String, DepthModel)> = labels.into_iter().zip(models).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let (labels, models) = pairs.into_iter().unzip();
        Ok(Self { labels, models })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn models(&self) -> &[DepthModel] {
        &self.models
    }

    pub fn domain(&self) -> TimeDomain {
        self.models[0].domain()
    }

    /// Same classifier with every class model using exponent `r`.
    pub fn with_r(&self, r: f64) -> Result<Self> {
        let models = self.models.iter().map(|m| m.with_r(r)).collect::<Result<_>>()?;
        Ok(Self { labels: self.labels.clone(), models })
    }

    /// Highest combined depth wins; ties go to the smallest label and an
    /// all-zero depth vector abstains.
    pub fn classify(&self, s: &Realization) -> Result<Prediction> {
        if s.domain() != self.domain() {
            return Err(Error::DomainMismatch);
        }
        let depths = self.models.iter().map(|m| m.depth(s)).collect::<Result<Vec<_>>>()?;
        let (best, tie) = argmax(&depths);
        let label = (depths[best] > 0.0).then(|| self.labels[best].clone());
        Ok(Prediction { label, tie: tie && depths[best] > 0.0, depths, forced: false })
    }

    /// Like [`Classifier::classify`], but instead of abstaining picks the
    /// class that gives `|s|` the highest cardinality probability.
    pub fn classify_forced(&self, s: &Realization) -> Result<Prediction> {
        let mut p = self.classify(s)?;
        if p.label.is_none() {
            let probs: Vec<f64> = self.models.iter().map(|m| m.cardinality().pmf(s.cardinality())).collect();
            let (best, tie) = argmax(&probs);
            p.label = Some(self.labels[best].clone());
            p.tie = tie;
            p.forced = true;
        }
        Ok(p)
    }
}

/// Log-likelihood of `s` under an inhomogeneous Poisson process:
/// `sum_i ln lambda(s_i) - Lambda(t2)`; `-inf` if any event falls where
/// the intensity vanishes.
pub fn ipp_log_likelihood(s: &Realization, intensity: &IntensityModel) -> Result<f64> {
    if s.domain() != intensity.domain() {
        return Err(Error::DomainMismatch);
    }
    let logs: f64 = s.events().iter().map(|&t| intensity.rate(t).ln()).sum();
    Ok(logs - intensity.total())
}

/// Index of the class with the largest IPP log-likelihood (smallest index
/// on ties).
pub fn likelihood_classify(intensities: &[IntensityModel], s: &Realization) -> Result<usize> {
    if intensities.is_empty() {
        return Err(Error::InsufficientData("no class intensities".into()));
    }
    let ll = intensities.iter().map(|l| ipp_log_likelihood(s, l)).collect::<Result<Vec<_>>>()?;
    Ok(argmax(&ll).0)
}

/// Per-class intensities estimated from labeled training data.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodClassifier {
    labels: Vec<String>,
    intensities: Vec<IntensityModel>,
}

impl LikelihoodClassifier {
    pub fn train(data: &Dataset, bins: Option<usize>, bandwidth: Option<f64>) -> Result<Self> {
        let (labels, parts) = labeled_classes(data)?;
        let intensities =
            parts.iter().map(|d| estimate_intensity(d, bins, bandwidth)).collect::<Result<Vec<_>>>()?;
        Ok(Self { labels, intensities })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn intensities(&self) -> &[IntensityModel] {
        &self.intensities
    }

    pub fn classify(&self, s: &Realization) -> Result<&str> {
        Ok(&self.labels[likelihood_classify(&self.intensities, s)?])
    }
}

/// Accuracy of predictions against true labels; abstentions count as errors.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyTable {
    /// `(label, total, correct)` per true class, labels ascending.
    pub per_class: Vec<(String, usize, usize)>,
    pub abstained: usize,
}

impl AccuracyTable {
    pub fn new(truth: &[String], predicted: &[Option<String>]) -> Self {
        let mut labels: Vec<String> = truth.to_vec();
        labels.sort();
        labels.dedup();
        let per_class = labels
            .into_iter()
            .map(|l| {
                let rows = truth.iter().zip(predicted).filter(|(t, _)| **t == l);
                let (total, correct) = rows.fold((0, 0), |(n, c), (t, p)| {
                    (n + 1, c + usize::from(p.as_deref() == Some(t.as_str())))
                });
                (l, total, correct)
            })
            .collect();
        Self { per_class, abstained: predicted.iter().filter(|p| p.is_none()).count() }
    }

    pub fn total(&self) -> usize {
        self.per_class.iter().map(|c| c.1).sum()
    }

    pub fn correct(&self) -> usize {
        self.per_class.iter().map(|c| c.2).sum()
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.correct() as f64 / n as f64,
        }
    }

    pub fn to_csv(&self, method: &str) -> String {
        let mut out = String::new();
        for (label, n, c) in &self.per_class {
            let _ = writeln!(out, "{method},{label},{n},{c},{}", *c as f64 / (*n).max(1) as f64);
        }
        let _ = writeln!(out, "{method},all,{},{},{}", self.total(), self.correct(), self.accuracy());
        out
    }
}

pub const ACCURACY_HEADER: &str = "method,class,n,correct,accuracy\n";

/// Leave-one-out accuracy for each `r` in `grid`. Models are refitted once
/// per held-out realization; `r` only changes evaluation.
pub fn loo_r_search(data: &Dataset, config: &ClassifierConfig, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let labels =
        data.labels().ok_or_else(|| Error::InsufficientData("training data must be labeled".into()))?;
    let mut correct = vec![0usize; grid.len()];
    for i in 0..data.len() {
        let keep: Vec<usize> = (0..data.len()).filter(|&j| j != i).collect();
        let subset = Dataset::labeled(
            data.domain(),
            keep.iter().map(|&j| data.realizations()[j].clone()).collect(),
            keep.iter().map(|&j| labels[j].clone()).collect(),
        )?;
        let base = train_classifier(&subset, config)?;
        for (slot, &r) in correct.iter_mut().zip(grid) {
            let p = base.with_r(r)?.classify(&data.realizations()[i])?;
            if p.label.as_deref() == Some(labels[i].as_str()) {
                *slot += 1;
            }
        }
    }
    let n = data.len().max(1) as f64;
    Ok(grid.iter().zip(correct).map(|(&r, c)| (r, c as f64 / n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::TimeDomain;

    #[test]
    fn likelihood_example() {
        let d = TimeDomain::unit();
        let low = IntensityModel::constant(d, 1.0).unwrap();
        let high = IntensityModel::constant(d, 10.0).unwrap();
        let s = Realization::new(d, (1..=10).map(|i| i as f64 / 11.0).collect()).unwrap();
        let ll = ipp_log_likelihood(&s, &high).unwrap();
        assert!((ll - (10.0 * 10f64.ln() - 10.0)).abs() < 1e-9);
        assert!((ipp_log_likelihood(&s, &low).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(likelihood_classify(&[low.clone(), high], &s).unwrap(), 1);
        assert_eq!(likelihood_classify(&[low.clone(), low], &s).unwrap(), 0);
    }

    #[test]
    fn zero_intensity_never_wins() {
        let d = TimeDomain::unit();
        let left =
            IntensityModel::from_grid(d, vec![0.0, 0.5, 0.5000001, 1.0], vec![5.0, 5.0, 0.0, 0.0]).unwrap();
        let flat = IntensityModel::constant(d, 0.01).unwrap();
        let s = Realization::new(d, vec![0.9]).unwrap();
        assert_eq!(ipp_log_likelihood(&s, &left).unwrap(), f64::NEG_INFINITY);
        assert_eq!(likelihood_classify(&[left, flat], &s).unwrap(), 1);
    }

    #[test]
    fn accuracy_counts_abstain_as_wrong() {
        let truth: Vec<String> = ["A", "A", "B", "B"].iter().map(|s| s.to_string()).collect();
        let pred = vec![Some("A".into()), None, Some("B".into()), Some("A".into())];
        let t = AccuracyTable::new(&truth, &pred);
        assert_eq!((t.total(), t.correct(), t.abstained), (4, 2, 1));
        assert_eq!(t.accuracy(), 0.5);
    }

    #[test]
    fn argmax_prefers_first() {
        assert_eq!(argmax(&[0.2, 0.5, 0.5]), (1, true));
        assert_eq!(argmax(&[0.0, 0.0]), (0, true));
        assert_eq!(argmax(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), (0, true));
    }
}
