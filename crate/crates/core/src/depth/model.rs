//! Combined depth `w(|s|)^r D_c(s | |s|)` and model fitting.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cardinality::{
    fit_empirical, fit_poisson_mixture_em, fit_poisson_mle, select_mixture_bic, CardinalityModel, EmConfig,
};
use crate::depth::bootstrap::Bootstrap;
use crate::depth::dirichlet::{dirichlet_conditional_depth, hpp_conditional_depth, ConditionalMeanTable};
use crate::depth::mahalanobis::{MahalanobisRow, MahalanobisTable};
use crate::error::{Error, Result};
use crate::process::{Dataset, Realization, TimeDomain};
use crate::rescale::{estimate_intensity, ts_conditional_depth, IntensityModel};

/// Which conditional depth a model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConditionalKind {
    Hpp,
    SampleDirichlet,
    TsDirichlet,
    Mahalanobis,
}

impl ConditionalKind {
    pub const ALL: [ConditionalKind; 4] =
        [Self::Hpp, Self::SampleDirichlet, Self::TsDirichlet, Self::Mahalanobis];

    pub fn name(self) -> &'static str {
        match self {
            Self::Hpp => "hpp",
            Self::SampleDirichlet => "sample-dirichlet",
            Self::TsDirichlet => "ts-dirichlet",
            Self::Mahalanobis => "mahalanobis",
        }
    }
}

impl fmt::Display for ConditionalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConditionalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown depth kind '{s}'")))
    }
}

/// Fitted conditional depth.
#[derive(Debug, Clone, PartialEq)]
pub enum ConditionalDepth {
    /// Closed-form homogeneous Poisson depth; needs no parameters.
    Hpp,
    SampleDirichlet(ConditionalMeanTable),
    TsDirichlet(IntensityModel),
    Mahalanobis(MahalanobisTable),
}

impl ConditionalDepth {
    pub fn kind(&self) -> ConditionalKind {
        match self {
            Self::Hpp => ConditionalKind::Hpp,
            Self::SampleDirichlet(_) => ConditionalKind::SampleDirichlet,
            Self::TsDirichlet(_) => ConditionalKind::TsDirichlet,
            Self::Mahalanobis(_) => ConditionalKind::Mahalanobis,
        }
    }

    fn domain(&self) -> Option<TimeDomain> {
        match self {
            Self::Hpp => None,
            Self::SampleDirichlet(t) => Some(t.domain()),
            Self::TsDirichlet(l) => Some(l.domain()),
            Self::Mahalanobis(t) => Some(t.domain()),
        }
    }

    /// Conditional depth of `s` given its cardinality.
    pub fn evaluate(&self, s: &Realization) -> Result<f64> {
        match self {
            Self::Hpp => Ok(hpp_conditional_depth(s)),
            Self::SampleDirichlet(t) => dirichlet_conditional_depth(s, t),
            Self::TsDirichlet(l) => ts_conditional_depth(s, l),
            Self::Mahalanobis(t) => t.depth(s),
        }
    }
}

/// Per-realization pieces of the combined depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthBreakdown {
    pub cardinality: usize,
    pub weight: f64,
    pub conditional: f64,
    pub depth: f64,
    /// The conditional model had no row for this cardinality; depth is 0.
    pub missing_row: bool,
}

/// Combined depth model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct DepthModel {
    domain: TimeDomain,
    cardinality: CardinalityModel,
    r: f64,
    conditional: ConditionalDepth,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "kebab-case")]
enum RawConditional {
    Hpp,
    SampleDirichlet(BTreeMap<usize, Vec<f64>>),
    TsDirichlet(IntensityModel),
    Mahalanobis(BTreeMap<usize, MahalanobisRow>),
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    domain: TimeDomain,
    cardinality: CardinalityModel,
    r: f64,
    conditional: RawConditional,
}

impl TryFrom<RawModel> for DepthModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        let domain = raw.domain;
        let conditional = match raw.conditional {
            RawConditional::Hpp => ConditionalDepth::Hpp,
            RawConditional::SampleDirichlet(rows) => {
                ConditionalDepth::SampleDirichlet(ConditionalMeanTable::new(domain, rows)?)
            }
            RawConditional::TsDirichlet(l) => ConditionalDepth::TsDirichlet(l),
            RawConditional::Mahalanobis(rows) => {
                ConditionalDepth::Mahalanobis(MahalanobisTable::new(domain, rows)?)
            }
        };
        DepthModel::new(domain, raw.cardinality, raw.r, conditional)
    }
}

impl From<DepthModel> for RawModel {
    fn from(m: DepthModel) -> Self {
        let conditional = match m.conditional {
            ConditionalDepth::Hpp => RawConditional::Hpp,
            ConditionalDepth::SampleDirichlet(t) => RawConditional::SampleDirichlet(t.rows().clone()),
            ConditionalDepth::TsDirichlet(l) => RawConditional::TsDirichlet(l),
            ConditionalDepth::Mahalanobis(t) => RawConditional::Mahalanobis(t.rows().clone()),
        };
        RawModel { domain: m.domain, cardinality: m.cardinality, r: m.r, conditional }
    }
}

impl DepthModel {
    pub fn new(
        domain: TimeDomain,
        cardinality: CardinalityModel,
        r: f64,
        conditional: ConditionalDepth,
    ) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("r must be a nonnegative number, got {r}")));
        }
        if conditional.domain().is_some_and(|d| d != domain) {
            return Err(Error::DomainMismatch);
        }
        Ok(Self { domain, cardinality, r, conditional })
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn cardinality(&self) -> &CardinalityModel {
        &self.cardinality
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn conditional(&self) -> &ConditionalDepth {
        &self.conditional
    }

    pub fn kind(&self) -> ConditionalKind {
        self.conditional.kind()
    }

    /// Same model with a different weight exponent.
    pub fn with_r(&self, r: f64) -> Result<Self> {
        Self::new(self.domain, self.cardinality.clone(), r, self.conditional.clone())
    }

    pub fn breakdown(&self, s: &Realization) -> Result<DepthBreakdown> {
        if s.domain() != self.domain {
            return Err(Error::DomainMismatch);
        }
        let k = s.cardinality();
        let weight = self.cardinality.weight(k, self.r);
        let (conditional, missing_row) = match self.conditional.evaluate(s) {
            Ok(c) => (c, false),
            Err(Error::MissingCardinality(_)) => (0.0, true),
            Err(e) => return Err(e),
        };
        Ok(DepthBreakdown { cardinality: k, weight, conditional, depth: weight * conditional, missing_row })
    }

    pub fn depth(&self, s: &Realization) -> Result<f64> {
        Ok(self.breakdown(s)?.depth)
    }

    /// Membership in the trimmed region `{s : D(s) >= alpha}`, `alpha` in (0, 1].
    pub fn trimmed_region_member(&self, s: &Realization, alpha: f64) -> Result<bool> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        Ok(self.depth(s)? >= alpha)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// How to fit the cardinality model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CardinalityFit {
    Empirical,
    Poisson,
    /// Poisson mixture; `None` picks the component count by BIC over 1..=5.
    Mixture(Option<usize>),
}

impl FromStr for CardinalityFit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "empirical" => Ok(Self::Empirical),
            "poisson" => Ok(Self::Poisson),
            "mixture" => Ok(Self::Mixture(None)),
            _ => s
                .strip_prefix("mixture:")
                .and_then(|m| m.parse().ok())
                .filter(|&m| m >= 1)
                .map(|m| Self::Mixture(Some(m)))
                .ok_or_else(|| Error::InvalidParameter(format!("unknown cardinality model '{s}'"))),
        }
    }
}

/// Settings for [`fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub kind: ConditionalKind,
    pub r: f64,
    /// Cardinality cap `K`; also the largest bootstrapped row.
    pub cap: Option<usize>,
    pub cardinality: CardinalityFit,
    /// Bootstrap repetitions.
    pub repetitions: usize,
    pub bins: Option<usize>,
    pub bandwidth: Option<f64>,
    pub seed: u64,
    /// Repair non-monotone bootstrap rows instead of failing.
    pub repair: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            kind: ConditionalKind::SampleDirichlet,
            r: 1.0,
            cap: None,
            cardinality: CardinalityFit::Poisson,
            repetitions: 10,
            bins: None,
            bandwidth: None,
            seed: 0,
            repair: false,
        }
    }
}

/// Side information from a fit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitNotes {
    /// Cardinalities whose bootstrap mean row was repaired.
    pub repaired_rows: Vec<usize>,
    /// Mixture components dropped for negligible weight.
    pub dropped_components: usize,
}

pub(crate) fn fit_cardinality(
    counts: &[usize],
    cap: Option<usize>,
    how: CardinalityFit,
    seed: u64,
) -> Result<(CardinalityModel, usize)> {
    match how {
        CardinalityFit::Empirical => Ok((fit_empirical(counts, cap)?, 0)),
        CardinalityFit::Poisson => Ok((fit_poisson_mle(counts, cap)?, 0)),
        CardinalityFit::Mixture(Some(m)) => {
            let fit =
                fit_poisson_mixture_em(counts, cap, EmConfig { components: m, seed, ..EmConfig::default() })?;
            Ok((fit.model, fit.dropped))
        }
        CardinalityFit::Mixture(None) => {
            let config = EmConfig { seed, ..EmConfig::default() };
            let (fit, _) = select_mixture_bic(counts, cap, 5, config)?;
            Ok((fit.model, fit.dropped))
        }
    }
}

/// Fits a depth model to `data` and reports repairs and dropped components.
pub fn fit_with_notes(data: &Dataset, config: &FitConfig) -> Result<(DepthModel, FitNotes)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let counts = data.counts();
    let (cardinality, dropped_components) =
        fit_cardinality(&counts, config.cap, config.cardinality, config.seed)?;
    let bootstrap =
        Bootstrap { max_k: Some(cardinality.cap()), repetitions: config.repetitions, seed: config.seed };
    let mut notes = FitNotes { dropped_components, ..FitNotes::default() };
    let conditional = match config.kind {
        ConditionalKind::Hpp => ConditionalDepth::Hpp,
        ConditionalKind::SampleDirichlet if config.repair => {
            let (table, repaired) = bootstrap.means_repaired(data)?;
            notes.repaired_rows = repaired;
            ConditionalDepth::SampleDirichlet(table)
        }
        ConditionalKind::SampleDirichlet => ConditionalDepth::SampleDirichlet(bootstrap.means(data)?),
        ConditionalKind::TsDirichlet => {
            ConditionalDepth::TsDirichlet(estimate_intensity(data, config.bins, config.bandwidth)?)
        }
        ConditionalKind::Mahalanobis => {
            ConditionalDepth::Mahalanobis(MahalanobisTable::fit(data, bootstrap)?)
        }
    };
    let model = DepthModel::new(data.domain(), cardinality, config.r, conditional)?;
    Ok((model, notes))
}

pub fn fit(data: &Dataset, config: &FitConfig) -> Result<DepthModel> {
    fit_with_notes(data, config).map(|(m, _)| m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cardinality::CountDistribution;
    use crate::simulate::simulate_hpp;

    fn unit_model(r: f64, conditional: ConditionalDepth) -> DepthModel {
        let card = CardinalityModel::new(
            CountDistribution::Empirical { pmf: vec![0.0, 0.0, 0.0, 0.25, 0.5, 0.25] },
            5,
        )
        .unwrap();
        DepthModel::new(TimeDomain::unit(), card, r, conditional).unwrap()
    }

    #[test]
    fn weight_times_conditional() {
        let m = unit_model(1.0, ConditionalDepth::Hpp);
        let centre = Realization::new(TimeDomain::unit(), vec![0.25, 0.5, 0.75]).unwrap();
        let b = m.breakdown(&centre).unwrap();
        assert_eq!((b.weight, b.conditional), (0.5, 1.0));
        assert_eq!(b.depth, 0.5);
        let r0 = m.with_r(0.0).unwrap();
        assert_eq!(r0.depth(&centre).unwrap(), 1.0);
        let unseen = Realization::new(TimeDomain::unit(), vec![0.5]).unwrap();
        assert_eq!(m.depth(&unseen).unwrap(), 0.0);
    }

    #[test]
    fn missing_row_scores_zero() {
        let table = ConditionalMeanTable::new(TimeDomain::unit(), [(3, vec![0.2, 0.5, 0.8])].into()).unwrap();
        let m = unit_model(1.0, ConditionalDepth::SampleDirichlet(table));
        let four = Realization::new(TimeDomain::unit(), vec![0.2, 0.4, 0.6, 0.8]).unwrap();
        let b = m.breakdown(&four).unwrap();
        assert!(b.missing_row);
        assert_eq!(b.depth, 0.0);
        assert!(b.weight > 0.0);
    }

    #[test]
    fn trimmed_regions_nest() {
        let m = unit_model(1.0, ConditionalDepth::Hpp);
        let s = Realization::new(TimeDomain::unit(), vec![0.2, 0.55, 0.7, 0.9]).unwrap();
        if m.trimmed_region_member(&s, 0.7).unwrap() {
            assert!(m.trimmed_region_member(&s, 0.3).unwrap());
        }
        assert!(m.trimmed_region_member(&s, 0.0).is_err());
    }

    #[test]
    fn json_round_trip_every_kind() {
        let d = TimeDomain::new(0.0, 10.0).unwrap();
        let data = simulate_hpp(0.4, d, 200, 4).unwrap();
        for kind in ConditionalKind::ALL {
            let config = FitConfig { kind, repair: true, ..FitConfig::default() };
            let model = fit(&data, &config).unwrap();
            let back = DepthModel::from_json(&model.to_json().unwrap()).unwrap();
            assert_eq!(back, model, "{kind}");
            for s in data.realizations().iter().take(20) {
                assert_eq!(back.depth(s).unwrap().to_bits(), model.depth(s).unwrap().to_bits());
            }
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("ts-dirichlet".parse::<ConditionalKind>().unwrap(), ConditionalKind::TsDirichlet);
        assert!("dirichlet".parse::<ConditionalKind>().is_err());
        assert_eq!("mixture:3".parse::<CardinalityFit>().unwrap(), CardinalityFit::Mixture(Some(3)));
        assert_eq!("mixture".parse::<CardinalityFit>().unwrap(), CardinalityFit::Mixture(None));
        assert!("mixture:0".parse::<CardinalityFit>().is_err());
    }
}
