//! Browser bindings for the depth demo page. Every export returns a JSON string.

use ppdepth::analysis::{contour_grid, rank, ContourDepth};
use ppdepth::depth::{fit, FitConfig};
use ppdepth::{
    CardinalityModel, ConditionalDepth, ConditionalKind, CountDistribution, DepthModel, MahalanobisTable,
    Realization, TimeDomain,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Grid {
    /// `[u1, u2, depth]` triples.
    points: Vec<[f64; 3]>,
}

#[derive(Serialize)]
struct Ranked {
    index: usize,
    events: Vec<f64>,
    weight: f64,
    conditional: f64,
    depth: f64,
}

#[derive(Serialize)]
struct Scored {
    kind: &'static str,
    cardinality: usize,
    weight: f64,
    conditional: f64,
    depth: f64,
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

/// Two-event depth over the unit simplex. NaN means default to the HPP centre.
pub fn contour_json(kind: &str, resolution: usize, m1: f64, m2: f64) -> ppdepth::Result<String> {
    let domain = TimeDomain::unit();
    let mean = (m1.is_finite() && m2.is_finite()).then_some([m1, m2]);
    let depth = match kind {
        "dirichlet" => ContourDepth::Dirichlet(mean),
        "mahalanobis" => ContourDepth::Mahalanobis(mean.map(|m| {
            let mut row = MahalanobisTable::hpp(domain, 2).row(2).cloned().expect("row 2");
            row.mean = m.to_vec();
            row
        })),
        other => return Err(ppdepth::Error::InvalidParameter(format!("unknown contour kind {other:?}"))),
    };
    let points =
        contour_grid(domain, &depth, resolution)?.into_iter().map(|p| [p.u1, p.u2, p.depth]).collect();
    Ok(to_json(&Grid { points }))
}

/// Simulate `n` HPP realizations on [0, 1], fit a model of the given kind and
/// return them ordered from deepest to shallowest.
pub fn rank_hpp_json(rate: f64, n: usize, seed: u64, kind: &str, r: f64) -> ppdepth::Result<String> {
    let data = ppdepth::simulate_hpp(rate, TimeDomain::unit(), n, seed)?;
    let config = FitConfig { kind: kind.parse()?, r, seed, repair: true, ..FitConfig::default() };
    let model = fit(&data, &config)?;
    let ranked: Vec<Ranked> = rank(&data, &model)?
        .entries()
        .iter()
        .map(|e| Ranked {
            index: e.index,
            events: data.realizations()[e.index].events().to_vec(),
            weight: e.breakdown.weight,
            conditional: e.breakdown.conditional,
            depth: e.breakdown.depth,
        })
        .collect();
    Ok(to_json(&ranked))
}

/// Depth of hand-placed events on [0, 1] under an HPP with the given rate,
/// with both the Dirichlet and the Mahalanobis conditional term.
pub fn score_events_json(events: &[f64], rate: f64, r: f64) -> ppdepth::Result<String> {
    let domain = TimeDomain::unit();
    let mut sorted = events.to_vec();
    sorted.sort_by(f64::total_cmp);
    let s = Realization::new(domain, sorted)?;
    let cap = (rate + 10.0 * rate.sqrt() + 10.0).ceil() as usize;
    let cap = cap.max(s.cardinality());
    let card = CardinalityModel::new(CountDistribution::Poisson { mean: rate }, cap)?;
    let models = [
        DepthModel::new(domain, card.clone(), r, ConditionalDepth::Hpp)?,
        DepthModel::new(domain, card, r, ConditionalDepth::Mahalanobis(MahalanobisTable::hpp(domain, cap)))?,
    ];
    let scored = models
        .iter()
        .map(|m| {
            let b = m.breakdown(&s)?;
            Ok(Scored {
                kind: match m.kind() {
                    ConditionalKind::Mahalanobis => "mahalanobis",
                    _ => "dirichlet",
                },
                cardinality: b.cardinality,
                weight: b.weight,
                conditional: b.conditional,
                depth: b.depth,
            })
        })
        .collect::<ppdepth::Result<Vec<_>>>()?;
    Ok(to_json(&scored))
}

fn js(result: ppdepth::Result<String>) -> Result<String, JsError> {
    result.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn contour(kind: &str, resolution: usize, m1: f64, m2: f64) -> Result<String, JsError> {
    js(contour_json(kind, resolution, m1, m2))
}

#[wasm_bindgen]
pub fn rank_hpp(rate: f64, n: usize, seed: u32, kind: &str, r: f64) -> Result<String, JsError> {
    js(rank_hpp_json(rate, n, seed.into(), kind, r))
}

#[wasm_bindgen]
pub fn score_events(events: &[f64], rate: f64, r: f64) -> Result<String, JsError> {
    js(score_events_json(events, rate, r))
}
