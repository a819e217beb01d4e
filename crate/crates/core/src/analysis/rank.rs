//! Center-outward ranking of a dataset.

use std::fmt::Write as _;

use crate::depth::{DepthBreakdown, DepthModel};
use crate::error::{Error, Result};
use crate::process::Dataset;

/// Depth pieces for every realization, in input order.
pub fn score(data: &Dataset, model: &DepthModel) -> Result<Vec<DepthBreakdown>> {
    if data.domain() != model.domain() {
        return Err(Error::DomainMismatch);
    }
    data.realizations().iter().map(|s| model.breakdown(s)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankEntry {
    pub index: usize,
    pub breakdown: DepthBreakdown,
}

/// Realizations sorted by combined depth, deepest first; ties go to the
/// smaller index.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    entries: Vec<RankEntry>,
}

impl RankReport {
    pub fn from_scores(scores: &[DepthBreakdown]) -> Self {
        let mut entries: Vec<RankEntry> =
            scores.iter().enumerate().map(|(index, &breakdown)| RankEntry { index, breakdown }).collect();
        entries.sort_by(|a, b| b.breakdown.depth.total_cmp(&a.breakdown.depth).then(a.index.cmp(&b.index)));
        Self { entries }
    }

    pub fn entries(&self) -> &[RankEntry] {
        &self.entries
    }

    pub fn top(&self, n: usize) -> &[RankEntry] {
        &self.entries[..n.min(self.entries.len())]
    }

    pub fn bottom(&self, n: usize) -> &[RankEntry] {
        &self.entries[self.entries.len().saturating_sub(n)..]
    }

    /// CSV with a leading `rank` column (1-based).
    pub fn to_csv(&self, limit: Option<usize>) -> String {
        let mut out = String::from("rank,index,cardinality,weight,conditional_depth,depth\n");
        let n = limit.unwrap_or(self.entries.len());
        for (pos, e) in self.top(n).iter().enumerate() {
            let b = &e.breakdown;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                pos + 1,
                e.index,
                b.cardinality,
                b.weight,
                b.conditional,
                b.depth
            );
        }
        out
    }
}

pub fn rank(data: &Dataset, model: &DepthModel) -> Result<RankReport> {
    Ok(RankReport::from_scores(&score(data, model)?))
}

/// Batch depth table: `index,cardinality,weight,conditional_depth,depth`.
pub fn depth_csv(scores: &[DepthBreakdown]) -> String {
    let mut out = String::from("index,cardinality,weight,conditional_depth,depth\n");
    for (i, b) in scores.iter().enumerate() {
        let _ = writeln!(out, "{},{},{},{},{}", i, b.cardinality, b.weight, b.conditional, b.depth);
    }
    out
}
