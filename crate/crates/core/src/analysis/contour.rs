//! Depth evaluated over the two-event simplex, for contour plots.

use std::fmt::Write as _;

use crate::depth::{
    dirichlet_conditional_depth, hpp_conditional_depth, mahalanobis_conditional_depth, ConditionalMeanTable,
    MahalanobisRow, MahalanobisTable,
};
use crate::error::{Error, Result};
use crate::process::{Realization, TimeDomain};

/// Conditional depth for two events.
#[derive(Debug, Clone, PartialEq)]
pub enum ContourDepth {
    /// Dirichlet depth around a mean row; `None` uses the HPP centre.
    Dirichlet(Option<[f64; 2]>),
    /// Mahalanobis baseline; `None` uses HPP order-statistic moments.
    Mahalanobis(Option<MahalanobisRow>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourPoint {
    /// First inter-event time.
    pub u1: f64,
    /// Second inter-event time.
    pub u2: f64,
    pub depth: f64,
}

/// Depth on the lattice `u1 = i span / n`, `u2 = j span / n`, `i + j <= n`.
pub fn contour_grid(domain: TimeDomain, kind: &ContourDepth, resolution: usize) -> Result<Vec<ContourPoint>> {
    if resolution == 0 {
        return Err(Error::InvalidParameter("resolution must be positive".into()));
    }
    type Evaluate = Box<dyn Fn(&Realization) -> Result<f64>>;
    let evaluate: Evaluate = match kind {
        ContourDepth::Dirichlet(None) => Box::new(|s| Ok(hpp_conditional_depth(s))),
        ContourDepth::Dirichlet(Some(mean)) => {
            let table = ConditionalMeanTable::new(domain, [(2, mean.to_vec())].into())?;
            Box::new(move |s| dirichlet_conditional_depth(s, &table))
        }
        ContourDepth::Mahalanobis(row) => {
            let row = match row {
                Some(r) => r.clone(),
                None => MahalanobisTable::hpp(domain, 2).row(2).cloned().expect("row 2 present"),
            };
            Box::new(move |s| mahalanobis_conditional_depth(s, &row.mean, &row.covariance, row.ridge))
        }
    };
    let n = resolution;
    let at = |i: usize| {
        if i == n {
            domain.t2()
        } else {
            domain.t1() + domain.span() * i as f64 / n as f64
        }
    };
    let mut out = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for i in 0..=n {
        for j in 0..=n - i {
            let (s1, s2) = (at(i), at(i + j));
            let s = Realization::new(domain, vec![s1, s2])?;
            out.push(ContourPoint { u1: s1 - domain.t1(), u2: s2 - s1, depth: evaluate(&s)? });
        }
    }
    Ok(out)
}

pub fn contour_csv(points: &[ContourPoint]) -> String {
    let mut out = String::from("u1,u2,depth\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.u1, p.u2, p.depth);
    }
    out
}
