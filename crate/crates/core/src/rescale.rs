//! Intensity functions, the cumulative intensity, the time-rescaling
//! transform and the time-rescaled Dirichlet depth.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::depth::dirichlet::symmetric_depth;
use crate::error::{Error, Result};
use crate::process::{Dataset, Realization, TimeDomain};
use crate::simulate::WarpFunction;

/// Default number of grid nodes for intensities built from functions or
/// estimated from data.
pub const DEFAULT_NODES: usize = 2048;

/// A history-free intensity `lambda(t) >= 0` on a grid together with its
/// running integral `Lambda(t)`.
///
/// Both are evaluated between nodes by linear interpolation. `Lambda` is the
/// trapezoid integral of the node rates unless it was supplied directly
/// (see [`IntensityModel::from_cumulative`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIntensity", into = "RawIntensity")]
pub struct IntensityModel {
    domain: TimeDomain,
    times: Vec<f64>,
    rates: Vec<f64>,
    cumulative: Vec<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawIntensity {
    t: Vec<f64>,
    rate: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cumulative: Option<Vec<f64>>,
}

impl TryFrom<RawIntensity> for IntensityModel {
    type Error = Error;

    fn try_from(raw: RawIntensity) -> Result<Self> {
        let (t1, t2) = match (raw.t.first(), raw.t.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(Error::InvalidIntensity("empty grid".into())),
        };
        let domain = TimeDomain::new(t1, t2)?;
        match raw.cumulative {
            Some(cumulative) => {
                let mut model = IntensityModel::from_cumulative(domain, raw.t, cumulative)?;
                if raw.rate.len() != model.rates.len() {
                    return Err(Error::DimensionMismatch {
                        expected: model.rates.len(),
                        got: raw.rate.len(),
                    });
                }
                check_rates(&raw.rate)?;
                model.rates = raw.rate;
                Ok(model)
            }
            None => IntensityModel::from_grid(domain, raw.t, raw.rate),
        }
    }
}

impl From<IntensityModel> for RawIntensity {
    fn from(m: IntensityModel) -> Self {
        RawIntensity { t: m.times, rate: m.rates, cumulative: Some(m.cumulative) }
    }
}

fn check_grid(domain: TimeDomain, times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::InvalidIntensity("grid needs at least two nodes".into()));
    }
    if times[0] != domain.t1() || times[times.len() - 1] != domain.t2() {
        return Err(Error::InvalidIntensity("grid must start at t1 and end at t2".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidIntensity("grid times must be strictly increasing".into()));
    }
    Ok(())
}

fn check_rates(rates: &[f64]) -> Result<()> {
    match rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        Some(r) => Err(Error::InvalidIntensity(format!("rate {r} is negative or not finite"))),
        None => Ok(()),
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let j = xs.partition_point(|&v| v <= x) - 1;
    if x == xs[j] {
        return ys[j];
    }
    let frac = (x - xs[j]) / (xs[j + 1] - xs[j]);
    ys[j] + (ys[j + 1] - ys[j]) * frac
}

impl IntensityModel {
    /// Builds from node rates; the cumulative integral uses the trapezoid rule.
    pub fn from_grid(domain: TimeDomain, times: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        check_grid(domain, &times)?;
        if rates.len() != times.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), got: rates.len() });
        }
        check_rates(&rates)?;
        let mut cumulative = Vec::with_capacity(times.len());
        cumulative.push(0.0);
        for j in 1..times.len() {
            let area = 0.5 * (rates[j] + rates[j - 1]) * (times[j] - times[j - 1]);
            cumulative.push(cumulative[j - 1] + area);
        }
        Self::finish(domain, times, rates, cumulative)
    }

    /// Builds directly from a nondecreasing cumulative intensity with
    /// `Lambda(t1) = 0`. Node rates are recovered from neighbouring slopes.
    pub fn from_cumulative(domain: TimeDomain, times: Vec<f64>, cumulative: Vec<f64>) -> Result<Self> {
        check_grid(domain, &times)?;
        if cumulative.len() != times.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), got: cumulative.len() });
        }
        if cumulative[0] != 0.0 {
            return Err(Error::InvalidIntensity("cumulative intensity must start at 0".into()));
        }
        if cumulative.iter().any(|c| !c.is_finite()) || cumulative.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidIntensity(
                "cumulative intensity must be finite and nondecreasing".into(),
            ));
        }
        let n = times.len();
        let slope = |j: usize| (cumulative[j + 1] - cumulative[j]) / (times[j + 1] - times[j]);
        let rates = (0..n)
            .map(|j| match j {
                0 => slope(0),
                j if j == n - 1 => slope(n - 2),
                j => 0.5 * (slope(j - 1) + slope(j)),
            })
            .collect();
        Self::finish(domain, times, rates, cumulative)
    }

    fn finish(domain: TimeDomain, times: Vec<f64>, rates: Vec<f64>, cumulative: Vec<f64>) -> Result<Self> {
        let total = cumulative[cumulative.len() - 1];
        if !(total > 0.0) {
            return Err(Error::InvalidIntensity("total intensity is zero".into()));
        }
        Ok(Self { domain, times, rates, cumulative })
    }

    /// Samples `f` on `nodes` equally spaced grid points.
    pub fn from_fn(domain: TimeDomain, nodes: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let times = uniform_grid(domain, nodes.max(2));
        let rates = times.iter().map(|&t| f(t)).collect();
        Self::from_grid(domain, times, rates)
    }

    pub fn constant(domain: TimeDomain, rate: f64) -> Result<Self> {
        Self::from_grid(domain, vec![domain.t1(), domain.t2()], vec![rate, rate])
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn cumulative_nodes(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn rate(&self, t: f64) -> f64 {
        interpolate(&self.times, &self.rates, t)
    }

    pub fn max_rate(&self) -> f64 {
        self.rates.iter().copied().fold(0.0, f64::max)
    }

    /// `Lambda(t)`, clamped to the window.
    pub fn cumulative(&self, t: f64) -> f64 {
        interpolate(&self.times, &self.cumulative, t)
    }

    /// `Lambda(t2)`.
    pub fn total(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    /// Smallest `t` with `Lambda(t) = y` for `y` in `[0, Lambda(t2)]`.
    pub fn inverse_cumulative(&self, y: f64) -> f64 {
        let c = &self.cumulative;
        let n = c.len();
        if y <= 0.0 {
            return self.times[0];
        }
        if y >= c[n - 1] {
            let j = c.partition_point(|&v| v < c[n - 1]);
            return self.times[j];
        }
        let j = c.partition_point(|&v| v < y);
        // c[j-1] < y <= c[j]
        let (lo, hi) = (c[j - 1], c[j]);
        let frac = (y - lo) / (hi - lo);
        self.times[j - 1] + (self.times[j] - self.times[j - 1]) * frac
    }

    /// Cumulative intensity of the warped process, `Lambda o gamma^-1`.
    ///
    /// Both maps are piecewise linear, so the composition is represented
    /// exactly on the union of their (mapped) breakpoints.
    pub fn warped(&self, warp: &WarpFunction) -> Result<Self> {
        if warp.domain() != self.domain {
            return Err(Error::DomainMismatch);
        }
        let mut nodes: Vec<(f64, f64)> = self
            .times
            .iter()
            .zip(&self.cumulative)
            .map(|(&t, &c)| (warp.eval(t), c))
            .chain(warp.inputs().iter().zip(warp.outputs()).map(|(&t, &g)| (g, self.cumulative(t))))
            .collect();
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        nodes.dedup_by(|b, a| b.0 == a.0);
        let times: Vec<f64> = nodes.iter().map(|n| n.0).collect();
        let mut cumulative: Vec<f64> = nodes.iter().map(|n| n.1).collect();
        for j in 1..cumulative.len() {
            cumulative[j] = cumulative[j].max(cumulative[j - 1]);
        }
        cumulative[0] = 0.0;
        Self::from_cumulative(self.domain, times, cumulative)
    }

    /// Transports the model along `t -> a t + b`, keeping `Lambda` values.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        let domain = self.domain.affine(a, b)?;
        let n = self.times.len();
        let times = self
            .times
            .iter()
            .enumerate()
            .map(|(j, &t)| match j {
                0 => domain.t1(),
                j if j == n - 1 => domain.t2(),
                _ => a * t + b,
            })
            .collect();
        Ok(Self {
            domain,
            times,
            rates: self.rates.iter().map(|r| r / a).collect(),
            cumulative: self.cumulative.clone(),
        })
    }

    /// Reads the two-column `t rate` text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut times = Vec::new();
        let mut rates = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: idx + 1, message };
            let cols: Vec<&str> = content.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(parse_err(format!("expected two columns, found {}", cols.len())));
            }
            let t: f64 = cols[0].parse().map_err(|_| parse_err(format!("bad time {:?}", cols[0])))?;
            let r: f64 = cols[1].parse().map_err(|_| parse_err(format!("bad rate {:?}", cols[1])))?;
            if let Some(&prev) = times.last() {
                if !(t > prev) {
                    return Err(parse_err("times must be strictly increasing".into()));
                }
            }
            times.push(t);
            rates.push(r);
        }
        if times.len() < 2 {
            return Err(Error::InvalidIntensity("need at least two grid rows".into()));
        }
        let domain = TimeDomain::new(times[0], times[times.len() - 1])?;
        Self::from_grid(domain, times, rates)
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# t rate\n");
        for (t, r) in self.times.iter().zip(&self.rates) {
            let _ = writeln!(out, "{t} {r}");
        }
        out
    }
}

pub(crate) fn uniform_grid(domain: TimeDomain, nodes: usize) -> Vec<f64> {
    let last = nodes - 1;
    (0..nodes)
        .map(|j| match j {
            0 => domain.t1(),
            j if j == last => domain.t2(),
            j => domain.t1() + domain.span() * j as f64 / last as f64,
        })
        .collect()
}

/// Pooled-event histogram scaled to a per-realization rate, followed by
/// Gaussian kernel smoothing (Nadaraya-Watson over bin centres, so the edges
/// are not pulled toward zero).
///
/// Defaults: `bins = max(10, sqrt(total events))`, `bandwidth = 2 x bin width`.
/// A bandwidth of zero disables smoothing.
pub fn estimate_intensity(
    data: &Dataset,
    bins: Option<usize>,
    bandwidth: Option<f64>,
) -> Result<IntensityModel> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let domain = data.domain();
    let total_events: usize = data.counts().iter().sum();
    let bins = bins.unwrap_or_else(|| ((total_events as f64).sqrt().round() as usize).max(10));
    if bins < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 bins, got {bins}")));
    }
    let width = domain.span() / bins as f64;
    let bandwidth = bandwidth.unwrap_or(2.0 * width);
    if !(bandwidth >= 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad bandwidth {bandwidth}")));
    }

    let mut hist = vec![0.0; bins];
    for s in data.realizations() {
        for &t in s.events() {
            let b = (((t - domain.t1()) / width) as usize).min(bins - 1);
            hist[b] += 1.0;
        }
    }
    let scale = 1.0 / (data.len() as f64 * width);
    hist.iter_mut().for_each(|h| *h *= scale);
    let centres: Vec<f64> = (0..bins).map(|b| domain.t1() + (b as f64 + 0.5) * width).collect();

    let times = uniform_grid(domain, DEFAULT_NODES);
    let rates = times
        .iter()
        .map(|&t| {
            if bandwidth == 0.0 {
                let b = (((t - domain.t1()) / width) as usize).min(bins - 1);
                return hist[b];
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for (c, h) in centres.iter().zip(&hist) {
                let z = (t - c) / bandwidth;
                let w = (-0.5 * z * z).exp();
                num += w * h;
                den += w;
            }
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        })
        .collect();
    IntensityModel::from_grid(domain, times, rates)
}

/// Maps events through `Lambda(t) / Lambda(t2)` onto `[0, 1]`.
pub fn rescale(s: &Realization, intensity: &IntensityModel) -> Result<Realization> {
    if s.domain() != intensity.domain() {
        return Err(Error::DomainMismatch);
    }
    let total = intensity.total();
    let events = s.events().iter().map(|&t| (intensity.cumulative(t) / total).clamp(0.0, 1.0)).collect();
    Realization::new(TimeDomain::unit(), events)
}

/// Dirichlet depth of the rescaled gaps
/// `(Lambda(s_i) - Lambda(s_{i-1})) / Lambda(t2)`, with `k = 0` scoring 1.
pub fn ts_conditional_depth(s: &Realization, intensity: &IntensityModel) -> Result<f64> {
    if s.domain() != intensity.domain() {
        return Err(Error::DomainMismatch);
    }
    let total = intensity.total();
    let mut prev = 0.0;
    let gaps = s.events().iter().map(|&t| intensity.cumulative(t)).chain(std::iter::once(total)).map(|c| {
        let g = (c - prev).max(0.0);
        prev = c;
        g
    });
    Ok(symmetric_depth(gaps, s.cardinality(), total))
}
