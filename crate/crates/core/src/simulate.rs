//! Seedable Poisson-process generators and time warping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::process::{Dataset, Realization, TimeDomain};
use crate::rescale::{uniform_grid, IntensityModel};

/// Default node count for warps built from functions.
pub const DEFAULT_WARP_NODES: usize = 1024;

/// Independent generator for `(seed, stream)`. Batch generators use the
/// realization index as the stream, so output does not depend on how work
/// is split.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist =
        Poisson::new(mean).map_err(|e| Error::InvalidParameter(format!("poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as usize)
}

/// Homogeneous Poisson process: a Poisson count, then that many sorted
/// uniforms on the window.
pub fn sample_hpp<R: Rng + ?Sized>(rate: f64, domain: TimeDomain, rng: &mut R) -> Result<Realization> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidRate(rate));
    }
    let k = poisson_count(rate * domain.span(), rng)?;
    Ok(uniform_order_statistics(k, domain, rng))
}

/// `k` sorted uniform draws on the window (an HPP conditioned on `|s| = k`).
pub fn uniform_order_statistics<R: Rng + ?Sized>(k: usize, domain: TimeDomain, rng: &mut R) -> Realization {
    let mut events: Vec<f64> = (0..k).map(|_| domain.t1() + domain.span() * rng.random::<f64>()).collect();
    events.sort_by(f64::total_cmp);
    Realization::new(domain, events).expect("uniform draws lie inside the window")
}

/// Inhomogeneous Poisson process by Lewis-Shedler thinning against the
/// grid maximum of the intensity.
pub fn sample_ipp<R: Rng + ?Sized>(intensity: &IntensityModel, rng: &mut R) -> Result<Realization> {
    let domain = intensity.domain();
    let max = intensity.max_rate();
    if !(max > 0.0) {
        return Err(Error::InvalidIntensity("intensity is zero everywhere".into()));
    }
    let candidates = sample_hpp(max, domain, rng)?;
    let events = candidates
        .into_events()
        .into_iter()
        .filter(|&t| rng.random::<f64>() * max < intensity.rate(t))
        .collect();
    Realization::new(domain, events)
}

/// `n` HPP realizations; realization `i` is drawn from `stream_rng(seed, i)`.
pub fn simulate_hpp(rate: f64, domain: TimeDomain, n: usize, seed: u64) -> Result<Dataset> {
    let reals = (0..n)
        .map(|i| sample_hpp(rate, domain, &mut stream_rng(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(domain, reals)
}

/// `n` IPP realizations; realization `i` is drawn from `stream_rng(seed, i)`.
pub fn simulate_ipp(intensity: &IntensityModel, n: usize, seed: u64) -> Result<Dataset> {
    let reals =
        (0..n).map(|i| sample_ipp(intensity, &mut stream_rng(seed, i as u64))).collect::<Result<Vec<_>>>()?;
    Dataset::new(intensity.domain(), reals)
}

/// Endpoint-preserving, strictly increasing time warp stored as a monotone
/// piecewise-linear grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpFunction {
    domain: TimeDomain,
    inputs: Vec<f64>,
    outputs: Vec<f64>,
}

impl WarpFunction {
    pub fn new(domain: TimeDomain, inputs: Vec<f64>, outputs: Vec<f64>) -> Result<Self> {
        if inputs.len() != outputs.len() || inputs.len() < 2 {
            return Err(Error::InvalidWarp("need matching grids of at least two nodes".into()));
        }
        let n = inputs.len();
        for grid in [&inputs, &outputs] {
            if grid[0] != domain.t1() || grid[n - 1] != domain.t2() {
                return Err(Error::InvalidWarp("warp must fix both endpoints".into()));
            }
            if grid.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidWarp("warp grid must be strictly increasing".into()));
            }
        }
        Ok(Self { domain, inputs, outputs })
    }

    pub fn identity(domain: TimeDomain) -> Self {
        let grid = vec![domain.t1(), domain.t2()];
        Self { domain, inputs: grid.clone(), outputs: grid }
    }

    /// Samples `f` on `nodes` equally spaced points; the endpoints are pinned.
    pub fn from_fn(domain: TimeDomain, nodes: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let inputs = uniform_grid(domain, nodes.max(2));
        let last = inputs.len() - 1;
        let outputs = inputs
            .iter()
            .enumerate()
            .map(|(j, &t)| match j {
                0 => domain.t1(),
                j if j == last => domain.t2(),
                _ => f(t),
            })
            .collect();
        Self::new(domain, inputs, outputs)
    }

    /// Monotone cubic (Fritsch-Butland) through increasing interior knots,
    /// sampled on `nodes` points. The window endpoints are added as knots.
    pub fn monotone_cubic(domain: TimeDomain, knots: &[(f64, f64)], nodes: usize) -> Result<Self> {
        let mut xs = vec![domain.t1()];
        let mut ys = vec![domain.t1()];
        for &(x, y) in knots {
            xs.push(x);
            ys.push(y);
        }
        xs.push(domain.t2());
        ys.push(domain.t2());
        if xs.windows(2).any(|w| !(w[1] > w[0])) || ys.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidWarp("knots must be strictly increasing inside the window".into()));
        }
        let m = xs.len();
        let secants: Vec<f64> = (0..m - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
        let mut slopes = vec![0.0; m];
        slopes[0] = secants[0];
        slopes[m - 1] = secants[m - 2];
        for i in 1..m - 1 {
            let (a, b) = (secants[i - 1], secants[i]);
            slopes[i] = 2.0 * a * b / (a + b);
        }
        Self::from_fn(domain, nodes, |t| {
            let i = (xs.partition_point(|&x| x <= t).max(1) - 1).min(m - 2);
            let h = xs[i + 1] - xs[i];
            let u = (t - xs[i]) / h;
            let (u2, u3) = (u * u, u * u * u);
            let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
            let h10 = u3 - 2.0 * u2 + u;
            let h01 = -2.0 * u3 + 3.0 * u2;
            let h11 = u3 - u2;
            h00 * ys[i] + h10 * h * slopes[i] + h01 * ys[i + 1] + h11 * h * slopes[i + 1]
        })
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (xs, ys) = (&self.inputs, &self.outputs);
        let n = xs.len();
        if t <= xs[0] {
            return ys[0];
        }
        if t >= xs[n - 1] {
            return ys[n - 1];
        }
        let j = xs.partition_point(|&v| v <= t) - 1;
        if t == xs[j] {
            return ys[j];
        }
        let frac = (t - xs[j]) / (xs[j + 1] - xs[j]);
        (ys[j] + (ys[j + 1] - ys[j]) * frac).clamp(ys[j], ys[j + 1])
    }

    pub fn inverse(&self) -> Self {
        Self { domain: self.domain, inputs: self.outputs.clone(), outputs: self.inputs.clone() }
    }
}

/// Maps every event through the warp.
pub fn apply_warp(s: &Realization, warp: &WarpFunction) -> Result<Realization> {
    if s.domain() != warp.domain() {
        return Err(Error::DomainMismatch);
    }
    Realization::new(s.domain(), s.events().iter().map(|&t| warp.eval(t)).collect())
}
