//! Monte Carlo probes of strong convexity and Chow learnability of an activation.

use serde::{Deserialize, Serialize};

use super::Activation;
use crate::data::MarginalSpec;
use crate::error::{Error, Result};
use crate::numerics::{dist, dot, norm, par, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeSpec {
    /// Monte Carlo sample size.
    pub m: usize,
    pub pairs: usize,
    /// Radius of the ball the weight pairs are drawn from.
    pub radius: f64,
    pub min_sep: f64,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec {
            m: 100_000,
            pairs: 100,
            radius: 2.0,
            min_sep: 0.1,
        }
    }
}

impl ProbeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m < 10_000 {
            return Err(Error::InvalidSpec("probe needs m >= 10^4 samples".into()));
        }
        if self.pairs == 0 {
            return Err(Error::InvalidSpec("probe needs at least one pair".into()));
        }
        if !(self.radius > 0.0) {
            return Err(Error::InvalidSpec("probe radius must be positive".into()));
        }
        if !(self.min_sep > 0.0 && self.min_sep < 2.0 * self.radius) {
            return Err(Error::InvalidSpec("min_sep must lie in (0, 2·radius)".into()));
        }
        Ok(())
    }
}

/// Per-pair Monte Carlo estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRatios {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// `⟨χ^{σ_u} − χ^{σ_v}, u − v⟩ / ‖u − v‖²`
    pub strong_convexity: f64,
    /// `L(σ_u, σ_v) / ‖χ^{σ_u} − χ^{σ_v}‖²`
    pub chow_learnability: f64,
    /// `‖χ^{σ_u} − χ^{σ_v}‖`
    pub chow_gap: f64,
    /// `L(σ_u, σ_v) = E[(σ_u − σ_v)²]`
    pub function_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    /// Minimum (strong convexity) or maximum (Chow learnability) over pairs.
    pub estimate: f64,
    pub per_pair: Vec<f64>,
}

fn ball_point(rng: &mut Rng, d: usize, radius: f64) -> Vec<f64> {
    let dir = crate::data::random_unit(d, rng);
    let r = radius * rng.uniform().powf(1.0 / d as f64);
    dir.into_iter().map(|v| v * r).collect()
}

/// Draws `spec.m` points from `marginal`, then `spec.pairs` weight pairs uniform in the
/// radius ball and at least `min_sep` apart, and evaluates both ratios on each pair.
pub fn probe_pairs(
    activation: Activation,
    marginal: &MarginalSpec,
    spec: &ProbeSpec,
    rng: &mut Rng,
) -> Result<Vec<PairRatios>> {
    spec.validate()?;
    marginal.validate()?;
    activation.validate()?;
    let d = marginal.d;
    let mut xs = vec![0.0; spec.m * d];
    for x in xs.chunks_exact_mut(d) {
        marginal.sample_into(rng, x);
    }
    let mf = spec.m as f64;
    let mut out = Vec::with_capacity(spec.pairs);
    for _ in 0..spec.pairs {
        let u = ball_point(rng, d, spec.radius);
        let mut attempts = 0;
        let v = loop {
            let v = ball_point(rng, d, spec.radius);
            if dist(&u, &v) >= spec.min_sep {
                break v;
            }
            attempts += 1;
            if attempts > 10_000 {
                return Err(Error::InvalidSpec("could not draw a separated weight pair".into()));
            }
        };
        // acc[..d] accumulates Δσ·x, acc[d] accumulates Δσ²
        let acc = par::sum_vec(spec.m, d + 1, |i, acc| {
            let x = &xs[i * d..(i + 1) * d];
            let diff = activation.eval(dot(&u, x)) - activation.eval(dot(&v, x));
            for (a, xj) in acc.iter_mut().zip(x) {
                *a += diff * xj;
            }
            acc[d] += diff * diff;
        });
        let delta_chow: Vec<f64> = acc[..d].iter().map(|s| s / mf).collect();
        let fdist = acc[d] / mf;
        let delta_w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
        let sep_sq = dot(&delta_w, &delta_w);
        let gap = norm(&delta_chow);
        let chow_learnability = if gap > 0.0 {
            fdist / (gap * gap)
        } else if fdist == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        out.push(PairRatios {
            strong_convexity: dot(&delta_chow, &delta_w) / sep_sq,
            chow_learnability,
            chow_gap: gap,
            function_distance: fdist,
            u,
            v,
        });
    }
    Ok(out)
}

/// Estimates the strong-convexity constant `μ` as the smallest per-pair ratio.
pub fn strong_convexity_probe(
    activation: Activation,
    marginal: &MarginalSpec,
    spec: &ProbeSpec,
    rng: &mut Rng,
) -> Result<ProbeOutcome> {
    let pairs = probe_pairs(activation, marginal, spec, rng)?;
    let per_pair: Vec<f64> = pairs.iter().map(|p| p.strong_convexity).collect();
    Ok(ProbeOutcome {
        estimate: per_pair.iter().copied().fold(f64::INFINITY, f64::min),
        per_pair,
    })
}

/// Estimates the Chow-learnability constant `β` as the largest per-pair ratio.
/// Draws exactly the same samples and pairs as [`strong_convexity_probe`] for the same
/// stream.
pub fn chow_learnability_probe(
    activation: Activation,
    marginal: &MarginalSpec,
    spec: &ProbeSpec,
    rng: &mut Rng,
) -> Result<ProbeOutcome> {
    let pairs = probe_pairs(activation, marginal, spec, rng)?;
    let per_pair: Vec<f64> = pairs.iter().map(|p| p.chow_learnability).collect();
    Ok(ProbeOutcome {
        estimate: per_pair.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        per_pair,
    })
}
