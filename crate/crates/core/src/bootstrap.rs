//! Limit model-free bootstrap of the monotone local linear cdf estimate.
//!
//! The fitted distributions `G_{x_i}` at every design point are computed
//! once. Each replicate draws `U_i ~ Uniform(0, 1)`, sets
//! `Y*_i = G_{x_i}^{-1}(U_i)` and re-estimates the cdf at `(x, y)` from the
//! pseudo-sample `(x_i, Y*_i)`.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::estimators::{distribution, DistributionEstimate, EstimatorConfig, Method};
use crate::sample::RegressionSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    /// The estimate from the original sample.
    pub estimate: f64,
    pub replicates: Vec<f64>,
    /// Sample variance of the replicates (divisor `B - 1`; 0 when `B = 1`).
    pub variance: f64,
    pub resamples: usize,
    pub seed: u64,
}

/// Independent stream for replicate `index`; identical for serial and
/// parallel runs.
pub fn replicate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Sample variance with divisor `n - 1`; 0 for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

/// Slot of each design point plus the first index of every distinct `x`,
/// so equal design points share one fit.
fn design_slots(xs: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut seen: HashMap<u64, usize> = HashMap::new();
    let mut slots = Vec::with_capacity(xs.len());
    let mut firsts = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        let slot = *seen.entry(x.to_bits()).or_insert_with(|| {
            firsts.push(i);
            firsts.len() - 1
        });
        slots.push(slot);
    }
    (slots, firsts)
}

pub fn lmf_bootstrap(
    sample: &RegressionSample,
    x: f64,
    y: f64,
    resamples: usize,
    cfg: &EstimatorConfig,
    seed: u64,
) -> Result<BootstrapSummary> {
    if resamples == 0 {
        return Err(Error::invalid("the bootstrap needs at least one replicate"));
    }
    if !y.is_finite() {
        return Err(Error::invalid("bootstrap response value must be finite"));
    }
    let estimate = distribution(sample, x, cfg, Method::Llm)?.cdf_at(y);

    let (slots, firsts) = design_slots(sample.xs());
    let fits: Vec<DistributionEstimate> = firsts
        .par_iter()
        .map(|&i| {
            distribution(sample, sample.xs()[i], cfg, Method::Llm).map_err(|e| Error::DesignPoint {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let replicates: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let ys: Vec<f64> = slots
                .iter()
                .map(|&s| {
                    let fit = &fits[s];
                    let last = *fit.cdf.last().expect("nonempty grid");
                    let u: f64 = rng.sample(Open01);
                    fit.quantile(u.min(last))
                        .expect("monotone fit covers the unit interval")
                })
                .collect();
            let pseudo = sample.with_responses(ys)?;
            Ok(distribution(&pseudo, x, cfg, Method::Llm)?.cdf_at(y))
        })
        .collect::<Vec<Result<f64>>>()
        .into_iter()
        .enumerate()
        .map(|(r, res)| {
            res.map_err(|e| Error::Replicate {
                replicate: r,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    Ok(BootstrapSummary {
        estimate,
        variance: sample_variance(&replicates),
        replicates,
        resamples,
        seed,
    })
}
