//! The two monotone corrections of the local linear distribution estimator.

use super::grid::{trapezoid, DistributionEstimate, SmoothedMixture};
use crate::error::{Error, Result};

/// Running maximum of the raw estimate, floored at 0 (its limit as
/// `y -> -inf`), divided by its value at the last grid point.
pub(crate) fn running_max(
    grid: Vec<f64>,
    mixture: &SmoothedMixture,
    x_eval: f64,
) -> Result<DistributionEstimate> {
    let mut level = 0.0f64;
    let mut cdf: Vec<f64> = grid
        .iter()
        .map(|&y| {
            level = level.max(mixture.cdf(y));
            level
        })
        .collect();
    let total = level;
    if !(total > 0.0) {
        return Err(Error::DegenerateGrid(
            "the raw estimate never rises above 0 on the grid",
        ));
    }
    for c in &mut cdf {
        *c /= total;
    }
    Ok(DistributionEstimate {
        grid,
        cdf,
        density: None,
        x_eval,
        monotone: true,
    })
}

/// Clip the raw density at 0, rescale it to unit trapezoid area and
/// integrate cumulatively.
pub(crate) fn clipped_density(
    grid: Vec<f64>,
    mixture: &SmoothedMixture,
    x_eval: f64,
) -> Result<DistributionEstimate> {
    let mut density: Vec<f64> = grid.iter().map(|&y| mixture.pdf(y).max(0.0)).collect();
    let mass = trapezoid(&grid, &density);
    if !(mass > 0.0) {
        return Err(Error::DegenerateGrid(
            "the clipped density has no mass on the grid",
        ));
    }
    for f in &mut density {
        *f /= mass;
    }
    let mut cdf = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    cdf.push(0.0);
    for k in 1..grid.len() {
        acc += 0.5 * (density[k] + density[k - 1]) * (grid[k] - grid[k - 1]);
        cdf.push(acc);
    }
    Ok(DistributionEstimate {
        grid,
        cdf,
        density: Some(density),
        x_eval,
        monotone: true,
    })
}
