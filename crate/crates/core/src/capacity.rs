//! Waterfilling power allocation and Shannon capacity over the parallel
//! mode channels y_n = xi_n x_n + w_n.

use crate::error::Error;
use crate::Result;

/// A waterfilling power allocation over parallel AWGN channels.
#[derive(Debug, Clone)]
pub struct Allocation {
    /// Channel power gains |xi_n|^2.
    pub gains: Vec<f64>,
    /// Per-mode noise power N_0.
    pub noise: f64,
    /// Total power budget.
    pub total_power: f64,
    /// Per-mode powers, non-negative, summing to the budget.
    pub powers: Vec<f64>,
    /// Common water level mu.
    pub water_level: f64,
}

/// Capacity-optimal power allocation by the exact sorted-cutoff algorithm.
///
/// Channels are sorted by their noise-to-gain floor N_0/g; active sets are
/// tested in order, so no iterative tolerance is involved.
pub fn waterfill(gains: &[f64], noise: f64, total_power: f64) -> Result<Allocation> {
    if gains.is_empty() {
        return Err(Error::InvalidArgument("gains must be non-empty".into()));
    }
    if gains.iter().any(|g| !g.is_finite()) || !noise.is_finite() || !total_power.is_finite() {
        return Err(Error::InvalidInput("non-finite waterfilling input".into()));
    }
    if gains.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::InvalidArgument(
            "all gains must be positive (pre-filter zero-gain modes)".into(),
        ));
    }
    if !(noise > 0.0) || !(total_power > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise and total power must be positive, got N_0={noise}, P={total_power}"
        )));
    }

    // Floors N_0/g_n in ascending order; the best channels fill first.
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&i, &j| (noise / gains[i]).partial_cmp(&(noise / gains[j])).unwrap());
    let floors: Vec<f64> = order.iter().map(|&i| noise / gains[i]).collect();

    // With the m best channels active, mu = (P + sum of their floors) / m.
    // The correct m is the largest one whose mu stays above the m-th floor.
    let mut active = 1;
    let mut floor_sum = floors[0];
    let mut water_level = total_power + floor_sum;
    for m in 2..=floors.len() {
        let candidate_sum = floor_sum + floors[m - 1];
        let candidate_mu = (total_power + candidate_sum) / m as f64;
        if candidate_mu > floors[m - 1] {
            active = m;
            floor_sum = candidate_sum;
            water_level = candidate_mu;
        } else {
            break;
        }
    }

    let mut powers = vec![0.0; gains.len()];
    for (rank, &idx) in order.iter().enumerate() {
        if rank < active {
            powers[idx] = water_level - floors[rank];
        }
    }

    Ok(Allocation {
        gains: gains.to_vec(),
        noise,
        total_power,
        powers,
        water_level,
    })
}

/// Shannon capacity of the allocation in bits per channel use.
pub fn capacity(alloc: &Allocation) -> f64 {
    alloc
        .powers
        .iter()
        .zip(alloc.gains.iter())
        .map(|(p, g)| (1.0 + p * g / alloc.noise).log2())
        .sum()
}
