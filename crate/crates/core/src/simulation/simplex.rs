//! Importance-sampling oracle for `W_k(z) = α^k ∫_{D_k(z)} Π t_i^(-α-1) dt`,
//! `D_k(z) = {t in (0, 1]^k : Σ t_i > z}`.

use rayon::prelude::*;
use serde::Serialize;

use super::{block_count, block_range, rng};
use crate::error::{Error, Result};

const TAG_SIMPLEX: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimplexEstimate {
    pub value: f64,
    pub std_err: f64,
    /// Bound on the mass cut off below the sampling floor `t_min`.
    pub truncation_bias: f64,
    pub samples: u64,
}

/// Draws `t_i` i.i.d. with density `α t^(-α-1) / (t_min^(-α) - 1)` on
/// `(t_min, 1)`, `t_min = max(1e-6, z - k + 1)`, and scores
/// `(t_min^(-α) - 1)^k 1{Σ t_i > z}`.
///
/// Every point of `D_k(z)` has all coordinates above `z - k + 1`, so that
/// floor cuts nothing and is the tightest one that does not; the `1e-6`
/// guard only matters for `z` within `1e-6` of `k - 1`.
pub fn oracle_w_simplex(
    k: usize,
    z: f64,
    alpha: f64,
    samples: u64,
    seed: u64,
) -> Result<SimplexEstimate> {
    if k == 0 {
        return Err(Error::domain("the simplex oracle needs k >= 1"));
    }
    if !(z > (k - 1) as f64 && z < k as f64) {
        return Err(Error::domain(format!(
            "z = {z} is outside ({}, {k})",
            k - 1
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if samples == 0 {
        return Err(Error::domain("samples must be positive"));
    }
    let lower = z - (k - 1) as f64;
    let t_min = lower.max(1e-6);
    let span = t_min.powf(-alpha) - 1.0;
    let neg_inv_alpha = -1.0 / alpha;
    let stream = rng::stream_id(TAG_SIMPLEX, k as u64, z.to_bits());
    let hits: u64 = (0..block_count(samples))
        .into_par_iter()
        .map(|b| {
            let range = block_range(b, samples);
            let mut g = rng::positioned(seed, stream, range.start, k as u64);
            let mut h = 0u64;
            for _ in range {
                let mut sum = 0.0;
                for _ in 0..k {
                    sum += (1.0 + rng::next_open(&mut g) * span).powf(neg_inv_alpha);
                }
                h += u64::from(sum > z);
            }
            h
        })
        .sum();
    let scale = span.powi(k as i32);
    let p = hits as f64 / samples as f64;
    let truncation_bias = if t_min <= lower {
        0.0
    } else {
        // one coordinate in (lower, t_min), the others anywhere in (lower, 1)
        k as f64
            * (lower.powf(-alpha) - t_min.powf(-alpha))
            * (lower.powf(-alpha) - 1.0).powi(k as i32 - 1)
    };
    Ok(SimplexEstimate {
        value: scale * p,
        std_err: scale * (p * (1.0 - p) / samples as f64).sqrt(),
        truncation_bias,
        samples,
    })
}
