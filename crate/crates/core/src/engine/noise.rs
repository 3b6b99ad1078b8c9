//! Poisson counting noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::{Interferogram, NoiseMeta};
use crate::error::{QoctError, Result};

/// Replaces each point by `Poisson(c·mean_counts)/mean_counts`.
pub fn add_shot_noise(trace: &Interferogram, mean_counts: f64, seed: u64) -> Result<Interferogram> {
    if !(mean_counts.is_finite() && mean_counts > 0.0) {
        return Err(QoctError::InvalidNoise(mean_counts));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = trace
        .counts
        .iter()
        .map(|&c| {
            let lambda = c.max(0.0) * mean_counts;
            if lambda == 0.0 {
                return Ok(0.0);
            }
            let dist = Poisson::new(lambda).map_err(|_| QoctError::InvalidNoise(lambda))?;
            Ok(dist.sample(&mut rng) / mean_counts)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut meta = trace.meta.clone();
    meta.noise = Some(NoiseMeta { mean_counts, seed });
    Ok(Interferogram {
        delays_um: trace.delays_um.clone(),
        counts,
        gamma0: trace.gamma0,
        meta,
    })
}
