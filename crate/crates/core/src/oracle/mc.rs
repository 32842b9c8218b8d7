//! Hit-or-miss Monte Carlo volumes of `ℓ_p` unit balls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FiniteDiag, MAX_DIM};
use crate::error::{Error, Result};

pub const MIN_MC_SAMPLES: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McVolume {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Uniform samples in `[-1, 1]^k`; the estimate is `2^k` times the hit fraction.
pub fn mc_volume(p: f64, k: usize, samples: u64, seed: u64) -> Result<McVolume> {
    if k == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    if k > MAX_DIM {
        return Err(Error::DimensionTooLarge(k));
    }
    if samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidParameter(format!("need at least {MIN_MC_SAMPLES} samples, got {samples}")));
    }
    let ball = FiniteDiag::new(vec![1.0; k], p, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = vec![0.0; k];
    let mut hits = 0u64;
    for _ in 0..samples {
        for v in y.iter_mut() {
            *v = rng.random_range(-1.0..=1.0);
        }
        if ball.contains(&y) {
            hits += 1;
        }
    }
    let box_volume = 2f64.powi(k as i32);
    let frac = hits as f64 / samples as f64;
    let std_error = box_volume * (frac * (1.0 - frac) / samples as f64).sqrt();
    Ok(McVolume { estimate: box_volume * frac, std_error, samples, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn matches_known_volumes() {
        let disc = mc_volume(2.0, 2, 1_000_000, 1).unwrap();
        assert!((disc.estimate - PI).abs() <= 3.0 * disc.std_error, "{disc:?}");
        let octa = mc_volume(1.0, 3, 1_000_000, 2).unwrap();
        assert!((octa.estimate - 4.0 / 3.0).abs() <= 3.0 * octa.std_error, "{octa:?}");
    }

    #[test]
    fn cube_is_always_hit() {
        let cube = mc_volume(f64::INFINITY, 2, 10_000, 9).unwrap();
        assert_eq!(cube.estimate, 4.0);
        assert_eq!(cube.std_error, 0.0);
    }

    #[test]
    fn guards_and_determinism() {
        assert!(matches!(mc_volume(2.0, 4, 10_000, 0), Err(Error::DimensionTooLarge(4))));
        assert!(mc_volume(2.0, 2, 9_999, 0).is_err());
        assert_eq!(mc_volume(0.5, 3, 20_000, 5).unwrap(), mc_volume(0.5, 3, 20_000, 5).unwrap());
    }
}
