//! Inverted dropout masks.

use rand::Rng;

use crate::error::{Error, Result};

/// Multiplicative dropout mask with inverted scaling: each element is 0
/// with probability `rate`, else 1/(1-rate), so the mask has unit
/// expectation. Applied in training only, never at inference.
pub fn dropout_mask<R: Rng>(len: usize, rate: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidParameter(format!(
            "dropout rate must be in [0, 1), got {rate}"
        )));
    }
    if rate == 0.0 {
        return Ok(vec![1.0; len]);
    }
    let keep = 1.0 / (1.0 - rate);
    Ok((0..len)
        .map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_rate_is_all_ones() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mask = dropout_mask(16, 0.0, &mut rng).unwrap();
        assert!(mask.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn mean_mask_is_close_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mask = dropout_mask(100_000, 0.5, &mut rng).unwrap();
        let mean: f64 = mask.iter().sum::<f64>() / mask.len() as f64;
        assert!((0.98..=1.02).contains(&mean), "mean {mean}");
        assert!(mask.iter().all(|&v| v == 0.0 || v == 2.0));
    }

    #[test]
    fn same_seed_same_mask() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(
            dropout_mask(256, 0.3, &mut a).unwrap(),
            dropout_mask(256, 0.3, &mut b).unwrap()
        );
    }

    #[test]
    fn rate_one_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(dropout_mask(4, 1.0, &mut rng).is_err());
        assert!(dropout_mask(4, -0.1, &mut rng).is_err());
    }
}
