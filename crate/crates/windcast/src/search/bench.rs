//! Standard benchmark objectives for optimizer validation.

use crate::error::{Error, Result};
use crate::search::SearchSpace;

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
            .sum::<f64>()
}

/// Benchmark objective plus its conventional box domain.
pub fn by_name(name: &str, dim: usize) -> Result<(fn(&[f64]) -> f64, SearchSpace)> {
    let (f, lo, hi): (fn(&[f64]) -> f64, f64, f64) = match name.to_ascii_lowercase().as_str() {
        "sphere" => (sphere, -5.12, 5.12),
        "rosenbrock" => (rosenbrock, -5.0, 10.0),
        "rastrigin" => (rastrigin, -5.12, 5.12),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown benchmark `{other}` (sphere, rosenbrock, rastrigin)"
            )))
        }
    };
    Ok((f, SearchSpace::continuous_box(dim, lo, hi)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optima_are_where_they_should_be() {
        assert_eq!(sphere(&[0.0; 5]), 0.0);
        assert_eq!(rosenbrock(&[1.0; 4]), 0.0);
        assert!(rastrigin(&[0.0; 3]).abs() < 1e-12);
        assert!(sphere(&[1.0, 2.0]) > 0.0);
        assert!(rastrigin(&[0.5, 0.5]) > 0.0);
    }

    #[test]
    fn lookup_by_name() {
        assert!(by_name("sphere", 5).is_ok());
        assert!(by_name("Rastrigin", 5).is_ok());
        assert!(by_name("ackley", 5).is_err());
    }
}
