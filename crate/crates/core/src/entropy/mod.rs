//! Poincaré series, critical exponents and entropy bounds.

mod free_product;
mod oracle;

pub use free_product::{
    enumerate_free_product, free_product_exponent_check, syllable_lower_bound, tube_series_bound,
    Factor, FreeProductEnumeration, FreeProductReport, FreeProductRow, Syllable, SyllableWord,
    TubeBound,
};
pub use oracle::{
    critical_exponent, hyperbolic_ball_volume, poincare_partial, Element, ExponentEstimate,
    FreeGroup, LengthOracle, Presentation, Spectrum, DEFAULT_BUDGET,
};

use crate::error::{invalid, Result};

/// `(n-1)(1+2 delta)`: volume entropy bound under `Ric >= -(n-1)(1+2 delta)^2`.
pub fn ent_upper_bound_bishop(delta: f64, n: u32) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {n}")));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(invalid(format!("delta must be nonnegative, got {delta}")));
    }
    Ok((n - 1) as f64 * (1.0 + 2.0 * delta))
}

/// `2 (sum of volumes)^{1/3}`, the minimal entropy of a 3-manifold whose hyperbolic
/// pieces have the given volumes; zero when there are none.
pub fn minent_target(volumes: &[f64]) -> Result<f64> {
    if let Some(v) = volumes.iter().find(|&&v| !(v > 0.0) || !v.is_finite()) {
        return Err(invalid(format!("volumes must be positive, got {v}")));
    }
    let total: f64 = volumes.iter().sum();
    Ok(2.0 * total.cbrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bishop_examples() {
        assert_eq!(ent_upper_bound_bishop(0.0, 3).unwrap(), 2.0);
        assert!((ent_upper_bound_bishop(0.1, 3).unwrap() - 2.4).abs() < 1e-15);
        assert_eq!(ent_upper_bound_bishop(0.0, 2).unwrap(), 1.0);
        assert!(ent_upper_bound_bishop(0.0, 1).is_err());
    }

    #[test]
    fn minent_examples() {
        assert_eq!(minent_target(&[1.0]).unwrap(), 2.0);
        assert_eq!(minent_target(&[]).unwrap(), 0.0);
        assert!((minent_target(&[2.02988]).unwrap() - 2.532_328_933_937_123).abs() < 1e-12);
        assert!(minent_target(&[-1.0]).is_err());
    }
}
