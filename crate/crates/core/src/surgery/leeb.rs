//! Compatibility of boundary flat metrics on a Seifert piece, and orbifold Euler
//! characteristics of the base.

use crate::error::{invalid, Result};

/// Base data of a Seifert fibration with boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct SeifertFibrationData {
    /// Genus of the base; negative values encode nonorientable bases with
    /// `|genus|` crosscaps.
    pub genus: i64,
    pub boundary_count: usize,
    /// Exceptional fibres `(p, q)` with `p >= 2`, `gcd(p, q) = 1`.
    pub exceptional: Vec<(i64, i64)>,
    /// `(sigma_i(f, f), sigma_i(d_i, f))` for each boundary torus.
    pub boundary_products: Vec<(f64, f64)>,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl SeifertFibrationData {
    pub fn new(
        genus: i64,
        exceptional: Vec<(i64, i64)>,
        boundary_products: Vec<(f64, f64)>,
    ) -> Result<Self> {
        for &(p, q) in &exceptional {
            if p < 2 {
                return Err(invalid(format!("fibre order p = {p} must be at least 2")));
            }
            if gcd(p, q) != 1 {
                return Err(invalid(format!("({p}, {q}) is not a coprime pair")));
            }
        }
        if boundary_products.is_empty() {
            return Err(invalid("at least one boundary torus is required"));
        }
        Ok(Self {
            genus,
            boundary_count: boundary_products.len(),
            exceptional,
            boundary_products,
        })
    }

    /// `sum q_i / p_i`.
    pub fn euler_number(&self) -> f64 {
        self.exceptional
            .iter()
            .map(|&(p, q)| q as f64 / p as f64)
            .sum()
    }
}

/// Whether the boundary products come from one flat metric on the fibre direction
/// and satisfy `sum sigma_i(d_i, f) = -e ||f||^2`, both to 1e-12 relative.
pub fn leeb_compatibility(data: &SeifertFibrationData) -> Result<bool> {
    if data.boundary_products.is_empty() || data.boundary_count != data.boundary_products.len() {
        return Err(invalid(
            "boundary products must be given for every boundary torus",
        ));
    }
    let tol = 1e-12;
    let norm = data.boundary_products[0].0;
    let same = data
        .boundary_products
        .iter()
        .all(|&(ff, _)| (ff - norm).abs() <= tol * ff.abs().max(norm.abs()));
    if !same {
        return Ok(false);
    }
    let e = data.euler_number();
    let sum: f64 = data.boundary_products.iter().map(|&(_, df)| df).sum();
    let scale = data
        .boundary_products
        .iter()
        .map(|&(_, df)| df.abs())
        .sum::<f64>()
        .max((e * norm).abs())
        .max(norm.abs());
    Ok((sum + e * norm).abs() <= tol * scale)
}

/// `chi(|O|) - sum (1 - 1/p_i)` for a base surface of the given genus with
/// `boundary_count` boundary circles. Negative genus means `|genus|` crosscaps.
pub fn orbifold_euler(genus: i64, boundary_count: usize, cone_orders: &[i64]) -> Result<f64> {
    if let Some(&p) = cone_orders.iter().find(|&&p| p < 2) {
        return Err(invalid(format!("cone order {p} must be at least 2")));
    }
    let chi = if genus >= 0 {
        2 - 2 * genus - boundary_count as i64
    } else {
        2 + genus - boundary_count as i64
    };
    Ok(chi as f64
        - cone_orders
            .iter()
            .map(|&p| 1.0 - 1.0 / p as f64)
            .sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compatibility_examples() {
        let d = SeifertFibrationData::new(0, vec![], vec![(1.0, 0.5), (1.0, -0.5)]).unwrap();
        assert!(leeb_compatibility(&d).unwrap());
        let d = SeifertFibrationData::new(0, vec![(2, 1)], vec![(1.0, -0.5)]).unwrap();
        assert!(leeb_compatibility(&d).unwrap());
        let d = SeifertFibrationData::new(0, vec![], vec![(1.0, 0.0), (2.0, 0.0)]).unwrap();
        assert!(!leeb_compatibility(&d).unwrap());
        let d = SeifertFibrationData::new(0, vec![(2, 1)], vec![(1.0, 0.5)]).unwrap();
        assert!(!leeb_compatibility(&d).unwrap());
    }

    #[test]
    fn invalid_data() {
        assert!(SeifertFibrationData::new(0, vec![], vec![]).is_err());
        assert!(SeifertFibrationData::new(0, vec![(4, 2)], vec![(1.0, 0.0)]).is_err());
        assert!(SeifertFibrationData::new(0, vec![(1, 0)], vec![(1.0, 0.0)]).is_err());
    }

    #[test]
    fn orbifold_euler_examples() {
        for p in 2..7 {
            assert!((orbifold_euler(0, 1, &[p]).unwrap() - 1.0 / p as f64).abs() < 1e-15);
        }
        assert_eq!(orbifold_euler(0, 1, &[2, 2]).unwrap(), 0.0);
        assert_eq!(orbifold_euler(2, 0, &[]).unwrap(), -2.0);
        assert_eq!(orbifold_euler(-1, 0, &[]).unwrap(), 1.0);
        assert!(orbifold_euler(0, 0, &[1]).is_err());
    }
}
