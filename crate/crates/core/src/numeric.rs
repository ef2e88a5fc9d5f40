//! Numbers stored as `mantissa * e^{ln_scale}`, for quantities far below f64 range.

/// `mantissa * e^{ln_scale}`, kept with `|mantissa| = 1` or zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub ln_scale: f64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled {
        mantissa: 0.0,
        ln_scale: f64::NEG_INFINITY,
    };

    /// `e^{ln}`.
    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                mantissa: 1.0,
                ln_scale: ln,
            }
        }
    }

    pub fn new(mantissa: f64, ln_scale: f64) -> Self {
        Self { mantissa, ln_scale }.normalized()
    }

    fn normalized(self) -> Self {
        if self.mantissa == 0.0 || self.ln_scale == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self {
            mantissa: self.mantissa.signum(),
            ln_scale: self.ln_scale + self.mantissa.abs().ln(),
        }
    }

    pub fn is_zero(self) -> bool {
        self.mantissa == 0.0
    }

    /// Plain f64 value; underflows to 0 for very small magnitudes.
    pub fn value(self) -> f64 {
        self.mantissa * self.ln_scale.exp()
    }

    /// `ln |x|`, `-inf` for zero.
    pub fn ln_abs(self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.ln_scale
        }
    }

    pub fn signum(self) -> f64 {
        self.mantissa
    }

    pub fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let top = self.ln_scale.max(other.ln_scale);
        let m = self.mantissa * (self.ln_scale - top).exp()
            + other.mantissa * (other.ln_scale - top).exp();
        Self::new(m, top)
    }

    pub fn neg(self) -> Self {
        Self {
            mantissa: -self.mantissa,
            ..self
        }
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(other.neg())
    }

    /// Multiply by `e^{ln}`.
    pub fn mul_exp(self, ln: f64) -> Self {
        if self.is_zero() {
            self
        } else {
            Self {
                ln_scale: self.ln_scale + ln,
                ..self
            }
        }
    }

    pub fn mul(self, x: f64) -> Self {
        Self::new(self.mantissa * x, self.ln_scale)
    }
}

/// Sum of `Scaled` terms.
pub fn scaled_sum<I: IntoIterator<Item = Scaled>>(items: I) -> Scaled {
    items.into_iter().fold(Scaled::ZERO, Scaled::add)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_matches_plain_floats() {
        let a = Scaled::new(3.0, 0.0);
        let b = Scaled::new(-1.5, 0.0);
        assert!((a.add(b).value() - 1.5).abs() < 1e-15);
        assert!((a.sub(b).value() - 4.5).abs() < 1e-15);
        assert!((a.mul(2.0).value() - 6.0).abs() < 1e-15);
        assert_eq!(a.sub(a), Scaled::ZERO);
    }

    #[test]
    fn tiny_magnitudes_survive() {
        let x = Scaled::from_ln(-3000.0);
        let y = Scaled::from_ln(-3000.0 + 2f64.ln());
        assert!((y.sub(x).ln_abs() + 3000.0).abs() < 1e-12);
        assert_eq!(x.value(), 0.0);
    }
}
