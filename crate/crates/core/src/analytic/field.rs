//! Linear background fields `H(x) = a x1 + b x2`.
//!
//! In the Faber basis a linear field has the single coefficient
//! `alpha_1 = a - i b`; all higher modes vanish.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct LinearField {
    pub a: f64,
    pub b: f64,
}

impl LinearField {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    /// Unit-gradient field in direction `phi` (x-direction at `phi = 0`).
    pub fn from_angle(phi: f64) -> Self {
        Self {
            a: phi.cos(),
            b: phi.sin(),
        }
    }

    pub fn value(&self, z: Complex64) -> f64 {
        self.a * z.re + self.b * z.im
    }

    pub fn gradient(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn alpha1(&self) -> Complex64 {
        Complex64::new(self.a, -self.b)
    }

    /// Faber-coefficient vector of length `n` (only the first entry is
    /// nonzero for a linear field).
    pub fn alpha_vector(&self, n: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        if n > 0 {
            v[0] = self.alpha1();
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_is_the_dot_product() {
        let f = LinearField::new(2.0, -1.0);
        assert_eq!(f.value(Complex64::new(3.0, 4.0)), 2.0);
    }

    #[test]
    fn alpha1_reconstructs_the_field() {
        // H = Re(alpha1 z)
        let f = LinearField::from_angle(0.83);
        let z = Complex64::new(-1.2, 0.7);
        let re = (f.alpha1() * z).re;
        assert!((re - f.value(z)).abs() < 1e-14);
    }
}
