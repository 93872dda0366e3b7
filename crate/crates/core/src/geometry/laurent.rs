//! Truncated Laurent series in one complex variable.
//!
//! Used to compose Faber polynomials with the exterior map when extracting
//! Grunsky coefficients. Series are stored densely over a power window
//! `[min_pow, max_pow]`; multiplication truncates below a caller-chosen
//! bottom power, and the caller is responsible for choosing a bottom deep
//! enough that the retained coefficients stay exact (each multiplication by
//! a series with lowest power `-K` pulls information up by at most one power
//! per step, see `FaberTable`).

use num_complex::Complex64;

use crate::linalg::C_ZERO;

#[derive(Debug, Clone)]
pub struct Laurent {
    min_pow: i64,
    /// coeffs[i] multiplies w^(min_pow + i)
    coeffs: Vec<Complex64>,
}

impl Laurent {
    pub fn constant(c: Complex64) -> Self {
        Self {
            min_pow: 0,
            coeffs: vec![c],
        }
    }

    pub fn from_coeffs(min_pow: i64, coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty());
        Self { min_pow, coeffs }
    }

    pub fn min_pow(&self) -> i64 {
        self.min_pow
    }

    pub fn max_pow(&self) -> i64 {
        self.min_pow + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, pow: i64) -> Complex64 {
        if pow < self.min_pow || pow > self.max_pow() {
            C_ZERO
        } else {
            self.coeffs[(pow - self.min_pow) as usize]
        }
    }

    /// Multiply by `rhs`, dropping all powers below `bottom`.
    pub fn mul_truncated(&self, rhs: &Laurent, bottom: i64) -> Laurent {
        let min = (self.min_pow + rhs.min_pow).max(bottom);
        let max = self.max_pow() + rhs.max_pow();
        if max < min {
            return Laurent::constant(C_ZERO);
        }
        let mut coeffs = vec![C_ZERO; (max - min + 1) as usize];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == C_ZERO {
                continue;
            }
            let pa = self.min_pow + i as i64;
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                let p = pa + rhs.min_pow + j as i64;
                if p >= min {
                    coeffs[(p - min) as usize] += a * b;
                }
            }
        }
        Laurent { min_pow: min, coeffs }
    }

    /// `self += c * other`, extending the power window as needed.
    pub fn axpy(&mut self, c: Complex64, other: &Laurent) {
        if c == C_ZERO {
            return;
        }
        let min = self.min_pow.min(other.min_pow);
        let max = self.max_pow().max(other.max_pow());
        if min < self.min_pow || max > self.max_pow() {
            let mut coeffs = vec![C_ZERO; (max - min + 1) as usize];
            let shift = (self.min_pow - min) as usize;
            coeffs[shift..shift + self.coeffs.len()].copy_from_slice(&self.coeffs);
            self.coeffs = coeffs;
            self.min_pow = min;
        }
        for (j, &b) in other.coeffs.iter().enumerate() {
            let idx = (other.min_pow - self.min_pow) as usize + j;
            self.coeffs[idx] += c * b;
        }
    }

    pub fn add_scalar(&mut self, c: Complex64) {
        if c == C_ZERO {
            return;
        }
        if self.min_pow > 0 {
            let shift = self.min_pow as usize;
            let mut coeffs = vec![C_ZERO; shift + self.coeffs.len()];
            coeffs[shift..].copy_from_slice(&self.coeffs);
            self.coeffs = coeffs;
            self.min_pow = 0;
        } else if self.max_pow() < 0 {
            self.coeffs
                .resize((1 - self.min_pow) as usize, C_ZERO);
        }
        let idx = (-self.min_pow) as usize;
        self.coeffs[idx] += c;
    }

    /// Evaluate the truncated series at `w`.
    pub fn eval(&self, w: Complex64) -> Complex64 {
        let mut acc = C_ZERO;
        // Horner over ascending powers, then shift by w^min_pow.
        for &c in self.coeffs.iter().rev() {
            acc = acc * w + c;
        }
        acc * w.powi(self.min_pow as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_matches_pointwise_evaluation() {
        let a = Laurent::from_coeffs(-2, vec![c(1.0, 0.5), c(0.0, 0.0), c(2.0, -1.0), c(0.5, 0.0)]);
        let b = Laurent::from_coeffs(-1, vec![c(0.3, 0.0), c(1.0, 1.0), c(-0.2, 0.4)]);
        let prod = a.mul_truncated(&b, -10);
        let w = c(1.3, -0.7);
        let lhs = prod.eval(w);
        let rhs = a.eval(w) * b.eval(w);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn truncation_drops_low_powers_only() {
        let a = Laurent::from_coeffs(-3, vec![c(1.0, 0.0); 6]);
        let b = Laurent::from_coeffs(-3, vec![c(1.0, 0.0); 6]);
        let full = a.mul_truncated(&b, -100);
        let cut = a.mul_truncated(&b, -2);
        assert_eq!(cut.min_pow(), -2);
        for p in -2..=cut.max_pow() {
            assert_eq!(cut.coeff(p), full.coeff(p));
        }
    }

    #[test]
    fn add_scalar_extends_window_when_needed() {
        let mut a = Laurent::from_coeffs(2, vec![c(1.0, 0.0)]);
        a.add_scalar(c(5.0, 0.0));
        assert_eq!(a.coeff(0), c(5.0, 0.0));
        assert_eq!(a.coeff(2), c(1.0, 0.0));

        let mut b = Laurent::from_coeffs(-3, vec![c(1.0, 0.0), c(2.0, 0.0)]);
        b.add_scalar(c(1.0, 1.0));
        assert_eq!(b.coeff(0), c(1.0, 1.0));
        assert_eq!(b.coeff(-3), c(1.0, 0.0));
    }
}
