//! Truncated Fourier representation of the interface function.
//!
//! The series solver works with the Fourier coefficients of the *scaled*
//! boundary trace `h(rho0, theta) * p`, where `h` is the conformal scale
//! factor; that weighting is what makes the transmission conditions diagonal
//! in the mode basis. A density is the real coefficient `p0` plus complex
//! coefficients `p_1 .. p_n` of that scaled trace:
//!
//! `h(rho0, theta) p = p0 + sum_k (p_k w^k + conj(p_k) gamma^(2k) w^-k)`,
//! `|w| = gamma`,
//!
//! so the pointwise scaled value is `p0 + 2 Re sum_k p_k gamma^k e^(i k
//! theta)` and the physical interface function divides out `h`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConformalMap;
use crate::linalg::C_ZERO;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InterfaceDensity {
    gamma: f64,
    p0: f64,
    pk: Vec<Complex64>,
}

impl InterfaceDensity {
    pub fn new(gamma: f64, p0: f64, pk: Vec<Complex64>) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::Config(format!(
                "density needs a positive finite conformal radius, got {gamma}"
            )));
        }
        if !p0.is_finite() {
            return Err(Error::NonFinite {
                context: "density coefficient p0".into(),
                value: p0,
            });
        }
        for (k, p) in pk.iter().enumerate() {
            if !p.re.is_finite() || !p.im.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("density coefficient p{}", k + 1),
                    value: f64::NAN,
                });
            }
        }
        Ok(Self { gamma, p0, pk })
    }

    /// Constant scaled trace (for the disk this is a constant physical
    /// interface function as well).
    pub fn uniform(gamma: f64, p0: f64) -> Self {
        Self::new(gamma, p0, vec![]).expect("uniform density")
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn pk(&self) -> &[Complex64] {
        &self.pk
    }

    pub fn order(&self) -> usize {
        self.pk.len()
    }

    /// Two-sided Fourier coefficient: `p_0`, `p_k`, or
    /// `p_{-k} = conj(p_k) gamma^(2k)`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        if k == 0 {
            Complex64::new(self.p0, 0.0)
        } else if k > 0 {
            let k = k as usize;
            if k <= self.pk.len() {
                self.pk[k - 1]
            } else {
                C_ZERO
            }
        } else {
            let n = (-k) as usize;
            if n <= self.pk.len() {
                self.pk[n - 1].conj() * self.gamma.powi(2 * n as i32)
            } else {
                C_ZERO
            }
        }
    }

    /// `p_k gamma^k`, the combination entering the mode-coupling blocks.
    pub fn weighted_coeff(&self, k: i64) -> Complex64 {
        self.coeff(k) * self.gamma.powi(k as i32)
    }

    /// Scaled boundary trace `h(rho0, theta) p` at angle `theta`.
    pub fn scaled_value(&self, theta: f64) -> f64 {
        let mut acc = self.p0;
        let rot = Complex64::from_polar(1.0, theta);
        let mut wk = Complex64::new(1.0, 0.0);
        let mut gk = 1.0;
        for p in &self.pk {
            wk *= rot;
            gk *= self.gamma;
            acc += 2.0 * (p * wk).re * gk;
        }
        acc
    }

    /// Physical interface function `p` at boundary angle `theta`.
    pub fn physical_value(&self, map: &ConformalMap, theta: f64) -> f64 {
        self.scaled_value(theta) / map.scale_factor(map.rho0(), theta)
    }

    /// Minimum of the physical interface function over `n` uniform samples.
    pub fn min_physical(&self, map: &ConformalMap, n: usize) -> f64 {
        (0..n)
            .map(|i| self.physical_value(map, 2.0 * std::f64::consts::PI * i as f64 / n as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// Sobolev energy `2 pi gamma^2 p0^2 + 4 pi gamma^2 sum (1 + k^2)
    /// |p_k|^2`; the regularization terms scale this.
    pub fn sobolev_energy(&self) -> f64 {
        let g2 = self.gamma * self.gamma;
        let mut acc = 2.0 * std::f64::consts::PI * g2 * self.p0 * self.p0;
        for (i, p) in self.pk.iter().enumerate() {
            let k = (i + 1) as f64;
            acc += 4.0 * std::f64::consts::PI * g2 * (1.0 + k * k) * p.norm_sqr();
        }
        acc
    }

    /// Fit a density of the given order to physical boundary samples
    /// `(theta_j, p_j)` on a uniform angular grid (any phase). Returns the
    /// density and the relative l2 misfit of the truncated series against
    /// the scaled samples.
    pub fn from_samples(
        map: &ConformalMap,
        samples: &[(f64, f64)],
        order: usize,
    ) -> Result<(Self, f64)> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::EmptyPointSet("boundary samples"));
        }
        if 2 * order + 1 > n {
            return Err(Error::AliasedSamples {
                order,
                needed: 2 * order + 1,
                got: n,
            });
        }
        let step = 2.0 * std::f64::consts::PI / n as f64;
        for j in 0..n - 1 {
            let d = samples[j + 1].0 - samples[j].0;
            if (d - step).abs() > 1e-9 {
                return Err(Error::NonUniformSamples);
            }
        }
        let gamma = map.gamma();
        let rho0 = map.rho0();
        let scaled: Vec<f64> = samples
            .iter()
            .map(|&(theta, p)| p * map.scale_factor(rho0, theta))
            .collect();
        let p0 = scaled.iter().sum::<f64>() / n as f64;
        let mut pk = Vec::with_capacity(order);
        for k in 1..=order {
            let mut acc = C_ZERO;
            for (&(theta, _), &v) in samples.iter().zip(scaled.iter()) {
                acc += v * Complex64::from_polar(1.0, -(k as f64) * theta);
            }
            pk.push(acc / (n as f64 * gamma.powi(k as i32)));
        }
        let density = Self::new(gamma, p0, pk)?;
        let mut err2 = 0.0;
        let mut ref2 = 0.0;
        for (&(theta, _), &v) in samples.iter().zip(scaled.iter()) {
            let d = density.scaled_value(theta) - v;
            err2 += d * d;
            ref2 += v * v;
        }
        let fit = if ref2 > 0.0 {
            (err2 / ref2).sqrt()
        } else {
            err2.sqrt()
        };
        Ok((density, fit))
    }

    /// Fit from a closure giving the physical interface function on the
    /// boundary, sampled at `n_samples` uniform angles.
    pub fn from_fn(
        map: &ConformalMap,
        f: impl Fn(f64) -> f64,
        n_samples: usize,
        order: usize,
    ) -> Result<(Self, f64)> {
        let samples: Vec<(f64, f64)> = (0..n_samples)
            .map(|j| {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / n_samples as f64;
                (theta, f(theta))
            })
            .collect();
        Self::from_samples(map, &samples, order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn negative_index_coefficients_mirror_positive_ones() {
        let d = InterfaceDensity::new(2.0, 1.0, vec![c(0.5, 0.25)]).unwrap();
        // p_{-1} = conj(p_1) gamma^2
        assert_eq!(d.coeff(-1), c(0.5, -0.25) * 4.0);
        assert_eq!(d.coeff(3), C_ZERO);
        assert_eq!(d.coeff(-3), C_ZERO);
    }

    #[test]
    fn scaled_value_matches_two_sided_series() {
        let d = InterfaceDensity::new(1.3, 0.7, vec![c(0.2, -0.1), c(0.05, 0.15)]).unwrap();
        let theta = 1.234;
        let w = Complex64::from_polar(d.gamma(), theta);
        let mut series = C_ZERO;
        for k in -2i64..=2 {
            series += d.coeff(k) * w.powi(k as i32);
        }
        assert_relative_eq!(series.im, 0.0, epsilon = 1e-14);
        assert_relative_eq!(d.scaled_value(theta), series.re, epsilon = 1e-12);
    }

    #[test]
    fn fit_recovers_exact_band_limited_density() {
        let map = shapes::by_name("fish").unwrap();
        let truth = InterfaceDensity::new(1.0, 1.4, vec![c(0.3, 0.1), c(-0.05, 0.2)]).unwrap();
        let (fitted, err) = InterfaceDensity::from_fn(
            &map,
            |theta| truth.physical_value(&map, theta),
            128,
            4,
        )
        .unwrap();
        assert!(err < 1e-12, "fit error {err}");
        assert_relative_eq!(fitted.p0(), truth.p0(), epsilon = 1e-12);
        for k in 0..2 {
            assert!((fitted.pk()[k] - truth.pk()[k]).norm() < 1e-12);
        }
        // truncated coefficients beyond the truth's order stay ~0
        for k in 2..4 {
            assert!(fitted.pk()[k].norm() < 1e-12);
        }
    }

    #[test]
    fn fit_reports_truncation_misfit() {
        let map = shapes::by_name("disk").unwrap();
        // Square-wave-like profile is not band limited; order-2 fit must
        // leave a visible residual.
        let f = |theta: f64| if theta < std::f64::consts::PI { 2.0 } else { 1.0 };
        let (_, err) = InterfaceDensity::from_fn(&map, f, 256, 2).unwrap();
        assert!(err > 1e-2, "fit error unexpectedly small: {err}");
    }

    #[test]
    fn aliased_and_nonuniform_samples_are_rejected() {
        let map = shapes::by_name("disk").unwrap();
        assert!(matches!(
            InterfaceDensity::from_fn(&map, |_| 1.0, 8, 10),
            Err(Error::AliasedSamples { .. })
        ));
        let mut samples: Vec<(f64, f64)> = (0..16)
            .map(|j| (2.0 * std::f64::consts::PI * j as f64 / 16.0, 1.0))
            .collect();
        samples[5].0 += 0.01;
        assert!(matches!(
            InterfaceDensity::from_samples(&map, &samples, 3),
            Err(Error::NonUniformSamples)
        ));
    }

    #[test]
    fn phase_shifted_uniform_grids_are_accepted() {
        let map = shapes::by_name("kite").unwrap();
        let truth = InterfaceDensity::new(1.0, 1.0, vec![c(0.2, 0.05)]).unwrap();
        let n = 64;
        let offset = 0.37;
        let samples: Vec<(f64, f64)> = (0..n)
            .map(|j| {
                let theta = offset + 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                (theta, truth.physical_value(&map, theta))
            })
            .collect();
        let (fitted, err) = InterfaceDensity::from_samples(&map, &samples, 3).unwrap();
        assert!(err < 1e-12);
        assert!((fitted.pk()[0] - truth.pk()[0]).norm() < 1e-12);
    }

    #[test]
    fn sobolev_energy_matches_hand_computation() {
        let d = InterfaceDensity::new(1.0, 2.0, vec![c(1.0, 0.0), c(0.0, 0.5)]).unwrap();
        let pi = std::f64::consts::PI;
        let expect = 2.0 * pi * 4.0 + 4.0 * pi * (2.0 * 1.0 + 5.0 * 0.25);
        assert_relative_eq!(d.sobolev_energy(), expect, epsilon = 1e-12);
    }

    #[test]
    fn positivity_scan_sees_sign_changes() {
        let map = shapes::by_name("disk").unwrap();
        let pos = InterfaceDensity::uniform(1.0, 1.25);
        assert!(pos.min_physical(&map, 64) > 0.0);
        let mixed = InterfaceDensity::new(1.0, 0.1, vec![c(0.5, 0.0)]).unwrap();
        assert!(mixed.min_physical(&map, 64) < 0.0);
    }
}
