//! Exterior conformal maps and the modified polar coordinate system.
//!
//! An inclusion boundary is described by a map
//! `psi(w) = w + a0 + a1/w + ... + aK/w^K` taking the exterior of the disk
//! `|w| > gamma` onto the exterior of the inclusion. Points are addressed in
//! modified polar coordinates `(rho, theta)` through `w = exp(rho + i
//! theta)`, so the boundary is `rho = rho0 = ln gamma`.

pub mod faber;
pub mod laurent;
pub mod shapes;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C_ZERO;
use laurent::Laurent;

/// Number of boundary samples used by the constructor's sanity checks.
const VALIDATION_SAMPLES: usize = 2048;
/// |psi'| below this on the boundary counts as a degenerate map.
const DERIV_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(try_from = "RawMap", into = "RawMap")]
pub struct ConformalMap {
    gamma: f64,
    a0: Complex64,
    ak: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawMap {
    gamma: f64,
    a0: Complex64,
    ak: Vec<Complex64>,
}

impl From<ConformalMap> for RawMap {
    fn from(m: ConformalMap) -> Self {
        RawMap {
            gamma: m.gamma,
            a0: m.a0,
            ak: m.ak,
        }
    }
}

impl TryFrom<RawMap> for ConformalMap {
    type Error = Error;
    fn try_from(raw: RawMap) -> Result<Self> {
        ConformalMap::new(raw.gamma, raw.a0, raw.ak)
    }
}

impl ConformalMap {
    /// Build and validate a map. Checks that the coefficients are finite,
    /// that `psi'` does not vanish on the boundary circle, and that the
    /// boundary image is a simple closed curve (sampled at 2048 points).
    pub fn new(gamma: f64, a0: Complex64, ak: Vec<Complex64>) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::BadMap(format!(
                "conformal radius must be positive and finite, got {gamma}"
            )));
        }
        if !a0.re.is_finite() || !a0.im.is_finite() {
            return Err(Error::NonFinite {
                context: "map coefficient a0".into(),
                value: f64::NAN,
            });
        }
        for (k, a) in ak.iter().enumerate() {
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("map coefficient a{}", k + 1),
                    value: f64::NAN,
                });
            }
        }
        let mut ak = ak;
        while ak.last() == Some(&C_ZERO) {
            ak.pop();
        }
        // Area theorem: for a univalent exterior map the rescaled
        // coefficients satisfy sum_k k |a_k|^2 gamma^(-2(k+1)) <= 1. Violating
        // it guarantees the map folds even when the boundary image happens to
        // stay a simple curve (e.g. w + q/w with q > 1).
        let mut area = 0.0;
        for (i, a) in ak.iter().enumerate() {
            let k = (i + 1) as f64;
            area += k * a.norm_sqr() * gamma.powf(-2.0 * (k + 1.0));
        }
        if area > 1.0 + 1e-9 {
            return Err(Error::BadMap(format!(
                "coefficients violate the exterior area bound ({area:.6} > 1); map cannot be univalent"
            )));
        }
        let map = Self { gamma, a0, ak };
        map.check_boundary()?;
        Ok(map)
    }

    fn check_boundary(&self) -> Result<()> {
        let n = VALIDATION_SAMPLES;
        let mut pts = Vec::with_capacity(n);
        for i in 0..n {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let w = Complex64::from_polar(self.gamma, theta);
            let d = self.psi_prime(w).norm();
            if !(d > DERIV_FLOOR) {
                return Err(Error::DegenerateMap {
                    theta,
                    deriv_abs: d,
                });
            }
            pts.push(self.psi(w));
        }
        // Self-intersection scan over the sampled polygon. Adjacent segments
        // share an endpoint and are skipped.
        for i in 0..n {
            let (a1, a2) = (pts[i], pts[(i + 1) % n]);
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (b1, b2) = (pts[j], pts[(j + 1) % n]);
                if segments_cross(a1, a2, b1, b2) {
                    return Err(Error::NotSimpleCurve {
                        i,
                        j,
                        samples: n,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rho0(&self) -> f64 {
        self.gamma.ln()
    }

    pub fn a0(&self) -> Complex64 {
        self.a0
    }

    /// Coefficients of the negative powers, `ak()[k]` multiplying `w^-(k+1)`.
    pub fn ak(&self) -> &[Complex64] {
        &self.ak
    }

    /// Highest negative power carried by the map.
    pub fn order(&self) -> usize {
        self.ak.len()
    }

    pub fn psi(&self, w: Complex64) -> Complex64 {
        let inv = 1.0 / w;
        let mut acc = C_ZERO;
        for &a in self.ak.iter().rev() {
            acc = (acc + a) * inv;
        }
        w + self.a0 + acc
    }

    pub fn psi_prime(&self, w: Complex64) -> Complex64 {
        let inv = 1.0 / w;
        let mut acc = C_ZERO;
        for (k, &a) in self.ak.iter().enumerate().rev() {
            acc = (acc - (k + 1) as f64 * a) * inv;
        }
        Complex64::new(1.0, 0.0) + acc * inv
    }

    /// Error unless `w` lies in the closed exterior `|w| >= gamma` (up to
    /// roundoff slack).
    pub fn check_in_domain(&self, w: Complex64) -> Result<()> {
        let r = w.norm();
        if r < self.gamma * (1.0 - 1e-12) {
            return Err(Error::OutsideDomain {
                modulus: r,
                min_modulus: self.gamma,
            });
        }
        Ok(())
    }

    /// `w = exp(rho + i theta)`.
    pub fn w_of(rho: f64, theta: f64) -> Complex64 {
        Complex64::from_polar(rho.exp(), theta)
    }

    /// Physical point for modified polar coordinates.
    pub fn point(&self, rho: f64, theta: f64) -> Complex64 {
        self.psi(Self::w_of(rho, theta))
    }

    /// Scale factor `h(rho, theta) = e^rho |psi'(e^(rho + i theta))|`.
    pub fn scale_factor(&self, rho: f64, theta: f64) -> f64 {
        rho.exp() * self.psi_prime(Self::w_of(rho, theta)).norm()
    }

    pub fn boundary_point(&self, theta: f64) -> Complex64 {
        self.psi(Complex64::from_polar(self.gamma, theta))
    }

    /// Outward unit normal at the boundary point with angle `theta`.
    pub fn boundary_normal(&self, theta: f64) -> Complex64 {
        let w = Complex64::from_polar(self.gamma, theta);
        let d = self.psi_prime(w);
        let v = Complex64::from_polar(1.0, theta) * d;
        v / v.norm()
    }

    /// The map as a Laurent series (powers `-K ..= 1`).
    pub fn as_laurent(&self) -> Laurent {
        let k = self.ak.len() as i64;
        let mut coeffs = vec![C_ZERO; (k + 2) as usize];
        for (i, &a) in self.ak.iter().enumerate() {
            coeffs[(k - 1 - i as i64) as usize] = a;
        }
        coeffs[k as usize] = self.a0;
        coeffs[(k + 1) as usize] = Complex64::new(1.0, 0.0);
        Laurent::from_coeffs(-k, coeffs)
    }
}

/// Proper crossing test for segments `a1a2` and `b1b2`.
fn segments_cross(a1: Complex64, a2: Complex64, b1: Complex64, b2: Complex64) -> bool {
    let side = |p: Complex64, q: Complex64, r: Complex64| -> f64 {
        (q.re - p.re) * (r.im - p.im) - (q.im - p.im) * (r.re - p.re)
    };
    let d1 = side(b1, b2, a1);
    let d2 = side(b1, b2, a2);
    let d3 = side(a1, a2, b1);
    let d4 = side(a1, a2, b2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_map_is_the_unit_circle() {
        let m = ConformalMap::new(1.0, C_ZERO, vec![]).unwrap();
        let z = m.boundary_point(0.7);
        assert_relative_eq!(z.norm(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(m.scale_factor(0.0, 0.3), 1.0, epsilon = 1e-14);
        let n = m.boundary_normal(0.7);
        assert!((n - Complex64::from_polar(1.0, 0.7)).norm() < 1e-14);
    }

    #[test]
    fn ellipse_semi_axes_match_coefficients() {
        // psi(w) = w + q/w maps the unit circle to an ellipse with semi-axes
        // 1 + q and 1 - q.
        let q = 0.4;
        let m = ConformalMap::new(1.0, C_ZERO, vec![c(q, 0.0)]).unwrap();
        let right = m.boundary_point(0.0);
        let top = m.boundary_point(std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(right.re, 1.0 + q, epsilon = 1e-14);
        assert_relative_eq!(top.im, 1.0 - q, epsilon = 1e-14);
    }

    #[test]
    fn psi_prime_matches_finite_differences() {
        let m = ConformalMap::new(
            1.0,
            c(0.1, -0.2),
            vec![c(0.25, 0.0), c(0.125, 0.05), c(0.1, -0.02)],
        )
        .unwrap();
        let w = c(1.4, 0.9);
        let h = 1e-6;
        let fd = (m.psi(w + c(h, 0.0)) - m.psi(w - c(h, 0.0))) / c(2.0 * h, 0.0);
        assert!((m.psi_prime(w) - fd).norm() < 1e-8);
    }

    #[test]
    fn laurent_form_agrees_with_direct_evaluation() {
        let m = ConformalMap::new(1.0, c(0.3, 0.1), vec![c(0.2, 0.0), c(0.0, 0.1)]).unwrap();
        let w = c(1.7, -0.4);
        assert!((m.as_laurent().eval(w) - m.psi(w)).norm() < 1e-13);
    }

    #[test]
    fn self_crossing_curve_is_rejected() {
        // w + 1/(2 w^3) traces four loops; well past the cusp threshold 1/3.
        let err = ConformalMap::new(1.0, C_ZERO, vec![C_ZERO, C_ZERO, c(0.5, 0.0)]).unwrap_err();
        match err {
            Error::NotSimpleCurve { .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn vanishing_derivative_is_rejected() {
        // w + 1/w collapses the circle onto a segment; psi' = 0 at w = 1.
        let err = ConformalMap::new(1.0, C_ZERO, vec![c(1.0, 0.0)]).unwrap_err();
        match err {
            Error::DegenerateMap { .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn nonpositive_radius_is_rejected() {
        assert!(ConformalMap::new(0.0, C_ZERO, vec![]).is_err());
        assert!(ConformalMap::new(-1.0, C_ZERO, vec![]).is_err());
    }

    #[test]
    fn domain_check_flags_points_inside() {
        let m = ConformalMap::new(1.0, C_ZERO, vec![]).unwrap();
        assert!(m.check_in_domain(c(0.5, 0.0)).is_err());
        assert!(m.check_in_domain(c(1.0, 0.0)).is_ok());
        assert!(m.check_in_domain(c(2.0, 1.0)).is_ok());
    }
}
