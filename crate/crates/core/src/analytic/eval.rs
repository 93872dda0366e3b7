//! Exterior field evaluation and neutrality metrics.
//!
//! Once the scattering row `S` for a linear field is known, the exterior
//! solution is `u_p(z) = H(z) + Re sum_n S_n w^-n` with `z = psi(w)`, so the
//! perturbation is a plain Horner sum in `1/w` — no re-inversion of the map
//! is ever needed as long as points carry their `w` coordinate.

use num_complex::Complex64;

use crate::analytic::field::LinearField;
use crate::geometry::ConformalMap;
use crate::par;

/// `Re sum_n S_n w^-n`.
pub fn perturbation(row: &[Complex64], w: Complex64) -> f64 {
    let inv = 1.0 / w;
    let mut acc = Complex64::new(0.0, 0.0);
    for &s in row.iter().rev() {
        acc = (acc + s) * inv;
    }
    acc.re
}

/// Analytic exterior solution at `w`.
pub fn exterior_value(
    map: &ConformalMap,
    field: &LinearField,
    row: &[Complex64],
    w: Complex64,
) -> f64 {
    field.value(map.psi(w)) + perturbation(row, w)
}

/// Mean squared perturbation over exterior points (the field-neutrality
/// metric).
pub fn p_neutral(row: &[Complex64], ext_w: &[Complex64]) -> f64 {
    assert!(!ext_w.is_empty(), "empty exterior point set");
    par::sum_f64(ext_w, |w| {
        let d = perturbation(row, *w);
        d * d
    }) / ext_w.len() as f64
}

/// Largest absolute perturbation over exterior points.
pub fn sup_perturbation(row: &[Complex64], ext_w: &[Complex64]) -> f64 {
    ext_w
        .iter()
        .map(|w| perturbation(row, *w).abs())
        .fold(0.0, f64::max)
}

/// Mean squared difference between a trained exterior solution (given as
/// values at the same points) and the analytic one.
pub fn mean_sq_error(u_nn: &[f64], u_p: &[f64]) -> f64 {
    assert_eq!(u_nn.len(), u_p.len());
    assert!(!u_nn.is_empty());
    let pairs: Vec<(f64, f64)> = u_nn.iter().copied().zip(u_p.iter().copied()).collect();
    par::sum_f64(&pairs, |(a, b)| {
        let d = a - b;
        d * d
    }) / u_nn.len() as f64
}

/// Largest absolute difference between two solution samples.
pub fn sup_error(u_nn: &[f64], u_p: &[f64]) -> f64 {
    assert_eq!(u_nn.len(), u_p.len());
    u_nn.iter()
        .zip(u_p.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}
