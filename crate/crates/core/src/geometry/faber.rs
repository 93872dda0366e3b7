//! Faber polynomials and Grunsky coefficients.
//!
//! For an exterior map `psi` the Faber polynomial `F_m` is the polynomial
//! part of `psi(w)^m`'s inverse image: the unique monic degree-`m` polynomial
//! with `F_m(psi(w)) = w^m + (negative powers of w)`. The negative-power
//! coefficients are the Grunsky coefficients `c_mn`:
//!
//! `F_m(psi(w)) = w^m + sum_n c_mn w^-n`.
//!
//! `F_m` is computed from the generating function
//! `psi'(w)/(psi(w) - z) = sum_m F_m(z) w^(-m-1)` by power-series division
//! (`faber_via_series`); a direct three-term-style recursion is kept as an
//! independent code path for cross-checking (`faber_via_recursion`). Grunsky
//! coefficients come from composing `F_m` with the map's Laurent series at a
//! working depth chosen so every retained coefficient is exact: one Horner
//! multiplication by `psi` consults at most one power below the deepest
//! retained one, so starting `m` powers deeper than needed suffices for a
//! degree-`m` polynomial.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::laurent::Laurent;
use crate::geometry::ConformalMap;
use crate::linalg::{CMatrix, C_ONE, C_ZERO};

/// Horner evaluation; coefficients ascending in degree.
pub fn poly_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = C_ZERO;
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

fn map_coeff(map: &ConformalMap, k: usize) -> Complex64 {
    if k == 0 {
        map.a0()
    } else if k <= map.order() {
        map.ak()[k - 1]
    } else {
        C_ZERO
    }
}

/// Faber polynomials `F_0 ..= F_m_max` by dividing the generating function's
/// numerator by its denominator as power series in `1/w` with
/// polynomial-in-`z` coefficients. Coefficient vectors are ascending in
/// degree.
pub fn faber_via_series(map: &ConformalMap, m_max: usize) -> Vec<Vec<Complex64>> {
    // In t = 1/w:  psi'(w)/(psi(w) - z) = t N(t)/D(t)  with
    //   D(t) = 1 + (a0 - z) t + sum_{k>=1} a_k t^(k+1),
    //   N(t) = 1 - sum_{k>=1} k a_k t^(k+1),
    // so F_m is the t^m coefficient of N/D.
    let a0 = map.a0();
    let ak = map.ak();
    let mut f: Vec<Vec<Complex64>> = Vec::with_capacity(m_max + 1);
    f.push(vec![C_ONE]);
    for m in 1..=m_max {
        let mut q = vec![C_ZERO; m + 1];
        if m >= 2 && m - 2 < ak.len() {
            q[0] = -((m - 1) as f64) * ak[m - 2];
        }
        // - d_1 q_{m-1} with d_1 = a0 - z
        for (i, &c) in f[m - 1].iter().enumerate() {
            q[i] -= a0 * c;
            q[i + 1] += c;
        }
        // - d_j q_{m-j} with d_j = a_{j-1} for j >= 2
        for k in 1..=ak.len().min(m.saturating_sub(1)) {
            let a = ak[k - 1];
            if a == C_ZERO {
                continue;
            }
            for (i, &c) in f[m - 1 - k].iter().enumerate() {
                q[i] -= a * c;
            }
        }
        f.push(q);
    }
    f
}

/// Faber polynomials by the recursion
/// `F_{m+1}(z) = z F_m(z) - sum_{k=0..m} a_k F_{m-k}(z) - m a_m`,
/// with `a_k = 0` beyond the map's order. Independent cross-check path for
/// `faber_via_series`.
pub fn faber_via_recursion(map: &ConformalMap, m_max: usize) -> Vec<Vec<Complex64>> {
    let mut f: Vec<Vec<Complex64>> = Vec::with_capacity(m_max + 1);
    f.push(vec![C_ONE]);
    for m in 0..m_max {
        let mut next = vec![C_ZERO; m + 2];
        for (i, &c) in f[m].iter().enumerate() {
            next[i + 1] += c;
        }
        for k in 0..=m {
            let a = map_coeff(map, k);
            if a == C_ZERO {
                continue;
            }
            for (i, &c) in f[m - k].iter().enumerate() {
                next[i] -= a * c;
            }
        }
        next[0] -= m as f64 * map_coeff(map, m);
        f.push(next);
    }
    f
}

/// The compositions `S_m = F_m(psi)` as Laurent series, by lifting the Faber
/// recursion into the w-domain:
/// `S_{m+1} = psi * S_m - sum_{k=0..m} a_k S_{m-k} - m a_m`, `S_0 = 1`.
///
/// Unlike evaluating the polynomial form of `F_m` at `psi` — whose
/// coefficients grow exponentially in `m` and cancel catastrophically — every
/// `S_m` has O(1) coefficients (the Grunsky inequality bounds `|c_mn|` by
/// `sqrt(m/n)`), so this stays accurate to roundoff at any order.
fn compositions(map: &ConformalMap, m_max: usize, bottom: i64) -> Vec<Laurent> {
    let psi = map.as_laurent();
    let mut s: Vec<Laurent> = Vec::with_capacity(m_max + 1);
    s.push(Laurent::constant(C_ONE));
    for m in 0..m_max {
        let mut next = s[m].mul_truncated(&psi, bottom);
        for k in 0..=m.min(map.order()) {
            next.axpy(-map_coeff(map, k), &s[m - k]);
        }
        next.add_scalar(-(m as f64) * map_coeff(map, m));
        s.push(next);
    }
    s
}

/// Faber polynomials together with the Grunsky block `c_mn`,
/// `1 <= m, n <= m_max`, for one map.
#[derive(Debug, Clone)]
pub struct FaberTable {
    map: ConformalMap,
    m_max: usize,
    polys: Vec<Vec<Complex64>>,
    grunsky: CMatrix,
    tail_max: f64,
    max_defect: f64,
}

impl FaberTable {
    /// Build the table. `tail_max` records the largest dropped coefficient
    /// magnitude `|c_mn|` in the window `m_max < n <= m_max + K` (K the map
    /// order); `max_defect` the largest relative violation of the defining
    /// property among the exactly-cancelling low powers.
    pub fn build(map: &ConformalMap, m_max: usize) -> Self {
        assert!(m_max >= 1, "need at least one Faber polynomial");
        let polys = faber_via_series(map, m_max);
        let k = map.order();
        let n_window = m_max + k;
        // One power of look-below is consumed per recursion step, so this
        // bottom keeps every S_m exact down to w^(-n_window).
        let bottom = -((n_window + m_max) as i64);
        let compositions = compositions(map, m_max, bottom);
        let mut grunsky = CMatrix::zeros(m_max, m_max);
        let mut tail_max = 0.0f64;
        let mut max_defect = 0.0f64;
        for (m, s) in compositions.iter().enumerate().skip(1) {
            let mut scale = 1.0f64;
            for p in s.min_pow()..=s.max_pow() {
                scale = scale.max(s.coeff(p).norm());
            }
            let mut defect = (s.coeff(m as i64) - C_ONE).norm();
            for j in 0..m {
                defect = defect.max(s.coeff(j as i64).norm());
            }
            max_defect = max_defect.max(defect / scale);
            for n in 1..=m_max {
                grunsky[(m - 1, n - 1)] = s.coeff(-(n as i64));
            }
            for n in (m_max + 1)..=n_window {
                tail_max = tail_max.max(s.coeff(-(n as i64)).norm());
            }
        }
        Self {
            map: map.clone(),
            m_max,
            polys,
            grunsky,
            tail_max,
            max_defect,
        }
    }

    /// Like [`build`](Self::build) but errors when the dropped Grunsky tail
    /// exceeds `tail_tol` relative to the largest retained coefficient.
    /// Strongly non-circular shapes have slowly decaying Grunsky rows, so a
    /// strict tolerance at a small `m_max` is expected to fail; callers pick
    /// the policy.
    pub fn build_checked(map: &ConformalMap, m_max: usize, tail_tol: f64) -> Result<Self> {
        let table = Self::build(map, m_max);
        let leading = table.grunsky.max_abs().max(1.0);
        if table.tail_max > tail_tol * leading {
            return Err(Error::InsufficientTruncation {
                tail: table.tail_max,
                leading,
                tol: tail_tol,
            });
        }
        Ok(table)
    }

    pub fn map(&self) -> &ConformalMap {
        &self.map
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// Grunsky block as a matrix, `(m-1, n-1)` holding `c_mn`.
    pub fn grunsky(&self) -> &CMatrix {
        &self.grunsky
    }

    /// `c_mn` with 1-based mode indices.
    pub fn grunsky_entry(&self, m: usize, n: usize) -> Complex64 {
        self.grunsky[(m - 1, n - 1)]
    }

    /// Coefficients of `F_m`, ascending in degree.
    pub fn faber_poly(&self, m: usize) -> &[Complex64] {
        &self.polys[m]
    }

    pub fn faber_eval(&self, m: usize, z: Complex64) -> Complex64 {
        poly_eval(&self.polys[m], z)
    }

    pub fn tail_max(&self) -> f64 {
        self.tail_max
    }

    pub fn max_defect(&self) -> f64 {
        self.max_defect
    }
}
