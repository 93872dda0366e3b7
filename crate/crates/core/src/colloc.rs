//! Collocation point generation in conformal coordinates.
//!
//! Exterior points are images of a uniform grid in the modified polar
//! rectangle (rho0, ln L] x (0, 2pi]; boundary points sit on the curve at the
//! same angular grid with outward normals and +/- delta offsets; interior
//! points divide each origin ray uniformly and are kept only if they pass a
//! winding test (the ray rule can emit exterior points for non-star-shaped
//! curves).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::ConformalMap;

/// Desk-scale counts (n_ext, n_int, n_bd): small enough to train on one core.
pub const DESK_COUNTS: (usize, usize, usize) = (2000, 500, 500);
/// Full-scale counts used for the reference experiments.
pub const PAPER_COUNTS: (usize, usize, usize) = (21_808, 6_000, 6_000);
/// Default outer radius bound for the exterior annulus.
pub const DEFAULT_L: f64 = 5.0;

/// Default boundary offset distance for a given map.
pub fn default_delta(map: &ConformalMap) -> f64 {
    1e-2 * map.gamma()
}

/// One exterior collocation point, in both conformal and physical coordinates.
#[derive(Debug, Clone, Copy)]
pub struct ExtPoint {
    pub rho: f64,
    pub theta: f64,
    /// Preimage w = e^{rho + i theta}.
    pub w: Complex64,
    /// Physical point z = Psi(w).
    pub z: Complex64,
}

/// One boundary collocation point with its outward unit normal.
#[derive(Debug, Clone, Copy)]
pub struct BdPoint {
    pub theta: f64,
    pub z: Complex64,
    pub normal: Complex64,
}

#[derive(Debug, Clone)]
pub struct CollocationSet {
    pub ext: Vec<ExtPoint>,
    pub interior: Vec<Complex64>,
    pub bd: Vec<BdPoint>,
    /// bd[j].z + delta * normal (exterior side), same length as bd.
    pub bd_plus: Vec<Complex64>,
    /// bd[j].z - delta * normal (interior side), same length as bd.
    pub bd_minus: Vec<Complex64>,
    pub delta: f64,
    pub l: f64,
    /// Ray-rule candidates rejected by the winding test.
    pub discarded_int: usize,
}

/// Even-odd crossing test against a closed polygon.
fn inside_polygon(poly: &[Complex64], p: Complex64) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a.im > p.im) != (b.im > p.im) {
            let t = (p.im - a.im) / (b.im - a.im);
            if p.re < a.re + t * (b.re - a.re) {
                inside = !inside;
            }
        }
    }
    inside
}

const POLY_SAMPLES: usize = 2048;

/// Image of a uniform modified-polar grid: `n_theta` columns on (0, 2pi],
/// enough rows on (rho0, ln l] to reach `n_ext` points, truncated row-major.
pub fn exterior_grid(
    map: &ConformalMap,
    n_ext: usize,
    n_theta: usize,
    l: f64,
) -> Result<Vec<ExtPoint>> {
    if n_ext == 0 || n_theta == 0 {
        return Err(Error::Config("exterior grid counts must be >= 1".into()));
    }
    if !(l.is_finite() && l > map.gamma()) {
        return Err(Error::Config(format!(
            "outer radius bound L = {l} must exceed the conformal radius {}",
            map.gamma()
        )));
    }
    let rho0 = map.gamma().ln();
    let rho1 = l.ln();
    let n_rho = n_ext.div_ceil(n_theta);
    let mut ext = Vec::with_capacity(n_ext);
    'rows: for i in 0..n_rho {
        let rho = rho0 + (rho1 - rho0) * (i as f64 + 1.0) / n_rho as f64;
        let r = rho.exp();
        for j in 0..n_theta {
            if ext.len() == n_ext {
                break 'rows;
            }
            let theta = 2.0 * std::f64::consts::PI * (j as f64 + 1.0) / n_theta as f64;
            let w = Complex64::from_polar(r, theta);
            ext.push(ExtPoint { rho, theta, w, z: map.psi(w) });
        }
    }
    Ok(ext)
}

/// Generate the full collocation set for one shape.
///
/// `l` bounds the physical radius of exterior points (the grid covers
/// rho in (rho0, ln l]); `delta` is the absolute boundary offset distance.
pub fn generate(
    map: &ConformalMap,
    counts: (usize, usize, usize),
    l: f64,
    delta: f64,
) -> Result<CollocationSet> {
    let (n_ext, n_int, n_bd) = counts;
    if n_ext == 0 || n_int == 0 || n_bd == 0 {
        return Err(Error::Config("collocation counts must all be >= 1".into()));
    }
    if !(l.is_finite() && l > map.gamma()) {
        return Err(Error::Config(format!(
            "outer radius bound L = {l} must exceed the conformal radius {}",
            map.gamma()
        )));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Config(format!("offset delta = {delta} must be positive")));
    }

    // Boundary grid: theta_j = 2*pi*(j+1)/n_bd covers (0, 2pi].
    let mut bd = Vec::with_capacity(n_bd);
    let mut bd_plus = Vec::with_capacity(n_bd);
    let mut bd_minus = Vec::with_capacity(n_bd);
    for j in 0..n_bd {
        let theta = 2.0 * std::f64::consts::PI * (j as f64 + 1.0) / n_bd as f64;
        let z = map.boundary_point(theta);
        let normal = map.boundary_normal(theta);
        bd_plus.push(z + delta * normal);
        bd_minus.push(z - delta * normal);
        bd.push(BdPoint { theta, z, normal });
    }

    // Polygon for the winding tests, at the same resolution as the map's own
    // simplicity check.
    let poly: Vec<Complex64> = (0..POLY_SAMPLES)
        .map(|i| map.boundary_point(2.0 * std::f64::consts::PI * i as f64 / POLY_SAMPLES as f64))
        .collect();

    for (j, p) in bd.iter().enumerate() {
        if inside_polygon(&poly, bd_plus[j]) || !inside_polygon(&poly, bd_minus[j]) {
            return Err(Error::OffsetTooLarge { delta, theta: p.theta });
        }
    }

    let ext = exterior_grid(map, n_ext, n_bd, l)?;

    // Interior: k points per boundary ray at |x| = |z| * i/(k+1), arg(x) = arg(z).
    let k = n_int.div_ceil(n_bd);
    let mut interior = Vec::with_capacity(n_int);
    let mut discarded = 0usize;
    let mut candidates = 0usize;
    'rays: for p in &bd {
        let r_bd = p.z.norm();
        if r_bd == 0.0 {
            continue; // boundary touches the origin; no ray to divide
        }
        let dir = p.z / r_bd;
        for i in 1..=k {
            if candidates == n_int {
                break 'rays;
            }
            candidates += 1;
            let x = dir * (r_bd * i as f64 / (k + 1) as f64);
            if inside_polygon(&poly, x) {
                interior.push(x);
            } else {
                discarded += 1;
            }
        }
    }
    if interior.is_empty() {
        return Err(Error::EmptyPointSet("interior collocation"));
    }

    Ok(CollocationSet {
        ext,
        interior,
        bd,
        bd_plus,
        bd_minus,
        delta,
        l,
        discarded_int: discarded,
    })
}
