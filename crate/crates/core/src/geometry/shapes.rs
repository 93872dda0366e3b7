//! Built-in inclusion shapes.
//!
//! All library shapes use conformal radius 1 and no translation; only the
//! negative-power coefficients differ. `ellipse:q` takes the `w + q/w`
//! family with a real or complex parameter, `|q| < 1`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::ConformalMap;
use crate::linalg::C_ZERO;

/// Names accepted by [`by_name`] without a parameter.
pub const SHAPE_NAMES: &[&str] = &["disk", "square", "fish", "kite", "spike"];

fn r(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Look up a shape by name. `ellipse:RE` or `ellipse:RE,IM` selects the
/// ellipse family.
pub fn by_name(name: &str) -> Result<ConformalMap> {
    let ak: Vec<Complex64> = match name {
        "disk" => vec![],
        "square" => vec![C_ZERO, C_ZERO, r(0.1)],
        "fish" => vec![r(0.25), r(0.125), r(0.1)],
        "kite" => vec![
            r(0.1),
            r(0.25),
            r(-0.05),
            r(0.05),
            r(-0.04),
            r(0.02),
        ],
        "spike" => {
            let mut a = vec![C_ZERO; 9];
            a[8] = r(-0.1);
            a
        }
        other => {
            if let Some(param) = other.strip_prefix("ellipse:") {
                vec![parse_ellipse_param(param)?]
            } else {
                return Err(Error::UnknownShape(other.to_string()));
            }
        }
    };
    ConformalMap::new(1.0, C_ZERO, ak)
}

fn parse_ellipse_param(param: &str) -> Result<Complex64> {
    let mut parts = param.splitn(2, ',');
    let re: f64 = parts
        .next()
        .unwrap_or("")
        .trim()
        .parse()
        .map_err(|_| Error::UnknownShape(format!("ellipse:{param}")))?;
    let im: f64 = match parts.next() {
        Some(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::UnknownShape(format!("ellipse:{param}")))?,
        None => 0.0,
    };
    let q = Complex64::new(re, im);
    if q.norm() >= 1.0 {
        return Err(Error::BadMap(format!(
            "ellipse parameter must satisfy |q| < 1, got |q| = {}",
            q.norm()
        )));
    }
    Ok(q)
}
