//! Truncated mode-coupling system for the scattering coefficients.
//!
//! For a background field with Faber coefficients `alpha_m` the exterior
//! perturbation is `Re sum_n S_n w^-n`. The scattering matrix `s` solves
//!
//! `alpha A1 + conj(alpha) conj(A2) + conj(s) conj(B1) + s B2 = 0`
//!
//! with `alpha = diag(alpha_m)`, and is given in closed form by
//!
//! `s = -(alpha T1 + conj(alpha) T2)`,
//! `T1 = (A1 - A2 Q) Y^-1`, `T2 = (conj(A2) - conj(A1) Q) Y^-1`,
//! `Q = conj(B2)^-1 conj(B1)`, `Y = B2 - B1 Q`.
//!
//! The four blocks mix the Grunsky coefficients of the shape, the
//! conductivity contrast, and the density's Fourier coefficients through the
//! convolution blocks `P+_{mn} = p_{m+n} gamma^(m+n)` and `P-_{mn} =
//! p_{m-n} gamma^(m-n)`. Everything that depends only on the shape and the
//! conductivities is cached at construction; assembling for a new density is
//! a handful of N x N multiplications.

use num_complex::Complex64;

use crate::analytic::density::InterfaceDensity;
use crate::analytic::field::LinearField;
use crate::error::{Error, Result};
use crate::geometry::faber::FaberTable;
use crate::geometry::ConformalMap;
use crate::linalg::{condition_one, CMatrix, C_ZERO};

#[derive(Debug, Clone)]
pub struct Blocks {
    pub a1: CMatrix,
    pub a2: CMatrix,
    pub b1: CMatrix,
    pub b2: CMatrix,
}

/// Singular values of the stacked first rows of `T1`, `T2`; their ratio
/// quantifies the linear independence hypothesis under which single-field
/// neutrality extends to every direction.
#[derive(Debug, Clone, Copy)]
pub struct Independence {
    pub sigma_large: f64,
    pub sigma_small: f64,
}

impl Independence {
    pub fn ratio(&self) -> f64 {
        if self.sigma_large == 0.0 {
            0.0
        } else {
            self.sigma_small / self.sigma_large
        }
    }
}

/// Condition estimates for the linear solves hiding inside a scattering
/// solution.
#[derive(Debug, Clone, Copy)]
pub struct Diagnostics {
    pub cond_coupling: f64,
    pub cond_b2bar: f64,
    pub cond_y: f64,
}

pub struct SeriesSolver {
    faber: FaberTable,
    sigma_c: f64,
    sigma_m: f64,
    n: usize,
    /// gamma^(i+1) for row/column scalings.
    gpos: Vec<Complex64>,
    gneg: Vec<Complex64>,
    /// `(sigma_c - sigma_m) I + 2 sigma_m K` with
    /// `K = (I - g^-2N conj(C) g^-2N C)^-1`.
    w_mat: CMatrix,
    /// `2 sigma_m K g^-2N conj(C)`.
    e_mat: CMatrix,
    cond_coupling: f64,
}

impl SeriesSolver {
    pub fn new(map: &ConformalMap, sigma_c: f64, sigma_m: f64, n: usize) -> Result<Self> {
        if !(sigma_c.is_finite() && sigma_c > 0.0 && sigma_m.is_finite() && sigma_m > 0.0) {
            return Err(Error::Config(format!(
                "conductivities must be positive and finite, got sigma_c={sigma_c}, sigma_m={sigma_m}"
            )));
        }
        if n == 0 {
            return Err(Error::Config("truncation size must be at least 1".into()));
        }
        let faber = FaberTable::build(map, n);
        let gamma = map.gamma();
        let gpos: Vec<Complex64> = (1..=n)
            .map(|i| Complex64::new(gamma.powi(i as i32), 0.0))
            .collect();
        let gneg: Vec<Complex64> = (1..=n)
            .map(|i| Complex64::new(gamma.powi(-(i as i32)), 0.0))
            .collect();
        let g2neg: Vec<Complex64> = (1..=n)
            .map(|i| Complex64::new(gamma.powi(-2 * i as i32), 0.0))
            .collect();
        let c = faber.grunsky();
        // coupling = I - g^-2N conj(C) g^-2N C
        let t1 = c.diag_left(&g2neg);
        let t2 = c.conj().diag_left(&g2neg);
        let coupling = CMatrix::identity(n).sub(&t2.matmul(&t1));
        let cond_coupling = condition_one(&coupling).map_err(|_| Error::SingularSystem {
            what: "mode-coupling operator",
            cond: f64::INFINITY,
        })?;
        let k = coupling.inverse()?;
        let w_mat = k
            .scale(Complex64::new(2.0 * sigma_m, 0.0))
            .add(&CMatrix::identity(n).scale(Complex64::new(sigma_c - sigma_m, 0.0)));
        let e_mat = k
            .scale(Complex64::new(2.0 * sigma_m, 0.0))
            .matmul(&c.conj().diag_left(&g2neg));
        Ok(Self {
            faber,
            sigma_c,
            sigma_m,
            n,
            gpos,
            gneg,
            w_mat,
            e_mat,
            cond_coupling,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn map(&self) -> &ConformalMap {
        self.faber.map()
    }

    pub fn faber(&self) -> &FaberTable {
        &self.faber
    }

    pub fn sigma(&self) -> (f64, f64) {
        (self.sigma_c, self.sigma_m)
    }

    /// Assemble the four blocks for a density.
    pub fn assemble(&self, density: &InterfaceDensity) -> Blocks {
        debug_assert!(
            (density.gamma() - self.map().gamma()).abs() < 1e-12,
            "density and map disagree on the conformal radius"
        );
        let n = self.n;
        let ds = Complex64::new(self.sigma_c - self.sigma_m, 0.0);
        let prod = Complex64::new(self.sigma_c * self.sigma_m, 0.0);
        let c = self.faber.grunsky();

        let pplus = CMatrix::from_fn(n, n, |i, j| density.weighted_coeff((i + j + 2) as i64));
        let pminus = CMatrix::from_fn(n, n, |i, j| density.weighted_coeff(i as i64 - j as i64));

        // Row/column-scaled variants used by several blocks.
        let plus_low = pplus.diag_left(&self.gneg).diag_right(&self.gpos);
        let minus_low = pminus.diag_left(&self.gneg).diag_right(&self.gpos);
        let plus_conj_low = pplus.conj().diag_left(&self.gneg).diag_right(&self.gpos);
        let minus_conj_low = pminus.conj().diag_left(&self.gneg).diag_right(&self.gpos);

        let mut a1 = pplus
            .conj()
            .diag_left(&self.gpos)
            .diag_right(&self.gpos)
            .scale(ds)
            .add(&c.matmul(&minus_low).scale(ds));
        for i in 0..n {
            for j in 0..n {
                a1[(i, j)] += prod * c[(i, j)] * (j + 1) as f64;
            }
        }

        let mut a2 = pminus
            .conj()
            .diag_left(&self.gpos)
            .diag_right(&self.gpos)
            .scale(ds)
            .add(&c.matmul(&plus_low).scale(ds));
        for i in 0..n {
            let g2 = self.gpos[i] * self.gpos[i];
            a2[(i, i)] -= prod * g2 * (i + 1) as f64;
        }

        let b1 = self
            .w_mat
            .matmul(&plus_low)
            .add(&self.e_mat.matmul(&minus_conj_low));

        let mut b2 = self
            .w_mat
            .matmul(&minus_low)
            .add(&self.e_mat.matmul(&plus_conj_low));
        for i in 0..n {
            b2[(i, i)] += prod * (i + 1) as f64;
        }

        Blocks { a1, a2, b1, b2 }
    }

    /// The solution factors `T1`, `T2` with `s = -(alpha T1 + conj(alpha)
    /// T2)`.
    pub fn tildes(&self, density: &InterfaceDensity) -> Result<(CMatrix, CMatrix)> {
        let blocks = self.assemble(density);
        let (q, y_lu) = self.reduction(&blocks)?;
        let t1 = y_lu_right_solve(&blocks.a1.sub(&blocks.a2.matmul(&q)), &y_lu);
        let t2 = y_lu_right_solve(
            &blocks.a2.conj().sub(&blocks.a1.conj().matmul(&q)),
            &y_lu,
        );
        Ok((t1, t2))
    }

    fn reduction(&self, blocks: &Blocks) -> Result<(CMatrix, crate::linalg::Lu)> {
        let b2c_lu = blocks.b2.conj().lu().map_err(|_| Error::SingularSystem {
            what: "conjugate flux block",
            cond: f64::INFINITY,
        })?;
        let q = b2c_lu.solve_matrix(&blocks.b1.conj());
        let y = blocks.b2.sub(&blocks.b1.matmul(&q));
        let y_lu = y.lu().map_err(|_| Error::SingularSystem {
            what: "reduced flux block",
            cond: f64::INFINITY,
        })?;
        Ok((q, y_lu))
    }

    /// First rows of `T1`, `T2` — everything a linear background field can
    /// see. Cheaper than full `tildes` (two triangular row solves instead of
    /// 2N column solves).
    pub fn first_rows(&self, density: &InterfaceDensity) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let blocks = self.assemble(density);
        let (q, y_lu) = self.reduction(&blocks)?;
        let n = self.n;
        let mut r1: Vec<Complex64> = (0..n).map(|j| blocks.a1[(0, j)]).collect();
        let mut r2: Vec<Complex64> = (0..n).map(|j| blocks.a2[(0, j)].conj()).collect();
        for j in 0..n {
            let mut acc1 = C_ZERO;
            let mut acc2 = C_ZERO;
            for k in 0..n {
                acc1 += blocks.a2[(0, k)] * q[(k, j)];
                acc2 += blocks.a1[(0, k)].conj() * q[(k, j)];
            }
            r1[j] -= acc1;
            r2[j] -= acc2;
        }
        y_lu.solve_left_in_place(&mut r1);
        y_lu.solve_left_in_place(&mut r2);
        Ok((r1, r2))
    }

    /// Full scattering matrix for Faber coefficients `alpha`.
    pub fn scattering(&self, density: &InterfaceDensity, alpha: &[Complex64]) -> Result<CMatrix> {
        if alpha.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "background-field coefficient vector",
                got: alpha.len(),
                expected: self.n,
            });
        }
        let (t1, t2) = self.tildes(density)?;
        let mut s = CMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                s[(i, j)] = -(alpha[i] * t1[(i, j)] + alpha[i].conj() * t2[(i, j)]);
            }
        }
        Ok(s)
    }

    /// Combined scattering row `S_n = sum_m s_mn` for a linear field: the
    /// exterior perturbation is `Re sum_n S_n w^-n`.
    pub fn scattering_row(
        &self,
        density: &InterfaceDensity,
        field: &LinearField,
    ) -> Result<Vec<Complex64>> {
        let (r1, r2) = self.first_rows(density)?;
        let a = field.alpha1();
        Ok(r1
            .iter()
            .zip(r2.iter())
            .map(|(x, y)| -(a * x + a.conj() * y))
            .collect())
    }

    /// Max-entry residual of the defining identity for a computed `s`.
    pub fn residual_max(
        &self,
        density: &InterfaceDensity,
        alpha: &[Complex64],
        s: &CMatrix,
    ) -> f64 {
        let blocks = self.assemble(density);
        let n = self.n;
        let mut lhs = s.matmul(&blocks.b2).add(&s.conj().matmul(&blocks.b1.conj()));
        for i in 0..n {
            for j in 0..n {
                lhs[(i, j)] += alpha[i] * blocks.a1[(i, j)] + alpha[i].conj() * blocks.a2[(i, j)].conj();
            }
        }
        lhs.max_abs()
    }

    /// Independence of the stacked first rows, via the 2x2 Gram matrix's
    /// eigenvalues.
    pub fn independence(&self, density: &InterfaceDensity) -> Result<Independence> {
        let (r1, r2) = self.first_rows(density)?;
        Ok(stacked_singular_values(&r1, &r2))
    }

    /// Condition estimates for the solves behind `tildes`.
    pub fn diagnose(&self, density: &InterfaceDensity) -> Result<Diagnostics> {
        let blocks = self.assemble(density);
        let cond_b2bar = condition_one(&blocks.b2.conj())?;
        let b2c_lu = blocks.b2.conj().lu()?;
        let q = b2c_lu.solve_matrix(&blocks.b1.conj());
        let y = blocks.b2.sub(&blocks.b1.matmul(&q));
        let cond_y = condition_one(&y)?;
        Ok(Diagnostics {
            cond_coupling: self.cond_coupling,
            cond_b2bar,
            cond_y,
        })
    }
}

/// Solve `X Y = R` for every row of `R` given the LU factors of `Y`.
fn y_lu_right_solve(r: &CMatrix, y_lu: &crate::linalg::Lu) -> CMatrix {
    let n = r.rows();
    let mut out = r.clone();
    let mut row = vec![C_ZERO; r.cols()];
    for i in 0..n {
        row.copy_from_slice(out.row(i));
        y_lu.solve_left_in_place(&mut row);
        for (j, v) in row.iter().enumerate() {
            out[(i, j)] = *v;
        }
    }
    out
}

/// Singular values of the 2 x N matrix with rows `r1`, `r2`.
pub fn stacked_singular_values(r1: &[Complex64], r2: &[Complex64]) -> Independence {
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
    };
    let g11 = dot(r1, r1).re;
    let g22 = dot(r2, r2).re;
    let g12 = dot(r1, r2);
    let tr = g11 + g22;
    let det = (g11 * g22 - g12.norm_sqr()).max(0.0);
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = 0.5 * (tr - disc).max(0.0);
    Independence {
        sigma_large: l1.sqrt(),
        sigma_small: l2.sqrt(),
    }
}
