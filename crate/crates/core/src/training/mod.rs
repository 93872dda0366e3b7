//! CoCo-PINN and classical-PINN training: loss assembly, full-batch Adam
//! loop, and credibility evaluation against the analytic solver.
//!
//! Two networks approximate the potential inside and outside the inclusion;
//! the interface function is either a truncated coefficient vector trained
//! directly (coco) or a third network over the boundary angle (classical).
//! Loss and gradient contributions are reduced per collocation point with the
//! deterministic chunked reductions from `par`, so a (config, seed) pair
//! reproduces a run bit-for-bit at any thread count.

pub mod studies;

use std::cell::RefCell;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{eval, InterfaceDensity, LinearField, SeriesSolver};
use crate::colloc::{self, CollocationSet};
use crate::error::{Error, Result};
use crate::geometry::ConformalMap;
use crate::nn::{AdamState, Jet, Mlp, PointEval, Workspace, WIDTHS};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Coco,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub w5: f64,
    pub eps: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        // neutrality is the design target, hence the heavier w4
        LossWeights { w1: 1.0, w2: 1.0, w3: 1.0, w4: 10.0, w5: 1.0, eps: 1e-6 }
    }
}

impl LossWeights {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("w1", self.w1),
            ("w2", self.w2),
            ("w3", self.w3),
            ("w4", self.w4),
            ("w5", self.w5),
            ("eps", self.eps),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("loss weight {name} = {v} must be >= 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub mode: Mode,
    pub sigma_c: f64,
    pub sigma_m: f64,
    pub iterations: usize,
    pub lr_pinn: f64,
    pub lr_inv: f64,
    pub eta: f64,
    pub seed: u64,
    /// Initial interface value (coco: p0; classical: output bias).
    pub init_p0: f64,
    pub weights: LossWeights,
    pub counts: (usize, usize, usize),
    pub l: f64,
    /// Boundary offset; `None` means 1e-2 * gamma.
    pub delta: Option<f64>,
    /// Background field H = a*x1 + b*x2.
    pub field: (f64, f64),
    /// Trainable density order in coco mode.
    pub density_order: usize,
}

impl TrainConfig {
    /// Desk-scale preset: small enough to train on one core in minutes.
    /// The schedule runs hotter than the full-scale one to compensate for
    /// the 5x shorter iteration budget.
    pub fn desk() -> Self {
        TrainConfig {
            mode: Mode::Coco,
            sigma_c: 5.0,
            sigma_m: 1.0,
            iterations: 5000,
            lr_pinn: 2e-3,
            lr_inv: 1e-2,
            eta: 0.8,
            seed: 0,
            init_p0: 5.0,
            weights: LossWeights::default(),
            counts: colloc::DESK_COUNTS,
            l: colloc::DEFAULT_L,
            delta: None,
            field: (1.0, 0.0),
            density_order: 20,
        }
    }

    /// Full-scale preset matching the reference experiments.
    pub fn paper_scale() -> Self {
        TrainConfig {
            iterations: 25_000,
            lr_pinn: 1e-3,
            lr_inv: 1e-3,
            eta: 0.7,
            counts: colloc::PAPER_COUNTS,
            ..Self::desk()
        }
    }

    fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        for (name, v) in [
            ("sigma_c", self.sigma_c),
            ("sigma_m", self.sigma_m),
            ("lr_pinn", self.lr_pinn),
            ("lr_inv", self.lr_inv),
            ("eta", self.eta),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
        }
        if !self.init_p0.is_finite() {
            return Err(Error::Config("init_p0 must be finite".into()));
        }
        Ok(())
    }
}

/// The trainable interface representation.
#[derive(Debug, Clone)]
pub enum Inverse {
    /// Weighted density coefficients, trained directly.
    Coco(InterfaceDensity),
    /// Network over the boundary angle, input (cos theta, sin theta).
    Classical(Mlp),
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LossBreakdown {
    pub pde_int: f64,
    pub pde_ext: f64,
    pub bd1: f64,
    pub bd2: f64,
    pub neutral: f64,
    pub positivity: f64,
    pub reg: f64,
    /// Weighted sum of every term including the regularizer.
    pub total: f64,
}

impl LossBreakdown {
    fn close(mut self) -> Result<Self> {
        self.total = self.pde_int
            + self.pde_ext
            + self.bd1
            + self.bd2
            + self.neutral
            + self.positivity
            + self.reg;
        for (name, v) in [
            ("pde_int", self.pde_int),
            ("pde_ext", self.pde_ext),
            ("bd1", self.bd1),
            ("bd2", self.bd2),
            ("neutral", self.neutral),
            ("positivity", self.positivity),
            ("reg", self.reg),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite { context: format!("loss term {name}"), value: v });
            }
        }
        Ok(self)
    }
}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub config: TrainConfig,
    pub u_int: Mlp,
    pub u_ext: Mlp,
    pub inverse: Inverse,
    pub colloc: CollocationSet,
    pub trace: Vec<LossBreakdown>,
    pub diverged: bool,
}

// ---------------------------------------------------------------------------
// Loss evaluation

/// Static per-point data shared by every loss evaluation of one run.
struct Evaluator<'a> {
    colloc: &'a CollocationSet,
    wts: LossWeights,
    sigma_c: f64,
    sigma_m: f64,
    /// H at exterior points.
    ext_h: Vec<f64>,
    /// Scale factor h(rho0, theta_j) at boundary points.
    h_bd: Vec<f64>,
    /// cos(k theta_j), sin(k theta_j) for k = 1..=order, flat [j*order + k-1].
    cos_tab: Vec<f64>,
    sin_tab: Vec<f64>,
    /// gamma^k for k = 1..=order.
    gamma_pows: Vec<f64>,
    gamma: f64,
    order: usize,
    idx_ext: Vec<usize>,
    idx_int: Vec<usize>,
    idx_bd: Vec<usize>,
}

impl<'a> Evaluator<'a> {
    fn new(
        map: &ConformalMap,
        colloc: &'a CollocationSet,
        wts: LossWeights,
        sigma_c: f64,
        sigma_m: f64,
        field: &LinearField,
        order: usize,
    ) -> Self {
        let ext_h = colloc.ext.iter().map(|p| field.value(p.z)).collect();
        let rho0 = map.rho0();
        let h_bd = colloc.bd.iter().map(|p| map.scale_factor(rho0, p.theta)).collect();
        let nb = colloc.bd.len();
        let mut cos_tab = vec![0.0; nb * order];
        let mut sin_tab = vec![0.0; nb * order];
        for (j, p) in colloc.bd.iter().enumerate() {
            for k in 1..=order {
                cos_tab[j * order + k - 1] = (k as f64 * p.theta).cos();
                sin_tab[j * order + k - 1] = (k as f64 * p.theta).sin();
            }
        }
        let gamma = map.gamma();
        let gamma_pows = (1..=order).map(|k| gamma.powi(k as i32)).collect();
        Evaluator {
            colloc,
            wts,
            sigma_c,
            sigma_m,
            ext_h,
            h_bd,
            cos_tab,
            sin_tab,
            gamma_pows,
            gamma,
            order,
            idx_ext: (0..colloc.ext.len()).collect(),
            idx_int: (0..colloc.interior.len()).collect(),
            idx_bd: (0..nb).collect(),
        }
    }

    /// Physical interface value at boundary sample j for a coco coefficient
    /// vector (x[0] = p0, then Re/Im pairs).
    fn coco_p(&self, x: &[f64], j: usize) -> f64 {
        let mut v = x[0];
        for k in 1..=self.order {
            let re = x[2 * k - 1];
            let im = x[2 * k];
            v += 2.0
                * self.gamma_pows[k - 1]
                * (re * self.cos_tab[j * self.order + k - 1]
                    - im * self.sin_tab[j * self.order + k - 1]);
        }
        v / self.h_bd[j]
    }

    /// d(physical p at j)/d(coefficient i).
    fn coco_p_grad(&self, j: usize, i: usize) -> f64 {
        if i == 0 {
            1.0 / self.h_bd[j]
        } else {
            let k = i.div_ceil(2);
            let g = 2.0 * self.gamma_pows[k - 1] / self.h_bd[j];
            if i % 2 == 1 {
                g * self.cos_tab[j * self.order + k - 1]
            } else {
                -g * self.sin_tab[j * self.order + k - 1]
            }
        }
    }
}

fn inv_dim(inverse: &Inverse) -> usize {
    match inverse {
        Inverse::Coco(d) => 1 + 2 * d.order(),
        Inverse::Classical(net) => net.params().len(),
    }
}

fn coco_coeffs(d: &InterfaceDensity) -> Vec<f64> {
    let mut x = vec![0.0; 1 + 2 * d.order()];
    x[0] = d.p0();
    for (k, pk) in d.pk().iter().enumerate() {
        x[2 * k + 1] = pk.re;
        x[2 * k + 2] = pk.im;
    }
    x
}

fn coco_density(gamma: f64, x: &[f64]) -> Result<InterfaceDensity> {
    let pk = x[1..].chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
    InterfaceDensity::new(gamma, x[0], pk)
}

/// Regularizer and its gradient, appended onto `g_inv`.
fn reg_and_grad(wts: &LossWeights, gamma: f64, inverse: &Inverse, g_inv: &mut [f64]) -> f64 {
    let eps = wts.eps;
    match inverse {
        Inverse::Coco(d) => {
            let gg = gamma * gamma;
            let two_pi = 2.0 * std::f64::consts::PI;
            let x = coco_coeffs(d);
            let mut reg = two_pi * gg * x[0] * x[0];
            g_inv[0] += eps * 2.0 * two_pi * gg * x[0];
            for k in 1..=d.order() {
                let c = 2.0 * two_pi * gg * (1.0 + (k * k) as f64);
                reg += c * (x[2 * k - 1] * x[2 * k - 1] + x[2 * k] * x[2 * k]);
                g_inv[2 * k - 1] += eps * 2.0 * c * x[2 * k - 1];
                g_inv[2 * k] += eps * 2.0 * c * x[2 * k];
            }
            eps * reg
        }
        Inverse::Classical(net) => {
            // squared weights only; biases are exempt
            let widths = net.widths();
            let params = net.params();
            let mut reg = 0.0;
            let mut off = 0;
            for w in widths.windows(2) {
                let nw = w[0] * w[1];
                for i in off..off + nw {
                    reg += params[i] * params[i];
                    g_inv[i] += eps * 2.0 * params[i];
                }
                off += nw + w[1];
            }
            eps * reg
        }
    }
}

thread_local! {
    static TL_WS: RefCell<(Vec<usize>, Vec<Workspace>)> = const { RefCell::new((Vec::new(), Vec::new())) };
}

/// Borrow three per-thread workspaces matching `net`'s architecture.
fn with_workspaces<R>(net: &Mlp, f: impl FnOnce(&mut [Workspace]) -> R) -> R {
    TL_WS.with(|cell| {
        let mut guard = cell.borrow_mut();
        if guard.0 != net.widths() {
            guard.0 = net.widths().to_vec();
            guard.1 = (0..3).map(|_| net.workspace()).collect();
        }
        f(&mut guard.1)
    })
}

/// Gradients of the total loss with respect to the two potential networks
/// and the inverse parameters, in parameter order.
#[derive(Debug, Clone)]
pub struct GradSet {
    pub g_int: Vec<f64>,
    pub g_ext: Vec<f64>,
    pub g_inv: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    /// Fused loss + gradients, reduced deterministically over points.
    fn loss_and_grads(
        &self,
        u_int: &Mlp,
        u_ext: &Mlp,
        inverse: &Inverse,
    ) -> Result<(LossBreakdown, GradSet)> {
        assert_eq!(u_int.widths(), u_ext.widths());
        if let Inverse::Classical(p) = inverse {
            assert_eq!(p.widths(), u_ext.widths());
        }
        let np = u_ext.params().len();
        let ni = inv_dim(inverse);
        let (n_ext, n_int, n_bd) = (
            self.colloc.ext.len() as f64,
            self.colloc.interior.len() as f64,
            self.colloc.bd.len() as f64,
        );
        let w1e = self.wts.w1 / n_ext;
        let w1i = self.wts.w1 / n_int;
        let w2b = self.wts.w2 / n_bd;
        let w3b = self.wts.w3 / n_bd;
        let w4e = self.wts.w4 / n_ext;
        let (sc, sm) = (self.sigma_c, self.sigma_m);

        // exterior: PDE + neutrality terms, gradient for u_ext
        let ext_buf = par::sum_into(&self.idx_ext, 2 + np, |&i, buf| {
            let p = &self.colloc.ext[i];
            with_workspaces(u_ext, |ws| {
                let e = u_ext.forward([p.z.re, p.z.im], &mut ws[0]);
                let sl = sm * e.lap;
                buf[0] += sl * sl;
                let diff = e.u - self.ext_h[i];
                buf[1] += diff * diff;
                let c_lap = 2.0 * w1e * sm * sl;
                let cot: Jet = [2.0 * w4e * diff, 0.0, 0.0, c_lap, c_lap];
                u_ext.backward(&mut ws[0], cot, &mut buf[2..]);
            });
        });

        // interior: PDE term, gradient for u_int
        let int_buf = par::sum_into(&self.idx_int, 1 + np, |&i, buf| {
            let z = self.colloc.interior[i];
            with_workspaces(u_int, |ws| {
                let e = u_int.forward([z.re, z.im], &mut ws[0]);
                let sl = sc * e.lap;
                buf[0] += sl * sl;
                let c_lap = 2.0 * w1i * sc * sl;
                let cot: Jet = [0.0, 0.0, 0.0, c_lap, c_lap];
                u_int.backward(&mut ws[0], cot, &mut buf[1..]);
            });
        });

        // boundary: both jump conditions + positivity, gradients for all three
        let coco_x = match inverse {
            Inverse::Coco(d) => coco_coeffs(d),
            Inverse::Classical(_) => Vec::new(),
        };
        let bd_buf = par::sum_into(&self.idx_bd, 3 + 2 * np + ni, |&j, buf| {
            let x = self.colloc.bd_plus[j];
            let y = self.colloc.bd_minus[j];
            let nrm = self.colloc.bd[j].normal;
            with_workspaces(u_ext, |ws| {
                let (we, rest) = ws.split_at_mut(1);
                let (wi, wp) = rest.split_at_mut(1);
                let ee = u_ext.forward([x.re, x.im], &mut we[0]);
                let ei = u_int.forward([y.re, y.im], &mut wi[0]);
                let p_j = match inverse {
                    Inverse::Coco(_) => self.coco_p(&coco_x, j),
                    Inverse::Classical(pn) => {
                        let theta = self.colloc.bd[j].theta;
                        pn.forward([theta.cos(), theta.sin()], &mut wp[0]).u
                    }
                };
                let d = ee.u - ei.u;
                let g = sm * (nrm.re * ee.grad[0] + nrm.im * ee.grad[1]);
                let gi = sc * (nrm.re * ei.grad[0] + nrm.im * ei.grad[1]);
                let r1 = p_j * d - g;
                let r2 = g - gi;
                buf[0] += r1 * r1;
                buf[1] += r2 * r2;
                buf[2] += (-p_j).max(0.0);

                let ce = 2.0 * w2b * r1;
                let cf = 2.0 * w3b * r2;
                let de = (cf - ce) * sm;
                let cot_e: Jet = [ce * p_j, de * nrm.re, de * nrm.im, 0.0, 0.0];
                u_ext.backward(&mut we[0], cot_e, &mut buf[3..3 + np]);
                let cot_i: Jet = [-ce * p_j, -cf * sc * nrm.re, -cf * sc * nrm.im, 0.0, 0.0];
                u_int.backward(&mut wi[0], cot_i, &mut buf[3 + np..3 + 2 * np]);

                let mut c_p = ce * d;
                if p_j < 0.0 {
                    c_p -= self.wts.w5;
                }
                let inv_buf = &mut buf[3 + 2 * np..];
                match inverse {
                    Inverse::Coco(_) => {
                        for i in 0..ni {
                            inv_buf[i] += c_p * self.coco_p_grad(j, i);
                        }
                    }
                    Inverse::Classical(pn) => {
                        pn.backward(&mut wp[0], [c_p, 0.0, 0.0, 0.0, 0.0], inv_buf);
                    }
                }
            });
        });

        let mut grads = GradSet {
            g_int: int_buf[1..].to_vec(),
            g_ext: ext_buf[2..].to_vec(),
            g_inv: bd_buf[3 + 2 * np..].to_vec(),
        };
        for (a, b) in grads.g_ext.iter_mut().zip(&bd_buf[3..3 + np]) {
            *a += b;
        }
        for (a, b) in grads.g_int.iter_mut().zip(&bd_buf[3 + np..3 + 2 * np]) {
            *a += b;
        }
        let reg = reg_and_grad(&self.wts, self.gamma, inverse, &mut grads.g_inv);

        let breakdown = LossBreakdown {
            pde_int: w1i * int_buf[0],
            pde_ext: w1e * ext_buf[0],
            bd1: w2b * bd_buf[0],
            bd2: w3b * bd_buf[1],
            neutral: w4e * ext_buf[1],
            positivity: self.wts.w5 * bd_buf[2],
            reg,
            total: 0.0,
        }
        .close()?;
        Ok((breakdown, grads))
    }
}

/// Loss over arbitrary field evaluators (no gradients, no regularizer); the
/// seam that lets exact reference solutions stand in for the networks.
pub fn loss_with_fields(
    colloc: &CollocationSet,
    wts: &LossWeights,
    sigma_c: f64,
    sigma_m: f64,
    field: &LinearField,
    u_ext_f: &dyn Fn([f64; 2]) -> PointEval,
    u_int_f: &dyn Fn([f64; 2]) -> PointEval,
    p_f: &dyn Fn(f64) -> f64,
) -> Result<LossBreakdown> {
    let (n_ext, n_int, n_bd) =
        (colloc.ext.len() as f64, colloc.interior.len() as f64, colloc.bd.len() as f64);
    let mut pde_ext = 0.0;
    let mut neutral = 0.0;
    for p in &colloc.ext {
        let e = u_ext_f([p.z.re, p.z.im]);
        pde_ext += (sigma_m * e.lap).powi(2);
        neutral += (e.u - field.value(p.z)).powi(2);
    }
    let mut pde_int = 0.0;
    for z in &colloc.interior {
        let e = u_int_f([z.re, z.im]);
        pde_int += (sigma_c * e.lap).powi(2);
    }
    let (mut bd1, mut bd2, mut plus) = (0.0, 0.0, 0.0);
    for (j, p) in colloc.bd.iter().enumerate() {
        let x = colloc.bd_plus[j];
        let y = colloc.bd_minus[j];
        let ee = u_ext_f([x.re, x.im]);
        let ei = u_int_f([y.re, y.im]);
        let p_j = p_f(p.theta);
        let g = sigma_m * (p.normal.re * ee.grad[0] + p.normal.im * ee.grad[1]);
        let gi = sigma_c * (p.normal.re * ei.grad[0] + p.normal.im * ei.grad[1]);
        bd1 += (p_j * (ee.u - ei.u) - g).powi(2);
        bd2 += (g - gi).powi(2);
        plus += (-p_j).max(0.0);
    }
    LossBreakdown {
        pde_int: wts.w1 / n_int * pde_int,
        pde_ext: wts.w1 / n_ext * pde_ext,
        bd1: wts.w2 / n_bd * bd1,
        bd2: wts.w3 / n_bd * bd2,
        neutral: wts.w4 / n_ext * neutral,
        positivity: wts.w5 * plus,
        reg: 0.0,
        total: 0.0,
    }
    .close()
}

/// Recompute the loss breakdown of a run at its current parameters.
pub fn loss(map: &ConformalMap, run: &TrainRun) -> Result<LossBreakdown> {
    let cfg = &run.config;
    let field = LinearField::new(cfg.field.0, cfg.field.1);
    let order = match &run.inverse {
        Inverse::Coco(d) => d.order(),
        Inverse::Classical(_) => 0,
    };
    let ev = Evaluator::new(map, &run.colloc, cfg.weights, cfg.sigma_c, cfg.sigma_m, &field, order);
    let (breakdown, _) = ev.loss_and_grads(&run.u_int, &run.u_ext, &run.inverse)?;
    Ok(breakdown)
}

/// Like [`loss`], but also returns the analytic gradients for all trainable
/// parameters. Useful for external gradient checks.
pub fn loss_and_gradients(map: &ConformalMap, run: &TrainRun) -> Result<(LossBreakdown, GradSet)> {
    let cfg = &run.config;
    let field = LinearField::new(cfg.field.0, cfg.field.1);
    let order = match &run.inverse {
        Inverse::Coco(d) => d.order(),
        Inverse::Classical(_) => 0,
    };
    let ev = Evaluator::new(map, &run.colloc, cfg.weights, cfg.sigma_c, cfg.sigma_m, &field, order);
    ev.loss_and_grads(&run.u_int, &run.u_ext, &run.inverse)
}

// ---------------------------------------------------------------------------
// Training loop

pub fn train(map: &ConformalMap, cfg: &TrainConfig) -> Result<TrainRun> {
    cfg.validate()?;
    let delta = cfg.delta.unwrap_or_else(|| colloc::default_delta(map));
    let colloc = colloc::generate(map, cfg.counts, cfg.l, delta)?;

    let mut seeder = ChaCha8Rng::seed_from_u64(cfg.seed);
    let s_int: u64 = seeder.gen();
    let s_ext: u64 = seeder.gen();
    let s_inv: u64 = seeder.gen();

    let mut u_int = Mlp::glorot(&WIDTHS, s_int)?;
    let mut u_ext = Mlp::glorot(&WIDTHS, s_ext)?;
    let mut inverse = match cfg.mode {
        Mode::Coco => Inverse::Coco(InterfaceDensity::new(
            map.gamma(),
            cfg.init_p0,
            vec![Complex64::new(0.0, 0.0); cfg.density_order],
        )?),
        Mode::Classical => {
            let mut net = Mlp::glorot(&WIDTHS, s_inv)?;
            let n = net.params().len();
            net.params_mut()[n - 1] = cfg.init_p0; // output bias
            Inverse::Classical(net)
        }
    };

    let field = LinearField::new(cfg.field.0, cfg.field.1);
    let order = match cfg.mode {
        Mode::Coco => cfg.density_order,
        Mode::Classical => 0,
    };
    let ev = Evaluator::new(map, &colloc, cfg.weights, cfg.sigma_c, cfg.sigma_m, &field, order);

    let np = u_ext.params().len();
    let mut adam_int = AdamState::new(np, cfg.lr_pinn, cfg.eta);
    let mut adam_ext = AdamState::new(np, cfg.lr_pinn, cfg.eta);
    let mut adam_inv = AdamState::new(inv_dim(&inverse), cfg.lr_inv, cfg.eta);

    let mut trace = Vec::with_capacity(cfg.iterations);
    let mut diverged = false;
    let mut initial_total = None;

    for _ in 0..cfg.iterations {
        let (breakdown, grads) = ev.loss_and_grads(&u_int, &u_ext, &inverse)?;
        let init = *initial_total.get_or_insert(breakdown.total);
        if breakdown.total > 1e6 * init {
            diverged = true;
            trace.push(breakdown);
            break;
        }
        adam_int.apply(u_int.params_mut(), &grads.g_int)?;
        adam_ext.apply(u_ext.params_mut(), &grads.g_ext)?;
        match &mut inverse {
            Inverse::Coco(d) => {
                let mut x = coco_coeffs(d);
                adam_inv.apply(&mut x, &grads.g_inv)?;
                *d = coco_density(map.gamma(), &x)?;
            }
            Inverse::Classical(net) => adam_inv.apply(net.params_mut(), &grads.g_inv)?,
        }
        trace.push(breakdown);
    }

    Ok(TrainRun { config: cfg.clone(), u_int, u_ext, inverse, colloc, trace, diverged })
}

// ---------------------------------------------------------------------------
// Credibility evaluation

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Metrics {
    /// Mean squared gap between the trained and analytic exterior solutions.
    pub cred: f64,
    /// Sup-norm of the same gap.
    pub sup: f64,
    /// Mean squared perturbation of the analytic solution (neutrality).
    pub p_neutral: f64,
}

#[derive(Debug, Clone)]
pub struct CredibilityReport {
    pub metrics: Metrics,
    /// The density fed to the analytic solver (fitted in classical mode).
    pub density: InterfaceDensity,
    /// Relative l2 Fourier-fit error (classical mode only).
    pub fit_rel_error: Option<f64>,
    /// Physical interface nonnegative on the sample grid.
    pub admissible: bool,
}

/// Fourier order used when fitting a classical boundary network.
pub const CLASSICAL_FIT_ORDER: usize = 20;

pub fn credibility_eval(
    map: &ConformalMap,
    run: &TrainRun,
    big_n: Option<usize>,
) -> Result<CredibilityReport> {
    let cfg = &run.config;
    let (density, fit_rel_error) = match &run.inverse {
        Inverse::Coco(d) => (d.clone(), None),
        Inverse::Classical(net) => {
            let samples: Vec<(f64, f64)> = run
                .colloc
                .bd
                .iter()
                .map(|p| (p.theta, net.eval([p.theta.cos(), p.theta.sin()]).u))
                .collect();
            let (d, fit) = InterfaceDensity::from_samples(map, &samples, CLASSICAL_FIT_ORDER)?;
            (d, Some(fit))
        }
    };
    let n = big_n.unwrap_or_else(|| 40.max(2 * density.order()));
    let solver = SeriesSolver::new(map, cfg.sigma_c, cfg.sigma_m, n)?;
    let field = LinearField::new(cfg.field.0, cfg.field.1);
    let row = solver.scattering_row(&density, &field)?;

    let u_p: Vec<f64> = run
        .colloc
        .ext
        .iter()
        .map(|p| eval::exterior_value(map, &field, &row, p.w))
        .collect();
    let u_nn: Vec<f64> = par::map_vec(&run.colloc.ext, |p| run.u_ext.eval([p.z.re, p.z.im]).u);
    let ws: Vec<Complex64> = run.colloc.ext.iter().map(|p| p.w).collect();

    let metrics = Metrics {
        cred: eval::mean_sq_error(&u_nn, &u_p),
        sup: eval::sup_error(&u_nn, &u_p),
        p_neutral: eval::p_neutral(&row, &ws),
    };
    let admissible = density.min_physical(map, 256) >= 0.0;
    Ok(CredibilityReport { metrics, density, fit_rel_error, admissible })
}

/// Physical interface value of a run's trained inverse at angle theta.
pub fn interface_value(map: &ConformalMap, run: &TrainRun, theta: f64) -> f64 {
    match &run.inverse {
        Inverse::Coco(d) => d.physical_value(map, theta),
        Inverse::Classical(net) => net.eval([theta.cos(), theta.sin()]).u,
    }
}
