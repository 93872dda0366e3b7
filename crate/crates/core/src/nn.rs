//! Small tanh MLP with exact value, gradient, and Laplacian, plus Adam.
//!
//! Derivatives propagate as 5-component forward jets (value, d/dx1, d/dx2,
//! d2/dx1^2, d2/dx2^2) — with two input dimensions this is cheaper and exactly
//! reproducible compared to nested reverse passes.  Training gradients come
//! from a reverse sweep over the taped jets, so one forward/backward pair per
//! point yields d(loss terms involving u, grad u, lap u)/d(params).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Architecture used throughout: 4 hidden layers of width 20, tanh.
pub const WIDTHS: [usize; 6] = [2, 20, 20, 20, 20, 1];

/// Forward jet: value, first derivatives, diagonal second derivatives.
pub type Jet = [f64; 5];
const V: usize = 0;
const DX: usize = 1;
const DY: usize = 2;
const HXX: usize = 3;
const HYY: usize = 4;

/// Value, gradient, Laplacian of the network at one point.
#[derive(Debug, Clone, Copy)]
pub struct PointEval {
    pub u: f64,
    pub grad: [f64; 2],
    pub lap: f64,
}

fn tanh_jet(z: Jet) -> Jet {
    let t = z[V].tanh();
    let s = 1.0 - t * t;
    let ts2 = 2.0 * t * s;
    [
        t,
        s * z[DX],
        s * z[DY],
        s * z[HXX] - ts2 * z[DX] * z[DX],
        s * z[HYY] - ts2 * z[DY] * z[DY],
    ]
}

/// Cotangent pull-back through `tanh_jet`: given d(loss)/d(output jet),
/// return d(loss)/d(input jet).
fn tanh_adjoint(z: Jet, o: Jet) -> Jet {
    let t = z[V].tanh();
    let s = 1.0 - t * t;
    let sp = -2.0 * t * s; // ds/dv
    let tsp = s * (1.0 - 3.0 * t * t); // d(t*s)/dv
    let mut zb = [0.0; 5];
    zb[HXX] = o[HXX] * s;
    zb[HYY] = o[HYY] * s;
    zb[DX] = o[DX] * s - o[HXX] * 4.0 * t * s * z[DX];
    zb[DY] = o[DY] * s - o[HYY] * 4.0 * t * s * z[DY];
    zb[V] = o[V] * s
        + o[DX] * sp * z[DX]
        + o[DY] * sp * z[DY]
        + o[HXX] * (sp * z[HXX] - 2.0 * tsp * z[DX] * z[DX])
        + o[HYY] * (sp * z[HYY] - 2.0 * tsp * z[DY] * z[DY]);
    zb
}

/// Reusable per-point buffers: post-activation jets `a`, pre-activation jets
/// `z`, and two cotangent scratch rows.
#[derive(Debug, Clone)]
pub struct Workspace {
    a: Vec<Vec<Jet>>,
    z: Vec<Vec<Jet>>,
    cz: Vec<Jet>,
    ca: Vec<Jet>,
}

#[derive(Debug, Clone)]
pub struct Mlp {
    widths: Vec<usize>,
    /// (weight, bias) offsets into `params` per affine layer.
    offsets: Vec<(usize, usize)>,
    params: Vec<f64>,
}

pub fn param_count(widths: &[usize]) -> usize {
    widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

fn layer_offsets(widths: &[usize]) -> Vec<(usize, usize)> {
    let mut off = 0;
    widths
        .windows(2)
        .map(|w| {
            let wo = off;
            let bo = off + w[0] * w[1];
            off = bo + w[1];
            (wo, bo)
        })
        .collect()
}

fn check_widths(widths: &[usize]) -> Result<()> {
    if widths.len() < 2 || widths[0] != 2 || *widths.last().unwrap() != 1 {
        return Err(Error::Config(format!(
            "network widths must run from 2 inputs to 1 output, got {widths:?}"
        )));
    }
    if widths.iter().any(|&w| w == 0) {
        return Err(Error::Config("zero-width layer".into()));
    }
    Ok(())
}

impl Mlp {
    /// All-zero parameters.
    pub fn zeros(widths: &[usize]) -> Result<Self> {
        check_widths(widths)?;
        Ok(Mlp {
            widths: widths.to_vec(),
            offsets: layer_offsets(widths),
            params: vec![0.0; param_count(widths)],
        })
    }

    /// Scaled-uniform init: weights on +/- sqrt(6/(fan_in+fan_out)) per layer,
    /// biases zero.  Sampling order is layer-major, row-major, so a seed pins
    /// the whole parameter vector.
    pub fn glorot(widths: &[usize], seed: u64) -> Result<Self> {
        let mut net = Self::zeros(widths)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in 0..widths.len() - 1 {
            let (n_in, n_out) = (widths[l], widths[l + 1]);
            let lim = (6.0 / (n_in + n_out) as f64).sqrt();
            let (wo, _) = net.offsets[l];
            for w in &mut net.params[wo..wo + n_in * n_out] {
                *w = rng.gen_range(-lim..lim);
            }
        }
        Ok(net)
    }

    pub fn from_params(widths: &[usize], params: Vec<f64>) -> Result<Self> {
        check_widths(widths)?;
        if params.len() != param_count(widths) {
            return Err(Error::DimensionMismatch {
                what: "mlp parameter vector",
                got: params.len(),
                expected: param_count(widths),
            });
        }
        Ok(Mlp { widths: widths.to_vec(), offsets: layer_offsets(widths), params })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn workspace(&self) -> Workspace {
        let max_w = *self.widths.iter().max().unwrap();
        Workspace {
            a: self.widths.iter().map(|&w| vec![[0.0; 5]; w]).collect(),
            z: self.widths[1..].iter().map(|&w| vec![[0.0; 5]; w]).collect(),
            cz: vec![[0.0; 5]; max_w],
            ca: vec![[0.0; 5]; max_w],
        }
    }

    fn affine(&self, l: usize, input: &[Jet], out: &mut [Jet]) {
        let (wo, bo) = self.offsets[l];
        let n_in = self.widths[l];
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.params[wo + i * n_in..wo + (i + 1) * n_in];
            let mut acc = [0.0; 5];
            acc[V] = self.params[bo + i];
            for (j, inp) in input.iter().enumerate() {
                let w = row[j];
                for c in 0..5 {
                    acc[c] += w * inp[c];
                }
            }
            *o = acc;
        }
    }

    /// Forward pass leaving the tape in `ws` for a later `backward`.
    pub fn forward(&self, x: [f64; 2], ws: &mut Workspace) -> PointEval {
        ws.a[0][0] = [x[0], 1.0, 0.0, 0.0, 0.0];
        ws.a[0][1] = [x[1], 0.0, 1.0, 0.0, 0.0];
        let n_aff = self.widths.len() - 1;
        for l in 0..n_aff {
            let (head, tail) = ws.a.split_at_mut(l + 1);
            self.affine(l, &head[l], &mut ws.z[l]);
            if l + 1 < n_aff {
                for (a, &z) in tail[0].iter_mut().zip(ws.z[l].iter()) {
                    *a = tanh_jet(z);
                }
            } else {
                tail[0].copy_from_slice(&ws.z[l]);
            }
        }
        let o = ws.a[n_aff][0];
        PointEval { u: o[V], grad: [o[DX], o[DY]], lap: o[HXX] + o[HYY] }
    }

    /// Accumulate d(cot . output jet)/d(params) into `grad`, using the tape
    /// left by the most recent `forward` on this workspace.
    pub fn backward(&self, ws: &mut Workspace, cot: Jet, grad: &mut [f64]) {
        let n_aff = self.widths.len() - 1;
        ws.ca[0] = cot;
        for l in (0..n_aff).rev() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            if l == n_aff - 1 {
                ws.cz[..n_out].copy_from_slice(&ws.ca[..n_out]);
            } else {
                for i in 0..n_out {
                    ws.cz[i] = tanh_adjoint(ws.z[l][i], ws.ca[i]);
                }
            }
            let (wo, bo) = self.offsets[l];
            for i in 0..n_out {
                let zb = ws.cz[i];
                let g = &mut grad[wo + i * n_in..wo + (i + 1) * n_in];
                for (j, a) in ws.a[l].iter().enumerate() {
                    g[j] += zb[V] * a[V]
                        + zb[DX] * a[DX]
                        + zb[DY] * a[DY]
                        + zb[HXX] * a[HXX]
                        + zb[HYY] * a[HYY];
                }
                grad[bo + i] += zb[V];
            }
            if l > 0 {
                for j in 0..n_in {
                    let mut acc = [0.0; 5];
                    for i in 0..n_out {
                        let w = self.params[wo + i * n_in + j];
                        for c in 0..5 {
                            acc[c] += w * ws.cz[i][c];
                        }
                    }
                    ws.ca[j] = acc;
                }
            }
        }
    }

    /// One-off evaluation with a private workspace.
    pub fn eval(&self, x: [f64; 2]) -> PointEval {
        let mut ws = self.workspace();
        self.forward(x, &mut ws)
    }
}

/// Adam with step-decay learning rate: lr_i = lr0 * eta^floor(i/1000).
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
    pub lr0: f64,
    pub eta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n: usize, lr0: f64, eta: f64) -> Self {
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
            lr0,
            eta,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// Learning rate for the upcoming step (0-based iteration counter).
    pub fn lr(&self) -> f64 {
        self.lr0 * self.eta.powi((self.step / 1000) as i32)
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn apply(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        for &g in grads {
            if !g.is_finite() {
                return Err(Error::NonFinite { context: "adam gradient".into(), value: g });
            }
        }
        let lr = self.lr();
        let t = (self.step + 1) as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            params[i] -= lr * mhat / (vhat.sqrt() + self.eps);
        }
        self.step += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_params_zero_output() {
        let net = Mlp::zeros(&WIDTHS).unwrap();
        assert_eq!(net.params().len(), 1341);
        let e = net.eval([0.3, -0.7]);
        assert_eq!(e.u, 0.0);
        assert_eq!(e.grad, [0.0, 0.0]);
        assert_eq!(e.lap, 0.0);
    }

    #[test]
    fn single_unit_hand_formulas() {
        // u = v * tanh(w1 x1 + w2 x2): widths [2,1,1], no biases.
        let (w1, w2, v) = (0.8, -0.5, 1.3);
        let net = Mlp::from_params(&[2, 1, 1], vec![w1, w2, 0.0, v, 0.0]).unwrap();
        let x = [0.4, 0.9];
        let e = net.eval(x);
        let t = (w1 * x[0] + w2 * x[1]).tanh();
        let s = 1.0 - t * t;
        assert!((e.u - v * t).abs() < 1e-14);
        assert!((e.grad[0] - v * s * w1).abs() < 1e-14);
        assert!((e.grad[1] - v * s * w2).abs() < 1e-14);
        let lap = v * (-2.0 * t * s) * (w1 * w1 + w2 * w2);
        assert!((e.lap - lap).abs() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-4;
        for seed in 0..100u64 {
            let net = Mlp::glorot(&WIDTHS, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let e = net.eval(x);
            let f = |p: [f64; 2]| net.eval(p).u;
            let gx = (f([x[0] + h, x[1]]) - f([x[0] - h, x[1]])) / (2.0 * h);
            let gy = (f([x[0], x[1] + h]) - f([x[0], x[1] - h])) / (2.0 * h);
            let lxx = (f([x[0] + h, x[1]]) - 2.0 * e.u + f([x[0] - h, x[1]])) / (h * h);
            let lyy = (f([x[0], x[1] + h]) - 2.0 * e.u + f([x[0], x[1] - h])) / (h * h);
            let lap_fd = lxx + lyy;
            assert!((e.grad[0] - gx).abs() <= 1e-6 * (1.0 + gx.abs()), "seed {seed}");
            assert!((e.grad[1] - gy).abs() <= 1e-6 * (1.0 + gy.abs()), "seed {seed}");
            assert!((e.lap - lap_fd).abs() <= 1e-5 * (1.0 + lap_fd.abs()), "seed {seed}");
        }
    }

    #[test]
    fn backward_matches_parameter_finite_differences() {
        let net = Mlp::glorot(&WIDTHS, 7).unwrap();
        let pts = [[0.3, -0.4], [1.2, 0.8], [-0.9, 1.5]];
        let cots: [Jet; 3] = [
            [1.0, 0.2, -0.3, 0.05, 0.4],
            [-0.7, 0.9, 0.1, -0.2, 0.3],
            [0.5, -0.6, 0.8, 0.15, -0.25],
        ];
        let phi = |net: &Mlp| -> f64 {
            let mut ws = net.workspace();
            pts.iter()
                .zip(cots.iter())
                .map(|(&x, c)| {
                    let _ = net.forward(x, &mut ws);
                    let o = ws.a.last().unwrap()[0];
                    (0..5).map(|k| c[k] * o[k]).sum::<f64>()
                })
                .sum()
        };
        let mut grad = vec![0.0; net.params().len()];
        let mut ws = net.workspace();
        for (&x, &c) in pts.iter().zip(cots.iter()) {
            let _ = net.forward(x, &mut ws);
            net.backward(&mut ws, c, &mut grad);
        }
        let h = 1e-5;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..40 {
            let i = rng.gen_range(0..net.params().len());
            let mut plus = net.clone();
            plus.params_mut()[i] += h;
            let mut minus = net.clone();
            minus.params_mut()[i] -= h;
            let fd = (phi(&plus) - phi(&minus)) / (2.0 * h);
            assert!(
                (grad[i] - fd).abs() <= 1e-5 * (1.0 + fd.abs()),
                "param {i}: analytic {} vs fd {fd}",
                grad[i]
            );
        }
    }

    #[test]
    fn glorot_bounds_and_determinism() {
        let a = Mlp::glorot(&WIDTHS, 11).unwrap();
        let b = Mlp::glorot(&WIDTHS, 11).unwrap();
        assert_eq!(a.params(), b.params());
        let c = Mlp::glorot(&WIDTHS, 12).unwrap();
        assert_ne!(a.params(), c.params());
        for l in 0..WIDTHS.len() - 1 {
            let lim = (6.0 / (WIDTHS[l] + WIDTHS[l + 1]) as f64).sqrt();
            let (wo, _) = a.offsets[l];
            let bo = a.offsets[l].1;
            for &w in &a.params[wo..bo] {
                assert!(w.abs() < lim);
            }
            for &bias in &a.params[bo..bo + WIDTHS[l + 1]] {
                assert_eq!(bias, 0.0);
            }
        }
    }

    #[test]
    fn adam_zero_grad_and_sign_behavior() {
        let mut p = vec![1.0, -2.0];
        let mut st = AdamState::new(2, 1e-3, 0.7);
        st.apply(&mut p, &[0.0, 0.0]).unwrap();
        assert_eq!(p, vec![1.0, -2.0]);

        let mut st = AdamState::new(2, 1e-3, 0.7);
        let g = [0.35, -1.7];
        let mut prev = p.clone();
        for _ in 0..50 {
            st.apply(&mut p, &g).unwrap();
            prev = p.clone();
        }
        st.apply(&mut p, &g).unwrap();
        // steady state: step ~ -lr * sign(g)
        assert!(((p[0] - prev[0]) + 1e-3).abs() < 1e-4);
        assert!(((p[1] - prev[1]) - 1e-3).abs() < 1e-4);
    }

    #[test]
    fn lr_schedule_decays_every_thousand() {
        let mut st = AdamState::new(1, 1e-3, 0.7);
        let mut p = vec![0.0];
        assert!((st.lr() - 1e-3).abs() < 1e-18);
        for _ in 0..2500 {
            st.apply(&mut p, &[1.0]).unwrap();
        }
        assert!((st.lr() - 1e-3 * 0.7 * 0.7).abs() < 1e-12);
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let mut st = AdamState::new(1, 1e-3, 0.7);
        let mut p = vec![0.0];
        match st.apply(&mut p, &[f64::NAN]) {
            Err(Error::NonFinite { .. }) => {}
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }
}
