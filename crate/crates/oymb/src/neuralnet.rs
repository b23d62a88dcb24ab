//! Dense Q-network with a fixed topology: input → 64 (ReLU) → 32 (ReLU) → |A|
//! (linear), plus hand-rolled backprop for the TD loss and an Adam optimizer.
//!
//! Weight matrices are stored flat in row-major order. The same struct doubles
//! as the gradient container since gradients share the parameter shapes.

use rand::Rng;

use crate::Scalar;

pub const HIDDEN1: usize = 64;
pub const HIDDEN2: usize = 32;

/// Weights and biases of the three affine layers.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParameters<F: Scalar> {
    pub d_in: usize,
    pub n_actions: usize,
    /// HIDDEN1 × d_in, row-major.
    pub w1: Vec<F>,
    pub b1: Vec<F>,
    /// HIDDEN2 × HIDDEN1, row-major.
    pub w2: Vec<F>,
    pub b2: Vec<F>,
    /// n_actions × HIDDEN2, row-major.
    pub w3: Vec<F>,
    pub b3: Vec<F>,
}

impl<F: Scalar> MlpParameters<F> {
    pub fn zeros(d_in: usize, n_actions: usize) -> Self {
        assert!(d_in > 0 && n_actions >= 2, "degenerate network shape");
        Self {
            d_in,
            n_actions,
            w1: vec![F::zero(); HIDDEN1 * d_in],
            b1: vec![F::zero(); HIDDEN1],
            w2: vec![F::zero(); HIDDEN2 * HIDDEN1],
            b2: vec![F::zero(); HIDDEN2],
            w3: vec![F::zero(); n_actions * HIDDEN2],
            b3: vec![F::zero(); n_actions],
        }
    }

    /// Glorot-uniform weights (±sqrt(6/(fan_in+fan_out))), zero biases.
    pub fn init<R: Rng + ?Sized>(d_in: usize, n_actions: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(d_in, n_actions);
        fill_glorot(&mut p.w1, d_in, HIDDEN1, rng);
        fill_glorot(&mut p.w2, HIDDEN1, HIDDEN2, rng);
        fill_glorot(&mut p.w3, HIDDEN2, n_actions, rng);
        p
    }

    pub fn tensors(&self) -> [&[F]; 6] {
        [&self.w1, &self.b1, &self.w2, &self.b2, &self.w3, &self.b3]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<F>; 6] {
        [
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            &mut self.b2,
            &mut self.w3,
            &mut self.b3,
        ]
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Elementwise in-place accumulate: `self += other * scale`.
    pub fn add_scaled(&mut self, other: &Self, scale: F) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += *s * scale;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }
}

fn fill_glorot<F: Scalar, R: Rng + ?Sized>(w: &mut [F], fan_in: usize, fan_out: usize, rng: &mut R) {
    let bound = F::of_f64((6.0 / (fan_in + fan_out) as f64).sqrt());
    for x in w.iter_mut() {
        *x = rng.gen_range(-bound..bound);
    }
}

fn relu<F: Scalar>(x: F) -> F {
    if x > F::zero() {
        x
    } else {
        F::zero()
    }
}

fn affine<F: Scalar>(w: &[F], b: &[F], input: &[F]) -> Vec<F> {
    let rows = b.len();
    let cols = input.len();
    debug_assert_eq!(w.len(), rows * cols);
    let mut out = b.to_vec();
    for (r, o) in out.iter_mut().enumerate() {
        let row = &w[r * cols..(r + 1) * cols];
        for (wv, iv) in row.iter().zip(input) {
            *o += *wv * *iv;
        }
    }
    out
}

/// Action values for every discrete action, `Q(s, ·; θ)`.
pub fn forward<F: Scalar>(params: &MlpParameters<F>, input: &[F]) -> Vec<F> {
    let (_, _, _, _, q) = forward_cached(params, input);
    q
}

/// Forward pass keeping pre- and post-activation layer outputs for backprop.
fn forward_cached<F: Scalar>(
    params: &MlpParameters<F>,
    input: &[F],
) -> (Vec<F>, Vec<F>, Vec<F>, Vec<F>, Vec<F>) {
    assert_eq!(input.len(), params.d_in, "input length must match d_in");
    let z1 = affine(&params.w1, &params.b1, input);
    let h1: Vec<F> = z1.iter().map(|&z| relu(z)).collect();
    let z2 = affine(&params.w2, &params.b2, &h1);
    let h2: Vec<F> = z2.iter().map(|&z| relu(z)).collect();
    let q = affine(&params.w3, &params.b3, &h2);
    (z1, h1, z2, h2, q)
}

/// Gradient of the one-sample TD loss `½(y − Q(s,a;θ))²` w.r.t. every
/// parameter. Only the chosen action's output head contributes.
pub fn backward<F: Scalar>(
    params: &MlpParameters<F>,
    input: &[F],
    action: usize,
    td_target: F,
) -> MlpParameters<F> {
    assert!(action < params.n_actions, "action index out of range");
    let (z1, h1, z2, h2, q) = forward_cached(params, input);
    let mut grad = MlpParameters::zeros(params.d_in, params.n_actions);

    // d loss / d q_a
    let residual = q[action] - td_target;

    // Output layer: only row `action` is touched.
    for (g, h) in grad.w3[action * HIDDEN2..(action + 1) * HIDDEN2]
        .iter_mut()
        .zip(&h2)
    {
        *g = residual * *h;
    }
    grad.b3[action] = residual;

    // d loss / d z2
    let w3_row = &params.w3[action * HIDDEN2..(action + 1) * HIDDEN2];
    let dz2: Vec<F> = w3_row
        .iter()
        .zip(&z2)
        .map(|(&w, &z)| if z > F::zero() { residual * w } else { F::zero() })
        .collect();

    for (r, &d) in dz2.iter().enumerate() {
        for (g, h) in grad.w2[r * HIDDEN1..(r + 1) * HIDDEN1].iter_mut().zip(&h1) {
            *g = d * *h;
        }
        grad.b2[r] = d;
    }

    // d loss / d z1
    let mut dz1 = vec![F::zero(); HIDDEN1];
    for (r, &d) in dz2.iter().enumerate() {
        let row = &params.w2[r * HIDDEN1..(r + 1) * HIDDEN1];
        for (acc, &w) in dz1.iter_mut().zip(row) {
            *acc += d * w;
        }
    }
    for (acc, &z) in dz1.iter_mut().zip(&z1) {
        if z <= F::zero() {
            *acc = F::zero();
        }
    }

    for (r, &d) in dz1.iter().enumerate() {
        for (g, x) in grad.w1[r * params.d_in..(r + 1) * params.d_in]
            .iter_mut()
            .zip(input)
        {
            *g = d * *x;
        }
        grad.b1[r] = d;
    }

    grad
}

/// Per-parameter Adam moments plus the step counter and optimizer constants.
#[derive(Clone, Debug)]
pub struct AdamState<F: Scalar> {
    pub m: MlpParameters<F>,
    pub v: MlpParameters<F>,
    pub t: u64,
    pub lr: F,
    pub beta1: F,
    pub beta2: F,
    pub eps_num: F,
}

impl<F: Scalar> AdamState<F> {
    pub fn new(d_in: usize, n_actions: usize, lr: F) -> Self {
        Self {
            m: MlpParameters::zeros(d_in, n_actions),
            v: MlpParameters::zeros(d_in, n_actions),
            t: 0,
            lr,
            beta1: F::of_f64(0.9),
            beta2: F::of_f64(0.999),
            eps_num: F::of_f64(1e-8),
        }
    }
}

/// One Adam update: moment decay, bias correction, parameter step.
pub fn adam_step<F: Scalar>(
    params: &mut MlpParameters<F>,
    grads: &MlpParameters<F>,
    state: &mut AdamState<F>,
) {
    state.t += 1;
    let t = state.t as i32;
    let one = F::one();
    let bc1 = one - state.beta1.powi(t);
    let bc2 = one - state.beta2.powi(t);
    let (b1, b2) = (state.beta1, state.beta2);

    let ps = params.tensors_mut();
    let ms = state.m.tensors_mut();
    let vs = state.v.tensors_mut();
    for ((p, m), (v, g)) in ps
        .into_iter()
        .zip(ms)
        .zip(vs.into_iter().zip(grads.tensors()))
    {
        for (((p, m), v), &g) in p.iter_mut().zip(m.iter_mut()).zip(v.iter_mut()).zip(g) {
            *m = b1 * *m + (one - b1) * g;
            *v = b2 * *v + (one - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= state.lr * m_hat / (v_hat.sqrt() + state.eps_num);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_params(d_in: usize, n_actions: usize, seed: u64) -> MlpParameters<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = MlpParameters::init(d_in, n_actions, &mut rng);
        // random biases too, so bias gradients are exercised
        for b in [&mut p.b1, &mut p.b2, &mut p.b3] {
            for x in b.iter_mut() {
                *x = rng.gen_range(-0.5..0.5);
            }
        }
        p
    }

    /// Straight-line re-evaluation of the three affine layers, written
    /// independently of `forward` (explicit index arithmetic, no helpers).
    fn forward_oracle(p: &MlpParameters<f64>, x: &[f64]) -> Vec<f64> {
        let mut h1 = vec![0.0; HIDDEN1];
        for i in 0..HIDDEN1 {
            let mut z = p.b1[i];
            for j in 0..p.d_in {
                z += p.w1[i * p.d_in + j] * x[j];
            }
            h1[i] = z.max(0.0);
        }
        let mut h2 = vec![0.0; HIDDEN2];
        for i in 0..HIDDEN2 {
            let mut z = p.b2[i];
            for j in 0..HIDDEN1 {
                z += p.w2[i * HIDDEN1 + j] * h1[j];
            }
            h2[i] = z.max(0.0);
        }
        let mut q = vec![0.0; p.n_actions];
        for i in 0..p.n_actions {
            let mut z = p.b3[i];
            for j in 0..HIDDEN2 {
                z += p.w3[i * HIDDEN2 + j] * h2[j];
            }
            q[i] = z;
        }
        q
    }

    #[test]
    fn zero_network_outputs_zero() {
        let p = MlpParameters::<f64>::zeros(3, 4);
        let q = forward(&p, &[1.0, -2.0, 0.5]);
        assert_eq!(q, vec![0.0; 4]);
    }

    #[test]
    fn single_unit_chain_passes_one_through() {
        // One chain of weight-1 connections: input 0 → hidden1 unit 0 →
        // hidden2 unit 0 → action 0. ReLU(1) = 1 at every stage.
        let mut p = MlpParameters::<f64>::zeros(3, 2);
        p.w1[0] = 1.0;
        p.w2[0] = 1.0;
        p.w3[0] = 1.0;
        let q = forward(&p, &[1.0, 0.0, 0.0]);
        assert_eq!(q, vec![1.0, 0.0]);
    }

    #[test]
    fn forward_matches_independent_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for seed in 0..20 {
            let p = random_params(5, 3, seed);
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let got = forward(&p, &x);
            let want = forward_oracle(&p, &x);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-12, "{g} vs {w}");
            }
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let p = random_params(4, 3, 11);
        let x = [0.3, -0.1, 0.9, 0.0];
        assert_eq!(forward(&p, &x), forward(&p, &x));
    }

    #[test]
    #[should_panic(expected = "input length")]
    fn forward_rejects_wrong_input_length() {
        let p = MlpParameters::<f64>::zeros(3, 2);
        forward(&p, &[1.0, 2.0]);
    }

    #[test]
    fn zero_residual_gives_zero_gradient() {
        let p = random_params(4, 3, 3);
        let x = [0.2, -0.4, 1.1, 0.7];
        let q = forward(&p, &x);
        let g = backward(&p, &x, 1, q[1]);
        for t in g.tensors() {
            assert!(t.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn zero_input_gives_zero_w1_gradient() {
        let p = random_params(4, 3, 5);
        let g = backward(&p, &[0.0; 4], 0, 2.0);
        assert!(g.w1.iter().all(|&v| v == 0.0));
        assert!(g.b1.iter().any(|&v| v != 0.0));
    }

    fn loss(p: &MlpParameters<f64>, x: &[f64], a: usize, y: f64) -> f64 {
        let q = forward(p, x)[a];
        0.5 * (y - q) * (y - q)
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for case in 0..5 {
            let p = random_params(4, 3, 100 + case);
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let a = rng.gen_range(0..3);
            let y = rng.gen_range(-2.0..2.0);
            let grad = backward(&p, &x, a, y);
            let h = 1e-5;
            for k in 0..p.param_count() {
                let mut lo = p.clone();
                let mut hi = p.clone();
                *flat_mut(&mut lo, k) -= h;
                *flat_mut(&mut hi, k) += h;
                let fd = (loss(&hi, &x, a, y) - loss(&lo, &x, a, y)) / (2.0 * h);
                let g = *flat_mut(&mut grad.clone(), k);
                let denom = fd.abs().max(1e-8);
                assert!(
                    (g - fd).abs() / denom < 1e-4,
                    "coordinate {k}: analytic {g}, fd {fd}"
                );
            }
        }
    }

    pub(crate) fn flat_mut<F: Scalar>(p: &mut MlpParameters<F>, mut k: usize) -> &mut F {
        for t in p.tensors_mut() {
            if k < t.len() {
                return &mut t[k];
            }
            k -= t.len();
        }
        panic!("flat index out of range");
    }

    #[test]
    fn adam_zero_gradient_leaves_params() {
        let mut p = random_params(3, 2, 1);
        let before = p.clone();
        let g = MlpParameters::zeros(3, 2);
        let mut st = AdamState::new(3, 2, 1e-3);
        adam_step(&mut p, &g, &mut st);
        assert_eq!(p, before);
        assert_eq!(st.t, 1);
    }

    #[test]
    fn adam_first_step_magnitude() {
        // g = 1 everywhere: bias-corrected m̂ = v̂ = 1, so the step on every
        // coordinate is lr / (1 + ε).
        let mut p = MlpParameters::<f64>::zeros(3, 2);
        let mut g = MlpParameters::zeros(3, 2);
        for t in g.tensors_mut() {
            for x in t.iter_mut() {
                *x = 1.0;
            }
        }
        let mut st = AdamState::new(3, 2, 1e-3);
        adam_step(&mut p, &g, &mut st);
        let expect = -1e-3 / (1.0 + 1e-8);
        for t in p.tensors() {
            for &x in t.iter() {
                assert!((x - expect).abs() < 1e-18);
            }
        }
    }

    #[test]
    fn adam_two_steps_match_hand_unrolled_trace() {
        // Scalar Adam unrolled by hand for two steps with constant g.
        let g = 0.7;
        let (lr, b1, b2, eps) = (1e-3, 0.9, 0.999, 1e-8);
        let mut theta = 0.3;
        let mut m = 0.0;
        let mut v = 0.0;
        let pow = |base: f64, n: u32| (0..n).fold(1.0, |acc, _| acc * base);
        for t in 1..=2u32 {
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let m_hat = m / (1.0 - pow(b1, t));
            let v_hat = v / (1.0 - pow(b2, t));
            theta -= lr * m_hat / (v_hat.sqrt() + eps);
        }

        let mut p = MlpParameters::<f64>::zeros(3, 2);
        p.w1[0] = 0.3;
        let mut grads = MlpParameters::zeros(3, 2);
        grads.w1[0] = g;
        let mut st = AdamState::new(3, 2, lr);
        adam_step(&mut p, &grads, &mut st);
        adam_step(&mut p, &grads, &mut st);
        assert!((p.w1[0] - theta).abs() < 1e-12);
        // untouched coordinates stay put
        assert_eq!(p.w1[1], 0.0);
    }

    #[test]
    fn adam_lr_zero_never_moves() {
        let mut p = random_params(3, 2, 8);
        let before = p.clone();
        let mut grads = MlpParameters::zeros(3, 2);
        grads.w2[5] = 3.0;
        let mut st = AdamState::new(3, 2, 0.0);
        for _ in 0..10 {
            adam_step(&mut p, &grads, &mut st);
        }
        assert_eq!(p, before);
    }

    #[test]
    fn clone_is_independent() {
        let mut src = random_params(3, 2, 4);
        let copy = src.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let inputs: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        for x in &inputs {
            assert_eq!(forward(&src, x), forward(&copy, x));
        }
        src.w1[0] += 1.0;
        assert_ne!(src.w1[0], copy.w1[0]);
    }
}
