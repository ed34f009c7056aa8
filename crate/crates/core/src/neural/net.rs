//! A small feedforward actor-critic network with explicit forward and
//! reverse-mode passes over a flat parameter vector.
//!
//! Two tanh hidden layers feed a softmax policy head (one logit per PE) and
//! a scalar value head. The flat layout keeps finite-difference checks and
//! checkpointing trivial.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::eim::EimBatch;
use crate::error::{Result, SimError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetDims {
    pub input: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub actions: usize,
}

impl NetDims {
    pub fn num_params(&self) -> usize {
        let NetDims {
            input: i,
            hidden1: h1,
            hidden2: h2,
            actions: a,
        } = *self;
        h1 * i + h1 + h2 * h1 + h2 + a * h2 + a + h2 + 1
    }
}

/// Parameter block offsets into the flat vector.
#[derive(Debug, Clone, Copy)]
struct Offsets {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    wp: usize,
    bp: usize,
    wv: usize,
    bv: usize,
}

impl Offsets {
    fn of(d: &NetDims) -> Offsets {
        let w1 = 0;
        let b1 = w1 + d.hidden1 * d.input;
        let w2 = b1 + d.hidden1;
        let b2 = w2 + d.hidden2 * d.hidden1;
        let wp = b2 + d.hidden2;
        let bp = wp + d.actions * d.hidden2;
        let wv = bp + d.actions;
        let bv = wv + d.hidden2;
        Offsets {
            w1,
            b1,
            w2,
            b2,
            wp,
            bp,
            wv,
            bv,
        }
    }
}

/// Cached activations of one forward pass.
#[derive(Debug, Clone)]
pub struct Forward<T> {
    pub a1: Vec<T>,
    pub a2: Vec<T>,
    /// Log-probabilities per action (stable log-softmax of the logits).
    pub log_probs: Vec<T>,
    pub probs: Vec<T>,
    pub value: T,
}

/// Loss coefficients; the policy term always has weight 1.
#[derive(Debug, Clone, Copy)]
pub struct LossConfig<T> {
    pub value_coef: T,
    pub entropy_coef: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyValueNet<T> {
    dims: NetDims,
    params: Vec<T>,
}

impl<T: Scalar> PolicyValueNet<T> {
    /// Zero-initialized network (uniform policy, zero value).
    pub fn new(dims: NetDims) -> Self {
        PolicyValueNet {
            dims,
            params: vec![T::zero(); dims.num_params()],
        }
    }

    /// Xavier-uniform hidden layers, zero-initialized heads: the initial
    /// policy is exactly uniform and the initial value exactly zero.
    pub fn init(dims: NetDims, seed: u64) -> Self {
        let mut net = Self::new(dims);
        let off = Offsets::of(&dims);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fill = |lo: usize, len: usize, fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng, params: &mut [T]| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in params[lo..lo + len].iter_mut() {
                *p = T::from_real(rng.random_range(-limit..limit));
            }
        };
        fill(
            off.w1,
            dims.hidden1 * dims.input,
            dims.input,
            dims.hidden1,
            &mut rng,
            &mut net.params,
        );
        fill(
            off.w2,
            dims.hidden2 * dims.hidden1,
            dims.hidden1,
            dims.hidden2,
            &mut rng,
            &mut net.params,
        );
        net
    }

    pub fn dims(&self) -> NetDims {
        self.dims
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn from_params(dims: NetDims, params: Vec<T>) -> Result<Self> {
        if params.len() != dims.num_params() {
            return Err(SimError::Checkpoint(format!(
                "parameter payload has {} values, dims need {}",
                params.len(),
                dims.num_params()
            )));
        }
        Ok(PolicyValueNet { dims, params })
    }

    pub fn forward(&self, obs: &[T]) -> Result<Forward<T>> {
        let d = &self.dims;
        if obs.len() != d.input {
            return Err(SimError::Config(format!(
                "observation length {} does not match network input {}",
                obs.len(),
                d.input
            )));
        }
        let off = Offsets::of(d);
        let p = &self.params;

        let mut a1 = vec![T::zero(); d.hidden1];
        for j in 0..d.hidden1 {
            let mut z = p[off.b1 + j];
            let row = off.w1 + j * d.input;
            for i in 0..d.input {
                z = z + p[row + i] * obs[i];
            }
            a1[j] = z.tanh();
        }

        let mut a2 = vec![T::zero(); d.hidden2];
        for k in 0..d.hidden2 {
            let mut z = p[off.b2 + k];
            let row = off.w2 + k * d.hidden1;
            for j in 0..d.hidden1 {
                z = z + p[row + j] * a1[j];
            }
            a2[k] = z.tanh();
        }

        let mut logits = vec![T::zero(); d.actions];
        for a in 0..d.actions {
            let mut z = p[off.bp + a];
            let row = off.wp + a * d.hidden2;
            for k in 0..d.hidden2 {
                z = z + p[row + k] * a2[k];
            }
            logits[a] = z;
        }

        let mut value = p[off.bv];
        for k in 0..d.hidden2 {
            value = value + p[off.wv + k] * a2[k];
        }

        // log-softmax, stable under large logits
        let max = logits.iter().cloned().fold(logits[0], T::max);
        let mut sum = T::zero();
        for &l in &logits {
            sum = sum + (l - max).exp();
        }
        let lse = max + sum.ln();
        let log_probs: Vec<T> = logits.iter().map(|&l| l - lse).collect();
        let probs: Vec<T> = log_probs.iter().map(|&lp| lp.exp()).collect();

        Ok(Forward {
            a1,
            a2,
            log_probs,
            probs,
            value,
        })
    }

    /// Batch loss and its gradient with respect to every parameter.
    ///
    /// `loss = mean_i [ -log pi(a_i|s_i) * (G_i - V_i)
    ///                  + value_coef * (G_i - V(s_i))^2
    ///                  - entropy_coef * H(pi(.|s_i)) ]`
    ///
    /// The advantage in the policy term is a constant: `V_i` is the value
    /// estimate captured when the decision was made (the entry's recorded
    /// value, falling back to the current estimate when absent). The value
    /// head is trained only through the squared error against the live
    /// `V(s_i)`. With one update per episode the recorded and live estimates
    /// coincide at update time.
    pub fn compute_loss(
        &self,
        batch: &EimBatch<T>,
        cfg: &LossConfig<T>,
    ) -> Result<(T, Vec<T>)> {
        let d = &self.dims;
        let off = Offsets::of(d);
        let p = &self.params;
        let mut grads = vec![T::zero(); self.params.len()];
        if batch.entries.is_empty() {
            return Ok((T::zero(), grads));
        }

        let n = T::from_real(batch.entries.len() as f64);
        let inv_n = T::one() / n;
        let mut total_loss = T::zero();

        for entry in &batch.entries {
            let fwd = self.forward(&entry.observation)?;
            if entry.action >= d.actions {
                return Err(SimError::Config(format!(
                    "batch action {} out of range {}",
                    entry.action, d.actions
                )));
            }
            let baseline = entry.value.unwrap_or(fwd.value);
            let adv = entry.ret - baseline;
            let value_err = entry.ret - fwd.value;
            let entropy = -fwd
                .probs
                .iter()
                .zip(&fwd.log_probs)
                .fold(T::zero(), |acc, (&pr, &lp)| acc + pr * lp);
            total_loss = total_loss
                + (-fwd.log_probs[entry.action] * adv
                    + cfg.value_coef * value_err * value_err
                    - cfg.entropy_coef * entropy);

            // d loss / d logits, per sample (before the 1/N average):
            //   policy:  adv * (p - onehot(a))
            //   entropy: entropy_coef * p .* (log p + H)
            let mut dlogits = vec![T::zero(); d.actions];
            for a in 0..d.actions {
                let onehot = if a == entry.action { T::one() } else { T::zero() };
                dlogits[a] = adv * (fwd.probs[a] - onehot)
                    + cfg.entropy_coef * fwd.probs[a] * (fwd.log_probs[a] + entropy);
            }
            // d loss / d value: -2 * value_coef * (G - V)
            let dvalue = (T::one() + T::one()) * cfg.value_coef * (fwd.value - entry.ret);

            // heads
            let mut da2 = vec![T::zero(); d.hidden2];
            for a in 0..d.actions {
                let row = off.wp + a * d.hidden2;
                let g = dlogits[a] * inv_n;
                for k in 0..d.hidden2 {
                    grads[row + k] = grads[row + k] + g * fwd.a2[k];
                    da2[k] = da2[k] + p[row + k] * dlogits[a];
                }
                grads[off.bp + a] = grads[off.bp + a] + g;
            }
            {
                let g = dvalue * inv_n;
                for k in 0..d.hidden2 {
                    grads[off.wv + k] = grads[off.wv + k] + g * fwd.a2[k];
                    da2[k] = da2[k] + p[off.wv + k] * dvalue;
                }
                grads[off.bv] = grads[off.bv] + g;
            }

            // hidden 2
            let mut da1 = vec![T::zero(); d.hidden1];
            for k in 0..d.hidden2 {
                let dz2 = da2[k] * (T::one() - fwd.a2[k] * fwd.a2[k]);
                let row = off.w2 + k * d.hidden1;
                let g = dz2 * inv_n;
                for j in 0..d.hidden1 {
                    grads[row + j] = grads[row + j] + g * fwd.a1[j];
                    da1[j] = da1[j] + p[row + j] * dz2;
                }
                grads[off.b2 + k] = grads[off.b2 + k] + g;
            }

            // hidden 1
            for j in 0..d.hidden1 {
                let dz1 = da1[j] * (T::one() - fwd.a1[j] * fwd.a1[j]);
                let row = off.w1 + j * d.input;
                let g = dz1 * inv_n;
                for i in 0..d.input {
                    grads[row + i] = grads[row + i] + g * entry.observation[i];
                }
                grads[off.b1 + j] = grads[off.b1 + j] + g;
            }
        }

        Ok((total_loss * inv_n, grads))
    }
}

/// Draws an action index from a categorical distribution by inverse CDF.
pub fn sample_action<T: Scalar, R: Rng + ?Sized>(probs: &[T], rng: &mut R) -> usize {
    let u: f64 = rng.random_range(0.0..1.0);
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p.to_real();
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Argmax with lowest-index tie-breaking; used for greedy evaluation.
pub fn greedy_action<T: Scalar>(probs: &[T]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    best
}
