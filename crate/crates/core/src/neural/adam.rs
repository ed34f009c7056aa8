//! Adaptive-moment optimizer with global gradient-norm clipping.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateOutcome<T> {
    /// Norm of the gradient before clipping; every parameter was updated.
    Applied { grad_norm: T },
    /// A non-finite gradient component was found; parameters untouched.
    SkippedNonFinite,
}

#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    /// Global L2 clip applied to the gradient before the moment update.
    pub clip_norm: T,
    pub skipped_updates: u64,
    m: Vec<T>,
    v: Vec<T>,
    step: u64,
}

impl<T: Scalar> Adam<T> {
    pub fn new(num_params: usize, learning_rate: T) -> Self {
        Adam {
            learning_rate,
            beta1: T::from_real(0.9),
            beta2: T::from_real(0.999),
            epsilon: T::from_real(1e-8),
            clip_norm: T::one(),
            skipped_updates: 0,
            m: vec![T::zero(); num_params],
            v: vec![T::zero(); num_params],
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Clips the gradient to `clip_norm`, then takes one bias-corrected
    /// moment step. Non-finite gradients skip the update entirely.
    pub fn apply_update(&mut self, params: &mut [T], grads: &[T]) -> UpdateOutcome<T> {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());

        if grads.iter().any(|g| !g.is_finite()) {
            self.skipped_updates += 1;
            return UpdateOutcome::SkippedNonFinite;
        }

        let norm = grads
            .iter()
            .fold(T::zero(), |acc, &g| acc + g * g)
            .sqrt();
        let scale = if norm > self.clip_norm {
            self.clip_norm / norm
        } else {
            T::one()
        };

        self.step += 1;
        let t = self.step as i32;
        let bias1 = T::one() - self.beta1.powi(t);
        let bias2 = T::one() - self.beta2.powi(t);

        for i in 0..params.len() {
            let g = grads[i] * scale;
            self.m[i] = self.beta1 * self.m[i] + (T::one() - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (T::one() - self.beta2) * g * g;
            let m_hat = self.m[i] / bias1;
            let v_hat = self.v[i] / bias2;
            params[i] = params[i] - self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }

        UpdateOutcome::Applied { grad_norm: norm }
    }
}
