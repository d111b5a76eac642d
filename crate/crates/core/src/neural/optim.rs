//! Adam, element-wise gradient clipping, and a reduce-on-plateau scheduler with reset.

use num_traits::Float;

/// Clips every entry to `[-eps, eps]`.
pub fn clip_gradients<T: Float>(grad: &mut [T], eps: T) {
    grad.iter_mut().for_each(|g| *g = g.max(-eps).min(eps));
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    m: Vec<T>,
    v: Vec<T>,
    steps: i32,
}

impl<T: Float> Adam<T> {
    pub fn new(num_params: usize) -> Self {
        Self {
            beta1: T::from(0.9).unwrap(),
            beta2: T::from(0.999).unwrap(),
            eps: T::from(1e-8).unwrap(),
            m: vec![T::zero(); num_params],
            v: vec![T::zero(); num_params],
            steps: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.steps
    }

    pub fn step(&mut self, params: &mut [T], grad: &[T], lr: T) {
        self.steps += 1;
        let c1 = T::one() - self.beta1.powi(self.steps);
        let c2 = T::one() - self.beta2.powi(self.steps);
        for ((p, &g), (m, v)) in params.iter_mut().zip(grad).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            *m = self.beta1 * *m + (T::one() - self.beta1) * g;
            *v = self.beta2 * *v + (T::one() - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p = *p - lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Multiplies the learning rate by `factor` once the loss has failed to improve for
/// `patience` consecutive epochs, never going below `min_lr`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauScheduler {
    pub lr: f64,
    pub initial_lr: f64,
    pub factor: f64,
    pub patience: usize,
    pub min_lr: f64,
    best: f64,
    bad_epochs: usize,
}

impl PlateauScheduler {
    pub fn new(lr: f64, factor: f64, patience: usize, min_lr: f64) -> Self {
        Self { lr, initial_lr: lr, factor, patience, min_lr, best: f64::INFINITY, bad_epochs: 0 }
    }

    /// Feeds one epoch's loss and returns the learning rate for the next epoch.
    pub fn step(&mut self, loss: f64) -> f64 {
        if loss < self.best {
            self.best = loss;
            self.bad_epochs = 0;
        } else {
            self.bad_epochs += 1;
            if self.bad_epochs >= self.patience {
                self.lr = (self.lr * self.factor).max(self.min_lr);
                self.bad_epochs = 0;
            }
        }
        self.lr
    }

    /// Back to the initial learning rate with a fresh plateau counter.
    pub fn reset(&mut self) {
        self.lr = self.initial_lr;
        self.bad_epochs = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_is_elementwise() {
        let mut g = [3.7, -0.2, -9.0];
        clip_gradients(&mut g, 1.0);
        assert_eq!(g, [1.0, -0.2, -1.0]);
    }

    #[test]
    fn ten_stagnant_epochs_halve_the_rate() {
        let mut s = PlateauScheduler::new(0.001, 0.5, 10, 1e-6);
        s.step(1.0);
        for _ in 0..9 {
            assert_eq!(s.step(1.0), 0.001);
        }
        assert_eq!(s.step(1.0), 0.0005);
    }

    #[test]
    fn rate_is_floored() {
        let mut s = PlateauScheduler::new(0.001, 0.5, 1, 1e-6);
        s.step(0.0);
        for _ in 0..100 {
            s.step(1.0);
        }
        assert_eq!(s.lr, 1e-6);
        s.reset();
        assert_eq!(s.lr, 0.001);
    }

    #[test]
    fn adam_moves_against_the_gradient() {
        let mut adam = Adam::<f64>::new(2);
        let mut p = [1.0, -1.0];
        adam.step(&mut p, &[0.5, -2.0], 0.1);
        // The first bias-corrected step has magnitude lr in every coordinate.
        assert!((p[0] - 0.9).abs() < 1e-6);
        assert!((p[1] + 0.9).abs() < 1e-6);
    }
}
