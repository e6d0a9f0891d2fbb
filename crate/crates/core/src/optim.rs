//! First-order gradient-descent optimizers, implemented flat over `Vec<f64>`
//! parameter blocks so each caller can pack its own layout.

use serde::{Deserialize, Serialize};

/// Adam with bias correction; moments start at zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step_count: u64,
}

impl Adam {
    pub fn new(learning_rate: f64, dim: usize) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            step_count: 0,
        }
    }

    /// One descent step in place. Panics if shapes disagree.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.step_count += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step_count as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step_count as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

/// RMSProp with the canonical decay rho = 0.9.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RmsProp {
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
    v: Vec<f64>,
}

impl RmsProp {
    pub fn new(learning_rate: f64, dim: usize) -> Self {
        Self {
            learning_rate,
            rho: 0.9,
            epsilon: 1e-8,
            v: vec![0.0; dim],
        }
    }

    /// One descent step in place: `v <- rho v + (1-rho) g^2`,
    /// `p <- p - lr g / (sqrt(v) + eps)`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.v.len());
        assert_eq!(grads.len(), self.v.len());
        for i in 0..params.len() {
            self.v[i] = self.rho * self.v[i] + (1.0 - self.rho) * grads[i] * grads[i];
            params[i] -= self.learning_rate * grads[i] / (self.v[i].sqrt() + self.epsilon);
        }
    }
}

/// Plateau tracker shared by the training loops: counts epochs without
/// improvement of the best loss and signals when patience runs out.
#[derive(Debug, Clone)]
pub struct PlateauTracker {
    best: f64,
    stale: usize,
    patience: usize,
}

impl PlateauTracker {
    pub fn new(patience: usize) -> Self {
        Self {
            best: f64::INFINITY,
            stale: 0,
            patience,
        }
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    /// Records one epoch's loss. Returns true when `patience` epochs have
    /// passed without improvement (and resets the counter).
    pub fn observe(&mut self, loss: f64) -> bool {
        if loss < self.best {
            self.best = loss;
            self.stale = 0;
            return false;
        }
        self.stale += 1;
        if self.stale >= self.patience {
            self.stale = 0;
            return true;
        }
        false
    }
}
