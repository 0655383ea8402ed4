use super::tensor::Tensor;
use super::{NeuralError, Parameters};

/// Adam with bias-corrected moment estimates.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    t: u64,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
}

impl Adam {
    pub fn new(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn timestep(&self) -> u64 {
        self.t
    }

    /// Apply one update to `params` using `grads`, which must list tensors of
    /// the same shapes in the same order.
    pub fn update(&mut self, params: Vec<&mut Tensor>, grads: Vec<&Tensor>) -> Result<(), NeuralError> {
        if params.len() != grads.len() {
            return Err(NeuralError::Shape(format!(
                "{} parameter tensors but {} gradients",
                params.len(),
                grads.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(&grads).enumerate() {
            if p.shape() != g.shape() {
                return Err(NeuralError::Shape(format!(
                    "tensor {i}: parameter {:?} vs gradient {:?}",
                    p.shape(),
                    g.shape()
                )));
            }
        }
        if self.m.is_empty() {
            self.m = grads.iter().map(|g| g.zeros_like()).collect();
            self.v = self.m.clone();
        } else if self.m.len() != grads.len()
            || self.m.iter().zip(&grads).any(|(m, g)| m.shape() != g.shape())
        {
            return Err(NeuralError::Shape(
                "optimizer state does not match parameters".into(),
            ));
        }

        self.t += 1;
        let t = self.t as i32;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        let step = self.learning_rate;
        for ((p, g), (m, v)) in params
            .into_iter()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            let p = p.data_mut();
            let g = g.data();
            let m = m.data_mut();
            let v = v.data_mut();
            for k in 0..p.len() {
                m[k] = b1 * m[k] + (1.0 - b1) * g[k];
                v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
                let m_hat = m[k] / c1;
                let v_hat = v[k] / c2;
                p[k] -= step * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }

    pub fn step<P: Parameters>(&mut self, params: &mut P, grads: &P) -> Result<(), NeuralError> {
        let grads: Vec<&Tensor> = grads.named().into_iter().map(|(_, t)| t).collect();
        self.update(params.tensors_mut(), grads)
    }
}

/// Free-function form used by callers that manage tensor lists directly.
pub fn adam_update(
    state: &mut Adam,
    params: Vec<&mut Tensor>,
    grads: Vec<&Tensor>,
) -> Result<(), NeuralError> {
    state.update(params, grads)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate_against_the_sign() {
        let mut p = Tensor::from_vec(&[4], vec![1.0, -2.0, 0.5, 0.0]).unwrap();
        let g = Tensor::from_vec(&[4], vec![3.0, -0.01, 1e-3, -40.0]).unwrap();
        let before = p.clone();
        let mut adam = Adam::new(1e-4);
        adam.update(vec![&mut p], vec![&g]).unwrap();
        for k in 0..4 {
            let delta = p.data()[k] - before.data()[k];
            let expected = -1e-4 * g.data()[k].signum();
            assert!((delta - expected).abs() < 1e-4 * 1e-3, "component {k}: {delta}");
        }
        assert_eq!(adam.timestep(), 1);
    }

    #[test]
    fn zero_gradient_leaves_parameters_alone() {
        let mut p = Tensor::from_vec(&[3], vec![1.0, 2.0, 3.0]).unwrap();
        let g = Tensor::zeros(&[3]);
        let mut adam = Adam::new(0.1);
        for _ in 0..50 {
            adam.update(vec![&mut p], vec![&g]).unwrap();
        }
        assert_eq!(p.data(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut p = Tensor::zeros(&[3]);
        let g = Tensor::zeros(&[2]);
        assert!(Adam::new(0.1).update(vec![&mut p], vec![&g]).is_err());
    }

    #[test]
    fn descends_a_convex_quadratic() {
        // f(x) = Σ a_k (x_k − c_k)²
        let a = [1.0, 4.0, 0.25];
        let c = [3.0, -1.0, 2.0];
        let f = |x: &[f64]| -> f64 { (0..3).map(|k| a[k] * (x[k] - c[k]).powi(2)).sum() };
        let mut x = Tensor::zeros(&[3]);
        let mut adam = Adam::new(0.05);
        let mut history = vec![f(x.data())];
        for _ in 0..100 {
            let g: Vec<f64> = (0..3).map(|k| 2.0 * a[k] * (x.data()[k] - c[k])).collect();
            let g = Tensor::from_vec(&[3], g).unwrap();
            adam.update(vec![&mut x], vec![&g]).unwrap();
            history.push(f(x.data()));
        }
        let burn_in = 10;
        for w in history[burn_in..].windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{} then {}", w[0], w[1]);
        }
        assert!(history[100] < 0.05 * history[0]);
    }
}
