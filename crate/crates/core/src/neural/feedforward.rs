use rand::Rng;

use super::tensor::Tensor;
use super::Parameters;

/// Two-layer perceptron, ReLU hidden layer, linear output (logits).
#[derive(Debug, Clone, PartialEq)]
pub struct FeedForward {
    pub w1: Tensor,
    pub b1: Tensor,
    pub w2: Tensor,
    pub b2: Tensor,
}

#[derive(Debug, Clone)]
pub struct FeedForwardCache {
    x: Vec<f64>,
    hidden: Vec<f64>,
}

impl FeedForward {
    pub fn zeros(input: usize, hidden: usize, output: usize) -> Self {
        Self {
            w1: Tensor::zeros(&[hidden, input]),
            b1: Tensor::zeros(&[hidden]),
            w2: Tensor::zeros(&[output, hidden]),
            b2: Tensor::zeros(&[output]),
        }
    }

    pub fn uniform<R: Rng + ?Sized>(
        input: usize,
        hidden: usize,
        output: usize,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        let mut ff = Self::zeros(input, hidden, output);
        for t in ff.tensors_mut() {
            *t = Tensor::uniform(t.shape(), scale, rng);
        }
        ff
    }

    pub fn output_dim(&self) -> usize {
        self.w2.rows()
    }

    pub fn forward(&self, x: &[f64]) -> (Vec<f64>, FeedForwardCache) {
        let mut hidden = self.b1.data().to_vec();
        self.w1.matvec_add(x, &mut hidden);
        hidden.iter_mut().for_each(|v| *v = v.max(0.0));
        let mut logits = self.b2.data().to_vec();
        self.w2.matvec_add(&hidden, &mut logits);
        (
            logits,
            FeedForwardCache {
                x: x.to_vec(),
                hidden,
            },
        )
    }

    /// Accumulate gradients for `dlogits`; returns the gradient w.r.t. the input.
    pub fn backward(&self, cache: &FeedForwardCache, dlogits: &[f64], grads: &mut FeedForward) -> Vec<f64> {
        grads.w2.outer_add(dlogits, &cache.hidden);
        grads
            .b2
            .data_mut()
            .iter_mut()
            .zip(dlogits)
            .for_each(|(g, d)| *g += d);
        let mut dhidden = vec![0.0; cache.hidden.len()];
        self.w2.matvec_t_add(dlogits, &mut dhidden);
        // ReLU derivative taken as 0 at the kink
        for (d, h) in dhidden.iter_mut().zip(&cache.hidden) {
            if *h <= 0.0 {
                *d = 0.0;
            }
        }
        grads.w1.outer_add(&dhidden, &cache.x);
        grads
            .b1
            .data_mut()
            .iter_mut()
            .zip(&dhidden)
            .for_each(|(g, d)| *g += d);
        let mut dx = vec![0.0; cache.x.len()];
        self.w1.matvec_t_add(&dhidden, &mut dx);
        dx
    }
}

impl Parameters for FeedForward {
    fn named(&self) -> Vec<(String, &Tensor)> {
        vec![
            ("w1".into(), &self.w1),
            ("b1".into(), &self.b1),
            ("w2".into(), &self.w2),
            ("b2".into(), &self.b2),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }
}
