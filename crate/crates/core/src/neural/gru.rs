use rand::Rng;

use super::tensor::{sigmoid, Tensor};
use super::{NeuralError, Parameters};

/// Gated recurrent unit:
///
/// ```text
/// z  = σ(W_z x + U_z h + b_z)
/// r  = σ(W_r x + U_r h + b_r)
/// h̃  = tanh(W_h x + U_h (r ⊙ h) + b_h)
/// h' = (1 − z) ⊙ h + z ⊙ h̃
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct GruCell {
    pub w_z: Tensor,
    pub w_r: Tensor,
    pub w_h: Tensor,
    pub u_z: Tensor,
    pub u_r: Tensor,
    pub u_h: Tensor,
    pub b_z: Tensor,
    pub b_r: Tensor,
    pub b_h: Tensor,
}

/// Activations of one step, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct GruStepCache {
    pub x: Vec<f64>,
    pub h: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    candidate: Vec<f64>,
}

impl GruCell {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        let w = Tensor::zeros(&[hidden, input]);
        let u = Tensor::zeros(&[hidden, hidden]);
        let b = Tensor::zeros(&[hidden]);
        Self {
            w_z: w.clone(),
            w_r: w.clone(),
            w_h: w,
            u_z: u.clone(),
            u_r: u.clone(),
            u_h: u,
            b_z: b.clone(),
            b_r: b.clone(),
            b_h: b,
        }
    }

    pub fn uniform<R: Rng + ?Sized>(input: usize, hidden: usize, scale: f64, rng: &mut R) -> Self {
        let mut cell = Self::zeros(input, hidden);
        for t in cell.tensors_mut() {
            *t = Tensor::uniform(t.shape(), scale, rng);
        }
        cell
    }

    pub fn input_dim(&self) -> usize {
        self.w_z.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_z.rows()
    }

    pub fn forward(&self, x: &[f64], h: &[f64]) -> (Vec<f64>, GruStepCache) {
        let n = self.hidden_dim();
        let mut z = self.b_z.data().to_vec();
        self.w_z.matvec_add(x, &mut z);
        self.u_z.matvec_add(h, &mut z);
        z.iter_mut().for_each(|v| *v = sigmoid(*v));

        let mut r = self.b_r.data().to_vec();
        self.w_r.matvec_add(x, &mut r);
        self.u_r.matvec_add(h, &mut r);
        r.iter_mut().for_each(|v| *v = sigmoid(*v));

        let rh: Vec<f64> = r.iter().zip(h).map(|(a, b)| a * b).collect();
        let mut candidate = self.b_h.data().to_vec();
        self.w_h.matvec_add(x, &mut candidate);
        self.u_h.matvec_add(&rh, &mut candidate);
        candidate.iter_mut().for_each(|v| *v = v.tanh());

        let out = (0..n)
            .map(|i| (1.0 - z[i]) * h[i] + z[i] * candidate[i])
            .collect();
        let cache = GruStepCache {
            x: x.to_vec(),
            h: h.to_vec(),
            z,
            r,
            candidate,
        };
        (out, cache)
    }

    /// Backpropagate `dh_out` through one step, accumulating parameter
    /// gradients into `grads`. Returns `(dx, dh_prev)`.
    pub fn backward(
        &self,
        cache: &GruStepCache,
        dh_out: &[f64],
        grads: &mut GruCell,
    ) -> (Vec<f64>, Vec<f64>) {
        let n = self.hidden_dim();
        let GruStepCache {
            x,
            h,
            z,
            r,
            candidate,
        } = cache;
        let mut dx = vec![0.0; self.input_dim()];
        let mut dh_prev: Vec<f64> = (0..n).map(|i| dh_out[i] * (1.0 - z[i])).collect();

        // candidate path
        let da_h: Vec<f64> = (0..n)
            .map(|i| dh_out[i] * z[i] * (1.0 - candidate[i] * candidate[i]))
            .collect();
        let rh: Vec<f64> = r.iter().zip(h).map(|(a, b)| a * b).collect();
        grads.w_h.outer_add(&da_h, x);
        grads.u_h.outer_add(&da_h, &rh);
        grads
            .b_h
            .data_mut()
            .iter_mut()
            .zip(&da_h)
            .for_each(|(g, d)| *g += d);
        self.w_h.matvec_t_add(&da_h, &mut dx);
        let mut drh = vec![0.0; n];
        self.u_h.matvec_t_add(&da_h, &mut drh);

        // reset gate
        let da_r: Vec<f64> = (0..n).map(|i| drh[i] * h[i] * r[i] * (1.0 - r[i])).collect();
        for i in 0..n {
            dh_prev[i] += drh[i] * r[i];
        }
        grads.w_r.outer_add(&da_r, x);
        grads.u_r.outer_add(&da_r, h);
        grads
            .b_r
            .data_mut()
            .iter_mut()
            .zip(&da_r)
            .for_each(|(g, d)| *g += d);
        self.w_r.matvec_t_add(&da_r, &mut dx);
        self.u_r.matvec_t_add(&da_r, &mut dh_prev);

        // update gate
        let da_z: Vec<f64> = (0..n)
            .map(|i| dh_out[i] * (candidate[i] - h[i]) * z[i] * (1.0 - z[i]))
            .collect();
        grads.w_z.outer_add(&da_z, x);
        grads.u_z.outer_add(&da_z, h);
        grads
            .b_z
            .data_mut()
            .iter_mut()
            .zip(&da_z)
            .for_each(|(g, d)| *g += d);
        self.w_z.matvec_t_add(&da_z, &mut dx);
        self.u_z.matvec_t_add(&da_z, &mut dh_prev);

        (dx, dh_prev)
    }
}

impl Parameters for GruCell {
    fn named(&self) -> Vec<(String, &Tensor)> {
        vec![
            ("w_z".into(), &self.w_z),
            ("w_r".into(), &self.w_r),
            ("w_h".into(), &self.w_h),
            ("u_z".into(), &self.u_z),
            ("u_r".into(), &self.u_r),
            ("u_h".into(), &self.u_h),
            ("b_z".into(), &self.b_z),
            ("b_r".into(), &self.b_r),
            ("b_h".into(), &self.b_h),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        vec![
            &mut self.w_z,
            &mut self.w_r,
            &mut self.w_h,
            &mut self.u_z,
            &mut self.u_r,
            &mut self.u_h,
            &mut self.b_z,
            &mut self.b_r,
            &mut self.b_h,
        ]
    }
}

/// One GRU step with shape checking.
pub fn gru_step(params: &GruCell, x: &[f64], h: &[f64]) -> Result<Vec<f64>, NeuralError> {
    if x.len() != params.input_dim() || h.len() != params.hidden_dim() {
        return Err(NeuralError::Shape(format!(
            "gru expects input {} and hidden {}, got {} and {}",
            params.input_dim(),
            params.hidden_dim(),
            x.len(),
            h.len()
        )));
    }
    Ok(params.forward(x, h).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_params_halve_the_hidden_state() {
        let cell = GruCell::zeros(3, 4);
        let h = [0.4, -1.0, 2.0, 0.0];
        let out = gru_step(&cell, &[1.0, 2.0, 3.0], &h).unwrap();
        assert_eq!(out, vec![0.2, -0.5, 1.0, 0.0]);
    }

    #[test]
    fn zero_everything_stays_zero() {
        let cell = GruCell::zeros(3, 4);
        assert_eq!(gru_step(&cell, &[0.0; 3], &[0.0; 4]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let cell = GruCell::zeros(3, 4);
        assert!(gru_step(&cell, &[0.0; 2], &[0.0; 4]).is_err());
        assert!(gru_step(&cell, &[0.0; 3], &[0.0; 5]).is_err());
    }

    // Straightforward scalar re-evaluation of the three gates.
    fn reference_step(cell: &GruCell, x: &[f64], h: &[f64]) -> Vec<f64> {
        let n = cell.hidden_dim();
        let affine = |w: &Tensor, u: &Tensor, b: &Tensor, hv: &[f64], i: usize| -> f64 {
            let mut s = b.data()[i];
            for (j, xj) in x.iter().enumerate() {
                s += w.row(i)[j] * xj;
            }
            for (j, hj) in hv.iter().enumerate() {
                s += u.row(i)[j] * hj;
            }
            s
        };
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let z: Vec<f64> = (0..n)
            .map(|i| sig(affine(&cell.w_z, &cell.u_z, &cell.b_z, h, i)))
            .collect();
        let r: Vec<f64> = (0..n)
            .map(|i| sig(affine(&cell.w_r, &cell.u_r, &cell.b_r, h, i)))
            .collect();
        let rh: Vec<f64> = (0..n).map(|i| r[i] * h[i]).collect();
        (0..n)
            .map(|i| {
                let c = affine(&cell.w_h, &cell.u_h, &cell.b_h, &rh, i).tanh();
                (1.0 - z[i]) * h[i] + z[i] * c
            })
            .collect()
    }

    #[test]
    fn matches_reference_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cell = GruCell::uniform(5, 6, 0.5, &mut rng);
        for _ in 0..20 {
            let x: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
            let h: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let fast = gru_step(&cell, &x, &h).unwrap();
            let slow = reference_step(&cell, &x, &h);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
                assert!(a.abs() < 1.0 + 1e-12);
            }
        }
    }
}
