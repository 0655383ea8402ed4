use rand::Rng;

use super::Parameters;

pub const FD_STEP: f64 = 1e-5;
/// Denominator floor for the relative error, so that two gradients that are
/// both numerically zero compare as equal.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    pub tolerance: f64,
    /// Tensor name, flat index, analytic and numeric value at the worst entry.
    pub worst: Option<(String, usize, f64, f64)>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < self.tolerance
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

/// Compare `analytic` (same layout as `params`) against central differences
/// of `loss` on up to `per_tensor` random entries of every tensor.
///
/// `params` is perturbed in place and restored bit-exactly.
pub fn grad_check<P, F, R>(
    params: &mut P,
    analytic: &P,
    mut loss: F,
    per_tensor: usize,
    tolerance: f64,
    rng: &mut R,
) -> GradCheckReport
where
    P: Parameters,
    F: FnMut(&P) -> f64,
    R: Rng + ?Sized,
{
    let names: Vec<String> = analytic.named().into_iter().map(|(n, _)| n).collect();
    let grads: Vec<Vec<f64>> = analytic
        .named()
        .into_iter()
        .map(|(_, t)| t.data().to_vec())
        .collect();
    let sizes: Vec<usize> = params.named().iter().map(|(_, t)| t.len()).collect();

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        tolerance,
        worst: None,
    };
    for (ti, &size) in sizes.iter().enumerate() {
        let picks: Vec<usize> = if size <= per_tensor {
            (0..size).collect()
        } else {
            (0..per_tensor).map(|_| rng.random_range(0..size)).collect()
        };
        for k in picks {
            let original = params.tensors_mut()[ti].data()[k];
            params.tensors_mut()[ti].data_mut()[k] = original + FD_STEP;
            let up = loss(params);
            params.tensors_mut()[ti].data_mut()[k] = original - FD_STEP;
            let down = loss(params);
            params.tensors_mut()[ti].data_mut()[k] = original;

            let numeric = (up - down) / (2.0 * FD_STEP);
            let a = grads[ti][k];
            let err = relative_error(a, numeric);
            report.checked += 1;
            if report.worst.is_none() || err > report.max_rel_error {
                report.max_rel_error = err;
                report.worst = Some((names[ti].clone(), k, a, numeric));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Tensor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Linear {
        w: Tensor,
    }

    impl Parameters for Linear {
        fn named(&self) -> Vec<(String, &Tensor)> {
            vec![("w".into(), &self.w)]
        }
        fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
            vec![&mut self.w]
        }
    }

    const X: [f64; 4] = [0.5, -1.5, 2.0, 3.0];

    fn linear_loss(m: &Linear) -> f64 {
        m.w.data().iter().zip(X).map(|(w, x)| w * x).sum()
    }

    #[test]
    fn linear_model_agrees_exactly() {
        let mut model = Linear {
            w: Tensor::from_vec(&[4], vec![0.1, 0.2, -0.3, 0.4]).unwrap(),
        };
        let grad = Linear {
            w: Tensor::from_vec(&[4], X.to_vec()).unwrap(),
        };
        let before = model.w.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let report = grad_check(&mut model, &grad, linear_loss, 10, 1e-4, &mut rng);
        assert_eq!(report.checked, 4);
        assert!(report.max_rel_error < 1e-9, "{report:?}");
        assert!(report.passed());
        assert_eq!(model.w, before);
    }

    #[test]
    fn corrupted_gradient_is_caught() {
        let mut model = Linear {
            w: Tensor::from_vec(&[4], vec![0.1, 0.2, -0.3, 0.4]).unwrap(),
        };
        let mut bad = X.to_vec();
        bad[2] *= 1.5;
        let grad = Linear {
            w: Tensor::from_vec(&[4], bad).unwrap(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let report = grad_check(&mut model, &grad, linear_loss, 10, 1e-4, &mut rng);
        assert!(!report.passed());
        assert!(report.max_rel_error > 0.3);
        let (name, index, _, _) = report.worst.unwrap();
        assert_eq!((name.as_str(), index), ("w", 2));
    }
}
