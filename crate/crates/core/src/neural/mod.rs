//! Small dense numerical toolkit: tensors, GRU cell, ReLU feed-forward head,
//! softmax cross-entropy, Adam, a finite-difference gradient checker and the
//! checkpoint container. Everything is `f64`; every backward pass is written
//! out by hand for the fixed architectures used in [`crate::models`].

mod adam;
mod checkpoint;
mod feedforward;
mod gradcheck;
mod gru;
mod loss;
mod tensor;

use thiserror::Error;

pub use adam::{adam_update, Adam};
pub use checkpoint::{Checkpoint, MAGIC as CHECKPOINT_MAGIC, VERSION as CHECKPOINT_VERSION};
pub use feedforward::{FeedForward, FeedForwardCache};
pub use gradcheck::{grad_check, relative_error, GradCheckReport, FD_STEP, REL_ERROR_FLOOR};
pub use gru::{gru_step, GruCell, GruStepCache};
pub use loss::{argmax, softmax, softmax_cross_entropy};
pub use tensor::{axpy, dot, sigmoid, Tensor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuralError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// A fixed, ordered collection of named parameter tensors.
///
/// `named` and `tensors_mut` must list the same tensors in the same order.
/// The same type doubles as its own gradient container.
pub trait Parameters {
    fn named(&self) -> Vec<(String, &Tensor)>;
    fn tensors_mut(&mut self) -> Vec<&mut Tensor>;

    fn parameter_count(&self) -> usize {
        self.named().iter().map(|(_, t)| t.len()).sum()
    }

    fn zero(&mut self) {
        self.tensors_mut().into_iter().for_each(|t| t.fill(0.0));
    }

    fn scale(&mut self, c: f64) {
        self.tensors_mut().into_iter().for_each(|t| t.scale(c));
    }

    fn add_assign(&mut self, other: &Self)
    where
        Self: Sized,
    {
        let others: Vec<&Tensor> = other.named().into_iter().map(|(_, t)| t).collect();
        for (t, o) in self.tensors_mut().into_iter().zip(others) {
            t.add_assign(o);
        }
    }
}

/// Prefix every name from `inner` with `prefix.`.
pub fn prefixed<'a>(prefix: &str, inner: Vec<(String, &'a Tensor)>) -> Vec<(String, &'a Tensor)> {
    inner
        .into_iter()
        .map(|(n, t)| (format!("{prefix}.{n}"), t))
        .collect()
}
