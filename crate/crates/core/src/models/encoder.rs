use rand::Rng;

use super::ModelError;
use crate::neural::{prefixed, GruCell, GruStepCache, Parameters, Tensor};

/// Embedding lookup followed by a GRU; the final hidden state is the
/// summary vector of the segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    pub embedding: Tensor,
    pub gru: GruCell,
}

#[derive(Debug, Clone)]
pub struct EncoderCache {
    tokens: Vec<usize>,
    steps: Vec<GruStepCache>,
}

impl Encoder {
    pub fn zeros(vocab: usize, embedding: usize, hidden: usize) -> Self {
        Self {
            embedding: Tensor::zeros(&[vocab, embedding]),
            gru: GruCell::zeros(embedding, hidden),
        }
    }

    pub fn uniform<R: Rng + ?Sized>(
        vocab: usize,
        embedding: usize,
        hidden: usize,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        let mut enc = Self::zeros(vocab, embedding, hidden);
        for t in enc.tensors_mut() {
            *t = Tensor::uniform(t.shape(), scale, rng);
        }
        enc
    }

    pub fn hidden_dim(&self) -> usize {
        self.gru.hidden_dim()
    }

    pub fn vocab_size(&self) -> usize {
        self.embedding.rows()
    }

    /// Run the GRU from a zero state over the embedded tokens.
    pub fn encode(&self, tokens: &[usize]) -> Result<(Vec<f64>, EncoderCache), ModelError> {
        if tokens.is_empty() {
            return Err(ModelError::EmptySequence);
        }
        if let Some(&bad) = tokens.iter().find(|&&t| t >= self.vocab_size()) {
            return Err(ModelError::TokenOutOfRange {
                token: bad,
                vocab: self.vocab_size(),
            });
        }
        let mut h = vec![0.0; self.hidden_dim()];
        let mut steps = Vec::with_capacity(tokens.len());
        for &t in tokens {
            let (next, cache) = self.gru.forward(self.embedding.row(t), &h);
            steps.push(cache);
            h = next;
        }
        Ok((
            h,
            EncoderCache {
                tokens: tokens.to_vec(),
                steps,
            },
        ))
    }

    /// Backpropagate through time from the gradient on the final state.
    pub fn backward(&self, cache: &EncoderCache, dh_final: Vec<f64>, grads: &mut Encoder) {
        let mut dh = dh_final;
        for (step, &t) in cache.steps.iter().zip(&cache.tokens).rev() {
            let (dx, dh_prev) = self.gru.backward(step, &dh, &mut grads.gru);
            grads
                .embedding
                .row_mut(t)
                .iter_mut()
                .zip(&dx)
                .for_each(|(g, d)| *g += d);
            dh = dh_prev;
        }
    }
}

impl Parameters for Encoder {
    fn named(&self) -> Vec<(String, &Tensor)> {
        let mut out = vec![("embedding".to_string(), &self.embedding)];
        out.extend(prefixed("gru", self.gru.named()));
        out
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![&mut self.embedding];
        out.extend(self.gru.tensors_mut());
        out
    }
}
