use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Architecture, LossTerm, Model, ModelDims, ModelError, Target};
use crate::corpus::{InstructionRecord, Split};
use crate::neural::Adam;
use crate::semantics::{Category, GroundingModule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub dims: ModelDims,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 125,
            batch_size: 16,
            learning_rate: 1e-4,
            seed: 0,
            dims: ModelDims::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    /// Mean per-example loss of each epoch, measured before each batch update.
    pub epoch_losses: Vec<f64>,
}

/// Build a model from `records` (vocabulary and label space included) and
/// fit it with Adam on shuffled mini-batches. `on_epoch` receives the
/// 1-based epoch number and its mean loss.
pub fn train(
    architecture: Architecture,
    records: &[InstructionRecord],
    config: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<(Model, TrainingHistory), ModelError> {
    if config.batch_size == 0 {
        return Err(ModelError::Unsupported("batch size must be positive".into()));
    }
    let mut model = Model::for_records(architecture, records, &config.dims, config.seed)?;
    let examples: Vec<(Vec<usize>, Target)> = records
        .iter()
        .map(|r| Ok((model.encode(&r.tokens), model.target(&r.label)?)))
        .collect::<Result<_, ModelError>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut adam = Adam::new(config.learning_rate);
    let mut grads = model.network().zeros_like();
    let mut history = TrainingHistory::default();
    let mut batch = Vec::with_capacity(config.batch_size);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| examples[i].clone()));
            let loss = model
                .network()
                .batch_loss_and_grad(&batch, LossTerm::Full, &mut grads)?;
            total += loss * chunk.len() as f64;
            adam.step(model.network_mut(), &grads)?;
        }
        let mean = total / examples.len() as f64;
        history.epoch_losses.push(mean);
        on_epoch(epoch, mean);
    }
    Ok((model, history))
}

/// Correct/total counts per evaluation bucket. Records tagged `test-unseen`
/// count only toward the unseen bucket.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub action_correct: usize,
    pub action_total: usize,
    pub goal_correct: usize,
    pub goal_total: usize,
    pub unseen_correct: usize,
    pub unseen_total: usize,
}

fn ratio(correct: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| correct as f64 / total as f64)
}

impl Metrics {
    pub fn action_accuracy(&self) -> Option<f64> {
        ratio(self.action_correct, self.action_total)
    }

    pub fn goal_accuracy(&self) -> Option<f64> {
        ratio(self.goal_correct, self.goal_total)
    }

    pub fn unseen_accuracy(&self) -> Option<f64> {
        ratio(self.unseen_correct, self.unseen_total)
    }

    /// Accuracy over every evaluated record.
    pub fn overall_accuracy(&self) -> Option<f64> {
        ratio(
            self.action_correct + self.goal_correct + self.unseen_correct,
            self.action_total + self.goal_total + self.unseen_total,
        )
    }

    pub fn total(&self) -> usize {
        self.action_total + self.goal_total + self.unseen_total
    }
}

/// Action records need the exact pair; goal records need the same grounded
/// reward after the grounding module. Grounding failures count as wrong.
pub fn evaluate(
    model: &Model,
    records: &[InstructionRecord],
    grounding: &GroundingModule,
) -> Result<Metrics, ModelError> {
    let mut m = Metrics::default();
    for r in records {
        let predicted = model.predict(&r.tokens)?;
        let correct = match r.category() {
            Category::Action => predicted == r.label,
            Category::Goal => match (grounding.ground(&predicted), grounding.ground(&r.label)) {
                (Ok(p), Ok(t)) => p == t,
                _ => false,
            },
        };
        let (c, t) = match (r.split, r.category()) {
            (Split::TestUnseen, _) => (&mut m.unseen_correct, &mut m.unseen_total),
            (_, Category::Action) => (&mut m.action_correct, &mut m.action_total),
            (_, Category::Goal) => (&mut m.goal_correct, &mut m.goal_total),
        };
        *t += 1;
        *c += usize::from(correct);
    }
    Ok(m)
}
