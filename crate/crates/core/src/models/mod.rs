//! The three grounding architectures:
//!
//! * Single-RNN: one encoder and one softmax over the joint pairs seen in training.
//! * J-DRAGGN: one shared encoder feeding a callable-unit head and a binding-argument head.
//! * I-DRAGGN: two disjoint encoder/head paths, one per output factor.
//!
//! Decoding picks the unit first and then the best argument among those valid
//! for that unit.

mod encoder;
mod network;
mod train;
mod vocab;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{tokenize, CorpusError, InstructionRecord};
use crate::neural::{argmax, Checkpoint, NeuralError, Parameters};
use crate::semantics::{valid_arguments, BindingArgument, CallableUnit, UnitArgPair};

pub use encoder::{Encoder, EncoderCache};
pub use network::Network;
pub use train::{evaluate, train, Metrics, TrainConfig, TrainingHistory};
pub use vocab::{Vocabulary, PAD, PAD_TOKEN, UNK, UNK_TOKEN};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("empty token sequence")]
    EmptySequence,
    #[error("token index {token} outside vocabulary of {vocab}")]
    TokenOutOfRange { token: usize, vocab: usize },
    #[error("pair {0} is not in the Single-RNN label space")]
    LabelNotInSpace(UnitArgPair),
    #[error("no training records")]
    EmptyTrainingSet,
    #[error("unknown architecture {0:?}")]
    UnknownArchitecture(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    SingleRnn,
    JDraggn,
    IDraggn,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [
        Architecture::SingleRnn,
        Architecture::JDraggn,
        Architecture::IDraggn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::SingleRnn => "single-rnn",
            Architecture::JDraggn => "j-draggn",
            Architecture::IDraggn => "i-draggn",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| ModelError::UnknownArchitecture(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelDims {
    pub embedding: usize,
    pub hidden: usize,
    pub ff_hidden: usize,
    pub init_scale: f64,
}

impl Default for ModelDims {
    fn default() -> Self {
        Self {
            embedding: 64,
            hidden: 64,
            ff_hidden: 80,
            init_scale: 0.08,
        }
    }
}

/// Output-space indices of one training label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Joint(usize),
    Factored { unit: usize, arg: usize },
}

/// Which cross-entropy terms to include.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossTerm {
    Full,
    Unit,
    Argument,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Distributions {
    Joint(Vec<f64>),
    Factored { unit: Vec<f64>, arg: Vec<f64> },
}

/// Unit argmax, then argument argmax restricted to the unit's valid
/// arguments. Ties go to the lowest enumeration index.
pub fn decode_factored(unit: &[f64], arg: &[f64]) -> UnitArgPair {
    let unit = CallableUnit::from_index(argmax(unit)).expect("unit head has one output per callable unit");
    let mut best: Option<BindingArgument> = None;
    for a in valid_arguments(unit) {
        if best.is_none_or(|b| arg[a.index()] > arg[b.index()]) {
            best = Some(a);
        }
    }
    UnitArgPair::new(unit, best.expect("every unit has valid arguments")).expect("masked decode is valid")
}

/// A network together with its vocabulary and, for Single-RNN, its label space.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    vocab: Vocabulary,
    labels: Vec<UnitArgPair>,
    net: Network,
}

impl Model {
    pub fn new(
        architecture: Architecture,
        vocab: Vocabulary,
        labels: Vec<UnitArgPair>,
        dims: &ModelDims,
        seed: u64,
    ) -> Result<Self, ModelError> {
        let labels = match architecture {
            Architecture::SingleRnn if labels.is_empty() => return Err(ModelError::EmptyTrainingSet),
            Architecture::SingleRnn => labels,
            _ => Vec::new(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = Network::uniform(architecture, vocab.len(), dims, labels.len(), &mut rng);
        Ok(Self { vocab, labels, net })
    }

    /// Vocabulary and label space come from `records` only.
    pub fn for_records(
        architecture: Architecture,
        records: &[InstructionRecord],
        dims: &ModelDims,
        seed: u64,
    ) -> Result<Self, ModelError> {
        if records.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        let vocab = Vocabulary::build(records.iter().map(|r| &r.tokens));
        let mut labels: Vec<UnitArgPair> = records.iter().map(|r| r.label).collect();
        labels.sort();
        labels.dedup();
        Self::new(architecture, vocab, labels, dims, seed)
    }

    pub fn architecture(&self) -> Architecture {
        self.net.architecture()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Joint label space (Single-RNN only; empty otherwise).
    pub fn labels(&self) -> &[UnitArgPair] {
        &self.labels
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn network_mut(&mut self) -> &mut Network {
        &mut self.net
    }

    pub fn target(&self, label: &UnitArgPair) -> Result<Target, ModelError> {
        match self.architecture() {
            Architecture::SingleRnn => self
                .labels
                .binary_search(label)
                .map(Target::Joint)
                .map_err(|_| ModelError::LabelNotInSpace(*label)),
            _ => Ok(Target::Factored {
                unit: label.unit().index(),
                arg: label.arg().index(),
            }),
        }
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        self.vocab.encode(tokens)
    }

    pub fn forward(&self, tokens: &[String]) -> Result<Distributions, ModelError> {
        self.net.forward(&self.encode(tokens))
    }

    pub fn predict_ids(&self, ids: &[usize]) -> Result<UnitArgPair, ModelError> {
        Ok(match self.net.forward(ids)? {
            Distributions::Joint(p) => self.labels[argmax(&p)],
            Distributions::Factored { unit, arg } => decode_factored(&unit, &arg),
        })
    }

    pub fn predict(&self, tokens: &[String]) -> Result<UnitArgPair, ModelError> {
        self.predict_ids(&self.encode(tokens))
    }

    pub fn predict_text(&self, text: &str) -> Result<UnitArgPair, ModelError> {
        self.predict(&tokenize(text)?)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            architecture: self.architecture().name().to_string(),
            vocabulary: self.vocab.tokens().to_vec(),
            labels: self.labels.iter().map(ToString::to_string).collect(),
            tensors: self
                .net
                .named()
                .into_iter()
                .map(|(n, t)| (n, t.clone()))
                .collect(),
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self, ModelError> {
        let architecture: Architecture = ckpt.architecture.parse()?;
        let vocab = Vocabulary::from_tokens(ckpt.vocabulary.clone())?;
        let mut labels = Vec::with_capacity(ckpt.labels.len());
        for l in &ckpt.labels {
            let pair: UnitArgPair = l
                .parse()
                .map_err(|e| ModelError::Checkpoint(format!("label {l:?}: {e}")))?;
            labels.push(pair);
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ModelError::Checkpoint("labels are not in canonical order".into()));
        }

        let prefix = match architecture {
            Architecture::IDraggn => "unit.core",
            _ => "core",
        };
        let head = match architecture {
            Architecture::SingleRnn => "head",
            Architecture::JDraggn => "unit_head",
            Architecture::IDraggn => "unit.head",
        };
        let embedding = ckpt.tensor(&format!("{prefix}.embedding"))?;
        let hidden = ckpt.tensor(&format!("{prefix}.gru.u_z"))?;
        let ff = ckpt.tensor(&format!("{head}.w1"))?;
        if embedding.shape().len() != 2 || hidden.shape().len() != 2 || ff.shape().len() != 2 {
            return Err(ModelError::Checkpoint(
                "dimension tensors must be matrices".into(),
            ));
        }
        let dims = ModelDims {
            embedding: embedding.cols(),
            hidden: hidden.rows(),
            ff_hidden: ff.rows(),
            init_scale: 0.0,
        };

        let mut net = Network::zeros(architecture, vocab.len(), &dims, labels.len());
        let names: Vec<String> = net.named().into_iter().map(|(n, _)| n).collect();
        if names.len() != ckpt.tensors.len() {
            return Err(ModelError::Checkpoint(format!(
                "expected {} tensors, found {}",
                names.len(),
                ckpt.tensors.len()
            )));
        }
        for (name, slot) in names.iter().zip(net.tensors_mut()) {
            let stored = ckpt.tensor(name)?;
            if stored.shape() != slot.shape() {
                return Err(ModelError::Checkpoint(format!(
                    "tensor {name}: shape {:?}, expected {:?}",
                    stored.shape(),
                    slot.shape()
                )));
            }
            *slot = stored.clone();
        }
        Ok(Self { vocab, labels, net })
    }
}
