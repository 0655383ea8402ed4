use rand::Rng;

use super::encoder::Encoder;
use super::{Architecture, Distributions, LossTerm, ModelDims, ModelError, Target};
use crate::neural::{prefixed, softmax, softmax_cross_entropy, FeedForward, Parameters, Tensor};
use crate::semantics::{BindingArgument, CallableUnit};

/// The trainable weights of one architecture. The same type holds gradients.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Network {
    SingleRnn {
        core: Encoder,
        head: FeedForward,
    },
    JDraggn {
        core: Encoder,
        unit_head: FeedForward,
        arg_head: FeedForward,
    },
    IDraggn {
        unit_core: Encoder,
        unit_head: FeedForward,
        arg_core: Encoder,
        arg_head: FeedForward,
    },
}

impl Network {
    /// `joint_labels` is only used by Single-RNN.
    pub fn zeros(architecture: Architecture, vocab: usize, dims: &ModelDims, joint_labels: usize) -> Self {
        let enc = || Encoder::zeros(vocab, dims.embedding, dims.hidden);
        let head = |out| FeedForward::zeros(dims.hidden, dims.ff_hidden, out);
        let units = CallableUnit::ALL.len();
        let args = BindingArgument::COUNT;
        match architecture {
            Architecture::SingleRnn => Network::SingleRnn {
                core: enc(),
                head: head(joint_labels),
            },
            Architecture::JDraggn => Network::JDraggn {
                core: enc(),
                unit_head: head(units),
                arg_head: head(args),
            },
            Architecture::IDraggn => Network::IDraggn {
                unit_core: enc(),
                unit_head: head(units),
                arg_core: enc(),
                arg_head: head(args),
            },
        }
    }

    /// Every entry drawn from U(−scale, scale), tensors in `named` order.
    pub fn uniform<R: Rng + ?Sized>(
        architecture: Architecture,
        vocab: usize,
        dims: &ModelDims,
        joint_labels: usize,
        rng: &mut R,
    ) -> Self {
        let mut net = Self::zeros(architecture, vocab, dims, joint_labels);
        for t in net.tensors_mut() {
            *t = Tensor::uniform(t.shape(), dims.init_scale, rng);
        }
        net
    }

    pub fn architecture(&self) -> Architecture {
        match self {
            Network::SingleRnn { .. } => Architecture::SingleRnn,
            Network::JDraggn { .. } => Architecture::JDraggn,
            Network::IDraggn { .. } => Architecture::IDraggn,
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut g = self.clone();
        g.zero();
        g
    }

    /// Whether the named tensor feeds only the binding-argument output.
    pub fn is_argument_path(&self, name: &str) -> bool {
        match self {
            Network::SingleRnn { .. } => false,
            Network::JDraggn { .. } => name.starts_with("arg_head."),
            Network::IDraggn { .. } => name.starts_with("arg."),
        }
    }

    /// Whether the named tensor feeds only the callable-unit output.
    pub fn is_unit_path(&self, name: &str) -> bool {
        match self {
            Network::SingleRnn { .. } => false,
            Network::JDraggn { .. } => name.starts_with("unit_head."),
            Network::IDraggn { .. } => name.starts_with("unit."),
        }
    }

    pub fn forward(&self, tokens: &[usize]) -> Result<Distributions, ModelError> {
        Ok(match self {
            Network::SingleRnn { core, head } => {
                let (h, _) = core.encode(tokens)?;
                Distributions::Joint(softmax(&head.forward(&h).0))
            }
            Network::JDraggn {
                core,
                unit_head,
                arg_head,
            } => {
                let (h, _) = core.encode(tokens)?;
                Distributions::Factored {
                    unit: softmax(&unit_head.forward(&h).0),
                    arg: softmax(&arg_head.forward(&h).0),
                }
            }
            Network::IDraggn {
                unit_core,
                unit_head,
                arg_core,
                arg_head,
            } => {
                let (hu, _) = unit_core.encode(tokens)?;
                let (ha, _) = arg_core.encode(tokens)?;
                Distributions::Factored {
                    unit: softmax(&unit_head.forward(&hu).0),
                    arg: softmax(&arg_head.forward(&ha).0),
                }
            }
        })
    }

    /// Cross-entropy loss of one example, accumulating its gradient into `grads`.
    pub fn loss_and_grad(
        &self,
        tokens: &[usize],
        target: &Target,
        term: LossTerm,
        grads: &mut Network,
    ) -> Result<f64, ModelError> {
        let (use_unit, use_arg) = match term {
            LossTerm::Full => (true, true),
            LossTerm::Unit => (true, false),
            LossTerm::Argument => (false, true),
        };
        match (self, grads, target) {
            (
                Network::SingleRnn { core, head },
                Network::SingleRnn { core: gc, head: gh },
                Target::Joint(label),
            ) => {
                if term != LossTerm::Full {
                    return Err(ModelError::Unsupported(
                        "Single-RNN has a single joint loss".into(),
                    ));
                }
                let (h, cache) = core.encode(tokens)?;
                let (logits, hc) = head.forward(&h);
                let (loss, dlogits) = softmax_cross_entropy(&logits, *label)?;
                let dh = head.backward(&hc, &dlogits, gh);
                core.backward(&cache, dh, gc);
                Ok(loss)
            }
            (
                Network::JDraggn {
                    core,
                    unit_head,
                    arg_head,
                },
                Network::JDraggn {
                    core: gc,
                    unit_head: gu,
                    arg_head: ga,
                },
                Target::Factored { unit, arg },
            ) => {
                let (h, cache) = core.encode(tokens)?;
                let mut dh = vec![0.0; h.len()];
                let mut loss = 0.0;
                if use_unit {
                    let (logits, hc) = unit_head.forward(&h);
                    let (l, d) = softmax_cross_entropy(&logits, *unit)?;
                    loss += l;
                    add(&mut dh, &unit_head.backward(&hc, &d, gu));
                }
                if use_arg {
                    let (logits, hc) = arg_head.forward(&h);
                    let (l, d) = softmax_cross_entropy(&logits, *arg)?;
                    loss += l;
                    add(&mut dh, &arg_head.backward(&hc, &d, ga));
                }
                core.backward(&cache, dh, gc);
                Ok(loss)
            }
            (
                Network::IDraggn {
                    unit_core,
                    unit_head,
                    arg_core,
                    arg_head,
                },
                Network::IDraggn {
                    unit_core: guc,
                    unit_head: guh,
                    arg_core: gac,
                    arg_head: gah,
                },
                Target::Factored { unit, arg },
            ) => {
                let mut loss = 0.0;
                if use_unit {
                    let (h, cache) = unit_core.encode(tokens)?;
                    let (logits, hc) = unit_head.forward(&h);
                    let (l, d) = softmax_cross_entropy(&logits, *unit)?;
                    loss += l;
                    let dh = unit_head.backward(&hc, &d, guh);
                    unit_core.backward(&cache, dh, guc);
                }
                if use_arg {
                    let (h, cache) = arg_core.encode(tokens)?;
                    let (logits, hc) = arg_head.forward(&h);
                    let (l, d) = softmax_cross_entropy(&logits, *arg)?;
                    loss += l;
                    let dh = arg_head.backward(&hc, &d, gah);
                    arg_core.backward(&cache, dh, gac);
                }
                Ok(loss)
            }
            _ => Err(ModelError::Unsupported(
                "gradient buffer or target does not match the architecture".into(),
            )),
        }
    }

    /// Mean loss over `batch`; `grads` receives the mean gradient.
    pub fn batch_loss_and_grad(
        &self,
        batch: &[(Vec<usize>, Target)],
        term: LossTerm,
        grads: &mut Network,
    ) -> Result<f64, ModelError> {
        if batch.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        grads.zero();
        let mut total = 0.0;
        for (tokens, target) in batch {
            total += self.loss_and_grad(tokens, target, term, grads)?;
        }
        let inv = 1.0 / batch.len() as f64;
        grads.scale(inv);
        Ok(total * inv)
    }

    /// Mean loss over `batch` without gradients.
    pub fn batch_loss(&self, batch: &[(Vec<usize>, Target)], term: LossTerm) -> Result<f64, ModelError> {
        let mut scratch = self.zeros_like();
        self.batch_loss_and_grad(batch, term, &mut scratch)
    }
}

fn add(acc: &mut [f64], x: &[f64]) {
    acc.iter_mut().zip(x).for_each(|(a, b)| *a += b);
}

impl Parameters for Network {
    fn named(&self) -> Vec<(String, &Tensor)> {
        match self {
            Network::SingleRnn { core, head } => {
                let mut out = prefixed("core", core.named());
                out.extend(prefixed("head", head.named()));
                out
            }
            Network::JDraggn {
                core,
                unit_head,
                arg_head,
            } => {
                let mut out = prefixed("core", core.named());
                out.extend(prefixed("unit_head", unit_head.named()));
                out.extend(prefixed("arg_head", arg_head.named()));
                out
            }
            Network::IDraggn {
                unit_core,
                unit_head,
                arg_core,
                arg_head,
            } => {
                let mut out = prefixed("unit.core", unit_core.named());
                out.extend(prefixed("unit.head", unit_head.named()));
                out.extend(prefixed("arg.core", arg_core.named()));
                out.extend(prefixed("arg.head", arg_head.named()));
                out
            }
        }
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Network::SingleRnn { core, head } => {
                let mut out = core.tensors_mut();
                out.extend(head.tensors_mut());
                out
            }
            Network::JDraggn {
                core,
                unit_head,
                arg_head,
            } => {
                let mut out = core.tensors_mut();
                out.extend(unit_head.tensors_mut());
                out.extend(arg_head.tensors_mut());
                out
            }
            Network::IDraggn {
                unit_core,
                unit_head,
                arg_core,
                arg_head,
            } => {
                let mut out = unit_core.tensors_mut();
                out.extend(unit_head.tensors_mut());
                out.extend(arg_core.tensors_mut());
                out.extend(arg_head.tensors_mut());
                out
            }
        }
    }
}
