use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::HarnessError;
use crate::corpus::{default_holdout, SplitMode};
use crate::models::{Architecture, ModelDims, TrainConfig};
use crate::planner::DEFAULT_MAX_STEPS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Standard,
    Unseen,
}

impl SplitKind {
    pub fn name(self) -> &'static str {
        match self {
            SplitKind::Standard => "standard",
            SplitKind::Unseen => "unseen",
        }
    }

    pub fn mode(self) -> SplitMode {
        match self {
            SplitKind::Standard => SplitMode::Standard,
            SplitKind::Unseen => SplitMode::Unseen(default_holdout()),
        }
    }
}

impl fmt::Display for SplitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SplitKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(SplitKind::Standard),
            "unseen" => Ok(SplitKind::Unseen),
            other => Err(HarnessError::Config(format!(
                "split must be standard or unseen, got {other:?}"
            ))),
        }
    }
}

/// Settings shared by `train`, `eval` and `serve`. Stored as flat
/// `key = value` lines; `#` starts a comment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Map file; the built-in default map when absent.
    pub map: Option<PathBuf>,
    /// Corpus file; generated from `corpus_seed` when absent.
    pub corpus: Option<PathBuf>,
    pub corpus_seed: u64,
    pub models: Vec<Architecture>,
    pub seeds: Vec<u64>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub embedding: usize,
    pub hidden: usize,
    pub ff_hidden: usize,
    pub split: SplitKind,
    pub out_dir: PathBuf,
    pub slip: f64,
    pub max_steps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        Self {
            map: None,
            corpus: None,
            corpus_seed: 0,
            models: Architecture::ALL.to_vec(),
            seeds: vec![0, 1, 2],
            epochs: train.epochs,
            batch_size: train.batch_size,
            learning_rate: train.learning_rate,
            embedding: train.dims.embedding,
            hidden: train.dims.hidden,
            ff_hidden: train.dims.ff_hidden,
            split: SplitKind::Standard,
            out_dir: PathBuf::from("runs"),
            slip: 0.0,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

pub const CONFIG_KEYS: [&str; 15] = [
    "map",
    "corpus",
    "corpus_seed",
    "model",
    "seeds",
    "epochs",
    "batch_size",
    "learning_rate",
    "embedding",
    "hidden",
    "ff_hidden",
    "split",
    "out_dir",
    "slip",
    "max_steps",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, HarnessError> {
    value
        .parse()
        .map_err(|_| HarnessError::Config(format!("{key}: cannot parse {value:?}")))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, HarnessError> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(HarnessError::Config(format!("{key}: empty list")));
    }
    Ok(items)
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut config = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", i + 1)))?;
            config
                .set(key.trim(), value.trim())
                .map_err(|e| HarnessError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text)
    }

    /// Set one key. CLI flags use the same names with `-` for `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        match key.replace('-', "_").as_str() {
            "map" => self.map = (!value.is_empty()).then(|| PathBuf::from(value)),
            "corpus" => self.corpus = (!value.is_empty()).then(|| PathBuf::from(value)),
            "corpus_seed" => self.corpus_seed = parse_num(key, value)?,
            "model" | "models" => {
                self.models = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<Architecture>()
                            .map_err(|e| HarnessError::Config(e.to_string()))
                    })
                    .collect::<Result<_, _>>()?;
                if self.models.is_empty() {
                    return Err(HarnessError::Config("model: empty list".into()));
                }
            }
            "seeds" | "seed" => self.seeds = list(key, value)?,
            "epochs" => self.epochs = parse_num(key, value)?,
            "batch_size" => self.batch_size = parse_num(key, value)?,
            "learning_rate" => self.learning_rate = parse_num(key, value)?,
            "embedding" => self.embedding = parse_num(key, value)?,
            "hidden" => self.hidden = parse_num(key, value)?,
            "ff_hidden" => self.ff_hidden = parse_num(key, value)?,
            "split" => self.split = value.parse()?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "slip" => self.slip = parse_num(key, value)?,
            "max_steps" => self.max_steps = parse_num(key, value)?,
            other => return Err(HarnessError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Canonical text form: every key, fixed order. Its hash identifies the run.
    pub fn to_text(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let values = [
            path(&self.map),
            path(&self.corpus),
            self.corpus_seed.to_string(),
            join(&self.models),
            join(&self.seeds),
            self.epochs.to_string(),
            self.batch_size.to_string(),
            self.learning_rate.to_string(),
            self.embedding.to_string(),
            self.hidden.to_string(),
            self.ff_hidden.to_string(),
            self.split.to_string(),
            self.out_dir.display().to_string(),
            self.slip.to_string(),
            self.max_steps.to_string(),
        ];
        CONFIG_KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        for path in [&self.map, &self.corpus].into_iter().flatten() {
            if !path.is_file() {
                return Err(HarnessError::MissingFile(path.clone()));
            }
        }
        if self.seeds.is_empty() || self.models.is_empty() {
            return Err(HarnessError::Config(
                "at least one model and one seed are required".into(),
            ));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(HarnessError::Config(
                "epochs and batch_size must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(HarnessError::Config("learning_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.slip) {
            return Err(HarnessError::Config("slip must be in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            seed,
            dims: ModelDims {
                embedding: self.embedding,
                hidden: self.hidden,
                ff_hidden: self.ff_hidden,
                ..ModelDims::default()
            },
        }
    }
}
