use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{RunConfig, SplitKind};
use super::manifest::Manifest;
use super::report::{MetricsReport, ModelResult, SeedResult};
use super::HarnessError;
use crate::corpus::{corpus_to_string, generate, read_corpus, split, CorpusSpec, InstructionRecord, Split};
use crate::models::{evaluate, train, Architecture, Model, ModelError};
use crate::neural::Checkpoint;
use crate::planner::Trajectory;
use crate::semantics::{dispatch, GroundedTask, GroundingModule, UnitArgPair};
use crate::world::{default_map, parse_map, GridMap, WorldState};

pub fn load_map(path: Option<&Path>) -> Result<GridMap, HarnessError> {
    match path {
        None => Ok(default_map()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| HarnessError::io(p, e))?;
            Ok(parse_map(&text)?)
        }
    }
}

pub fn load_model(path: &Path) -> Result<Model, HarnessError> {
    if !path.is_file() {
        return Err(HarnessError::MissingFile(path.to_path_buf()));
    }
    let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(Model::from_checkpoint(&Checkpoint::from_bytes(&bytes)?)?)
}

pub fn checkpoint_path(out_dir: &Path, architecture: Architecture, seed: u64) -> PathBuf {
    out_dir.join(format!("{architecture}-seed{seed}.ckpt"))
}

/// Records for a run. A corpus file is used with its own split tags; a
/// generated corpus is partitioned according to `config.split`.
pub fn load_corpus(config: &RunConfig) -> Result<Vec<InstructionRecord>, HarnessError> {
    match &config.corpus {
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
            Ok(read_corpus(std::io::BufReader::new(file))?)
        }
        None => {
            let spec = CorpusSpec {
                seed: config.corpus_seed,
                ..CorpusSpec::default()
            };
            Ok(partition(generate(&spec)?, config.split, config.corpus_seed))
        }
    }
}

fn partition(records: Vec<InstructionRecord>, kind: SplitKind, seed: u64) -> Vec<InstructionRecord> {
    match kind {
        SplitKind::Standard => records,
        SplitKind::Unseen => split(&records, &kind.mode(), seed),
    }
}

fn create_dir(path: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(path).map_err(|e| HarnessError::io(path, e))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), HarnessError> {
    fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSummary {
    pub path: PathBuf,
    pub train: usize,
    pub test: usize,
    pub test_unseen: usize,
}

/// Generate a corpus file plus `<out>.manifest.json`.
pub fn cmd_gen_corpus(spec: &CorpusSpec, kind: SplitKind, out: &Path) -> Result<CorpusSummary, HarnessError> {
    let records = partition(generate(spec)?, kind, spec.seed);
    let text = corpus_to_string(&records);
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write(out, &text)?;
    let spec_text =
        serde_json::to_string(spec).expect("specs always serialize") + &format!("\nsplit={kind}\n");
    let manifest_path = PathBuf::from(format!("{}.manifest.json", out.display()));
    Manifest::new("gen-corpus", vec![spec.seed], &spec_text, &text).write(&manifest_path)?;
    let count = |s| records.iter().filter(|r| r.split == s).count();
    Ok(CorpusSummary {
        path: out.to_path_buf(),
        train: count(Split::Train),
        test: count(Split::Test),
        test_unseen: count(Split::TestUnseen),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedRun {
    pub architecture: Architecture,
    pub seed: u64,
    pub checkpoint: PathBuf,
    pub final_loss: f64,
    pub seconds: f64,
}

/// Train every configured model for every seed. Writes
/// `<arch>-seed<N>.ckpt`, `<arch>-seed<N>.loss.tsv`, `config.txt` and
/// `manifest-train.json` into `out_dir`.
pub fn cmd_train(
    config: &RunConfig,
    mut progress: impl FnMut(&str),
) -> Result<Vec<TrainedRun>, HarnessError> {
    config.validate()?;
    let records = load_corpus(config)?;
    let train_records: Vec<InstructionRecord> = records
        .iter()
        .filter(|r| r.split == Split::Train)
        .cloned()
        .collect();
    if train_records.is_empty() {
        return Err(HarnessError::Model(ModelError::EmptyTrainingSet));
    }
    create_dir(&config.out_dir)?;
    let mut runs = Vec::new();
    for &architecture in &config.models {
        for &seed in &config.seeds {
            let started = Instant::now();
            let train_config = config.train_config(seed);
            let (model, history) = train(architecture, &train_records, &train_config, |epoch, loss| {
                if epoch % 25 == 0 || epoch == train_config.epochs {
                    progress(&format!(
                        "{architecture} seed {seed} epoch {epoch}: loss {loss:.6}"
                    ));
                }
            })?;
            if let Some(bad) = history.epoch_losses.iter().position(|l| !l.is_finite()) {
                return Err(HarnessError::Internal(format!(
                    "{architecture} seed {seed}: non-finite loss at epoch {}",
                    bad + 1
                )));
            }
            let checkpoint = checkpoint_path(&config.out_dir, architecture, seed);
            write(&checkpoint, model.to_checkpoint().to_bytes())?;
            let log: String = std::iter::once("epoch\tloss\n".to_string())
                .chain(
                    history
                        .epoch_losses
                        .iter()
                        .enumerate()
                        .map(|(i, l)| format!("{}\t{l:.12e}\n", i + 1)),
                )
                .collect();
            write(
                &config.out_dir.join(format!("{architecture}-seed{seed}.loss.tsv")),
                log,
            )?;
            runs.push(TrainedRun {
                architecture,
                seed,
                checkpoint,
                final_loss: history.epoch_losses.last().copied().unwrap_or(f64::NAN),
                seconds: started.elapsed().as_secs_f64(),
            });
        }
    }
    let config_text = config.to_text();
    write(&config.out_dir.join("config.txt"), &config_text)?;
    Manifest::new(
        "train",
        config.seeds.clone(),
        &config_text,
        &corpus_to_string(&records),
    )
    .write(&config.out_dir.join("manifest-train.json"))?;
    Ok(runs)
}

/// Evaluate the checkpoints in `out_dir` on every non-training record.
/// Writes `report.txt`, `report.json` and `manifest-eval.json`.
pub fn cmd_eval(config: &RunConfig) -> Result<MetricsReport, HarnessError> {
    config.validate()?;
    let records = load_corpus(config)?;
    let test: Vec<InstructionRecord> = records
        .iter()
        .filter(|r| r.split != Split::Train)
        .cloned()
        .collect();
    let map = load_map(config.map.as_deref())?;
    let grounding = GroundingModule::for_map(&map)?;
    let mut models = Vec::new();
    for &architecture in &config.models {
        let mut seeds = Vec::new();
        for &seed in &config.seeds {
            let model = load_model(&checkpoint_path(&config.out_dir, architecture, seed))?;
            if model.architecture() != architecture {
                return Err(HarnessError::Config(format!(
                    "checkpoint for {architecture} seed {seed} holds a {} model",
                    model.architecture()
                )));
            }
            let metrics = evaluate(&model, &test, &grounding)?;
            seeds.push(SeedResult { seed, metrics });
        }
        models.push(ModelResult { architecture, seeds });
    }
    let report = MetricsReport {
        split: config.split.to_string(),
        models,
    };
    write(&config.out_dir.join("report.txt"), report.render_table())?;
    write(&config.out_dir.join("report.json"), report.to_json())?;
    Manifest::new(
        "eval",
        config.seeds.clone(),
        &config.to_text(),
        &corpus_to_string(&records),
    )
    .write(&config.out_dir.join("manifest-eval.json"))?;
    Ok(report)
}

pub fn cmd_ground(
    text: &str,
    model: &Model,
    map: &GridMap,
) -> Result<(UnitArgPair, GroundedTask), HarnessError> {
    let pair = model.predict_text(text)?;
    let task = GroundingModule::for_map(map)?.ground(&pair)?;
    Ok((pair, task))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecOutcome {
    pub pair: UnitArgPair,
    pub task: GroundedTask,
    pub trajectory: Trajectory,
}

/// Ground `text` and execute it from `start`.
pub fn cmd_exec(
    text: &str,
    model: &Model,
    map: &GridMap,
    start: WorldState,
    slip: f64,
    max_steps: usize,
    seed: u64,
) -> Result<ExecOutcome, HarnessError> {
    let (pair, task) = cmd_ground(text, model, map)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trajectory = dispatch(&task, map, start, slip, max_steps, &mut rng)?;
    Ok(ExecOutcome {
        pair,
        task,
        trajectory,
    })
}
