//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.
//!
//! Arguments filter criteria by substring, e.g.
//! `cargo test --release --test acceptance -- planner masking`.

mod common;

use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use draggn::corpus::{generate, records_in, CorpusSpec, InstructionRecord, Split};
use draggn::harness::{
    checkpoint_path, cmd_eval, cmd_gen_corpus, cmd_train, Column, MetricsReport, RunConfig, SplitKind,
};
use draggn::models::{Architecture, LossTerm, Model, ModelDims, Target};
use draggn::neural::{grad_check, Parameters};
use draggn::planner::{
    execute_policy, value_iteration, Execution, GroundedReward, Termination, DEFAULT_MAX_STEPS,
    DEFAULT_TOLERANCE,
};
use draggn::semantics::{is_valid, GroundingModule, UnitArgPair};
use draggn::world::{default_map, evaluate, Color, Pos, WorldState};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

const SEEDS: [u64; 3] = [0, 1, 2];
const PIPELINE_LIMIT: Duration = Duration::from_secs(90 * 60);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn fmt(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn train_records() -> Vec<InstructionRecord> {
    records_in(&generate(&CorpusSpec::default()).unwrap(), Split::Train)
}

fn batch(model: &Model, records: &[&InstructionRecord]) -> Vec<(Vec<usize>, Target)> {
    records
        .iter()
        .map(|r| (model.encode(&r.tokens), model.target(&r.label).unwrap()))
        .collect()
}

/// Full 3-model x 3-seed train and eval on one split, timed.
fn pipeline(split: SplitKind) -> Result<(MetricsReport, Duration), String> {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let config = RunConfig {
        models: Architecture::ALL.to_vec(),
        seeds: SEEDS.to_vec(),
        split,
        out_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    let started = Instant::now();
    let runs = cmd_train(&config, |_| {}).map_err(|e| e.to_string())?;
    for run in &runs {
        eprintln!(
            "  [{split}] {} seed {}: {:.0}s, final loss {:.2e}",
            run.architecture, run.seed, run.seconds, run.final_loss
        );
    }
    let report = cmd_eval(&config).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    eprint!("{}", report.render_table());
    Ok((report, elapsed))
}

fn structural_zero(unseen: &MetricsReport) -> Outcome {
    let single = unseen.values(Architecture::SingleRnn, Column::Unseen);
    outcome(
        single.len() == SEEDS.len() && single.iter().all(|&v| v == 0.0),
        format!("single-rnn unseen accuracy per seed {}", fmt(&single)),
    )
}

fn generalization_ordering(unseen: &MetricsReport, elapsed: Duration) -> Outcome {
    let i = unseen.values(Architecture::IDraggn, Column::Unseen);
    let j = unseen.values(Architecture::JDraggn, Column::Unseen);
    let i_ok = i.len() == SEEDS.len() && i.iter().all(|&v| v >= 0.90);
    let j_ok = j.len() == SEEDS.len() && mean(&j) > 0.0 && mean(&j) < mean(&i);
    let time_ok = elapsed < PIPELINE_LIMIT;
    outcome(
        i_ok && j_ok && time_ok,
        format!(
            "i-draggn unseen {} (each >= 0.90), j-draggn unseen {} mean {:.3} in (0, {:.3}), pipeline {:.1} min (< 90)",
            fmt(&i),
            fmt(&j),
            mean(&j),
            mean(&i),
            elapsed.as_secs_f64() / 60.0
        ),
    )
}

fn standard_split(standard: &MetricsReport, elapsed: Duration) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for arch in Architecture::ALL {
        let action = standard.values(arch, Column::Action);
        let goal = standard.values(arch, Column::Goal);
        ok &= action.len() == SEEDS.len() && action.iter().all(|&v| v >= 0.90);
        ok &= goal.len() == SEEDS.len() && goal.iter().all(|&v| v >= 0.80);
        parts.push(format!("{arch} action {} goal {}", fmt(&action), fmt(&goal)));
    }
    ok &= elapsed < PIPELINE_LIMIT;
    outcome(
        ok,
        format!(
            "{}; pipeline {:.1} min",
            parts.join("; "),
            elapsed.as_secs_f64() / 60.0
        ),
    )
}

fn independence() -> Outcome {
    let records = train_records();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    let mut nonzero_unit = 0;
    for b in 0..10u64 {
        let model = Model::for_records(Architecture::IDraggn, &records, &ModelDims::default(), b).unwrap();
        let picked: Vec<&InstructionRecord> = records.choose_multiple(&mut rng, 16).collect();
        let mut grads = model.network().zeros_like();
        model
            .network()
            .batch_loss_and_grad(&batch(&model, &picked), LossTerm::Unit, &mut grads)
            .unwrap();
        for (name, g) in grads.named() {
            if model.network().is_argument_path(&name) {
                if g.data().iter().any(|&v| v != 0.0) {
                    return outcome(false, format!("batch {b}: non-zero unit-loss gradient on {name}"));
                }
                checked += g.len();
            } else if g.data().iter().any(|&v| v != 0.0) {
                nonzero_unit += 1;
            }
        }
    }
    outcome(
        nonzero_unit > 0,
        format!("10 batches of 16: {checked} argument-path gradient entries all exactly 0"),
    )
}

fn gradient_correctness() -> Outcome {
    let records = train_records();
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ok = true;
    let mut parts = Vec::new();
    for arch in Architecture::ALL {
        let mut model = Model::for_records(arch, &records, &ModelDims::default(), 13).unwrap();
        let picked: Vec<&InstructionRecord> = records.choose_multiple(&mut rng, 8).collect();
        let b = batch(&model, &picked);
        let mut grads = model.network().zeros_like();
        model
            .network()
            .batch_loss_and_grad(&b, LossTerm::Full, &mut grads)
            .unwrap();
        let report = grad_check(
            model.network_mut(),
            &grads,
            |net| net.batch_loss(&b, LossTerm::Full).unwrap(),
            25,
            1e-4,
            &mut rng,
        );
        ok &= report.passed();
        let worst = report
            .worst
            .as_ref()
            .map(|w| format!("{}[{}]", w.0, w.1))
            .unwrap_or_default();
        parts.push(format!(
            "{arch} max rel err {:.2e} over {} entries (worst {worst})",
            report.max_rel_error, report.checked
        ));
    }
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(60);
    outcome(ok, format!("{}; {:.1}s", parts.join("; "), elapsed.as_secs_f64()))
}

fn planner_oracle() -> Outcome {
    let map = default_map();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_residual: f64 = 0.0;
    let mut instances = 0;
    while instances < 100 {
        let start = common::random_state(&map, &mut rng);
        let goal = common::random_goal(&map, &mut rng);
        let Some(shortest) = common::bfs_distance(&map, start, &goal) else {
            continue;
        };
        let policy =
            Arc::new(value_iteration(&map, &GroundedReward::new(goal), 0.0, DEFAULT_TOLERANCE).unwrap());
        worst_residual = worst_residual.max(*policy.residuals().last().unwrap());
        let rollout = execute_policy(&policy, start, 10 * DEFAULT_MAX_STEPS, &mut rng).unwrap();
        if rollout.termination != Termination::Goal || rollout.len() != shortest {
            return outcome(
                false,
                format!(
                    "{start:?} -> {goal:?}: rollout {} steps, shortest path {shortest}",
                    rollout.len()
                ),
            );
        }
        instances += 1;
    }
    outcome(
        worst_residual < 1e-6,
        format!("100 instances match breadth-first distances; worst final residual {worst_residual:.2e}"),
    )
}

fn replanning() -> Outcome {
    let map = default_map();
    let grounding = GroundingModule::for_map(&map).unwrap();
    let goal = draggn::world::PropositionalFunction::block_in(grounding.room(Color::Green).unwrap());
    let policy = Arc::new(value_iteration(&map, &GroundedReward::new(goal), 0.0, DEFAULT_TOLERANCE).unwrap());
    let start = map.start();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let plan = execute_policy(&policy, start, DEFAULT_MAX_STEPS, &mut rng).unwrap();

    let after = 3;
    let teleport = |s: WorldState| WorldState::new(s.agent, Pos::new(4, 3));

    let mut closed = Execution::with_policy(Arc::clone(&policy), start, DEFAULT_MAX_STEPS).unwrap();
    let mut open = Execution::with_actions(&map, start, plan.actions(), 0.0).unwrap();
    for _ in 0..after {
        closed.step(&mut rng);
        open.step(&mut rng);
    }
    if teleport(closed.state()) == closed.state() || closed.state().agent == Pos::new(4, 3) {
        return outcome(false, "perturbation target collides with the agent");
    }
    closed.perturb(teleport(closed.state())).unwrap();
    open.perturb(teleport(open.state())).unwrap();
    let closed_end = closed.run(&mut rng);
    let open_end = open.run(&mut rng);
    let open_holds = evaluate(&goal, &map, &open.state()).unwrap();
    outcome(
        closed_end == Termination::Goal && open_end == Termination::CompletedActions && !open_holds,
        format!(
            "block moved to (4,3) after {after} of {} planned steps: policy ends {closed_end:?} in {} steps, \
             replayed actions end with goal {}",
            plan.len(),
            closed.steps().len(),
            if open_holds { "true" } else { "false" }
        ),
    )
}

fn validity_masking() -> Outcome {
    let vocab_records = train_records();
    let vocab_size = Model::for_records(Architecture::JDraggn, &vocab_records, &ModelDims::default(), 0)
        .unwrap()
        .vocabulary()
        .len();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut invalid = 0;
    let mut decodes = 0;
    for m in 0..100u64 {
        let arch = Architecture::ALL[(m % 3) as usize];
        let dims = ModelDims {
            init_scale: [0.08, 0.5, 2.0][(m / 3 % 3) as usize],
            ..ModelDims::default()
        };
        let model = Model::for_records(arch, &vocab_records, &dims, 1000 + m).unwrap();
        for _ in 0..100 {
            let len = rng.random_range(1..12);
            let ids: Vec<usize> = (0..len).map(|_| rng.random_range(0..vocab_size)).collect();
            let pair: UnitArgPair = model.predict_ids(&ids).unwrap();
            decodes += 1;
            if !is_valid(pair.unit(), pair.arg()) {
                invalid += 1;
            }
        }
    }
    outcome(
        invalid == 0,
        format!("{decodes} decodes from 100 random networks, {invalid} invalid"),
    )
}

fn determinism() -> Outcome {
    let run = |dir: &Path| -> Result<Vec<(String, Vec<u8>)>, String> {
        let corpus = dir.join("corpus.jsonl");
        cmd_gen_corpus(&CorpusSpec::default(), SplitKind::Unseen, &corpus).map_err(|e| e.to_string())?;
        let config = RunConfig {
            corpus: Some(corpus.clone()),
            models: Architecture::ALL.to_vec(),
            seeds: vec![7],
            epochs: 1,
            out_dir: dir.join("run"),
            ..RunConfig::default()
        };
        cmd_train(&config, |_| {}).map_err(|e| e.to_string())?;
        cmd_eval(&config).map_err(|e| e.to_string())?;
        let mut files = vec![corpus];
        files.extend(
            Architecture::ALL
                .iter()
                .map(|&a| checkpoint_path(&config.out_dir, a, 7)),
        );
        files.push(config.out_dir.join("report.json"));
        files.push(config.out_dir.join("report.txt"));
        files
            .into_iter()
            .map(|p| {
                let name = p.file_name().unwrap().to_string_lossy().into_owned();
                std::fs::read(&p).map(|b| (name, b)).map_err(|e| e.to_string())
            })
            .collect()
    };
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    match (run(a.path()), run(b.path())) {
        (Ok(first), Ok(second)) => {
            let differing: Vec<&str> = first
                .iter()
                .zip(&second)
                .filter(|(x, y)| x.1 != y.1)
                .map(|(x, _)| x.0.as_str())
                .collect();
            outcome(
                differing.is_empty(),
                format!(
                    "{} files compared across two runs (corpus, 3 checkpoints after 1 epoch, report); differing: {:?}",
                    first.len(),
                    differing
                ),
            )
        }
        (Err(e), _) | (_, Err(e)) => outcome(false, e),
    }
}

type Check = Box<dyn FnOnce() -> Outcome>;

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let wanted = |name: &str| filters.is_empty() || filters.iter().any(|f| name.contains(f.as_str()));

    let mut checks: Vec<(&str, Check)> = vec![
        ("i-draggn-independence", Box::new(independence)),
        ("gradient-correctness", Box::new(gradient_correctness)),
        ("planner-oracle", Box::new(planner_oracle)),
        ("replanning", Box::new(replanning)),
        ("validity-masking", Box::new(validity_masking)),
        ("determinism", Box::new(determinism)),
    ];

    if wanted("structural-zero") || wanted("generalization-ordering") {
        match pipeline(SplitKind::Unseen) {
            Ok((report, elapsed)) => {
                let r = report.clone();
                checks.push(("structural-zero", Box::new(move || structural_zero(&r))));
                checks.push((
                    "generalization-ordering",
                    Box::new(move || generalization_ordering(&report, elapsed)),
                ));
            }
            Err(e) => {
                let e2 = e.clone();
                checks.push(("structural-zero", Box::new(move || outcome(false, e))));
                checks.push(("generalization-ordering", Box::new(move || outcome(false, e2))));
            }
        }
    }
    if wanted("standard-split") {
        match pipeline(SplitKind::Standard) {
            Ok((report, elapsed)) => checks.push((
                "standard-split",
                Box::new(move || standard_split(&report, elapsed)),
            )),
            Err(e) => checks.push(("standard-split", Box::new(move || outcome(false, e)))),
        }
    }

    let mut failed = 0;
    let mut ran = 0;
    for (name, check) in checks {
        if !wanted(name) {
            continue;
        }
        let result = check();
        ran += 1;
        if !result.passed {
            failed += 1;
        }
        println!(
            "{} {name}: {}",
            if result.passed { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
