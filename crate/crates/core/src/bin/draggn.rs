use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use draggn::corpus::CorpusSpec;
use draggn::harness::service::{serve, ServiceConfig};
use draggn::harness::{
    cmd_eval, cmd_exec, cmd_gen_corpus, cmd_ground, cmd_train, load_map, load_model, HarnessError, RunConfig,
    SplitKind,
};
use draggn::world::{Pos, WorldState};

/// Ground natural-language commands in Cleanup World.
#[derive(Parser)]
#[command(name = "draggn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic corpus file.
    GenCorpus {
        /// JSON corpus spec; defaults reproduce the standard corpus sizes.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Overrides the spec seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "standard")]
        split: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train every configured model for every seed.
    Train(RunArgs),
    /// Evaluate trained checkpoints and print the accuracy table.
    Eval(RunArgs),
    /// Print the unit/argument pair and grounded task for one command.
    Ground {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
        text: String,
    },
    /// Ground one command and execute it, printing the trajectory.
    Exec {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
        /// Start agent cell as ROW,COL (defaults to the map's start).
        #[arg(long)]
        agent: Option<String>,
        /// Start block cell as ROW,COL.
        #[arg(long)]
        block: Option<String>,
        #[arg(long, default_value_t = 0.0)]
        slip: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = draggn::planner::DEFAULT_MAX_STEPS)]
        max_steps: usize,
        text: String,
    },
    /// Run the HTTP session service.
    Serve {
        #[command(flatten)]
        run: RunArgs,
        /// Checkpoints to load; defaults to every *.ckpt in out_dir.
        #[arg(long = "checkpoint")]
        checkpoints: Vec<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

/// Every config key can also be given as a flag of the same name.
#[derive(Args)]
struct RunArgs {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    map: Option<String>,
    #[arg(long)]
    corpus: Option<String>,
    #[arg(long)]
    corpus_seed: Option<String>,
    /// Comma-separated: single-rnn, j-draggn, i-draggn.
    #[arg(long)]
    model: Option<String>,
    /// Comma-separated seeds.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    batch_size: Option<String>,
    #[arg(long)]
    learning_rate: Option<String>,
    #[arg(long)]
    embedding: Option<String>,
    #[arg(long)]
    hidden: Option<String>,
    #[arg(long)]
    ff_hidden: Option<String>,
    /// standard or unseen.
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    out_dir: Option<String>,
    #[arg(long)]
    slip: Option<String>,
    #[arg(long)]
    max_steps: Option<String>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, HarnessError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let overrides = [
            ("map", &self.map),
            ("corpus", &self.corpus),
            ("corpus_seed", &self.corpus_seed),
            ("model", &self.model),
            ("seeds", &self.seeds),
            ("epochs", &self.epochs),
            ("batch_size", &self.batch_size),
            ("learning_rate", &self.learning_rate),
            ("embedding", &self.embedding),
            ("hidden", &self.hidden),
            ("ff_hidden", &self.ff_hidden),
            ("split", &self.split),
            ("out_dir", &self.out_dir),
            ("slip", &self.slip),
            ("max_steps", &self.max_steps),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        Ok(config)
    }
}

fn parse_cell(text: &str) -> Result<Pos, HarnessError> {
    let bad = || HarnessError::Config(format!("expected ROW,COL, got {text:?}"));
    let (r, c) = text.split_once(',').ok_or_else(bad)?;
    Ok(Pos::new(
        r.trim().parse().map_err(|_| bad())?,
        c.trim().parse().map_err(|_| bad())?,
    ))
}

fn run(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::GenCorpus {
            spec,
            seed,
            split,
            out,
        } => {
            let mut spec = match spec {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
                    serde_json::from_str::<CorpusSpec>(&text)
                        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?
                }
                None => CorpusSpec::default(),
            };
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let kind: SplitKind = split.parse()?;
            let summary = cmd_gen_corpus(&spec, kind, &out)?;
            println!(
                "wrote {}: {} train, {} test, {} test-unseen",
                summary.path.display(),
                summary.train,
                summary.test,
                summary.test_unseen
            );
        }
        Command::Train(args) => {
            let config = args.resolve()?;
            for run in cmd_train(&config, |line| log::info!("{line}"))? {
                println!(
                    "{} seed {}: final loss {:.6}, {:.1}s -> {}",
                    run.architecture,
                    run.seed,
                    run.final_loss,
                    run.seconds,
                    run.checkpoint.display()
                );
            }
        }
        Command::Eval(args) => {
            let report = cmd_eval(&args.resolve()?)?;
            print!("{}", report.render_table());
        }
        Command::Ground { model, map, text } => {
            let model = load_model(&model)?;
            let map = load_map(map.as_deref())?;
            let (pair, task) = cmd_ground(&text, &model, &map)?;
            println!("pair: {pair}");
            println!("category: {}", pair.category());
            println!("task: {task}");
        }
        Command::Exec {
            model,
            map,
            agent,
            block,
            slip,
            seed,
            max_steps,
            text,
        } => {
            let model = load_model(&model)?;
            let map = load_map(map.as_deref())?;
            let mut start = map.start();
            if let Some(a) = agent {
                start.agent = parse_cell(&a)?;
            }
            if let Some(b) = block {
                start.block = parse_cell(&b)?;
            }
            let out = cmd_exec(&text, &model, &map, start, slip, max_steps, seed)?;
            println!("pair: {}", out.pair);
            println!("task: {}", out.task);
            for step in &out.trajectory.steps {
                println!("{} {}", show(&step.state), step.action);
            }
            println!(
                "{} ({:?})",
                show(&out.trajectory.final_state),
                out.trajectory.termination
            );
        }
        Command::Serve {
            run,
            checkpoints,
            addr,
        } => {
            let config = run.resolve()?;
            config.validate()?;
            let map = load_map(config.map.as_deref())?;
            let paths = if checkpoints.is_empty() {
                list_checkpoints(&config.out_dir)?
            } else {
                checkpoints
            };
            if paths.is_empty() {
                return Err(HarnessError::Config(format!(
                    "no checkpoints given and none found in {}",
                    config.out_dir.display()
                )));
            }
            let mut models = Vec::new();
            for p in &paths {
                let id = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                models.push((id, load_model(p)?));
            }
            let map_id = config
                .map
                .as_ref()
                .and_then(|p| p.file_stem())
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "default".to_string());
            let service = ServiceConfig {
                maps: vec![(map_id, map)],
                models,
                slip: config.slip,
                max_steps: config.max_steps,
                seed: config.seeds[0],
            };
            let runtime =
                tokio::runtime::Runtime::new().map_err(|e| HarnessError::Internal(e.to_string()))?;
            runtime
                .block_on(serve(service, addr))
                .map_err(|e| HarnessError::Internal(format!("server: {e}")))?;
        }
    }
    Ok(())
}

fn show(s: &WorldState) -> String {
    format!(
        "agent ({},{}) block ({},{})",
        s.agent.row, s.agent.col, s.block.row, s.block.col
    )
}

fn list_checkpoints(dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let entries = std::fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ckpt"))
        .collect();
    paths.sort();
    Ok(paths)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
