//! Train and evaluate every architecture over several seeds and print the
//! accuracy table. Defaults are a quick run; pass `--full` for the full
//! training recipe (slow).

use draggn::harness::{cmd_eval, cmd_train, RunConfig, SplitKind};
use draggn::models::Architecture;

fn main() {
    let full = std::env::args().any(|a| a == "--full");
    let dir = tempfile::tempdir().unwrap();
    for split in [SplitKind::Standard, SplitKind::Unseen] {
        let mut config = RunConfig {
            models: Architecture::ALL.to_vec(),
            seeds: vec![0, 1],
            split,
            out_dir: dir.path().join(split.name()),
            ..RunConfig::default()
        };
        if !full {
            config.epochs = 4;
            config.learning_rate = 3e-3;
            config.embedding = 24;
            config.hidden = 24;
            config.ff_hidden = 32;
        }
        cmd_train(&config, |line| eprintln!("{line}")).unwrap();
        let report = cmd_eval(&config).unwrap();
        println!("{split} split");
        print!("{}", report.render_table());
    }
}
