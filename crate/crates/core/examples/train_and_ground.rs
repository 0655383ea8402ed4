//! Train a small I-DRAGGN on the unseen split and ground commands it never
//! saw paired during training.
//!
//! `cargo run --release --example train_and_ground -- [epochs]`

use draggn::corpus::{generate, records_in, split, CorpusSpec, Split, SplitMode};
use draggn::models::{evaluate, train, Architecture, ModelDims, TrainConfig};
use draggn::semantics::GroundingModule;
use draggn::world::default_map;

fn main() {
    let epochs = std::env::args()
        .nth(1)
        .map_or(8, |e| e.parse().expect("epochs is a number"));
    let spec = CorpusSpec::default();
    let records = split(
        &generate(&spec).unwrap(),
        &SplitMode::Unseen(spec.holdout.clone()),
        spec.seed,
    );
    let config = TrainConfig {
        epochs,
        learning_rate: 3e-3,
        seed: 0,
        dims: ModelDims {
            embedding: 32,
            hidden: 32,
            ff_hidden: 40,
            ..ModelDims::default()
        },
        ..TrainConfig::default()
    };
    let (model, _) = train(
        Architecture::IDraggn,
        &records_in(&records, Split::Train),
        &config,
        |epoch, loss| {
            println!("epoch {epoch}: loss {loss:.4}");
        },
    )
    .unwrap();

    let map = default_map();
    let grounding = GroundingModule::for_map(&map).unwrap();
    let held_out: Vec<_> = records
        .iter()
        .filter(|r| r.split != Split::Train)
        .cloned()
        .collect();
    let metrics = evaluate(&model, &held_out, &grounding).unwrap();
    println!(
        "action {:?}, goal {:?}, unseen {:?}",
        metrics.action_accuracy(),
        metrics.goal_accuracy(),
        metrics.unseen_accuracy()
    );

    for text in [
        "go up four spaces",
        "walk five steps to the east",
        "put the box in the blue room",
    ] {
        let pair = model.predict_text(text).unwrap();
        println!(
            "{text:<32} -> {:<24} -> {}",
            pair.to_string(),
            grounding.ground(&pair).unwrap()
        );
    }
}
