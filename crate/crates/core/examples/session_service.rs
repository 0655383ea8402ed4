//! Serve the session API for a freshly trained small model.
//!
//! ```text
//! cargo run --release --example session_service
//! curl -X POST localhost:8080/sessions -H 'content-type: application/json' -d '{}'
//! curl -X POST localhost:8080/sessions/1/command -H 'content-type: application/json' \
//!      -d '{"text": "go up three spaces"}'
//! curl localhost:8080/sessions/1/state
//! ```

use draggn::corpus::{generate, records_in, CorpusSpec, Split};
use draggn::harness::service::{serve, ServiceConfig};
use draggn::models::{train, Architecture, ModelDims, TrainConfig};
use draggn::world::default_map;

#[tokio::main]
async fn main() {
    let records = records_in(&generate(&CorpusSpec::default()).unwrap(), Split::Train);
    let config = TrainConfig {
        epochs: 6,
        learning_rate: 3e-3,
        dims: ModelDims {
            embedding: 24,
            hidden: 24,
            ff_hidden: 32,
            ..ModelDims::default()
        },
        ..TrainConfig::default()
    };
    let (model, _) =
        tokio::task::spawn_blocking(move || train(Architecture::IDraggn, &records, &config, |_, _| {}))
            .await
            .unwrap()
            .unwrap();
    let service = ServiceConfig {
        maps: vec![("default".into(), default_map())],
        models: vec![("i-draggn".into(), model)],
        slip: 0.0,
        max_steps: 200,
        seed: 0,
    };
    let addr = "127.0.0.1:8080".parse().unwrap();
    println!("listening on http://{addr}");
    serve(service, addr).await.unwrap();
}
