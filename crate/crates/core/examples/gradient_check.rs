//! Compare backpropagated gradients of each architecture against central
//! finite differences.

use draggn::corpus::{generate, records_in, CorpusSpec, Split};
use draggn::models::{Architecture, LossTerm, Model, ModelDims};
use draggn::neural::grad_check;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let records = records_in(&generate(&CorpusSpec::default()).unwrap(), Split::Train);
    let sample = &records[..6];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for arch in Architecture::ALL {
        let mut model = Model::for_records(arch, &records, &ModelDims::default(), 1).unwrap();
        let batch: Vec<_> = sample
            .iter()
            .map(|r| (model.encode(&r.tokens), model.target(&r.label).unwrap()))
            .collect();
        let mut grads = model.network().zeros_like();
        let loss = model
            .network()
            .batch_loss_and_grad(&batch, LossTerm::Full, &mut grads)
            .unwrap();
        let report = grad_check(
            model.network_mut(),
            &grads,
            |net| net.batch_loss(&batch, LossTerm::Full).unwrap(),
            10,
            1e-4,
            &mut rng,
        );
        println!(
            "{arch:<10} loss {loss:.4}  checked {:>3} entries  max relative error {:.2e}  {}",
            report.checked,
            report.max_rel_error,
            if report.passed() { "ok" } else { "FAILED" }
        );
    }
}
