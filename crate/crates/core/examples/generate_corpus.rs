//! Generate the synthetic instruction corpus and show its unseen split.

use std::collections::BTreeMap;

use draggn::corpus::{generate, split, CorpusSpec, Split, SplitMode};

fn main() {
    let spec = CorpusSpec::default();
    let records = generate(&spec).unwrap();
    println!("{} records", records.len());
    for r in records.iter().take(8) {
        println!("  {:<7} {:<28} {}", r.split.name(), r.label.to_string(), r.text);
    }

    let unseen = split(&records, &SplitMode::Unseen(spec.holdout.clone()), spec.seed);
    let mut counts: BTreeMap<(Split, String), usize> = BTreeMap::new();
    for r in &unseen {
        *counts.entry((r.split, r.category().to_string())).or_default() += 1;
    }
    println!(
        "unseen split, holding out {:?}:",
        spec.holdout.iter().map(|p| p.to_string()).collect::<Vec<_>>()
    );
    for ((s, category), n) in counts {
        println!("  {:<11} {category:<6} {n}", s.name());
    }
}
