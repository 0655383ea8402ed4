use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::templates::{realize, DEFAULT_TEMPLATE_SET};
use super::{CorpusError, InstructionRecord, Split};
use crate::semantics::{BindingArgument, CallableUnit, Category, UnitArgPair};
use crate::world::Color;

/// Pre-segmented clauses of a multi-step instruction, kept verbatim in every
/// generated corpus whose action pairs include their labels.
pub const FIXTURE: [(&str, &str); 3] = [
    ("down three spaces", "goDown 3"),
    ("then up two paces", "goUp 2"),
    ("finally left four paces", "goLeft 4"),
];

fn pair(unit: CallableUnit, arg: BindingArgument) -> UnitArgPair {
    UnitArgPair::new(unit, arg).expect("hard-coded pairs are valid")
}

/// The 17 action pairs of the standard corpus. Each count held out by
/// [`default_holdout`] keeps three other units in training.
pub fn default_action_pairs() -> Vec<UnitArgPair> {
    let steps = |unit, counts: &[u8]| -> Vec<UnitArgPair> {
        counts
            .iter()
            .map(|&n| pair(unit, BindingArgument::Steps(n)))
            .collect()
    };
    [
        steps(CallableUnit::GoUp, &[2, 3, 4, 5]),
        steps(CallableUnit::GoDown, &[2, 3, 4, 5]),
        steps(CallableUnit::GoLeft, &[2, 3, 4, 5]),
        steps(CallableUnit::GoRight, &[1, 2, 3, 4, 5]),
    ]
    .concat()
}

pub fn default_goal_pairs() -> Vec<UnitArgPair> {
    let mut out = Vec::new();
    for unit in [CallableUnit::AgentInRoom, CallableUnit::BlockInRoom] {
        for color in [Color::Red, Color::Green, Color::Blue] {
            out.push(pair(unit, BindingArgument::RoomIs(color)));
        }
    }
    out
}

/// One held-out combination per action unit.
pub fn default_holdout() -> Vec<UnitArgPair> {
    vec![
        pair(CallableUnit::GoUp, BindingArgument::Steps(4)),
        pair(CallableUnit::GoDown, BindingArgument::Steps(3)),
        pair(CallableUnit::GoLeft, BindingArgument::Steps(2)),
        pair(CallableUnit::GoRight, BindingArgument::Steps(5)),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub action_train: usize,
    pub goal_train: usize,
    pub action_test: usize,
    pub goal_test: usize,
    pub template_set: String,
    pub noise_rate: f64,
    pub seed: u64,
    pub action_pairs: Vec<UnitArgPair>,
    pub goal_pairs: Vec<UnitArgPair>,
    pub holdout: Vec<UnitArgPair>,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            action_train: 2660,
            goal_train: 693,
            action_test: 295,
            goal_test: 86,
            template_set: DEFAULT_TEMPLATE_SET.to_string(),
            noise_rate: 0.15,
            seed: 0,
            action_pairs: default_action_pairs(),
            goal_pairs: default_goal_pairs(),
            holdout: default_holdout(),
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let fail = |m: String| Err(CorpusError::Spec(m));
        if self.template_set != DEFAULT_TEMPLATE_SET {
            return fail(format!("unknown template set {:?}", self.template_set));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return fail(format!("noise rate {} outside [0, 1]", self.noise_rate));
        }
        if self.action_train == 0 || self.goal_train == 0 {
            return fail("training counts must be positive".into());
        }
        for (pairs, category) in [
            (&self.action_pairs, Category::Action),
            (&self.goal_pairs, Category::Goal),
        ] {
            if pairs.is_empty() {
                return fail(format!("no {category} pairs"));
            }
            if let Some(p) = pairs.iter().find(|p| p.category() != category) {
                return fail(format!("{p} listed among {category} pairs"));
            }
            if pairs.iter().collect::<BTreeSet<_>>().len() != pairs.len() {
                return fail(format!("duplicate {category} pairs"));
            }
        }
        let kept: Vec<&UnitArgPair> = self
            .action_pairs
            .iter()
            .filter(|p| !self.holdout.contains(p))
            .collect();
        for h in &self.holdout {
            if h.category() != Category::Action {
                return fail(format!("holdout pair {h} is not action-oriented"));
            }
            if !self.action_pairs.contains(h) {
                return fail(format!("holdout pair {h} is not among the action pairs"));
            }
            if !kept.iter().any(|p| p.unit() == h.unit()) {
                return fail(format!(
                    "holdout {h}: unit {} never appears in training",
                    h.unit()
                ));
            }
            if !kept.iter().any(|p| p.arg() == h.arg()) {
                return fail(format!(
                    "holdout {h}: argument {} never appears in training",
                    h.arg()
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    Standard,
    Unseen(Vec<UnitArgPair>),
}

/// Generate the labeled corpus with the standard partition at the exact
/// counts in `spec`. Pairs are balanced round-robin within each category.
pub fn generate(spec: &CorpusSpec) -> Result<Vec<InstructionRecord>, CorpusError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = Vec::new();
    for (pairs, count) in [
        (&spec.action_pairs, spec.action_train + spec.action_test),
        (&spec.goal_pairs, spec.goal_train + spec.goal_test),
    ] {
        for i in 0..count {
            let label = pairs[i % pairs.len()];
            let text = realize(&label, spec.noise_rate, &mut rng);
            records.push(InstructionRecord::new(text, label, Split::Train)?);
        }
    }
    for (text, label) in FIXTURE {
        let label: UnitArgPair = label.parse()?;
        let slot = records
            .iter()
            .position(|r| r.label == label && !FIXTURE.iter().any(|(t, _)| *t == r.text));
        if let Some(i) = slot {
            records[i] = InstructionRecord::new(text, label, Split::Train)?;
        }
    }
    records.shuffle(&mut rng);
    split_with_counts(
        &records,
        &SplitMode::Standard,
        spec.action_test,
        spec.goal_test,
        spec.seed,
    )
}

/// Standard mode puts round(10%) of each category into test; unseen mode
/// first moves every holdout-labeled record to test-unseen.
pub fn split(records: &[InstructionRecord], mode: &SplitMode, seed: u64) -> Vec<InstructionRecord> {
    let remaining = |category: Category| {
        records
            .iter()
            .filter(|r| r.category() == category && !is_held_out(mode, &r.label))
            .count()
    };
    let tenth = |n: usize| (n + 5) / 10;
    split_with_counts(
        records,
        mode,
        tenth(remaining(Category::Action)),
        tenth(remaining(Category::Goal)),
        seed,
    )
    .expect("a tenth never exceeds the total")
}

fn is_held_out(mode: &SplitMode, label: &UnitArgPair) -> bool {
    matches!(mode, SplitMode::Unseen(holdout) if holdout.contains(label))
}

/// Partition with explicit per-category test counts. Record order is
/// preserved; only the `split` field changes.
pub fn split_with_counts(
    records: &[InstructionRecord],
    mode: &SplitMode,
    action_test: usize,
    goal_test: usize,
    seed: u64,
) -> Result<Vec<InstructionRecord>, CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5_9117);
    let mut out = records.to_vec();
    for (category, test_count) in [(Category::Action, action_test), (Category::Goal, goal_test)] {
        let mut idx: Vec<usize> = Vec::new();
        for (i, r) in out.iter_mut().enumerate() {
            if r.category() != category {
                continue;
            }
            if is_held_out(mode, &r.label) {
                r.split = Split::TestUnseen;
            } else {
                idx.push(i);
            }
        }
        if test_count > idx.len() {
            return Err(CorpusError::Spec(format!(
                "{test_count} {category} test records requested but only {} available",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for (k, &i) in idx.iter().enumerate() {
            out[i].split = if k < test_count { Split::Test } else { Split::Train };
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::records_in;

    fn count(records: &[InstructionRecord], split: Split, category: Category) -> usize {
        records
            .iter()
            .filter(|r| r.split == split && r.category() == category)
            .count()
    }

    #[test]
    fn default_sizes_match_the_standard_counts() {
        let records = generate(&CorpusSpec::default()).unwrap();
        assert_eq!(records.len(), 3734);
        assert_eq!(count(&records, Split::Train, Category::Action), 2660);
        assert_eq!(count(&records, Split::Train, Category::Goal), 693);
        assert_eq!(count(&records, Split::Test, Category::Action), 295);
        assert_eq!(count(&records, Split::Test, Category::Goal), 86);
        let train_pairs: BTreeSet<UnitArgPair> = records_in(&records, Split::Train)
            .iter()
            .map(|r| r.label)
            .collect();
        let action = train_pairs
            .iter()
            .filter(|p| p.category() == Category::Action)
            .count();
        assert_eq!((action, train_pairs.len() - action), (17, 6));
    }

    #[test]
    fn fixture_is_included_verbatim() {
        let records = generate(&CorpusSpec::default()).unwrap();
        for (text, label) in FIXTURE {
            let r = records.iter().find(|r| r.text == text).expect(text);
            assert_eq!(r.label.to_string(), label);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = CorpusSpec {
            seed: 9,
            ..CorpusSpec::default()
        };
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = CorpusSpec {
            seed: 10,
            ..spec.clone()
        };
        assert_ne!(generate(&other).unwrap(), generate(&spec).unwrap());
    }

    #[test]
    fn unseen_split_holds_out_labels() {
        let holdout = vec!["goUp 4".parse().unwrap()];
        let spec = CorpusSpec {
            holdout: holdout.clone(),
            ..CorpusSpec::default()
        };
        let records = split(&generate(&spec).unwrap(), &SplitMode::Unseen(holdout.clone()), 3);
        let train = records_in(&records, Split::Train);
        assert!(train.iter().all(|r| r.label != holdout[0]));
        let unseen = records_in(&records, Split::TestUnseen);
        assert!(!unseen.is_empty());
        assert!(unseen.iter().all(|r| r.label == holdout[0]));
    }

    #[test]
    fn coverage_invariant_holds_for_default_holdout() {
        let holdout: Vec<UnitArgPair> = vec!["goUp 4".parse().unwrap(), "goDown 3".parse().unwrap()];
        let spec = CorpusSpec {
            holdout: holdout.clone(),
            ..CorpusSpec::default()
        };
        let records = split(&generate(&spec).unwrap(), &SplitMode::Unseen(holdout), 1);
        let train = records_in(&records, Split::Train);
        let has = |unit: &str, arg: &str| {
            train
                .iter()
                .any(|r| r.label.unit().token() == unit && r.label.arg().to_string() == arg)
        };
        assert!(has("goUp", "3"));
        assert!(train
            .iter()
            .any(|r| r.label.arg().to_string() == "4" && r.label.unit() != CallableUnit::GoUp));
        assert!(train.iter().any(|r| r.label.unit() == CallableUnit::GoDown));
        assert!(!has("goUp", "4") && !has("goDown", "3"));
        assert!(CorpusSpec::default().validate().is_ok());
    }

    #[test]
    fn holdout_that_removes_a_unit_is_rejected() {
        let only_right: Vec<UnitArgPair> = default_action_pairs()
            .into_iter()
            .filter(|p| p.unit() == CallableUnit::GoRight)
            .collect();
        let spec = CorpusSpec {
            holdout: only_right,
            ..CorpusSpec::default()
        };
        assert!(matches!(generate(&spec), Err(CorpusError::Spec(_))));

        let goal_holdout = CorpusSpec {
            holdout: vec!["agentInRoom roomIsRed".parse().unwrap()],
            ..CorpusSpec::default()
        };
        assert!(goal_holdout.validate().is_err());

        let lonely_count = CorpusSpec {
            holdout: vec!["goRight 1".parse().unwrap()],
            ..CorpusSpec::default()
        };
        assert!(lonely_count.validate().is_err());
    }

    #[test]
    fn standard_split_of_balanced_records() {
        let mut records = Vec::new();
        for i in 0..100 {
            records.push(
                InstructionRecord::new(format!("go up {i}"), "goUp 1".parse().unwrap(), Split::Train)
                    .unwrap(),
            );
            records.push(
                InstructionRecord::new(
                    format!("enter the red room {i}"),
                    "agentInRoom roomIsRed".parse().unwrap(),
                    Split::Train,
                )
                .unwrap(),
            );
        }
        let a = split(&records, &SplitMode::Standard, 5);
        assert_eq!(count(&a, Split::Train, Category::Action), 90);
        assert_eq!(count(&a, Split::Train, Category::Goal), 90);
        assert_eq!(count(&a, Split::Test, Category::Action), 10);
        assert_eq!(count(&a, Split::Test, Category::Goal), 10);
        assert_eq!(a, split(&records, &SplitMode::Standard, 5));
    }
}
