//! Synthetic instruction corpus: templated paraphrases of action segments and
//! goal sentences, labeled with their unit/argument pair, plus the standard
//! and unseen-combination train/test partitions.

mod generate;
mod templates;

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::semantics::{BindingArgument, CallableUnit, Category, SemanticsError, UnitArgPair};

pub use generate::{
    default_action_pairs, default_goal_pairs, default_holdout, generate, split, split_with_counts,
    CorpusSpec, SplitMode, FIXTURE,
};
pub use templates::{realize, DEFAULT_TEMPLATE_SET, NUMBER_WORDS};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("text {0:?} contains no tokens")]
    EmptyTokens(String),
    #[error("invalid corpus spec: {0}")]
    Spec(String),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Split {
    Train,
    Test,
    TestUnseen,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::TestUnseen => "test-unseen",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            "test-unseen" => Ok(Split::TestUnseen),
            other => Err(CorpusError::Spec(format!("unknown split {other:?}"))),
        }
    }
}

/// Lowercase, drop punctuation, split on whitespace.
pub fn tokenize(text: &str) -> Result<Vec<String>, CorpusError> {
    let cleaned: String = text
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect();
    let tokens: Vec<String> = cleaned.split_whitespace().map(str::to_string).collect();
    if tokens.is_empty() {
        return Err(CorpusError::EmptyTokens(text.to_string()));
    }
    Ok(tokens)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionRecord {
    pub text: String,
    pub tokens: Vec<String>,
    pub label: UnitArgPair,
    pub split: Split,
}

impl InstructionRecord {
    pub fn new(text: impl Into<String>, label: UnitArgPair, split: Split) -> Result<Self, CorpusError> {
        let text = text.into();
        let tokens = tokenize(&text)?;
        Ok(Self {
            text,
            tokens,
            label,
            split,
        })
    }

    pub fn category(&self) -> Category {
        self.label.category()
    }
}

/// One line of the corpus file.
#[derive(Debug, Serialize, Deserialize)]
struct RecordLine {
    text: String,
    unit: String,
    arg: String,
    category: Category,
    split: Split,
}

pub fn write_corpus<W: Write>(records: &[InstructionRecord], mut w: W) -> Result<(), CorpusError> {
    for r in records {
        let line = RecordLine {
            text: r.text.clone(),
            unit: r.label.unit().token().to_string(),
            arg: r.label.arg().to_string(),
            category: r.category(),
            split: r.split,
        };
        let json = serde_json::to_string(&line).expect("record lines always serialize");
        writeln!(w, "{json}")?;
    }
    Ok(())
}

pub fn corpus_to_string(records: &[InstructionRecord]) -> String {
    let mut out = Vec::new();
    write_corpus(records, &mut out).expect("writing to a Vec cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

pub fn read_corpus<R: BufRead>(r: R) -> Result<Vec<InstructionRecord>, CorpusError> {
    let mut records = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fail = |message: String| CorpusError::Format { line: i + 1, message };
        let parsed: RecordLine = serde_json::from_str(&line).map_err(|e| fail(e.to_string()))?;
        let unit: CallableUnit = parsed
            .unit
            .parse()
            .map_err(|e: SemanticsError| fail(e.to_string()))?;
        let arg: BindingArgument = parsed
            .arg
            .parse()
            .map_err(|e: SemanticsError| fail(e.to_string()))?;
        let label = UnitArgPair::new(unit, arg).map_err(|e| fail(e.to_string()))?;
        if label.category() != parsed.category {
            return Err(fail(format!(
                "category {} does not match label {label}",
                parsed.category
            )));
        }
        let record =
            InstructionRecord::new(parsed.text, label, parsed.split).map_err(|e| fail(e.to_string()))?;
        records.push(record);
    }
    Ok(records)
}

pub fn records_in(records: &[InstructionRecord], split: Split) -> Vec<InstructionRecord> {
    records.iter().filter(|r| r.split == split).cloned().collect()
}
