use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::models::{Architecture, Metrics};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Action,
    Goal,
    Unseen,
    Overall,
}

impl Column {
    pub const ALL: [Column; 4] = [Column::Action, Column::Goal, Column::Unseen, Column::Overall];

    pub fn header(self) -> &'static str {
        match self {
            Column::Action => "action",
            Column::Goal => "goal",
            Column::Unseen => "unseen",
            Column::Overall => "overall",
        }
    }

    pub fn of(self, m: &Metrics) -> Option<f64> {
        match self {
            Column::Action => m.action_accuracy(),
            Column::Goal => m.goal_accuracy(),
            Column::Unseen => m.unseen_accuracy(),
            Column::Overall => m.overall_accuracy(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub architecture: Architecture,
    pub seeds: Vec<SeedResult>,
}

/// Mean and sample standard deviation over seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stdev: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stdev = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, stdev, n })
    }
}

/// Per-model, per-seed accuracies on one partition of the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub split: String,
    pub models: Vec<ModelResult>,
}

impl MetricsReport {
    pub fn model(&self, architecture: Architecture) -> Option<&ModelResult> {
        self.models.iter().find(|m| m.architecture == architecture)
    }

    /// Per-seed values of one column; seeds without records in the column are skipped.
    pub fn values(&self, architecture: Architecture, column: Column) -> Vec<f64> {
        self.model(architecture)
            .map(|m| m.seeds.iter().filter_map(|s| column.of(&s.metrics)).collect())
            .unwrap_or_default()
    }

    pub fn summary(&self, architecture: Architecture, column: Column) -> Option<Summary> {
        Summary::of(&self.values(architecture, column))
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "split: {}", self.split).unwrap();
        write!(out, "{:<12}", "model").unwrap();
        for c in Column::ALL {
            write!(out, " {:>16}", c.header()).unwrap();
        }
        out.push('\n');
        for m in &self.models {
            write!(out, "{:<12}", m.architecture.name()).unwrap();
            for c in Column::ALL {
                let cell = match self.summary(m.architecture, c) {
                    Some(s) => format!("{:.1} ± {:.1}%", 100.0 * s.mean, 100.0 * s.stdev),
                    None => "-".to_string(),
                };
                write!(out, " {cell:>16}").unwrap();
            }
            out.push('\n');
        }
        if let Some(first) = self.models.first().and_then(|m| m.seeds.first()) {
            let m = &first.metrics;
            writeln!(
                out,
                "test examples: action {}, goal {}, unseen {}; seeds per model: {}",
                m.action_total,
                m.goal_total,
                m.unseen_total,
                self.models[0].seeds.len()
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize") + "\n"
    }
}
