use std::collections::{BTreeSet, HashMap};

use super::ModelError;

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

/// Token to index map. Index 0 is padding, 1 is out-of-vocabulary; the rest
/// are sorted so the mapping does not depend on record order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn build<'a, I, S>(sequences: I) -> Self
    where
        I: IntoIterator<Item = &'a S>,
        S: AsRef<[String]> + 'a + ?Sized,
    {
        let words: BTreeSet<&str> = sequences
            .into_iter()
            .flat_map(|s| s.as_ref().iter().map(String::as_str))
            .filter(|w| *w != PAD_TOKEN && *w != UNK_TOKEN)
            .collect();
        let tokens: Vec<String> = [PAD_TOKEN, UNK_TOKEN]
            .into_iter()
            .chain(words)
            .map(str::to_string)
            .collect();
        Self::from_tokens(tokens).expect("built vocabularies are well formed")
    }

    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, ModelError> {
        if tokens.len() < 2 || tokens[PAD] != PAD_TOKEN || tokens[UNK] != UNK_TOKEN {
            return Err(ModelError::Checkpoint(
                "vocabulary must start with <pad> and <unk>".into(),
            ));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(ModelError::Checkpoint(format!(
                    "duplicate vocabulary entry {t:?}"
                )));
            }
        }
        Ok(Self { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn index_of(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.index_of(t)).collect()
    }

    /// Fraction of tokens across `sequences` that map to `<unk>`.
    pub fn oov_rate<'a, I, S>(&self, sequences: I) -> f64
    where
        I: IntoIterator<Item = &'a S>,
        S: AsRef<[String]> + 'a + ?Sized,
    {
        let (mut total, mut unknown) = (0usize, 0usize);
        for s in sequences {
            for t in s.as_ref() {
                total += 1;
                unknown += usize::from(!self.contains(t));
            }
        }
        if total == 0 {
            0.0
        } else {
            unknown as f64 / total as f64
        }
    }
}
