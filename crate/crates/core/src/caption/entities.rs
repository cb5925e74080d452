use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Place,
    Object,
    Activity,
    Sound,
    ImageType,
    PeopleCount,
}

/// A label with its similarity score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub label: String,
    pub score: f64,
}

/// Score descending, then label ascending.
pub fn scored_order(a: &Scored, b: &Scored) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.label.cmp(&b.label))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedEntities {
    pub category: Category,
    pub items: Vec<Scored>,
}

impl RankedEntities {
    /// Sorts `items`; rejects non-finite scores.
    pub fn new(category: Category, mut items: Vec<Scored>) -> Result<Self> {
        if let Some(i) = items.iter().position(|s| !s.score.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        items.sort_by(scored_order);
        Ok(Self { category, items })
    }

    pub fn empty(category: Category) -> Self {
        Self { category, items: Vec::new() }
    }

    pub fn labels(&self) -> Vec<&str> {
        self.items.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn top(&self) -> Option<&Scored> {
        self.items.first()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        let key = normalize_entity(label);
        self.items.iter().any(|s| normalize_entity(&s.label) == key)
    }

    pub fn mean_score(&self) -> Option<f64> {
        (!self.items.is_empty()).then(|| self.items.iter().map(|s| s.score).sum::<f64>() / self.items.len() as f64)
    }

    pub fn truncate(mut self, k: usize) -> Self {
        self.items.truncate(k);
        self
    }
}

/// Lowercase, trim, drop terminal punctuation, collapse inner whitespace.
pub fn normalize_entity(s: &str) -> String {
    let collapsed = s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    collapsed.trim_end_matches(['.', ',', ';', ':', '!', '?']).trim_end().to_string()
}

/// Splits an LM list completion into distinct normalized entities.
///
/// Items are separated by commas and newlines; bullets, numbering, a leading
/// `Header:` echo on the first item and a leading conjunction are removed.
pub fn parse_list(completion: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, raw) in completion.split([',', '\n']).enumerate() {
        let mut item = raw.trim();
        if i == 0 {
            if let Some((head, rest)) = item.split_once(':') {
                if !head.is_empty() && head.chars().all(|c| c.is_alphabetic() || c == ' ') {
                    item = rest.trim();
                }
            }
        }
        item = item.trim_start_matches(['-', '*', '•']).trim_start();
        let digits = item.chars().take_while(char::is_ascii_digit).count();
        if digits > 0 && item[digits..].starts_with(['.', ')']) {
            item = item[digits + 1..].trim_start();
        }
        for conj in ["and ", "or "] {
            if let Some(rest) = item.strip_prefix(conj) {
                item = rest;
            }
        }
        let norm = normalize_entity(item);
        if !norm.is_empty() && seen.insert(norm.clone()) {
            out.push(norm);
        }
    }
    out
}
