use std::collections::HashMap;

use rand::RngCore;
use regex::Regex;
use serde::Deserialize;

use crate::seed::seeded_rng as rng_from;
use crate::data;
use crate::error::{Error, Result};
use crate::foundation::adapters::{require_prompt, CompletionParams, LanguageModel};

/// Context window of the mock LM, in whitespace tokens.
pub const MOCK_CONTEXT_TOKENS: usize = 4096;

#[derive(Clone, Debug, Deserialize)]
struct RuleFile {
    rules: Vec<RuleSpec>,
}

#[derive(Clone, Debug, Deserialize)]
struct RuleSpec {
    name: String,
    #[serde(default)]
    suffix: Option<String>,
    #[serde(default)]
    when_all: Vec<String>,
    #[serde(default)]
    pattern: Option<String>,
    #[serde(default)]
    lookup: Option<String>,
    #[serde(default)]
    collect: Option<CollectSpec>,
    #[serde(default)]
    replace: Option<(String, String)>,
    outputs: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
struct CollectSpec {
    name: String,
    pattern: String,
    join: String,
}

#[derive(Clone, Debug)]
struct Rule {
    spec: RuleSpec,
    pattern: Option<Regex>,
    collect: Option<Regex>,
}

/// Declarative rule engine standing in for a generative LM.
///
/// The first rule whose suffix, pattern, `when_all` phrases and lookup all
/// match the prompt produces the completion. Temperature 0 always yields the
/// rule's first output; otherwise sample `i` picks an output by a hash of
/// (seed, prompt, i). No match yields an empty completion.
#[derive(Clone, Debug)]
pub struct MockLm {
    id: String,
    rules: Vec<Rule>,
    seed: u64,
    context_tokens: usize,
}

impl MockLm {
    pub fn from_json(id: impl Into<String>, rules_json: &[&str]) -> Result<Self> {
        let mut rules = Vec::new();
        for src in rules_json {
            let file: RuleFile = serde_json::from_str(src)?;
            for spec in file.rules {
                let compile = |p: &str| Regex::new(p).map_err(|e| Error::format(format!("rule {}", spec.name), e.to_string()));
                let pattern = spec.pattern.as_deref().map(compile).transpose()?;
                let collect = spec.collect.as_ref().map(|c| compile(&c.pattern)).transpose()?;
                if spec.outputs.is_empty() {
                    return Err(Error::format(format!("rule {}", spec.name), "no outputs"));
                }
                rules.push(Rule { spec, pattern, collect });
            }
        }
        Ok(Self { id: id.into(), rules, seed: 0, context_tokens: MOCK_CONTEXT_TOKENS })
    }

    /// The bundled table standing in for a strong LM.
    pub fn strong() -> Self {
        Self::from_json("mock-lm-strong", &[data::MOCK_RULES]).expect("bundled rules compile")
    }

    /// Weaker phrasing overrides checked before the shared table.
    pub fn weak() -> Self {
        Self::from_json("mock-lm-weak", &[data::MOCK_RULES_WEAK, data::MOCK_RULES]).expect("bundled rules compile")
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_context_tokens(mut self, limit: usize) -> Self {
        self.context_tokens = limit;
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Name of the rule that would answer `prompt`, for diagnostics.
    pub fn matching_rule(&self, prompt: &str) -> Option<&str> {
        self.rules.iter().find(|r| r.bind(prompt).is_some()).map(|r| r.spec.name.as_str())
    }

    fn pick(&self, prompt: &str, sample: usize, n_outputs: usize, temperature: f64) -> usize {
        if temperature == 0.0 || n_outputs == 1 {
            return 0;
        }
        let mut rng = rng_from(&[b"sample", &self.seed.to_le_bytes(), prompt.as_bytes(), &(sample as u64).to_le_bytes()]);
        (rng.next_u64() % n_outputs as u64) as usize
    }
}

/// Case-insensitive whole-word containment.
fn contains_phrase(haystack_lower: &str, phrase: &str) -> bool {
    let needle = phrase.to_lowercase();
    if needle.is_empty() {
        return true;
    }
    let is_word = |c: Option<char>| c.is_some_and(|c| c.is_alphanumeric());
    haystack_lower.match_indices(&needle).any(|(i, _)| {
        !is_word(haystack_lower[..i].chars().next_back()) && !is_word(haystack_lower[i + needle.len()..].chars().next())
    })
}

fn render(template: &str, vars: &HashMap<String, String>) -> String {
    let mut out = template.to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}

impl Rule {
    fn bind(&self, prompt: &str) -> Option<HashMap<String, String>> {
        let s = &self.spec;
        if let Some(suffix) = &s.suffix {
            if !prompt.trim_end().ends_with(suffix.trim_end()) {
                return None;
            }
        }
        let mut vars = HashMap::new();
        if let Some(re) = &self.pattern {
            let caps = re.captures(prompt)?;
            for name in re.capture_names().flatten() {
                if let Some(m) = caps.name(name) {
                    vars.insert(name.to_string(), m.as_str().to_string());
                }
            }
        }
        let lower = prompt.to_lowercase();
        if !s.when_all.iter().all(|p| contains_phrase(&lower, &render(p, &vars))) {
            return None;
        }
        if let Some(tpl) = &s.lookup {
            let escaped: HashMap<_, _> = vars.iter().map(|(k, v)| (k.clone(), regex::escape(v))).collect();
            let re = Regex::new(&render(tpl, &escaped)).ok()?;
            let caps = re.captures(prompt)?;
            for name in re.capture_names().flatten() {
                if let Some(m) = caps.name(name) {
                    vars.insert(name.to_string(), m.as_str().to_string());
                }
            }
        }
        if let (Some(c), Some(re)) = (&s.collect, &self.collect) {
            let items: Vec<&str> = re.captures_iter(prompt).filter_map(|cap| cap.name("x")).map(|m| m.as_str()).collect();
            if items.is_empty() {
                return None;
            }
            vars.insert(c.name.clone(), items.join(&c.join));
        }
        Some(vars)
    }

    fn produce(&self, vars: &HashMap<String, String>, choice: usize) -> String {
        let mut out = render(&self.spec.outputs[choice], vars);
        if let Some((from, to)) = &self.spec.replace {
            out = out.replace(&render(from, vars), &render(to, vars));
        }
        out
    }
}

/// Cuts at the earliest stop sequence, then keeps at most `max_tokens`
/// whitespace-separated tokens.
pub fn apply_limits(text: &str, params: &CompletionParams) -> String {
    let cut = params.stop.iter().filter(|s| !s.is_empty()).filter_map(|s| text.find(s.as_str())).min();
    let text = &text[..cut.unwrap_or(text.len())];
    let mut seen = 0;
    let mut in_token = false;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            in_token = false;
        } else if !in_token {
            in_token = true;
            seen += 1;
            if seen > params.max_tokens {
                return text[..i].trim_end().to_string();
            }
        }
    }
    text.to_string()
}

impl LanguageModel for MockLm {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<Vec<String>> {
        require_prompt(prompt)?;
        params.validate()?;
        let size = prompt.split_whitespace().count();
        if size > self.context_tokens {
            return Err(Error::ContextOverflow { size, limit: self.context_tokens });
        }
        let hit = self.rules.iter().find_map(|r| r.bind(prompt).map(|v| (r, v)));
        Ok((0..params.n)
            .map(|i| match &hit {
                Some((rule, vars)) => {
                    let choice = self.pick(prompt, i, rule.spec.outputs.len(), params.temperature);
                    apply_limits(&rule.produce(vars, choice), params)
                }
                None => String::new(),
            })
            .collect())
    }
}

/// Language model backed by a closure; handy for scripted tests.
pub struct FnLm<F> {
    id: String,
    f: F,
}

impl<F> FnLm<F>
where
    F: Fn(&str, &CompletionParams) -> Vec<String> + Send + Sync,
{
    pub fn new(id: impl Into<String>, f: F) -> Self {
        Self { id: id.into(), f }
    }
}

impl<F> LanguageModel for FnLm<F>
where
    F: Fn(&str, &CompletionParams) -> Vec<String> + Send + Sync,
{
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<Vec<String>> {
        require_prompt(prompt)?;
        Ok((self.f)(prompt, params))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn greedy(lm: &MockLm, prompt: &str) -> String {
        lm.complete(prompt, &CompletionParams::greedy(256)).unwrap().remove(0)
    }

    #[test]
    fn kitchen_activities() {
        let lm = MockLm::strong();
        let p = "Places: kitchen, galley, restaurant kitchen. Objects: coffee maker, mug, kettle. Activities:";
        assert_eq!(greedy(&lm, p), " making coffee, brewing espresso, washing dishes");
    }

    #[test]
    fn phrase_matching_is_whole_word() {
        assert!(contains_phrase("a mug here", "mug"));
        assert!(!contains_phrase("smugly", "mug"));
        assert!(contains_phrase("daughter's laugh.", "daughter's laugh"));
    }

    #[test]
    fn limits_cut_stop_then_tokens() {
        let p = CompletionParams::greedy(2).with_stop("\nQ:");
        assert_eq!(apply_limits(" one two three", &p), " one two");
        assert_eq!(apply_limits(" yes\nQ: more", &p), " yes");
    }

    #[test]
    fn sampling_is_reproducible_and_varies() {
        let lm = MockLm::strong();
        let p = "I am an intelligent image captioning bot.\nThis image is a photo. There are no people.\nI think this photo was taken at a kitchen, galley, or pantry.  I think there might be a mug, kettle in this photo.\nA creative short caption I can generate to describe this image is:";
        let params = CompletionParams::sampled(0.9, 8, 64);
        let a = lm.complete(p, &params).unwrap();
        assert_eq!(a, lm.complete(p, &params).unwrap());
        assert!(a.iter().any(|c| c != &a[0]));
    }

    #[test]
    fn no_rule_gives_empty_completion() {
        assert_eq!(greedy(&MockLm::strong(), "nothing matches this"), "");
    }

    #[test]
    fn context_overflow_reports_size() {
        let lm = MockLm::strong().with_context_tokens(3);
        match lm.complete("a b c d", &CompletionParams::greedy(4)) {
            Err(Error::ContextOverflow { size: 4, limit: 3 }) => {}
            other => panic!("{other:?}"),
        }
    }
}
