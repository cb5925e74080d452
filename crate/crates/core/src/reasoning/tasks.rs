use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::{complete_nonempty, CompletionParams, LanguageModel};
use crate::prompts;
use crate::world_state::{clock, render_history, ClockFormat, WorldStateHistory};

/// Stop sequence keeping answers from running into the next question.
pub const QA_STOP: &str = "\nQ:";

fn require_text(what: &'static str, text: &str) -> Result<()> {
    if text.trim().is_empty() {
        return Err(Error::Empty(what));
    }
    Ok(())
}

fn one_paragraph(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn qa_params() -> CompletionParams {
    CompletionParams::greedy(64).with_stop(QA_STOP)
}

pub fn answer_question(history_text: &str, question: &str, lm: &dyn LanguageModel) -> Result<String> {
    require_text("history", history_text)?;
    require_text("question", question)?;
    Ok(one_paragraph(&complete_nonempty(lm, &prompts::question(history_text, question.trim()), &qa_params())?))
}

pub fn explain_answer(history_text: &str, question: &str, answer: &str, lm: &dyn LanguageModel) -> Result<String> {
    require_text("history", history_text)?;
    require_text("question", question)?;
    require_text("answer", answer)?;
    let prompt = prompts::explanation(history_text, question.trim(), answer.trim());
    Ok(one_paragraph(&complete_nonempty(lm, &prompt, &qa_params())?))
}

pub fn summarize_day(history_text: &str, lm: &dyn LanguageModel) -> Result<String> {
    require_text("history", history_text)?;
    Ok(one_paragraph(&complete_nonempty(lm, &prompts::day_summary(history_text), &CompletionParams::greedy(256))?))
}

pub fn apply_correction(context: &str, original: &str, correction: &str, lm: &dyn LanguageModel) -> Result<String> {
    require_text("correction context", context)?;
    require_text("original summary", original)?;
    require_text("correction", correction)?;
    let prompt = prompts::correction(context, original.trim(), correction.trim());
    Ok(one_paragraph(&complete_nonempty(lm, &prompt, &CompletionParams::greedy(128).with_stop("\n"))?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub t_ms: u64,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub predictions: Vec<Prediction>,
    /// Requested timestamps the completion did not fill.
    pub missing: Vec<u64>,
}

/// Continues the log from the first requested timestamp and reads back
/// `H:MM AM: text` lines for the rest.
pub fn forecast(history: &WorldStateHistory, future_ms: &[u64], lm: &dyn LanguageModel) -> Result<Forecast> {
    let first = *future_ms.first().ok_or(Error::Empty("future timestamps"))?;
    if future_ms.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("future timestamps must be strictly increasing".into()));
    }
    let last = history.events.last().map(|e| e.t_ms).unwrap_or(0);
    if first <= last {
        return Err(Error::Precondition(format!("forecast time {first} is not after the last event at {last}")));
    }
    let rendered = render_history(history, ClockFormat::Twelve);
    let prompt = prompts::forecast(&rendered, &clock(first, ClockFormat::Twelve));
    let raw = complete_nonempty(lm, &prompt, &CompletionParams::greedy(256))?;
    parse_forecast(&raw, future_ms)
}

/// The first line answers `future_ms[0]`; later lines must carry their clock.
pub fn parse_forecast(raw: &str, future_ms: &[u64]) -> Result<Forecast> {
    let mut lines = raw.lines();
    let head = lines.next().map(str::trim).unwrap_or("");
    if head.is_empty() {
        return Err(Error::Unparseable { raw: raw.to_string() });
    }
    let mut found: Vec<Option<String>> = vec![None; future_ms.len()];
    found[0] = Some(head.to_string());
    for line in lines {
        let Some((stamp, text)) = split_clock(line.trim()) else { continue };
        if let Some(i) = future_ms.iter().position(|&t| clock(t, ClockFormat::Twelve) == stamp) {
            if found[i].is_none() && !text.is_empty() {
                found[i] = Some(text.to_string());
            }
        }
    }
    let mut predictions = Vec::new();
    let mut missing = Vec::new();
    for (&t_ms, text) in future_ms.iter().zip(found) {
        match text {
            Some(text) => predictions.push(Prediction { t_ms, text }),
            None => missing.push(t_ms),
        }
    }
    Ok(Forecast { predictions, missing })
}

/// `"4:03 PM: text"` → `("4:03 PM", "text")`.
fn split_clock(line: &str) -> Option<(&str, &str)> {
    let (h, rest) = line.split_once(':')?;
    if h.is_empty() || h.len() > 2 || !h.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let stamp_len = h.len() + 1 + 2 + 3;
    let stamp = line.get(..stamp_len)?;
    let tail = rest.get(2..)?;
    if !(tail.starts_with(" AM") || tail.starts_with(" PM")) || !rest[..2].bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let text = line[stamp_len..].strip_prefix(':')?.trim();
    Some((stamp, text))
}
