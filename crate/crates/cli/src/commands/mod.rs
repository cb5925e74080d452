mod ask;
mod caption;
mod history;
mod index;
mod select;
mod synth;
mod v2t;

use std::path::Path;

use socratic_core::foundation::Embedding;
use socratic_core::Error;

use crate::cli::Command;
use crate::config::RunConfig;
use crate::failure::CliResult;

/// Resolved run settings shared by every command.
pub struct Ctx {
    pub cfg: RunConfig,
    pub pretty: bool,
}

pub fn run(command: Command, ctx: &Ctx) -> CliResult<()> {
    match command {
        Command::Caption(a) => caption::run(a, ctx),
        Command::History(a) => history::run(a, ctx),
        Command::Ask(a) => ask::run(a, ctx),
        Command::Index(c) => index::run(c, ctx),
        Command::V2t(a) => v2t::run(a, ctx),
        Command::Select(a) => select::run(a, ctx),
        Command::Synth(c) => synth::run(c, ctx),
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// A JSON array of numbers.
pub(crate) fn read_embedding(path: &Path) -> Result<Embedding, Error> {
    let values: Vec<f32> =
        serde_json::from_str(&read_text(path)?).map_err(|e| Error::format(path.display().to_string(), e.to_string()))?;
    Embedding::new(values)
}
