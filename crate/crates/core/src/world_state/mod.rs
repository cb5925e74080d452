//! Key-moment selection and the timestamped event log built from per-frame
//! captions, with recursive condensation to fit an LM context.

pub mod demo;
pub mod history;
pub mod select;
pub mod stream;

pub use demo::{demo_day, DemoDay, DemoSpec};
pub use history::{
    clock, compile_history, recursive_summarize, render_history, ClockFormat, CondenseConfig, Event, Origin, Source,
    WorldStateHistory,
};
pub use select::{select_by_search, select_uniform, union_indices, SearchConfig, SearchModality};
pub use stream::{Frame, FrameStream};
