//! Open-ended tasks over a rendered event log, from explained answers and
//! forecasts to modality-routed video search.

pub mod execute;
pub mod route;
pub mod tasks;

pub use execute::{execute, Answer, AskConfig, FrameIndex, Retrieved, SearchIndexes};
pub use route::{extract_search_entity, parse_route, route_question, Modality, Question, RoutedQuery, SUBJECTIVE_WARNING};
pub use tasks::{
    answer_question, apply_correction, explain_answer, forecast, parse_forecast, summarize_day, Forecast, Prediction, QA_STOP,
};
