pub mod golden;
pub mod worked;
