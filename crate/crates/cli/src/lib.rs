//! Front end of the `exo` tool: the `.exo` document language, the verbs
//! and their reports.

pub mod commands;
pub mod document;
pub mod report;
