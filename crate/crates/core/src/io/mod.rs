//! Text format, rendering and reports.

pub mod dot;
pub mod parse;
pub mod render;
pub mod report;

pub use dot::emit_dot;
pub use parse::{parse, ParseError, SyntaxError};
pub use render::render;
