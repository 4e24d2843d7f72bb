//! Command-line entry point (placeholder).
pub fn run() -> i32 { 0 }
