//! Command-line front end (under construction).

/// Entry point for the `bodykit` binary; returns the process exit code.
pub fn run() -> i32 {
    0
}
