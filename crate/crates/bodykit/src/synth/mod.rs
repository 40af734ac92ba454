//! Synthetic corpus generator (under construction).
