//! Evaluation protocol (under construction).
