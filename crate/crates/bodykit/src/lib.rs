//! bodykit: body-under-clothing fitting and multi-person 3D pose
//! evaluation at desk scale.
//!
//! The crate has five pillars:
//!
//! * [`model`] — a simplified parametric articulated body: linear shape and
//!   expression spaces on an interpolatable adult/infant template, linear
//!   blend skinning over a kinematic tree, joint regression, and the named
//!   part index sets evaluation relies on.
//! * [`geom`] — cameras, exact point-to-surface queries with a BVH,
//!   inside/outside classification, z-buffered mask rasterization, 2D IoU.
//! * [`fit`] — robust surface + landmark fitting: Geman–McClure energies,
//!   multi-view initialization, staged refinement with frozen-correspondence
//!   inner solves, inter-shape coupling across scans of one identity, and
//!   fit-quality metrics (skin error, penetrating-clothing error).
//! * [`eval`] — the multi-person evaluation protocol: detection-aware
//!   matching with an IoU gate, per-part anchored joint/vertex errors,
//!   F1-normalized aggregates, and occlusion / image-center / yaw analyses.
//! * [`synth`] — a deterministic, seeded corpus generator producing labeled
//!   scans, multi-person scenes with masks, and scripted prediction
//!   degradation for calibrating the metrics.
//!
//! All 3D quantities are meters; reported errors are millimeters; image
//! quantities are pixels. See the repository `examples/` directory for a
//! runnable tour and `src/bin` for the `bodykit` command-line front end.

pub mod cli;
pub mod eval;
pub mod fit;
pub mod geom;
pub mod model;
pub mod num;
pub mod synth;

use std::path::Path;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented domain restriction.
    #[error("domain error: {0}")]
    Domain(String),
    /// A caller broke an API contract (shape mismatch, empty input, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    /// Malformed file contents.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn parse(path: &Path, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.display().to_string(),
            line,
            msg: msg.into(),
        }
    }

    pub fn io_at(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
