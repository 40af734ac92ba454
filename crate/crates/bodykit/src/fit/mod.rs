//! The fitting stack: robust energy terms, the joint multi-scan objective
//! with inter-shape coupling, two-stage optimization (multi-view landmark
//! initialization, then surface refinement), and fit-quality metrics.
//!
//! Fits for different identities are independent and can run in parallel;
//! the model and scans are read-only throughout a solve.

pub mod config;
pub mod energy;
pub mod lbfgs;
pub mod metrics;
pub mod pipeline;
pub mod scan;

pub use config::{camera_ring, FitConfig, FreeBlocks};
pub use energy::{
    cloth_energy, freeze_correspondences, geman_mcclure, interbeta_energy, landmark_energy,
    posed_mesh, regularizer, skin_energy, EnergyBreakdown, FrozenCorrespondences,
    LandmarkEnergy, Objective, ScanProblem,
};
pub use lbfgs::{minimize, LbfgsOptions, LbfgsOutcome};
pub use metrics::{cloth_penetration_error, skin_error, ClothPenetration};
pub use pipeline::{
    fit_identity, fit_multiview_init, fit_refine, ConvergenceRecord, FitResult, ScanFit,
};
pub use scan::{LabeledScan, Landmark, LandmarkObservations};
