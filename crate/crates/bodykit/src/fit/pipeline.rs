//! Two-stage fitting: multi-view landmark initialization, then staged
//! surface refinement with frozen-correspondence inner solves.

use serde::{Deserialize, Serialize};

use crate::geom::{Bvh, MeshAdjacency};
use crate::model::{BodyModel, BodyParams};
use crate::{Error, Result};

use super::config::{FitConfig, FreeBlocks};
use super::energy::{posed_mesh, EnergyBreakdown, Objective, ScanProblem};
use super::lbfgs::{minimize, LbfgsOptions};
use super::metrics::{cloth_penetration_error, skin_error, ClothPenetration};
use super::scan::{LabeledScan, LandmarkObservations};

/// Solver diagnostics for one fit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub initial_energy: f64,
    pub final_energy: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    /// False when the energy failed to decrease within the budget.
    pub converged: bool,
    pub breakdown: EnergyBreakdown,
    /// Behind-camera landmark projections excluded in the final state.
    pub excluded_landmarks: usize,
    /// Energy breakdown at each accepted outer iteration (refreshed
    /// correspondences); total is non-increasing along this trace.
    pub trace: Vec<EnergyBreakdown>,
}

/// One fitted scan with its quality measures.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanFit {
    pub params: BodyParams,
    pub skin_error_mm: Option<f64>,
    pub cloth_penetration: Option<ClothPenetration>,
}

/// Joint fit over all scans of one identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitResult {
    pub fits: Vec<ScanFit>,
    pub record: ConvergenceRecord,
}

fn lbfgs_opts(config: &FitConfig) -> LbfgsOptions {
    LbfgsOptions {
        max_iterations: config.max_inner_iterations,
        gradient_tolerance: config.gradient_tolerance,
        step_tolerance: config.step_tolerance,
        memory: 8,
    }
}

/// Fits pose/shape to multi-view 2D landmarks alone, starting from the
/// rest pose. With a single camera the depth direction is only constrained
/// by the priors: the solve still converges to a low residual, but depth
/// should not be trusted (known planar ambiguity).
pub fn fit_multiview_init(
    model: &BodyModel,
    observations: &LandmarkObservations,
    config: &FitConfig,
    is_child: bool,
    identity: &str,
) -> Result<(BodyParams, ConvergenceRecord)> {
    config.validate()?;
    if observations.total_detections() < 6 {
        return Err(Error::contract(
            "multi-view initialization needs at least 6 landmark detections",
        ));
    }
    for cam in &observations.cameras {
        cam.validate()?;
    }

    let mut rest = BodyParams::rest(model, identity);
    if is_child {
        rest.alpha = 0.7;
    }
    let objective = Objective::new(
        model,
        config,
        vec![ScanProblem {
            scan: None,
            landmarks: Some(observations),
            frozen: None,
        }],
        is_child,
        vec![rest.alpha],
        1.0,
        false,
    );
    let mut x = objective.pack(std::slice::from_ref(&rest));
    let (bd0, _) = objective.eval(&x);
    let initial_energy = bd0.total;

    let stages = [
        FreeBlocks::rigid(),
        FreeBlocks::rigid_pose(),
        FreeBlocks {
            shape: true,
            alpha: true,
            ..FreeBlocks::rigid_pose()
        },
    ];
    let mut inner = 0;
    let mut trace = vec![bd0];
    for stage in stages {
        let free = objective.free_indices(stage);
        let out = minimize(
            |xs| objective.eval(xs).0.total,
            |xs| {
                let (bd, g) = objective.eval_grad(xs, &free);
                (bd.total, g)
            },
            x.clone(),
            &lbfgs_opts(config),
        );
        inner += out.iterations;
        x = out.x;
        trace.push(objective.eval(&x).0);
    }
    let (bd, excluded) = objective.eval(&x);
    let params = objective.unpack(&x, &[identity]).pop().unwrap();
    let record = ConvergenceRecord {
        initial_energy,
        final_energy: bd.total,
        outer_iterations: stages.len(),
        inner_iterations: inner,
        converged: bd.total <= initial_energy + 1e-12,
        breakdown: bd,
        excluded_landmarks: excluded,
        trace,
    };
    Ok((params, record))
}

/// Joint surface + landmark refinement over the scans of one identity.
///
/// Point-to-surface correspondences and the penetrating/outside split are
/// frozen for each inner solve and refreshed every outer iteration; an
/// outer step is only accepted when the refreshed energy does not
/// increase, so the recorded trace is monotone non-increasing.
pub fn fit_refine(
    model: &BodyModel,
    scans: &[&LabeledScan],
    landmarks: &[&LandmarkObservations],
    init: &[BodyParams],
    config: &FitConfig,
) -> Result<FitResult> {
    config.validate()?;
    if scans.is_empty() || scans.len() != landmarks.len() || scans.len() != init.len() {
        return Err(Error::contract("scans, landmarks and init params must align"));
    }
    let identity = &scans[0].identity;
    for s in scans {
        s.validate()?;
        if &s.identity != identity {
            return Err(Error::contract("joint refinement requires one identity"));
        }
    }
    for p in init {
        p.validate(model)?;
    }
    let is_child = scans.iter().any(|s| s.is_child);

    let mut objective = Objective::new(
        model,
        config,
        scans
            .iter()
            .zip(landmarks)
            .map(|(s, l)| ScanProblem {
                scan: Some(s),
                landmarks: Some(*l),
                frozen: None,
            })
            .collect(),
        is_child,
        init.iter().map(|p| p.alpha).collect(),
        config.lambda_landmark,
        true,
    );
    let mut x = objective.pack(init);

    let mut trace: Vec<EnergyBreakdown> = Vec::new();
    let mut inner = 0;
    let mut converged = false;
    let mut best_x = x.clone();

    for outer in 0..config.max_outer_iterations {
        // Refresh surfaces, nearest triangles and penetration splits.
        refresh(&mut objective, &x, model);
        let (bd, _) = objective.eval(&x);
        if let Some(prev) = trace.last() {
            if bd.total > prev.total + 1e-9 {
                // Correspondence refresh regressed the energy: keep the
                // previous accepted state and stop.
                x = best_x.clone();
                converged = true;
                break;
            }
            if prev.total - bd.total <= 1e-9 * prev.total.max(1.0)
                && outer + 1 >= config.stages.len()
            {
                trace.push(bd);
                best_x = x.clone();
                converged = true;
                break;
            }
        }
        trace.push(bd);
        best_x = x.clone();

        let stage = config.stages[outer.min(config.stages.len() - 1)];
        let free = objective.free_indices(stage);
        let out = minimize(
            |xs| objective.eval(xs).0.total,
            |xs| {
                let (b, g) = objective.eval_grad(xs, &free);
                (b.total, g)
            },
            x,
            &lbfgs_opts(config),
        );
        inner += out.iterations;
        x = out.x;
    }
    if !converged {
        // Budget exhausted: accept the last state if it kept improving.
        refresh(&mut objective, &x, model);
        let (bd, _) = objective.eval(&x);
        match trace.last() {
            Some(prev) if bd.total > prev.total + 1e-9 => x = best_x.clone(),
            _ => trace.push(bd),
        }
    }

    refresh(&mut objective, &x, model);
    let (bd, excluded) = objective.eval(&x);
    let identities: Vec<&str> = scans.iter().map(|s| s.identity.as_str()).collect();
    let params = objective.unpack(&x, &identities);

    let fits = params
        .into_iter()
        .zip(scans)
        .map(|(p, scan)| {
            let posed = model.forward(&p).expect("fitted parameters are valid");
            let surface = posed_mesh(model, posed.vertices);
            let bvh = Bvh::build(&surface).expect("posed surface is nonempty");
            let adj = MeshAdjacency::build(&surface);
            ScanFit {
                skin_error_mm: skin_error(scan, &surface, &bvh),
                cloth_penetration: cloth_penetration_error(scan, &surface, &bvh, &adj),
                params: p,
            }
        })
        .collect();

    let record = ConvergenceRecord {
        initial_energy: trace.first().map_or(bd.total, |b| b.total),
        final_energy: bd.total,
        outer_iterations: trace.len(),
        inner_iterations: inner,
        converged,
        breakdown: bd,
        excluded_landmarks: excluded,
        trace,
    };
    Ok(FitResult { fits, record })
}

fn refresh(objective: &mut Objective<'_>, x: &[f64], model: &BodyModel) {
    let layout = objective.layout();
    let n = objective.scans.len();
    for i in 0..n {
        let block = &x[i * layout.len()..(i + 1) * layout.len()];
        let alpha = objective.alpha_of(x, i);
        let (verts, _) = model.forward_generic::<f64>(block, alpha);
        let surface = posed_mesh(model, verts);
        let bvh = Bvh::build(&surface).expect("posed surface is nonempty");
        let adj = MeshAdjacency::build(&surface);
        let scan = objective.scans[i].scan.expect("refinement scans present");
        objective.scans[i].frozen =
            Some(super::energy::freeze_correspondences(scan, &surface, &bvh, &adj));
    }
}

/// Initializes from landmarks and refines: the full per-identity pipeline.
pub fn fit_identity(
    model: &BodyModel,
    scans: &[&LabeledScan],
    landmarks: &[&LandmarkObservations],
    config: &FitConfig,
) -> Result<FitResult> {
    let mut init = Vec::with_capacity(scans.len());
    for (scan, obs) in scans.iter().zip(landmarks) {
        let (params, _) =
            fit_multiview_init(model, obs, config, scan.is_child, &scan.identity)?;
        init.push(params);
    }
    fit_refine(model, scans, landmarks, &init, config)
}
