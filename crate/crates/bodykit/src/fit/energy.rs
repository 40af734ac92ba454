//! Robust fitting energies and the differentiable joint objective.
//!
//! Every surface term is expressed through squared distances so the whole
//! objective is smooth; the Geman–McClure penalty of a norm only ever needs
//! the squared argument. Point-to-surface correspondences (nearest triangle
//! and the penetrating/outside split) are frozen while an inner solve runs
//! and refreshed between outer iterations, so each inner problem is smooth.
//!
//! Gradients combine an analytic pass for the residual side (envelope
//! derivative of point-to-triangle distance, pinhole projection chain) with
//! one dual-number forward pass per free parameter for the body side; no
//! derivative is approximated.

use crate::geom::{Bvh, Camera, MeshAdjacency, Side, TriMesh};
use crate::model::{BendSpec, BodyModel, BodyParams, PackedLayout};
use crate::num::{dot3, sub3, Dual, Real, V3};
use crate::{Error, Result};

use super::config::{FitConfig, FreeBlocks};
use super::scan::{LabeledScan, LandmarkObservations};

/// Geman–McClure robust penalty `sigma^2 x^2 / (sigma^2 + x^2)`: even,
/// smooth, saturating at `sigma^2`.
pub fn geman_mcclure(x: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::domain("geman_mcclure requires sigma > 0"));
    }
    Ok(gm_sq(x * x, sigma))
}

/// Geman–McClure as a function of the squared residual.
#[inline]
pub(crate) fn gm_sq(x_sq: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    s2 * x_sq / (s2 + x_sq)
}

/// d gm_sq / d x_sq.
#[inline]
fn gm_sq_grad(x_sq: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let denom = s2 + x_sq;
    s2 * s2 / (denom * denom)
}

/// One-sided exponential barrier: zero for `u <= 0`, `exp(u) - 1 - u`
/// beyond, so bending past the anatomical stop grows exponentially while
/// the valid range is untouched.
#[inline]
fn bend_barrier(u: f64) -> f64 {
    if u > 0.0 {
        u.exp() - 1.0 - u
    } else {
        0.0
    }
}

#[inline]
fn bend_barrier_grad(u: f64) -> f64 {
    if u > 0.0 {
        u.exp() - 1.0
    } else {
        0.0
    }
}

/// Landmark reprojection energy value plus the behind-camera exclusion
/// count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LandmarkEnergy {
    pub value: f64,
    pub excluded: usize,
}

/// Sum over cameras and observed joints of
/// `conf * gm(|project(joint) - observation|)`. Behind-camera projections
/// are excluded and counted, never clamped.
pub fn landmark_energy(
    joints: &[[f64; 3]],
    obs: &LandmarkObservations,
    sigma_px: f64,
) -> Result<LandmarkEnergy> {
    if obs.total_detections() == 0 {
        return Err(Error::contract(
            "landmark energy is unconstrained without any detection",
        ));
    }
    let mut value = 0.0;
    let mut excluded = 0;
    for (cam, dets) in obs.cameras.iter().zip(&obs.detections) {
        for (k, det) in dets.iter().enumerate() {
            let Some(det) = det else { continue };
            let (uv, _z, valid) = cam.project_point::<f64>(joints[k]);
            if !valid {
                excluded += 1;
                continue;
            }
            let r = [uv[0] - det.uv[0], uv[1] - det.uv[1]];
            value += det.confidence * gm_sq(r[0] * r[0] + r[1] * r[1], sigma_px);
        }
    }
    Ok(LandmarkEnergy { value, excluded })
}

/// Point-to-surface skin energy against a posed model mesh with fresh
/// nearest-triangle correspondences.
pub fn skin_energy(scan: &LabeledScan, posed: &TriMesh, bvh: &Bvh, sigma_m: f64) -> f64 {
    scan.mesh
        .positions
        .iter()
        .zip(&scan.p_skin)
        .map(|(&s, &p)| {
            if p == 0.0 {
                return 0.0;
            }
            let near = bvh.nearest(posed, s);
            gm_sq(p * near.distance * near.distance, sigma_m)
        })
        .sum()
}

/// Clothing energy: robust pull toward the surface for points outside the
/// body, quadratic penetration penalty (weight `lambda_inner`) for points
/// inside it.
pub fn cloth_energy(
    scan: &LabeledScan,
    posed: &TriMesh,
    bvh: &Bvh,
    adj: &MeshAdjacency,
    sigma_m: f64,
    lambda_inner: f64,
) -> f64 {
    scan.mesh
        .positions
        .iter()
        .zip(&scan.p_cloth)
        .map(|(&s, &p)| {
            if p == 0.0 {
                return 0.0;
            }
            let (near, side) = crate::geom::classify_point(posed, bvh, adj, s);
            let d2 = near.distance * near.distance;
            match side {
                Side::Outside => gm_sq(p * d2, sigma_m),
                Side::Inside => lambda_inner * p * d2,
            }
        })
        .sum()
}

/// Pairwise squared shape distance across scans of one identity.
pub fn interbeta_energy(betas: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for i in 0..betas.len() {
        for j in i + 1..betas.len() {
            total += betas[i]
                .iter()
                .zip(&betas[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
    }
    total
}

/// L2 priors on pose, hand latents, shape and expression, plus the
/// elbow/knee bend barrier.
pub fn regularizer(params: &BodyParams, bends: &[BendSpec], config: &FitConfig) -> f64 {
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let theta_sq: f64 = params.theta_body.iter().map(|aa| sq(aa)).sum();
    let mut e = config.lambda_theta_body * theta_sq
        + config.lambda_theta_hand * (sq(&params.z_left) + sq(&params.z_right))
        + config.lambda_beta * sq(&params.beta)
        + config.lambda_expr * sq(&params.psi);
    for b in bends {
        let u = b.sign * params.theta_body[b.joint as usize][b.axis as usize];
        e += config.lambda_bend * bend_barrier(u);
    }
    e
}

/// Nearest-triangle and penetration state frozen for one inner solve.
#[derive(Clone, Debug)]
pub struct FrozenCorrespondences {
    pub triangle: Vec<usize>,
    pub inside: Vec<bool>,
}

/// Queries fresh correspondences for every scan vertex against the posed
/// surface.
pub fn freeze_correspondences(
    scan: &LabeledScan,
    posed: &TriMesh,
    bvh: &Bvh,
    adj: &MeshAdjacency,
) -> FrozenCorrespondences {
    let mut triangle = Vec::with_capacity(scan.mesh.positions.len());
    let mut inside = Vec::with_capacity(scan.mesh.positions.len());
    for &s in &scan.mesh.positions {
        let (near, side) = crate::geom::classify_point(posed, bvh, adj, s);
        triangle.push(near.triangle);
        inside.push(side == Side::Inside);
    }
    FrozenCorrespondences { triangle, inside }
}

/// Weighted per-term energies; `total` always equals their sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnergyBreakdown {
    pub landmark: f64,
    pub skin: f64,
    pub cloth: f64,
    pub reg: f64,
    pub interbeta: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn close(&mut self) {
        self.total = self.landmark + self.skin + self.cloth + self.reg + self.interbeta;
    }
}

/// One scan inside a joint objective. `scan` is absent during the
/// landmark-only initialization stage.
pub struct ScanProblem<'a> {
    pub scan: Option<&'a LabeledScan>,
    pub landmarks: Option<&'a LandmarkObservations>,
    pub frozen: Option<FrozenCorrespondences>,
}

/// The joint objective over the scans of one identity.
///
/// Packed variables: one [`PackedLayout`] block per scan followed by a
/// single shared child-blend logit. When `child` is false the logit slot is
/// inert and each scan keeps its fixed alpha; when true, all scans share
/// `alpha = sigmoid(logit)`, keeping the box constraint implicit.
pub struct Objective<'a> {
    pub model: &'a BodyModel,
    pub config: &'a FitConfig,
    pub scans: Vec<ScanProblem<'a>>,
    pub child: bool,
    pub fixed_alpha: Vec<f64>,
    /// Weight on the landmark term (1 during multi-view initialization,
    /// `lambda_landmark` during refinement).
    pub landmark_weight: f64,
    /// Surface terms are off during multi-view initialization.
    pub use_surface: bool,
    layout: PackedLayout,
}

#[inline]
fn sigmoid(a: f64) -> f64 {
    1.0 / (1.0 + (-a).exp())
}

/// Inverse of [`sigmoid`], clamped away from the endpoints.
pub fn logit(alpha: f64) -> f64 {
    let a = alpha.clamp(1e-6, 1.0 - 1e-6);
    (a / (1.0 - a)).ln()
}

impl<'a> Objective<'a> {
    pub fn new(
        model: &'a BodyModel,
        config: &'a FitConfig,
        scans: Vec<ScanProblem<'a>>,
        child: bool,
        fixed_alpha: Vec<f64>,
        landmark_weight: f64,
        use_surface: bool,
    ) -> Self {
        assert_eq!(scans.len(), fixed_alpha.len());
        Self {
            layout: PackedLayout::of(model),
            model,
            config,
            scans,
            child,
            fixed_alpha,
            landmark_weight,
            use_surface,
        }
    }

    pub fn layout(&self) -> PackedLayout {
        self.layout
    }

    pub fn n_vars(&self) -> usize {
        self.scans.len() * self.layout.len() + 1
    }

    fn alpha_index(&self) -> usize {
        self.n_vars() - 1
    }

    fn scan_block(&self, i: usize) -> std::ops::Range<usize> {
        let l = self.layout.len();
        i * l..(i + 1) * l
    }

    /// Packs per-scan parameters (plus the shared alpha logit) into one
    /// variable vector.
    pub fn pack(&self, params: &[BodyParams]) -> Vec<f64> {
        assert_eq!(params.len(), self.scans.len());
        let mut x = Vec::with_capacity(self.n_vars());
        for p in params {
            x.extend(self.layout.pack(p));
        }
        let alpha0 = params.first().map_or(1.0, |p| p.alpha);
        x.push(logit(alpha0));
        x
    }

    /// Recovers per-scan parameters from a variable vector.
    pub fn unpack(&self, x: &[f64], identities: &[&str]) -> Vec<BodyParams> {
        (0..self.scans.len())
            .map(|i| {
                let alpha = if self.child {
                    sigmoid(x[self.alpha_index()])
                } else {
                    self.fixed_alpha[i]
                };
                self.layout
                    .unpack(&x[self.scan_block(i)], alpha, identities[i])
            })
            .collect()
    }

    /// Flat indices the given stage may move.
    pub fn free_indices(&self, blocks: FreeBlocks) -> Vec<usize> {
        let mut free = Vec::new();
        let l = self.layout;
        for i in 0..self.scans.len() {
            let base = i * l.len();
            if blocks.trans {
                free.extend(base..base + 3);
            }
            let theta = l.theta_range();
            if blocks.root_orient {
                free.extend(base + theta.start..base + theta.start + 3);
            }
            if blocks.body_pose {
                free.extend(base + theta.start + 3..base + theta.end);
            }
            if blocks.hands {
                free.extend(base + l.z_left_range().start..base + l.z_right_range().end);
            }
            if blocks.shape {
                free.extend(base + l.beta_range().start..base + l.beta_range().end);
            }
            if blocks.expr {
                free.extend(base + l.psi_range().start..base + l.psi_range().end);
            }
        }
        if blocks.alpha && self.child {
            free.push(self.alpha_index());
        }
        free
    }

    /// Effective child blend for scan `i` at the given variables.
    pub fn alpha_of(&self, x: &[f64], i: usize) -> f64 {
        if self.child {
            sigmoid(x[self.alpha_index()])
        } else {
            self.fixed_alpha[i]
        }
    }

    /// Energy breakdown plus the count of behind-camera landmark
    /// exclusions.
    pub fn eval(&self, x: &[f64]) -> (EnergyBreakdown, usize) {
        let mut bd = EnergyBreakdown::default();
        let mut excluded = 0;
        let mut betas: Vec<Vec<f64>> = Vec::with_capacity(self.scans.len());
        for (i, sp) in self.scans.iter().enumerate() {
            let block = &x[self.scan_block(i)];
            let alpha = self.alpha_of(x, i);
            let (verts, joints) = self.model.forward_generic::<f64>(block, alpha);
            if let Some(obs) = sp.landmarks {
                let lm = landmark_energy(&joints, obs, self.config.sigma_landmark_px)
                    .expect("observations validated at pipeline entry");
                bd.landmark += self.landmark_weight * lm.value;
                excluded += lm.excluded;
            }
            if self.use_surface {
                let frozen = sp
                    .frozen
                    .as_ref()
                    .expect("surface terms need frozen correspondences");
                let scan = sp.scan.expect("surface terms need a scan");
                let (skin, cloth) = self.surface_terms_value(scan, frozen, &verts);
                bd.skin += self.config.lambda_skin * skin;
                bd.cloth += self.config.lambda_cloth * cloth;
            }
            let params = self.layout.unpack(block, alpha, "");
            bd.reg += regularizer(&params, &self.model.part_sets.bends, self.config);
            betas.push(params.beta);
        }
        bd.interbeta += self.config.lambda_interbeta * interbeta_energy(&betas);
        bd.close();
        (bd, excluded)
    }

    fn surface_terms_value(
        &self,
        scan: &LabeledScan,
        frozen: &FrozenCorrespondences,
        verts: &[[f64; 3]],
    ) -> (f64, f64) {
        let sigma = self.config.sigma_surface_m;
        let mut skin = 0.0;
        let mut cloth = 0.0;
        for (si, &s) in scan.mesh.positions.iter().enumerate() {
            let p_skin = scan.p_skin[si];
            let p_cloth = scan.p_cloth[si];
            if p_skin == 0.0 && p_cloth == 0.0 {
                continue;
            }
            let tri = self.model.faces[frozen.triangle[si]];
            let (q, _, _) = crate::geom::closest_point_triangle(
                s,
                verts[tri[0] as usize],
                verts[tri[1] as usize],
                verts[tri[2] as usize],
            );
            let d2 = dot3(sub3(s, q), sub3(s, q));
            if p_skin > 0.0 {
                skin += gm_sq(p_skin * d2, sigma);
            }
            if p_cloth > 0.0 {
                if frozen.inside[si] {
                    cloth += self.config.lambda_inner * p_cloth * d2;
                } else {
                    cloth += gm_sq(p_cloth * d2, sigma);
                }
            }
        }
        (skin, cloth)
    }

    /// Value and gradient restricted to `free` indices (other slots zero).
    pub fn eval_grad(&self, x: &[f64], free: &[usize]) -> (EnergyBreakdown, Vec<f64>) {
        let mut grad = vec![0.0; self.n_vars()];
        let mut bd = EnergyBreakdown::default();
        let l = self.layout;
        let free_alpha = self.child && free.contains(&self.alpha_index());
        let mut betas: Vec<Vec<f64>> = Vec::with_capacity(self.scans.len());

        for (i, sp) in self.scans.iter().enumerate() {
            let block_range = self.scan_block(i);
            let block = &x[block_range.clone()];
            let alpha = self.alpha_of(x, i);
            let (verts, joints) = self.model.forward_generic::<f64>(block, alpha);

            // Residual-side derivatives with respect to geometry.
            let mut d_verts = vec![[0.0; 3]; verts.len()];
            let mut d_joints = vec![[0.0; 3]; joints.len()];

            if let Some(obs) = sp.landmarks {
                bd.landmark += self.landmark_weight
                    * self.landmark_grad(obs, &joints, &mut d_joints);
            }
            if self.use_surface {
                let frozen = sp.frozen.as_ref().expect("frozen correspondences");
                let scan = sp.scan.expect("surface terms need a scan");
                let (skin, cloth) =
                    self.surface_grad(scan, frozen, &verts, &mut d_verts);
                bd.skin += self.config.lambda_skin * skin;
                bd.cloth += self.config.lambda_cloth * cloth;
            }

            // Regularizer contributes directly in parameter space.
            let params = self.layout.unpack(block, alpha, "");
            bd.reg += regularizer(&params, &self.model.part_sets.bends, self.config);
            self.reg_grad(&params, &block_range, free, &mut grad);
            betas.push(params.beta);

            // Chain geometry derivatives through the body with one dual
            // pass per free parameter of this block; translation has an
            // identity Jacobian and is accumulated directly.
            let free_here: Vec<usize> = free
                .iter()
                .copied()
                .filter(|&p| block_range.contains(&p))
                .collect();
            for &p in &free_here {
                let local = p - block_range.start;
                if l.trans_range().contains(&local) {
                    let k = local;
                    grad[p] += d_verts.iter().map(|d| d[k]).sum::<f64>()
                        + d_joints.iter().map(|d| d[k]).sum::<f64>();
                    continue;
                }
                let mut xd: Vec<Dual> = block.iter().map(|&v| Dual::c(v)).collect();
                xd[local] = Dual::var(block[local]);
                let (dv, dj) = self.model.forward_generic::<Dual>(&xd, Dual::c(alpha));
                grad[p] += dot_duals(&dv, &d_verts) + dot_duals(&dj, &d_joints);
            }
            if free_alpha {
                // alpha = sigmoid(logit): differentiate through both.
                let a_logit = Dual::var(x[self.alpha_index()]);
                let alpha_d = Dual::c(1.0) / (Dual::c(1.0) + (-a_logit).exp());
                let xd: Vec<Dual> = block.iter().map(|&v| Dual::c(v)).collect();
                let (dv, dj) = self.model.forward_generic::<Dual>(&xd, alpha_d);
                grad[self.alpha_index()] +=
                    dot_duals(&dv, &d_verts) + dot_duals(&dj, &d_joints);
            }
        }

        // Inter-shape coupling: value plus direct beta gradient.
        bd.interbeta += self.config.lambda_interbeta * interbeta_energy(&betas);
        if self.config.lambda_interbeta > 0.0 && betas.len() > 1 {
            for i in 0..betas.len() {
                let base = self.scan_block(i).start + l.beta_range().start;
                for k in 0..l.n_beta {
                    let mut g = 0.0;
                    for j in 0..betas.len() {
                        if j != i {
                            g += 2.0 * (betas[i][k] - betas[j][k]);
                        }
                    }
                    let idx = base + k;
                    if free.contains(&idx) {
                        grad[idx] += self.config.lambda_interbeta * g;
                    }
                }
            }
        }
        bd.close();
        (bd, grad)
    }

    fn landmark_grad(
        &self,
        obs: &LandmarkObservations,
        joints: &[[f64; 3]],
        d_joints: &mut [[f64; 3]],
    ) -> f64 {
        let sigma = self.config.sigma_landmark_px;
        let w = self.landmark_weight;
        let mut value = 0.0;
        for (cam, dets) in obs.cameras.iter().zip(&obs.detections) {
            for (k, det) in dets.iter().enumerate() {
                let Some(det) = det else { continue };
                let pc = cam.world_to_camera::<f64>(joints[k]);
                if pc[2] <= crate::geom::camera::MIN_DEPTH {
                    continue;
                }
                let f = cam.focal;
                let inv_z = 1.0 / pc[2];
                let uv = [
                    f * pc[0] * inv_z + cam.principal[0],
                    f * pc[1] * inv_z + cam.principal[1],
                ];
                let r = [uv[0] - det.uv[0], uv[1] - det.uv[1]];
                let x2 = r[0] * r[0] + r[1] * r[1];
                value += det.confidence * gm_sq(x2, sigma);
                let gp = det.confidence * gm_sq_grad(x2, sigma);
                // d uv / d world point, rows of the camera rotation chained
                // through the pinhole division.
                let r0 = cam.rotation[0];
                let r1 = cam.rotation[1];
                let r2 = cam.rotation[2];
                for axis in 0..3 {
                    let du = f * inv_z * r0[axis] - f * pc[0] * inv_z * inv_z * r2[axis];
                    let dv = f * inv_z * r1[axis] - f * pc[1] * inv_z * inv_z * r2[axis];
                    d_joints[k][axis] += w * gp * 2.0 * (r[0] * du + r[1] * dv);
                }
            }
        }
        value
    }

    fn surface_grad(
        &self,
        scan: &LabeledScan,
        frozen: &FrozenCorrespondences,
        verts: &[[f64; 3]],
        d_verts: &mut [[f64; 3]],
    ) -> (f64, f64) {
        let sigma = self.config.sigma_surface_m;
        let mut skin = 0.0;
        let mut cloth = 0.0;
        for (si, &s) in scan.mesh.positions.iter().enumerate() {
            let p_skin = scan.p_skin[si];
            let p_cloth = scan.p_cloth[si];
            if p_skin == 0.0 && p_cloth == 0.0 {
                continue;
            }
            let tri = self.model.faces[frozen.triangle[si]];
            let (q, _, bary) = crate::geom::closest_point_triangle(
                s,
                verts[tri[0] as usize],
                verts[tri[1] as usize],
                verts[tri[2] as usize],
            );
            let diff = sub3(s, q);
            let d2 = dot3(diff, diff);
            // Envelope derivative: d(d^2)/d(vertex_i) = -2 b_i (s - q).
            let mut g_d2 = 0.0; // d E / d (d^2), weighted
            if p_skin > 0.0 {
                skin += gm_sq(p_skin * d2, sigma);
                g_d2 += self.config.lambda_skin * gm_sq_grad(p_skin * d2, sigma) * p_skin;
            }
            if p_cloth > 0.0 {
                if frozen.inside[si] {
                    cloth += self.config.lambda_inner * p_cloth * d2;
                    g_d2 += self.config.lambda_cloth * self.config.lambda_inner * p_cloth;
                } else {
                    cloth += gm_sq(p_cloth * d2, sigma);
                    g_d2 +=
                        self.config.lambda_cloth * gm_sq_grad(p_cloth * d2, sigma) * p_cloth;
                }
            }
            for (vi, b) in tri.iter().zip(bary) {
                let c = -2.0 * g_d2 * b;
                let dv = &mut d_verts[*vi as usize];
                dv[0] += c * diff[0];
                dv[1] += c * diff[1];
                dv[2] += c * diff[2];
            }
        }
        (skin, cloth)
    }

    fn reg_grad(
        &self,
        params: &BodyParams,
        block: &std::ops::Range<usize>,
        free: &[usize],
        grad: &mut [f64],
    ) {
        let l = self.layout;
        let cfg = self.config;
        let theta0 = block.start + l.theta_range().start;
        for (j, aa) in params.theta_body.iter().enumerate() {
            for axis in 0..3 {
                let idx = theta0 + 3 * j + axis;
                if free.contains(&idx) {
                    grad[idx] += 2.0 * cfg.lambda_theta_body * aa[axis];
                }
            }
        }
        for b in &self.model.part_sets.bends {
            let idx = theta0 + 3 * b.joint as usize + b.axis as usize;
            if free.contains(&idx) {
                let u = b.sign * params.theta_body[b.joint as usize][b.axis as usize];
                grad[idx] += cfg.lambda_bend * b.sign * bend_barrier_grad(u);
            }
        }
        let zl0 = block.start + l.z_left_range().start;
        for (k, &z) in params.z_left.iter().enumerate() {
            if free.contains(&(zl0 + k)) {
                grad[zl0 + k] += 2.0 * cfg.lambda_theta_hand * z;
            }
        }
        let zr0 = block.start + l.z_right_range().start;
        for (k, &z) in params.z_right.iter().enumerate() {
            if free.contains(&(zr0 + k)) {
                grad[zr0 + k] += 2.0 * cfg.lambda_theta_hand * z;
            }
        }
        let b0 = block.start + l.beta_range().start;
        for (k, &b) in params.beta.iter().enumerate() {
            if free.contains(&(b0 + k)) {
                grad[b0 + k] += 2.0 * cfg.lambda_beta * b;
            }
        }
        let p0 = block.start + l.psi_range().start;
        for (k, &p) in params.psi.iter().enumerate() {
            if free.contains(&(p0 + k)) {
                grad[p0 + k] += 2.0 * cfg.lambda_expr * p;
            }
        }
    }
}

fn dot_duals(duals: &[V3<Dual>], weights: &[[f64; 3]]) -> f64 {
    duals
        .iter()
        .zip(weights)
        .map(|(d, w)| d[0].du * w[0] + d[1].du * w[1] + d[2].du * w[2])
        .sum()
}

/// Builds the posed surface as a mesh sharing the model's topology.
/// Panics if posing degenerated any face (does not happen for bounded
/// parameters on the toy model).
pub fn posed_mesh(model: &BodyModel, vertices: Vec<[f64; 3]>) -> TriMesh {
    let mesh = TriMesh::new(vertices, model.faces.clone()).expect("posed mesh indices valid");
    assert_eq!(
        mesh.faces.len(),
        model.faces.len(),
        "posed mesh must keep the model's face numbering"
    );
    mesh
}

/// Projects 3D points with the camera and keeps the valid ones,
/// used by tests and the synthetic landmark generator.
pub fn project_visible(cam: &Camera, points: &[[f64; 3]]) -> Vec<Option<[f64; 2]>> {
    points
        .iter()
        .map(|&p| {
            let (uv, _, valid) = cam.project_point::<f64>(p);
            valid.then_some(uv)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::scan::Landmark;
    use crate::geom::{box_mesh, Bvh, MeshAdjacency};
    use crate::model::toy::toy_model;
    use approx::assert_relative_eq;

    #[test]
    fn geman_mcclure_examples() {
        assert_relative_eq!(geman_mcclure(0.0, 2.0).unwrap(), 0.0);
        assert_relative_eq!(geman_mcclure(1.0, 1.0).unwrap(), 0.5);
        // Saturation: at x = 1e6 the value reaches sigma^2 within 1e-6 rel.
        let v = geman_mcclure(1e6, 3.0).unwrap();
        assert!((v - 9.0).abs() / 9.0 < 1e-6);
        assert!(geman_mcclure(1.0, 0.0).is_err());
        assert!(geman_mcclure(1.0, -2.0).is_err());
    }

    #[test]
    fn geman_mcclure_even_and_bounded() {
        for x in [-5.0, -0.3, 0.7, 11.0] {
            let a = geman_mcclure(x, 1.7).unwrap();
            let b = geman_mcclure(-x, 1.7).unwrap();
            assert_relative_eq!(a, b);
            assert!(a < 1.7 * 1.7);
        }
    }

    fn flat_scan(offsets: &[f64], p_skin: f64, p_cloth: f64) -> (LabeledScan, TriMesh) {
        // A big flat wall at z = 0 (front face of a slab), scan points
        // displaced along +z (outward) by the given offsets.
        let slab = box_mesh([-10.0, -10.0, -1.0], [10.0, 10.0, 0.0]);
        let positions: Vec<[f64; 3]> = offsets
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                [
                    -5.0 + (i as f64 % 10.0),
                    -4.5 + (i as f64 / 10.0).floor(),
                    d,
                ]
            })
            .collect();
        let n = positions.len();
        let faces = (0..n.saturating_sub(2))
            .map(|i| [i as u32, i as u32 + 1, i as u32 + 2])
            .collect();
        let mesh = TriMesh::new(positions, faces).unwrap();
        let p_other = 1.0 - p_skin - p_cloth;
        let scan = LabeledScan {
            mesh,
            p_skin: vec![p_skin; n],
            p_cloth: vec![p_cloth; n],
            p_other: vec![p_other; n],
            identity: "flat".into(),
            is_child: false,
        };
        (scan, slab)
    }

    #[test]
    fn skin_energy_zero_on_surface_and_zero_weight() {
        let (scan, slab) = flat_scan(&vec![0.0; 40], 1.0, 0.0);
        let bvh = Bvh::build(&slab).unwrap();
        assert_relative_eq!(skin_energy(&scan, &slab, &bvh, 0.05), 0.0);
        let (scan0, _) = flat_scan(&vec![0.02; 40], 0.0, 0.0);
        assert_relative_eq!(skin_energy(&scan0, &slab, &bvh, 0.05), 0.0);
    }

    #[test]
    fn skin_energy_matches_per_vertex_brute_force() {
        let model = toy_model(31);
        let posed = model
            .forward(&crate::model::BodyParams::rest(&model, "x"))
            .unwrap();
        let surf = posed_mesh(&model, posed.vertices);
        let bvh = Bvh::build(&surf).unwrap();
        // 200 off-surface queries with mixed probabilities.
        let n = 200;
        let positions: Vec<[f64; 3]> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                [
                    0.4 * (t * 12.0).sin(),
                    0.2 + 1.4 * t,
                    0.3 * (t * 7.0).cos(),
                ]
            })
            .collect();
        let faces = (0..n - 2).map(|i| [i as u32, i as u32 + 1, i as u32 + 2]).collect();
        let mesh = TriMesh::new(positions.clone(), faces).unwrap();
        let p_skin: Vec<f64> = (0..n).map(|i| (i % 5) as f64 / 5.0).collect();
        let p_other: Vec<f64> = p_skin.iter().map(|p| 1.0 - p).collect();
        let scan = LabeledScan {
            mesh,
            p_skin: p_skin.clone(),
            p_cloth: vec![0.0; n],
            p_other,
            identity: "probe".into(),
            is_child: false,
        };
        let got = skin_energy(&scan, &surf, &bvh, 0.05);
        // Independent loop over every triangle per vertex.
        let mut want = 0.0;
        for (i, &s) in positions.iter().enumerate() {
            if p_skin[i] == 0.0 {
                continue;
            }
            let mut best = f64::INFINITY;
            for f in 0..surf.faces.len() {
                let (a, b, c) = surf.triangle(f);
                let d2 = crate::geom::dist_sq_triangle(s, a, b, c);
                best = best.min(d2);
            }
            want += gm_sq(p_skin[i] * best, 0.05);
        }
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn cloth_energy_outward_is_outer_only() {
        let offsets = vec![0.005; 30];
        let (scan, slab) = flat_scan(&offsets, 0.0, 1.0);
        let bvh = Bvh::build(&slab).unwrap();
        let adj = MeshAdjacency::build(&slab);
        let e = cloth_energy(&scan, &slab, &bvh, &adj, 0.05, 123.0);
        let expect: f64 = offsets.iter().map(|&d| gm_sq(d * d, 0.05)).sum();
        assert_relative_eq!(e, expect, epsilon = 1e-12);
    }

    #[test]
    fn cloth_energy_inward_is_inner_quadratic() {
        let d = 0.004;
        let offsets = vec![-d; 30];
        let (scan, slab) = flat_scan(&offsets, 0.0, 1.0);
        let bvh = Bvh::build(&slab).unwrap();
        let adj = MeshAdjacency::build(&slab);
        let lambda = 7.0;
        let e = cloth_energy(&scan, &slab, &bvh, &adj, 0.05, lambda);
        assert_relative_eq!(e, lambda * 30.0 * d * d, epsilon = 1e-12);
    }

    #[test]
    fn cloth_energy_zero_weight_is_zero() {
        let (scan, slab) = flat_scan(&vec![-0.004; 30], 1.0, 0.0);
        let bvh = Bvh::build(&slab).unwrap();
        let adj = MeshAdjacency::build(&slab);
        assert_relative_eq!(cloth_energy(&scan, &slab, &bvh, &adj, 0.05, 7.0), 0.0);
    }

    #[test]
    fn interbeta_examples() {
        let b = vec![vec![0.3, -0.2], vec![0.3, -0.2]];
        assert_relative_eq!(interbeta_energy(&b), 0.0);
        let b = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        assert_relative_eq!(interbeta_energy(&b), 4.0);
        assert_relative_eq!(interbeta_energy(&[vec![5.0]]), 0.0);
        // Three betas against an explicit double loop.
        let b = vec![vec![0.5, 1.0], vec![-0.25, 0.75], vec![2.0, -1.0]];
        let mut want = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                for k in 0..2 {
                    want += (b[i][k] - b[j][k]) * (b[i][k] - b[j][k]);
                }
            }
        }
        assert_relative_eq!(interbeta_energy(&b), want);
    }

    #[test]
    fn regularizer_examples_and_oracle() {
        let model = toy_model(32);
        let mut cfg = FitConfig::default();
        let mut p = crate::model::BodyParams::rest(&model, "r");
        assert_relative_eq!(regularizer(&p, &model.part_sets.bends, &cfg), 0.0);

        cfg.lambda_theta_body = 0.0;
        cfg.lambda_theta_hand = 0.0;
        cfg.lambda_expr = 0.0;
        cfg.lambda_bend = 0.0;
        cfg.lambda_beta = 2.0;
        p.beta[0] = 1.0;
        assert_relative_eq!(regularizer(&p, &model.part_sets.bends, &cfg), 2.0);

        // Random parameters against a term-by-term recomputation.
        let cfg = FitConfig::default();
        let mut p = crate::model::BodyParams::rest(&model, "r");
        for (i, aa) in p.theta_body.iter_mut().enumerate() {
            aa[0] = 0.1 * (i as f64 - 3.0);
            aa[1] = -0.05 * i as f64;
        }
        p.z_left[2] = 0.7;
        p.beta[4] = -1.1;
        p.psi[1] = 0.4;
        let got = regularizer(&p, &model.part_sets.bends, &cfg);
        let mut want = 0.0;
        for aa in &p.theta_body {
            want += cfg.lambda_theta_body * (aa[0] * aa[0] + aa[1] * aa[1] + aa[2] * aa[2]);
        }
        want += cfg.lambda_theta_hand * (0.7_f64).powi(2);
        want += cfg.lambda_beta * (1.1_f64).powi(2);
        want += cfg.lambda_expr * (0.4_f64).powi(2);
        for b in &model.part_sets.bends {
            let u = b.sign * p.theta_body[b.joint as usize][b.axis as usize];
            if u > 0.0 {
                want += cfg.lambda_bend * (u.exp() - 1.0 - u);
            }
        }
        assert_relative_eq!(got, want, epsilon = 1e-12);
    }

    #[test]
    fn landmark_energy_self_consistency_and_single_term() {
        let model = toy_model(33);
        let posed = model
            .forward(&crate::model::BodyParams::rest(&model, "x"))
            .unwrap();
        let cfg = FitConfig::default();
        let rig = cfg.camera_rig([0.0, 0.95, 0.0]);
        // Observations are the projections themselves -> zero energy.
        let detections: Vec<Vec<Option<Landmark>>> = rig
            .iter()
            .map(|cam| {
                posed.joints[..model.dims.n_body_joints]
                    .iter()
                    .map(|&j| {
                        let (uv, _, valid) = cam.project_point::<f64>(j);
                        valid.then_some(Landmark {
                            uv,
                            confidence: 1.0,
                        })
                    })
                    .collect()
            })
            .collect();
        let obs = LandmarkObservations {
            cameras: rig.clone(),
            detections,
        };
        let e = landmark_energy(&posed.joints, &obs, 100.0).unwrap();
        assert_relative_eq!(e.value, 0.0, epsilon = 1e-18);
        assert_eq!(e.excluded, 0);

        // Single camera, one landmark offset by delta px -> gm(delta).
        let delta = 17.0;
        let cam = rig[0].clone();
        let (uv, _, _) = cam.project_point::<f64>(posed.joints[0]);
        let mut dets = vec![vec![None; model.dims.n_body_joints]];
        dets[0][0] = Some(Landmark {
            uv: [uv[0] + delta, uv[1]],
            confidence: 1.0,
        });
        let obs1 = LandmarkObservations {
            cameras: vec![cam],
            detections: dets,
        };
        let e1 = landmark_energy(&posed.joints, &obs1, 100.0).unwrap();
        assert_relative_eq!(e1.value, geman_mcclure(delta, 100.0).unwrap(), epsilon = 1e-12);

        // No detections at all is a contract error.
        let empty = LandmarkObservations {
            cameras: obs1.cameras.clone(),
            detections: vec![vec![None; model.dims.n_body_joints]],
        };
        assert!(landmark_energy(&posed.joints, &empty, 100.0).is_err());
    }

    #[test]
    fn landmark_energy_matches_naive_summation() {
        let model = toy_model(34);
        let mut params = crate::model::BodyParams::rest(&model, "x");
        params.theta_body[1] = [0.2, 0.0, -0.1];
        params.trans = [0.1, 0.0, -0.2];
        let posed = model.forward(&params).unwrap();
        let cfg = FitConfig::default();
        let rig = cfg.camera_rig([0.0, 0.95, 0.0]);
        let detections: Vec<Vec<Option<Landmark>>> = rig
            .iter()
            .enumerate()
            .map(|(ci, cam)| {
                posed.joints[..model.dims.n_body_joints]
                    .iter()
                    .enumerate()
                    .map(|(k, &j)| {
                        let (uv, _, valid) = cam.project_point::<f64>(j);
                        valid.then_some(Landmark {
                            uv: [uv[0] + (ci + k) as f64, uv[1] - k as f64],
                            confidence: 0.25 + 0.05 * (k as f64 % 5.0),
                        })
                    })
                    .collect()
            })
            .collect();
        let obs = LandmarkObservations {
            cameras: rig,
            detections,
        };
        let got = landmark_energy(&posed.joints, &obs, 80.0).unwrap();
        let mut want = 0.0;
        for (cam, dets) in obs.cameras.iter().zip(&obs.detections) {
            for (k, det) in dets.iter().enumerate() {
                if let Some(d) = det {
                    let (uv, _, valid) = cam.project_point::<f64>(posed.joints[k]);
                    if valid {
                        let dx = uv[0] - d.uv[0];
                        let dy = uv[1] - d.uv[1];
                        want += d.confidence
                            * geman_mcclure((dx * dx + dy * dy).sqrt(), 80.0).unwrap();
                    }
                }
            }
        }
        assert!((got.value - want).abs() < 1e-12);
    }
}
