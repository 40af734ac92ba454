//! Simplified parametric articulated body.
//!
//! The generator `M(beta, theta, psi, alpha)` works in four steps:
//! shaped template = `alpha*T_A + (1-alpha)*T_C + shape_basis*beta +
//! expr_basis*psi`; rest joints regressed linearly from the shaped
//! template; per-joint world transforms composed along the kinematic tree
//! from axis-angle rotations (hand rotations expanded from a 6-d latent per
//! hand); vertices skinned by a convex blend of joint transforms; global
//! translation added last.
//!
//! The model is immutable after load; the forward pass is a pure function,
//! so any number of threads may evaluate it concurrently.

pub mod io;
pub mod toy;

#[cfg(test)]
mod tests;

use serde::{Deserialize, Serialize};

use crate::num::{
    add3, identity3, lift3, lower3, mat_mul3, mat_vec3, rodrigues, scale3, sub3, Dual, Real, M3,
    V3,
};
use crate::{Error, Result};

/// Which hand a latent vector controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hand {
    Left,
    Right,
}

/// Dimensions header of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    /// Vertex count.
    pub n_vertices: usize,
    /// Total joint count (body + both hands).
    pub n_joints: usize,
    /// Body joints; joints `0..n_body_joints` are the body chain.
    pub n_body_joints: usize,
    /// Joints per hand; left hand joints follow the body block, right hand
    /// joints follow the left block.
    pub n_hand_joints: usize,
    /// Shape coefficients.
    pub n_beta: usize,
    /// Expression coefficients.
    pub n_psi: usize,
    /// Hand latent dimension.
    pub n_hand_basis: usize,
}

/// One elbow/knee bending component penalized by the pose regularizer:
/// rotation component `axis` of `joint`, impossible direction `sign`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BendSpec {
    pub joint: u32,
    pub axis: u8,
    pub sign: f64,
}

/// Named joint/vertex index sets used by evaluation, with the alignment
/// anchors for each part.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartSets {
    pub body_joints: Vec<u32>,
    pub left_hand_joints: Vec<u32>,
    pub right_hand_joints: Vec<u32>,
    /// Face landmarks are a designated subset of vertices.
    pub face_landmark_verts: Vec<u32>,
    pub body_verts: Vec<u32>,
    pub left_hand_verts: Vec<u32>,
    pub right_hand_verts: Vec<u32>,
    pub face_verts: Vec<u32>,
    pub pelvis: u32,
    pub left_wrist: u32,
    pub right_wrist: u32,
    pub neck: u32,
    /// Elbow/knee components for the bend barrier.
    pub bends: Vec<BendSpec>,
}

/// Linear map from a hand latent to per-joint axis-angle rotations.
#[derive(Clone, Debug, PartialEq)]
pub struct HandBasis {
    /// `(3 * n_hand_joints) x n_hand_basis`, row major.
    pub matrix: Vec<f64>,
    pub n_joints: usize,
    pub n_latent: usize,
}

impl HandBasis {
    /// `basis * z`, reshaped to one axis-angle triple per hand joint.
    pub fn expand<T: Real>(&self, z: &[T]) -> Vec<V3<T>> {
        assert_eq!(z.len(), self.n_latent, "hand latent dimension mismatch");
        let mut out = Vec::with_capacity(self.n_joints);
        for j in 0..self.n_joints {
            let mut aa = [T::ZERO; 3];
            for (axis, slot) in aa.iter_mut().enumerate() {
                let row = (j * 3 + axis) * self.n_latent;
                let mut acc = T::ZERO;
                for (k, &zk) in z.iter().enumerate() {
                    acc = acc + T::c(self.matrix[row + k]) * zk;
                }
                *slot = acc;
            }
            out.push(aa);
        }
        out
    }
}

/// The parametric body model.
#[derive(Clone, Debug)]
pub struct BodyModel {
    pub dims: ModelDims,
    /// Adult template, `V x 3`, meters.
    pub adult_template: Vec<[f64; 3]>,
    /// Infant template with identical topology.
    pub child_template: Vec<[f64; 3]>,
    pub faces: Vec<[u32; 3]>,
    /// `n_beta` displacement fields over the template.
    pub shape_basis: Vec<Vec<[f64; 3]>>,
    /// `n_psi` displacement fields (supported on the face region).
    pub expr_basis: Vec<Vec<[f64; 3]>>,
    /// Sparse rows: joint -> [(vertex, weight)], weights sum to 1.
    pub joint_regressor: Vec<Vec<(u32, f64)>>,
    /// Sparse rows: vertex -> [(joint, weight)], convex.
    pub skin_weights: Vec<Vec<(u32, f64)>>,
    /// Parent joint per joint; `None` marks the single root (pelvis).
    pub parents: Vec<Option<u32>>,
    pub left_hand_basis: HandBasis,
    pub right_hand_basis: HandBasis,
    pub part_sets: PartSets,
}

/// Pose/shape/expression/child-blend/translation state for one person.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyParams {
    pub beta: Vec<f64>,
    /// Axis-angle per body joint, radians.
    pub theta_body: Vec<[f64; 3]>,
    pub z_left: Vec<f64>,
    pub z_right: Vec<f64>,
    pub psi: Vec<f64>,
    /// Child blend in `[0, 1]`: 1 = adult template, 0 = infant template.
    pub alpha: f64,
    /// Global translation, meters.
    pub trans: [f64; 3],
    /// Opaque identity label for inter-shape grouping.
    pub identity: String,
}

impl BodyParams {
    pub fn rest(model: &BodyModel, identity: impl Into<String>) -> Self {
        Self {
            beta: vec![0.0; model.dims.n_beta],
            theta_body: vec![[0.0; 3]; model.dims.n_body_joints],
            z_left: vec![0.0; model.dims.n_hand_basis],
            z_right: vec![0.0; model.dims.n_hand_basis],
            psi: vec![0.0; model.dims.n_psi],
            alpha: 1.0,
            trans: [0.0; 3],
            identity: identity.into(),
        }
    }

    pub fn validate(&self, model: &BodyModel) -> Result<()> {
        let d = &model.dims;
        if self.beta.len() != d.n_beta
            || self.theta_body.len() != d.n_body_joints
            || self.z_left.len() != d.n_hand_basis
            || self.z_right.len() != d.n_hand_basis
            || self.psi.len() != d.n_psi
        {
            return Err(Error::contract("parameter dimensions do not match model"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::domain("alpha must lie in [0, 1]"));
        }
        let finite = self.beta.iter().all(|x| x.is_finite())
            && self.theta_body.iter().flatten().all(|x| x.is_finite())
            && self.z_left.iter().all(|x| x.is_finite())
            && self.z_right.iter().all(|x| x.is_finite())
            && self.psi.iter().all(|x| x.is_finite())
            && self.trans.iter().all(|x| x.is_finite())
            && self.alpha.is_finite();
        if !finite {
            return Err(Error::domain("parameters must be finite"));
        }
        Ok(())
    }
}

/// Output of the forward pass.
#[derive(Clone, Debug)]
pub struct PosedBody {
    pub vertices: Vec<[f64; 3]>,
    pub joints: Vec<[f64; 3]>,
    /// World transform per joint as `(rotation, translation)`.
    pub joint_transforms: Vec<([[f64; 3]; 3], [f64; 3])>,
}

/// Flat parameter vector layout shared by the forward pass and the fitter:
/// `[trans(3) | theta_body(3*B) | z_left(H) | z_right(H) | beta | psi]`,
/// with the child blend carried separately.
#[derive(Clone, Copy, Debug)]
pub struct PackedLayout {
    pub n_body_joints: usize,
    pub n_hand_basis: usize,
    pub n_beta: usize,
    pub n_psi: usize,
}

impl PackedLayout {
    pub fn of(model: &BodyModel) -> Self {
        Self {
            n_body_joints: model.dims.n_body_joints,
            n_hand_basis: model.dims.n_hand_basis,
            n_beta: model.dims.n_beta,
            n_psi: model.dims.n_psi,
        }
    }

    pub fn len(&self) -> usize {
        3 + 3 * self.n_body_joints + 2 * self.n_hand_basis + self.n_beta + self.n_psi
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn trans_range(&self) -> std::ops::Range<usize> {
        0..3
    }
    pub fn theta_range(&self) -> std::ops::Range<usize> {
        3..3 + 3 * self.n_body_joints
    }
    pub fn z_left_range(&self) -> std::ops::Range<usize> {
        let s = 3 + 3 * self.n_body_joints;
        s..s + self.n_hand_basis
    }
    pub fn z_right_range(&self) -> std::ops::Range<usize> {
        let s = 3 + 3 * self.n_body_joints + self.n_hand_basis;
        s..s + self.n_hand_basis
    }
    pub fn beta_range(&self) -> std::ops::Range<usize> {
        let s = 3 + 3 * self.n_body_joints + 2 * self.n_hand_basis;
        s..s + self.n_beta
    }
    pub fn psi_range(&self) -> std::ops::Range<usize> {
        let s = 3 + 3 * self.n_body_joints + 2 * self.n_hand_basis + self.n_beta;
        s..s + self.n_psi
    }

    pub fn pack(&self, p: &BodyParams) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.len());
        x.extend_from_slice(&p.trans);
        for aa in &p.theta_body {
            x.extend_from_slice(aa);
        }
        x.extend_from_slice(&p.z_left);
        x.extend_from_slice(&p.z_right);
        x.extend_from_slice(&p.beta);
        x.extend_from_slice(&p.psi);
        x
    }

    pub fn unpack(&self, x: &[f64], alpha: f64, identity: &str) -> BodyParams {
        assert_eq!(x.len(), self.len());
        BodyParams {
            trans: [x[0], x[1], x[2]],
            theta_body: x[self.theta_range()]
                .chunks_exact(3)
                .map(|c| [c[0], c[1], c[2]])
                .collect(),
            z_left: x[self.z_left_range()].to_vec(),
            z_right: x[self.z_right_range()].to_vec(),
            beta: x[self.beta_range()].to_vec(),
            psi: x[self.psi_range()].to_vec(),
            alpha,
            identity: identity.to_string(),
        }
    }
}

impl BodyModel {
    /// Linear template interpolation `alpha*T_A + (1-alpha)*T_C`.
    pub fn interpolate_template(&self, alpha: f64) -> Result<Vec<[f64; 3]>> {
        if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
            return Err(Error::domain("alpha must lie in [0, 1]"));
        }
        Ok(self
            .adult_template
            .iter()
            .zip(&self.child_template)
            .map(|(&a, &c)| add3(scale3(a, alpha), scale3(c, 1.0 - alpha)))
            .collect())
    }

    /// Expands a hand latent to axis-angle rotations for that hand's joints.
    pub fn expand_hand_pose(&self, hand: Hand, z: &[f64]) -> Result<Vec<[f64; 3]>> {
        if z.len() != self.dims.n_hand_basis {
            return Err(Error::contract("hand latent dimension mismatch"));
        }
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("hand latent must be finite"));
        }
        let basis = match hand {
            Hand::Left => &self.left_hand_basis,
            Hand::Right => &self.right_hand_basis,
        };
        Ok(basis.expand(z))
    }

    /// Full differentiable forward pass; see the module docs for the steps.
    pub fn forward_generic<T: Real>(&self, x: &[T], alpha: T) -> (Vec<V3<T>>, Vec<V3<T>>) {
        let layout = PackedLayout::of(self);
        assert_eq!(x.len(), layout.len(), "packed parameter length mismatch");
        let trans = [x[0], x[1], x[2]];
        let theta = &x[layout.theta_range()];
        let z_left = &x[layout.z_left_range()];
        let z_right = &x[layout.z_right_range()];
        let beta = &x[layout.beta_range()];
        let psi = &x[layout.psi_range()];

        // Shaped template.
        let one_minus = T::ONE - alpha;
        let mut shaped: Vec<V3<T>> = self
            .adult_template
            .iter()
            .zip(&self.child_template)
            .map(|(&a, &c)| add3(scale3(lift3(a), alpha), scale3(lift3(c), one_minus)))
            .collect();
        for (k, &bk) in beta.iter().enumerate() {
            let field = &self.shape_basis[k];
            for (v, d) in shaped.iter_mut().zip(field) {
                *v = add3(*v, scale3(lift3(*d), bk));
            }
        }
        for (k, &pk) in psi.iter().enumerate() {
            let field = &self.expr_basis[k];
            for (v, d) in shaped.iter_mut().zip(field) {
                *v = add3(*v, scale3(lift3(*d), pk));
            }
        }

        // Rest joints from the shaped template.
        let rest: Vec<V3<T>> = self
            .joint_regressor
            .iter()
            .map(|row| {
                let mut acc = [T::ZERO; 3];
                for &(v, w) in row {
                    acc = add3(acc, scale3(shaped[v as usize], T::c(w)));
                }
                acc
            })
            .collect();

        // Local rotations: body joints from theta, hand joints from latents.
        let nb = self.dims.n_body_joints;
        let nh = self.dims.n_hand_joints;
        let left_rots = self.left_hand_basis.expand(z_left);
        let right_rots = self.right_hand_basis.expand(z_right);
        let local_rot = |j: usize| -> M3<T> {
            if j < nb {
                rodrigues([theta[3 * j], theta[3 * j + 1], theta[3 * j + 2]])
            } else if j < nb + nh {
                rodrigues(left_rots[j - nb])
            } else {
                rodrigues(right_rots[j - nb - nh])
            }
        };

        // Compose world transforms along the tree (parents precede children).
        let nj = self.dims.n_joints;
        let mut world: Vec<(M3<T>, V3<T>)> = Vec::with_capacity(nj);
        for j in 0..nj {
            let r = local_rot(j);
            match self.parents[j] {
                None => world.push((r, rest[j])),
                Some(p) => {
                    let p = p as usize;
                    debug_assert!(p < j, "parents must precede children");
                    let (pr, pt) = &world[p];
                    let local_t = sub3(rest[j], rest[p]);
                    let rot = mat_mul3(pr, &r);
                    let t = add3(mat_vec3(pr, local_t), *pt);
                    world.push((rot, t));
                }
            }
        }

        // Skinning, then global translation.
        let vertices: Vec<V3<T>> = shaped
            .iter()
            .enumerate()
            .map(|(vi, &v)| {
                let mut acc = [T::ZERO; 3];
                for &(j, w) in &self.skin_weights[vi] {
                    let (r, t) = &world[j as usize];
                    let posed = add3(mat_vec3(r, sub3(v, rest[j as usize])), *t);
                    acc = add3(acc, scale3(posed, T::c(w)));
                }
                add3(acc, trans)
            })
            .collect();
        let joints: Vec<V3<T>> = world.iter().map(|(_, t)| add3(*t, trans)).collect();
        (vertices, joints)
    }

    /// Plain forward pass.
    pub fn forward(&self, params: &BodyParams) -> Result<PosedBody> {
        params.validate(self)?;
        let layout = PackedLayout::of(self);
        let x = layout.pack(params);
        let (vertices, joints) = self.forward_generic::<f64>(&x, params.alpha);
        // World transforms are recomputed cheaply for callers that need them.
        let transforms = self.world_transforms(params);
        Ok(PosedBody {
            vertices,
            joints,
            joint_transforms: transforms,
        })
    }

    fn world_transforms(&self, params: &BodyParams) -> Vec<([[f64; 3]; 3], [f64; 3])> {
        let layout = PackedLayout::of(self);
        let x = layout.pack(params);
        let theta = &x[layout.theta_range()];
        let shaped = self.shaped_template(params);
        let rest: Vec<[f64; 3]> = self
            .joint_regressor
            .iter()
            .map(|row| {
                let mut acc = [0.0; 3];
                for &(v, w) in row {
                    acc = add3(acc, scale3(shaped[v as usize], w));
                }
                acc
            })
            .collect();
        let left_rots = self.left_hand_basis.expand::<f64>(&params.z_left);
        let right_rots = self.right_hand_basis.expand::<f64>(&params.z_right);
        let nb = self.dims.n_body_joints;
        let nh = self.dims.n_hand_joints;
        let mut world: Vec<(M3<f64>, V3<f64>)> = Vec::with_capacity(self.dims.n_joints);
        for j in 0..self.dims.n_joints {
            let aa = if j < nb {
                [theta[3 * j], theta[3 * j + 1], theta[3 * j + 2]]
            } else if j < nb + nh {
                left_rots[j - nb]
            } else {
                right_rots[j - nb - nh]
            };
            let r = rodrigues(aa);
            match self.parents[j] {
                None => world.push((r, add3(rest[j], params.trans))),
                Some(p) => {
                    let (pr, pt) = world[p as usize];
                    let rot = mat_mul3(&pr, &r);
                    let t = add3(mat_vec3(&pr, sub3(rest[j], rest[p as usize])), pt);
                    world.push((rot, t));
                }
            }
        }
        world
    }

    /// Shaped template (before posing) for the given parameters.
    pub fn shaped_template(&self, params: &BodyParams) -> Vec<[f64; 3]> {
        let mut shaped = self
            .interpolate_template(params.alpha)
            .expect("alpha validated by caller");
        for (k, &bk) in params.beta.iter().enumerate() {
            for (v, d) in shaped.iter_mut().zip(&self.shape_basis[k]) {
                *v = add3(*v, scale3(*d, bk));
            }
        }
        for (k, &pk) in params.psi.iter().enumerate() {
            for (v, d) in shaped.iter_mut().zip(&self.expr_basis[k]) {
                *v = add3(*v, scale3(*d, pk));
            }
        }
        shaped
    }

    /// Directional derivative of vertices and joints with respect to the
    /// packed parameters (plus the child blend in the last slot).
    pub fn forward_directional(
        &self,
        params: &BodyParams,
        direction: &[f64],
    ) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
        let layout = PackedLayout::of(self);
        assert_eq!(direction.len(), layout.len() + 1);
        let x = layout.pack(params);
        let xd: Vec<Dual> = x
            .iter()
            .zip(direction)
            .map(|(&v, &d)| Dual::new(v, d))
            .collect();
        let alpha = Dual::new(params.alpha, direction[layout.len()]);
        let (verts, joints) = self.forward_generic::<Dual>(&xd, alpha);
        (
            verts.iter().map(|v| [v[0].du, v[1].du, v[2].du]).collect(),
            joints.iter().map(|v| [v[0].du, v[1].du, v[2].du]).collect(),
        )
    }

    /// Checks the structural invariants listed in the model documentation.
    pub fn validate(&self) -> Result<()> {
        let d = &self.dims;
        if self.adult_template.len() != d.n_vertices
            || self.child_template.len() != d.n_vertices
            || self.skin_weights.len() != d.n_vertices
            || self.joint_regressor.len() != d.n_joints
            || self.parents.len() != d.n_joints
            || d.n_joints != d.n_body_joints + 2 * d.n_hand_joints
        {
            return Err(Error::contract("model dimension mismatch"));
        }
        for row in &self.skin_weights {
            let sum: f64 = row.iter().map(|&(_, w)| w).sum();
            if (sum - 1.0).abs() > 1e-6 || row.iter().any(|&(_, w)| w < 0.0) {
                return Err(Error::contract(
                    "skin weight rows must be convex and sum to 1",
                ));
            }
            if row.iter().any(|&(j, _)| j as usize >= d.n_joints) {
                return Err(Error::contract("skin weight joint index out of range"));
            }
        }
        for row in &self.joint_regressor {
            let sum: f64 = row.iter().map(|&(_, w)| w).sum();
            if (sum - 1.0).abs() > 1e-6 || row.iter().any(|&(_, w)| w < 0.0) {
                return Err(Error::contract(
                    "joint regressor rows must be nonnegative and sum to 1",
                ));
            }
        }
        // Rooted tree: exactly one root, every parent precedes its child.
        let roots = self.parents.iter().filter(|p| p.is_none()).count();
        if roots != 1 {
            return Err(Error::contract("kinematic tree must have a single root"));
        }
        for (j, p) in self.parents.iter().enumerate() {
            if let Some(p) = p {
                if *p as usize >= j {
                    return Err(Error::contract(
                        "kinematic tree parents must precede children (no cycles)",
                    ));
                }
            }
        }
        // Part joint sets must be disjoint.
        let mut seen = vec![false; d.n_joints];
        for set in [
            &self.part_sets.body_joints,
            &self.part_sets.left_hand_joints,
            &self.part_sets.right_hand_joints,
        ] {
            for &j in set.iter() {
                let j = j as usize;
                if j >= d.n_joints || seen[j] {
                    return Err(Error::contract("part joint sets must be disjoint"));
                }
                seen[j] = true;
            }
        }
        Ok(())
    }

    /// Rest-pose world transform identity check helper used in tests.
    pub fn rest_vertices(&self) -> &[[f64; 3]] {
        &self.adult_template
    }
}

/// Extracts lowered f64 vertices from a generic forward output.
pub fn lower_vertices<T: Real>(verts: &[V3<T>]) -> Vec<[f64; 3]> {
    verts.iter().map(|&v| lower3(v)).collect()
}

/// Identity world transform, used in tests.
pub fn identity_transform() -> (M3<f64>, V3<f64>) {
    (identity3::<f64>(), [0.0; 3])
}
