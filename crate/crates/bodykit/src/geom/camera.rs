//! Perspective pinhole camera with a rigid world-to-camera transform.

use serde::{Deserialize, Serialize};

use crate::num::{add3, lift3, mat_vec3, sub3, Real, M3, V3};
use crate::{Error, Result};

/// Minimum camera-space depth for a point to count as "in front".
pub const MIN_DEPTH: f64 = 1e-9;

/// Pinhole camera. Points map as `x_cam = R * x_world + t`, then
/// `(u, v) = (f * x/z + cx, f * y/z + cy)` in pixels, v growing downward.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Camera {
    /// Focal length in pixels (square pixels, fx == fy).
    pub focal: f64,
    /// Principal point in pixels.
    pub principal: [f64; 2],
    /// Image size in pixels, `[width, height]`.
    pub size: [u32; 2],
    /// World-to-camera rotation, row major.
    pub rotation: [[f64; 3]; 3],
    /// World-to-camera translation.
    pub translation: [f64; 3],
}

/// Result of projecting one point. Behind-camera points are flagged,
/// never clamped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub uv: [f64; 2],
    pub depth: f64,
    pub valid: bool,
}

impl Camera {
    /// Validates invariants: positive focal, nonzero image, orthonormal
    /// rotation within 1e-9.
    pub fn validate(&self) -> Result<()> {
        if !(self.focal > 0.0) {
            return Err(Error::contract("camera focal length must be positive"));
        }
        if self.size[0] < 1 || self.size[1] < 1 {
            return Err(Error::contract("camera image size must be at least 1x1"));
        }
        let r = &self.rotation;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-9 {
                    return Err(Error::contract(
                        "camera rotation is not orthonormal within 1e-9",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Camera with identity extrinsics (world frame == camera frame).
    pub fn identity(focal: f64, principal: [f64; 2], size: [u32; 2]) -> Self {
        Self {
            focal,
            principal,
            size,
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0; 3],
        }
    }

    /// Camera positioned at `eye` looking at `target`, `up` approximately up.
    /// Camera axes: +z forward (viewing direction), +x right, +y down, so
    /// projected v grows downward in the image.
    pub fn look_at(
        focal: f64,
        principal: [f64; 2],
        size: [u32; 2],
        eye: [f64; 3],
        target: [f64; 3],
        up: [f64; 3],
    ) -> Self {
        use crate::num::{cross3, norm3, scale3};
        let fwd = sub3(target, eye);
        let fn_ = norm3(fwd);
        let fwd = scale3(fwd, 1.0 / fn_);
        let right = cross3(fwd, up); // y-down frame: right = forward x up
        let rn = norm3(right);
        let right = scale3(right, 1.0 / rn);
        let down = cross3(fwd, right);
        let dn = norm3(down);
        let down = scale3(down, 1.0 / dn);
        let rotation = [right, down, fwd];
        // t = -R * eye
        let re = mat_vec3(&rotation, eye);
        Self {
            focal,
            principal,
            size,
            rotation,
            translation: [-re[0], -re[1], -re[2]],
        }
    }

    /// World point to camera frame.
    #[inline]
    pub fn world_to_camera<T: Real>(&self, p: V3<T>) -> V3<T> {
        let r: M3<T> = [
            lift3(self.rotation[0]),
            lift3(self.rotation[1]),
            lift3(self.rotation[2]),
        ];
        add3(mat_vec3(&r, p), lift3(self.translation))
    }

    /// Projects a camera-frame point; `valid` is false behind the camera.
    #[inline]
    pub fn project_camera_point<T: Real>(&self, pc: V3<T>) -> ([T; 2], T, bool) {
        let z = pc[2];
        let valid = z.value() > MIN_DEPTH;
        let f = T::c(self.focal);
        let inv_z = if valid { T::ONE / z } else { T::ONE };
        let u = f * pc[0] * inv_z + T::c(self.principal[0]);
        let v = f * pc[1] * inv_z + T::c(self.principal[1]);
        ([u, v], z, valid)
    }

    /// Projects a world point.
    #[inline]
    pub fn project_point<T: Real>(&self, p: V3<T>) -> ([T; 2], T, bool) {
        self.project_camera_point(self.world_to_camera(p))
    }

    /// Projects a batch of world points.
    pub fn project(&self, points: &[[f64; 3]]) -> Vec<Projection> {
        points
            .iter()
            .map(|&p| {
                let (uv, z, valid) = self.project_point::<f64>(p);
                Projection {
                    uv,
                    depth: z,
                    valid,
                }
            })
            .collect()
    }

    /// Inverse of [`Camera::project`] for a pixel with known camera depth;
    /// returns the world point.
    pub fn unproject(&self, uv: [f64; 2], depth: f64) -> [f64; 3] {
        let x = (uv[0] - self.principal[0]) * depth / self.focal;
        let y = (uv[1] - self.principal[1]) * depth / self.focal;
        let pc = [x, y, depth];
        // world = R^T (pc - t)
        let d = sub3(pc, self.translation);
        let rt = [
            [self.rotation[0][0], self.rotation[1][0], self.rotation[2][0]],
            [self.rotation[0][1], self.rotation[1][1], self.rotation[2][1]],
            [self.rotation[0][2], self.rotation[1][2], self.rotation[2][2]],
        ];
        mat_vec3(&rt, d)
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> [f64; 3] {
        // c = -R^T t
        let rt = [
            [self.rotation[0][0], self.rotation[1][0], self.rotation[2][0]],
            [self.rotation[0][1], self.rotation[1][1], self.rotation[2][1]],
            [self.rotation[0][2], self.rotation[1][2], self.rotation[2][2]],
        ];
        let c = mat_vec3(&rt, self.translation);
        [-c[0], -c[1], -c[2]]
    }
}
