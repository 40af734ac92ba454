//! Fitting configuration and the virtual camera rig.

use serde::{Deserialize, Serialize};

use crate::geom::Camera;
use crate::{Error, Result};

/// Which parameter blocks an optimization stage may move.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeBlocks {
    pub trans: bool,
    pub root_orient: bool,
    pub body_pose: bool,
    pub hands: bool,
    pub shape: bool,
    pub expr: bool,
    pub alpha: bool,
}

impl FreeBlocks {
    pub fn rigid() -> Self {
        Self {
            trans: true,
            root_orient: true,
            ..Default::default()
        }
    }

    pub fn rigid_pose() -> Self {
        Self {
            body_pose: true,
            ..Self::rigid()
        }
    }

    pub fn all() -> Self {
        Self {
            trans: true,
            root_orient: true,
            body_pose: true,
            hands: true,
            shape: true,
            expr: true,
            alpha: true,
        }
    }
}

/// Weights, robust scales, rig and solver settings for fitting.
///
/// The per-term weights the published protocol used are not public;
/// these defaults are this implementation's own and are calibrated on the
/// synthetic corpus.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Landmark term weight (applied in refinement; multi-view
    /// initialization uses the unweighted sum of landmark and prior terms).
    pub lambda_landmark: f64,
    pub lambda_skin: f64,
    pub lambda_cloth: f64,
    /// Inter-shape coupling across scans of one identity.
    pub lambda_interbeta: f64,
    /// Penetration weight inside the clothing term.
    pub lambda_inner: f64,
    pub lambda_theta_body: f64,
    pub lambda_theta_hand: f64,
    pub lambda_beta: f64,
    pub lambda_expr: f64,
    /// Elbow/knee bend barrier weight.
    pub lambda_bend: f64,
    /// Robust scale for landmark residuals, pixels.
    pub sigma_landmark_px: f64,
    /// Robust scale for surface residuals, meters.
    pub sigma_surface_m: f64,
    /// Virtual cameras used when synthesizing landmark detections.
    pub n_cameras: usize,
    pub camera_focal_px: f64,
    pub camera_image: [u32; 2],
    pub camera_distance_m: f64,
    /// Inner solver settings.
    pub max_inner_iterations: usize,
    pub gradient_tolerance: f64,
    pub step_tolerance: f64,
    /// Outer (correspondence-refresh) iterations of refinement.
    pub max_outer_iterations: usize,
    /// Staging schedule; the last entry repeats for remaining outer rounds.
    pub stages: Vec<FreeBlocks>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lambda_landmark: 1e-3,
            lambda_skin: 1.0,
            lambda_cloth: 1.0,
            lambda_interbeta: 1.0,
            lambda_inner: 10.0,
            lambda_theta_body: 1e-3,
            lambda_theta_hand: 1e-3,
            lambda_beta: 1e-4,
            lambda_expr: 1e-3,
            lambda_bend: 0.1,
            sigma_landmark_px: 100.0,
            sigma_surface_m: 0.05,
            n_cameras: 4,
            camera_focal_px: 500.0,
            camera_image: [640, 480],
            camera_distance_m: 3.0,
            max_inner_iterations: 60,
            gradient_tolerance: 1e-8,
            step_tolerance: 1e-12,
            max_outer_iterations: 10,
            stages: vec![
                FreeBlocks::rigid(),
                FreeBlocks::rigid_pose(),
                FreeBlocks::all(),
            ],
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let weights = [
            self.lambda_landmark,
            self.lambda_skin,
            self.lambda_cloth,
            self.lambda_interbeta,
            self.lambda_inner,
            self.lambda_theta_body,
            self.lambda_theta_hand,
            self.lambda_beta,
            self.lambda_expr,
            self.lambda_bend,
        ];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::domain("fit weights must be finite and >= 0"));
        }
        if !(self.sigma_landmark_px > 0.0) || !(self.sigma_surface_m > 0.0) {
            return Err(Error::domain("robust scales must be positive"));
        }
        if self.n_cameras < 1 {
            return Err(Error::domain("need at least one virtual camera"));
        }
        Ok(())
    }

    /// Evenly spaced ring of cameras at `center` height looking inward.
    pub fn camera_rig(&self, center: [f64; 3]) -> Vec<Camera> {
        camera_ring(
            self.n_cameras,
            center,
            self.camera_distance_m,
            self.camera_focal_px,
            self.camera_image,
        )
    }
}

/// `n` cameras on a horizontal ring of the given radius around `center`.
pub fn camera_ring(
    n: usize,
    center: [f64; 3],
    radius: f64,
    focal: f64,
    image: [u32; 2],
) -> Vec<Camera> {
    (0..n)
        .map(|i| {
            let ang = std::f64::consts::TAU * i as f64 / n as f64;
            let eye = [
                center[0] + radius * ang.sin(),
                center[1],
                center[2] + radius * ang.cos(),
            ];
            Camera::look_at(
                focal,
                [image[0] as f64 / 2.0, image[1] as f64 / 2.0],
                image,
                eye,
                center,
                [0.0, 1.0, 0.0],
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        FitConfig::default().validate().unwrap();
    }

    #[test]
    fn negative_weight_rejected() {
        let cfg = FitConfig {
            lambda_skin: -1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rig_cameras_see_the_center() {
        let cfg = FitConfig::default();
        let rig = cfg.camera_rig([0.0, 0.9, 0.0]);
        assert_eq!(rig.len(), 4);
        for cam in &rig {
            cam.validate().unwrap();
            let p = cam.project(&[[0.0, 0.9, 0.0]]);
            assert!(p[0].valid);
            assert!((p[0].uv[0] - 320.0).abs() < 1e-6);
            assert!((p[0].uv[1] - 240.0).abs() < 1e-6);
        }
    }
}
