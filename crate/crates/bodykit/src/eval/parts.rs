//! Per-part anchored joint and vertex errors.
//!
//! Errors subtract a part-specific anchor (pelvis for the body, the wrist
//! for each hand, the neck for face landmarks) from prediction and ground
//! truth independently, then average Euclidean distances. No Procrustes
//! alignment anywhere in this protocol.

use crate::num::{norm3, sub3};
use crate::{Error, Result};

/// Body part selector for error computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Part {
    Body,
    LeftHand,
    RightHand,
    Face,
}

/// Anchor-aligned mean per-point Euclidean error in millimeters.
///
/// `pred`/`gt` are the part's points (joints, vertices or landmarks);
/// `pred_anchor`/`gt_anchor` the part anchor position on each side.
/// Inputs are meters.
pub fn anchored_error_mm(
    pred: &[[f64; 3]],
    gt: &[[f64; 3]],
    pred_anchor: [f64; 3],
    gt_anchor: [f64; 3],
) -> Result<f64> {
    if pred.len() != gt.len() || pred.is_empty() {
        return Err(Error::contract(
            "anchored error needs equal, nonempty point sets",
        ));
    }
    let sum: f64 = pred
        .iter()
        .zip(gt)
        .map(|(&p, &g)| norm3(sub3(sub3(p, pred_anchor), sub3(g, gt_anchor))))
        .sum();
    Ok(1000.0 * sum / pred.len() as f64)
}

/// Mean per-joint position error for one part, pelvis/wrist/neck aligned.
pub fn part_mpjpe(
    pred_joints: &[[f64; 3]],
    gt_joints: &[[f64; 3]],
    pred_anchor: [f64; 3],
    gt_anchor: [f64; 3],
) -> Result<f64> {
    anchored_error_mm(pred_joints, gt_joints, pred_anchor, gt_anchor)
}

/// Mean per-vertex position error for one part, same anchors as joints.
pub fn part_mve(
    pred_verts: &[[f64; 3]],
    gt_verts: &[[f64; 3]],
    pred_anchor: [f64; 3],
    gt_anchor: [f64; 3],
) -> Result<f64> {
    anchored_error_mm(pred_verts, gt_verts, pred_anchor, gt_anchor)
}

/// Full-body aggregate: hands and face together carry the same weight as
/// one body part, `FB = B + (LH + RH + F) / 3`.
pub fn fb_error(b: f64, lh: f64, rh: f64, f: f64) -> f64 {
    b + (lh + rh + f) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identical_inputs_are_zero() {
        let pts = vec![[0.1, 0.2, 0.3], [1.0, -1.0, 0.5]];
        let e = part_mpjpe(&pts, &pts, pts[0], pts[0]).unwrap();
        assert_relative_eq!(e, 0.0);
    }

    #[test]
    fn constant_translation_cancels() {
        let gt = vec![[0.1, 0.2, 0.3], [1.0, -1.0, 0.5], [0.0, 0.4, 0.9]];
        let shift = [0.7, -0.3, 2.0];
        let pred: Vec<[f64; 3]> = gt
            .iter()
            .map(|p| [p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]])
            .collect();
        let e = part_mpjpe(
            &pred,
            &gt,
            [gt[0][0] + shift[0], gt[0][1] + shift[1], gt[0][2] + shift[2]],
            gt[0],
        )
        .unwrap();
        assert_relative_eq!(e, 0.0, epsilon = 1e-9);
        // Independent global translations of pred vs gt also cancel.
        let gt_shifted: Vec<[f64; 3]> = gt.iter().map(|p| [p[0] - 5.0, p[1], p[2]]).collect();
        let e = part_mve(
            &pred,
            &gt_shifted,
            [gt[0][0] + shift[0], gt[0][1] + shift[1], gt[0][2] + shift[2]],
            [gt[0][0] - 5.0, gt[0][1], gt[0][2]],
        )
        .unwrap();
        assert_relative_eq!(e, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn single_joint_offset_divides_by_count() {
        // One of 22 joints off by 22mm after alignment -> mean 1mm.
        let gt: Vec<[f64; 3]> = (0..22).map(|i| [i as f64 * 0.1, 0.0, 0.0]).collect();
        let mut pred = gt.clone();
        pred[7][1] += 0.022;
        let e = part_mpjpe(&pred, &gt, pred[0], gt[0]).unwrap();
        assert_relative_eq!(e, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn shape_mismatch_is_contract_error() {
        let a = vec![[0.0; 3]; 3];
        let b = vec![[0.0; 3]; 4];
        assert!(part_mpjpe(&a, &b, [0.0; 3], [0.0; 3]).is_err());
        assert!(part_mpjpe(&[], &[], [0.0; 3], [0.0; 3]).is_err());
    }

    #[test]
    fn fb_reproduces_published_rows() {
        // Full-body cells recomputed from their parts (reported mm).
        assert!((fb_error(150.4, 72.5, 68.8, 55.2) - 215.9).abs() <= 0.05);
        assert!((fb_error(182.1, 46.5, 49.6, 52.9) - 231.8).abs() <= 0.05);
        assert_relative_eq!(fb_error(0.0, 0.0, 0.0, 0.0), 0.0);
    }
}
