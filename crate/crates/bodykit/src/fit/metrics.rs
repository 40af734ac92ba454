//! Fit-quality measures against the scan.

use serde::{Deserialize, Serialize};

use crate::geom::{Bvh, MeshAdjacency, Side, TriMesh};

use super::scan::LabeledScan;

/// Penetrating-clothing summary: probability-weighted share of cloth
/// vertices inside the body and, over those, the weighted mean depth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClothPenetration {
    pub percent_inside: f64,
    /// Absent when nothing penetrates.
    pub mean_depth_mm: Option<f64>,
}

/// Probability-weighted mean skin distance to the fitted surface, in
/// millimeters. Absent when the scan carries no skin probability mass.
pub fn skin_error(scan: &LabeledScan, fitted: &TriMesh, bvh: &Bvh) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (&s, &p) in scan.mesh.positions.iter().zip(&scan.p_skin) {
        if p == 0.0 {
            continue;
        }
        num += p * bvh.nearest(fitted, s).distance;
        den += p;
    }
    (den > 0.0).then(|| 1000.0 * num / den)
}

/// Cloth penetration statistics; absent when the scan carries no cloth
/// probability mass.
pub fn cloth_penetration_error(
    scan: &LabeledScan,
    fitted: &TriMesh,
    bvh: &Bvh,
    adj: &MeshAdjacency,
) -> Option<ClothPenetration> {
    let mut total_w = 0.0;
    let mut inside_w = 0.0;
    let mut inside_depth = 0.0;
    for (&s, &p) in scan.mesh.positions.iter().zip(&scan.p_cloth) {
        if p == 0.0 {
            continue;
        }
        total_w += p;
        let (near, side) = crate::geom::classify_point(fitted, bvh, adj, s);
        if side == Side::Inside {
            inside_w += p;
            inside_depth += p * near.distance;
        }
    }
    (total_w > 0.0).then(|| ClothPenetration {
        percent_inside: 100.0 * inside_w / total_w,
        mean_depth_mm: (inside_w > 0.0).then(|| 1000.0 * inside_depth / inside_w),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::box_mesh;
    use approx::assert_relative_eq;

    fn slab() -> (TriMesh, Bvh, MeshAdjacency) {
        let m = box_mesh([-10.0, -10.0, -1.0], [10.0, 10.0, 0.0]);
        let b = Bvh::build(&m).unwrap();
        let a = MeshAdjacency::build(&m);
        (m, b, a)
    }

    fn scan_at(zs: &[f64], p_skin: f64, p_cloth: f64) -> LabeledScan {
        let positions: Vec<[f64; 3]> = zs
            .iter()
            .enumerate()
            .map(|(i, &z)| [-3.0 + i as f64 * 0.3, 0.5, z])
            .collect();
        let n = positions.len();
        let faces = (0..n - 2).map(|i| [i as u32, i as u32 + 1, i as u32 + 2]).collect();
        LabeledScan {
            mesh: TriMesh::new(positions, faces).unwrap(),
            p_skin: vec![p_skin; n],
            p_cloth: vec![p_cloth; n],
            p_other: vec![1.0 - p_skin - p_cloth; n],
            identity: "m".into(),
            is_child: false,
        }
    }

    #[test]
    fn skin_error_zero_on_surface() {
        let (m, b, _) = slab();
        let scan = scan_at(&vec![0.0; 10], 1.0, 0.0);
        assert!(skin_error(&scan, &m, &b).unwrap() < 1e-9);
    }

    #[test]
    fn skin_error_five_mm_offset() {
        let (m, b, _) = slab();
        let scan = scan_at(&vec![0.005; 10], 1.0, 0.0);
        assert_relative_eq!(skin_error(&scan, &m, &b).unwrap(), 5.0, epsilon = 1e-9);
    }

    #[test]
    fn skin_error_weighted_mean_matches_oracle() {
        let (m, b, _) = slab();
        let zs: Vec<f64> = (0..10).map(|i| 0.001 * i as f64).collect();
        let mut scan = scan_at(&zs, 0.0, 0.0);
        let weights: Vec<f64> = (0..10).map(|i| (i % 4) as f64 / 4.0).collect();
        scan.p_skin = weights.clone();
        scan.p_other = weights.iter().map(|w| 1.0 - w).collect();
        let got = skin_error(&scan, &m, &b).unwrap();
        let num: f64 = zs.iter().zip(&weights).map(|(z, w)| w * z * 1000.0).sum();
        let den: f64 = weights.iter().sum();
        assert_relative_eq!(got, num / den, epsilon = 1e-9);
    }

    #[test]
    fn skin_error_absent_without_skin_mass() {
        let (m, b, _) = slab();
        let scan = scan_at(&vec![0.01; 10], 0.0, 1.0);
        assert!(skin_error(&scan, &m, &b).is_none());
    }

    #[test]
    fn penetration_all_outside() {
        let (m, b, a) = slab();
        let scan = scan_at(&vec![0.005; 10], 0.0, 1.0);
        let pen = cloth_penetration_error(&scan, &m, &b, &a).unwrap();
        assert_relative_eq!(pen.percent_inside, 0.0);
        assert!(pen.mean_depth_mm.is_none());
    }

    #[test]
    fn penetration_all_inside_five_mm() {
        let (m, b, a) = slab();
        let scan = scan_at(&vec![-0.005; 10], 0.0, 1.0);
        let pen = cloth_penetration_error(&scan, &m, &b, &a).unwrap();
        assert_relative_eq!(pen.percent_inside, 100.0);
        assert_relative_eq!(pen.mean_depth_mm.unwrap(), 5.0, epsilon = 1e-9);
    }

    #[test]
    fn penetration_half_and_half() {
        let (m, b, a) = slab();
        let mut zs = vec![0.004; 5];
        zs.extend(vec![-0.004; 5]);
        let scan = scan_at(&zs, 0.0, 0.8);
        let pen = cloth_penetration_error(&scan, &m, &b, &a).unwrap();
        assert_relative_eq!(pen.percent_inside, 50.0, epsilon = 1e-9);
    }

    #[test]
    fn penetration_absent_without_cloth() {
        let (m, b, a) = slab();
        let scan = scan_at(&vec![0.01; 10], 1.0, 0.0);
        assert!(cloth_penetration_error(&scan, &m, &b, &a).is_none());
    }
}
