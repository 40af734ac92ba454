//! 2D axis-aligned bounding boxes and IoU.

/// Tight 2D box over a point set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb2 {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Aabb2 {
    /// Bounding box of a point set. Returns `None` for fewer than two
    /// distinct points.
    pub fn from_points(points: &[[f64; 2]]) -> Option<Self> {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if points.len() < 2 || (lo[0] == hi[0] && lo[1] == hi[1]) {
            return None;
        }
        Some(Self { lo, hi })
    }

    pub fn area(&self) -> f64 {
        (self.hi[0] - self.lo[0]).max(0.0) * (self.hi[1] - self.lo[1]).max(0.0)
    }

    pub fn intersection_area(&self, o: &Aabb2) -> f64 {
        let w = (self.hi[0].min(o.hi[0]) - self.lo[0].max(o.lo[0])).max(0.0);
        let h = (self.hi[1].min(o.hi[1]) - self.lo[1].max(o.lo[1])).max(0.0);
        w * h
    }
}

/// IoU of the two boxes together with a degeneracy flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IouOutcome {
    pub iou: f64,
    /// True when either box had zero area (IoU reported as 0).
    pub degenerate: bool,
}

/// IoU of the tight boxes over two point sets. Zero-area boxes are treated
/// as zero IoU and flagged rather than erroring.
pub fn aabb_iou(points_a: &[[f64; 2]], points_b: &[[f64; 2]]) -> IouOutcome {
    let (a, b) = match (Aabb2::from_points(points_a), Aabb2::from_points(points_b)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return IouOutcome {
                iou: 0.0,
                degenerate: true,
            }
        }
    };
    let (area_a, area_b) = (a.area(), b.area());
    if area_a == 0.0 || area_b == 0.0 {
        return IouOutcome {
            iou: 0.0,
            degenerate: true,
        };
    }
    let inter = a.intersection_area(&b);
    let union = area_a + area_b - inter;
    IouOutcome {
        iou: inter / union,
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identical_point_sets_have_iou_one() {
        let pts = [[0.0, 0.0], [3.0, 1.0], [1.0, 2.0]];
        let out = aabb_iou(&pts, &pts);
        assert!(!out.degenerate);
        assert_relative_eq!(out.iou, 1.0);
    }

    #[test]
    fn disjoint_boxes_have_iou_zero() {
        let a = [[0.0, 0.0], [1.0, 1.0]];
        let b = [[2.0, 2.0], [3.0, 3.0]];
        assert_relative_eq!(aabb_iou(&a, &b).iou, 0.0);
    }

    #[test]
    fn overlap_one_union_three() {
        // [0,2]x[0,1] vs [1,3]x[0,1]: intersection 1, union 3.
        let a = [[0.0, 0.0], [2.0, 1.0]];
        let b = [[1.0, 0.0], [3.0, 1.0]];
        assert_relative_eq!(aabb_iou(&a, &b).iou, 1.0 / 3.0);
    }

    #[test]
    fn degenerate_boxes_flagged() {
        let line = [[0.0, 0.0], [0.0, 5.0]];
        let square = [[0.0, 0.0], [1.0, 1.0]];
        let out = aabb_iou(&line, &square);
        assert!(out.degenerate);
        assert_relative_eq!(out.iou, 0.0);
        let single = [[1.0, 1.0]];
        assert!(aabb_iou(&single, &square).degenerate);
    }
}
