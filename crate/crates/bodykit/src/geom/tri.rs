//! Exact closest point on a triangle.
//!
//! Voronoi-region case analysis (vertex / edge / interior all handled).
//! Generic over [`Real`] with all branch decisions taken on primal values,
//! so dual passes differentiate the distance through moving triangle
//! vertices with the closest feature held fixed at the branch point.

use crate::num::{add3, dot3, norm_sq3, scale3, sub3, Real, V3};

/// Which feature of the triangle carries the closest point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feature {
    Vertex(u8),
    Edge(u8), // 0: ab, 1: bc, 2: ca
    Face,
}

/// Closest point to `p` on triangle `(a, b, c)`, the feature it lies on,
/// and its barycentric coordinates with respect to `(a, b, c)`.
pub fn closest_point_triangle<T: Real>(
    p: V3<T>,
    a: V3<T>,
    b: V3<T>,
    c: V3<T>,
) -> (V3<T>, Feature, [T; 3]) {
    let ab = sub3(b, a);
    let ac = sub3(c, a);
    let ap = sub3(p, a);

    let d1 = dot3(ab, ap);
    let d2 = dot3(ac, ap);
    if d1.value() <= 0.0 && d2.value() <= 0.0 {
        return (a, Feature::Vertex(0), [T::ONE, T::ZERO, T::ZERO]);
    }

    let bp = sub3(p, b);
    let d3 = dot3(ab, bp);
    let d4 = dot3(ac, bp);
    if d3.value() >= 0.0 && d4.value() <= d3.value() {
        return (b, Feature::Vertex(1), [T::ZERO, T::ONE, T::ZERO]);
    }

    let vc = d1 * d4 - d3 * d2;
    if vc.value() <= 0.0 && d1.value() >= 0.0 && d3.value() <= 0.0 {
        let v = d1 / (d1 - d3);
        return (
            add3(a, scale3(ab, v)),
            Feature::Edge(0),
            [T::ONE - v, v, T::ZERO],
        );
    }

    let cp = sub3(p, c);
    let d5 = dot3(ab, cp);
    let d6 = dot3(ac, cp);
    if d6.value() >= 0.0 && d5.value() <= d6.value() {
        return (c, Feature::Vertex(2), [T::ZERO, T::ZERO, T::ONE]);
    }

    let vb = d5 * d2 - d1 * d6;
    if vb.value() <= 0.0 && d2.value() >= 0.0 && d6.value() <= 0.0 {
        let w = d2 / (d2 - d6);
        return (
            add3(a, scale3(ac, w)),
            Feature::Edge(2),
            [T::ONE - w, T::ZERO, w],
        );
    }

    let va = d3 * d6 - d5 * d4;
    if va.value() <= 0.0 && (d4 - d3).value() >= 0.0 && (d5 - d6).value() >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (
            add3(b, scale3(sub3(c, b), w)),
            Feature::Edge(1),
            [T::ZERO, T::ONE - w, w],
        );
    }

    let denom = T::ONE / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (
        add3(a, add3(scale3(ab, v), scale3(ac, w))),
        Feature::Face,
        [T::ONE - v - w, v, w],
    )
}

/// Squared distance from `p` to triangle `(a, b, c)`.
#[inline]
pub fn dist_sq_triangle<T: Real>(p: V3<T>, a: V3<T>, b: V3<T>, c: V3<T>) -> T {
    let (q, _, _) = closest_point_triangle(p, a, b, c);
    norm_sq3(sub3(p, q))
}
