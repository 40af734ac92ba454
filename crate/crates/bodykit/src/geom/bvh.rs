//! Bounding volume hierarchy for exact nearest-point queries on a mesh.
//!
//! Median split on the longest centroid axis; queries prune by squared
//! box distance, so the result is exactly the brute-force minimum.

use crate::num::{dot3, norm3, sub3};
use crate::{Error, Result};

use super::mesh::{MeshAdjacency, TriMesh};
use super::tri::{closest_point_triangle, Feature};

#[derive(Clone, Copy, Debug)]
struct Aabb3 {
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Aabb3 {
    fn empty() -> Self {
        Self {
            lo: [f64::INFINITY; 3],
            hi: [f64::NEG_INFINITY; 3],
        }
    }

    fn grow(&mut self, p: [f64; 3]) {
        for k in 0..3 {
            self.lo[k] = self.lo[k].min(p[k]);
            self.hi[k] = self.hi[k].max(p[k]);
        }
    }

    fn merge(&mut self, o: &Aabb3) {
        for k in 0..3 {
            self.lo[k] = self.lo[k].min(o.lo[k]);
            self.hi[k] = self.hi[k].max(o.hi[k]);
        }
    }

    fn dist_sq(&self, p: [f64; 3]) -> f64 {
        let mut d2 = 0.0;
        for k in 0..3 {
            let d = if p[k] < self.lo[k] {
                self.lo[k] - p[k]
            } else if p[k] > self.hi[k] {
                p[k] - self.hi[k]
            } else {
                0.0
            };
            d2 += d * d;
        }
        d2
    }

    fn contains(&self, o: &Aabb3) -> bool {
        (0..3).all(|k| self.lo[k] <= o.lo[k] + 1e-12 && self.hi[k] + 1e-12 >= o.hi[k])
    }
}

enum Node {
    Leaf {
        bounds: Aabb3,
        tris: Vec<u32>,
    },
    Inner {
        bounds: Aabb3,
        left: usize,
        right: usize,
    },
}

/// Acceleration structure over the triangles of one mesh.
pub struct Bvh {
    nodes: Vec<Node>,
    root: usize,
}

/// Result of a nearest-point query.
#[derive(Clone, Copy, Debug)]
pub struct Nearest {
    pub distance: f64,
    pub point: [f64; 3],
    pub triangle: usize,
    pub feature: Feature,
}

/// Inside/outside classification of a query point relative to the surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Inside,
    Outside,
}

const LEAF_SIZE: usize = 4;

impl Bvh {
    pub fn build(mesh: &TriMesh) -> Result<Self> {
        if mesh.is_empty() {
            return Err(Error::contract("cannot build a BVH over an empty mesh"));
        }
        let centroids: Vec<[f64; 3]> = (0..mesh.faces.len())
            .map(|f| {
                let (a, b, c) = mesh.triangle(f);
                [
                    (a[0] + b[0] + c[0]) / 3.0,
                    (a[1] + b[1] + c[1]) / 3.0,
                    (a[2] + b[2] + c[2]) / 3.0,
                ]
            })
            .collect();
        let tri_bounds: Vec<Aabb3> = (0..mesh.faces.len())
            .map(|f| {
                let (a, b, c) = mesh.triangle(f);
                let mut bb = Aabb3::empty();
                bb.grow(a);
                bb.grow(b);
                bb.grow(c);
                bb
            })
            .collect();
        let mut order: Vec<u32> = (0..mesh.faces.len() as u32).collect();
        let mut nodes = Vec::new();
        let root = Self::build_node(&mut nodes, &mut order, &centroids, &tri_bounds);
        Ok(Self { nodes, root })
    }

    fn build_node(
        nodes: &mut Vec<Node>,
        tris: &mut [u32],
        centroids: &[[f64; 3]],
        tri_bounds: &[Aabb3],
    ) -> usize {
        let mut bounds = Aabb3::empty();
        for &t in tris.iter() {
            bounds.merge(&tri_bounds[t as usize]);
        }
        if tris.len() <= LEAF_SIZE {
            nodes.push(Node::Leaf {
                bounds,
                tris: tris.to_vec(),
            });
            return nodes.len() - 1;
        }
        let mut cb = Aabb3::empty();
        for &t in tris.iter() {
            cb.grow(centroids[t as usize]);
        }
        let extents = [cb.hi[0] - cb.lo[0], cb.hi[1] - cb.lo[1], cb.hi[2] - cb.lo[2]];
        let axis = (0..3)
            .max_by(|&a, &b| extents[a].partial_cmp(&extents[b]).unwrap())
            .unwrap();
        let mid = tris.len() / 2;
        tris.sort_unstable_by(|&a, &b| {
            centroids[a as usize][axis]
                .partial_cmp(&centroids[b as usize][axis])
                .unwrap()
                .then(a.cmp(&b))
        });
        let (l, r) = tris.split_at_mut(mid);
        let left = Self::build_node(nodes, l, centroids, tri_bounds);
        let right = Self::build_node(nodes, r, centroids, tri_bounds);
        nodes.push(Node::Inner {
            bounds,
            left,
            right,
        });
        nodes.len() - 1
    }

    /// Exact nearest point on the mesh, equal to the brute-force minimum
    /// over all triangles.
    pub fn nearest(&self, mesh: &TriMesh, q: [f64; 3]) -> Nearest {
        let mut best = Nearest {
            distance: f64::INFINITY,
            point: [0.0; 3],
            triangle: 0,
            feature: Feature::Face,
        };
        let mut best_d2 = f64::INFINITY;
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            match &self.nodes[id] {
                Node::Leaf { bounds, tris } => {
                    if bounds.dist_sq(q) > best_d2 {
                        continue;
                    }
                    for &t in tris {
                        let (a, b, c) = mesh.triangle(t as usize);
                        let (p, feat, _) = closest_point_triangle(q, a, b, c);
                        let d2 = dot3(sub3(q, p), sub3(q, p));
                        if d2 < best_d2 {
                            best_d2 = d2;
                            best = Nearest {
                                distance: d2.sqrt(),
                                point: p,
                                triangle: t as usize,
                                feature: feat,
                            };
                        }
                    }
                }
                Node::Inner {
                    bounds,
                    left,
                    right,
                } => {
                    if bounds.dist_sq(q) > best_d2 {
                        continue;
                    }
                    // Visit the nearer child first for tighter pruning.
                    let dl = self.node_bounds(*left).dist_sq(q);
                    let dr = self.node_bounds(*right).dist_sq(q);
                    if dl <= dr {
                        stack.push(*right);
                        stack.push(*left);
                    } else {
                        stack.push(*left);
                        stack.push(*right);
                    }
                }
            }
        }
        best
    }

    fn node_bounds(&self, id: usize) -> &Aabb3 {
        match &self.nodes[id] {
            Node::Leaf { bounds, .. } => bounds,
            Node::Inner { bounds, .. } => bounds,
        }
    }

    /// Structural invariant used by tests: parent boxes contain child boxes
    /// and every triangle sits in exactly one leaf.
    pub fn check_structure(&self, n_triangles: usize) -> bool {
        let mut seen = vec![0usize; n_triangles];
        let mut ok = true;
        for node in &self.nodes {
            if let Node::Inner {
                bounds,
                left,
                right,
            } = node
            {
                ok &= bounds.contains(self.node_bounds(*left));
                ok &= bounds.contains(self.node_bounds(*right));
            }
            if let Node::Leaf { tris, .. } = node {
                for &t in tris {
                    seen[t as usize] += 1;
                }
            }
        }
        ok && seen.iter().all(|&c| c == 1)
    }
}

/// Classifies `q` against the surface from its nearest point `m` and the
/// (angle-weighted pseudo-)normal `n` there: inside iff `<m - q, n> > 0`;
/// ties classify outside.
pub fn signed_side(q: [f64; 3], m: [f64; 3], n: [f64; 3]) -> Result<Side> {
    if norm3(n) == 0.0 {
        return Err(Error::contract("signed_side requires a nonzero normal"));
    }
    if dot3(sub3(m, q), n) > 0.0 {
        Ok(Side::Inside)
    } else {
        Ok(Side::Outside)
    }
}

/// Convenience wrapper: nearest point plus inside/outside classification.
pub fn classify_point(
    mesh: &TriMesh,
    bvh: &Bvh,
    adj: &MeshAdjacency,
    q: [f64; 3],
) -> (Nearest, Side) {
    let near = bvh.nearest(mesh, q);
    let n = adj.pseudo_normal(mesh, near.triangle, near.feature);
    let side = signed_side(q, near.point, n).unwrap_or(Side::Outside);
    (near, side)
}
