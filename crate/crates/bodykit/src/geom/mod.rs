//! Geometry substrate: cameras, meshes, nearest-point queries, mask
//! rasterization and 2D boxes.
//!
//! Everything here is immutable after construction and every operation is
//! a pure function, so batch use across threads needs no synchronization.

pub mod aabb;
pub mod bvh;
pub mod camera;
pub mod mesh;
pub mod raster;
pub mod tri;

pub use aabb::{aabb_iou, Aabb2, IouOutcome};
pub use bvh::{classify_point, signed_side, Bvh, Nearest, Side};
pub use camera::{Camera, Projection};
pub use mesh::{box_mesh, MeshAdjacency, TriMesh};
pub use raster::{rasterize, read_pgm, write_pgm, MaskImage};
pub use tri::{closest_point_triangle, dist_sq_triangle, Feature};
