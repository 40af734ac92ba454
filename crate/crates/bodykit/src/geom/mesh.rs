//! Triangle mesh, ASCII I/O, adjacency, and pseudo-normals.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::num::{add3, cross3, dot3, norm3, scale3, sub3};
use crate::{Error, Result};

use super::tri::Feature;

/// Immutable triangle mesh. Degenerate (zero-area) faces are dropped at
/// construction so downstream normal math never divides by zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh {
    pub positions: Vec<[f64; 3]>,
    pub faces: Vec<[u32; 3]>,
}

const DEGENERATE_AREA_SQ: f64 = 1e-24;

impl TriMesh {
    pub fn new(positions: Vec<[f64; 3]>, faces: Vec<[u32; 3]>) -> Result<Self> {
        let n = positions.len() as u32;
        for f in &faces {
            if f[0] >= n || f[1] >= n || f[2] >= n {
                return Err(Error::contract("mesh face index out of range"));
            }
        }
        let faces = faces
            .into_iter()
            .filter(|f| {
                let a = positions[f[0] as usize];
                let b = positions[f[1] as usize];
                let c = positions[f[2] as usize];
                let cr = cross3(sub3(b, a), sub3(c, a));
                dot3(cr, cr) > DEGENERATE_AREA_SQ
            })
            .collect();
        Ok(Self { positions, faces })
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    #[inline]
    pub fn triangle(&self, f: usize) -> ([f64; 3], [f64; 3], [f64; 3]) {
        let t = self.faces[f];
        (
            self.positions[t[0] as usize],
            self.positions[t[1] as usize],
            self.positions[t[2] as usize],
        )
    }

    /// Unit face normal (faces are wound counter-clockwise seen from outside).
    pub fn face_normal(&self, f: usize) -> [f64; 3] {
        let (a, b, c) = self.triangle(f);
        let n = cross3(sub3(b, a), sub3(c, a));
        scale3(n, 1.0 / norm3(n))
    }

    /// Angle-weighted unit vertex normals.
    pub fn vertex_normals(&self) -> Vec<[f64; 3]> {
        let mut acc = vec![[0.0; 3]; self.positions.len()];
        for (fi, f) in self.faces.iter().enumerate() {
            let n = self.face_normal(fi);
            for k in 0..3 {
                let v = f[k] as usize;
                let p = self.positions[v];
                let e1 = sub3(self.positions[f[(k + 1) % 3] as usize], p);
                let e2 = sub3(self.positions[f[(k + 2) % 3] as usize], p);
                let cosang =
                    (dot3(e1, e2) / (norm3(e1) * norm3(e2))).clamp(-1.0, 1.0);
                let ang = cosang.acos();
                acc[v] = add3(acc[v], scale3(n, ang));
            }
        }
        for n in &mut acc {
            let len = norm3(*n);
            if len > 0.0 {
                *n = scale3(*n, 1.0 / len);
            }
        }
        acc
    }

    /// Reads the ASCII mesh format: `v x y z` and `f i j k` lines (1-based
    /// indices, the OBJ subset). Unknown directives are ignored.
    pub fn load_obj(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::io_at(path, e))?;
        let reader = BufReader::new(file);
        let mut positions = Vec::new();
        let mut faces = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io_at(path, e))?;
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let mut p = [0.0; 3];
                    for x in &mut p {
                        *x = it
                            .next()
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| Error::parse(path, lineno + 1, "bad vertex"))?;
                    }
                    positions.push(p);
                }
                Some("f") => {
                    let mut f = [0u32; 3];
                    for x in &mut f {
                        let tok = it
                            .next()
                            .ok_or_else(|| Error::parse(path, lineno + 1, "bad face"))?;
                        // allow "i", "i/..", "i//.." forms
                        let idx: i64 = tok
                            .split('/')
                            .next()
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| Error::parse(path, lineno + 1, "bad face index"))?;
                        if idx < 1 {
                            return Err(Error::parse(path, lineno + 1, "face index must be >= 1"));
                        }
                        *x = (idx - 1) as u32;
                    }
                    faces.push(f);
                }
                _ => {}
            }
        }
        Self::new(positions, faces)
    }

    pub fn save_obj(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::io_at(path, e))?,
        );
        for p in &self.positions {
            writeln!(out, "v {} {} {}", p[0], p[1], p[2]).map_err(|e| Error::io_at(path, e))?;
        }
        for f in &self.faces {
            writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)
                .map_err(|e| Error::io_at(path, e))?;
        }
        Ok(())
    }
}

/// Face adjacency used for edge/vertex pseudo-normals.
#[derive(Clone, Debug)]
pub struct MeshAdjacency {
    edge_faces: HashMap<(u32, u32), Vec<u32>>,
    vertex_faces: Vec<Vec<u32>>,
}

impl MeshAdjacency {
    pub fn build(mesh: &TriMesh) -> Self {
        let mut edge_faces: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
        let mut vertex_faces = vec![Vec::new(); mesh.positions.len()];
        for (fi, f) in mesh.faces.iter().enumerate() {
            for k in 0..3 {
                let a = f[k];
                let b = f[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                edge_faces.entry(key).or_default().push(fi as u32);
                vertex_faces[a as usize].push(fi as u32);
            }
        }
        Self {
            edge_faces,
            vertex_faces,
        }
    }

    /// Angle-weighted pseudo-normal at the closest-point feature of face
    /// `tri`: the face normal on the interior, the mean of adjacent face
    /// normals on an edge, and the angle-weighted normal at a vertex.
    /// Not necessarily unit length; only the direction is meaningful.
    pub fn pseudo_normal(&self, mesh: &TriMesh, tri: usize, feature: Feature) -> [f64; 3] {
        match feature {
            Feature::Face => mesh.face_normal(tri),
            Feature::Edge(e) => {
                let f = mesh.faces[tri];
                let a = f[e as usize];
                let b = f[((e + 1) % 3) as usize];
                let key = (a.min(b), a.max(b));
                let mut n = [0.0; 3];
                if let Some(fs) = self.edge_faces.get(&key) {
                    for &fi in fs {
                        n = add3(n, mesh.face_normal(fi as usize));
                    }
                }
                n
            }
            Feature::Vertex(v) => {
                let vid = mesh.faces[tri][v as usize] as usize;
                let p = mesh.positions[vid];
                let mut n = [0.0; 3];
                for &fi in &self.vertex_faces[vid] {
                    let f = mesh.faces[fi as usize];
                    let k = (0..3).find(|&k| f[k] as usize == vid).unwrap();
                    let e1 = sub3(mesh.positions[f[(k + 1) % 3] as usize], p);
                    let e2 = sub3(mesh.positions[f[(k + 2) % 3] as usize], p);
                    let cosang =
                        (dot3(e1, e2) / (norm3(e1) * norm3(e2))).clamp(-1.0, 1.0);
                    n = add3(n, scale3(mesh.face_normal(fi as usize), cosang.acos()));
                }
                n
            }
        }
    }
}

/// Axis-aligned box mesh spanning `[lo, hi]`, outward-facing, 12 triangles.
/// Used by tests and as a synthetic occluder.
pub fn box_mesh(lo: [f64; 3], hi: [f64; 3]) -> TriMesh {
    let p = |mask: usize| {
        [
            if mask & 1 != 0 { hi[0] } else { lo[0] },
            if mask & 2 != 0 { hi[1] } else { lo[1] },
            if mask & 4 != 0 { hi[2] } else { lo[2] },
        ]
    };
    let positions: Vec<[f64; 3]> = (0..8).map(p).collect();
    // Quads per face, wound so normals point outward.
    let quads = [
        [0u32, 4, 6, 2], // x = lo
        [1, 3, 7, 5],    // x = hi
        [0, 1, 5, 4],    // y = lo
        [2, 6, 7, 3],    // y = hi
        [0, 2, 3, 1],    // z = lo
        [4, 5, 7, 6],    // z = hi
    ];
    let mut faces = Vec::new();
    for q in quads {
        faces.push([q[0], q[1], q[2]]);
        faces.push([q[0], q[2], q[3]]);
    }
    TriMesh::new(positions, faces).expect("box mesh is valid")
}
