//! Z-buffered triangle rasterization for person-id masks.
//!
//! Pixel-center sampling with a top-left fill rule and double-precision
//! depth, so masks are bit-exact across platforms. Triangles with any
//! behind-camera vertex are skipped (no clipping; scene generation keeps
//! subjects in front of the camera).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::{Error, Result};

use super::camera::Camera;
use super::mesh::TriMesh;

/// Full-scene label raster plus per-person unoccluded rasters.
///
/// `labels` is row-major; 0 is background, any other value is a person id.
/// Each entry of `unoccluded` is the same raster rendered with that person
/// alone.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskImage {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<u16>,
    pub unoccluded: Vec<(u16, Vec<u16>)>,
}

impl MaskImage {
    pub fn visible_pixels(&self, id: u16) -> usize {
        self.labels.iter().filter(|&&l| l == id).count()
    }

    pub fn unoccluded_pixels(&self, id: u16) -> Option<usize> {
        self.unoccluded
            .iter()
            .find(|(pid, _)| *pid == id)
            .map(|(_, raster)| raster.iter().filter(|&&l| l != 0).count())
    }

    /// All label values must reference a person present in `unoccluded`.
    pub fn validate(&self) -> Result<()> {
        for &l in &self.labels {
            if l != 0 && !self.unoccluded.iter().any(|(pid, _)| *pid == l) {
                return Err(Error::contract("mask label references unknown person"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct ScreenVertex {
    x: f64,
    y: f64,
    inv_z: f64,
}

/// `orient2d(a, b, p)`: twice the signed area of (a, b, p) in pixel space
/// (x right, y down).
#[inline]
fn orient2d(ax: f64, ay: f64, bx: f64, by: f64, px: f64, py: f64) -> f64 {
    (bx - ax) * (py - ay) - (by - ay) * (px - ax)
}

/// Top-left rule: a boundary pixel belongs to the triangle iff the edge is
/// a top edge (horizontal, pointing +x) or a left edge (pointing -y).
#[inline]
fn edge_includes_boundary(px: f64, py: f64, qx: f64, qy: f64) -> bool {
    (py == qy && qx > px) || (qy < py)
}

fn raster_mesh_into(
    camera: &Camera,
    mesh: &TriMesh,
    id: u16,
    labels: &mut [u16],
    depth: &mut [f64],
) {
    let w = camera.size[0] as i64;
    let h = camera.size[1] as i64;
    let projected: Vec<Option<ScreenVertex>> = mesh
        .positions
        .iter()
        .map(|&p| {
            let (uv, z, valid) = camera.project_point::<f64>(p);
            valid.then(|| ScreenVertex {
                x: uv[0],
                y: uv[1],
                inv_z: 1.0 / z,
            })
        })
        .collect();

    for f in &mesh.faces {
        let (Some(a), Some(b), Some(c)) = (
            projected[f[0] as usize],
            projected[f[1] as usize],
            projected[f[2] as usize],
        ) else {
            continue;
        };
        let mut v = [a, b, c];
        let mut area2 = orient2d(v[0].x, v[0].y, v[1].x, v[1].y, v[2].x, v[2].y);
        if area2 == 0.0 {
            continue;
        }
        if area2 < 0.0 {
            v.swap(1, 2);
            area2 = -area2;
        }

        let min_x = v.iter().fold(f64::INFINITY, |m, s| m.min(s.x));
        let max_x = v.iter().fold(f64::NEG_INFINITY, |m, s| m.max(s.x));
        let min_y = v.iter().fold(f64::INFINITY, |m, s| m.min(s.y));
        let max_y = v.iter().fold(f64::NEG_INFINITY, |m, s| m.max(s.y));
        let x0 = ((min_x - 0.5).floor() as i64).max(0);
        let x1 = ((max_x - 0.5).ceil() as i64).min(w - 1);
        let y0 = ((min_y - 0.5).floor() as i64).max(0);
        let y1 = ((max_y - 0.5).ceil() as i64).min(h - 1);

        let bias = [
            edge_includes_boundary(v[1].x, v[1].y, v[2].x, v[2].y),
            edge_includes_boundary(v[2].x, v[2].y, v[0].x, v[0].y),
            edge_includes_boundary(v[0].x, v[0].y, v[1].x, v[1].y),
        ];

        for py in y0..=y1 {
            let cy = py as f64 + 0.5;
            for px in x0..=x1 {
                let cx = px as f64 + 0.5;
                let w0 = orient2d(v[1].x, v[1].y, v[2].x, v[2].y, cx, cy);
                let w1 = orient2d(v[2].x, v[2].y, v[0].x, v[0].y, cx, cy);
                let w2 = orient2d(v[0].x, v[0].y, v[1].x, v[1].y, cx, cy);
                let inside = (w0 > 0.0 || (w0 == 0.0 && bias[0]))
                    && (w1 > 0.0 || (w1 == 0.0 && bias[1]))
                    && (w2 > 0.0 || (w2 == 0.0 && bias[2]));
                if !inside {
                    continue;
                }
                let inv_z =
                    (w0 * v[0].inv_z + w1 * v[1].inv_z + w2 * v[2].inv_z) / area2;
                let z = 1.0 / inv_z;
                let idx = (py * w + px) as usize;
                if z < depth[idx] {
                    depth[idx] = z;
                    labels[idx] = id;
                }
            }
        }
    }
}

/// Rasterizes the meshes into a composite person-id raster plus one
/// unoccluded raster per person (each rendered alone). Deterministic;
/// exact depth ties keep the earlier mesh in input order.
pub fn rasterize(items: &[(u16, &TriMesh)], camera: &Camera) -> MaskImage {
    let n = (camera.size[0] * camera.size[1]) as usize;
    let mut labels = vec![0u16; n];
    let mut depth = vec![f64::INFINITY; n];
    for (id, mesh) in items {
        raster_mesh_into(camera, mesh, *id, &mut labels, &mut depth);
    }
    let unoccluded = items
        .iter()
        .map(|(id, mesh)| {
            let mut solo = vec![0u16; n];
            let mut solo_depth = vec![f64::INFINITY; n];
            raster_mesh_into(camera, mesh, *id, &mut solo, &mut solo_depth);
            (*id, solo)
        })
        .collect();
    MaskImage {
        width: camera.size[0],
        height: camera.size[1],
        labels,
        unoccluded,
    }
}

/// Writes a raster as binary PGM (P5, maxval 255). Pixel value is the
/// person id (0 = background), so at most 255 persons per image.
pub fn write_pgm(path: &Path, width: u32, height: u32, data: &[u16]) -> Result<()> {
    if data.iter().any(|&v| v > 255) {
        return Err(Error::contract("PGM mask supports at most 255 person ids"));
    }
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io_at(path, e))?,
    );
    write!(out, "P5\n{} {}\n255\n", width, height).map_err(|e| Error::io_at(path, e))?;
    let bytes: Vec<u8> = data.iter().map(|&v| v as u8).collect();
    out.write_all(&bytes).map_err(|e| Error::io_at(path, e))?;
    Ok(())
}

/// Reads a binary PGM written by [`write_pgm`].
pub fn read_pgm(path: &Path) -> Result<(u32, u32, Vec<u16>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io_at(path, e))?;
    let mut reader = BufReader::new(file);
    let mut header = String::new();
    for _ in 0..3 {
        let mut line = String::new();
        reader
            .read_line(&mut line)
            .map_err(|e| Error::io_at(path, e))?;
        header.push_str(&line);
    }
    let mut parts = header.split_whitespace();
    if parts.next() != Some("P5") {
        return Err(Error::parse(path, 1, "expected P5 graymap"));
    }
    let w: u32 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::parse(path, 2, "bad width"))?;
    let h: u32 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::parse(path, 2, "bad height"))?;
    let maxval: u32 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::parse(path, 3, "bad maxval"))?;
    if maxval != 255 {
        return Err(Error::parse(path, 3, "expected maxval 255"));
    }
    let mut bytes = vec![0u8; (w * h) as usize];
    reader
        .read_exact(&mut bytes)
        .map_err(|e| Error::io_at(path, e))?;
    Ok((w, h, bytes.into_iter().map(u16::from).collect()))
}
