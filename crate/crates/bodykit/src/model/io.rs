//! Model archive: one self-describing binary file.
//!
//! Layout (all multi-byte values little-endian):
//!
//! ```text
//! magic            8 bytes  "BODYMDL1"
//! dims             7 x u32  V, J, body joints, hand joints, n_beta, n_psi, hand latent
//! n_faces          u32
//! manifest_len     u32      byte length of the trailing text manifest
//! adult_template   V*3 f64  meters
//! child_template   V*3 f64  same topology
//! shape_basis      n_beta * V*3 f64
//! expr_basis       n_psi  * V*3 f64
//! joint_regressor  J*V f64  dense rows, nonnegative, each row sums to 1
//! skin_weights     V*J f64  dense rows, convex
//! left_hand_basis  (hand joints * 3) * latent f64
//! right_hand_basis (hand joints * 3) * latent f64
//! faces            n_faces * 3 u32
//! parents          J i32    -1 marks the root
//! manifest         UTF-8 text: named part index sets, anchors, bend specs
//! ```
//!
//! The manifest lists one `name: i0 i1 ...` line per part set, `anchor
//! <name> <joint>` lines, and `bend <joint> <axis> <sign>` lines.

use std::path::Path;

use crate::{Error, Result};

use super::{BendSpec, BodyModel, HandBasis, ModelDims, PartSets};

const MAGIC: &[u8; 8] = b"BODYMDL1";

fn push_f64s(buf: &mut Vec<u8>, xs: impl IntoIterator<Item = f64>) {
    for x in xs {
        buf.extend_from_slice(&x.to_le_bytes());
    }
}

fn dense_rows(sparse: &[Vec<(u32, f64)>], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; sparse.len() * cols];
    for (r, row) in sparse.iter().enumerate() {
        for &(c, w) in row {
            out[r * cols + c as usize] = w;
        }
    }
    out
}

fn sparse_rows(dense: &[f64], rows: usize, cols: usize) -> Vec<Vec<(u32, f64)>> {
    (0..rows)
        .map(|r| {
            (0..cols)
                .filter_map(|c| {
                    let w = dense[r * cols + c];
                    (w != 0.0).then_some((c as u32, w))
                })
                .collect()
        })
        .collect()
}

fn manifest_text(ps: &PartSets) -> String {
    let join = |v: &[u32]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut s = String::new();
    for (name, set) in [
        ("body_joints", &ps.body_joints),
        ("left_hand_joints", &ps.left_hand_joints),
        ("right_hand_joints", &ps.right_hand_joints),
        ("face_landmark_verts", &ps.face_landmark_verts),
        ("body_verts", &ps.body_verts),
        ("left_hand_verts", &ps.left_hand_verts),
        ("right_hand_verts", &ps.right_hand_verts),
        ("face_verts", &ps.face_verts),
    ] {
        s.push_str(name);
        s.push_str(": ");
        s.push_str(&join(set));
        s.push('\n');
    }
    s.push_str(&format!("anchor pelvis {}\n", ps.pelvis));
    s.push_str(&format!("anchor left_wrist {}\n", ps.left_wrist));
    s.push_str(&format!("anchor right_wrist {}\n", ps.right_wrist));
    s.push_str(&format!("anchor neck {}\n", ps.neck));
    for b in &ps.bends {
        s.push_str(&format!("bend {} {} {}\n", b.joint, b.axis, b.sign));
    }
    s
}

fn parse_manifest(text: &str, path: &Path) -> Result<PartSets> {
    let mut sets: std::collections::HashMap<&str, Vec<u32>> = Default::default();
    let mut anchors: std::collections::HashMap<String, u32> = Default::default();
    let mut bends = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("anchor ") {
            let mut it = rest.split_whitespace();
            let name = it
                .next()
                .ok_or_else(|| Error::parse(path, lineno + 1, "anchor name missing"))?;
            let j: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(path, lineno + 1, "anchor joint missing"))?;
            anchors.insert(name.to_string(), j);
        } else if let Some(rest) = line.strip_prefix("bend ") {
            let v: Vec<&str> = rest.split_whitespace().collect();
            if v.len() != 3 {
                return Err(Error::parse(path, lineno + 1, "bend needs joint axis sign"));
            }
            bends.push(BendSpec {
                joint: v[0]
                    .parse()
                    .map_err(|_| Error::parse(path, lineno + 1, "bad bend joint"))?,
                axis: v[1]
                    .parse()
                    .map_err(|_| Error::parse(path, lineno + 1, "bad bend axis"))?,
                sign: v[2]
                    .parse()
                    .map_err(|_| Error::parse(path, lineno + 1, "bad bend sign"))?,
            });
        } else if let Some((name, list)) = line.split_once(':') {
            let vals: std::result::Result<Vec<u32>, _> =
                list.split_whitespace().map(|t| t.parse()).collect();
            let vals =
                vals.map_err(|_| Error::parse(path, lineno + 1, "bad index in part set"))?;
            match name.trim() {
                "body_joints" => sets.insert("body_joints", vals),
                "left_hand_joints" => sets.insert("left_hand_joints", vals),
                "right_hand_joints" => sets.insert("right_hand_joints", vals),
                "face_landmark_verts" => sets.insert("face_landmark_verts", vals),
                "body_verts" => sets.insert("body_verts", vals),
                "left_hand_verts" => sets.insert("left_hand_verts", vals),
                "right_hand_verts" => sets.insert("right_hand_verts", vals),
                "face_verts" => sets.insert("face_verts", vals),
                other => {
                    return Err(Error::parse(
                        path,
                        lineno + 1,
                        format!("unknown part set {other:?}"),
                    ))
                }
            };
        } else {
            return Err(Error::parse(path, lineno + 1, "unrecognized manifest line"));
        }
    }
    let mut take = |name: &str| -> Result<Vec<u32>> {
        sets.remove(name)
            .ok_or_else(|| Error::parse(path, 0, format!("manifest missing {name}")))
    };
    let anchor = |name: &str| -> Result<u32> {
        anchors
            .get(name)
            .copied()
            .ok_or_else(|| Error::parse(path, 0, format!("manifest missing anchor {name}")))
    };
    Ok(PartSets {
        body_joints: take("body_joints")?,
        left_hand_joints: take("left_hand_joints")?,
        right_hand_joints: take("right_hand_joints")?,
        face_landmark_verts: take("face_landmark_verts")?,
        body_verts: take("body_verts")?,
        left_hand_verts: take("left_hand_verts")?,
        right_hand_verts: take("right_hand_verts")?,
        face_verts: take("face_verts")?,
        pelvis: anchor("pelvis")?,
        left_wrist: anchor("left_wrist")?,
        right_wrist: anchor("right_wrist")?,
        neck: anchor("neck")?,
        bends,
    })
}

pub fn save_model(model: &BodyModel, path: &Path) -> Result<()> {
    let d = &model.dims;
    let manifest = manifest_text(&model.part_sets);
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    for dim in [
        d.n_vertices,
        d.n_joints,
        d.n_body_joints,
        d.n_hand_joints,
        d.n_beta,
        d.n_psi,
        d.n_hand_basis,
    ] {
        buf.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    buf.extend_from_slice(&(model.faces.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(manifest.len() as u32).to_le_bytes());

    push_f64s(&mut buf, model.adult_template.iter().flatten().copied());
    push_f64s(&mut buf, model.child_template.iter().flatten().copied());
    for field in &model.shape_basis {
        push_f64s(&mut buf, field.iter().flatten().copied());
    }
    for field in &model.expr_basis {
        push_f64s(&mut buf, field.iter().flatten().copied());
    }
    push_f64s(&mut buf, dense_rows(&model.joint_regressor, d.n_vertices));
    push_f64s(&mut buf, dense_rows(&model.skin_weights, d.n_joints));
    push_f64s(&mut buf, model.left_hand_basis.matrix.iter().copied());
    push_f64s(&mut buf, model.right_hand_basis.matrix.iter().copied());
    for f in &model.faces {
        for &v in f {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    for p in &model.parents {
        let v: i32 = p.map_or(-1, |x| x as i32);
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(manifest.as_bytes());

    std::fs::write(path, &buf).map_err(|e| Error::io_at(path, e))
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::parse(self.path, 0, "model archive truncated"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(8 * n)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
    fn triples(&mut self, n: usize) -> Result<Vec<[f64; 3]>> {
        let flat = self.f64s(3 * n)?;
        Ok(flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
    }
}

pub fn load_model(path: &Path) -> Result<BodyModel> {
    let data = std::fs::read(path).map_err(|e| Error::io_at(path, e))?;
    let mut r = Reader {
        buf: &data,
        pos: 0,
        path,
    };
    if r.take(8)? != MAGIC {
        return Err(Error::parse(path, 0, "not a model archive (bad magic)"));
    }
    let v = r.u32()? as usize;
    let j = r.u32()? as usize;
    let n_body = r.u32()? as usize;
    let n_hand = r.u32()? as usize;
    let n_beta = r.u32()? as usize;
    let n_psi = r.u32()? as usize;
    let n_latent = r.u32()? as usize;
    let n_faces = r.u32()? as usize;
    let manifest_len = r.u32()? as usize;

    let adult_template = r.triples(v)?;
    let child_template = r.triples(v)?;
    let mut shape_basis = Vec::with_capacity(n_beta);
    for _ in 0..n_beta {
        shape_basis.push(r.triples(v)?);
    }
    let mut expr_basis = Vec::with_capacity(n_psi);
    for _ in 0..n_psi {
        expr_basis.push(r.triples(v)?);
    }
    let joint_regressor = sparse_rows(&r.f64s(j * v)?, j, v);
    let skin_weights = sparse_rows(&r.f64s(v * j)?, v, j);
    let left_hand_basis = HandBasis {
        matrix: r.f64s(n_hand * 3 * n_latent)?,
        n_joints: n_hand,
        n_latent,
    };
    let right_hand_basis = HandBasis {
        matrix: r.f64s(n_hand * 3 * n_latent)?,
        n_joints: n_hand,
        n_latent,
    };
    let mut faces = Vec::with_capacity(n_faces);
    for _ in 0..n_faces {
        let a = r.u32()?;
        let b = r.u32()?;
        let c = r.u32()?;
        faces.push([a, b, c]);
    }
    let mut parents = Vec::with_capacity(j);
    for _ in 0..j {
        let raw = i32::from_le_bytes(r.take(4)?.try_into().unwrap());
        parents.push(if raw < 0 { None } else { Some(raw as u32) });
    }
    let manifest = std::str::from_utf8(r.take(manifest_len)?)
        .map_err(|_| Error::parse(path, 0, "manifest is not UTF-8"))?;
    let part_sets = parse_manifest(manifest, path)?;

    let model = BodyModel {
        dims: ModelDims {
            n_vertices: v,
            n_joints: j,
            n_body_joints: n_body,
            n_hand_joints: n_hand,
            n_beta,
            n_psi,
            n_hand_basis: n_latent,
        },
        adult_template,
        child_template,
        faces,
        shape_basis,
        expr_basis,
        joint_regressor,
        skin_weights,
        parents,
        left_hand_basis,
        right_hand_basis,
        part_sets,
    };
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::toy::toy_model;

    #[test]
    fn archive_round_trip_preserves_model() {
        let model = toy_model(7);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.bmm");
        save_model(&model, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(model.dims, back.dims);
        assert_eq!(model.adult_template, back.adult_template);
        assert_eq!(model.child_template, back.child_template);
        assert_eq!(model.faces, back.faces);
        assert_eq!(model.shape_basis, back.shape_basis);
        assert_eq!(model.expr_basis, back.expr_basis);
        assert_eq!(model.joint_regressor, back.joint_regressor);
        assert_eq!(model.skin_weights, back.skin_weights);
        assert_eq!(model.parents, back.parents);
        assert_eq!(model.left_hand_basis, back.left_hand_basis);
        assert_eq!(model.right_hand_basis, back.right_hand_basis);
        assert_eq!(model.part_sets.body_joints, back.part_sets.body_joints);
        assert_eq!(
            model.part_sets.face_landmark_verts,
            back.part_sets.face_landmark_verts
        );
        assert_eq!(model.part_sets.neck, back.part_sets.neck);
        assert_eq!(model.part_sets.bends.len(), back.part_sets.bends.len());
    }

    #[test]
    fn toy_model_is_deterministic_per_seed() {
        let a = toy_model(42);
        let b = toy_model(42);
        assert_eq!(a.adult_template, b.adult_template);
        assert_eq!(a.shape_basis, b.shape_basis);
        let c = toy_model(43);
        assert_ne!(a.shape_basis, c.shape_basis);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bmm");
        std::fs::write(&path, b"NOTAMODELxxxxxxxxxxxxxxxx").unwrap();
        assert!(load_model(&path).is_err());
    }
}
