//! Labeled scans: the fitting target.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geom::{Camera, TriMesh};
use crate::{Error, Result};

/// A scan mesh with per-vertex skin/cloth/other probabilities.
///
/// Probabilities form a simplex per vertex (sum 1 within 1e-6). The
/// identity tag groups scans of the same person for inter-shape coupling.
#[derive(Clone, Debug)]
pub struct LabeledScan {
    pub mesh: TriMesh,
    pub p_skin: Vec<f64>,
    pub p_cloth: Vec<f64>,
    pub p_other: Vec<f64>,
    pub identity: String,
    pub is_child: bool,
}

impl LabeledScan {
    pub fn validate(&self) -> Result<()> {
        let n = self.mesh.positions.len();
        if self.p_skin.len() != n || self.p_cloth.len() != n || self.p_other.len() != n {
            return Err(Error::contract("label table length mismatch"));
        }
        if self.identity.is_empty() {
            return Err(Error::contract("scan identity tag must be nonempty"));
        }
        for i in 0..n {
            let (s, c, o) = (self.p_skin[i], self.p_cloth[i], self.p_other[i]);
            if s < 0.0 || c < 0.0 || o < 0.0 || (s + c + o - 1.0).abs() > 1e-6 {
                return Err(Error::contract(format!(
                    "vertex {i} labels are not a probability simplex"
                )));
            }
        }
        Ok(())
    }

    /// Writes `<stem>.obj` and the `<stem>.labels` sidecar.
    pub fn save(&self, stem: &Path) -> Result<()> {
        let obj = stem.with_extension("obj");
        self.mesh.save_obj(&obj)?;
        let labels = stem.with_extension("labels");
        let mut out = std::io::BufWriter::new(
            std::fs::File::create(&labels).map_err(|e| Error::io_at(&labels, e))?,
        );
        writeln!(out, "# bodykit labels: vertex p_skin p_cloth p_other")
            .map_err(|e| Error::io_at(&labels, e))?;
        writeln!(out, "identity {}", self.identity).map_err(|e| Error::io_at(&labels, e))?;
        writeln!(out, "child {}", u8::from(self.is_child)).map_err(|e| Error::io_at(&labels, e))?;
        for i in 0..self.mesh.positions.len() {
            writeln!(
                out,
                "{} {} {} {}",
                i, self.p_skin[i], self.p_cloth[i], self.p_other[i]
            )
            .map_err(|e| Error::io_at(&labels, e))?;
        }
        Ok(())
    }

    /// Loads `<stem>.obj` plus `<stem>.labels`.
    pub fn load(stem: &Path) -> Result<Self> {
        let mesh = TriMesh::load_obj(&stem.with_extension("obj"))?;
        let labels_path = stem.with_extension("labels");
        let file =
            std::fs::File::open(&labels_path).map_err(|e| Error::io_at(&labels_path, e))?;
        let n = mesh.positions.len();
        let mut p_skin = vec![0.0; n];
        let mut p_cloth = vec![0.0; n];
        let mut p_other = vec![0.0; n];
        let mut identity = String::new();
        let mut is_child = false;
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io_at(&labels_path, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(tag) = line.strip_prefix("identity ") {
                identity = tag.to_string();
                continue;
            }
            if let Some(flag) = line.strip_prefix("child ") {
                is_child = flag.trim() == "1";
                continue;
            }
            let mut it = line.split_whitespace();
            let idx: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::parse(&labels_path, lineno + 1, "bad vertex id"))?;
            if idx >= n {
                return Err(Error::parse(
                    &labels_path,
                    lineno + 1,
                    "vertex id out of range",
                ));
            }
            let mut vals = [0.0; 3];
            for v in &mut vals {
                *v = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(&labels_path, lineno + 1, "bad probability"))?;
            }
            p_skin[idx] = vals[0];
            p_cloth[idx] = vals[1];
            p_other[idx] = vals[2];
        }
        let scan = Self {
            mesh,
            p_skin,
            p_cloth,
            p_other,
            identity,
            is_child,
        };
        scan.validate()?;
        Ok(scan)
    }
}

/// One detected 2D landmark.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub uv: [f64; 2],
    pub confidence: f64,
}

/// Per-camera 2D landmark detections for the model's body joints.
/// Self-contained: carries the virtual rig the detections were made in.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LandmarkObservations {
    pub cameras: Vec<Camera>,
    /// `detections[camera][body_joint]`.
    pub detections: Vec<Vec<Option<Landmark>>>,
}

impl LandmarkObservations {
    pub fn total_detections(&self) -> usize {
        self.detections
            .iter()
            .map(|cam| cam.iter().flatten().count())
            .sum()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::io_at(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::box_mesh;

    fn sample_scan() -> LabeledScan {
        let mesh = box_mesh([0.0; 3], [1.0; 3]);
        let n = mesh.positions.len();
        LabeledScan {
            mesh,
            p_skin: vec![0.6; n],
            p_cloth: vec![0.3; n],
            p_other: vec![0.1; n],
            identity: "subject_a".into(),
            is_child: false,
        }
    }

    #[test]
    fn scan_round_trip() {
        let scan = sample_scan();
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("scan_0");
        scan.save(&stem).unwrap();
        let back = LabeledScan::load(&stem).unwrap();
        assert_eq!(back.identity, "subject_a");
        assert!(!back.is_child);
        assert_eq!(back.mesh, scan.mesh);
        assert_eq!(back.p_skin, scan.p_skin);
        assert_eq!(back.p_cloth, scan.p_cloth);
    }

    #[test]
    fn bad_simplex_rejected() {
        let mut scan = sample_scan();
        scan.p_skin[3] = 0.9; // breaks the simplex at vertex 3
        assert!(scan.validate().is_err());
    }

    #[test]
    fn empty_identity_rejected() {
        let mut scan = sample_scan();
        scan.identity.clear();
        assert!(scan.validate().is_err());
    }
}
