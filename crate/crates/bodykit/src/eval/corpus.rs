//! Ground-truth corpus and submission formats.
//!
//! A corpus directory holds one subdirectory per scene:
//!
//! ```text
//! scenes/scene_0000/
//!   scene.json        camera, persons (id, params, child/BFH flags, joints)
//!   mask_full.pgm     composite person-id raster
//!   masks/person_NN.pgm  per-person unoccluded rasters
//! ```
//!
//! Ground-truth vertices are regenerated from the stored parameters at
//! load; stored joints are validated against the regeneration and
//! overridden on mismatch beyond 1e-6 (parameters are the single source of
//! truth).
//!
//! A submission is JSON-lines: a header line
//! `{"format":"bodykit-submission","version":1,"units":"m"}` followed by
//! one line per image: `{"image":"scene_0000","persons":[...]}`. Each
//! person carries 3D body joints (22) in the prediction camera's frame,
//! optional hand joints (15 each), optional face landmarks (51), optional
//! full vertex array, and the camera used for projection (`units` applies
//! to all coordinates; the camera is always pixels).

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::geom::{read_pgm, write_pgm, Camera, MaskImage};
use crate::model::{BodyModel, BodyParams};
use crate::{Error, Result};

/// One ground-truth person in a scene.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenePerson {
    pub id: u32,
    pub params: BodyParams,
    pub is_child: bool,
    /// True when hands and face annotations are reliable (body-only
    /// persons contribute no hand/face errors).
    pub bfh: bool,
    /// World-frame joints; regenerated from `params` at load.
    pub joints: Vec<[f64; 3]>,
    /// World-frame vertices; regenerated from `params` at load and not
    /// stored on disk.
    #[serde(skip)]
    pub vertices: Vec<[f64; 3]>,
}

/// Ground truth for one image.
#[derive(Clone, Debug)]
pub struct SceneTruth {
    pub name: String,
    pub camera: Camera,
    pub persons: Vec<ScenePerson>,
    pub masks: MaskImage,
}

#[derive(Serialize, Deserialize)]
struct SceneFile {
    name: String,
    camera: Camera,
    persons: Vec<ScenePerson>,
}

impl SceneTruth {
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir.join("masks")).map_err(|e| Error::io_at(dir, e))?;
        let file = SceneFile {
            name: self.name.clone(),
            camera: self.camera.clone(),
            persons: self.persons.clone(),
        };
        let path = dir.join("scene.json");
        std::fs::write(&path, serde_json::to_string_pretty(&file)?)
            .map_err(|e| Error::io_at(&path, e))?;
        write_pgm(
            &dir.join("mask_full.pgm"),
            self.masks.width,
            self.masks.height,
            &self.masks.labels,
        )?;
        for (id, raster) in &self.masks.unoccluded {
            write_pgm(
                &dir.join(format!("masks/person_{id:02}.pgm")),
                self.masks.width,
                self.masks.height,
                raster,
            )?;
        }
        Ok(())
    }

    /// Loads a scene, regenerating joints/vertices from parameters.
    /// Stored joints that drift beyond 1e-6 from the regeneration are
    /// overridden (and the mismatch reported in the returned flag).
    pub fn load(dir: &Path, model: &BodyModel) -> Result<(Self, bool)> {
        let path = dir.join("scene.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io_at(&path, e))?;
        let file: SceneFile = serde_json::from_str(&text)?;
        file.camera.validate()?;
        let mut overrode = false;
        let mut persons = Vec::with_capacity(file.persons.len());
        for mut p in file.persons {
            let posed = model.forward(&p.params)?;
            let drift = p
                .joints
                .iter()
                .zip(&posed.joints)
                .flat_map(|(a, b)| (0..3).map(move |k| (a[k] - b[k]).abs()))
                .fold(0.0_f64, f64::max);
            if p.joints.len() != posed.joints.len() || drift > 1e-6 {
                overrode = true;
            }
            p.joints = posed.joints;
            p.vertices = posed.vertices;
            persons.push(p);
        }
        let (w, h, labels) = read_pgm(&dir.join("mask_full.pgm"))?;
        let mut unoccluded = Vec::with_capacity(persons.len());
        for p in &persons {
            let (_, _, raster) = read_pgm(&dir.join(format!("masks/person_{:02}.pgm", p.id)))?;
            unoccluded.push((p.id as u16, raster));
        }
        let masks = MaskImage {
            width: w,
            height: h,
            labels,
            unoccluded,
        };
        masks.validate()?;
        let mut ids: Vec<u32> = persons.iter().map(|p| p.id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != persons.len() {
            return Err(Error::contract("scene person ids must be unique"));
        }
        Ok((
            Self {
                name: file.name,
                camera: file.camera,
                persons,
                masks,
            },
            overrode,
        ))
    }
}

/// Lists scene directories (`scenes/scene_*`) of a corpus in name order.
pub fn scene_dirs(corpus: &Path) -> Result<Vec<PathBuf>> {
    let scenes = corpus.join("scenes");
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(&scenes)
        .map_err(|e| Error::io_at(&scenes, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    Ok(dirs)
}

/// One predicted person.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PredictedPerson {
    /// Stable id (line order at parse time).
    #[serde(default)]
    pub id: u32,
    /// 22 body joints in the prediction camera frame.
    pub joints_body: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joints_left_hand: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joints_right_hand: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_landmarks: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<[f64; 3]>>,
    /// Camera the predictor assumes; used to project its keypoints.
    pub camera: Camera,
}

/// All predictions of a submission, keyed by image name.
#[derive(Clone, Debug, Default)]
pub struct PredictionSet {
    pub images: std::collections::BTreeMap<String, Vec<PredictedPerson>>,
}

#[derive(Serialize, Deserialize)]
struct SubmissionHeader {
    format: String,
    version: u32,
    units: String,
}

#[derive(Serialize, Deserialize)]
struct SubmissionLine {
    image: String,
    persons: Vec<PredictedPerson>,
}

impl PredictionSet {
    /// Writes the JSON-lines submission format (meters).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::io_at(path, e))?,
        );
        let header = SubmissionHeader {
            format: "bodykit-submission".into(),
            version: 1,
            units: "m".into(),
        };
        writeln!(out, "{}", serde_json::to_string(&header)?)
            .map_err(|e| Error::io_at(path, e))?;
        for (image, persons) in &self.images {
            let line = SubmissionLine {
                image: image.clone(),
                persons: persons.clone(),
            };
            writeln!(out, "{}", serde_json::to_string(&line)?)
                .map_err(|e| Error::io_at(path, e))?;
        }
        Ok(())
    }

    /// Parses a submission; malformed lines report their line number.
    /// Millimeter submissions are converted to meters.
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io_at(path, e))?;
        let mut lines = BufReader::new(file).lines().enumerate();
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "empty submission"))?;
        let first = first.map_err(|e| Error::io_at(path, e))?;
        let header: SubmissionHeader = serde_json::from_str(&first)
            .map_err(|e| Error::parse(path, 1, format!("bad header: {e}")))?;
        if header.format != "bodykit-submission" || header.version != 1 {
            return Err(Error::parse(path, 1, "unsupported submission format"));
        }
        let scale = match header.units.as_str() {
            "m" => 1.0,
            "mm" => 1e-3,
            other => {
                return Err(Error::parse(
                    path,
                    1,
                    format!("units must be \"m\" or \"mm\", got {other:?}"),
                ))
            }
        };
        let mut images = std::collections::BTreeMap::new();
        for (idx, line) in lines {
            let line = line.map_err(|e| Error::io_at(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parsed: SubmissionLine = serde_json::from_str(&line)
                .map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
            for (k, person) in parsed.persons.iter_mut().enumerate() {
                person.id = k as u32;
                if person.joints_body.len() != 22 {
                    return Err(Error::parse(
                        path,
                        idx + 1,
                        format!(
                            "person {k}: expected 22 body joints, got {}",
                            person.joints_body.len()
                        ),
                    ));
                }
                person.camera.validate()?;
                if scale != 1.0 {
                    let apply = |pts: &mut Vec<[f64; 3]>| {
                        for p in pts.iter_mut() {
                            for v in p.iter_mut() {
                                *v *= scale;
                            }
                        }
                    };
                    apply(&mut person.joints_body);
                    if let Some(v) = person.joints_left_hand.as_mut() {
                        apply(v);
                    }
                    if let Some(v) = person.joints_right_hand.as_mut() {
                        apply(v);
                    }
                    if let Some(v) = person.face_landmarks.as_mut() {
                        apply(v);
                    }
                    if let Some(v) = person.vertices.as_mut() {
                        apply(v);
                    }
                }
            }
            if images.insert(parsed.image.clone(), parsed.persons).is_some() {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    format!("duplicate image {:?}", parsed.image),
                ));
            }
        }
        Ok(Self { images })
    }
}
