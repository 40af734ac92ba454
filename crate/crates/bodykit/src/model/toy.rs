//! Deterministic toy body generator.
//!
//! Builds a closed-tube humanoid at desk scale: one capped tube per bone
//! (8 radial segments for body bones, 4 for fingers), a wider head tube
//! carrying the face region, 22 body joints, 15 joints per hand. Every
//! joint owns a vertex ring centered exactly on it, which supplies the
//! joint regressor rows. Shape/expression/hand bases are smooth analytic
//! fields with a small seeded component, so a fixed seed reproduces the
//! model byte for byte.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::num::{add3, cross3, norm3, scale3, sub3};

use super::{BendSpec, BodyModel, HandBasis, ModelDims, PartSets};

pub const N_BODY_JOINTS: usize = 22;
pub const N_HAND_JOINTS: usize = 15;
pub const N_BETA: usize = 10;
pub const N_PSI: usize = 3;
pub const N_HAND_BASIS: usize = 6;
pub const N_FACE_LANDMARKS: usize = 51;

/// Parent of each body joint; pelvis is the root.
pub const BODY_PARENTS: [i32; N_BODY_JOINTS] = [
    -1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19,
];

pub const PELVIS: u32 = 0;
pub const NECK: u32 = 12;
pub const HEAD: u32 = 15;
pub const LEFT_WRIST: u32 = 20;
pub const RIGHT_WRIST: u32 = 21;

/// Adult rest skeleton: T-pose, meters, y up, subject facing +z, +x is the
/// subject's left.
const ADULT_JOINTS: [[f64; 3]; N_BODY_JOINTS] = [
    [0.00, 0.95, 0.0],   // pelvis
    [0.09, 0.88, 0.0],   // left hip
    [-0.09, 0.88, 0.0],  // right hip
    [0.00, 1.06, 0.0],   // spine1
    [0.10, 0.50, 0.0],   // left knee
    [-0.10, 0.50, 0.0],  // right knee
    [0.00, 1.16, 0.0],   // spine2
    [0.10, 0.09, 0.0],   // left ankle
    [-0.10, 0.09, 0.0],  // right ankle
    [0.00, 1.27, 0.0],   // spine3
    [0.10, 0.03, 0.13],  // left foot
    [-0.10, 0.03, 0.13], // right foot
    [0.00, 1.46, 0.0],   // neck
    [0.05, 1.42, 0.0],   // left collar
    [-0.05, 1.42, 0.0],  // right collar
    [0.00, 1.56, 0.0],   // head
    [0.18, 1.42, 0.0],   // left shoulder
    [-0.18, 1.42, 0.0],  // right shoulder
    [0.45, 1.42, 0.0],   // left elbow
    [-0.45, 1.42, 0.0],  // right elbow
    [0.70, 1.42, 0.0],   // left wrist
    [-0.70, 1.42, 0.0],  // right wrist
];

/// Body bones as (parent joint, child joint, tube radius).
const BODY_BONES: [(u32, u32, f64); 21] = [
    (0, 3, 0.120),
    (0, 1, 0.055),
    (0, 2, 0.055),
    (1, 4, 0.065),
    (2, 5, 0.065),
    (3, 6, 0.125),
    (4, 7, 0.050),
    (5, 8, 0.050),
    (6, 9, 0.120),
    (7, 10, 0.035),
    (8, 11, 0.035),
    (9, 12, 0.085),
    (9, 13, 0.040),
    (9, 14, 0.040),
    (12, 15, 0.045),
    (13, 16, 0.040),
    (14, 17, 0.040),
    (16, 18, 0.042),
    (17, 19, 0.042),
    (18, 20, 0.036),
    (19, 21, 0.036),
];

const BODY_RADIAL: usize = 8;
const FINGER_RADIAL: usize = 4;
const HEAD_RADIAL: usize = 12;
const HEAD_RINGS: usize = 7;
const FINGER_SEG_LEN: [f64; 4] = [0.055, 0.035, 0.028, 0.022]; // metacarpal..distal
const FINGER_RADIUS: f64 = 0.009;
const HEAD_RADIUS: f64 = 0.090;

struct Skeleton {
    joints: Vec<[f64; 3]>, // body then left-hand then right-hand joints
    radius_scale: f64,
    head_radius: f64,
    head_lo: [f64; 3],
    head_hi: [f64; 3],
}

fn hand_joints(wrist: [f64; 3], dir: f64, scale: f64) -> Vec<[f64; 3]> {
    // 5 fingers x (MCP, PIP, DIP); fingers run along +-x, fanned in z.
    let mut out = Vec::with_capacity(N_HAND_JOINTS);
    for f in 0..5 {
        let z = (f as f64 - 2.0) * 0.018 * scale;
        let mcp = add3(wrist, [dir * FINGER_SEG_LEN[0] * scale, 0.0, z]);
        let pip = add3(mcp, [dir * FINGER_SEG_LEN[1] * scale, 0.0, 0.0]);
        let dip = add3(pip, [dir * FINGER_SEG_LEN[2] * scale, 0.0, 0.0]);
        out.push(mcp);
        out.push(pip);
        out.push(dip);
    }
    out
}

fn skeleton(body_scale: [f64; 3], limb_scale: f64, radius_scale: f64, head_boost: f64) -> Skeleton {
    let mut joints: Vec<[f64; 3]> = ADULT_JOINTS
        .iter()
        .map(|&p| {
            [
                p[0] * body_scale[0],
                p[1] * body_scale[1],
                p[2] * body_scale[2],
            ]
        })
        .collect();
    joints.extend(hand_joints(joints[LEFT_WRIST as usize], 1.0, limb_scale));
    joints.extend(hand_joints(joints[RIGHT_WRIST as usize], -1.0, limb_scale));
    let head = joints[HEAD as usize];
    let hr = HEAD_RADIUS * radius_scale * head_boost;
    Skeleton {
        joints,
        radius_scale,
        head_radius: hr,
        head_lo: [head[0], head[1] - 0.06 * body_scale[1], head[2]],
        head_hi: [head[0], head[1] + 0.16 * body_scale[1] * head_boost, head[2]],
    }
}

struct MeshBuilder {
    positions: Vec<[f64; 3]>,
    faces: Vec<[u32; 3]>,
    weights: Vec<Vec<(u32, f64)>>,
}

impl MeshBuilder {
    fn new() -> Self {
        Self {
            positions: Vec::new(),
            faces: Vec::new(),
            weights: Vec::new(),
        }
    }

    /// Capped tube from `p0` to `p1`; returns per-ring vertex ids,
    /// rings[0] centered at `p0`. Interior rings weight to `joint`; the far
    /// ring and far cap blend half/half with `blend_child` when present.
    fn add_tube(
        &mut self,
        p0: [f64; 3],
        p1: [f64; 3],
        radius: f64,
        radial: usize,
        n_rings: usize,
        joint: u32,
        blend_child: Option<u32>,
    ) -> Vec<Vec<u32>> {
        let axis = sub3(p1, p0);
        let len = norm3(axis);
        let dir = scale3(axis, 1.0 / len);
        let up = if dir[1].abs() < 0.9 {
            [0.0, 1.0, 0.0]
        } else {
            [1.0, 0.0, 0.0]
        };
        let u = {
            let c = cross3(up, dir);
            scale3(c, 1.0 / norm3(c))
        };
        let w = cross3(dir, u);

        let far_weight = || -> Vec<(u32, f64)> {
            match blend_child {
                Some(k) => vec![(joint, 0.5), (k, 0.5)],
                None => vec![(joint, 1.0)],
            }
        };

        let mut rings = Vec::with_capacity(n_rings);
        for ri in 0..n_rings {
            let t = ri as f64 / (n_rings - 1) as f64;
            let center = add3(p0, scale3(axis, t));
            let mut ring = Vec::with_capacity(radial);
            for i in 0..radial {
                let ang = 2.0 * std::f64::consts::PI * i as f64 / radial as f64;
                let offset = add3(scale3(u, radius * ang.cos()), scale3(w, radius * ang.sin()));
                ring.push(self.positions.len() as u32);
                self.positions.push(add3(center, offset));
                if ri + 1 == n_rings {
                    self.weights.push(far_weight());
                } else {
                    self.weights.push(vec![(joint, 1.0)]);
                }
            }
            rings.push(ring);
        }
        // Side bands, wound outward.
        for ri in 0..n_rings - 1 {
            for i in 0..radial {
                let j = (i + 1) % radial;
                let (a, b) = (rings[ri][i], rings[ri][j]);
                let (c, d) = (rings[ri + 1][i], rings[ri + 1][j]);
                self.faces.push([a, c, d]);
                self.faces.push([a, d, b]);
            }
        }
        // Caps.
        let c0 = self.positions.len() as u32;
        self.positions.push(p0);
        self.weights.push(vec![(joint, 1.0)]);
        for i in 0..radial {
            let j = (i + 1) % radial;
            self.faces.push([c0, rings[0][i], rings[0][j]]);
        }
        let c1 = self.positions.len() as u32;
        self.positions.push(p1);
        self.weights.push(far_weight());
        for i in 0..radial {
            let j = (i + 1) % radial;
            self.faces.push([c1, rings[n_rings - 1][j], rings[n_rings - 1][i]]);
        }
        rings
    }
}

struct Geometry {
    positions: Vec<[f64; 3]>,
    faces: Vec<[u32; 3]>,
    weights: Vec<Vec<(u32, f64)>>,
    /// Regressor ring per joint.
    joint_rings: Vec<Vec<u32>>,
    left_hand_verts: Vec<u32>,
    right_hand_verts: Vec<u32>,
    head_verts: Vec<u32>,
    head_center: [f64; 3],
    /// Torso + leg tube vertices, the region the synthetic generator dresses.
    clothed_verts: Vec<u32>,
}

fn finger_chain(
    b: &mut MeshBuilder,
    sk: &Skeleton,
    wrist_joint: u32,
    hand_base: u32,
    finger: usize,
) -> [Vec<u32>; 3] {
    let wrist = sk.joints[wrist_joint as usize];
    let mcp_id = hand_base + finger as u32 * 3;
    let (mcp, pip, dip) = (
        sk.joints[mcp_id as usize],
        sk.joints[mcp_id as usize + 1],
        sk.joints[mcp_id as usize + 2],
    );
    let r = FINGER_RADIUS * sk.radius_scale;
    // Metacarpal belongs to the wrist; its far ring blends into the MCP.
    let _meta = b.add_tube(wrist, mcp, r * 1.3, FINGER_RADIAL, 2, wrist_joint, Some(mcp_id));
    let proximal = b.add_tube(mcp, pip, r, FINGER_RADIAL, 2, mcp_id, Some(mcp_id + 1));
    let middle = b.add_tube(pip, dip, r * 0.9, FINGER_RADIAL, 2, mcp_id + 1, Some(mcp_id + 2));
    // Distal segment past the last joint; tip direction continues the chain.
    let tip = add3(dip, scale3(sub3(dip, pip), FINGER_SEG_LEN[3] / FINGER_SEG_LEN[2]));
    let distal = b.add_tube(dip, tip, r * 0.8, FINGER_RADIAL, 2, mcp_id + 2, None);
    [
        proximal[0].clone(),
        middle[0].clone(),
        distal[0].clone(),
    ]
}

fn build_geometry(sk: &Skeleton) -> Geometry {
    let mut b = MeshBuilder::new();
    let n_joints = N_BODY_JOINTS + 2 * N_HAND_JOINTS;
    let mut joint_rings: Vec<Vec<u32>> = vec![Vec::new(); n_joints];
    let clothed_bones: [(u32, u32); 9] = [
        (0, 3),
        (0, 1),
        (0, 2),
        (1, 4),
        (2, 5),
        (3, 6),
        (4, 7),
        (5, 8),
        (6, 9),
    ];
    let mut clothed_verts = Vec::new();

    for &(j, k, radius) in &BODY_BONES {
        // The far ring blends into the child joint everywhere except the
        // terminal feet, which own no further geometry.
        let blend = if k == 10 || k == 11 { None } else { Some(k) };
        let start = b.positions.len() as u32;
        let rings = b.add_tube(
            sk.joints[j as usize],
            sk.joints[k as usize],
            radius * sk.radius_scale,
            BODY_RADIAL,
            3,
            j,
            blend,
        );
        let end = b.positions.len() as u32;
        // First child bone of `j` supplies j's regressor ring; terminal
        // joints use the far ring of their incoming bone.
        if joint_rings[j as usize].is_empty() {
            joint_rings[j as usize] = rings[0].clone();
        }
        // Terminal joints (feet, head, wrists) own no outgoing body bone;
        // the far ring of the incoming bone is centered exactly on them.
        if joint_rings[k as usize].is_empty() && matches!(k, 10 | 11 | 15 | 20 | 21) {
            joint_rings[k as usize] = rings[2].clone();
        }
        if clothed_bones.contains(&(j, k)) {
            clothed_verts.extend(start..end);
        }
    }

    // Head: a wider tube above the head joint, skinned to it.
    let head_start = b.positions.len() as u32;
    b.add_tube(
        sk.head_lo,
        sk.head_hi,
        sk.head_radius,
        HEAD_RADIAL,
        HEAD_RINGS,
        HEAD,
        None,
    );
    let head_verts: Vec<u32> = (head_start..b.positions.len() as u32).collect();

    // Hands.
    let mut left_hand_verts = Vec::new();
    let mut right_hand_verts = Vec::new();
    for (wrist, base, store) in [
        (LEFT_WRIST, N_BODY_JOINTS as u32, &mut left_hand_verts),
        (
            RIGHT_WRIST,
            (N_BODY_JOINTS + N_HAND_JOINTS) as u32,
            &mut right_hand_verts,
        ),
    ] {
        let start = b.positions.len() as u32;
        for f in 0..5 {
            let rings = finger_chain(&mut b, sk, wrist, base, f);
            let mcp = base as usize + f * 3;
            joint_rings[mcp] = rings[0].clone();
            joint_rings[mcp + 1] = rings[1].clone();
            joint_rings[mcp + 2] = rings[2].clone();
        }
        store.extend(start..b.positions.len() as u32);
    }

    let head_center = scale3(add3(sk.head_lo, sk.head_hi), 0.5);
    Geometry {
        positions: b.positions,
        faces: b.faces,
        weights: b.weights,
        joint_rings,
        left_hand_verts,
        right_hand_verts,
        head_verts,
        head_center,
        clothed_verts,
    }
}

fn smooth_ramp(x: f64, width: f64) -> f64 {
    1.0 / (1.0 + (-x / width).exp())
}

fn shape_fields(template: &[[f64; 3]], rng: &mut ChaCha8Rng) -> Vec<Vec<[f64; 3]>> {
    let mut fields = Vec::with_capacity(N_BETA);
    // 0: overall girth (radial from the vertical axis).
    fields.push(
        template
            .iter()
            .map(|p| [0.05 * p[0], 0.0, 0.05 * p[2]])
            .collect(),
    );
    // 1: stature (stretch about the pelvis height).
    fields.push(
        template
            .iter()
            .map(|p| [0.0, 0.08 * (p[1] - 0.95), 0.0])
            .collect(),
    );
    // 2: torso girth.
    fields.push(
        template
            .iter()
            .map(|p| {
                let g = (-((p[1] - 1.15) / 0.25).powi(2)).exp();
                [0.06 * p[0] * g, 0.0, 0.06 * p[2] * g]
            })
            .collect(),
    );
    // 3: leg length.
    fields.push(
        template
            .iter()
            .map(|p| {
                let below = smooth_ramp(0.9 - p[1], 0.05);
                [0.0, -0.07 * below * (0.9 - p[1]).max(0.0).min(1.0), 0.0]
            })
            .collect(),
    );
    // 4: arm length.
    fields.push(
        template
            .iter()
            .map(|p| {
                let out = smooth_ramp(p[0].abs() - 0.2, 0.05);
                [0.06 * p[0] * out, 0.0, 0.0]
            })
            .collect(),
    );
    // 5: head size (radial about the head center).
    let head_c = [0.0, 1.6, 0.0];
    fields.push(
        template
            .iter()
            .map(|p| {
                let d = sub3(*p, head_c);
                let g = (-(norm3(d) / 0.18).powi(2)).exp();
                scale3(d, 0.12 * g)
            })
            .collect(),
    );
    // 6..9: seeded smooth plane-wave fields.
    for _ in 6..N_BETA {
        let mut waves = Vec::new();
        for _ in 0..3 {
            let n = random_unit(rng);
            let k = [
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            ];
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            waves.push((n, k, phase));
        }
        fields.push(
            template
                .iter()
                .map(|p| {
                    let mut d = [0.0; 3];
                    for (n, k, phase) in &waves {
                        let s = 0.012 * (k[0] * p[0] + k[1] * p[1] + k[2] * p[2] + phase).sin();
                        d = add3(d, scale3(*n, s));
                    }
                    d
                })
                .collect(),
        );
    }
    fields
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        let n = norm3(v);
        if n > 1e-3 && n <= 1.0 {
            return scale3(v, 1.0 / n);
        }
    }
}

fn expression_fields(
    template: &[[f64; 3]],
    face_verts: &[u32],
    head_center: [f64; 3],
) -> Vec<Vec<[f64; 3]>> {
    // Gaussian bumps along +z, supported on the face region only so
    // expression never moves joint regressor rings.
    let centers = [
        add3(head_center, [0.0, 0.0, 0.06]),
        add3(head_center, [0.03, 0.03, 0.05]),
        add3(head_center, [-0.03, -0.02, 0.05]),
    ];
    centers
        .iter()
        .map(|c| {
            let mut field = vec![[0.0; 3]; template.len()];
            for &v in face_verts {
                let p = template[v as usize];
                let g = (-(norm3(sub3(p, *c)) / 0.06).powi(2)).exp();
                field[v as usize] = [0.0, 0.002 * g, 0.006 * g];
            }
            field
        })
        .collect()
}

fn hand_basis(sign: f64, rng: &mut ChaCha8Rng) -> HandBasis {
    // Columns: curl-all, spread, proximal curl, distal curl, twist, wave.
    let mut matrix = vec![0.0; N_HAND_JOINTS * 3 * N_HAND_BASIS];
    let mut set = |joint: usize, axis: usize, comp: usize, val: f64| {
        matrix[(joint * 3 + axis) * N_HAND_BASIS + comp] = val;
    };
    for f in 0..5 {
        let spread = (f as f64 - 2.0) / 2.0;
        for s in 0..3 {
            let j = f * 3 + s;
            let depth = [0.9, 0.7, 0.5][s];
            set(j, 2, 0, -sign * depth); // curl about z
            if s == 0 {
                set(j, 1, 1, sign * 0.3 * spread); // spread about y
                set(j, 2, 2, -sign * 0.8); // proximal-only curl
                set(j, 0, 4, 0.2 * spread); // twist
            } else {
                set(j, 2, 3, -sign * 0.6); // distal curl
            }
            set(j, 2, 5, -sign * 0.4 * (f as f64 * 1.3 + s as f64 * 0.7).sin());
        }
    }
    // Tiny seeded mixing keeps the basis full rank.
    for f in 0..5 {
        for s in 0..3 {
            let j = f * 3 + s;
            for comp in 0..N_HAND_BASIS {
                let jitter: f64 = rng.random_range(-0.01..0.01);
                matrix[(j * 3 + 2) * N_HAND_BASIS + comp] += jitter;
            }
        }
    }
    HandBasis {
        matrix,
        n_joints: N_HAND_JOINTS,
        n_latent: N_HAND_BASIS,
    }
}

/// Builds the deterministic toy model for a seed.
pub fn toy_model(seed: u64) -> BodyModel {
    let adult = skeleton([1.0, 1.0, 1.0], 1.0, 1.0, 1.0);
    // Infant proportions: shorter everywhere, limbs shortest, head large.
    let child = skeleton([0.55, 0.48, 0.55], 0.55, 0.62, 1.35);

    let geo = build_geometry(&adult);
    let child_geo = build_geometry(&child);
    assert_eq!(geo.positions.len(), child_geo.positions.len());
    assert_eq!(geo.faces.len(), child_geo.faces.len());

    let n_joints = N_BODY_JOINTS + 2 * N_HAND_JOINTS;
    let joint_regressor: Vec<Vec<(u32, f64)>> = geo
        .joint_rings
        .iter()
        .cloned()
        .map(|ring| {
            let w = 1.0 / ring.len() as f64;
            ring.into_iter().map(|v| (v, w)).collect()
        })
        .collect();

    let mut parents: Vec<Option<u32>> = BODY_PARENTS
        .iter()
        .map(|&p| if p < 0 { None } else { Some(p as u32) })
        .collect();
    for base in [N_BODY_JOINTS as u32, (N_BODY_JOINTS + N_HAND_JOINTS) as u32] {
        let wrist = if base == N_BODY_JOINTS as u32 {
            LEFT_WRIST
        } else {
            RIGHT_WRIST
        };
        for f in 0..5u32 {
            parents.push(Some(wrist));
            parents.push(Some(base + f * 3));
            parents.push(Some(base + f * 3 + 1));
        }
    }

    // Face region: the 60 front-most head-tube vertices (largest z); the
    // first 51 of those, in the same frontness order, are the landmarks.
    let mut by_frontness: Vec<u32> = geo.head_verts.clone();
    by_frontness.sort_by(|&a, &b| {
        let za = geo.positions[a as usize][2];
        let zb = geo.positions[b as usize][2];
        zb.partial_cmp(&za).unwrap().then(a.cmp(&b))
    });
    let face_verts: Vec<u32> = by_frontness.iter().copied().take(60).collect();
    let face_landmark_verts: Vec<u32> =
        face_verts.iter().copied().take(N_FACE_LANDMARKS).collect();

    let in_set = |set: &[u32], v: u32| set.binary_search(&v).is_ok();
    let mut sorted_face = face_verts.clone();
    sorted_face.sort_unstable();
    let mut sorted_lh = geo.left_hand_verts.clone();
    sorted_lh.sort_unstable();
    let mut sorted_rh = geo.right_hand_verts.clone();
    sorted_rh.sort_unstable();
    let body_verts: Vec<u32> = (0..geo.positions.len() as u32)
        .filter(|&v| {
            !in_set(&sorted_face, v) && !in_set(&sorted_lh, v) && !in_set(&sorted_rh, v)
        })
        .collect();

    let part_sets = PartSets {
        body_joints: (0..N_BODY_JOINTS as u32).collect(),
        left_hand_joints: (N_BODY_JOINTS as u32..(N_BODY_JOINTS + N_HAND_JOINTS) as u32)
            .collect(),
        right_hand_joints: ((N_BODY_JOINTS + N_HAND_JOINTS) as u32..n_joints as u32).collect(),
        face_landmark_verts,
        body_verts,
        left_hand_verts: geo.left_hand_verts.clone(),
        right_hand_verts: geo.right_hand_verts.clone(),
        face_verts,
        pelvis: PELVIS,
        left_wrist: LEFT_WRIST,
        right_wrist: RIGHT_WRIST,
        neck: NECK,
        bends: vec![
            BendSpec {
                joint: 4,
                axis: 0,
                sign: -1.0,
            },
            BendSpec {
                joint: 5,
                axis: 0,
                sign: -1.0,
            },
            BendSpec {
                joint: 18,
                axis: 1,
                sign: 1.0,
            },
            BendSpec {
                joint: 19,
                axis: 1,
                sign: -1.0,
            },
        ],
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape_basis = shape_fields(&geo.positions, &mut rng);
    let expr_basis = expression_fields(&geo.positions, &part_sets.face_verts, geo.head_center);
    let left_hand_basis = hand_basis(1.0, &mut rng);
    let right_hand_basis = hand_basis(-1.0, &mut rng);

    let model = BodyModel {
        dims: ModelDims {
            n_vertices: geo.positions.len(),
            n_joints,
            n_body_joints: N_BODY_JOINTS,
            n_hand_joints: N_HAND_JOINTS,
            n_beta: N_BETA,
            n_psi: N_PSI,
            n_hand_basis: N_HAND_BASIS,
        },
        adult_template: geo.positions,
        child_template: child_geo.positions,
        faces: geo.faces,
        shape_basis,
        expr_basis,
        joint_regressor,
        skin_weights: geo.weights,
        parents,
        left_hand_basis,
        right_hand_basis,
        part_sets,
    };
    model.validate().expect("toy model satisfies invariants");
    model
}

/// Torso/leg vertex ids the synthetic generator treats as clothed.
pub fn clothed_region(_seed: u64) -> Vec<u32> {
    let adult = skeleton([1.0, 1.0, 1.0], 1.0, 1.0, 1.0);
    build_geometry(&adult).clothed_verts
}
