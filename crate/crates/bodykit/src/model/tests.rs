use approx::assert_relative_eq;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::toy::toy_model;
use super::*;

fn random_params(model: &BodyModel, rng: &mut ChaCha8Rng, scale: f64) -> BodyParams {
    let mut p = BodyParams::rest(model, "test");
    for aa in &mut p.theta_body {
        for x in aa.iter_mut() {
            *x = rng.random_range(-0.5..0.5) * scale;
        }
    }
    for x in &mut p.z_left {
        *x = rng.random_range(-1.0..1.0) * scale;
    }
    for x in &mut p.z_right {
        *x = rng.random_range(-1.0..1.0) * scale;
    }
    for x in &mut p.beta {
        *x = rng.random_range(-1.5..1.5) * scale;
    }
    for x in &mut p.psi {
        *x = rng.random_range(-1.0..1.0) * scale;
    }
    p.alpha = rng.random_range(0.2..1.0);
    p.trans = [
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    ];
    p
}

/// Independent straightforward LBS reimplementation: 4x4 homogeneous
/// matrices, chains walked from each joint up to the root.
fn brute_force_forward(model: &BodyModel, params: &BodyParams) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
    type M4 = [[f64; 4]; 4];
    fn mul4(a: &M4, b: &M4) -> M4 {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for (k, bk) in b.iter().enumerate() {
                    out[i][j] += a[i][k] * bk[j];
                }
            }
        }
        out
    }
    fn apply4(m: &M4, v: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, row) in m.iter().take(3).enumerate() {
            out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3];
        }
        out
    }
    fn rot_to_m4(r: [[f64; 3]; 3], t: [f64; 3]) -> M4 {
        [
            [r[0][0], r[0][1], r[0][2], t[0]],
            [r[1][0], r[1][1], r[1][2], t[1]],
            [r[2][0], r[2][1], r[2][2], t[2]],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }

    // Shaped template, computed coordinate by coordinate.
    let v_count = model.dims.n_vertices;
    let mut shaped = vec![[0.0; 3]; v_count];
    for vi in 0..v_count {
        for k in 0..3 {
            let mut x = params.alpha * model.adult_template[vi][k]
                + (1.0 - params.alpha) * model.child_template[vi][k];
            for (bi, &b) in params.beta.iter().enumerate() {
                x += b * model.shape_basis[bi][vi][k];
            }
            for (pi, &psi) in params.psi.iter().enumerate() {
                x += psi * model.expr_basis[pi][vi][k];
            }
            shaped[vi][k] = x;
        }
    }
    let mut rest = vec![[0.0; 3]; model.dims.n_joints];
    for (j, row) in model.joint_regressor.iter().enumerate() {
        for &(v, w) in row {
            for k in 0..3 {
                rest[j][k] += w * shaped[v as usize][k];
            }
        }
    }

    // Local rotation per joint via the library's rodrigues (the brute force
    // targets the chaining and blending, not the exponential map).
    let left = model.left_hand_basis.expand::<f64>(&params.z_left);
    let right = model.right_hand_basis.expand::<f64>(&params.z_right);
    let nb = model.dims.n_body_joints;
    let nh = model.dims.n_hand_joints;
    let local: Vec<M4> = (0..model.dims.n_joints)
        .map(|j| {
            let aa = if j < nb {
                params.theta_body[j]
            } else if j < nb + nh {
                left[j - nb]
            } else {
                right[j - nb - nh]
            };
            let t = match model.parents[j] {
                None => rest[j],
                Some(p) => {
                    let p = p as usize;
                    [
                        rest[j][0] - rest[p][0],
                        rest[j][1] - rest[p][1],
                        rest[j][2] - rest[p][2],
                    ]
                }
            };
            rot_to_m4(crate::num::rodrigues(aa), t)
        })
        .collect();

    // World transform by walking the chain root-down for every joint.
    let world: Vec<M4> = (0..model.dims.n_joints)
        .map(|j| {
            let mut chain = vec![j];
            let mut cur = j;
            while let Some(p) = model.parents[cur] {
                chain.push(p as usize);
                cur = p as usize;
            }
            let mut m = [[0.0; 4]; 4];
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            for &link in chain.iter().rev() {
                m = mul4(&m, &local[link]);
            }
            m
        })
        .collect();

    let vertices: Vec<[f64; 3]> = (0..v_count)
        .map(|vi| {
            let mut acc = [0.0; 3];
            for &(j, w) in &model.skin_weights[vi] {
                let j = j as usize;
                let rel = [
                    shaped[vi][0] - rest[j][0],
                    shaped[vi][1] - rest[j][1],
                    shaped[vi][2] - rest[j][2],
                ];
                let posed = apply4(&world[j], rel);
                for k in 0..3 {
                    acc[k] += w * posed[k];
                }
            }
            [
                acc[0] + params.trans[0],
                acc[1] + params.trans[1],
                acc[2] + params.trans[2],
            ]
        })
        .collect();
    let joints: Vec<[f64; 3]> = world
        .iter()
        .map(|m| {
            [
                m[0][3] + params.trans[0],
                m[1][3] + params.trans[1],
                m[2][3] + params.trans[2],
            ]
        })
        .collect();
    (vertices, joints)
}

#[test]
fn interpolate_endpoints_are_exact() {
    let model = toy_model(1);
    assert_eq!(model.interpolate_template(1.0).unwrap(), model.adult_template);
    assert_eq!(model.interpolate_template(0.0).unwrap(), model.child_template);
    assert!(model.interpolate_template(1.5).is_err());
    assert!(model.interpolate_template(-0.1).is_err());
}

#[test]
fn interpolate_is_linear_arithmetic() {
    // T_A vertex (1,1,1), T_C vertex (0,0,0), alpha 0.25 -> (0.25, 0.25, 0.25)
    let mut model = toy_model(1);
    model.adult_template[0] = [1.0, 1.0, 1.0];
    model.child_template[0] = [0.0, 0.0, 0.0];
    let t = model.interpolate_template(0.25).unwrap();
    assert_eq!(t[0], [0.25, 0.25, 0.25]);
}

#[test]
fn interpolate_midpoint_equals_average() {
    let model = toy_model(2);
    let mid = model.interpolate_template(0.5).unwrap();
    for (m, (a, c)) in mid
        .iter()
        .zip(model.adult_template.iter().zip(&model.child_template))
    {
        for k in 0..3 {
            assert_relative_eq!(m[k], 0.5 * (a[k] + c[k]), epsilon = 1e-12);
        }
    }
}

#[test]
fn rest_pose_returns_adult_template() {
    let model = toy_model(3);
    let posed = model.forward(&BodyParams::rest(&model, "p")).unwrap();
    for (v, t) in posed.vertices.iter().zip(&model.adult_template) {
        for k in 0..3 {
            assert_relative_eq!(v[k], t[k], epsilon = 1e-9);
        }
    }
}

#[test]
fn translation_shifts_everything_exactly() {
    let model = toy_model(3);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let p0 = random_params(&model, &mut rng, 1.0);
    let mut p1 = p0.clone();
    p1.trans = [p0.trans[0] + 1.0, p0.trans[1] + 2.0, p0.trans[2] + 3.0];
    let a = model.forward(&p0).unwrap();
    let b = model.forward(&p1).unwrap();
    for (va, vb) in a.vertices.iter().zip(&b.vertices) {
        assert_relative_eq!(vb[0] - va[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(vb[1] - va[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(vb[2] - va[2], 3.0, epsilon = 1e-12);
    }
    for (ja, jb) in a.joints.iter().zip(&b.joints) {
        assert_relative_eq!(jb[0] - ja[0], 1.0, epsilon = 1e-12);
    }
}

#[test]
fn forward_matches_brute_force_lbs() {
    let model = toy_model(4);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..5 {
        let params = random_params(&model, &mut rng, 1.0);
        let posed = model.forward(&params).unwrap();
        let (bf_verts, bf_joints) = brute_force_forward(&model, &params);
        for (v, b) in posed.vertices.iter().zip(&bf_verts) {
            for k in 0..3 {
                assert_relative_eq!(v[k], b[k], epsilon = 1e-9);
            }
        }
        for (j, b) in posed.joints.iter().zip(&bf_joints) {
            for k in 0..3 {
                assert_relative_eq!(j[k], b[k], epsilon = 1e-9);
            }
        }
    }
}

#[test]
fn vertices_affine_in_beta_and_psi_at_fixed_pose() {
    let model = toy_model(5);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let base = random_params(&model, &mut rng, 1.0);
    let mut p1 = base.clone();
    let mut p2 = base.clone();
    let mut p12 = base.clone();
    let mut p0 = base.clone();
    for x in &mut p0.beta {
        *x = 0.0;
    }
    for x in &mut p0.psi {
        *x = 0.0;
    }
    for (k, x) in p1.beta.iter_mut().enumerate() {
        *x = 0.1 * (k as f64 + 1.0);
    }
    for x in &mut p1.psi {
        *x = 0.0;
    }
    for (k, x) in p2.beta.iter_mut().enumerate() {
        *x = -0.05 * (k as f64 + 2.0);
    }
    for (k, x) in p2.psi.iter_mut().enumerate() {
        *x = 0.3 * (k as f64 + 1.0);
    }
    for k in 0..p12.beta.len() {
        p12.beta[k] = p1.beta[k] + p2.beta[k];
    }
    for k in 0..p12.psi.len() {
        p12.psi[k] = p1.psi[k] + p2.psi[k];
    }
    let f = |p: &BodyParams| model.forward(p).unwrap().vertices;
    let (v1, v2, v12, v0) = (f(&p1), f(&p2), f(&p12), f(&p0));
    for i in 0..v0.len() {
        for k in 0..3 {
            let resid = v12[i][k] - v1[i][k] - v2[i][k] + v0[i][k];
            assert!(resid.abs() < 1e-9, "affinity residual {resid}");
        }
    }
}

#[test]
fn joint_regression_commutes_with_translation() {
    let model = toy_model(6);
    let mut p = BodyParams::rest(&model, "p");
    p.trans = [0.4, -0.2, 1.7];
    let posed = model.forward(&p).unwrap();
    let rest = model.forward(&BodyParams::rest(&model, "p")).unwrap();
    for (a, b) in posed.joints.iter().zip(&rest.joints) {
        assert_relative_eq!(a[0] - b[0], 0.4, epsilon = 1e-12);
        assert_relative_eq!(a[1] - b[1], -0.2, epsilon = 1e-12);
        assert_relative_eq!(a[2] - b[2], 1.7, epsilon = 1e-12);
    }
}

#[test]
fn expand_hand_pose_zero_and_linearity() {
    let model = toy_model(7);
    let zeros = vec![0.0; model.dims.n_hand_basis];
    for rot in model.expand_hand_pose(Hand::Left, &zeros).unwrap() {
        assert_eq!(rot, [0.0; 3]);
    }
    let mut e1 = zeros.clone();
    e1[0] = 1.0;
    let mut e1x2 = zeros.clone();
    e1x2[0] = 2.0;
    let a = model.expand_hand_pose(Hand::Right, &e1).unwrap();
    let b = model.expand_hand_pose(Hand::Right, &e1x2).unwrap();
    for (ra, rb) in a.iter().zip(&b) {
        for k in 0..3 {
            assert_relative_eq!(rb[k], 2.0 * ra[k], epsilon = 1e-12);
        }
    }
}

#[test]
fn expand_hand_pose_matches_matrix_vector_product() {
    let model = toy_model(8);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let z: Vec<f64> = (0..model.dims.n_hand_basis)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let rots = model.expand_hand_pose(Hand::Left, &z).unwrap();
    let basis = &model.left_hand_basis;
    for (j, rot) in rots.iter().enumerate() {
        for axis in 0..3 {
            let row = (j * 3 + axis) * basis.n_latent;
            let want: f64 = (0..basis.n_latent)
                .map(|k| basis.matrix[row + k] * z[k])
                .sum();
            assert_relative_eq!(rot[axis], want, epsilon = 1e-12);
        }
    }
}

#[test]
fn directional_derivatives_match_central_differences() {
    let model = toy_model(9);
    let layout = PackedLayout::of(&model);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let params = random_params(&model, &mut rng, 0.7);
    let x0 = layout.pack(&params);
    let h = 1e-5;
    // Probe a spread of parameters: translation, several rotations, hand
    // latents, shape, expression, plus the child blend in the last slot.
    let probes: Vec<usize> = vec![
        0,
        2,
        3,
        4,
        10,
        25,
        layout.z_left_range().start,
        layout.z_right_range().start + 3,
        layout.beta_range().start,
        layout.beta_range().start + 5,
        layout.psi_range().start,
        layout.len(), // alpha
    ];
    for &idx in &probes {
        let mut dir = vec![0.0; layout.len() + 1];
        dir[idx] = 1.0;
        let (dv, dj) = model.forward_directional(&params, &dir);
        let eval = |delta: f64| -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
            if idx == layout.len() {
                model.forward_generic::<f64>(&x0, params.alpha + delta)
            } else {
                let mut x = x0.clone();
                x[idx] += delta;
                model.forward_generic::<f64>(&x, params.alpha)
            }
        };
        let (vp, jp) = eval(h);
        let (vm, jm) = eval(-h);
        let mut checked = 0usize;
        for (i, d) in dv.iter().enumerate() {
            for k in 0..3 {
                let fd = (vp[i][k] - vm[i][k]) / (2.0 * h);
                let denom = d[k].abs().max(fd.abs()).max(1e-6);
                assert!(
                    (d[k] - fd).abs() / denom < 1e-4,
                    "vertex {i} coord {k} param {idx}: analytic {} vs fd {fd}",
                    d[k]
                );
                checked += 1;
            }
        }
        for (i, d) in dj.iter().enumerate() {
            for k in 0..3 {
                let fd = (jp[i][k] - jm[i][k]) / (2.0 * h);
                let denom = d[k].abs().max(fd.abs()).max(1e-6);
                assert!((d[k] - fd).abs() / denom < 1e-4);
            }
        }
        assert!(checked > 0);
    }
}

#[test]
fn params_validation_rejects_bad_alpha_and_nan() {
    let model = toy_model(10);
    let mut p = BodyParams::rest(&model, "p");
    p.alpha = 1.2;
    assert!(p.validate(&model).is_err());
    p.alpha = 0.5;
    p.trans[0] = f64::NAN;
    assert!(p.validate(&model).is_err());
}

#[test]
fn toy_model_regressor_reproduces_skeleton() {
    let model = toy_model(11);
    let rest = model.forward(&BodyParams::rest(&model, "p")).unwrap();
    // Pelvis sits at its skeleton position.
    assert_relative_eq!(rest.joints[0][1], 0.95, epsilon = 1e-9);
    // Wrist anchors exist and are distinct left/right.
    let lw = rest.joints[model.part_sets.left_wrist as usize];
    let rw = rest.joints[model.part_sets.right_wrist as usize];
    assert!(lw[0] > 0.5 && rw[0] < -0.5);
    assert_eq!(
        model.part_sets.face_landmark_verts.len(),
        super::toy::N_FACE_LANDMARKS
    );
}

#[test]
fn child_template_is_smaller() {
    let model = toy_model(12);
    let height = |t: &[[f64; 3]]| {
        let ys: Vec<f64> = t.iter().map(|p| p[1]).collect();
        ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - ys.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let ha = height(&model.adult_template);
    let hc = height(&model.child_template);
    assert!(hc < 0.65 * ha, "child {hc} vs adult {ha}");
}
