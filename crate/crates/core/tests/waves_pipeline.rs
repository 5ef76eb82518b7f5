use fkwave::ac::{AcSolution, KernelMethod};
use fkwave::cache;
use fkwave::waves::*;
use fkwave::{Error, ModelParams};

fn ac(v: f64) -> std::sync::Arc<AcSolution> {
    let p = ModelParams::conservative(1.0).unwrap();
    AcSolution::get(v, &p, 400, KernelMethod::Hybrid).unwrap()
}

#[test]
fn collocation_matrix_is_weighted_toeplitz() {
    let ac = ac(0.3);
    let (z, m) = (0.05, 21);
    let q = build_q(&ac, z, m).unwrap();
    let w = trapezoid_weights(z, m);
    let mesh = uniform_mesh(z, m);
    for i in 0..m {
        for j in 0..m {
            let expect = w[j] * ac.q(mesh[i] - mesh[j]).unwrap();
            assert!((q[(i, j)] - expect).abs() < 1e-10 * (1.0 + expect.abs()), "({i}, {j})");
            if i > 0 && j > 0 {
                let a = q[(i, j)] / w[j];
                let b = q[(i - 1, j - 1)] / w[j - 1];
                assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
            }
        }
    }
}

#[test]
fn shape_is_normalized_at_determinant_root() {
    let ac = ac(0.3);
    let zs = find_z(&ac, (0.0, 0.2), 100).unwrap();
    let (shape, ratio) = solve_shape(&ac, zs[0], 100).unwrap();
    assert!((shape.integral() - 1.0).abs() < 1e-12);
    assert!(ratio < 1e-6);
    assert!((zs[0] - 0.0655).abs() < 1e-3, "z = {}", zs[0]);
}

#[test]
fn classical_wave_above_threshold() {
    let p = ModelParams::conservative(1.0).unwrap();
    let w = admissible_wave(0.5, &p, &WaveOptions::default()).unwrap();
    assert_eq!(w.branch, Branch::Ac);
    assert_eq!(w.z, 0.0);
    assert!((w.sigma - w.sigma_ac).abs() < 1e-14);
    // far field
    assert!((w.u(-60.3).unwrap() - (w.sigma + 1.0)).abs() < 0.3);
    assert!((w.u(60.0).unwrap() - (w.sigma - 1.0)).abs() < 1e-6);
}

#[test]
fn new_wave_has_zero_plateau_and_signs() {
    let p = ModelParams::conservative(1.0).unwrap();
    let w = admissible_wave(0.3, &p, &WaveOptions::default()).unwrap();
    assert_eq!(w.branch, Branch::NewType);
    assert!(w.residual <= PLATEAU_TOL);
    assert!(sign_pattern_holds(&w, 20.0, PLATEAU_TOL).unwrap());
    assert!(w.u(-w.z - 0.5).unwrap() > 0.0 && w.u(w.z + 0.5).unwrap() < 0.0);
    // derivative against a difference quotient
    let (x, h) = (1.3, 1e-5);
    let fd = (w.u(x + h).unwrap() - w.u(x - h).unwrap()) / (2.0 * h);
    assert!((w.du(x).unwrap() - fd).abs() < 1e-6);
}

#[test]
fn pipeline_is_deterministic() {
    let p = ModelParams::conservative(1.0).unwrap();
    let a = kinetic_point(0.34, &p, &WaveOptions::default()).unwrap();
    cache::clear();
    let b = kinetic_point(0.34, &p, &WaveOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn resonant_velocities_are_skipped() {
    let p = ModelParams::conservative(1.0).unwrap();
    let v1 = fkwave::dispersion::resonance_velocities(&p, 1).unwrap()[0].velocity;
    let out = kinetic_curve(&[v1], &p, &WaveOptions::default());
    assert_eq!(out, vec![CurveEntry::SkippedResonant(v1)]);
}

#[test]
fn bad_inputs_are_rejected() {
    let ac = ac(0.3);
    assert!(matches!(build_q(&ac, 0.0, 10), Err(Error::InvalidParameter(_))));
    assert!(matches!(find_z(&ac, (0.5, 0.1), 10), Err(Error::InvalidParameter(_))));
}
