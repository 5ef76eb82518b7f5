use fkwave::bifurcation::{quartic_coefficients, shape_linear_of, shape_quadratic_of, z_linear_of, z_quartic_of, KernelJet};
use fkwave::params::ModelParams;
use proptest::prelude::*;

fn jet(q0: f64, qp: f64, qm: f64, q2: f64) -> KernelJet {
    KernelJet { velocity: 0.3, q0, q_plus: qp, q_minus: qm, q2 }
}

proptest! {
    #[test]
    fn linear_shape_is_normalized_and_positive(q0 in -0.5f64..-1e-4, qp in 0.1f64..10.0, qm in -20.0f64..-0.1) {
        let j = jet(q0, qp, qm, 0.0);
        let s = shape_linear_of(&j);
        prop_assert!(s.z > 0.0);
        prop_assert!((s.integral() - 1.0).abs() < 1e-12);
        prop_assert!(s.delta_plus.unwrap() > 0.0 && s.delta_minus.unwrap() > 0.0);
    }

    #[test]
    fn quartic_without_curvature_is_linear(q0 in -0.5f64..-1e-4, qp in 0.1f64..10.0, qm in -20.0f64..-0.1) {
        let j = jet(q0, qp, qm, 0.0);
        let zl = z_linear_of(&j);
        prop_assert!((z_quartic_of(&j).unwrap() - zl).abs() <= 1e-10 * zl);
    }

    #[test]
    fn quadratic_shape_mass_is_one(q0 in -0.2f64..-1e-4, qp in 0.5f64..10.0, qm in -20.0f64..-0.5, q2 in -5.0f64..5.0) {
        let j = jet(q0, qp, qm, q2);
        if let Ok(s) = shape_quadratic_of(&j) {
            let zeta = s.weights[0];
            let mass = s.delta_plus.unwrap() + s.delta_minus.unwrap() + 2.0 * s.z * zeta;
            prop_assert!((mass - 1.0).abs() < 1e-10, "mass {mass}");
            let c = quartic_coefficients(&j);
            let p: f64 = c.iter().rev().fold(0.0, |acc, a| acc * s.z + a);
            let scale: f64 = c.iter().enumerate().map(|(i, a)| (a * s.z.powi(i as i32)).abs()).sum();
            prop_assert!(p.abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn z_linear_sign_follows_q0(q0 in -0.5f64..0.5, qp in 0.1f64..10.0, qm in -20.0f64..-0.1) {
        prop_assume!(q0.abs() > 1e-9);
        prop_assert_eq!(z_linear_of(&jet(q0, qp, qm, 0.0)) > 0.0, q0 < 0.0);
    }

    #[test]
    fn jump_defect_vanishes_on_identity(v in 0.2f64..1.0, mu in 0.25f64..2.0, qm in -20.0f64..-0.1) {
        let p = ModelParams::conservative(mu).unwrap();
        let j = KernelJet { velocity: v, q0: 0.0, q_plus: qm + 2.0 * mu / (v * v), q_minus: qm, q2: 0.0 };
        prop_assert!(j.jump_defect(&p).abs() < 1e-12 * (1.0 + qm.abs() + 2.0 * mu / (v * v)));
    }
}

#[test]
fn kernel_data_near_threshold() {
    let p = ModelParams::conservative(1.0).unwrap();
    let below = fkwave::bifurcation::kernel_jet(0.3, &p, 400).unwrap();
    let above = fkwave::bifurcation::kernel_jet(0.4, &p, 400).unwrap();
    assert!(below.q0 < 0.0 && above.q0 > 0.0);
    let near = fkwave::bifurcation::kernel_jet(0.355, &p, 400).unwrap();
    assert!(near.q_plus > 0.0 && near.q_minus < 0.0);
    assert!(z_linear_of(&near) > 0.0);
    let v0 = fkwave::bifurcation::threshold_v0(&p).unwrap();
    let at = fkwave::bifurcation::z_linear(v0, &p, 400).unwrap();
    assert!(at.abs() < 1e-4, "z_linear(V0) = {at}");
}

#[test]
fn closed_form_matches_identity_above_first_resonance() {
    for mu in [0.25, 0.5, 1.0, 2.0] {
        let p = ModelParams::conservative(mu).unwrap();
        for v in [0.6, 0.8, 1.0] {
            let (qp, qm) = fkwave::bifurcation::closed_form_slopes(v, &p).unwrap();
            let j = fkwave::bifurcation::kernel_jet(v, &p, 400).unwrap();
            assert!((qp - j.q_plus).abs() < 1e-9 && (qm - j.q_minus).abs() < 1e-9, "mu {mu} V {v}");
        }
    }
    let p = ModelParams::conservative(1.0).unwrap();
    assert!(matches!(
        fkwave::bifurcation::closed_form_slopes(0.2, &p),
        Err(fkwave::Error::RegimeMismatch { .. })
    ));
}

#[test]
fn large_viscosity_has_no_threshold() {
    let p = ModelParams::new(1.0, 4.0).unwrap();
    assert!(matches!(fkwave::bifurcation::threshold_v0(&p), Err(fkwave::Error::NoSignChange { .. })));
}
