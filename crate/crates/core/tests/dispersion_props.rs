use fkwave::dispersion::{complex_tolerance, eval_l, resonance_velocities, is_resonant, RootBranch, RootSet, REAL_ROOT_TOL};
use fkwave::ModelParams;
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn roots_solve_the_dispersion_relation(v in 0.3f64..1.4, mu in 0.25f64..2.0, alpha in prop_oneof![Just(0.0), 0.01f64..0.5]) {
        let p = ModelParams::new(mu, alpha).unwrap();
        prop_assume!(!is_resonant(v, &p));
        let set = RootSet::compute(v, &p, 12).unwrap();
        for r in &set.roots {
            let res = eval_l(r.k, v, &p).norm();
            let tol = if r.k.im == 0.0 { REAL_ROOT_TOL } else { complex_tolerance(r.k, v, &p) };
            prop_assert!(res <= tol, "|L({})| = {res:e}", r.k);
            match r.branch {
                RootBranch::UpperHalf => prop_assert!(r.k.im > 0.0),
                RootBranch::LowerHalf => prop_assert!(r.k.im < 0.0),
                _ => prop_assert_eq!(r.k.im, 0.0),
            }
        }
    }

    #[test]
    fn conservative_roots_are_mirror_symmetric(v in 0.3f64..1.4, mu in 0.25f64..2.0) {
        let p = ModelParams::conservative(mu).unwrap();
        prop_assume!(!is_resonant(v, &p));
        let set = RootSet::compute(v, &p, 10).unwrap();
        let has = |k: Complex64| set.roots.iter().any(|r| (r.k - k).norm() < 1e-8 * (1.0 + k.norm()));
        for r in set.roots.iter().filter(|r| r.k.im != 0.0) {
            prop_assert!(has(r.k.conj()), "missing conjugate of {}", r.k);
            prop_assert!(has(-r.k), "missing negative of {}", r.k);
        }
    }
}

#[test]
fn first_resonance_is_double_root() {
    let p = ModelParams::conservative(1.0).unwrap();
    let r = resonance_velocities(&p, 1).unwrap()[0];
    assert!((r.velocity - 0.244415).abs() < 1e-6);
    let k = Complex64::new(r.k, 0.0);
    assert!(eval_l(k, r.velocity, &p).norm() < 1e-10);
    assert!(fkwave::dispersion::eval_lk(k, r.velocity, &p).norm() < 1e-8);
    assert!(is_resonant(r.velocity, &p));
}
