use std::sync::Arc;

use proptest::prelude::*;
use rieszlab::domains::{mushroom_build, MushroomSpec};
use rieszlab::fields::{domain_average, lp_norm};
use rieszlab::harness::families::rough_random;
use rieszlab::kernels::{
    admissible_p_max, closed_form_h, fit_h_constant, h_series, sum_condition_sup, varphi_control_estimate, ConditionInputs, Preset,
    PresetParams, DEFAULT_SERIES_TERMS,
};
use rieszlab::orlicz::{delta2_estimate, luxemburg_norm, modular, OrliczFunction};
use rieszlab::potentials::{maximal_function, maximal_function_field, riesz_potential, PotentialOptions, SingularRule};
use rieszlab::{DomainGeometry, GridField, LogGrid, MaskedGrid, PhiKernel};

fn square(res: usize) -> Arc<MaskedGrid> {
    MaskedGrid::discretize(&DomainGeometry::cube(2, 0.0, 1.0), &[res, res]).unwrap()
}

fn orlicz_family() -> impl Strategy<Value = OrliczFunction> {
    prop_oneof![
        (1.0f64..4.0).prop_map(OrliczFunction::power),
        Just(OrliczFunction::llogl()),
        (1.2f64..3.0, 0.0f64..2.0).prop_map(|(q, g)| OrliczFunction::power_over_log(q, g, std::f64::consts::E).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn luxemburg_is_homogeneous(seed in 0u64..1000, c in 0.01f64..100.0, h in orlicz_family()) {
        let u = rough_random(seed, &square(12));
        let a = luxemburg_norm(&u, &h).unwrap().value;
        let b = luxemburg_norm(&u.scaled(c), &h).unwrap().value;
        prop_assert!((b / (c * a) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn luxemburg_is_monotone(seed in 0u64..1000, shrink in 0.0f64..1.0, h in orlicz_family()) {
        let v = rough_random(seed, &square(12));
        let u = GridField::from_values(v.mesh().clone(), v.values().iter().enumerate().map(|(i, x)| if i % 3 == 0 { x * shrink } else { *x }).collect()).unwrap();
        prop_assert!(luxemburg_norm(&u, &h).unwrap().value <= luxemburg_norm(&v, &h).unwrap().value + 1e-12);
    }

    #[test]
    fn unit_ball_has_modular_at_most_one(seed in 0u64..1000, h in orlicz_family()) {
        let u = rough_random(seed, &square(12));
        let norm = luxemburg_norm(&u, &h).unwrap().value;
        let w = u.scaled(1.0 / norm);
        prop_assert!(modular(&w.masked_values(), w.grid().cellvol(), &h, 1.0) <= 1.0 + 1e-9);
    }

    #[test]
    fn lp_norm_matches_luxemburg(seed in 0u64..1000, p in 1.0f64..5.0) {
        let u = rough_random(seed, &square(12)).map(|x| x - 0.5);
        let a = lp_norm(&u, p).unwrap();
        let b = luxemburg_norm(&u, &OrliczFunction::power(p)).unwrap().value;
        prop_assert!((a / b - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn power_doubling_constant_is_exact(p in 1.0f64..8.0) {
        prop_assert_eq!(delta2_estimate(&OrliczFunction::power(p), &LogGrid::default()).unwrap().value, 2f64.powf(p));
    }

    #[test]
    fn pure_power_phi_control_is_one(alpha in 1.0f64..3.0) {
        let e = varphi_control_estimate(&PhiKernel::power(alpha).unwrap(), &LogGrid::default()).unwrap();
        prop_assert_eq!(e.value, 1.0);
    }

    #[test]
    fn recentred_average_vanishes(seed in 0u64..1000) {
        let mesh = MaskedGrid::discretize(&DomainGeometry::ball(vec![0.5, 0.5], 0.5), &[20, 20]).unwrap();
        let u = rough_random(seed, &mesh).map(|x| 3.0 * x + 1.0);
        let m = domain_average(&u);
        prop_assert!(domain_average(&u.map(|x| x - m)).abs() <= 1e-12);
    }

    #[test]
    fn potential_is_positively_homogeneous(seed in 0u64..1000, c in 0.1f64..10.0, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let f = rough_random(seed, &square(16));
        let phi = PhiKernel::power_over_log(1.2, 1.0).unwrap();
        let opts = PotentialOptions::default();
        let a = riesz_potential(&f, &phi, &[x, y], &opts).unwrap();
        let b = riesz_potential(&f.scaled(c), &phi, &[x, y], &opts).unwrap();
        prop_assert!((b - c * a).abs() <= 1e-12 * c * a);
    }

    #[test]
    fn potential_and_maximal_are_monotone(seed in 0u64..1000, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let g = rough_random(seed, &square(16));
        let f = g.map(|v| v * v);
        let opts = PotentialOptions::default();
        let phi = PhiKernel::identity();
        prop_assert!(riesz_potential(&f, &phi, &[x, y], &opts).unwrap() <= riesz_potential(&g, &phi, &[x, y], &opts).unwrap());
        prop_assert!(maximal_function(&f, &[x, y], &opts).unwrap() <= maximal_function(&g, &[x, y], &opts).unwrap());
    }

    #[test]
    fn maximal_dominates_domain_average(seed in 0u64..1000) {
        let mesh = MaskedGrid::discretize(&DomainGeometry::ball(vec![0.0, 0.0], 1.0), &[18, 18]).unwrap();
        let f = rough_random(seed, &mesh);
        let avg = domain_average(&f);
        let m = maximal_function_field(&f, &PotentialOptions::default()).unwrap();
        for &i in mesh.masked() {
            prop_assert!(m.values()[i] >= avg * (1.0 - 1e-12));
        }
    }

    #[test]
    fn maximal_is_sublinear(a in 0u64..1000, b in 0u64..1000) {
        let mesh = square(16);
        let f = rough_random(a, &mesh);
        let g = rough_random(b, &mesh).map(|v| 1.0 - 2.0 * v);
        let s = GridField::from_values(mesh.clone(), f.values().iter().zip(g.values()).map(|(x, y)| x + y).collect()).unwrap();
        let opts = PotentialOptions::default();
        let (mf, mg, ms) = (
            maximal_function_field(&f, &opts).unwrap(),
            maximal_function_field(&g, &opts).unwrap(),
            maximal_function_field(&s, &opts).unwrap(),
        );
        for &i in mesh.masked() {
            let bound = mf.values()[i] + mg.values()[i];
            prop_assert!(ms.values()[i] <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn singular_rules_differ_by_the_self_cell(seed in 0u64..1000, alpha in 1.0f64..1.9) {
        let mesh = square(16);
        let f = rough_random(seed, &mesh);
        let phi = PhiKernel::power(alpha).unwrap();
        let i = mesh.masked()[seed as usize % mesh.masked_count()];
        let x = mesh.grid.center(i);
        let ex = riesz_potential(&f, &phi, &x[..2], &PotentialOptions::default()).unwrap();
        let cap = riesz_potential(&f, &phi, &x[..2], &PotentialOptions::default().with_rule(SingularRule::CapAtHalfCell)).unwrap();
        let h = mesh.grid.min_spacing();
        let self_term = f.values()[i] * mesh.grid.cellvol() * phi.kernel(0.5 * h, 2);
        prop_assert!((cap - ex - self_term).abs() <= 1e-12 * cap);
        prop_assert!(cap - ex <= mesh.grid.cellvol() * phi.kernel(0.5 * h, 2));
    }

    #[test]
    fn condition_sup_scales_with_h(c in 0.01f64..100.0) {
        let s = Preset::LogJohn { alpha: 1.2, beta: 1.0 }.resolve(PresetParams::new(2, 1.0)).unwrap();
        let grid = LogGrid::new(-8, 8, 6);
        let base = sum_condition_sup(&s.inputs(), &grid).unwrap().estimate.value;
        let scaled_h = s.orlicz.clone().scaled(c);
        let inputs = ConditionInputs { orlicz: &scaled_h, ..s.inputs() };
        let scaled = sum_condition_sup(&inputs, &grid).unwrap().estimate.value;
        prop_assert!((scaled / (c * base) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn mushroom_membership_is_mirror_symmetric(x in 0.0f64..1.0, y in -0.6f64..1.6, count in 1usize..4) {
        let spec = MushroomSpec::geometric(2, PhiKernel::power(1.2).unwrap(), 1.0, 0.5, count, 3).unwrap();
        let dom = mushroom_build(&spec).unwrap();
        prop_assert_eq!(dom.contains(&[x, y]), dom.contains(&[x, 1.0 - y]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn fitted_closed_form_dominates_series(alpha in 1.0f64..1.8, beta in 0.0f64..2.0) {
        let c = fit_h_constant(alpha, beta, 2, &LogGrid::new(-6, 2, 4)).unwrap();
        let phi = PhiKernel::power_over_log(alpha, beta).unwrap();
        for t in LogGrid::new(-6, 2, 16).points() {
            let s = h_series(&phi, 2, t, DEFAULT_SERIES_TERMS).unwrap().upper();
            prop_assert!(s <= 1.05 * c * closed_form_h(alpha, beta, 2, t).unwrap(), "t = {}", t);
        }
    }
}

#[test]
fn p_max_for_alpha_one_is_n() {
    for n in 2..=10 {
        assert_eq!(admissible_p_max(1.0, n).unwrap(), n as f64);
    }
}

#[test]
fn lp_norm_is_refinement_stable() {
    let u = |x: &[f64]| (3.0 * x[0]).sin() + x[1] * x[1];
    let a = lp_norm(&GridField::from_fn(square(64), u), 2.5).unwrap();
    let b = lp_norm(&GridField::from_fn(square(128), u), 2.5).unwrap();
    assert!((a / b - 1.0).abs() < 0.01);
}

#[test]
fn singular_rules_agree_at_256() {
    let mesh = MaskedGrid::discretize(&DomainGeometry::cube(2, -1.0, 1.0), &[256, 256]).unwrap();
    let f = GridField::from_fn(mesh, |x| if x[0] * x[0] + x[1] * x[1] < 1.0 { 1.0 } else { 0.0 });
    for phi in [PhiKernel::identity(), PhiKernel::power_over_log(1.2, 1.0).unwrap()] {
        let a = riesz_potential(&f, &phi, &[0.0, 0.0], &PotentialOptions::default()).unwrap();
        let b = riesz_potential(&f, &phi, &[0.0, 0.0], &PotentialOptions::default().with_rule(SingularRule::CapAtHalfCell)).unwrap();
        assert!((b / a - 1.0).abs() < 0.05);
    }
}
