//! Closed-form and cross-implementation checks.

use intrinsic_sq::atoms::{atom_l1_bound_check, build_atom, AtomExponents, Profile};
use intrinsic_sq::intrinsic::{
    area_function, gstar_function, gstar_via_apertures, ConeGrid, ConeParams, DictionaryParams,
    TestFunctionDictionary,
};
use intrinsic_sq::norms::weak_lp_norm;
use intrinsic_sq::weights::{ap_constant, weighted_measure};
use intrinsic_sq::{integrate, make_grid, Cube, CubeFamily, SampledFunction, Weight};

/// `[|x|^a]` restricted to the single cube `[0, L]`, independent of `L`.
fn power_ap_on_origin_cube(a: f64, p: f64) -> f64 {
    let s = -1.0 / (p - 1.0);
    (1.0 / (a + 1.0)) * (1.0 / (a * s + 1.0)).powf(p - 1.0)
}

#[test]
fn ap_of_power_weight_on_origin_cubes_is_scale_free() {
    let grid = make_grid(Cube::interval(-8.0, 8.0).unwrap(), 512).unwrap();
    for (a, p) in [(-0.5, 2.0), (0.5, 2.0), (-0.3, 1.5), (1.0, 3.0)] {
        let expected = power_ap_on_origin_cube(a, p);
        let w = Weight::power(a, vec![0.0]).unwrap();
        for l in [0.5, 1.0, 2.0, 4.0] {
            let family = CubeFamily::new(vec![Cube::interval(0.0, l).unwrap()]).unwrap();
            let got = ap_constant(&w, p, &family, &grid).unwrap();
            assert!(
                (got - expected).abs() < 1e-10 * expected,
                "a={a} p={p} L={l}: {got} vs {expected}"
            );
        }
    }
}

#[test]
fn weighted_measure_of_inverse_square_root() {
    let grid = make_grid(Cube::interval(-2.0, 2.0).unwrap(), 64).unwrap();
    let w = Weight::power(-0.5, vec![0.0]).unwrap();
    // ∫_0^b x^{-1/2} = 2 √b
    assert!(
        (weighted_measure(&w, &grid, &Cube::interval(0.0, 1.0).unwrap()).unwrap() - 2.0).abs()
            < 1e-12
    );
    assert!(
        (weighted_measure(&w, &grid, &Cube::interval(-1.0, 1.0).unwrap()).unwrap() - 4.0).abs()
            < 1e-12
    );
    let quarter = weighted_measure(&w, &grid, &Cube::interval(0.0, 0.25).unwrap()).unwrap();
    assert!((quarter - 1.0).abs() < 1e-12);
}

#[test]
fn midpoint_rule_converges_at_second_order() {
    let errors: Vec<f64> = [32usize, 64, 128, 256]
        .iter()
        .map(|&m| {
            let g = make_grid(Cube::interval(0.0, 1.0).unwrap(), m).unwrap();
            let f = SampledFunction::from_fn(g.clone(), |x| (3.0 * x[0]).exp()).unwrap();
            (integrate(&f, g.domain()).unwrap() - ((3f64).exp() - 1.0) / 3.0).abs()
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.05, "observed order {order}");
    }
}

#[test]
fn weak_norm_of_scaled_indicator() {
    let g = make_grid(Cube::interval(-2.0, 2.0).unwrap(), 64).unwrap();
    let f = SampledFunction::from_fn(g, |x| if (0.0..1.0).contains(&x[0]) { 3.0 } else { 0.0 })
        .unwrap();
    for p in [0.5, 2.0 / 3.0, 1.0, 2.0] {
        assert!((weak_lp_norm(&f, &Weight::unit(1).unwrap(), p).unwrap() - 3.0).abs() < 1e-12);
    }
}

#[test]
fn l1_bound_ratio_is_scale_invariant_for_sign_atoms() {
    let exps = AtomExponents::new(2.0 / 3.0, 2.0, 0).unwrap();
    let w = Weight::unit(1).unwrap();
    let ratios: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&r| {
            let grid = make_grid(Cube::interval(-4.0 * r, 4.0 * r).unwrap(), 256).unwrap();
            let atom = build_atom(
                &grid,
                &Cube::interval(-r, r).unwrap(),
                exps,
                &w,
                &Profile::Sign,
            )
            .unwrap();
            atom_l1_bound_check(&atom).unwrap().ratio
        })
        .collect();
    for r in &ratios {
        assert!((r - 1.0).abs() < 1e-9, "{ratios:?}");
    }
}

fn atom_setup() -> (intrinsic_sq::Grid, TestFunctionDictionary, ConeGrid) {
    let grid = make_grid(Cube::interval(-8.0, 8.0).unwrap(), 256).unwrap();
    let mut dp = DictionaryParams::new(1, 0.5, 8, 5);
    dp.resolution = 256;
    let dict = TestFunctionDictionary::build(&dp).unwrap();
    let cone = ConeGrid::new(
        &grid,
        ConeParams {
            t_min: 2.0 * grid.spacing(),
            t_max: 8.0,
            ratio: 2f64.powf(0.25),
            k_max: 5,
        },
    )
    .unwrap();
    (grid, dict, cone)
}

#[test]
fn gstar_paths_agree_and_dominate_the_cone() {
    let (grid, dict, cone) = atom_setup();
    let exps = AtomExponents::new(2.0 / 3.0, 2.0, 1).unwrap();
    let w = Weight::unit(1).unwrap();
    for seed in 0..5u64 {
        let centre = -1.0 + 0.5 * seed as f64;
        let atom = build_atom(
            &grid,
            &Cube::new(vec![centre], 1.0).unwrap(),
            exps,
            &w,
            &Profile::Random { seed },
        )
        .unwrap();
        let f = atom.function();
        for x in [centre, centre + 0.75, centre + 3.0] {
            let direct = gstar_function(f, &[x], 4.5, &cone, &dict).unwrap();
            let annular = gstar_via_apertures(f, &[x], 4.5, cone.params().k_max, &cone, &dict)
                .unwrap()
                .value;
            assert!(
                (direct - annular).abs() <= 0.1 * direct,
                "seed {seed} x {x}: {direct} vs {annular}"
            );
            let s = area_function(f, &[x], 1.0, &cone, &dict).unwrap();
            assert!(direct >= s * 2f64.powf(-4.5 / 2.0) * (1.0 - 1e-12));
        }
    }
}
