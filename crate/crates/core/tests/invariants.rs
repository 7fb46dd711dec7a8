//! Randomised algebraic invariants of the operators and norms.

use intrinsic_sq::atoms::{build_atom, validate_atom, AtomExponents, AtomTolerances, Profile};
use intrinsic_sq::intrinsic::{
    area_function, g_function, gstar_function, intrinsic_a, ConeGrid, ConeParams, DictionaryParams,
    TestFunctionDictionary,
};
use intrinsic_sq::norms::{lip_norm, lp_norm, weak_lp_norm};
use intrinsic_sq::weights::{ap_constant, FamilyParams};
use intrinsic_sq::{convolve_scaled, make_grid, Cube, CubeFamily, Grid, SampledFunction, Weight};
use proptest::prelude::*;
use std::sync::OnceLock;

struct Fixture {
    grid: Grid,
    dict: TestFunctionDictionary,
    cone: ConeGrid,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let grid = make_grid(Cube::interval(-4.0, 4.0).unwrap(), 128).unwrap();
        let mut dp = DictionaryParams::new(1, 0.5, 6, 11);
        dp.resolution = 128;
        let dict = TestFunctionDictionary::build(&dp).unwrap();
        let params = ConeParams {
            t_min: 2.0 * grid.spacing(),
            t_max: 4.0,
            ratio: 2f64.powf(0.25),
            k_max: 3,
        };
        let cone = ConeGrid::new(&grid, params).unwrap();
        Fixture { grid, dict, cone }
    })
}

/// Step function with the given values on consecutive blocks of `[-1, 1]`.
fn steps(grid: &Grid, heights: &[f64]) -> SampledFunction {
    let k = heights.len() as f64;
    SampledFunction::from_fn(grid.clone(), |x| {
        if x[0].abs() < 1.0 {
            heights[(((x[0] + 1.0) / 2.0 * k) as usize).min(heights.len() - 1)]
        } else {
            0.0
        }
    })
    .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn heights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operators_are_absolutely_homogeneous(h in heights(), c in -5.0f64..5.0, x in -2.0f64..2.0) {
        let fx = fixture();
        let f = steps(&fx.grid, &h);
        let cf = f.scaled(c).unwrap();
        let pairs = [
            (intrinsic_a(&f, &[x], 0.7, &fx.dict).unwrap(), intrinsic_a(&cf, &[x], 0.7, &fx.dict).unwrap()),
            (area_function(&f, &[x], 1.0, &fx.cone, &fx.dict).unwrap(), area_function(&cf, &[x], 1.0, &fx.cone, &fx.dict).unwrap()),
            (g_function(&f, &[x], &fx.cone, &fx.dict).unwrap(), g_function(&cf, &[x], &fx.cone, &fx.dict).unwrap()),
            (gstar_function(&f, &[x], 4.5, &fx.cone, &fx.dict).unwrap(), gstar_function(&cf, &[x], 4.5, &fx.cone, &fx.dict).unwrap()),
        ];
        for (base, scaled) in pairs {
            prop_assert!(rel(c.abs() * base, scaled) <= 1e-12, "{} vs {}", c.abs() * base, scaled);
        }
    }

    #[test]
    fn constants_are_annihilated(c in -10.0f64..10.0, i in 40usize..88, t in 0.1f64..1.0) {
        let fx = fixture();
        let f = SampledFunction::from_fn(fx.grid.clone(), |_| c).unwrap();
        let y = fx.grid.point(i);
        prop_assert!(intrinsic_a(&f, &y, t, &fx.dict).unwrap() <= 1e-10);
    }

    #[test]
    fn weak_norm_never_exceeds_strong_norm(h in heights(), p in 0.3f64..3.0, a in -0.9f64..1.5) {
        let fx = fixture();
        let f = steps(&fx.grid, &h);
        for w in [Weight::unit(1).unwrap(), Weight::power(a, vec![0.0]).unwrap()] {
            let weak = weak_lp_norm(&f, &w, p).unwrap();
            let strong = lp_norm(&f, &w, p).unwrap();
            prop_assert!(weak <= strong * (1.0 + 1e-12), "{weak} > {strong}");
        }
    }

    #[test]
    fn wider_aperture_never_decreases(h in heights(), x in -2.0f64..2.0, b1 in 0.5f64..2.0, db in 0.0f64..2.0) {
        let fx = fixture();
        let f = steps(&fx.grid, &h);
        let narrow = area_function(&f, &[x], b1, &fx.cone, &fx.dict).unwrap();
        let wide = area_function(&f, &[x], b1 + db, &fx.cone, &fx.dict).unwrap();
        prop_assert!(wide >= narrow);
    }

    #[test]
    fn larger_dictionary_never_decreases(h in heights(), x in -2.0f64..2.0, k in 1usize..6) {
        let fx = fixture();
        let f = steps(&fx.grid, &h);
        let small = fx.dict.prefix(k).unwrap();
        prop_assert!(intrinsic_a(&f, &[x], 0.5, &fx.dict).unwrap() >= intrinsic_a(&f, &[x], 0.5, &small).unwrap());
        prop_assert!(g_function(&f, &[x], &fx.cone, &fx.dict).unwrap() >= g_function(&f, &[x], &fx.cone, &small).unwrap());
    }

    #[test]
    fn convolution_is_linear(h1 in heights(), h2 in heights(), a in -3.0f64..3.0, b in -3.0f64..3.0, y in -2.0f64..2.0) {
        let fx = fixture();
        let (f, g) = (steps(&fx.grid, &h1), steps(&fx.grid, &h2));
        let phi = &fx.dict.members()[0].phi;
        let combo = f.linear_combination(a, &g, b).unwrap();
        let lhs = convolve_scaled(&combo, phi, 0.8, &[y]).unwrap();
        let rhs = a * convolve_scaled(&f, phi, 0.8, &[y]).unwrap() + b * convolve_scaled(&g, phi, 0.8, &[y]).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn convolution_vanishes_off_the_support(h in heights(), t in 0.1f64..1.0, gap in 0.01f64..1.0) {
        let fx = fixture();
        let f = steps(&fx.grid, &h);
        let y = 1.0 + t + gap;
        for m in fx.dict.members() {
            prop_assert_eq!(convolve_scaled(&f, &m.phi, t, &[y]).unwrap(), 0.0);
        }
    }

    #[test]
    fn lipschitz_norm_ignores_constants(h in heights(), c in -4.0f64..4.0) {
        let grid = make_grid(Cube::interval(-1.0, 1.0).unwrap(), 64).unwrap();
        let family = CubeFamily::dyadic(grid.domain(), &FamilyParams { min_level: 0, max_level: 4, translate_divisor: 2, anchor: None }).unwrap();
        let b = steps(&grid, &h);
        let shifted = b.map(|v| v + c).unwrap();
        let (n0, n1) = (lip_norm(&b, 0.5, &family).unwrap(), lip_norm(&shifted, 0.5, &family).unwrap());
        prop_assert!((n0 - n1).abs() <= 1e-9 * (1.0 + n0));
    }

    #[test]
    fn ap_constant_is_nonincreasing_in_p(a in -0.9f64..2.0, p in 1.2f64..4.0, dp in 0.0f64..3.0) {
        let grid = make_grid(Cube::interval(-2.0, 2.0).unwrap(), 64).unwrap();
        let family = CubeFamily::dyadic(grid.domain(), &FamilyParams { min_level: 1, max_level: 4, translate_divisor: 2, anchor: Some(vec![0.0]) }).unwrap();
        let w = Weight::power(a, vec![0.0]).unwrap();
        let lo = ap_constant(&w, p, &family, &grid).unwrap();
        let hi = ap_constant(&w, p + dp, &family, &grid).unwrap();
        prop_assert!(hi <= lo * (1.0 + 1e-12), "A_{} = {hi} > A_{p} = {lo}", p + dp);
    }

    #[test]
    fn built_atoms_validate(seed in any::<u64>(), centre in -2.0f64..2.0, side in 0.25f64..2.0, s in 0u32..3) {
        let grid = make_grid(Cube::interval(-4.0, 4.0).unwrap(), 256).unwrap();
        let cube = Cube::new(vec![centre], side).unwrap();
        let w = Weight::power(-0.5, vec![0.0]).unwrap();
        let atom = build_atom(&grid, &cube, AtomExponents::new(2.0 / 3.0, 2.0, s).unwrap(), &w, &Profile::Random { seed });
        if let Ok(atom) = atom {
            let cert = validate_atom(&atom, &AtomTolerances::default()).unwrap();
            prop_assert!(cert.accepted, "{cert:?}");
            prop_assert!(cert.norm_slack.abs() <= 1e-9);
        }
    }
}
