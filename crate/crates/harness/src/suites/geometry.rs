//! Aperture scaling of `S_{α,β}` and the far-field estimates on atoms.

use intrinsic_sq::atoms::atom_l1_bound_check;
use intrinsic_sq::convolve_scaled;
use intrinsic_sq::intrinsic::{g_function, ConeSamples};
use rayon::prelude::*;

use super::theorems::SLOPE_TOLERANCE;
use super::{
    base_report, gated, Outcome, Suite, UsesDictionary, ATOM_REDUCTION_NOTE, LOWER_BOUND_NOTE,
};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::{distance_to_cube, far_points, Experiment};
use crate::report::{Criterion, Row, VerificationReport};
use crate::stats::{log_log_slope, max, min, scale_means, slope, spread, worst_deviation};

/// Slack on fitted growth exponents.
pub const EXPONENT_SLACK: f64 = 0.3;
/// Accepted spread of `‖S_{α,2^k}‖² / (2^{kn} ‖S_α‖²)` over `k >= 1`.
pub const APERTURE_CONSTANT_SPREAD: f64 = 2.0;
/// Relative slack on the pointwise convolution bound.
pub const POINTWISE_SLACK: f64 = 1e-6;
/// Accepted max/min of the `L¹` bound ratio.
pub const L1_UNIFORMITY_RATIO: f64 = 4.0;

fn aperture(exp: &Experiment) -> Result<Outcome> {
    let screen = exp.require_a1(Suite::Aperture.name())?;
    let atoms = exp.atoms()?;
    let mut report = base_report(Suite::Aperture, exp);
    report.param("a1_constant", screen.constant);
    let k_max = exp.cfg.aperture_k_max;
    if k_max < 1 {
        return Err(HarnessError::Config(
            "aperture_k_max must be at least 1".into(),
        ));
    }
    let n = exp.n() as f64;
    let per_atom: Vec<Option<Vec<f64>>> = atoms
        .iter()
        .map(|a| -> Result<Option<Vec<f64>>> {
            let cs = ConeSamples::compute(a.function(), &exp.cone, &exp.dict)?;
            let norms: Vec<f64> = (0..=k_max)
                .map(|k| {
                    let beta = 2f64.powi(k as i32);
                    Ok(exp
                        .sample_for_atom(a.cube(), |x| cs.area(x, beta))?
                        .lp_norm(2.0)?
                        .powi(2))
                })
                .collect::<Result<_>>()?;
            Ok((norms[0] > 0.0).then_some(norms))
        })
        .collect::<Result<_>>()?;
    let ks: Vec<f64> = (0..=k_max).map(|k| k as f64).collect();
    let mut exponents = Vec::new();
    let mut spreads = Vec::new();
    let mut skipped = 0;
    for (a, norms) in atoms.iter().zip(&per_atom) {
        let Some(norms) = norms else {
            skipped += 1;
            continue;
        };
        let logs: Vec<f64> = norms.iter().map(|v| v.log2()).collect();
        let e = slope(&ks, &logs).unwrap_or(f64::NAN);
        let constants: Vec<f64> = (1..=k_max as usize)
            .map(|k| norms[k] / (norms[0] * 2f64.powf(k as f64 * n)))
            .collect();
        let sp = spread(&constants);
        let mut row = Row::new(a.label())
            .with("r", a.r)
            .with("center", a.center[0])
            .with("exponent", e)
            .with("constant_spread", sp);
        for (k, v) in norms.iter().enumerate() {
            row = row.with(&format!("norm2[k={k}]"), *v);
        }
        report.rows.push(row);
        exponents.push(e);
        spreads.push(sp);
    }
    if exponents.is_empty() {
        return Err(HarnessError::EmptySweep(
            "every atom has a vanishing area function".into(),
        ));
    }
    if skipped > 0 {
        report.note(format!(
            "{skipped} atoms with vanishing area function skipped"
        ));
    }
    let worst = max(&exponents);
    report.aggregate("exponent.max", worst);
    report.aggregate("exponent.min", min(&exponents));
    report.aggregate("constant_spread.max", max(&spreads));
    report.criterion(Criterion::at_most(
        "aperture growth exponent of ||S_(alpha,2^k)(a)||^2",
        worst,
        n + EXPONENT_SLACK,
    ));
    report.criterion(Criterion::at_most(
        "spread of ||S_(alpha,2^k)||^2 / (2^(kn) ||S_alpha||^2) over k >= 1",
        max(&spreads),
        APERTURE_CONSTANT_SPREAD,
    ));
    report.note(LOWER_BOUND_NOTE);
    Ok(Outcome {
        report,
        headline: vec![("exponent.max".into(), worst)],
    })
}

/// Growth of `‖S_{α,2^k}(a)‖²_{L²_w}` in `k`.
pub fn verify_aperture_scaling(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    gated(cfg, UsesDictionary::Yes, aperture)
}

#[derive(Debug, Clone)]
struct FarFieldAtom {
    /// Smallest `rhs / lhs` of the pointwise convolution bound.
    pointwise_margin: f64,
    pointwise_samples: usize,
    /// Log-log slopes against `|x - x_0|`.
    slope_g: f64,
    slope_s: f64,
    /// Same slopes against the distance from `x` to `Q`.
    slope_g_to_cube: f64,
    slope_s_to_cube: f64,
    /// Largest fitted `2^k` growth exponent of `S_{α,2^k}(a)(x)²`.
    aperture_growth: f64,
    l1_ratio: f64,
}

fn far_field_atom(
    exp: &Experiment,
    a: &crate::experiment::SweepAtom,
    far: &intrinsic_sq::intrinsic::ConeGrid,
) -> Result<FarFieldAtom> {
    let ff = &exp.cfg.far_field;
    let (n, alpha) = (exp.n() as f64, exp.alpha());
    let f = a.function();
    let cube = a.cube();
    let h = exp.grid.spacing();
    let l1: f64 = f.values().iter().map(|v| v.abs()).sum::<f64>() * exp.grid.cell_volume();
    let q_star = cube.dilate(2.0 * n.sqrt())?;
    let pts: Vec<(f64, Vec<f64>)> = far_points(a, ff.inner, ff.outer, ff.samples)
        .into_iter()
        .filter(|(_, x)| !q_star.contains_point(x, 0.0))
        .collect();
    if pts.len() < 2 {
        return Err(HarnessError::Config(
            "far-field range lies inside Q*".into(),
        ));
    }

    // pointwise bound |a * φ_t(x)| <= |φ|_α r^α t^{-(n+α)} ∫|a|, Q = x_0 + [-r, r]^n
    let r_alpha = a.r.powf(alpha);
    let mut margin = f64::INFINITY;
    let mut samples = 0;
    for (_, x) in &pts {
        for level in far.levels() {
            let t = level.t;
            if t < distance_to_cube(x, cube) - h {
                continue;
            }
            for m in exp.dict.members() {
                let lhs = convolve_scaled(f, &m.phi, t, x)?.abs();
                if lhs > 0.0 {
                    let rhs = m.certificate.seminorm * r_alpha * t.powf(-(n + alpha)) * l1;
                    margin = margin.min(rhs / lhs);
                    samples += 1;
                }
            }
        }
    }

    let cs = ConeSamples::compute(f, far, &exp.dict)?;
    let dist: Vec<f64> = pts.iter().map(|(_, x)| distance_to_cube(x, cube)).collect();
    let centre: Vec<f64> = pts.iter().map(|(d, _)| *d).collect();
    let gv: Vec<f64> = pts
        .iter()
        .map(|(_, x)| g_function(f, x, far, &exp.dict))
        .collect::<std::result::Result<_, _>>()?;
    let sv: Vec<f64> = pts.iter().map(|(_, x)| cs.area(x, 1.0)).collect();
    let fit = |xs: &[f64], ys: &[f64]| log_log_slope(xs, ys).unwrap_or(f64::NAN);

    let ks: Vec<f64> = (0..=exp.cfg.aperture_k_max).map(|k| k as f64).collect();
    let mut growth = f64::NEG_INFINITY;
    for (_, x) in &pts {
        let logs: Vec<f64> = ks
            .iter()
            .map(|k| (cs.area(x, 2f64.powf(*k)).powi(2)).log2())
            .collect();
        if logs.iter().all(|v| v.is_finite()) {
            growth = growth.max(slope(&ks, &logs).unwrap_or(f64::NAN));
        }
    }

    Ok(FarFieldAtom {
        pointwise_margin: margin,
        pointwise_samples: samples,
        slope_g: fit(&centre, &gv),
        slope_s: fit(&centre, &sv),
        slope_g_to_cube: fit(&dist, &gv),
        slope_s_to_cube: fit(&dist, &sv),
        aperture_growth: growth,
        l1_ratio: atom_l1_bound_check(&a.atom)?.ratio,
    })
}

fn far_field(exp: &Experiment) -> Result<Outcome> {
    let atoms = exp.atoms()?;
    let far = exp.far_cone()?;
    let mut report = base_report(Suite::FarField, exp);
    let (n, alpha) = (exp.n() as f64, exp.alpha());
    let target = -(n + alpha);
    report.param("far_t_max", far.params().t_max);
    report.param("far_t_levels", far.levels().len() as f64);
    report.param("far_inner", exp.cfg.far_field.inner);
    report.param("far_outer", exp.cfg.far_field.outer);
    let stats: Vec<FarFieldAtom> = atoms
        .par_iter()
        .map(|a| far_field_atom(exp, a, &far))
        .collect::<Result<_>>()?;
    for (a, s) in atoms.iter().zip(&stats) {
        report.rows.push(
            Row::new(a.label())
                .with("r", a.r)
                .with("center", a.center[0])
                .with("pointwise_margin", s.pointwise_margin)
                .with("pointwise_samples", s.pointwise_samples as f64)
                .with("slope_g", s.slope_g)
                .with("slope_s", s.slope_s)
                .with("slope_g_vs_distance_to_cube", s.slope_g_to_cube)
                .with("slope_s_vs_distance_to_cube", s.slope_s_to_cube)
                .with("aperture_growth_exponent", s.aperture_growth)
                .with("l1_ratio", s.l1_ratio),
        );
    }
    let col = |f: fn(&FarFieldAtom) -> f64| -> Vec<f64> { stats.iter().map(f).collect() };
    let margins = col(|s| s.pointwise_margin);
    let slopes_g = col(|s| s.slope_g);
    let slopes_s = col(|s| s.slope_s);
    let growth = col(|s| s.aperture_growth);
    let l1 = col(|s| s.l1_ratio);
    let by_scale = |v: &[f64]| -> Vec<f64> {
        let pairs: Vec<(f64, f64)> = atoms.iter().zip(v).map(|(a, s)| (a.r, *s)).collect();
        scale_means(&pairs).into_iter().map(|s| s.1).collect()
    };
    let scales: Vec<f64> = scale_means(&atoms.iter().map(|a| (a.r, 0.0)).collect::<Vec<_>>())
        .into_iter()
        .map(|s| s.0)
        .collect();
    let (scale_g, scale_s) = (by_scale(&slopes_g), by_scale(&slopes_s));
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;

    report.aggregate("pointwise_margin.min", min(&margins));
    report.aggregate(
        "pointwise_samples",
        stats.iter().map(|s| s.pointwise_samples as f64).sum(),
    );
    report.aggregate("slope_g.mean", mean(&slopes_g));
    report.aggregate("slope_s.mean", mean(&slopes_s));
    report.aggregate(
        "slope_g.worst_atom_deviation",
        worst_deviation(&slopes_g, target),
    );
    report.aggregate(
        "slope_s.worst_atom_deviation",
        worst_deviation(&slopes_s, target),
    );
    for (i, r) in scales.iter().enumerate() {
        report.aggregate(&format!("slope_g[r={r}]"), scale_g[i]);
        report.aggregate(&format!("slope_s[r={r}]"), scale_s[i]);
    }
    report.aggregate(
        "slope_g_vs_distance_to_cube.mean",
        mean(&col(|s| s.slope_g_to_cube)),
    );
    report.aggregate(
        "slope_s_vs_distance_to_cube.mean",
        mean(&col(|s| s.slope_s_to_cube)),
    );
    report.aggregate("aperture_growth_exponent.max", max(&growth));
    report.aggregate("l1_ratio.max", max(&l1));
    report.aggregate("l1_ratio.min", min(&l1));

    report.criterion(Criterion::at_least(
        "pointwise convolution bound: min rhs/lhs",
        min(&margins),
        1.0 - POINTWISE_SLACK,
    ));
    report.criterion(Criterion::at_most(
        "L1 bound ratio: max/min over atoms",
        spread(&l1),
        L1_UNIFORMITY_RATIO,
    ));
    report.criterion(Criterion::at_most(
        "far-field slope of g per scale: worst |slope + (n + alpha)|",
        worst_deviation(&scale_g, target),
        SLOPE_TOLERANCE,
    ));
    report.criterion(Criterion::at_most(
        "far-field slope of S per scale: worst |slope + (n + alpha)|",
        worst_deviation(&scale_s, target),
        SLOPE_TOLERANCE,
    ));
    report.criterion(Criterion::at_most(
        "far-field 2^k growth exponent of S_(alpha,2^k)(a)^2",
        max(&growth),
        3.0 * n + 2.0 * alpha + EXPONENT_SLACK,
    ));
    report.note("slopes are fitted against |x - x_0| and averaged over the atoms of each scale; fits against the distance to Q are reported alongside");
    report.note(LOWER_BOUND_NOTE);
    report.note(ATOM_REDUCTION_NOTE);
    let headline = vec![
        ("slope_g.mean".into(), mean(&slopes_g)),
        ("slope_s.mean".into(), mean(&slopes_s)),
        ("aperture_growth_exponent.max".into(), max(&growth)),
        ("l1_ratio.max".into(), max(&l1)),
    ];
    Ok(Outcome { report, headline })
}

/// Pointwise convolution bound, `L¹` bound, decay slopes and far-field aperture growth.
pub fn verify_far_field(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    gated(cfg, UsesDictionary::Yes, far_field)
}
