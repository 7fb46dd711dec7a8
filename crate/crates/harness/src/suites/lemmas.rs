//! Doubling of the weight and the superposition principle for weak `L^p_w`.

use intrinsic_sq::norms::{superpose, weak_lp_norm};
use intrinsic_sq::weights::{ap_constant, critical_index, doubling_ratio};
use intrinsic_sq::{Cube, Grid, SampledFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{base_report, gated, Outcome, Suite, UsesDictionary};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::{mix_seed, Experiment};
use crate::report::{Criterion, Row, VerificationReport};

/// Quadrature slack allowed on the doubling bound.
pub const DOUBLING_SLACK: f64 = 1.05;
/// Tolerance on superposition violations.
pub const SUPERPOSITION_TOLERANCE: f64 = 1e-6;

fn lemma_a(exp: &Experiment) -> Result<Outcome> {
    let dilations = &exp.cfg.dilations;
    if dilations.iter().any(|&l| !(l > 1.0)) {
        return Err(HarnessError::Config("dilations must exceed 1".into()));
    }
    let largest = dilations.iter().copied().fold(1.0, f64::max);
    let domain = exp.grid.domain();
    let cubes: Vec<&Cube> = exp
        .family
        .cubes()
        .iter()
        .filter(|q| {
            q.dilate(largest)
                .is_ok_and(|big| domain.contains_cube(&big, 1e-12))
        })
        .collect();
    if cubes.is_empty() || dilations.is_empty() {
        return Err(HarnessError::EmptySweep(
            "no cube of the family fits its dilates in the domain".into(),
        ));
    }
    let mut report = base_report(Suite::LemmaA, exp);
    let n = exp.n() as f64;
    // A_1 form `w(λQ) <= [w]_{A_1} λ^n w(Q)`, or the A_q form with `λ^{nq}`
    let screen = exp.a1_screen()?;
    let (constant, power) = if screen.is_a1 {
        (screen.constant, n)
    } else {
        let q = critical_index(&exp.weight, &exp.family, &exp.grid, exp.cfg.a1_threshold)?;
        if !q.is_finite() {
            return Err(HarnessError::Refused {
                suite: Suite::LemmaA.name().into(),
                reason: "weight is in no A_q class on this family".into(),
            });
        }
        report.note(format!(
            "weight is not A_1; using the A_q form with q = {q}"
        ));
        (ap_constant(&exp.weight, q, &exp.family, &exp.grid)?, n * q)
    };
    report.param("doubling_constant", constant);
    report.param("dilation_power", power);
    report.param("cubes", cubes.len() as f64);
    let mut worst: f64 = 0.0;
    for &l in dilations {
        let bound = constant * l.powf(power);
        let mut lmax: f64 = 0.0;
        let mut lmin = f64::INFINITY;
        for q in &cubes {
            let ratio = doubling_ratio(&exp.weight, &exp.grid, q, l)?;
            lmax = lmax.max(ratio);
            lmin = lmin.min(ratio);
            worst = worst.max(ratio / bound);
        }
        report.rows.push(
            Row::new(format!("lambda={l}"))
                .with("max_ratio", lmax)
                .with("min_ratio", lmin)
                .with("bound", bound),
        );
    }
    report.aggregate("max_ratio_over_bound", worst);
    report.criterion(Criterion::at_most(
        "doubling ratio / (C lambda^(n q)) over all cubes",
        worst,
        DOUBLING_SLACK,
    ));
    Ok(Outcome {
        report,
        headline: vec![("max_ratio_over_bound".into(), worst)],
    })
}

/// Doubling of the configured weight over the cube family for each dilation.
pub fn verify_lemma_a(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    gated(cfg, UsesDictionary::No, lemma_a)
}

/// Shapes used for the members of a superposition instance.
#[derive(Debug, Clone, Copy)]
enum Shape {
    Indicator,
    /// `|x - c|^{-n/p}` capped, the extremal weak-`L^p` profile.
    Power,
    /// Random piecewise-constant function on a few blocks.
    Steps,
}

fn random_cube(rng: &mut ChaCha8Rng, grid: &Grid, max_side: f64) -> Result<Cube> {
    let domain = grid.domain();
    let side = rng.gen_range(0.05..1.0) * max_side;
    let center: Vec<f64> = (0..grid.dim())
        .map(|d| rng.gen_range(domain.lo(d) + 0.5 * side..domain.hi(d) - 0.5 * side))
        .collect();
    Ok(Cube::new(center, side)?)
}

fn member(rng: &mut ChaCha8Rng, grid: &Grid, shape: Shape, p: f64) -> Result<SampledFunction> {
    let n = grid.dim() as f64;
    let span = 0.25 * grid.domain().side();
    let f = match shape {
        Shape::Indicator => {
            let q = random_cube(rng, grid, span)?;
            SampledFunction::from_fn(grid.clone(), |x| {
                if q.contains_point(x, 0.0) {
                    1.0
                } else {
                    0.0
                }
            })?
        }
        Shape::Power => {
            let q = random_cube(rng, grid, span)?;
            let c = q.center().to_vec();
            let cap = (4.0 * grid.spacing()).powf(-n / p);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            SampledFunction::from_fn(grid.clone(), |x| {
                let d = x
                    .iter()
                    .zip(&c)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if q.contains_point(x, 0.0) {
                    sign * d.powf(-n / p).min(cap)
                } else {
                    0.0
                }
            })?
        }
        Shape::Steps => {
            let blocks: Vec<(Cube, f64)> = (0..4)
                .map(|_| Ok((random_cube(rng, grid, span)?, rng.gen_range(-1.0..1.0))))
                .collect::<Result<_>>()?;
            SampledFunction::from_fn(grid.clone(), |x| {
                blocks
                    .iter()
                    .filter(|(q, _)| q.contains_point(x, 0.0))
                    .map(|b| b.1)
                    .sum()
            })?
        }
    };
    Ok(f)
}

/// Rescales `f` to unit weak norm, or `None` when it vanishes.
fn normalized(f: SampledFunction, exp: &Experiment) -> Result<Option<SampledFunction>> {
    let norm = weak_lp_norm(&f, &exp.weight, exp.p)?;
    if !(norm > 0.0) {
        return Ok(None);
    }
    Ok(Some(f.scaled(1.0 / norm)?))
}

/// Coefficients with `Σ |λ_j|^p = 1`.
fn coefficients(rng: &mut ChaCha8Rng, k: usize, p: f64, positive: bool) -> Vec<f64> {
    let raw: Vec<f64> = (0..k)
        .map(|_| {
            let m: f64 = rng.gen_range(0.05..1.0);
            if positive || rng.gen_bool(0.75) {
                m
            } else {
                -m
            }
        })
        .collect();
    let s: f64 = raw.iter().map(|l| l.abs().powf(p)).sum();
    raw.iter().map(|l| l / s.powf(1.0 / p)).collect()
}

struct Instance {
    label: String,
    functions: Vec<SampledFunction>,
    lambdas: Vec<f64>,
}

fn instances(exp: &Experiment) -> Result<Vec<Instance>> {
    let grid = &exp.grid;
    let p = exp.p;
    let mut out = Vec::new();
    // a single unit function
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(exp.cfg.seed, 31));
    if let Some(f) = normalized(member(&mut rng, grid, Shape::Indicator, p)?, exp)? {
        out.push(Instance {
            label: "single".into(),
            functions: vec![f],
            lambdas: vec![1.0],
        });
    }
    // eight disjoint indicators with equal coefficients
    let lw = exp.cfg.domain_half_width;
    let width = lw / 8.0;
    let mut disjoint = Vec::new();
    for j in 0..8 {
        let lo = -lw + 2.0 * width * j as f64;
        let mut lo_v = vec![-0.5 * width; grid.dim()];
        let mut hi_v = vec![0.5 * width; grid.dim()];
        lo_v[0] = lo;
        hi_v[0] = lo + width;
        let q = Cube::from_bounds(&lo_v, &hi_v)?;
        let f = SampledFunction::from_fn(grid.clone(), |x| {
            if q.contains_point(x, 0.0) {
                1.0
            } else {
                0.0
            }
        })?;
        if let Some(f) = normalized(f, exp)? {
            disjoint.push(f);
        }
    }
    let k = disjoint.len();
    out.push(Instance {
        label: "disjoint-indicators".into(),
        functions: disjoint,
        lambdas: vec![(k as f64).powf(-1.0 / p); k],
    });
    // random families
    for i in 0..exp.cfg.superposition.instances {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(exp.cfg.seed, 1000 + i as u64));
        let k = rng.gen_range(1..=exp.cfg.superposition.max_terms.max(1));
        let shape = match i % 3 {
            0 => Shape::Indicator,
            1 => Shape::Power,
            _ => Shape::Steps,
        };
        let mut functions = Vec::new();
        for _ in 0..k {
            if let Some(f) = normalized(member(&mut rng, grid, shape, p)?, exp)? {
                functions.push(f);
            }
        }
        if functions.is_empty() {
            continue;
        }
        let lambdas = coefficients(&mut rng, functions.len(), p, i % 2 == 0);
        out.push(Instance {
            label: format!("random-{i:03}"),
            functions,
            lambdas,
        });
    }
    Ok(out)
}

fn lemma31(exp: &Experiment) -> Result<Outcome> {
    let p = exp.p;
    if !(p > 0.0 && p < 1.0) {
        return Err(HarnessError::Refused {
            suite: Suite::Lemma31.name().into(),
            reason: format!("needs 0 < p < 1, got {p}"),
        });
    }
    let mut report = base_report(Suite::Lemma31, exp);
    let bound = (2.0 - p) / (1.0 - p);
    report.param("bound", bound);
    let mut worst: f64 = 0.0;
    let mut violations = 0usize;
    let mut certified = 0usize;
    for inst in instances(exp)? {
        let s = superpose(&inst.functions, &inst.lambdas, p, &exp.weight)?;
        if !s.preconditions_hold {
            report.note(format!(
                "{} skipped: max member norm {}, coefficient sum {}",
                inst.label, s.max_member_norm, s.sum_coeff
            ));
            continue;
        }
        certified += 1;
        worst = worst.max(s.lhs / bound);
        if s.lhs > bound * (1.0 + SUPERPOSITION_TOLERANCE) {
            violations += 1;
        }
        report.rows.push(
            Row::new(inst.label)
                .with("terms", inst.functions.len() as f64)
                .with("lhs", s.lhs)
                .with("sum_coeff", s.sum_coeff)
                .with("max_member_norm", s.max_member_norm),
        );
    }
    report.aggregate("certified_instances", certified as f64);
    report.aggregate("violations", violations as f64);
    report.aggregate("max_lhs_over_bound", worst);
    report.criterion(Criterion::at_least(
        "certified instances",
        certified as f64,
        1.0,
    ));
    report.criterion(Criterion::at_most(
        "violations of the superposition bound",
        violations as f64,
        0.0,
    ));
    report.note("finite families only; the index set of the statement is infinite");
    Ok(Outcome {
        report,
        headline: vec![("max_lhs_over_bound".into(), worst)],
    })
}

/// `‖Σ λ_j f_j‖^p_{WL^p_w} <= (2-p)/(1-p)` on generated unit-norm families.
pub fn verify_lemma31(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    gated(cfg, UsesDictionary::No, lemma31)
}
