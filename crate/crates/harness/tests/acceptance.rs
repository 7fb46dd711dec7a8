//! End-to-end acceptance run: every suite under both shipped weights, plus a
//! randomized invariant sweep and a reproducibility rerun. Prints one line per
//! criterion and exits nonzero if any fails.

use std::process::ExitCode;

use intrinsic_sq::intrinsic::{area_function, g_function, gstar_function, intrinsic_a};
use intrinsic_sq::norms::{lp_norm, weak_lp_norm};
use intrinsic_sq::weights::WeightSpec;
use intrinsic_sq::{SampledFunction, Weight};
use isq_harness::report::{to_json, Criterion};
use isq_harness::{Experiment, ExperimentConfig, HarnessError, Suite, VerificationReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn unit_weight() -> ExperimentConfig {
    ExperimentConfig::default()
}

fn inverse_sqrt_weight() -> ExperimentConfig {
    ExperimentConfig {
        weight: WeightSpec::Power {
            a: -0.5,
            center: vec![0.0],
        },
        ..ExperimentConfig::default()
    }
}

struct Run {
    label: &'static str,
    reports: Vec<VerificationReport>,
}

impl Run {
    fn execute(label: &'static str, cfg: &ExperimentConfig) -> Self {
        let reports = Suite::ALL
            .iter()
            .map(|s| {
                s.run(cfg)
                    .unwrap_or_else(|e| panic!("{label}: suite {s} failed to run: {e}"))
            })
            .collect();
        Self { label, reports }
    }

    fn report(&self, suite: Suite) -> &VerificationReport {
        self.reports
            .iter()
            .find(|r| r.suite == suite.name())
            .expect("suite report present")
    }
}

/// Criteria of `suite` whose name contains any of `keys`, across both runs.
fn criteria<'a>(
    runs: &'a [Run],
    suite: Suite,
    keys: &[&str],
) -> Vec<(&'static str, &'a Criterion)> {
    let mut out = Vec::new();
    for run in runs {
        for c in &run.report(suite).criteria {
            if keys.is_empty() || keys.iter().any(|k| c.name.contains(k)) {
                out.push((run.label, c));
            }
        }
    }
    out
}

fn judge(found: &[(&'static str, &Criterion)]) -> Outcome {
    if found.is_empty() {
        return Outcome::new(false, "no matching criteria");
    }
    let failed: Vec<String> = found
        .iter()
        .filter(|(_, c)| !c.pass)
        .map(|(l, c)| format!("[{l}] {} = {:.4} vs {}", c.name, c.value, c.threshold))
        .collect();
    if failed.is_empty() {
        let worst = found
            .iter()
            .map(|(l, c)| format!("[{l}] {:.3}/{:.3}", c.value, c.threshold))
            .collect::<Vec<_>>()
            .join(" ");
        Outcome::new(true, worst)
    } else {
        Outcome::new(false, failed.join("; "))
    }
}

fn both(a: Outcome, b: Outcome) -> Outcome {
    Outcome::new(a.pass && b.pass, format!("{}; {}", a.detail, b.detail))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Randomized invariants on a reduced grid: homogeneity, annihilation of
/// constants, weak <= strong, aperture and dictionary monotonicity.
fn invariants() -> Outcome {
    let cfg = ExperimentConfig {
        domain_half_width: 8.0,
        points: 512,
        eval_points: 128,
        ..ExperimentConfig::default()
    };
    let exp = Experiment::new(&cfg).expect("reduced experiment");
    let small = exp
        .dict
        .prefix(exp.dict.len() / 2)
        .expect("dictionary prefix");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut cases, mut violations) = (0usize, Vec::new());
    for case in 0..40 {
        let k = rng.gen_range(1..6);
        let heights: Vec<f64> = (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let f = SampledFunction::from_fn(exp.grid.clone(), |x| {
            if x[0].abs() < 1.0 {
                heights[(((x[0] + 1.0) / 2.0 * k as f64) as usize).min(k - 1)]
            } else {
                0.0
            }
        })
        .unwrap();
        let c = rng.gen_range(-5.0..5.0);
        let cf = f.scaled(c).unwrap();
        let x = [rng.gen_range(-2.0..2.0)];
        let t = rng.gen_range(0.1..1.0);
        let mut check = |name: &str, ok: bool| {
            cases += 1;
            if !ok {
                violations.push(format!("case {case}: {name}"));
            }
        };
        let pairs = [
            (
                "A",
                intrinsic_a(&f, &x, t, &exp.dict).unwrap(),
                intrinsic_a(&cf, &x, t, &exp.dict).unwrap(),
            ),
            (
                "S",
                area_function(&f, &x, 1.0, &exp.cone, &exp.dict).unwrap(),
                area_function(&cf, &x, 1.0, &exp.cone, &exp.dict).unwrap(),
            ),
            (
                "g",
                g_function(&f, &x, &exp.cone, &exp.dict).unwrap(),
                g_function(&cf, &x, &exp.cone, &exp.dict).unwrap(),
            ),
            (
                "g*",
                gstar_function(&f, &x, 4.5, &exp.cone, &exp.dict).unwrap(),
                gstar_function(&cf, &x, 4.5, &exp.cone, &exp.dict).unwrap(),
            ),
        ];
        for (name, base, scaled) in pairs {
            check(
                &format!("homogeneity of {name}"),
                rel(c.abs() * base, scaled) <= 1e-12,
            );
        }
        let constant = SampledFunction::from_fn(exp.grid.clone(), |_| c).unwrap();
        // exact only at cone lattice nodes, which sit on half-cell multiples
        let half = 0.5 * exp.grid.spacing();
        let node = [(x[0] / half).round() * half];
        check(
            "constant annihilated",
            intrinsic_a(&constant, &node, t, &exp.dict).unwrap() <= 1e-10 * c.abs().max(1.0),
        );
        let p = rng.gen_range(0.3..3.0);
        for w in [
            Weight::unit(1).unwrap(),
            Weight::power(-0.5, vec![0.0]).unwrap(),
        ] {
            let (weak, strong) = (
                weak_lp_norm(&f, &w, p).unwrap(),
                lp_norm(&f, &w, p).unwrap(),
            );
            check("weak <= strong", weak <= strong * (1.0 + 1e-12));
        }
        let beta = rng.gen_range(0.5..2.0);
        let narrow = area_function(&f, &x, beta, &exp.cone, &exp.dict).unwrap();
        let wide = area_function(&f, &x, 2.0 * beta, &exp.cone, &exp.dict).unwrap();
        check("aperture monotone", wide >= narrow);
        check(
            "dictionary monotone (A)",
            intrinsic_a(&f, &x, t, &exp.dict).unwrap() >= intrinsic_a(&f, &x, t, &small).unwrap(),
        );
        check(
            "dictionary monotone (g)",
            g_function(&f, &x, &exp.cone, &exp.dict).unwrap()
                >= g_function(&f, &x, &exp.cone, &small).unwrap(),
        );
    }
    let detail = format!("{} checks, {} violations", cases, violations.len());
    if violations.is_empty() {
        Outcome::new(true, detail)
    } else {
        Outcome::new(false, format!("{detail}: {}", violations.join(", ")))
    }
}

fn expect_refused(cfg: &ExperimentConfig, suite: Suite) -> Outcome {
    match suite.run(cfg) {
        Err(HarnessError::Refused { reason, .. }) => {
            Outcome::new(true, format!("{suite} refused ({reason})"))
        }
        Err(e) => Outcome::new(false, format!("{suite} errored instead of refusing: {e}")),
        Ok(_) => Outcome::new(false, format!("{suite} ran where it must refuse")),
    }
}

fn theorems(runs: &[Run]) -> Outcome {
    let mut out = judge(&criteria(runs, Suite::Theorem1, &[]));
    out = both(out, judge(&criteria(runs, Suite::Theorem2, &[])));
    out = both(out, judge(&criteria(runs, Suite::Theorem3, &[])));
    let at_threshold = ExperimentConfig {
        lambdas: vec![4.0],
        ..unit_weight()
    };
    out = both(out, expect_refused(&at_threshold, Suite::Theorem3));
    let not_a1 = ExperimentConfig {
        weight: WeightSpec::Power {
            a: 1.0,
            center: vec![0.0],
        },
        ..unit_weight()
    };
    both(out, expect_refused(&not_a1, Suite::Theorem1))
}

fn reproducibility(runs: &[Run]) -> Outcome {
    let again = Suite::FarField.run(&unit_weight()).expect("farfield rerun");
    let first = to_json(runs[0].report(Suite::FarField)).unwrap();
    let identical = first == to_json(&again).unwrap();
    let mut unstable = Vec::new();
    let mut checks = 0;
    for run in runs {
        for r in &run.reports {
            for s in &r.stability {
                checks += 1;
                if !s.pass {
                    unstable.push(format!(
                        "[{}] {} {}: {:.3} > {}",
                        run.label, r.suite, s.name, s.relative_change, s.tolerance
                    ));
                }
            }
        }
    }
    let pass = identical && unstable.is_empty() && checks > 0;
    let mut detail = format!(
        "rerun byte-identical: {identical}; {checks} stability checks, {} failed",
        unstable.len()
    );
    if !unstable.is_empty() {
        detail = format!("{detail}: {}", unstable.join("; "));
    }
    Outcome::new(pass, detail)
}

fn main() -> ExitCode {
    let runs = [
        Run::execute("w=1", &unit_weight()),
        Run::execute("w=|x|^-1/2", &inverse_sqrt_weight()),
    ];
    let results: Vec<(&str, Outcome)> = vec![
        ("randomized operator and norm invariants", invariants()),
        (
            "weight doubling within the A_1 bound",
            judge(&criteria(&runs, Suite::LemmaA, &[])),
        ),
        (
            "pointwise convolution bound and uniform L1 bound",
            judge(&criteria(
                &runs,
                Suite::FarField,
                &["pointwise", "L1 bound"],
            )),
        ),
        (
            "far-field decay slopes of g and S",
            judge(&criteria(&runs, Suite::FarField, &["slope"])),
        ),
        (
            "aperture growth exponent",
            judge(&criteria(&runs, Suite::Aperture, &["exponent"])),
        ),
        (
            "far-field growth in the aperture",
            judge(&criteria(&runs, Suite::FarField, &["growth"])),
        ),
        ("uniform weak-type bounds for g, S and g*", theorems(&runs)),
        (
            "superposition of weak L^p_w functions",
            judge(&criteria(&runs, Suite::Lemma31, &[])),
        ),
        (
            "L^2_w bound for g*",
            judge(&criteria(&runs, Suite::Lemma41, &[])),
        ),
        (
            "reproducibility and discretization stability",
            reproducibility(&runs),
        ),
    ];
    let mut all = true;
    for (i, (name, o)) in results.iter().enumerate() {
        all &= o.pass;
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
