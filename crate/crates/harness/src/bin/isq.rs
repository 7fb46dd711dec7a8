use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use intrinsic_sq::atoms::{atom_l1_bound_check, validate_atom, AtomTolerances};
use intrinsic_sq::intrinsic::{g_function, ConeSamples};
use intrinsic_sq::weights::{a1_report, ap_constant, critical_index};
use isq_harness::report::{read_report, to_csv, to_json};
use isq_harness::{emit_report, Experiment, ExperimentConfig, HarnessError, ReportFormat, Suite};

#[derive(Parser)]
#[command(
    name = "isq",
    version,
    about = "Weighted intrinsic square function experiments"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON experiment configuration; defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Grid points per axis.
    #[arg(long, global = true)]
    points: Option<usize>,
    #[arg(long, global = true)]
    dict_size: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// A_1 screen, optional A_p constant and critical index of the configured weight.
    Apconst {
        #[arg(long)]
        p: Option<f64>,
    },
    /// Build or validate the configured atom sweep.
    Atom {
        #[command(subcommand)]
        action: AtomAction,
    },
    /// Evaluate a square function of one sweep atom.
    Sq {
        #[command(subcommand)]
        op: SqOp,
    },
    /// Run verification suites and write one report per suite.
    Verify {
        /// Suites to run: thm1 thm2 thm3 lemA lem31 lem41 aperture farfield, or all.
        #[arg(required = true)]
        suites: Vec<String>,
    },
    /// Summarise previously written JSON reports.
    Report {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AtomAction {
    /// Write every sweep atom as CSV into the output directory.
    Gen,
    /// Validate every sweep atom and print its certificate.
    Check,
}

#[derive(Args)]
struct SqArgs {
    /// Index of the atom in the sweep.
    #[arg(long, default_value_t = 0)]
    atom: usize,
    /// Evaluation point (comma separated); omitted means the whole evaluation grid as CSV.
    #[arg(long, value_delimiter = ',')]
    x: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum SqOp {
    /// g_α
    G(SqArgs),
    /// S_{α,β}
    S {
        #[command(flatten)]
        args: SqArgs,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    /// g*_{λ,α}
    Gstar {
        #[command(flatten)]
        args: SqArgs,
        #[arg(long, default_value_t = 4.5)]
        lambda: f64,
    },
}

fn load_config(g: &Global) -> Result<ExperimentConfig> {
    let mut cfg = match &g.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(p) = g.points {
        cfg.points = p;
    }
    if let Some(d) = g.dict_size {
        cfg.dictionary.size = d;
    }
    if let Some(o) = &g.out_dir {
        cfg.out_dir = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("isq-out"))
}

fn extension(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Csv => "csv",
    }
}

fn apconst(cfg: &ExperimentConfig, p: Option<f64>) -> Result<bool> {
    let exp = Experiment::new(cfg)?;
    let screen = a1_report(&exp.weight, &exp.family, &exp.grid, cfg.a1_threshold)?;
    let mut out = serde_json::json!({
        "a1": serde_json::to_value(&screen)?,
        "critical_index": critical_index(&exp.weight, &exp.family, &exp.grid, cfg.a1_threshold)?,
        "family_cubes": exp.family.len(),
    });
    if let Some(p) = p {
        out["ap"] = serde_json::json!({ "p": p, "constant": ap_constant(&exp.weight, p, &exp.family, &exp.grid)? });
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(true)
}

fn atom(cfg: &ExperimentConfig, action: &AtomAction) -> Result<bool> {
    let exp = Experiment::new(cfg)?;
    let atoms = exp.atoms()?;
    match action {
        AtomAction::Gen => {
            let dir = out_dir(cfg);
            std::fs::create_dir_all(&dir).with_context(|| dir.display().to_string())?;
            for a in &atoms {
                let path = dir.join(format!("{}.csv", a.label()));
                let file =
                    std::fs::File::create(&path).with_context(|| path.display().to_string())?;
                a.atom.write_csv(std::io::BufWriter::new(file))?;
            }
            println!("wrote {} atoms to {}", atoms.len(), dir.display());
            Ok(true)
        }
        AtomAction::Check => {
            let mut all = true;
            for a in &atoms {
                let cert = validate_atom(&a.atom, &AtomTolerances::default())?;
                let l1 = atom_l1_bound_check(&a.atom)?;
                all &= cert.accepted;
                println!(
                    "{} r={} center={:?} accepted={} norm_ratio={:.6} l1_ratio={:.6}",
                    a.label(),
                    a.r,
                    a.center,
                    cert.accepted,
                    cert.norm_ratio,
                    l1.ratio
                );
            }
            Ok(all)
        }
    }
}

fn sq(cfg: &ExperimentConfig, op: &SqOp) -> Result<bool> {
    let exp = Experiment::new(cfg)?;
    let atoms = exp.atoms()?;
    let args = match op {
        SqOp::G(a) | SqOp::S { args: a, .. } | SqOp::Gstar { args: a, .. } => a,
    };
    let Some(a) = atoms.get(args.atom) else {
        bail!(
            "atom index {} out of range (sweep has {})",
            args.atom,
            atoms.len()
        );
    };
    let f = a.function();
    let samples = match op {
        SqOp::G(_) => None,
        _ => Some(ConeSamples::compute(f, &exp.cone, &exp.dict)?),
    };
    let eval = |x: &[f64]| -> f64 {
        match (op, &samples) {
            (SqOp::G(_), _) => g_function(f, x, &exp.cone, &exp.dict).unwrap_or(f64::NAN),
            (SqOp::S { beta, .. }, Some(cs)) => cs.area(x, *beta),
            (SqOp::Gstar { lambda, .. }, Some(cs)) => cs.gstar(x, *lambda),
            _ => f64::NAN,
        }
    };
    if let SqOp::Gstar { lambda, .. } = op {
        if lambda.is_nan() || *lambda <= 1.0 {
            bail!("g* needs lambda > 1, got {lambda}");
        }
    }
    match &args.x {
        Some(x) => {
            if x.len() != exp.n() {
                bail!("point has {} coordinates, expected {}", x.len(), exp.n());
            }
            println!("{}", eval(x));
        }
        None => {
            let sampled = exp.sample_on_eval_grid(eval)?;
            println!(
                "{}",
                (0..exp.n())
                    .map(|d| format!("x{d}"))
                    .chain(["value".to_string()])
                    .collect::<Vec<_>>()
                    .join(",")
            );
            for (i, v) in sampled.values().iter().enumerate() {
                let p = exp.eval_sample_point(i);
                println!(
                    "{},{}",
                    p.iter()
                        .map(|c| c.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                    v
                );
            }
        }
    }
    Ok(true)
}

fn verify(cfg: &ExperimentConfig, names: &[String], format: Format) -> Result<bool> {
    let suites: Vec<Suite> = if names.iter().any(|s| s == "all") {
        Suite::ALL.to_vec()
    } else {
        names
            .iter()
            .map(|s| s.parse::<Suite>())
            .collect::<std::result::Result<_, _>>()?
    };
    let dir = out_dir(cfg);
    let mut all = true;
    for suite in suites {
        match suite.run(cfg) {
            Ok(report) => {
                let path = dir.join(format!("{}.{}", suite.name(), extension(format)));
                emit_report(&report, format.into(), &path)?;
                println!(
                    "{:<9} {} -> {}",
                    suite.name(),
                    if report.pass { "PASS" } else { "FAIL" },
                    path.display()
                );
                for c in report.criteria.iter().filter(|c| !c.pass) {
                    println!(
                        "          failed: {} (value {}, threshold {})",
                        c.name, c.value, c.threshold
                    );
                }
                for s in report.stability.iter().filter(|s| !s.pass) {
                    println!(
                        "          unstable: {} ({:.3} > {})",
                        s.name, s.relative_change, s.tolerance
                    );
                }
                all &= report.pass;
            }
            Err(HarnessError::Refused {
                suite: name,
                reason,
            }) => {
                println!("{:<9} REFUSED: {reason}", name);
                all = false;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(all)
}

fn report(files: &[PathBuf], format: Format) -> Result<bool> {
    let mut all = true;
    for f in files {
        let r = read_report(Path::new(f))?;
        match format {
            Format::Json => print!("{}", to_json(&r)?),
            Format::Csv => print!("{}", to_csv(&r)),
        }
        eprintln!(
            "{:<9} {} ({})",
            r.suite,
            if r.pass { "PASS" } else { "FAIL" },
            f.display()
        );
        all &= r.pass;
    }
    Ok(all)
}

fn run(cli: Cli) -> Result<bool> {
    if let Command::Report { files } = &cli.command {
        return report(files, cli.global.format);
    }
    let cfg = load_config(&cli.global)?;
    match &cli.command {
        Command::Apconst { p } => apconst(&cfg, *p),
        Command::Atom { action } => atom(&cfg, action),
        Command::Sq { op } => sq(&cfg, op),
        Command::Verify { suites } => verify(&cfg, suites, cli.global.format),
        Command::Report { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
