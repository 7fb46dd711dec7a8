//! Shared inputs of the verification suites, built once per configuration.

use intrinsic_sq::atoms::{build_atom, required_moment_order, Atom, AtomExponents, Profile};
use intrinsic_sq::intrinsic::dictionary::{DEFAULT_RESOLUTION_1D, DEFAULT_RESOLUTION_2D};
use intrinsic_sq::intrinsic::{ConeGrid, ConeParams, DictionaryParams, TestFunctionDictionary};
use intrinsic_sq::norms::{lp_norm_samples, weak_lp_norm_samples};
use intrinsic_sq::weights::{a1_report, critical_index, A1Report};
use intrinsic_sq::{make_grid, Cube, CubeFamily, Error, Grid, SampledFunction, Weight};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ProfileKind};
use crate::error::{HarnessError, Result};

/// One atom of the sweep.
#[derive(Debug, Clone)]
pub struct SweepAtom {
    pub index: usize,
    /// Half side of the cube.
    pub r: f64,
    pub center: Vec<f64>,
    pub seed: u64,
    pub atom: Atom,
}

impl SweepAtom {
    pub fn label(&self) -> String {
        format!("atom-{:02}", self.index)
    }

    pub fn cube(&self) -> &Cube {
        self.atom.cube()
    }

    pub fn function(&self) -> &SampledFunction {
        self.atom.function()
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub cfg: ExperimentConfig,
    pub p: f64,
    pub grid: Grid,
    pub eval_grid: Grid,
    /// `w` mass of each evaluation cell.
    pub eval_masses: Vec<f64>,
    pub weight: Weight,
    pub dict: TestFunctionDictionary,
    pub cone: ConeGrid,
    pub family: CubeFamily,
}

/// SplitMix64 step, used to derive independent per-atom seeds.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Experiment {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n;
        let lw = cfg.domain_half_width;
        let domain = Cube::from_bounds(&vec![-lw; n], &vec![lw; n])?;
        let grid = make_grid(domain.clone(), cfg.points)?;
        let eval_grid = make_grid(domain.clone(), cfg.eval_points)?;
        let weight = Weight::from_spec(&cfg.weight)?;
        if weight.ambient_n() != n {
            return Err(HarnessError::Config(format!(
                "weight is {}-dimensional, experiment is {n}-dimensional",
                weight.ambient_n()
            )));
        }
        let mut dp =
            DictionaryParams::new(n, cfg.alpha, cfg.dictionary.size, cfg.dictionary_seed());
        dp.resolution = cfg.dictionary.resolution.unwrap_or(if n == 1 {
            DEFAULT_RESOLUTION_1D
        } else {
            DEFAULT_RESOLUTION_2D
        });
        let dict = TestFunctionDictionary::build(&dp)?;
        let eval_masses = weight.cell_masses(&eval_grid)?;
        let cone = ConeGrid::new(&grid, cone_params(cfg, &grid, None))?;
        let mut fp = cfg.family.clone();
        if fp.anchor.as_ref().is_some_and(|a| a.len() != n) {
            fp.anchor = Some(vec![0.0; n]);
        }
        let family = CubeFamily::dyadic(&domain, &fp)?;
        Ok(Self {
            cfg: cfg.clone(),
            p: cfg.p(),
            grid,
            eval_grid,
            eval_masses,
            weight,
            dict,
            cone,
            family,
        })
    }

    /// Same experiment with a dictionary of `size` members (a superset when larger).
    pub fn with_dictionary_size(&self, size: usize) -> Result<Self> {
        let mut cfg = self.cfg.clone();
        cfg.dictionary.size = size;
        Self::new(&cfg)
    }

    /// Same experiment on a grid with `points` per axis.
    pub fn with_points(&self, points: usize) -> Result<Self> {
        let mut cfg = self.cfg.clone();
        cfg.points = points;
        Self::new(&cfg)
    }

    pub fn n(&self) -> usize {
        self.cfg.n
    }

    pub fn alpha(&self) -> f64 {
        self.cfg.alpha
    }

    /// Cone grid reaching `t_max_sides` domain sides, for far-field work.
    pub fn far_cone(&self) -> Result<ConeGrid> {
        let t_max = self.cfg.far_field.t_max_sides * self.grid.domain().side();
        Ok(ConeGrid::new(
            &self.grid,
            cone_params(&self.cfg, &self.grid, Some(t_max)),
        )?)
    }

    pub fn a1_screen(&self) -> Result<A1Report> {
        Ok(a1_report(
            &self.weight,
            &self.family,
            &self.grid,
            self.cfg.a1_threshold,
        )?)
    }

    /// Refuses with the measured constant unless the weight passes the `A_1` screen.
    pub fn require_a1(&self, suite: &str) -> Result<A1Report> {
        let screen = self.a1_screen()?;
        if !screen.is_a1 {
            return Err(HarnessError::Refused {
                suite: suite.to_string(),
                reason: format!(
                    "weight fails the A_1 screen: constant {} exceeds threshold {}{}",
                    screen.constant,
                    screen.threshold,
                    screen
                        .note
                        .as_deref()
                        .map(|n| format!(" ({n})"))
                        .unwrap_or_default()
                ),
            });
        }
        Ok(screen)
    }

    /// Moment order required of the sweep atoms.
    pub fn moment_order(&self) -> Result<u32> {
        let q_w = if self.a1_screen()?.is_a1 {
            1.0
        } else {
            critical_index(
                &self.weight,
                &self.family,
                &self.grid,
                self.cfg.a1_threshold,
            )?
        };
        if !q_w.is_finite() {
            return Err(HarnessError::Config(
                "weight has no finite critical index on this family".into(),
            ));
        }
        Ok(required_moment_order(self.p, q_w, self.n()))
    }

    /// Builds the atom sweep: every scale × shift, skipping degenerate profiles
    /// after the configured number of retries.
    pub fn atoms(&self) -> Result<Vec<SweepAtom>> {
        let exponents = AtomExponents::new(self.p, self.cfg.q, self.moment_order()?)?;
        let sweep = &self.cfg.atoms;
        let mut specs = Vec::new();
        for &k in &sweep.scales_log2 {
            let r = 2f64.powi(k);
            for &shift in &sweep.shifts {
                specs.push((r, vec![shift * r; self.n()]));
            }
        }
        let built: Vec<Option<SweepAtom>> = specs
            .into_par_iter()
            .enumerate()
            .map(|(index, (r, center))| -> Result<Option<SweepAtom>> {
                let cube = Cube::new(center.clone(), 2.0 * r)?;
                for attempt in 0..=sweep.max_retries {
                    let seed = mix_seed(self.cfg.seed, (index as u64) << 8 | attempt as u64);
                    let profile = match sweep.profile {
                        ProfileKind::Random => Profile::Random { seed },
                        ProfileKind::Sign => Profile::Sign,
                        ProfileKind::Zero => Profile::Zero,
                    };
                    match build_atom(&self.grid, &cube, exponents, &self.weight, &profile) {
                        Ok(atom) => {
                            return Ok(Some(SweepAtom {
                                index,
                                r,
                                center: center.clone(),
                                seed,
                                atom,
                            }))
                        }
                        Err(Error::DegenerateProfile) => continue,
                        Err(e) => return Err(e.into()),
                    }
                }
                Ok(None)
            })
            .collect::<Result<_>>()?;
        let atoms: Vec<SweepAtom> = built.into_iter().flatten().collect();
        if atoms.is_empty() {
            return Err(HarnessError::EmptySweep(
                "every profile was degenerate".into(),
            ));
        }
        Ok(atoms)
    }

    /// Point at which the operator is sampled for evaluation cell `i`: the
    /// midpoint of the computation grid cell containing the cell centre. Atom
    /// supports end on computation cell faces, where the square functions of
    /// a discontinuous atom are singular, so samples never sit on a face.
    pub fn eval_sample_point(&self, i: usize) -> Vec<f64> {
        let h = self.grid.spacing();
        let domain = self.grid.domain();
        let last = self.grid.points_per_axis() - 1;
        self.eval_grid
            .point(i)
            .iter()
            .enumerate()
            .map(|(d, c)| {
                let k = (((c - domain.lo(d)) / h + 1e-9).floor() as usize).min(last);
                domain.lo(d) + (k as f64 + 0.5) * h
            })
            .collect()
    }

    /// Samples `op` for the statistics of an atom supported in `q`.
    ///
    /// Evaluation cells within one evaluation spacing of a face of `q` are
    /// split into computation cells, since the square functions of an atom
    /// with a jump grow logarithmically at its faces. Every other cell keeps
    /// the single sample of [`Experiment::eval_sample_point`].
    pub fn sample_for_atom(
        &self,
        q: &Cube,
        op: impl Fn(&[f64]) -> f64 + Sync,
    ) -> Result<EvalSamples> {
        let spacing = self.eval_grid.spacing();
        let split = (spacing / self.grid.spacing()).round() as usize;
        let mut points = Vec::new();
        let mut masses = Vec::new();
        for i in 0..self.eval_grid.len() {
            let cell = self.eval_grid.cell(i);
            if split > 1 && near_faces(&cell, q, spacing) {
                let sub = make_grid(cell, split)?;
                masses.extend(self.weight.cell_masses(&sub)?);
                points.extend(sub.points());
            } else {
                points.push(self.eval_sample_point(i));
                masses.push(self.eval_masses[i]);
            }
        }
        let values = points.par_iter().map(|x| op(x)).collect();
        Ok(EvalSamples { values, masses })
    }

    /// Samples `op` on the evaluation grid, in parallel and in grid order.
    pub fn sample_on_eval_grid(
        &self,
        op: impl Fn(&[f64]) -> f64 + Sync,
    ) -> Result<SampledFunction> {
        let values: Vec<f64> = (0..self.eval_grid.len())
            .into_par_iter()
            .map(|i| op(&self.eval_sample_point(i)))
            .collect();
        Ok(SampledFunction::new(self.eval_grid.clone(), values)?)
    }
}

fn cone_params(cfg: &ExperimentConfig, grid: &Grid, t_max: Option<f64>) -> ConeParams {
    let base = ConeParams::for_grid(grid);
    ConeParams {
        t_min: cfg.cone.t_min.unwrap_or(base.t_min),
        t_max: t_max.or(cfg.cone.t_max).unwrap_or(base.t_max),
        ratio: cfg.cone.ratio,
        k_max: cfg.cone.k_max,
    }
}

/// Operator samples paired with the `w` masses they represent.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSamples {
    pub values: Vec<f64>,
    pub masses: Vec<f64>,
}

impl EvalSamples {
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        Ok(lp_norm_samples(&self.values, &self.masses, p)?)
    }

    pub fn weak_lp_norm(&self, p: f64) -> Result<f64> {
        Ok(weak_lp_norm_samples(&self.values, &self.masses, p)?)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Whether `cell` lies within `margin` of the boundary of `q`.
fn near_faces(cell: &Cube, q: &Cube, margin: f64) -> bool {
    let meets =
        (0..q.dim()).all(|d| cell.lo(d) < q.hi(d) + margin && cell.hi(d) > q.lo(d) - margin);
    let interior =
        (0..q.dim()).all(|d| cell.lo(d) >= q.lo(d) + margin && cell.hi(d) <= q.hi(d) - margin);
    meets && !interior
}

/// Euclidean distance from `x` to the cube.
pub fn distance_to_cube(x: &[f64], cube: &Cube) -> f64 {
    (0..cube.dim())
        .map(|d| {
            let e = (x[d] - cube.lo(d)).min(0.0).abs() + (x[d] - cube.hi(d)).max(0.0);
            e * e
        })
        .sum::<f64>()
        .sqrt()
}

/// Points `x_0 ± d e_1` for `d` geometric from `inner · r` to `outer · r`.
pub fn far_points(
    atom: &SweepAtom,
    inner: f64,
    outer: f64,
    samples: usize,
) -> Vec<(f64, Vec<f64>)> {
    let mut out = Vec::new();
    for sign in [1.0, -1.0] {
        for i in 0..samples {
            let d = atom.r * inner * (outer / inner).powf(i as f64 / (samples - 1) as f64);
            let mut x = atom.center.clone();
            x[0] += sign * d;
            out.push((d, x));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_samples_avoid_cell_faces() {
        let exp = Experiment::new(&ExperimentConfig::default()).unwrap();
        let h = exp.grid.spacing();
        for i in [0, 1, 511, 512, 1023] {
            let x = exp.eval_sample_point(i)[0];
            let offset = ((x - exp.grid.domain().lo(0)) / h).fract();
            assert!((offset - 0.5).abs() < 1e-9);
            assert!((x - exp.eval_grid.point(i)[0]).abs() <= 0.5 * h + 1e-12);
        }
    }

    #[test]
    fn refined_samples_keep_total_mass() {
        let exp = Experiment::new(&ExperimentConfig::default()).unwrap();
        let q = Cube::new(vec![-0.5625], 0.5).unwrap();
        let s = exp.sample_for_atom(&q, |x| x[0]).unwrap();
        let total: f64 = s.masses.iter().sum();
        assert!((total - exp.eval_masses.iter().sum::<f64>()).abs() < 1e-9);
        assert!(s.values.len() > exp.eval_grid.len());
        // each face touches a few evaluation cells, each split into 4
        assert!(s.values.len() < exp.eval_grid.len() + 40);
        let ones = exp.sample_for_atom(&q, |_| 1.0).unwrap();
        assert!((ones.lp_norm(1.0).unwrap() - 128.0).abs() < 1e-9);
    }

    #[test]
    fn seeds_are_distinct() {
        let a: Vec<u64> = (0..64).map(|i| mix_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(a.len(), b.len());
    }

    #[test]
    fn cube_distance() {
        let c = Cube::interval(-1.0, 1.0).unwrap();
        assert_eq!(distance_to_cube(&[3.0], &c), 2.0);
        assert_eq!(distance_to_cube(&[-4.0], &c), 3.0);
        assert_eq!(distance_to_cube(&[0.5], &c), 0.0);
    }

    #[test]
    fn zero_profiles_give_empty_sweep() {
        let mut cfg = ExperimentConfig {
            points: 256,
            eval_points: 64,
            domain_half_width: 16.0,
            ..Default::default()
        };
        cfg.dictionary.size = 1;
        cfg.atoms.profile = ProfileKind::Zero;
        let exp = Experiment::new(&cfg).unwrap();
        assert!(matches!(exp.atoms(), Err(HarnessError::EmptySweep(_))));
    }

    #[test]
    fn sweep_covers_scales_and_shifts() {
        let mut cfg = ExperimentConfig {
            points: 512,
            eval_points: 64,
            domain_half_width: 16.0,
            ..Default::default()
        };
        cfg.dictionary.size = 1;
        let exp = Experiment::new(&cfg).unwrap();
        let atoms = exp.atoms().unwrap();
        assert_eq!(atoms.len(), 20);
        assert!(atoms
            .iter()
            .all(|a| (a.cube().side() - 2.0 * a.r).abs() < 1e-15));
    }
}
