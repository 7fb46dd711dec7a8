//! Muckenhoupt weights: weighted measures, `A_p` / `A_1` constants over a finite
//! family of cubes, the critical index and doubling ratios.
//!
//! The supremum over "every cube" is replaced by a maximum over a [`CubeFamily`];
//! callers judge membership by a threshold and by stability under refinement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cube, Grid, SampledFunction};

/// Default cutoff used to call a measured constant "finite".
pub const DEFAULT_MEMBERSHIP_THRESHOLD: f64 = 50.0;

/// Serializable description of a weight.
///
/// ```json
/// {"kind":"power","a":-0.5,"center":[0.0]}
/// {"kind":"constant","value":1.0,"n":1}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightSpec {
    Power {
        a: f64,
        center: Vec<f64>,
    },
    Constant {
        value: f64,
        #[serde(default = "default_dim")]
        n: usize,
    },
    Tabulated {
        domain: Cube,
        points_per_axis: usize,
        values: Vec<f64>,
    },
}

fn default_dim() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// `|x - center|^a`.
    Power {
        a: f64,
        center: Vec<f64>,
    },
    Constant(f64),
    /// Piecewise constant on the cells of the sampled grid.
    Tabulated(SampledFunction),
}

/// Nonnegative locally integrable weight on `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    kind: WeightKind,
    ambient_n: usize,
}

impl Weight {
    pub fn power(a: f64, center: Vec<f64>) -> Result<Self> {
        let n = center.len();
        if n == 0 || n > crate::grid::MAX_DIM {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(a > -(n as f64)) || !a.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "power exponent {a} is not locally integrable in dimension {n}"
            )));
        }
        Ok(Self {
            kind: WeightKind::Power { a, center },
            ambient_n: n,
        })
    }

    pub fn constant(value: f64, n: usize) -> Result<Self> {
        if n == 0 || n > crate::grid::MAX_DIM {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "constant weight must be positive, got {value}"
            )));
        }
        Ok(Self {
            kind: WeightKind::Constant(value),
            ambient_n: n,
        })
    }

    pub fn unit(n: usize) -> Result<Self> {
        Self::constant(1.0, n)
    }

    pub fn tabulated(table: SampledFunction) -> Result<Self> {
        if table.values().iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidArgument(
                "tabulated weight has negative values".into(),
            ));
        }
        if table.is_zero() {
            return Err(Error::InvalidArgument(
                "tabulated weight vanishes identically".into(),
            ));
        }
        let n = table.grid().dim();
        Ok(Self {
            kind: WeightKind::Tabulated(table),
            ambient_n: n,
        })
    }

    pub fn from_spec(spec: &WeightSpec) -> Result<Self> {
        match spec {
            WeightSpec::Power { a, center } => Weight::power(*a, center.clone()),
            WeightSpec::Constant { value, n } => Weight::constant(*value, *n),
            WeightSpec::Tabulated {
                domain,
                points_per_axis,
                values,
            } => {
                let grid = Grid::new(domain.clone(), *points_per_axis)?;
                Weight::tabulated(SampledFunction::new(grid, values.clone())?)
            }
        }
    }

    pub fn to_spec(&self) -> WeightSpec {
        match &self.kind {
            WeightKind::Power { a, center } => WeightSpec::Power {
                a: *a,
                center: center.clone(),
            },
            WeightKind::Constant(v) => WeightSpec::Constant {
                value: *v,
                n: self.ambient_n,
            },
            WeightKind::Tabulated(t) => WeightSpec::Tabulated {
                domain: t.grid().domain().clone(),
                points_per_axis: t.grid().points_per_axis(),
                values: t.values().to_vec(),
            },
        }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn ambient_n(&self) -> usize {
        self.ambient_n
    }

    /// `c·w`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidArgument(
                "weights can only be scaled by positive factors".into(),
            ));
        }
        Ok(match &self.kind {
            // |x - x0|^a has no free constant; tabulate the product instead of inventing one.
            WeightKind::Power { .. } => {
                return Err(Error::InvalidArgument(
                    "scale a power weight through a tabulated weight".into(),
                ))
            }
            WeightKind::Constant(v) => Weight::constant(v * c, self.ambient_n)?,
            WeightKind::Tabulated(t) => Weight::tabulated(t.scaled(c)?)?,
        })
    }

    /// Point value `w(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            WeightKind::Power { a, center } => {
                let r = x
                    .iter()
                    .zip(center)
                    .map(|(p, c)| (p - c) * (p - c))
                    .sum::<f64>()
                    .sqrt();
                r.powf(*a)
            }
            WeightKind::Constant(v) => *v,
            WeightKind::Tabulated(t) => tabulated_lookup(t, x),
        }
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.dim() != self.ambient_n {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_n,
                found: grid.dim(),
            });
        }
        Ok(())
    }

    /// Point values at every grid point.
    pub fn point_values(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.check_grid(grid)?;
        Ok((0..grid.len()).map(|i| self.eval(&grid.point(i))).collect())
    }

    /// `∫_cell w^s` for every cell of `grid`.
    ///
    /// One-dimensional power weights are integrated exactly cell by cell (a
    /// cell touching the singularity gets `+∞` when the power is not locally
    /// integrable); everything else uses `w(center)^s · h^n`.
    pub fn cell_integrals(&self, grid: &Grid, s: f64) -> Result<Vec<f64>> {
        self.check_grid(grid)?;
        let h = grid.spacing();
        let vol = grid.cell_volume();
        let out = match &self.kind {
            WeightKind::Constant(v) => vec![v.powf(s) * vol; grid.len()],
            WeightKind::Power { a, center } if grid.dim() == 1 => {
                let e = a * s;
                (0..grid.len())
                    .map(|i| {
                        let l = grid.coord(0, i) - 0.5 * h - center[0];
                        power_cell_integral(l, l + h, e)
                    })
                    .collect()
            }
            _ => (0..grid.len())
                .map(|i| {
                    let v = self.eval(&grid.point(i));
                    pow_or_inf(v, s) * vol
                })
                .collect(),
        };
        Ok(out)
    }

    /// Weighted cell masses `w(cell)`.
    pub fn cell_masses(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.cell_integrals(grid, 1.0)
    }
}

fn pow_or_inf(v: f64, s: f64) -> f64 {
    if v == 0.0 && s < 0.0 {
        f64::INFINITY
    } else {
        v.powf(s)
    }
}

fn tabulated_lookup(t: &SampledFunction, x: &[f64]) -> f64 {
    let g = t.grid();
    let h = g.spacing();
    let mut ij = [0usize; crate::grid::MAX_DIM];
    for d in 0..g.dim() {
        let u = ((x[d] - g.domain().lo(d)) / h).floor();
        if u < 0.0 || u >= g.points_per_axis() as f64 {
            return 0.0;
        }
        ij[d] = u as usize;
    }
    t.values()[g.flatten(ij)]
}

/// `∫_l^u |x|^e dx` for a cell `[l, u]` given relative to the singular point.
fn power_cell_integral(l: f64, u: f64, e: f64) -> f64 {
    if l >= 0.0 {
        one_sided(l, u, e)
    } else if u <= 0.0 {
        one_sided(-u, -l, e)
    } else {
        one_sided(0.0, -l, e) + one_sided(0.0, u, e)
    }
}

/// `∫_l^u x^e dx` for `0 <= l < u`.
fn one_sided(l: f64, u: f64, e: f64) -> f64 {
    if l == 0.0 {
        if e <= -1.0 {
            return f64::INFINITY;
        }
        return u.powf(e + 1.0) / (e + 1.0);
    }
    let ratio = (u - l) / l;
    if e == -1.0 {
        return ratio.ln_1p();
    }
    // l^{e+1} ((u/l)^{e+1} - 1)/(e+1) without cancellation for cells far from 0
    l.powf(e + 1.0) * ((e + 1.0) * ratio.ln_1p()).exp_m1() / (e + 1.0)
}

/// `w(E) = ∫_E w` with the weight's cell masses on `grid`.
pub fn weighted_measure(w: &Weight, grid: &Grid, e: &Cube) -> Result<f64> {
    let masses = w.cell_masses(grid)?;
    let idx = grid.indices_in(e)?;
    Ok(idx.iter().map(|&i| masses[i]).sum())
}

/// Finite family of cubes standing in for "every cube" in the weight classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeFamily {
    cubes: Vec<Cube>,
}

/// Parameters of [`CubeFamily::dyadic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    /// Scales are `side = domain_side · 2^{-s}` for `s` in `min_level..=max_level`.
    pub min_level: u32,
    pub max_level: u32,
    /// Translates advance by `side / translate_divisor`.
    pub translate_divisor: u32,
    /// Cubes with a corner at, or centred on, this point are always included.
    pub anchor: Option<Vec<f64>>,
}

impl Default for FamilyParams {
    fn default() -> Self {
        Self {
            min_level: 1,
            max_level: 8,
            translate_divisor: 8,
            anchor: Some(vec![0.0]),
        }
    }
}

impl FamilyParams {
    /// One more dyadic level and twice as many translates.
    pub fn refined(&self) -> Self {
        Self {
            min_level: self.min_level,
            max_level: self.max_level + 1,
            translate_divisor: self.translate_divisor * 2,
            anchor: self.anchor.clone(),
        }
    }
}

impl CubeFamily {
    pub fn new(cubes: Vec<Cube>) -> Result<Self> {
        if cubes.is_empty() {
            return Err(Error::InvalidArgument("cube family is empty".into()));
        }
        let n = cubes[0].dim();
        if cubes.iter().any(|c| c.dim() != n) {
            return Err(Error::InvalidArgument(
                "cube family mixes dimensions".into(),
            ));
        }
        Ok(Self { cubes })
    }

    /// Dyadic scales × lattice translates × anchored cubes, all inside `domain`.
    pub fn dyadic(domain: &Cube, params: &FamilyParams) -> Result<Self> {
        let n = domain.dim();
        if params.translate_divisor == 0 || params.min_level > params.max_level {
            return Err(Error::InvalidArgument("bad cube family parameters".into()));
        }
        let slack = 1e-12 * domain.side();
        let mut cubes = Vec::new();
        for level in params.min_level..=params.max_level {
            let side = domain.side() / 2f64.powi(level as i32);
            let step = side / params.translate_divisor as f64;
            let count = ((domain.side() - side) / step + 1e-9).floor() as usize + 1;
            let lo: Vec<f64> = (0..n).map(|d| domain.lo(d)).collect();
            let mut push = |center: Vec<f64>| {
                if let Ok(c) = Cube::new(center, side) {
                    if domain.contains_cube(&c, slack) && !cubes.contains(&c) {
                        cubes.push(c);
                    }
                }
            };
            match n {
                1 => {
                    for k in 0..count {
                        push(vec![lo[0] + 0.5 * side + k as f64 * step]);
                    }
                }
                _ => {
                    for j in 0..count {
                        for k in 0..count {
                            push(vec![
                                lo[0] + 0.5 * side + k as f64 * step,
                                lo[1] + 0.5 * side + j as f64 * step,
                            ]);
                        }
                    }
                }
            }
            if let Some(anchor) = &params.anchor {
                if anchor.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: anchor.len(),
                    });
                }
                push(anchor.clone());
                let signs: Vec<[f64; 2]> = match n {
                    1 => vec![[1.0, 0.0], [-1.0, 0.0]],
                    _ => vec![[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]],
                };
                for s in signs {
                    push((0..n).map(|d| anchor[d] + s[d] * 0.5 * side).collect());
                }
            }
        }
        CubeFamily::new(cubes)
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn max_side(&self) -> f64 {
        self.cubes.iter().map(|c| c.side()).fold(0.0, f64::max)
    }
}

/// Per-cube sums of precomputed cell data.
fn cube_sum(grid: &Grid, data: &[f64], cube: &Cube) -> Result<(f64, usize)> {
    let idx = grid.indices_in(cube)?;
    Ok((idx.iter().map(|&i| data[i]).sum(), idx.len()))
}

/// Largest value over the family together with the cube attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMax {
    pub value: f64,
    pub worst_cube: Cube,
}

/// `max_Q (avg_Q w)(avg_Q w^{-1/(p-1)})^{p-1}` over the family.
pub fn ap_constant(w: &Weight, p: f64, family: &CubeFamily, grid: &Grid) -> Result<f64> {
    Ok(ap_constant_detail(w, p, family, grid)?.value)
}

pub fn ap_constant_detail(
    w: &Weight,
    p: f64,
    family: &CubeFamily,
    grid: &Grid,
) -> Result<FamilyMax> {
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ap_constant needs p > 1 (got {p}); use a1_constant for p = 1"
        )));
    }
    let masses = w.cell_masses(grid)?;
    let dual = w.cell_integrals(grid, -1.0 / (p - 1.0))?;
    let mut best: Option<FamilyMax> = None;
    for cube in family.cubes() {
        let vol = grid.cell_volume();
        let (m, count) = cube_sum(grid, &masses, cube)?;
        let (d, _) = cube_sum(grid, &dual, cube)?;
        let measure = count as f64 * vol;
        let avg_w = m / measure;
        let avg_d = d / measure;
        let value = if avg_d.is_infinite() || avg_w.is_infinite() {
            f64::INFINITY
        } else {
            avg_w * avg_d.powf(p - 1.0)
        };
        let value = if value.is_nan() { f64::INFINITY } else { value };
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(FamilyMax {
                value,
                worst_cube: cube.clone(),
            });
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("cube family is empty".into()))
}

/// `max_Q avg_Q w / min_{x ∈ Q} w(x)` over the family, the minimum taken over grid points.
pub fn a1_constant(w: &Weight, family: &CubeFamily, grid: &Grid) -> Result<f64> {
    Ok(a1_constant_detail(w, family, grid)?.value)
}

pub fn a1_constant_detail(w: &Weight, family: &CubeFamily, grid: &Grid) -> Result<FamilyMax> {
    let masses = w.cell_masses(grid)?;
    let points = w.point_values(grid)?;
    let mut best: Option<FamilyMax> = None;
    for cube in family.cubes() {
        let idx = grid.indices_in(cube)?;
        let min = idx.iter().map(|&i| points[i]).fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::DegenerateWeight(
                "weight vanishes at a grid point; ess-inf surrogate is zero".into(),
            ));
        }
        let avg =
            idx.iter().map(|&i| masses[i]).sum::<f64>() / (idx.len() as f64 * grid.cell_volume());
        let value = avg / min;
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(FamilyMax {
                value,
                worst_cube: cube.clone(),
            });
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("cube family is empty".into()))
}

/// Outcome of an `A_1` screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A1Report {
    pub constant: f64,
    pub threshold: f64,
    pub is_a1: bool,
    pub worst_cube: Option<Cube>,
    pub note: Option<String>,
}

pub fn a1_report(w: &Weight, family: &CubeFamily, grid: &Grid, threshold: f64) -> Result<A1Report> {
    match a1_constant_detail(w, family, grid) {
        Ok(m) => Ok(A1Report {
            constant: m.value,
            threshold,
            is_a1: m.value <= threshold,
            worst_cube: Some(m.worst_cube),
            note: None,
        }),
        Err(Error::DegenerateWeight(msg)) => Ok(A1Report {
            constant: f64::INFINITY,
            threshold,
            is_a1: false,
            worst_cube: None,
            note: Some(msg),
        }),
        Err(e) => Err(e),
    }
}

const MAX_BRACKET_EXPONENT: f64 = 64.0;
const BISECTION_STEPS: usize = 48;

/// Estimate of `q_w = inf{q > 1 : w ∈ A_q}`: `1` when the `A_1` constant is
/// below `threshold`, otherwise bisection on `q ↦ [ap_constant(q) <= threshold]`.
/// Returns `+∞` when no tested `q` up to 64 passes.
pub fn critical_index(w: &Weight, family: &CubeFamily, grid: &Grid, threshold: f64) -> Result<f64> {
    if !(threshold > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must exceed 1, got {threshold}"
        )));
    }
    if a1_report(w, family, grid, threshold)?.is_a1 {
        return Ok(1.0);
    }
    let passes = |q: f64| -> Result<bool> { Ok(ap_constant(w, q, family, grid)? <= threshold) };
    let mut hi = 2.0;
    while !passes(hi)? {
        hi *= 2.0;
        if hi > MAX_BRACKET_EXPONENT {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = 1.0;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `w(λQ) / w(Q)`.
pub fn doubling_ratio(w: &Weight, grid: &Grid, q: &Cube, lambda: f64) -> Result<f64> {
    if !(lambda > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "dilation factor must exceed 1, got {lambda}"
        )));
    }
    let masses = w.cell_masses(grid)?;
    let big = q.dilate(lambda)?;
    let (inner, _) = cube_sum(grid, &masses, q)?;
    let (outer, _) = cube_sum(grid, &masses, &big)?;
    if !(inner > 0.0) {
        return Err(Error::DegenerateWeight("w(Q) vanishes".into()));
    }
    Ok(outer / inner)
}
