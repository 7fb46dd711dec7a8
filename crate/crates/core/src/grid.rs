//! Uniform cell-centred grids, sampled functions, midpoint quadrature and the
//! scaled convolution `f * φ_t` every operator in the crate is built from.
//!
//! Grid points sit at cell centres, so a cube whose faces lie on cell edges is
//! integrated exactly by the midpoint rule and a point singularity sitting on a
//! cell edge is never evaluated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ambient dimension handled by the crate.
pub const MAX_DIM: usize = 2;

/// Relative slack (in units of the grid spacing) used when deciding whether a
/// cell centre belongs to a cube.
const MEMBERSHIP_SLACK: f64 = 1e-9;

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(())
}

/// Axis-parallel cube `Q(x_0, side)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    center: Vec<f64>,
    side: f64,
}

impl Cube {
    pub fn new(center: Vec<f64>, side: f64) -> Result<Self> {
        check_dim(center.len())?;
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cube side must be positive, got {side}"
            )));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("cube center must be finite".into()));
        }
        Ok(Self { center, side })
    }

    /// The cube `[lo, hi]^n`.
    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        let side = hi[0] - lo[0];
        for d in 1..lo.len() {
            if ((hi[d] - lo[d]) - side).abs() > 1e-12 * side.abs().max(1.0) {
                return Err(Error::InvalidArgument(
                    "bounds do not describe a cube".into(),
                ));
            }
        }
        let center = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        Cube::new(center, side)
    }

    /// 1D interval `[a, b]`.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Cube::from_bounds(&[a], &[b])
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn half_side(&self) -> f64 {
        0.5 * self.side
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.center[axis] - 0.5 * self.side
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.center[axis] + 0.5 * self.side
    }

    /// Lebesgue measure `|Q|`.
    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim() as i32)
    }

    /// `λQ`: same centre, side multiplied by `lambda`.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        Cube::new(self.center.clone(), self.side * lambda)
    }

    pub fn translate(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: shift.len(),
            });
        }
        Cube::new(
            self.center.iter().zip(shift).map(|(c, s)| c + s).collect(),
            self.side,
        )
    }

    /// Half of the diagonal: the largest distance from the centre to a point of `Q`.
    pub fn circumradius(&self) -> f64 {
        0.5 * self.side * (self.dim() as f64).sqrt()
    }

    pub fn contains_point(&self, x: &[f64], slack: f64) -> bool {
        x.iter()
            .zip(&self.center)
            .all(|(xi, ci)| (xi - ci).abs() <= 0.5 * self.side + slack)
    }

    pub fn contains_cube(&self, other: &Cube, slack: f64) -> bool {
        other.dim() == self.dim()
            && (0..self.dim())
                .all(|d| other.lo(d) >= self.lo(d) - slack && other.hi(d) <= self.hi(d) + slack)
    }
}

/// Inclusive index range along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxisRange {
    pub first: usize,
    pub last: usize,
}

impl AxisRange {
    pub fn len(&self) -> usize {
        self.last + 1 - self.first
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Midpoint-rule grid on a cube: `points_per_axis` cells per axis, points at
/// cell centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    domain: Cube,
    points_per_axis: usize,
}

impl Grid {
    pub fn new(domain: Cube, points_per_axis: usize) -> Result<Self> {
        check_dim(domain.dim())?;
        if points_per_axis < 2 {
            return Err(Error::InvalidArgument(format!(
                "points_per_axis must be at least 2, got {points_per_axis}"
            )));
        }
        Ok(Self {
            domain,
            points_per_axis,
        })
    }

    pub fn domain(&self) -> &Cube {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn spacing(&self) -> f64 {
        self.domain.side() / self.points_per_axis as f64
    }

    /// Volume of one cell, `spacing^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim() as i32)
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Centre coordinate of cell `i` along `axis`.
    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.domain.lo(axis) + (i as f64 + 0.5) * self.spacing()
    }

    /// Per-axis cell indices of flat index `idx` (axis 0 varies fastest).
    #[inline]
    pub fn unflatten(&self, idx: usize) -> [usize; MAX_DIM] {
        let n = self.points_per_axis;
        match self.dim() {
            1 => [idx, 0],
            _ => [idx % n, idx / n],
        }
    }

    #[inline]
    pub fn flatten(&self, ij: [usize; MAX_DIM]) -> usize {
        match self.dim() {
            1 => ij[0],
            _ => ij[0] + self.points_per_axis * ij[1],
        }
    }

    /// Coordinates of grid point `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let ij = self.unflatten(idx);
        (0..self.dim()).map(|d| self.coord(d, ij[d])).collect()
    }

    /// All grid points in flat order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// The cell (as a cube) around grid point `idx`.
    pub fn cell(&self, idx: usize) -> Cube {
        Cube {
            center: self.point(idx),
            side: self.spacing(),
        }
    }

    /// Per-axis ranges of the cells whose centres lie in `region`.
    ///
    /// Fails when `region` is not contained in the domain or contains no cell centre.
    pub fn cell_ranges(&self, region: &Cube) -> Result<[AxisRange; MAX_DIM]> {
        if region.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: region.dim(),
            });
        }
        let h = self.spacing();
        let slack = MEMBERSHIP_SLACK * h;
        if !self.domain.contains_cube(region, slack) {
            return Err(Error::RegionOutsideDomain);
        }
        let mut out = [AxisRange { first: 0, last: 0 }; MAX_DIM];
        for (d, slot) in out.iter_mut().enumerate().take(self.dim()) {
            let lo = (region.lo(d) - self.domain.lo(d)) / h - 0.5;
            let hi = (region.hi(d) - self.domain.lo(d)) / h - 0.5;
            let first = (lo - MEMBERSHIP_SLACK).ceil().max(0.0) as usize;
            let last_f = (hi + MEMBERSHIP_SLACK).floor();
            if last_f < 0.0 {
                return Err(Error::InvalidArgument(
                    "region contains no grid point".into(),
                ));
            }
            let last = (last_f as usize).min(self.points_per_axis - 1);
            if first > last {
                return Err(Error::InvalidArgument(
                    "region contains no grid point".into(),
                ));
            }
            *slot = AxisRange { first, last };
        }
        Ok(out)
    }

    /// Flat indices of cells whose centres lie in `region`, in flat order.
    pub fn indices_in(&self, region: &Cube) -> Result<Vec<usize>> {
        let r = self.cell_ranges(region)?;
        let mut out = Vec::new();
        match self.dim() {
            1 => out.extend(r[0].first..=r[0].last),
            _ => {
                for j in r[1].first..=r[1].last {
                    for i in r[0].first..=r[0].last {
                        out.push(self.flatten([i, j]));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// `make_grid`: midpoint grid covering `domain` exactly.
pub fn make_grid(domain: Cube, points_per_axis: usize) -> Result<Grid> {
    Grid::new(domain, points_per_axis)
}

/// Real function sampled at the points of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
    support: Option<[AxisRange; MAX_DIM]>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "sampled values must be finite".into(),
            ));
        }
        let support = support_box(&grid, &values);
        Ok(Self {
            grid,
            values,
            support,
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        let values = vec![0.0; grid.len()];
        Self {
            grid,
            values,
            support: None,
        }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Bounding box (in cell indices) of the nonzero samples; `None` for the zero function.
    pub fn support_box(&self) -> Option<[AxisRange; MAX_DIM]> {
        self.support
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_none()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.values.iter().map(|v| c * v).collect(),
        )
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    /// `a·self + b·other` on a shared grid.
    pub fn linear_combination(&self, a: f64, other: &SampledFunction, b: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Self::new(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
    }

    /// Largest distance from `center` to a cell centre carrying a nonzero value.
    pub fn support_radius(&self, center: &[f64]) -> f64 {
        let mut r: f64 = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            if v != 0.0 {
                let p = self.grid.point(i);
                let d = p
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                r = r.max(d);
            }
        }
        r
    }

    /// Piecewise (bi)linear interpolant through the cell-centre samples,
    /// extended by zero samples one cell beyond the domain.
    pub fn sample_linear(&self, x: &[f64]) -> f64 {
        let g = &self.grid;
        let n = g.points_per_axis as isize;
        let inv_h = 1.0 / g.spacing();
        match g.dim() {
            1 => {
                let u = (x[0] - g.domain.lo(0)) * inv_h - 0.5;
                lerp_1d(&self.values, n, u)
            }
            _ => {
                let u = (x[0] - g.domain.lo(0)) * inv_h - 0.5;
                let v = (x[1] - g.domain.lo(1)) * inv_h - 0.5;
                lerp_2d(&self.values, n, u, v)
            }
        }
    }
}

#[inline]
fn lerp_1d(values: &[f64], n: isize, u: f64) -> f64 {
    if !(u > -1.0 && u < n as f64) {
        return 0.0;
    }
    let i = u.floor() as isize;
    let frac = u - i as f64;
    let at = |k: isize| {
        if k >= 0 && k < n {
            values[k as usize]
        } else {
            0.0
        }
    };
    let a = at(i);
    let b = at(i + 1);
    a + frac * (b - a)
}

#[inline]
fn lerp_2d(values: &[f64], n: isize, u: f64, v: f64) -> f64 {
    if !(u > -1.0 && u < n as f64 && v > -1.0 && v < n as f64) {
        return 0.0;
    }
    let i = u.floor() as isize;
    let j = v.floor() as isize;
    let fu = u - i as f64;
    let fv = v - j as f64;
    let at = |a: isize, b: isize| {
        if a >= 0 && a < n && b >= 0 && b < n {
            values[(a + n * b) as usize]
        } else {
            0.0
        }
    };
    let lo = at(i, j) + fu * (at(i + 1, j) - at(i, j));
    let hi = at(i, j + 1) + fu * (at(i + 1, j + 1) - at(i, j + 1));
    lo + fv * (hi - lo)
}

fn support_box(grid: &Grid, values: &[f64]) -> Option<[AxisRange; MAX_DIM]> {
    let mut lo = [usize::MAX; MAX_DIM];
    let mut hi = [0usize; MAX_DIM];
    let mut any = false;
    for (idx, &v) in values.iter().enumerate() {
        if v != 0.0 {
            any = true;
            let ij = grid.unflatten(idx);
            for d in 0..grid.dim() {
                lo[d] = lo[d].min(ij[d]);
                hi[d] = hi[d].max(ij[d]);
            }
        }
    }
    if !any {
        return None;
    }
    let mut out = [AxisRange { first: 0, last: 0 }; MAX_DIM];
    for d in 0..grid.dim() {
        out[d] = AxisRange {
            first: lo[d],
            last: hi[d],
        };
    }
    Some(out)
}

/// `∫_region f` by the midpoint rule over the cells whose centres lie in `region`.
pub fn integrate(f: &SampledFunction, region: &Cube) -> Result<f64> {
    let idx = f.grid.indices_in(region)?;
    let sum: f64 = idx.iter().map(|&i| f.values[i]).sum();
    Ok(sum * f.grid.cell_volume())
}

/// `∫ f` over the whole sampled domain.
pub fn integrate_all(f: &SampledFunction) -> f64 {
    f.values.iter().sum::<f64>() * f.grid.cell_volume()
}

/// `f * φ_t(y) = t^{-n} ∫ f(z) φ((y - z)/t) dz` by midpoint quadrature over the
/// grid of `f`, with `φ` read through its linear interpolant.
///
/// Only cells within the kernel's reach of `y` are visited, so the result is
/// exactly `0.0` when the supports do not meet.
pub fn convolve_scaled(
    f: &SampledFunction,
    phi: &SampledFunction,
    t: f64,
    y: &[f64],
) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scale t must be positive, got {t}"
        )));
    }
    let n = f.grid.dim();
    if phi.grid.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: phi.grid.dim(),
        });
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.len(),
        });
    }
    Ok(convolve_unchecked(f, phi, t, y))
}

/// Kernel reach in units of `t`: the interpolant of `phi` vanishes beyond it.
fn kernel_reach(phi: &SampledFunction) -> [f64; MAX_DIM] {
    let g = &phi.grid;
    let mut out = [0.0; MAX_DIM];
    for (d, slot) in out.iter_mut().enumerate().take(g.dim()) {
        // virtual zero samples sit half a cell outside the domain
        *slot = (g.domain.center[d].abs() + g.domain.half_side() + 0.5 * g.spacing()).max(0.0);
    }
    out
}

pub(crate) fn convolve_unchecked(
    f: &SampledFunction,
    phi: &SampledFunction,
    t: f64,
    y: &[f64],
) -> f64 {
    let Some(support) = f.support else {
        return 0.0;
    };
    let fg = &f.grid;
    let h = fg.spacing();
    let reach = kernel_reach(phi);
    let mut range = [AxisRange { first: 0, last: 0 }; MAX_DIM];
    for d in 0..fg.dim() {
        let lo = y[d] - t * reach[d];
        let hi = y[d] + t * reach[d];
        let first = (((lo - fg.domain.lo(d)) / h - 0.5).ceil().max(0.0)) as usize;
        let last_f = ((hi - fg.domain.lo(d)) / h - 0.5).floor();
        if last_f < 0.0 {
            return 0.0;
        }
        let first = first.max(support[d].first);
        let last = (last_f as usize).min(support[d].last);
        if first > last {
            return 0.0;
        }
        range[d] = AxisRange { first, last };
    }

    let pg = &phi.grid;
    let inv_ph = 1.0 / pg.spacing();
    let np = pg.points_per_axis as isize;
    let inv_t = 1.0 / t;
    let mut acc = 0.0;
    match fg.dim() {
        1 => {
            let base = (y[0] - pg.domain.lo(0) * t) * inv_t;
            for i in range[0].first..=range[0].last {
                let fv = f.values[i];
                if fv == 0.0 {
                    continue;
                }
                let z = fg.coord(0, i);
                let u = (base - z * inv_t) * inv_ph - 0.5;
                let pv = lerp_1d(&phi.values, np, u);
                acc += fv * pv;
            }
        }
        _ => {
            let n = fg.points_per_axis;
            for j in range[1].first..=range[1].last {
                let z1 = fg.coord(1, j);
                let v = ((y[1] - z1) * inv_t - pg.domain.lo(1)) * inv_ph - 0.5;
                for i in range[0].first..=range[0].last {
                    let fv = f.values[i + n * j];
                    if fv == 0.0 {
                        continue;
                    }
                    let z0 = fg.coord(0, i);
                    let u = ((y[0] - z0) * inv_t - pg.domain.lo(0)) * inv_ph - 0.5;
                    acc += fv * lerp_2d(&phi.values, np, u, v);
                }
            }
        }
    }
    acc * fg.cell_volume() * inv_t.powi(fg.dim() as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_interval_grid(n: usize) -> Grid {
        make_grid(Cube::interval(0.0, 1.0).unwrap(), n).unwrap()
    }

    #[test]
    fn midpoint_points_on_symmetric_interval() {
        let g = make_grid(Cube::interval(-1.0, 1.0).unwrap(), 4).unwrap();
        let pts: Vec<f64> = g.points().into_iter().map(|p| p[0]).collect();
        assert_eq!(pts, vec![-0.75, -0.25, 0.25, 0.75]);
        assert_eq!(g.spacing(), 0.5);
    }

    #[test]
    fn midpoint_points_two_cells() {
        let g = make_grid(Cube::interval(0.0, 2.0).unwrap(), 2).unwrap();
        let pts: Vec<f64> = g.points().into_iter().map(|p| p[0]).collect();
        assert_eq!(pts, vec![0.5, 1.5]);
    }

    #[test]
    fn rejects_single_point_and_high_dimension() {
        assert!(make_grid(Cube::interval(0.0, 1.0).unwrap(), 1).is_err());
        assert!(make_grid(Cube::interval(0.0, 1.0).unwrap(), 0).is_err());
        assert!(matches!(
            Cube::new(vec![0.0; 3], 1.0),
            Err(Error::UnsupportedDimension(3))
        ));
    }

    #[test]
    fn integrate_constant_is_exact() {
        let g = unit_interval_grid(64);
        let f = SampledFunction::from_fn(g, |_| 1.0).unwrap();
        assert_eq!(
            integrate(&f, &Cube::interval(0.0, 1.0).unwrap()).unwrap(),
            1.0
        );
    }

    #[test]
    fn integrate_odd_function_vanishes() {
        let g = make_grid(Cube::interval(-1.0, 1.0).unwrap(), 128).unwrap();
        let f = SampledFunction::from_fn(g, |x| x[0]).unwrap();
        assert_eq!(
            integrate(&f, &Cube::interval(-1.0, 1.0).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn integrate_square_matches_antiderivative() {
        let g = unit_interval_grid(1 << 12);
        let f = SampledFunction::from_fn(g, |x| x[0] * x[0]).unwrap();
        let v = integrate(&f, &Cube::interval(0.0, 1.0).unwrap()).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn integrate_rejects_escaping_region() {
        let g = unit_interval_grid(16);
        let f = SampledFunction::zeros(g);
        assert_eq!(
            integrate(&f, &Cube::interval(0.5, 1.5).unwrap()),
            Err(Error::RegionOutsideDomain)
        );
    }

    #[test]
    fn integrate_sub_region_in_2d() {
        let g = make_grid(Cube::new(vec![0.0, 0.0], 2.0).unwrap(), 32).unwrap();
        let f = SampledFunction::from_fn(g, |_| 1.0).unwrap();
        let q = Cube::new(vec![0.5, -0.5], 1.0).unwrap();
        assert!((integrate(&f, &q).unwrap() - 1.0).abs() < 1e-14);
    }

    fn odd_kernel(points: usize) -> SampledFunction {
        let g = make_grid(Cube::interval(-1.0, 1.0).unwrap(), points).unwrap();
        SampledFunction::from_fn(g, |x| {
            let u = x[0];
            if u.abs() < 0.9 {
                u * (0.81 - u * u)
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn convolution_of_zero_function() {
        let f = SampledFunction::zeros(make_grid(Cube::interval(-2.0, 2.0).unwrap(), 64).unwrap());
        assert_eq!(
            convolve_scaled(&f, &odd_kernel(65), 0.5, &[0.0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn mean_zero_kernel_annihilates_constants() {
        let g = make_grid(Cube::interval(-4.0, 4.0).unwrap(), 256).unwrap();
        let f = SampledFunction::from_fn(g.clone(), |_| 1.0).unwrap();
        let phi = odd_kernel(129);
        for idx in [100usize, 128, 150] {
            let y = g.point(idx);
            let v = convolve_scaled(&f, &phi, 1.0, &y).unwrap();
            assert!(v.abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn disjoint_supports_give_exact_zero() {
        let g = make_grid(Cube::interval(-1.0, 5.0).unwrap(), 96).unwrap();
        let f = SampledFunction::from_fn(g, |x| {
            if (0.0..=1.0).contains(&x[0]) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert_eq!(
            convolve_scaled(&f, &odd_kernel(64), 1.0, &[3.0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn rejects_nonpositive_scale() {
        let f = SampledFunction::zeros(unit_interval_grid(8));
        assert!(convolve_scaled(&f, &odd_kernel(16), 0.0, &[0.5]).is_err());
        assert!(convolve_scaled(&f, &odd_kernel(16), -1.0, &[0.5]).is_err());
    }

    #[test]
    fn linear_interpolant_reproduces_samples() {
        let phi = odd_kernel(33);
        for i in 0..33 {
            let x = phi.grid().point(i);
            assert!((phi.sample_linear(&x) - phi.values()[i]).abs() < 1e-15);
        }
        assert_eq!(phi.sample_linear(&[1.5]), 0.0);
    }
}
