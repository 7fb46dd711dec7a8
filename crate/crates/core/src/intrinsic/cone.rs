//! Discretisation of the upper half-space `R^n × (0, ∞)` with the measure
//! `dy dt / t^{n+1}`.
//!
//! Scales are geometric, `t_j = t_min ρ^j`, each carrying the weight `ln ρ`
//! of `dt/t`. At scale `t_j` the spatial nodes form an unbounded lattice of
//! half-cell multiples of the function grid with spacing at most `t_j / 4`,
//! so the cross-section of every cone is covered and every node sits on a
//! symmetry centre of the grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction, MAX_DIM};

pub const DEFAULT_RATIO: f64 = 1.189_207_115_002_721; // 2^{1/4}
pub const DEFAULT_K_MAX: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeParams {
    pub t_min: f64,
    pub t_max: f64,
    pub ratio: f64,
    /// Spatial truncation of the `g*` integral: `|x − y| < 2^{k_max} t`.
    pub k_max: u32,
}

impl ConeParams {
    /// `t_min = 2h`, `t_max = 4 · side`, `ρ = 2^{1/4}`, `K_max = 6`.
    pub fn for_grid(grid: &Grid) -> Self {
        Self {
            t_min: 2.0 * grid.spacing(),
            t_max: 4.0 * grid.domain().side(),
            ratio: DEFAULT_RATIO,
            k_max: DEFAULT_K_MAX,
        }
    }
}

/// One scale of the cone grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeLevel {
    pub t: f64,
    /// Node spacing, an integer number of half cells.
    pub step: f64,
    /// Quadrature weight `step^n · t^{-n} · ln ρ`.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeGrid {
    params: ConeParams,
    n: usize,
    /// Lattice origin: the first cell centre of the function grid.
    origin: [f64; MAX_DIM],
    levels: Vec<ConeLevel>,
}

impl ConeGrid {
    pub fn new(grid: &Grid, params: ConeParams) -> Result<Self> {
        if !(params.t_min > 0.0) || !(params.ratio > 1.0) || !(params.t_max >= params.t_min) {
            return Err(Error::InvalidArgument(format!(
                "bad cone parameters {params:?}"
            )));
        }
        let h = grid.spacing();
        let half = 0.5 * h;
        let n = grid.dim();
        let mut origin = [0.0; MAX_DIM];
        for (d, o) in origin.iter_mut().enumerate().take(n) {
            *o = grid.coord(d, 0);
        }
        let count =
            ((params.t_max / params.t_min).ln() / params.ratio.ln() + 1e-9).floor() as usize + 1;
        let log_step = params.ratio.ln();
        let levels = (0..count)
            .map(|j| {
                let t = params.t_min * params.ratio.powi(j as i32);
                let halves = ((t / (4.0 * half)).floor() as usize).max(1);
                let step = halves as f64 * half;
                ConeLevel {
                    t,
                    step,
                    weight: (step / t).powi(n as i32) * log_step,
                }
            })
            .collect();
        Ok(Self {
            params,
            n,
            origin,
            levels,
        })
    }

    pub fn for_grid(grid: &Grid) -> Result<Self> {
        Self::new(grid, ConeParams::for_grid(grid))
    }

    pub fn params(&self) -> &ConeParams {
        &self.params
    }

    pub fn levels(&self) -> &[ConeLevel] {
        &self.levels
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Lattice coordinate `k` along `axis` at `level`.
    #[inline]
    pub fn node(&self, level: usize, axis: usize, k: i64) -> f64 {
        self.origin[axis] + k as f64 * self.levels[level].step
    }

    /// Inclusive lattice index range along `axis` covering `[lo, hi]`.
    pub fn index_range(&self, level: usize, axis: usize, lo: f64, hi: f64) -> (i64, i64) {
        let step = self.levels[level].step;
        let a = ((lo - self.origin[axis]) / step).ceil() as i64;
        let b = ((hi - self.origin[axis]) / step).floor() as i64;
        (a, b)
    }

    /// Lattice nodes at `level` whose kernel ball of radius `t·reach` can meet
    /// the support of `f`; nodes outside give `A = 0` exactly.
    pub fn active_nodes(
        &self,
        level: usize,
        f: &SampledFunction,
        reach: f64,
    ) -> Vec<[f64; MAX_DIM]> {
        let Some(support) = f.support_box() else {
            return Vec::new();
        };
        let g = f.grid();
        let h = g.spacing();
        let t = self.levels[level].t;
        let mut ranges = [(0i64, -1i64); MAX_DIM];
        for d in 0..self.n {
            let lo = g.coord(d, support[d].first) - t * reach - h;
            let hi = g.coord(d, support[d].last) + t * reach + h;
            ranges[d] = self.index_range(level, d, lo, hi);
        }
        let mut out = Vec::new();
        match self.n {
            1 => {
                for k in ranges[0].0..=ranges[0].1 {
                    out.push([self.node(level, 0, k), 0.0]);
                }
            }
            _ => {
                for k1 in ranges[1].0..=ranges[1].1 {
                    for k0 in ranges[0].0..=ranges[0].1 {
                        out.push([self.node(level, 0, k0), self.node(level, 1, k1)]);
                    }
                }
            }
        }
        out
    }
}
