//! Intrinsic maximal convolution `A_α` and the square functions built from it:
//! the area function `S_{α,β}`, the `g_α` function and `g*_{λ,α}`.
//!
//! The supremum over `C_α` is taken over a finite [`TestFunctionDictionary`],
//! so every value here is a lower bound of the corresponding true operator.

pub mod cone;
pub mod dictionary;

use serde::{Deserialize, Serialize};

pub use cone::{ConeGrid, ConeLevel, ConeParams};
pub use dictionary::{
    certify_member, DictionaryParams, Generator, MemberCertificate, TestFunctionDictionary,
};

use crate::error::{Error, Result};
use crate::grid::{convolve_unchecked, SampledFunction, MAX_DIM};

fn check_point(f: &SampledFunction, dict: &TestFunctionDictionary, x: &[f64]) -> Result<()> {
    let n = f.grid().dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    if dict.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: dict.dim(),
        });
    }
    Ok(())
}

/// Radius (in units of `t`) beyond which every member's interpolant vanishes.
fn dictionary_reach(dict: &TestFunctionDictionary) -> f64 {
    let h = dict.members()[0].phi.grid().spacing();
    1.0 + h
}

#[inline]
fn a_unchecked(f: &SampledFunction, y: &[f64], t: f64, dict: &TestFunctionDictionary) -> f64 {
    dict.members()
        .iter()
        .map(|m| convolve_unchecked(f, &m.phi, t, y).abs())
        .fold(0.0, f64::max)
}

/// `A_α(f)(y, t) = max_{φ ∈ dict} |f * φ_t(y)|`.
pub fn intrinsic_a(
    f: &SampledFunction,
    y: &[f64],
    t: f64,
    dict: &TestFunctionDictionary,
) -> Result<f64> {
    check_point(f, dict, y)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scale t must be positive, got {t}"
        )));
    }
    Ok(a_unchecked(f, y, t, dict))
}

#[inline]
fn dist(x: &[f64], y: &[f64; MAX_DIM]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Nonzero values of `A_α(f)` on the cone lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSamples {
    n: usize,
    k_max: u32,
    levels: Vec<LevelSamples>,
}

#[derive(Debug, Clone, PartialEq)]
struct LevelSamples {
    t: f64,
    weight: f64,
    /// `(y, A(y, t)^2)` with `A > 0`, lattice order.
    nodes: Vec<([f64; MAX_DIM], f64)>,
}

/// `g*` split over the annuli `2^{k-1} t <= |x - y| < 2^k t` (`k = 0` is the cone `|x - y| < t`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnularSum {
    /// `g*` value from annuli `0..=K`.
    pub value: f64,
    /// Contribution of each annulus to `g*²`.
    pub increments: Vec<f64>,
}

impl ConeSamples {
    /// `A_α(f)` at every lattice node where it can be nonzero.
    pub fn compute(
        f: &SampledFunction,
        cone: &ConeGrid,
        dict: &TestFunctionDictionary,
    ) -> Result<Self> {
        Self::compute_filtered(f, cone, dict, |_, _| true)
    }

    /// Like [`compute`](Self::compute) but only at nodes accepted by `keep(t, y)`.
    pub fn compute_filtered(
        f: &SampledFunction,
        cone: &ConeGrid,
        dict: &TestFunctionDictionary,
        keep: impl Fn(f64, &[f64; MAX_DIM]) -> bool,
    ) -> Result<Self> {
        let n = f.grid().dim();
        if cone.dim() != n || dict.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: cone.dim(),
            });
        }
        if cone.levels().is_empty() {
            return Err(Error::InvalidArgument("cone grid has no levels".into()));
        }
        let reach = dictionary_reach(dict);
        let levels = cone
            .levels()
            .iter()
            .enumerate()
            .map(|(j, level)| {
                let nodes = cone
                    .active_nodes(j, f, reach)
                    .into_iter()
                    .filter(|y| keep(level.t, y))
                    .filter_map(|y| {
                        let a = a_unchecked(f, &y[..n], level.t, dict);
                        (a > 0.0).then_some((y, a * a))
                    })
                    .collect();
                LevelSamples {
                    t: level.t,
                    weight: level.weight,
                    nodes,
                }
            })
            .collect();
        Ok(Self {
            n,
            k_max: cone.params().k_max,
            levels,
        })
    }

    /// `S_{α,β}(f)(x)`: nodes with `|x - y| < β t`.
    pub fn area(&self, x: &[f64], beta: f64) -> f64 {
        let mut total = 0.0;
        for level in &self.levels {
            let r = beta * level.t;
            let s: f64 = level
                .nodes
                .iter()
                .filter(|(y, _)| dist(x, y) < r)
                .map(|(_, a2)| a2)
                .sum();
            total += level.weight * s;
        }
        total.sqrt()
    }

    /// `g*_{λ,α}(f)(x)` truncated to `|x - y| < 2^{K_max} t`.
    pub fn gstar(&self, x: &[f64], lambda: f64) -> f64 {
        let exponent = lambda * self.n as f64;
        let reach = 2f64.powi(self.k_max as i32);
        let mut total = 0.0;
        for level in &self.levels {
            let t = level.t;
            let s: f64 = level
                .nodes
                .iter()
                .filter_map(|(y, a2)| {
                    let d = dist(x, y);
                    (d < reach * t).then(|| (t / (t + d)).powf(exponent) * a2)
                })
                .sum();
            total += level.weight * s;
        }
        total.sqrt()
    }

    /// Annulus-by-annulus evaluation of `g*` up to annulus `k`.
    pub fn gstar_annular(&self, x: &[f64], lambda: f64, k: u32) -> AnnularSum {
        let exponent = lambda * self.n as f64;
        let mut increments = vec![0.0; k as usize + 1];
        for level in &self.levels {
            let t = level.t;
            let mut per = vec![0.0; k as usize + 1];
            for (y, a2) in &level.nodes {
                let d = dist(x, y);
                let annulus = if d < t {
                    0
                } else {
                    ((d / t).log2().floor() as i64 + 1).max(1) as usize
                };
                // guard the floating log2 at annulus edges
                let annulus = fix_annulus(d, t, annulus);
                if annulus <= k as usize {
                    per[annulus] += (t / (t + d)).powf(exponent) * a2;
                }
            }
            for (acc, v) in increments.iter_mut().zip(per) {
                *acc += level.weight * v;
            }
        }
        let value = increments.iter().sum::<f64>().sqrt();
        AnnularSum { value, increments }
    }

    /// Number of stored nonzero nodes.
    pub fn node_count(&self) -> usize {
        self.levels.iter().map(|l| l.nodes.len()).sum()
    }
}

/// Annulus index `k` with `2^{k-1} t <= d < 2^k t` (`0` inside the unit cone).
fn fix_annulus(d: f64, t: f64, mut k: usize) -> usize {
    if d < t {
        return 0;
    }
    while k > 1 && d < 2f64.powi(k as i32 - 1) * t {
        k -= 1;
    }
    while d >= 2f64.powi(k as i32) * t {
        k += 1;
    }
    k
}

fn check_x(
    f: &SampledFunction,
    dict: &TestFunctionDictionary,
    cone: &ConeGrid,
    x: &[f64],
) -> Result<()> {
    check_point(f, dict, x)?;
    if cone.dim() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: cone.dim(),
        });
    }
    Ok(())
}

/// `S_{α,β}(f)(x)`; `β = 1` is the area function `S_α`.
pub fn area_function(
    f: &SampledFunction,
    x: &[f64],
    beta: f64,
    cone: &ConeGrid,
    dict: &TestFunctionDictionary,
) -> Result<f64> {
    check_x(f, dict, cone, x)?;
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "aperture must be positive, got {beta}"
        )));
    }
    let samples = ConeSamples::compute_filtered(f, cone, dict, |t, y| dist(x, y) < beta * t)?;
    Ok(samples.area(x, beta))
}

/// `g_α(f)(x) = (Σ_j A_α(f)(x, t_j)^2 ln ρ)^{1/2}`.
pub fn g_function(
    f: &SampledFunction,
    x: &[f64],
    cone: &ConeGrid,
    dict: &TestFunctionDictionary,
) -> Result<f64> {
    check_x(f, dict, cone, x)?;
    let log_step = cone.params().ratio.ln();
    let mut total = 0.0;
    for level in cone.levels() {
        let a = a_unchecked(f, x, level.t, dict);
        total += log_step * a * a;
    }
    Ok(total.sqrt())
}

/// `g*_{λ,α}(f)(x)` with the spatial truncation of the cone grid.
pub fn gstar_function(
    f: &SampledFunction,
    x: &[f64],
    lambda: f64,
    cone: &ConeGrid,
    dict: &TestFunctionDictionary,
) -> Result<f64> {
    check_x(f, dict, cone, x)?;
    if !(lambda > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "g* needs lambda > 1, got {lambda}"
        )));
    }
    let reach = 2f64.powi(cone.params().k_max as i32);
    let samples = ConeSamples::compute_filtered(f, cone, dict, |t, y| dist(x, y) < reach * t)?;
    Ok(samples.gstar(x, lambda))
}

/// `g*` assembled from annuli `k = 0..=K`.
pub fn gstar_via_apertures(
    f: &SampledFunction,
    x: &[f64],
    lambda: f64,
    k: u32,
    cone: &ConeGrid,
    dict: &TestFunctionDictionary,
) -> Result<AnnularSum> {
    check_x(f, dict, cone, x)?;
    if k < 1 {
        return Err(Error::InvalidArgument(
            "need at least one annulus beyond the cone (K >= 1)".into(),
        ));
    }
    if !(lambda > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "g* needs lambda > 1, got {lambda}"
        )));
    }
    let reach = 2f64.powi(k as i32);
    let samples = ConeSamples::compute_filtered(f, cone, dict, |t, y| dist(x, y) < reach * t)?;
    Ok(samples.gstar_annular(x, lambda, k))
}
