//! Weighted strong and weak Lebesgue quasi-norms, the `Lip(α,1,0)` norm and
//! the superposition combinator for weak-type sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SampledFunction;
use crate::weights::{CubeFamily, Weight};

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "exponent must be positive and finite, got {p}"
        )));
    }
    Ok(())
}

/// `(∫ |f|^p w)^{1/p}` with the weight's cell masses.
pub fn lp_norm(f: &SampledFunction, w: &Weight, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let masses = w.cell_masses(f.grid())?;
    Ok(lp_norm_with_masses(f.values(), &masses, p))
}

pub(crate) fn lp_norm_with_masses(values: &[f64], masses: &[f64], p: f64) -> f64 {
    let sum: f64 = values
        .iter()
        .zip(masses)
        .filter(|(v, _)| **v != 0.0)
        .map(|(v, m)| v.abs().powf(p) * m)
        .sum();
    sum.powf(1.0 / p)
}

fn check_samples(values: &[f64], masses: &[f64]) -> Result<()> {
    if values.len() != masses.len() {
        return Err(Error::InvalidArgument(format!(
            "{} values but {} masses",
            values.len(),
            masses.len()
        )));
    }
    if let Some(m) = masses.iter().find(|m| !(**m >= 0.0) || !m.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "masses must be finite and nonnegative, got {m}"
        )));
    }
    Ok(())
}

/// [`lp_norm`] for samples carrying arbitrary masses, such as a locally
/// refined quadrature.
pub fn lp_norm_samples(values: &[f64], masses: &[f64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    check_samples(values, masses)?;
    Ok(lp_norm_with_masses(values, masses, p))
}

/// [`weak_lp_norm`] for samples carrying arbitrary masses.
pub fn weak_lp_norm_samples(values: &[f64], masses: &[f64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    check_samples(values, masses)?;
    Ok(weak_lp_norm_with_masses(values, masses, p))
}

/// Distribution function of `|f|` sampled at its own values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetProfile {
    /// `(λ, w{|f| > λ})`, `λ` increasing from `0` to `max |f|`, measures nonincreasing.
    pub levels: Vec<(f64, f64)>,
}

/// `|f_i|` paired with cell masses, sorted by decreasing value (index breaks ties).
fn sorted_masses(values: &[f64], masses: &[f64]) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(usize, f64, f64)> = values
        .iter()
        .zip(masses)
        .enumerate()
        .filter(|(_, (v, _))| **v != 0.0)
        .map(|(i, (v, m))| (i, v.abs(), *m))
        .collect();
    pairs.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    pairs.into_iter().map(|(_, v, m)| (v, m)).collect()
}

pub fn level_set_profile(f: &SampledFunction, w: &Weight) -> Result<LevelSetProfile> {
    let masses = w.cell_masses(f.grid())?;
    let pairs = sorted_masses(f.values(), &masses);
    // measure strictly above each distinct value, accumulated from the top
    let mut above = Vec::new();
    let mut acc = 0.0;
    let mut k = 0;
    while k < pairs.len() {
        let v = pairs[k].0;
        above.push((v, acc));
        while k < pairs.len() && pairs[k].0 == v {
            acc += pairs[k].1;
            k += 1;
        }
    }
    let mut levels = vec![(0.0, acc)];
    levels.extend(above.into_iter().rev());
    Ok(LevelSetProfile { levels })
}

/// `sup_{λ>0} λ · w({|f| > λ})^{1/p}`.
///
/// On a step function the supremum is approached as `λ` increases to one of
/// the sample values, so only those are inspected.
pub fn weak_lp_norm(f: &SampledFunction, w: &Weight, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let masses = w.cell_masses(f.grid())?;
    Ok(weak_lp_norm_with_masses(f.values(), &masses, p))
}

pub(crate) fn weak_lp_norm_with_masses(values: &[f64], masses: &[f64], p: f64) -> f64 {
    let pairs = sorted_masses(values, masses);
    let mut best: f64 = 0.0;
    let mut acc = 0.0;
    let mut k = 0;
    while k < pairs.len() {
        let v = pairs[k].0;
        while k < pairs.len() && pairs[k].0 == v {
            acc += pairs[k].1;
            k += 1;
        }
        best = best.max(v * acc.powf(1.0 / p));
    }
    best
}

/// `max_Q |Q|^{-1-α/n} ∫_Q |b - b_Q|` over the family.
pub fn lip_norm(b: &SampledFunction, alpha: f64, family: &CubeFamily) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    let grid = b.grid();
    let n = grid.dim() as f64;
    let vol = grid.cell_volume();
    let mut best: f64 = 0.0;
    for cube in family.cubes() {
        let idx = grid.indices_in(cube)?;
        let measure = idx.len() as f64 * vol;
        let mean = idx.iter().map(|&i| b.values()[i]).sum::<f64>() * vol / measure;
        let osc = idx
            .iter()
            .map(|&i| (b.values()[i] - mean).abs())
            .sum::<f64>()
            * vol;
        best = best.max(osc / measure.powf(1.0 + alpha / n));
    }
    Ok(best)
}

/// Result of combining unit weak-norm functions.
#[derive(Debug, Clone, PartialEq)]
pub struct Superposition {
    pub combined: SampledFunction,
    /// `‖Σ λ_j f_j‖^p_{WL^p_w}`.
    pub lhs: f64,
    /// `Σ |λ_j|^p`.
    pub sum_coeff: f64,
    /// `(2 - p)/(1 - p)`.
    pub bound: f64,
    /// Largest `‖f_j‖_{WL^p_w}`.
    pub max_member_norm: f64,
    /// Both hypotheses (unit weak norms, coefficient sum at most one) hold numerically.
    pub preconditions_hold: bool,
    pub within_bound: bool,
}

/// Slack allowed when certifying the unit-norm and coefficient hypotheses.
pub const SUPERPOSITION_CERT_SLACK: f64 = 1e-12;

/// Pointwise `Σ λ_j f_j` with its weak quasi-norm and the superposition bound.
/// Finite families only.
pub fn superpose(
    fs: &[SampledFunction],
    lambdas: &[f64],
    p: f64,
    w: &Weight,
) -> Result<Superposition> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "superposition needs 0 < p < 1, got {p}"
        )));
    }
    if fs.is_empty() || fs.len() != lambdas.len() {
        return Err(Error::InvalidArgument(
            "need one coefficient per function".into(),
        ));
    }
    let grid = fs[0].grid().clone();
    if fs.iter().any(|f| *f.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    let masses = w.cell_masses(&grid)?;
    let mut values = vec![0.0; grid.len()];
    for (f, &l) in fs.iter().zip(lambdas) {
        for (acc, v) in values.iter_mut().zip(f.values()) {
            *acc += l * v;
        }
    }
    let max_member_norm = fs
        .iter()
        .map(|f| weak_lp_norm_with_masses(f.values(), &masses, p))
        .fold(0.0, f64::max);
    let sum_coeff: f64 = lambdas.iter().map(|l| l.abs().powf(p)).sum();
    let lhs = weak_lp_norm_with_masses(&values, &masses, p).powf(p);
    let bound = (2.0 - p) / (1.0 - p);
    let preconditions_hold = max_member_norm <= 1.0 + SUPERPOSITION_CERT_SLACK
        && sum_coeff <= 1.0 + SUPERPOSITION_CERT_SLACK;
    Ok(Superposition {
        combined: SampledFunction::new(grid, values)?,
        lhs,
        sum_coeff,
        bound,
        max_member_norm,
        preconditions_hold,
        within_bound: lhs <= bound,
    })
}
