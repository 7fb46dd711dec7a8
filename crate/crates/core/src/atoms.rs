//! Weighted `(p, q, s)`-atoms: construction by moment projection and norm
//! saturation, validation of the support / size / moment conditions, and
//! finite atomic sums.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cube, Grid, SampledFunction};
use crate::norms::lp_norm_with_masses;
use crate::weights::Weight;

/// `max(0, ⌊n (q_w / p − 1)⌋)`: the least admissible vanishing-moment order.
pub fn required_moment_order(p: f64, critical_index: f64, n: usize) -> u32 {
    let v = n as f64 * (critical_index / p - 1.0);
    // absorb the rounding in 1/p, e.g. p = 2/3
    let v = (v + 1e-9).floor();
    if v <= 0.0 || !v.is_finite() {
        0
    } else {
        v as u32
    }
}

/// Shape fed to the moment projection before the size normalisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Profile {
    /// Smooth bump on `Q` times a random cubic polynomial.
    Random {
        seed: u64,
    },
    /// `sign(x_1 - c_1)`: antisymmetric, mean zero on a symmetric grid.
    Sign,
    Zero,
}

/// Exponents of an atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomExponents {
    pub p: f64,
    pub q: f64,
    pub s: u32,
}

impl AtomExponents {
    pub fn new(p: f64, q: f64, s: u32) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "atom exponent p must lie in (0, 1], got {p}"
            )));
        }
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "atom exponent q must lie in [1, ∞), got {q}"
            )));
        }
        if p == q {
            return Err(Error::InvalidArgument(
                "atom exponents require p ≠ q".into(),
            ));
        }
        Ok(Self { p, q, s })
    }
}

/// A sampled function together with the cube, exponents and weight it is an atom for.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    f: SampledFunction,
    cube: Cube,
    exponents: AtomExponents,
    weight: Weight,
}

impl Atom {
    /// Wraps an arbitrary function; use [`validate_atom`] to check it.
    pub fn from_parts(
        f: SampledFunction,
        cube: Cube,
        exponents: AtomExponents,
        weight: Weight,
    ) -> Self {
        Self {
            f,
            cube,
            exponents,
            weight,
        }
    }

    pub fn function(&self) -> &SampledFunction {
        &self.f
    }

    pub fn cube(&self) -> &Cube {
        &self.cube
    }

    pub fn exponents(&self) -> AtomExponents {
        self.exponents
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    /// Same atom data with the function multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Ok(Self {
            f: self.f.scaled(c)?,
            ..self.clone()
        })
    }

    /// `w(Q)^{1/q - 1/p}`.
    pub fn size_bound(&self) -> Result<f64> {
        let wq = crate::weights::weighted_measure(&self.weight, self.f.grid(), &self.cube)?;
        Ok(wq.powf(1.0 / self.exponents.q - 1.0 / self.exponents.p))
    }

    /// Plot-ready CSV: one row per grid point (`x,value` or `x1,x2,value`).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let g = self.f.grid();
        match g.dim() {
            1 => writeln!(out, "x,value")?,
            _ => writeln!(out, "x1,x2,value")?,
        }
        for (i, v) in self.f.values().iter().enumerate() {
            let p = g.point(i);
            let coords: Vec<String> = p.iter().map(|c| format!("{c:e}")).collect();
            writeln!(out, "{},{v:e}", coords.join(","))?;
        }
        Ok(())
    }
}

/// Multi-indices `β` with `|β| <= s` in dimension `n`, graded order.
pub fn multi_indices(n: usize, s: u32) -> Vec<[u32; 2]> {
    let mut out = Vec::new();
    for total in 0..=s {
        match n {
            1 => out.push([total, 0]),
            _ => {
                for i in (0..=total).rev() {
                    out.push([i, total - i]);
                }
            }
        }
    }
    out
}

fn monomial(u: &[f64], beta: [u32; 2]) -> f64 {
    u.iter().zip(beta).map(|(x, b)| x.powi(b as i32)).product()
}

/// Coordinates of cell `i` relative to the cube centre, in units of the half side.
fn local_coords(grid: &Grid, cube: &Cube, idx: usize) -> Vec<f64> {
    let p = grid.point(idx);
    let hs = cube.half_side();
    p.iter()
        .zip(cube.center())
        .map(|(x, c)| (x - c) / hs)
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Removes from `v` its `ℓ²` projection on span{monomials of degree ≤ s} over the cells of `Q`.
fn project_out_moments(v: &mut [f64], basis: &[Vec<f64>]) {
    // two passes of modified Gram–Schmidt against an orthonormal basis
    for _ in 0..2 {
        for e in basis {
            let c = dot(v, e);
            for (x, y) in v.iter_mut().zip(e) {
                *x -= c * y;
            }
        }
    }
}

fn orthonormal_moment_basis(grid: &Grid, cube: &Cube, cells: &[usize], s: u32) -> Vec<Vec<f64>> {
    let coords: Vec<Vec<f64>> = cells.iter().map(|&i| local_coords(grid, cube, i)).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for beta in multi_indices(grid.dim(), s) {
        let mut v: Vec<f64> = coords.iter().map(|u| monomial(u, beta)).collect();
        for _ in 0..2 {
            for e in &basis {
                let c = dot(&v, e);
                for (x, y) in v.iter_mut().zip(e) {
                    *x -= c * y;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        // fewer cells than monomials: the remaining directions are already spanned
        if norm > 1e-10 * (cells.len() as f64).sqrt() {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

fn profile_values(profile: &Profile, grid: &Grid, cube: &Cube, cells: &[usize]) -> Vec<f64> {
    match profile {
        Profile::Zero => vec![0.0; cells.len()],
        Profile::Sign => cells
            .iter()
            .map(|&i| {
                let x = grid.point(i)[0] - cube.center()[0];
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect(),
        Profile::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let betas = multi_indices(grid.dim(), 3);
            let coeffs: Vec<f64> = betas.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            cells
                .iter()
                .map(|&i| {
                    let u = local_coords(grid, cube, i);
                    let bump: f64 = u.iter().map(|x| (1.0 - x * x).max(0.0).powi(2)).product();
                    let poly: f64 = betas
                        .iter()
                        .zip(&coeffs)
                        .map(|(b, c)| c * monomial(&u, *b))
                        .sum();
                    bump * poly
                })
                .collect()
        }
    }
}

/// Builds a `w`-`(p, q, s)`-atom on `Q`: the profile is projected against all
/// monomials of degree `<= s` in unweighted `ℓ²(Q)` and rescaled so that
/// `‖a‖_{L^q_w} = w(Q)^{1/q - 1/p}` exactly. Samples outside `Q` are `0.0`.
///
/// The caller is responsible for `s >= required_moment_order(..)`.
pub fn build_atom(
    grid: &Grid,
    cube: &Cube,
    exponents: AtomExponents,
    weight: &Weight,
    profile: &Profile,
) -> Result<Atom> {
    if weight.ambient_n() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: weight.ambient_n(),
        });
    }
    let cells = grid.indices_in(cube)?;
    let mut v = profile_values(profile, grid, cube, &cells);
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(Error::DegenerateProfile);
    }
    let basis = orthonormal_moment_basis(grid, cube, &cells, exponents.s);
    project_out_moments(&mut v, &basis);
    let after = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if after <= 1e-9 * scale {
        return Err(Error::DegenerateProfile);
    }

    let all_masses = weight.cell_masses(grid)?;
    let masses: Vec<f64> = cells.iter().map(|&i| all_masses[i]).collect();
    let wq: f64 = masses.iter().sum();
    let target = wq.powf(1.0 / exponents.q - 1.0 / exponents.p);
    let norm = lp_norm_with_masses(&v, &masses, exponents.q);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::DegenerateProfile);
    }
    let c = target / norm;
    let mut values = vec![0.0; grid.len()];
    for (&i, x) in cells.iter().zip(&v) {
        values[i] = c * x;
    }
    Ok(Atom {
        f: SampledFunction::new(grid.clone(), values)?,
        cube: cube.clone(),
        exponents,
        weight: weight.clone(),
    })
}

/// Tolerances used by [`validate_atom`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomTolerances {
    /// Moment `β` passes when `|∫ a (x - x_0)^β| <= moment_rel · ‖a‖_{L¹} · side^{|β|}`.
    pub moment_rel: f64,
    /// Size passes when `‖a‖_{L^q_w} <= (1 + norm_rel) · w(Q)^{1/q - 1/p}`.
    pub norm_rel: f64,
}

impl Default for AtomTolerances {
    fn default() -> Self {
        Self {
            moment_rel: 1e-8,
            norm_rel: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub beta: Vec<u32>,
    pub value: f64,
    pub tolerance: f64,
    pub ok: bool,
}

/// Report of the three atom conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomCertificate {
    pub support_ok: bool,
    /// Largest `|a|` outside `Q` (zero when the support condition holds).
    pub support_leak: f64,
    pub moments: Vec<MomentCheck>,
    pub moments_ok: bool,
    pub norm: f64,
    pub norm_bound: f64,
    /// `‖a‖_{L^q_w} / w(Q)^{1/q-1/p}`.
    pub norm_ratio: f64,
    /// `1 - norm_ratio`; zero for saturated atoms.
    pub norm_slack: f64,
    pub norm_ok: bool,
    pub accepted: bool,
}

/// Checks support, size and vanishing moments. Moments are taken about the
/// cube centre, which spans the same conditions as plain `x^β`.
pub fn validate_atom(atom: &Atom, tol: &AtomTolerances) -> Result<AtomCertificate> {
    let grid = atom.f.grid();
    let cells = grid.indices_in(&atom.cube)?;
    let mut inside = vec![false; grid.len()];
    for &i in &cells {
        inside[i] = true;
    }
    let support_leak = atom
        .f
        .values()
        .iter()
        .zip(&inside)
        .filter(|(_, inn)| !**inn)
        .fold(0.0f64, |m, (v, _)| m.max(v.abs()));

    let vol = grid.cell_volume();
    let l1: f64 = cells.iter().map(|&i| atom.f.values()[i].abs()).sum::<f64>() * vol;
    let side = atom.cube.side();
    let moments: Vec<MomentCheck> = multi_indices(grid.dim(), atom.exponents.s)
        .into_iter()
        .map(|beta| {
            let value: f64 = cells
                .iter()
                .map(|&i| {
                    let p = grid.point(i);
                    let rel: Vec<f64> = p
                        .iter()
                        .zip(atom.cube.center())
                        .map(|(x, c)| x - c)
                        .collect();
                    atom.f.values()[i] * monomial(&rel, beta)
                })
                .sum::<f64>()
                * vol;
            let order = beta[0] + beta[1];
            let tolerance = tol.moment_rel * l1 * side.powi(order as i32);
            MomentCheck {
                beta: beta[..grid.dim()].to_vec(),
                value,
                tolerance,
                ok: value.abs() <= tolerance,
            }
        })
        .collect();
    let moments_ok = moments.iter().all(|m| m.ok);

    let masses = atom.weight.cell_masses(grid)?;
    let norm = lp_norm_with_masses(atom.f.values(), &masses, atom.exponents.q);
    let norm_bound = atom.size_bound()?;
    let norm_ratio = norm / norm_bound;
    let norm_ok = norm_ratio <= 1.0 + tol.norm_rel;
    let support_ok = support_leak == 0.0;
    Ok(AtomCertificate {
        support_ok,
        support_leak,
        moments,
        moments_ok,
        norm,
        norm_bound,
        norm_ratio,
        norm_slack: 1.0 - norm_ratio,
        norm_ok,
        accepted: support_ok && moments_ok && norm_ok,
    })
}

/// Both sides of `∫_Q |a| <= C |Q| / w(Q)^{1/p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L1BoundCheck {
    /// `∫_Q |a|`.
    pub lhs: f64,
    /// `|Q| / w(Q)^{1/p}` (the bound without its constant).
    pub rhs_base: f64,
    /// `lhs / rhs_base`: the constant this atom needs.
    pub ratio: f64,
}

pub fn atom_l1_bound_check(atom: &Atom) -> Result<L1BoundCheck> {
    let grid = atom.f.grid();
    let cells = grid.indices_in(&atom.cube)?;
    let lhs = cells.iter().map(|&i| atom.f.values()[i].abs()).sum::<f64>() * grid.cell_volume();
    let wq = crate::weights::weighted_measure(&atom.weight, grid, &atom.cube)?;
    let rhs_base = atom.cube.volume() / wq.powf(1.0 / atom.exponents.p);
    Ok(L1BoundCheck {
        lhs,
        rhs_base,
        ratio: lhs / rhs_base,
    })
}

/// Finite combination `Σ λ_j a_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicSum {
    atoms: Vec<Atom>,
    coefficients: Vec<f64>,
}

impl AtomicSum {
    pub fn new(atoms: Vec<Atom>, coefficients: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != coefficients.len() {
            return Err(Error::InvalidArgument(
                "need one coefficient per atom".into(),
            ));
        }
        let g = atoms[0].f.grid();
        if atoms.iter().any(|a| a.f.grid() != g) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            atoms,
            coefficients,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `Σ |λ_j|^p` with `p` taken from the first atom.
    pub fn coefficient_sum(&self) -> f64 {
        let p = self.atoms[0].exponents.p;
        self.coefficients.iter().map(|c| c.abs().powf(p)).sum()
    }

    pub fn combined(&self) -> Result<SampledFunction> {
        let g = self.atoms[0].f.grid().clone();
        let mut values = vec![0.0; g.len()];
        for (a, c) in self.atoms.iter().zip(&self.coefficients) {
            for (acc, v) in values.iter_mut().zip(a.f.values()) {
                *acc += c * v;
            }
        }
        SampledFunction::new(g, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn sym_grid() -> Grid {
        make_grid(Cube::interval(-2.0, 2.0).unwrap(), 512).unwrap()
    }

    #[test]
    fn moment_order_examples() {
        assert_eq!(required_moment_order(2.0 / 3.0, 1.0, 1), 0);
        assert_eq!(required_moment_order(1.0, 1.0, 2), 0);
        assert_eq!(required_moment_order(0.4, 1.0, 1), 1);
        assert_eq!(required_moment_order(0.5, 2.0, 2), 6);
    }

    #[test]
    fn sign_atom_constant() {
        let g = sym_grid();
        let q = Cube::interval(-1.0, 1.0).unwrap();
        let w = Weight::unit(1).unwrap();
        let a = build_atom(
            &g,
            &q,
            AtomExponents::new(2.0 / 3.0, 2.0, 0).unwrap(),
            &w,
            &Profile::Sign,
        )
        .unwrap();
        let c = 2f64.powf(-1.5);
        for (i, v) in a.function().values().iter().enumerate() {
            let x = g.point(i)[0];
            let expect = if x.abs() > 1.0 { 0.0 } else { c * x.signum() };
            assert!((v - expect).abs() < 1e-12, "{x} {v}");
        }
        let l1 = atom_l1_bound_check(&a).unwrap();
        assert!((l1.lhs - 2f64.powf(-0.5)).abs() < 1e-12);
        assert!((l1.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_profile_signals_retry() {
        let g = sym_grid();
        let q = Cube::interval(-1.0, 1.0).unwrap();
        let r = build_atom(
            &g,
            &q,
            AtomExponents::new(0.5, 2.0, 0).unwrap(),
            &Weight::unit(1).unwrap(),
            &Profile::Zero,
        );
        assert_eq!(r.unwrap_err(), Error::DegenerateProfile);
    }

    #[test]
    fn first_order_moments_vanish() {
        let g = make_grid(Cube::interval(-1.0, 2.0).unwrap(), 384).unwrap();
        let q = Cube::interval(0.0, 1.0).unwrap();
        let w = Weight::unit(1).unwrap();
        let a = build_atom(
            &g,
            &q,
            AtomExponents::new(0.4, 2.0, 1).unwrap(),
            &w,
            &Profile::Random { seed: 3 },
        )
        .unwrap();
        let h = g.spacing();
        let m0: f64 = a.function().values().iter().sum::<f64>() * h;
        let m1: f64 = a
            .function()
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| v * g.point(i)[0])
            .sum::<f64>()
            * h;
        assert!(m0.abs() < 1e-10 && m1.abs() < 1e-10, "{m0} {m1}");
    }

    #[test]
    fn validation_reports() {
        let g = sym_grid();
        let q = Cube::interval(-1.0, 1.0).unwrap();
        let w = Weight::power(-0.5, vec![0.0]).unwrap();
        let e = AtomExponents::new(2.0 / 3.0, 2.0, 0).unwrap();
        let a = build_atom(&g, &q, e, &w, &Profile::Random { seed: 11 }).unwrap();
        let cert = validate_atom(&a, &AtomTolerances::default()).unwrap();
        assert!(cert.accepted, "{cert:?}");
        assert!(cert.norm_slack.abs() < 1e-12);

        let doubled = validate_atom(&a.scaled(2.0).unwrap(), &AtomTolerances::default()).unwrap();
        assert!(!doubled.norm_ok);
        assert!((doubled.norm_ratio - 2.0).abs() < 1e-12);

        let ind = SampledFunction::from_fn(g.clone(), |x| if x[0].abs() < 1.0 { 1.0 } else { 0.0 })
            .unwrap();
        let cert =
            validate_atom(&Atom::from_parts(ind, q, e, w), &AtomTolerances::default()).unwrap();
        assert!(!cert.moments_ok && !cert.moments[0].ok);
    }

    #[test]
    fn two_dimensional_atom_validates() {
        let g = make_grid(Cube::new(vec![0.0, 0.0], 4.0).unwrap(), 64).unwrap();
        let q = Cube::new(vec![0.5, -0.5], 1.0).unwrap();
        let w = Weight::power(-0.5, vec![0.0, 0.0]).unwrap();
        let a = build_atom(
            &g,
            &q,
            AtomExponents::new(0.5, 2.0, 2).unwrap(),
            &w,
            &Profile::Random { seed: 5 },
        )
        .unwrap();
        let cert = validate_atom(&a, &AtomTolerances::default()).unwrap();
        assert_eq!(cert.moments.len(), 6);
        assert!(cert.accepted, "{cert:?}");
    }

    #[test]
    fn l1_ratio_is_scale_invariant_for_unit_weight() {
        let w = Weight::unit(1).unwrap();
        let e = AtomExponents::new(2.0 / 3.0, 2.0, 0).unwrap();
        let ratios: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&r| {
                let g = make_grid(Cube::interval(-4.0 * r, 4.0 * r).unwrap(), 512).unwrap();
                let q = Cube::interval(-r, r).unwrap();
                let a = build_atom(&g, &q, e, &w, &Profile::Random { seed: 9 }).unwrap();
                atom_l1_bound_check(&a).unwrap().ratio
            })
            .collect();
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min < 1.05, "{ratios:?}");
    }

    #[test]
    fn atomic_sum_combines() {
        let g = sym_grid();
        let w = Weight::unit(1).unwrap();
        let e = AtomExponents::new(0.5, 2.0, 0).unwrap();
        let a = build_atom(
            &g,
            &Cube::interval(-1.0, 0.0).unwrap(),
            e,
            &w,
            &Profile::Sign,
        )
        .unwrap();
        let b = build_atom(
            &g,
            &Cube::interval(0.0, 1.0).unwrap(),
            e,
            &w,
            &Profile::Sign,
        )
        .unwrap();
        let sum = AtomicSum::new(vec![a.clone(), b], vec![0.25, 0.25]).unwrap();
        assert!((sum.coefficient_sum() - 1.0).abs() < 1e-12);
        let c = sum.combined().unwrap();
        let i = g.indices_in(&Cube::interval(-1.0, 0.0).unwrap()).unwrap()[0];
        assert_eq!(c.values()[i], 0.25 * a.function().values()[i]);
    }

    #[test]
    fn csv_export_has_one_row_per_point() {
        let g = make_grid(Cube::interval(-1.0, 1.0).unwrap(), 8).unwrap();
        let a = build_atom(
            &g,
            &Cube::interval(-1.0, 1.0).unwrap(),
            AtomExponents::new(0.5, 2.0, 0).unwrap(),
            &Weight::unit(1).unwrap(),
            &Profile::Sign,
        )
        .unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert!(text.starts_with("x,value\n"));
    }
}
