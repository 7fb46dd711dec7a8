//! Finite certified subsets of the test-function class `C_α`: members are
//! supported in the closed unit ball, have mean zero and Hölder-α seminorm at
//! most one (measured on their sampling grid).

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{integrate_all, make_grid, Cube, Grid, SampledFunction};

/// Samples per axis of a member in 1D and 2D.
pub const DEFAULT_RESOLUTION_1D: usize = 512;
pub const DEFAULT_RESOLUTION_2D: usize = 64;

/// Bounded regeneration attempts per member.
const MAX_RETRIES: usize = 16;
const SEMINORM_PASS: f64 = 1.0 + 1e-6;
const MEAN_PASS: f64 = 1e-10;
/// Above this many sample points the Hölder quotient is measured on a
/// deterministic subset of pairs.
const FULL_PAIR_LIMIT: usize = 6000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// `h(x + δe) − h(x − δe)` for a centred bump `h`.
    BumpDifference,
    /// Cutoff bump times a lacunary sum `Σ 2^{-kα} sin(2^k ω e·x + θ_k)`.
    LacunaryModulated,
    /// `(ρ^α − |x − c|^α)_+`, sharp at its centre.
    HolderCusp,
    /// Cutoff bump times `sin(ω e·x + θ)` with `ω` log-uniform up to the
    /// sampling limit, so some member resonates with every resolved scale.
    Modulated,
    /// Off-centre smooth bump.
    Bump,
}

impl Generator {
    fn for_index(i: usize) -> Self {
        match i % 8 {
            0 => Generator::BumpDifference,
            2 => Generator::LacunaryModulated,
            4 => Generator::HolderCusp,
            _ => Generator::Modulated,
        }
    }
}

/// Outcome of [`certify_member`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemberCertificate {
    pub seminorm: f64,
    pub mean: f64,
    pub support_radius: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryMember {
    pub phi: SampledFunction,
    pub generator: Generator,
    pub certificate: MemberCertificate,
}

/// Parameters fixing a dictionary bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryParams {
    pub n: usize,
    pub alpha: f64,
    pub size: usize,
    pub seed: u64,
    pub resolution: usize,
}

impl DictionaryParams {
    pub fn new(n: usize, alpha: f64, size: usize, seed: u64) -> Self {
        let resolution = if n == 1 {
            DEFAULT_RESOLUTION_1D
        } else {
            DEFAULT_RESOLUTION_2D
        };
        Self {
            n,
            alpha,
            size,
            seed,
            resolution,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionDictionary {
    params: DictionaryParams,
    members: Vec<DictionaryMember>,
}

/// Grid on `[-1, 1]^n` carrying dictionary members.
pub fn kernel_grid(n: usize, resolution: usize) -> Result<Grid> {
    make_grid(Cube::new(vec![0.0; n], 2.0)?, resolution)
}

fn bump(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (1.0 - r2).powi(3)
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    match n {
        1 => vec![if rng.gen_bool(0.5) { 1.0 } else { -1.0 }],
        _ => {
            let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            vec![a.cos(), a.sin()]
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<f64> {
    let dir = random_direction(rng, n);
    let r: f64 = rng.gen_range(0.0..radius);
    dir.into_iter().map(|d| d * r).collect()
}

/// Raw (not yet antisymmetrised or normalised) candidate.
fn raw_candidate(
    grid: &Grid,
    gen: Generator,
    alpha: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SampledFunction> {
    let n = grid.dim();
    // keep the outermost samples at zero so the interpolant stays in the unit ball
    let reach = 1.0 - 2.0 * grid.spacing();
    match gen {
        Generator::BumpDifference => {
            let delta: f64 = rng.gen_range(0.05..0.4);
            let rho: f64 = rng.gen_range(0.25..(reach - delta));
            let e = random_direction(rng, n);
            SampledFunction::from_fn(grid.clone(), |x| {
                let plus: Vec<f64> = x
                    .iter()
                    .zip(&e)
                    .map(|(xi, ei)| (xi + delta * ei) / rho)
                    .collect();
                let minus: Vec<f64> = x
                    .iter()
                    .zip(&e)
                    .map(|(xi, ei)| (xi - delta * ei) / rho)
                    .collect();
                bump(norm2(&plus)) - bump(norm2(&minus))
            })
        }
        Generator::LacunaryModulated => {
            let rho: f64 = rng.gen_range(0.6..reach);
            let e = random_direction(rng, n);
            let omega: f64 = rng.gen_range(std::f64::consts::PI..std::f64::consts::TAU);
            // stop once a period spans fewer than ~6 samples
            let max_freq = std::f64::consts::TAU / (6.0 * grid.spacing());
            let mut terms = Vec::new();
            let mut k = 0;
            while omega * 2f64.powi(k) <= max_freq {
                terms.push((
                    2f64.powf(-(k as f64) * alpha),
                    omega * 2f64.powi(k),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                ));
                k += 1;
            }
            SampledFunction::from_fn(grid.clone(), |x| {
                let r2 = norm2(x) / (rho * rho);
                if r2 >= 1.0 {
                    return 0.0;
                }
                let s: f64 = x.iter().zip(&e).map(|(a, b)| a * b).sum();
                let wave: f64 = terms
                    .iter()
                    .map(|(amp, w, th)| amp * (w * s + th).sin())
                    .sum();
                bump(r2) * wave
            })
        }
        Generator::Modulated => {
            let rho: f64 = rng.gen_range(0.7..reach);
            let e = random_direction(rng, n);
            let max_freq = std::f64::consts::TAU / (6.0 * grid.spacing());
            let lo = std::f64::consts::PI.ln();
            let omega = rng.gen_range(lo..max_freq.ln()).exp();
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            SampledFunction::from_fn(grid.clone(), |x| {
                let r2 = norm2(x) / (rho * rho);
                let s: f64 = x.iter().zip(&e).map(|(a, b)| a * b).sum();
                bump(r2) * (omega * s + theta).sin()
            })
        }
        Generator::HolderCusp => {
            let c = random_point(rng, n, 0.5);
            let room = reach - c.iter().map(|v| v * v).sum::<f64>().sqrt();
            let rho: f64 = rng.gen_range((0.5 * room).min(0.2)..room);
            let top = rho.powf(alpha);
            SampledFunction::from_fn(grid.clone(), |x| {
                let d = x
                    .iter()
                    .zip(&c)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                (top - d.powf(alpha)).max(0.0)
            })
        }
        Generator::Bump => {
            let c = random_point(rng, n, 0.5);
            let room = reach - c.iter().map(|v| v * v).sum::<f64>().sqrt();
            let rho: f64 = rng.gen_range((0.5 * room).min(0.2)..room);
            SampledFunction::from_fn(grid.clone(), |x| {
                let d2 = x
                    .iter()
                    .zip(&c)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / (rho * rho);
                bump(d2)
            })
        }
    }
}

/// `φ(x) = (h(x) − h(−x)) / 2`; exact mean zero on the symmetric kernel grid.
fn antisymmetrize(h: &SampledFunction) -> Result<SampledFunction> {
    let g = h.grid();
    let m = g.points_per_axis();
    let v = h.values();
    let values = (0..g.len())
        .map(|idx| {
            let ij = g.unflatten(idx);
            let mut mirror = [0usize; 2];
            for d in 0..g.dim() {
                mirror[d] = m - 1 - ij[d];
            }
            0.5 * (v[idx] - v[g.flatten(mirror)])
        })
        .collect();
    SampledFunction::new(g.clone(), values)
}

/// Largest `|φ(x) − φ(x')| / |x − x'|^α` over sample pairs.
///
/// All pairs are used up to a few thousand samples; beyond that each point is
/// paired with a neighbourhood window and a strided global subset.
pub fn holder_seminorm(phi: &SampledFunction, alpha: f64) -> f64 {
    let g = phi.grid();
    let v = phi.values();
    let pts: Vec<Vec<f64>> = g.points();
    let active: Vec<usize> = (0..g.len()).filter(|&i| v[i] != 0.0).collect();
    if active.is_empty() {
        return 0.0;
    }
    let quotient = |i: usize, j: usize| -> f64 {
        let d2: f64 = pts[i]
            .iter()
            .zip(&pts[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (v[i] - v[j]).abs() / d2.powf(0.5 * alpha)
    };
    let mut best: f64 = 0.0;
    if g.len() <= FULL_PAIR_LIMIT {
        for &i in &active {
            for (j, &vj) in v.iter().enumerate() {
                if j != i && !(vj != 0.0 && j < i) {
                    best = best.max(quotient(i, j));
                }
            }
        }
        return best;
    }
    let m = g.points_per_axis() as isize;
    let window: isize = 6;
    let stride = ((g.len() as f64 / FULL_PAIR_LIMIT as f64).sqrt().ceil() as usize).max(2);
    for &i in &active {
        let ij = g.unflatten(i);
        for dj in -window..=window {
            for di in -window..=window {
                let a = ij[0] as isize + di;
                let b = ij[1] as isize + dj;
                if (di, dj) != (0, 0) && a >= 0 && a < m && b >= 0 && b < m {
                    best = best.max(quotient(i, g.flatten([a as usize, b as usize])));
                }
            }
        }
        for b in (0..m as usize).step_by(stride) {
            for a in (0..m as usize).step_by(stride) {
                let j = g.flatten([a, b]);
                if j != i {
                    best = best.max(quotient(i, j));
                }
            }
        }
    }
    best
}

/// Measures the three `C_α` conditions on a sampled member.
pub fn certify_member(phi: &SampledFunction, alpha: f64) -> MemberCertificate {
    let seminorm = holder_seminorm(phi, alpha);
    let mean = integrate_all(phi);
    let origin = vec![0.0; phi.grid().dim()];
    let support_radius = phi.support_radius(&origin);
    let pass = seminorm <= SEMINORM_PASS
        && mean.abs() <= MEAN_PASS
        && support_radius <= 1.0 + phi.grid().spacing();
    MemberCertificate {
        seminorm,
        mean,
        support_radius,
        pass,
    }
}

impl TestFunctionDictionary {
    pub fn build(params: &DictionaryParams) -> Result<Self> {
        if !(params.alpha > 0.0 && params.alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1], got {}",
                params.alpha
            )));
        }
        if params.size == 0 {
            return Err(Error::InvalidArgument(
                "dictionary size must be at least 1".into(),
            ));
        }
        if params.resolution < 16 {
            return Err(Error::InvalidArgument(
                "dictionary resolution must be at least 16".into(),
            ));
        }
        let grid = kernel_grid(params.n, params.resolution)?;
        let members = (0..params.size)
            .map(|i| generate_member(&grid, params, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: params.clone(),
            members,
        })
    }

    pub fn params(&self) -> &DictionaryParams {
        &self.params
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }

    pub fn dim(&self) -> usize {
        self.params.n
    }

    pub fn members(&self) -> &[DictionaryMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Largest certified seminorm among the members.
    pub fn max_seminorm(&self) -> f64 {
        self.members
            .iter()
            .map(|m| m.certificate.seminorm)
            .fold(0.0, f64::max)
    }

    /// The first `k` members.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.members.len() {
            return Err(Error::InvalidArgument(format!(
                "prefix size {k} out of range"
            )));
        }
        Ok(Self {
            params: DictionaryParams {
                size: k,
                ..self.params.clone()
            },
            members: self.members[..k].to_vec(),
        })
    }

    /// Writes `manifest.json` plus one `member_XXX.csv` per member.
    pub fn export(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut entries = Vec::new();
        for (i, m) in self.members.iter().enumerate() {
            let file = format!("member_{i:03}.csv");
            let mut text = String::from("index,value\n");
            for (k, v) in m.phi.values().iter().enumerate() {
                text.push_str(&format!("{k},{v}\n"));
            }
            fs::write(dir.join(&file), text)?;
            entries.push(ManifestEntry {
                file,
                generator: m.generator,
                seminorm: m.certificate.seminorm,
            });
        }
        let manifest = Manifest {
            params: self.params.clone(),
            members: entries,
        };
        fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)?,
        )?;
        Ok(())
    }

    /// Reads a dictionary written by [`export`](Self::export) and re-certifies every member.
    pub fn import(dir: &Path) -> Result<Self> {
        let manifest: Manifest =
            serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
        let grid = kernel_grid(manifest.params.n, manifest.params.resolution)?;
        let mut members = Vec::new();
        for e in &manifest.members {
            let text = fs::read_to_string(dir.join(&e.file))?;
            let mut values = vec![0.0; grid.len()];
            for line in text.lines().skip(1) {
                let (k, v) = line
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("bad row {line:?}")))?;
                let k: usize = k
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad index {k:?}")))?;
                let v: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad value {v:?}")))?;
                *values
                    .get_mut(k)
                    .ok_or_else(|| Error::Parse(format!("index {k} out of range")))? = v;
            }
            let phi = SampledFunction::new(grid.clone(), values)?;
            let certificate = certify_member(&phi, manifest.params.alpha);
            if !certificate.pass {
                return Err(Error::Dictionary(format!(
                    "imported member {} fails certification",
                    e.file
                )));
            }
            members.push(DictionaryMember {
                phi,
                generator: e.generator,
                certificate,
            });
        }
        if members.is_empty() {
            return Err(Error::Dictionary("manifest lists no members".into()));
        }
        Ok(Self {
            params: manifest.params,
            members,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    file: String,
    generator: Generator,
    seminorm: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    params: DictionaryParams,
    members: Vec<ManifestEntry>,
}

fn generate_member(
    grid: &Grid,
    params: &DictionaryParams,
    index: usize,
) -> Result<DictionaryMember> {
    let gen = Generator::for_index(index);
    // one stream per member so prefixes of larger dictionaries coincide
    let mut rng =
        ChaCha8Rng::seed_from_u64(params.seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    for _ in 0..MAX_RETRIES {
        let raw = raw_candidate(grid, gen, params.alpha, &mut rng)?;
        let phi = antisymmetrize(&raw)?;
        let s = holder_seminorm(&phi, params.alpha);
        if !(s > 0.0) || !s.is_finite() {
            continue;
        }
        let phi = phi.scaled(1.0 / s)?;
        let certificate = certify_member(&phi, params.alpha);
        if certificate.pass {
            return Ok(DictionaryMember {
                phi,
                generator: gen,
                certificate,
            });
        }
    }
    Err(Error::Dictionary(format!(
        "member {index} failed certification after {MAX_RETRIES} attempts"
    )))
}

/// Member built from an explicit generator, for tests and diagnostics.
pub fn member_from_generator(
    n: usize,
    alpha: f64,
    gen: Generator,
    seed: u64,
    resolution: usize,
) -> Result<DictionaryMember> {
    let grid = kernel_grid(n, resolution)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = antisymmetrize(&raw_candidate(&grid, gen, alpha, &mut rng)?)?;
    let s = holder_seminorm(&phi, alpha);
    let phi = phi.scaled(1.0 / s)?;
    let certificate = certify_member(&phi, alpha);
    Ok(DictionaryMember {
        phi,
        generator: gen,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_member_is_certified() {
        let d = TestFunctionDictionary::build(&DictionaryParams::new(1, 0.5, 1, 7)).unwrap();
        let c = d.members()[0].certificate;
        assert!(c.seminorm >= 0.999 && c.seminorm <= 1.0 + 1e-12, "{c:?}");
        assert!(c.mean.abs() <= 1e-10);
        assert!(c.pass);
    }

    #[test]
    fn empty_dictionary_is_rejected() {
        assert!(TestFunctionDictionary::build(&DictionaryParams::new(1, 0.5, 0, 7)).is_err());
        assert!(TestFunctionDictionary::build(&DictionaryParams::new(1, 0.0, 4, 7)).is_err());
    }

    #[test]
    fn bump_difference_support_stays_in_unit_ball() {
        let grid = kernel_grid(1, 512).unwrap();
        let delta = 0.3;
        let rho = 0.7 - 2.0 * grid.spacing();
        let raw = SampledFunction::from_fn(grid, |x| {
            bump(((x[0] + delta) / rho).powi(2)) - bump(((x[0] - delta) / rho).powi(2))
        })
        .unwrap();
        let phi = antisymmetrize(&raw).unwrap();
        assert!(certify_member(&phi, 1.0).support_radius <= 1.0);
        for seed in 0..8 {
            let m = member_from_generator(1, 1.0, Generator::BumpDifference, seed, 512).unwrap();
            assert!(m.certificate.support_radius <= 1.0);
        }
    }

    #[test]
    fn zero_member_passes() {
        let phi = SampledFunction::zeros(kernel_grid(1, 64).unwrap());
        let c = certify_member(&phi, 0.5);
        assert_eq!(c.seminorm, 0.0);
        assert!(c.pass);
    }

    #[test]
    fn sine_needs_rescaling() {
        let phi = SampledFunction::from_fn(kernel_grid(1, 256).unwrap(), |x| {
            (std::f64::consts::PI * x[0]).sin()
        })
        .unwrap();
        let c = certify_member(&phi, 0.5);
        assert!(c.seminorm > 1.0);
        assert!(!c.pass);
    }

    #[test]
    fn indicator_has_nonzero_mean() {
        let phi = SampledFunction::from_fn(kernel_grid(1, 256).unwrap(), |_| 1.0).unwrap();
        let c = certify_member(&phi, 0.5);
        assert!((c.mean - 2.0).abs() < 1e-12);
        assert!(!c.pass);
    }

    #[test]
    fn every_generator_certifies_in_two_dimensions() {
        let d = TestFunctionDictionary::build(&DictionaryParams {
            resolution: 32,
            ..DictionaryParams::new(2, 0.5, 4, 3)
        })
        .unwrap();
        assert!(d.members().iter().all(|m| m.certificate.pass));
    }

    #[test]
    fn prefixes_of_larger_dictionaries_coincide() {
        let small = TestFunctionDictionary::build(&DictionaryParams::new(1, 0.5, 4, 42)).unwrap();
        let big = TestFunctionDictionary::build(&DictionaryParams::new(1, 0.5, 8, 42)).unwrap();
        assert_eq!(small.members(), big.prefix(4).unwrap().members());
    }

    #[test]
    fn export_import_is_bit_exact() {
        let d = TestFunctionDictionary::build(&DictionaryParams::new(1, 0.5, 3, 1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        d.export(dir.path()).unwrap();
        let back = TestFunctionDictionary::import(dir.path()).unwrap();
        assert_eq!(d, back);
    }
}
