//! Experiment configuration, read from JSON. Every field has a default, so
//! `{}` is a valid configuration describing the standard 1D run.

use std::path::{Path, PathBuf};

use intrinsic_sq::weights::{FamilyParams, WeightSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Ambient dimension, 1 or 2.
    pub n: usize,
    pub alpha: f64,
    /// Overrides the default `p = n / (n + α)`.
    pub p: Option<f64>,
    /// Integrability exponent of the atoms.
    pub q: f64,
    pub weight: WeightSpec,
    /// The sampled domain is `[-L, L]^n`.
    pub domain_half_width: f64,
    pub points: usize,
    /// Points per axis of the grid on which operator outputs are sampled.
    pub eval_points: usize,
    pub atoms: AtomSweep,
    pub dictionary: DictionaryConfig,
    pub cone: ConeConfig,
    pub far_field: FarFieldConfig,
    /// `λ` values for `g*` in the weak-type suite.
    pub lambdas: Vec<f64>,
    /// `λ` values for the `L²_w` bound of `g*`.
    pub l2_lambdas: Vec<f64>,
    /// Largest `k` in the aperture sweep `β = 2^k`.
    pub aperture_k_max: u32,
    /// Dilations checked by the doubling suite.
    pub dilations: Vec<f64>,
    pub superposition: SuperpositionConfig,
    pub family: FamilyParams,
    /// `A_1` / `A_p` membership cutoff.
    pub a1_threshold: f64,
    pub stability: StabilityConfig,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Random,
    Sign,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtomSweep {
    /// Cube half-sides are `2^k` for each listed `k`.
    pub scales_log2: Vec<i32>,
    /// Cube centres are `shift · r` along every axis.
    pub shifts: Vec<f64>,
    pub profile: ProfileKind,
    /// Fresh profile seeds tried before an atom is dropped.
    pub max_retries: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DictionaryConfig {
    pub size: usize,
    /// Defaults to the global seed.
    pub seed: Option<u64>,
    /// Samples per axis of each member; defaults depend on `n`.
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConeConfig {
    /// Defaults to two grid spacings.
    pub t_min: Option<f64>,
    /// Defaults to four domain sides.
    pub t_max: Option<f64>,
    pub ratio: f64,
    pub k_max: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FarFieldConfig {
    /// Sampled distances `|x - x_0|` run from `inner · r` to `outer · r`.
    pub inner: f64,
    pub outer: f64,
    pub samples: usize,
    /// Largest scale of the far-field cone, in domain sides.
    pub t_max_sides: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuperpositionConfig {
    pub instances: usize,
    pub max_terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    pub dictionary: bool,
    pub grid: bool,
    pub dictionary_tolerance: f64,
    pub grid_tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 1,
            alpha: 0.5,
            p: None,
            q: 2.0,
            weight: WeightSpec::Constant { value: 1.0, n: 1 },
            domain_half_width: 64.0,
            points: 4096,
            eval_points: 1024,
            atoms: AtomSweep::default(),
            dictionary: DictionaryConfig::default(),
            cone: ConeConfig::default(),
            far_field: FarFieldConfig::default(),
            lambdas: vec![4.5, 6.0],
            l2_lambdas: vec![1.5, 2.0, 4.0],
            aperture_k_max: 3,
            dilations: vec![2.0, 3.0, 4.0],
            superposition: SuperpositionConfig::default(),
            family: FamilyParams::default(),
            a1_threshold: intrinsic_sq::weights::DEFAULT_MEMBERSHIP_THRESHOLD,
            stability: StabilityConfig::default(),
            out_dir: None,
            seed: 20240917,
        }
    }
}

impl Default for AtomSweep {
    fn default() -> Self {
        Self {
            scales_log2: vec![-2, -1, 0, 1, 2],
            shifts: vec![0.0, 1.5, -2.25, 3.0],
            profile: ProfileKind::Random,
            max_retries: 4,
        }
    }
}

impl Default for DictionaryConfig {
    fn default() -> Self {
        Self {
            size: 16,
            seed: None,
            resolution: None,
        }
    }
}

impl Default for ConeConfig {
    fn default() -> Self {
        Self {
            t_min: None,
            t_max: None,
            ratio: intrinsic_sq::intrinsic::cone::DEFAULT_RATIO,
            k_max: intrinsic_sq::intrinsic::cone::DEFAULT_K_MAX,
        }
    }
}

impl Default for FarFieldConfig {
    fn default() -> Self {
        Self {
            inner: 4.0,
            outer: 32.0,
            samples: 8,
            t_max_sides: 16.0,
        }
    }
}

impl Default for SuperpositionConfig {
    fn default() -> Self {
        Self {
            instances: 64,
            max_terms: 8,
        }
    }
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            dictionary: true,
            grid: true,
            dictionary_tolerance: 0.25,
            grid_tolerance: 0.15,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn p(&self) -> f64 {
        self.p
            .unwrap_or(self.n as f64 / (self.n as f64 + self.alpha))
    }

    pub fn dictionary_seed(&self) -> u64 {
        self.dictionary.seed.unwrap_or(self.seed)
    }

    /// Smallest `λ` accepted by the weak-type `g*` suite: `3 + 2α/n`.
    pub fn lambda_threshold(&self) -> f64 {
        3.0 + 2.0 * self.alpha / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if !(1..=2).contains(&self.n) {
            return bad(format!("n must be 1 or 2, got {}", self.n));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        let p = self.p();
        if !(p > 0.0 && p <= 1.0) {
            return bad(format!("p must lie in (0, 1], got {p}"));
        }
        if !(self.q >= 1.0 && self.q.is_finite()) || self.q == p {
            return bad(format!(
                "q must be finite, at least 1 and differ from p, got {}",
                self.q
            ));
        }
        if !(self.domain_half_width > 0.0) {
            return bad("domain_half_width must be positive".into());
        }
        if self.points < 2 || self.eval_points < 2 {
            return bad("points and eval_points must be at least 2".into());
        }
        if self.dictionary.size == 0 {
            return bad("dictionary size must be at least 1".into());
        }
        if self.far_field.samples < 2 || !(self.far_field.outer > self.far_field.inner) {
            return bad("far field needs at least two samples on a nonempty range".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_json_gives_defaults() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert!((cfg.p() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(cfg.lambda_threshold(), 4.0);
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"n": 3}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"alpha": 0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"unknown": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"p": 1.5}"#).is_err());
    }

    #[test]
    fn weight_spec_parses() {
        let cfg = ExperimentConfig::from_json(
            r#"{"weight": {"kind": "power", "a": -0.5, "center": [0.0]}}"#,
        )
        .unwrap();
        assert!(matches!(cfg.weight, WeightSpec::Power { .. }));
    }
}
