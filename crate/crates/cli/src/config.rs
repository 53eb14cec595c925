//! Experiment configuration: a single JSON document in which every real
//! number may be written as a decimal string (to keep configs independent of
//! any JSON emitter's float formatting). Unknown keys are rejected.

use anyhow::{bail, Context};
use hecke_resonance::{AfeConfig, KernelConfig};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// An `f64` that deserializes from either a JSON number or a decimal string.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct Real(pub f64);

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Real(v)),
            Raw::Str(s) => s
                .trim()
                .parse::<f64>()
                .map(Real)
                .map_err(|e| de::Error::custom(format!("bad decimal string {s:?}: {e}"))),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct AfeSection {
    pub slack: Real,
    pub target_abs_err: Real,
    #[serde(rename = "oracle_T")]
    pub oracle_t: Real,
}

impl Default for AfeSection {
    fn default() -> Self {
        let d = AfeConfig::default();
        AfeSection {
            slack: Real(d.slack),
            target_abs_err: Real(d.target_abs_err),
            oracle_t: Real(d.oracle_t),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSection {
    pub abs_tol: Real,
    pub quad_line: Real,
    pub quad_halfwidth: Option<Real>,
    pub quad_step: Real,
    pub precision_mode: String,
}

impl Default for KernelSection {
    fn default() -> Self {
        let d = KernelConfig::default();
        KernelSection {
            abs_tol: Real(d.abs_tol),
            quad_line: Real(d.quad_line),
            quad_halfwidth: None,
            quad_step: Real(d.quad_step),
            precision_mode: "standard".into(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub d: i64,
    #[serde(rename = "X")]
    pub x: Real,
    pub epsilon: Real,
    pub afe: AfeSection,
    pub kernel: KernelSection,
    pub threads: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            d: -1,
            x: Real(4096.0),
            epsilon: Real(0.05),
            afe: AfeSection::default(),
            kernel: KernelSection::default(),
            threads: 0,
            seed: 1,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.d >= 0 {
            bail!("config violation: d must be negative (d = {})", self.d);
        }
        if self.x.0 <= 0.0 || !self.x.0.is_finite() {
            bail!("config violation: X must be a positive finite real (X = {})", self.x.0);
        }
        if !(self.epsilon.0 > 0.0 && self.epsilon.0 < 0.2) {
            bail!("config violation: epsilon must lie in (0, 0.2) (epsilon = {})", self.epsilon.0);
        }
        self.afe_config().validate().map_err(|e| anyhow::anyhow!("config violation: {e}"))?;
        self.kernel_config()?
            .validate()
            .map_err(|e| anyhow::anyhow!("config violation: {e}"))?;
        Ok(())
    }

    pub fn afe_config(&self) -> AfeConfig {
        AfeConfig {
            slack: self.afe.slack.0,
            target_abs_err: self.afe.target_abs_err.0,
            oracle_t: self.afe.oracle_t.0,
        }
    }

    pub fn kernel_config(&self) -> anyhow::Result<KernelConfig> {
        let mode = match self.kernel.precision_mode.as_str() {
            "standard" => hecke_resonance::kernels::PrecisionMode::Standard,
            "extended" => hecke_resonance::kernels::PrecisionMode::Extended,
            other => bail!("config violation: precision_mode must be standard|extended, got {other:?}"),
        };
        let base = match mode {
            hecke_resonance::kernels::PrecisionMode::Standard => KernelConfig::default(),
            hecke_resonance::kernels::PrecisionMode::Extended => KernelConfig::extended(),
        };
        Ok(KernelConfig {
            abs_tol: self.kernel.abs_tol.0,
            quad_line: self.kernel.quad_line.0,
            quad_halfwidth: self.kernel.quad_halfwidth.map(|r| r.0),
            quad_step: self.kernel.quad_step.0,
            ..base
        })
    }

    /// Resonator length implied by the diagonal constraint `N = X^{1/4 - eps}`.
    pub fn resonator_length(&self) -> f64 {
        self.x.0.powf(0.25 - self.epsilon.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_accept_strings_and_numbers() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"d": -5, "X": "512.0", "epsilon": 0.05}"#).unwrap();
        assert_eq!(cfg.d, -5);
        assert_eq!(cfg.x.0, 512.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let r: Result<ExperimentConfig, _> = serde_json::from_str(r#"{"bogus": 1}"#);
        assert!(r.is_err());
    }

    #[test]
    fn constraint_violations_are_named() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"epsilon": "0.5"}"#).unwrap();
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("epsilon"), "{err}");
    }
}
