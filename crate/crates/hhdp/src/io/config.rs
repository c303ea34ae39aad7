//! Run configuration: JSON schema, validation, and derived settings.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::inference::{ModelKind, SamplerKind};
use crate::nig::NigParams;
use crate::peppf::HhdpParams;
use crate::samplers::{GibbsConfig, GroupedData};

/// Base-measure specification: `"auto"` derives the standard data-driven
/// defaults (location at the pooled mean, `lambda0 = 1/(3·Var(y))`,
/// `s0 = 1`, `S0 = 4`), or the four parameters are given explicitly.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum NigSpec {
    #[default]
    Auto,
    Explicit {
        mu0: f64,
        lambda0: f64,
        s0: f64,
        s0_scale: f64,
    },
}

impl Serialize for NigSpec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            NigSpec::Auto => ser.serialize_str("auto"),
            NigSpec::Explicit {
                mu0,
                lambda0,
                s0,
                s0_scale,
            } => NigSpecJson {
                mu0,
                lambda0,
                s0,
                s0_scale,
            }
            .serialize(ser),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct NigSpecJson {
    mu0: f64,
    lambda0: f64,
    s0: f64,
    #[serde(rename = "S0")]
    s0_scale: f64,
}

impl<'de> Deserialize<'de> for NigSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Tag(String),
            Full(NigSpecJson),
        }
        match Raw::deserialize(de)? {
            Raw::Tag(s) if s == "auto" => Ok(NigSpec::Auto),
            Raw::Tag(s) => Err(serde::de::Error::custom(format!(
                "unknown nig specification {s:?}; expected \"auto\" or an object"
            ))),
            Raw::Full(f) => Ok(NigSpec::Explicit {
                mu0: f.mu0,
                lambda0: f.lambda0,
                s0: f.s0,
                s0_scale: f.s0_scale,
            }),
        }
    }
}

/// A fit configuration as stored in the JSON config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "one")]
    pub beta0: f64,
    #[serde(default)]
    pub nig: NigSpec,
    #[serde(default = "default_trunc")]
    pub k: usize,
    #[serde(default = "default_trunc")]
    pub l: usize,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Defaults to half of `iterations` when absent.
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[serde(default = "one_usize")]
    pub thin: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one_usize")]
    pub chains: usize,
    #[serde(default)]
    pub sampler: SamplerKind,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn default_trunc() -> usize {
    50
}

fn default_iterations() -> usize {
    10_000
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields defaulted")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::config(format!("invalid run config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("beta0", self.beta0)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::config(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.k == 0 || self.l == 0 {
            return Err(Error::config("truncations k and l must be positive"));
        }
        if self.iterations <= self.effective_burn_in() {
            return Err(Error::config(format!(
                "iterations ({}) must exceed burn_in ({})",
                self.iterations,
                self.effective_burn_in()
            )));
        }
        if self.thin == 0 || self.chains == 0 {
            return Err(Error::config("thin and chains must be at least 1"));
        }
        if let NigSpec::Explicit {
            lambda0,
            s0,
            s0_scale,
            ..
        } = self.nig
        {
            NigParams::new(0.0, lambda0, s0, s0_scale)?;
        }
        Ok(())
    }

    pub fn effective_burn_in(&self) -> usize {
        self.burn_in.unwrap_or(self.iterations / 2)
    }

    pub fn params(&self) -> Result<HhdpParams> {
        HhdpParams::new(self.alpha, self.beta, self.beta0)
    }

    /// Resolve the base measure, deriving the data-driven defaults for
    /// `"auto"`.
    pub fn resolve_nig(&self, data: &GroupedData) -> Result<NigParams> {
        match self.nig {
            NigSpec::Explicit {
                mu0,
                lambda0,
                s0,
                s0_scale,
            } => NigParams::new(mu0, lambda0, s0, s0_scale),
            NigSpec::Auto => {
                let (mean, var) = data.pooled_mean_var()?;
                if var <= 0.0 {
                    return Err(Error::data(
                        "pooled variance is zero; cannot derive base-measure defaults",
                    ));
                }
                NigParams::new(mean, 1.0 / (3.0 * var), 1.0, 4.0)
            }
        }
    }

    pub fn gibbs_config(&self, chain: usize) -> GibbsConfig {
        GibbsConfig {
            model: self.model,
            k: self.k,
            l: self.l,
            iterations: self.iterations,
            burn_in: self.effective_burn_in(),
            thin: self.thin,
            seed: self.seed,
            chain,
        }
    }

    /// Hash pinning every field of the configuration, recorded in outputs so
    /// results stay traceable to a reproducible run.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}
