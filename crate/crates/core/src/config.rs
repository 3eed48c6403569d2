//! Experiment configuration: a TOML file with top-level keys and one
//! `[[stage]]` table per re-weighting stage. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::Depth;
use crate::construction::MotivatingKind;
use crate::error::{Error, Result};
use crate::rational::ExactRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SingleStage,
    Ray,
    Nested,
    Motivating,
    Lemma4,
    Weights,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DepthSetting {
    #[default]
    Auto,
    Level(i32),
}

impl DepthSetting {
    pub fn to_depth(self) -> Depth {
        match self {
            DepthSetting::Auto => Depth::Auto,
            DepthSetting::Level(p) => Depth::Max(p),
        }
    }
}

impl Serialize for DepthSetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DepthSetting::Auto => s.serialize_str("auto"),
            DepthSetting::Level(p) => s.serialize_i32(*p),
        }
    }
}

impl<'de> Deserialize<'de> for DepthSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Level(i32),
        }
        match Raw::deserialize(d)? {
            Raw::Text(t) if t == "auto" => Ok(DepthSetting::Auto),
            Raw::Text(t) => t.parse().map(DepthSetting::Level).map_err(serde::de::Error::custom),
            Raw::Level(p) => Ok(DepthSetting::Level(p)),
        }
    }
}

impl std::str::FromStr for DepthSetting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(DepthSetting::Auto);
        }
        s.parse().map(DepthSetting::Level).map_err(|_| Error::Config(format!("depth must be `auto` or a level, got {s:?}")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    pub a: ExactRational,
    pub alpha: u32,
    pub epsilon: Option<ExactRational>,
    /// Explicit centre exponent; otherwise the smallest witness up to `x_max`.
    pub x: Option<u64>,
    pub x_max: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub bases: Option<Vec<u32>>,
    #[serde(default = "default_r")]
    pub r: Vec<u32>,
    #[serde(default)]
    pub depth: DepthSetting,
    pub epsilon: Option<ExactRational>,
    pub x_max: Option<u64>,
    /// Number of stages for `ray` and `nested`.
    pub stages: Option<usize>,
    /// Fixed `a` for `ray`.
    pub a: Option<ExactRational>,
    pub kind: Option<MotivatingKind>,
    /// Largest base for `motivating`.
    pub n_max: Option<u32>,
    /// Largest level `k` for `motivating`.
    pub k_max: Option<u32>,
    /// Staircase truncation depth.
    pub staircase_depth: Option<u32>,
    /// Target table for `nested`: base to value.
    pub target: Option<BTreeMap<String, ExactRational>>,
    /// Density file replacing the constructed single-stage density.
    pub density: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Seed for the randomized oracle comparisons run by verification.
    pub seed: Option<u64>,
    #[serde(default, rename = "stage")]
    pub stage: Vec<StageConfig>,
}

fn default_r() -> Vec<u32> {
    vec![2]
}

pub const DEFAULT_BASES: [u32; 5] = [2, 3, 4, 5, 6];

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        // relative density paths are taken from the config's directory
        if let (Some(d), Some(dir)) = (&cfg.density, path.parent()) {
            if d.is_relative() {
                cfg.density = Some(dir.join(d));
            }
        }
        Ok(cfg)
    }

    /// A one-stage configuration that verifies cleanly.
    pub fn default_single_stage() -> Self {
        ExperimentConfig {
            mode: Mode::SingleStage,
            bases: Some(DEFAULT_BASES.to_vec()),
            r: vec![2],
            depth: DepthSetting::Auto,
            epsilon: Some(ExactRational::new(1, 50)),
            x_max: Some(100_000),
            stages: None,
            a: None,
            kind: None,
            n_max: None,
            k_max: None,
            staircase_depth: None,
            target: None,
            density: None,
            out: None,
            seed: None,
            stage: vec![StageConfig {
                a: ExactRational::new(2, 3),
                alpha: 2,
                epsilon: None,
                x: None,
                x_max: None,
            }],
        }
    }

    pub fn bases(&self) -> Vec<u32> {
        self.bases.clone().unwrap_or_else(|| DEFAULT_BASES.to_vec())
    }

    pub fn epsilon(&self) -> ExactRational {
        self.epsilon.clone().unwrap_or_else(|| ExactRational::new(1, 1000))
    }

    pub fn x_max(&self) -> u64 {
        self.x_max.unwrap_or(100_000)
    }

    /// Target table with integer keys.
    pub fn target_table(&self) -> Result<BTreeMap<u32, ExactRational>> {
        let Some(t) = &self.target else {
            return Err(Error::Config("nested mode needs a [target] table".into()));
        };
        t.iter()
            .map(|(k, v)| {
                let n = k.parse::<u32>().map_err(|_| Error::Config(format!("target key {k:?} is not a base")))?;
                Ok((n, v.clone()))
            })
            .collect()
    }

    /// Every precondition that can be checked without computing anything.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if let Some(b) = &self.bases {
            if b.is_empty() {
                return bad("bases list is empty".into());
            }
            if let Some(n) = b.iter().find(|&&n| n < 2) {
                return bad(format!("base {n} is below 2"));
            }
        }
        if self.r.is_empty() || self.r.contains(&0) {
            return bad("r list must be non-empty with entries at least 1".into());
        }
        if let DepthSetting::Level(p) = self.depth {
            if p < 0 {
                return bad(format!("depth {p} is negative"));
            }
        }
        if let Some(e) = &self.epsilon {
            if !e.is_positive() || *e >= ExactRational::one() {
                return bad(format!("epsilon {e} must lie in (0,1)"));
            }
        }
        for (i, s) in self.stage.iter().enumerate() {
            let i = i + 1;
            if !s.a.is_positive() || s.a >= ExactRational::one() {
                return bad(format!("stage {i}: a = {} must lie in (0,1)", s.a));
            }
            if s.alpha == 0 {
                return bad(format!("stage {i}: alpha must be at least 1"));
            }
            if s.x.is_some() && s.x_max.is_some() {
                return bad(format!("stage {i}: give either x or x_max, not both"));
            }
            if s.x == Some(0) || s.x == Some(1) {
                return bad(format!("stage {i}: x must be at least 2"));
            }
        }
        match self.mode {
            Mode::SingleStage if self.stage.len() != 1 => bad("single-stage mode needs exactly one [[stage]]".into()),
            Mode::Weights if self.stage.is_empty() && self.density.is_none() => {
                bad("weights mode needs [[stage]] tables or a density file".into())
            }
            Mode::Ray => {
                if self.stage.is_empty() && (self.a.is_none() || self.stages.unwrap_or(0) == 0) {
                    return bad("ray mode needs [[stage]] tables or both `a` and `stages`".into());
                }
                Ok(())
            }
            Mode::Nested => {
                if self.stages.unwrap_or(0) == 0 {
                    return bad("nested mode needs `stages` of at least 1".into());
                }
                let t = self.target_table()?;
                if t.is_empty() {
                    return bad("target table is empty".into());
                }
                Ok(())
            }
            Mode::Motivating => {
                if self.n_max.is_some_and(|n| n < 2) {
                    return bad("n_max must be at least 2".into());
                }
                if self.k_max == Some(0) {
                    return bad("k_max must be at least 1".into());
                }
                Ok(())
            }
            Mode::Lemma4 if self.bases.is_none() => bad("lemma4 mode needs a bases list".into()),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_stage_sections() {
        let cfg = ExperimentConfig::from_toml(
            r#"
mode = "single-stage"
bases = [2, 3]
depth = 7
epsilon = "1/50"

[[stage]]
a = "2/3"
alpha = 2
x = 38746
"#,
        )
        .unwrap();
        assert_eq!(cfg.depth, DepthSetting::Level(7));
        assert_eq!(cfg.stage[0].x, Some(38746));
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(ExperimentConfig::from_toml("mode = \"lemma4\"\nbasis = [3]\n").is_err());
        assert!(ExperimentConfig::from_toml("mode = \"ray\"\n[[stage]]\na = \"1/2\"\nalpha = 1\nx_mx = 5\n").is_err());
    }

    #[test]
    fn empty_bases_rejected() {
        let cfg = ExperimentConfig::from_toml("mode = \"lemma4\"\nbases = []\n").unwrap();
        assert!(cfg.validate().is_err());
    }
}
