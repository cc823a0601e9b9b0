//! Experiment configuration files (TOML).
//!
//! Each experiment has its own section. In any section `s` may be a single number or a
//! list, in which case one configuration is produced per value:
//!
//! ```toml
//! [bilinear]
//! s = [0.5, 1.5, 2.3]
//! p = 2
//! p1 = 2
//! p2 = "inf"
//! p3 = "inf"
//! p4 = 2
//! op = "dirichlet"
//! space = { kind = "sobolev" }
//! family = { kind = "mixed", seed = 7 }
//! count = 20
//! resolutions = [1024, 2048, 4096]
//! ```

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::bilinear::{BilinearConfig, TrilinearConfig};
use crate::experiments::counterexample::SingularityOptions;
use crate::experiments::derivative::DerivativeConfig;

fn default_half_width() -> f64 {
    2.0
}

fn default_points() -> usize {
    16384
}

fn default_qs() -> Vec<f64> {
    vec![1.0, 2.0]
}

fn default_layer() -> Vec<usize> {
    vec![4096, 8192, 16384, 32768]
}

/// Settings for the near-wall study of the counterexample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleConfig {
    pub p: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default)]
    pub singularity: SingularityOptions,
    /// Also run the dyadic block study.
    #[serde(default)]
    pub besov: bool,
    #[serde(default = "default_qs")]
    pub qs: Vec<f64>,
    #[serde(default = "default_layer")]
    pub layer_resolutions: Vec<usize>,
}

impl CounterexampleConfig {
    pub fn new(p: f64) -> Self {
        Self {
            p,
            points: default_points(),
            half_width: default_half_width(),
            singularity: SingularityOptions::default(),
            besov: false,
            qs: default_qs(),
            layer_resolutions: default_layer(),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    bilinear: Option<toml::Table>,
    trilinear: Option<toml::Table>,
    derivative: Option<toml::Table>,
    counterexample: Option<toml::Table>,
}

/// Parsed configuration file; every section is optional.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentFile {
    pub bilinear: Vec<BilinearConfig>,
    pub trilinear: Vec<TrilinearConfig>,
    pub derivative: Vec<DerivativeConfig>,
    pub counterexample: Vec<CounterexampleConfig>,
}

/// Expand a section over its `s` (or, for the counterexample, `p`) grid.
fn expand<T: DeserializeOwned>(section: &str, table: Option<toml::Table>, key: &str) -> Result<Vec<T>> {
    let Some(table) = table else { return Ok(Vec::new()) };
    let values = match table.get(key) {
        Some(toml::Value::Array(items)) => items.clone(),
        Some(v) => vec![v.clone()],
        None => return Err(Error::Config(format!("[{section}] is missing `{key}`"))),
    };
    if values.is_empty() {
        return Err(Error::Config(format!("[{section}] has an empty `{key}` list")));
    }
    values
        .into_iter()
        .map(|v| {
            let mut t = table.clone();
            t.insert(key.to_owned(), v);
            toml::Value::Table(t)
                .try_into()
                .map_err(|e: toml::de::Error| Error::Config(format!("[{section}]: {}", e.message())))
        })
        .collect()
}

impl ExperimentFile {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| Error::Config(e.message().to_owned()))?;
        let file = Self {
            bilinear: expand("bilinear", raw.bilinear, "s")?,
            trilinear: expand("trilinear", raw.trilinear, "s")?,
            derivative: expand("derivative", raw.derivative, "s")?,
            counterexample: expand("counterexample", raw.counterexample, "p")?,
        };
        for c in &file.bilinear {
            c.validate()?;
        }
        for c in &file.trilinear {
            c.validate()?;
        }
        for c in &file.derivative {
            c.validate()?;
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Replace the family seed of every sweep.
    pub fn override_seed(&mut self, seed: u64) {
        for c in &mut self.bilinear {
            c.sweep.family.seed = seed;
        }
        for c in &mut self.trilinear {
            c.sweep.family.seed = seed;
        }
        for c in &mut self.derivative {
            c.sweep.family.seed = seed;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::families::FamilyKind;
    use crate::halfspace_ops::Operator;
    use crate::norms::SpaceKind;

    const SHARP: &str = r#"
[bilinear]
s = [2.5, 1.5]
p = 2
p1 = 2
p2 = "inf"
p3 = "inf"
p4 = 2
op = "dirichlet"
space = { kind = "besov", q = 2 }
family = { kind = "counterexample", seed = 3 }
count = 1
resolutions = [4096, 8192]

[counterexample]
p = [2, 4]
besov = true
"#;

    #[test]
    fn expands_s_grid() {
        let f = ExperimentFile::parse(SHARP).unwrap();
        assert_eq!(f.bilinear.len(), 2);
        assert_eq!(f.bilinear[1].s, 1.5);
        assert!(f.bilinear[0].p2.is_infinite());
        assert_eq!(f.bilinear[0].op, Operator::Dirichlet);
        assert_eq!(f.bilinear[0].space, SpaceKind::Besov { q: 2.0 });
        assert_eq!(f.bilinear[0].sweep.family.kind, FamilyKind::Counterexample);
        assert_eq!(f.bilinear[0].sweep.half_width, 2.0);
        assert_eq!(f.counterexample.len(), 2);
        assert!(f.counterexample[1].besov);
        assert_eq!(f.counterexample[1].points, 16384);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(ExperimentFile::parse("[bogus]\nx = 1"), Err(Error::Config(_))));
        let broken = SHARP.replace("p2 = \"inf\"", "p2 = 4");
        assert!(matches!(ExperimentFile::parse(&broken), Err(Error::Config(_))));
        assert!(matches!(ExperimentFile::parse("[bilinear]\np = 2"), Err(Error::Config(_))));
        assert!(matches!(ExperimentFile::load(Path::new("/nonexistent/x.cfg")), Err(Error::Config(_))));
    }

    #[test]
    fn seed_override() {
        let mut f = ExperimentFile::parse(SHARP).unwrap();
        f.override_seed(99);
        assert!(f.bilinear.iter().all(|c| c.sweep.family.seed == 99));
    }
}
