//! Normal derivatives between the Dirichlet and Neumann scales.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::bilinear::{run_sweep, SweepSettings};
use crate::experiments::report::{exponent, RatioReport, RatioValue};
use crate::grid::{check_exponent, HalfField};
use crate::halfspace_ops::{normal_derivative, Operator};
use crate::norms::{sobolev_norm, SpaceSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mapping {
    /// `||d_n f||_{H^{s-1}(other)} / ||f||_{H^s(op)}`
    Cross,
    /// `||A^{s/2} d_n f|| / ||f||_{H^{s+1}(op)}`, measuring `d_n f` with the same operator.
    Same,
}

impl std::str::FromStr for Mapping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cross" => Ok(Mapping::Cross),
            "same" => Ok(Mapping::Same),
            other => Err(Error::Config(format!("unknown mapping `{other}` (cross or same)"))),
        }
    }
}

fn other(op: Operator) -> Operator {
    match op {
        Operator::Dirichlet => Operator::Neumann,
        Operator::Neumann => Operator::Dirichlet,
    }
}

/// Homogeneous Sobolev ratio for one field tagged with `op`.
pub fn derivative_ratio(f: &HalfField, op: Operator, mapping: Mapping, s: f64, p: f64) -> Result<RatioValue> {
    let df = normal_derivative(f)?;
    let (left, right) = match mapping {
        Mapping::Cross => {
            let target = other(op);
            (
                sobolev_norm(&df, &SpaceSpec::sobolev(target, s - 1.0, p))?,
                sobolev_norm(f, &SpaceSpec::sobolev(op, s, p))?,
            )
        }
        Mapping::Same => (
            sobolev_norm(&df.retagged(op.bc()), &SpaceSpec::sobolev(op, s, p))?,
            sobolev_norm(f, &SpaceSpec::sobolev(op, s + 1.0, p))?,
        ),
    };
    Ok(RatioValue::new(left, right))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeConfig {
    pub s: f64,
    #[serde(with = "exponent")]
    pub p: f64,
    pub op: Operator,
    pub mapping: Mapping,
    #[serde(flatten)]
    pub sweep: SweepSettings,
}

impl DerivativeConfig {
    pub fn validate(&self) -> Result<()> {
        check_exponent(self.p, "p").map_err(|e| Error::Config(e.to_string()))?;
        if !self.s.is_finite() || self.s < 0.0 {
            return Err(Error::Config(format!("regularity s = {} must be non-negative", self.s)));
        }
        self.sweep.validate()
    }
}

/// Max ratio over the family at each resolution, with a growth verdict.
pub fn derivative_mapping_sweep(cfg: &DerivativeConfig) -> Result<RatioReport> {
    cfg.validate()?;
    let config = serde_json::to_value(cfg).map_err(|e| Error::Config(e.to_string()))?;
    let name = match cfg.mapping {
        Mapping::Cross => "derivative-cross",
        Mapping::Same => "derivative-same",
    };
    let mut report = run_sweep(name, &cfg.sweep, cfg.op, 1, config, cfg.p, |fields, _| {
        derivative_ratio(&fields[0], cfg.op, cfg.mapping, cfg.s, cfg.p)
    })?;
    if cfg.mapping == Mapping::Same && cfg.p.is_finite() && cfg.s >= 1.0 / cfg.p {
        report.notes.push(format!(
            "s = {} is at or above 1/p = {}: growth expected for fields with a nonzero wall derivative",
            cfg.s,
            1.0 / cfg.p
        ));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::families::{FamilyKind, FamilySpec};
    use crate::grid::{Bc, GridSpec};
    use crate::experiments::report::Verdict;
    use std::f64::consts::PI;

    #[test]
    fn eigenmodes_map_with_unit_ratio() {
        let g = GridSpec::new(1, PI, 512, true).unwrap();
        for k in [1.0, 4.0, 9.0] {
            let f = HalfField::sample(g, Bc::Dirichlet, |x| (k * x[0]).sin()).unwrap();
            let r = derivative_ratio(&f, Operator::Dirichlet, Mapping::Cross, 1.5, 2.0).unwrap();
            assert!((r.ratio.unwrap() - 1.0).abs() < 1e-12);
            let c = HalfField::sample(g, Bc::Neumann, |x| (k * x[0]).cos()).unwrap();
            let r = derivative_ratio(&c, Operator::Neumann, Mapping::Cross, 0.5, 2.0).unwrap();
            assert!((r.ratio.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    fn sweep(s: f64, mapping: Mapping) -> DerivativeConfig {
        DerivativeConfig {
            s,
            p: 2.0,
            op: Operator::Dirichlet,
            mapping,
            sweep: SweepSettings {
                family: FamilySpec::new(FamilyKind::Counterexample, 0),
                count: 1,
                resolutions: vec![1024, 2048, 4096, 8192],
                half_width: 2.0,
                dim: 1,
            },
        }
    }

    #[test]
    fn same_condition_threshold() {
        assert_eq!(derivative_mapping_sweep(&sweep(0.25, Mapping::Same)).unwrap().verdict, Verdict::Bounded);
        let grows = derivative_mapping_sweep(&sweep(0.75, Mapping::Same)).unwrap();
        assert_eq!(grows.verdict, Verdict::Diverging, "{:?}", grows.summary);
        assert_eq!(derivative_mapping_sweep(&sweep(0.75, Mapping::Cross)).unwrap().verdict, Verdict::Bounded);
    }
}
