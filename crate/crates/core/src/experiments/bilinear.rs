//! Bilinear and trilinear product estimates under grid refinement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::families::{FamilySpec, Member};
use crate::experiments::report::{exponent, RatioEntry, RatioReport, RatioValue, ResolutionContext};
use crate::grid::{check_exponent, lp_norm, GridSpec, HalfField};
use crate::halfspace_ops::Operator;
use crate::norms::{space_norm, SpaceKind, SpaceSpec};
use crate::spectral::{build_bank, DyadicBank};

const HOLDER_TOL: f64 = 1e-12;

fn recip(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

fn default_half_width() -> f64 {
    2.0
}

fn default_dim() -> usize {
    1
}

fn default_true() -> bool {
    true
}

/// Grid and family settings shared by the sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub family: FamilySpec,
    /// Number of function pairs (or triples).
    pub count: usize,
    pub resolutions: Vec<usize>,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_dim")]
    pub dim: usize,
}

impl SweepSettings {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Config("family size must be positive".into()));
        }
        if self.resolutions.is_empty() {
            return Err(Error::Config("at least one resolution is required".into()));
        }
        for &n in &self.resolutions {
            GridSpec::new(self.dim, self.half_width, n, true)?;
        }
        Ok(())
    }

    pub(crate) fn grids(&self) -> Result<Vec<(GridSpec, DyadicBank)>> {
        let mut sorted = self.resolutions.clone();
        sorted.sort_unstable();
        sorted.dedup();
        sorted
            .into_iter()
            .map(|n| {
                let g = GridSpec::new(self.dim, self.half_width, n, true)?;
                let b = build_bank(&g)?;
                Ok((g, b))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilinearConfig {
    pub s: f64,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub p1: f64,
    #[serde(with = "exponent")]
    pub p2: f64,
    #[serde(with = "exponent")]
    pub p3: f64,
    #[serde(with = "exponent")]
    pub p4: f64,
    pub op: Operator,
    pub space: SpaceKind,
    #[serde(default = "default_true")]
    pub homogeneous: bool,
    #[serde(flatten)]
    pub sweep: SweepSettings,
}

impl BilinearConfig {
    pub fn validate(&self) -> Result<()> {
        for (p, name) in [(self.p, "p"), (self.p1, "p1"), (self.p2, "p2"), (self.p3, "p3"), (self.p4, "p4")] {
            check_exponent(p, name).map_err(|e| Error::Config(e.to_string()))?;
        }
        let lhs = recip(self.p);
        if (lhs - recip(self.p1) - recip(self.p2)).abs() > HOLDER_TOL
            || (lhs - recip(self.p3) - recip(self.p4)).abs() > HOLDER_TOL
        {
            return Err(Error::Config(format!(
                "exponents violate 1/p = 1/p1 + 1/p2 = 1/p3 + 1/p4 (p={}, p1={}, p2={}, p3={}, p4={})",
                self.p, self.p1, self.p2, self.p3, self.p4
            )));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::Config(format!("regularity s = {} must be positive", self.s)));
        }
        if let SpaceKind::Besov { q } = self.space {
            check_exponent(q, "q").map_err(|e| Error::Config(e.to_string()))?;
        }
        self.sweep.validate()
    }

    fn spec(&self, p: f64) -> SpaceSpec {
        SpaceSpec { kind: self.space, homogeneous: self.homogeneous, s: self.s, p, op: self.op }
    }
}

/// `||fg||_{X^s_p} / (||f||_{X^s_p1} ||g||_p2 + ||f||_p3 ||g||_{X^s_p4})`.
pub fn bilinear_ratio(
    f: &HalfField,
    g: &HalfField,
    cfg: &BilinearConfig,
    bank: Option<&DyadicBank>,
) -> Result<RatioValue> {
    let fg = f.product(g, cfg.op.bc())?;
    let left = space_norm(&fg, &cfg.spec(cfg.p), bank)?;
    let right = space_norm(f, &cfg.spec(cfg.p1), bank)? * lp_norm(g, cfg.p2)?
        + lp_norm(f, cfg.p3)? * space_norm(g, &cfg.spec(cfg.p4), bank)?;
    Ok(RatioValue::new(left, right))
}

pub(crate) fn run_sweep(
    experiment: &str,
    settings: &SweepSettings,
    op: Operator,
    arity: usize,
    config: serde_json::Value,
    p: f64,
    eval: impl Fn(&[HalfField], &DyadicBank) -> Result<RatioValue> + Sync,
) -> Result<RatioReport> {
    settings.validate()?;
    let members = settings.family.members(op, settings.half_width, arity * settings.count);
    let grids = settings.grids()?;
    let items: Vec<(usize, usize)> =
        (0..grids.len()).flat_map(|r| (0..settings.count).map(move |m| (r, m))).collect();
    let entries = items
        .into_par_iter()
        .map(|(r, m)| {
            let (grid, bank) = &grids[r];
            let fields = members[arity * m..arity * (m + 1)]
                .iter()
                .map(|mem| mem.sample(*grid, op.bc()))
                .collect::<Result<Vec<_>>>()?;
            let value = eval(&fields, bank)?;
            Ok(RatioEntry { member: m, points: grid.points(), value })
        })
        .collect::<Result<Vec<_>>>()?;
    let contexts = grids
        .iter()
        .map(|(g, b)| ResolutionContext { grid: *g, bank: b.info() })
        .collect();
    Ok(RatioReport::assemble(
        experiment,
        settings.family.seed,
        config,
        contexts,
        members_json(&members),
        entries,
        p,
    ))
}

fn members_json(members: &[Member]) -> serde_json::Value {
    serde_json::to_value(members).unwrap_or(serde_json::Value::Null)
}

pub fn ratio_sweep(cfg: &BilinearConfig) -> Result<RatioReport> {
    cfg.validate()?;
    let config = serde_json::to_value(cfg).map_err(|e| Error::Config(e.to_string()))?;
    let needs_bank = matches!(cfg.space, SpaceKind::Besov { .. });
    run_sweep("bilinear", &cfg.sweep, cfg.op, 2, config, cfg.p, |fields, bank| {
        bilinear_ratio(&fields[0], &fields[1], cfg, needs_bank.then_some(bank))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrilinearConfig {
    pub s: f64,
    #[serde(with = "exponent")]
    pub p: f64,
    /// Nine exponents; each consecutive triple satisfies `1/p = 1/a + 1/b + 1/c`.
    #[serde(with = "crate::experiments::report::exponent_list")]
    pub exponents: [f64; 9],
    pub op: Operator,
    pub space: SpaceKind,
    #[serde(default = "default_true")]
    pub homogeneous: bool,
    #[serde(flatten)]
    pub sweep: SweepSettings,
}

impl TrilinearConfig {
    pub fn validate(&self) -> Result<()> {
        check_exponent(self.p, "p").map_err(|e| Error::Config(e.to_string()))?;
        for (i, &e) in self.exponents.iter().enumerate() {
            check_exponent(e, &format!("p{}", i + 1)).map_err(|e| Error::Config(e.to_string()))?;
        }
        for triple in self.exponents.chunks(3) {
            let sum: f64 = triple.iter().map(|&e| recip(e)).sum();
            if (recip(self.p) - sum).abs() > HOLDER_TOL {
                return Err(Error::Config(format!(
                    "exponent triple {triple:?} violates 1/p = 1/a + 1/b + 1/c with p = {}",
                    self.p
                )));
            }
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::Config(format!("regularity s = {} must be positive", self.s)));
        }
        self.sweep.validate()
    }

    fn spec(&self, p: f64) -> SpaceSpec {
        SpaceSpec { kind: self.space, homogeneous: self.homogeneous, s: self.s, p, op: self.op }
    }
}

/// `||fgh||_{X^s_p}` over the three-term right-hand side, the smooth factor of each term
/// taking the derivative-free norms.
pub fn trilinear_ratio(
    f: &HalfField,
    g: &HalfField,
    h: &HalfField,
    cfg: &TrilinearConfig,
    bank: Option<&DyadicBank>,
) -> Result<RatioValue> {
    let fgh = f.product(g, cfg.op.bc())?.product(h, cfg.op.bc())?;
    let left = space_norm(&fgh, &cfg.spec(cfg.p), bank)?;
    let e = &cfg.exponents;
    let fields = [f, g, h];
    let mut right = 0.0;
    for (term, triple) in e.chunks(3).enumerate() {
        let mut prod = 1.0;
        for (k, (&field, &ex)) in fields.iter().zip(triple).enumerate() {
            prod *= if k == term {
                space_norm(field, &cfg.spec(ex), bank)?
            } else {
                lp_norm(field, ex)?
            };
        }
        right += prod;
    }
    Ok(RatioValue::new(left, right))
}

pub fn trilinear_sweep(cfg: &TrilinearConfig) -> Result<RatioReport> {
    cfg.validate()?;
    let config = serde_json::to_value(cfg).map_err(|e| Error::Config(e.to_string()))?;
    let needs_bank = matches!(cfg.space, SpaceKind::Besov { .. });
    run_sweep("trilinear", &cfg.sweep, cfg.op, 3, config, cfg.p, |fields, bank| {
        trilinear_ratio(&fields[0], &fields[1], &fields[2], cfg, needs_bank.then_some(bank))
    })
}

/// Trilinear estimate next to the first step of the iterated bilinear route on the same family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    pub trilinear: RatioReport,
    /// `||fg||_{X^s_p} / (||f||_{X^s_p} ||g||_inf + ||f||_inf ||g||_{X^s_p})`, the quantity the
    /// iterated route `(fg)h` must control first.
    pub iterated_bilinear: RatioReport,
}

pub fn odd_multiplicity_contrast(cfg: &TrilinearConfig) -> Result<ContrastReport> {
    let trilinear = trilinear_sweep(cfg)?;
    let bilinear = BilinearConfig {
        s: cfg.s,
        p: cfg.p,
        p1: cfg.p,
        p2: f64::INFINITY,
        p3: f64::INFINITY,
        p4: cfg.p,
        op: cfg.op,
        space: cfg.space,
        homogeneous: cfg.homogeneous,
        sweep: cfg.sweep.clone(),
    };
    let mut iterated_bilinear = ratio_sweep(&bilinear)?;
    iterated_bilinear.experiment = "iterated-bilinear".into();
    Ok(ContrastReport { trilinear, iterated_bilinear })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::families::FamilyKind;
    use crate::grid::Bc;

    fn cfg(op: Operator, s: f64) -> BilinearConfig {
        BilinearConfig {
            s,
            p: 2.0,
            p1: 2.0,
            p2: f64::INFINITY,
            p3: f64::INFINITY,
            p4: 2.0,
            op,
            space: SpaceKind::Sobolev,
            homogeneous: true,
            sweep: SweepSettings {
                family: FamilySpec::new(FamilyKind::Eigen, 1),
                count: 2,
                resolutions: vec![256, 512],
                half_width: std::f64::consts::PI,
                dim: 1,
            },
        }
    }

    #[test]
    fn holder_check() {
        let mut c = cfg(Operator::Dirichlet, 1.0);
        assert!(c.validate().is_ok());
        c.p2 = 4.0;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn sine_square_ratio_is_stable() {
        let c = cfg(Operator::Dirichlet, 1.0);
        let mut prev: Option<f64> = None;
        for n in [256, 512] {
            let g = GridSpec::new(1, std::f64::consts::PI, n, true).unwrap();
            let f = HalfField::sample(g, Bc::Dirichlet, |x| (3.0 * x[0]).sin()).unwrap();
            let r = bilinear_ratio(&f, &f, &c, None).unwrap().ratio.unwrap();
            assert!(r.is_finite() && r > 0.0);
            if let Some(p) = prev {
                assert!(((r - p) / p).abs() < 0.02);
            }
            prev = Some(r);
        }
    }

    #[test]
    fn zero_factor_is_degenerate() {
        let c = cfg(Operator::Dirichlet, 1.0);
        let g = GridSpec::new(1, std::f64::consts::PI, 256, true).unwrap();
        let f = HalfField::sample(g, Bc::Dirichlet, |x| x[0].sin()).unwrap();
        let z = HalfField::zeros(g, Bc::Dirichlet).unwrap();
        assert!(bilinear_ratio(&f, &z, &c, None).unwrap().degenerate);
    }

    #[test]
    fn neumann_cosine_high_order() {
        let c = cfg(Operator::Neumann, 3.0);
        let g = GridSpec::new(1, std::f64::consts::PI, 512, true).unwrap();
        let f = HalfField::sample(g, Bc::Neumann, |x| (2.0 * x[0]).cos()).unwrap();
        let r = bilinear_ratio(&f, &f, &c, None).unwrap();
        assert!(r.ratio.unwrap().is_finite());
    }

    #[test]
    fn trilinear_triples_checked() {
        let mut t = TrilinearConfig {
            s: 2.5,
            p: 2.0,
            exponents: [6.0; 9],
            op: Operator::Dirichlet,
            space: SpaceKind::Sobolev,
            homogeneous: true,
            sweep: cfg(Operator::Dirichlet, 1.0).sweep,
        };
        assert!(t.validate().is_ok());
        t.exponents[4] = 5.0;
        assert!(t.validate().is_err());
        t.exponents[4] = 6.0;
        let g = GridSpec::new(1, std::f64::consts::PI, 256, true).unwrap();
        let f = HalfField::sample(g, Bc::Dirichlet, |x| x[0].sin()).unwrap();
        let z = HalfField::zeros(g, Bc::Dirichlet).unwrap();
        assert!(trilinear_ratio(&f, &f, &f, &t, None).unwrap().ratio.unwrap().is_finite());
        assert!(trilinear_ratio(&f, &z, &f, &t, None).unwrap().degenerate);
    }

    #[test]
    fn sweep_report_is_reproducible() {
        let c = cfg(Operator::Dirichlet, 1.0);
        let a = ratio_sweep(&c).unwrap();
        let b = ratio_sweep(&c).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.summary.len(), 2);
        assert_eq!(a.entries.len(), 4);
    }
}
