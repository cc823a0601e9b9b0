//! Invariant suite run by `halfspace selftest` and reused by the acceptance checks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiments::families::{bump, FamilyKind, FamilySpec};
use crate::experiments::paraproduct::paraproduct_split;
use crate::extension::{apply_sign, extend, odd_extend, parity_defect, Parity};
use crate::grid::{lp_norm, lp_norm_values, Bc, GridSpec, HalfField, SampledField, Samples};
use crate::halfspace_ops::{frac_power, Operator};
use crate::io::{read_field, write_field, StoredField};
use crate::spectral::{
    apply_multiplier, build_bank, fractional_laplacian, singular_integral_frac_lap, Multiplier, TailModel,
};

pub const EIGEN_TOL: f64 = 1e-10;
pub const PARTITION_TOL: f64 = 1e-8;
pub const IDENTITY_TOL: f64 = 1e-12;
pub const ORACLE_TOL: f64 = 1e-3;
pub const PARITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Options {
    pub quick: bool,
    pub phi0_gain: f64,
    pub points: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self { quick: false, phi0_gain: 1.0, points: 4096 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn below(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.to_owned(), value, tolerance, passed: value.is_finite() && value < tolerance }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub version: String,
    pub options: Options,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl SelftestReport {
    /// Fixed-width pass/fail matrix.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:<34} {:>12.3e}  < {:<9.1e} {}\n",
                c.name,
                c.value,
                c.tolerance,
                if c.passed { "pass" } else { "FAIL" }
            ));
        }
        out
    }
}

/// Worst relative error of `A^{s/2}` on the first `modes` eigenfunctions of `op` on `(0, pi)`.
pub fn eigen_error(op: Operator, points: usize, modes: usize, s: f64) -> Result<f64> {
    let grid = GridSpec::new(1, PI, points, true)?;
    let mut worst = 0.0_f64;
    for k in 1..=modes {
        let k = k as f64;
        let mode = |x: f64| match op {
            Operator::Dirichlet => (k * x).sin(),
            Operator::Neumann => (k * x).cos(),
        };
        let f = HalfField::sample(grid, op.bc(), |x| mode(x[0]))?;
        let out = frac_power(&f, op, s)?;
        let want: Vec<f64> = (0..grid.half_len()).map(|i| k.powf(s) * mode(f.point(i)[0])).collect();
        let err: Vec<f64> = out.values().iter().zip(&want).map(|(a, b)| a - b).collect();
        let cell = grid.cell_volume();
        worst = worst.max(lp_norm_values(&err, cell, 2.0) / lp_norm_values(&want, cell, 2.0));
    }
    Ok(worst)
}

/// Ten fields: five Dirichlet, five Neumann, drawn from the mixed and band-limited families.
pub fn identity_corpus(grid: &GridSpec) -> Result<Vec<HalfField>> {
    let mut out = Vec::new();
    for op in [Operator::Dirichlet, Operator::Neumann] {
        let mixed = FamilySpec::new(FamilyKind::Mixed, 17).members(op, grid.half_width(), 3);
        let band = FamilySpec::new(FamilyKind::BandLimited, 18).members(op, grid.half_width(), 2);
        for m in mixed.iter().chain(&band) {
            out.push(m.sample(*grid, op.bc())?);
        }
    }
    Ok(out)
}

/// `|2^{1/p} ||A^{s/2} h||_p - ||Lambda^s h_ext||_p|` relative to the right side, after a
/// binary round trip of `h`.
pub fn identity_defect(h: &HalfField, s: f64, p: f64) -> Result<f64> {
    let mut buf = Vec::new();
    write_field(&mut buf, &StoredField::Half(h.clone()))?;
    let h = match read_field(&mut buf.as_slice())? {
        StoredField::Half(h) => h,
        StoredField::Full(_) => unreachable!("stored a half field"),
    };
    let op = match h.bc() {
        Bc::Neumann => Operator::Neumann,
        _ => Operator::Dirichlet,
    };
    let weight = if p.is_finite() { 2.0_f64.powf(1.0 / p) } else { 1.0 };
    let left = weight * lp_norm(&frac_power(&h, op, s)?, p)?;
    let right = lp_norm(&fractional_laplacian(&extend(&h, op.parity())?, s)?, p)?;
    Ok((left - right).abs() / right.max(f64::MIN_POSITIVE))
}

/// Smooth bumps well inside `[-L/2, L/2]` on a one-dimensional box.
pub fn oracle_bumps(grid: &GridSpec, count: usize, seed: u64) -> Result<Vec<SampledField>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = grid.half_width() / 2.0;
    (0..count)
        .map(|_| {
            let width = reach * rng.gen_range(0.2..0.5);
            let center = rng.gen_range(-(reach - width)..(reach - width));
            let amp = rng.gen_range(0.5..2.0);
            SampledField::sample(*grid, |x| amp * bump((x[0] - center) / width))
        })
        .collect()
}

/// Relative L^2 distance between the spectral and singular-integral `Lambda^s f`.
pub fn oracle_error(f: &SampledField, s: f64) -> Result<f64> {
    let spectral = fractional_laplacian(f, s)?;
    let oracle = singular_integral_frac_lap(f, s, TailModel::Periodic)?;
    let diff = spectral.zip_with(&oracle, |a, b| a - b)?;
    Ok(lp_norm(&diff, 2.0)? / lp_norm(&spectral, 2.0)?)
}

fn parity_checks(grid: &GridSpec) -> Result<Vec<Check>> {
    let f = HalfField::sample(*grid, Bc::Dirichlet, |x| x[0] * (1.0 + x[0]).cos())?;
    let g = HalfField::sample(*grid, Bc::Dirichlet, |x| (2.0 * x[0]).sin() + 0.3)?;
    let h = HalfField::sample(*grid, Bc::Dirichlet, |x| (-x[0] * x[0]).exp())?;
    let (fo, go, ho) = (odd_extend(&f)?, odd_extend(&g)?, odd_extend(&h)?);
    let fg = odd_extend(&f.product(&g, Bc::Dirichlet)?)?;
    let signed = apply_sign(&fo.zip_with(&go, |a, b| a * b)?)?;
    let product = fg.zip_with(&signed, |a, b| (a - b).abs())?.max_abs();
    let fgh = odd_extend(&f.product(&g, Bc::Dirichlet)?.product(&h, Bc::Dirichlet)?)?;
    let triple = fo.zip_with(&go, |a, b| a * b)?.zip_with(&ho, |a, b| a * b)?;
    let trilinear = fgh.zip_with(&triple, |a, b| (a - b).abs())?.max_abs();
    let mut preserve = 0.0_f64;
    for (field, parity) in [(&fo, Parity::Odd), (&extend(&g.clone().retagged(Bc::Neumann), Parity::Even)?, Parity::Even)] {
        for m in [Multiplier::radial_power(0.7), Multiplier::bessel(1.3), Multiplier::stable_semigroup(0.01, 1.0)] {
            let out = apply_multiplier(field, &m)?;
            preserve = preserve.max(parity_defect(&out, parity) / out.max_abs().max(f64::MIN_POSITIVE));
        }
    }
    Ok(vec![
        Check::below("parity: product sign identity", product, PARITY_TOL),
        Check::below("parity: trilinear identity", trilinear, PARITY_TOL),
        Check::below("parity: multipliers preserve parity", preserve, PARITY_TOL),
    ])
}

/// Run the suite; `phi0_gain` other than 1 injects a mis-normalized bank.
pub fn run(options: Options) -> Result<SelftestReport> {
    let points = if options.quick { options.points.min(512) } else { options.points };
    let mut checks = Vec::new();

    let ss: &[f64] = if options.quick { &[0.5, 2.0] } else { &[0.5, 1.0, 2.0, 2.5] };
    for op in [Operator::Dirichlet, Operator::Neumann] {
        let mut worst = 0.0_f64;
        for &s in ss {
            worst = worst.max(eigen_error(op, points, 20, s)?);
        }
        checks.push(Check::below(&format!("eigenfunctions {}", op.label()), worst, EIGEN_TOL));
    }

    let grid = GridSpec::new(1, 2.0, points, true)?;
    let bank = build_bank(&grid)?.with_phi0_gain(options.phi0_gain);
    checks.push(Check::below("partition of unity", bank.partition_residual(&grid), PARTITION_TOL));
    checks.push(Check::below("partition of unity (inhomogeneous)", bank.inhomogeneous_residual(&grid), PARTITION_TOL));
    let probe = SampledField::sample(grid, |x| (PI * x[0]).sin() + 0.4 * (5.0 * PI * x[0]).cos() + 0.2)?;
    let reconstruction = match paraproduct_split(&probe, &probe, &bank) {
        Ok(split) => split.reconstruction_residual,
        Err(crate::Error::Reconstruction { residual, .. }) => residual,
        Err(e) => return Err(e),
    };
    checks.push(Check::below("paraproduct reconstruction", reconstruction, crate::experiments::paraproduct::RECONSTRUCTION_TOL));

    let corpus = identity_corpus(&grid)?;
    let ps: &[f64] = if options.quick { &[2.0] } else { &[1.0, 2.0, 4.0, f64::INFINITY] };
    let mut worst = 0.0_f64;
    for h in &corpus {
        for &p in ps {
            for &s in ss {
                worst = worst.max(identity_defect(h, s, p)?);
            }
        }
    }
    checks.push(Check::below("extension norm identity", worst, IDENTITY_TOL));

    let (count, orders): (usize, &[f64]) = if options.quick { (2, &[0.5]) } else { (10, &[0.25, 0.5, 0.75]) };
    let mut worst = 0.0_f64;
    for f in oracle_bumps(&grid, count, 5)? {
        for &s in orders {
            worst = worst.max(oracle_error(&f, s)?);
        }
    }
    checks.push(Check::below("singular-integral oracle", worst, ORACLE_TOL));

    checks.extend(parity_checks(&grid)?);
    let passed = checks.iter().all(|c| c.passed);
    Ok(SelftestReport { version: crate::VERSION.to_owned(), options, checks, passed })
}
