//! Reflection across `x_n = 0`: odd/even extension, restriction and sign multiplication.
//!
//! On a staggered grid normal index `k` mirrors to `N - 1 - k`, so extension and
//! restriction are exact inverses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Bc, GridSpec, HalfField, SampledField, Samples};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub(crate) fn sign(self) -> f64 {
        match self {
            Parity::Odd => -1.0,
            Parity::Even => 1.0,
        }
    }

    /// Tag whose natural extension has this parity.
    pub fn bc(self) -> Bc {
        match self {
            Parity::Odd => Bc::Dirichlet,
            Parity::Even => Bc::Neumann,
        }
    }

    pub fn flipped(self) -> Parity {
        match self {
            Parity::Odd => Parity::Even,
            Parity::Even => Parity::Odd,
        }
    }
}

/// Extension with the given parity; a tagged field may only be extended with its own parity.
pub fn extend(hf: &HalfField, parity: Parity) -> Result<SampledField> {
    if hf.bc() != Bc::None && hf.bc() != parity.bc() {
        return Err(Error::TagMismatch { expected: parity.bc(), found: hf.bc() });
    }
    Ok(extend_unchecked(hf, parity))
}

pub fn odd_extend(hf: &HalfField) -> Result<SampledField> {
    extend(hf, Parity::Odd)
}

pub fn even_extend(hf: &HalfField) -> Result<SampledField> {
    extend(hf, Parity::Even)
}

pub(crate) fn extend_unchecked(hf: &HalfField, parity: Parity) -> SampledField {
    let grid = *hf.grid();
    let n = grid.points();
    let half = n / 2;
    let sign = parity.sign();
    let mut out = vec![0.0; grid.len()];
    for (line, chunk) in out.chunks_exact_mut(n).enumerate() {
        let src = &hf.values()[line * half..(line + 1) * half];
        chunk[half..].copy_from_slice(src);
        for k in 0..half {
            chunk[half - 1 - k] = sign * src[k];
        }
    }
    SampledField::from_values_unchecked(grid, out)
}

/// Keep the samples with `x_n > 0` and attach `bc`.
pub fn restrict(f: &SampledField, bc: Bc) -> Result<HalfField> {
    let grid = *f.grid();
    grid.require_stagger("restriction")?;
    Ok(HalfField::from_values_unchecked(grid, upper_half(&grid, f.values()), bc))
}

fn upper_half(grid: &GridSpec, values: &[f64]) -> Vec<f64> {
    let n = grid.points();
    let mut out = Vec::with_capacity(grid.half_len());
    for chunk in values.chunks_exact(n) {
        out.extend_from_slice(&chunk[n / 2..]);
    }
    out
}

/// Multiply by `sign(x_n)`.
pub fn apply_sign(f: &SampledField) -> Result<SampledField> {
    let grid = *f.grid();
    grid.require_stagger("sign multiplication")?;
    let n = grid.points();
    let mut out = f.values().to_vec();
    for chunk in out.chunks_exact_mut(n) {
        for v in &mut chunk[..n / 2] {
            *v = -*v;
        }
    }
    Ok(SampledField::from_values_unchecked(grid, out))
}

/// Largest `|f(x', x_n) - sign * f(x', -x_n)|` for the given parity.
pub fn parity_defect(f: &SampledField, parity: Parity) -> f64 {
    let n = f.grid().points();
    let sign = parity.sign();
    let mut worst = 0.0_f64;
    for chunk in f.values().chunks_exact(n) {
        for k in 0..n / 2 {
            worst = worst.max((chunk[n - 1 - k] - sign * chunk[k]).abs());
        }
    }
    worst
}
