//! Bony split of a product of full-space fields and the second-order Leibniz rule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{extend_unchecked, restrict, Parity};
use crate::grid::{lp_norm, Bc, HalfField, SampledField, Samples};
use crate::halfspace_ops::{frac_power, tangential_derivative, Operator};
use crate::spectral::{fractional_laplacian, DyadicBank, Spectrum};

pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// Dyadic pieces of `f`, lowest first; the mean sits one index below the bank.
fn blocks(f: &SampledField, bank: &DyadicBank) -> Result<Vec<SampledField>> {
    let spectrum = Spectrum::of(f);
    let mean = spectrum.mean();
    let mut out = vec![SampledField::sample(*f.grid(), |_| mean)?];
    let rest = (bank.j_min()..=bank.j_max())
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|j| spectrum.apply(&bank.block(j)))
        .collect::<Result<Vec<_>>>()?;
    out.extend(rest);
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ParaproductSplit {
    /// Terms with the first factor at least three octaves above the second.
    pub high_low: SampledField,
    /// All remaining terms.
    pub remainder: SampledField,
    pub reconstruction_residual: f64,
}

/// `sum_{k >= l+3} F_k G_l` and its complement. Fails when the pieces do not add up to `FG`.
pub fn paraproduct_split(f: &SampledField, g: &SampledField, bank: &DyadicBank) -> Result<ParaproductSplit> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *f.grid();
    let fb = blocks(f, bank)?;
    let gb = blocks(g, bank)?;
    let len = grid.len();
    let count = fb.len();
    let mut high_low = vec![0.0; len];
    let mut remainder = vec![0.0; len];
    // prefix sums of the G pieces
    let mut g_prefix = vec![vec![0.0; len]; count];
    for l in 0..count {
        for i in 0..len {
            g_prefix[l][i] = gb[l].values()[i] + if l > 0 { g_prefix[l - 1][i] } else { 0.0 };
        }
    }
    let mut f_prefix = vec![0.0; len];
    let mut f_prefix_at = vec![vec![0.0; len]; count];
    for k in 0..count {
        for i in 0..len {
            f_prefix[i] += fb[k].values()[i];
        }
        f_prefix_at[k].copy_from_slice(&f_prefix);
    }
    for k in 3..count {
        let low = &g_prefix[k - 3];
        for i in 0..len {
            high_low[i] += fb[k].values()[i] * low[i];
        }
    }
    for l in 0..count {
        let upto = (l + 2).min(count - 1);
        let fsum = &f_prefix_at[upto];
        for i in 0..len {
            remainder[i] += gb[l].values()[i] * fsum[i];
        }
    }
    let product: Vec<f64> = f.values().iter().zip(g.values()).map(|(a, b)| a * b).collect();
    let diff: Vec<f64> = (0..len).map(|i| high_low[i] + remainder[i] - product[i]).collect();
    let cell = grid.cell_volume();
    let scale = crate::grid::lp_norm_values(&product, cell, 2.0);
    let err = crate::grid::lp_norm_values(&diff, cell, 2.0);
    let residual = if scale > 0.0 { err / scale } else { err };
    if residual > RECONSTRUCTION_TOL {
        return Err(Error::Reconstruction { residual, tolerance: RECONSTRUCTION_TOL });
    }
    Ok(ParaproductSplit {
        high_low: SampledField::from_values(grid, high_low)?,
        remainder: SampledField::from_values(grid, remainder)?,
        reconstruction_residual: residual,
    })
}

/// `||piece I||_{H^s_p} / (||F||_{H^s_p} ||G||_inf)`.
pub fn paraproduct_ratio(split: &ParaproductSplit, f: &SampledField, g: &SampledField, s: f64, p: f64) -> Result<Option<f64>> {
    let num = lp_norm(&fractional_laplacian(&split.high_low, s)?, p)?;
    let den = lp_norm(&fractional_laplacian(f, s)?, p)? * lp_norm(g, f64::INFINITY)?;
    Ok((den > 0.0).then(|| num / den))
}

#[derive(Clone, Debug)]
pub struct LeibnizDecomposition {
    /// `(A_D f) g`
    pub laplacian_f_times_g: HalfField,
    /// `grad f . grad g`, even across the wall.
    pub gradient_dot: HalfField,
    /// `f (A_D g)`
    pub f_times_laplacian_g: HalfField,
    /// `A_D (fg)` from the smooth even product `f_odd g_odd`.
    pub direct: HalfField,
    /// Relative L^2 misfit of `direct` against `(A_D f) g - 2 grad f . grad g + f (A_D g)`.
    pub residual: f64,
    /// Largest boundary value of `grad f . grad g`, extrapolated to `x_n = 0`.
    pub boundary_trace: f64,
    pub trace_flagged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeibnizSummary {
    pub residual: f64,
    pub boundary_trace: f64,
    pub trace_flagged: bool,
}

impl LeibnizDecomposition {
    pub fn summary(&self) -> LeibnizSummary {
        LeibnizSummary {
            residual: self.residual,
            boundary_trace: self.boundary_trace,
            trace_flagged: self.trace_flagged,
        }
    }
}

fn require_dirichlet(f: &HalfField) -> Result<()> {
    if f.bc() == Bc::Dirichlet {
        Ok(())
    } else {
        Err(Error::TagMismatch { expected: Bc::Dirichlet, found: f.bc() })
    }
}

/// Second-order Leibniz rule for `A_D = -Laplacian` with odd reflection.
pub fn leibniz_decomposition(f: &HalfField, g: &HalfField) -> Result<LeibnizDecomposition> {
    require_dirichlet(f)?;
    require_dirichlet(g)?;
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *f.grid();
    let laplacian_f_times_g = frac_power(f, Operator::Dirichlet, 2.0)?.product(g, Bc::Dirichlet)?;
    let f_times_laplacian_g = f.product(&frac_power(g, Operator::Dirichlet, 2.0)?, Bc::Dirichlet)?;
    let mut gradient_dot = HalfField::zeros(grid, Bc::Neumann)?;
    for axis in 0..grid.dim() {
        let df = tangential_derivative(f, axis)?;
        let dg = tangential_derivative(g, axis)?;
        let term = df.product(&dg, Bc::Neumann)?;
        gradient_dot = gradient_dot.zip_with(&term, Bc::Neumann, |a, b| a + b)?;
    }
    let even_product = extend_unchecked(f, Parity::Odd)
        .zip_with(&extend_unchecked(g, Parity::Odd), |a, b| a * b)?;
    let direct = restrict(&fractional_laplacian(&even_product, 2.0)?, Bc::Dirichlet)?;
    let assembled = laplacian_f_times_g
        .zip_with(&gradient_dot, Bc::Dirichlet, |a, b| a - 2.0 * b)?
        .zip_with(&f_times_laplacian_g, Bc::Dirichlet, |a, b| a + b)?;
    let diff = direct.zip_with(&assembled, Bc::None, |a, b| a - b)?;
    let scale = lp_norm(&direct, 2.0)?;
    let err = lp_norm(&diff, 2.0)?;
    let residual = if scale > 0.0 { err / scale } else { err };
    let boundary_trace = wall_trace(&gradient_dot);
    let sup = gradient_dot.max_abs();
    let trace_flagged = boundary_trace > 1e-6 * sup.max(f64::MIN_POSITIVE) && boundary_trace > 1e-12;
    Ok(LeibnizDecomposition {
        laplacian_f_times_g,
        gradient_dot,
        f_times_laplacian_g,
        direct,
        residual,
        boundary_trace,
        trace_flagged,
    })
}

/// Quadratic extrapolation from the three samples nearest the wall, maximized over lines.
fn wall_trace(f: &HalfField) -> f64 {
    let half = f.grid().points() / 2;
    f.values()
        .chunks_exact(half)
        .map(|line| ((15.0 * line[0] - 10.0 * line[1] + 3.0 * line[2]) / 8.0).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::counterexample::counterexample_fields;
    use crate::grid::GridSpec;
    use crate::spectral::build_bank;
    use std::f64::consts::PI;

    #[test]
    fn high_low_captures_separated_modes() {
        let g = GridSpec::new(1, PI, 512, true).unwrap();
        let bank = build_bank(&g).unwrap();
        let hi = SampledField::sample(g, |x| (64.0 * x[0]).sin()).unwrap();
        let lo = SampledField::sample(g, |x| (2.0 * x[0]).cos()).unwrap();
        let split = paraproduct_split(&hi, &lo, &bank).unwrap();
        assert!(split.remainder.max_abs() < 1e-12);
        assert!(split.reconstruction_residual < 1e-12);
    }

    #[test]
    fn square_reconstructs() {
        let g = GridSpec::new(1, PI, 256, true).unwrap();
        let bank = build_bank(&g).unwrap();
        let f = SampledField::sample(g, |x| (x[0]).sin() + 0.2 * (9.0 * x[0]).cos() + 0.1).unwrap();
        let split = paraproduct_split(&f, &f, &bank).unwrap();
        assert!(split.reconstruction_residual < 1e-12);
        assert!(paraproduct_ratio(&split, &f, &f, 1.0, 2.0).unwrap().unwrap().is_finite());
    }

    #[test]
    fn broken_bank_detected() {
        let g = GridSpec::new(1, PI, 256, true).unwrap();
        let bank = build_bank(&g).unwrap().with_phi0_gain(1.05);
        let f = SampledField::sample(g, |x| (3.0 * x[0]).sin()).unwrap();
        assert!(matches!(paraproduct_split(&f, &f, &bank), Err(Error::Reconstruction { .. })));
    }

    #[test]
    fn leibniz_on_sines() {
        let g = GridSpec::new(1, PI, 256, true).unwrap();
        let f = HalfField::sample(g, Bc::Dirichlet, |x| (3.0 * x[0]).sin()).unwrap();
        let d = leibniz_decomposition(&f, &f).unwrap();
        assert!(d.residual < 1e-10, "{}", d.residual);
        // -(sin^2)'' = 2k^2 (sin^2 - cos^2)
        for (i, v) in d.direct.values().iter().enumerate() {
            let x = d.direct.point(i)[0];
            let want = 18.0 * ((3.0 * x).sin().powi(2) - (3.0 * x).cos().powi(2));
            assert!((v - want).abs() < 1e-9);
        }
    }

    #[test]
    fn leibniz_zero_and_counterexample() {
        let g = GridSpec::new(1, 2.0, 2048, true).unwrap();
        let z = HalfField::zeros(g, Bc::Dirichlet).unwrap();
        let d = leibniz_decomposition(&z, &z).unwrap();
        assert_eq!(d.direct.max_abs(), 0.0);
        assert_eq!(d.gradient_dot.max_abs(), 0.0);
        assert!(!d.trace_flagged);
        let (f, h) = counterexample_fields(&g).unwrap();
        let d = leibniz_decomposition(&f, &h).unwrap();
        assert!(d.residual < 1e-8, "{}", d.residual);
        assert!((d.boundary_trace - 1.0).abs() < 1e-6);
        assert!(d.trace_flagged);
    }
}
