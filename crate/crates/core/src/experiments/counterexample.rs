//! The wall counterexample: `f = g = x phi(x)` whose product has a jump after odd
//! reflection, so `Lambda^{1/p}` of it blows up like `|x|^{-1/p}` at the wall.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::families::cutoff;
use crate::fit::{line_fit, LineFit};
use crate::grid::{lp_norm_values, Bc, GridSpec, HalfField, SampledField, Samples};
use crate::quadrature::{gauss_legendre, integrate};
use crate::spectral::bank::BankInfo;
use crate::spectral::{fractional_laplacian, singular_integral_frac_lap, DyadicBank, Spectrum, TailModel};

/// Relative engine disagreement tolerated in the fit region.
pub const ENGINE_TOL: f64 = 0.05;

fn require_box(grid: &GridSpec) -> Result<()> {
    grid.require_stagger("the counterexample")?;
    if grid.half_width() < 2.0 {
        return Err(Error::InvalidParameter(format!(
            "box half-width {} too small: the support [0, 1] must sit in the central half (L >= 2)",
            grid.half_width()
        )));
    }
    Ok(())
}

/// The Dirichlet pair `x_n phi(x_n) prod_k phi(|x_k|)`.
pub fn counterexample_fields(grid: &GridSpec) -> Result<(HalfField, HalfField)> {
    require_box(grid)?;
    let f = HalfField::sample(*grid, Bc::Dirichlet, |x| {
        let (xn, rest) = x.split_last().expect("dimension >= 1");
        xn * cutoff(*xn) * rest.iter().map(|y| cutoff(y.abs())).product::<f64>()
    })?;
    Ok((f.clone(), f))
}

/// `sign(x) phi(|x|)^2` on a one-dimensional grid.
pub fn jump_profile(grid: &GridSpec) -> Result<SampledField> {
    require_box(grid)?;
    if grid.dim() != 1 {
        return Err(Error::InvalidParameter("jump profile is one-dimensional".into()));
    }
    SampledField::sample(*grid, |x| x[0].signum() * cutoff(x[0].abs()).powi(2))
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "p = {p}: the singular order 1/p must lie in (0, 1), so 1 < p < inf"
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityOptions {
    /// Fit starts this many cells from the wall.
    pub fit_start_cells: usize,
    /// Fit ends at this distance from the wall.
    pub delta: f64,
}

impl Default for SingularityOptions {
    fn default() -> Self {
        Self { fit_start_cells: 16, delta: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineFit {
    pub exponent: f64,
    pub exponent_se: f64,
    /// `exp(intercept)` of the log-log fit.
    pub c_fit: f64,
    /// `min x^{1/p} |out(x)|` over the fit window: a valid constant for the lower bound there.
    pub c_lower: f64,
    pub antisymmetry_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityProfile {
    pub p: f64,
    pub grid: GridSpec,
    pub x_lo: f64,
    pub delta: f64,
    pub fit_points: usize,
    pub spectral: EngineFit,
    pub quadrature: EngineFit,
    pub max_engine_disagreement: f64,
    /// `(x, spectral, quadrature)` for `0 < x <= 0.5`.
    pub samples: Vec<[f64; 3]>,
}

fn engine_fit(out: &SampledField, xs: &[(usize, f64)], s: f64) -> Result<EngineFit> {
    let lx: Vec<f64> = xs.iter().map(|(_, x)| x.ln()).collect();
    let ly: Vec<f64> = xs.iter().map(|(i, _)| out.values()[*i].abs().ln()).collect();
    let fit: LineFit =
        line_fit(&lx, &ly).ok_or_else(|| Error::Degenerate("singularity fit needs two points".into()))?;
    let c_lower = xs
        .iter()
        .map(|(i, x)| x.powf(s) * out.values()[*i])
        .fold(f64::INFINITY, f64::min);
    let n = out.values().len();
    let defect = (0..n / 2)
        .map(|k| (out.values()[k] + out.values()[n - 1 - k]).abs())
        .fold(0.0, f64::max)
        / out.max_abs().max(f64::MIN_POSITIVE);
    Ok(EngineFit {
        exponent: fit.slope,
        exponent_se: fit.slope_se,
        c_fit: fit.intercept.exp(),
        c_lower,
        antisymmetry_defect: defect,
    })
}

/// Fit `log |Lambda^{1/p} Phi_odd|` against `log x` near the wall with both engines.
pub fn singularity_profile(p: f64, grid: &GridSpec, opts: SingularityOptions) -> Result<SingularityProfile> {
    check_p(p)?;
    let s = 1.0 / p;
    let phi = jump_profile(grid)?;
    let spectral = fractional_laplacian(&phi, s)?;
    let quadrature = singular_integral_frac_lap(&phi, s, TailModel::Periodic)?;
    let n = grid.points();
    let h = grid.spacing();
    let x_lo = opts.fit_start_cells as f64 * h;
    let xs: Vec<(usize, f64)> = (n / 2..n)
        .map(|k| (k, grid.coord(0, k)))
        .filter(|(_, x)| *x >= x_lo && *x <= opts.delta)
        .collect();
    if xs.len() < 8 {
        return Err(Error::InvalidParameter(format!(
            "only {} samples in the fit window [{x_lo}, {}]; refine the grid",
            xs.len(),
            opts.delta
        )));
    }
    let disagreement = xs
        .iter()
        .map(|(i, _)| {
            let a = spectral.values()[*i];
            ((a - quadrature.values()[*i]) / a).abs()
        })
        .fold(0.0, f64::max);
    if disagreement > ENGINE_TOL {
        return Err(Error::EngineDisagreement { max_relative: disagreement });
    }
    let samples = (n / 2..n)
        .map(|k| [grid.coord(0, k), spectral.values()[k], quadrature.values()[k]])
        .take_while(|r| r[0] <= 0.5)
        .collect();
    Ok(SingularityProfile {
        p,
        grid: *grid,
        x_lo,
        delta: opts.delta,
        fit_points: xs.len(),
        spectral: engine_fit(&spectral, &xs, s)?,
        quadrature: engine_fit(&quadrature, &xs, s)?,
        max_engine_disagreement: disagreement,
        samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerGrowth {
    pub p: f64,
    pub delta: f64,
    pub points: Vec<usize>,
    /// `||Lambda^{1/p} Phi_odd||^p_{L^p(h/2, delta)}` per resolution.
    pub layer_power: Vec<f64>,
    /// Fit of `layer_power` against `log N`.
    pub fit: Option<LineFit>,
}

/// The `p`-th power of the near-wall norm grows linearly in `log N` as the grid resolves
/// the `|x|^{-1/p}` singularity.
pub fn layer_growth(p: f64, resolutions: &[usize], half_width: f64, delta: f64) -> Result<LayerGrowth> {
    check_p(p)?;
    let mut points = resolutions.to_vec();
    points.sort_unstable();
    let layer_power = points
        .iter()
        .map(|&n| {
            let grid = GridSpec::new(1, half_width, n, true)?;
            let out = fractional_laplacian(&jump_profile(&grid)?, 1.0 / p)?;
            let inside: Vec<f64> = (n / 2..n)
                .filter(|&k| grid.coord(0, k) <= delta)
                .map(|k| out.values()[k])
                .collect();
            Ok(lp_norm_values(&inside, grid.spacing(), p).powf(p))
        })
        .collect::<Result<Vec<_>>>()?;
    let ln: Vec<f64> = points.iter().map(|&n| (n as f64).ln()).collect();
    Ok(LayerGrowth { p, delta, fit: line_fit(&ln, &layer_power), points, layer_power })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRow {
    pub j: i32,
    /// `2^{j/p} ||phi_j Phi_odd||_{L^p}`
    pub weighted: f64,
    pub sup: f64,
    /// The whole annulus `[2^{j-1}, 2^{j+1}]` lies below Nyquist.
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauCheck {
    pub js: Vec<i32>,
    pub min: f64,
    pub median: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSumGrowth {
    pub q: f64,
    pub onset_j: i32,
    /// `(sum_{j0 <= j < j0 + J} weighted_j^q)^{1/q}` for `J = 1, 2, ...`
    pub sums: Vec<f64>,
    pub exponent: Option<f64>,
    pub expected: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitComparison {
    pub comparison_j: i32,
    pub u_argmax: f64,
    pub limit_value: f64,
    pub block_sup: f64,
    pub relative_error: f64,
    pub passes: bool,
    /// `(u, block at 2^{-j} u, limit at u)`
    pub samples: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockFloorReport {
    pub p: f64,
    pub grid: GridSpec,
    pub bank: BankInfo,
    pub blocks: Vec<BlockRow>,
    pub top_complete_j: i32,
    pub plateau: PlateauCheck,
    pub partial_sums: Vec<PartialSumGrowth>,
    pub limit: LimitComparison,
}

pub const PLATEAU_FLOOR: f64 = 0.5;
pub const PARTIAL_SUM_TOL: f64 = 0.15;
pub const LIMIT_TOL: f64 = 0.05;
const OCTAVES_REQUIRED: i32 = 6;
const ONSET_BAND: f64 = 0.10;

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 0 {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

/// Kernel of `phi_0(|D|)` on the line: `(1/pi) int phi_0(xi) cos(v xi) dxi`.
pub fn block_kernel(bank: &DyadicBank, v: f64) -> f64 {
    thread_local! {
        static RULE: (Vec<f64>, Vec<f64>) = gauss_legendre(16);
    }
    RULE.with(|rule| {
        let mut total = 0.0;
        for (a, b) in [(0.5, 1.0), (1.0, 2.0)] {
            // about one oscillation per panel
            let panels = ((v.abs() * (b - a) / 6.0).ceil() as usize).max(2);
            let w = (b - a) / panels as f64;
            for i in 0..panels {
                let lo = a + i as f64 * w;
                total += integrate(rule, lo, lo + w, |x| bank.phi0(x) * (v * x).cos());
            }
        }
        total / std::f64::consts::PI
    })
}

/// `int_0^inf (k(u - y) - k(u + y)) dy` with `k` the block kernel, by panel quadrature on `[0, 200]`.
pub fn limit_profile(bank: &DyadicBank, u: f64) -> f64 {
    const REACH: f64 = 200.0;
    const PANEL: f64 = 0.5;
    let rule = gauss_legendre(8);
    let panels = (REACH / PANEL) as usize;
    (0..panels)
        .map(|i| {
            let a = i as f64 * PANEL;
            integrate(&rule, a, a + PANEL, |y| block_kernel(bank, u - y) - block_kernel(bank, u + y))
        })
        .sum()
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-5 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Dyadic blocks of `Phi_odd`: plateau of `2^{j/p} ||phi_j Phi_odd||_p`, growth of the
/// `l^q` partial sums, and agreement of a fine block with the limiting profile.
pub fn besov_block_floor(p: f64, grid: &GridSpec, bank: &DyadicBank, qs: &[f64]) -> Result<BlockFloorReport> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("block floor needs 1 <= p < inf, got {p}")));
    }
    let phi = jump_profile(grid)?;
    let nyquist = grid.nyquist();
    let top_complete_j = (nyquist.log2().floor() as i32) - 1;
    if top_complete_j < OCTAVES_REQUIRED || top_complete_j - 3 < bank.j_min() {
        return Err(Error::InvalidParameter(format!(
            "complete blocks reach only j = {top_complete_j}; {OCTAVES_REQUIRED} octaves above the support scale are required"
        )));
    }
    let spectrum = Spectrum::of(&phi);
    let cell = grid.spacing();
    let fields = (bank.j_min()..=bank.j_max())
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|j| Ok((j, spectrum.apply(&bank.block(j))?)))
        .collect::<Result<Vec<_>>>()?;
    let blocks: Vec<BlockRow> = fields
        .iter()
        .map(|(j, f)| BlockRow {
            j: *j,
            weighted: 2.0_f64.powf(*j as f64 / p) * lp_norm_values(f.values(), cell, p),
            sup: f.max_abs(),
            complete: *j <= top_complete_j,
        })
        .collect();
    let complete: Vec<&BlockRow> = blocks.iter().filter(|b| b.complete).collect();
    let top4: Vec<&BlockRow> = complete[complete.len() - 4..].to_vec();
    let top_values: Vec<f64> = top4.iter().map(|b| b.weighted).collect();
    let med = median(&top_values);
    let min = top_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let plateau = PlateauCheck {
        js: top4.iter().map(|b| b.j).collect(),
        min,
        median: med,
        passes: min > 0.0 && min > PLATEAU_FLOOR * med,
    };
    // first j from which every complete block stays in the plateau band
    let mut onset = top_complete_j;
    for b in complete.iter().rev() {
        if b.j < 0 || (b.weighted - med).abs() > ONSET_BAND * med {
            break;
        }
        onset = b.j;
    }
    let run: Vec<f64> = complete.iter().filter(|b| b.j >= onset).map(|b| b.weighted).collect();
    let partial_sums = qs
        .iter()
        .map(|&q| {
            let mut acc = 0.0;
            let sums: Vec<f64> = run
                .iter()
                .map(|w| {
                    acc += w.powf(q);
                    acc.powf(1.0 / q)
                })
                .collect();
            let lj: Vec<f64> = (1..=sums.len()).map(|k| (k as f64).ln()).collect();
            let ls: Vec<f64> = sums.iter().map(|v| v.ln()).collect();
            let exponent = if sums.len() >= 3 { line_fit(&lj, &ls).map(|f| f.slope) } else { None };
            let expected = 1.0 / q;
            PartialSumGrowth {
                q,
                onset_j: onset,
                passes: exponent.is_some_and(|e| (e - expected).abs() <= PARTIAL_SUM_TOL),
                sums,
                exponent,
                expected,
            }
        })
        .collect();

    let comparison_j = ((nyquist / 4.0).log2().floor() as i32 - 1).min(bank.j_max());
    let block = &fields
        .iter()
        .find(|(j, _)| *j == comparison_j)
        .ok_or_else(|| Error::InvalidParameter("comparison block outside bank".into()))?
        .1;
    let scale = 2.0_f64.powi(comparison_j);
    let n = grid.points();
    let pts: Vec<(f64, f64)> = (n / 2..n)
        .map(|k| (grid.coord(0, k) * scale, block.values()[k]))
        .take_while(|(u, _)| *u <= 8.0)
        .collect();
    let limits: Vec<f64> = pts.par_iter().map(|(u, _)| limit_profile(bank, *u)).collect();
    let peak = limits.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let worst = pts.iter().zip(&limits).map(|((_, b), l)| (b - l).abs()).fold(0.0, f64::max);
    let relative_error = if peak > 0.0 { worst / peak } else { f64::INFINITY };
    let u_argmax = golden_max(|u| limit_profile(bank, u), 0.25, 4.0);
    let limit_value = limit_profile(bank, u_argmax);
    let limit = LimitComparison {
        comparison_j,
        u_argmax,
        limit_value,
        block_sup: block.max_abs(),
        relative_error,
        passes: limit_value.abs() > 0.0 && relative_error < LIMIT_TOL,
        samples: pts.iter().zip(&limits).map(|((u, b), l)| [*u, *b, *l]).collect(),
    };
    Ok(BlockFloorReport {
        p,
        grid: *grid,
        bank: bank.info(),
        blocks,
        top_complete_j,
        plateau,
        partial_sums,
        limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::build_bank;

    #[test]
    fn pair_shape() {
        let g = GridSpec::new(1, 2.0, 1024, true).unwrap();
        let (f, h) = counterexample_fields(&g).unwrap();
        assert_eq!(f, h);
        assert_eq!(f.bc(), Bc::Dirichlet);
        let dx = g.spacing();
        assert_eq!(f.values()[0], dx / 2.0);
        for (i, v) in f.values().iter().enumerate() {
            if f.point(i)[0] >= 1.0 {
                assert_eq!(*v, 0.0);
            }
        }
        assert!(counterexample_fields(&GridSpec::new(1, 1.0, 1024, true).unwrap()).is_err());
    }

    #[test]
    fn pair_in_two_dimensions() {
        let g = GridSpec::new(2, 2.0, 64, true).unwrap();
        let (f, _) = counterexample_fields(&g).unwrap();
        let x = f.point(0);
        assert!((f.values()[0] - x[1] * cutoff(x[1]) * cutoff(x[0].abs())).abs() < 1e-15);
    }

    #[test]
    fn rejects_integrable_endpoint() {
        let g = GridSpec::new(1, 2.0, 4096, true).unwrap();
        assert!(singularity_profile(1.0, &g, SingularityOptions::default()).is_err());
        assert!(singularity_profile(f64::INFINITY, &g, SingularityOptions::default()).is_err());
    }

    #[test]
    fn sine_form_of_limit() {
        // 2 int_0^u k = (2/pi) int phi_0(xi) sin(u xi)/xi dxi
        let g = GridSpec::new(1, 2.0, 1024, true).unwrap();
        let bank = build_bank(&g).unwrap();
        let rule = gauss_legendre(64);
        for u in [0.5, 1.4, 3.0] {
            let closed = 2.0 / std::f64::consts::PI
                * (integrate(&rule, 0.5, 1.0, |x| bank.phi0(x) * (u * x).sin() / x)
                    + integrate(&rule, 1.0, 2.0, |x| bank.phi0(x) * (u * x).sin() / x));
            let direct = limit_profile(&bank, u);
            assert!((closed - direct).abs() < 1e-6, "u={u}: {closed} vs {direct}");
        }
    }

    #[test]
    fn median_of_even_count() {
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }
}
