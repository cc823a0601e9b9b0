//! Full-space Fourier multipliers on the periodic box.
//!
//! Grid frequencies are `xi = pi m / L` with signed `m` in `[-N/2, N/2)`. The Nyquist
//! index `-N/2` has no Hermitian partner, so odd symbols (derivatives, Riesz) vanish there.

pub mod bank;
pub mod singular;
mod transform;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extension::{parity_defect, Parity};
use crate::grid::{GridSpec, SampledField, Samples, MAX_DIM};

pub use bank::{build_bank, DyadicBank};
pub use singular::{singular_integral_frac_lap, TailModel};

const HERMITIAN_TOL: f64 = 1e-12;
const RESIDUE_TOL: f64 = 1e-10;
/// Relative coefficient size treated as transform roundoff.
const CHOP: f64 = 1e-14;

/// A point of the discrete frequency grid.
#[derive(Clone, Copy, Debug)]
pub struct Frequency {
    pub xi: [f64; MAX_DIM],
    pub nyquist: [bool; MAX_DIM],
    pub dim: usize,
}

impl Frequency {
    pub fn norm(&self) -> f64 {
        self.xi[..self.dim].iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.xi[..self.dim].iter().all(|&x| x == 0.0)
    }

    /// Largest component magnitude.
    pub fn max_component(&self) -> f64 {
        self.xi[..self.dim].iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

pub(crate) fn signed_index(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

pub(crate) fn frequency_at(grid: &GridSpec, index: usize) -> Frequency {
    let n = grid.points();
    let step = grid.frequency_step();
    let k = grid.unravel(index);
    let mut f = Frequency { xi: [0.0; MAX_DIM], nyquist: [false; MAX_DIM], dim: grid.dim() };
    for axis in 0..grid.dim() {
        f.xi[axis] = step * signed_index(k[axis], n) as f64;
        f.nyquist[axis] = k[axis] == n / 2;
    }
    f
}

fn mirror_index(grid: &GridSpec, index: usize) -> usize {
    let n = grid.points();
    let k = grid.unravel(index);
    (0..grid.dim()).fold(0, |acc, axis| acc * n + (n - k[axis]) % n)
}

/// Index of the frequency with the normal component negated.
fn normal_mirror(grid: &GridSpec, index: usize) -> usize {
    let n = grid.points();
    let m = index % n;
    index - m + (n - m) % n
}

type Symbol = dyn Fn(&Frequency) -> Complex64 + Send + Sync;

/// Fourier multiplier with an explicit value at `xi = 0`.
#[derive(Clone)]
pub struct Multiplier {
    name: String,
    zero_mode_value: Complex64,
    symbol: Arc<Symbol>,
}

impl fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Multiplier")
            .field("name", &self.name)
            .field("zero_mode_value", &self.zero_mode_value)
            .finish()
    }
}

impl Multiplier {
    /// `symbol` is only consulted at nonzero frequencies.
    pub fn new(
        name: impl Into<String>,
        zero_mode_value: Complex64,
        symbol: impl Fn(&Frequency) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), zero_mode_value, symbol: Arc::new(symbol) }
    }

    pub fn real(
        name: impl Into<String>,
        zero_mode_value: f64,
        symbol: impl Fn(&Frequency) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, Complex64::new(zero_mode_value, 0.0), move |f| {
            Complex64::new(symbol(f), 0.0)
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, f: &Frequency) -> Complex64 {
        if f.is_zero() {
            self.zero_mode_value
        } else {
            (self.symbol)(f)
        }
    }

    pub fn identity() -> Self {
        Self::real("identity", 1.0, |_| 1.0)
    }

    /// `|xi|^s`, zero at the origin.
    pub fn radial_power(s: f64) -> Self {
        Self::real(format!("|xi|^{s}"), 0.0, move |f| f.norm().powf(s))
    }

    /// `(1 + |xi|^2)^{s/2}`.
    pub fn bessel(s: f64) -> Self {
        Self::real(format!("(1+|xi|^2)^{}", s / 2.0), 1.0, move |f| {
            (1.0 + f.norm().powi(2)).powf(s / 2.0)
        })
    }

    /// `|xi_axis|^s`, zero wherever `xi_axis = 0`.
    pub fn directional_power(s: f64, axis: usize) -> Self {
        Self::real(format!("|xi_{axis}|^{s}"), 0.0, move |f| {
            let x = f.xi[axis].abs();
            if x == 0.0 {
                0.0
            } else {
                x.powf(s)
            }
        })
    }

    /// `i xi_axis`.
    pub fn derivative(axis: usize) -> Self {
        Self::new(format!("d/dx_{axis}"), Complex64::new(0.0, 0.0), move |f| {
            if f.nyquist[axis] {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, f.xi[axis])
            }
        })
    }

    /// `i xi_axis / |xi|`.
    pub fn riesz(axis: usize) -> Self {
        Self::new(format!("riesz_{axis}"), Complex64::new(0.0, 0.0), move |f| {
            if f.nyquist[axis] {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, f.xi[axis] / f.norm())
            }
        })
    }

    /// `exp(-t |xi|^s)`.
    pub fn stable_semigroup(t: f64, s: f64) -> Self {
        Self::real(format!("exp(-{t}|xi|^{s})"), 1.0, move |f| (-t * f.norm().powf(s)).exp())
    }

    /// `(t |xi|^2)^M exp(-t |xi|^2)`.
    pub fn heat_derivative(t: f64, m: u32) -> Self {
        Self::real(format!("(t|xi|^2)^{m} exp(-t|xi|^2), t={t}"), 0.0, move |f| {
            let u = t * f.norm().powi(2);
            u.powi(m as i32) * (-u).exp()
        })
    }

    /// Evaluate the symbol over the whole frequency grid.
    pub fn tabulate(&self, grid: &GridSpec) -> Vec<Complex64> {
        (0..grid.len()).map(|i| self.eval(&frequency_at(grid, i))).collect()
    }

    fn check_table(&self, grid: &GridSpec, table: &[Complex64]) -> Result<()> {
        let scale = table.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
        for (i, z) in table.iter().enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite {
                    coordinate: frequency_at(grid, i).xi[..grid.dim()].to_vec(),
                    value: z.norm(),
                });
            }
            let partner = table[mirror_index(grid, i)];
            if (z - partner.conj()).norm() > HERMITIAN_TOL * scale {
                return Err(Error::NonHermitian(self.name.clone()));
            }
        }
        Ok(())
    }
}

/// Forward transform of a real field, shared by several multipliers.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
    /// Exact reflection symmetry of the input across `x_n = 0`, if any.
    parity: Option<Parity>,
}

impl Spectrum {
    pub fn of(field: &SampledField) -> Self {
        let grid = *field.grid();
        let parity = if grid.stagger() {
            [Parity::Odd, Parity::Even].into_iter().find(|&p| parity_defect(field, p) == 0.0)
        } else {
            None
        };
        Self { grid, coeffs: transform::forward(&grid, field.values()), parity }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re / self.grid.len() as f64
    }

    pub fn total_energy(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Share of spectral energy at frequencies selected by `pred`.
    pub fn energy_fraction(&self, pred: impl Fn(&Frequency) -> bool) -> f64 {
        let total = self.total_energy();
        if total == 0.0 {
            return 0.0;
        }
        let part: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| pred(&frequency_at(&self.grid, *i)))
            .map(|(_, z)| z.norm_sqr())
            .sum();
        part / total
    }

    pub fn apply(&self, m: &Multiplier) -> Result<SampledField> {
        let table = m.tabulate(&self.grid);
        m.check_table(&self.grid, &table)?;
        let max_coeff = self.coeffs.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        let max_symbol = table.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        // growing symbols would amplify transform roundoff, so coefficients at that level are dropped
        let chop = if max_symbol > 1.0 { CHOP * max_coeff } else { 0.0 };
        let mut data: Vec<Complex64> = self
            .coeffs
            .iter()
            .zip(&table)
            .map(|(c, s)| if c.norm() <= chop { Complex64::new(0.0, 0.0) } else { c * s })
            .collect();
        transform::inverse(&self.grid, &mut data);
        let max_re = data.iter().fold(0.0_f64, |a, z| a.max(z.re.abs()));
        let max_im = data.iter().fold(0.0_f64, |a, z| a.max(z.im.abs()));
        let floor = 1e-13 * max_coeff * max_symbol.max(1.0) / (self.grid.len() as f64).sqrt();
        if max_im > RESIDUE_TOL * max_re && max_im > floor {
            return Err(Error::ImaginaryResidue { name: m.name.clone(), residue: max_im });
        }
        let mut values: Vec<f64> = data.into_iter().map(|z| z.re).collect();
        // a symbol even in xi_n maps an exactly odd (even) input to an odd (even) output
        if let Some(parity) = self.parity {
            if (0..table.len()).all(|i| table[i] == table[normal_mirror(&self.grid, i)]) {
                project_parity(&self.grid, &mut values, parity);
            }
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                coordinate: self.grid.point(i)[..self.grid.dim()].to_vec(),
                value: values[i],
            });
        }
        Ok(SampledField::from_values_unchecked(self.grid, values))
    }
}

fn project_parity(grid: &GridSpec, values: &mut [f64], parity: Parity) {
    let n = grid.points();
    let sign = parity.sign();
    for line in values.chunks_exact_mut(n) {
        for k in 0..n / 2 {
            let upper = (line[n - 1 - k] + sign * line[k]) / 2.0;
            line[n - 1 - k] = upper;
            line[k] = sign * upper;
        }
    }
}

pub fn apply_multiplier(f: &SampledField, m: &Multiplier) -> Result<SampledField> {
    Spectrum::of(f).apply(m)
}

fn require_zero_mean(spectrum: &Spectrum, f: &SampledField) -> Result<()> {
    let mean = spectrum.mean();
    if mean.abs() > 1e-12 * f.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NonzeroMean { mean });
    }
    Ok(())
}

/// `Lambda^s = F^{-1} |xi|^s F`; negative `s` needs a zero-mean field.
pub fn fractional_laplacian(f: &SampledField, s: f64) -> Result<SampledField> {
    let spectrum = Spectrum::of(f);
    if s < 0.0 {
        require_zero_mean(&spectrum, f)?;
    }
    spectrum.apply(&Multiplier::radial_power(s))
}

pub fn directional_multiplier(f: &SampledField, s: f64, axis: usize) -> Result<SampledField> {
    check_axis(f.grid(), axis)?;
    apply_multiplier(f, &Multiplier::directional_power(s, axis))
}

/// Riesz transform with symbol `i xi_k / |xi|`. In one dimension this maps
/// `cos(kx)` to `-sin(kx)` and `sin(kx)` to `cos(kx)` for `k > 0`.
pub fn riesz_transform(f: &SampledField, axis: usize) -> Result<SampledField> {
    check_axis(f.grid(), axis)?;
    let spectrum = Spectrum::of(f);
    require_zero_mean(&spectrum, f)?;
    spectrum.apply(&Multiplier::riesz(axis))
}

pub fn derivative(f: &SampledField, axis: usize) -> Result<SampledField> {
    check_axis(f.grid(), axis)?;
    apply_multiplier(f, &Multiplier::derivative(axis))
}

/// `exp(-t Lambda^s)`.
pub fn semigroup_symbol(f: &SampledField, t: f64, s: f64) -> Result<SampledField> {
    if !(t > 0.0 && s > 0.0) {
        return Err(Error::InvalidParameter(format!("semigroup needs t > 0, s > 0 (t={t}, s={s})")));
    }
    apply_multiplier(f, &Multiplier::stable_semigroup(t, s))
}

pub fn dyadic_block(f: &SampledField, j: i32, bank: &DyadicBank) -> Result<SampledField> {
    bank.check_index(j)?;
    apply_multiplier(f, &bank.block(j))
}

fn check_axis(grid: &GridSpec, axis: usize) -> Result<()> {
    if axis < grid.dim() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("axis {axis} outside dimension {}", grid.dim())))
    }
}
