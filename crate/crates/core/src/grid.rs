//! Uniform periodic boxes, sampled fields and midpoint L^p quadrature.
//!
//! Storage is row-major with the normal axis `x_n` (the last axis) varying fastest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

/// Boundary-condition tag carried by half-space fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Dirichlet,
    Neumann,
    None,
}

impl Bc {
    /// The tag produced by differentiating once in the normal direction.
    pub fn swapped(self) -> Bc {
        match self {
            Bc::Dirichlet => Bc::Neumann,
            Bc::Neumann => Bc::Dirichlet,
            Bc::None => Bc::None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    half_width: f64,
    points: usize,
    stagger: bool,
}

impl GridSpec {
    /// Box `[-L, L]^n` with `N` points per axis.
    pub fn new(dim: usize, half_width: f64, points: usize, stagger: bool) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} outside 1..=3")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half-width {half_width} must be positive")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis {points} must be a power of two >= 8"
            )));
        }
        if points.checked_pow(dim as u32).is_none() {
            return Err(Error::InvalidGrid("grid too large".into()));
        }
        Ok(Self { dim, half_width, points, stagger })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn stagger(&self) -> bool {
        self.stagger
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Number of samples on the full box.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of samples with `x_n > 0` on a staggered grid.
    pub fn half_len(&self) -> usize {
        self.len() / 2
    }

    /// Number of lines along the normal axis.
    pub fn tangential_len(&self) -> usize {
        self.points.pow(self.dim as u32 - 1)
    }

    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        let offset = if self.stagger && axis + 1 == self.dim { 0.5 } else { 0.0 };
        -self.half_width + (k as f64 + offset) * self.spacing()
    }

    /// Multi-index of a flat full-grid index.
    pub fn unravel(&self, mut index: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for axis in (0..self.dim).rev() {
            out[axis] = index % self.points;
            index /= self.points;
        }
        out
    }

    pub fn point(&self, index: usize) -> [f64; MAX_DIM] {
        let k = self.unravel(index);
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            x[axis] = self.coord(axis, k[axis]);
        }
        x
    }

    /// Largest representable frequency per axis, `pi N / (2L)`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.points as f64 / (2.0 * self.half_width)
    }

    /// Frequency spacing `pi / L`.
    pub fn frequency_step(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    /// Same box and stagger at a different resolution.
    pub fn with_points(&self, points: usize) -> Result<Self> {
        GridSpec::new(self.dim, self.half_width, points, self.stagger)
    }

    pub(crate) fn require_stagger(&self, what: &str) -> Result<()> {
        if self.stagger {
            Ok(())
        } else {
            Err(Error::InvalidGrid(format!("{what} requires a staggered grid")))
        }
    }
}

/// Common read access for full and half fields.
pub trait Samples {
    fn grid(&self) -> &GridSpec;
    fn values(&self) -> &[f64];
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl SampledField {
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        check_finite(&grid, &values, |i| grid.point(i))?;
        Ok(Self { grid, values })
    }

    pub(crate) fn from_values_unchecked(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { values: vec![0.0; grid.len()], grid }
    }

    /// Evaluate `expr` at every grid point.
    pub fn sample(grid: GridSpec, expr: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.point(i);
                expr(&x[..grid.dim()])
            })
            .collect::<Vec<_>>();
        check_finite(&grid, &values, |i| grid.point(i))?;
        Ok(Self { grid, values })
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values })
    }
}

impl Samples for SampledField {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Samples on the staggered half-grid `x_n > 0`, normal index `N/2..N` stored fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfField {
    grid: GridSpec,
    values: Vec<f64>,
    bc: Bc,
}

impl HalfField {
    pub fn from_values(grid: GridSpec, values: Vec<f64>, bc: Bc) -> Result<Self> {
        grid.require_stagger("a half-space field")?;
        if values.len() != grid.half_len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} half-grid samples, got {}",
                grid.half_len(),
                values.len()
            )));
        }
        check_finite(&grid, &values, |i| half_point(&grid, i))?;
        Ok(Self { grid, values, bc })
    }

    pub(crate) fn from_values_unchecked(grid: GridSpec, values: Vec<f64>, bc: Bc) -> Self {
        debug_assert_eq!(values.len(), grid.half_len());
        Self { grid, values, bc }
    }

    pub fn zeros(grid: GridSpec, bc: Bc) -> Result<Self> {
        Self::from_values(grid, vec![0.0; grid.half_len()], bc)
    }

    /// Evaluate `expr` at every half-grid point.
    pub fn sample(grid: GridSpec, bc: Bc, expr: impl Fn(&[f64]) -> f64) -> Result<Self> {
        grid.require_stagger("a half-space field")?;
        let values = (0..grid.half_len())
            .map(|i| {
                let x = half_point(&grid, i);
                expr(&x[..grid.dim()])
            })
            .collect::<Vec<_>>();
        check_finite(&grid, &values, |i| half_point(&grid, i))?;
        Ok(Self { grid, values, bc })
    }

    pub fn bc(&self) -> Bc {
        self.bc
    }

    /// Same samples under a different tag.
    pub fn retagged(mut self, bc: Bc) -> Self {
        self.bc = bc;
        self
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Coordinates of half-grid sample `i`.
    pub fn point(&self, i: usize) -> [f64; MAX_DIM] {
        half_point(&self.grid, i)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| c * v).collect(),
            bc: self.bc,
        }
    }

    /// Pointwise product, tagged `bc`.
    pub fn product(&self, other: &Self, bc: Bc) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(Self { grid: self.grid, values, bc })
    }

    pub fn zip_with(&self, other: &Self, bc: Bc, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values, bc })
    }
}

impl Samples for HalfField {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}

pub(crate) fn half_point(grid: &GridSpec, i: usize) -> [f64; MAX_DIM] {
    let half = grid.points() / 2;
    let line = i / half;
    let k = i % half + half;
    grid.point(line * grid.points() + k)
}

fn check_finite(
    grid: &GridSpec,
    values: &[f64],
    point: impl Fn(usize) -> [f64; MAX_DIM],
) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(i) => Err(Error::NonFinite {
            coordinate: point(i)[..grid.dim()].to_vec(),
            value: values[i],
        }),
    }
}

pub(crate) fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub(crate) fn check_exponent(p: f64, name: &str) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::InvalidParameter(format!("{name} = {p} must satisfy 1 <= {name} <= inf")))
    } else {
        Ok(())
    }
}

/// Midpoint-rule `L^p` norm over the samples held by `field`; `p = f64::INFINITY` gives the max.
pub fn lp_norm(field: &impl Samples, p: f64) -> Result<f64> {
    check_exponent(p, "p")?;
    Ok(lp_norm_values(field.values(), field.grid().cell_volume(), p))
}

pub(crate) fn lp_norm_values(values: &[f64], cell: f64, p: f64) -> f64 {
    let m = max_abs(values);
    if p.is_infinite() || m == 0.0 {
        return m;
    }
    if p == 2.0 {
        let s: f64 = values.iter().map(|v| (v / m) * (v / m)).sum();
        return m * (cell * s).sqrt();
    }
    let s: f64 = values.iter().map(|v| (v.abs() / m).powf(p)).sum();
    m * (cell * s).powf(1.0 / p)
}
