//! Littlewood-Paley bank built from the `exp(-1/t)` smooth step.
//!
//! `eta` is 1 on `[0, 1]` and 0 on `[2, inf)`. Blocks use `phi_0(l) = eta(l) - eta(2l)`,
//! supported in `[1/2, 2]`, and the low-pass profile is `psi = eta`. The sum over
//! consecutive blocks telescopes.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::spectral::{frequency_at, Multiplier};

pub const TABLE_INTERVALS: usize = 1 << 16;

fn edge(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = edge(t);
        a / (a + edge(1.0 - t))
    }
}

/// Analytic cutoff: 1 on `[0, 1]`, 0 on `[2, inf)`.
pub fn eta_exact(lambda: f64) -> f64 {
    1.0 - smooth_step(lambda - 1.0)
}

/// Tabulated `eta` on `[1, 2]`, evaluated with four-point cubic interpolation.
#[derive(Debug)]
pub struct EtaTable {
    values: Vec<f64>,
    digest: String,
}

impl EtaTable {
    fn build() -> Self {
        let values: Vec<f64> = (0..=TABLE_INTERVALS)
            .map(|i| eta_exact(1.0 + i as f64 / TABLE_INTERVALS as f64))
            .collect();
        let mut hasher = Sha256::new();
        for v in &values {
            hasher.update(v.to_le_bytes());
        }
        let digest = hex::encode(hasher.finalize());
        Self { values, digest }
    }

    pub fn shared() -> Arc<EtaTable> {
        static TABLE: OnceLock<Arc<EtaTable>> = OnceLock::new();
        TABLE.get_or_init(|| Arc::new(EtaTable::build())).clone()
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    fn node(&self, i: isize) -> f64 {
        if i < 0 {
            1.0
        } else if i as usize > TABLE_INTERVALS {
            0.0
        } else {
            self.values[i as usize]
        }
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        if lambda <= 1.0 {
            return 1.0;
        }
        if lambda >= 2.0 {
            return 0.0;
        }
        let u = (lambda - 1.0) * TABLE_INTERVALS as f64;
        let i = u.floor() as isize;
        let t = u - i as f64;
        let (y0, y1, y2, y3) = (self.node(i - 1), self.node(i), self.node(i + 1), self.node(i + 2));
        // Lagrange cubic through nodes -1, 0, 1, 2
        let c0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let c1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let c2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let c3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        c0 * y0 + c1 * y1 + c2 * y2 + c3 * y3
    }
}

/// Bank metadata echoed into reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankInfo {
    pub eta_sha256: String,
    pub j_min: i32,
    pub j_max: i32,
    pub phi0_gain: f64,
}

#[derive(Clone, Debug)]
pub struct DyadicBank {
    table: Arc<EtaTable>,
    j_min: i32,
    j_max: i32,
    gain: f64,
}

/// Bank whose resolved range covers every nonzero frequency of `grid`.
pub fn build_bank(grid: &GridSpec) -> Result<DyadicBank> {
    DyadicBank::for_grid(grid)
}

impl DyadicBank {
    pub fn for_grid(grid: &GridSpec) -> Result<Self> {
        let lowest = grid.frequency_step();
        let highest = grid.nyquist() * (grid.dim() as f64).sqrt();
        let j_min = lowest.log2().floor() as i32;
        let j_max = highest.log2().ceil() as i32;
        if j_max - j_min < 4 {
            return Err(Error::BandTooNarrow { j_min, j_max });
        }
        Ok(Self { table: EtaTable::shared(), j_min, j_max, gain: 1.0 })
    }

    /// Scale `phi_0` by `gain`; any value other than 1 breaks the partition of unity.
    pub fn with_phi0_gain(mut self, gain: f64) -> Self {
        self.gain = gain;
        self
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn info(&self) -> BankInfo {
        BankInfo {
            eta_sha256: self.table.digest().to_owned(),
            j_min: self.j_min,
            j_max: self.j_max,
            phi0_gain: self.gain,
        }
    }

    pub fn eta(&self, lambda: f64) -> f64 {
        self.table.eval(lambda)
    }

    pub fn phi0(&self, lambda: f64) -> f64 {
        self.gain * (self.table.eval(lambda) - self.table.eval(2.0 * lambda))
    }

    pub fn phi(&self, j: i32, lambda: f64) -> f64 {
        self.phi0(lambda * 2.0_f64.powi(-j))
    }

    pub fn psi(&self, lambda: f64) -> f64 {
        self.table.eval(lambda)
    }

    pub fn check_index(&self, j: i32) -> Result<()> {
        if (self.j_min..=self.j_max).contains(&j) {
            Ok(())
        } else {
            Err(Error::BlockOutOfRange { j, j_min: self.j_min, j_max: self.j_max })
        }
    }

    pub fn block(&self, j: i32) -> Multiplier {
        let bank = self.clone();
        Multiplier::real(format!("phi_{j}"), 0.0, move |f| bank.phi(j, f.norm()))
    }

    pub fn low_pass(&self) -> Multiplier {
        let bank = self.clone();
        Multiplier::real("psi", 1.0, move |f| bank.psi(f.norm()))
    }

    /// `max |sum_j phi_j - 1|` over nonzero grid frequencies, with `j` running two past each end.
    pub fn partition_residual(&self, grid: &GridSpec) -> f64 {
        self.grid_residual(grid, |lambda| {
            if lambda == 0.0 {
                return None;
            }
            let sum: f64 = (self.j_min - 2..=self.j_max + 2).map(|j| self.phi(j, lambda)).sum();
            Some(sum)
        })
    }

    /// `max |psi + sum_{j >= 1} phi_j - 1|` over all grid frequencies including zero.
    pub fn inhomogeneous_residual(&self, grid: &GridSpec) -> f64 {
        self.grid_residual(grid, |lambda| {
            let sum: f64 = (1..=self.j_max + 2).map(|j| self.phi(j, lambda)).sum();
            Some(self.psi(lambda) + sum)
        })
    }

    fn grid_residual(&self, grid: &GridSpec, total: impl Fn(f64) -> Option<f64>) -> f64 {
        (0..grid.len())
            .filter_map(|i| total(frequency_at(grid, i).norm()))
            .fold(0.0_f64, |m, s| m.max((s - 1.0).abs()))
    }
}
