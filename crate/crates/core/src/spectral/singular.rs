//! Direct quadrature of the one-dimensional fractional Laplacian
//! `c_{1,s} p.v. int (f(x) - f(y)) / |x - y|^{1+s} dy`, independent of the FFT engine.
//!
//! Each far cell `[x + mh, x + (m+1)h]` integrates the cubic interpolant through the
//! samples at offsets `m-1..m+2` against the exact kernel. The two cells touching `x`
//! use a second-order Taylor expansion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{SampledField, Samples};
use crate::quadrature::gauss_legendre;

/// How the field is continued beyond the sampled window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailModel {
    /// Periodic continuation, matching the box the FFT engine works on.
    #[default]
    Periodic,
    /// Zero outside the window; the kernel mass beyond it is integrated in closed form.
    ZeroExtension,
}

const PERIODS: usize = 32;
const FINE_CELLS: usize = 64;

/// `2^s Gamma((1+s)/2) / (sqrt(pi) |Gamma(-s/2)|)`.
pub fn normalization(s: f64) -> f64 {
    2.0_f64.powf(s) * gamma((1.0 + s) / 2.0)
        / (std::f64::consts::PI.sqrt() * gamma(-s / 2.0).abs())
}

/// Lagrange basis on nodes -1, 0, 1, 2.
fn cubic_basis(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// One-sided kernel weights in units of `h^{-s}`: `weights[d]` multiplies the sample at offset `d`.
fn one_sided_weights(s: f64, cells: usize) -> Vec<f64> {
    let fine = gauss_legendre(16);
    let coarse = gauss_legendre(4);
    let mut weights = vec![0.0; cells + 3];
    for m in 1..=cells {
        let rule = if m < FINE_CELLS { &fine } else { &coarse };
        let mut acc = [0.0; 4];
        for (x, w) in rule.0.iter().zip(&rule.1) {
            let t = 0.5 * (x + 1.0);
            let kernel = 0.5 * w * (m as f64 + t).powf(-1.0 - s);
            for (a, b) in acc.iter_mut().zip(cubic_basis(t)) {
                *a += kernel * b;
            }
        }
        for (k, a) in acc.iter().enumerate() {
            weights[m + k - 1] += a;
        }
    }
    weights
}

pub fn singular_integral_frac_lap(
    f: &SampledField,
    s: f64,
    tail: TailModel,
) -> Result<SampledField> {
    let grid = *f.grid();
    if grid.dim() != 1 {
        return Err(Error::InvalidParameter("singular-integral oracle is one-dimensional".into()));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("oracle order s = {s} outside (0, 1)")));
    }
    let n = grid.points();
    let h = grid.spacing();
    let v = f.values();
    let hs = h.powf(-s);
    let c = normalization(s);
    let taylor = h.powf(2.0 - s) / (2.0 - s);
    let self_term = 2.0 / s;

    let out: Vec<f64> = match tail {
        TailModel::Periodic => {
            let cells = PERIODS * n;
            let weights = one_sided_weights(s, cells);
            let mut folded = vec![0.0; n];
            for (d, w) in weights.iter().enumerate() {
                folded[d % n] += w;
                folded[(n - d % n) % n] += w;
            }
            let mean = f.mean();
            let far = 2.0 * ((cells + 1) as f64).powf(-s) / s;
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut conv = 0.0;
                    for (r, w) in folded.iter().enumerate() {
                        conv += w * v[(i + r) % n];
                    }
                    let second = (v[(i + 1) % n] - 2.0 * v[i] + v[(i + n - 1) % n]) / (h * h);
                    c * (hs * (v[i] * self_term - conv - mean * far) - second * taylor)
                })
                .collect()
        }
        TailModel::ZeroExtension => {
            let weights = one_sided_weights(s, n);
            let at = |k: isize| if (0..n as isize).contains(&k) { v[k as usize] } else { 0.0 };
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let i = i as isize;
                    let mut conv = 0.0;
                    for (d, w) in weights.iter().enumerate() {
                        let d = d as isize;
                        conv += w * (at(i + d) + at(i - d));
                    }
                    let second = (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (h * h);
                    c * (hs * (at(i) * self_term - conv) - second * taylor)
                })
                .collect()
        }
    };
    SampledField::from_values(grid, out)
}
