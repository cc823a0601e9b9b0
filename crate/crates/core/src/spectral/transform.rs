use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::grid::GridSpec;

type Plans = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Plans> = OnceLock::new();
    let forward = direction == FftDirection::Forward;
    let mut plans = PLANS.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
    plans
        .entry((len, forward))
        .or_insert_with(|| FftPlanner::new().plan_fft(len, direction))
        .clone()
}

pub(crate) fn forward(grid: &GridSpec, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    run(grid, &mut data, FftDirection::Forward);
    data
}

/// Normalized inverse transform in place.
pub(crate) fn inverse(grid: &GridSpec, data: &mut [Complex64]) {
    run(grid, data, FftDirection::Inverse);
    let scale = 1.0 / data.len() as f64;
    for z in data.iter_mut() {
        *z *= scale;
    }
}

fn run(grid: &GridSpec, data: &mut [Complex64], direction: FftDirection) {
    let n = grid.points();
    let fft = plan(n, direction);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut line = vec![Complex64::default(); n];
    for axis in 0..grid.dim() {
        let stride = n.pow((grid.dim() - 1 - axis) as u32);
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = stride * n;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (k, z) in line.iter_mut().enumerate() {
                    *z = data[base + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, z) in line.iter().enumerate() {
                    data[base + k * stride] = *z;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_three_dimensions() {
        let g = GridSpec::new(3, 1.0, 8, true).unwrap();
        let values: Vec<f64> = (0..g.len()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let mut spec = forward(&g, &values);
        inverse(&g, &mut spec);
        for (z, v) in spec.iter().zip(&values) {
            assert!((z.re - v).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn separable_mode_lands_on_one_bin() {
        let g = GridSpec::new(2, std::f64::consts::PI, 16, false).unwrap();
        // cos(2 x0) cos(3 x1) on an unstaggered grid: four bins at (+-2, +-3)
        let values: Vec<f64> = (0..g.len())
            .map(|i| {
                let x = g.point(i);
                (2.0 * x[0]).cos() * (3.0 * x[1]).cos()
            })
            .collect();
        let spec = forward(&g, &values);
        let active = spec.iter().filter(|z| z.norm() > 1e-9).count();
        assert_eq!(active, 4);
        assert!((spec[2 * 16 + 3].norm() - 64.0).abs() < 1e-9);
    }
}
