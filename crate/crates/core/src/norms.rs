//! Sobolev and Besov norms attached to `A_D` and `A_N`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{extend, restrict};
use crate::grid::{check_exponent, lp_norm_values, Bc, HalfField, SampledField, Samples};
use crate::halfspace_ops::{extension_spectrum, frac_power, through_extension, Operator};
use crate::spectral::{DyadicBank, Multiplier, Spectrum};

/// Energy share allowed in the upper half of the frequency box.
pub const LEAK_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpaceKind {
    Sobolev,
    Besov { q: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    #[serde(flatten)]
    pub kind: SpaceKind,
    pub homogeneous: bool,
    pub s: f64,
    pub p: f64,
    pub op: Operator,
}

impl SpaceSpec {
    pub fn sobolev(op: Operator, s: f64, p: f64) -> Self {
        Self { kind: SpaceKind::Sobolev, homogeneous: true, s, p, op }
    }

    pub fn besov(op: Operator, s: f64, p: f64, q: f64) -> Self {
        Self { kind: SpaceKind::Besov { q }, homogeneous: true, s, p, op }
    }

    pub fn inhomogeneous(mut self) -> Self {
        self.homogeneous = false;
        self
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = s;
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn q(&self) -> Option<f64> {
        match self.kind {
            SpaceKind::Besov { q } => Some(q),
            SpaceKind::Sobolev => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.p, "p")?;
        if let SpaceKind::Besov { q } = self.kind {
            check_exponent(q, "q")?;
        }
        if !self.s.is_finite() {
            return Err(Error::InvalidParameter(format!("regularity s = {}", self.s)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockTerm {
    pub j: i32,
    /// `2^{sj} ||phi_j(sqrt A) f||_p`
    pub weighted: f64,
}

/// Structured norm output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub spec: SpaceSpec,
    pub value: f64,
    pub profile: Vec<BlockTerm>,
    pub low_pass: Option<f64>,
    pub leak: f64,
    pub zero_mode_fraction: f64,
}

/// Share of spectral energy with some component above half the Nyquist frequency.
pub fn leak_fraction(spectrum: &Spectrum) -> f64 {
    let cut = spectrum.grid().nyquist() / 2.0;
    spectrum.energy_fraction(|f| f.max_component() > cut)
}

fn zero_mode_fraction(spectrum: &Spectrum) -> f64 {
    spectrum.energy_fraction(|f| f.is_zero())
}

fn check_leak(leak: f64) -> Result<()> {
    if leak > LEAK_TOLERANCE {
        Err(Error::SpectralLeak { fraction: leak, tolerance: LEAK_TOLERANCE })
    } else {
        Ok(())
    }
}

pub(crate) fn lq_sum(terms: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        let terms: Vec<f64> = terms.collect();
        let m = terms.iter().fold(0.0_f64, |a, &b| a.max(b));
        if m == 0.0 {
            return 0.0;
        }
        m * terms.iter().map(|t| (t / m).powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

fn warn_sobolev_range(spec: &SpaceSpec) {
    if !(spec.p > 1.0 && spec.p.is_finite()) {
        log::warn!("Sobolev norm with p = {} outside (1, inf): estimates assume 1 < p < inf", spec.p);
    }
}

/// Homogeneous `||A^{s/2} f||_p` or inhomogeneous `||(1 + A)^{s/2} f||_p` on the half-space.
pub fn sobolev_norm(hf: &HalfField, spec: &SpaceSpec) -> Result<f64> {
    spec.validate()?;
    if spec.kind != SpaceKind::Sobolev {
        return Err(Error::InvalidParameter("sobolev_norm needs a Sobolev spec".into()));
    }
    warn_sobolev_range(spec);
    let out = if spec.homogeneous {
        frac_power(hf, spec.op, spec.s)?
    } else {
        through_extension(hf, spec.op, &Multiplier::bessel(spec.s), spec.op.bc())?
    };
    Ok(lp_norm_values(out.values(), hf.grid().cell_volume(), spec.p))
}

/// Sobolev norm with the spectral diagnostics of the extension; leakage is reported, not enforced.
pub fn sobolev_record(hf: &HalfField, spec: &SpaceSpec) -> Result<NormRecord> {
    let value = sobolev_norm(hf, spec)?;
    let spectrum = extension_spectrum(hf, spec.op)?;
    Ok(NormRecord {
        spec: *spec,
        value,
        profile: Vec::new(),
        low_pass: None,
        leak: leak_fraction(&spectrum),
        zero_mode_fraction: zero_mode_fraction(&spectrum),
    })
}

/// Sobolev norm of a full-space field.
pub fn sobolev_norm_full(f: &SampledField, s: f64, p: f64) -> Result<f64> {
    let out = crate::spectral::fractional_laplacian(f, s)?;
    Ok(lp_norm_values(out.values(), f.grid().cell_volume(), p))
}

pub fn besov_norm(hf: &HalfField, spec: &SpaceSpec, bank: &DyadicBank) -> Result<f64> {
    Ok(besov_record(hf, spec, bank)?.value)
}

/// Besov norm together with its block profile and leak diagnostics.
pub fn besov_record(hf: &HalfField, spec: &SpaceSpec, bank: &DyadicBank) -> Result<NormRecord> {
    let spectrum = Spectrum::of(&extend(hf, spec.op.parity())?);
    besov_from_spectrum(&spectrum, spec, bank, Some(spec.op.bc()))
}

/// Besov norm of a full-space field on the whole box.
pub fn besov_record_full(f: &SampledField, spec: &SpaceSpec, bank: &DyadicBank) -> Result<NormRecord> {
    besov_from_spectrum(&Spectrum::of(f), spec, bank, None)
}

fn besov_from_spectrum(
    spectrum: &Spectrum,
    spec: &SpaceSpec,
    bank: &DyadicBank,
    half: Option<Bc>,
) -> Result<NormRecord> {
    spec.validate()?;
    let q = spec.q().ok_or_else(|| Error::InvalidParameter("besov needs a Besov spec".into()))?;
    let leak = leak_fraction(spectrum);
    check_leak(leak)?;
    let grid = *spectrum.grid();
    let norm_of = |m: &Multiplier| -> Result<f64> {
        let full = spectrum.apply(m)?;
        Ok(match half {
            Some(bc) => {
                let r = restrict(&full, bc)?;
                lp_norm_values(r.values(), grid.cell_volume(), spec.p)
            }
            None => lp_norm_values(full.values(), grid.cell_volume(), spec.p),
        })
    };
    let j_lo = if spec.homogeneous { bank.j_min() } else { bank.j_min().max(1) };
    let profile = (j_lo..=bank.j_max())
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|j| {
            Ok(BlockTerm { j, weighted: 2.0_f64.powf(spec.s * j as f64) * norm_of(&bank.block(j))? })
        })
        .collect::<Result<Vec<_>>>()?;
    let sum = lq_sum(profile.iter().map(|t| t.weighted), q);
    let low_pass = if spec.homogeneous { None } else { Some(norm_of(&bank.low_pass())?) };
    Ok(NormRecord {
        spec: *spec,
        value: sum + low_pass.unwrap_or(0.0),
        profile,
        low_pass,
        leak,
        zero_mode_fraction: zero_mode_fraction(spectrum),
    })
}

/// Log-uniform grid for the semigroup characterization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
}

impl TimeGrid {
    pub fn for_bank(bank: &DyadicBank) -> Self {
        Self {
            t_min: 2.0_f64.powi(-2 * bank.j_max()),
            t_max: 2.0_f64.powi(-2 * bank.j_min()),
            per_decade: 16,
        }
    }

    /// Nodes and trapezoid weights for `int g(t) dt / t`.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        let decades = (self.t_max / self.t_min).log10();
        let count = ((decades * self.per_decade as f64).ceil() as usize).max(1) + 1;
        let step = (b - a) / (count - 1) as f64;
        (0..count)
            .map(|i| {
                let w = if i == 0 || i + 1 == count { step / 2.0 } else { step };
                ((a + step * i as f64).exp(), w)
            })
            .collect()
    }
}

/// `( int t^{-s/2} ||(tA)^M e^{-tA} f||_p )^q dt/t )^{1/q}` over the time grid; the
/// inhomogeneous variant adds `||psi(sqrt A) f||_p` and truncates at `t = 1`.
pub fn besov_norm_semigroup(
    hf: &HalfField,
    spec: &SpaceSpec,
    bank: &DyadicBank,
    m: Option<u32>,
    t_grid: Option<TimeGrid>,
) -> Result<f64> {
    spec.validate()?;
    let q = spec.q().ok_or_else(|| Error::InvalidParameter("besov needs a Besov spec".into()))?;
    let m = m.unwrap_or((spec.s / 2.0).ceil().max(0.0) as u32 + 1);
    if (m as f64) <= spec.s / 2.0 {
        return Err(Error::InvalidParameter(format!("M = {m} must exceed s/2 = {}", spec.s / 2.0)));
    }
    let mut grid_t = t_grid.unwrap_or_else(|| TimeGrid::for_bank(bank));
    if !spec.homogeneous {
        grid_t.t_max = grid_t.t_max.min(1.0);
    }
    if !(grid_t.t_min > 0.0 && grid_t.t_max > grid_t.t_min) {
        return Err(Error::InvalidParameter("time grid must satisfy 0 < t_min < t_max".into()));
    }
    let spectrum = Spectrum::of(&extend(hf, spec.op.parity())?);
    let cell = hf.grid().cell_volume();
    let bc = spec.op.bc();
    let terms = grid_t
        .nodes()
        .into_par_iter()
        .map(|(t, w)| {
            let out = restrict(&spectrum.apply(&Multiplier::heat_derivative(t, m))?, bc)?;
            Ok((t.powf(-spec.s / 2.0) * lp_norm_values(out.values(), cell, spec.p), w))
        })
        .collect::<Result<Vec<_>>>()?;
    let integral = if q.is_infinite() {
        terms.iter().fold(0.0_f64, |a, (v, _)| a.max(*v))
    } else {
        terms.iter().map(|(v, w)| w * v.powf(q)).sum::<f64>().powf(1.0 / q)
    };
    let low = if spec.homogeneous {
        0.0
    } else {
        let out = restrict(&spectrum.apply(&bank.low_pass())?, bc)?;
        lp_norm_values(out.values(), cell, spec.p)
    };
    Ok(integral + low)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub half_norm: f64,
    pub full_norm: f64,
    pub ratio: Option<f64>,
    pub degenerate: bool,
}

/// Half-space Besov norm against the full-space Besov norm of the parity extension.
pub fn extension_norm_equivalence(
    hf: &HalfField,
    spec: &SpaceSpec,
    bank: &DyadicBank,
) -> Result<EquivalenceReport> {
    let half_norm = besov_norm(hf, spec, bank)?;
    let full_norm = besov_record_full(&extend(hf, spec.op.parity())?, spec, bank)?.value;
    let degenerate = full_norm == 0.0;
    Ok(EquivalenceReport {
        half_norm,
        full_norm,
        ratio: (!degenerate).then(|| half_norm / full_norm),
        degenerate,
    })
}

/// Norm on the half-space selected by `spec`; Besov specs need `bank`.
pub fn space_norm(hf: &HalfField, spec: &SpaceSpec, bank: Option<&DyadicBank>) -> Result<f64> {
    match spec.kind {
        SpaceKind::Sobolev => sobolev_norm(hf, spec),
        SpaceKind::Besov { .. } => {
            let bank = bank.ok_or_else(|| Error::InvalidParameter("Besov norm needs a bank".into()))?;
            besov_norm(hf, spec, bank)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{lp_norm, GridSpec};
    use crate::spectral::build_bank;
    use statrs::function::gamma::gamma;
    use std::f64::consts::PI;

    fn setup() -> (GridSpec, DyadicBank) {
        let g = GridSpec::new(1, PI, 256, true).unwrap();
        let b = build_bank(&g).unwrap();
        (g, b)
    }

    fn sine(g: GridSpec, k: f64) -> HalfField {
        HalfField::sample(g, Bc::Dirichlet, |x| (k * x[0]).sin()).unwrap()
    }

    #[test]
    fn sobolev_of_mode() {
        let (g, _) = setup();
        let f = sine(g, 6.0);
        let base = lp_norm(&f, 2.0).unwrap();
        let n = sobolev_norm(&f, &SpaceSpec::sobolev(Operator::Dirichlet, 1.5, 2.0)).unwrap();
        assert!((n - 6.0_f64.powf(1.5) * base).abs() < 1e-11 * n);
        let n0 = sobolev_norm(&f, &SpaceSpec::sobolev(Operator::Dirichlet, 0.0, 3.0)).unwrap();
        assert!((n0 - lp_norm(&f, 3.0).unwrap()).abs() < 1e-13);
        let inh = sobolev_norm(&f, &SpaceSpec::sobolev(Operator::Dirichlet, 2.0, 2.0).inhomogeneous())
            .unwrap();
        assert!((inh - 37.0 * base).abs() < 1e-11 * inh);
    }

    #[test]
    fn besov_of_mode() {
        let (g, bank) = setup();
        let k = 6.0;
        let f = sine(g, k);
        let (s, p, q) = (1.0, 2.0, 2.0);
        let rec = besov_record(&f, &SpaceSpec::besov(Operator::Dirichlet, s, p, q), &bank).unwrap();
        let base = lp_norm(&f, p).unwrap();
        let want = (bank.j_min()..=bank.j_max())
            .map(|j| (2.0_f64.powf(s * j as f64) * bank.phi(j, k) * base).powf(q))
            .sum::<f64>()
            .powf(1.0 / q);
        assert!((rec.value - want).abs() < 1e-12 * want);
        assert!(rec.profile.iter().filter(|t| t.weighted > 1e-12).count() <= 2);
        assert!(rec.leak < 1e-20);
    }

    #[test]
    fn besov_monotone_in_q() {
        let (g, bank) = setup();
        let f = HalfField::sample(g, Bc::Dirichlet, |x| (x[0]).sin() + 0.3 * (9.0 * x[0]).sin())
            .unwrap();
        let mut prev = f64::INFINITY;
        for q in [1.0, 2.0, 4.0, f64::INFINITY] {
            let v = besov_norm(&f, &SpaceSpec::besov(Operator::Dirichlet, 0.5, 2.0, q), &bank).unwrap();
            assert!(v <= prev * (1.0 + 1e-14));
            prev = v;
        }
    }

    #[test]
    fn leak_guard() {
        let (g, bank) = setup();
        let f = HalfField::sample(g, Bc::None, |_| 1.0).unwrap();
        let spec = SpaceSpec::besov(Operator::Dirichlet, 0.5, 2.0, 2.0);
        assert!(matches!(besov_norm(&f, &spec, &bank), Err(Error::SpectralLeak { .. })));
    }

    #[test]
    fn semigroup_closed_form() {
        let g = GridSpec::new(1, 2.0 * PI, 1024, true).unwrap();
        let bank = build_bank(&g).unwrap();
        let k = 4.0;
        let f = sine(g, k);
        let (s, p, q, m) = (1.0, 2.0, 2.0, 2u32);
        let a = m as f64 - s / 2.0;
        let want =
            k.powf(s) * lp_norm(&f, p).unwrap() * (gamma(a * q) / q.powf(a * q)).powf(1.0 / q);
        let spec = SpaceSpec::besov(Operator::Dirichlet, s, p, q);
        let got = besov_norm_semigroup(&f, &spec, &bank, Some(m), None).unwrap();
        assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
        assert!(besov_norm_semigroup(&f, &spec, &bank, Some(0), None).is_err());
        let zero = HalfField::zeros(g, Bc::Dirichlet).unwrap();
        assert_eq!(besov_norm_semigroup(&zero, &spec, &bank, None, None).unwrap(), 0.0);
    }

    #[test]
    fn equivalence_on_mode() {
        let (g, bank) = setup();
        let f = sine(g, 5.0);
        for p in [1.0, 2.0, 4.0] {
            let r = extension_norm_equivalence(&f, &SpaceSpec::besov(Operator::Dirichlet, 1.0, p, 2.0), &bank)
                .unwrap();
            assert!((r.ratio.unwrap() - 2.0_f64.powf(-1.0 / p)).abs() < 1e-12);
        }
        let zero = HalfField::zeros(g, Bc::Dirichlet).unwrap();
        let r = extension_norm_equivalence(&zero, &SpaceSpec::besov(Operator::Dirichlet, 1.0, 2.0, 2.0), &bank)
            .unwrap();
        assert!(r.degenerate && r.ratio.is_none());
    }
}
