//! Operators of the Dirichlet and Neumann Laplacians on the half-space, realized by
//! parity extension, a full-space multiplier, and restriction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{extend, extend_unchecked, restrict, Parity};
use crate::grid::{Bc, HalfField, Samples};
use crate::spectral::{self, Multiplier, Spectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Dirichlet,
    Neumann,
}

impl Operator {
    pub fn parity(self) -> Parity {
        match self {
            Operator::Dirichlet => Parity::Odd,
            Operator::Neumann => Parity::Even,
        }
    }

    pub fn bc(self) -> Bc {
        self.parity().bc()
    }

    pub fn label(self) -> &'static str {
        match self {
            Operator::Dirichlet => "A_D",
            Operator::Neumann => "A_N",
        }
    }
}

impl std::str::FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "d" | "a_d" => Ok(Operator::Dirichlet),
            "neumann" | "n" | "a_n" => Ok(Operator::Neumann),
            other => Err(Error::Config(format!("unknown operator `{other}`"))),
        }
    }
}

/// Apply a full-space multiplier to the parity extension of `hf` and restrict, tagging `bc`.
pub fn through_extension(
    hf: &HalfField,
    op: Operator,
    m: &Multiplier,
    bc: Bc,
) -> Result<HalfField> {
    let ext = extend(hf, op.parity())?;
    restrict(&spectral::apply_multiplier(&ext, m)?, bc)
}

/// `A^{s/2}` for the chosen operator; negative `s` needs a zero-mean extension.
pub fn frac_power(hf: &HalfField, op: Operator, s: f64) -> Result<HalfField> {
    let ext = extend(hf, op.parity())?;
    restrict(&spectral::fractional_laplacian(&ext, s)?, op.bc())
}

/// `exp(-t A^{s/2})` for `0 < s <= 2`.
pub fn semigroup(hf: &HalfField, op: Operator, t: f64, s: f64) -> Result<HalfField> {
    if !(s > 0.0 && s <= 2.0) {
        return Err(Error::InvalidParameter(format!("semigroup order s = {s} outside (0, 2]")));
    }
    let ext = extend(hf, op.parity())?;
    restrict(&spectral::semigroup_symbol(&ext, t, s)?, op.bc())
}

/// `d/dx_n`; swaps the Dirichlet and Neumann tags.
pub fn normal_derivative(hf: &HalfField) -> Result<HalfField> {
    let parity = match hf.bc() {
        Bc::Dirichlet => Parity::Odd,
        Bc::Neumann => Parity::Even,
        Bc::None => {
            return Err(Error::InvalidParameter(
                "normal derivative needs a Dirichlet or Neumann tag".into(),
            ))
        }
    };
    let ext = extend_unchecked(hf, parity);
    let axis = hf.grid().dim() - 1;
    restrict(&spectral::derivative(&ext, axis)?, hf.bc().swapped())
}

/// `d/dx_axis` along a tangential axis; the tag is kept. The normal axis is routed to
/// [`normal_derivative`].
pub fn tangential_derivative(hf: &HalfField, axis: usize) -> Result<HalfField> {
    let dim = hf.grid().dim();
    if axis + 1 == dim {
        return normal_derivative(hf);
    }
    if axis >= dim {
        return Err(Error::InvalidParameter(format!("axis {axis} outside dimension {dim}")));
    }
    let parity = if hf.bc() == Bc::Neumann { Parity::Even } else { Parity::Odd };
    let ext = extend_unchecked(hf, parity);
    restrict(&spectral::derivative(&ext, axis)?, hf.bc())
}

/// Parity extension shared by several multipliers.
pub fn extension_spectrum(hf: &HalfField, op: Operator) -> Result<Spectrum> {
    Ok(Spectrum::of(&extend(hf, op.parity())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::new(1, PI, 256, true).unwrap()
    }

    fn max_diff(a: &HalfField, b: &HalfField) -> f64 {
        a.values().iter().zip(b.values()).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn eigenmodes() {
        let g = grid();
        for k in [1.0, 6.0, 31.0] {
            let sin = HalfField::sample(g, Bc::Dirichlet, |x| (k * x[0]).sin()).unwrap();
            let cos = HalfField::sample(g, Bc::Neumann, |x| (k * x[0]).cos()).unwrap();
            for s in [0.5, 1.0, 2.5] {
                let a = frac_power(&sin, Operator::Dirichlet, s).unwrap();
                assert!(max_diff(&a, &sin.scale(k.powf(s))) < 1e-13 * k.powf(s));
                let b = frac_power(&cos, Operator::Neumann, s).unwrap();
                assert!(max_diff(&b, &cos.scale(k.powf(s))) < 1e-13 * k.powf(s));
                assert_eq!(b.bc(), Bc::Neumann);
            }
        }
    }

    #[test]
    fn tag_mismatch() {
        let g = grid();
        let sin = HalfField::sample(g, Bc::Dirichlet, |x| x[0].sin()).unwrap();
        assert!(matches!(
            frac_power(&sin, Operator::Neumann, 1.0),
            Err(Error::TagMismatch { .. })
        ));
    }

    #[test]
    fn semigroup_on_modes_and_mass() {
        let g = grid();
        let sin = HalfField::sample(g, Bc::Dirichlet, |x| (3.0 * x[0]).sin()).unwrap();
        let out = semigroup(&sin, Operator::Dirichlet, 0.1, 1.0).unwrap();
        assert!(max_diff(&out, &sin.scale((-0.3_f64).exp())) < 1e-13);

        let g = GridSpec::new(1, 8.0, 512, true).unwrap();
        let bump = HalfField::sample(g, Bc::None, |x| (-(x[0] - 1.0).powi(2) * 8.0).exp()).unwrap();
        let mass = |f: &HalfField| f.values().iter().sum::<f64>() * g.spacing();
        let d = semigroup(&bump, Operator::Dirichlet, 0.2, 2.0).unwrap();
        assert!(mass(&d) < mass(&bump));
        let n = semigroup(&bump, Operator::Neumann, 0.2, 2.0).unwrap();
        assert!((mass(&n) - mass(&bump)).abs() < 1e-10);
        assert!(semigroup(&bump, Operator::Neumann, 0.2, 2.5).is_err());
    }

    #[test]
    fn normal_derivative_swaps_tags() {
        let g = grid();
        let k = 5.0;
        let sin = HalfField::sample(g, Bc::Dirichlet, |x| (k * x[0]).sin()).unwrap();
        let d = normal_derivative(&sin).unwrap();
        assert_eq!(d.bc(), Bc::Neumann);
        let want = HalfField::sample(g, Bc::Neumann, |x| k * (k * x[0]).cos()).unwrap();
        assert!(max_diff(&d, &want) < 1e-11);
        let dd = normal_derivative(&d).unwrap();
        assert_eq!(dd.bc(), Bc::Dirichlet);
        assert!(max_diff(&dd, &sin.scale(-k * k)) < 1e-10);
        assert!(normal_derivative(&sin.clone().retagged(Bc::None)).is_err());
    }

    #[test]
    fn tangential_derivative_keeps_tag() {
        let g = GridSpec::new(2, PI, 64, true).unwrap();
        let w = |t: f64| (-(t - 1.0).powi(2) * 6.0).exp() - (-(t + 1.0).powi(2) * 6.0).exp();
        let f = HalfField::sample(g, Bc::Dirichlet, |x| (3.0 * x[0]).sin() * w(x[1])).unwrap();
        let d = tangential_derivative(&f, 0).unwrap();
        assert_eq!(d.bc(), Bc::Dirichlet);
        let want =
            HalfField::sample(g, Bc::Dirichlet, |x| 3.0 * (3.0 * x[0]).cos() * w(x[1])).unwrap();
        assert!(max_diff(&d, &want) < 1e-9);
        let zero = HalfField::zeros(g, Bc::Dirichlet).unwrap();
        assert_eq!(tangential_derivative(&zero, 0).unwrap().max_abs(), 0.0);
        assert_eq!(tangential_derivative(&f, 1).unwrap().bc(), Bc::Neumann);
    }
}
