//! Closed-form test functions, resampled exactly at every resolution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Bc, GridSpec, HalfField};
use crate::halfspace_ops::Operator;
use crate::spectral::bank::eta_exact;

/// Cutoff equal to 1 on `[0, 1/2]` and 0 on `[1, inf)`, built from the bank's smooth step.
pub fn cutoff(x: f64) -> f64 {
    eta_exact(2.0 * x)
}

/// `exp(1 - 1/(1 - u^2))` on `|u| < 1`, peak value 1.
pub fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// Profile along the normal coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum Profile {
    Zero,
    Sine { k: f64 },
    Cosine { k: f64 },
    SineSeries { modes: Vec<[f64; 2]> },
    CosineSeries { modes: Vec<[f64; 2]> },
    InteriorBump { center: f64, width: f64, amplitude: f64 },
    /// `x phi(x/scale) (1 + wobble * bump((x - c)/w))`: vanishes linearly at the wall.
    BoundaryRamp { scale: f64, wobble: f64, wobble_center: f64, wobble_width: f64 },
    /// `phi(x/scale) (1 + wobble * bump((x - c)/w))`: flat at the wall.
    BoundaryPlateau { scale: f64, wobble: f64, wobble_center: f64, wobble_width: f64 },
    /// `x phi(x)`.
    Counterexample,
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Sine { k } => (k * x).sin(),
            Profile::Cosine { k } => (k * x).cos(),
            Profile::SineSeries { modes } => modes.iter().map(|[k, a]| a * (k * x).sin()).sum(),
            Profile::CosineSeries { modes } => modes.iter().map(|[k, a]| a * (k * x).cos()).sum(),
            Profile::InteriorBump { center, width, amplitude } => {
                amplitude * bump((x - center) / width)
            }
            Profile::BoundaryRamp { scale, wobble, wobble_center, wobble_width } => {
                x * cutoff(x / scale) * (1.0 + wobble * bump((x - wobble_center) / wobble_width))
            }
            Profile::BoundaryPlateau { scale, wobble, wobble_center, wobble_width } => {
                cutoff(x / scale) * (1.0 + wobble * bump((x - wobble_center) / wobble_width))
            }
            Profile::Counterexample => x * cutoff(x),
        }
    }
}

/// A half-space test function: normal profile times a tangential cutoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Member {
    #[serde(flatten)]
    pub profile: Profile,
    pub tangential_scale: f64,
}

impl Member {
    pub fn new(profile: Profile) -> Self {
        Self { profile, tangential_scale: 1.0 }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let (normal, tangential) = x.split_last().expect("dimension >= 1");
        let t: f64 = tangential.iter().map(|&y| cutoff(y.abs() / self.tangential_scale)).product();
        t * self.profile.eval(*normal)
    }

    pub fn sample(&self, grid: GridSpec, bc: Bc) -> Result<HalfField> {
        HalfField::sample(grid, bc, |x| self.eval(x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Eigen,
    BandLimited,
    InteriorBumps,
    BoundaryAdversarial,
    Mixed,
    Counterexample,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 6] = [
        FamilyKind::Eigen,
        FamilyKind::BandLimited,
        FamilyKind::InteriorBumps,
        FamilyKind::BoundaryAdversarial,
        FamilyKind::Mixed,
        FamilyKind::Counterexample,
    ];
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigen" => Ok(FamilyKind::Eigen),
            "band-limited" => Ok(FamilyKind::BandLimited),
            "interior-bumps" => Ok(FamilyKind::InteriorBumps),
            "boundary-adversarial" => Ok(FamilyKind::BoundaryAdversarial),
            "mixed" => Ok(FamilyKind::Mixed),
            "counterexample" => Ok(FamilyKind::Counterexample),
            other => Err(Error::Config(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub seed: u64,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    /// `count` members compatible with `op`, supported in `[0, L/2]` unless periodic modes.
    pub fn members(&self, op: Operator, half_width: f64, count: usize) -> Vec<Member> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let reach = half_width / 2.0;
        let step = std::f64::consts::PI / half_width;
        (0..count)
            .map(|_| {
                let kind = match self.kind {
                    FamilyKind::Mixed if rng.gen_bool(0.5) => FamilyKind::InteriorBumps,
                    FamilyKind::Mixed => FamilyKind::BoundaryAdversarial,
                    k => k,
                };
                let profile = match kind {
                    FamilyKind::Eigen => {
                        let k = step * rng.gen_range(1..=8) as f64;
                        match op {
                            Operator::Dirichlet => Profile::Sine { k },
                            Operator::Neumann => Profile::Cosine { k },
                        }
                    }
                    FamilyKind::BandLimited => {
                        let terms = rng.gen_range(1..=4);
                        let modes = (0..terms)
                            .map(|_| [step * rng.gen_range(1..=16) as f64, rng.gen_range(-1.0..1.0)])
                            .collect();
                        match op {
                            Operator::Dirichlet => Profile::SineSeries { modes },
                            Operator::Neumann => Profile::CosineSeries { modes },
                        }
                    }
                    FamilyKind::InteriorBumps => {
                        let width = reach * rng.gen_range(0.1..0.25);
                        let center = reach * rng.gen_range(0.3..0.7);
                        let amplitude =
                            rng.gen_range(0.5..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                        Profile::InteriorBump { center, width, amplitude }
                    }
                    FamilyKind::BoundaryAdversarial => {
                        let scale = reach * rng.gen_range(0.5..1.0);
                        let wobble = rng.gen_range(-0.5..0.5);
                        let wobble_center = scale * rng.gen_range(0.3..0.6);
                        let wobble_width = scale * rng.gen_range(0.05..0.15);
                        match op {
                            Operator::Dirichlet => Profile::BoundaryRamp {
                                scale,
                                wobble,
                                wobble_center,
                                wobble_width,
                            },
                            Operator::Neumann => Profile::BoundaryPlateau {
                                scale,
                                wobble,
                                wobble_center,
                                wobble_width,
                            },
                        }
                    }
                    FamilyKind::Counterexample | FamilyKind::Mixed => Profile::Counterexample,
                };
                let tangential_scale = match self.kind {
                    FamilyKind::Counterexample => 1.0,
                    _ => reach * rng.gen_range(0.5..1.0),
                };
                Member { profile, tangential_scale }
            })
            .collect()
    }
}
