//! Ratio reports and the bounded / diverging verdict.

use serde::{Deserialize, Serialize};

use crate::fit::{line_fit, LineFit};
use crate::grid::GridSpec;
use crate::spectral::bank::BankInfo;

/// Slope must exceed this many standard errors to count as growth.
pub const SIGNIFICANCE: f64 = 3.0;
/// Consecutive increments of `R^p` must shrink no faster than this factor per doubling.
pub const PERSISTENCE: f64 = 0.9;
/// Largest relative spread of per-resolution maxima still called bounded.
pub const BOUNDED_SPREAD: f64 = 0.10;
/// Relative growth below this is treated as roundoff, never as divergence.
pub const GROWTH_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Diverging,
    Inconclusive,
}

/// One evaluated ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioValue {
    pub left: f64,
    pub right: f64,
    pub ratio: Option<f64>,
    pub degenerate: bool,
}

impl RatioValue {
    pub fn new(left: f64, right: f64) -> Self {
        let degenerate = !(right > 0.0 && right.is_finite() && left.is_finite());
        Self { left, right, ratio: (!degenerate).then(|| left / right), degenerate }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub member: usize,
    pub points: usize,
    #[serde(flatten)]
    pub value: RatioValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionSummary {
    pub points: usize,
    pub max_ratio: Option<f64>,
    pub argmax_member: Option<usize>,
    pub min_ratio: Option<f64>,
    pub evaluated: usize,
    pub degenerate: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// `log R` against `log log N`.
    pub loglog: Option<LineFit>,
    /// `log R` against `log N`.
    pub log: Option<LineFit>,
    pub monotone_increasing: bool,
    pub non_increasing: bool,
    /// Geometric-mean ratio of consecutive increments of `R^p`.
    pub persistence: Option<f64>,
    pub relative_spread: Option<f64>,
}

fn significant(fit: &Option<LineFit>) -> bool {
    fit.is_some_and(|f| f.slope > 0.0 && f.slope > SIGNIFICANCE * f.slope_se)
}

/// Classify per-resolution maxima `ratios` observed at `points`; `p` sets the power used
/// for the increment test (`R` itself when infinite).
pub fn classify(points: &[usize], ratios: &[f64], p: f64) -> (GrowthFit, Verdict) {
    let lnn: Vec<f64> = points.iter().map(|&n| (n as f64).ln()).collect();
    let lnlnn: Vec<f64> = lnn.iter().map(|v| v.ln()).collect();
    let lnr: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let loglog = line_fit(&lnlnn, &lnr);
    let log = line_fit(&lnn, &lnr);
    let monotone_increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let non_increasing = ratios.windows(2).all(|w| w[1] <= w[0]);
    let power = if p.is_finite() { p } else { 1.0 };
    let raised: Vec<f64> = ratios.iter().map(|r| r.powf(power)).collect();
    let increments: Vec<f64> = raised.windows(2).map(|w| w[1] - w[0]).collect();
    let persistence = if increments.len() >= 2 && increments.iter().all(|&d| d > 0.0) {
        let first = increments[0];
        let last = *increments.last().expect("non-empty");
        Some((last / first).powf(1.0 / (increments.len() - 1) as f64))
    } else {
        None
    };
    let relative_spread = if ratios.is_empty() {
        None
    } else {
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        Some((hi - lo) / lo)
    };
    let fit = GrowthFit { loglog, log, monotone_increasing, non_increasing, persistence, relative_spread };
    let grows = significant(&fit.loglog) || (fit.loglog.is_none() && significant(&fit.log));
    let diverging = ratios.len() >= 3
        && monotone_increasing
        && relative_spread.is_some_and(|s| s > GROWTH_FLOOR)
        && grows
        && persistence.is_some_and(|r| r >= PERSISTENCE);
    let verdict = if diverging {
        Verdict::Diverging
    } else if ratios.len() >= 2
        && (relative_spread.is_some_and(|s| s <= BOUNDED_SPREAD) || non_increasing)
    {
        Verdict::Bounded
    } else {
        Verdict::Inconclusive
    };
    (fit, verdict)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionContext {
    pub grid: GridSpec,
    pub bank: BankInfo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub experiment: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub resolutions: Vec<ResolutionContext>,
    pub members: serde_json::Value,
    pub entries: Vec<RatioEntry>,
    pub summary: Vec<ResolutionSummary>,
    pub fit: GrowthFit,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl RatioReport {
    /// Assemble the summary and verdict from raw entries (sorted by resolution, then member).
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        experiment: &str,
        seed: u64,
        config: serde_json::Value,
        resolutions: Vec<ResolutionContext>,
        members: serde_json::Value,
        mut entries: Vec<RatioEntry>,
        p: f64,
    ) -> Self {
        entries.sort_by_key(|e| (e.points, e.member));
        let mut notes = Vec::new();
        let summary: Vec<ResolutionSummary> = resolutions
            .iter()
            .map(|ctx| {
                let n = ctx.grid.points();
                let at: Vec<&RatioEntry> = entries.iter().filter(|e| e.points == n).collect();
                let good: Vec<(usize, f64)> =
                    at.iter().filter_map(|e| e.value.ratio.map(|r| (e.member, r))).collect();
                let degenerate = at.len() - good.len();
                for e in at.iter().filter(|e| e.value.degenerate) {
                    log::info!("member {} at N = {n} degenerate, excluded", e.member);
                    notes.push(format!("member {} at N = {n} degenerate, excluded", e.member));
                }
                let best = good.iter().cloned().fold(None, |acc: Option<(usize, f64)>, (m, r)| {
                    match acc {
                        Some((_, b)) if b >= r => acc,
                        _ => Some((m, r)),
                    }
                });
                ResolutionSummary {
                    points: n,
                    max_ratio: best.map(|b| b.1),
                    argmax_member: best.map(|b| b.0),
                    min_ratio: good.iter().map(|g| g.1).fold(None, |a: Option<f64>, r| {
                        Some(a.map_or(r, |a| a.min(r)))
                    }),
                    evaluated: good.len(),
                    degenerate,
                }
            })
            .collect();
        let usable: Vec<(usize, f64)> =
            summary.iter().filter_map(|s| s.max_ratio.map(|r| (s.points, r))).collect();
        let points: Vec<usize> = usable.iter().map(|u| u.0).collect();
        let ratios: Vec<f64> = usable.iter().map(|u| u.1).collect();
        let (fit, verdict) = classify(&points, &ratios, p);
        Self {
            experiment: experiment.to_owned(),
            version: crate::VERSION.to_owned(),
            seed,
            config,
            resolutions,
            members,
            entries,
            summary,
            fit,
            verdict,
            notes,
        }
    }

    pub fn max_ratios(&self) -> Vec<f64> {
        self.summary.iter().filter_map(|s| s.max_ratio).collect()
    }

    /// Flat CSV with one row per evaluated ratio.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("points,member,left,right,ratio,degenerate\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.points,
                e.member,
                e.value.left,
                e.value.right,
                e.value.ratio.map_or(String::new(), |r| r.to_string()),
                e.value.degenerate
            ));
        }
        out
    }

    /// Two-column plot data: `N` against the per-resolution maximum.
    pub fn plot_data(&self) -> String {
        let mut out = String::from("# points max_ratio\n");
        for s in &self.summary {
            if let Some(r) = s.max_ratio {
                out.push_str(&format!("{} {}\n", s.points, r));
            }
        }
        out
    }
}

/// Serialize exponents with infinity spelled `"inf"`, since JSON has no infinity literal.
pub mod exponent {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => parse(&t).map_err(de::Error::custom),
        }
    }

    pub fn parse(t: &str) -> Result<f64, String> {
        match t.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
            other => other.parse::<f64>().map_err(|e| format!("bad exponent `{t}`: {e}")),
        }
    }
}

/// [`exponent`] applied elementwise to a fixed-size list.
pub mod exponent_list {
    use serde::ser::SerializeSeq;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer, const K: usize>(ps: &[f64; K], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(K))?;
        for p in ps {
            if p.is_infinite() {
                seq.serialize_element("inf")?;
            } else {
                seq.serialize_element(p)?;
            }
        }
        seq.end()
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const K: usize>(d: D) -> Result<[f64; K], D::Error> {
        let raw = Vec::<Raw>::deserialize(d)?;
        let values = raw
            .into_iter()
            .map(|r| match r {
                Raw::Num(v) => Ok(v),
                Raw::Text(t) => super::exponent::parse(&t).map_err(de::Error::custom),
            })
            .collect::<Result<Vec<f64>, D::Error>>()?;
        let len = values.len();
        values.try_into().map_err(|_| de::Error::custom(format!("expected {K} exponents, got {len}")))
    }
}
