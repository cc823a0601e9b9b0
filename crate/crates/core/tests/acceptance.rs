//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::time::Instant;

use halfspace_spectral::experiments::report::Verdict;
use halfspace_spectral::experiments::{
    besov_block_floor, derivative_mapping_sweep, layer_growth, odd_multiplicity_contrast, ratio_sweep,
    singularity_profile, BilinearConfig, DerivativeConfig, FamilyKind, FamilySpec, Mapping,
    SingularityOptions, SweepSettings, TrilinearConfig,
};
use halfspace_spectral::selftest::{self, eigen_error, identity_corpus, identity_defect, oracle_bumps, oracle_error};
use halfspace_spectral::{build_bank, GridSpec, Operator, Result, SpaceKind};

const INF: f64 = f64::INFINITY;
const DYADIC: [usize; 4] = [4096, 8192, 16384, 32768];

type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn eigenfunctions() -> Result<Outcome> {
    let mut worst = 0.0_f64;
    for op in [Operator::Dirichlet, Operator::Neumann] {
        for s in [0.5, 1.0, 2.0, 2.5] {
            worst = worst.max(eigen_error(op, 4096, 20, s)?);
        }
    }
    outcome(worst < 1e-10, format!("max relative error {worst:.2e} (< 1e-10)"))
}

fn extension_identity() -> Result<Outcome> {
    let grid = GridSpec::new(1, 2.0, 4096, true)?;
    let mut worst = 0.0_f64;
    let corpus = identity_corpus(&grid)?;
    for h in &corpus {
        for p in [1.0, 2.0, 4.0] {
            for s in [0.5, 1.0, 2.0] {
                worst = worst.max(identity_defect(h, s, p)?);
            }
        }
    }
    outcome(worst < 1e-12, format!("{} fields, max relative defect {worst:.2e} (< 1e-12)", corpus.len()))
}

fn partition_of_unity() -> Result<Outcome> {
    let mut worst = (0.0_f64, 0.0_f64);
    for grid in [
        GridSpec::new(1, 2.0, 1024, true)?,
        GridSpec::new(1, std::f64::consts::PI, 65536, true)?,
        GridSpec::new(2, 2.0, 256, true)?,
    ] {
        let bank = build_bank(&grid)?;
        worst.0 = worst.0.max(bank.partition_residual(&grid));
        worst.1 = worst.1.max(bank.inhomogeneous_residual(&grid));
    }
    outcome(
        worst.0 < 1e-8 && worst.1 < 1e-8,
        format!("homogeneous {:.2e}, inhomogeneous {:.2e} (< 1e-8)", worst.0, worst.1),
    )
}

fn oracle() -> Result<Outcome> {
    let grid = GridSpec::new(1, 2.0, 4096, true)?;
    let mut worst = 0.0_f64;
    for f in oracle_bumps(&grid, 10, 5)? {
        for s in [0.25, 0.5, 0.75] {
            worst = worst.max(oracle_error(&f, s)?);
        }
    }
    outcome(worst < 1e-3, format!("10 bumps, max relative L2 error {worst:.2e} (< 1e-3)"))
}

fn sweep(family: FamilyKind, seed: u64, count: usize, resolutions: &[usize]) -> SweepSettings {
    SweepSettings {
        family: FamilySpec::new(family, seed),
        count,
        resolutions: resolutions.to_vec(),
        half_width: 2.0,
        dim: 1,
    }
}

fn sobolev_pair(op: Operator, s: f64, settings: SweepSettings) -> BilinearConfig {
    BilinearConfig {
        s,
        p: 2.0,
        p1: 2.0,
        p2: INF,
        p3: INF,
        p4: 2.0,
        op,
        space: SpaceKind::Sobolev,
        homogeneous: true,
        sweep: settings,
    }
}

fn spread(report: &halfspace_spectral::experiments::RatioReport) -> f64 {
    report.fit.relative_spread.unwrap_or(f64::NAN)
}

fn boundedness() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (op, ss) in [(Operator::Dirichlet, [0.5, 1.5, 2.3]), (Operator::Neumann, [0.5, 2.5, 3.5])] {
        for s in ss {
            let cfg = sobolev_pair(op, s, sweep(FamilyKind::Mixed, 7, 20, &[1024, 2048, 4096]));
            let r = ratio_sweep(&cfg)?;
            let good = r.verdict == Verdict::Bounded && spread(&r) < 0.10;
            ok &= good;
            parts.push(format!("{} s={s}: {:?} spread {:.3}", op.label(), r.verdict, spread(&r)));
        }
    }
    outcome(ok, parts.join("; "))
}

fn sharpness() -> Result<Outcome> {
    let cfg = sobolev_pair(Operator::Dirichlet, 2.5, sweep(FamilyKind::Counterexample, 0, 1, &DYADIC));
    let r = ratio_sweep(&cfg)?;
    let layer = layer_growth(2.0, &DYADIC, 2.0, 0.1)?;
    let r2 = layer.fit.map_or(0.0, |f| f.r_squared);
    outcome(
        r.verdict == Verdict::Diverging && r2 > 0.95,
        format!(
            "ratios {:?}: {:?}; layer norm^2 vs log N R^2 = {r2:.4} (> 0.95)",
            r.max_ratios().iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            r.verdict
        ),
    )
}

fn singularity() -> Result<Outcome> {
    let grid = GridSpec::new(1, 2.0, 16384, true)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [2.0, 4.0] {
        let prof = singularity_profile(p, &grid, SingularityOptions::default())?;
        let want = -1.0 / p;
        for (name, fit) in [("spectral", &prof.spectral), ("quadrature", &prof.quadrature)] {
            ok &= (fit.exponent - want).abs() <= 0.05;
            parts.push(format!("p={p} {name} {:.4}", fit.exponent));
        }
    }
    outcome(ok, format!("{} (target -1/p +- 0.05)", parts.join(", ")))
}

fn besov_endpoint() -> Result<Outcome> {
    let grid = GridSpec::new(1, 2.0, 65536, true)?;
    let bank = build_bank(&grid)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [2.0, 4.0] {
        let r = besov_block_floor(p, &grid, &bank, &[1.0, 2.0])?;
        ok &= r.plateau.passes && r.limit.passes && r.partial_sums.iter().all(|g| g.passes);
        parts.push(format!(
            "p={p}: floor {:.3}/{:.3}, partial-sum exponents {}, limit {:.4} vs block {:.4} (rel {:.1e})",
            r.plateau.min,
            r.plateau.median,
            r.partial_sums
                .iter()
                .map(|g| format!("q={} {:.3}", g.q, g.exponent.unwrap_or(f64::NAN)))
                .collect::<Vec<_>>()
                .join(" "),
            r.limit.limit_value,
            r.limit.block_sup,
            r.limit.relative_error
        ));
    }
    outcome(ok, parts.join("; "))
}

fn derivative_mapping() -> Result<Outcome> {
    let res = [1024, 2048, 4096, 8192];
    let mut ok = true;
    let mut parts = Vec::new();
    let mut cross_worst: f64 = 0.0;
    for op in [Operator::Dirichlet, Operator::Neumann] {
        for kind in FamilyKind::ALL {
            if op == Operator::Neumann && kind == FamilyKind::Counterexample {
                continue;
            }
            for s in [0.5, 1.5] {
                let cfg = DerivativeConfig {
                    s,
                    p: 2.0,
                    op,
                    mapping: Mapping::Cross,
                    sweep: sweep(kind, 3, 6, &res),
                };
                let r = derivative_mapping_sweep(&cfg)?;
                if r.verdict != Verdict::Bounded {
                    ok = false;
                    parts.push(format!("cross {} {kind:?} s={s}: {:?} {:?}", op.label(), r.verdict, r.max_ratios()));
                }
                cross_worst = cross_worst.max(spread(&r));
            }
        }
    }
    parts.push(format!("cross bounded on all families (max spread {cross_worst:.3})"));
    for (s, want) in [(0.25, Verdict::Bounded), (0.75, Verdict::Diverging)] {
        let cfg = DerivativeConfig {
            s,
            p: 2.0,
            op: Operator::Dirichlet,
            mapping: Mapping::Same,
            sweep: sweep(FamilyKind::BoundaryAdversarial, 3, 6, &res),
        };
        let r = derivative_mapping_sweep(&cfg)?;
        ok &= r.verdict == want;
        parts.push(format!("same s={s}: {:?}", r.verdict));
    }
    outcome(ok, parts.join("; "))
}

fn odd_multiplicity() -> Result<Outcome> {
    let cfg = TrilinearConfig {
        s: 2.5,
        p: 2.0,
        exponents: [2.0, INF, INF, INF, 2.0, INF, INF, INF, 2.0],
        op: Operator::Dirichlet,
        space: SpaceKind::Sobolev,
        homogeneous: true,
        sweep: sweep(FamilyKind::Counterexample, 0, 1, &DYADIC),
    };
    let c = odd_multiplicity_contrast(&cfg)?;
    outcome(
        c.trilinear.verdict == Verdict::Bounded && c.iterated_bilinear.verdict == Verdict::Diverging,
        format!("trilinear {:?}, iterated bilinear {:?}", c.trilinear.verdict, c.iterated_bilinear.verdict),
    )
}

fn determinism_and_guards() -> Result<Outcome> {
    let suite = selftest::run(selftest::Options::default())?;
    let cfg = sobolev_pair(Operator::Dirichlet, 1.5, sweep(FamilyKind::Mixed, 7, 8, &[1024, 2048]));
    let a = serde_json::to_string(&ratio_sweep(&cfg)?).expect("serializable");
    let b = serde_json::to_string(&ratio_sweep(&cfg)?).expect("serializable");
    let faulty = selftest::run(selftest::Options { phi0_gain: 1.01, quick: true, ..Default::default() })?;
    let caught = faulty.checks.iter().any(|c| c.name == "partition of unity" && !c.passed);
    outcome(
        suite.passed && a == b && caught,
        format!("selftest {}, identical reports {}, fault caught {caught}", suite.passed, a == b),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("eigenfunction exactness", eigenfunctions),
        ("extension norm identity", extension_identity),
        ("partition of unity", partition_of_unity),
        ("singular-integral oracle", oracle),
        ("boundedness below the threshold", boundedness),
        ("sharpness at s = 2 + 1/p", sharpness),
        ("wall singularity exponent", singularity),
        ("Besov endpoint block floor", besov_endpoint),
        ("derivative mapping", derivative_mapping),
        ("odd-multiplicity trilinear", odd_multiplicity),
        ("determinism and guards", determinism_and_guards),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!(
            "criterion {id:>2} {} {name}: {detail} [{:.1}s]",
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
