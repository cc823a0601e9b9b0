//! `halfspace`: norms, product-estimate sweeps, the wall counterexample and the self-test.
//!
//! Exit codes: 0 success (whatever the verdict), 2 configuration error, 3 numerical guard.

mod fields;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use halfspace_spectral::experiments::report::exponent;
use halfspace_spectral::experiments::{
    besov_block_floor, derivative_mapping_sweep, layer_growth, odd_multiplicity_contrast, ratio_sweep,
    singularity_profile, trilinear_sweep, BilinearConfig, CounterexampleConfig, DerivativeConfig,
    ExperimentFile, FamilyKind, FamilySpec, Mapping, RatioReport, SingularityOptions, SweepSettings,
    TrilinearConfig,
};
use halfspace_spectral::{
    besov_record, build_bank, selftest, sobolev_record, Error, GridSpec, Operator, Result, SpaceKind,
    SpaceSpec,
};

const SEED_VAR: &str = "HALFSPACE_SPECTRAL_SEED";

#[derive(Parser)]
#[command(name = "halfspace", version, about = "Sobolev/Besov calculus on the half-space")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Norm of a single field.
    Norm(NormArgs),
    /// Bilinear product estimate under grid refinement.
    Bilinear(BilinearArgs),
    /// Trilinear product estimate under grid refinement.
    Trilinear(TrilinearArgs),
    /// Normal derivative between the Dirichlet and Neumann scales.
    Derivative(DerivativeArgs),
    /// Wall singularity, layer growth and dyadic block floor of the counterexample.
    Counterexample(CounterexampleArgs),
    /// Invariant suite with a pass/fail matrix.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    Dirichlet,
    Neumann,
}

impl From<OpArg> for Operator {
    fn from(o: OpArg) -> Self {
        match o {
            OpArg::Dirichlet => Operator::Dirichlet,
            OpArg::Neumann => Operator::Neumann,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Sobolev,
    Besov,
}

#[derive(Args)]
struct OutArgs {
    /// Write PREFIX.json, CSV and plot data next to it, plus PREFIX.timing.json.
    #[arg(long, value_name = "PREFIX")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NormArgs {
    #[arg(long, value_enum, default_value = "dirichlet")]
    op: OpArg,
    #[arg(long, value_enum, default_value = "sobolev")]
    kind: KindArg,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value = "2")]
    p: String,
    #[arg(long, default_value = "2")]
    q: String,
    #[arg(long)]
    inhomogeneous: bool,
    /// sine:k=K, cosine:k=K, bump:center=C,width=W,amplitude=A, counterexample, zero, file:PATH
    #[arg(long)]
    field: String,
    #[arg(long, default_value_t = 1024)]
    points: usize,
    #[arg(long, default_value_t = std::f64::consts::PI)]
    half_width: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "mixed")]
    family: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    count: usize,
    #[arg(long, value_delimiter = ',', default_value = "1024,2048,4096")]
    resolutions: Vec<usize>,
    #[arg(long, default_value_t = 2.0)]
    half_width: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
}

impl SweepArgs {
    fn settings(&self) -> Result<SweepSettings> {
        Ok(SweepSettings {
            family: FamilySpec::new(self.family.parse::<FamilyKind>()?, self.seed),
            count: self.count,
            resolutions: self.resolutions.clone(),
            half_width: self.half_width,
            dim: self.dim,
        })
    }
}

#[derive(Args)]
struct SpaceArgs {
    #[arg(long, value_enum, default_value = "sobolev")]
    space: KindArg,
    #[arg(long, default_value = "2")]
    q: String,
    #[arg(long)]
    inhomogeneous: bool,
}

impl SpaceArgs {
    fn kind(&self) -> Result<SpaceKind> {
        Ok(match self.space {
            KindArg::Sobolev => SpaceKind::Sobolev,
            KindArg::Besov => SpaceKind::Besov { q: parse_exponent(&self.q)? },
        })
    }
}

#[derive(Args)]
struct BilinearArgs {
    /// TOML file with a [bilinear] section; flags below are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "dirichlet")]
    op: OpArg,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, default_value = "2")]
    p: String,
    /// Defaults: p1 = p4 = p, p2 = p3 = inf.
    #[arg(long)]
    p1: Option<String>,
    #[arg(long)]
    p2: Option<String>,
    #[arg(long)]
    p3: Option<String>,
    #[arg(long)]
    p4: Option<String>,
    #[command(flatten)]
    space: SpaceArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct TrilinearArgs {
    /// TOML file with a [trilinear] section.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "dirichlet")]
    op: OpArg,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, default_value = "2")]
    p: String,
    /// Nine comma-separated exponents, three per term (default: p,inf,inf,inf,p,inf,inf,inf,p).
    #[arg(long, value_delimiter = ',')]
    exponents: Option<Vec<String>>,
    /// Also run the iterated bilinear route on the same family.
    #[arg(long)]
    contrast: bool,
    #[command(flatten)]
    space: SpaceArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum MappingArg {
    Cross,
    Same,
}

#[derive(Args)]
struct DerivativeArgs {
    /// TOML file with a [derivative] section.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "dirichlet")]
    op: OpArg,
    #[arg(long, value_enum, default_value = "cross")]
    mapping: MappingArg,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, default_value = "2")]
    p: String,
    #[command(flatten)]
    sweep: SweepArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CounterexampleArgs {
    /// TOML file with a [counterexample] section.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long = "N", default_value_t = 16384)]
    points: usize,
    #[arg(long, default_value_t = 2.0)]
    half_width: f64,
    /// Run the dyadic block study as well.
    #[arg(long)]
    besov: bool,
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    q: Vec<String>,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 16)]
    fit_start_cells: usize,
    #[arg(long, value_delimiter = ',', default_value = "4096,8192,16384,32768")]
    layer_resolutions: Vec<usize>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long)]
    quick: bool,
    /// Scale the base block by this factor (fault injection).
    #[arg(long, default_value_t = 1.0)]
    phi0_gain: f64,
    #[arg(long, default_value_t = 4096)]
    points: usize,
    #[command(flatten)]
    out: OutArgs,
}

fn parse_exponent(t: &str) -> Result<f64> {
    exponent::parse(t).map_err(Error::Config)
}

fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|e| Error::Config(format!("{SEED_VAR}={v}: {e}"))),
        Err(_) => Ok(None),
    }
}

fn load_config(path: &Path) -> Result<ExperimentFile> {
    let mut file = ExperimentFile::load(path)?;
    if let Some(seed) = seed_override()? {
        file.override_seed(seed);
    }
    Ok(file)
}

fn apply_seed(sweep: &mut SweepSettings) -> Result<()> {
    if let Some(seed) = seed_override()? {
        sweep.family.seed = seed;
    }
    Ok(())
}

fn required_s(s: Option<f64>) -> Result<f64> {
    s.ok_or_else(|| Error::Config("--s is required without --config".into()))
}

fn one_or_many(values: Vec<Value>) -> Value {
    if values.len() == 1 {
        values.into_iter().next().expect("one value")
    } else {
        Value::Array(values)
    }
}

/// Print JSON to stdout and write files under the output prefix.
fn emit(out: &OutArgs, value: &Value, extras: &[(String, String)], started: Instant) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))? + "\n";
    print!("{text}");
    let elapsed = started.elapsed().as_secs_f64();
    eprintln!("wall time {elapsed:.2} s");
    if let Some(prefix) = &out.out {
        let with = |suffix: &str| {
            let mut p = prefix.clone().into_os_string();
            p.push(".");
            p.push(suffix);
            PathBuf::from(p)
        };
        std::fs::write(with("json"), &text)?;
        for (suffix, body) in extras {
            std::fs::write(with(suffix), body)?;
        }
        let timing = json!({ "wall_seconds": elapsed, "threads": rayon::current_num_threads() });
        std::fs::write(with("timing.json"), timing.to_string() + "\n")?;
    }
    Ok(())
}

fn report_files(reports: &[&RatioReport]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (i, r) in reports.iter().enumerate() {
        let tag = if reports.len() == 1 { String::new() } else { format!("{i}.") };
        out.push((format!("{tag}{}.csv", r.experiment), r.to_csv()));
        out.push((format!("{tag}{}.dat", r.experiment), r.plot_data()));
    }
    out
}

fn describe(r: &RatioReport) {
    let ratios: Vec<String> = r
        .summary
        .iter()
        .map(|s| format!("N={} {}", s.points, s.max_ratio.map_or("-".into(), |v| format!("{v:.6}"))))
        .collect();
    eprintln!("{}: {} -> {:?}", r.experiment, ratios.join(", "), r.verdict);
    for n in &r.notes {
        eprintln!("  note: {n}");
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Format(e.to_string()))
}

fn cmd_norm(a: &NormArgs) -> Result<u8> {
    let started = Instant::now();
    let op: Operator = a.op.into();
    let p = parse_exponent(&a.p)?;
    let mut spec = match a.kind {
        KindArg::Sobolev => SpaceSpec::sobolev(op, a.s, p),
        KindArg::Besov => SpaceSpec::besov(op, a.s, p, parse_exponent(&a.q)?),
    };
    if a.inhomogeneous {
        spec = spec.inhomogeneous();
    }
    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
    let grid = GridSpec::new(a.dim, a.half_width, a.points, true).map_err(|e| Error::Config(e.to_string()))?;
    let hf = fields::resolve(&a.field, &grid, op)?;
    let record = match a.kind {
        KindArg::Sobolev => sobolev_record(&hf, &spec)?,
        KindArg::Besov => besov_record(&hf, &spec, &build_bank(&grid)?)?,
    };
    let degenerate = hf.max_abs() == 0.0;
    let mut value = to_value(&record)?;
    value["degenerate"] = Value::Bool(degenerate);
    value["grid"] = to_value(&grid)?;
    value["version"] = Value::String(halfspace_spectral::VERSION.into());
    eprintln!("{} norm ({}, s={}, p={}) = {:.12e}", a.field, op.label(), a.s, p, record.value);
    let profile: String = record.profile.iter().map(|t| format!("{} {}\n", t.j, t.weighted)).collect();
    let extras = if profile.is_empty() { Vec::new() } else { vec![("profile.dat".to_owned(), profile)] };
    emit(&a.out, &value, &extras, started)?;
    if degenerate {
        eprintln!("degenerate: zero field has no meaningful norm ratio");
        return Ok(3);
    }
    Ok(0)
}

fn cmd_bilinear(a: &BilinearArgs) -> Result<u8> {
    let started = Instant::now();
    let configs = match &a.config {
        Some(path) => load_config(path)?.bilinear,
        None => {
            let p = parse_exponent(&a.p)?;
            let ex = |v: &Option<String>, d: f64| v.as_deref().map_or(Ok(d), parse_exponent);
            let mut sweep = a.sweep.settings()?;
            apply_seed(&mut sweep)?;
            let cfg = BilinearConfig {
                s: required_s(a.s)?,
                p,
                p1: ex(&a.p1, p)?,
                p2: ex(&a.p2, f64::INFINITY)?,
                p3: ex(&a.p3, f64::INFINITY)?,
                p4: ex(&a.p4, p)?,
                op: a.op.into(),
                space: a.space.kind()?,
                homogeneous: !a.space.inhomogeneous,
                sweep,
            };
            cfg.validate()?;
            vec![cfg]
        }
    };
    if configs.is_empty() {
        return Err(Error::Config("config has no [bilinear] section".into()));
    }
    let reports = configs.iter().map(ratio_sweep).collect::<Result<Vec<_>>>()?;
    reports.iter().for_each(describe);
    let value = one_or_many(reports.iter().map(to_value).collect::<Result<_>>()?);
    emit(&a.out, &value, &report_files(&reports.iter().collect::<Vec<_>>()), started)?;
    Ok(0)
}

fn cmd_trilinear(a: &TrilinearArgs) -> Result<u8> {
    let started = Instant::now();
    let configs = match &a.config {
        Some(path) => load_config(path)?.trilinear,
        None => {
            let p = parse_exponent(&a.p)?;
            let inf = f64::INFINITY;
            let exponents = match &a.exponents {
                Some(list) => {
                    let v = list.iter().map(|t| parse_exponent(t)).collect::<Result<Vec<_>>>()?;
                    let n = v.len();
                    v.try_into().map_err(|_| Error::Config(format!("--exponents needs 9 values, got {n}")))?
                }
                None => [p, inf, inf, inf, p, inf, inf, inf, p],
            };
            let mut sweep = a.sweep.settings()?;
            apply_seed(&mut sweep)?;
            let cfg = TrilinearConfig {
                s: required_s(a.s)?,
                p,
                exponents,
                op: a.op.into(),
                space: a.space.kind()?,
                homogeneous: !a.space.inhomogeneous,
                sweep,
            };
            cfg.validate()?;
            vec![cfg]
        }
    };
    if configs.is_empty() {
        return Err(Error::Config("config has no [trilinear] section".into()));
    }
    let mut values = Vec::new();
    let mut files = Vec::new();
    for (i, cfg) in configs.iter().enumerate() {
        let tag = if configs.len() == 1 { String::new() } else { format!("{i}.") };
        if a.contrast {
            let c = odd_multiplicity_contrast(cfg)?;
            describe(&c.trilinear);
            describe(&c.iterated_bilinear);
            for (name, body) in report_files(&[&c.trilinear, &c.iterated_bilinear]) {
                files.push((format!("{tag}{name}"), body));
            }
            values.push(to_value(&c)?);
        } else {
            let r = trilinear_sweep(cfg)?;
            describe(&r);
            for (name, body) in report_files(&[&r]) {
                files.push((format!("{tag}{name}"), body));
            }
            values.push(to_value(&r)?);
        }
    }
    emit(&a.out, &one_or_many(values), &files, started)?;
    Ok(0)
}

fn cmd_derivative(a: &DerivativeArgs) -> Result<u8> {
    let started = Instant::now();
    let configs = match &a.config {
        Some(path) => load_config(path)?.derivative,
        None => {
            let mut sweep = a.sweep.settings()?;
            apply_seed(&mut sweep)?;
            let cfg = DerivativeConfig {
                s: required_s(a.s)?,
                p: parse_exponent(&a.p)?,
                op: a.op.into(),
                mapping: match a.mapping {
                    MappingArg::Cross => Mapping::Cross,
                    MappingArg::Same => Mapping::Same,
                },
                sweep,
            };
            cfg.validate()?;
            vec![cfg]
        }
    };
    if configs.is_empty() {
        return Err(Error::Config("config has no [derivative] section".into()));
    }
    let reports = configs.iter().map(derivative_mapping_sweep).collect::<Result<Vec<_>>>()?;
    reports.iter().for_each(describe);
    let value = one_or_many(reports.iter().map(to_value).collect::<Result<_>>()?);
    emit(&a.out, &value, &report_files(&reports.iter().collect::<Vec<_>>()), started)?;
    Ok(0)
}

fn run_counterexample(cfg: &CounterexampleConfig, files: &mut Vec<(String, String)>, tag: &str) -> Result<Value> {
    let grid = GridSpec::new(1, cfg.half_width, cfg.points, true).map_err(|e| Error::Config(e.to_string()))?;
    let profile = singularity_profile(cfg.p, &grid, cfg.singularity)?;
    eprintln!(
        "p={}: near-wall exponent {:.4} (spectral), {:.4} (quadrature); expected {:.4}",
        cfg.p,
        profile.spectral.exponent,
        profile.quadrature.exponent,
        -1.0 / cfg.p
    );
    let samples: String = profile.samples.iter().map(|r| format!("{} {} {}\n", r[0], r[1], r[2])).collect();
    files.push((format!("{tag}singularity.dat"), format!("# x spectral quadrature\n{samples}")));
    let layer = layer_growth(cfg.p, &cfg.layer_resolutions, cfg.half_width, cfg.singularity.delta)?;
    let rows: String = layer.points.iter().zip(&layer.layer_power).map(|(n, v)| format!("{n} {v}\n")).collect();
    files.push((format!("{tag}layer.dat"), format!("# points layer_norm^p\n{rows}")));
    if let Some(fit) = &layer.fit {
        eprintln!("layer norm^p vs log N: slope {:.4}, R^2 {:.4}", fit.slope, fit.r_squared);
    }
    let mut value = json!({
        "version": halfspace_spectral::VERSION,
        "config": to_value(cfg)?,
        "singularity": to_value(&profile)?,
        "layer": to_value(&layer)?,
    });
    if cfg.besov {
        let bank = build_bank(&grid)?;
        let floor = besov_block_floor(cfg.p, &grid, &bank, &cfg.qs)?;
        eprintln!(" j   2^(j/p)|phi_j F|_p");
        for b in floor.blocks.iter().filter(|b| b.complete) {
            eprintln!("{:>3}  {:.6}", b.j, b.weighted);
        }
        for g in &floor.partial_sums {
            eprintln!(
                "q={}: partial sums from j={} grow with exponent {} (expected {:.3})",
                g.q,
                g.onset_j,
                g.exponent.map_or("-".into(), |e| format!("{e:.4}")),
                g.expected
            );
            let rows: String = g.sums.iter().enumerate().map(|(k, v)| format!("{} {v}\n", k + 1)).collect();
            files.push((format!("{tag}partial-q{}.dat", g.q), format!("# octaves partial_sum\n{rows}")));
        }
        eprintln!(
            "limit profile max {:.6} at u={:.4}; block j={} agrees to {:.2e}",
            floor.limit.limit_value, floor.limit.u_argmax, floor.limit.comparison_j, floor.limit.relative_error
        );
        let rows: String = floor.blocks.iter().map(|b| format!("{} {}\n", b.j, b.weighted)).collect();
        files.push((format!("{tag}blocks.dat"), format!("# j weighted_block\n{rows}")));
        let rows: String = floor.limit.samples.iter().map(|r| format!("{} {} {}\n", r[0], r[1], r[2])).collect();
        files.push((format!("{tag}limit.dat"), format!("# u block limit\n{rows}")));
        value["block_floor"] = to_value(&floor)?;
    }
    Ok(value)
}

fn cmd_counterexample(a: &CounterexampleArgs) -> Result<u8> {
    let started = Instant::now();
    let configs = match &a.config {
        Some(path) => load_config(path)?.counterexample,
        None => {
            let p = a.p.as_deref().ok_or_else(|| Error::Config("--p is required without --config".into()))?;
            let qs = a.q.iter().map(|t| parse_exponent(t)).collect::<Result<Vec<_>>>()?;
            vec![CounterexampleConfig {
                p: parse_exponent(p)?,
                points: a.points,
                half_width: a.half_width,
                singularity: SingularityOptions { fit_start_cells: a.fit_start_cells, delta: a.delta },
                besov: a.besov,
                qs,
                layer_resolutions: a.layer_resolutions.clone(),
            }]
        }
    };
    if configs.is_empty() {
        return Err(Error::Config("config has no [counterexample] section".into()));
    }
    let mut files = Vec::new();
    let mut values = Vec::new();
    for (i, cfg) in configs.iter().enumerate() {
        let tag = if configs.len() == 1 { String::new() } else { format!("{i}.") };
        values.push(run_counterexample(cfg, &mut files, &tag)?);
    }
    emit(&a.out, &one_or_many(values), &files, started)?;
    Ok(0)
}

fn cmd_selftest(a: &SelftestArgs) -> Result<u8> {
    let started = Instant::now();
    let report = selftest::run(selftest::Options { quick: a.quick, phi0_gain: a.phi0_gain, points: a.points })?;
    eprint!("{}", report.table());
    emit(&a.out, &to_value(&report)?, &[], started)?;
    if report.passed {
        eprintln!("all checks passed");
        Ok(0)
    } else {
        eprintln!("self-test FAILED");
        Ok(3)
    }
}

fn run(cli: &Cli) -> Result<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("--threads {n}: {e}")))?;
    }
    match &cli.command {
        Command::Norm(a) => cmd_norm(a),
        Command::Bilinear(a) => cmd_bilinear(a),
        Command::Trilinear(a) => cmd_trilinear(a),
        Command::Derivative(a) => cmd_derivative(a),
        Command::Counterexample(a) => cmd_counterexample(a),
        Command::Selftest(a) => cmd_selftest(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = if e.is_numerical_guard() { 3 } else { 2 };
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}
