//! `sl2c`: tabulate densities, run verification suites, drive the symplectic
//! pipeline and the stochastic-area simulation.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or regime error,
//! 3 numerical non-convergence.

mod config;

use clap::{Args, Parser, Subcommand, ValueEnum};
use config::FileConfig;
use serde_json::{json, Value};
use sl2c_semigroup::grid::fmt17;
use sl2c_semigroup::kernels::{kernel_decomposition, qt_density, subcritical_decomposition};
use sl2c_semigroup::metaplectic::{self, Pipeline, C2};
use sl2c_semigroup::montecarlo::{estimate_from_samples, simulate_paths, AreaSimSpec};
use sl2c_semigroup::verify::{self, Fault, Report, Suite, VerifyConfig};
use sl2c_semigroup::{DensityGrid, Error, Exec, GridSpec, Regime, SpectralPoint, TruncationPolicy};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const OUT_DIR_ENV: &str = "SL2C_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "sl2c",
    version,
    about = "Densities, kernels and checks for the SL(2,C) Levy semigroups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate a density on a ξ grid as CSV.
    Density(DensityArgs),
    /// Run a verification suite and print a JSON report.
    Verify(VerifyArgs),
    /// Run the symplectic pipeline for one (α, t) and print JSON.
    Metaplectic(MetaplecticArgs),
    /// Monte Carlo estimate of the stochastic-area characteristic function.
    AreaSim(AreaSimArgs),
    /// Tabulate q_t for several times as one wide CSV.
    Tabulate(TabulateArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// `key=value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; defaults to stdout, or a file in $SL2C_OUT_DIR.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluate on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Clone)]
struct SeriesFlags {
    #[arg(long, value_name = "MIN MAX N", num_args = 3, allow_negative_numbers = true)]
    grid: Option<Vec<String>>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    max_m: Option<usize>,
    #[arg(long)]
    max_j: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// The Lévy density q_t(ξ).
    Q,
    /// Principal-series kernel p_t(ω, ξ).
    P,
    /// Complementary-series kernel, t ≥ |ω|.
    C,
    /// Subcritical density G_t(ω, ξ), 0 < t < |ω|, plus its atom.
    G,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    #[command(flatten)]
    series: SeriesFlags,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Qt,
    Principal,
    Complementary,
    Subcritical,
    Metaplectic,
    Montecarlo,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: SuiteArg,
    /// Include the Monte Carlo suite in `all`.
    #[arg(long)]
    include_slow: bool,
    /// Test hook: evaluate q_t at t + SHIFT inside the qt suite.
    #[arg(long, value_name = "SHIFT", allow_negative_numbers = true)]
    fault: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[command(flatten)]
    sim: SimFlags,
    #[command(flatten)]
    series: SeriesFlags,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct MetaplecticArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct SimFlags {
    #[arg(long)]
    n_paths: Option<usize>,
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct AreaSimArgs {
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[command(flatten)]
    sim: SimFlags,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TabulateArgs {
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,2")]
    times: Vec<f64>,
    #[command(flatten)]
    series: SeriesFlags,
    #[command(flatten)]
    common: Common,
}

/// Failure classes mapped to exit codes.
enum Fail {
    Usage(String),
    Verification,
    Numerical(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Regime(_) | Error::GridMismatch(_) => Fail::Usage(e.to_string()),
            Error::NonConvergence { .. }
            | Error::ToleranceNotMet { .. }
            | Error::InsufficientAcceptance { .. }
            | Error::Structure(_) => Fail::Numerical(e.to_string()),
        }
    }
}

impl From<String> for Fail {
    fn from(s: String) -> Self {
        Fail::Usage(s)
    }
}

type CliResult<T> = Result<T, Fail>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Density(a) => cmd_density(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Metaplectic(a) => cmd_metaplectic(a),
        Command::AreaSim(a) => cmd_area_sim(a),
        Command::Tabulate(a) => cmd_tabulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Verification) => ExitCode::from(1),
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Fail::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_config(common: &Common) -> CliResult<FileConfig> {
    Ok(match &common.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    })
}

fn exec(common: &Common) -> Exec {
    if common.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

fn policy(flags: &SeriesFlags, cfg: &FileConfig) -> CliResult<TruncationPolicy> {
    let d = TruncationPolicy::default();
    let rel_tol = cfg.pick(flags.rel_tol, "rel_tol", d.rel_tol)?;
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Fail::Usage(format!("--rel-tol must lie in (0, 1), got {rel_tol}")));
    }
    Ok(TruncationPolicy::new(
        rel_tol,
        cfg.pick(flags.max_m, "max_m", d.max_m)?,
        cfg.pick(flags.max_j, "max_j", d.max_j)?,
    )?)
}

fn grid(flags: &SeriesFlags, cfg: &FileConfig) -> CliResult<GridSpec> {
    let (fmin, fmax, fn_) = match &flags.grid {
        Some(v) => {
            let f = |s: &str| s.parse::<f64>().map_err(|_| format!("--grid: cannot parse {s:?}"));
            let n = v[2]
                .parse::<usize>()
                .map_err(|_| format!("--grid: N must be an integer, got {:?}", v[2]))?;
            (Some(f(&v[0])?), Some(f(&v[1])?), Some(n))
        }
        None => (None, None, None),
    };
    let min = cfg.pick(fmin, "grid_min", -10.0)?;
    let max = cfg.pick(fmax, "grid_max", 10.0)?;
    let n = cfg.pick(fn_, "grid_n", 101)?;
    if n < 2 {
        return Err(Fail::Usage(format!("grid needs n >= 2, got {n}")));
    }
    Ok(GridSpec::new(min, max, n)?)
}

fn required(flag: Option<f64>, cfg: &FileConfig, key: &str) -> CliResult<f64> {
    optional(flag, cfg, key)?.ok_or_else(|| Fail::Usage(format!("missing --{key}")))
}

fn optional(flag: Option<f64>, cfg: &FileConfig, key: &str) -> CliResult<Option<f64>> {
    Ok(match flag {
        Some(v) => Some(v),
        None => cfg.get(key)?,
    })
}

/// Write to `--out`, else to `$SL2C_OUT_DIR/<default_name>`, else stdout.
fn emit(text: &str, common: &Common, cfg: &FileConfig, default_name: &str) -> CliResult<()> {
    let path = match common.out.clone().or(cfg.get::<PathBuf>("out")?) {
        Some(p) => Some(p),
        None => std::env::var_os(OUT_DIR_ENV).map(|d| Path::new(&d).join(default_name)),
    };
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
            }
            std::fs::write(&p, text).map_err(|e| Fail::Usage(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_density(a: DensityArgs) -> CliResult<()> {
    let cfg = load_config(&a.common)?;
    let p = policy(&a.series, &cfg)?;
    let spec = grid(&a.series, &cfg)?;
    let t = required(a.t, &cfg, "t")?;
    let ex = exec(&a.common);
    let mut comments = Vec::new();
    let (label, g, symmetric) = match a.kind {
        Kind::Q => ("q", DensityGrid::tabulate(&spec, ex, |xi| qt_density(t, xi, &p))?, true),
        Kind::P => {
            let w = cfg.pick(a.omega, "omega", 0.0)?;
            let d = kernel_decomposition(t, SpectralPoint::Principal(w), &p)?;
            comments.push(format!("omega={w}"));
            ("p", d.density_grid(&spec, ex)?, w == 0.0)
        }
        Kind::C => {
            let w = required(a.omega, &cfg, "omega")?;
            let d = kernel_decomposition(t, SpectralPoint::complementary(w)?, &p)?;
            if d.regime != Regime::Complementary {
                return Err(Fail::Usage(format!(
                    "kind c needs t >= |omega|, got t={t}, omega={w}; use kind g below the threshold"
                )));
            }
            comments.push(format!("omega={w}"));
            ("c", d.density_grid(&spec, ex)?, true)
        }
        Kind::G => {
            let w = required(a.omega, &cfg, "omega")?;
            let d = subcritical_decomposition(t, w, &p)?;
            let atom = d.atom.expect("subcritical decomposition carries an atom");
            comments.push(format!(
                "atom_location={},atom_mass={}",
                fmt17(atom.location),
                fmt17(atom.mass)
            ));
            comments.push(format!("omega={w}"));
            ("g", d.density_grid(&spec, ex)?, false)
        }
    };
    comments.insert(usize::from(matches!(a.kind, Kind::G)), format!("kind={label},t={t}"));
    comments.push(format!("rel_tol={:e},max_m={},max_j={}", p.rel_tol, p.max_m, p.max_j));
    let mirrored = (spec.min + spec.max).abs() <= 1e-12 * spec.max.abs().max(1.0);
    g.sanity_check((symmetric && mirrored).then_some(1e-12))?;
    emit(&g.to_csv(&comments), &a.common, &cfg, &format!("density_{label}.csv"))
}

fn area_spec(flags: &SimFlags, cfg: &FileConfig) -> CliResult<AreaSimSpec> {
    let d = AreaSimSpec::default();
    let spec = AreaSimSpec {
        n_paths: cfg.pick(flags.n_paths, "n_paths", d.n_paths)?,
        n_steps: cfg.pick(flags.n_steps, "n_steps", d.n_steps)?,
        bandwidth: cfg.pick(flags.bandwidth, "bandwidth", d.bandwidth)?,
        seed: cfg.pick(flags.seed, "seed", d.seed)?,
    };
    spec.validate()?;
    Ok(spec)
}

fn cmd_verify(a: VerifyArgs) -> CliResult<()> {
    let cfg = load_config(&a.common)?;
    let metaplectic_point = match (optional(a.alpha, &cfg, "alpha")?, optional(a.t, &cfg, "t")?) {
        (Some(alpha), Some(t)) => Some((alpha, t)),
        (None, None) => None,
        _ => return Err(Fail::Usage("--alpha and --t go together".into())),
    };
    let config = VerifyConfig {
        policy: policy(&a.series, &cfg)?,
        exec: exec(&a.common),
        fault: a.fault.map(Fault::QtTimeShift),
        metaplectic_point,
        area: area_spec(&a.sim, &cfg)?,
        ..VerifyConfig::default()
    };
    let suites: Vec<Suite> = match a.suite {
        SuiteArg::All => Suite::ALL
            .into_iter()
            .filter(|s| a.include_slow || !s.is_slow())
            .collect(),
        SuiteArg::Qt => vec![Suite::Qt],
        SuiteArg::Principal => vec![Suite::Principal],
        SuiteArg::Complementary => vec![Suite::Complementary],
        SuiteArg::Subcritical => vec![Suite::Subcritical],
        SuiteArg::Metaplectic => vec![Suite::Metaplectic],
        SuiteArg::Montecarlo => vec![Suite::Montecarlo],
    };
    let reports: Vec<Report> = suites.into_iter().map(|s| verify::run(s, &config)).collect();
    let passed = reports.iter().all(Report::passed);
    let doc = json!({ "passed": passed, "reports": reports });
    let text = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
    emit(&text, &a.common, &cfg, "verify.json")?;
    if passed {
        Ok(())
    } else {
        Err(Fail::Verification)
    }
}

fn real_matrix<const R: usize, const C: usize>(m: &nalgebra::SMatrix<f64, R, C>) -> Value {
    Value::Array(
        (0..R)
            .map(|i| json!((0..C).map(|j| m[(i, j)]).collect::<Vec<_>>()))
            .collect(),
    )
}

fn complex_matrix(m: &C2) -> Value {
    Value::Array(
        (0..2)
            .map(|i| json!((0..2).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect::<Vec<_>>()))
            .collect(),
    )
}

fn pipeline_json(p: &Pipeline) -> Value {
    let r = &p.residuals;
    json!({
        "alpha": p.alpha,
        "t": p.t,
        "generator": real_matrix(&p.generator),
        "complex_structure": real_matrix(&p.complex_structure),
        "exp_neg_tA": real_matrix(&p.exp_closed),
        "exp_neg_tA_series": real_matrix(&p.exp_series),
        "gram": {
            "left": real_matrix(&p.gram.left),
            "right": real_matrix(&p.gram.right),
            "left_core": real_matrix(&p.gram.left_core),
            "right_core": real_matrix(&p.gram.right_core),
        },
        "cartan": {
            "m": real_matrix(&p.cartan.m),
            "lambdas": [p.cartan.lambdas.0, p.cartan.lambdas.1],
            "r": real_matrix(&p.cartan.r),
        },
        "u2_m": complex_matrix(&p.u2_m),
        "u2_r": complex_matrix(&p.u2_r),
        "sl2c": complex_matrix(&p.sl2c),
        "residuals": {
            "closed_vs_series": r.closed_vs_series,
            "j_squared": r.j_squared,
            "symplectic": r.symplectic,
            "core_det": r.core_det,
            "reassembly": r.reassembly,
            "lambda_product": r.lambda_product,
            "orthogonality": r.orthogonality,
            "unitarity": r.unitarity,
            "sl2c_det": r.sl2c_det,
            "sl2c_singular_values": r.sl2c_singular_values,
            "max": r.max(),
        },
    })
}

fn cmd_metaplectic(a: MetaplecticArgs) -> CliResult<()> {
    let cfg = load_config(&a.common)?;
    let alpha = required(a.alpha, &cfg, "alpha")?;
    let t = required(a.t, &cfg, "t")?;
    if alpha.is_nan() || alpha <= 0.0 || !t.is_finite() {
        return Err(Fail::Usage(format!(
            "need alpha > 0 and finite t, got alpha={alpha}, t={t}"
        )));
    }
    let p = metaplectic::pipeline(alpha, t)?;
    // Residuals above 1e-12 are reported, not fatal: the document is the output.
    let text = serde_json::to_string_pretty(&pipeline_json(&p)).expect("finite floats serialize") + "\n";
    emit(&text, &a.common, &cfg, "metaplectic.json")
}

fn cmd_area_sim(a: AreaSimArgs) -> CliResult<()> {
    let cfg = load_config(&a.common)?;
    let t = required(a.t, &cfg, "t")?;
    let x = required(a.x, &cfg, "x")?;
    let spec = area_spec(&a.sim, &cfg)?;
    let samples = simulate_paths(&spec, exec(&a.common))?;
    let e = estimate_from_samples(&samples, t, x, spec.bandwidth)?;
    let doc = json!({ "t": t, "x": x, "spec": spec, "estimate": e, "agrees": e.agrees() });
    let text = serde_json::to_string_pretty(&doc).expect("estimate serializes") + "\n";
    emit(&text, &a.common, &cfg, "area_sim.json")
}

fn cmd_tabulate(a: TabulateArgs) -> CliResult<()> {
    let cfg = load_config(&a.common)?;
    let p = policy(&a.series, &cfg)?;
    let spec = grid(&a.series, &cfg)?;
    if a.times.is_empty() {
        return Err(Fail::Usage("--times is empty".into()));
    }
    let ex = exec(&a.common);
    let grids = a
        .times
        .iter()
        .map(|&t| {
            let g = DensityGrid::tabulate(&spec, ex, |xi| qt_density(t, xi, &p))?;
            g.sanity_check(None)?;
            Ok(g)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut out = format!("# rel_tol={:e},max_m={},max_j={}\nxi", p.rel_tol, p.max_m, p.max_j);
    for t in &a.times {
        out.push_str(&format!(",t={t}"));
    }
    out.push('\n');
    for (k, xi) in spec.points().into_iter().enumerate() {
        out.push_str(&fmt17(xi));
        for g in &grids {
            out.push(',');
            out.push_str(&fmt17(g.values()[k]));
        }
        out.push('\n');
    }
    emit(&out, &a.common, &cfg, "tabulate_q.csv")
}
