//! The `oqlab` command line: tower caching, scalar computations, the verification suite,
//! z-block norms and walk simulation.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use oqlab::app::{self, ModelPreset, Report, TowerSource};
use oqlab::boundary;
use oqlab::linalg;
use oqlab::qnum::{self, FusionTriple};
use oqlab::tower::{ModelParams, Tower};
use oqlab::verify::{self, CheckParams, Session, DEFAULT_SEED, DEFAULT_TOL, DEFAULT_TRIALS};
use oqlab::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "oqlab", version, about = "Representation tower and boundary verification for O_Q^+")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and cache representation towers.
    #[command(subcommand)]
    Tower(TowerCmd),
    /// Scalar quantities: quantum dimensions, κ coefficients, walk weights.
    #[command(subcommand)]
    Compute(ComputeCmd),
    /// Run the verification suite.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Boundary-map diagnostics.
    #[command(subcommand)]
    Boundary(BoundaryCmd),
    /// Monte-Carlo level walk.
    #[command(subcommand)]
    Walk(WalkCmd),
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// kac3, kacN:<N>, nonkac-lambda:<lambda> or file:<path>
    #[arg(long, default_value = "kac3")]
    preset: String,
}

#[derive(Args, Debug, Clone)]
struct TowerArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Highest tower level L.
    #[arg(long, default_value_t = 6)]
    max_level: usize,
    /// Build in memory even when a cached tower exists.
    #[arg(long)]
    no_cache: bool,
}

#[derive(Subcommand, Debug)]
enum TowerCmd {
    /// Build the tower and write it to the cache directory ($OQLAB_CACHE_DIR or .oqlab-cache).
    Build {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 6)]
        max_level: usize,
        /// Write here instead of the cache directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum ComputeCmd {
    /// Quantum dimension of level n.
    Qdim {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: u32,
        /// Also print the exact Laurent polynomial in q.
        #[arg(long)]
        exact: bool,
    },
    /// Normalisation κ of the intertwiner t ⊂ r ⊗ s.
    Kappa {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        t: u32,
        /// Also print the exact form.
        #[arg(long)]
        exact: bool,
    },
    /// Down/up probabilities of the level walk at level n.
    Weights {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// Run checks and optionally write a JSON report and CSV series.
    Run {
        #[command(flatten)]
        tower: TowerArgs,
        /// Comma-separated check names, or "all".
        #[arg(long, default_value = "all")]
        suite: String,
        /// Tolerance for the checks whose default is 1e-8.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Random trials for the randomized checks.
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long)]
        report: Option<PathBuf>,
        /// CSV of the (index, value) series of bound and decay checks.
        #[arg(long)]
        plot_data: Option<PathBuf>,
        /// Only print failing checks and the summary.
        #[arg(long)]
        quiet: bool,
    },
    /// List the registered checks.
    List,
}

#[derive(Subcommand, Debug)]
enum BoundaryCmd {
    /// Norms of z_block(k, n, n + offset) along n.
    ZNorms {
        #[command(flatten)]
        tower: TowerArgs,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        offset: usize,
    },
}

#[derive(Subcommand, Debug)]
enum WalkCmd {
    /// Sample paths of the birth–death chain on levels.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        n0: u32,
        #[arg(long, default_value_t = 100)]
        steps: u32,
        #[arg(long, default_value_t = 1000)]
        trials: u32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Print the full statistics as JSON.
        #[arg(long)]
        json: bool,
    },
}

/// Parses `args` (program name first) and runs the command against the process stdout/stderr.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Same as [`cli_main`] with explicit output streams.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

type CmdResult = std::result::Result<i32, Error>;

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Tower(TowerCmd::Build { model, max_level, out: dest }) => tower_build(&model, max_level, dest, out),
        Command::Compute(c) => compute(c, out),
        Command::Verify(VerifyCmd::List) => {
            for (name, kind, anchor) in verify::registry() {
                writeln!(out, "{name:<22} {:<18} {anchor}", format!("{kind:?}"))?;
            }
            Ok(EXIT_OK)
        }
        Command::Verify(VerifyCmd::Run { tower, suite, tol, seed, trials, report, plot_data, quiet }) => {
            let params = CheckParams { tol, seed, trials };
            verify_run(&tower, &suite, params, report, plot_data, quiet, out, err)
        }
        Command::Boundary(BoundaryCmd::ZNorms { tower, k, offset }) => z_norms(&tower, k, offset, out, err),
        Command::Walk(WalkCmd::Simulate { model, n0, steps, trials, seed, json }) => {
            walk_simulate(&model, n0, steps, trials, seed, json, out)
        }
    }
}

fn resolve_model(model: &ModelArgs) -> Result<(ModelPreset, ModelParams), Error> {
    let preset = ModelPreset::parse(&model.preset)?;
    let params = preset.resolve()?;
    Ok((preset, params))
}

fn load_tower(args: &TowerArgs, err: &mut dyn Write) -> Result<(ModelPreset, Tower), Error> {
    let (preset, params) = resolve_model(&args.model)?;
    let start = Instant::now();
    let (tower, source) = if args.no_cache {
        (Tower::build(params, args.max_level)?, TowerSource::Built)
    } else {
        let path = app::cache_path(&params, args.max_level);
        app::load_or_build(params, args.max_level, Some(&path))?
    };
    let how = match source {
        TowerSource::Built => "built",
        TowerSource::Cache => "loaded from cache",
    };
    writeln!(err, "tower {preset} L={} {how} in {:.1} s", args.max_level, start.elapsed().as_secs_f64())?;
    Ok((preset, tower))
}

fn tower_build(model: &ModelArgs, max_level: usize, dest: Option<PathBuf>, out: &mut dyn Write) -> CmdResult {
    let (preset, params) = resolve_model(model)?;
    let path = dest.unwrap_or_else(|| app::cache_path(&params, max_level));
    let start = Instant::now();
    let tower = app::build_and_cache(params, max_level, &path)?;
    writeln!(out, "preset   {preset}")?;
    writeln!(out, "q        {}", tower.q())?;
    writeln!(out, "dims     {:?}", tower.dims())?;
    writeln!(out, "hash     {}", tower.params().hash_hex(max_level))?;
    writeln!(out, "wrote    {} ({:.1} s)", path.display(), start.elapsed().as_secs_f64())?;
    Ok(EXIT_OK)
}

/// Integers print without a fractional part; everything else in shortest round-trip form.
fn format_number(x: f64) -> String {
    let r = x.round();
    if x.is_finite() && r.abs() < 1e15 && (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        format!("{}", r as i64)
    } else {
        format!("{x}")
    }
}

fn compute(cmd: ComputeCmd, out: &mut dyn Write) -> CmdResult {
    match cmd {
        ComputeCmd::Qdim { model, n, exact } => {
            let (_, params) = resolve_model(&model)?;
            let v = qnum::qdim(n, params.q());
            if exact {
                writeln!(out, "exact: [{}]_q = {}", n + 1, v.exact)?;
                writeln!(out, "float: {}", format_number(v.float))?;
            } else {
                writeln!(out, "{}", format_number(v.float))?;
            }
        }
        ComputeCmd::Kappa { model, r, s, t, exact } => {
            let (_, params) = resolve_model(&model)?;
            let k = qnum::kappa(FusionTriple::new(r, s, t)?, params.q());
            if exact {
                writeln!(out, "exact: {}", k.exact_string())?;
                writeln!(out, "float: {}", k.value)?;
            } else {
                writeln!(out, "{}", k.value)?;
            }
        }
        ComputeCmd::Weights { model, n, exact } => {
            let (_, params) = resolve_model(&model)?;
            let w = qnum::walk_weights(n, params.q());
            writeln!(out, "p_down: {}", w.p_down)?;
            writeln!(out, "p_up:   {}", w.p_up)?;
            if exact {
                let (down, up) = qnum::walk_weights_exact(n);
                writeln!(out, "p_down exact: {down}")?;
                writeln!(out, "p_up exact:   {up}")?;
            }
        }
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn verify_run(
    args: &TowerArgs,
    suite: &str,
    params: CheckParams,
    report: Option<PathBuf>,
    plot_data: Option<PathBuf>,
    quiet: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    params.validate()?;
    let names: Vec<String> = suite.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    let specs = verify::resolve_suite(&names, params)?;
    let (preset, tower) = load_tower(args, err)?;
    let session = Session::new(&tower);
    let mut results = Vec::with_capacity(specs.len());
    for spec in &specs {
        let r = session.run(spec);
        if !quiet || !r.pass {
            writeln!(
                out,
                "{}  {:<22} maxViolation={:>11.3e}  {:>7} ms",
                if r.pass { "PASS" } else { "FAIL" },
                r.name,
                r.max_violation,
                r.runtime_ms
            )?;
            for note in r.notes.iter().filter(|n| n.starts_with("aborted")) {
                writeln!(out, "      {note}")?;
            }
        }
        results.push(r);
    }
    let passed = results.iter().filter(|r| r.pass).count();
    let total = results.len();
    if let Some(path) = plot_data {
        app::write_atomic(&path, verify::plot_csv(&results).as_bytes())?;
    }
    let report_obj = Report::new(&preset, &tower, params, results);
    if let Some(path) = report {
        report_obj.write(&path)?;
        writeln!(err, "report written to {}", path.display())?;
    }
    writeln!(out, "{passed}/{total} checks passed")?;
    Ok(if report_obj.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn z_norms(args: &TowerArgs, k: usize, offset: usize, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let (_, tower) = load_tower(args, err)?;
    let (l, q) = (tower.max_level(), tower.q());
    writeln!(out, "{:>3} {:>3} {:>24} {:>24}", "n", "t", "norm", "q^n*norm")?;
    let mut n = k;
    while n + offset + k <= l {
        let z = boundary::z_block(&tower, k, n, n + offset)?;
        let norm = linalg::herm_norm(linalg::herm_part(z.as_ref()).as_ref())?;
        writeln!(out, "{n:>3} {:>3} {norm:>24.16e} {:>24.16e}", n + offset, q.powi(n as i32) * norm)?;
        n += 1;
    }
    if n == k {
        writeln!(err, "no computable cell: need k + offset + k <= max level")?;
    }
    Ok(EXIT_OK)
}

fn walk_simulate(model: &ModelArgs, n0: u32, steps: u32, trials: u32, seed: u64, json: bool, out: &mut dyn Write) -> CmdResult {
    let (_, params) = resolve_model(model)?;
    let stats = app::simulate_walk(params.q(), n0, steps, trials, seed)?;
    if json {
        let v = serde_json::to_value(&stats)?;
        out.write_all(app::to_json_string(&v).as_bytes())?;
        return Ok(EXIT_OK);
    }
    writeln!(out, "q                   {}", stats.q)?;
    writeln!(out, "paths               {} x {} steps from n0 = {}", stats.trials, stats.steps, stats.n0)?;
    writeln!(out, "mean final level    {:.6} (std {:.6})", stats.mean_final, stats.std_final)?;
    writeln!(out, "mean increment      {:.6} ± {:.6}", stats.mean_increment, stats.increment_std_error)?;
    writeln!(out, "expected increment  {:.6}", stats.expected_increment)?;
    writeln!(out, "asymptotic drift    {:.6}", stats.asymptotic_drift)?;
    writeln!(out, "never returned      {:.4}", stats.escape_fraction)?;
    writeln!(out, "ended above n0      {:.4}", stats.above_start_fraction)?;
    Ok(EXIT_OK)
}
