//! `freeprob` — command-line access to the library: noncrossing-partition
//! tables, moment/cumulant arithmetic, free additive convolution of measures,
//! density recovery from closed-form Cauchy transforms, named-law JSON
//! emission, and seeded random-matrix experiments.
//!
//! Conventions: results go to stdout or to `--out`; everything else
//! (progress, warnings, errors) goes to stderr. `--format json` switches
//! stdout to a machine-readable report that embeds solver diagnostics where
//! a solver ran. Exit codes: 0 success, 2 invalid input, 1 numeric failure.
//! Every randomized command prints the seed it used, so any run can be
//! reproduced byte for byte.

use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use freeprob::measures::{
    make_arcsine, make_bernoulli, make_cauchy, make_dirac, make_free_poisson,
    make_quartercircular, make_semicircle, make_two_point, write_density_csv,
};
use freeprob::partitions::{enumerate_nc, mobius, Partition};
use freeprob::rmt::{
    genus_expansion_exact, gue_moments_mc, haar_traces_mc, rotated_sum_spectrum,
    wigner_moments_mc, MomentEstimate, SimulationConfig, WignerEntries, MAX_GENUS_ORDER,
};
use freeprob::transforms::{
    convolution_power_with, free_convolve_with, linspace, stieltjes_invert, ClosedForm,
    ConvolveOptions, SolverDiagnostics,
};
use freeprob::Measure;

#[derive(Parser)]
#[command(
    name = "freeprob",
    version,
    about = "Free probability toolkit: noncrossing partitions, free cumulants, \
             free convolution of spectral measures, and random-matrix experiments"
)]
struct Cli {
    /// Output format for stdout reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads for parallel sections (fallback: FREEPROB_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Noncrossing-partition lattice tables.
    #[command(subcommand)]
    Nc(NcCommand),
    /// Moment/cumulant sequence arithmetic.
    #[command(subcommand)]
    Cumulants(CumulantsCommand),
    /// Free additive convolution μ ⊞ ν of two measures from JSON files.
    Convolve(ConvolveArgs),
    /// Free convolution power μ^⊞t for t ≥ 1.
    Power(PowerArgs),
    /// Recover a density from a named closed-form Cauchy transform.
    Invert(InvertArgs),
    /// Seeded random-matrix experiments.
    #[command(subcommand)]
    Rmt(RmtCommand),
    /// Emit a named measure as JSON usable by --mu/--nu flags.
    Zoo(ZooArgs),
}

#[derive(Subcommand)]
enum NcCommand {
    /// List every noncrossing partition of {1..n}.
    Enumerate {
        #[arg(long)]
        n: usize,
    },
    /// Möbius function values μ(π, 1ₙ) for every π in NC(n).
    Mobius {
        #[arg(long)]
        n: usize,
    },
    /// Kreweras complements, for all of NC(n) or for one --partition.
    Kreweras {
        #[arg(long)]
        n: Option<usize>,
        /// One partition as a JSON array of blocks, e.g. [[1,3],[2]].
        #[arg(long)]
        partition: Option<String>,
    },
}

#[derive(Subcommand)]
enum CumulantsCommand {
    /// Moments m₁..m_k from free cumulants κ₁..κ_k.
    ToMoments {
        /// Cumulant sequence, comma-separated or a JSON array.
        #[arg(long, allow_hyphen_values = true)]
        cumulants: String,
    },
    /// Free cumulants κ₁..κ_k from moments m₁..m_k.
    FromMoments {
        /// Moment sequence, comma-separated or a JSON array.
        #[arg(long, allow_hyphen_values = true)]
        moments: String,
    },
    /// Free additive convolution: sum two cumulant sequences.
    Convolve {
        /// First cumulant sequence.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        /// Second cumulant sequence.
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Scale a cumulant sequence by t (the ⊞-semigroup on cumulants).
    Dilate {
        #[arg(long, allow_hyphen_values = true)]
        cumulants: String,
        #[arg(long)]
        t: f64,
    },
}

#[derive(Args)]
struct ConvolveArgs {
    /// First measure (JSON file).
    #[arg(long)]
    mu: PathBuf,
    /// Second measure (JSON file).
    #[arg(long)]
    nu: PathBuf,
    /// Output grid lo:hi:n (default: 2001 points over the summed support).
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// ε schedule: "auto" or "ε1,ε2" with ε1 > ε2 > 0.
    #[arg(long, default_value = "auto")]
    eps: String,
    /// Fixed-point tolerance (relative to |z|).
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Maximum fixed-point evaluations per grid point.
    #[arg(long, default_value_t = 20_000)]
    max_iter: usize,
    /// Aitken Δ² acceleration of the fixed-point iteration.
    #[arg(long)]
    aitken: bool,
    /// Write the x,density CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PowerArgs {
    /// Base measure (JSON file).
    #[arg(long)]
    mu: PathBuf,
    /// Convolution exponent, t ≥ 1.
    #[arg(long)]
    t: f64,
    /// Output grid lo:hi:n (default: 2001 points over the scaled support).
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// ε schedule: "auto" or "ε1,ε2" with ε1 > ε2 > 0.
    #[arg(long, default_value = "auto")]
    eps: String,
    /// Fixed-point tolerance (relative to |z|).
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Maximum fixed-point evaluations per grid point.
    #[arg(long, default_value_t = 20_000)]
    max_iter: usize,
    /// Aitken Δ² acceleration of the fixed-point iteration.
    #[arg(long)]
    aitken: bool,
    /// Write the x,density CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InvertArgs {
    /// Closed-form law: semicircle[:σ], free-poisson[:λ], bernoulli,
    /// arcsine, cauchy, dirac:a, bernoulli-power:t.
    #[arg(long)]
    law: String,
    /// Output grid lo:hi:n; it must cover the support.
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    /// ε schedule: "auto" (from the grid spacing) or "ε1,ε2".
    #[arg(long, default_value = "auto")]
    eps: String,
    /// Write the x,density CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum RmtCommand {
    /// GUE spectral moments: Monte Carlo with exact genus-expansion targets.
    Gue(GueArgs),
    /// Real Wigner spectral moments under a chosen entry law.
    Wigner(WignerArgs),
    /// Haar-unitary trace averages tr(U^k); all vanish in expectation.
    Haar(HaarArgs),
    /// Eigenvalue histogram of U·diag(μ_a)·U* + diag(μ_b) across trials.
    RotatedSum(RotatedSumArgs),
    /// Check Monte Carlo GUE moments against the exact genus expansion.
    VerifyGenus(VerifyGenusArgs),
}

#[derive(Args)]
struct SimArgs {
    /// Matrix size N.
    #[arg(long)]
    n: usize,
    /// Number of independent trials.
    #[arg(long)]
    trials: usize,
    /// RNG seed (default: fresh entropy; always printed).
    #[arg(long)]
    seed: Option<u64>,
    /// Allow sizes beyond the desk-scale limits (N ≤ 2000, trials ≤ 100).
    #[arg(long)]
    large: bool,
    /// Run trials serially (results are identical either way).
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct GueArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Highest moment order to estimate.
    #[arg(long, default_value_t = 8)]
    moments: usize,
}

#[derive(Args)]
struct WignerArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Highest moment order to estimate.
    #[arg(long, default_value_t = 8)]
    moments: usize,
    /// Entry law for the real symmetric matrix.
    #[arg(long, value_enum, default_value_t = EntryLaw::Gaussian)]
    entries: EntryLaw,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EntryLaw {
    Gaussian,
    Rademacher,
}

#[derive(Args)]
struct HaarArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Highest trace power k to estimate.
    #[arg(long, default_value_t = 4)]
    powers: usize,
}

#[derive(Args)]
struct RotatedSumArgs {
    /// Measure rotated by the Haar unitary (JSON file).
    #[arg(long)]
    mu_a: PathBuf,
    /// Measure kept diagonal (JSON file).
    #[arg(long)]
    mu_b: PathBuf,
    #[command(flatten)]
    sim: SimArgs,
    /// Number of histogram bins.
    #[arg(long, default_value_t = 120)]
    bins: usize,
    /// Write the bin_lo,bin_hi,count,density CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyGenusArgs {
    /// Highest (even) moment order to verify, at most 14.
    #[arg(long, default_value_t = 8)]
    m: usize,
    /// Matrix size N.
    #[arg(long)]
    n: usize,
    /// Number of independent trials.
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// RNG seed (default: fresh entropy; always printed).
    #[arg(long)]
    seed: Option<u64>,
    /// Allow sizes beyond the desk-scale limits (N ≤ 2000, trials ≤ 100).
    #[arg(long)]
    large: bool,
    /// Run trials serially (results are identical either way).
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct ZooArgs {
    /// Named law: semicircle[:σ], free-poisson[:λ], arcsine, bernoulli,
    /// two-point:a,b,w, dirac:a, quartercircular, cauchy[:window].
    /// Omit to list the available names.
    #[arg(long)]
    law: Option<String>,
    /// Write the measure JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A CLI failure: what to tell the user and which exit code it maps to
/// (2 = invalid input, 1 = numeric failure).
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn numeric(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

impl From<freeprob::Error> for Failure {
    fn from(e: freeprob::Error) -> Failure {
        match e {
            freeprob::Error::Invalid(_) => Failure { code: 2, message: e.to_string() },
            freeprob::Error::Numeric(_) => Failure { code: 1, message: e.to_string() },
        }
    }
}

/// Prefixes library validation messages with the flag that carried the
/// offending value, so the user knows what to change.
fn blame(flag: &str, e: freeprob::Error) -> Failure {
    let mut f = Failure::from(e);
    f.message = format!("{flag}: {}", f.message);
    f
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    freeprob::configure_threads(cli.threads);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let format = cli.format;
    match cli.command {
        Command::Nc(cmd) => run_nc(cmd, format),
        Command::Cumulants(cmd) => run_cumulants(cmd, format),
        Command::Convolve(args) => run_convolve(args, format),
        Command::Power(args) => run_power(args, format),
        Command::Invert(args) => run_invert(args, format),
        Command::Rmt(cmd) => run_rmt(cmd, format),
        Command::Zoo(args) => run_zoo(args),
    }
}

// ---------------------------------------------------------------- parsing

/// Parses "lo:hi:n" into a uniform grid.
fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad =
        || invalid(format!("--grid: expected lo:hi:n, got {spec:?} (example: -4:4:2001)"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    linspace(lo, hi, n).map_err(|e| blame("--grid", e))
}

/// Parses the ε schedule: "auto" means "let the solver choose from the grid
/// spacing"; otherwise "ε1,ε2" with ε1 > ε2 > 0.
fn parse_eps(spec: &str) -> Result<Option<(f64, f64)>, Failure> {
    if spec.trim().eq_ignore_ascii_case("auto") {
        return Ok(None);
    }
    let bad = || {
        invalid(format!(
            "--eps: expected \"auto\" or \"ε1,ε2\" with ε1 > ε2 > 0, got {spec:?}"
        ))
    };
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        return Err(bad());
    }
    let e1: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let e2: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    if !(e2 > 0.0) || !(e1 > e2) || !e1.is_finite() {
        return Err(bad());
    }
    Ok(Some((e1, e2)))
}

/// Parses a real sequence given either as a JSON array or comma-separated.
fn parse_sequence(flag: &str, spec: &str) -> Result<Vec<f64>, Failure> {
    let trimmed = spec.trim();
    let values: Vec<f64> = if trimmed.starts_with('[') {
        serde_json::from_str(trimmed)
            .map_err(|e| invalid(format!("{flag}: not a JSON array of numbers: {e}")))?
    } else {
        trimmed
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| {
                invalid(format!("{flag}: expected comma-separated numbers, got {spec:?}"))
            })?
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(invalid(format!("{flag}: sequence must be nonempty and finite")));
    }
    Ok(values)
}

/// Splits "name:params" into the name and the parameter list.
fn split_law(spec: &str) -> (&str, Vec<&str>) {
    match spec.split_once(':') {
        Some((name, params)) => (name.trim(), params.split(',').map(str::trim).collect()),
        None => (spec.trim(), Vec::new()),
    }
}

fn law_param(flag: &str, spec: &str, params: &[&str], idx: usize, default: Option<f64>) -> Result<f64, Failure> {
    match params.get(idx) {
        Some(raw) => raw.parse().map_err(|_| {
            invalid(format!("{flag}: parameter {:?} in {spec:?} is not a number", raw))
        }),
        None => default.ok_or_else(|| {
            invalid(format!("{flag}: {spec:?} is missing parameter {}", idx + 1))
        }),
    }
}

const ZOO_NAMES: &[&str] = &[
    "semicircle[:sigma]",
    "free-poisson[:lambda]",
    "arcsine",
    "bernoulli",
    "two-point:a,b,w",
    "dirac:a",
    "quartercircular",
    "cauchy[:window]",
];

/// Builds a named measure from "name[:params]".
fn parse_zoo_law(flag: &str, spec: &str) -> Result<Measure, Failure> {
    let (name, params) = split_law(spec);
    let p = |idx, default| law_param(flag, spec, &params, idx, default);
    let measure = match name {
        "semicircle" => make_semicircle(p(0, Some(1.0))?),
        "free-poisson" => make_free_poisson(p(0, Some(1.0))?),
        "arcsine" => make_arcsine(),
        "bernoulli" => Ok(make_bernoulli()),
        "two-point" => make_two_point(p(0, None)?, p(1, None)?, p(2, None)?),
        "dirac" => make_dirac(p(0, None)?),
        "quartercircular" => make_quartercircular(),
        "cauchy" => make_cauchy(p(0, Some(50.0))?),
        other => {
            return Err(invalid(format!(
                "{flag}: unknown law {other:?}; available: {}",
                ZOO_NAMES.join(", ")
            )))
        }
    };
    measure.map_err(|e| blame(flag, e))
}

/// Builds a named closed-form Cauchy transform from "name[:params]".
fn parse_closed_form(flag: &str, spec: &str) -> Result<ClosedForm, Failure> {
    let (name, params) = split_law(spec);
    let p = |idx, default| law_param(flag, spec, &params, idx, default);
    Ok(match name {
        "semicircle" => ClosedForm::Semicircle { sigma: p(0, Some(1.0))? },
        "free-poisson" => ClosedForm::FreePoisson { lambda: p(0, Some(1.0))? },
        "bernoulli" => ClosedForm::Bernoulli,
        "arcsine" => ClosedForm::Arcsine,
        "cauchy" => ClosedForm::Cauchy,
        "dirac" => ClosedForm::Dirac { a: p(0, None)? },
        "bernoulli-power" => ClosedForm::BernoulliPower { t: p(0, None)? },
        other => {
            return Err(invalid(format!(
                "{flag}: unknown closed form {other:?}; available: semicircle[:sigma], \
                 free-poisson[:lambda], bernoulli, arcsine, cauchy, dirac:a, \
                 bernoulli-power:t"
            )))
        }
    })
}

fn read_measure(flag: &str, path: &Path) -> Result<Measure, Failure> {
    let file = File::open(path)
        .map_err(|e| invalid(format!("{flag}: cannot read {}: {e}", path.display())))?;
    serde_json::from_reader(file)
        .map_err(|e| invalid(format!("{flag}: {} is not a valid measure: {e}", path.display())))
}

fn entropy_seed() -> u64 {
    use std::hash::{BuildHasher, Hasher};
    std::collections::hash_map::RandomState::new().build_hasher().finish()
}

const DESK_MAX_N: usize = 2000;
const DESK_MAX_TRIALS: usize = 100;

/// Builds the simulation config, enforcing the desk-scale gate unless
/// `--large` was passed. Returns the config and the seed actually used.
fn simulation_config(sim: &SimArgs) -> Result<(SimulationConfig, u64), Failure> {
    if !sim.large && sim.n > DESK_MAX_N {
        return Err(invalid(format!(
            "--n {} exceeds the desk-scale limit {DESK_MAX_N}; pass --large to run anyway",
            sim.n
        )));
    }
    if !sim.large && sim.trials > DESK_MAX_TRIALS {
        return Err(invalid(format!(
            "--trials {} exceeds the desk-scale limit {DESK_MAX_TRIALS}; pass --large to \
             run anyway",
            sim.trials
        )));
    }
    let seed = sim.seed.unwrap_or_else(entropy_seed);
    let mut cfg = SimulationConfig::new(sim.n, sim.trials, seed)
        .map_err(|e| blame("--n/--trials", e))?;
    cfg.parallel = !sim.serial;
    Ok((cfg, seed))
}

// ----------------------------------------------------------------- output

fn emit_json<T: Serialize>(report: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| numeric(format!("cannot serialize result: {e}")))?;
    println!("{text}");
    Ok(())
}

fn create_out(path: &Path) -> Result<File, Failure> {
    File::create(path)
        .map_err(|e| numeric(format!("--out: cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct TransformReport {
    measure: Measure,
    diagnostics: SolverDiagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<String>,
}

/// Delivers a computed measure: CSV of the density to `--out` or stdout in
/// text mode, a JSON report embedding the solver diagnostics in JSON mode.
/// Atoms don't fit the two-column CSV, so their presence is flagged on
/// stderr rather than dropped silently.
fn deliver_measure(
    format: Format,
    measure: Measure,
    diagnostics: SolverDiagnostics,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let csv_requested = out.is_some() || format == Format::Text;
    if csv_requested && measure.density_grid().is_empty() {
        return Err(invalid(format!(
            "the result is purely atomic ({} atom(s)); an x,density CSV cannot \
             represent it — use --format json without --out",
            measure.atoms().len()
        )));
    }
    if let Some(path) = out {
        write_density_csv(create_out(path)?, measure.density_grid(), measure.density_values())
            .map_err(Failure::from)?;
    }
    if !measure.atoms().is_empty() && !(format == Format::Json && out.is_none()) {
        let mass: f64 = measure.atoms().iter().map(|a| a.w).sum();
        eprintln!(
            "note: the result carries {} atom(s) of total mass {mass}; the CSV holds \
             only the density part — use --format json for the full measure",
            measure.atoms().len()
        );
    }
    match format {
        Format::Json => {
            let report = TransformReport {
                measure,
                diagnostics,
                out: out.map(|p| p.display().to_string()),
            };
            emit_json(&report)
        }
        Format::Text => {
            match out {
                Some(path) => println!(
                    "wrote {} density points to {} (max {} iterations, residual {:.3e})",
                    measure.density_grid().len(),
                    path.display(),
                    diagnostics.max_iterations,
                    diagnostics.max_residual
                ),
                None => {
                    let mut stdout = std::io::stdout().lock();
                    write_density_csv(
                        &mut stdout,
                        measure.density_grid(),
                        measure.density_values(),
                    )
                    .map_err(Failure::from)?;
                    stdout.flush().map_err(|e| numeric(format!("stdout: {e}")))?;
                }
            }
            Ok(())
        }
    }
}

// ------------------------------------------------------------------- nc

fn partition_json(p: &Partition) -> serde_json::Value {
    serde_json::json!(p.blocks())
}

fn run_nc(cmd: NcCommand, format: Format) -> Result<(), Failure> {
    match cmd {
        NcCommand::Enumerate { n } => {
            let all = enumerate_nc(n).map_err(|e| blame("--n", e))?;
            match format {
                Format::Json => emit_json(&serde_json::json!({
                    "n": n,
                    "count": all.len(),
                    "partitions": all.iter().map(partition_json).collect::<Vec<_>>(),
                })),
                Format::Text => {
                    for p in &all {
                        println!("{}", partition_json(p));
                    }
                    Ok(())
                }
            }
        }
        NcCommand::Mobius { n } => {
            let all = enumerate_nc(n).map_err(|e| blame("--n", e))?;
            let full = Partition::full(n).map_err(|e| blame("--n", e))?;
            let rows = all
                .iter()
                .map(|p| Ok((p, mobius(p, &full)?)))
                .collect::<Result<Vec<_>, freeprob::Error>>()
                .map_err(|e| blame("--n", e))?;
            match format {
                Format::Json => emit_json(&serde_json::json!({
                    "n": n,
                    "rows": rows
                        .iter()
                        .map(|(p, m)| serde_json::json!({
                            "partition": partition_json(p),
                            "mobius": m,
                        }))
                        .collect::<Vec<_>>(),
                })),
                Format::Text => {
                    println!("partition\tmobius(pi, 1_{n})");
                    for (p, m) in &rows {
                        println!("{}\t{m}", partition_json(p));
                    }
                    Ok(())
                }
            }
        }
        NcCommand::Kreweras { n, partition } => {
            let pairs: Vec<(Partition, Partition)> = match (&partition, n) {
                (Some(raw), _) => {
                    let blocks: Vec<Vec<usize>> = serde_json::from_str(raw).map_err(|e| {
                        invalid(format!("--partition: not a JSON array of blocks: {e}"))
                    })?;
                    let total: usize = blocks.iter().map(Vec::len).sum();
                    let p = Partition::new(total, blocks)
                        .map_err(|e| blame("--partition", e))?;
                    let k = p.kreweras().map_err(|e| blame("--partition", e))?;
                    vec![(p, k)]
                }
                (None, Some(n)) => {
                    let all = enumerate_nc(n).map_err(|e| blame("--n", e))?;
                    all.into_iter()
                        .map(|p| {
                            let k = p.kreweras()?;
                            Ok((p, k))
                        })
                        .collect::<Result<_, freeprob::Error>>()
                        .map_err(|e| blame("--n", e))?
                }
                (None, None) => {
                    return Err(invalid("kreweras needs either --n or --partition"))
                }
            };
            match format {
                Format::Json => emit_json(&serde_json::json!({
                    "rows": pairs
                        .iter()
                        .map(|(p, k)| serde_json::json!({
                            "partition": partition_json(p),
                            "kreweras": partition_json(k),
                            "blocks": p.num_blocks(),
                            "kreweras_blocks": k.num_blocks(),
                        }))
                        .collect::<Vec<_>>(),
                })),
                Format::Text => {
                    println!("partition\tkreweras");
                    for (p, k) in &pairs {
                        println!("{}\t{}", partition_json(p), partition_json(k));
                    }
                    Ok(())
                }
            }
        }
    }
}

// -------------------------------------------------------------- cumulants

#[derive(Serialize)]
struct SequenceReport {
    cumulants: Vec<f64>,
    moments: Vec<f64>,
}

fn print_sequences(format: Format, report: &SequenceReport) -> Result<(), Failure> {
    match format {
        Format::Json => emit_json(report),
        Format::Text => {
            let join = |v: &[f64]| {
                v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
            };
            println!("cumulants: {}", join(&report.cumulants));
            println!("moments: {}", join(&report.moments));
            Ok(())
        }
    }
}

fn run_cumulants(cmd: CumulantsCommand, format: Format) -> Result<(), Failure> {
    use freeprob::cumulants::{
        cumulants_from_moments, dilate_cumulants, free_convolve_cumulants,
        moments_from_cumulants,
    };
    let report = match cmd {
        CumulantsCommand::ToMoments { cumulants } => {
            let kappa = parse_sequence("--cumulants", &cumulants)?;
            let moments =
                moments_from_cumulants(&kappa).map_err(|e| blame("--cumulants", e))?;
            SequenceReport { cumulants: kappa, moments }
        }
        CumulantsCommand::FromMoments { moments } => {
            let m = parse_sequence("--moments", &moments)?;
            let kappa = cumulants_from_moments(&m).map_err(|e| blame("--moments", e))?;
            SequenceReport { cumulants: kappa, moments: m }
        }
        CumulantsCommand::Convolve { a, b } => {
            let ka = parse_sequence("--a", &a)?;
            let kb = parse_sequence("--b", &b)?;
            let sum = free_convolve_cumulants(&ka, &kb).map_err(|e| blame("--a/--b", e))?;
            let moments = moments_from_cumulants(&sum).map_err(Failure::from)?;
            SequenceReport { cumulants: sum, moments }
        }
        CumulantsCommand::Dilate { cumulants, t } => {
            let kappa = parse_sequence("--cumulants", &cumulants)?;
            let scaled = dilate_cumulants(&kappa, t).map_err(|e| blame("--t", e))?;
            let moments = moments_from_cumulants(&scaled).map_err(Failure::from)?;
            SequenceReport { cumulants: scaled, moments }
        }
    };
    print_sequences(format, &report)
}

// ------------------------------------------------- convolve/power/invert

fn run_convolve(args: ConvolveArgs, format: Format) -> Result<(), Failure> {
    let mu = read_measure("--mu", &args.mu)?;
    let nu = read_measure("--nu", &args.nu)?;
    let opts = ConvolveOptions {
        out_grid: args.grid.as_deref().map(parse_grid).transpose()?,
        eps: parse_eps(&args.eps)?,
        tol: args.tol,
        max_iter: args.max_iter,
        aitken: args.aitken,
    };
    let (measure, diagnostics) =
        free_convolve_with(&mu, &nu, &opts).map_err(Failure::from)?;
    deliver_measure(format, measure, diagnostics, args.out.as_deref())
}

fn run_power(args: PowerArgs, format: Format) -> Result<(), Failure> {
    let mu = read_measure("--mu", &args.mu)?;
    let opts = ConvolveOptions {
        out_grid: args.grid.as_deref().map(parse_grid).transpose()?,
        eps: parse_eps(&args.eps)?,
        tol: args.tol,
        max_iter: args.max_iter,
        aitken: args.aitken,
    };
    let (measure, diagnostics) =
        convolution_power_with(&mu, args.t, &opts).map_err(|e| blame("--t", e))?;
    deliver_measure(format, measure, diagnostics, args.out.as_deref())
}

fn run_invert(args: InvertArgs, format: Format) -> Result<(), Failure> {
    let law = parse_closed_form("--law", &args.law)?;
    let grid = parse_grid(&args.grid)?;
    let (e1, e2) = match parse_eps(&args.eps)? {
        Some(pair) => pair,
        None => {
            // The library's own auto rule: (4h, 2h) from the grid spacing.
            let h = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
            (4.0 * h, 2.0 * h)
        }
    };
    let measure = stieltjes_invert(&law, &grid, &[e1, e2]).map_err(Failure::from)?;
    deliver_measure(format, measure, SolverDiagnostics::default(), args.out.as_deref())
}

// ------------------------------------------------------------------- rmt

#[derive(Serialize)]
struct MomentRow {
    m: usize,
    mean: f64,
    stderr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
}

impl MomentRow {
    fn new(m: usize, est: MomentEstimate, exact: Option<f64>) -> MomentRow {
        let sigma = exact.map(|x| {
            if est.stderr > 0.0 {
                (est.mean - x) / est.stderr
            } else {
                0.0
            }
        });
        MomentRow { m, mean: est.mean, stderr: est.stderr, exact, sigma }
    }
}

#[derive(Serialize)]
struct MomentReport {
    experiment: &'static str,
    n: usize,
    trials: usize,
    seed: u64,
    rows: Vec<MomentRow>,
}

fn print_moment_report(format: Format, report: &MomentReport) -> Result<(), Failure> {
    match format {
        Format::Json => emit_json(report),
        Format::Text => {
            println!("experiment = {}", report.experiment);
            println!("n = {}, trials = {}, seed = {}", report.n, report.trials, report.seed);
            println!("m\tmean\tstderr\texact\tsigma");
            for row in &report.rows {
                let exact = row.exact.map_or_else(|| "-".into(), |x| x.to_string());
                let sigma = row.sigma.map_or_else(|| "-".into(), |s| format!("{s:.2}"));
                println!("{}\t{}\t{}\t{exact}\t{sigma}", row.m, row.mean, row.stderr);
            }
            Ok(())
        }
    }
}

/// Exact GUE moment target: the genus expansion for even orders within its
/// range, zero for odd orders (symmetry), nothing otherwise.
fn gue_exact(m: usize, n: usize) -> Option<f64> {
    if m % 2 == 1 {
        Some(0.0)
    } else if m <= MAX_GENUS_ORDER {
        genus_expansion_exact(m, n).ok()
    } else {
        None
    }
}

fn run_rmt(cmd: RmtCommand, format: Format) -> Result<(), Failure> {
    match cmd {
        RmtCommand::Gue(args) => {
            let (cfg, seed) = simulation_config(&args.sim)?;
            let estimates =
                gue_moments_mc(args.moments, &cfg).map_err(|e| blame("--moments", e))?;
            let rows = estimates
                .into_iter()
                .enumerate()
                .map(|(i, est)| MomentRow::new(i + 1, est, gue_exact(i + 1, cfg.n)))
                .collect();
            print_moment_report(
                format,
                &MomentReport {
                    experiment: "gue",
                    n: cfg.n,
                    trials: cfg.trials,
                    seed,
                    rows,
                },
            )
        }
        RmtCommand::Wigner(args) => {
            let (cfg, seed) = simulation_config(&args.sim)?;
            let entries = match args.entries {
                EntryLaw::Gaussian => WignerEntries::Gaussian,
                EntryLaw::Rademacher => WignerEntries::Rademacher,
            };
            let estimates = wigner_moments_mc(args.moments, entries, &cfg)
                .map_err(|e| blame("--moments", e))?;
            // The Wigner limit is the semicircle: Catalan numbers at even
            // orders, zero at odd — an N→∞ target, not the finite-N value.
            let mut catalan = vec![1.0f64];
            for k in 1..=args.moments / 2 {
                catalan.push(catalan[k - 1] * (2 * (2 * k - 1)) as f64 / (k + 1) as f64);
            }
            let rows = estimates
                .into_iter()
                .enumerate()
                .map(|(i, est)| {
                    let m = i + 1;
                    let exact = if m % 2 == 0 { Some(catalan[m / 2]) } else { Some(0.0) };
                    MomentRow::new(m, est, exact)
                })
                .collect();
            print_moment_report(
                format,
                &MomentReport {
                    experiment: match entries {
                        WignerEntries::Gaussian => "wigner-gaussian",
                        WignerEntries::Rademacher => "wigner-rademacher",
                    },
                    n: cfg.n,
                    trials: cfg.trials,
                    seed,
                    rows,
                },
            )
        }
        RmtCommand::Haar(args) => {
            let (cfg, seed) = simulation_config(&args.sim)?;
            let traces =
                haar_traces_mc(args.powers, &cfg).map_err(|e| blame("--powers", e))?;
            let report = serde_json::json!({
                "experiment": "haar",
                "n": cfg.n,
                "trials": cfg.trials,
                "seed": seed,
                "rows": traces
                    .iter()
                    .enumerate()
                    .map(|(i, (re, im))| serde_json::json!({
                        "k": i + 1,
                        "re_mean": re.mean,
                        "re_stderr": re.stderr,
                        "im_mean": im.mean,
                        "im_stderr": im.stderr,
                    }))
                    .collect::<Vec<_>>(),
            });
            match format {
                Format::Json => emit_json(&report),
                Format::Text => {
                    println!("experiment = haar");
                    println!(
                        "n = {}, trials = {}, seed = {seed} (all powers vanish in \
                         expectation)",
                        cfg.n, cfg.trials
                    );
                    println!("k\tre_mean\tre_stderr\tim_mean\tim_stderr");
                    for (i, (re, im)) in traces.iter().enumerate() {
                        println!(
                            "{}\t{}\t{}\t{}\t{}",
                            i + 1,
                            re.mean,
                            re.stderr,
                            im.mean,
                            im.stderr
                        );
                    }
                    Ok(())
                }
            }
        }
        RmtCommand::RotatedSum(args) => {
            let mu_a = read_measure("--mu-a", &args.mu_a)?;
            let mu_b = read_measure("--mu-b", &args.mu_b)?;
            let (cfg, seed) = simulation_config(&args.sim)?;
            let hist = rotated_sum_spectrum(&mu_a, &mu_b, &cfg, args.bins)
                .map_err(|e| blame("--bins", e))?;
            if let Some(path) = &args.out {
                hist.write_csv(create_out(path)?).map_err(Failure::from)?;
            }
            match format {
                Format::Json => emit_json(&serde_json::json!({
                    "experiment": "rotated-sum",
                    "n": cfg.n,
                    "trials": cfg.trials,
                    "seed": seed,
                    "bins": args.bins,
                    "histogram": hist,
                    "out": args.out.as_ref().map(|p| p.display().to_string()),
                })),
                Format::Text => match &args.out {
                    Some(path) => {
                        println!("seed = {seed}");
                        println!(
                            "wrote {} bins ({} eigenvalues) to {}",
                            hist.counts.len(),
                            hist.total,
                            path.display()
                        );
                        Ok(())
                    }
                    None => {
                        // The CSV owns stdout; the seed still gets printed.
                        eprintln!("seed = {seed}");
                        let mut stdout = std::io::stdout().lock();
                        hist.write_csv(&mut stdout).map_err(Failure::from)?;
                        stdout.flush().map_err(|e| numeric(format!("stdout: {e}")))?;
                        Ok(())
                    }
                },
            }
        }
        RmtCommand::VerifyGenus(args) => {
            if args.m % 2 == 1 || args.m < 2 || args.m > MAX_GENUS_ORDER {
                return Err(invalid(format!(
                    "--m must be even and within 2..={MAX_GENUS_ORDER}, got {}",
                    args.m
                )));
            }
            let sim = SimArgs {
                n: args.n,
                trials: args.trials,
                seed: args.seed,
                large: args.large,
                serial: args.serial,
            };
            let (cfg, seed) = simulation_config(&sim)?;
            let estimates = gue_moments_mc(args.m, &cfg).map_err(|e| blame("--m", e))?;
            let rows: Vec<MomentRow> = (2..=args.m)
                .step_by(2)
                .map(|m| {
                    let exact = genus_expansion_exact(m, cfg.n).map_err(Failure::from)?;
                    Ok(MomentRow::new(m, estimates[m - 1], Some(exact)))
                })
                .collect::<Result<_, Failure>>()?;
            let worst = rows
                .iter()
                .map(|r| r.sigma.unwrap_or(0.0).abs())
                .fold(0.0f64, f64::max);
            let consistent = worst <= 5.0;
            let report = serde_json::json!({
                "experiment": "verify-genus",
                "n": cfg.n,
                "trials": cfg.trials,
                "seed": seed,
                "rows": rows,
                "worst_sigma": worst,
                "consistent": consistent,
            });
            match format {
                Format::Json => emit_json(&report)?,
                Format::Text => {
                    println!("experiment = verify-genus");
                    println!("n = {}, trials = {}, seed = {seed}", cfg.n, cfg.trials);
                    println!("m\tmonte_carlo\tstderr\texact\tsigma");
                    for row in &rows {
                        println!(
                            "{}\t{}\t{}\t{}\t{:.2}",
                            row.m,
                            row.mean,
                            row.stderr,
                            row.exact.unwrap_or(f64::NAN),
                            row.sigma.unwrap_or(0.0)
                        );
                    }
                    println!(
                        "verdict: worst deviation {worst:.2} standard errors — {}",
                        if consistent { "consistent within 5 sigma" } else { "INCONSISTENT" }
                    );
                }
            }
            if consistent {
                Ok(())
            } else {
                Err(numeric(format!(
                    "Monte Carlo deviates from the exact genus expansion by {worst:.2} \
                     standard errors (limit 5)"
                )))
            }
        }
    }
}

// ------------------------------------------------------------------- zoo

fn run_zoo(args: ZooArgs) -> Result<(), Failure> {
    let Some(spec) = &args.law else {
        println!("available laws:");
        for name in ZOO_NAMES {
            println!("  {name}");
        }
        return Ok(());
    };
    let measure = parse_zoo_law("--law", spec)?;
    let json = serde_json::to_string_pretty(&measure)
        .map_err(|e| numeric(format!("cannot serialize measure: {e}")))?;
    match &args.out {
        Some(path) => {
            let mut file = create_out(path)?;
            writeln!(file, "{json}")
                .map_err(|e| numeric(format!("--out: cannot write {}: {e}", path.display())))?;
            println!("wrote {spec} to {}", path.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_parse_with_signs_and_reject_malformed_specs() {
        let grid = parse_grid("-4:4:5").unwrap();
        assert_eq!(grid, vec![-4.0, -2.0, 0.0, 2.0, 4.0]);
        for bad in ["4:-4:5", "1:2", "a:b:c", "1:2:1"] {
            let err = parse_grid(bad).unwrap_err();
            assert_eq!(err.code, 2);
            assert!(err.message.contains("--grid"), "{}", err.message);
        }
    }

    #[test]
    fn eps_schedules_parse_auto_and_pairs() {
        assert_eq!(parse_eps("auto").unwrap(), None);
        assert_eq!(parse_eps("0.04,0.02").unwrap(), Some((0.04, 0.02)));
        for bad in ["0.02,0.04", "0.01", "x,y", "0.0,0.0"] {
            assert_eq!(parse_eps(bad).unwrap_err().code, 2);
        }
    }

    #[test]
    fn sequences_parse_from_both_syntaxes() {
        assert_eq!(parse_sequence("--a", "1, 2.5,-3").unwrap(), vec![1.0, 2.5, -3.0]);
        assert_eq!(parse_sequence("--a", "[0, 1, 0, 2]").unwrap(), vec![0.0, 1.0, 0.0, 2.0]);
        let err = parse_sequence("--moments", "1,,2").unwrap_err();
        assert!(err.message.contains("--moments"));
        assert_eq!(parse_sequence("--a", "[]").unwrap_err().code, 2);
    }

    #[test]
    fn law_specs_cover_defaults_parameters_and_unknown_names() {
        assert!(parse_zoo_law("--law", "semicircle").is_ok());
        assert!(parse_zoo_law("--law", "semicircle:2.0").is_ok());
        assert!(parse_zoo_law("--law", "two-point:-0.5,1.5,0.25").is_ok());
        let err = parse_zoo_law("--law", "two-point:1.0").unwrap_err();
        assert!(err.message.contains("missing parameter"), "{}", err.message);
        let err = parse_zoo_law("--law", "wigner").unwrap_err();
        assert!(err.message.contains("available"), "{}", err.message);
        assert!(matches!(
            parse_closed_form("--law", "bernoulli-power:2.5"),
            Ok(ClosedForm::BernoulliPower { .. })
        ));
        assert_eq!(parse_closed_form("--law", "two-point:1,2,0.5").unwrap_err().code, 2);
    }

    #[test]
    fn error_mapping_tracks_the_library_split() {
        assert_eq!(Failure::from(freeprob::Error::Invalid("x".into())).code, 2);
        assert_eq!(Failure::from(freeprob::Error::Numeric("x".into())).code, 1);
        let blamed = blame("--n", freeprob::Error::Invalid("too big".into()));
        assert!(blamed.message.starts_with("--n:"), "{}", blamed.message);
    }

    #[test]
    fn gue_exact_targets_cover_odd_even_and_out_of_range_orders() {
        assert_eq!(gue_exact(3, 10), Some(0.0));
        assert_eq!(gue_exact(4, 10), Some(genus_expansion_exact(4, 10).unwrap()));
        assert!((gue_exact(4, 10).unwrap() - 2.01).abs() < 1e-12);
        assert_eq!(gue_exact(16, 10), None);
    }
}
