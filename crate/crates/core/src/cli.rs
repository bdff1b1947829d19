//! Command-line front end.
//!
//! Every option can also be given in an `ekpme.conf` file in the working
//! directory (`key = value` per line, `#` starts a comment, keys are the
//! long flag names without dashes). Flags win over the file, the file wins
//! over built-in defaults. Exit codes: 0 success, 1 invalid input or I/O
//! failure, 2 numerical failure.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{aitken_sweep, ek_error_curve, front_error_table, time_ratio, Reference};
use crate::diffusivity::DiffusivityModel;
use crate::ek::{EkParams, Rule};
use crate::error::Error;
use crate::output;
use crate::solver::{Regularization, Solver, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

pub const CONFIG_FILE: &str = "ekpme.conf";
pub const THREADS_ENV: &str = "EKPME_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ekpme", version, about = "Self-similar solutions of the time-fractional porous medium equation")]
pub struct Cli {
    /// Configuration file (default: ./ekpme.conf when present)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shoot for the wetting front and write the profile
    Solve(SolveArgs),
    /// Maximal operator error against h on the analytic test pair
    EkError(EkErrorArgs),
    /// Aitken order estimates of the front position
    Order(OrderArgs),
    /// Front errors against a reference value
    Front(FrontArgs),
    /// Trapezoid over rectangle timing ratio
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// power:m=<float> or exp
    #[arg(long)]
    pub diff: Option<String>,
    /// Boundary value M
    #[arg(long, allow_hyphen_values = true)]
    pub mass: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    /// rect or trap
    #[arg(long)]
    pub rule: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long = "B")]
    pub b: Option<String>,
    /// C=<float>,delta=<float>
    #[arg(long)]
    pub regularize: Option<String>,
}

#[derive(Debug, Args)]
pub struct EkErrorArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub mu: Option<String>,
    /// 2^-4..2^-9, a single 2^-k, or a comma list
    #[arg(long)]
    pub h: Option<String>,
    /// both, rect or trap
    #[arg(long)]
    pub rule: Option<String>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    #[arg(long = "alpha-list")]
    pub alpha_list: Option<String>,
    /// Omit to run both power:m=1 and exp
    #[arg(long)]
    pub diff: Option<String>,
    #[arg(long = "n-base")]
    pub n_base: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub mass: Option<String>,
    #[arg(long)]
    pub rule: Option<String>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FrontArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub diff: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub mass: Option<String>,
    #[arg(long = "n-list")]
    pub n_list: Option<String>,
    /// auto or a reference value
    #[arg(long = "ref")]
    pub reference: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long = "alpha-list")]
    pub alpha_list: Option<String>,
    #[arg(long)]
    pub diff: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a command, mapped onto an exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Convergence(_)
            | Error::ScalarSolve { .. }
            | Error::Bracket(_)
            | Error::DivisionByZero(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// `key = value` settings from a configuration file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

const CONFIG_KEYS: [&str; 16] = [
    "alpha", "diff", "mass", "n", "rule", "eps", "out", "A", "B", "regularize", "mu", "h", "alpha-list",
    "n-base", "n-list", "ref",
];

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = HashMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("{CONFIG_FILE} line {}: expected 'key = value'", k + 1)))?;
            let key = key.trim().replace('_', "-");
            let key = if key == "a" || key == "b" { key.to_uppercase() } else { key };
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("{CONFIG_FILE} line {}: unknown key '{key}'", k + 1)));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Resolves one option: flag, then config file, then default.
fn pick<T>(flag: Option<&str>, conf: &ConfigFile, key: &str, default: T) -> CliResult<T>
where
    T: FromStr,
    T::Err: Display,
{
    match flag.or_else(|| conf.get(key)) {
        None => Ok(default),
        Some(s) => s
            .parse()
            .map_err(|e| CliError::Usage(format!("--{key}: cannot parse '{s}': {e}"))),
    }
}

fn pick_path(flag: Option<PathBuf>, conf: &ConfigFile, default: &str) -> PathBuf {
    flag.or_else(|| conf.get("out").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(default))
}

fn check_alpha(alpha: f64, flag: &str) -> CliResult<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{flag}: alpha must lie in (0,1], got {alpha}")))
    }
}

fn check_rule(alpha: f64, rule: Rule) -> CliResult<()> {
    if rule == Rule::Trapezoid && alpha >= 1.0 {
        Err(CliError::Usage("--rule: the trapezoid rule requires alpha < 1".into()))
    } else {
        Ok(())
    }
}

fn parse_list<T>(s: &str, flag: &str) -> CliResult<Vec<T>>
where
    T: FromStr,
    T::Err: Display,
{
    let items: CliResult<Vec<T>> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|e| CliError::Usage(format!("--{flag}: cannot parse '{}': {e}", t.trim())))
        })
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(CliError::Usage(format!("--{flag}: empty list")));
    }
    Ok(items)
}

/// Parses `2^-a..2^-b`, `2^-k`, or a comma separated list of spacings.
pub fn parse_h_spec(s: &str) -> Result<Vec<f64>, String> {
    fn pow_token(t: &str) -> Result<i32, String> {
        t.trim()
            .strip_prefix("2^")
            .and_then(|e| e.parse::<i32>().ok())
            .ok_or_else(|| format!("expected 2^<int>, got '{}'", t.trim()))
    }
    let hs: Vec<f64> = if let Some((lo, hi)) = s.split_once("..") {
        let (a, b) = (pow_token(lo)?, pow_token(hi)?);
        let (from, to) = (a.min(b), a.max(b));
        (from..=to).rev().map(|k| 2f64.powi(k)).collect()
    } else {
        s.split(',')
            .map(|t| {
                let t = t.trim();
                if t.starts_with("2^") {
                    pow_token(t).map(|k| 2f64.powi(k))
                } else {
                    t.parse::<f64>().map_err(|e| format!("'{t}': {e}"))
                }
            })
            .collect::<Result<_, _>>()?
    };
    if let Some(bad) = hs.iter().find(|h| !(**h > 0.0 && **h < 1.0)) {
        return Err(format!("every h must lie in (0,1), got {bad}"));
    }
    if hs.is_empty() {
        return Err("no spacing given".into());
    }
    Ok(hs)
}

fn parse_regularization(s: &str) -> Result<Regularization, String> {
    let mut reg = Regularization::default();
    for part in s.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("expected C=<float>,delta=<float>, got '{part}'"))?;
        let v: f64 = v.trim().parse().map_err(|e| format!("'{}': {e}", v.trim()))?;
        match k.trim() {
            "C" | "c" => reg.c = v,
            "delta" => reg.delta = v,
            other => return Err(format!("unknown regularization key '{other}'")),
        }
    }
    Ok(reg)
}

/// Sweep parallelism from `EKPME_THREADS`; unset or 0 means sequential.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0)
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> CliResult<()> {
    let conf = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => {
            let default = Path::new(CONFIG_FILE);
            if default.exists() {
                ConfigFile::load(default)?
            } else {
                ConfigFile::default()
            }
        }
    };
    match cli.command {
        Command::Solve(a) => cmd_solve(a, &conf),
        Command::EkError(a) => cmd_ek_error(a, &conf),
        Command::Order(a) => cmd_order(a, &conf),
        Command::Front(a) => cmd_front(a, &conf),
        Command::Bench(a) => cmd_bench(a, &conf),
    }
}

fn parse_model(s: &str) -> CliResult<DiffusivityModel> {
    s.parse().map_err(|e: Error| CliError::Usage(format!("--diff: {e}")))
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or("profile".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}_summary.csv"))
}

pub fn cmd_solve(a: SolveArgs, conf: &ConfigFile) -> CliResult<()> {
    let alpha: f64 = pick(a.alpha.as_deref(), conf, "alpha", 0.5)?;
    check_alpha(alpha, "alpha")?;
    let model = parse_model(&pick(a.diff.as_deref(), conf, "diff", "power:m=1".to_string())?)?;
    let mass: f64 = pick(a.mass.as_deref(), conf, "mass", 1.0)?;
    if !(mass > 0.0) {
        return Err(CliError::Usage(format!("--mass: M must be positive, got {mass}")));
    }
    let n: usize = pick(a.n.as_deref(), conf, "n", 256)?;
    let rule: Rule = pick(a.rule.as_deref(), conf, "rule", Rule::Rectangle)?;
    check_rule(alpha, rule)?;
    let eps: f64 = pick(a.eps.as_deref(), conf, "eps", 1e-8)?;
    let big_a: f64 = pick(a.a.as_deref(), conf, "A", 1.0 - alpha)?;
    let big_b: f64 = pick(a.b.as_deref(), conf, "B", alpha / 2.0)?;
    let reg = match a.regularize.as_deref().or_else(|| conf.get("regularize")) {
        None => None,
        Some(s) => Some(parse_regularization(s).map_err(|e| CliError::Usage(format!("--regularize: {e}")))?),
    };
    let out = pick_path(a.out, conf, "profile.csv");

    EkParams::with_constants(alpha, big_a, big_b, rule).map_err(|e| CliError::Usage(format!("--A/--B: {e}")))?;
    let config = SolverConfig::new(alpha, n, rule)
        .map_err(|e| CliError::Usage(format!("--n: {e}")))?
        .with_constants(big_a, big_b)?
        .with_eps(eps)
        .map_err(|e| CliError::Usage(format!("--eps: {e}")))?
        .with_regularization(reg)
        .map_err(|e| CliError::Usage(format!("--regularize: {e}")))?;
    let outcome = Solver::new(config)?.shoot(mass, &model)?;
    output::write_profile(output::create_file(&out)?, &outcome.profile)?;
    output::write_summary(output::create_file(&summary_path(&out))?, &outcome)?;
    println!("eta_star,residual,iterations");
    println!("{}", outcome.summary_line());
    if outcome.profile.clamped > 0 {
        eprintln!(
            "warning: {} negative right-hand sides were clamped to zero",
            outcome.profile.clamped
        );
    }
    Ok(())
}

pub fn cmd_ek_error(a: EkErrorArgs, conf: &ConfigFile) -> CliResult<()> {
    let alpha: f64 = pick(a.alpha.as_deref(), conf, "alpha", 0.5)?;
    check_alpha(alpha, "alpha")?;
    let mu: f64 = pick(a.mu.as_deref(), conf, "mu", 2.0)?;
    let hs = parse_h_spec(a.h.as_deref().or_else(|| conf.get("h")).unwrap_or("2^-4..2^-9"))
        .map_err(|e| CliError::Usage(format!("--h: {e}")))?;
    let rules = match a.rule.as_deref().or_else(|| conf.get("rule")).unwrap_or("both") {
        "both" => vec![Rule::Rectangle, Rule::Trapezoid],
        s => vec![s.parse::<Rule>().map_err(|e| CliError::Usage(format!("--rule: {e}")))?],
    };
    for &r in &rules {
        check_rule(alpha, r)?;
    }
    let dir = pick_path(a.out, conf, ".");
    let mut summary = String::from("rule,slope\n");
    for rule in rules {
        let curve = ek_error_curve(alpha, mu, &hs, rule)?;
        let path = dir.join(format!("ek_error_{}.csv", rule.label()));
        output::write_error_curve(output::create_file(&path)?, &curve)?;
        let slope = curve.slope.map_or("NA".to_string(), |s| format!("{s:.6}"));
        println!("{}: slope {slope} -> {}", rule.label(), path.display());
        summary.push_str(&format!("{},{slope}\n", rule.label()));
    }
    std::fs::write(dir.join("ek_error_summary.csv"), summary).map_err(Error::from)?;
    Ok(())
}

pub fn cmd_order(a: OrderArgs, conf: &ConfigFile) -> CliResult<()> {
    let alphas: Vec<f64> = parse_list(
        a.alpha_list.as_deref().or_else(|| conf.get("alpha-list")).unwrap_or("0.1,0.25,0.5,0.75,0.9"),
        "alpha-list",
    )?;
    let rule: Rule = pick(a.rule.as_deref(), conf, "rule", Rule::Rectangle)?;
    for &al in &alphas {
        check_alpha(al, "alpha-list")?;
        check_rule(al, rule)?;
    }
    let models: Vec<String> = match a.diff.as_deref().or_else(|| conf.get("diff")) {
        Some(s) => vec![s.to_string()],
        None => vec!["power:m=1".into(), "exp".into()],
    };
    let n_base: usize = pick(a.n_base.as_deref(), conf, "n-base", 300)?;
    if n_base < 4 {
        return Err(CliError::Usage(format!("--n-base: must be at least 4, got {n_base}")));
    }
    let mass: f64 = pick(a.mass.as_deref(), conf, "mass", 1.0)?;
    let dir = pick_path(a.out, conf, ".");
    let threads = threads_from_env();
    for spec in models {
        let model = parse_model(&spec)?;
        let orders = aitken_sweep(&alphas, &model, n_base, mass, rule, threads)?;
        let tag = spec.replace([':', '='], "_");
        let path = dir.join(format!("order_{tag}.csv"));
        output::write_orders(output::create_file(&path)?, &orders)?;
        for o in &orders {
            println!("{spec} alpha={} order={:.4}", o.alpha, o.order);
        }
    }
    Ok(())
}

pub fn cmd_front(a: FrontArgs, conf: &ConfigFile) -> CliResult<()> {
    let alpha: f64 = pick(a.alpha.as_deref(), conf, "alpha", 1.0)?;
    check_alpha(alpha, "alpha")?;
    let model = parse_model(&pick(a.diff.as_deref(), conf, "diff", "power:m=1".to_string())?)?;
    let mass: f64 = pick(a.mass.as_deref(), conf, "mass", 1.0)?;
    let n_list: Vec<usize> = parse_list(
        a.n_list.as_deref().or_else(|| conf.get("n-list")).unwrap_or("10,50,100,200,500,1000"),
        "n-list",
    )?;
    if let Some(bad) = n_list.iter().find(|&&n| n < 4) {
        return Err(CliError::Usage(format!("--n-list: every N must be at least 4, got {bad}")));
    }
    let reference: Reference = pick(a.reference.as_deref(), conf, "ref", Reference::default())?;
    let out = pick_path(a.out, conf, "front.csv");
    let table = front_error_table(&n_list, alpha, &model, mass, reference, threads_from_env())?;
    output::write_front_table(output::create_file(&out)?, &table)?;
    println!("reference eta* = {:.12}", table.reference);
    for r in &table.rows {
        println!("N={:<6} eta*={:.12} error={:.3e}", r.n, r.eta_star, r.error);
    }
    Ok(())
}

pub fn cmd_bench(a: BenchArgs, conf: &ConfigFile) -> CliResult<()> {
    let n: usize = pick(a.n.as_deref(), conf, "n", 256)?;
    if n < 4 {
        return Err(CliError::Usage(format!("--n: must be at least 4, got {n}")));
    }
    let alphas: Vec<f64> = parse_list(
        a.alpha_list.as_deref().or_else(|| conf.get("alpha-list")).unwrap_or("0.1,0.5,0.9"),
        "alpha-list",
    )?;
    for &al in &alphas {
        check_alpha(al, "alpha-list")?;
        check_rule(al, Rule::Trapezoid)?;
    }
    let model = parse_model(&pick(a.diff.as_deref(), conf, "diff", "power:m=2".to_string())?)?;
    let out = pick_path(a.out, conf, "bench.csv");
    let mut ratios = Vec::new();
    for alpha in alphas {
        let tau = time_ratio(alpha, &model, n)?;
        println!("alpha={alpha} tau={tau:.2}");
        ratios.push((alpha, tau));
    }
    output::write_time_ratios(output::create_file(&out)?, &ratios)?;
    Ok(())
}
