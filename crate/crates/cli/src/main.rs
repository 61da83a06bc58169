//! `eisrec`: print exact q-expansions and run the verification suites.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or domain error, 3 internal error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eisrec::arith::{self, Rat};
use eisrec::eisenstein::{self, TorsionIndex};
use eisrec::suites::{self, SuiteConfig};
use eisrec::{Error, QExpansion};

#[derive(Parser)]
#[command(name = "eisrec", version, about = "Exact Eisenstein q-expansions and reciprocity checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the q-expansion of one object.
    Qexp(QexpArgs),
    /// Run a verification suite and emit its JSON report.
    Verify(Box<VerifyArgs>),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    #[value(name = "F")]
    F,
    #[value(name = "Fu")]
    Fu,
    #[value(name = "E")]
    E,
    #[value(name = "theta")]
    Theta,
    #[value(name = "siegel_c")]
    SiegelC,
    #[value(name = "siegel_u")]
    SiegelU,
}

#[derive(Args)]
struct QexpArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long = "L", default_value_t = 1)]
    l: u64,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    a: i64,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    b: i64,
    /// Exponent of x1 = q^s in theta and E.
    #[arg(long, default_value_t = 1)]
    s: u64,
    #[arg(long, default_value_t = 7)]
    c: i64,
    #[arg(long, default_value_t = 7)]
    u: i64,
    #[arg(long, default_value_t = 5)]
    p: u64,
    /// q-precision (relative to the leading exponent for Siegel units).
    #[arg(long, default_value = "2")]
    prec: String,
    /// Use the E_2 constant at (0, 0) in weight 2.
    #[arg(long)]
    hecke_e2: bool,
    /// Print the JSON encoding instead of the formula.
    #[arg(long)]
    json: bool,
}

fn parse_pair(x: &str) -> Result<(i64, i64), String> {
    let bad = || format!("pair {x:?} is not of the form a:b");
    let (a, b) = x.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_parser = suites::SUITES)]
    suite: String,
    /// TOML file with suite parameters; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    qprec: Option<String>,
    #[arg(long)]
    padic_prec: Option<i64>,
    #[arg(long)]
    t_trunc: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u64>>,
    #[arg(long = "D", value_delimiter = ',')]
    refinements: Option<Vec<u64>>,
    #[arg(long = "c", value_delimiter = ',')]
    c_values: Option<Vec<i64>>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long = "M")]
    big_m: Option<u64>,
    #[arg(long = "N")]
    n_level: Option<u64>,
    #[arg(long)]
    u: Option<i64>,
    /// Index pairs a:b, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    pairs: Option<Vec<(i64, i64)>>,
    #[arg(long, requires = "beta")]
    alpha: Option<i64>,
    #[arg(long, requires = "alpha")]
    beta: Option<i64>,
    #[arg(long = "n", value_delimiter = ',')]
    depths: Option<Vec<u32>>,
    #[arg(long)]
    nmax: Option<u32>,
    #[arg(long)]
    target: Option<i64>,
    #[arg(long)]
    slack: Option<i64>,
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Parse(_) => Failure::Usage(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

fn parse_prec(s: &str) -> Result<Rat, Failure> {
    match arith::parse_rat(s) {
        Some(r) if r > Rat::from_integer(0.into()) => Ok(r),
        _ => Err(Failure::Usage(format!("precision must be a positive rational, got {s:?}"))),
    }
}

fn qexp(args: &QexpArgs) -> Result<QExpansion, Failure> {
    let prec = parse_prec(&args.prec)?;
    if args.l == 0 {
        return Err(Failure::Usage("L must be positive".into()));
    }
    let idx = TorsionIndex::new(args.l, args.a, args.b);
    let x = match args.kind {
        Kind::F => eisenstein::eisenstein_f(args.k, &idx, &prec, args.hecke_e2)?,
        Kind::Fu => eisenstein::eisenstein_f_u(args.k, args.u, args.p, &idx, &prec)?,
        Kind::E => eisenstein::e_series_at_lift(args.k, args.s, args.l, args.a, args.b, &prec)?,
        Kind::Theta => eisenstein::theta_at_lift(args.s, args.l, args.a, args.b, &prec)?,
        Kind::SiegelC => eisenstein::siegel_unit_c(args.c, &idx, &prec)?,
        Kind::SiegelU => eisenstein::siegel_unit_u(args.u, args.p, &idx, &prec)?,
    };
    Ok(x)
}

fn load_config(args: &VerifyArgs) -> Result<SuiteConfig, Failure> {
    let mut cfg = SuiteConfig::defaults(&args.suite)?;
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let overlay: toml::Table =
            toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let mut base = toml::Table::try_from(&cfg).map_err(|e| Failure::Internal(e.to_string()))?;
        for (k, v) in overlay {
            if !base.contains_key(&k) {
                return Err(Failure::Usage(format!("unknown config key {k:?}")));
            }
            base.insert(k, v);
        }
        cfg = toml::Value::Table(base).try_into().map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    macro_rules! set {
        ($($flag:ident => $field:ident),*) => {$(
            if let Some(v) = &args.$flag {
                cfg.$field = v.clone();
            }
        )*};
    }
    set!(p => p, qprec => q_prec, padic_prec => padic_prec, t_trunc => t_trunc, k => weights,
         levels => levels, refinements => refinements, c_values => c_values, m => m, big_m => big_m,
         n_level => n_level, u => u, pairs => pairs, depths => depths, nmax => n_max,
         target => t_target, slack => cauchy_slack);
    if let (Some(a), Some(b)) = (args.alpha, args.beta) {
        cfg.pairs = vec![(a, b)];
    }
    Ok(cfg)
}

fn verify(args: &VerifyArgs) -> Result<bool, Failure> {
    let cfg = load_config(args)?;
    let report = suites::run_suite(&args.suite, &cfg)?;
    let json = report.to_json_string();
    match &args.out {
        Some(path) => fs::write(path, &json).map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))?,
        None => print!("{json}"),
    }
    let s = &report.summary;
    eprintln!(
        "{} {}: {} passed, {} failed, {} skipped",
        if report.pass { "PASS" } else { "FAIL" },
        report.suite,
        s.passed,
        s.failed,
        s.skipped
    );
    Ok(report.pass)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.cmd {
        Cmd::Qexp(args) => {
            let x = qexp(&args)?;
            if args.json {
                println!("{}", x.to_json());
            } else {
                println!("{}", x.display_terms());
            }
            Ok(true)
        }
        Cmd::Verify(args) => verify(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(true)) => ExitCode::SUCCESS,
        Ok(Ok(false)) => ExitCode::from(1),
        Ok(Err(Failure::Usage(m))) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Ok(Err(Failure::Internal(m))) => {
            eprintln!("internal error: {m}");
            ExitCode::from(3)
        }
        Err(_) => ExitCode::from(3),
    }
}
