use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entrobound::conditions::DEFAULT_WINDOW;
use entrobound::Result;
use entrobound_cli::commands::{self, BoundArgs, OracleArgs};
use entrobound_cli::grammar::{parse_exponent, parse_n_grid};
use entrobound_cli::report::{Format, Report};
use entrobound_cli::{exit_code, report_exit_code, table1, verify, EXIT_INPUT};

/// Entropy-number bounds for diagonal operators between sequence spaces.
#[derive(Parser)]
#[command(name = "entrobound", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    output: Format,
}

#[derive(Args)]
struct Exponents {
    /// Source exponent: a positive decimal or `inf`.
    #[arg(long)]
    p: String,
    /// Target exponent: a positive decimal or `inf`.
    #[arg(long)]
    q: String,
}

#[derive(Subcommand)]
enum Command {
    /// Upper and lower bounds on e_n(D_sigma) over an n-grid.
    Bound {
        /// Sequence spec, e.g. `geom:c=1,b=2` or `file:weights.txt`.
        #[arg(long)]
        sigma: String,
        #[command(flatten)]
        exps: Exponents,
        /// `1,16,256` or `2^a..2^b`.
        #[arg(long)]
        n: String,
        /// Comma-separated forms: ub, lb, ub-const, opt-exp, opt-alp, opt-amp.
        #[arg(long)]
        forms: Option<String>,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
    },
    /// Regularity conditions of the sequence for the given branch.
    Classify {
        #[arg(long)]
        sigma: String,
        #[command(flatten)]
        exps: Exponents,
        /// Scan window N.
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: u64,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
    },
    /// Tail sums tau_k = (sum_{j>=k} sigma_j^r)^{1/r}.
    Tail {
        #[arg(long)]
        sigma: String,
        /// Tail exponent r: a positive decimal.
        #[arg(long)]
        r: String,
        /// Indices k, in n-grid syntax.
        #[arg(long)]
        k: String,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
    },
    /// Brute-force covering numbers and entropy brackets in dimension k <= 3.
    Oracle {
        #[arg(long)]
        sigma: String,
        #[command(flatten)]
        exps: Exponents,
        /// Leading terms of sigma to keep.
        #[arg(long)]
        k: Option<usize>,
        /// Bracket e_n for these n (n-grid syntax).
        #[arg(long)]
        n: Option<String>,
        /// Covering estimates at these radii.
        #[arg(long)]
        eps: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Bisection steps per bracket side.
        #[arg(long, default_value_t = 24)]
        steps: u32,
    },
    /// Runs the invariant suite; exit status 5 on the first violated check.
    Verify {
        /// Smaller grids and sample sizes.
        #[arg(long)]
        quick: bool,
    },
    /// The condition matrix of the exponential-type families.
    Table1 {
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: u64,
    },
}

/// A report plus whether it represents a failed check.
fn execute(command: &Command) -> Result<(Report, Option<serde_json::Value>)> {
    let ok = |r: Report| Ok((r, None));
    match command {
        Command::Bound { sigma, exps, n, forms, rtol } => ok(commands::bound(&BoundArgs {
            sigma,
            p: parse_exponent(&exps.p)?,
            q: parse_exponent(&exps.q)?,
            n_grid: &parse_n_grid(n)?,
            forms: forms.as_deref(),
            rtol: *rtol,
        })?),
        Command::Classify { sigma, exps, window, rtol } => {
            ok(commands::classify_cmd(sigma, parse_exponent(&exps.p)?, parse_exponent(&exps.q)?, *window, *rtol)?)
        }
        Command::Tail { sigma, r, k, rtol } => {
            ok(commands::tail_cmd(sigma, parse_exponent(r)?, &parse_n_grid(k)?, *rtol)?)
        }
        Command::Oracle { sigma, exps, k, n, eps, seed, steps } => ok(commands::oracle_cmd(&OracleArgs {
            sigma,
            p: parse_exponent(&exps.p)?,
            q: parse_exponent(&exps.q)?,
            k: *k,
            n_grid: &n.as_deref().map(parse_n_grid).transpose()?.unwrap_or_default(),
            eps: &eps.as_deref().map(commands::parse_eps_list).transpose()?.unwrap_or_default(),
            seed: *seed,
            steps: *steps,
        })?),
        Command::Verify { quick } => verify::report(*quick),
        Command::Table1 { window } => {
            let (report, agrees) = table1::run(*window, 1e-10)?;
            let failure = (!agrees).then(
                || serde_json::json!({ "check": "table1", "detail": "a verdict disagrees with the expected matrix" }),
            );
            Ok((report, failure))
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var("ENTROBOUND_THREADS") else { return Ok(()) };
    let threads: usize = match raw.trim().parse() {
        Ok(t) if t > 0 => t,
        _ => return Err(format!("ENTROBOUND_THREADS must be a positive integer, got '{raw}'")),
    };
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_INPUT as u8);
    }
    let code = match execute(&cli.command) {
        Ok((report, failure)) => {
            let mut out = std::io::stdout().lock();
            // a closed pipe is not worth a panic
            let _ = out.write_all(report.render(cli.output).as_bytes());
            if let Some(counterexample) = &failure {
                eprintln!("{counterexample}");
            }
            report_exit_code(failure.as_ref())
        }
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    };
    ExitCode::from(code as u8)
}
