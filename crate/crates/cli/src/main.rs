use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pathcount_cli::{cmd_check, cmd_count, cmd_eval, exit, CliError, Config};

/// Exact path counting for computation trees and verification suites for
/// counting constructions.
#[derive(Parser, Debug)]
#[command(name = "pathcount", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count the paths of a machine expression.
    Eval {
        machine_file: PathBuf,
        /// File whose contents are the machine input.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run a verification suite and write its report.
    Check,
    /// Print the exact count of a problem instance.
    Count { problem_file: PathBuf },
}

/// Overrides for the configuration file, using the same key names.
#[derive(Args, Debug)]
struct Options {
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Corpus size.
    #[arg(long, global = true)]
    count: Option<String>,
    #[arg(long, global = true)]
    max_depth: Option<String>,
    #[arg(long, global = true)]
    max_fanout: Option<String>,
    /// Moduli, e.g. 2-7 or 2,3,5.
    #[arg(long, global = true)]
    k: Option<String>,
    /// Normal-form depths, e.g. 4-8.
    #[arg(long, global = true)]
    p: Option<String>,
    /// Enumeration caps, e.g. vars=20,vertices=16,subtree-depth=20,scaling=64.
    #[arg(long, global = true)]
    caps: Option<String>,
    /// Random instances per problem family.
    #[arg(long, global = true)]
    instances: Option<String>,
    #[arg(long, global = true)]
    report_dir: Option<String>,
    /// Suite to run, or "all".
    #[arg(long, global = true)]
    proposition: Option<String>,
    /// Reading of graph files: perf-match or indep-sets.
    #[arg(long, global = true)]
    problem: Option<String>,
    /// Swap each construction for a broken one; the suite must fail.
    #[arg(long, global = true)]
    negative_control: bool,
}

impl Options {
    fn config(&self) -> Result<Config, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                Config::parse(&text)?
            }
            None => Config::default(),
        };
        let flags = [
            ("seed", &self.seed),
            ("count", &self.count),
            ("max-depth", &self.max_depth),
            ("max-fanout", &self.max_fanout),
            ("k", &self.k),
            ("p", &self.p),
            ("caps", &self.caps),
            ("instances", &self.instances),
            ("report-dir", &self.report_dir),
            ("proposition", &self.proposition),
            ("problem", &self.problem),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)
                    .map_err(|message| CliError::Flag(format!("--{key}: {message}")))?;
            }
        }
        if self.negative_control {
            cfg.suite.negative_control = true;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let cfg = cli.options.config()?;
    match cli.command {
        Command::Eval { machine_file, input } => {
            println!("{}", cmd_eval(&machine_file, input.as_deref(), &cfg)?);
            Ok(exit::PASS)
        }
        Command::Count { problem_file } => {
            println!("{}", cmd_count(&problem_file, &cfg)?);
            Ok(exit::PASS)
        }
        Command::Check => {
            let mut passed = true;
            for written in cmd_check(&cfg)? {
                println!("{}", written.report.summary());
                for line in written.report.failures().take(5) {
                    println!("  {line}");
                }
                eprintln!("report: {}", written.path.display());
                passed &= written.report.passed();
            }
            Ok(if passed { exit::PASS } else { exit::PROPERTY_FAILURE })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
