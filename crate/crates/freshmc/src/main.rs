use clap::{Args, Parser, Subcommand};
use freshmc::frontend::{self, CliError, Verdict};
use freshmc::game::BuildOptions;
use freshmc::logic;
use std::path::PathBuf;
use std::process::ExitCode;

/// Model checker for a recursive Hennessy-Milner logic with fresh-name
/// quantification over fresh-register automata.
#[derive(Parser)]
#[command(name = "freshmc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SetupArgs {
    /// Model file.
    model: PathBuf,
    /// Formula text.
    #[arg(long)]
    formula: String,
    /// Start state.
    #[arg(long)]
    state: String,
    /// Start register contents, e.g. "1=#0,2=#1".
    #[arg(long)]
    regs: Option<String>,
    /// Start history, e.g. "#0,#1"; defaults to the register contents.
    #[arg(long)]
    history: Option<String>,
    /// Abort when the game grows beyond this many positions.
    #[arg(long, default_value_t = 200_000)]
    max_positions: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the start configuration satisfies the formula.
    Check {
        #[command(flatten)]
        setup: SetupArgs,
        /// Print a JSON report instead of text.
        #[arg(long)]
        json: bool,
        /// Also evaluate with the bounded-semantics oracle and report
        /// agreement.
        #[arg(long)]
        oracle: bool,
        /// Write the solved game in dump format to this file.
        #[arg(long, value_name = "FILE")]
        dump_game: Option<PathBuf>,
    },
    /// Print game statistics and the orbit-size bound.
    Stats {
        #[command(flatten)]
        setup: SetupArgs,
    },
    /// Print the negation-free form of a formula.
    Negfree {
        /// Formula text.
        formula: String,
        /// Optional model supplying the tag signature.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Print the alternation depth of a formula.
    Adepth {
        /// Formula text.
        formula: String,
        /// Optional model supplying the tag signature.
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

fn load_signature(
    model: &Option<PathBuf>,
) -> Result<Option<std::collections::BTreeMap<String, usize>>, CliError> {
    match model {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            Ok(Some(frontend::parse_fra(&text)?.tags))
        }
        None => Ok(None),
    }
}

fn run_setup(setup: &SetupArgs, with_oracle: bool) -> Result<frontend::CheckOutcome, CliError> {
    let text = std::fs::read_to_string(&setup.model)?;
    let fra = frontend::parse_fra(&text)?;
    let start = frontend::start_config(
        &fra,
        &setup.state,
        setup.regs.as_deref(),
        setup.history.as_deref(),
    )?;
    let opts = BuildOptions {
        max_positions: setup.max_positions,
    };
    frontend::run_check(&fra, &setup.formula, &start, &opts, with_oracle)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Check {
            setup,
            json,
            oracle,
            dump_game,
        } => {
            let out = run_setup(&setup, oracle)?;
            if let Some(path) = dump_game {
                std::fs::write(path, out.game.dump())?;
            }
            if json {
                println!("{}", serde_json::to_string(&out.report).unwrap());
            } else {
                println!("{}", out.report.verdict);
                if let Some(agrees) = out.report.oracle_agrees {
                    println!("oracle: {}", if agrees { "agrees" } else { "DISAGREES" });
                }
            }
            Ok(match out.report.verdict {
                Verdict::Sat => ExitCode::SUCCESS,
                Verdict::Unsat => ExitCode::from(1),
            })
        }
        Command::Stats { setup } => {
            let out = run_setup(&setup, false)?;
            let r = &out.report;
            println!("verdict:     {}", r.verdict);
            println!("grade:       {}", r.grade);
            println!("adepth:      {}", out.alternation_depth);
            println!("positions:   {}", r.positions);
            println!("edges:       {}", r.edges);
            println!("max rank:    {}", r.max_rank);
            println!("orbit bound: {}", out.game.bound);
            println!(
                "within bound: {}",
                if (r.positions as u128) <= out.game.bound {
                    "yes"
                } else {
                    "NO"
                }
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Negfree { formula, model } => {
            let sig = load_signature(&model)?;
            let phi = frontend::parse_formula(&formula, sig.as_ref())?;
            logic::require_firm(&phi)?;
            let normalized = logic::normalize_binders(&phi);
            let negfree = logic::negation_free(&normalized)?;
            println!("{negfree}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Adepth { formula, model } => {
            let sig = load_signature(&model)?;
            let phi = frontend::parse_formula(&formula, sig.as_ref())?;
            let normalized = logic::normalize_binders(&phi);
            println!("{}", logic::alternation_depth(&normalized)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
