use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use fmc::encodings::{encode, encode_types, parse_source, parse_source_type, Mode};
use fmc::machine::{memory_from_json, render_trace, run, trace_to_json, Memory, Outcome};
use fmc::reduction::{normalize_with, render_reduction, Normalization, Strategy};
use fmc::syntax::{parse_with, Features, ParseOptions, Term};
use fmc::types::{check_with, find_type, parse_type, CheckOptions, TypingContext};

mod selftest;

const HALTED: u8 = 0;
const CONFIG_ERROR: u8 = 1;
const STUCK: u8 = 2;
const OUT_OF_FUEL: u8 = 3;

/// Functional Machine Calculus toolkit.
#[derive(Parser)]
#[command(name = "fmc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// print machine-readable JSON
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a term and print it back.
    Parse(Input),
    /// Run a term on the machine and print the trace.
    Run {
        #[command(flatten)]
        input: Input,
        /// memory as inline JSON or a path to a JSON file
        #[arg(long)]
        mem: Option<String>,
        #[arg(long, default_value_t = fmc::machine::DEFAULT_FUEL)]
        fuel: usize,
        /// seed for random suppliers without one of their own
        #[arg(long, env = "FMC_SEED", default_value_t = 42)]
        seed: u64,
        /// only print the outcome and the final memory
        #[arg(long)]
        quiet: bool,
    },
    /// Normalize a term, printing one line per step.
    Reduce {
        #[command(flatten)]
        input: Input,
        /// full, lo, spine or inner
        #[arg(long, default_value = "lo")]
        strategy: Strategy,
        /// maximum number of steps
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// also contract eta redexes once no beta redex is left
        #[arg(long)]
        eta: bool,
    },
    /// Check a term against a type, or search for one.
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long = "type")]
        goal: Option<String>,
        /// largest vector width the search tries
        #[arg(long, default_value_t = 3)]
        width: usize,
    },
    /// Translate a source term into the calculus.
    Encode {
        /// source term, or a path with --file
        source: String,
        #[arg(long)]
        file: bool,
        #[arg(long, default_value = "cbn")]
        mode: Mode,
        /// also translate this source type
        #[arg(long = "type")]
        source_type: Option<String>,
        #[arg(long, value_parser = parse_features, default_value = "")]
        features: Features,
    },
    /// Run the built-in property checks.
    Selftest {
        #[arg(long, env = "FMC_SEED", default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Args)]
struct Input {
    /// term text, or a path with --file
    term: String,
    /// read the term from the file named by TERM
    #[arg(long)]
    file: bool,
    /// comma separated extensions: thunks, consts
    #[arg(long, value_parser = parse_features, default_value = "")]
    features: Features,
    /// accept print, read, rand, get c, set c and (x = N)
    #[arg(long)]
    sugar: bool,
}

fn parse_features(s: &str) -> Result<Features, String> {
    Features::from_list(s)
}

fn read_text(text: &str, file: bool) -> Result<String, String> {
    if file {
        std::fs::read_to_string(PathBuf::from(text)).map_err(|e| format!("{text}: {e}"))
    } else {
        Ok(text.to_string())
    }
}

impl Input {
    fn term(&self) -> Result<Term, String> {
        let text = read_text(&self.term, self.file)?;
        let mut opts = ParseOptions::new(self.features);
        if self.sugar {
            opts = opts.with_sugar();
        }
        parse_with(&text, opts).map_err(|e| e.to_string())
    }
}

fn load_memory(mem: Option<&str>, features: Features, seed: u64) -> Result<Memory, String> {
    let Some(mem) = mem else {
        return Ok(Memory::new());
    };
    let text = if mem.trim_start().starts_with('{') {
        mem.to_string()
    } else {
        std::fs::read_to_string(mem).map_err(|e| format!("{mem}: {e}"))?
    };
    memory_from_json(&text, features, seed).map_err(|e| e.to_string())
}

fn emit(json: bool, value: serde_json::Value, text: impl FnOnce() -> String) {
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&value).expect("json values serialize")
        );
    } else {
        print!("{}", text());
    }
}

fn execute(cli: Cli) -> Result<u8, String> {
    let json = cli.json;
    match cli.command {
        Command::Parse(input) => {
            let m = input.term()?;
            emit(
                json,
                json!({ "term": m.to_string(), "size": m.size() }),
                || format!("{m}\n"),
            );
            Ok(HALTED)
        }
        Command::Run {
            input,
            mem,
            fuel,
            seed,
            quiet,
        } => {
            if fuel == 0 {
                return Err("--fuel must be positive".into());
            }
            let m = input.term()?;
            let memory = load_memory(mem.as_deref(), input.features, seed)?;
            let trace = run(memory, m, fuel);
            emit(json, trace_to_json(&trace), || {
                if quiet {
                    let mut s = fmc::machine::describe_outcome(&trace);
                    s.push_str(&format!("\nmemory: {}\n", trace.final_state().memory));
                    s
                } else {
                    render_trace(&trace)
                }
            });
            Ok(match trace.outcome {
                Outcome::Halted => HALTED,
                Outcome::Stuck(_) => STUCK,
                Outcome::FuelExhausted => OUT_OF_FUEL,
            })
        }
        Command::Reduce {
            input,
            strategy,
            steps,
            eta,
        } => {
            let m = input.term()?;
            let r = normalize_with(&m, strategy, steps, eta);
            let value = json!({
                "strategy": strategy.name(),
                "steps": r.steps.iter().map(|s| s.after.to_string()).collect::<Vec<_>>(),
                "normal": r.is_normal(),
                "term": r.term.to_string(),
            });
            emit(json, value, || {
                let mut s = render_reduction(&r);
                match r.outcome {
                    Normalization::Normal => {
                        s.push_str(&format!("normal form after {} steps\n", r.steps.len()))
                    }
                    Normalization::FuelExhausted { looped: true } => {
                        s.push_str("diverges: a term recurred\n")
                    }
                    Normalization::FuelExhausted { looped: false } => {
                        s.push_str(&format!("no normal form within {steps} steps\n"))
                    }
                }
                s
            });
            Ok(if r.is_normal() { HALTED } else { OUT_OF_FUEL })
        }
        Command::Check { input, goal, width } => {
            let m = input.term()?;
            let ctx = TypingContext::new();
            let opts = CheckOptions {
                max_width: width,
                ..CheckOptions::default()
            };
            let result = match &goal {
                Some(g) => {
                    let t = parse_type(g).map_err(|e| e.to_string())?;
                    check_with(&ctx, &m, &t, &opts).map(|d| (t, d))
                }
                None => find_type(&ctx, &m, &opts),
            };
            match result {
                Ok((t, d)) => {
                    emit(
                        json,
                        json!({ "typed": true, "type": t.to_string(), "derivation": d.to_string() }),
                        || format!("{m} : {t}\n{d}\n"),
                    );
                    Ok(HALTED)
                }
                Err(e) => {
                    emit(
                        json,
                        json!({ "typed": false, "error": e.to_string() }),
                        || format!("not typeable: {e}\n"),
                    );
                    Ok(STUCK)
                }
            }
        }
        Command::Encode {
            source,
            file,
            mode,
            source_type,
            features,
        } => {
            let text = read_text(&source, file)?;
            let s = parse_source(&text).map_err(|e| e.to_string())?;
            let m = encode(mode, &s, features).map_err(|e| e.to_string())?;
            let ty = match source_type {
                Some(t) => {
                    let st = parse_source_type(&t).map_err(|e| e.to_string())?;
                    Some(encode_types(&st, mode).map_err(|e| e.to_string())?)
                }
                None => None,
            };
            let value = json!({
                "mode": mode.name(),
                "term": m.to_string(),
                "type": ty.as_ref().map(|t| t.to_string()),
            });
            emit(json, value, || match &ty {
                Some(t) => format!("{m}\n: {t}\n"),
                None => format!("{m}\n"),
            });
            Ok(HALTED)
        }
        Command::Selftest { seed } => {
            let results = selftest::run_all(seed);
            let ok = results.iter().all(|r| r.passed);
            emit(
                json,
                json!(results
                    .iter()
                    .map(|r| json!({ "name": r.name, "passed": r.passed, "detail": r.detail }))
                    .collect::<Vec<_>>()),
                || {
                    results
                        .iter()
                        .map(|r| {
                            format!(
                                "{} {}: {}\n",
                                if r.passed { "PASS" } else { "FAIL" },
                                r.name,
                                r.detail
                            )
                        })
                        .collect()
                },
            );
            Ok(if ok { HALTED } else { STUCK })
        }
    }
}

fn main() -> ExitCode {
    // usage errors are configuration errors, not stuck runs
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { CONFIG_ERROR } else { HALTED };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CONFIG_ERROR)
        }
    }
}
