mod args;

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;
use stobon::model_file::MODEL_SCHEMA;
use stobon::village::{
    at_least_one, build_village_limited, run_protocol_fast, run_protocol_limited, sweep, DEFAULT_MAX_WORLDS,
};
use stobon::{
    holds, info_content, load_model, parse, subjective_probability, Assertion, EvalError, Formula, Outcome,
    PointedModel, ProtocolState, ScenarioSpec, Surprisal, VillageError, GRAMMAR,
};

use args::{AssertionArg, CheckArgs, Cli, Command, Engine, Format, InfoArgs, SimulateArgs, VerifyArgs, VillageArgs};

const MAX_WORLDS_VAR: &str = "STOBON_MAX_WORLDS";

/// Failure classes, each with its own exit code.
enum Failure {
    /// The checked formula or assertion is false (exit 1).
    Negative,
    /// Bad invocation or unusable input text (exit 2).
    Usage(String),
    /// Collapse, truthfulness violation, size guard, invalid model (exit 3).
    Domain(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Negative => 1,
            Failure::Usage(_) => 2,
            Failure::Domain(_) => 3,
        }
    }
}

impl From<VillageError> for Failure {
    fn from(e: VillageError) -> Self {
        match e {
            VillageError::Eval(EvalError::UnknownAgent(_) | EvalError::UnknownAtom(_)) => Failure::Usage(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        VillageError::from(e).into()
    }
}

/// stdout text produced by a subcommand, plus how it ended.
struct Report {
    out: String,
    result: Result<(), Failure>,
}

impl Report {
    fn ok(out: String) -> Self {
        Report { out, result: Ok(()) }
    }
}

fn max_worlds() -> Result<u64, Failure> {
    match std::env::var(MAX_WORLDS_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{MAX_WORLDS_VAR} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_MAX_WORLDS),
    }
}

fn parse_formula(text: &str) -> Result<Formula, Failure> {
    parse(text).map_err(|e| Failure::Usage(format!("in formula `{text}`: {e}")))
}

/// The pointed model a check/info query runs against.
fn query_model(village: &VillageArgs, model: &Option<std::path::PathBuf>) -> Result<PointedModel, Failure> {
    if let Some(path) = model {
        return load_model(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())));
    }
    let Some(n) = village.village else {
        return Err(Failure::Usage("one of --village or --model is required".into()));
    };
    let pm = build_village_limited(n, &village.unfaithful, max_worlds()?)?;
    if !village.post_oracle {
        return Ok(pm);
    }
    Ok(ProtocolState::new(pm).announce(at_least_one(n))?.pointed()?)
}

fn simulate(args: &SimulateArgs) -> Result<Report, Failure> {
    let mut spec = ScenarioSpec::new(args.men, args.unfaithful.iter().copied()).with_deviants(args.deviants.iter().copied());
    if let Some(m) = args.max_mornings {
        spec = spec.with_max_mornings(m);
    }
    let trace = match args.engine {
        Engine::Exact => run_protocol_limited(&spec, max_worlds()?)?,
        Engine::Fast => run_protocol_fast(&spec)?,
    };
    let out = match args.format {
        Format::Table => trace.to_table(),
        Format::Json => trace.to_json() + "\n",
    };
    let result = match trace.outcome {
        Outcome::Completed => Ok(()),
        Outcome::Collapsed { morning } => Err(Failure::Domain(format!(
            "model collapsed at morning {morning}: the public history is inconsistent with the actual world"
        ))),
        Outcome::MorningLimitReached => {
            Err(Failure::Domain(format!("no killing within {} mornings", spec.max_mornings)))
        }
    };
    Ok(Report { out, result })
}

fn check(args: &CheckArgs) -> Result<Report, Failure> {
    let formula = parse_formula(&args.formula)?;
    let pm = query_model(&args.village, &args.model)?;
    let truth = holds(&pm, &formula)?;
    let out = match args.format {
        Format::Table => format!("{truth}\n"),
        Format::Json => json!({ "formula": formula.to_string(), "holds": truth }).to_string() + "\n",
    };
    Ok(Report { out, result: if truth { Ok(()) } else { Err(Failure::Negative) } })
}

fn info(args: &InfoArgs) -> Result<Report, Failure> {
    let formula = parse_formula(&args.formula)?;
    let pm = query_model(&args.village, &args.model)?;
    let agent = pm
        .model()
        .agent_id(&args.agent)
        .ok_or_else(|| Failure::Usage(format!("unknown agent `{}`", args.agent)))?;
    let p = subjective_probability(&pm, agent, &formula)?;
    let surprisal = info_content(p);
    let out = match args.format {
        Format::Table => {
            let mut s = String::new();
            let _ = writeln!(s, "agent: {}", args.agent);
            let _ = writeln!(s, "formula: {formula}");
            let _ = writeln!(s, "probability: {p}");
            match surprisal {
                Surprisal::Bits(b) => {
                    let _ = writeln!(s, "information: {b} bits");
                }
                Surprisal::ImpossibleEvent => {
                    let _ = writeln!(s, "information: impossible event");
                }
            }
            s
        }
        Format::Json => {
            json!({
                "agent": args.agent,
                "formula": formula.to_string(),
                "probability": p,
                "bits": surprisal,
            })
            .to_string()
                + "\n"
        }
    };
    Ok(Report::ok(out))
}

fn verify(args: &VerifyArgs, verbose: u8) -> Result<Report, Failure> {
    let (assertion, name) = match args.assertion {
        AssertionArg::S => (Assertion::S, "S"),
        AssertionArg::T => (Assertion::T, "T"),
    };
    let report = sweep(assertion, args.max_n)?;
    let out = match args.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("reports serialize") + "\n",
        Format::Table if report.holds() => {
            format!("{name} holds for all 1≤k≤n≤{} ({} instances)\n", args.max_n, report.checked)
        }
        Format::Table => {
            let mut s = format!("{name} fails for {} of {} instances\n", report.failures.len(), report.checked);
            for (n, k, details) in &report.failures {
                let _ = writeln!(s, "  n={n} k={k}");
                for d in details.iter().filter(|d| verbose > 0 || d.starts_with("FAILED")) {
                    let _ = writeln!(s, "    {d}");
                }
            }
            s
        }
    };
    Ok(Report { out, result: if report.holds() { Ok(()) } else { Err(Failure::Negative) } })
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Check(a) => check(a),
        Command::Info(a) => info(a),
        Command::Verify(a) => verify(a, cli.verbose),
        Command::Grammar => Ok(Report::ok(GRAMMAR.to_string())),
        Command::Schema => Ok(Report::ok(MODEL_SCHEMA.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let report = run(&cli).unwrap_or_else(|failure| Report { out: String::new(), result: Err(failure) });
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(report.out.as_bytes());
    let _ = stdout.flush();
    match report.result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Usage(msg) | Failure::Domain(msg) => eprintln!("error: {msg}"),
                Failure::Negative => {}
            }
            ExitCode::from(failure.code())
        }
    }
}
