//! Batch front end: verification suites and Engel experiments, emitted as
//! JSON lines or CSV after a config header.
//!
//! Exit codes: 0 success, 1 violations, 2 configuration error, 3 budget or
//! cap exhausted.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use engel_branch::engel::{
    engel_growth, engel_tower, involution_check, local_checking_check, EngelGrowth, EngelTowerResult, TowerMode,
    TowerOutcome,
};
use engel_branch::finitewreath::{abelian_wreath_run, verify_engel_bound, CyclicWreath, WreathSpec};
use engel_branch::metrics::{
    contraction_check, fractality_check, gamma3_check, gamma3_sections, max_orbit_check, order_check, s_to_e_check,
    separation_check, transitivity_check, vanishing_commutator_check, CheckMode, Report, Violation,
};
use engel_branch::{Error, FpVector, TreeSignature, Word};

#[derive(Parser)]
#[command(name = "engel-branch", version, about = "Checks for Engel branch groups on rooted trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: Config,
}

#[derive(Args, Clone, Debug, Serialize)]
struct Config {
    /// Tree signature (`growing:p=3`, `regular:p=3,r=5`) or wreath spec (`wreath:p=2,ranks=1,1`).
    #[arg(long, global = true)]
    sig: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    level: usize,
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Ball radius of the checks; for `involution` the largest n; for `abelian-wreath` the top exponent r.
    #[arg(long, global = true)]
    t: Option<u64>,
    #[arg(long, global = true, default_value_t = 1)]
    radius: u64,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Sample count (suite default when omitted).
    #[arg(long, global = true)]
    count: Option<usize>,
    /// Word-count cap above which exhaustive checks switch to sampling.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    cap: u64,
    /// Closure budget for `prove_trivial`.
    #[arg(long, global = true, default_value_t = 100_000)]
    budget: usize,
    #[arg(long, global = true, default_value_t = 13)]
    limit: u32,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Jsonl)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Subcommand, Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Run a verification suite.
    Verify { suite: Suite },
    /// Least k with [g,_k h] trivial in the depth quotient (or by closure on regular trees without --depth).
    EngelTower { g: String, h: String },
    /// Engel growth of the depth quotient over the ball of the given radius.
    Growth,
    /// The γ₃ section table, for one pair (--f, --f2) or sampled pairs.
    Gamma3Sections {
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        f2: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Suite {
    Order,
    Transitivity,
    Fractality,
    SToE,
    Contraction,
    Separation,
    Vanishing,
    MaxOrbit,
    WreathEngel,
    AbelianWreath,
    LocalChecking,
    Gamma3Sections,
    Involution,
}

#[derive(Serialize)]
struct TowerRecord {
    g: String,
    h: String,
    #[serde(flatten)]
    result: EngelTowerResult,
}

enum Output {
    Reports(Vec<Report>),
    Tower(TowerRecord),
    Growth(EngelGrowth),
}

impl Output {
    fn exit_code(&self) -> u8 {
        match self {
            Output::Reports(rs) if rs.iter().all(Report::passed) => 0,
            Output::Reports(_) => 1,
            Output::Tower(t) if matches!(t.result.outcome, TowerOutcome::Success(_)) => 0,
            Output::Growth(g) if matches!(g.outcome, TowerOutcome::Success(_)) => 0,
            _ => 3,
        }
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::CapExceeded { .. } | Error::BudgetExhausted(_) => 3,
        _ => 2,
    }
}

fn tree_sig(config: &Config) -> engel_branch::Result<TreeSignature> {
    config.sig.as_deref().unwrap_or("growing:p=3").parse()
}

fn auto(config: &Config, count: usize) -> CheckMode {
    CheckMode::Auto { cap: u128::from(config.cap), count, seed: config.seed }
}

fn run_suite(suite: Suite, c: &Config) -> engel_branch::Result<Report> {
    let count = |default: usize| c.count.unwrap_or(default);
    match suite {
        Suite::WreathEngel => {
            let spec: WreathSpec = c.sig.as_deref().unwrap_or("wreath:p=2,ranks=1,1").parse()?;
            return verify_engel_bound(&spec, u128::from(c.cap));
        }
        Suite::AbelianWreath => {
            let text = c.sig.as_deref().unwrap_or("growing:p=3");
            let p = match text.parse::<WreathSpec>() {
                Ok(spec) => spec.p(),
                Err(_) => text.parse::<TreeSignature>()?.p(),
            };
            let r = u32::try_from(c.t.unwrap_or(1)).map_err(|_| Error::Overflow("top exponent"))?;
            return abelian_wreath_run(&CyclicWreath::new(p, 1, r)?, auto(c, count(10_000)));
        }
        _ => {}
    }
    let sig = tree_sig(c)?;
    let n = c.level;
    match suite {
        Suite::Order => order_check(&sig, n, c.depth.unwrap_or(6), c.budget),
        Suite::Transitivity => transitivity_check(&sig, n, c.depth.unwrap_or(2), c.cap),
        Suite::Fractality => fractality_check(&sig, n, c.depth.unwrap_or(2), count(50), c.seed),
        Suite::SToE => s_to_e_check(&sig, n, c.t.unwrap_or(2), count(1000), c.seed),
        Suite::Contraction => contraction_check(&sig, n, auto(c, count(10_000))),
        Suite::Separation => separation_check(&sig, n, c.t.unwrap_or(1), auto(c, count(10_000)), count(1000)),
        Suite::Vanishing => vanishing_commutator_check(&sig, n, c.t.unwrap_or(1), auto(c, count(10_000))),
        Suite::MaxOrbit => max_orbit_check(&sig, n, c.depth.unwrap_or(3), count(1000), c.seed),
        Suite::LocalChecking => local_checking_check(&sig, n, count(100), c.seed),
        Suite::Gamma3Sections => gamma3_check(&sig, n, count(100), c.seed, c.depth.unwrap_or(3)),
        Suite::Involution => {
            let max_n = u32::try_from(c.t.unwrap_or(4)).map_err(|_| Error::Overflow("n"))?;
            involution_check(&sig, c.depth.unwrap_or(2), count(100), max_n, c.seed)
        }
        Suite::WreathEngel | Suite::AbelianWreath => unreachable!("handled above"),
    }
}

fn gamma3_pair(c: &Config, f: &str, f2: &str) -> engel_branch::Result<Report> {
    let sig = tree_sig(c)?;
    let m = c.level + 2;
    let rank = sig.rank_at(m)?;
    let f = FpVector::parse(sig.p(), Some(rank), f)?;
    let f2 = FpVector::parse(sig.p(), Some(rank), f2)?;
    let depth = c.depth.unwrap_or(3);
    let s = gamma3_sections(&sig, c.level, &f, &f2, depth)?;
    let mut report = Report::new("gamma3_sections", sig.to_string(), c.level, depth as u64, "single", None);
    report.tested = 1;
    if !s.table_holds() {
        report.violations.push(Violation { word: format!("f={f} f'={f2}"), vertex: String::new(), measured: 0, detail: format!("{s:?}") });
    }
    report.notes.push(format!("section at -f trivial: {}, at -f': {}", s.f_trivial, s.f2_trivial));
    Ok(report)
}

fn run(command: &Command, c: &Config) -> engel_branch::Result<Output> {
    match command {
        Command::Verify { suite } => Ok(Output::Reports(vec![run_suite(*suite, c)?])),
        Command::EngelTower { g, h } => {
            let sig = tree_sig(c)?;
            let gw = Word::parse(&sig, c.level, g)?;
            let hw = Word::parse(&sig, c.level, h)?;
            let mode = match c.depth {
                None if sig.is_regular() => TowerMode::Closure { budget: c.budget, depth_cap: 64 },
                d => TowerMode::QuotientDepth(d.unwrap_or(3)),
            };
            let result = engel_tower(&gw, &hw, c.limit, mode)?;
            Ok(Output::Tower(TowerRecord { g: gw.to_string(), h: hw.to_string(), result }))
        }
        Command::Growth => {
            let sig = tree_sig(c)?;
            Ok(Output::Growth(engel_growth(&sig, c.depth.unwrap_or(2), c.radius, c.limit, u128::from(c.cap))?))
        }
        Command::Gamma3Sections { f: Some(f), f2: Some(f2) } => Ok(Output::Reports(vec![gamma3_pair(c, f, f2)?])),
        Command::Gamma3Sections { f: None, f2: None } => Ok(Output::Reports(vec![run_suite(Suite::Gamma3Sections, c)?])),
        Command::Gamma3Sections { .. } => Err(Error::PreconditionViolated("--f and --f2 go together".into())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(fields: &[String]) -> String {
    fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn outcome_fields(o: &TowerOutcome) -> [String; 2] {
    match o {
        TowerOutcome::Success(k) => ["success".into(), k.to_string()],
        TowerOutcome::NotFoundWithin { limit } => ["not_found_within".into(), limit.to_string()],
    }
}

fn render(output: &Output, format: Format) -> Vec<String> {
    match (output, format) {
        (Output::Reports(rs), Format::Jsonl) => rs.iter().map(Report::to_json_line).collect(),
        (Output::Tower(t), Format::Jsonl) => vec![serde_json::to_string(t).expect("serializable")],
        (Output::Growth(g), Format::Jsonl) => vec![serde_json::to_string(g).expect("serializable")],
        (Output::Reports(rs), Format::Csv) => {
            let mut lines = vec!["check,sig,n,t,mode,seed,tested,violations,max_observed".to_string()];
            for r in rs {
                lines.push(csv_row(&[
                    r.check.clone(),
                    r.sig.clone(),
                    r.n.to_string(),
                    r.t.to_string(),
                    r.mode.clone(),
                    opt(r.seed),
                    r.tested.to_string(),
                    r.violations.len().to_string(),
                    opt(r.max_observed),
                ]));
            }
            lines
        }
        (Output::Tower(t), Format::Csv) => {
            let [outcome, k] = outcome_fields(&t.result.outcome);
            let mode = serde_json::to_string(&t.result.mode).expect("serializable");
            vec!["g,h,outcome,k,mode,steps".into(), csv_row(&[t.g.clone(), t.h.clone(), outcome, k, mode, t.result.trace.len().to_string()])]
        }
        (Output::Growth(g), Format::Csv) => {
            let [outcome, value] = outcome_fields(&g.outcome);
            let (wg, wh) = g.witness.clone().unwrap_or_default();
            vec![
                "sig,depth,radius,ball,outcome,value,witness_g,witness_h".into(),
                csv_row(&[g.sig.clone(), g.depth.to_string(), g.radius.to_string(), g.ball.to_string(), outcome, value, wg, wh]),
            ]
        }
    }
}

#[derive(Serialize)]
struct Header<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a Command,
    config: &'a Config,
}

fn main() -> ExitCode {
    let mut cli = Cli::parse();
    if cli.config.sig.is_none() {
        let default = match cli.command {
            Command::Verify { suite: Suite::WreathEngel } => "wreath:p=2,ranks=1,1",
            _ => "growing:p=3",
        };
        cli.config.sig = Some(default.to_string());
    }
    let output = match run(&cli.command, &cli.config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(error_code(&e));
        }
    };
    let header = serde_json::to_string(&Header {
        tool: "engel-branch",
        version: env!("CARGO_PKG_VERSION"),
        command: &cli.command,
        config: &cli.config,
    })
    .expect("serializable");
    let mut lines = vec![match cli.config.format {
        Format::Jsonl => format!("{{\"config\":{header}}}"),
        Format::Csv => format!("# config: {header}"),
    }];
    lines.extend(render(&output, cli.config.format));
    let text = lines.join("\n") + "\n";
    let written = match &cli.config.out {
        Some(path) => File::create(path).and_then(|mut f| f.write_all(text.as_bytes())),
        None => io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(output.exit_code())
}
