use std::fs::File;
use std::io::BufWriter;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use ee_dialogue::bt::write_trace;
use ee_dialogue::dialogue::PhraseTable;
use ee_dialogue::registry::{MockFixtures, Registry};
use ee_dialogue::script::{simulate, ScriptFile};
use ee_dialogue::session::{aggregate, load_spec_dir, Blueprint, ResponseSet, ServiceConfig, SessionService};
use ee_dialogue::spec::{load_spec, validate_spec, XaiSpec, SPEC_EXTENSION};

#[derive(Parser)]
#[command(name = "ee", version, about = "Explanation-experience dialogue engine")]
struct Cli {
    #[command(flatten)]
    fixtures: Fixtures,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Fixtures {
    /// Directory holding `phrases.json` and `corpora/mocks.json`; the
    /// built-in copies are used for anything missing.
    #[arg(long, global = true)]
    fixtures_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a spec file, or every spec in a directory, for completeness.
    Validate { path: PathBuf },
    /// Run a scripted conversation headlessly and compare expectations.
    Simulate {
        spec: PathBuf,
        script: PathBuf,
        /// Write the engine trace here as JSON lines.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Require every step to carry both expectations.
        #[arg(long)]
        strict: bool,
    },
    /// Serve conversations over HTTP.
    Serve {
        #[arg(long)]
        specs_dir: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Seconds of inactivity before a session is closed.
        #[arg(long, default_value_t = 1800)]
        idle_timeout: u64,
        /// Persist transcripts and unmet needs here.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    /// Print the evaluation verdict for a spec.
    Report {
        spec_id: String,
        #[arg(long)]
        specs_dir: PathBuf,
        /// A response-set file to aggregate instead of stored transcripts.
        #[arg(long, conflicts_with = "data_dir")]
        responses: Option<PathBuf>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

enum Failure {
    /// Exit 1: the input was read but is wrong.
    Semantic(Vec<String>),
    /// Exit 2: something could not be read or written.
    Io(String),
}

type Outcome = Result<(), Failure>;

fn io(e: impl std::fmt::Display) -> Failure {
    Failure::Io(e.to_string())
}

impl Fixtures {
    fn registry(&self) -> Result<Registry, Failure> {
        match self.fixtures_dir.as_deref().map(|d| d.join("corpora/mocks.json")) {
            Some(p) if p.exists() => Ok(Registry::with_mock_fixtures(MockFixtures::load(&p).map_err(io)?)),
            _ => Ok(Registry::with_mocks()),
        }
    }

    fn phrases(&self) -> Result<PhraseTable, Failure> {
        match self.fixtures_dir.as_deref().map(|d| d.join("phrases.json")) {
            Some(p) if p.exists() => PhraseTable::load(&p).map_err(io),
            _ => Ok(PhraseTable::embedded()),
        }
    }
}

fn validate(path: &Path, fixtures: &Fixtures) -> Outcome {
    let registry = fixtures.registry()?;
    let paths = if path.is_dir() {
        let mut v: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.to_string_lossy().ends_with(SPEC_EXTENSION))
            .collect();
        v.sort();
        v
    } else {
        vec![path.to_owned()]
    };
    let mut problems = Vec::new();
    for p in &paths {
        if !p.exists() {
            return Err(Failure::Io(format!("{}: no such file", p.display())));
        }
        match load_spec(p) {
            Ok(spec) => {
                let violations = validate_spec(&spec, &registry);
                if violations.is_empty() {
                    println!("{}: ok", p.display());
                }
                problems.extend(violations.iter().map(|v| format!("{}: {v}", p.display())));
            }
            Err(e @ ee_dialogue::spec::SpecError::Io { .. }) => return Err(io(e)),
            Err(e) => problems.push(format!("{}: {e}", p.display())),
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::Semantic(problems))
    }
}

fn blueprint(spec: XaiSpec, fixtures: &Fixtures) -> Result<Arc<Blueprint>, Failure> {
    let bp = Blueprint::new(spec, Arc::new(fixtures.registry()?), Arc::new(fixtures.phrases()?))
        .map_err(|e| Failure::Semantic(vec![e.to_string()]))?;
    Ok(Arc::new(bp))
}

fn read_spec(path: &Path) -> Result<XaiSpec, Failure> {
    load_spec(path).map_err(|e| match e {
        ee_dialogue::spec::SpecError::Io { .. } => io(e),
        e => Failure::Semantic(vec![format!("{}: {e}", path.display())]),
    })
}

fn run_simulation(
    spec: &Path,
    script: &Path,
    trace_out: Option<&Path>,
    strict: bool,
    fixtures: &Fixtures,
) -> Outcome {
    let bp = blueprint(read_spec(spec)?, fixtures)?;
    let text = std::fs::read_to_string(script).map_err(|e| io(format!("{}: {e}", script.display())))?;
    let script = ScriptFile::parse(&text).map_err(|e| Failure::Semantic(vec![format!("script: {e}")]))?;
    let report = simulate(bp, &script, strict).map_err(|e| Failure::Semantic(vec![e.to_string()]))?;

    for s in &report.steps {
        println!("step {}: {} -> {} {}", s.step, s.event.describe(), s.node, s.status);
    }
    println!("visited: {}", report.visited_marks().join(","));
    println!("status: {}", report.status.as_str());
    if let Some(path) = trace_out {
        let file = File::create(path).map_err(|e| io(format!("{}: {e}", path.display())))?;
        write_trace(BufWriter::new(file), &report.trace).map_err(io)?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Semantic(report.diff()))
    }
}

fn report(spec_id: &str, specs_dir: &Path, responses: Option<&Path>, data_dir: Option<PathBuf>) -> Outcome {
    let specs = load_spec_dir(specs_dir).map_err(io)?;
    let Some(spec) = specs.iter().find(|s| s.spec_id == spec_id) else {
        return Err(Failure::Semantic(vec![format!("unknown spec `{spec_id}`")]));
    };
    let verdict = match responses {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| io(format!("{}: {e}", path.display())))?;
            let set: ResponseSet = serde_json::from_str(&text)
                .map_err(|e| Failure::Semantic(vec![format!("responses: {e}")]))?;
            aggregate(spec_id, &spec.evaluation, &set.responses)
                .map_err(|e| Failure::Semantic(vec![e.to_string()]))?
        }
        None => {
            let config = ServiceConfig { data_dir, ..ServiceConfig::default() };
            let svc = SessionService::new(
                specs,
                Arc::new(Registry::with_mocks()),
                Arc::new(PhraseTable::embedded()),
                config,
            )
            .map_err(|e| Failure::Semantic(vec![e.to_string()]))?;
            svc.aggregate_evaluations(spec_id).map_err(|e| Failure::Semantic(vec![e.to_string()]))?
        }
    };
    for q in &verdict.questions {
        println!(
            "{}: {:.2} {}",
            q.question_id,
            q.positive_fraction,
            if q.positive { "positive" } else { "negative" }
        );
    }
    if verdict.partial > 0 {
        println!("partial sessions ignored: {}", verdict.partial);
    }
    println!("{verdict}");
    Ok(())
}

fn serve(
    specs_dir: &Path,
    listen: SocketAddr,
    idle: u64,
    data_dir: Option<PathBuf>,
    fixtures: &Fixtures,
) -> Outcome {
    let specs = load_spec_dir(specs_dir).map_err(io)?;
    let config = ServiceConfig { data_dir, idle_timeout: Duration::from_secs(idle) };
    let svc =
        SessionService::new(specs, Arc::new(fixtures.registry()?), Arc::new(fixtures.phrases()?), config)
            .map_err(|e| Failure::Semantic(vec![e.to_string()]))?;
    let sweep = Duration::from_secs(idle.clamp(1, 60));
    let runtime = tokio::runtime::Runtime::new().map_err(io)?;
    runtime.block_on(ee_dialogue::server::serve(Arc::new(svc), listen, sweep)).map_err(io)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    let cli = Cli::parse();
    let fx = &cli.fixtures;
    let outcome = match cli.command {
        Command::Validate { path } => validate(&path, fx),
        Command::Simulate { spec, script, trace_out, strict } => {
            run_simulation(&spec, &script, trace_out.as_deref(), strict, fx)
        }
        Command::Serve { specs_dir, listen, idle_timeout, data_dir } => {
            serve(&specs_dir, listen, idle_timeout, data_dir, fx)
        }
        Command::Report { spec_id, specs_dir, responses, data_dir } => {
            report(&spec_id, &specs_dir, responses.as_deref(), data_dir)
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Semantic(lines)) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
