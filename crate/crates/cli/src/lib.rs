//! Command-line orchestration: argument parsing, JSON input and reports,
//! exit codes.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use segre_lines::exactalg::rational::format_rational;
use segre_lines::generators::{cremona_generate, index_triple, one_example, wallcross_path};
use segre_lines::jet::{classify_discriminants, det_ac, euler_index, extract_jet};
use segre_lines::lines::{find_real_lines_certified, line_index, signed_count};
use segre_lines::secants::{find_secants, nodes_exact_n3};
use segre_lines::segre::{chord_diagram, segre_factors, segre_index, segre_index_n2};
use segre_lines::welsch::{splitting_sections, welschinger_loop};
use segre_lines::{double_factorial_odd, Error, Hypersurface, JetCurve, PlaneConfig, SolverConfig};

#[derive(Debug, Parser)]
#[command(name = "segre-lines", version, about = "Signed counts of real lines and the indices of their jet curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Options {
    /// Input JSON file (a jet curve, a hypersurface or a plane configuration).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Report path; standard output when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// `n` for commands that build their own input.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Newton starts in the first round (per chart for `lines`).
    #[arg(long, global = true)]
    pub starts: Option<usize>,
    /// Newton residual tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Grassmannian charts as `i,j` pairs of 1-based pivot columns, separated
    /// by `;`.
    #[arg(long, global = true)]
    pub charts: Option<String>,
    /// Rounds with an unchanged line set before `lines` calls it stable.
    #[arg(long, global = true)]
    pub stability_rounds: Option<usize>,
    /// Escalation rounds; starts double each round.
    #[arg(long, global = true)]
    pub max_rounds: Option<usize>,
    /// Worker threads; `SEGRE_LINES_THREADS` takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Compact JSON (the default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    pub json: bool,
    /// Indented JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// det A_C and the Euler index.
    Index,
    /// Secants with the Castelnuovo certificate.
    Secants,
    /// Residual pencils, local weights and the Segre index.
    Segre,
    /// Splitting sections and the Welschinger weight (n ≤ 3).
    Welschinger,
    /// Nodes of a plane quartic (n = 3) and their chord diagram.
    Nodes,
    /// Real lines of a hypersurface and their signed count.
    Lines,
    /// Wall crossings along the segment between two curves.
    Wallcross {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        /// Sample points per chamber.
        #[arg(long, default_value_t = 1)]
        steps: usize,
    },
    /// A curve from a plane configuration, or the monomial curve for `--n`.
    Generate,
    /// All three indices and their agreement.
    VerifyAll,
}

/// Resolved configuration of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub input_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub n: Option<usize>,
    pub solver: SolverConfig,
    pub seed: u64,
    pub threads: Option<usize>,
    pub pretty: bool,
}

/// Failure of a run, carrying its exit code.
#[derive(Debug)]
pub struct RunError {
    pub code: i32,
    pub message: String,
}

impl RunError {
    fn usage(message: impl Into<String>) -> Self {
        RunError { code: 1, message: message.into() }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError { code: exit_code(&e), message: e.to_string() }
    }
}

/// 2 for degenerate or wall inputs, 3 for incomplete enumerations, 4 for
/// numeric failures, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Degenerate
        | Error::DegenerateOnWall(_)
        | Error::NotBalanced { .. }
        | Error::NonGenericCurve(_)
        | Error::NonGenericPath(_)
        | Error::DegenerateConfig(_) => 2,
        Error::IncompleteEnumeration(_) => 3,
        Error::NumericFailure(_) => 4,
        _ => 1,
    }
}

fn parse_charts(s: &str) -> Result<Vec<(usize, usize)>, RunError> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let mut it = p.split(',').map(|x| x.trim().parse::<usize>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(i)), Some(Ok(j)), None) => Ok((i, j)),
                _ => Err(RunError::usage(format!("malformed chart {p:?}; expected i,j"))),
            }
        })
        .collect()
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, RunError> {
        let o = cli.opts;
        let mut solver = SolverConfig { seed: o.seed, ..Default::default() };
        if let Some(s) = o.starts {
            solver.starts = s;
        }
        if let Some(t) = o.tol {
            solver.tol = t;
        }
        if let Some(r) = o.stability_rounds {
            solver.stability_rounds = r;
        }
        if let Some(r) = o.max_rounds {
            solver.max_rounds = r;
        }
        if let Some(c) = &o.charts {
            solver.charts = parse_charts(c)?;
        }
        let threads = match std::env::var("SEGRE_LINES_THREADS") {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| RunError::usage(format!("SEGRE_LINES_THREADS={v:?} is not a number")))?),
            Err(_) => o.threads,
        };
        Ok(RunConfig {
            command: cli.command,
            input_path: o.input,
            output_path: o.output,
            n: o.n,
            solver,
            seed: o.seed,
            threads,
            pretty: o.pretty,
        })
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| RunError::usage(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
}

fn require_input(cfg: &RunConfig) -> Result<&Path, RunError> {
    cfg.input_path.as_deref().ok_or_else(|| RunError::usage("this command needs --input"))
}

/// A jet curve, read directly or extracted from a hypersurface containing the
/// standard line.
fn read_curve(path: &Path) -> Result<JetCurve, RunError> {
    let raw: Value = read_json(path)?;
    if raw.get("terms").is_some() {
        let x: Hypersurface = read_json(path)?;
        Ok(extract_jet(&x)?)
    } else {
        read_json(path)
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn curve_summary(c: &JetCurve) -> Value {
    json!({ "curve": to_value(c), "det": format_rational(&det_ac(c)) })
}

fn segre_of(c: &JetCurve, solver: &SolverConfig) -> Result<Value, RunError> {
    if c.n() == 2 {
        return Ok(json!({ "route": "jet pencil", "segre": segre_index_n2(c)? }));
    }
    let report = find_secants(c, solver)?;
    let factors = segre_factors(c, &report)?;
    let s = segre_index(c, &report)?;
    let mut out = json!({
        "segre": s,
        "factors": to_value(&factors),
        "castelnuovo_total": report.total_with_multiplicity,
        "certificate_ok": report.certificate_ok,
    });
    if c.n() == 3 {
        out["chord_diagram"] = to_value(&chord_diagram(&report)?);
    }
    Ok(out)
}

fn execute(cfg: &RunConfig) -> Result<Value, RunError> {
    let solver = &cfg.solver;
    let body = match &cfg.command {
        Command::Index => {
            let c = read_curve(require_input(cfg)?)?;
            let mut v = curve_summary(&c);
            v["euler"] = json!(euler_index(&c)?);
            v
        }
        Command::Secants => {
            let c = read_curve(require_input(cfg)?)?;
            let mut v = curve_summary(&c);
            v["secants"] = to_value(&find_secants(&c, solver)?);
            v
        }
        Command::Segre => {
            let c = read_curve(require_input(cfg)?)?;
            let mut v = curve_summary(&c);
            let s = segre_of(&c, solver)?;
            for (k, x) in s.as_object().expect("object") {
                v[k] = x.clone();
            }
            v
        }
        Command::Welschinger => {
            let c = read_curve(require_input(cfg)?)?;
            let mut v = curve_summary(&c);
            v["sections"] = to_value(&splitting_sections(&c)?);
            let l = welschinger_loop(&c)?;
            v["theta"] = to_value(&l.thetas);
            v["max_step_angle"] = json!(l.max_step_angle);
            if let Some(q) = l.endpoint_quaternion {
                v["endpoint_quaternion"] = json!(q);
            }
            if let Some(w) = l.winding {
                v["winding"] = json!(w);
            }
            v["welschinger"] = json!(l.weight);
            v
        }
        Command::Nodes => {
            let c = read_curve(require_input(cfg)?)?;
            let report = nodes_exact_n3(&c)?;
            let mut v = curve_summary(&c);
            v["chord_diagram"] = to_value(&chord_diagram(&report)?);
            v["nodes"] = to_value(&report);
            v
        }
        Command::Lines => {
            let x: Hypersurface = read_json(require_input(cfg)?)?;
            let search = find_real_lines_certified(&x, solver)?;
            let records = search.lines.iter().map(|l| line_index(&x, l, solver)).collect::<Result<Vec<_>, _>>()?;
            let signed = signed_count(&x, &search.lines)?;
            let expected = double_factorial_odd(x.n()) as i64;
            json!({
                "n": x.n(),
                "real_lines": search.lines.len(),
                "stable": search.stable,
                "counts_per_round": search.counts,
                "starts_used": search.starts_used,
                "lines": to_value(&records),
                "signed_count": signed,
                "expected": expected,
                "certificate_ok": signed == expected,
            })
        }
        Command::Wallcross { from, to, steps } => {
            let c0 = read_curve(from)?;
            let c1 = read_curve(to)?;
            to_value(&wallcross_path(&c0, &c1, *steps, solver)?)
        }
        Command::Generate => match &cfg.input_path {
            Some(p) => {
                let pc: PlaneConfig = read_json(p)?;
                let n = cfg.n.ok_or_else(|| RunError::usage("generate from a configuration needs --n"))?;
                let g = cremona_generate(&pc, n)?;
                let mut v = curve_summary(&g.curve);
                v["config"] = to_value(&pc);
                v["ground_truth"] = json!(g.ground_truth);
                v["inside"] = json!(g.inside);
                v["plane_forms"] = to_value(&g.plane_forms);
                v
            }
            None => {
                let n = cfg.n.ok_or_else(|| RunError::usage("generate needs --input or --n"))?;
                curve_summary(&one_example(n)?)
            }
        },
        Command::VerifyAll => {
            let c = read_curve(require_input(cfg)?)?;
            let t = index_triple(&c, solver)?;
            let mut v = curve_summary(&c);
            v["flags"] = to_value(&classify_discriminants(&c));
            v["euler"] = json!(t.euler);
            v["segre"] = json!(t.segre);
            if let Some(w) = t.welschinger {
                v["welschinger"] = json!(w);
            }
            if c.n() == 3 {
                v["chord_index"] = json!(segre_lines::segre::chord_diagram_index_n3(&c, &nodes_exact_n3(&c)?)?);
            }
            v["agreement"] = json!(t.agree());
            v
        }
    };
    Ok(body)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Index => "index",
        Command::Secants => "secants",
        Command::Segre => "segre",
        Command::Welschinger => "welschinger",
        Command::Nodes => "nodes",
        Command::Lines => "lines",
        Command::Wallcross { .. } => "wallcross",
        Command::Generate => "generate",
        Command::VerifyAll => "verify-all",
    }
}

/// The report of a run, without writing it.
pub fn report(cfg: &RunConfig) -> Result<Value, RunError> {
    let body = match cfg.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| RunError::usage(format!("thread pool: {e}")))?
            .install(|| execute(cfg))?,
        None => execute(cfg)?,
    };
    let mut out = json!({
        "command": command_name(&cfg.command),
        "seed": cfg.seed,
        "solver": to_value(&cfg.solver),
    });
    if let Some(p) = &cfg.input_path {
        out["input"] = json!(p.display().to_string());
    }
    for (k, x) in body.as_object().expect("object") {
        out[k] = x.clone();
    }
    Ok(out)
}

/// Writes `text` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Runs a command and returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let value = match report(cfg) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return e.code;
        }
    };
    let mut text = if cfg.pretty {
        serde_json::to_string_pretty(&value)
    } else {
        serde_json::to_string(&value)
    }
    .expect("reports serialize");
    text.push('\n');
    match &cfg.output_path {
        Some(p) => {
            if let Err(e) = write_atomic(p, &text) {
                eprintln!("error: {}: {e}", p.display());
                return 1;
            }
        }
        None => print!("{text}"),
    }
    0
}
