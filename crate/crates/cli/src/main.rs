use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use thermoshift::coe::{
    self, cocycle, constants_from, entropy_limit_sequence, golden_example, hn_closed_form, hn_values, is_scoe,
    verify_equivalence, CoeWitness, EntropyRow, ScoeDecision, Side,
};
use thermoshift::format::{self as fmt, format_float, to_json_string};
use thermoshift::kms::{kms_condition_check, potential_for, solve_beta, KmsOptions, KmsSolution};
use thermoshift::ruelle::RuelleOperator;
use thermoshift::sft::{perron, periodic_point_counts, zeta_series};
use thermoshift::{Error, LocallyConstantFunction, SpectralOptions, TransitionMatrix};

const DEFAULT_MAX_DEPTH: usize = 24;
/// Contract bound for the KMS condition residual.
const KMS_CHECK_BOUND: f64 = 1e-10;

#[derive(Parser, Debug)]
#[command(name = "thermoshift", version, about = "Transfer operators, KMS measures and orbit-equivalence cocycles on Markov shifts")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Relative tolerance for eigenvalue iterations.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Tolerance on |F(β)| when solving for β.
    #[arg(long, global = true)]
    root_tolerance: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Table or verification depth (meaning depends on the command).
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    n_max: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Run independent pieces of work on separate threads.
    #[arg(long, global = true)]
    parallel: bool,
    /// Hard cap on depths.
    #[arg(long, global = true, env = "THERMOSHIFT_MAX_DEPTH", default_value_t = DEFAULT_MAX_DEPTH, hide_default_value = true)]
    max_depth: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Perron eigenvalue and topological entropy of a transition matrix.
    Entropy { matrix: PathBuf },
    /// Ruelle–Perron–Frobenius eigendata for a potential.
    Rpf { matrix: PathBuf, potential: PathBuf },
    /// KMS measure for the action generated by a gauge function.
    Kms {
        matrix: PathBuf,
        gauge: PathBuf,
        #[arg(long, conflicts_with = "solve", required_unless_present = "solve")]
        beta: Option<f64>,
        /// Solve for the unique admissible β.
        #[arg(long)]
        solve: bool,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], requires = "solve")]
        bracket: Option<Vec<f64>>,
        /// Export cylinder masses up to this word length.
        #[arg(long, value_name = "D")]
        emit_masses: Option<usize>,
    },
    /// Orbit-equivalence witness computations.
    Coe {
        witness: PathBuf,
        #[arg(value_enum)]
        action: CoeAction,
        #[arg(long, value_enum, default_value = "1")]
        side: SideArg,
    },
    /// Zeta function series and rational form.
    Zeta {
        matrix: PathBuf,
        #[arg(long, default_value_t = 20)]
        terms: usize,
    },
    /// Write the golden-mean example files into a directory.
    Example { dir: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum CoeAction {
    Verify,
    Cocycles,
    Scoe,
    EntropyLimit,
    Constants,
    HnCheck,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SideArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Both,
}

impl SideArg {
    fn sides(self) -> Vec<Side> {
        match self {
            SideArg::One => vec![Side::First],
            SideArg::Two => vec![Side::Second],
            SideArg::Both => vec![Side::First, Side::Second],
        }
    }
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Input(String),
    /// A computed result failed its own check; the output is still written.
    Contract(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::NoConvergence { .. } | Error::NoBracket { .. }) => 3,
            CliError::Core(_) | CliError::Input(_) => 2,
            CliError::Contract(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Contract(msg) => write!(f, "contract violation: {msg}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Validated run settings.
#[derive(Debug, Clone)]
struct RunConfig {
    spectral: SpectralOptions,
    kms: KmsOptions,
    depth: Option<usize>,
    n_max: Option<usize>,
    max_depth: usize,
    format: Option<Format>,
    output: Option<PathBuf>,
    parallel: bool,
}

impl RunConfig {
    fn from_args(args: &GlobalArgs) -> CliResult<Self> {
        let mut spectral = SpectralOptions::default();
        let mut kms = KmsOptions::default();
        for (name, value) in [("--tolerance", args.tolerance), ("--root-tolerance", args.root_tolerance)] {
            if let Some(t) = value {
                if !(t > 0.0 && t <= 1e-3) {
                    return Err(CliError::Input(format!("{name} {t} outside (0, 1e-3]")));
                }
            }
        }
        if let Some(t) = args.tolerance {
            spectral.tolerance = t;
        }
        if let Some(n) = args.max_iter {
            if n == 0 {
                return Err(CliError::Input("--max-iter must be positive".into()));
            }
            spectral.max_iterations = n;
        }
        kms.spectral = spectral;
        if let Some(t) = args.root_tolerance {
            kms.root_tolerance = t;
        }
        if let Some(d) = args.depth {
            if d > args.max_depth {
                return Err(CliError::Input(format!("--depth {d} exceeds the cap {}", args.max_depth)));
            }
        }
        if args.n_max == Some(0) {
            return Err(CliError::Input("--n-max must be at least 1".into()));
        }
        Ok(RunConfig {
            spectral,
            kms,
            depth: args.depth,
            n_max: args.n_max,
            max_depth: args.max_depth,
            format: args.format,
            output: args.output.clone(),
            parallel: args.parallel,
        })
    }

    fn check_depth(&self, what: &str, d: usize) -> CliResult<usize> {
        if d > self.max_depth {
            Err(CliError::Input(format!("{what} {d} exceeds the cap {}", self.max_depth)))
        } else {
            Ok(d)
        }
    }
}

/// What a command produced, before rendering.
enum Output {
    Json(Value),
    /// A table: header and rows, rendered as CSV or text; JSON as a list of objects.
    Table(Vec<&'static str>, Vec<Vec<String>>),
    Text(String),
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_matrix(path: &Path) -> CliResult<Arc<TransitionMatrix>> {
    Ok(Arc::new(fmt::parse_matrix(&read(path)?)?))
}

fn load_function(matrix: Arc<TransitionMatrix>, path: &Path) -> CliResult<LocallyConstantFunction> {
    Ok(fmt::parse_function(matrix, &read(path)?)?)
}

fn load_witness(path: &Path) -> CliResult<CoeWitness> {
    Ok(fmt::parse_witness(&read(path)?)?)
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(fmt::round15(x)).map_or(Value::Null, Value::Number)
}

fn cmd_entropy(cfg: &RunConfig, matrix: &Path) -> CliResult<Output> {
    let m = load_matrix(matrix)?;
    let p = perron(&m, &cfg.spectral)?;
    Ok(Output::Json(json!({
        "r": num(p.eigenvalue),
        "log_r": num(p.eigenvalue.ln()),
        "iterations": p.iterations,
    })))
}

fn cmd_rpf(cfg: &RunConfig, matrix: &Path, potential: &Path) -> CliResult<Output> {
    let m = load_matrix(matrix)?;
    let phi = load_function(m, potential)?;
    let rpf = RuelleOperator::new(&phi).rpf(&cfg.spectral)?;
    let depth = cfg.depth.unwrap_or(rpf.eigenfunction.depth());
    Ok(Output::Json(fmt::rpf_to_json(&rpf, depth)))
}

fn cmd_kms(
    cfg: &RunConfig,
    matrix: &Path,
    gauge: &Path,
    beta: Option<f64>,
    bracket: Option<&[f64]>,
    emit_masses: Option<usize>,
) -> CliResult<(Output, Option<CliError>)> {
    let m = load_matrix(matrix)?;
    let f = load_function(m, gauge)?;
    let solution = match beta {
        Some(beta) => {
            if !(beta > 1.0) {
                return Err(CliError::Input(format!("--beta {beta} must exceed 1")));
            }
            let potential = potential_for(&f, beta);
            let rpf = RuelleOperator::new(&potential).rpf(&cfg.spectral)?;
            KmsSolution {
                gauge: f.clone(),
                beta,
                potential,
                measure: rpf.measure.clone(),
                rpf,
                bisections: 0,
            }
        }
        None => {
            let bracket = bracket.map(|b| (b[0], b[1]));
            solve_beta(&f, bracket, &cfg.kms)?
        }
    };
    let check_depth = cfg.check_depth("--depth", cfg.depth.unwrap_or(f.depth() + 3))?;
    let mass_depth = cfg.check_depth("--emit-masses", emit_masses.unwrap_or(f.depth()))?;
    let residual = kms_condition_check(&f, solution.beta, &solution.measure, check_depth)?;
    let violation = (residual > KMS_CHECK_BOUND).then(|| {
        CliError::Contract(format!(
            "KMS condition residual {} exceeds {KMS_CHECK_BOUND:e} at β = {}",
            format_float(residual),
            format_float(solution.beta)
        ))
    });
    Ok((Output::Json(fmt::kms_to_json(&solution, mass_depth)), violation))
}

fn run_sides<T: Send>(
    cfg: &RunConfig,
    sides: &[Side],
    job: impl Fn(Side) -> Result<T, Error> + Sync,
) -> Result<Vec<T>, Error> {
    if cfg.parallel && sides.len() > 1 {
        std::thread::scope(|s| {
            let job = &job;
            let handles: Vec<_> = sides.iter().map(|&side| s.spawn(move || job(side))).collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        })
    } else {
        sides.iter().map(|&side| job(side)).collect()
    }
}

fn entropy_table(sides: &[Side], results: &[Vec<EntropyRow>]) -> Output {
    let with_side = sides.len() > 1;
    let mut header = vec!["n", "E_n", "entropy_estimate", "r_pow_n_times_E_n"];
    if with_side {
        header.insert(0, "side");
    }
    let mut rows = Vec::new();
    for (side, result) in sides.iter().zip(results) {
        for row in result {
            let mut cells = vec![
                row.n.to_string(),
                format_float(row.e_n),
                format_float(row.entropy_estimate),
                format_float(row.scaled),
            ];
            if with_side {
                cells.insert(0, side.index().to_string());
            }
            rows.push(cells);
        }
    }
    Output::Table(header, rows)
}

fn cmd_coe(cfg: &RunConfig, witness: &Path, action: CoeAction, side: SideArg) -> CliResult<(Output, Option<CliError>)> {
    let witness = load_witness(witness)?;
    let out = match action {
        CoeAction::Verify => {
            let default = 20.min(cfg.max_depth).max(witness.min_verification_depth());
            let depth = cfg.check_depth("verification depth", cfg.depth.unwrap_or(default))?;
            let report = verify_equivalence(&witness, depth)?;
            let violations: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
            let out = Output::Json(json!({
                "depth": report.depth,
                "words_checked": report.words_checked,
                "injective": report.injective,
                "passed": report.passed(),
                "violation_count": report.violation_count,
                "violations": violations,
            }));
            let failure = (!report.passed()).then(|| {
                CliError::Contract(format!(
                    "witness fails at depth {depth} ({} violations{})",
                    report.violation_count,
                    if report.injective { "" } else { ", code not injective" }
                ))
            });
            return Ok((out, failure));
        }
        CoeAction::Cocycles => Output::Json(json!({
            "c1": fmt::function_to_json(cocycle(&witness, Side::First).function()),
            "c2": fmt::function_to_json(cocycle(&witness, Side::Second).function()),
        })),
        CoeAction::Scoe => match is_scoe(&witness) {
            ScoeDecision::Strong(b) => {
                let b_json = b
                    .to_int_function()
                    .map_or_else(|| fmt::function_to_json(&b.to_real_function()), |f| fmt::function_to_json(&f));
                Output::Json(json!({ "scoe": true, "b1": b_json }))
            }
            ScoeDecision::NotStrong(cert) => {
                let alphabet = witness.code().source().size();
                Output::Json(json!({
                    "scoe": false,
                    "certificate": {
                        "cycle": cert.cycle.to_key(alphabet),
                        "period": cert.period,
                        "sum": cert.sum,
                    },
                }))
            }
        },
        CoeAction::EntropyLimit | CoeAction::Constants => {
            let n_max = cfg.n_max.unwrap_or(25);
            let sides = side.sides();
            let results = run_sides(cfg, &sides, |s| entropy_limit_sequence(&witness, s, n_max, &cfg.spectral))?;
            if action == CoeAction::EntropyLimit {
                entropy_table(&sides, &results)
            } else {
                let summary: Vec<Value> = sides
                    .iter()
                    .zip(&results)
                    .map(|(s, rows)| {
                        let c = constants_from(rows);
                        json!({
                            "side": s.index(),
                            "n_max": n_max,
                            "values": c.values.iter().map(|&v| num(v)).collect::<Vec<_>>(),
                            "last": num(c.last),
                            "oscillation": num(c.oscillation),
                        })
                    })
                    .collect();
                if sides.len() == 1 {
                    Output::Json(summary.into_iter().next().expect("one side"))
                } else {
                    Output::Json(Value::Array(summary))
                }
            }
        }
        CoeAction::HnCheck => {
            let n_max = cfg.n_max.unwrap_or(15);
            let ns: Vec<usize> = (1..=n_max).collect();
            let row = |n: usize| -> Result<Vec<String>, Error> {
                let direct = hn_values(n)?;
                let closed = hn_closed_form(n)?;
                Ok(vec![
                    n.to_string(),
                    direct[0].to_string(),
                    direct[1].to_string(),
                    closed[0].to_string(),
                    closed[1].to_string(),
                    coe::hn_check(n)?.to_string(),
                ])
            };
            let rows: Vec<Vec<String>> = if cfg.parallel {
                std::thread::scope(|s| {
                    let handles: Vec<_> = ns.iter().map(|&n| s.spawn(move || row(n))).collect();
                    handles.into_iter().map(|h| h.join().expect("worker panicked")).collect::<Result<_, _>>()
                })?
            } else {
                ns.iter().map(|&n| row(n)).collect::<Result<_, _>>()?
            };
            let failure = rows
                .iter()
                .find(|r| r[5] != "0")
                .map(|r| CliError::Contract(format!("H_n closed form fails at n = {}", r[0])));
            let header = vec!["n", "direct_y1", "direct_y2", "closed_y1", "closed_y2", "deviation"];
            return Ok((Output::Table(header, rows), failure));
        }
    };
    Ok((out, None))
}

fn cmd_zeta(matrix: &Path, terms: usize) -> CliResult<(Output, Option<CliError>)> {
    if terms == 0 {
        return Err(CliError::Input("--terms must be at least 1".into()));
    }
    let m = load_matrix(matrix)?;
    let z = zeta_series(&m, terms)?;
    let per = strings(&periodic_point_counts(&m, terms));
    let agree = z.representations_agree();
    let out = Output::Json(json!({
        "terms": terms,
        "coefficients": strings(&z.coefficients),
        "denominator": strings(&z.denominator),
        "periodic_points": per,
        "rational_form": z.rational_form(),
        "representations_agree": agree,
    }));
    let failure = (!agree).then(|| CliError::Contract("series and rational form disagree".into()));
    Ok((out, failure))
}

fn strings<T: ToString>(v: &[T]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn cmd_example(dir: &Path) -> CliResult<Output> {
    let g = golden_example();
    let a = g.code().source().clone();
    let b = g.code().target().clone();
    let rb = (1.0 + 5f64.sqrt()) / 2.0;
    let c1 = cocycle(&g, Side::First);
    let c2 = cocycle(&g, Side::Second);
    let files: Vec<(&str, String)> = vec![
        ("A.txt", fmt::matrix_to_text(&a)),
        ("B.txt", fmt::matrix_to_text(&b)),
        ("witness.json", to_json_string(&fmt::witness_to_json(&g))),
        ("c1.json", to_json_string(&fmt::function_to_json(c1.function()))),
        ("c2.json", to_json_string(&fmt::function_to_json(c2.function()))),
        ("gauge_one.json", to_json_string(&fmt::function_to_json(&LocallyConstantFunction::constant(a, 1)))),
        (
            "potential_c1.json",
            to_json_string(&fmt::function_to_json(&potential_for(c1.function(), rb))),
        ),
        (
            "potential_c2.json",
            to_json_string(&fmt::function_to_json(&potential_for(c2.function(), 2.0))),
        ),
    ];
    fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    let mut listing = String::new();
    for (name, content) in files {
        let path = dir.join(name);
        if fs::read_to_string(&path).ok().as_deref() != Some(content.as_str()) {
            fs::write(&path, content).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        }
        listing.push_str(&format!("{}\n", path.display()));
    }
    Ok(Output::Text(listing))
}

fn render_text(value: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                if v.is_object() || v.is_array() {
                    out.push_str(&format!("{pad}{k}:\n"));
                    render_text(v, indent + 1, out);
                } else {
                    out.push_str(&format!("{pad}{k} = {}\n", scalar(v)));
                }
            }
        }
        Value::Array(items) => {
            for v in items {
                if v.is_object() || v.is_array() {
                    out.push_str(&format!("{pad}-\n"));
                    render_text(v, indent + 1, out);
                } else {
                    out.push_str(&format!("{pad}- {}\n", scalar(v)));
                }
            }
        }
        v => out.push_str(&format!("{pad}{}\n", scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.as_f64().filter(|_| n.is_f64()).map_or_else(|| n.to_string(), format_float),
        other => other.to_string(),
    }
}

fn render(output: Output, format: Option<Format>) -> CliResult<String> {
    match (output, format) {
        (Output::Text(s), _) => Ok(s),
        (Output::Json(v), None | Some(Format::Json)) => Ok(to_json_string(&v)),
        (Output::Json(v), Some(Format::Text)) => {
            let mut s = String::new();
            render_text(&v, 0, &mut s);
            Ok(s)
        }
        (Output::Json(_), Some(Format::Csv)) => Err(CliError::Input("csv output is only available for sequences".into())),
        (Output::Table(header, rows), None | Some(Format::Csv)) => {
            let mut s = header.join(",");
            s.push('\n');
            for row in rows {
                s.push_str(&row.join(","));
                s.push('\n');
            }
            Ok(s)
        }
        (Output::Table(header, rows), Some(Format::Text)) => {
            let widths: Vec<usize> = (0..header.len())
                .map(|i| rows.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap_or(0))
                .collect();
            let line = |cells: Vec<&str>| {
                let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
                padded.join("  ").trim_end().to_string() + "\n"
            };
            let mut s = line(header.clone());
            for row in &rows {
                s.push_str(&line(row.iter().map(String::as_str).collect()));
            }
            Ok(s)
        }
        (Output::Table(header, rows), Some(Format::Json)) => {
            let list: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let obj: serde_json::Map<String, Value> = header
                        .iter()
                        .zip(r)
                        .map(|(h, c)| {
                            let v = c.parse::<i64>().map(Value::from).or_else(|_| c.parse::<f64>().map(num));
                            (h.to_string(), v.unwrap_or_else(|_| Value::String(c.clone())))
                        })
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            Ok(to_json_string(&Value::Array(list)))
        }
    }
}

fn run(cli: Cli) -> CliResult<Option<CliError>> {
    let cfg = RunConfig::from_args(&cli.global)?;
    let (output, deferred) = match &cli.command {
        Command::Entropy { matrix } => (cmd_entropy(&cfg, matrix)?, None),
        Command::Rpf { matrix, potential } => (cmd_rpf(&cfg, matrix, potential)?, None),
        Command::Kms {
            matrix,
            gauge,
            beta,
            solve: _,
            bracket,
            emit_masses,
        } => cmd_kms(&cfg, matrix, gauge, *beta, bracket.as_deref(), *emit_masses)?,
        Command::Coe { witness, action, side } => cmd_coe(&cfg, witness, *action, *side)?,
        Command::Zeta { matrix, terms } => cmd_zeta(matrix, *terms)?,
        Command::Example { dir } => (cmd_example(dir)?, None),
    };
    let text = render(output, cfg.format)?;
    match &cfg.output {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?
        }
        None => print!("{text}"),
    }
    Ok(deferred)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(warning)) => {
            eprintln!("warning: {warning}");
            ExitCode::from(warning.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
