use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use pbent::construct::{anf, build_example, predict_regularity, scan_coefficients, GluedSpecJson};
use pbent::quadratic::{certificate, QuadraticSpecJson};
use pbent::spectrum::{analyze, multiplicity_list, walsh_full, PFunctionJson};
use pbent::verify::run_all;
use pbent::{FieldCtx, GluedSpec, PFunction, QuadraticSpec};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "pbent", version, about = "Construct and classify p-ary bent functions")]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, env = "BENT_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Describe F_{p^n}: modulus, primitive element, traces of the power basis.
    Field {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        /// Monic modulus coefficients c_0,...,c_{n-1},1.
        #[arg(long, value_delimiter = ',')]
        modulus: Option<Vec<u32>>,
    },
    /// Walsh spectrum and classification of a function table, quadratic spec or glued spec.
    Analyze {
        file: PathBuf,
        /// Also write raw coefficients as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build a glued bent function from a worked example id (2..=6) or a spec file.
    Construct {
        #[arg(conflicts_with = "spec", required_unless_present = "spec")]
        example: Option<u32>,
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Directory for spec.json and table.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify every scalar tuple over a template of p components.
    Scan {
        file: PathBuf,
        /// Confirm each predicted verdict with the full spectrum.
        #[arg(long)]
        confirm_spectrum: bool,
    },
    /// Run the reproducibility checks.
    VerifyPaper {
        /// Replace the glued table of an example: ID=FILE with a function table JSON.
        #[arg(long = "table", value_name = "ID=FILE")]
        tables: Vec<String>,
    },
}

#[derive(Serialize)]
struct RunReport {
    command: Vec<String>,
    input_digest: String,
    timings_ms: BTreeMap<String, u128>,
    result: Value,
}

enum Failure {
    Input(anyhow::Error),
    Verification(RunReport),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

struct Timer {
    phases: BTreeMap<String, u128>,
    last: Instant,
}

impl Timer {
    fn new() -> Self {
        Timer { phases: BTreeMap::new(), last: Instant::now() }
    }

    fn lap(&mut self, phase: &str) {
        let now = Instant::now();
        *self.phases.entry(phase.to_string()).or_insert(0) += (now - self.last).as_millis();
        self.last = now;
    }
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_input(path: &Path) -> anyhow::Result<(Vec<u8>, Value)> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let value = serde_json::from_slice(&bytes).with_context(|| format!("{} is not valid JSON", path.display()))?;
    Ok((bytes, value))
}

fn parse<T: for<'de> Deserialize<'de>>(value: Value, what: &str) -> anyhow::Result<T> {
    serde_json::from_value(value).with_context(|| format!("invalid {what}"))
}

fn quadratic_from_json(json: &QuadraticSpecJson) -> anyhow::Result<QuadraticSpec> {
    let ctx = FieldCtx::new(json.p as u64, json.n, json.modulus.as_deref()).context("field \"p\"/\"n\"/\"modulus\"")?;
    QuadraticSpec::from_json(json, Arc::new(ctx)).context("quadratic spec")
}

/// Spectrum summary shared by `analyze` and `construct`.
fn spectrum_result(f: &PFunction, timer: &mut Timer, csv: Option<&Path>) -> anyhow::Result<Value> {
    let spectrum = walsh_full::<i64>(f);
    timer.lap("transform");
    if let Some(path) = csv {
        let file = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        spectrum.write_csv(std::io::BufWriter::new(file))?;
    }
    let report = analyze(&spectrum)?;
    timer.lap("classify");
    let degree = anf(f).degree();
    timer.lap("anf");
    let mut out = serde_json::to_value(&report)?;
    out["algebraic_degree"] = json!(degree);
    out["parseval"] = json!(spectrum.parseval_holds()?);
    if f.domain().is_product() {
        let slice = report.multiplicities_over(0..f.domain().field_size());
        out["zero_slice_multiplicities"] = json!(multiplicity_list(&slice));
    }
    Ok(out)
}

fn cmd_field(p: u64, n: usize, modulus: Option<Vec<u32>>) -> Result<(String, Value), Failure> {
    let ctx = FieldCtx::new(p, n, modulus.as_deref()).context("field parameters")?;
    let result = json!({
        "field": ctx.desc(),
        "order": ctx.order(),
        "primitive_element": ctx.primitive_element(),
        "basis_traces": ctx.basis_traces(),
    });
    Ok((digest(format!("field:{p}:{n}:{modulus:?}").as_bytes()), result))
}

fn cmd_analyze(file: &Path, csv: Option<&Path>, timer: &mut Timer) -> Result<(String, Value), Failure> {
    let (bytes, value) = read_input(file)?;
    let (f, extra) = if value.get("components").is_some() {
        let json: GluedSpecJson = parse(value, "glued spec")?;
        let spec = GluedSpec::from_json(&json).context("glued spec")?;
        let predicted = predict_regularity(&spec)?;
        (spec.glue(), json!({ "kind": "glued", "predicted_regularity": predicted }))
    } else if value.get("quad_terms").is_some() {
        let json: QuadraticSpecJson = parse(value, "quadratic spec")?;
        let spec = quadratic_from_json(&json)?;
        let extra = match certificate(&spec) {
            Ok(c) => json!({ "kind": "quadratic", "kernel_dimension": c.s, "beta": c.beta }),
            Err(_) => json!({ "kind": "quadratic" }),
        };
        (spec.to_table(), extra)
    } else if value.get("table").is_some() {
        let json: PFunctionJson = parse(value, "function table")?;
        (PFunction::from_json(&json).context("function table")?, json!({ "kind": "table" }))
    } else {
        return Err(anyhow!("{}: expected a \"table\", \"quad_terms\" or \"components\" field", file.display()).into());
    };
    timer.lap("parse");
    let mut result = spectrum_result(&f, timer, csv)?;
    result["input"] = extra;
    Ok((digest(&bytes), result))
}

fn cmd_construct(
    example: Option<u32>,
    spec_file: Option<&Path>,
    out: Option<&Path>,
    timer: &mut Timer,
) -> Result<(String, Value, bool), Failure> {
    let (input_digest, spec) = match (example, spec_file) {
        (Some(id), _) => (digest(format!("example:{id}").as_bytes()), build_example(id)?),
        (None, Some(path)) => {
            let (bytes, value) = read_input(path)?;
            let json: GluedSpecJson = parse(value, "glued spec")?;
            (digest(&bytes), GluedSpec::from_json(&json).context("glued spec")?)
        }
        (None, None) => return Err(anyhow!("give an example id or --spec").into()),
    };
    timer.lap("build");
    let f = spec.glue();
    let partition = spec.verify_support_partition()?;
    let predicted = predict_regularity(&spec)?;
    timer.lap("glue");
    let mut result = spectrum_result(&f, timer, None)?;
    result["example"] = json!(example);
    result["predicted_regularity"] = json!(predicted);
    result["support_partition"] = json!(partition);
    result["spec"] = json!(spec.to_json());
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        fs::write(dir.join("spec.json"), serde_json::to_vec_pretty(&spec.to_json())?)?;
        fs::write(dir.join("table.json"), serde_json::to_vec(&f.to_json())?)?;
        timer.lap("write");
    }
    let ok = result["is_bent"] == json!(true) && partition;
    Ok((input_digest, result, ok))
}

#[derive(Deserialize)]
struct ScanTemplate {
    components: Vec<QuadraticSpecJson>,
}

fn cmd_scan(file: &Path, confirm: bool, timer: &mut Timer) -> Result<(String, Value, bool), Failure> {
    let (bytes, value) = read_input(file)?;
    let template: ScanTemplate = parse(value, "scan template")?;
    let mut components = Vec::new();
    for (k, c) in template.components.iter().enumerate() {
        components.push(quadratic_from_json(c).with_context(|| format!("components[{k}]"))?);
    }
    if let Some(first) = components.first() {
        let desc = first.ctx().desc();
        if let Some(k) = components.iter().position(|c| c.ctx().desc() != desc) {
            return Err(anyhow!("components[{k}] is defined over a different field than components[0]").into());
        }
        let ctx = first.ctx().clone();
        components =
            components.iter().map(|c| QuadraticSpec::from_json(&c.to_json(), ctx.clone())).collect::<Result<_, _>>()?;
    }
    timer.lap("parse");
    let report = scan_coefficients(&components, confirm)?;
    timer.lap("scan");
    let ok = report.disagreements == 0;
    Ok((digest(&bytes), serde_json::to_value(report)?, ok))
}

fn cmd_verify(tables: &[String], timer: &mut Timer) -> Result<(String, Value, bool), Failure> {
    let mut replaced = BTreeMap::new();
    let mut hasher = Sha256::new();
    for entry in tables {
        let (id, path) = entry.split_once('=').ok_or_else(|| anyhow!("--table expects ID=FILE, got {entry:?}"))?;
        let id: u32 = id.parse().with_context(|| format!("--table id {id:?} is not a number"))?;
        let (bytes, value) = read_input(Path::new(path))?;
        let json: PFunctionJson = parse(value, "function table")?;
        replaced.insert(id, PFunction::from_json(&json).with_context(|| format!("table for example {id}"))?);
        hasher.update(id.to_le_bytes());
        hasher.update(&bytes);
    }
    timer.lap("parse");
    let results = run_all(&replaced);
    let mut criteria = Vec::new();
    for r in &results {
        eprintln!("{}", r.summary_line());
        timer.phases.insert(format!("criterion_{}", r.id), r.elapsed_ms);
        criteria.push(json!({
            "id": r.id,
            "name": r.name,
            "passed": r.passed,
            "budget_ms": r.budget_ms,
            "detail": r.detail,
        }));
    }
    timer.last = Instant::now();
    let ok = results.iter().all(|r| r.passed);
    let result = json!({ "all_passed": ok, "criteria": criteria });
    Ok((hex::encode(hasher.finalize()), result, ok))
}

fn run(cli: &Cli, echo: Vec<String>) -> Result<RunReport, Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(anyhow!("--threads must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    }
    let mut timer = Timer::new();
    let (input_digest, result, ok) = match &cli.command {
        Command::Field { p, n, modulus } => {
            let (d, r) = cmd_field(*p, *n, modulus.clone())?;
            (d, r, true)
        }
        Command::Analyze { file, csv } => {
            let (d, r) = cmd_analyze(file, csv.as_deref(), &mut timer)?;
            (d, r, true)
        }
        Command::Construct { example, spec, out } => {
            cmd_construct(*example, spec.as_deref(), out.as_deref(), &mut timer)?
        }
        Command::Scan { file, confirm_spectrum } => cmd_scan(file, *confirm_spectrum, &mut timer)?,
        Command::VerifyPaper { tables } => cmd_verify(tables, &mut timer)?,
    };
    let report = RunReport { command: echo, input_digest, timings_ms: timer.phases, result };
    if ok {
        Ok(report)
    } else {
        Err(Failure::Verification(report))
    }
}

fn print(report: &RunReport) {
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let echo: Vec<String> = std::env::args().skip(1).collect();
    match run(&cli, echo) {
        Ok(report) => {
            print(&report);
            ExitCode::SUCCESS
        }
        Err(Failure::Verification(report)) => {
            print(&report);
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
