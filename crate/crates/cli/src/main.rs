// SPDX-License-Identifier: Apache-2.0

//! `revlatch`: inspect reversible gates, build and check latch netlists,
//! reproduce the published cost tables and run lower-bound searches.
//!
//! Exit status: 0 success, 1 usage or input error, 2 a check failed,
//! 3 search bounds exceed capacity.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use revlatch_core::bits::BitVector;
use revlatch_core::exec::Exec;
use revlatch_core::expr::Expr;
use revlatch_core::gate::{
    check_bijective, check_nand_universality, inverse_gate, truth_table, Bijectivity, GateLibrary, GateSpec,
    TruthTable, GATE_SYMBOLS,
};
use revlatch_core::metrics::{cost_report, Convention};
use revlatch_core::netlist::{builtin_circuit, parse_with_library, serialize, validate, Circuit, BUILTIN_NAMES};
use revlatch_core::reference::reference_table;
use revlatch_core::report::{compare_report, render_truth_table, reproduce, RowStatus};
use revlatch_core::search::{
    capacity_from_env, default_library, min_gates_with, SearchBounds, SearchError, SearchResult, TargetSpec,
};
use revlatch_core::simulator::{check_characteristic_with, simulate_sequence, Bindings, LatchState};

const OUTPUT_SYMBOLS: [&str; 8] = ["P", "Q", "R", "S", "T", "U", "V", "W"];

#[derive(Parser)]
#[command(name = "revlatch", version, about = "Reversible gate and latch toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a gate.
    #[command(subcommand)]
    Gate(GateCommand),
    /// Validate, measure or emit netlists.
    #[command(subcommand)]
    Circuit(CircuitCommand),
    /// Run input events or check a characteristic equation.
    Simulate(SimulateArgs),
    /// Recompute one of tables I..V.
    Reproduce {
        table: String,
        #[arg(long)]
        json: bool,
    },
    /// Smallest gate count realizing a latch target.
    Search(SearchArgs),
}

#[derive(Args)]
struct GateArgs {
    /// Built-in gate name (NOT, FG, TG, FRG, PG, SG) or a name defined in --file.
    name: String,
    /// JSON file with gate definitions: {"name", "arity", "outputs"} or a list of them.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum GateCommand {
    /// Print the truth table.
    Table(GateArgs),
    /// Check that the gate is a bijection.
    Verify(GateArgs),
    /// Print the inverse truth table.
    Inverse(GateArgs),
    /// Check that the last output is NAND of the two unbound inputs.
    Nand {
        #[command(flatten)]
        gate: GateArgs,
        /// Constant bindings such as `C=0,D=1` (default for SG).
        #[arg(long)]
        bind: Option<String>,
    },
}

#[derive(Subcommand)]
enum CircuitCommand {
    Validate {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    Metrics {
        file: PathBuf,
        #[arg(long, default_value = "paper")]
        convention: Convention,
        #[arg(long)]
        json: bool,
    },
    /// Emit a reference netlist.
    Builtin {
        name: String,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SimulateArgs {
    file: PathBuf,
    /// Initial state, e.g. `Q=0`. States default to 0.
    #[arg(long)]
    init: Option<String>,
    /// Events separated by `;`, each a list like `E=1,D=0`.
    #[arg(long)]
    inputs: Option<String>,
    /// Next-state equation to verify on every assignment.
    #[arg(long)]
    check: Option<String>,
    /// State the equation describes, for circuits with several states.
    #[arg(long)]
    state: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    target: String,
    /// Largest gate count to try; defaults to the claimed count.
    #[arg(long)]
    max_gates: Option<usize>,
    #[arg(long, default_value_t = 6)]
    max_lines: usize,
    /// Comma-separated gate names.
    #[arg(long)]
    library: Option<String>,
    /// Allow complemented primary inputs. JK targets run both ways when omitted.
    #[arg(long)]
    allow_complemented: Option<bool>,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    json: bool,
}

enum Failure {
    Input(anyhow::Error),
    Capacity(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

type Outcome = Result<u8, Failure>;

/// Stdout writers that end the process quietly when the reader goes away.
macro_rules! out {
    ($($arg:tt)*) => { emit(format_args!($($arg)*), false) };
}

macro_rules! outln {
    () => { emit(format_args!(""), true) };
    ($($arg:tt)*) => { emit(format_args!($($arg)*), true) };
}

fn emit(args: fmt::Arguments<'_>, newline: bool) {
    let mut stdout = io::stdout().lock();
    let written = stdout.write_fmt(args).and_then(|()| if newline { stdout.write_all(b"\n") } else { Ok(()) });
    if let Err(e) = written {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        panic!("writing to stdout: {e}");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Gate(cmd) => cmd_gate(cmd),
        Command::Circuit(cmd) => cmd_circuit(cmd),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Reproduce { table, json } => cmd_reproduce(&table, json),
        Command::Search(args) => cmd_search(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Capacity(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn print_json(v: &Value) {
    outln!("{}", serde_json::to_string_pretty(v).expect("JSON value serializes"));
}

// ---------------------------------------------------------------------------
// gate

fn load_gate(args: &GateArgs) -> anyhow::Result<Arc<GateSpec>> {
    let mut library = GateLibrary::builtin();
    if let Some(path) = &args.file {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let doc: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let defs = match doc {
            Value::Array(items) => items,
            other => vec![other],
        };
        for def in defs {
            let name = def["name"].as_str().ok_or_else(|| anyhow!("gate definition needs a string `name`"))?;
            let arity = def["arity"].as_u64().ok_or_else(|| anyhow!("gate {name}: `arity` must be a number"))?;
            let outputs: Vec<&str> = def["outputs"]
                .as_array()
                .ok_or_else(|| anyhow!("gate {name}: `outputs` must be a list"))?
                .iter()
                .map(|o| o.as_str().ok_or_else(|| anyhow!("gate {name}: outputs must be strings")))
                .collect::<Result<_, _>>()?;
            library.insert(Arc::new(GateSpec::parse(name, arity as usize, &outputs)?))?;
        }
    }
    library.get(&args.name).ok_or_else(|| anyhow!("unknown gate `{}`", args.name))
}

fn table_rows(table: &TruthTable) -> Vec<(BitVector, BitVector)> {
    (0..table.len()).map(|i| (BitVector::new(i as u32, table.arity()), table.row(i))).collect()
}

fn rows_json(rows: &[(BitVector, BitVector)]) -> Value {
    rows.iter().map(|(i, o)| json!({"input": i.to_string(), "output": o.to_string()})).collect()
}

fn cmd_gate(cmd: GateCommand) -> Outcome {
    match cmd {
        GateCommand::Table(args) => {
            let gate = load_gate(&args)?;
            let rows = table_rows(&truth_table(&gate)?);
            if args.json {
                print_json(&json!({
                    "gate": gate.name(),
                    "arity": gate.arity(),
                    "outputs": gate.outputs().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                    "rows": rows_json(&rows),
                }));
            } else {
                let outs: Vec<String> = gate.outputs().iter().map(|e| e.to_string()).collect();
                let outs: Vec<&str> = outs.iter().map(String::as_str).collect();
                out!("{}", render_truth_table(&GATE_SYMBOLS[..gate.arity()], &outs, &rows));
            }
            Ok(0)
        }
        GateCommand::Verify(args) => {
            let gate = load_gate(&args)?;
            let verdict = check_bijective(&truth_table(&gate)?);
            let ok = verdict.is_bijective();
            if args.json {
                let collision = match verdict {
                    Bijectivity::Collision { first, second } => json!([first, second]),
                    Bijectivity::Bijective => Value::Null,
                };
                print_json(&json!({"gate": gate.name(), "bijective": ok, "collision": collision}));
            } else {
                match verdict {
                    Bijectivity::Bijective => outln!("{}: bijective", gate.name()),
                    Bijectivity::Collision { first, second } => {
                        outln!("{}: not bijective, rows {first} and {second} collide", gate.name())
                    }
                }
            }
            Ok(if ok { 0 } else { 2 })
        }
        GateCommand::Inverse(args) => {
            let gate = load_gate(&args)?;
            let rows = table_rows(&inverse_gate(&gate)?);
            if args.json {
                print_json(&json!({"gate": gate.name(), "inverse": true, "rows": rows_json(&rows)}));
            } else {
                let n = gate.arity();
                out!("{}", render_truth_table(&OUTPUT_SYMBOLS[..n], &GATE_SYMBOLS[..n], &rows));
            }
            Ok(0)
        }
        GateCommand::Nand { gate: args, bind } => {
            let gate = load_gate(&args)?;
            let bind = match bind {
                Some(text) => text,
                None if gate.name() == "SG" => "C=0,D=1".to_string(),
                None => return Err(anyhow!("NAND check for {} needs --bind", gate.name()).into()),
            };
            let mut constants = BTreeMap::new();
            for (name, value) in parse_assignments(&bind)? {
                let port = GATE_SYMBOLS[..gate.arity()]
                    .iter()
                    .position(|s| *s == name)
                    .ok_or_else(|| anyhow!("{} has no input `{name}`", gate.name()))?;
                constants.insert(port, value);
            }
            let verdict = check_nand_universality(&gate, &constants)?;
            let port = verdict.output_port + 1;
            if args.json {
                print_json(&json!({
                    "gate": gate.name(),
                    "bindings": bind,
                    "output": port,
                    "holds": verdict.holds,
                    "rows": verdict.rows.iter().map(|r| json!({"a": r.a, "b": r.b, "output": r.output})).collect::<Vec<_>>(),
                }));
            } else if verdict.holds {
                outln!("NAND at output {port} under {bind}");
            } else {
                outln!("output {port} is not NAND under {bind}");
                for r in &verdict.rows {
                    outln!("  {} {} -> {}", u8::from(r.a), u8::from(r.b), u8::from(r.output));
                }
            }
            Ok(if verdict.holds { 0 } else { 2 })
        }
    }
}

// ---------------------------------------------------------------------------
// circuit

fn load_circuit(path: &Path) -> anyhow::Result<Circuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let circuit =
        parse_with_library(&text, &GateLibrary::builtin()).with_context(|| format!("parsing {}", path.display()))?;
    Ok(circuit)
}

fn cmd_circuit(cmd: CircuitCommand) -> Outcome {
    match cmd {
        CircuitCommand::Validate { file, json } => {
            let circuit = load_circuit(&file)?;
            match validate(&circuit) {
                Ok(()) => {
                    if json {
                        print_json(&json!({"valid": true}));
                    } else {
                        outln!("valid");
                    }
                    Ok(0)
                }
                Err(e) => {
                    if json {
                        print_json(&json!({
                            "valid": false,
                            "rule": e.rule.code(),
                            "element": e.element,
                            "message": e.message,
                        }));
                    } else {
                        outln!("invalid: {e}");
                    }
                    Ok(1)
                }
            }
        }
        CircuitCommand::Metrics { file, convention, json } => {
            let circuit = load_circuit(&file)?;
            validate(&circuit)?;
            let report = cost_report(&circuit, convention);
            let published = published_hw(&circuit, convention);
            if json {
                let mut v = serde_json::to_value(&report)?;
                v["hw_complexity_text"] = json!(report.hw_complexity.to_string());
                v["convention"] = json!(convention.as_str());
                if let Some(p) = &published {
                    v["published"] = p.clone();
                }
                print_json(&v);
            } else {
                outln!("{report}");
                for item in &report.hw_breakdown {
                    outln!("  {:<28} {}", item.source, item.cost);
                }
                if let Some(p) = published {
                    outln!(
                        "published hw     {} ({})",
                        p["paper"].as_str().unwrap_or("-"),
                        p["status"].as_str().unwrap_or("-")
                    );
                    if let Some(note) = p["note"].as_str() {
                        outln!("  note: {note}");
                    }
                }
            }
            Ok(0)
        }
        CircuitCommand::Builtin { name, output } => {
            let circuit = builtin_circuit(&name)
                .ok_or_else(|| anyhow!("unknown builtin `{name}` (expected one of {})", BUILTIN_NAMES.join(", ")))?;
            let text = serialize(&circuit)?;
            match output {
                Some(path) => fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?,
                None => outln!("{text}"),
            }
            Ok(0)
        }
    }
}

/// The published hardware-complexity figure for `circuit` when it is one of
/// the reference designs that carries one.
fn published_hw(circuit: &Circuit, convention: Convention) -> Option<Value> {
    let (id, _) = [("III", "d-latch-qq"), ("V", "jk-latch-qq")]
        .into_iter()
        .find(|(_, name)| builtin_circuit(name).as_ref() == Some(circuit))?;
    let reference = reference_table(id)?;
    let report = compare_report(circuit, &reference, convention);
    let row = report.rows.into_iter().find(|r| r.metric == "hw" && r.design == reference.this_work.label)?;
    let status = match row.status {
        RowStatus::Match => "match",
        RowStatus::Annotated => "annotated",
        _ => "MISMATCH",
    };
    Some(json!({"table": id, "paper": row.paper, "status": status, "note": row.note}))
}

// ---------------------------------------------------------------------------
// simulate

fn parse_assignments(text: &str) -> anyhow::Result<Vec<(String, bool)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (name, value) = item.split_once('=').ok_or_else(|| anyhow!("expected NAME=0|1, got `{item}`"))?;
            let value = match value.trim() {
                "0" => false,
                "1" => true,
                other => bail!("value of `{}` must be 0 or 1, got `{other}`", name.trim()),
            };
            Ok((name.trim().to_string(), value))
        })
        .collect()
}

fn cmd_simulate(args: SimulateArgs) -> Outcome {
    if args.inputs.is_none() && args.check.is_none() {
        return Err(anyhow!("nothing to do: give --inputs and/or --check").into());
    }
    let circuit = load_circuit(&args.file)?;
    validate(&circuit)?;
    let mut code = 0;
    if let Some(events) = &args.inputs {
        let mut init: LatchState = LatchState::new(circuit.state_names().into_iter().map(|s| (s, false)));
        if let Some(text) = &args.init {
            for (name, value) in parse_assignments(text)? {
                if !init.values.contains_key(&name) {
                    bail_input(format!("`{name}` is not a state of the circuit"))?;
                }
                init.values.insert(name, value);
            }
        }
        let events: Vec<Bindings> = events
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|e| parse_assignments(e).map(|v| v.into_iter().collect()))
            .collect::<Result<_, _>>()?;
        let trace = simulate_sequence(&circuit, &events, &init)?;
        out!("{}", trace.to_json_lines());
        for i in trace.unstable_events() {
            eprintln!("warning: event {i} does not settle under held inputs");
        }
    }
    if let Some(text) = &args.check {
        let equation: Expr = text.parse().with_context(|| format!("equation `{text}`"))?;
        let verdict = check_characteristic_with(Exec::default(), &circuit, args.state.as_deref(), &equation)?;
        if args.json {
            let mut v = serde_json::to_value(&verdict)?;
            v["counterexample_text"] = json!(verdict.counterexample_text());
            print_json(&v);
        } else if verdict.holds {
            outln!("holds ({}/{})", verdict.total, verdict.total);
        } else {
            let cx = verdict.counterexample_text().unwrap_or_default();
            match verdict.mismatch {
                Some((expected, got)) => outln!(
                    "counterexample {cx}: equation gives {}, circuit gives {}",
                    u8::from(expected),
                    u8::from(got)
                ),
                None => outln!("counterexample {cx}"),
            }
        }
        if !verdict.holds {
            code = 2;
        }
    }
    Ok(code)
}

fn bail_input(msg: String) -> Result<(), Failure> {
    Err(Failure::Input(anyhow!(msg)))
}

// ---------------------------------------------------------------------------
// reproduce

fn cmd_reproduce(table: &str, json_out: bool) -> Outcome {
    let r = reproduce(table)?;
    if json_out {
        print_json(&r.json);
    } else {
        out!("{}", r.text);
    }
    Ok(if r.passed { 0 } else { 2 })
}

// ---------------------------------------------------------------------------
// search

fn cmd_search(args: SearchArgs) -> Outcome {
    let base = TargetSpec::builtin(&args.target)?;
    let modes: Vec<bool> = match args.allow_complemented {
        Some(v) => vec![v],
        None if base.input_names.iter().any(|n| n == "K") => vec![true, false],
        None => vec![base.allow_complemented_inputs],
    };
    let max_gates = args.max_gates.or(base.claimed_min_gates).unwrap_or(1);
    let bounds = SearchBounds::new(max_gates, args.max_lines);
    let exec = if args.sequential { Exec::Sequential } else { Exec::default() };
    let mut results: Vec<SearchResult> = Vec::new();
    for allow in modes {
        let spec = base.clone().with_complemented_inputs(allow);
        let library = match &args.library {
            Some(names) => {
                let names: Vec<&str> = names.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                GateLibrary::from_names(&names).map_err(|e| anyhow!(e))?
            }
            None => default_library(!allow && base.allow_complemented_inputs),
        };
        match min_gates_with(exec, &spec, &library, bounds, capacity_from_env()) {
            Ok(r) => results.push(r),
            Err(e @ SearchError::Capacity { .. }) => return Err(Failure::Capacity(e.to_string())),
            Err(e) => return Err(e.into()),
        }
    }
    // The first run carries the claim; a second, strict run (JK targets
    // without complemented inputs) is reported alongside it.
    let label = |i: usize| {
        if results.len() == 1 {
            None
        } else if i == 0 {
            Some("primary")
        } else {
            Some("strict")
        }
    };
    if args.json {
        let docs: Vec<Value> = results
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut v = r.to_json();
                if let Some(mode) = label(i) {
                    v["mode"] = json!(mode);
                }
                v
            })
            .collect();
        if docs.len() == 1 {
            print_json(&docs[0]);
        } else {
            print_json(&json!({"runs": docs}));
        }
    } else {
        for (i, r) in results.iter().enumerate() {
            match label(i) {
                Some(mode) => outln!("[{mode}] {r}"),
                None => outln!("{r}"),
            }
            if let Some(w) = &r.witness {
                outln!("{}", serialize(w)?);
            }
        }
    }
    Ok(if results[0].claim_status().is_ok() { 0 } else { 2 })
}
