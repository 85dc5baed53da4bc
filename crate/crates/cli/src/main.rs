mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tspqa_core::digital::{bitstring, run_digital_qa, sample_outcomes, DigitalConfig, ToffoliSchedule};
use tspqa_core::encoding::{decode, encode_edge, encode_permutation, Decoded, PenaltyWeights, QuadraticModel, MODEL_FORMAT_VERSION};
use tspqa_core::experiments::{recompute_summary, run_experiment, ExperimentKind, ExperimentParams, ExperimentReport, SolverKind};
use tspqa_core::instances::{generate_ensemble, load_instance, save_instance_with_command, INSTANCE_FORMAT_VERSION};
use tspqa_core::oracles::exhaustive_ground_state;
use tspqa_core::solvers::{exact_edge_ground_state, simulated_annealing, simulated_quantum_annealing, AnnealSchedule, SolveResult};
use tspqa_core::subtour_loop::{iterate_solve, ConstraintsPerRound, InnerSolver, LoopPolicy, RoundOutcome};
use tspqa_core::{Error, TspInstance, VERSION};

#[derive(Parser, Debug)]
#[command(name = "tspqa", about = "TSP encodings for quantum annealing: generate, encode, solve, iterate, simulate")]
struct Cli {
    /// Worker threads for ensemble runs (default: sequential).
    #[arg(long, global = true, value_name = "K")]
    jobs: Option<usize>,
    /// JSON object of default flag values; flags on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate uniform random instances on the unit square.
    Gen(GenArgs),
    /// Write the QUBO (or Ising) model of an instance.
    Encode(EncodeArgs),
    /// Minimize a model with one solver.
    Solve(SolveArgs),
    /// Run iterative subtour elimination on an edge model.
    Loop(LoopArgs),
    /// Statevector simulation of digital annealing on a small instance.
    Digital(DigitalArgs),
    /// Run a seeded ensemble experiment.
    Experiment(ExperimentArgs),
    /// Print (and check) the summary of saved experiment reports.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mapping {
    Permutation,
    Edge,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    #[arg(long, value_name = "FILE")]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "edge")]
    mapping: Mapping,
    /// Permutation mapping on the full N x N grid instead of pinning city 0.
    #[arg(long)]
    full: bool,
    /// Keep only each city's L nearest neighbours (edge mapping).
    #[arg(long = "L", value_name = "L")]
    truncation: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    etaprime: Option<f64>,
    #[arg(long)]
    etadoubleprime: Option<f64>,
    /// Cut penalty on a city subset, e.g. `--subset 0,3,7`; repeatable.
    #[arg(long, value_name = "CITIES", action = ArgAction::Append)]
    subset: Vec<String>,
    /// Cut target of subset penalties.
    #[arg(long, default_value_t = 2)]
    target: u32,
    /// Use slack variables instead of a fixed cut target.
    #[arg(long)]
    slack: bool,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Export in spin form.
    #[arg(long)]
    ising: bool,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ScheduleArgs {
    /// Sweeps (Monte Carlo steps).
    #[arg(long, default_value_t = 1000)]
    mcs: usize,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    tf: Option<f64>,
    #[arg(long)]
    gamma0: Option<f64>,
    #[arg(long)]
    gammaf: Option<f64>,
    #[arg(long, default_value_t = 32)]
    slices: usize,
    #[arg(long)]
    beta: Option<f64>,
}

impl ScheduleArgs {
    fn schedule(&self) -> AnnealSchedule {
        AnnealSchedule {
            sweeps: self.mcs,
            t0: self.t0,
            tf: self.tf,
            gamma0: self.gamma0,
            gammaf: self.gammaf,
            slices: self.slices,
            beta: self.beta,
            trace: false,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SolveSolver {
    Sa,
    Sqa,
    /// Branch and bound over cycle covers (edge mapping).
    Exact,
    /// Enumerate every configuration (at most 26 variables).
    Exhaustive,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "sa")]
    solver: SolveSolver,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the result record as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum LoopSolver {
    Exact,
    Sa,
    Sqa,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PerRound {
    All,
    One,
}

impl From<PerRound> for ConstraintsPerRound {
    fn from(p: PerRound) -> Self {
        match p {
            PerRound::All => ConstraintsPerRound::All,
            PerRound::One => ConstraintsPerRound::One,
        }
    }
}

#[derive(Args, Debug)]
struct LoopArgs {
    #[arg(long, value_name = "FILE")]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    solver: LoopSolver,
    /// Cut target C (2 or 3).
    #[arg(long, default_value_t = 2)]
    target: u32,
    /// Growth factor of eta per round (default 1 for C=2, 2 for C=3).
    #[arg(long)]
    escalation: Option<f64>,
    #[arg(long, default_value_t = 10)]
    max_iterations: usize,
    #[arg(long, value_enum, default_value = "all")]
    constraints_per_round: PerRound,
    #[arg(long = "L", value_name = "L")]
    truncation: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    etaprime: Option<f64>,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GadgetSchedule {
    Tree,
    Ladder,
}

#[derive(Args, Debug)]
struct DigitalArgs {
    #[arg(long, value_name = "FILE")]
    instance: PathBuf,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long, default_value_t = 0.25)]
    dt: f64,
    /// Penalty of an empty cut (default: eta).
    #[arg(long)]
    etaprime: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Subset whose empty cut is penalized by a gadget; repeatable.
    #[arg(long, value_name = "CITIES", action = ArgAction::Append)]
    subset: Vec<String>,
    #[arg(long, value_enum, default_value = "tree")]
    gadget: GadgetSchedule,
    /// Also draw this many measurement samples.
    #[arg(long)]
    shots: Option<usize>,
    /// Seed for `--shots`.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV of every outcome: bitstring, probability, decoded structure.
    #[arg(long, value_name = "CSV")]
    histogram_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// subtour-fraction | ground-connection-distribution | iterative-success |
    /// connection-histograms-by-mcs | edge-rank-decay
    kind: String,
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// City counts for edge-rank-decay.
    #[arg(long, value_delimiter = ',', default_value = "8,12,16")]
    n_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "exact,sa")]
    solvers: Vec<String>,
    /// Sweep counts for the annealing solvers.
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,100000")]
    mcs: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    target: u32,
    #[arg(long, default_value_t = 10)]
    max_iterations: usize,
    #[arg(long, value_enum, default_value = "all")]
    constraints_per_round: PerRound,
    /// Rounds whose connection histograms are reported.
    #[arg(long, value_delimiter = ',', default_value = "1,4")]
    iterations: Vec<usize>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    tf: Option<f64>,
    #[arg(long)]
    gamma0: Option<f64>,
    #[arg(long)]
    gammaf: Option<f64>,
    #[arg(long, default_value_t = 32)]
    slices: usize,
    #[arg(long)]
    beta: Option<f64>,
    /// Directory for `<kind>.csv` and `<kind>.json`.
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Report JSON files written by `experiment`.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Recompute each summary from its rows and fail on mismatch.
    #[arg(long)]
    check: bool,
}

/// Command failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_capacity_or_precondition() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

fn version_text() -> String {
    format!("{VERSION} (instance format {INSTANCE_FORMAT_VERSION}, model format {MODEL_FORMAT_VERSION})")
}

fn shell_quote(arg: &str) -> String {
    let safe = !arg.is_empty()
        && arg
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "-_./=,:@+".contains(c));
    if safe {
        arg.to_string()
    } else {
        format!("'{}'", arg.replace('\'', r"'\''"))
    }
}

fn command_line(argv: &[String]) -> String {
    std::iter::once("tspqa".to_string())
        .chain(argv.iter().skip(1).map(|a| shell_quote(a)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Defaults a missing seed to 0 and says so.
fn seed_or_default(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        eprintln!("seed: 0 (default)");
        0
    })
}

fn parse_subset(text: &str) -> Result<Vec<usize>, Failure> {
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| usage(format!("bad city index '{s}' in subset '{text}'"))))
        .collect()
}

fn write_output(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io { path: p.to_path_buf(), source: e }.into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn weights(inst: &TspInstance, eta: Option<f64>, etaprime: Option<f64>, etadoubleprime: Option<f64>) -> PenaltyWeights {
    let mut w = PenaltyWeights::defaults_for(inst);
    if let Some(e) = eta {
        w.eta = e;
        w.eta_prime = e;
        w.eta_double_prime = 4.0 * e;
    }
    if let Some(e) = etaprime {
        w.eta_prime = e;
        w.eta_double_prime = 4.0 * e;
    }
    if let Some(e) = etadoubleprime {
        w.eta_double_prime = e;
    }
    w
}

fn build_model(args: &ModelArgs) -> Result<(TspInstance, QuadraticModel), Failure> {
    let inst = load_instance(&args.instance)?;
    let w = weights(&inst, args.eta, args.etaprime, args.etadoubleprime);
    let mut model = match args.mapping {
        Mapping::Permutation => {
            if args.truncation.is_some() || !args.subset.is_empty() {
                return Err(usage("--L and --subset apply to the edge mapping only"));
            }
            encode_permutation(&inst, &w, !args.full)?
        }
        Mapping::Edge => encode_edge(&inst, &w, args.truncation)?,
    };
    for s in &args.subset {
        let subset = parse_subset(s)?;
        let note = if args.slack {
            model.add_slack_subtour_penalty(&subset, w.eta_prime, w.eta_double_prime)?
        } else {
            model.add_subtour_penalty(&subset, args.target, w.eta_prime)?
        };
        if note.vacuous {
            eprintln!("warning: truncation removed every edge across the cut of {{{s}}}; its penalty is a constant");
        }
    }
    Ok((inst, model))
}

fn cmd_gen(a: &GenArgs, cmd: &str) -> CmdResult {
    let seed = seed_or_default(a.seed);
    let ens = generate_ensemble(a.n, a.count, seed)?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::Io { path: a.out.clone(), source: e })?;
    for inst in &ens {
        let path = a.out.join(format!("inst_n{}_seed{}.json", inst.n(), inst.seed()));
        save_instance_with_command(inst, &path, Some(cmd))?;
    }
    println!("wrote {} instance(s) with n = {} to {}", ens.len(), a.n, a.out.display());
    Ok(())
}

fn cmd_encode(a: &EncodeArgs, cmd: &str) -> CmdResult {
    let (_, model) = build_model(&a.model)?;
    let (vars, couplers) = model.resource_counts();
    eprintln!("variables {vars} couplers {couplers}");
    let comment = format!("command: {cmd}");
    let text = if a.ising {
        model.to_ising().to_text(Some(&comment))
    } else {
        model.to_text(Some(&comment))
    };
    write_output(a.out.as_deref(), &text)
}

fn decoded_json(d: &Decoded) -> Value {
    match d {
        Decoded::Tour(t) => json!({"kind": "tour", "order": t.order, "length": t.length}),
        Decoded::Cover(c) => json!({"kind": d.tag(), "cycles": c.cycles, "weight": c.total_weight}),
        Decoded::Violation(v) => json!({"kind": "violation", "details": v.to_string()}),
    }
}

fn result_json(r: &SolveResult) -> Value {
    serde_json::to_value(r).expect("result serializes")
}

fn cmd_solve(a: &SolveArgs, cmd: &str) -> CmdResult {
    let (inst, model) = build_model(&a.model)?;
    let schedule = a.schedule.schedule();
    let (seed, result, extra) = match a.solver {
        SolveSolver::Sa => {
            let seed = seed_or_default(a.seed);
            (Some(seed), simulated_annealing(&model, &schedule, seed)?, json!({}))
        }
        SolveSolver::Sqa => {
            let seed = seed_or_default(a.seed);
            (Some(seed), simulated_quantum_annealing(&model, &schedule, seed)?, json!({}))
        }
        SolveSolver::Exact => {
            let out = exact_edge_ground_state(&inst, &model)?;
            let extra = json!({"certified": out.certified, "covers_evaluated": out.covers_evaluated});
            (None, out.result, extra)
        }
        SolveSolver::Exhaustive => {
            let (config, energy) = exhaustive_ground_state(&model)?;
            let r = SolveResult {
                best_config: config,
                best_energy: energy,
                energy_trace: None,
                seed: 0,
                sweeps_used: 0,
            };
            (None, r, json!({}))
        }
    };
    let decoded = decode(&inst, &model, &result.best_config)?;
    println!("energy {} decoded {}", result.best_energy, decoded.tag());
    match &decoded {
        Decoded::Tour(t) => println!("tour {:?} length {}", t.order, t.length),
        Decoded::Cover(c) => println!("cycles {:?} weight {}", c.cycles, c.total_weight),
        Decoded::Violation(v) => println!("{v}"),
    }
    let record = json!({
        "command": cmd,
        "tool_version": VERSION,
        "solver": format!("{:?}", a.solver).to_lowercase(),
        "seed": seed,
        "result": result_json(&result),
        "decoded": decoded_json(&decoded),
        "solver_details": extra,
    });
    if let Some(p) = &a.out {
        write_output(Some(p), &format!("{}\n", serde_json::to_string_pretty(&record).unwrap()))?;
    }
    Ok(())
}

fn cmd_loop(a: &LoopArgs, cmd: &str) -> CmdResult {
    let inst = load_instance(&a.instance)?;
    let schedule = a.schedule.schedule();
    let solver = match a.solver {
        LoopSolver::Exact => InnerSolver::Exact,
        LoopSolver::Sa => InnerSolver::Sa(schedule),
        LoopSolver::Sqa => InnerSolver::Sqa(schedule),
    };
    let seed = match a.solver {
        LoopSolver::Exact => a.seed.unwrap_or(0),
        _ => seed_or_default(a.seed),
    };
    let mut policy = LoopPolicy::new(solver, a.target);
    if let Some(e) = a.escalation {
        policy.escalation = e;
    }
    policy.max_iterations = a.max_iterations;
    policy.constraints_per_round = a.constraints_per_round.into();
    policy.truncation = a.truncation;
    if a.eta.is_some() || a.etaprime.is_some() {
        policy.weights = Some(weights(&inst, a.eta, a.etaprime, None));
    }
    let out = iterate_solve(&inst, &policy, seed)?;
    for log in &out.logs {
        let what = match &log.outcome {
            RoundOutcome::Cover(c) => format!("cycles {:?}", c.cycle_sizes()),
            RoundOutcome::Violation(v) => format!("violation {v}"),
        };
        println!(
            "iteration {} eta {} energy {} {what} added {}",
            log.iteration,
            log.eta,
            log.result.best_energy,
            log.added.len()
        );
    }
    match &out.tour {
        Some(t) => println!("status {:?} tour {:?} length {}", out.status, t.order, t.length),
        None => println!("status {:?}", out.status),
    }
    if let Some(p) = &a.out {
        let record = json!({
            "command": cmd,
            "tool_version": VERSION,
            "seed": seed,
            "policy": serde_json::to_value(&policy).unwrap(),
            "outcome": serde_json::to_value(&out).unwrap(),
        });
        write_output(Some(p), &format!("{}\n", serde_json::to_string_pretty(&record).unwrap()))?;
    }
    Ok(())
}

fn cmd_digital(a: &DigitalArgs, cmd: &str) -> CmdResult {
    let inst = load_instance(&a.instance)?;
    let w = weights(&inst, a.eta, None, None);
    let eta_prime = a.etaprime.unwrap_or(w.eta_prime);
    let mut cfg = DigitalConfig::new(a.steps, a.dt);
    cfg.weights = Some(w);
    cfg.schedule = match a.gadget {
        GadgetSchedule::Tree => ToffoliSchedule::Tree,
        GadgetSchedule::Ladder => ToffoliSchedule::Ladder,
    };
    for s in &a.subset {
        cfg.subsets.push((parse_subset(s)?, eta_prime));
    }
    let out = run_digital_qa(&inst, &cfg)?;
    let nq = out.problem_qubits();
    println!(
        "qubits {} (problem {nq}, ancilla {}) steps {} dt {}",
        nq + out.ancilla_qubits,
        out.ancilla_qubits,
        a.steps,
        a.dt
    );
    println!(
        "most probable {} p = {} decoded {}",
        bitstring(out.most_probable, nq),
        out.probabilities[out.most_probable],
        out.decoded.tag()
    );
    if let Decoded::Cover(c) = &out.decoded {
        println!("cycles {:?} weight {}", c.cycles, c.total_weight);
    }
    let counts = match a.shots {
        Some(shots) => Some(sample_outcomes(&out.probabilities, shots, seed_or_default(a.seed))?),
        None => None,
    };
    if let Some(path) = &a.histogram_out {
        let mut text = format!("# command: {cmd}\n");
        text.push_str(if counts.is_some() { "bitstring,probability,decoded,count\n" } else { "bitstring,probability,decoded\n" });
        for (z, &p) in out.probabilities.iter().enumerate() {
            let tag = decode(&inst, &out.model, &out.config(z))?.tag();
            write!(text, "{},{p},{tag}", bitstring(z, nq)).unwrap();
            if let Some(c) = &counts {
                write!(text, ",{}", c[z]).unwrap();
            }
            text.push('\n');
        }
        write_output(Some(path), &text)?;
    }
    Ok(())
}

fn cmd_experiment(a: &ExperimentArgs, cmd: &str) -> CmdResult {
    let kind: ExperimentKind = a.kind.parse().map_err(|e: Error| usage(e.to_string()))?;
    let solvers = a
        .solvers
        .iter()
        .map(|s| s.parse::<SolverKind>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(e.to_string()))?;
    let params = ExperimentParams {
        n: a.n,
        count: a.count,
        seed: seed_or_default(a.seed),
        n_grid: a.n_grid.clone(),
        solvers,
        mcs_grid: a.mcs.clone(),
        target: a.target,
        max_iterations: a.max_iterations,
        constraints_per_round: a.constraints_per_round.into(),
        iterations: a.iterations.clone(),
        schedule: AnnealSchedule {
            sweeps: a.mcs.first().copied().unwrap_or(1000),
            t0: a.t0,
            tf: a.tf,
            gamma0: a.gamma0,
            gammaf: a.gammaf,
            slices: a.slices,
            beta: a.beta,
            trace: false,
        },
    };
    let report = run_experiment(kind, &params, Some(cmd.to_string()))?;
    let (csv, json) = report.write(&a.out, kind.id())?;
    println!("experiment {} n {} count {} seed {}", kind.id(), a.n, a.count, params.seed);
    print!("{}", report.summary_table());
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> CmdResult {
    for path in &a.reports {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
        let report = ExperimentReport::from_json(&text)?;
        println!("{} ({})", report.experiment, path.display());
        if let Some(c) = &report.command {
            println!("command: {c}");
        }
        print!("{}", report.summary_table());
        if a.check {
            if recompute_summary(&report)? != report.summary {
                return Err(usage(format!("{}: summary does not match its rows", path.display())));
            }
            println!("summary recomputes from {} rows", report.rows.len());
        }
    }
    Ok(())
}

fn run(cli: &Cli, cmd: &str) -> CmdResult {
    let threads = cli.jobs.unwrap_or(1).max(1);
    // Ignore a second initialization; the first pool stays in effect.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, cmd),
        Command::Encode(a) => cmd_encode(a, cmd),
        Command::Solve(a) => cmd_solve(a, cmd),
        Command::Loop(a) => cmd_loop(a, cmd),
        Command::Digital(a) => cmd_digital(a, cmd),
        Command::Experiment(a) => cmd_experiment(a, cmd),
        Command::Report(a) => cmd_report(a),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cmd = command_line(&argv);
    let expanded = match config::expand(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let matches = Cli::command().version(version_text()).try_get_matches_from(expanded);
    let cli = match matches.and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli, &cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
