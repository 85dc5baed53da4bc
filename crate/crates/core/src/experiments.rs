//! Seeded ensemble experiments with CSV / JSON reports.
//!
//! Every experiment produces a flat table of per-instance rows and a summary
//! computed only from those rows, so [`recompute_summary`] reproduces it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::instances::{generate_ensemble, Tour, TspInstance};
use crate::oracles::{connection_stats_against, min_cycle_cover, optimal_tour, CycleCover};
use crate::rng::derive_seed;
use crate::solvers::AnnealSchedule;
use crate::subtour_loop::{iterate_solve, ConstraintsPerRound, InnerSolver, LoopOutcome, LoopPolicy, RoundOutcome};

/// Stand-in sweep counts for the annealing experiments.
pub const DEFAULT_MCS_GRID: [usize; 4] = [100, 1_000, 10_000, 100_000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SubtourFraction,
    GroundConnectionDistribution,
    IterativeSuccess,
    ConnectionHistogramsByMcs,
    EdgeRankDecay,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::SubtourFraction,
        ExperimentKind::GroundConnectionDistribution,
        ExperimentKind::IterativeSuccess,
        ExperimentKind::ConnectionHistogramsByMcs,
        ExperimentKind::EdgeRankDecay,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ExperimentKind::SubtourFraction => "subtour-fraction",
            ExperimentKind::GroundConnectionDistribution => "ground-connection-distribution",
            ExperimentKind::IterativeSuccess => "iterative-success",
            ExperimentKind::ConnectionHistogramsByMcs => "connection-histograms-by-mcs",
            ExperimentKind::EdgeRankDecay => "edge-rank-decay",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL.into_iter().find(|k| k.id() == s).ok_or_else(|| {
            let ids: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.id()).collect();
            Error::parse("experiment", format!("unknown experiment '{s}'; expected one of {}", ids.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Exact,
    Sa,
    Sqa,
}

impl SolverKind {
    pub fn id(self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::Sa => "sa",
            SolverKind::Sqa => "sqa",
        }
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SolverKind::Exact),
            "sa" => Ok(SolverKind::Sa),
            "sqa" => Ok(SolverKind::Sqa),
            _ => Err(Error::parse("solver", format!("unknown solver '{s}'; expected exact, sa or sqa"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentParams {
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    /// City counts for `edge-rank-decay`.
    pub n_grid: Vec<usize>,
    pub solvers: Vec<SolverKind>,
    pub mcs_grid: Vec<usize>,
    pub target: u32,
    pub max_iterations: usize,
    pub constraints_per_round: ConstraintsPerRound,
    /// Rounds whose connection histograms are reported.
    pub iterations: Vec<usize>,
    /// Annealing parameters; `sweeps` is replaced by each MCS value.
    pub schedule: AnnealSchedule,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            n: 12,
            count: 100,
            seed: 0,
            n_grid: vec![8, 12, 16],
            solvers: vec![SolverKind::Exact, SolverKind::Sa],
            mcs_grid: DEFAULT_MCS_GRID.to_vec(),
            target: 2,
            max_iterations: 10,
            constraints_per_round: ConstraintsPerRound::All,
            iterations: vec![1, 4],
            schedule: AnnealSchedule::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStat {
    pub name: String,
    pub value: Value,
}

fn stat(name: impl Into<String>, value: impl Into<Value>) -> SummaryStat {
    SummaryStat {
        name: name.into(),
        value: value.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub tool_version: String,
    pub command: Option<String>,
    pub ensemble: EnsembleSpec,
    pub parameters: ExperimentParams,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Vec<SummaryStat>,
    /// Only field that differs between identical runs.
    pub wall_time_seconds: f64,
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl ExperimentReport {
    pub fn kind(&self) -> Result<ExperimentKind> {
        self.experiment.parse()
    }

    pub fn summary_value(&self, name: &str) -> Option<&Value> {
        self.summary.iter().find(|s| s.name == name).map(|s| &s.value)
    }

    pub fn summary_f64(&self, name: &str) -> Option<f64> {
        self.summary_value(name).and_then(Value::as_f64)
    }

    /// `#`-prefixed provenance lines, header, then one line per row.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        if let Some(cmd) = &self.command {
            writeln!(out, "# command: {cmd}").unwrap();
        }
        writeln!(out, "# tool: tspqa {} experiment {}", self.tool_version, self.experiment).unwrap();
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::parse("csv", e.to_string());
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell)).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::parse("csv", e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("experiment report", e.to_string()))
    }

    pub fn summary_table(&self) -> String {
        let width = self.summary.iter().map(|s| s.name.len()).max().unwrap_or(0).max(6);
        let mut out = String::new();
        writeln!(out, "{:<width$}  value", "metric").unwrap();
        writeln!(out, "{:-<width$}  -----", "").unwrap();
        for s in &self.summary {
            writeln!(out, "{:<width$}  {}", s.name, cell(&s.value)).unwrap();
        }
        out
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        std::fs::write(&csv_path, self.to_csv()?).map_err(|e| Error::io(&csv_path, e))?;
        std::fs::write(&json_path, self.to_json()).map_err(|e| Error::io(&json_path, e))?;
        Ok((csv_path, json_path))
    }
}

/// Read access to a report table by column name.
struct Table<'a> {
    columns: &'a [String],
    rows: &'a [Vec<Value>],
}

impl<'a> Table<'a> {
    fn idx(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::parse("experiment report", format!("missing column '{name}'")))
    }

    fn get<'r>(&self, row: &'r [Value], name: &str) -> Result<&'r Value> {
        Ok(&row[self.idx(name)?])
    }

    fn u(&self, row: &[Value], name: &str) -> Result<usize> {
        self.get(row, name)?
            .as_u64()
            .map(|v| v as usize)
            .ok_or_else(|| Error::parse("experiment report", format!("column '{name}' is not an integer")))
    }

    fn b(&self, row: &[Value], name: &str) -> Result<bool> {
        self.get(row, name)?
            .as_bool()
            .ok_or_else(|| Error::parse("experiment report", format!("column '{name}' is not a boolean")))
    }

    fn s(&self, row: &'a [Value], name: &str) -> Result<&'a str> {
        let i = self.idx(name)?;
        row[i]
            .as_str()
            .ok_or_else(|| Error::parse("experiment report", format!("column '{name}' is not a string")))
    }
}

fn ratio(num: usize, den: usize) -> Value {
    if den == 0 {
        Value::Null
    } else {
        (num as f64 / den as f64).into()
    }
}

fn hist_string(h: &BTreeMap<usize, usize>) -> String {
    h.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(" ")
}

fn sizes_string(sizes: &[usize]) -> String {
    sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Optimal tour and minimum cycle cover of every instance, in order.
fn ground_truth(ens: &[TspInstance]) -> Result<Vec<(Tour, CycleCover)>> {
    ens.par_iter()
        .map(|inst| Ok((optimal_tour(inst)?, min_cycle_cover(inst)?)))
        .collect()
}

fn is_optimal(tour: &Tour, optimal: &Tour) -> bool {
    (tour.length - optimal.length).abs() <= 1e-9 * optimal.length.max(1.0)
}

pub fn run_experiment(kind: ExperimentKind, params: &ExperimentParams, command: Option<String>) -> Result<ExperimentReport> {
    let started = Instant::now();
    let (cols, rows) = match kind {
        ExperimentKind::SubtourFraction => subtour_fraction_rows(params)?,
        ExperimentKind::GroundConnectionDistribution => ground_connection_rows(params)?,
        ExperimentKind::IterativeSuccess => iterative_success_rows(params)?,
        ExperimentKind::ConnectionHistogramsByMcs => connection_histogram_rows(params)?,
        ExperimentKind::EdgeRankDecay => edge_rank_rows(params)?,
    };
    let summary = summarize(kind, &cols, &rows)?;
    Ok(ExperimentReport {
        experiment: kind.id().to_string(),
        tool_version: crate::VERSION.to_string(),
        command,
        ensemble: EnsembleSpec {
            n: params.n,
            count: params.count,
            seed: params.seed,
        },
        parameters: params.clone(),
        columns: cols,
        rows,
        summary,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Summary derived from the report's rows alone.
pub fn recompute_summary(report: &ExperimentReport) -> Result<Vec<SummaryStat>> {
    summarize(report.kind()?, &report.columns, &report.rows)
}

fn summarize(kind: ExperimentKind, cols: &[String], rows: &[Vec<Value>]) -> Result<Vec<SummaryStat>> {
    let t = Table { columns: cols, rows };
    match kind {
        ExperimentKind::SubtourFraction => summarize_subtour_fraction(&t),
        ExperimentKind::GroundConnectionDistribution => summarize_ground_connections(&t),
        ExperimentKind::IterativeSuccess => summarize_iterative_success(&t),
        ExperimentKind::ConnectionHistogramsByMcs => summarize_connection_histograms(&t),
        ExperimentKind::EdgeRankDecay => summarize_edge_ranks(&t),
    }
}

type Rows = (Vec<String>, Vec<Vec<Value>>);

fn subtour_fraction_rows(p: &ExperimentParams) -> Result<Rows> {
    let ens = generate_ensemble(p.n, p.count, p.seed)?;
    let truth = ground_truth(&ens)?;
    let rows = ens
        .iter()
        .zip(&truth)
        .enumerate()
        .map(|(k, (inst, (tour, cover)))| {
            let split = !cover.is_single_tour();
            let sizes = if split { sizes_string(&cover.cycle_sizes()) } else { String::new() };
            vec![
                k.into(),
                inst.seed().into(),
                tour.length.into(),
                cover.total_weight.into(),
                cover.cycles.len().into(),
                split.into(),
                sizes.into(),
            ]
        })
        .collect();
    let cols = columns(&["instance", "seed", "optimal_length", "cover_weight", "cycles", "split", "subtour_sizes"]);
    Ok((cols, rows))
}

fn summarize_subtour_fraction(t: &Table) -> Result<Vec<SummaryStat>> {
    let mut split = 0;
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for row in t.rows {
        if t.b(row, "split")? {
            split += 1;
            for s in t.s(row, "subtour_sizes")?.split(';') {
                let size: usize = s.parse().map_err(|_| Error::parse("experiment report", format!("bad subtour size '{s}'")))?;
                *sizes.entry(size).or_insert(0) += 1;
            }
        }
    }
    let subtours: usize = sizes.values().sum();
    // Largest count wins; ties go to the smaller size.
    let modal = sizes.iter().fold(None, |best: Option<(usize, usize)>, (&s, &c)| match best {
        Some((_, bc)) if bc >= c => best,
        _ => Some((s, c)),
    });
    Ok(vec![
        stat("instances", t.rows.len()),
        stat("split_instances", split),
        stat("split_fraction", ratio(split, t.rows.len())),
        stat("subtours", subtours),
        stat("modal_subtour_size", modal.map_or(Value::Null, |(s, _)| s.into())),
        stat("share_size_3", ratio(sizes.get(&3).copied().unwrap_or(0), subtours)),
        stat("size_histogram", hist_string(&sizes)),
    ])
}

fn ground_connection_rows(p: &ExperimentParams) -> Result<Rows> {
    let ens = generate_ensemble(p.n, p.count, p.seed)?;
    let truth = ground_truth(&ens)?;
    let mut rows = Vec::new();
    for (k, (tour, cover)) in truth.iter().enumerate() {
        if cover.is_single_tour() {
            continue;
        }
        for (s, st) in connection_stats_against(tour, cover).into_iter().enumerate() {
            rows.push(vec![
                k.into(),
                s.into(),
                st.subset.len().into(),
                sizes_string(&st.subset).into(),
                st.required_connections.into(),
            ]);
        }
    }
    let cols = columns(&["instance", "subtour", "size", "cities", "required_connections"]);
    Ok((cols, rows))
}

fn connection_hist(t: &Table, rows: &[&Vec<Value>]) -> Result<BTreeMap<usize, usize>> {
    let mut h = BTreeMap::new();
    for row in rows {
        *h.entry(t.u(row, "required_connections")?).or_insert(0) += 1;
    }
    Ok(h)
}

fn connection_stats_summary(prefix: &str, h: &BTreeMap<usize, usize>) -> Vec<SummaryStat> {
    let total: usize = h.values().sum();
    let count = |pred: &dyn Fn(usize) -> bool| h.iter().filter(|(&k, _)| pred(k)).map(|(_, &v)| v).sum::<usize>();
    vec![
        stat(format!("{prefix}subtours"), total),
        stat(format!("{prefix}share_2"), ratio(count(&|k| k == 2), total)),
        stat(format!("{prefix}share_4"), ratio(count(&|k| k == 4), total)),
        stat(format!("{prefix}share_above_4"), ratio(count(&|k| k > 4), total)),
        stat(format!("{prefix}all_even"), h.keys().all(|k| k % 2 == 0)),
        stat(format!("{prefix}histogram"), hist_string(h)),
    ]
}

fn summarize_ground_connections(t: &Table) -> Result<Vec<SummaryStat>> {
    let rows: Vec<&Vec<Value>> = t.rows.iter().collect();
    Ok(connection_stats_summary("", &connection_hist(t, &rows)?))
}

/// One inner-solver configuration of the loop experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Setting {
    solver: SolverKind,
    mcs: Option<usize>,
}

impl Setting {
    fn label(self) -> String {
        match self.mcs {
            None => self.solver.id().to_string(),
            Some(m) => format!("{}@{m}", self.solver.id()),
        }
    }

    fn policy(self, p: &ExperimentParams) -> LoopPolicy {
        let sched = |m: usize| AnnealSchedule {
            sweeps: m,
            ..p.schedule.clone()
        };
        let solver = match (self.solver, self.mcs) {
            (SolverKind::Exact, _) => InnerSolver::Exact,
            (SolverKind::Sa, m) => InnerSolver::Sa(sched(m.unwrap_or(p.schedule.sweeps))),
            (SolverKind::Sqa, m) => InnerSolver::Sqa(sched(m.unwrap_or(p.schedule.sweeps))),
        };
        let mut policy = LoopPolicy::new(solver, p.target);
        policy.max_iterations = p.max_iterations;
        policy.constraints_per_round = p.constraints_per_round;
        policy
    }
}

fn settings(p: &ExperimentParams) -> Vec<Setting> {
    let mut solvers = p.solvers.clone();
    solvers.sort_unstable();
    solvers.dedup();
    let mut out = Vec::new();
    for solver in solvers {
        match solver {
            SolverKind::Exact => out.push(Setting { solver, mcs: None }),
            _ => out.extend(p.mcs_grid.iter().map(|&m| Setting { solver, mcs: Some(m) })),
        }
    }
    out
}

/// Per-instance loop seed; depends only on the master seed, the instance
/// index and the setting, never on scheduling order.
pub fn loop_seed(master: u64, instance: usize, solver: SolverKind, mcs: Option<usize>) -> u64 {
    derive_seed(master, &[instance as u64, solver as u64, mcs.unwrap_or(0) as u64])
}

fn run_loops(ens: &[TspInstance], p: &ExperimentParams, s: Setting) -> Result<Vec<LoopOutcome>> {
    let policy = s.policy(p);
    ens.par_iter()
        .enumerate()
        .map(|(k, inst)| iterate_solve(inst, &policy, loop_seed(p.seed, k, s.solver, s.mcs)))
        .collect()
}

fn outcome_tag(o: &RoundOutcome) -> &'static str {
    match o {
        RoundOutcome::Cover(c) if c.is_single_tour() => "tour",
        RoundOutcome::Cover(_) => "cover",
        RoundOutcome::Violation(_) => "violation",
    }
}

fn status_tag(o: &LoopOutcome) -> &'static str {
    use crate::subtour_loop::LoopStatus::*;
    match o.status {
        Solved => "solved",
        MaxIterations => "max-iterations",
        PersistentViolation => "degree-violation",
        Stalled => "stalled",
    }
}

fn iterative_success_rows(p: &ExperimentParams) -> Result<Rows> {
    let ens = generate_ensemble(p.n, p.count, p.seed)?;
    let optima: Vec<Tour> = ens.par_iter().map(optimal_tour).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for s in settings(p) {
        let outs = run_loops(&ens, p, s)?;
        for (k, out) in outs.iter().enumerate() {
            let optimal = out.tour.as_ref().is_some_and(|t| is_optimal(t, &optima[k]));
            let final_length = out.tour.as_ref().map_or(Value::Null, |t| t.length.into());
            for log in &out.logs {
                let (cycles, sizes) = match &log.outcome {
                    RoundOutcome::Cover(c) => (Value::from(c.cycles.len()), sizes_string(&c.cycle_sizes())),
                    RoundOutcome::Violation(_) => (Value::Null, String::new()),
                };
                rows.push(vec![
                    s.label().into(),
                    s.solver.id().into(),
                    s.mcs.map_or(Value::Null, Value::from),
                    k.into(),
                    log.iteration.into(),
                    log.eta.into(),
                    log.retries.into(),
                    log.result.best_energy.into(),
                    outcome_tag(&log.outcome).into(),
                    cycles,
                    sizes.into(),
                    log.added.len().into(),
                    status_tag(out).into(),
                    out.iterations().into(),
                    optima[k].length.into(),
                    final_length.clone(),
                    optimal.into(),
                ]);
            }
        }
    }
    let cols = columns(&[
        "setting",
        "solver",
        "mcs",
        "instance",
        "iteration",
        "eta",
        "retries",
        "energy",
        "outcome",
        "cycles",
        "subtour_sizes",
        "constraints_added",
        "final_status",
        "final_iterations",
        "optimal_length",
        "final_length",
        "optimal",
    ]);
    Ok((cols, rows))
}

/// Settings in first-appearance order.
fn setting_labels(t: &Table) -> Result<Vec<String>> {
    let mut labels: Vec<String> = Vec::new();
    for row in t.rows {
        let l = t.s(row, "setting")?;
        if !labels.iter().any(|x| x == l) {
            labels.push(l.to_string());
        }
    }
    Ok(labels)
}

fn summarize_iterative_success(t: &Table) -> Result<Vec<SummaryStat>> {
    let mut out = Vec::new();
    for label in setting_labels(t)? {
        // (final_status, final_iterations, optimal) per instance.
        let mut runs: BTreeMap<usize, (String, usize, bool)> = BTreeMap::new();
        let mut max_it = 0;
        for row in t.rows.iter().filter(|r| r[0].as_str() == Some(&label)) {
            let rec = (
                t.s(row, "final_status")?.to_string(),
                t.u(row, "final_iterations")?,
                t.b(row, "optimal")?,
            );
            max_it = max_it.max(rec.1);
            runs.insert(t.u(row, "instance")?, rec);
        }
        let n = runs.len();
        let solved = runs.values().filter(|r| r.0 == "solved").count();
        let optimal = runs.values().filter(|r| r.2).count();
        out.push(stat(format!("{label}.runs"), n));
        out.push(stat(format!("{label}.solved_rate"), ratio(solved, n)));
        out.push(stat(format!("{label}.optimal_rate"), ratio(optimal, n)));
        for k in 1..=max_it {
            let within = runs.values().filter(|r| r.2 && r.1 <= k).count();
            out.push(stat(format!("{label}.optimal_within_{k}"), ratio(within, n)));
        }
    }
    Ok(out)
}

fn connection_histogram_rows(p: &ExperimentParams) -> Result<Rows> {
    let ens = generate_ensemble(p.n, p.count, p.seed)?;
    let optima: Vec<Tour> = ens.par_iter().map(optimal_tour).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for s in settings(p) {
        let outs = run_loops(&ens, p, s)?;
        for &it in &p.iterations {
            for (k, out) in outs.iter().enumerate() {
                let Some(log) = out.logs.iter().find(|l| l.iteration == it) else {
                    continue;
                };
                let RoundOutcome::Cover(cover) = &log.outcome else {
                    continue;
                };
                if cover.is_single_tour() {
                    continue;
                }
                for st in connection_stats_against(&optima[k], cover) {
                    rows.push(vec![
                        s.label().into(),
                        s.solver.id().into(),
                        s.mcs.map_or(Value::Null, Value::from),
                        it.into(),
                        k.into(),
                        st.subset.len().into(),
                        st.required_connections.into(),
                    ]);
                }
            }
        }
    }
    let cols = columns(&["setting", "solver", "mcs", "iteration", "instance", "subtour_size", "required_connections"]);
    Ok((cols, rows))
}

fn summarize_connection_histograms(t: &Table) -> Result<Vec<SummaryStat>> {
    let mut groups: Vec<(String, usize)> = Vec::new();
    for row in t.rows {
        let key = (t.s(row, "setting")?.to_string(), t.u(row, "iteration")?);
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    let mut out = Vec::new();
    for (label, it) in groups {
        let mut rows = Vec::new();
        for row in t.rows {
            if t.s(row, "setting")? == label && t.u(row, "iteration")? == it {
                rows.push(row);
            }
        }
        out.extend(connection_stats_summary(&format!("{label}.it{it}."), &connection_hist(t, &rows)?));
    }
    Ok(out)
}

fn edge_rank_rows(p: &ExperimentParams) -> Result<Rows> {
    let mut rows = Vec::new();
    for &n in &p.n_grid {
        if n > 16 {
            return Err(Error::Capacity {
                what: "edge-rank-decay cities",
                limit: 16,
                got: n,
            });
        }
        let ens = generate_ensemble(n, p.count, p.seed)?;
        let optima: Vec<Tour> = ens.par_iter().map(optimal_tour).collect::<Result<_>>()?;
        for (k, (inst, tour)) in ens.iter().zip(&optima).enumerate() {
            let ranks: Vec<Vec<usize>> = (0..n)
                .map(|i| {
                    let mut r = vec![0; n];
                    for (pos, j) in inst.neighbor_ranks(i).into_iter().enumerate() {
                        r[j] = pos + 1;
                    }
                    r
                })
                .collect();
            for (i, j) in tour.edges() {
                rows.push(vec![
                    n.into(),
                    k.into(),
                    i.into(),
                    j.into(),
                    ranks[i][j].into(),
                    ranks[j][i].into(),
                ]);
            }
        }
    }
    Ok((columns(&["n", "instance", "i", "j", "rank_from_i", "rank_from_j"]), rows))
}

/// Least-squares slope of `ln(freq)` against rank over ranks with data.
fn log_slope(freq: &BTreeMap<usize, usize>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = freq.iter().filter(|(_, &c)| c > 0).map(|(&r, &c)| (r as f64, (c as f64).ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

fn summarize_edge_ranks(t: &Table) -> Result<Vec<SummaryStat>> {
    let mut ns: Vec<usize> = Vec::new();
    for row in t.rows {
        let n = t.u(row, "n")?;
        if !ns.contains(&n) {
            ns.push(n);
        }
    }
    let mut out = Vec::new();
    for n in ns {
        let mut freq: BTreeMap<usize, usize> = (1..n).map(|r| (r, 0)).collect();
        // Smallest L whose union truncation keeps the whole optimal tour.
        let mut needed: BTreeMap<usize, usize> = BTreeMap::new();
        for row in t.rows {
            if t.u(row, "n")? != n {
                continue;
            }
            let (a, b) = (t.u(row, "rank_from_i")?, t.u(row, "rank_from_j")?);
            *freq.entry(a).or_insert(0) += 1;
            *freq.entry(b).or_insert(0) += 1;
            let e = needed.entry(t.u(row, "instance")?).or_insert(0);
            *e = (*e).max(a.min(b));
        }
        let total: usize = freq.values().sum();
        let p = format!("n{n}.");
        out.push(stat(format!("{p}edge_endpoints"), total));
        for (&r, &c) in &freq {
            out.push(stat(format!("{p}freq_rank_{r}"), ratio(c, total)));
        }
        out.push(stat(format!("{p}log_slope"), log_slope(&freq).map_or(Value::Null, Value::from)));
        let mut ls: Vec<usize> = (3..=8).filter(|&l| l < n).collect();
        ls.push(n - 1);
        ls.dedup();
        for l in ls {
            let covered = needed.values().filter(|&&x| x <= l).count();
            out.push(stat(format!("{p}coverage_L{l}"), ratio(covered, needed.len())));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize, count: usize) -> ExperimentParams {
        ExperimentParams {
            n,
            count,
            seed: 3,
            n_grid: vec![6, 8],
            mcs_grid: vec![100],
            ..Default::default()
        }
    }

    #[test]
    fn five_cities_never_split() {
        let r = run_experiment(ExperimentKind::SubtourFraction, &small(5, 20), None).unwrap();
        assert_eq!(r.summary_f64("split_fraction"), Some(0.0));
        assert_eq!(r.rows.len(), 20);
    }

    #[test]
    fn summaries_recompute_from_rows() {
        for kind in ExperimentKind::ALL {
            let r = run_experiment(kind, &small(8, 6), Some("tspqa test".into())).unwrap();
            assert_eq!(recompute_summary(&r).unwrap(), r.summary, "{}", kind.id());
            let back = ExperimentReport::from_json(&r.to_json()).unwrap();
            assert_eq!(back, r);
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let p = small(8, 5);
        for kind in [ExperimentKind::IterativeSuccess, ExperimentKind::EdgeRankDecay] {
            let a = run_experiment(kind, &p, Some("cmd".into())).unwrap();
            let b = run_experiment(kind, &p, Some("cmd".into())).unwrap();
            assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
            assert_eq!(a.summary_table(), b.summary_table());
        }
    }

    #[test]
    fn connection_histograms_are_even() {
        let r = run_experiment(ExperimentKind::GroundConnectionDistribution, &small(9, 12), None).unwrap();
        assert_eq!(r.summary_value("all_even"), Some(&Value::Bool(true)));
        let r = run_experiment(ExperimentKind::ConnectionHistogramsByMcs, &small(9, 6), None).unwrap();
        let t = Table {
            columns: &r.columns,
            rows: &r.rows,
        };
        assert!(r.rows.iter().all(|row| t.u(row, "required_connections").unwrap() % 2 == 0));
    }

    #[test]
    fn survival_curve_is_monotone() {
        let r = run_experiment(ExperimentKind::IterativeSuccess, &small(8, 8), None).unwrap();
        let curve: Vec<f64> = (1..=10).filter_map(|k| r.summary_f64(&format!("exact.optimal_within_{k}"))).collect();
        assert!(!curve.is_empty());
        assert!(curve.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*curve.last().unwrap(), r.summary_f64("exact.optimal_rate").unwrap());
    }

    #[test]
    fn rank_decay_checks() {
        let r = run_experiment(ExperimentKind::EdgeRankDecay, &small(8, 30), None).unwrap();
        for n in [6, 8] {
            let f1 = r.summary_f64(&format!("n{n}.freq_rank_1")).unwrap();
            let f5 = r.summary_f64(&format!("n{n}.freq_rank_5")).unwrap();
            assert!(f1 > f5);
            assert_eq!(r.summary_f64(&format!("n{n}.coverage_L{}", n - 1)), Some(1.0));
        }
    }

    #[test]
    fn csv_names_the_command() {
        let r = run_experiment(ExperimentKind::SubtourFraction, &small(6, 3), Some("tspqa experiment x".into())).unwrap();
        let csv = r.to_csv().unwrap();
        assert!(csv.starts_with("# command: tspqa experiment x\n"));
        assert!(csv.lines().nth(2).unwrap().starts_with("instance,seed,"));
    }

    #[test]
    fn kinds_parse() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.id().parse::<ExperimentKind>().unwrap(), k);
        }
        assert!("nope".parse::<ExperimentKind>().is_err());
    }
}
