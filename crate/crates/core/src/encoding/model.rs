use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version tag of the plain-text model export.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Binary quadratic objective
/// `E(a) = offset + sum_i linear[i] a_i + sum_{i<j} quadratic[(i,j)] a_i a_j`
/// over `a_i in {0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
    varmap: VariableMap,
}

/// Semantic meaning of the model's variable indices.
#[derive(Debug, Clone, PartialEq)]
pub enum VariableMap {
    /// No TSP structure attached (imported or hand-built models).
    Generic,
    Permutation(PermutationGrid),
    Edge(EdgeSet),
}

/// `a_ik = 1` iff city `i` is visited at timestep `k`.
///
/// The reduced grid pins city 0 to timestep 0 and keeps only
/// `i, k in 1..n`, giving `(n-1)^2` variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationGrid {
    pub n: usize,
    pub reduced: bool,
}

/// Value of a grid cell: either a model variable or pinned by the reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridCell {
    Var(usize),
    Fixed(bool),
}

impl PermutationGrid {
    pub fn num_vars(&self) -> usize {
        if self.reduced {
            (self.n - 1) * (self.n - 1)
        } else {
            self.n * self.n
        }
    }

    pub fn cell(&self, city: usize, step: usize) -> GridCell {
        let n = self.n;
        if !self.reduced {
            return GridCell::Var(city * n + step);
        }
        match (city, step) {
            (0, 0) => GridCell::Fixed(true),
            (0, _) | (_, 0) => GridCell::Fixed(false),
            (i, k) => GridCell::Var((i - 1) * (n - 1) + (k - 1)),
        }
    }

    /// Inverse of [`cell`](Self::cell) for variable indices.
    pub fn var_position(&self, var: usize) -> (usize, usize) {
        if self.reduced {
            let m = self.n - 1;
            (var / m + 1, var % m + 1)
        } else {
            (var / self.n, var % self.n)
        }
    }

    /// Full `n x n` occupancy grid (row = city, column = timestep) for an
    /// assignment of the model variables.
    pub fn occupancy(&self, config: &[bool]) -> Vec<Vec<bool>> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|k| match self.cell(i, k) {
                        GridCell::Var(v) => config[v],
                        GridCell::Fixed(b) => b,
                    })
                    .collect()
            })
            .collect()
    }

    /// Assignment encoding the tour that visits `order[k]` at step `k`.
    /// For the reduced grid the order must start at city 0.
    pub fn config_for_order(&self, order: &[usize]) -> Result<Vec<bool>> {
        if order.len() != self.n {
            return Err(Error::Precondition("order length differs from n".into()));
        }
        if self.reduced && order[0] != 0 {
            return Err(Error::Precondition(
                "reduced grid needs the tour to start at city 0".into(),
            ));
        }
        let mut config = vec![false; self.num_vars()];
        for (k, &i) in order.iter().enumerate() {
            if let GridCell::Var(v) = self.cell(i, k) {
                config[v] = true;
            }
        }
        Ok(config)
    }
}

/// `a_ij = 1` iff the undirected edge `{i, j}` is used.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSet {
    pub n: usize,
    pub truncation: Option<usize>,
    /// Retained edges `(i, j)` with `i < j`; the position is the variable index.
    pub edges: Vec<(usize, usize)>,
    /// Weight of the degree-2 penalty the model was built with.
    pub degree_weight: f64,
    pub constraints: Vec<SubtourConstraint>,
    pub slack_blocks: Vec<SlackBlock>,
    lookup: Vec<Option<usize>>,
}

/// A registered quadratic cut penalty `weight * (target - cut(subset))^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtourConstraint {
    pub subset: Vec<usize>,
    pub target: u32,
    pub weight: f64,
}

/// Slack variables `first_var .. first_var + count` attached to a subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackBlock {
    pub subset: Vec<usize>,
    pub first_var: usize,
    pub count: usize,
    pub eta_prime: f64,
    pub eta_double_prime: f64,
}

impl EdgeSet {
    pub fn new(n: usize, truncation: Option<usize>, mut edges: Vec<(usize, usize)>, degree_weight: f64) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let mut lookup = vec![None; n * n];
        for (v, &(i, j)) in edges.iter().enumerate() {
            debug_assert!(i < j && j < n);
            lookup[i * n + j] = Some(v);
            lookup[j * n + i] = Some(v);
        }
        EdgeSet {
            n,
            truncation,
            edges,
            degree_weight,
            constraints: Vec::new(),
            slack_blocks: Vec::new(),
            lookup,
        }
    }

    pub fn edge_var(&self, i: usize, j: usize) -> Option<usize> {
        self.lookup[i * self.n + j]
    }

    pub fn num_edge_vars(&self) -> usize {
        self.edges.len()
    }

    /// Variables of retained edges with exactly one endpoint in `subset`.
    pub fn cut_vars(&self, subset: &[usize]) -> Vec<usize> {
        let mut inside = vec![false; self.n];
        for &c in subset {
            inside[c] = true;
        }
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(i, j))| inside[i] != inside[j])
            .map(|(v, _)| v)
            .collect()
    }

    /// Edge variables set to one (slack variables are ignored).
    pub fn selected_edges(&self, config: &[bool]) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .zip(config)
            .filter(|(_, &on)| on)
            .map(|(&e, _)| e)
            .collect()
    }

    /// Assignment selecting exactly the given undirected edges. Fails if one
    /// of them was truncated away. Slack variables stay zero.
    pub fn config_for_edges(&self, edges: &[(usize, usize)], num_vars: usize) -> Result<Vec<bool>> {
        let mut config = vec![false; num_vars];
        for &(i, j) in edges {
            let v = self.edge_var(i, j).ok_or_else(|| {
                Error::Precondition(format!("edge {{{i},{j}}} is not in the retained edge set"))
            })?;
            config[v] = true;
        }
        Ok(config)
    }
}

impl QuadraticModel {
    pub fn new(num_vars: usize, varmap: VariableMap) -> Self {
        QuadraticModel {
            linear: vec![0.0; num_vars],
            quadratic: BTreeMap::new(),
            offset: 0.0,
            varmap,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn varmap(&self) -> &VariableMap {
        &self.varmap
    }

    pub(crate) fn varmap_mut(&mut self) -> &mut VariableMap {
        &mut self.varmap
    }

    pub fn edge_set(&self) -> Option<&EdgeSet> {
        match &self.varmap {
            VariableMap::Edge(e) => Some(e),
            _ => None,
        }
    }

    pub fn permutation_grid(&self) -> Option<&PermutationGrid> {
        match &self.varmap {
            VariableMap::Permutation(p) => Some(p),
            _ => None,
        }
    }

    /// Appends `count` fresh variables and returns the index of the first.
    pub(crate) fn push_vars(&mut self, count: usize) -> usize {
        let first = self.linear.len();
        self.linear.resize(first + count, 0.0);
        first
    }

    pub fn add_offset(&mut self, value: f64) {
        self.offset += value;
    }

    pub fn add_linear(&mut self, i: usize, value: f64) {
        self.linear[i] += value;
    }

    /// Adds `value * a_i * a_j`. A diagonal term folds into the linear part
    /// because `a^2 = a`.
    pub fn add_quadratic(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.num_vars() && j < self.num_vars());
        if i == j {
            self.linear[i] += value;
            return;
        }
        let key = (i.min(j), i.max(j));
        *self.quadratic.entry(key).or_insert(0.0) += value;
    }

    /// Adds `weight * (constant + sum_k coeff_k a_{var_k})^2`, expanded into
    /// offset, linear and pairwise terms. Repeated variables are merged first.
    pub fn add_squared_linear(&mut self, weight: f64, constant: f64, terms: &[(usize, f64)]) {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for &(v, c) in terms {
            *merged.entry(v).or_insert(0.0) += c;
        }
        let merged: Vec<(usize, f64)> = merged.into_iter().filter(|&(_, c)| c != 0.0).collect();
        self.offset += weight * constant * constant;
        for (k, &(v, c)) in merged.iter().enumerate() {
            // 2*const*c*a + c^2*a^2, with a^2 = a
            self.linear[v] += weight * (2.0 * constant * c + c * c);
            for &(u, b) in &merged[k + 1..] {
                self.add_quadratic(v, u, 2.0 * weight * c * b);
            }
        }
    }

    pub fn energy(&self, config: &[bool]) -> f64 {
        assert_eq!(config.len(), self.num_vars(), "configuration length mismatch");
        let mut e = self.offset;
        for (h, &a) in self.linear.iter().zip(config) {
            if a {
                e += h;
            }
        }
        for (&(i, j), &q) in &self.quadratic {
            if config[i] && config[j] {
                e += q;
            }
        }
        e
    }

    /// Number of nonzero pairwise couplings.
    pub fn coupler_count(&self) -> usize {
        self.quadratic.values().filter(|&&q| q != 0.0).count()
    }

    /// `(qubits, couplers)`.
    pub fn resource_counts(&self) -> (usize, usize) {
        (self.num_vars(), self.coupler_count())
    }

    pub fn neighbors(&self) -> Neighbors {
        Neighbors::build(self.num_vars(), &self.quadratic)
    }

    /// Largest `|h_i| + sum_j |J_ij|`, the biggest energy change a single flip
    /// can cause.
    pub fn max_local_field(&self) -> f64 {
        let mut s: Vec<f64> = self.linear.iter().map(|h| h.abs()).collect();
        for (&(i, j), &q) in &self.quadratic {
            s[i] += q.abs();
            s[j] += q.abs();
        }
        s.into_iter().fold(0.0, f64::max)
    }

    /// Ising form under `a_i = (1 - s_i) / 2`.
    pub fn to_ising(&self) -> IsingModel {
        let n = self.num_vars();
        let mut h = vec![0.0; n];
        let mut offset = self.offset;
        for (i, &lin) in self.linear.iter().enumerate() {
            offset += lin / 2.0;
            h[i] -= lin / 2.0;
        }
        let mut couplings = BTreeMap::new();
        for (&(i, j), &q) in &self.quadratic {
            if q == 0.0 {
                continue;
            }
            offset += q / 4.0;
            h[i] -= q / 4.0;
            h[j] -= q / 4.0;
            couplings.insert((i, j), q / 4.0);
        }
        IsingModel {
            h,
            couplings,
            offset,
        }
    }

    /// Plain-text export: a header `vars <n> offset <c> form qubo`, then
    /// `i i h_i` for every nonzero linear term and `i j J_ij` (i<j) for every
    /// nonzero coupling. Optional `#` comment lines trail the data.
    pub fn to_text(&self, comment: Option<&str>) -> String {
        write_model_text("qubo", self.num_vars(), self.offset, &self.linear, &self.quadratic, comment)
    }

    /// Reads the format written by [`to_text`](Self::to_text). The result has
    /// a [`VariableMap::Generic`] map.
    pub fn from_text(text: &str) -> Result<Self> {
        let parsed = parse_model_text(text)?;
        if parsed.form != "qubo" {
            return Err(Error::parse("model", format!("expected form qubo, found {}", parsed.form)));
        }
        let mut model = QuadraticModel::new(parsed.vars, VariableMap::Generic);
        model.offset = parsed.offset;
        for (i, j, v) in parsed.terms {
            if i == j {
                model.linear[i] += v;
            } else {
                model.add_quadratic(i, j, v);
            }
        }
        Ok(model)
    }
}

/// Compressed adjacency lists of the coupling graph.
#[derive(Debug, Clone)]
pub struct Neighbors {
    start: Vec<usize>,
    entries: Vec<(usize, f64)>,
}

impl Neighbors {
    fn build(n: usize, quadratic: &BTreeMap<(usize, usize), f64>) -> Self {
        let mut lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(i, j), &q) in quadratic {
            if q != 0.0 {
                lists[i].push((j, q));
                lists[j].push((i, q));
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut entries = Vec::new();
        start.push(0);
        for l in lists {
            entries.extend(l);
            start.push(entries.len());
        }
        Neighbors { start, entries }
    }

    #[inline]
    pub fn of(&self, i: usize) -> &[(usize, f64)] {
        &self.entries[self.start[i]..self.start[i + 1]]
    }
}

/// Spin form `E(s) = offset + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j`,
/// `s_i in {-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    pub h: Vec<f64>,
    pub couplings: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl IsingModel {
    pub fn num_spins(&self) -> usize {
        self.h.len()
    }

    pub fn energy(&self, spins: &[i8]) -> f64 {
        let mut e = self.offset;
        for (h, &s) in self.h.iter().zip(spins) {
            e += h * f64::from(s);
        }
        for (&(i, j), &c) in &self.couplings {
            e += c * f64::from(spins[i] * spins[j]);
        }
        e
    }

    pub fn neighbors(&self) -> Neighbors {
        Neighbors::build(self.num_spins(), &self.couplings)
    }

    pub fn to_text(&self, comment: Option<&str>) -> String {
        write_model_text("ising", self.num_spins(), self.offset, &self.h, &self.couplings, comment)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let parsed = parse_model_text(text)?;
        if parsed.form != "ising" {
            return Err(Error::parse("model", format!("expected form ising, found {}", parsed.form)));
        }
        let mut h = vec![0.0; parsed.vars];
        let mut couplings = BTreeMap::new();
        for (i, j, v) in parsed.terms {
            if i == j {
                h[i] += v;
            } else {
                *couplings.entry((i.min(j), i.max(j))).or_insert(0.0) += v;
            }
        }
        Ok(IsingModel {
            h,
            couplings,
            offset: parsed.offset,
        })
    }
}

/// `a = (1 - s) / 2`: spin `+1` is bit 0, spin `-1` is bit 1.
pub fn spins_from_bits(bits: &[bool]) -> Vec<i8> {
    bits.iter().map(|&b| if b { -1 } else { 1 }).collect()
}

pub fn bits_from_spins(spins: &[i8]) -> Vec<bool> {
    spins.iter().map(|&s| s < 0).collect()
}

fn write_model_text(
    form: &str,
    vars: usize,
    offset: f64,
    linear: &[f64],
    quadratic: &BTreeMap<(usize, usize), f64>,
    comment: Option<&str>,
) -> String {
    let mut out = String::new();
    writeln!(out, "vars {vars} offset {offset:?} form {form}").unwrap();
    for (i, &h) in linear.iter().enumerate() {
        if h != 0.0 {
            writeln!(out, "{i} {i} {h:?}").unwrap();
        }
    }
    for (&(i, j), &q) in quadratic {
        if q != 0.0 {
            writeln!(out, "{i} {j} {q:?}").unwrap();
        }
    }
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(out, "# {line}").unwrap();
        }
    }
    out
}

struct ParsedModel {
    form: String,
    vars: usize,
    offset: f64,
    terms: Vec<(usize, usize, f64)>,
}

fn parse_model_text(text: &str) -> Result<ParsedModel> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse("model", "empty model file"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    let (vars, offset, form) = match tokens.as_slice() {
        ["vars", n, "offset", c, "form", f] => (*n, *c, *f),
        ["vars", n, "offset", c] => (*n, *c, "qubo"),
        _ => {
            return Err(Error::parse(
                "model header",
                format!("expected `vars <n> offset <c> form <qubo|ising>`, got `{header}`"),
            ))
        }
    };
    let vars: usize = vars
        .parse()
        .map_err(|_| Error::parse("model header", format!("bad variable count `{vars}`")))?;
    let offset: f64 = offset
        .parse()
        .map_err(|_| Error::parse("model header", format!("bad offset `{offset}`")))?;
    let mut terms = Vec::new();
    for (lineno, line) in lines {
        let ctx = || format!("model line {}", lineno + 1);
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            return Err(Error::parse(ctx(), "expected `<i> <j> <value>`"));
        }
        let i: usize = t[0].parse().map_err(|_| Error::parse(ctx(), "bad index"))?;
        let j: usize = t[1].parse().map_err(|_| Error::parse(ctx(), "bad index"))?;
        let v: f64 = t[2].parse().map_err(|_| Error::parse(ctx(), "bad value"))?;
        if i >= vars || j >= vars {
            return Err(Error::parse(ctx(), format!("index out of range for {vars} variables")));
        }
        if i > j {
            return Err(Error::parse(ctx(), "couplings must be written with i < j"));
        }
        terms.push((i, j, v));
    }
    Ok(ParsedModel {
        form: form.to_string(),
        vars,
        offset,
        terms,
    })
}
