//! Command execution. Every command computes its full table before anything is
//! written, so a failed run leaves no output file behind.

use std::collections::HashMap;
use std::io::Write;

use lamplighter::dynamics::simulate_returns;
use lamplighter::exact::{self, phase_params};
use lamplighter::graph::{build_gamma_m, build_line_graph, parse_edge_list, RootedGraph};
use lamplighter::montecarlo::{
    estimate_escape_prob, estimate_local_time_profile, estimate_return_profile, estimate_return_profile_conditional,
    fold_replicas, phase_scan, EstimateWithCI, ReturnEstimator,
};
use lamplighter::verify::{three_point_integer_measure, verify_general_measure, verify_uniform_lamp_law, OracleReport};
use lamplighter::walk::{safe_truncation_radius, BaseWalk, BiasedWalk, HomesickParams, HomesickWalk};
use lamplighter::Error;

use crate::config::{parse_pairs, ConfigError, ExperimentConfig, GraphSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_TRUNCATION: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(ConfigError::Model(e)) | RunError::Model(e) => match e {
                Error::Truncation { .. } => EXIT_TRUNCATION,
                Error::StepBudget { .. } => EXIT_BUDGET,
                _ => EXIT_CONFIG,
            },
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Io(_) | RunError::Csv(_) => EXIT_IO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Complete,
    PartialTruncation,
    PartialBudget,
    CheckFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Complete => EXIT_OK,
            Status::PartialTruncation => EXIT_TRUNCATION,
            Status::PartialBudget => EXIT_BUDGET,
            Status::CheckFailed => EXIT_CHECK_FAILED,
        }
    }
}

/// A CSV table plus trailing comment lines.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub trailer: Vec<String>,
    pub status: Status,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            trailer: Vec::new(),
            status: Status::Complete,
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn note_aborts(&mut self, est: &EstimateWithCI) {
        if est.aborted_truncation > 0 {
            self.status = Status::PartialTruncation;
        } else if est.aborted_budget > 0 && self.status == Status::Complete {
            self.status = Status::PartialBudget;
        }
    }

    pub fn write_to<W: Write>(&self, hash: &str, mut out: W) -> Result<(), RunError> {
        writeln!(out, "# config_hash={hash}")?;
        match self.status {
            Status::PartialTruncation => writeln!(out, "# partial=truncation")?,
            Status::PartialBudget => writeln!(out, "# partial=budget")?,
            _ => {}
        }
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&self.header)?;
            for row in &self.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        for line in &self.trailer {
            writeln!(out, "# {line}")?;
        }
        Ok(())
    }
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

/// Runs a validated config.
pub fn execute(cfg: &ExperimentConfig) -> Result<Table, RunError> {
    let mut parts = cfg.command.split_whitespace();
    let cmd = parts.next().unwrap_or("");
    let sub = parts.next().unwrap_or("");
    match cmd {
        "simulate" => simulate(cfg, sub),
        "exact" => exact_op(cfg, sub),
        "scan" => scan(cfg),
        "verify" => verify(cfg, sub),
        _ => Err(ConfigError::Value {
            key: "command".into(),
            msg: format!("unknown command `{}`", cfg.command),
        }
        .into()),
    }
}

fn regime(cfg: &ExperimentConfig, lambda: f64) -> String {
    let graph = cfg.graph().unwrap_or(GraphSpec::Integers);
    let order = match cfg.lamp_order() {
        Ok(n) => n as f64,
        Err(_) => return "unclassified".into(),
    };
    if !matches!(graph, GraphSpec::Integers | GraphSpec::Line) {
        return "unclassified".into();
    }
    let critical = order * order;
    if (lambda - critical).abs() <= 1e-9 * critical {
        "critical-exploratory".into()
    } else if lambda > critical {
        "recurrent".into()
    } else {
        "transient".into()
    }
}

fn load_graph(cfg: &ExperimentConfig, radius: u32) -> Result<RootedGraph, RunError> {
    let radius = cfg.get::<u32>("radius")?.unwrap_or(radius);
    Ok(match cfg.graph()? {
        GraphSpec::Integers | GraphSpec::Line => build_line_graph(radius)?,
        GraphSpec::Gamma(m) => build_gamma_m(m, radius)?,
        GraphSpec::File(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| ConfigError::File {
                path: path.display().to_string(),
                msg: e.to_string(),
            })?;
            parse_edge_list(&text)?
        }
    })
}

/// Work that runs against whichever base walk the config selects.
trait WalkTask {
    fn run<W: BaseWalk>(&self, cfg: &ExperimentConfig, walk: &W) -> Result<Table, RunError>;
}

/// Builds the base walk; graph walks are truncated far enough out that
/// `expected_steps` steps are very unlikely to reach the boundary.
fn with_walk<T: WalkTask>(cfg: &ExperimentConfig, expected_steps: f64, task: &T) -> Result<Table, RunError> {
    match cfg.graph()? {
        GraphSpec::Integers => task.run(cfg, &BiasedWalk::new(cfg.bias()?)),
        _ => {
            let lambda = cfg.lambda()?;
            let radius = safe_truncation_radius(lambda, expected_steps.min(u64::MAX as f64) as u64);
            let graph = load_graph(cfg, radius)?;
            let walk = HomesickWalk::new(&graph, HomesickParams::new(lambda)?);
            task.run(cfg, &walk)
        }
    }
}

fn mean_excursion(lambda: f64) -> f64 {
    if lambda > 1.0 {
        2.0 * lambda / (lambda - 1.0)
    } else {
        1e6
    }
}

fn simulate(cfg: &ExperimentConfig, mode: &str) -> Result<Table, RunError> {
    let lambda = cfg.lambda()?;
    let replicas = cfg.replicas()? as f64;
    match mode {
        "returns" => {
            let ks: Vec<u64> = cfg.one_or_many("k", "ks")?;
            let k_max = *ks.iter().max().unwrap() as f64;
            with_walk(cfg, replicas * 4.0 * k_max * mean_excursion(lambda), &Returns { ks })
        }
        "local-time" => {
            let ns: Vec<u64> = cfg.one_or_many("n", "ns")?;
            let n_max = *ns.iter().max().unwrap() as f64;
            with_walk(cfg, replicas * n_max, &LocalTime { ns })
        }
        "trajectories" => {
            let k: u64 = cfg.require("k")?;
            with_walk(cfg, replicas * 4.0 * k as f64 * mean_excursion(lambda), &Trajectories { k })
        }
        "escape" => {
            let r: u32 = cfg.require("r")?;
            with_walk(cfg, replicas * 4.0 * mean_excursion(lambda), &Escape { r })
        }
        _ => Err(ConfigError::Value {
            key: "mode".into(),
            msg: format!("unknown simulate mode `{mode}`"),
        }
        .into()),
    }
}

const ESTIMATE_COLUMNS: &[&str] = &[
    "config_hash",
    "seed",
    "graph",
    "lambda",
    "lamp",
    "param",
    "value",
    "estimate",
    "std_error",
    "replicas",
    "successes",
    "effective_samples",
    "aborted",
    "inconclusive",
    "regime",
];

fn estimate_rows(
    cfg: &ExperimentConfig,
    lambda: f64,
    param: &str,
    values: &[u64],
    estimates: &[EstimateWithCI],
) -> Result<Table, RunError> {
    let mut table = Table::new(ESTIMATE_COLUMNS);
    let hash = cfg.hash();
    let regime = regime(cfg, lambda);
    for (v, e) in values.iter().zip(estimates) {
        table.note_aborts(e);
        table.push(vec![
            hash.clone(),
            e.seed.to_string(),
            cfg.raw("graph").unwrap_or("z").to_string(),
            fmt(lambda),
            cfg.raw("lamp").unwrap_or("2").to_string(),
            param.to_string(),
            v.to_string(),
            fmt(e.estimate),
            fmt(e.std_error),
            e.replicas.to_string(),
            e.successes.map(|s| s.to_string()).unwrap_or_default(),
            e.effective_samples.map(fmt).unwrap_or_default(),
            e.aborted().to_string(),
            e.inconclusive.to_string(),
            regime.clone(),
        ]);
    }
    Ok(table)
}

struct Returns {
    ks: Vec<u64>,
}

impl WalkTask for Returns {
    fn run<W: BaseWalk>(&self, cfg: &ExperimentConfig, walk: &W) -> Result<Table, RunError> {
        let (measure, replicas, seed, budget) = (cfg.measure()?, cfg.replicas()?, cfg.seed()?, cfg.budget()?);
        let est = match cfg.estimator()? {
            ReturnEstimator::Direct => estimate_return_profile(&self.ks, walk, &measure, replicas, seed, budget)?,
            ReturnEstimator::Conditional => {
                let k_max = *self.ks.iter().max().unwrap() as f64;
                let max_visits = (8.0 * k_max * mean_excursion(walk.lambda())).min(1e6) as u64 + 16;
                estimate_return_profile_conditional(&self.ks, walk, &measure, replicas, seed, budget, max_visits)?
            }
        };
        estimate_rows(cfg, walk.lambda(), "k", &self.ks, &est)
    }
}

struct LocalTime {
    ns: Vec<u64>,
}

impl WalkTask for LocalTime {
    fn run<W: BaseWalk>(&self, cfg: &ExperimentConfig, walk: &W) -> Result<Table, RunError> {
        let est =
            estimate_local_time_profile(&self.ns, walk, &cfg.measure()?, cfg.replicas()?, cfg.seed()?, cfg.budget()?)?;
        estimate_rows(cfg, walk.lambda(), "n", &self.ns, &est)
    }
}

struct Escape {
    r: u32,
}

impl WalkTask for Escape {
    fn run<W: BaseWalk>(&self, cfg: &ExperimentConfig, walk: &W) -> Result<Table, RunError> {
        let est = estimate_escape_prob(walk, self.r, cfg.replicas()?, cfg.seed()?, cfg.budget()?)?;
        estimate_rows(cfg, walk.lambda(), "r", &[self.r as u64], &[est])
    }
}

struct Trajectories {
    k: u64,
}

impl WalkTask for Trajectories {
    fn run<W: BaseWalk>(&self, cfg: &ExperimentConfig, walk: &W) -> Result<Table, RunError> {
        let measure = cfg.measure()?;
        let (seed, budget) = (cfg.seed()?, cfg.budget()?);
        let k = self.k as usize;
        if k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()).into());
        }
        let rows = fold_replicas(
            cfg.replicas()?,
            seed,
            Vec::new,
            |acc: &mut Vec<(u64, Result<Vec<String>, Error>)>, i, rng| {
                let row = simulate_returns(k, walk, &measure, rng, budget).map(|s| {
                    let opt = |v: Option<i64>| v.map(|x| x.to_string()).unwrap_or_default();
                    vec![
                        s.rho_k().to_string(),
                        opt(s.m_plus),
                        opt(s.m_minus),
                        s.n_plus.to_string(),
                        s.max_distance.to_string(),
                        s.range_size().to_string(),
                        s.identity_returns().to_string(),
                    ]
                });
                acc.push((i, row));
            },
            |mut a, b| {
                a.extend(b);
                a
            },
        );
        let mut table = Table::new(&[
            "config_hash",
            "seed",
            "replica",
            "k",
            "rho_k",
            "m_plus",
            "m_minus",
            "n_plus",
            "max_distance",
            "range",
            "identity_returns",
            "status",
        ]);
        let hash = cfg.hash();
        for (i, row) in rows {
            let mut line = vec![hash.clone(), seed.to_string(), i.to_string(), self.k.to_string()];
            match row {
                Ok(values) => {
                    line.extend(values);
                    line.push("ok".into());
                }
                Err(e) => {
                    let status = match e {
                        Error::Truncation { .. } => {
                            table.status = Status::PartialTruncation;
                            "truncation"
                        }
                        Error::StepBudget { .. } => {
                            if table.status == Status::Complete {
                                table.status = Status::PartialBudget;
                            }
                            "budget"
                        }
                        other => return Err(other.into()),
                    };
                    line.extend(std::iter::repeat_n(String::new(), 7));
                    line.push(status.into());
                }
            }
            table.push(line);
        }
        Ok(table)
    }
}

fn single_value(cfg: &ExperimentConfig, op: &str, inputs: &[(&str, String)], outputs: &[(&str, String)]) -> Table {
    let mut header = vec!["config_hash", "op"];
    header.extend(inputs.iter().map(|(k, _)| *k));
    header.extend(outputs.iter().map(|(k, _)| *k));
    let mut table = Table::new(&header);
    let mut row = vec![cfg.hash(), op.to_string()];
    row.extend(inputs.iter().map(|(_, v)| v.clone()));
    row.extend(outputs.iter().map(|(_, v)| v.clone()));
    table.push(row);
    table
}

fn exact_op(cfg: &ExperimentConfig, op: &str) -> Result<Table, RunError> {
    let tol = cfg.tol()?;
    let table = match op {
        "phase-params" => {
            let p = cfg.bias()?.p();
            let f = cfg.lamp_order()?;
            let pp = phase_params(p, f)?;
            single_value(
                cfg,
                op,
                &[("p", fmt(p)), ("lamp", f.to_string())],
                &[
                    ("lambda", fmt(pp.lambda)),
                    ("alpha", fmt(pp.alpha)),
                    ("p_critical", fmt(pp.p_critical)),
                    ("mean_excursion", fmt(pp.mean_excursion)),
                    ("mgf_abscissa", fmt(pp.mgf_abscissa)),
                    ("recurrent", pp.is_recurrent().to_string()),
                ],
            )
        }
        "extremes" => {
            let (mp, mm): (i64, i64) = (cfg.require("m-plus")?, cfg.require("m-minus")?);
            let f = cfg.lamp_order()?;
            let v = exact::ret_prob_given_extremes(mp, mm, f)?;
            single_value(
                cfg,
                op,
                &[("m_plus", mp.to_string()), ("m_minus", mm.to_string()), ("lamp", f.to_string())],
                &[("value", fmt(v))],
            )
        }
        "max-cdf" => {
            let x: u64 = cfg.require("x")?;
            let l = cfg.lambda()?;
            let v = exact::max_excursion_cdf(x, l)?;
            single_value(cfg, op, &[("x", x.to_string()), ("lambda", fmt(l))], &[("value", fmt(v))])
        }
        "series" => {
            let m: u64 = cfg.require("m")?;
            let (l, f) = (cfg.lambda()?, cfg.lamp_order()?);
            let s = exact::excursion_series(m, l, f, tol)?;
            single_value(
                cfg,
                op,
                &[("m", m.to_string()), ("lambda", fmt(l)), ("lamp", f.to_string())],
                &[("value", fmt(s.value)), ("terms", s.terms.to_string())],
            )
        }
        "ret-prob-nplus" => {
            let (k, m): (u64, u64) = (cfg.require("k")?, cfg.require("m")?);
            let (l, f) = (cfg.lambda()?, cfg.lamp_order()?);
            let v = exact::ret_prob_given_nplus(k, m, l, f, tol)?;
            single_value(
                cfg,
                op,
                &[("k", k.to_string()), ("m", m.to_string()), ("lambda", fmt(l)), ("lamp", f.to_string())],
                &[("value", fmt(v))],
            )
        }
        "ret-prob" => {
            let ks: Vec<u64> = cfg.one_or_many("k", "ks")?;
            let (l, f) = (cfg.lambda()?, cfg.lamp_order()?);
            let values = exact::ret_prob_curve(&ks, l, f, tol)?;
            let mut table = Table::new(&["config_hash", "op", "k", "lambda", "lamp", "value"]);
            for (k, v) in ks.iter().zip(values) {
                table.push(vec![cfg.hash(), op.into(), k.to_string(), fmt(l), f.to_string(), fmt(v)]);
            }
            table
        }
        "partial-sum" => {
            let ks: Vec<u64> = cfg.one_or_many("k", "ks")?;
            let (l, f) = (cfg.lambda()?, cfg.lamp_order()?);
            let sums = exact::local_time_partial_sums(*ks.iter().max().unwrap(), l, f, tol)?;
            let mut table = Table::new(&["config_hash", "op", "k", "lambda", "lamp", "value"]);
            for k in &ks {
                table.push(vec![
                    cfg.hash(),
                    op.into(),
                    k.to_string(),
                    fmt(l),
                    f.to_string(),
                    fmt(sums[*k as usize]),
                ]);
            }
            table
        }
        "rho1-pmf" => {
            let t: u64 = cfg.require("t")?;
            let p = cfg.bias()?.p();
            let v = exact::rho1_pmf(t, p)?;
            single_value(cfg, op, &[("t", t.to_string()), ("p", fmt(p))], &[("value", fmt(v))])
        }
        "mgf" => {
            let s: f64 = cfg.require("s")?;
            let p = cfg.bias()?.p();
            let v = exact::mgf_rho1(s, p)?;
            single_value(cfg, op, &[("s", fmt(s)), ("p", fmt(p))], &[("value", fmt(v))])
        }
        "expected-rho" => {
            let k: u64 = cfg.require("k")?;
            let p = cfg.bias()?.p();
            let v = exact::expected_rho(k, p)?;
            single_value(cfg, op, &[("k", k.to_string()), ("p", fmt(p))], &[("value", fmt(v))])
        }
        "escape-bound" => {
            let r: u32 = cfg.require("r")?;
            let l = cfg.lambda()?;
            let graph = load_graph(cfg, r.max(1))?;
            let v = exact::escape_prob_bound(&graph, l, r)?;
            single_value(
                cfg,
                op,
                &[("graph", cfg.raw("graph").unwrap_or("z").into()), ("lambda", fmt(l)), ("r", r.to_string())],
                &[("value", fmt(v))],
            )
        }
        "range-bound" => {
            let k: u64 = cfg.require("k")?;
            let c: f64 = cfg.get("c")?.unwrap_or(0.5);
            let l = cfg.lambda()?;
            let needed = if l > 1.0 { (c * (k.max(2) as f64).ln() / l.ln()).ceil() as u32 + 1 } else { 1 };
            let graph = load_graph(cfg, needed.max(1))?;
            let root = graph.root();
            let (n, bound) = exact::range_lower_tail_bound(k, l, graph.degree(root), |r| graph.ball_size(r), c)?;
            single_value(
                cfg,
                op,
                &[
                    ("graph", cfg.raw("graph").unwrap_or("z").into()),
                    ("lambda", fmt(l)),
                    ("k", k.to_string()),
                    ("c", fmt(c)),
                ],
                &[("n", n.to_string()), ("threshold", fmt(n as f64 / 4.0)), ("value", fmt(bound))],
            )
        }
        "local-times" => {
            let spec = cfg.raw("visits").ok_or_else(|| ConfigError::Missing("visits".into()))?;
            let visits: HashMap<String, u64> = parse_pairs::<String, u64>(spec, "visits")?.into_iter().collect();
            let measure = cfg.measure()?;
            let v = exact::ret_prob_given_local_times(&visits, &measure);
            single_value(cfg, op, &[("visits", spec.to_string())], &[("value", fmt(v))])
        }
        _ => {
            return Err(ConfigError::Value {
                key: "op".into(),
                msg: format!("unknown exact op `{op}`"),
            }
            .into())
        }
    };
    Ok(table)
}

fn scan(cfg: &ExperimentConfig) -> Result<Table, RunError> {
    let grid: Vec<f64> = cfg.list("grid")?.ok_or_else(|| ConfigError::Missing("grid".into()))?;
    let f = cfg.lamp_order()?;
    let (k_lo, k_hi) = (cfg.get("k-lo")?.unwrap_or(10u64), cfg.get("k-hi")?.unwrap_or(100u64));
    let (replicas, seed, budget) = (cfg.replicas()?, cfg.seed()?, cfg.budget()?);
    let min_lambda = grid.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_lambda > 1.0) {
        return Err(ConfigError::Value {
            key: "grid".into(),
            msg: "all grid values must exceed 1".into(),
        }
        .into());
    }
    let steps = replicas as f64 * 4.0 * k_hi as f64 * mean_excursion(min_lambda);
    let graph = load_graph(cfg, safe_truncation_radius(min_lambda, steps as u64))?;
    let result = phase_scan(&grid, &graph, f, (k_lo, k_hi), replicas, seed, budget, cfg.estimator()?)?;
    let mut table = Table::new(&[
        "config_hash",
        "seed",
        "graph",
        "lambda",
        "lamp",
        "k_lo",
        "k_hi",
        "exponent",
        "std_error",
        "replicas",
        "min_evidence",
        "inconclusive",
        "side",
    ]);
    for (i, point) in result.points.iter().enumerate() {
        for e in &point.estimates {
            table.note_aborts(e);
        }
        let side = match point.transient_side() {
            Some(true) => "transient",
            Some(false) => "recurrent",
            None => "inconclusive",
        };
        let min_evidence = point
            .estimates
            .iter()
            .filter_map(|e| e.successes.map(|s| s as f64).or(e.effective_samples))
            .fold(f64::INFINITY, f64::min);
        table.push(vec![
            cfg.hash(),
            seed.wrapping_add(i as u64).to_string(),
            cfg.raw("graph").unwrap_or("z").to_string(),
            fmt(point.lambda),
            f.to_string(),
            k_lo.to_string(),
            k_hi.to_string(),
            point.exponent.map(|e| fmt(e.slope)).unwrap_or_default(),
            point.exponent.map(|e| fmt(e.std_error)).unwrap_or_default(),
            replicas.to_string(),
            fmt(min_evidence),
            point.inconclusive.to_string(),
            side.to_string(),
        ]);
    }
    table.trailer.push(format!("estimator={}", cfg.raw("estimator").unwrap_or("direct")));
    table.trailer.push(match result.bracket {
        Some((lo, hi)) => format!("bracket={lo},{hi}"),
        None => "bracket=none".into(),
    });
    Ok(table)
}

fn verify(cfg: &ExperimentConfig, suite: &str) -> Result<Table, RunError> {
    let report: OracleReport = match suite {
        "uniform-lamps" => {
            let max_len = cfg.get("max-len")?.unwrap_or(6usize);
            verify_uniform_lamp_law(cfg.lamp_order()?, max_len)?
        }
        "general-measure" => {
            let max_len = cfg.get("max-len")?.unwrap_or(4usize);
            let measure = if cfg.raw("measure").is_some() {
                cfg.measure()?
            } else {
                three_point_integer_measure()
            };
            verify_general_measure(&measure, max_len, cfg.tol()?)?
        }
        _ => {
            return Err(ConfigError::Value {
                key: "suite".into(),
                msg: format!("unknown suite `{suite}`"),
            }
            .into())
        }
    };
    let mut table = Table::new(&["config_hash", "suite", "path", "m_plus", "m_minus", "enumerated", "predicted", "passed"]);
    for c in &report.cases {
        let path: Vec<String> = c.path.iter().map(|x| x.to_string()).collect();
        table.push(vec![
            cfg.hash(),
            suite.to_string(),
            path.join(" "),
            c.m_plus.to_string(),
            c.m_minus.to_string(),
            fmt(c.enumerated),
            fmt(c.predicted),
            c.passed.to_string(),
        ]);
    }
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    table.trailer.push(format!(
        "result={verdict} cases={} failures={} max_abs_error={}",
        report.cases.len(),
        report.failures(),
        report.max_abs_error
    ));
    if !report.passed() {
        table.status = Status::CheckFailed;
    }
    Ok(table)
}
