//! Command implementations behind the `guardzone` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use guardzone_core::multi_obs::{self, AlohaParams, DecisionRuleTable};
use guardzone_core::nofading::{self, IltConfig};
use guardzone_core::risk::{self, CostMatrix, OptimalRadius, SingleObsRule};
use guardzone_core::{correlation, single_obs, Model, ModelParams};
use serde_json::json;

use crate::io::{self, Cell, RunManifest, Scenario, Table};
use crate::montecarlo::{Fading, SimConfig};
use crate::validation;

pub const DEFAULT_GRID_POINTS: usize = 400;
pub const DEFAULT_CHI_RANGE: (f64, f64) = (1e-3, 1e4);

#[derive(Debug, Parser)]
#[command(name = "guardzone", version, about = "Guard-zone analysis for Poisson ad hoc networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FadingArg {
    Rayleigh,
    None,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario JSON with keys n, lambda, alpha, beta, r_T, eta.
    #[arg(long)]
    pub scenario: PathBuf,
    /// `auto`, `log:<lo>:<hi>:<points>`, `lin:<lo>:<hi>:<points>` or a
    /// comma-separated list.
    #[arg(long, default_value = "auto")]
    pub grid: String,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Correlation of the physical and protocol success indicators vs chi.
    Correlation {
        #[command(flatten)]
        common: Common,
        /// Optimal chi vs load for delta in {1/3, 1/2, 2/3}; the grid is
        /// then over the load.
        #[arg(long)]
        sweep_density: bool,
    },
    /// Bayes risk of the guard-zone rule vs r_O and its minimizer.
    Risk {
        #[command(flatten)]
        common: Common,
        /// Cost JSON with keys c00, c01, c10, c11.
        #[arg(long)]
        cost: Option<PathBuf>,
    },
    /// ROC of the guard-zone rule and its named operating points.
    Roc {
        #[command(flatten)]
        common: Common,
        /// Cost JSON; only the risk column and the risk optimum use it.
        #[arg(long)]
        cost: Option<PathBuf>,
    },
    /// Rayleigh vs no-fading ROC and correlation.
    FadingCompare {
        #[command(flatten)]
        common: Common,
    },
    /// Every decision rule over N past Aloha observations.
    Multiobs {
        #[command(flatten)]
        common: Common,
        /// Aloha JSON with keys p, N.
        #[arg(long)]
        aloha: Option<PathBuf>,
        /// Guard-zone radius, or `auto` for the single-observation optimum
        /// at the active density.
        #[arg(long = "r-o", default_value = "auto")]
        r_o: String,
    },
    /// Compare analytic values with Monte Carlo at 3 standard errors.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Aloha JSON; switches to the multi-slot checks at one radius.
        #[arg(long)]
        aloha: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, value_enum, default_value = "rayleigh")]
        fading: FadingArg,
        /// Scale beta by this factor in the simulator only (harness
        /// self-test; the run is expected to fail).
        #[arg(long)]
        corrupt_beta: Option<f64>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] io::IoError),
    #[error(transparent)]
    Model(#[from] guardzone_core::Error),
    #[error(transparent)]
    Sim(#[from] crate::montecarlo::SimError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// A finished command: its table and whether it counts as a pass.
#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    pub passed: bool,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Auto,
    Log { lo: f64, hi: f64, points: usize },
    Lin { lo: f64, hi: f64, points: usize },
    List(Vec<f64>),
}

impl GridSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Input(format!("bad grid spec `{s}`"));
        let s = s.trim();
        if s.is_empty() || s == "auto" {
            return Ok(GridSpec::Auto);
        }
        if let Some(rest) = s.strip_prefix("log:").or_else(|| s.strip_prefix("lin:")) {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let lo: f64 = parts[0].parse().map_err(|_| bad())?;
            let hi: f64 = parts[1].parse().map_err(|_| bad())?;
            let points: usize = parts[2].parse().map_err(|_| bad())?;
            if !(lo.is_finite() && hi.is_finite() && hi > lo && points >= 2) {
                return Err(bad());
            }
            return Ok(if s.starts_with("log:") {
                if lo <= 0.0 {
                    return Err(bad());
                }
                GridSpec::Log { lo, hi, points }
            } else {
                GridSpec::Lin { lo, hi, points }
            });
        }
        let values: Result<Vec<f64>, _> = s.split(',').map(|v| v.trim().parse::<f64>()).collect();
        let values = values.map_err(|_| bad())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(bad());
        }
        Ok(GridSpec::List(values))
    }

    /// Grid values, with `auto` resolved to `fallback`.
    pub fn resolve(&self, fallback: impl FnOnce() -> Vec<f64>) -> Vec<f64> {
        match self {
            GridSpec::Auto => fallback(),
            GridSpec::Log { lo, hi, points } => log_grid(*lo, *hi, *points),
            GridSpec::Lin { lo, hi, points } => (0..*points)
                .map(|i| lo + (hi - lo) * i as f64 / (*points - 1) as f64)
                .collect(),
            GridSpec::List(v) => v.clone(),
        }
    }
}

pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn default_chi_grid() -> Vec<f64> {
    log_grid(DEFAULT_CHI_RANGE.0, DEFAULT_CHI_RANGE.1, DEFAULT_GRID_POINTS)
}

fn radius_grid(model: &Model, spec: &GridSpec) -> Result<Vec<f64>, CliError> {
    let grid = spec.resolve(|| default_chi_grid().into_iter().map(|c| model.radius_of_chi(c)).collect());
    if grid.iter().any(|r| !(*r > 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Input("r_O grid must be positive and strictly increasing".into()));
    }
    Ok(grid)
}

fn load_scenario(path: &Path) -> Result<(Scenario, Model), CliError> {
    let scenario: Scenario = io::read_json(path)?;
    let model = Model::new(scenario.params)?;
    Ok((scenario, model))
}

fn load_cost(flag: &Option<PathBuf>, scenario: &Scenario) -> Result<(CostMatrix, &'static str), CliError> {
    let (cost, source) = match flag {
        Some(p) => (io::read_json::<CostMatrix>(p)?, "file"),
        None => match scenario.cost {
            Some(c) => (c, "scenario"),
            None => (CostMatrix::UNIFORM, "uniform default"),
        },
    };
    cost.validate()?;
    Ok((cost, source))
}

fn load_aloha(flag: &Option<PathBuf>, scenario: &Scenario) -> Result<Option<AlohaParams>, CliError> {
    Ok(match flag {
        Some(p) => Some(io::read_json(p)?),
        None => scenario.aloha,
    })
}

fn num(x: f64) -> Cell {
    Cell::Num(x)
}

pub fn cmd_correlation(common: &Common, sweep_density: bool) -> Result<Outcome, CliError> {
    let (scenario, model) = load_scenario(&common.scenario)?;
    let spec = GridSpec::parse(&common.grid)?;
    let mut table;
    if sweep_density {
        let loads = spec.resolve(|| log_grid(1e-3, 1e3, 61));
        if loads.iter().any(|l| !(*l > 0.0)) {
            return Err(CliError::Input("load grid must be positive".into()));
        }
        let deltas = [1.0 / 3.0, 0.5, 2.0 / 3.0];
        table = Table::new("correlation", &["load", "chi_star_delta_1_3", "chi_star_delta_1_2", "chi_star_delta_2_3"]);
        let p = scenario.params;
        for &load in &loads {
            let mut row = vec![num(load)];
            for &d in &deltas {
                let alpha = p.n as f64 / d;
                let sigma = p.beta * p.r_t.powf(alpha);
                let c_n = guardzone_core::params::unit_ball_volume(p.n)?;
                let m = Model::new(ModelParams {
                    lambda: load / (c_n * sigma.powf(d)),
                    alpha,
                    ..p
                })?;
                row.push(num(correlation::chi_star(&m)?.chi));
            }
            table.push(row);
        }
        for (name, d) in ["1_3", "1_2", "2_3"].iter().zip(deltas) {
            table.note(&format!("sparse_limit_delta_{name}"), correlation::chi_star_sparse_limit(d)?);
        }
    } else {
        let chis = spec.resolve(default_chi_grid);
        if chis.iter().any(|c| !(*c > 0.0)) {
            return Err(CliError::Input("chi grid must be positive".into()));
        }
        table = Table::new("correlation", &["chi", "r_o", "rho", "f1", "f2"]);
        for &chi in &chis {
            table.push(vec![
                num(chi),
                num(model.radius_of_chi(chi)),
                num(correlation::rho(&model, chi)?),
                num(correlation::f1(&model, chi)),
                num(correlation::f2(&model, chi)),
            ]);
        }
        let star = correlation::chi_star(&model)?;
        table.note("chi_star", star.chi);
        table.note("rho_star", star.rho);
        table.note("r_o_star", model.radius_of_chi(star.chi));
        table.note("stationary_points", star.stationary_points as u64);
    }
    table.config_hash = io::config_hash(&json!({
        "command": "correlation", "scenario": scenario, "grid": common.grid, "sweep_density": sweep_density,
    }));
    Ok(Outcome { table, passed: true, seed: None })
}

pub fn cmd_risk(common: &Common, cost_path: &Option<PathBuf>) -> Result<Outcome, CliError> {
    let (scenario, model) = load_scenario(&common.scenario)?;
    let (cost, source) = load_cost(cost_path, &scenario)?;
    let grid = radius_grid(&model, &GridSpec::parse(&common.grid)?)?;
    let mut table = Table::new("risk", &["r_o", "chi", "risk", "d_risk", "f_left", "f_right"]);
    let risk_at = |r: f64| risk::bayes_risk(&model, &cost, r);
    let mut best = (f64::NAN, f64::INFINITY);
    for &r in &grid {
        let h = r * 1e-5;
        let value = risk_at(r);
        if value < best.1 {
            best = (r, value);
        }
        table.push(vec![
            num(r),
            num(model.chi_of_radius(r)),
            num(value),
            num((risk_at(r + h) - risk_at(r - h)) / (2.0 * h)),
            num(risk::f_left(&model, &cost, r)),
            num(risk::f_right(&model, r)),
        ]);
    }
    table.note("cost", source);
    table.note("grid_argmin", best.0);
    match cost.validate_for_optimization() {
        Err(e) => table.note("r_o_star", format!("skipped: {e}")),
        Ok(()) => match risk::optimal_radius(&model, &cost)? {
            OptimalRadius::Interior { r_o, chi, risk, .. } => {
                table.note("r_o_star", r_o);
                table.note("chi_star", chi);
                table.note("risk_star", risk);
                match risk::sensitivities(&model, &cost) {
                    Ok(s) => {
                        table.note("dr_dlambda", s.d_lambda);
                        table.note("dr_dsigma", s.d_sigma);
                    }
                    Err(e) => table.note("sensitivities", format!("unavailable: {e}")),
                }
            }
            OptimalRadius::NoInteriorOptimum { risk } => {
                table.note("r_o_star", "none: risk decreases without bound in r_O");
                table.note("risk_limit", risk);
            }
        },
    }
    table.config_hash = io::config_hash(&json!({
        "command": "risk", "scenario": scenario, "cost": cost, "grid": common.grid,
    }));
    Ok(Outcome { table, passed: true, seed: None })
}

pub fn cmd_roc(common: &Common, cost_path: &Option<PathBuf>) -> Result<Outcome, CliError> {
    let (scenario, model) = load_scenario(&common.scenario)?;
    let (cost, source) = load_cost(cost_path, &scenario)?;
    let grid = radius_grid(&model, &GridSpec::parse(&common.grid)?)?;
    let mut table = Table::new("roc", &["r_o", "chi", "p_i", "p_ii", "risk"]);
    for pt in risk::roc_curve(&model, &grid, SingleObsRule::IDENTITY, &cost)? {
        table.push(vec![num(pt.r_o), num(model.chi_of_radius(pt.r_o)), num(pt.p_i), num(pt.p_ii), num(pt.risk)]);
    }
    table.note("cost", source);
    let ops = risk::operating_points(&model)?;
    let mark = |table: &mut Table, name: &str, r: f64| {
        let (p_i, p_ii) = risk::type_errors(&model, r, SingleObsRule::IDENTITY);
        table.note(name, r);
        table.note(&format!("{name}_p_i"), p_i);
        table.note(&format!("{name}_p_ii"), p_ii);
    };
    mark(&mut table, "r_t", model.params.r_t);
    match ops.r_di {
        Some(r) => mark(&mut table, "r_di", r),
        None => table.note("r_di", "omitted: 1/sigma <= eta"),
    }
    mark(&mut table, "r_mm", ops.r_mm);
    mark(&mut table, "r_ee", ops.r_ee);
    mark(&mut table, "r_corr", risk::max_correlation_radius(&model)?);
    if cost.validate_for_optimization().is_ok() {
        if let OptimalRadius::Interior { r_o, .. } = risk::optimal_radius(&model, &cost)? {
            mark(&mut table, "r_risk", r_o);
        }
    }
    table.config_hash = io::config_hash(&json!({
        "command": "roc", "scenario": scenario, "cost": cost, "grid": common.grid,
    }));
    Ok(Outcome { table, passed: true, seed: None })
}

pub fn cmd_fading_compare(common: &Common) -> Result<Outcome, CliError> {
    let (scenario, model) = load_scenario(&common.scenario)?;
    if (model.delta() - 0.5).abs() > 1e-12 {
        return Err(CliError::Input(format!(
            "fading-compare needs n/alpha = 1/2, scenario has {}",
            model.delta()
        )));
    }
    let grid = radius_grid(&model, &GridSpec::parse(&common.grid)?)?;
    let ilt = IltConfig::default();
    let mut table = Table::new(
        "fading-compare",
        &["r_o", "p_i_rayleigh", "p_ii_rayleigh", "rho_rayleigh", "p_i_nofade", "p_ii_nofade", "rho_nofade"],
    );
    let nofade = nofading::roc_nofade(&model, &grid, &ilt)?;
    let mut peak_ray = (f64::NAN, f64::NEG_INFINITY);
    let mut peak_nf = (f64::NAN, f64::NEG_INFINITY);
    for (&r, nf) in grid.iter().zip(&nofade) {
        let (p_i, p_ii) = risk::type_errors(&model, r, SingleObsRule::IDENTITY);
        let rho_ray = correlation::rho(&model, model.chi_of_radius(r))?;
        let rho_nf = nofading::rho_nofade(&model, r, &ilt)?;
        if rho_ray > peak_ray.1 {
            peak_ray = (r, rho_ray);
        }
        if rho_nf > peak_nf.1 {
            peak_nf = (r, rho_nf);
        }
        table.push(vec![num(r), num(p_i), num(p_ii), num(rho_ray), num(nf.p_i), num(nf.p_ii), num(rho_nf)]);
    }
    table.note("peak_rho_rayleigh", peak_ray.1);
    table.note("peak_r_rayleigh", peak_ray.0);
    table.note("peak_rho_nofade", peak_nf.1);
    table.note("peak_r_nofade", peak_nf.0);
    table.note("p_h_rayleigh", single_obs::prior_success(&model));
    if let Ok(p) = nofading::levy_prior(&model) {
        table.note("p_h_nofade", p);
    }
    table.config_hash = io::config_hash(&json!({
        "command": "fading-compare", "scenario": scenario, "grid": common.grid,
        "ilt_terms": ilt.terms, "ilt_target": ilt.precision_target,
    }));
    Ok(Outcome { table, passed: true, seed: None })
}

/// Identity-rule Bayes-optimal radius at the active density `p λ`.
pub fn auto_multiobs_radius(model: &Model, aloha: &AlohaParams) -> Result<f64, CliError> {
    let active = model.with_density(aloha.p * model.params.lambda)?;
    match risk::optimal_radius(&active, &CostMatrix::UNIFORM)? {
        OptimalRadius::Interior { r_o, .. } => Ok(r_o),
        OptimalRadius::NoInteriorOptimum { .. } => Err(CliError::Input(
            "no interior optimum at the active density; pass --r-o explicitly".into(),
        )),
    }
}

fn parse_radius(s: &str) -> Result<Option<f64>, CliError> {
    if s == "auto" {
        return Ok(None);
    }
    let r: f64 = s.parse().map_err(|_| CliError::Input(format!("bad --r-o `{s}`")))?;
    if !(r.is_finite() && r > 0.0) {
        return Err(CliError::Input("--r-o must be positive".into()));
    }
    Ok(Some(r))
}

pub fn cmd_multiobs(common: &Common, aloha_path: &Option<PathBuf>, r_o: &str) -> Result<Outcome, CliError> {
    let (scenario, model) = load_scenario(&common.scenario)?;
    let aloha = load_aloha(aloha_path, &scenario)?
        .ok_or_else(|| CliError::Input("multiobs needs Aloha parameters (--aloha or scenario)".into()))?;
    aloha.validate(&model)?;
    let r_o = match parse_radius(r_o)? {
        Some(r) => r,
        None => auto_multiobs_radius(&model, &aloha)?,
    };
    let all = multi_obs::enumerate_rules(&model, &aloha, r_o)?;
    let mut table = Table::new("multiobs", &["rule", "p_i", "p_ii", "risk"]);
    for s in &all.rules {
        table.push(vec![s.rule.bitstring().into(), num(s.p_i), num(s.p_ii), num(s.uniform_risk)]);
    }
    table.note("r_o", r_o);
    table.note("n_obs", aloha.n_obs);
    table.note("p", aloha.p);
    table.note("rule_count", DecisionRuleTable::rule_count(aloha.n_obs));
    table.note("best", all.rules[all.best].rule.bitstring());
    table.note("worst", all.rules[all.worst].rule.bitstring());
    table.note("follow_d", DecisionRuleTable::follow(aloha.n_obs).bitstring());
    table.note("contradict_d", DecisionRuleTable::contradict(aloha.n_obs).bitstring());
    table.config_hash = io::config_hash(&json!({
        "command": "multiobs", "scenario": scenario, "aloha": aloha, "r_o": r_o,
    }));
    Ok(Outcome { table, passed: true, seed: None })
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_validate(
    common: &Common,
    aloha_path: &Option<PathBuf>,
    seed: u64,
    trials: u64,
    fading: FadingArg,
    corrupt_beta: Option<f64>,
) -> Result<Outcome, CliError> {
    let (scenario, model) = load_scenario(&common.scenario)?;
    let aloha = load_aloha(aloha_path, &scenario)?;
    let spec = GridSpec::parse(&common.grid)?;
    let r_t = model.params.r_t;
    let mut cfg = SimConfig::new(trials, seed, Vec::new());
    cfg.fading = match fading {
        FadingArg::Rayleigh => Fading::Rayleigh,
        FadingArg::None => Fading::None,
    };
    let report = match (aloha, cfg.fading) {
        (Some(a), Fading::Rayleigh) => {
            let grid = spec.resolve(|| vec![5.0 * r_t]);
            let mut merged: Option<validation::ValidationReport> = None;
            for &r in &grid {
                let rep = validation::validate_multi(&model, &a, &cfg, r)?;
                match &mut merged {
                    None => merged = Some(rep),
                    Some(m) => m.checks.extend(rep.checks),
                }
            }
            merged.ok_or_else(|| CliError::Input("empty grid".into()))?
        }
        (Some(_), Fading::None) => {
            return Err(CliError::Input("multi-slot validation assumes Rayleigh fading".into()));
        }
        (None, fading) => {
            cfg.r_o_grid = spec.resolve(|| [1.0, 3.0, 5.0, 8.0].iter().map(|k| k * r_t).collect());
            match fading {
                Fading::Rayleigh => {
                    let sim_model = match corrupt_beta {
                        Some(f) => Model::new(ModelParams {
                            beta: model.params.beta * f,
                            ..model.params
                        })?,
                        None => model,
                    };
                    validation::validate_single(&model, &sim_model, &cfg)?
                }
                Fading::None => {
                    if (model.delta() - 0.5).abs() > 1e-12 {
                        return Err(CliError::Input("no-fading validation needs n/alpha = 1/2".into()));
                    }
                    validation::validate_nofade(&model, &cfg, &IltConfig::default())?
                }
            }
        }
    };
    let mut table = report.to_table();
    if let Some(f) = corrupt_beta {
        table.note("corrupt_beta", f);
    }
    table.config_hash = io::config_hash(&json!({
        "command": "validate", "scenario": scenario, "aloha": aloha, "grid": common.grid,
        "seed": seed, "trials": trials, "fading": cfg.fading, "corrupt_beta": corrupt_beta,
    }));
    Ok(Outcome {
        passed: report.passed(),
        table,
        seed: Some(seed),
    })
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Correlation { common, sweep_density } => cmd_correlation(common, *sweep_density),
        Command::Risk { common, cost } => cmd_risk(common, cost),
        Command::Roc { common, cost } => cmd_roc(common, cost),
        Command::FadingCompare { common } => cmd_fading_compare(common),
        Command::Multiobs { common, aloha, r_o } => cmd_multiobs(common, aloha, r_o),
        Command::Validate {
            common,
            aloha,
            seed,
            trials,
            fading,
            corrupt_beta,
        } => cmd_validate(common, aloha, *seed, *trials, *fading, *corrupt_beta),
    }
}

fn common(cli: &Cli) -> &Common {
    match &cli.command {
        Command::Correlation { common, .. }
        | Command::Risk { common, .. }
        | Command::Roc { common, .. }
        | Command::FadingCompare { common }
        | Command::Multiobs { common, .. }
        | Command::Validate { common, .. } => common,
    }
}

/// Runs the command, writes its output (and manifest when writing to a
/// file) and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let c = common(&cli);
    let text = match c.format {
        Format::Csv => outcome.table.to_csv(),
        Format::Json => outcome.table.to_json(),
    };
    match &c.out {
        None => print!("{text}"),
        Some(path) => {
            let manifest = RunManifest {
                scenario: Some(c.scenario.clone()),
                command: outcome.table.command.clone(),
                output: path.clone(),
                seed: outcome.seed,
                timestamp: io::unix_time(),
                version: env!("CARGO_PKG_VERSION").to_owned(),
                config_hash: outcome.table.config_hash.clone(),
            };
            if let Err(e) = io::write_file(path, &text).and_then(|_| manifest.write().map(|_| ())) {
                eprintln!("error: {e}");
                return 2;
            }
        }
    }
    if outcome.passed {
        0
    } else {
        for (k, v) in &outcome.table.summary {
            if k == "passed" {
                eprintln!("validation failed: {v} checks passed");
            }
        }
        1
    }
}
