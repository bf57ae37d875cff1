//! Command-line front end: `simulate`, `fit`, `benchmark` and `heatmap`.
//!
//! Every setting can come from a flag or from a flat `key = value` config
//! file (`--config` or `SPECTRAL_CIG_CONFIG`); flags win. Dotted keys group
//! ADMM settings, e.g. `admm.rho_bar = 2`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::admm::{AdmmConfig, GroupProxMode};
use crate::error::{Error, Result};
use crate::estimator::{extract_edges, fit_stats, lambda_grid, sweep, BicPoint, FitConfig, LambdaSelection};
use crate::eval::{f1_score, hamming, monte_carlo, LambdaPolicy, Scenario};
use crate::graph::{EdgeSet, WeightedEdge};
use crate::penalty::{PenaltyFamily, PenaltySpec, DEFAULT_EPSILON, DEFAULT_SCAD_A};
use crate::spectral::{half_window_for, spectral_statistics, MultiAttributeSeries};
use crate::synth::{generate, simulate_var, true_log_magnitude, ModelKind, ModelSpec};
use crate::tsio::{load_series, preprocess, write_series, Layout, LoadOptions, MissingPolicy, PreprocessOptions};

pub const CONFIG_ENV: &str = "SPECTRAL_CIG_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "spectral-cig", version, about = "Sparse-group conditional-independence graphs for multi-attribute time series")]
struct Cli {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a benchmark VAR model; writes series.csv and truth.json into --out.
    Simulate(Flags),
    /// Estimate the graph of a series; writes JSON to --out or stdout.
    Fit(Flags),
    /// Monte-Carlo F1 / Hamming / timing table.
    Benchmark(Flags),
    /// log10 magnitude matrix of a fitted (--input) or true (synthetic) inverse PSD.
    Heatmap(Flags),
}

/// All values are kept as text so flags and config entries share one parser.
#[derive(Debug, Args, Default)]
struct Flags {
    /// Benchmark model: 1 or 2.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    m: Option<String>,
    /// Series length; benchmark accepts a comma list.
    #[arg(long)]
    n: Option<String>,
    /// Smoothing half-window m_t; derived from --anchors if absent.
    #[arg(long)]
    mt: Option<String>,
    /// Target number of anchor frequencies M (default 4).
    #[arg(long)]
    anchors: Option<String>,
    #[arg(long)]
    clusters: Option<String>,
    #[arg(long)]
    p_er: Option<String>,
    /// VAR order L.
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    burn_in: Option<String>,
    /// lasso | logsum | scad; benchmark accepts a comma list.
    #[arg(long)]
    penalty: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// fixed | bic | oracle | oracle-run
    #[arg(long)]
    lambda_policy: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    scad_a: Option<String>,
    #[arg(long)]
    rho_bar: Option<String>,
    #[arg(long)]
    mu_bar: Option<String>,
    #[arg(long)]
    t_max: Option<String>,
    #[arg(long)]
    tau_abs: Option<String>,
    #[arg(long)]
    tau_rel: Option<String>,
    #[arg(long)]
    lla_iters: Option<String>,
    /// stacked | per-frequency
    #[arg(long)]
    group_prox: Option<String>,
    /// Edge threshold on block norms.
    #[arg(long)]
    gamma: Option<String>,
    /// Points on the BIC / oracle lambda grid.
    #[arg(long)]
    grid_size: Option<String>,
    /// Seed; benchmark uses seed, seed+1, ... unless a comma list is given.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    runs: Option<String>,
    /// Worker threads for benchmark (0 = all cores).
    #[arg(long)]
    jobs: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Input series (delimited text with a header row).
    #[arg(long)]
    input: Option<String>,
    /// node-major | attribute-major
    #[arg(long)]
    layout: Option<String>,
    /// reject | ffill
    #[arg(long)]
    missing: Option<String>,
    /// Apply log-ratio, detrending and unit-mean-square scaling before fitting.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    preprocess: Option<String>,
    /// Ground-truth edges (truth.json from simulate); enables scoring and the oracle policy.
    #[arg(long)]
    truth: Option<String>,
    /// fit: also write the log10 magnitude matrix here.
    #[arg(long)]
    heatmap: Option<String>,
}

/// Canonical config keys and the flag each one maps to.
const KEYS: &[(&str, &[&str])] = &[
    ("model", &[]),
    ("p", &[]),
    ("m", &[]),
    ("n", &[]),
    ("mt", &[]),
    ("anchors", &[]),
    ("clusters", &[]),
    ("p_er", &[]),
    ("order", &[]),
    ("burn_in", &[]),
    ("penalty", &[]),
    ("alpha", &[]),
    ("lambda", &[]),
    ("lambda_policy", &[]),
    ("epsilon", &[]),
    ("scad_a", &[]),
    ("admm.rho_bar", &["rho_bar"]),
    ("admm.mu_bar", &["mu_bar"]),
    ("admm.t_max", &["t_max"]),
    ("admm.tau_abs", &["tau_abs"]),
    ("admm.tau_rel", &["tau_rel"]),
    ("admm.group_prox", &["group_prox"]),
    ("lla_iters", &[]),
    ("gamma", &[]),
    ("grid_size", &[]),
    ("seed", &[]),
    ("runs", &[]),
    ("jobs", &[]),
    ("out", &[]),
    ("input", &[]),
    ("layout", &[]),
    ("missing", &[]),
    ("preprocess", &[]),
    ("truth", &[]),
    ("heatmap", &[]),
];

fn canonical_key(raw: &str) -> Option<&'static str> {
    let key = raw.trim().to_ascii_lowercase().replace('-', "_");
    KEYS.iter().find(|(k, aliases)| *k == key || aliases.contains(&key.as_str())).map(|(k, _)| *k)
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("config line {}: expected key = value", i + 1)))?;
        let key = canonical_key(k)
            .ok_or_else(|| Error::InvalidConfig(format!("config line {}: unknown key {:?}", i + 1, k.trim())))?;
        map.insert(key.to_string(), v.trim().to_string());
    }
    Ok(map)
}

impl Flags {
    fn entries(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("model", &self.model),
            ("p", &self.p),
            ("m", &self.m),
            ("n", &self.n),
            ("mt", &self.mt),
            ("anchors", &self.anchors),
            ("clusters", &self.clusters),
            ("p_er", &self.p_er),
            ("order", &self.order),
            ("burn_in", &self.burn_in),
            ("penalty", &self.penalty),
            ("alpha", &self.alpha),
            ("lambda", &self.lambda),
            ("lambda_policy", &self.lambda_policy),
            ("epsilon", &self.epsilon),
            ("scad_a", &self.scad_a),
            ("admm.rho_bar", &self.rho_bar),
            ("admm.mu_bar", &self.mu_bar),
            ("admm.t_max", &self.t_max),
            ("admm.tau_abs", &self.tau_abs),
            ("admm.tau_rel", &self.tau_rel),
            ("admm.group_prox", &self.group_prox),
            ("lla_iters", &self.lla_iters),
            ("gamma", &self.gamma),
            ("grid_size", &self.grid_size),
            ("seed", &self.seed),
            ("runs", &self.runs),
            ("jobs", &self.jobs),
            ("out", &self.out),
            ("input", &self.input),
            ("layout", &self.layout),
            ("missing", &self.missing),
            ("preprocess", &self.preprocess),
            ("truth", &self.truth),
            ("heatmap", &self.heatmap),
        ]
    }
}

/// Merged settings: config file entries overlaid by flags.
struct Settings(BTreeMap<String, String>);

impl Settings {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse {v:?}"))),
        }
    }

    fn get_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim().parse::<T>().map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse {s:?}")))
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            None => Ok(false),
            Some(v) => match v.to_ascii_lowercase().as_str() {
                "" | "1" | "true" | "yes" | "on" => Ok(true),
                "0" | "false" | "no" | "off" => Ok(false),
                _ => Err(Error::InvalidConfig(format!("{key}: expected a boolean, got {v:?}"))),
            },
        }
    }

    fn family(&self, name: &str) -> Result<PenaltyFamily> {
        let epsilon = self.get_or("epsilon", DEFAULT_EPSILON)?;
        let a = self.get_or("scad_a", DEFAULT_SCAD_A)?;
        match name.trim().to_ascii_lowercase().as_str() {
            "lasso" => Ok(PenaltyFamily::Lasso),
            "logsum" | "log-sum" | "log_sum" => Ok(PenaltyFamily::LogSum { epsilon }),
            "scad" => Ok(PenaltyFamily::Scad { a }),
            other => Err(Error::InvalidConfig(format!("unknown penalty {other:?}"))),
        }
    }

    fn families(&self) -> Result<Vec<PenaltyFamily>> {
        let names = self.raw("penalty").unwrap_or("lasso,logsum,scad");
        names.split(',').map(|s| self.family(s)).collect()
    }

    fn policy(&self, default: &str) -> Result<LambdaPolicy> {
        match self.raw("lambda_policy").unwrap_or(default).to_ascii_lowercase().as_str() {
            "fixed" => Ok(LambdaPolicy::Fixed),
            "bic" => Ok(LambdaPolicy::Bic),
            "oracle" | "oracle-scenario" => Ok(LambdaPolicy::OracleScenario),
            "oracle-run" => Ok(LambdaPolicy::OracleRun),
            other => Err(Error::InvalidConfig(format!("unknown lambda policy {other:?}"))),
        }
    }

    fn admm(&self) -> Result<AdmmConfig> {
        let d = AdmmConfig::default();
        let group_prox = match self.raw("admm.group_prox").unwrap_or("stacked") {
            "stacked" => GroupProxMode::Stacked,
            "per-frequency" | "per_frequency" => GroupProxMode::PerFrequency,
            other => return Err(Error::InvalidConfig(format!("unknown group prox mode {other:?}"))),
        };
        let c = AdmmConfig {
            rho_bar: self.get_or("admm.rho_bar", d.rho_bar)?,
            mu_bar: self.get_or("admm.mu_bar", d.mu_bar)?,
            tau_abs: self.get_or("admm.tau_abs", d.tau_abs)?,
            tau_rel: self.get_or("admm.tau_rel", d.tau_rel)?,
            max_iter: self.get_or("admm.t_max", d.max_iter)?,
            group_prox,
        };
        c.validate()?;
        Ok(c)
    }

    /// Everything except the half-window, which depends on `n`.
    fn fit_template(&self, family: PenaltyFamily) -> Result<FitConfig> {
        let mut c = FitConfig::fixed(PenaltySpec { family, lambda: self.get_or("lambda", 0.1)? }, 1);
        c.admm = self.admm()?;
        c.alpha = self.get_or("alpha", c.alpha)?;
        c.gamma = self.get_or("gamma", c.gamma)?;
        c.lla_iterations = self.get_or("lla_iters", c.lla_iterations)?;
        c.grid_size = self.get_or("grid_size", c.grid_size)?;
        Ok(c)
    }

    fn half_window(&self, n: usize) -> Result<usize> {
        if let Some(mt) = self.get("mt")? {
            return Ok(mt);
        }
        let anchors = self.get_or("anchors", 4usize)?;
        half_window_for(n, anchors)
            .ok_or_else(|| Error::InvalidConfig(format!("no half-window gives M = {anchors} at n = {n}; pass --mt")))
    }

    fn model(&self) -> Result<ModelSpec> {
        let p = self.get_or("p", 8usize)?;
        let m = self.get_or("m", 2usize)?;
        let mut spec = match self.get_or("model", 1u8)? {
            1 => ModelSpec::model1(p, m),
            2 => ModelSpec::model2(p, m),
            other => return Err(Error::InvalidConfig(format!("unknown model {other}"))),
        };
        spec.clusters = self.get_or("clusters", default_clusters(p))?;
        spec.order = self.get_or("order", spec.order)?;
        if let ModelKind::Model2 { ref mut p_er } = spec.kind {
            *p_er = self.get_or("p_er", *p_er)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    fn load_options(&self) -> Result<LoadOptions> {
        let layout = match self.raw("layout").unwrap_or("node-major") {
            "node-major" | "node_major" => Layout::NodeMajor,
            "attribute-major" | "attribute_major" => Layout::AttributeMajor,
            other => return Err(Error::InvalidConfig(format!("unknown layout {other:?}"))),
        };
        let missing = match self.raw("missing").unwrap_or("reject") {
            "reject" => MissingPolicy::Reject,
            "ffill" | "forward-fill" => MissingPolicy::ForwardFill,
            other => return Err(Error::InvalidConfig(format!("unknown missing-value policy {other:?}"))),
        };
        Ok(LoadOptions { layout, missing, ..LoadOptions::default() })
    }

    fn seeds(&self) -> Result<Vec<u64>> {
        let list: Vec<u64> = self.list("seed")?.unwrap_or_else(|| vec![0]);
        match self.get::<usize>("runs")? {
            Some(runs) if list.len() == 1 => Ok((0..runs as u64).map(|i| list[0] + i).collect()),
            Some(runs) if runs != list.len() => {
                Err(Error::InvalidConfig(format!("--runs {runs} disagrees with {} listed seeds", list.len())))
            }
            _ => Ok(list),
        }
    }
}

/// Eight clusters for `p >= 16` divisible by 8, otherwise node pairs.
pub fn default_clusters(p: usize) -> usize {
    if p >= 16 && p.is_multiple_of(8) {
        8
    } else if p.is_multiple_of(2) {
        (p / 2).max(1)
    } else {
        p
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthFile {
    pub nodes: usize,
    pub attributes: usize,
    pub seed: u64,
    pub model: ModelSpec,
    pub edges: Vec<WeightedEdge>,
}

impl TruthFile {
    pub fn edge_set(&self) -> Result<EdgeSet> {
        let mut set = EdgeSet::empty(self.nodes);
        for e in &self.edges {
            set.insert(e.a, e.b, e.weight)?;
        }
        Ok(set)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_) => 1,
        Error::InvalidInput(_)
        | Error::WindowTooLarge { .. }
        | Error::MissingValue { .. }
        | Error::Parse { .. }
        | Error::Io(_)
        | Error::Csv(_)
        | Error::Json(_) => 2,
        Error::NumericalFailure(_) | Error::SearchFailure(_) | Error::ScenarioFailed { .. } => 3,
    }
}

fn report_error(kind: &str, message: &str, code: i32) {
    let body = json!({ "error": kind, "message": message, "exit_code": code });
    eprintln!("{body}");
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code: 0 success, 1 usage, 2 data, 3 numerical.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            report_error("usage", &e.to_string(), 1);
            return 1;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            report_error(e.kind(), &e.to_string(), code);
            code
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut map = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::InvalidConfig(format!("config file {}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => BTreeMap::new(),
    };
    let (flags, command): (&Flags, fn(&Settings) -> Result<()>) = match &cli.command {
        Command::Simulate(f) => (f, simulate),
        Command::Fit(f) => (f, fit),
        Command::Benchmark(f) => (f, benchmark),
        Command::Heatmap(f) => (f, heatmap),
    };
    for (key, value) in flags.entries() {
        if let Some(v) = value {
            map.insert(key.to_string(), v.clone());
        }
    }
    command(&Settings(map))
}

fn write_output(out: Option<&str>, body: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, body)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(body.as_bytes())?;
        }
    }
    Ok(())
}

fn simulate(s: &Settings) -> Result<()> {
    let spec = s.model()?;
    let n = s.get_or("n", 1024usize)?;
    let seed = s.get_or("seed", 0u64)?;
    let burn_in = s.get_or("burn_in", 100usize)?;
    let out = PathBuf::from(s.raw("out").ok_or_else(|| Error::InvalidConfig("simulate needs --out DIR".into()))?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = generate(&spec, &mut rng)?;
    let series = simulate_var(&truth.model, n, burn_in, &mut rng)?;

    fs::create_dir_all(&out)?;
    write_series(&series, fs::File::create(out.join("series.csv"))?)?;
    let file = TruthFile {
        nodes: spec.nodes,
        attributes: spec.attributes,
        seed,
        model: spec,
        edges: truth.edges.iter().collect(),
    };
    fs::write(out.join("truth.json"), serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

fn read_input(s: &Settings) -> Result<MultiAttributeSeries> {
    let path = s.raw("input").ok_or_else(|| Error::InvalidConfig("--input is required".into()))?;
    let p = s.get::<usize>("p")?.ok_or_else(|| Error::InvalidConfig("--p is required".into()))?;
    let m = s.get_or("m", 1usize)?;
    let series = load_series(path, p, m, &s.load_options()?)?;
    if s.flag("preprocess")? {
        preprocess(&series, &PreprocessOptions::default())
    } else {
        Ok(series)
    }
}

fn read_truth(path: &str) -> Result<EdgeSet> {
    let text = fs::read_to_string(path)?;
    let file: TruthFile = serde_json::from_str(&text)?;
    file.edge_set()
}

#[derive(Debug, Serialize)]
struct FitReport {
    nodes: usize,
    attributes: usize,
    n: usize,
    half_window: usize,
    anchors: usize,
    penalty: String,
    lambda_policy: String,
    lambda: f64,
    converged: bool,
    /// Weights scaled so the strongest edge is 1.
    edges: Vec<WeightedEdge>,
    bic_trace: Vec<BicPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_sm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hamming: Option<f64>,
}

/// Fits per the lambda policy; returns the report and the heatmap matrix.
fn fit_series(s: &Settings, series: &MultiAttributeSeries) -> Result<(FitReport, DMatrix<f64>)> {
    let family = s.family(s.raw("penalty").unwrap_or("logsum"))?;
    let policy = s.policy("bic")?;
    let (p, m, n) = (series.nodes(), series.attributes(), series.len());
    let mut config = s.fit_template(family)?;
    config.half_window = s.half_window(n)?;
    let truth = s.raw("truth").map(read_truth).transpose()?;
    let stats = spectral_statistics(series, config.half_window)?;

    let (edges, lambda, converged, trace, lambda_sm, heat) = match policy {
        LambdaPolicy::Fixed | LambdaPolicy::Bic => {
            config.selection = if policy == LambdaPolicy::Bic { LambdaSelection::Bic } else { LambdaSelection::Fixed };
            let r = fit_stats(&stats, m, p, &config)?;
            let heat = r.precision.log_magnitude();
            (r.edges, r.lambda, r.converged, r.bic_trace, r.lambda_range.map(|l| l.lambda_sm), heat)
        }
        LambdaPolicy::OracleScenario | LambdaPolicy::OracleRun => {
            let truth = truth
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("the oracle policy needs --truth".into()))?;
            let range = lambda_grid(&stats, &config, p)?;
            let fits = sweep(&stats, &config, m, p, &range.grid)?;
            let mut best: Option<(f64, crate::estimator::LlaFit, EdgeSet)> = None;
            for f in fits {
                let e = extract_edges(&f.precision, config.gamma);
                let score = f1_score(&e, truth)?;
                if best.as_ref().is_none_or(|(b, _, _)| score > *b) {
                    best = Some((score, f, e));
                }
            }
            let (_, f, e) = best.ok_or_else(|| Error::InvalidConfig("lambda grid is empty".into()))?;
            let heat = f.precision.log_magnitude();
            (e, f.lambda, f.converged, vec![], Some(range.lambda_sm), heat)
        }
    };
    let (f1, ham) = match &truth {
        Some(t) => (Some(f1_score(&edges, t)?), Some(hamming(&edges, t)?)),
        None => (None, None),
    };
    let report = FitReport {
        nodes: p,
        attributes: m,
        n,
        half_window: config.half_window,
        anchors: stats.anchors(),
        penalty: family.name().into(),
        lambda_policy: s.raw("lambda_policy").unwrap_or("bic").to_string(),
        lambda,
        converged,
        edges: edges.normalized().iter().collect(),
        bic_trace: trace,
        lambda_sm,
        f1,
        hamming: ham,
    };
    Ok((report, heat))
}

/// Comma-delimited rows; `-inf` marks exact zeros.
pub fn format_matrix(mat: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..mat.nrows() {
        let row: Vec<String> = mat.row(i).iter().map(|v| format!("{v:.6e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Resolves every fit setting so usage errors surface before any I/O.
fn check_fit_settings(s: &Settings) -> Result<()> {
    let family = s.family(s.raw("penalty").unwrap_or("logsum"))?;
    s.policy("bic")?;
    s.fit_template(family)?.validate()?;
    s.load_options()?;
    s.flag("preprocess")?;
    Ok(())
}

fn fit(s: &Settings) -> Result<()> {
    check_fit_settings(s)?;
    let series = read_input(s)?;
    let (report, heat) = fit_series(s, &series)?;
    if let Some(path) = s.raw("heatmap") {
        fs::write(path, format_matrix(&heat))?;
    }
    write_output(s.raw("out"), &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn heatmap(s: &Settings) -> Result<()> {
    let mat = if s.raw("input").is_some() {
        check_fit_settings(s)?;
        let series = read_input(s)?;
        fit_series(s, &series)?.1
    } else {
        let spec = s.model()?;
        let mut rng = ChaCha8Rng::seed_from_u64(s.get_or("seed", 0u64)?);
        let truth = generate(&spec, &mut rng)?;
        true_log_magnitude(&truth.model, spec.f_step)
    };
    write_output(s.raw("out"), &format_matrix(&mat))
}

fn benchmark(s: &Settings) -> Result<()> {
    let model = s.model()?;
    let sample_sizes = s.list("n")?.unwrap_or_else(|| vec![1024usize]);
    let policy = s.policy("oracle")?;
    let mut scenario = Scenario::new(model, sample_sizes, s.families()?, policy);
    scenario.anchors = s.get_or("anchors", 4usize)?;
    scenario.fit = s.fit_template(PenaltyFamily::Lasso)?;
    scenario.oracle_grid = s.get_or("grid_size", 20usize)?;
    scenario.burn_in = s.get_or("burn_in", 100usize)?;
    let seeds = s.seeds()?;
    let jobs = s.get_or("jobs", 1usize)?;
    let table = monte_carlo(&scenario, &seeds, jobs)?;

    print!("{}", table.to_text());
    if let Some(path) = s.raw("out") {
        let body = json!({ "scenario": scenario, "seeds": seeds, "table": table });
        fs::write(Path::new(path), serde_json::to_string_pretty(&body)? + "\n")?;
    }
    Ok(())
}
