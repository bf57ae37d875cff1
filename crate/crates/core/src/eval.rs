//! Edge-recovery scores and the Monte-Carlo benchmark harness.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{extract_edges, fit_stats, lambda_grid, log_grid, sweep, FitConfig, LambdaSelection};
use crate::graph::EdgeSet;
use crate::penalty::PenaltyFamily;
use crate::spectral::{half_window_for, spectral_statistics, SpectralStatistics};
use crate::synth::{generate, simulate_var, GroundTruth, ModelSpec};

fn check_same_nodes(est: &EdgeSet, truth: &EdgeSet) -> Result<()> {
    if est.nodes() != truth.nodes() {
        return Err(Error::InvalidInput(format!(
            "edge sets on {} and {} nodes",
            est.nodes(),
            truth.nodes()
        )));
    }
    Ok(())
}

/// `2PR / (P + R)`. Two empty sets score 1, exactly one empty set scores 0.
pub fn f1_score(est: &EdgeSet, truth: &EdgeSet) -> Result<f64> {
    check_same_nodes(est, truth)?;
    match (est.is_empty(), truth.is_empty()) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let hits = est.pairs().filter(|&(a, b)| truth.contains(a, b)).count() as f64;
    if hits == 0.0 {
        return Ok(0.0);
    }
    let precision = hits / est.len() as f64;
    let recall = hits / truth.len() as f64;
    Ok(2.0 * precision * recall / (precision + recall))
}

/// Size of the symmetric difference of the two unordered edge sets.
pub fn hamming(est: &EdgeSet, truth: &EdgeSet) -> Result<f64> {
    check_same_nodes(est, truth)?;
    let hits = est.pairs().filter(|&(a, b)| truth.contains(a, b)).count();
    Ok((est.len() + truth.len() - 2 * hits) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaPolicy {
    /// One `lambda` per (family, n) cell maximizing mean F1 over the runs.
    OracleScenario,
    /// `lambda` maximizing F1 separately in every run.
    OracleRun,
    /// The estimator's BIC selection.
    Bic,
    /// `fit.penalty.lambda` as given.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub model: ModelSpec,
    pub sample_sizes: Vec<usize>,
    /// Target number of anchor frequencies `M`; `m_t` is derived per `n`.
    pub anchors: usize,
    pub families: Vec<PenaltyFamily>,
    pub policy: LambdaPolicy,
    /// Template for ADMM, LLA, `alpha`, `gamma` and grid size settings.
    pub fit: FitConfig,
    /// Points on the oracle `lambda` grid.
    pub oracle_grid: usize,
    pub burn_in: usize,
}

impl Scenario {
    pub fn new(model: ModelSpec, sample_sizes: Vec<usize>, families: Vec<PenaltyFamily>, policy: LambdaPolicy) -> Self {
        let template = FitConfig::fixed(crate::penalty::PenaltySpec::lasso(0.0), 1);
        Self { model, sample_sizes, anchors: 4, families, policy, fit: template, oracle_grid: 20, burn_in: 100 }
    }

    pub fn half_window(&self, n: usize) -> Result<usize> {
        half_window_for(n, self.anchors).ok_or(Error::InvalidConfig(format!(
            "no half-window gives M = {} at n = {n}",
            self.anchors
        )))
    }

    fn config_for(&self, family: PenaltyFamily, n: usize, lambda: f64) -> Result<FitConfig> {
        let mut c = self.fit;
        c.penalty.family = family;
        c.penalty.lambda = lambda;
        c.half_window = self.half_window(n)?;
        c.selection = if self.policy == LambdaPolicy::Bic { LambdaSelection::Bic } else { LambdaSelection::Fixed };
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub family: String,
    pub n: usize,
    pub f1: f64,
    pub hamming: f64,
    /// Oracle policies: mean time per grid point; otherwise the whole fit.
    pub wall_time_seconds: f64,
    pub lambda: f64,
    pub converged: bool,
    pub edges: usize,
    pub true_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub seed: u64,
    pub family: String,
    pub n: usize,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, std: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub family: String,
    pub n: usize,
    pub runs: usize,
    pub failures: usize,
    pub f1: MeanStd,
    pub hamming: MeanStd,
    pub wall_time_seconds: MeanStd,
    /// The common `lambda` under the per-scenario oracle.
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloTable {
    pub cells: Vec<Cell>,
    pub reports: Vec<RunReport>,
    pub failures: Vec<Failure>,
}

impl MonteCarloTable {
    pub fn cell(&self, family: PenaltyFamily, n: usize) -> Option<&Cell> {
        self.cells.iter().find(|c| c.family == family.name() && c.n == n)
    }

    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<8} {:>6} {:>5} {:>18} {:>18} {:>20}\n",
            "penalty", "n", "runs", "F1", "Hamming", "time [s]"
        );
        for c in &self.cells {
            out.push_str(&format!(
                "{:<8} {:>6} {:>5} {:>18} {:>18} {:>20}\n",
                c.family,
                c.n,
                c.runs,
                format!("{:.4} ± {:.4}", c.f1.mean, c.f1.std),
                format!("{:.2} ± {:.2}", c.hamming.mean, c.hamming.std),
                format!("{:.4} ± {:.4}", c.wall_time_seconds.mean, c.wall_time_seconds.std),
            ));
        }
        out
    }
}

/// Data for one seed at one sample size.
struct Instance {
    seed: u64,
    truth: GroundTruth,
    stats: SpectralStatistics,
    lower: f64,
    upper: f64,
}

/// One (family, n, seed) outcome on the oracle grid.
struct GridScores {
    seed: u64,
    f1: Vec<f64>,
    hamming: Vec<f64>,
    edges: Vec<usize>,
    converged: Vec<bool>,
    seconds_per_point: f64,
    true_edges: usize,
}

fn instance(scenario: &Scenario, seed: u64, n: usize, need_range: bool) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = generate(&scenario.model, &mut rng)?;
    let series = simulate_var(&truth.model, n, scenario.burn_in, &mut rng)?;
    let stats = spectral_statistics(&series, scenario.half_window(n)?)?;
    let (lower, upper) = if need_range {
        let config = scenario.config_for(PenaltyFamily::Lasso, n, 0.0)?;
        let range = lambda_grid(&stats, &config, scenario.model.nodes)?;
        (range.lower, range.upper)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(Instance { seed, truth, stats, lower, upper })
}

fn grid_scores(scenario: &Scenario, inst: &Instance, family: PenaltyFamily, n: usize, grid: &[f64]) -> Result<GridScores> {
    let config = scenario.config_for(family, n, grid[0])?;
    let (m, p) = (scenario.model.attributes, scenario.model.nodes);
    let start = Instant::now();
    let fits = sweep(&inst.stats, &config, m, p, grid)?;
    let seconds = start.elapsed().as_secs_f64() / grid.len() as f64;
    // sweep runs largest first; map back to the ascending grid
    let mut out = GridScores {
        seed: inst.seed,
        f1: vec![0.0; grid.len()],
        hamming: vec![0.0; grid.len()],
        edges: vec![0; grid.len()],
        converged: vec![false; grid.len()],
        seconds_per_point: seconds,
        true_edges: inst.truth.edges.len(),
    };
    for fit in fits {
        let idx = grid.iter().position(|&l| l == fit.lambda).expect("lambda from grid");
        let est = extract_edges(&fit.precision, config.gamma);
        out.f1[idx] = f1_score(&est, &inst.truth.edges)?;
        out.hamming[idx] = hamming(&est, &inst.truth.edges)?;
        out.edges[idx] = est.len();
        out.converged[idx] = fit.converged;
    }
    Ok(out)
}

fn direct_report(scenario: &Scenario, inst: &Instance, family: PenaltyFamily, n: usize) -> Result<RunReport> {
    let config = scenario.config_for(family, n, scenario.fit.penalty.lambda)?;
    let start = Instant::now();
    let result = fit_stats(&inst.stats, scenario.model.attributes, scenario.model.nodes, &config)?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(RunReport {
        seed: inst.seed,
        family: family.name().into(),
        n,
        f1: f1_score(&result.edges, &inst.truth.edges)?,
        hamming: hamming(&result.edges, &inst.truth.edges)?,
        wall_time_seconds: seconds,
        lambda: result.lambda,
        converged: result.converged,
        edges: result.edges.len(),
        true_edges: inst.truth.edges.len(),
    })
}

fn map_jobs<T, U, F>(items: Vec<T>, jobs: usize, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if jobs != 1 {
        use rayon::prelude::*;
        let run = || items.into_par_iter().map(&f).collect();
        return match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        };
    }
    let _ = jobs;
    items.into_iter().map(f).collect()
}

/// Runs `seeds.len()` fresh instances per sample size and fits every family
/// under the scenario's `lambda` policy. `jobs = 0` uses all cores.
/// Individual failures are recorded; a cell with at least half its runs
/// failed aborts with [`Error::ScenarioFailed`].
pub fn monte_carlo(scenario: &Scenario, seeds: &[u64], jobs: usize) -> Result<MonteCarloTable> {
    if seeds.is_empty() {
        return Err(Error::InvalidConfig("at least one run is required".into()));
    }
    if scenario.families.is_empty() || scenario.sample_sizes.is_empty() {
        return Err(Error::InvalidConfig("scenario needs penalty families and sample sizes".into()));
    }
    scenario.model.validate()?;
    let oracle = matches!(scenario.policy, LambdaPolicy::OracleScenario | LambdaPolicy::OracleRun);
    if oracle && scenario.oracle_grid < 2 {
        return Err(Error::InvalidConfig("oracle grid needs at least two points".into()));
    }

    let mut table = MonteCarloTable { cells: vec![], reports: vec![], failures: vec![] };
    for &n in &scenario.sample_sizes {
        scenario.half_window(n)?;
        let built = map_jobs(seeds.to_vec(), jobs, |seed| (seed, instance(scenario, seed, n, oracle)));
        let mut instances = Vec::new();
        let mut setup_failures = Vec::new();
        for (seed, r) in built {
            match r {
                Ok(i) => instances.push(i),
                Err(e) => setup_failures.push((seed, e.to_string())),
            }
        }

        for &family in &scenario.families {
            let mut failures: Vec<Failure> = setup_failures
                .iter()
                .map(|(seed, e)| Failure { seed: *seed, family: family.name().into(), n, error: e.clone() })
                .collect();
            let mut reports = Vec::new();
            let mut lambda = None;

            if oracle && !instances.is_empty() {
                let lo = instances.iter().map(|i| i.lower).fold(f64::INFINITY, f64::min);
                let hi = instances.iter().map(|i| i.upper).fold(0.0, f64::max);
                let grid = log_grid(lo, hi, scenario.oracle_grid);
                let scored = map_jobs(instances.iter().collect(), jobs, |inst| {
                    (inst.seed, grid_scores(scenario, inst, family, n, &grid))
                });
                let mut ok = Vec::new();
                for (seed, r) in scored {
                    match r {
                        Ok(s) => ok.push(s),
                        Err(e) => failures.push(Failure { seed, family: family.name().into(), n, error: e.to_string() }),
                    }
                }
                let common = if scenario.policy == LambdaPolicy::OracleScenario && !ok.is_empty() {
                    let idx = best_index(&grid, |i| ok.iter().map(|s| s.f1[i]).sum::<f64>());
                    lambda = Some(grid[idx]);
                    Some(idx)
                } else {
                    None
                };
                for s in &ok {
                    let idx = common.unwrap_or_else(|| best_index(&grid, |i| s.f1[i]));
                    reports.push(RunReport {
                        seed: s.seed,
                        family: family.name().into(),
                        n,
                        f1: s.f1[idx],
                        hamming: s.hamming[idx],
                        wall_time_seconds: s.seconds_per_point,
                        lambda: grid[idx],
                        converged: s.converged[idx],
                        edges: s.edges[idx],
                        true_edges: s.true_edges,
                    });
                }
            } else {
                let done = map_jobs(instances.iter().collect(), jobs, |inst| {
                    (inst.seed, direct_report(scenario, inst, family, n))
                });
                for (seed, r) in done {
                    match r {
                        Ok(rep) => reports.push(rep),
                        Err(e) => failures.push(Failure { seed, family: family.name().into(), n, error: e.to_string() }),
                    }
                }
            }

            if 2 * failures.len() >= seeds.len() {
                for f in &failures {
                    log::error!("seed {} ({}, n = {}): {}", f.seed, f.family, f.n, f.error);
                }
                return Err(Error::ScenarioFailed { failed: failures.len(), runs: seeds.len() });
            }
            for f in &failures {
                log::warn!("seed {} ({}, n = {}) failed: {}", f.seed, f.family, f.n, f.error);
            }
            let col = |g: fn(&RunReport) -> f64| reports.iter().map(g).collect::<Vec<_>>();
            table.cells.push(Cell {
                family: family.name().into(),
                n,
                runs: reports.len(),
                failures: failures.len(),
                f1: MeanStd::of(&col(|r| r.f1)),
                hamming: MeanStd::of(&col(|r| r.hamming)),
                wall_time_seconds: MeanStd::of(&col(|r| r.wall_time_seconds)),
                lambda,
            });
            table.reports.extend(reports);
            table.failures.extend(failures);
        }
    }
    Ok(table)
}

/// Index maximizing `score`; ties go to the larger `lambda`.
fn best_index(grid: &[f64], score: impl Fn(usize) -> f64) -> usize {
    let mut best = grid.len() - 1;
    let mut top = score(best);
    for i in (0..grid.len() - 1).rev() {
        let s = score(i);
        if s > top {
            top = s;
            best = i;
        }
    }
    best
}
