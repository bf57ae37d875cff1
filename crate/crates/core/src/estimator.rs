//! Outer estimation loop: LLA passes around the ADMM core, BIC selection of
//! `lambda`, and extraction of the node-level graph.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::admm::{admm_run, whittle_nll, AdmmConfig};
use crate::error::{Error, Result};
use crate::graph::EdgeSet;
use crate::linalg::{project_pd, spectral_norm_hermitian, CMatrix};
use crate::penalty::{convexity_radius, group_norm, lla_weights, penalty_value, LlaWeights, PenaltySpec};
use crate::spectral::{spectral_statistics, MultiAttributeSeries, SpectralStatistics};

/// Estimated inverse spectral densities at the anchor frequencies.
#[derive(Debug, Clone)]
pub struct PrecisionSpectrum {
    /// Positive-definite estimates `Phi_k`.
    pub phi: Vec<CMatrix>,
    /// Exactly sparse companions `W_k`; sparsity and edges are read from these.
    pub w: Vec<CMatrix>,
    pub attributes: usize,
    pub nodes: usize,
}

impl PrecisionSpectrum {
    pub fn anchors(&self) -> usize {
        self.phi.len()
    }

    pub fn dim(&self) -> usize {
        self.attributes * self.nodes
    }

    /// `p x p` matrix of `||W^(qlM)||_F`.
    pub fn block_norms(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.nodes, self.nodes, |q, l| group_norm(&self.w, self.attributes, q, l))
    }

    /// `log10 sqrt(sum_k |[W_k]_ij|^2)` over all channel pairs; zero entries
    /// map to `-inf`.
    pub fn log_magnitude(&self) -> DMatrix<f64> {
        let dim = self.dim();
        DMatrix::from_fn(dim, dim, |i, j| {
            self.w.iter().map(|m| m[(i, j)].norm_sqr()).sum::<f64>().sqrt().log10()
        })
    }

    /// Number of entries with nonzero modulus in each `W_k`.
    pub fn nonzeros(&self) -> usize {
        self.w.iter().map(|m| m.iter().filter(|z| z.norm() > 0.0).count()).sum()
    }

    /// Largest spectral norm over the `Phi_k`.
    pub fn max_spectral_norm(&self) -> f64 {
        self.phi.iter().map(spectral_norm_hermitian).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaSelection {
    /// Use `penalty.lambda` as given.
    Fixed,
    /// Minimize BIC over a log-spaced grid on `[lambda_u / 10, lambda_sm / 2]`.
    Bic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub penalty: PenaltySpec,
    pub admm: AdmmConfig,
    pub half_window: usize,
    pub lla_iterations: usize,
    pub selection: LambdaSelection,
    pub grid_size: usize,
    pub alpha: f64,
    /// Edge threshold on `||W^(qlM)||_F`.
    pub gamma: f64,
    /// Warm-start each grid point from the previous (larger) `lambda`.
    pub warm_start: bool,
}

impl FitConfig {
    pub fn fixed(penalty: PenaltySpec, half_window: usize) -> Self {
        Self {
            penalty,
            admm: AdmmConfig::default(),
            half_window,
            lla_iterations: 2,
            selection: LambdaSelection::Fixed,
            grid_size: 10,
            alpha: 0.05,
            gamma: 0.0,
            warm_start: true,
        }
    }

    pub fn bic(penalty: PenaltySpec, half_window: usize) -> Self {
        Self { selection: LambdaSelection::Bic, ..Self::fixed(penalty, half_window) }
    }

    pub fn validate(&self) -> Result<()> {
        self.penalty.validate()?;
        self.admm.validate()?;
        if self.lla_iterations == 0 {
            return Err(Error::InvalidConfig("lla_iterations must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!("alpha must be in [0, 1], got {}", self.alpha)));
        }
        if self.gamma.is_nan() || self.gamma < 0.0 {
            return Err(Error::InvalidConfig("gamma must be >= 0".into()));
        }
        if self.selection == LambdaSelection::Bic && self.grid_size == 0 {
            return Err(Error::InvalidConfig("lambda grid is empty".into()));
        }
        Ok(())
    }
}

/// One `lambda`: all LLA passes.
#[derive(Debug, Clone)]
pub struct LlaFit {
    pub lambda: f64,
    pub precision: PrecisionSpectrum,
    /// Penalized objective with the true penalty after each pass.
    pub pass_objectives: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// LLA passes at the fixed `spec.lambda`. The first pass linearizes at zero,
/// which gives every family the plain sparse-group lasso weights.
pub fn fit_lambda(
    stats: &SpectralStatistics,
    spec: &PenaltySpec,
    config: &FitConfig,
    attributes: usize,
    nodes: usize,
    warm: Option<&[CMatrix]>,
) -> Result<LlaFit> {
    let anchors = stats.anchors();
    if attributes * nodes != stats.dim() {
        return Err(Error::InvalidInput(format!(
            "m * p = {} does not match spectral dimension {}",
            attributes * nodes,
            stats.dim()
        )));
    }
    let passes = if spec.family.is_convex() { 1 } else { config.lla_iterations };
    let mut weights = LlaWeights::uniform(spec.lambda, anchors, attributes, nodes);
    let mut init: Option<Vec<CMatrix>> = warm.map(|w| w.to_vec());
    let mut pass_objectives = Vec::with_capacity(passes);
    let mut converged = true;
    let mut iterations = 0;
    let mut last = None;

    for pass in 0..passes {
        if pass > 0 {
            let prev: &PrecisionSpectrum = last.as_ref().expect("previous pass");
            weights = lla_weights(&prev.w, spec, anchors, attributes, nodes)?;
            init = Some(prev.w.clone());
        }
        let out = admm_run(stats, &weights, config.alpha, &config.admm, init.as_deref())?;
        converged &= out.converged;
        iterations += out.iterations;
        let precision = PrecisionSpectrum { phi: out.phi, w: out.w, attributes, nodes };
        pass_objectives.push(penalized_objective(stats, &precision.w, spec, config.alpha, attributes)?);
        last = Some(precision);
    }

    Ok(LlaFit {
        lambda: spec.lambda,
        precision: last.expect("at least one pass"),
        pass_objectives,
        converged,
        iterations,
    })
}

/// Whittle negative log-likelihood plus the sparse-group penalty with the
/// true (non-linearized) penalty function, evaluated at `w` projected to be
/// positive definite.
pub fn penalized_objective(
    stats: &SpectralStatistics,
    w: &[CMatrix],
    spec: &PenaltySpec,
    alpha: f64,
    attributes: usize,
) -> Result<f64> {
    let projected: Vec<CMatrix> = w.iter().map(|m| project_pd(m, 1e-12)).collect();
    let dim = stats.dim();
    let nodes = dim / attributes;
    let mut elem = 0.0;
    for mat in &projected {
        for j in 0..dim {
            for i in 0..dim {
                if i != j {
                    elem += penalty_value(mat[(i, j)].norm(), spec);
                }
            }
        }
    }
    let mut group = 0.0;
    for q in 0..nodes {
        for l in 0..nodes {
            if q != l {
                group += penalty_value(group_norm(&projected, attributes, q, l), spec);
            }
        }
    }
    let scale = attributes as f64 * (projected.len() as f64).sqrt();
    Ok(whittle_nll(stats, &projected)? + alpha * elem + (1.0 - alpha) * scale * group)
}

/// `2K sum_k (-ln|Phi_k| + tr(S_k Phi_k)) + ln(2KM) * #nonzero(W)`.
pub fn bic(prec: &PrecisionSpectrum, stats: &SpectralStatistics) -> Result<f64> {
    if prec.anchors() != stats.anchors() || prec.dim() != stats.dim() {
        return Err(Error::InvalidInput("precision does not match spectral statistics".into()));
    }
    let k = stats.span() as f64;
    let m = stats.anchors() as f64;
    let fit = whittle_nll(stats, &prec.phi)?;
    Ok(2.0 * k * fit + (2.0 * k * m).ln() * prec.nonzeros() as f64)
}

/// `{q, l}` is an edge iff `||W^(qlM)||_F > gamma`.
pub fn extract_edges(prec: &PrecisionSpectrum, gamma: f64) -> EdgeSet {
    let mut edges = EdgeSet::empty(prec.nodes);
    for q in 0..prec.nodes {
        for l in q + 1..prec.nodes {
            let norm = group_norm(&prec.w, prec.attributes, q, l);
            if norm > gamma {
                edges.insert(q, l, norm).expect("valid pair");
            }
        }
    }
    edges
}

/// `n` log-spaced points from `lo` to `hi` inclusive, ascending.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![hi],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaRange {
    /// Smallest `lambda` (to 5%) giving an empty lasso graph.
    pub lambda_sm: f64,
    pub lower: f64,
    pub upper: f64,
    /// Ascending.
    pub grid: Vec<f64>,
}

pub const LAMBDA_BRACKET: (f64, f64) = (1e-6, 1e6);
pub const LAMBDA_FLOOR: f64 = 1e-8;

fn lasso_is_empty(stats: &SpectralStatistics, config: &FitConfig, nodes: usize, lambda: f64) -> Result<bool> {
    let spec = PenaltySpec::lasso(lambda);
    let attributes = stats.dim() / nodes;
    let fit = fit_lambda(stats, &spec, config, attributes, nodes, None)?;
    Ok(extract_edges(&fit.precision, config.gamma).is_empty())
}

/// Locates `lambda_sm` by geometric bisection over lasso fits and returns the
/// search range `[lambda_u / 10, lambda_sm / 2]` with `config.grid_size`
/// log-spaced points.
pub fn lambda_grid(stats: &SpectralStatistics, config: &FitConfig, nodes: usize) -> Result<LambdaRange> {
    let (floor, ceil) = LAMBDA_BRACKET;
    // bracket by decades from 1
    let mut hi = 1.0;
    let mut lo;
    if lasso_is_empty(stats, config, nodes, hi)? {
        lo = hi / 10.0;
        while lasso_is_empty(stats, config, nodes, lo)? {
            hi = lo;
            if lo <= floor {
                log::warn!("no edges even at lambda = {floor:e}; flooring the grid");
                return Ok(range_from(floor, config.grid_size));
            }
            lo = (lo / 10.0).max(floor);
        }
    } else {
        lo = hi;
        hi = 10.0;
        while !lasso_is_empty(stats, config, nodes, hi)? {
            lo = hi;
            if hi >= ceil {
                return Err(Error::SearchFailure(format!("edges remain at lambda = {ceil:e}")));
            }
            hi = (hi * 10.0).min(ceil);
        }
    }
    while hi / lo > 1.05 {
        let mid = (lo * hi).sqrt();
        if lasso_is_empty(stats, config, nodes, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(range_from(hi, config.grid_size))
}

fn range_from(lambda_sm: f64, grid_size: usize) -> LambdaRange {
    let upper = lambda_sm / 2.0;
    let lower = (upper / 10.0).max(LAMBDA_FLOOR);
    LambdaRange { lambda_sm, lower, upper, grid: log_grid(lower, upper, grid_size) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicPoint {
    pub lambda: f64,
    pub bic: f64,
    pub edges: usize,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub precision: PrecisionSpectrum,
    pub edges: EdgeSet,
    pub lambda: f64,
    /// In evaluation order (descending `lambda`); empty for a fixed `lambda`.
    pub bic_trace: Vec<BicPoint>,
    pub lambda_range: Option<LambdaRange>,
    pub converged: bool,
    pub pass_objectives: Vec<f64>,
    pub convexity_radius: f64,
}

pub fn fit(series: &MultiAttributeSeries, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let stats = spectral_statistics(series, config.half_window)?;
    fit_stats(&stats, series.attributes(), series.nodes(), config)
}

/// [`fit`] on precomputed spectral statistics.
pub fn fit_stats(stats: &SpectralStatistics, attributes: usize, nodes: usize, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let (best, trace, range) = match config.selection {
        LambdaSelection::Fixed => (fit_lambda(stats, &config.penalty, config, attributes, nodes, None)?, vec![], None),
        LambdaSelection::Bic => {
            let range = lambda_grid(stats, config, nodes)?;
            let fits = sweep(stats, config, attributes, nodes, &range.grid)?;
            let mut trace = Vec::with_capacity(fits.len());
            let mut best: Option<(f64, LlaFit)> = None;
            for f in fits {
                let score = bic(&f.precision, stats)?;
                trace.push(BicPoint { lambda: f.lambda, bic: score, edges: extract_edges(&f.precision, config.gamma).len() });
                if best.as_ref().is_none_or(|(b, _)| score < *b) {
                    best = Some((score, f));
                }
            }
            let (_, best) = best.ok_or_else(|| Error::InvalidConfig("lambda grid is empty".into()))?;
            (best, trace, Some(range))
        }
    };

    let radius = convexity_radius(&config.penalty.with_lambda(best.lambda), attributes, stats.anchors());
    let norm = best.precision.max_spectral_norm();
    if norm > radius {
        log::warn!("largest ||Phi_k|| = {norm:.4} exceeds the local convexity radius {radius:.4}");
    }
    if !best.converged {
        log::warn!("ADMM hit the iteration limit at lambda = {:.4e}", best.lambda);
    }
    let edges = extract_edges(&best.precision, config.gamma);
    Ok(FitResult {
        edges,
        lambda: best.lambda,
        bic_trace: trace,
        lambda_range: range,
        converged: best.converged,
        pass_objectives: best.pass_objectives,
        convexity_radius: radius,
        precision: best.precision,
    })
}

/// Fits every `lambda` in `grid`, largest first. With `warm_start` each point
/// starts from the previous point's first-pass estimate. Returned in
/// evaluation order.
pub fn sweep(
    stats: &SpectralStatistics,
    config: &FitConfig,
    attributes: usize,
    nodes: usize,
    grid: &[f64],
) -> Result<Vec<LlaFit>> {
    let mut order: Vec<f64> = grid.to_vec();
    order.sort_by(|a, b| b.total_cmp(a));

    #[cfg(feature = "parallel")]
    if !config.warm_start {
        use rayon::prelude::*;
        return order
            .par_iter()
            .map(|&lambda| fit_lambda(stats, &config.penalty.with_lambda(lambda), config, attributes, nodes, None))
            .collect();
    }

    let mut out = Vec::with_capacity(order.len());
    let mut warm: Option<Vec<CMatrix>> = None;
    for lambda in order {
        let spec = config.penalty.with_lambda(lambda);
        // the warm start comes from a lasso pass so every family shares it
        let first = fit_lambda(stats, &PenaltySpec::lasso(lambda), config, attributes, nodes, warm.as_deref())?;
        if config.warm_start {
            warm = Some(first.precision.w.clone());
        }
        let fit = if spec.family.is_convex() {
            first
        } else {
            continue_lla(stats, &spec, config, first)?
        };
        out.push(fit);
    }
    Ok(out)
}

/// Remaining LLA passes after a lasso first pass.
fn continue_lla(stats: &SpectralStatistics, spec: &PenaltySpec, config: &FitConfig, first: LlaFit) -> Result<LlaFit> {
    let attributes = first.precision.attributes;
    let nodes = first.precision.nodes;
    let anchors = stats.anchors();
    let mut current = first;
    current.pass_objectives = vec![penalized_objective(stats, &current.precision.w, spec, config.alpha, attributes)?];
    for _ in 1..config.lla_iterations {
        let weights = lla_weights(&current.precision.w, spec, anchors, attributes, nodes)?;
        let out = admm_run(stats, &weights, config.alpha, &config.admm, Some(&current.precision.w))?;
        let precision = PrecisionSpectrum { phi: out.phi, w: out.w, attributes, nodes };
        current.pass_objectives.push(penalized_objective(stats, &precision.w, spec, config.alpha, attributes)?);
        current.precision = precision;
        current.converged &= out.converged;
        current.iterations += out.iterations;
    }
    Ok(current)
}
