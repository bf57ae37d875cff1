//! ADMM solver for the LLA-weighted sparse-group penalized Whittle objective
//!
//! ```text
//! sum_k [ -ln|Phi_k| + tr(S_k Phi_k) ]
//!   + alpha * sum_k sum_{i != j} w_kij |[Phi_k]_ij|
//!   + (1 - alpha) * m sqrt(M) * sum_{q != l} w_ql ||Omega^(qlM)||_F
//! ```
//!
//! over Hermitian positive-definite `Phi_1 .. Phi_M`, split as `Phi = W` with
//! scaled duals `U` and a single adaptive penalty parameter `rho`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    check_hermitian, eigh, fro_stack, from_eigen, hermitian_part, logdet_pd, project_pd, CMatrix,
    C64,
};
use crate::penalty::LlaWeights;
use crate::spectral::SpectralStatistics;

/// How the group shrinkage of off-diagonal blocks measures `||B||_F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GroupProxMode {
    /// One norm over the concatenation `[B_1 .. B_M]` and a common factor:
    /// the exact proximal map of the cross-frequency group penalty.
    #[default]
    Stacked,
    /// A separate `||B_k||_F` per frequency.
    PerFrequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmConfig {
    pub rho_bar: f64,
    pub mu_bar: f64,
    pub tau_abs: f64,
    pub tau_rel: f64,
    pub max_iter: usize,
    pub group_prox: GroupProxMode,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            rho_bar: 2.0,
            mu_bar: 10.0,
            tau_abs: 1e-4,
            tau_rel: 1e-4,
            max_iter: 200,
            group_prox: GroupProxMode::Stacked,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if !(self.rho_bar > 0.0 && self.rho_bar.is_finite()) {
            return bad("rho_bar must be > 0");
        }
        if !(self.mu_bar > 1.0 && self.mu_bar.is_finite()) {
            return bad("mu_bar must be > 1");
        }
        if !(self.tau_abs > 0.0 && self.tau_rel > 0.0) {
            return bad("tau_abs and tau_rel must be > 0");
        }
        if self.max_iter == 0 {
            return bad("t_max must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AdmmState {
    pub phi: Vec<CMatrix>,
    pub w: Vec<CMatrix>,
    pub u: Vec<CMatrix>,
    pub rho: f64,
    pub iteration: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl AdmmState {
    /// `U = 0`; `Phi = W = init` (zero matrices when `init` is `None`).
    pub fn new(anchors: usize, dim: usize, rho: f64, init: Option<&[CMatrix]>) -> Self {
        let zero = vec![CMatrix::zeros(dim, dim); anchors];
        let start = init.map(|m| m.to_vec()).unwrap_or_else(|| zero.clone());
        Self {
            phi: start.clone(),
            w: start,
            u: zero,
            rho,
            iteration: 0,
            primal_residual: f64::INFINITY,
            dual_residual: f64::INFINITY,
        }
    }
}

/// `T_st(a, beta) = (1 - beta/|a|)_+ a`.
pub fn soft_threshold(a: C64, beta: f64) -> C64 {
    let r = a.norm();
    if r <= beta || r == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        a * ((r - beta) / r)
    }
}

/// Minimizer of `-ln|Phi| + tr(S Phi) + (rho/2)||Phi - W + U||_F^2`.
///
/// With `V J V^H = S - rho (W - U)`, returns `V J~ V^H` where
/// `J~_ll = (-J_ll + sqrt(J_ll^2 + 4 rho)) / (2 rho)`.
pub fn phi_update(s_hat: &CMatrix, w: &CMatrix, u: &CMatrix, rho: f64) -> Result<CMatrix> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidInput(format!("rho must be > 0, got {rho}")));
    }
    for (m, what) in [(s_hat, "S_k"), (w, "W_k"), (u, "U_k")] {
        check_hermitian(m, 1e-8, what)?;
    }
    let x = s_hat - (w - u) * C64::new(rho, 0.0);
    let (vals, vecs) = eigh(&x);
    let shrunk: Vec<f64> = vals
        .iter()
        .map(|&j| {
            let root = (j * j + 4.0 * rho).sqrt();
            // same quantity, written to avoid cancellation for large positive j
            if j > 0.0 {
                2.0 / (j + root)
            } else {
                (root - j) / (2.0 * rho)
            }
        })
        .collect();
    if shrunk.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::NumericalFailure(
            "eigenvalue overflow in the Phi-update".into(),
        ));
    }
    Ok(from_eigen(&vecs, &shrunk))
}

/// Proximal map of the weighted sparse-group penalty with step `1/rho`,
/// applied to `A_k = Phi_k + U_k`.
pub fn w_update(
    a: &[CMatrix],
    weights: &LlaWeights,
    alpha: f64,
    rho: f64,
    mode: GroupProxMode,
) -> Result<Vec<CMatrix>> {
    let m = weights.attributes;
    let p = weights.nodes();
    let dim = m * p;
    let anchors = a.len();
    if anchors != weights.anchors() || a.iter().any(|x| x.nrows() != dim || x.ncols() != dim) {
        return Err(Error::InvalidInput(format!(
            "W-update expects {} matrices of size {dim}x{dim}",
            weights.anchors()
        )));
    }
    let mut out = vec![CMatrix::zeros(dim, dim); anchors];
    let group_scale = (1.0 - alpha) * m as f64 * (anchors as f64).sqrt() / rho;

    for q in 0..p {
        for l in 0..p {
            // elementwise soft-thresholding of the block in every frequency
            for k in 0..anchors {
                for u in 0..m {
                    for v in 0..m {
                        let (i, j) = (q * m + u, l * m + v);
                        out[k][(i, j)] = if i == j {
                            C64::new(a[k][(i, i)].re, 0.0)
                        } else {
                            soft_threshold(a[k][(i, j)], alpha * weights.elementwise[k][(i, j)] / rho)
                        };
                    }
                }
            }
            if q == l {
                continue;
            }
            let threshold = group_scale * weights.groupwise[(q, l)];
            let block_norm = |mat: &CMatrix| -> f64 {
                let mut acc = 0.0;
                for u in 0..m {
                    for v in 0..m {
                        acc += mat[(q * m + u, l * m + v)].norm_sqr();
                    }
                }
                acc
            };
            let factor = |norm: f64| if norm > threshold { 1.0 - threshold / norm } else { 0.0 };
            let factors: Vec<f64> = match mode {
                GroupProxMode::Stacked => {
                    let norm = out.iter().map(block_norm).sum::<f64>().sqrt();
                    vec![factor(norm); anchors]
                }
                GroupProxMode::PerFrequency => out.iter().map(|b| factor(block_norm(b).sqrt())).collect(),
            };
            for (mat, &f) in out.iter_mut().zip(&factors) {
                for u in 0..m {
                    for v in 0..m {
                        mat[(q * m + u, l * m + v)] *= f;
                    }
                }
            }
        }
    }
    Ok(out.iter().map(hermitian_part).collect())
}

/// `U_k + (Phi_k - W_k)`.
pub fn dual_update(u: &[CMatrix], phi: &[CMatrix], w: &[CMatrix]) -> Vec<CMatrix> {
    u.iter()
        .zip(phi)
        .zip(w)
        .map(|((u, phi), w)| u + (phi - w))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub tau_primal: f64,
    pub tau_dual: f64,
}

impl Residuals {
    pub fn converged(&self) -> bool {
        self.primal <= self.tau_primal && self.dual <= self.tau_dual
    }
}

/// Primal/dual residual norms and their stopping thresholds for `state`
/// (holding the freshly updated `Phi`, `W`, `U`) and the previous `W`.
pub fn residuals(state: &AdmmState, w_prev: &[CMatrix], config: &AdmmConfig) -> Residuals {
    let anchors = state.phi.len();
    let dim = state.phi.first().map_or(0, |m| m.nrows());
    let e1 = fro_stack(&state.phi);
    let e2 = fro_stack(&state.w);
    let e3 = fro_stack(&state.u);
    let primal = state
        .phi
        .iter()
        .zip(&state.w)
        .flat_map(|(p, w)| p.iter().zip(w.iter()).map(|(a, b)| (a - b).norm_sqr()))
        .sum::<f64>()
        .sqrt();
    let dual = state.rho
        * state
            .w
            .iter()
            .zip(w_prev)
            .flat_map(|(w, wp)| w.iter().zip(wp.iter()).map(|(a, b)| (a - b).norm_sqr()))
            .sum::<f64>()
            .sqrt();
    let floor = dim as f64 * (anchors as f64).sqrt() * config.tau_abs;
    Residuals {
        primal,
        dual,
        tau_primal: floor + config.tau_rel * e1.max(e2),
        tau_dual: floor + config.tau_rel * e3 / state.rho,
    }
}

/// Residual balancing: double `rho` (halving the scaled duals) when the
/// primal residual dominates, halve it (doubling the duals) in the opposite
/// case.
pub fn rho_update(rho: f64, primal: f64, dual: f64, mu_bar: f64, u: Vec<CMatrix>) -> (f64, Vec<CMatrix>) {
    let rescale = |u: Vec<CMatrix>, s: f64| u.into_iter().map(|m| m * C64::new(s, 0.0)).collect();
    if primal > mu_bar * dual {
        (2.0 * rho, rescale(u, 0.5))
    } else if dual > mu_bar * primal {
        (rho / 2.0, rescale(u, 2.0))
    } else {
        (rho, u)
    }
}

/// `sum_k [ -ln|Phi_k| + Re tr(S_k Phi_k) ]`.
pub fn whittle_nll(stats: &SpectralStatistics, phi: &[CMatrix]) -> Result<f64> {
    if phi.len() != stats.anchors() {
        return Err(Error::InvalidInput("frequency count mismatch".into()));
    }
    let mut total = 0.0;
    for (s, p) in stats.s_hat.iter().zip(phi) {
        if s.shape() != p.shape() {
            return Err(Error::InvalidInput("matrix size mismatch".into()));
        }
        let tr = (s * p).trace();
        if tr.im.abs() > 1e-8 * tr.re.abs().max(1.0) {
            log::warn!("trace term has imaginary residue {:.3e}", tr.im);
        }
        total += -logdet_pd(p)? + tr.re;
    }
    Ok(total)
}

/// Value of the LLA-weighted penalty at `w`.
pub fn surrogate_penalty(w: &[CMatrix], weights: &LlaWeights, alpha: f64) -> f64 {
    let m = weights.attributes;
    let p = weights.nodes();
    let dim = m * p;
    let mut elem = 0.0;
    for (k, mat) in w.iter().enumerate() {
        for j in 0..dim {
            for i in 0..dim {
                if i != j {
                    elem += weights.elementwise[k][(i, j)] * mat[(i, j)].norm();
                }
            }
        }
    }
    let mut group = 0.0;
    for q in 0..p {
        for l in 0..p {
            if q != l {
                group += weights.groupwise[(q, l)] * crate::penalty::group_norm(w, m, q, l);
            }
        }
    }
    alpha * elem + (1.0 - alpha) * m as f64 * (w.len() as f64).sqrt() * group
}

/// Surrogate objective at `w`, after projecting each `W_k` to be positive
/// definite.
pub fn surrogate_objective(
    stats: &SpectralStatistics,
    w: &[CMatrix],
    weights: &LlaWeights,
    alpha: f64,
) -> Result<f64> {
    let projected: Vec<CMatrix> = w.iter().map(|m| project_pd(m, 1e-12)).collect();
    Ok(whittle_nll(stats, &projected)? + surrogate_penalty(&projected, weights, alpha))
}

#[derive(Debug, Clone)]
pub struct AdmmOutput {
    /// Positive-definite iterate from the last Phi-update.
    pub phi: Vec<CMatrix>,
    /// Exactly sparse splitting variable.
    pub w: Vec<CMatrix>,
    pub u: Vec<CMatrix>,
    pub iterations: usize,
    pub converged: bool,
    pub rho: f64,
    pub objective: f64,
}

/// Runs ADMM from `init` (zero when `None`) until both residuals fall below
/// their thresholds or `max_iter` iterations elapse.
pub fn admm_run(
    stats: &SpectralStatistics,
    weights: &LlaWeights,
    alpha: f64,
    config: &AdmmConfig,
    init: Option<&[CMatrix]>,
) -> Result<AdmmOutput> {
    config.validate()?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidConfig(format!("alpha must be in [0, 1], got {alpha}")));
    }
    let anchors = stats.anchors();
    let dim = stats.dim();
    if weights.anchors() != anchors || weights.dim() != dim {
        return Err(Error::InvalidInput("weights do not match the spectral statistics".into()));
    }
    if let Some(init) = init {
        if init.len() != anchors || init.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(Error::InvalidInput("initial guess has the wrong shape".into()));
        }
    }

    let mut state = AdmmState::new(anchors, dim, config.rho_bar, init);
    let mut converged = false;
    while !converged && state.iteration < config.max_iter {
        let phi = stats
            .s_hat
            .iter()
            .zip(&state.w)
            .zip(&state.u)
            .map(|((s, w), u)| phi_update(s, w, u, state.rho))
            .collect::<Result<Vec<_>>>()?;
        let a: Vec<CMatrix> = phi.iter().zip(&state.u).map(|(p, u)| p + u).collect();
        let w = w_update(&a, weights, alpha, state.rho, config.group_prox)?;
        let u = dual_update(&state.u, &phi, &w);
        let w_prev = std::mem::replace(&mut state.w, w);
        state.phi = phi;
        state.u = u;

        let res = residuals(&state, &w_prev, config);
        state.primal_residual = res.primal;
        state.dual_residual = res.dual;
        converged = res.converged();

        let (rho, u) = rho_update(state.rho, res.primal, res.dual, config.mu_bar, std::mem::take(&mut state.u));
        state.rho = rho;
        state.u = u;
        state.iteration += 1;
    }

    let objective = surrogate_objective(stats, &state.w, weights, alpha)?;
    Ok(AdmmOutput {
        phi: state.phi,
        w: state.w,
        u: state.u,
        iterations: state.iteration,
        converged,
        rho: state.rho,
        objective,
    })
}
