//! Synthetic multi-attribute VAR(L) benchmarks with clustered innovation
//! precision and known ground-truth graphs.
//!
//! Nodes are split into `c` equal clusters of consecutive nodes. Within a
//! cluster the innovation precision couples every pair of channels with
//! `0.5^|i - j|` (channel distance), and the VAR coefficient matrices are
//! block-diagonal at cluster granularity. With `c = p` this reduces to
//! node-level blocks.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::EdgeSet;
use crate::linalg::{inv_pd, CMatrix, C64};
use crate::spectral::MultiAttributeSeries;

pub const MAX_COMPANION_RADIUS: f64 = 0.95;

#[derive(Debug, Clone, PartialEq)]
pub struct VarModel {
    /// `A_1 .. A_L`, each `mp x mp`.
    pub coefficients: Vec<DMatrix<f64>>,
    /// Innovation precision.
    pub precision: DMatrix<f64>,
    pub attributes: usize,
    pub nodes: usize,
}

impl VarModel {
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn dim(&self) -> usize {
        self.attributes * self.nodes
    }

    /// `I - sum_i A_i e^{-i 2 pi f i}`.
    pub fn inverse_transfer(&self, f: f64) -> CMatrix {
        let dim = self.dim();
        let mut out = CMatrix::identity(dim, dim);
        for (lag, a) in self.coefficients.iter().enumerate() {
            let ang = -2.0 * std::f64::consts::PI * f * (lag + 1) as f64;
            let phase = Complex::from_polar(1.0, ang);
            out -= a.map(|x| phase * x);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelKind {
    /// Clustered precision only.
    Model1,
    /// Clustered precision plus an Erdos-Renyi inter-node addend.
    Model2 { p_er: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub nodes: usize,
    pub attributes: usize,
    pub clusters: usize,
    pub order: usize,
    pub density: f64,
    /// Coefficients are uniform on `[-coef_range, coef_range]`.
    pub coef_range: f64,
    /// Model-2 block entries are uniform on `[-hi, -lo] U [lo, hi]`.
    pub er_range: (f64, f64),
    pub f_step: f64,
    pub rel_threshold: f64,
}

impl ModelSpec {
    pub fn model1(nodes: usize, attributes: usize) -> Self {
        Self {
            kind: ModelKind::Model1,
            nodes,
            attributes,
            clusters: 8,
            order: 3,
            density: 0.10,
            coef_range: 0.6,
            er_range: (0.1, 0.4),
            f_step: 0.01,
            rel_threshold: 1e-2,
        }
    }

    pub fn model2(nodes: usize, attributes: usize) -> Self {
        Self { kind: ModelKind::Model2 { p_er: 0.002 }, ..Self::model1(nodes, attributes) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 || self.attributes == 0 || self.order == 0 {
            return Err(Error::InvalidConfig("p, m and L must be >= 1".into()));
        }
        if self.clusters == 0 || !self.nodes.is_multiple_of(self.clusters) {
            return Err(Error::InvalidInput(format!(
                "p = {} is not divisible by the cluster count {}",
                self.nodes, self.clusters
            )));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::InvalidConfig("coefficient density must be in (0, 1]".into()));
        }
        if let ModelKind::Model2 { p_er } = self.kind {
            if !(0.0..=1.0).contains(&p_er) {
                return Err(Error::InvalidConfig("p_er must be in [0, 1]".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub model: VarModel,
    pub edges: EdgeSet,
    pub clusters: usize,
}

impl GroundTruth {
    pub fn psd(&self, f: f64) -> Result<CMatrix> {
        true_psd(&self.model, f)
    }
}

/// Draws a complete benchmark instance: precision, stabilized coefficients
/// and the ground-truth edge set.
pub fn generate<R: Rng + ?Sized>(spec: &ModelSpec, rng: &mut R) -> Result<GroundTruth> {
    spec.validate()?;
    let (p, m) = (spec.nodes, spec.attributes);
    let mut precision = model1_precision(p, m, spec.clusters)?;
    if let ModelKind::Model2 { p_er } = spec.kind {
        precision += model2_precision(p, m, p_er, spec.er_range, rng)?;
        precision = shift_min_eigenvalue(&precision, 0.5, true);
    }
    let coefficients = gen_var_coefficients(p, m, spec.order, spec.clusters, spec.density, spec.coef_range, rng)?;
    let model = VarModel { coefficients, precision, attributes: m, nodes: p };
    let edges = true_edges(&model, spec.f_step, spec.rel_threshold);
    Ok(GroundTruth { model, edges, clusters: spec.clusters })
}

fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    a.clone().symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Adds `gamma I` so the smallest eigenvalue equals `target`. With
/// `only_raise`, matrices already at or above `target` are returned as is.
pub fn shift_min_eigenvalue(a: &DMatrix<f64>, target: f64, only_raise: bool) -> DMatrix<f64> {
    let sym = (a + a.transpose()) * 0.5;
    let low = min_eigenvalue(&sym);
    if only_raise && low >= target {
        return sym;
    }
    let n = sym.nrows();
    sym + DMatrix::identity(n, n) * (target - low)
}

/// Channel range of cluster `g`.
fn cluster_channels(g: usize, nodes: usize, attributes: usize, clusters: usize) -> std::ops::Range<usize> {
    let width = nodes / clusters * attributes;
    g * width..(g + 1) * width
}

/// Model-1 precision: `0.5^|i - j|` between distinct channels of the same
/// cluster, zero across clusters, then shifted to minimum eigenvalue 0.5.
pub fn model1_precision(nodes: usize, attributes: usize, clusters: usize) -> Result<DMatrix<f64>> {
    if clusters == 0 || !nodes.is_multiple_of(clusters) {
        return Err(Error::InvalidInput(format!(
            "p = {nodes} is not divisible by the cluster count {clusters}"
        )));
    }
    let dim = nodes * attributes;
    let mut base = DMatrix::zeros(dim, dim);
    for g in 0..clusters {
        let range = cluster_channels(g, nodes, attributes, clusters);
        for i in range.clone() {
            for j in range.clone() {
                if i != j {
                    base[(i, j)] = 0.5f64.powi((i as i32 - j as i32).abs());
                }
            }
        }
    }
    Ok(shift_min_eigenvalue(&base, 0.5, false))
}

/// Model-2 addend: each unordered node pair is linked with probability
/// `p_er`; a linked pair gets an `m x m` block of entries uniform on
/// `[-hi, -lo] U [lo, hi]`, mirrored to keep the result symmetric.
pub fn model2_precision<R: Rng + ?Sized>(
    nodes: usize,
    attributes: usize,
    p_er: f64,
    (lo, hi): (f64, f64),
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if !(0.0..=1.0).contains(&p_er) {
        return Err(Error::InvalidInput(format!("p_er must be in [0, 1], got {p_er}")));
    }
    let m = attributes;
    let dim = nodes * m;
    let mut out = DMatrix::zeros(dim, dim);
    for q in 0..nodes {
        for l in q + 1..nodes {
            if !rng.random_bool(p_er) {
                continue;
            }
            for u in 0..m {
                for v in 0..m {
                    let mag = rng.random_range(lo..=hi);
                    let value = if rng.random_bool(0.5) { mag } else { -mag };
                    out[(q * m + u, l * m + v)] = value;
                    out[(l * m + v, q * m + u)] = value;
                }
            }
        }
    }
    Ok(out)
}

/// Cluster-block-diagonal VAR coefficients with the given entry density,
/// rescaled so the companion spectral radius is at most 0.95.
pub fn gen_var_coefficients<R: Rng + ?Sized>(
    nodes: usize,
    attributes: usize,
    order: usize,
    clusters: usize,
    density: f64,
    range: f64,
    rng: &mut R,
) -> Result<Vec<DMatrix<f64>>> {
    if order == 0 {
        return Err(Error::InvalidInput("VAR order must be >= 1".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidInput(format!("density must be in (0, 1], got {density}")));
    }
    if clusters == 0 || !nodes.is_multiple_of(clusters) {
        return Err(Error::InvalidInput("p must be divisible by the cluster count".into()));
    }
    let dim = nodes * attributes;
    let mut coefficients = Vec::with_capacity(order);
    for _ in 0..order {
        let mut a = DMatrix::zeros(dim, dim);
        for g in 0..clusters {
            let channels = cluster_channels(g, nodes, attributes, clusters);
            for i in channels.clone() {
                for j in channels.clone() {
                    if rng.random_bool(density) {
                        a[(i, j)] = rng.random_range(-range..=range);
                    }
                }
            }
        }
        coefficients.push(a);
    }
    Ok(stabilize(coefficients, MAX_COMPANION_RADIUS))
}

/// If the companion radius `r` exceeds `max_radius`, scales `A_i` by
/// `(max_radius / r)^i`, which scales every root by `max_radius / r`.
pub fn stabilize(mut coefficients: Vec<DMatrix<f64>>, max_radius: f64) -> Vec<DMatrix<f64>> {
    let r = companion_spectral_radius(&coefficients);
    if r > max_radius {
        let gamma = max_radius / r;
        for (i, a) in coefficients.iter_mut().enumerate() {
            *a *= gamma.powi(i as i32 + 1);
        }
    }
    coefficients
}

/// `[[A_1 .. A_L], [I 0 ..], [0 I 0 ..], ...]`.
pub fn companion_matrix(coefficients: &[DMatrix<f64>]) -> DMatrix<f64> {
    let order = coefficients.len();
    let dim = coefficients.first().map_or(0, |a| a.nrows());
    let mut c = DMatrix::zeros(order * dim, order * dim);
    for (i, a) in coefficients.iter().enumerate() {
        c.view_mut((0, i * dim), (dim, dim)).copy_from(a);
    }
    for i in 1..order {
        c.view_mut((i * dim, (i - 1) * dim), (dim, dim)).fill_with_identity();
    }
    c
}

/// Largest root modulus of the VAR polynomial. Channels that never couple
/// through any `A_i` give a block-diagonal companion matrix up to permutation,
/// so each connected component is solved on its own.
pub fn companion_spectral_radius(coefficients: &[DMatrix<f64>]) -> f64 {
    let dim = match coefficients.first() {
        Some(a) => a.nrows(),
        None => return 0.0,
    };
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for a in coefficients {
        for j in 0..dim {
            for i in 0..dim {
                if a[(i, j)] != 0.0 {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut components: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..dim {
        let r = find(&mut parent, i);
        components.entry(r).or_default().push(i);
    }
    components
        .values()
        .map(|idx| {
            let sub: Vec<DMatrix<f64>> =
                coefficients.iter().map(|a| DMatrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])).collect();
            if sub.iter().all(|a| a.iter().all(|&x| x == 0.0)) {
                return 0.0;
            }
            matrix_spectral_radius(companion_matrix(&sub))
        })
        .fold(0.0, f64::max)
}

fn matrix_spectral_radius(c: DMatrix<f64>) -> f64 {
    // the QR iteration can stall on exactly nilpotent parts
    if let Some(schur) = nalgebra::linalg::Schur::try_new(c.clone(), f64::EPSILON, 100 * c.nrows().max(10)) {
        return schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    // Gelfand: ||C^(2^k)||^(1/2^k) by repeated normalized squaring
    let mut m = c;
    let mut log_scale = 0.0;
    for k in 0..40 {
        let norm = m.norm();
        if norm == 0.0 {
            return 0.0;
        }
        m /= norm;
        log_scale += norm.ln() / 2f64.powi(k);
        m = &m * &m;
    }
    log_scale.exp()
}

/// Simulates `burn_in + n` steps from a zero state with Gaussian innovations
/// of covariance `precision^{-1}`, keeping the last `n`.
pub fn simulate_var<R: Rng + ?Sized>(
    model: &VarModel,
    n: usize,
    burn_in: usize,
    rng: &mut R,
) -> Result<MultiAttributeSeries> {
    let dim = model.dim();
    let chol = model
        .precision
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("innovation precision is not positive definite".into()))?;
    // w = L^{-T} z has covariance (L L^T)^{-1}
    let factor = chol
        .l()
        .transpose()
        .solve_upper_triangular(&DMatrix::identity(dim, dim))
        .ok_or_else(|| Error::NumericalFailure("singular Cholesky factor".into()))?;

    let total = burn_in + n;
    let order = model.order();
    let mut states = DMatrix::<f64>::zeros(total, dim);
    let mut z = nalgebra::DVector::<f64>::zeros(dim);
    for t in 0..total {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(rng);
        }
        let mut x = &factor * &z;
        for lag in 1..=order.min(t) {
            let prev = states.row(t - lag).transpose();
            x += &model.coefficients[lag - 1] * prev;
        }
        states.row_mut(t).copy_from(&x.transpose());
    }
    MultiAttributeSeries::new(states.rows(burn_in, n).into_owned(), model.nodes, model.attributes)
}

/// `S^{-1}(f) = (I - A(f))^H Omega (I - A(f))`.
pub fn true_inverse_psd(model: &VarModel, f: f64) -> CMatrix {
    // real and imaginary parts separately: real matmul is much faster
    let dim = model.dim();
    let mut re = DMatrix::<f64>::identity(dim, dim);
    let mut im = DMatrix::<f64>::zeros(dim, dim);
    for (lag, a) in model.coefficients.iter().enumerate() {
        let ang = -2.0 * std::f64::consts::PI * f * (lag + 1) as f64;
        re -= a * ang.cos();
        im -= a * ang.sin();
    }
    let omega = &model.precision;
    let o_re = omega * &re;
    let o_im = omega * &im;
    let real = re.tr_mul(&o_re) + im.tr_mul(&o_im);
    let imag = re.tr_mul(&o_im) - im.tr_mul(&o_re);
    CMatrix::from_fn(dim, dim, |i, j| C64::new(real[(i, j)], imag[(i, j)]))
}

/// `S(f) = H(f) Omega^{-1} H(f)^H`, `H(f) = (I - sum_i A_i e^{-i 2 pi f i})^{-1}`.
pub fn true_psd(model: &VarModel, f: f64) -> Result<CMatrix> {
    let inv = true_inverse_psd(model, f);
    let s = inv_pd(&inv).map_err(|_| Error::NumericalFailure(format!("true PSD is singular at f = {f}")))?;
    let ratio = crate::linalg::fro(&s) * crate::linalg::fro(&inv);
    if ratio > 1e12 {
        log::warn!("true PSD is ill-conditioned at f = {f} (cond ~ {ratio:.2e})");
    }
    Ok(s)
}

/// Frequencies `0, f_step, ..., 0.5`.
pub fn frequency_sweep(f_step: f64) -> Vec<f64> {
    let steps = (0.5 / f_step).round() as usize;
    (0..=steps).map(|i| (i as f64 * f_step).min(0.5)).collect()
}

/// `{q, l}` is an edge iff `sqrt(sum_f ||S^{-1}(f)^(ql)||_F^2)` exceeds
/// `rel_threshold` times the largest such value over node pairs.
pub fn true_edges(model: &VarModel, f_step: f64, rel_threshold: f64) -> EdgeSet {
    let (p, m) = (model.nodes, model.attributes);
    let mut energy = DMatrix::<f64>::zeros(p, p);
    for f in frequency_sweep(f_step) {
        let inv = true_inverse_psd(model, f);
        for q in 0..p {
            for l in q + 1..p {
                let mut acc = 0.0;
                for u in 0..m {
                    for v in 0..m {
                        acc += inv[(q * m + u, l * m + v)].norm_sqr();
                    }
                }
                energy[(q, l)] += acc;
            }
        }
    }
    let energy = energy.map(f64::sqrt);
    let top = energy.iter().cloned().fold(0.0, f64::max);
    let mut edges = EdgeSet::empty(p);
    if top == 0.0 {
        return edges;
    }
    for q in 0..p {
        for l in q + 1..p {
            if energy[(q, l)] > rel_threshold * top {
                edges.insert(q, l, energy[(q, l)]).expect("valid pair");
            }
        }
    }
    edges
}

/// `log10(sum_f |[S^{-1}(f)]_ij|)` over all channel pairs.
pub fn true_log_magnitude(model: &VarModel, f_step: f64) -> DMatrix<f64> {
    let dim = model.dim();
    let mut acc = DMatrix::<f64>::zeros(dim, dim);
    for f in frequency_sweep(f_step) {
        let inv = true_inverse_psd(model, f);
        acc += inv.map(|z: C64| z.norm());
    }
    acc.map(f64::log10)
}

/// Cluster index of each node.
pub fn node_clusters(nodes: usize, clusters: usize) -> Vec<usize> {
    let size = nodes / clusters.max(1);
    (0..nodes).map(|j| j / size.max(1)).collect()
}
