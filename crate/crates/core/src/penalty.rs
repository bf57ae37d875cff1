//! Lasso, log-sum and SCAD penalties, their LLA weights and the local
//! convexity radius diagnostic.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_SCAD_A: f64 = 3.7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum PenaltyFamily {
    Lasso,
    /// `lambda * eps * ln(1 + |u| / eps)`
    LogSum { epsilon: f64 },
    Scad { a: f64 },
}

impl PenaltyFamily {
    pub fn name(&self) -> &'static str {
        match self {
            PenaltyFamily::Lasso => "lasso",
            PenaltyFamily::LogSum { .. } => "logsum",
            PenaltyFamily::Scad { .. } => "scad",
        }
    }

    pub fn is_convex(&self) -> bool {
        matches!(self, PenaltyFamily::Lasso)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub family: PenaltyFamily,
    pub lambda: f64,
}

impl PenaltySpec {
    pub fn new(family: PenaltyFamily, lambda: f64) -> Result<Self> {
        let spec = Self { family, lambda };
        spec.validate()?;
        Ok(spec)
    }

    pub fn lasso(lambda: f64) -> Self {
        Self { family: PenaltyFamily::Lasso, lambda }
    }

    pub fn log_sum(lambda: f64) -> Self {
        Self { family: PenaltyFamily::LogSum { epsilon: DEFAULT_EPSILON }, lambda }
    }

    pub fn scad(lambda: f64) -> Self {
        Self { family: PenaltyFamily::Scad { a: DEFAULT_SCAD_A }, lambda }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    /// `lambda = 0` is accepted here so the unpenalized limit can be fitted.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        match self.family {
            PenaltyFamily::Lasso => Ok(()),
            PenaltyFamily::LogSum { epsilon } if epsilon > 0.0 && epsilon.is_finite() => Ok(()),
            PenaltyFamily::LogSum { epsilon } => {
                Err(Error::InvalidConfig(format!("log-sum epsilon must be > 0, got {epsilon}")))
            }
            PenaltyFamily::Scad { a } if a > 2.0 && a.is_finite() => Ok(()),
            PenaltyFamily::Scad { a } => Err(Error::InvalidConfig(format!("SCAD a must be > 2, got {a}"))),
        }
    }

    /// Weak-convexity constant: `penalty + (mu/2) u^2` is convex.
    pub fn amenability(&self) -> f64 {
        match self.family {
            PenaltyFamily::Lasso => 0.0,
            PenaltyFamily::LogSum { epsilon } => self.lambda / epsilon,
            PenaltyFamily::Scad { a } => 1.0 / (a - 1.0),
        }
    }

    /// Radius below which `|penalty(u)| >= (lambda/2)|u|` holds.
    pub fn lower_bound_radius(&self) -> f64 {
        match self.family {
            PenaltyFamily::Lasso => f64::INFINITY,
            PenaltyFamily::LogSum { epsilon } => epsilon,
            PenaltyFamily::Scad { .. } => self.lambda,
        }
    }
}

pub fn penalty_value(u: f64, spec: &PenaltySpec) -> f64 {
    let lambda = spec.lambda;
    let t = u.abs();
    match spec.family {
        PenaltyFamily::Lasso => lambda * t,
        PenaltyFamily::LogSum { epsilon } => lambda * epsilon * (t / epsilon).ln_1p(),
        PenaltyFamily::Scad { a } => {
            if t <= lambda {
                lambda * t
            } else if t < a * lambda {
                (2.0 * a * lambda * t - t * t - lambda * lambda) / (2.0 * (a - 1.0))
            } else {
                lambda * lambda * (a + 1.0) / 2.0
            }
        }
    }
}

/// Derivative with respect to `|u|`, with the right limit `lambda` at zero.
pub fn penalty_derivative(u: f64, spec: &PenaltySpec) -> f64 {
    let lambda = spec.lambda;
    let t = u.abs();
    match spec.family {
        PenaltyFamily::Lasso => lambda,
        PenaltyFamily::LogSum { epsilon } => lambda * epsilon / (t + epsilon),
        PenaltyFamily::Scad { a } => {
            if t <= lambda {
                lambda
            } else if t <= a * lambda {
                (a * lambda - t) / (a - 1.0)
            } else {
                0.0
            }
        }
    }
}

/// Per-entry and per-group weights of the adaptive sparse-group lasso
/// surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct LlaWeights {
    /// One `mp x mp` matrix per frequency; diagonal entries are unused.
    pub elementwise: Vec<DMatrix<f64>>,
    /// `p x p`; diagonal unused.
    pub groupwise: DMatrix<f64>,
    pub attributes: usize,
}

impl LlaWeights {
    /// Every weight equal to `lambda` (the first LLA pass, or plain lasso).
    pub fn uniform(lambda: f64, anchors: usize, attributes: usize, nodes: usize) -> Self {
        let dim = attributes * nodes;
        Self {
            elementwise: vec![DMatrix::from_element(dim, dim, lambda); anchors],
            groupwise: DMatrix::from_element(nodes, nodes, lambda),
            attributes,
        }
    }

    pub fn anchors(&self) -> usize {
        self.elementwise.len()
    }

    pub fn nodes(&self) -> usize {
        self.groupwise.nrows()
    }

    pub fn dim(&self) -> usize {
        self.attributes * self.nodes()
    }
}

/// Frobenius norm of `Omega^{(q l M)} = [Phi_1^{(ql)}, ..., Phi_M^{(ql)}]`.
pub fn group_norm(mats: &[CMatrix], attributes: usize, q: usize, l: usize) -> f64 {
    let m = attributes;
    let mut acc = 0.0;
    for a in mats {
        for v in 0..m {
            for u in 0..m {
                acc += a[(q * m + u, l * m + v)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// LLA weights linearized at `omega_bar`.
pub fn lla_weights(
    omega_bar: &[CMatrix],
    spec: &PenaltySpec,
    anchors: usize,
    attributes: usize,
    nodes: usize,
) -> Result<LlaWeights> {
    let dim = attributes * nodes;
    if omega_bar.len() != anchors || omega_bar.iter().any(|a| a.nrows() != dim || a.ncols() != dim) {
        return Err(Error::InvalidInput(format!(
            "expected {anchors} matrices of size {dim}x{dim}"
        )));
    }
    let lambda = spec.lambda;
    let clamp = |w: f64| w.clamp(0.0, lambda);
    if spec.family.is_convex() {
        return Ok(LlaWeights::uniform(lambda, anchors, attributes, nodes));
    }
    let elementwise = omega_bar
        .iter()
        .map(|a| DMatrix::from_fn(dim, dim, |i, j| clamp(penalty_derivative(a[(i, j)].norm(), spec))))
        .collect();
    let groupwise = DMatrix::from_fn(nodes, nodes, |q, l| {
        clamp(penalty_derivative(group_norm(omega_bar, attributes, q, l), spec))
    });
    Ok(LlaWeights { elementwise, groupwise, attributes })
}

/// Spectral-norm radius `0.99 sqrt(2 / (m mu sqrt(M)))` inside which the
/// penalized objective is strictly convex; infinite for lasso.
pub fn convexity_radius(spec: &PenaltySpec, attributes: usize, anchors: usize) -> f64 {
    let mu = spec.amenability();
    if mu == 0.0 {
        return f64::INFINITY;
    }
    0.99 * (2.0 / (attributes as f64 * mu * (anchors as f64).sqrt())).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    #[test]
    fn value_examples() {
        assert_eq!(penalty_value(-3.0, &PenaltySpec::lasso(2.0)), 6.0);
        let scad = PenaltySpec::scad(1.0);
        assert!((penalty_value(5.0, &scad) - 2.35).abs() < 1e-12);
        assert_eq!(penalty_value(0.0, &PenaltySpec::log_sum(1.0)), 0.0);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(penalty_derivative(0.0, &PenaltySpec::log_sum(1.0)), 1.0);
        let d = penalty_derivative(2.0, &PenaltySpec::scad(1.0));
        assert!((d - 1.7 / 2.7).abs() < 1e-12);
        assert!((d - 0.6296).abs() < 1e-4);
        for u in [-4.0, 0.0, 0.3, 100.0] {
            assert_eq!(penalty_derivative(u, &PenaltySpec::lasso(0.7)), 0.7);
        }
        // branch points take the left value; SCAD is C1 so both sides agree
        let s = PenaltySpec::scad(1.0);
        assert_eq!(penalty_derivative(1.0, &s), 1.0);
        assert_eq!(penalty_derivative(3.7, &s), 0.0);
    }

    #[test]
    fn validation() {
        assert!(PenaltySpec::new(PenaltyFamily::Scad { a: 2.0 }, 1.0).is_err());
        assert!(PenaltySpec::new(PenaltyFamily::LogSum { epsilon: 0.0 }, 1.0).is_err());
        assert!(PenaltySpec::new(PenaltyFamily::Lasso, -1.0).is_err());
        assert!(PenaltySpec::new(PenaltyFamily::Lasso, f64::NAN).is_err());
        assert!(PenaltySpec::new(PenaltyFamily::Scad { a: 3.7 }, 0.5).is_ok());
    }

    #[test]
    fn lla_examples() {
        let zero = vec![CMatrix::zeros(4, 4); 3];
        let mut dense = zero.clone();
        dense[1][(0, 3)] = C64::new(10.0, 0.0);
        dense[1][(3, 0)] = C64::new(10.0, 0.0);

        let w = lla_weights(&dense, &PenaltySpec::lasso(0.3), 3, 2, 2).unwrap();
        assert!(w.elementwise.iter().all(|m| m.iter().all(|&x| x == 0.3)));
        assert!(w.groupwise.iter().all(|&x| x == 0.3));

        let w = lla_weights(&zero, &PenaltySpec::log_sum(0.3), 3, 2, 2).unwrap();
        assert!(w.elementwise.iter().all(|m| m.iter().all(|&x| x == 0.3)));
        assert!(w.groupwise.iter().all(|&x| x == 0.3));

        let w = lla_weights(&dense, &PenaltySpec::scad(1.0), 3, 2, 2).unwrap();
        assert_eq!(w.elementwise[1][(0, 3)], 0.0);
        assert_eq!(w.elementwise[0][(0, 3)], 1.0);
        assert_eq!(w.groupwise[(0, 1)], 0.0);
        assert_eq!(w.groupwise[(1, 0)], 0.0);

        assert!(lla_weights(&zero, &PenaltySpec::lasso(1.0), 2, 2, 2).is_err());
        assert!(lla_weights(&zero, &PenaltySpec::lasso(1.0), 3, 1, 2).is_err());
    }

    #[test]
    fn group_norm_spans_frequencies() {
        let mut mats = vec![CMatrix::zeros(4, 4); 2];
        mats[0][(0, 2)] = C64::new(3.0, 0.0);
        mats[1][(1, 3)] = C64::new(0.0, 4.0);
        assert!((group_norm(&mats, 2, 0, 1) - 5.0).abs() < 1e-15);
        assert_eq!(group_norm(&mats, 2, 1, 0), 0.0);
    }

    #[test]
    fn convexity_radius_examples() {
        assert!(convexity_radius(&PenaltySpec::lasso(1.0), 2, 4).is_infinite());
        let r = convexity_radius(&PenaltySpec::scad(0.2), 2, 4);
        assert!((r - 0.99 * 1.35f64.sqrt()).abs() < 1e-12);
        assert!((r - 1.1502).abs() < 1e-4);
        let r = convexity_radius(&PenaltySpec::log_sum(0.1), 1, 1);
        assert!((r - 0.04427).abs() < 1e-5);
    }
}
