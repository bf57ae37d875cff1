//! Small dense complex linear-algebra helpers shared by the solver modules.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Frobenius norm.
pub fn fro(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius norm of the horizontal concatenation `[a_1, ..., a_M]`.
pub fn fro_stack(mats: &[CMatrix]) -> f64 {
    mats.iter()
        .flat_map(|a| a.iter())
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `||a - a^H||_F`.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            acc += (a[(i, j)] - a[(j, i)].conj()).norm_sqr();
        }
    }
    acc.sqrt()
}

/// `(a + a^H) / 2`, which also makes the diagonal exactly real.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    CMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

pub fn is_square(a: &CMatrix) -> bool {
    a.nrows() == a.ncols()
}

/// Checks that `a` is square and Hermitian to within `rel_tol * max(1, ||a||_F)`.
pub fn check_hermitian(a: &CMatrix, rel_tol: f64, what: &str) -> Result<()> {
    if !is_square(a) {
        return Err(Error::InvalidInput(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let defect = hermitian_defect(a);
    if !defect.is_finite() || defect > rel_tol * fro(a).max(1.0) {
        return Err(Error::InvalidInput(format!(
            "{what} is not Hermitian (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and
/// unitary eigenvectors as columns.
pub fn eigh(a: &CMatrix) -> (DVector<f64>, CMatrix) {
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = CMatrix::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(a: &CMatrix) -> DVector<f64> {
    eigh(a).0
}

/// `V diag(d) V^H`, returned Hermitian.
pub fn from_eigen(vectors: &CMatrix, values: &[f64]) -> CMatrix {
    let mut scaled = vectors.clone();
    for (c, &d) in values.iter().enumerate() {
        scaled.column_mut(c).scale_mut(d);
    }
    hermitian_part(&(scaled * vectors.adjoint()))
}

/// Cholesky factor of the Hermitian part of `a`. The complex square root
/// never fails, so nonpositive pivots show up as non-real diagonals.
pub fn cholesky_pd(a: &CMatrix) -> Result<nalgebra::Cholesky<C64, nalgebra::Dyn>> {
    let not_pd = || Error::InvalidInput("matrix is not positive definite".into());
    let chol = hermitian_part(a).cholesky().ok_or_else(not_pd)?;
    let l = chol.l_dirty();
    for i in 0..a.nrows() {
        let d = l[(i, i)];
        if !(d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-10 * d.re) {
            return Err(not_pd());
        }
    }
    Ok(chol)
}

/// `ln det(a)` of a Hermitian positive-definite matrix via Cholesky.
pub fn logdet_pd(a: &CMatrix) -> Result<f64> {
    let chol = cholesky_pd(a)?;
    let l = chol.l_dirty();
    Ok((0..a.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
pub fn inv_pd(a: &CMatrix) -> Result<CMatrix> {
    let chol = cholesky_pd(a)?;
    Ok(hermitian_part(&chol.inverse()))
}

/// Real part of `tr(a b)` without forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Projects a Hermitian matrix onto `{X : X >= floor * max(1, lambda_max) I}`
/// by clipping eigenvalues.
pub fn project_pd(a: &CMatrix, floor: f64) -> CMatrix {
    let (vals, vecs) = eigh(a);
    let top = vals.iter().cloned().fold(1.0_f64, f64::max);
    let clipped: Vec<f64> = vals.iter().map(|&v| v.max(floor * top)).collect();
    from_eigen(&vecs, &clipped)
}

pub fn to_complex(a: &DMatrix<f64>) -> CMatrix {
    a.map(|x| C64::new(x, 0.0))
}

/// Largest singular value of a Hermitian matrix, `max |eig|`.
pub fn spectral_norm_hermitian(a: &CMatrix) -> f64 {
    eigvalsh(a).iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}
