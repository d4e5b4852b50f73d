//! Dense Hermitian helpers on `nalgebra` complex matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Result};

pub type CMatrix = DMatrix<Complex64>;

/// `Re tr(A B)`. Exact trace for Hermitian `A`, `B`.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            let x = a[(i, j)];
            let y = b[(j, i)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

/// `Re x^H A x`.
pub fn quad_form(a: &CMatrix, x: &[Complex64]) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for j in 0..n {
        let mut col = Complex64::new(0.0, 0.0);
        for i in 0..n {
            col += x[i].conj() * a[(i, j)];
        }
        acc += (col * x[j]).re;
    }
    acc
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Largest entry of `|A − A^H|`.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Eigenpairs of a Hermitian matrix, eigenvalues descending.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = hermitian_part(a).symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// `U diag(λ) U^H`.
pub fn reconstruct(vals: &[f64], vecs: &CMatrix) -> CMatrix {
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for (c, &l) in vals.iter().enumerate() {
        for r in 0..n {
            scaled[(r, c)] *= l;
        }
    }
    scaled * vecs.adjoint()
}

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped).
pub fn project_psd(a: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(a);
    if vals.iter().all(|&l| l >= 0.0) {
        return hermitian_part(a);
    }
    let clipped: Vec<f64> = vals.iter().map(|&l| l.max(0.0)).collect();
    reconstruct(&clipped, &vecs)
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigen(a).0.last().copied().unwrap_or(0.0)
}

/// `D^{-1/2} A D^{-1/2}` with `D = diag(A)`: a PSD input stays PSD and gets
/// an exact unit diagonal. `None` if a diagonal entry is not positive.
pub fn unit_diagonal_congruence(a: &CMatrix) -> Option<CMatrix> {
    let n = a.nrows();
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    if d.iter().any(|&x| !(x > 0.0)) {
        return None;
    }
    let s: Vec<f64> = d.iter().map(|x| 1.0 / x.sqrt()).collect();
    let mut out = CMatrix::from_fn(n, n, |i, j| a[(i, j)] * (s[i] * s[j]));
    for i in 0..n {
        out[(i, i)] = Complex64::new(1.0, 0.0);
    }
    Some(out)
}

/// Eigen-factorization of a PSD matrix.
#[derive(Debug, Clone)]
pub struct EigFactor {
    pub u: CMatrix,
    /// Non-negative, descending; values below `1e-12 λ_max` are zero.
    pub lambda: Vec<f64>,
}

pub fn eig_factor(v: &CMatrix) -> Result<EigFactor> {
    if v.nrows() != v.ncols() {
        return domain("eig_factor needs a square matrix");
    }
    let scale = max_abs(v).max(1.0);
    if hermitian_defect(v) > 1e-10 * scale {
        return domain("eig_factor needs a Hermitian matrix");
    }
    let (vals, u) = hermitian_eigen(v);
    if vals.last().is_some_and(|&l| l < -1e-8 * scale) {
        return domain(format!("matrix is not PSD (eigenvalue {:e})", vals.last().unwrap()));
    }
    // Round-off eigenvalues would enter samples through their square roots.
    let floor = 1e-12 * vals.first().copied().unwrap_or(0.0).max(0.0);
    Ok(EigFactor {
        u,
        lambda: vals.into_iter().map(|l| if l > floor { l } else { 0.0 }).collect(),
    })
}
