//! Dense complex Hermitian linear algebra.
//!
//! All matrix functions, the Lyapunov solver and the geometric mean go
//! through a single primitive, the Hermitian eigendecomposition. Dimensions
//! in this crate are small (a few dozen at most), so uniformity wins over
//! specialised Schur or Padé paths.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::ops::Deref;

use crate::error::{Error, Result};
use crate::policy::NumericPolicy;

pub type C64 = Complex64;

/// Dense complex matrix. nalgebra stores column-major; the row-major layout
/// only matters at the serialization boundary (see [`crate::io`]).
pub type ComplexMatrix = DMatrix<C64>;

/// Which tensor factor a partial trace (or a marginal constraint) refers to.
///
/// For a block matrix with `n × n` blocks of size `m × m`, `First` sums the
/// diagonal blocks (an `m × m` result) and `Second` takes the trace of every
/// block (an `n × n` result).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    First,
    Second,
}

impl Subsystem {
    pub fn other(self) -> Subsystem {
        match self {
            Subsystem::First => Subsystem::Second,
            Subsystem::Second => Subsystem::First,
        }
    }
}

/// A square complex matrix that is exactly Hermitian.
///
/// Construction checks `|a_ij − conj(a_ji)| ≤ tol` and then stores the
/// symmetrization `(A + A†)/2`, so downstream code may rely on exact
/// Hermiticity.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl Deref for HermitianMatrix {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

impl HermitianMatrix {
    /// Validates against the global Hermiticity tolerance.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, NumericPolicy::global().hermitian_tol)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidInput(format!(
                "expected a square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !is_finite(&matrix) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let d = matrix.nrows();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
            }
        }
        if worst > tol {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian (max |a_ij - conj a_ji| = {worst:e})"
            )));
        }
        Ok(Self::symmetrize(matrix))
    }

    /// Builds `(A + A†)/2` without any check. Used for results that are
    /// Hermitian in exact arithmetic.
    pub fn symmetrize(matrix: ComplexMatrix) -> Self {
        assert!(matrix.is_square(), "symmetrize needs a square matrix");
        let d = matrix.nrows();
        let mut out = matrix;
        for i in 0..d {
            out[(i, i)] = C64::new(out[(i, i)].re, 0.0);
            for j in (i + 1)..d {
                let v = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        HermitianMatrix(out)
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix(ComplexMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix(ComplexMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        HermitianMatrix(ComplexMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    /// Real trace (the imaginary part is exactly zero).
    pub fn real_trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    pub fn scaled(&self, c: f64) -> Self {
        HermitianMatrix(self.0.map(|z| z * c))
    }

    pub fn add(&self, other: &HermitianMatrix) -> Self {
        HermitianMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Self {
        HermitianMatrix(&self.0 - &other.0)
    }

    /// `self + c·I`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.0.clone();
        for i in 0..self.dim() {
            out[(i, i)] += C64::new(c, 0.0);
        }
        HermitianMatrix(out)
    }

    /// `X · self · X†`.
    pub fn congruence(&self, x: &ComplexMatrix) -> Self {
        HermitianMatrix::symmetrize(x * &self.0 * x.adjoint())
    }

    /// `Re tr(self · other)`, the Frobenius inner product of two Hermitian matrices.
    pub fn inner(&self, other: &HermitianMatrix) -> f64 {
        trace_product(&self.0, &other.0).re
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.0[(i, j)].norm() <= tol))
    }

    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    pub fn eig(&self) -> Result<SpectralDecomposition> {
        herm_eig(self)
    }
}

pub(crate) fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `tr(A·B)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// `P Λ P†` with ascending real eigenvalues and unitary `P` (eigenvectors in columns).
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `λ_min > pd_relative · λ_max` (and `λ_max > 0`).
    pub fn is_positive_definite(&self) -> bool {
        let max = self.max_eigenvalue();
        max > 0.0 && self.min_eigenvalue() > NumericPolicy::global().pd_relative * max
    }

    pub fn require_positive_definite(&self) -> Result<()> {
        if self.is_positive_definite() {
            Ok(())
        } else {
            Err(Error::Singular {
                min_eigenvalue: self.min_eigenvalue(),
                max_eigenvalue: self.max_eigenvalue(),
            })
        }
    }

    /// `P · diag(f(λ)) · P†`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> HermitianMatrix {
        let d = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (c, &lambda) in self.eigenvalues.iter().enumerate() {
            let fl = f(lambda);
            for r in 0..d {
                scaled[(r, c)] *= fl;
            }
        }
        HermitianMatrix::symmetrize(scaled * self.eigenvectors.adjoint())
    }

    /// `P† X P`: expresses `X` in the eigenbasis.
    pub fn to_eigenbasis(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.eigenvectors.adjoint() * x * &self.eigenvectors
    }

    /// `P X P†`: maps back from the eigenbasis.
    pub fn from_eigenbasis(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.eigenvectors * x * self.eigenvectors.adjoint()
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.map(|x| x)
    }

    /// `Σ log λ_i`; requires positive definiteness.
    pub fn log_det(&self) -> Result<f64> {
        self.require_positive_definite()?;
        Ok(self.eigenvalues.iter().map(|l| l.ln()).sum())
    }
}

fn eig_iteration_budget(d: usize) -> usize {
    1000 * d.max(1)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn herm_eig(a: &HermitianMatrix) -> Result<SpectralDecomposition> {
    if !is_finite(a) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let d = a.dim();
    if d == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: vec![],
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(a.0.clone(), f64::EPSILON, eig_iteration_budget(d))
        .ok_or(Error::Convergence {
            iterations: eig_iteration_budget(d),
            residual: f64::NAN,
        })?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Real functions applied through the spectral calculus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixFunction {
    Sqrt,
    Log,
    Exp,
    Power(f64),
    Inverse,
}

impl MatrixFunction {
    fn name(self) -> &'static str {
        match self {
            MatrixFunction::Sqrt => "sqrt",
            MatrixFunction::Log => "log",
            MatrixFunction::Exp => "exp",
            MatrixFunction::Power(_) => "power",
            MatrixFunction::Inverse => "inverse",
        }
    }

    fn needs_strict_positivity(self) -> bool {
        match self {
            MatrixFunction::Log | MatrixFunction::Inverse => true,
            MatrixFunction::Power(t) => t < 0.0,
            MatrixFunction::Sqrt | MatrixFunction::Exp => false,
        }
    }

    fn eval(self, x: f64) -> f64 {
        match self {
            MatrixFunction::Sqrt => x.max(0.0).sqrt(),
            MatrixFunction::Log => x.ln(),
            MatrixFunction::Exp => x.exp(),
            MatrixFunction::Power(0.0) => 1.0,
            MatrixFunction::Power(t) => x.max(0.0).powf(t),
            MatrixFunction::Inverse => 1.0 / x,
        }
    }
}

/// Applies `f` to the spectrum of an already decomposed matrix, after
/// checking `f`'s domain.
pub fn spectral_function(eig: &SpectralDecomposition, f: MatrixFunction) -> Result<HermitianMatrix> {
    let policy = NumericPolicy::global();
    if f.needs_strict_positivity() {
        let lmin = eig.min_eigenvalue();
        let lmax = eig.max_eigenvalue();
        if !(lmax > 0.0 && lmin > policy.pd_relative * lmax) {
            return Err(Error::Domain {
                function: f.name(),
                eigenvalue: lmin,
            });
        }
    } else if !matches!(f, MatrixFunction::Exp) {
        if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| l < -policy.domain_tol) {
            return Err(Error::Domain {
                function: f.name(),
                eigenvalue: bad,
            });
        }
    }
    Ok(eig.map(|x| f.eval(x)))
}

/// `f(A) = P f(Λ) P†`.
pub fn matrix_function(a: &HermitianMatrix, f: MatrixFunction) -> Result<HermitianMatrix> {
    spectral_function(&herm_eig(a)?, f)
}

/// Unique Hermitian `X` with `AX + XA = Q` for `A ≻ 0`, computed in `A`'s
/// eigenbasis as `X̃_ij = Q̃_ij / (λ_i + λ_j)`.
pub fn solve_lyapunov(a: &HermitianMatrix, q: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = herm_eig(a)?;
    solve_lyapunov_with(&eig, q)
}

/// Lyapunov solve reusing a decomposition of `A`.
pub fn solve_lyapunov_with(eig: &SpectralDecomposition, q: &HermitianMatrix) -> Result<HermitianMatrix> {
    if eig.dim() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Lyapunov: A is {0}x{0}, Q is {1}x{1}",
            eig.dim(),
            q.dim()
        )));
    }
    eig.require_positive_definite()?;
    let mut qt = eig.to_eigenbasis(q);
    let l = &eig.eigenvalues;
    for i in 0..l.len() {
        for j in 0..l.len() {
            qt[(i, j)] /= l[i] + l[j];
        }
    }
    Ok(HermitianMatrix::symmetrize(eig.from_eigenbasis(&qt)))
}

/// Matrix geometric mean `A # B = A^{1/2}(A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}`,
/// the unique positive definite solution of `X A^{-1} X = B`.
pub fn geometric_mean(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "geometric mean of {0}x{0} and {1}x{1}",
            a.dim(),
            b.dim()
        )));
    }
    let ea = herm_eig(a)?;
    ea.require_positive_definite()?;
    let a_half = ea.map(f64::sqrt);
    let a_mhalf = ea.map(|x| 1.0 / x.sqrt());
    let inner = b.congruence(&a_mhalf);
    let ei = herm_eig(&inner)?;
    ei.require_positive_definite()?;
    let inner_half = ei.map(f64::sqrt);
    Ok(inner_half.congruence(&a_half))
}

/// Kronecker product; block `(i, j)` of the result is `a_ij · B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Partial trace of an `(n·m) × (n·m)` matrix made of `n × n` blocks of size `m × m`.
pub fn partial_trace(
    matrix: &ComplexMatrix,
    outer_dim: usize,
    inner_dim: usize,
    which: Subsystem,
) -> Result<ComplexMatrix> {
    let (n, m) = (outer_dim, inner_dim);
    if matrix.nrows() != n * m || matrix.ncols() != n * m {
        return Err(Error::InvalidInput(format!(
            "partial trace over {n}x{m} blocks of a {}x{} matrix",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    Ok(match which {
        Subsystem::First => ComplexMatrix::from_fn(m, m, |r, s| (0..n).map(|i| matrix[(i * m + r, i * m + s)]).sum()),
        Subsystem::Second => ComplexMatrix::from_fn(n, n, |i, j| (0..m).map(|r| matrix[(i * m + r, j * m + r)]).sum()),
    })
}

/// Partial trace of a Hermitian matrix; the result is Hermitian.
pub fn partial_trace_hermitian(
    matrix: &HermitianMatrix,
    outer_dim: usize,
    inner_dim: usize,
    which: Subsystem,
) -> Result<HermitianMatrix> {
    partial_trace(matrix, outer_dim, inner_dim, which).map(HermitianMatrix::symmetrize)
}

/// `I_n ⊗ A` (for `Subsystem::First`, `A` is `m × m`) or `A ⊗ I_m`
/// (for `Subsystem::Second`, `A` is `n × n`): the adjoint of the partial trace.
pub fn embed(a: &ComplexMatrix, outer_dim: usize, inner_dim: usize, which: Subsystem) -> ComplexMatrix {
    match which {
        Subsystem::First => kron(&ComplexMatrix::identity(outer_dim, outer_dim), a),
        Subsystem::Second => kron(a, &ComplexMatrix::identity(inner_dim, inner_dim)),
    }
}

/// Divided difference of `log` at `(x, y)`, stable when `x ≈ y`.
pub fn log_divided_difference(x: f64, y: f64) -> f64 {
    if x == y {
        return 1.0 / x;
    }
    let d = x - y;
    if d.abs() < 1e-3 * y.abs() {
        (d / y).ln_1p() / d
    } else {
        (x.ln() - y.ln()) / d
    }
}

/// Fréchet derivative of the matrix logarithm at `ρ` in direction `H`
/// (Daleckii–Krein: Hadamard product with log divided differences in the
/// eigenbasis of `ρ`).
pub fn log_derivative(eig: &SpectralDecomposition, h: &HermitianMatrix) -> Result<HermitianMatrix> {
    eig.require_positive_definite()?;
    let mut ht = eig.to_eigenbasis(h);
    let l = &eig.eigenvalues;
    for i in 0..l.len() {
        for j in 0..l.len() {
            ht[(i, j)] *= log_divided_difference(l[i], l[j]);
        }
    }
    Ok(HermitianMatrix::symmetrize(eig.from_eigenbasis(&ht)))
}

/// Inverse of [`log_derivative`]: recovers the direction `H` from `Dlog_ρ[H]`.
pub fn log_derivative_inverse(eig: &SpectralDecomposition, e: &HermitianMatrix) -> Result<HermitianMatrix> {
    eig.require_positive_definite()?;
    let mut et = eig.to_eigenbasis(e);
    let l = &eig.eigenvalues;
    for i in 0..l.len() {
        for j in 0..l.len() {
            et[(i, j)] /= log_divided_difference(l[i], l[j]);
        }
    }
    Ok(HermitianMatrix::symmetrize(eig.from_eigenbasis(&et)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn herm(rows: &[&[C64]]) -> HermitianMatrix {
        let d = rows.len();
        HermitianMatrix::new(ComplexMatrix::from_fn(d, d, |i, j| rows[i][j])).unwrap()
    }

    fn real(rows: &[&[f64]]) -> HermitianMatrix {
        let d = rows.len();
        HermitianMatrix::new(ComplexMatrix::from_fn(d, d, |i, j| c(rows[i][j], 0.0))).unwrap()
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::InvalidInput(_))));
        let nan = ComplexMatrix::from_element(1, 1, c(f64::NAN, 0.0));
        assert!(HermitianMatrix::new(nan).is_err());
    }

    #[test]
    fn symmetrization_is_exact() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 1e-14), c(0.3, 0.2), c(0.3, -0.2 + 1e-13), c(2.0, 0.0)]);
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h[(0, 1)], h[(1, 0)].conj());
        assert_eq!(h[(0, 0)].im, 0.0);
    }

    #[test]
    fn eig_of_diagonal() {
        let e = herm_eig(&HermitianMatrix::from_real_diagonal(&[1.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0]);
        assert!((e.eigenvectors.clone() - ComplexMatrix::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn eig_hand_solved() {
        let e = herm_eig(&real(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 3.0).abs() < 1e-14);

        let y = herm(&[&[c(0.0, 0.0), c(0.0, 1.0)], &[c(0.0, -1.0), c(0.0, 0.0)]]);
        let e = herm_eig(&y).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let unitary = e.eigenvectors.adjoint() * &e.eigenvectors;
        assert!((unitary - ComplexMatrix::identity(2, 2)).norm() < 1e-10);
        assert!((e.reconstruct().as_matrix() - y.as_matrix()).norm() < 1e-10);
    }

    #[test]
    fn matrix_function_examples() {
        let s = matrix_function(&HermitianMatrix::from_real_diagonal(&[4.0, 9.0]), MatrixFunction::Sqrt).unwrap();
        assert!((s.as_matrix() - HermitianMatrix::from_real_diagonal(&[2.0, 3.0]).as_matrix()).norm() < 1e-14);

        let d = HermitianMatrix::from_real_diagonal(&[1.0, 2.0]);
        let back = matrix_function(&matrix_function(&d, MatrixFunction::Exp).unwrap(), MatrixFunction::Log).unwrap();
        assert!((back.as_matrix() - d.as_matrix()).norm() < 1e-14);

        let a = real(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let s = matrix_function(&a, MatrixFunction::Power(0.5)).unwrap();
        assert!((s.as_matrix() * s.as_matrix() - a.as_matrix()).norm() <= 1e-10);
    }

    #[test]
    fn matrix_function_domain_errors() {
        let a = HermitianMatrix::from_real_diagonal(&[-1.0, 2.0]);
        match matrix_function(&a, MatrixFunction::Sqrt) {
            Err(Error::Domain { function, eigenvalue }) => {
                assert_eq!(function, "sqrt");
                assert_eq!(eigenvalue, -1.0);
            }
            other => panic!("expected domain error, got {other:?}"),
        }
        assert!(matrix_function(&a, MatrixFunction::Log).is_err());
        assert!(matrix_function(&a, MatrixFunction::Inverse).is_err());
        assert!(matrix_function(&a, MatrixFunction::Power(-0.5)).is_err());
        assert!(matrix_function(&a, MatrixFunction::Exp).is_ok());
        // tiny negative eigenvalues from rounding are clamped
        let b = HermitianMatrix::from_real_diagonal(&[-1e-14, 1.0]);
        assert!(matrix_function(&b, MatrixFunction::Sqrt).is_ok());
        assert!(matrix_function(&b, MatrixFunction::Log).is_err());
    }

    #[test]
    fn lyapunov_examples() {
        let q = herm(&[&[c(1.0, 0.0), c(0.5, 0.25)], &[c(0.5, -0.25), c(-2.0, 0.0)]]);
        let x = solve_lyapunov(&HermitianMatrix::identity(2), &q).unwrap();
        assert!((x.as_matrix() - q.scaled(0.5).as_matrix()).norm() < 1e-15);

        let ones = real(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let x = solve_lyapunov(&HermitianMatrix::from_real_diagonal(&[1.0, 2.0]), &ones).unwrap();
        let expected = real(&[&[0.5, 1.0 / 3.0], &[1.0 / 3.0, 0.25]]);
        assert!((x.as_matrix() - expected.as_matrix()).norm() < 1e-15);
    }

    #[test]
    fn lyapunov_rejects_singular() {
        let a = HermitianMatrix::from_real_diagonal(&[0.0, 1.0]);
        assert!(matches!(
            solve_lyapunov(&a, &HermitianMatrix::identity(2)),
            Err(Error::Singular { .. })
        ));
        let a = HermitianMatrix::from_real_diagonal(&[1e-15, 1.0]);
        assert!(solve_lyapunov(&a, &HermitianMatrix::identity(2)).is_err());
        assert!(matches!(
            solve_lyapunov(&HermitianMatrix::identity(3), &HermitianMatrix::identity(2)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn geometric_mean_examples() {
        let a = real(&[&[2.0, 0.5], &[0.5, 1.0]]);
        let aa = geometric_mean(&a, &a).unwrap();
        assert!((aa.as_matrix() - a.as_matrix()).norm() < 1e-13);

        let b = herm(&[&[c(3.0, 0.0), c(0.2, 0.7)], &[c(0.2, -0.7), c(1.5, 0.0)]]);
        let ib = geometric_mean(&HermitianMatrix::identity(2), &b).unwrap();
        let sb = matrix_function(&b, MatrixFunction::Sqrt).unwrap();
        assert!((ib.as_matrix() - sb.as_matrix()).norm() < 1e-13);

        let g = geometric_mean(
            &HermitianMatrix::from_real_diagonal(&[1.0, 4.0]),
            &HermitianMatrix::from_real_diagonal(&[4.0, 1.0]),
        )
        .unwrap();
        assert!((g.as_matrix() - HermitianMatrix::from_real_diagonal(&[2.0, 2.0]).as_matrix()).norm() < 1e-14);

        assert!(geometric_mean(&HermitianMatrix::from_real_diagonal(&[1.0, -1.0]), &a).is_err());
        assert!(geometric_mean(&a, &HermitianMatrix::from_real_diagonal(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn kron_examples() {
        let i2 = ComplexMatrix::identity(2, 2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4, 4));

        let mut e11 = ComplexMatrix::zeros(2, 2);
        e11[(0, 0)] = c(1.0, 0.0);
        let b = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 2.0), c(3.0, 0.0), c(0.0, -1.0), c(5.0, 0.5)]);
        let k = kron(&e11, &b);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i < 2 && j < 2 { b[(i, j)] } else { c(0.0, 0.0) };
                assert_eq!(k[(i, j)], expected);
            }
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let a = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 1.0), c(0.5, 0.0), c(3.0, 0.0)]);
        let b = ComplexMatrix::from_row_slice(3, 3, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(2.0, 0.0), c(4.0, 0.0), c(1.0, -1.0), c(0.0, 0.0), c(0.3, 0.0), c(-1.0, 0.0)]);
        let ab = kron(&a, &b);
        let t1 = partial_trace(&ab, 2, 3, Subsystem::First).unwrap();
        let t2 = partial_trace(&ab, 2, 3, Subsystem::Second).unwrap();
        assert!((t1 - b.clone() * trace(&a)).norm() < 1e-14);
        assert!((t2 - a.clone() * trace(&b)).norm() < 1e-14);
        assert!(partial_trace(&ab, 3, 3, Subsystem::First).is_err());
    }

    #[test]
    fn embed_is_adjoint_of_partial_trace() {
        let x = ComplexMatrix::from_fn(6, 6, |i, j| c((i * 7 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.05));
        let a2 = ComplexMatrix::from_fn(2, 2, |i, j| c(1.0 + i as f64, j as f64 - 0.5));
        let a3 = ComplexMatrix::from_fn(3, 3, |i, j| c(i as f64 * j as f64, 0.2 * i as f64));
        // tr(X (A ⊗ I)) = tr(tr_2(X) A) and tr(X (I ⊗ A)) = tr(tr_1(X) A)
        let lhs = trace_product(&x, &embed(&a2, 2, 3, Subsystem::Second));
        let rhs = trace_product(&partial_trace(&x, 2, 3, Subsystem::Second).unwrap(), &a2);
        assert!((lhs - rhs).norm() < 1e-12);
        let lhs = trace_product(&x, &embed(&a3, 2, 3, Subsystem::First));
        let rhs = trace_product(&partial_trace(&x, 2, 3, Subsystem::First).unwrap(), &a3);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn log_divided_difference_near_diagonal() {
        let x = 0.3;
        for eps in [1e-4, 1e-7, 1e-10, 1e-13] {
            let series = 1.0 / x - eps / (2.0 * x * x) + eps * eps / (3.0 * x * x * x);
            assert!((log_divided_difference(x + eps, x) - series).abs() < 1e-10);
        }
        assert_eq!(log_divided_difference(x, x), 1.0 / x);
        let far = log_divided_difference(2.0, 0.5);
        assert!((far - (2.0f64.ln() - 0.5f64.ln()) / 1.5).abs() < 1e-15);
    }
}
