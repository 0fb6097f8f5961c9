//! Completely positive maps, their Choi matrices, congruence scaling and
//! random states.
//!
//! Block convention: the Choi matrix of `Φ: C^{n×n} → C^{m×m}` is
//! `Σ_ij E_ij ⊗ Φ(E_ij)`, an `n × n` grid of `m × m` blocks. The outer index
//! is the input space, the inner index the output space, so
//! `tr_first CH(Φ) = Φ(I_n)`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    herm_eig, kron, partial_trace_hermitian, trace_product, ComplexMatrix, HermitianMatrix, Subsystem, C64,
};
use crate::policy::NumericPolicy;

/// `Φ(X) = Σ_k A_k X A_k†` with `m × n` Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausMap {
    in_dim: usize,
    out_dim: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausMap {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidInput("a Kraus map needs at least one operator".into()))?;
        let (m, n) = first.shape();
        if m == 0 || n == 0 {
            return Err(Error::InvalidInput("Kraus operators must be non-empty".into()));
        }
        if let Some(bad) = ops.iter().find(|a| a.shape() != (m, n)) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator of shape {:?}, expected {:?}",
                bad.shape(),
                (m, n)
            )));
        }
        Ok(Self {
            in_dim: n,
            out_dim: m,
            ops,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(dim, dim)]).expect("identity is a valid Kraus map")
    }

    /// `k` Kraus operators with independent complex Gaussian entries.
    pub fn random<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, k: usize, rng: &mut R) -> Result<Self> {
        let ops = (0..k.max(1))
            .map(|_| ComplexMatrix::from_fn(out_dim, in_dim, |_, _| complex_gaussian(rng)))
            .collect();
        Self::new(ops)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_shape(x, self.in_dim, "Kraus map input")?;
        Ok(self
            .ops
            .iter()
            .fold(ComplexMatrix::zeros(self.out_dim, self.out_dim), |acc, a| acc + a * x * a.adjoint()))
    }

    pub fn apply_dual(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_shape(y, self.out_dim, "dual Kraus map input")?;
        Ok(self
            .ops
            .iter()
            .fold(ComplexMatrix::zeros(self.in_dim, self.in_dim), |acc, a| acc + a.adjoint() * y * a))
    }
}

fn check_shape(x: &ComplexMatrix, dim: usize, what: &str) -> Result<()> {
    if x.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be {dim}x{dim}, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(())
}

/// Positive semidefinite `mn × mn` Choi matrix with `n` outer (input) blocks
/// of size `m` (output).
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    n: usize,
    m: usize,
    matrix: HermitianMatrix,
}

impl ChoiMatrix {
    /// Checks dimensions and `λ_min ≥ −psd_relative · λ_max`.
    pub fn new(n: usize, m: usize, matrix: HermitianMatrix) -> Result<Self> {
        let choi = Self::unchecked(n, m, matrix)?;
        let eig = herm_eig(&choi.matrix)?;
        let tol = NumericPolicy::global().psd_relative * eig.max_eigenvalue().abs();
        if eig.min_eigenvalue() < -tol {
            return Err(Error::InvalidInput(format!(
                "Choi matrix is not positive semidefinite (min eigenvalue {:e})",
                eig.min_eigenvalue()
            )));
        }
        Ok(choi)
    }

    /// Dimension check only; for matrices that are PSD by construction.
    pub(crate) fn unchecked(n: usize, m: usize, matrix: HermitianMatrix) -> Result<Self> {
        if n == 0 || m == 0 || matrix.dim() != n * m {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix of dimension {} cannot have {n} blocks of size {m}",
                matrix.dim()
            )));
        }
        Ok(Self { n, m, matrix })
    }

    /// `Σ_ij E_ij ⊗ Φ(E_ij)`.
    pub fn from_kraus(map: &KrausMap) -> Self {
        let (n, m) = (map.in_dim(), map.out_dim());
        let mut out = ComplexMatrix::zeros(n * m, n * m);
        for a in map.operators() {
            // block (i, j) gains a_i a_j†, with a_i the i-th column of A
            for i in 0..n {
                for j in 0..n {
                    for r in 0..m {
                        for s in 0..m {
                            out[(i * m + r, j * m + s)] += a[(r, i)] * a[(s, j)].conj();
                        }
                    }
                }
            }
        }
        Self {
            n,
            m,
            matrix: HermitianMatrix::symmetrize(out),
        }
    }

    /// Choi matrix of the classical map `diag(x) ↦ diag(A x)` for an entrywise
    /// nonnegative `m × n` matrix `A`: a diagonal matrix with entry `A_ij` at
    /// position `j·m + i`.
    pub fn from_diagonal_matrix(a: &nalgebra::DMatrix<f64>) -> Result<Self> {
        let (m, n) = a.shape();
        if a.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidInput("diagonal encoding needs finite nonnegative entries".into()));
        }
        let mut diag = vec![0.0; n * m];
        for j in 0..n {
            for i in 0..m {
                diag[j * m + i] = a[(i, j)];
            }
        }
        Self::unchecked(n, m, HermitianMatrix::from_real_diagonal(&diag))
    }

    /// Inverse of [`ChoiMatrix::from_diagonal_matrix`]; reads the diagonal only.
    pub fn diagonal_matrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.m, self.n, |i, j| self.matrix[(j * self.m + i, j * self.m + i)].re)
    }

    /// Number of outer blocks (input dimension).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Block size (output dimension).
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> HermitianMatrix {
        self.matrix
    }

    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        let m = self.m;
        self.matrix.view((i * m, j * m), (m, m)).into_owned()
    }

    /// `tr_first`: sum of diagonal blocks, equal to `Φ(I_n)`.
    pub fn tr_first(&self) -> HermitianMatrix {
        partial_trace_hermitian(&self.matrix, self.n, self.m, Subsystem::First).expect("dimensions are consistent")
    }

    /// `tr_second`: traces of the blocks, equal to `Φ*(I_m)ᵀ`.
    pub fn tr_second(&self) -> HermitianMatrix {
        partial_trace_hermitian(&self.matrix, self.n, self.m, Subsystem::Second).expect("dimensions are consistent")
    }

    pub fn marginal(&self, side: Subsystem) -> HermitianMatrix {
        match side {
            Subsystem::First => self.tr_first(),
            Subsystem::Second => self.tr_second(),
        }
    }

    /// `Φ(X) = Σ_ij X_ij Φ(E_ij) = tr_first((Xᵀ ⊗ I_m) C)`.
    pub fn apply_map(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_shape(x, self.n, "map input")?;
        let mut out = ComplexMatrix::zeros(self.m, self.m);
        for i in 0..self.n {
            for j in 0..self.n {
                let xij = x[(i, j)];
                if xij != C64::new(0.0, 0.0) {
                    out += self.block(i, j) * xij;
                }
            }
        }
        Ok(out)
    }

    /// `Φ*(Y)_ij = tr(Y Φ(E_ji))`, the adjoint with respect to `tr(Y† Φ(X))`.
    pub fn apply_dual(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_shape(y, self.m, "dual map input")?;
        Ok(ComplexMatrix::from_fn(self.n, self.n, |i, j| trace_product(y, &self.block(j, i))))
    }

    /// Choi matrix of `Φ_{L,R}(X) = L Φ(R† X R) L†` in the block-level form
    /// `(R† ⊗ L) C (R ⊗ L†)`. For Hermitian `L`, `R` this is `(R ⊗ L) C (R ⊗ L)`.
    pub fn scale(&self, l: &ComplexMatrix, r: &ComplexMatrix) -> Result<ChoiMatrix> {
        check_shape(l, self.m, "left scaling factor")?;
        check_shape(r, self.n, "right scaling factor")?;
        let left = kron(&r.adjoint(), l);
        Ok(Self {
            n: self.n,
            m: self.m,
            matrix: self.matrix.congruence(&left),
        })
    }

    /// `(I_n ⊗ L) C (I_n ⊗ L†)`: transforms every block by `B ↦ L B L†`.
    pub fn scale_left(&self, l: &ComplexMatrix) -> Result<ChoiMatrix> {
        check_shape(l, self.m, "left scaling factor")?;
        let (n, m) = (self.n, self.m);
        let mut out = ComplexMatrix::zeros(n * m, n * m);
        let l_adj = l.adjoint();
        for i in 0..n {
            for j in 0..n {
                let b = l * self.block(i, j) * &l_adj;
                out.view_mut((i * m, j * m), (m, m)).copy_from(&b);
            }
        }
        Ok(Self {
            n,
            m,
            matrix: HermitianMatrix::symmetrize(out),
        })
    }

    /// `(R† ⊗ I_m) C (R ⊗ I_m)`: block `(i, j)` becomes `Σ_kl conj(R_ki) R_lj C_kl`.
    pub fn scale_right(&self, r: &ComplexMatrix) -> Result<ChoiMatrix> {
        check_shape(r, self.n, "right scaling factor")?;
        let (n, m) = (self.n, self.m);
        let mut out = ComplexMatrix::zeros(n * m, n * m);
        for k in 0..n {
            for l in 0..n {
                let b = self.block(k, l);
                for i in 0..n {
                    for j in 0..n {
                        let w = r[(k, i)].conj() * r[(l, j)];
                        if w != C64::new(0.0, 0.0) {
                            let mut dst = out.view_mut((i * m, j * m), (m, m));
                            dst += &b * w;
                        }
                    }
                }
            }
        }
        Ok(Self {
            n,
            m,
            matrix: HermitianMatrix::symmetrize(out),
        })
    }

    /// Views the Choi matrix as a density matrix (positive definite, trace one).
    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.matrix.clone())
    }

    pub fn with_matrix(&self, matrix: HermitianMatrix) -> Result<ChoiMatrix> {
        Self::unchecked(self.n, self.m, matrix)
    }
}

/// Positive definite, trace-one Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl std::ops::Deref for DensityMatrix {
    type Target = HermitianMatrix;

    fn deref(&self) -> &HermitianMatrix {
        &self.0
    }
}

impl DensityMatrix {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let tr = matrix.real_trace();
        if (tr - 1.0).abs() > NumericPolicy::global().trace_tol {
            return Err(Error::InvalidInput(format!("density matrix must have unit trace, got {tr}")));
        }
        herm_eig(&matrix)?.require_positive_definite()?;
        Ok(Self(matrix))
    }

    /// Divides by the trace first.
    pub fn normalized(matrix: HermitianMatrix) -> Result<Self> {
        let tr = matrix.real_trace();
        if tr.is_nan() || tr <= 0.0 {
            return Err(Error::InvalidInput(format!("cannot normalize a matrix with trace {tr}")));
        }
        Self::new(matrix.scaled(1.0 / tr))
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self(HermitianMatrix::identity(dim).scaled(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.0
    }
}

/// Gaussian ensemble used to draw `ρ = P†P / tr(P†P)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ensemble {
    /// Complex Ginibre `P` (entries `(a + ib)/√2`, `a, b ~ N(0, 1)`).
    #[default]
    Complex,
    /// Real Gaussian `P`, so `ρ = PᵀP / tr(PᵀP)` is real symmetric.
    Real,
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `ρ = P†P / tr(P†P)` with `P` a `dim × dim` Gaussian matrix drawn from `rng`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, ensemble: Ensemble, rng: &mut R) -> Result<DensityMatrix> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    loop {
        let p = ComplexMatrix::from_fn(dim, dim, |_, _| match ensemble {
            Ensemble::Complex => complex_gaussian(rng),
            Ensemble::Real => C64::new(rng.sample(StandardNormal), 0.0),
        });
        let w = HermitianMatrix::symmetrize(p.adjoint() * &p);
        // singular draws have probability zero; redraw rather than fail
        if let Ok(rho) = DensityMatrix::normalized(w) {
            return Ok(rho);
        }
    }
}

/// Deterministic stream for a seed; the same seed always yields the same draws.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// [`random_density`] from a fresh seeded stream.
pub fn random_density_seeded(dim: usize, ensemble: Ensemble, seed: u64) -> Result<DensityMatrix> {
    random_density(dim, ensemble, &mut seeded_rng(seed))
}
