//! Tangent vectors, the SLD, BKM and congruence-invariant metrics, their
//! e-geodesics, and orthogonality residuals certifying e-projections.
//!
//! A tangent vector at `ρ` is stored by its m-representation `X` (a
//! traceless Hermitian matrix). Each metric has an e-representation `E(X)`
//! with `g(X, Y) = tr(E(X) Y)`:
//!
//! - SLD: `Eρ + ρE = 2X`;
//! - BKM: `E = Dlog_ρ[X]`;
//! - congruence: `E = ρ^{-1} X ρ^{-1}`.

use std::fmt;
use std::str::FromStr;

use crate::channels::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{
    embed, geometric_mean, herm_eig, log_derivative, log_derivative_inverse, partial_trace_hermitian,
    solve_lyapunov, solve_lyapunov_with, spectral_function, ComplexMatrix, HermitianMatrix, MatrixFunction, SpectralDecomposition,
    Subsystem, C64,
};
use crate::policy::NumericPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricTag {
    Sld,
    Bkm,
    Congruence,
}

impl MetricTag {
    pub const ALL: [MetricTag; 3] = [MetricTag::Sld, MetricTag::Bkm, MetricTag::Congruence];
}

impl fmt::Display for MetricTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricTag::Sld => "SLD",
            MetricTag::Bkm => "BKM",
            MetricTag::Congruence => "CONGRUENCE",
        })
    }
}

impl FromStr for MetricTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SLD" => Ok(MetricTag::Sld),
            "BKM" => Ok(MetricTag::Bkm),
            "CONGRUENCE" | "BURG" => Ok(MetricTag::Congruence),
            _ => Err(Error::Parse(format!("unknown metric {s:?}"))),
        }
    }
}

/// Tangent vector to the manifold of density matrices, held as its
/// m-representation.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: DensityMatrix,
    m_rep: HermitianMatrix,
}

impl TangentVector {
    pub fn new(base: DensityMatrix, m_rep: HermitianMatrix) -> Result<Self> {
        if base.dim() != m_rep.dim() {
            return Err(Error::DimensionMismatch(format!(
                "tangent of dimension {} at a base point of dimension {}",
                m_rep.dim(),
                base.dim()
            )));
        }
        let tr = m_rep.real_trace();
        if tr.abs() > NumericPolicy::global().tangent_trace_tol {
            return Err(Error::InvalidInput(format!("tangent vectors must be traceless, got trace {tr:e}")));
        }
        Ok(Self { base, m_rep })
    }

    pub fn base(&self) -> &DensityMatrix {
        &self.base
    }

    pub fn m_rep(&self) -> &HermitianMatrix {
        &self.m_rep
    }
}

/// e-representation of the m-representation `x` at the point with
/// decomposition `eig`.
pub fn e_rep(tag: MetricTag, eig: &SpectralDecomposition, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    match tag {
        MetricTag::Sld => solve_lyapunov_with(eig, &x.scaled(2.0)),
        MetricTag::Bkm => log_derivative(eig, x),
        MetricTag::Congruence => {
            let inv = spectral_function(eig, MatrixFunction::Inverse)?;
            Ok(x.congruence(&inv))
        }
    }
}

/// Inverse of [`e_rep`].
pub fn m_rep(tag: MetricTag, eig: &SpectralDecomposition, e: &HermitianMatrix) -> Result<HermitianMatrix> {
    eig.require_positive_definite()?;
    match tag {
        MetricTag::Sld => {
            let rho = eig.reconstruct();
            let prod = e.as_matrix() * rho.as_matrix();
            Ok(HermitianMatrix::symmetrize(&prod + prod.adjoint()).scaled(0.5))
        }
        MetricTag::Bkm => log_derivative_inverse(eig, e),
        MetricTag::Congruence => Ok(e.congruence(eig.reconstruct().as_matrix())),
    }
}

/// SLD e-representation: the solution `E` of `Eρ + ρE = 2X`.
pub fn sld_e_rep(x: &TangentVector) -> Result<HermitianMatrix> {
    e_rep(MetricTag::Sld, &herm_eig(x.base())?, x.m_rep())
}

fn same_base(a: &DensityMatrix, b: &DensityMatrix) -> bool {
    a.dim() == b.dim() && (a.as_matrix() - b.as_matrix()).norm() <= 1e-12 * (1.0 + a.frobenius())
}

/// `g^tag_ρ(X, Y)`.
pub fn metric_inner(tag: MetricTag, x: &TangentVector, y: &TangentVector) -> Result<f64> {
    if !same_base(x.base(), y.base()) {
        return Err(Error::InvalidInput("tangent vectors live at different base points".into()));
    }
    let eig = herm_eig(x.base())?;
    Ok(e_rep(tag, &eig, x.m_rep())?.inner(y.m_rep()))
}

fn log_of(rho: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = herm_eig(rho)?;
    eig.require_positive_definite()?;
    spectral_function(&eig, MatrixFunction::Log)
}

fn pd_inverse(a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = herm_eig(a)?;
    eig.require_positive_definite()?;
    spectral_function(&eig, MatrixFunction::Inverse)
}

/// `K = ρ1^{-1} # ρ2`, the congruence factor with `K ρ1 K = ρ2`.
///
/// The closed form is followed by Newton steps on `K ρ1 K = ρ2`; each solves
/// `Z M + M Z = −ρ1^{1/2} (K ρ1 K − ρ2) ρ1^{1/2}` with `M = ρ1^{1/2} K ρ1^{1/2}`
/// and updates `K += ρ1^{-1/2} Z ρ1^{-1/2}`.
pub fn sld_geodesic_factor(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<HermitianMatrix> {
    let mut k = geometric_mean(&pd_inverse(rho1)?, rho2)?;
    let eig = herm_eig(rho1)?;
    let half = eig.map(f64::sqrt);
    let inv_half = eig.map(|x| 1.0 / x.sqrt());
    for _ in 0..2 {
        let r = rho1.congruence(k.as_matrix()).sub(rho2);
        if r.frobenius() == 0.0 {
            break;
        }
        let m = k.congruence(half.as_matrix());
        let z = solve_lyapunov(&m, &r.congruence(half.as_matrix()).scaled(-1.0))?;
        k = k.add(&z.congruence(inv_half.as_matrix()));
    }
    Ok(k)
}

fn check_pair(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<()> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "geodesic between {0}x{0} and {1}x{1} states",
            rho1.dim(),
            rho2.dim()
        )));
    }
    Ok(())
}

/// Point `t` on the e-geodesic from `ρ1` (t = 0) to `ρ2` (t = 1).
pub fn e_geodesic(tag: MetricTag, rho1: &DensityMatrix, rho2: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    check_pair(rho1, rho2)?;
    if !(0.0..=1.0).contains(&t) {
        log::warn!("e-geodesic evaluated at t = {t}, outside [0, 1] (extrapolation)");
    }
    let unnormalized = match tag {
        MetricTag::Sld => {
            let k = sld_geodesic_factor(rho1, rho2)?;
            let kt = spectral_function(&herm_eig(&k)?, MatrixFunction::Power(t))?;
            rho1.congruence(kt.as_matrix())
        }
        MetricTag::Bkm => {
            let mix = log_of(rho1)?.scaled(1.0 - t).add(&log_of(rho2)?.scaled(t));
            spectral_function(&herm_eig(&mix)?, MatrixFunction::Exp)?
        }
        MetricTag::Congruence => {
            let resolvent = pd_inverse(rho1)?.scaled(1.0 - t).add(&pd_inverse(rho2)?.scaled(t));
            pd_inverse(&resolvent)?
        }
    };
    DensityMatrix::normalized(unnormalized)
}

/// e-parallel transport to `σ` of an SLD e-representation: `L − tr(σL) I`.
pub fn sld_parallel_transport(l: &HermitianMatrix, sigma: &DensityMatrix) -> HermitianMatrix {
    l.shifted(-sigma.inner(l))
}

/// SLD e-representation of the velocity of the SLD e-geodesic from `ρ1` to
/// `ρ2`, taken at parameter `t`.
pub fn sld_geodesic_velocity(rho1: &DensityMatrix, rho2: &DensityMatrix, t: f64) -> Result<HermitianMatrix> {
    check_pair(rho1, rho2)?;
    let k = sld_geodesic_factor(rho1, rho2)?;
    let log_k = log_of(&k)?.scaled(2.0);
    let at = e_geodesic(MetricTag::Sld, rho1, rho2, t)?;
    Ok(sld_parallel_transport(&log_k, &at))
}

/// Tangent of the `tag` e-geodesic from `from` to `to`, at `to`, as an
/// e-representation `E` so that `g(T, Y) = tr(E Y)`.
///
/// For the congruence metric the geodesic is taken on the positive definite
/// cone without renormalization; its velocity is `−S F S` with
/// `F = S_to^{-1} − S_from^{-1}`, whose e-representation is `−F`.
pub fn e_tangent(tag: MetricTag, from: &DensityMatrix, to: &DensityMatrix) -> Result<HermitianMatrix> {
    check_pair(from, to)?;
    match tag {
        MetricTag::Sld => sld_geodesic_velocity(from, to, 1.0),
        MetricTag::Bkm => {
            let diff = log_of(to)?.sub(&log_of(from)?);
            Ok(diff.shifted(-to.inner(&diff)))
        }
        MetricTag::Congruence => Ok(pd_inverse(from)?.sub(&pd_inverse(to)?)),
    }
}

/// Marginal constraint `tr_side ρ = target` on `n·m`-dimensional states.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    side: Subsystem,
    n: usize,
    m: usize,
    target: HermitianMatrix,
}

impl ConstraintSet {
    /// `side = First` constrains `tr_first ρ` (an `m × m` target),
    /// `side = Second` constrains `tr_second ρ` (an `n × n` target).
    pub fn new(side: Subsystem, n: usize, m: usize, target: HermitianMatrix) -> Result<Self> {
        let expected = Self::target_dim(side, n, m);
        if target.dim() != expected {
            return Err(Error::DimensionMismatch(format!(
                "target must be {expected}x{expected}, got {0}x{0}",
                target.dim()
            )));
        }
        DensityMatrix::new(target.clone())?;
        Ok(Self { side, n, m, target })
    }

    /// Target `I/m` or `I/n`.
    pub fn uniform(side: Subsystem, n: usize, m: usize) -> Self {
        let d = Self::target_dim(side, n, m);
        Self {
            side,
            n,
            m,
            target: HermitianMatrix::identity(d).scaled(1.0 / d as f64),
        }
    }

    fn target_dim(side: Subsystem, n: usize, m: usize) -> usize {
        match side {
            Subsystem::First => m,
            Subsystem::Second => n,
        }
    }

    pub fn side(&self) -> Subsystem {
        self.side
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn target(&self) -> &HermitianMatrix {
        &self.target
    }

    pub fn marginal(&self, rho: &HermitianMatrix) -> Result<HermitianMatrix> {
        partial_trace_hermitian(rho, self.n, self.m, self.side)
    }

    /// `‖tr_side ρ − target‖_F`.
    pub fn violation(&self, rho: &HermitianMatrix) -> Result<f64> {
        Ok(self.marginal(rho)?.sub(&self.target).frobenius())
    }

    /// Removes the constrained component: `Y − I_n ⊗ tr_first(Y)/n` or
    /// `Y − tr_second(Y) ⊗ I_m / m`, so that `tr_side` of the result is zero.
    pub fn project_tangent(&self, y: &HermitianMatrix) -> Result<HermitianMatrix> {
        let marg = self.marginal(y)?;
        let count = match self.side {
            Subsystem::First => self.n,
            Subsystem::Second => self.m,
        } as f64;
        let lifted = embed(marg.as_matrix(), self.n, self.m, self.side);
        Ok(HermitianMatrix::symmetrize(y.as_matrix() - lifted / C64::new(count, 0.0)))
    }

    /// Frobenius-orthonormal basis of `{Y Hermitian : tr_side Y = 0}`.
    pub fn tangent_basis(&self) -> Result<Vec<HermitianMatrix>> {
        let dim = self.n * self.m;
        let mut basis: Vec<HermitianMatrix> = Vec::new();
        for y in canonical_hermitian_basis(dim) {
            let mut v = self.project_tangent(&y)?;
            for b in &basis {
                v = v.sub(&b.scaled(b.inner(&v)));
            }
            let norm = v.frobenius();
            if norm > 1e-10 {
                basis.push(v.scaled(1.0 / norm));
            }
        }
        let d = Self::target_dim(self.side, self.n, self.m);
        debug_assert_eq!(basis.len(), dim * dim - d * d);
        Ok(basis)
    }
}

/// `E_ii`, `(E_ij + E_ji)/√2` and `i(E_ij − E_ji)/√2`: a Frobenius-orthonormal
/// basis of the `d × d` Hermitian matrices.
pub fn canonical_hermitian_basis(d: usize) -> Vec<HermitianMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut e = ComplexMatrix::zeros(d, d);
        e[(i, i)] = C64::new(1.0, 0.0);
        out.push(HermitianMatrix::symmetrize(e));
        for j in (i + 1)..d {
            let mut re = ComplexMatrix::zeros(d, d);
            re[(i, j)] = C64::new(s, 0.0);
            re[(j, i)] = C64::new(s, 0.0);
            out.push(HermitianMatrix::symmetrize(re));
            let mut im = ComplexMatrix::zeros(d, d);
            im[(i, j)] = C64::new(0.0, -s);
            im[(j, i)] = C64::new(0.0, s);
            out.push(HermitianMatrix::symmetrize(im));
        }
    }
    out
}

/// `max_b |g(T, Y_b)| / ‖T‖_g` over an orthonormal basis of the tangent
/// space of `constraint`, where `T` is the velocity at `to` of the `tag`
/// e-geodesic from `from`. Zero means the geodesic meets the constraint set
/// orthogonally. Returns zero when the velocity vanishes.
pub fn orthogonality_residual(
    tag: MetricTag,
    from: &DensityMatrix,
    to: &DensityMatrix,
    constraint: &ConstraintSet,
) -> Result<f64> {
    let (n, m) = constraint.dims();
    if from.dim() != n * m || to.dim() != n * m {
        return Err(Error::DimensionMismatch(format!(
            "constraint on {}-dimensional states, got {} and {}",
            n * m,
            from.dim(),
            to.dim()
        )));
    }
    let violation = constraint.violation(to)?;
    let tol = NumericPolicy::global().constraint_tol;
    if violation > tol {
        return Err(Error::InvalidInput(format!(
            "end point violates the constraint by {violation:e} (tolerance {tol:e})"
        )));
    }
    let e = e_tangent(tag, from, to)?;
    let eig = herm_eig(to)?;
    let norm = m_rep(tag, &eig, &e)?.inner(&e).max(0.0).sqrt();
    if norm <= 1e-12 {
        return Ok(0.0);
    }
    let worst = constraint
        .tangent_basis()?
        .iter()
        .map(|y| e.inner(y).abs())
        .fold(0.0, f64::max);
    Ok(worst / norm)
}
