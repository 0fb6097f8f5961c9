//! Classical and quantum relative entropies, and the central difference
//! quotient probe.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, geometric_mean, spectral_function, HermitianMatrix, MatrixFunction};
use crate::policy::NumericPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DivergenceTag {
    /// `Σ a log(a/b)` on diagonals.
    Kl,
    /// `tr[ρ log ρ − ρ log σ]`.
    Umegaki,
    /// Belavkin–Staszewski, `−tr[ρ log(ρ^{-1/2} σ ρ^{-1/2})]`.
    Bs,
    /// `tr(ST^{-1}) − log det(ST^{-1}) − n`.
    Burg,
    /// Sandwiched order 1/2, `−4 log tr[(σ^{1/2} ρ σ^{1/2})^{1/2}]`.
    RenyiHalf,
    /// `2 tr[ρ log(ρ # σ^{-1})]`.
    Nagaoka,
}

impl DivergenceTag {
    pub const ALL: [DivergenceTag; 6] = [
        DivergenceTag::Kl,
        DivergenceTag::Umegaki,
        DivergenceTag::Bs,
        DivergenceTag::Burg,
        DivergenceTag::RenyiHalf,
        DivergenceTag::Nagaoka,
    ];

    /// Tags whose inputs are meant to be states.
    pub fn presumes_states(self) -> bool {
        !matches!(self, DivergenceTag::Kl | DivergenceTag::Burg)
    }
}

impl fmt::Display for DivergenceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DivergenceTag::Kl => "KL",
            DivergenceTag::Umegaki => "UMEGAKI",
            DivergenceTag::Bs => "BS",
            DivergenceTag::Burg => "BURG",
            DivergenceTag::RenyiHalf => "RENYI_HALF",
            DivergenceTag::Nagaoka => "NAGAOKA",
        })
    }
}

impl FromStr for DivergenceTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.to_ascii_uppercase().replace('-', "_");
        match upper.as_str() {
            "KL" => Ok(DivergenceTag::Kl),
            "UMEGAKI" => Ok(DivergenceTag::Umegaki),
            "BS" => Ok(DivergenceTag::Bs),
            "BURG" => Ok(DivergenceTag::Burg),
            "RENYI_HALF" | "RENYI" => Ok(DivergenceTag::RenyiHalf),
            "NAGAOKA" => Ok(DivergenceTag::Nagaoka),
            "MEASURED" => Err(Error::Unsupported("measured relative entropy".into())),
            _ => Err(Error::Parse(format!("unknown divergence {s:?}"))),
        }
    }
}

/// `Σ a_ij log(a_ij / b_ij)` for entrywise positive arrays of equal shape.
pub fn kl_divergence(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "KL between arrays of shape {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if a.iter().chain(b.iter()).any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidInput("KL needs entrywise positive arrays".into()));
    }
    Ok(a.iter().zip(b.iter()).map(|(&x, &y)| x * (x / y).ln()).sum())
}

fn diagonal_vector(h: &HermitianMatrix) -> Result<DMatrix<f64>> {
    let scale = h.frobenius();
    if !h.is_diagonal(1e-14 * scale) {
        return Err(Error::InvalidInput("KL is defined on diagonal (commuting) inputs only".into()));
    }
    let d = h.real_diagonal();
    Ok(DMatrix::from_vec(d.len(), 1, d))
}

fn pd_function(a: &HermitianMatrix, f: MatrixFunction) -> Result<HermitianMatrix> {
    let eig = herm_eig(a)?;
    eig.require_positive_definite()?;
    spectral_function(&eig, f)
}

fn log_det(a: &HermitianMatrix) -> Result<f64> {
    herm_eig(a)?.log_det()
}

/// `D_tag(ρ ‖ σ)`.
///
/// On exactly diagonal inputs UMEGAKI, BS and NAGAOKA are evaluated as the
/// classical KL divergence of the diagonals, to which they reduce.
pub fn divergence(tag: DivergenceTag, rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "divergence between {0}x{0} and {1}x{1} matrices",
            rho.dim(),
            sigma.dim()
        )));
    }
    if tag.presumes_states() {
        let warn = NumericPolicy::global().state_trace_warn;
        for (name, x) in [("first", rho), ("second", sigma)] {
            let tr = x.real_trace();
            if (tr - 1.0).abs() > warn {
                log::warn!("{tag}: {name} argument has trace {tr}, not 1");
            }
        }
    }
    let commuting = matches!(tag, DivergenceTag::Umegaki | DivergenceTag::Bs | DivergenceTag::Nagaoka)
        && rho.is_diagonal(0.0)
        && sigma.is_diagonal(0.0)
        && rho.real_diagonal().iter().chain(&sigma.real_diagonal()).all(|&x| x > 0.0);
    if commuting {
        return kl_divergence(&diagonal_vector(rho)?, &diagonal_vector(sigma)?);
    }
    match tag {
        DivergenceTag::Kl => kl_divergence(&diagonal_vector(rho)?, &diagonal_vector(sigma)?),
        DivergenceTag::Umegaki => {
            let diff = pd_function(rho, MatrixFunction::Log)?.sub(&pd_function(sigma, MatrixFunction::Log)?);
            Ok(rho.inner(&diff))
        }
        DivergenceTag::Bs => {
            let inner = sigma.congruence(pd_function(rho, MatrixFunction::Power(-0.5))?.as_matrix());
            Ok(-rho.inner(&pd_function(&inner, MatrixFunction::Log)?))
        }
        DivergenceTag::Burg => {
            let t_inv = pd_function(sigma, MatrixFunction::Inverse)?;
            let product = rho.inner(&t_inv);
            Ok(product - (log_det(rho)? - log_det(sigma)?) - rho.dim() as f64)
        }
        DivergenceTag::RenyiHalf => {
            let inner = rho.congruence(pd_function(sigma, MatrixFunction::Sqrt)?.as_matrix());
            let root = pd_function(&inner, MatrixFunction::Sqrt)?;
            Ok(-4.0 * root.real_trace().ln())
        }
        DivergenceTag::Nagaoka => {
            let mean = geometric_mean(rho, &pd_function(sigma, MatrixFunction::Inverse)?)?;
            Ok(2.0 * rho.inner(&pd_function(&mean, MatrixFunction::Log)?))
        }
    }
}

/// Largest `h` with `ρ ± hA ≻ 0`: `1 / max |λ(ρ^{-1/2} A ρ^{-1/2})|`
/// (infinite for `A = 0`).
pub fn critical_step(rho: &HermitianMatrix, a: &HermitianMatrix) -> Result<f64> {
    if rho.dim() != a.dim() {
        return Err(Error::DimensionMismatch("direction and base point differ in dimension".into()));
    }
    let whitened = a.congruence(pd_function(rho, MatrixFunction::Power(-0.5))?.as_matrix());
    let eig = herm_eig(&whitened)?;
    let spread = eig.min_eigenvalue().abs().max(eig.max_eigenvalue().abs());
    Ok(if spread == 0.0 { f64::INFINITY } else { 1.0 / spread })
}

/// `Δ(h, A) = [D(ρ* + hA ‖ ρ0) − D(ρ* − hA ‖ ρ0)] / 2h`.
pub fn central_difference_quotient(
    tag: DivergenceTag,
    rho_star: &HermitianMatrix,
    rho0: &HermitianMatrix,
    a: &HermitianMatrix,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("step h must be positive, got {h}")));
    }
    let critical_h = critical_step(rho_star, a)?;
    if h >= critical_h {
        return Err(Error::OutsideCone { h, critical_h });
    }
    let plus = rho_star.add(&a.scaled(h));
    let minus = rho_star.sub(&a.scaled(h));
    let step = |x: &HermitianMatrix| {
        divergence(tag, x, rho0).map_err(|e| match e {
            Error::Singular { .. } | Error::Domain { .. } => Error::OutsideCone { h, critical_h },
            other => other,
        })
    };
    Ok((step(&plus)? - step(&minus)?) / (2.0 * h))
}
