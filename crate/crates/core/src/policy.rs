//! Process-wide numeric tolerances.
//!
//! Every tolerance used for validation lives here. The policy can be
//! installed once, before the first numerical call; afterwards it is
//! read-only.

use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq)]
pub struct NumericPolicy {
    /// Absolute Hermiticity tolerance when constructing a [`HermitianMatrix`](crate::HermitianMatrix).
    pub hermitian_tol: f64,
    /// Hermiticity tolerance applied to parsed JSON payloads.
    pub parse_hermitian_tol: f64,
    /// A matrix is positive definite when `λ_min > pd_relative · λ_max`.
    pub pd_relative: f64,
    /// A Choi matrix is accepted as PSD when `λ_min ≥ −psd_relative · λ_max`.
    pub psd_relative: f64,
    /// Eigenvalues down to `−domain_tol` are clamped to zero for `sqrt` and
    /// non-negative powers.
    pub domain_tol: f64,
    /// `|tr ρ − 1|` allowed for a density matrix.
    pub trace_tol: f64,
    /// `|tr X|` allowed for the m-representation of a tangent vector.
    pub tangent_trace_tol: f64,
    /// State-valued divergences warn when the trace deviates beyond this.
    pub state_trace_warn: f64,
    /// Marginal violation tolerated by orthogonality checks.
    pub constraint_tol: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            hermitian_tol: 1e-12,
            parse_hermitian_tol: 1e-9,
            pd_relative: 1e-13,
            psd_relative: 1e-10,
            domain_tol: 1e-12,
            trace_tol: 1e-10,
            tangent_trace_tol: 1e-10,
            state_trace_warn: 1e-8,
            constraint_tol: 1e-6,
        }
    }
}

static GLOBAL: OnceLock<NumericPolicy> = OnceLock::new();

impl NumericPolicy {
    /// The active policy. Falls back to [`NumericPolicy::default`] if none was installed.
    pub fn global() -> &'static NumericPolicy {
        GLOBAL.get_or_init(NumericPolicy::default)
    }

    /// Installs `policy` as the process-wide policy. Fails (returning the
    /// rejected policy) if a policy is already active.
    pub fn install(policy: NumericPolicy) -> Result<(), NumericPolicy> {
        GLOBAL.set(policy)
    }
}
