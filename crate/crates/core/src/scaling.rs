//! Matrix and operator Sinkhorn scaling, the Umegaki (BKM) and Burg
//! alternating projections, and capacity estimation.
//!
//! One iteration is one sweep: a first-marginal step followed by a
//! second-marginal step. `residuals[k]` is `‖tr_first ρ − P‖_F² +
//! ‖tr_second ρ − Q‖_F²` after `k` sweeps.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::channels::{ChoiMatrix, DensityMatrix};
use crate::error::{Error, Result};
use crate::geometry::{canonical_hermitian_basis, ConstraintSet};
use crate::linalg::{
    embed, geometric_mean, herm_eig, partial_trace_hermitian, spectral_function, HermitianMatrix, MatrixFunction,
    Subsystem,
};

/// Which alternating e-projection to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Operator Sinkhorn (e-projections for the SLD metric).
    Sld,
    /// Umegaki relative entropy minimization (BKM metric).
    Bkm,
    /// Burg divergence minimization (congruence-invariant metric).
    Burg,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Sld, Method::Bkm, Method::Burg];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Sld => "sld",
            Method::Bkm => "bkm",
            Method::Burg => "burg",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sld" | "sinkhorn" => Ok(Method::Sld),
            "bkm" | "umegaki" => Ok(Method::Bkm),
            "burg" | "congruence" => Ok(Method::Burg),
            _ => Err(Error::Unsupported(format!("method {s:?}"))),
        }
    }
}

/// Marginal targets: `P` (`m × m`) for the first marginal, `Q` (`n × n`)
/// for the second. Both positive definite with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Targets {
    p: HermitianMatrix,
    q: HermitianMatrix,
    uniform: bool,
}

impl Targets {
    pub fn new(p: HermitianMatrix, q: HermitianMatrix) -> Result<Self> {
        DensityMatrix::new(p.clone())?;
        DensityMatrix::new(q.clone())?;
        let uniform = p == uniform_target(p.dim()) && q == uniform_target(q.dim());
        Ok(Self { p, q, uniform })
    }

    /// `I/m` and `I/n`.
    pub fn uniform(n: usize, m: usize) -> Self {
        Self {
            p: uniform_target(m),
            q: uniform_target(n),
            uniform: true,
        }
    }

    pub fn p(&self) -> &HermitianMatrix {
        &self.p
    }

    pub fn q(&self) -> &HermitianMatrix {
        &self.q
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    fn check_dims(&self, n: usize, m: usize) -> Result<()> {
        if self.p.dim() != m || self.q.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "targets are {}x{} and {}x{}, expected P {m}x{m} and Q {n}x{n}",
                self.p.dim(),
                self.p.dim(),
                self.q.dim(),
                self.q.dim()
            )));
        }
        Ok(())
    }

    pub fn constraint(&self, side: Subsystem, n: usize, m: usize) -> Result<ConstraintSet> {
        let target = match side {
            Subsystem::First => &self.p,
            Subsystem::Second => &self.q,
        };
        if self.uniform {
            Ok(ConstraintSet::uniform(side, n, m))
        } else {
            ConstraintSet::new(side, n, m, target.clone())
        }
    }
}

fn uniform_target(d: usize) -> HermitianMatrix {
    HermitianMatrix::identity(d).scaled(1.0 / d as f64)
}

/// Inner solver settings for the dual problems of the BKM and Burg
/// projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Stop once the dual gradient norm is below this.
    pub gradient_tol: f64,
    /// If progress stalls, a gradient norm below this is still accepted.
    pub accept_tol: f64,
}

impl SolverOptions {
    pub fn bkm() -> Self {
        Self {
            max_iters: 10_000,
            gradient_tol: 1e-11,
            accept_tol: 1e-9,
        }
    }

    pub fn burg() -> Self {
        Self {
            max_iters: 200,
            gradient_tol: 1e-12,
            accept_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    pub max_iters: usize,
    pub tol: f64,
    /// `None` means `I/m`, `I/n`.
    pub targets: Option<Targets>,
    /// Stop as soon as the residual drops below `tol`. When false, exactly
    /// `max_iters` sweeps are run.
    pub stop_at_tol: bool,
    pub bkm: SolverOptions,
    pub burg: SolverOptions,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: 1e-8,
            targets: None,
            stop_at_tol: true,
            bkm: SolverOptions::bkm(),
            burg: SolverOptions::burg(),
        }
    }
}

impl ScalingConfig {
    /// Runs exactly `iters` sweeps.
    pub fn fixed(iters: usize) -> Self {
        Self {
            max_iters: iters,
            stop_at_tol: false,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    fn targets_for(&self, n: usize, m: usize) -> Result<Targets> {
        match &self.targets {
            Some(t) => {
                t.check_dims(n, m)?;
                Ok(t.clone())
            }
            None => Ok(Targets::uniform(n, m)),
        }
    }
}

/// One half-step of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub side: Subsystem,
    /// The scaling factor `L` or `R` (SLD) or the dual variable `A` (BKM, Burg).
    pub factor: HermitianMatrix,
    /// Inner solver iterations (zero for SLD).
    pub inner_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingTrace {
    pub method: Method,
    pub n: usize,
    pub m: usize,
    pub targets: Targets,
    /// Trace of the input before normalization.
    pub input_trace: f64,
    /// `iterates[0]` is the normalized input; one entry per half-step after it.
    pub iterates: Vec<DensityMatrix>,
    pub steps: Vec<StepRecord>,
    pub residuals: Vec<f64>,
    /// `Σ (2/n) log det` over all SLD factors, for `m = n` runs.
    pub capacity_log: Option<f64>,
    pub converged: bool,
    pub tol: f64,
    /// Whether a second-marginal step was applied before the first sweep.
    pub preprocessed: bool,
}

impl ScalingTrace {
    pub fn final_state(&self) -> &DensityMatrix {
        self.iterates.last().expect("a trace always holds the initial point")
    }

    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("a trace always holds the initial residual")
    }

    /// Number of completed sweeps.
    pub fn sweeps(&self) -> usize {
        self.residuals.len() - 1
    }

    pub fn choi(&self) -> ChoiMatrix {
        ChoiMatrix::unchecked(self.n, self.m, self.final_state().hermitian().clone())
            .expect("iterates keep the block structure")
    }
}

/// `‖tr_first ρ − P‖_F² + ‖tr_second ρ − Q‖_F²`.
pub fn marginal_residual(rho: &HermitianMatrix, n: usize, m: usize, targets: &Targets) -> Result<f64> {
    let first = partial_trace_hermitian(rho, n, m, Subsystem::First)?.sub(targets.p()).frobenius();
    let second = partial_trace_hermitian(rho, n, m, Subsystem::Second)?.sub(targets.q()).frobenius();
    Ok(first * first + second * second)
}

fn pd_power(a: &HermitianMatrix, t: f64) -> Result<HermitianMatrix> {
    let eig = herm_eig(a)?;
    eig.require_positive_definite()?;
    spectral_function(&eig, MatrixFunction::Power(t))
}

/// One operator Sinkhorn step onto `constraint`.
///
/// For the first marginal, `L = (tr_first ρ)^{-1} # P` and the result is
/// `(I_n ⊗ L) ρ (I_n ⊗ L)`; for the second, `R = (tr_second ρ)^{-1} # Q` and
/// `(R ⊗ I_m) ρ (R ⊗ I_m)`. Returns the new state and the factor.
pub fn operator_sinkhorn_step(
    rho: &DensityMatrix,
    constraint: &ConstraintSet,
) -> Result<(DensityMatrix, HermitianMatrix)> {
    let (n, m) = constraint.dims();
    if rho.dim() != n * m {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} for {n}x{m} blocks",
            rho.dim()
        )));
    }
    let marginal = constraint.marginal(rho)?;
    let target = constraint.target();
    let d = target.dim();
    let factor = if *target == uniform_target(d) {
        pd_power(&marginal, -0.5)?.scaled(1.0 / (d as f64).sqrt())
    } else {
        geometric_mean(&pd_power(&marginal, -1.0)?, target)?
    };
    let big = embed(factor.as_matrix(), n, m, constraint.side());
    let next = DensityMatrix::normalized(rho.congruence(&big))?;
    Ok((next, factor))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub state: DensityMatrix,
    pub dual: HermitianMatrix,
    pub iterations: usize,
    pub gradient_norm: f64,
}

struct BkmPoint {
    value: f64,
    state: HermitianMatrix,
    gradient: HermitianMatrix,
}

/// Dual of the Umegaki projection:
/// `F(A) = log tr exp(log ρ0 + I ⊗ A) − tr(P A)` (or `A ⊗ I`), with gradient
/// `tr_side ρ(A) − P` where `ρ(A) = exp(log ρ0 + I ⊗ A) / tr`.
fn bkm_dual(log_rho0: &HermitianMatrix, constraint: &ConstraintSet, a: &HermitianMatrix) -> Result<BkmPoint> {
    let (n, m) = constraint.dims();
    let h = HermitianMatrix::symmetrize(log_rho0.as_matrix() + embed(a.as_matrix(), n, m, constraint.side()));
    let eig = herm_eig(&h)?;
    let top = eig.max_eigenvalue();
    let z: f64 = eig.eigenvalues.iter().map(|&mu| (mu - top).exp()).sum();
    let state = eig.map(|mu| (mu - top).exp() / z);
    let value = top + z.ln() - constraint.target().inner(a);
    let gradient = constraint.marginal(&state)?.sub(constraint.target());
    Ok(BkmPoint { value, state, gradient })
}

fn remove_trace(a: &HermitianMatrix) -> HermitianMatrix {
    a.shifted(-a.real_trace() / a.dim() as f64)
}

/// Value and gradient of the BKM dual at `a`, exposed for checking.
pub fn bkm_dual_objective(
    rho0: &DensityMatrix,
    constraint: &ConstraintSet,
    a: &HermitianMatrix,
) -> Result<(f64, HermitianMatrix)> {
    let log_rho0 = spectral_function(&herm_eig(rho0)?, MatrixFunction::Log)?;
    let p = bkm_dual(&log_rho0, constraint, a)?;
    Ok((p.value, p.gradient))
}

fn rounding_slack(value: f64) -> f64 {
    16.0 * f64::EPSILON * (1.0 + value.abs())
}

/// `argmin_{ρ ∈ Π} D_U(ρ ‖ ρ0)` by Barzilai–Borwein gradient descent with
/// backtracking on the dual.
pub fn bkm_e_projection(rho0: &DensityMatrix, constraint: &ConstraintSet) -> Result<Projection> {
    bkm_e_projection_with(rho0, constraint, &SolverOptions::bkm())
}

pub fn bkm_e_projection_with(
    rho0: &DensityMatrix,
    constraint: &ConstraintSet,
    opts: &SolverOptions,
) -> Result<Projection> {
    check_state_dims(rho0, constraint)?;
    let eig0 = herm_eig(rho0)?;
    eig0.require_positive_definite()?;
    let log_rho0 = spectral_function(&eig0, MatrixFunction::Log)?;
    let d = constraint.target().dim();
    let mut a = HermitianMatrix::zeros(d);
    let mut point = bkm_dual(&log_rho0, constraint, &a)?;
    let mut alpha = 1.0;
    for it in 0..opts.max_iters {
        let gnorm = point.gradient.frobenius();
        if gnorm <= opts.gradient_tol {
            return finish_bkm(point, a, it, gnorm);
        }
        let mut step = alpha;
        let accepted = loop {
            let trial_a = remove_trace(&a.sub(&point.gradient.scaled(step)));
            let trial = bkm_dual(&log_rho0, constraint, &trial_a)?;
            if trial.value <= point.value - 1e-4 * step * gnorm * gnorm + rounding_slack(point.value) {
                break Some((trial_a, trial));
            }
            step *= 0.5;
            if step < 1e-12 {
                break None;
            }
        };
        let Some((next_a, next)) = accepted else {
            return stalled_bkm(point, a, it, gnorm, opts);
        };
        let s = next_a.sub(&a);
        let y = next.gradient.sub(&point.gradient);
        let sy = s.inner(&y);
        alpha = if sy > 0.0 { (s.inner(&s) / sy).clamp(1e-6, 1e6) } else { 1.0 };
        a = next_a;
        point = next;
    }
    let gnorm = point.gradient.frobenius();
    stalled_bkm(point, a, opts.max_iters, gnorm, opts)
}

fn finish_bkm(point: BkmPoint, a: HermitianMatrix, iterations: usize, gradient_norm: f64) -> Result<Projection> {
    Ok(Projection {
        state: DensityMatrix::normalized(point.state)?,
        dual: a,
        iterations,
        gradient_norm,
    })
}

fn stalled_bkm(
    point: BkmPoint,
    a: HermitianMatrix,
    iterations: usize,
    gnorm: f64,
    opts: &SolverOptions,
) -> Result<Projection> {
    if gnorm <= opts.accept_tol {
        finish_bkm(point, a, iterations, gnorm)
    } else {
        Err(Error::Convergence {
            iterations,
            residual: gnorm,
        })
    }
}

fn check_state_dims(rho: &DensityMatrix, constraint: &ConstraintSet) -> Result<()> {
    let (n, m) = constraint.dims();
    if rho.dim() != n * m {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} for {n}x{m} blocks",
            rho.dim()
        )));
    }
    Ok(())
}

struct BurgPoint {
    /// `ψ(A) = −log det(ρ0^{-1} − I ⊗ A) − tr(P A)`.
    value: f64,
    resolvent: HermitianMatrix,
    gradient: HermitianMatrix,
}

/// `None` when `ρ0^{-1} − I ⊗ A` is not positive definite.
fn burg_dual(inv_rho0: &HermitianMatrix, constraint: &ConstraintSet, a: &HermitianMatrix) -> Result<Option<BurgPoint>> {
    let (n, m) = constraint.dims();
    let inner = HermitianMatrix::symmetrize(inv_rho0.as_matrix() - embed(a.as_matrix(), n, m, constraint.side()));
    let eig = herm_eig(&inner)?;
    if !eig.is_positive_definite() {
        return Ok(None);
    }
    let resolvent = spectral_function(&eig, MatrixFunction::Inverse)?;
    let value = -eig.log_det()? - constraint.target().inner(a);
    let gradient = constraint.marginal(&resolvent)?.sub(constraint.target());
    Ok(Some(BurgPoint {
        value,
        resolvent,
        gradient,
    }))
}

/// `argmin_{ρ ∈ Π} D_B(ρ ‖ ρ0)`, which is `(ρ0^{-1} − I ⊗ A)^{-1}` (or
/// `A ⊗ I`) with `A` solving `tr_side (ρ0^{-1} − I ⊗ A)^{-1} = P`. Damped
/// Newton on the convex dual `ψ`.
pub fn burg_e_projection(rho0: &DensityMatrix, constraint: &ConstraintSet) -> Result<Projection> {
    burg_e_projection_with(rho0, constraint, &SolverOptions::burg())
}

pub fn burg_e_projection_with(
    rho0: &DensityMatrix,
    constraint: &ConstraintSet,
    opts: &SolverOptions,
) -> Result<Projection> {
    check_state_dims(rho0, constraint)?;
    let (n, m) = constraint.dims();
    let side = constraint.side();
    let eig0 = herm_eig(rho0)?;
    eig0.require_positive_definite()?;
    let inv_rho0 = spectral_function(&eig0, MatrixFunction::Inverse)?;
    let d = constraint.target().dim();
    let basis = canonical_hermitian_basis(d);
    let mut a = HermitianMatrix::zeros(d);
    let mut point = burg_dual(&inv_rho0, constraint, &a)?.expect("ρ0^{-1} is positive definite");
    for it in 0..opts.max_iters {
        let gnorm = point.gradient.frobenius();
        if gnorm <= opts.gradient_tol {
            return finish_burg(point, a, it, gnorm);
        }
        // Hessian H_kl = tr(B_k tr_side(S (I ⊗ B_l) S))
        let s = point.resolvent.as_matrix();
        let columns: Vec<HermitianMatrix> = basis
            .iter()
            .map(|b| {
                let prod = s * embed(b.as_matrix(), n, m, side) * s;
                partial_trace_hermitian(&HermitianMatrix::symmetrize(prod), n, m, side)
            })
            .collect::<Result<_>>()?;
        let k = basis.len();
        let hess = DMatrix::from_fn(k, k, |r, c| basis[r].inner(&columns[c]));
        let grad = nalgebra::DVector::from_fn(k, |r, _| basis[r].inner(&point.gradient));
        let Some(newton) = hess.clone().cholesky().map(|ch| ch.solve(&(-&grad))) else {
            return stalled_burg(point, a, it, gnorm, opts);
        };
        let direction = basis
            .iter()
            .zip(newton.iter())
            .fold(HermitianMatrix::zeros(d), |acc, (b, &x)| acc.add(&b.scaled(x)));
        let slope = grad.dot(&newton);
        let mut t = 1.0;
        let accepted = loop {
            let trial_a = a.add(&direction.scaled(t));
            if let Some(trial) = burg_dual(&inv_rho0, constraint, &trial_a)? {
                let decrease_ok = trial.value <= point.value + 1e-4 * t * slope + rounding_slack(point.value);
                if decrease_ok || trial.gradient.frobenius() < gnorm {
                    break Some((trial_a, trial));
                }
            }
            t *= 0.5;
            if t < 1e-12 {
                break None;
            }
        };
        let Some((next_a, next)) = accepted else {
            return stalled_burg(point, a, it, gnorm, opts);
        };
        a = next_a;
        point = next;
    }
    let gnorm = point.gradient.frobenius();
    stalled_burg(point, a, opts.max_iters, gnorm, opts)
}

fn finish_burg(point: BurgPoint, a: HermitianMatrix, iterations: usize, gradient_norm: f64) -> Result<Projection> {
    Ok(Projection {
        state: DensityMatrix::normalized(point.resolvent)?,
        dual: a,
        iterations,
        gradient_norm,
    })
}

fn stalled_burg(
    point: BurgPoint,
    a: HermitianMatrix,
    iterations: usize,
    gnorm: f64,
    opts: &SolverOptions,
) -> Result<Projection> {
    if gnorm <= opts.accept_tol {
        finish_burg(point, a, iterations, gnorm)
    } else {
        Err(Error::Convergence {
            iterations,
            residual: gnorm,
        })
    }
}

struct Driver {
    trace: ScalingTrace,
    pi1: ConstraintSet,
    pi2: ConstraintSet,
    cfg: ScalingConfig,
}

impl Driver {
    fn step(&mut self, side: Subsystem) -> Result<()> {
        let constraint = match side {
            Subsystem::First => &self.pi1,
            Subsystem::Second => &self.pi2,
        };
        let rho = self.trace.final_state();
        let (next, factor, inner) = match self.trace.method {
            Method::Sld => {
                let (next, factor) = operator_sinkhorn_step(rho, constraint)?;
                if let Some(acc) = self.trace.capacity_log.as_mut() {
                    *acc += 2.0 / self.trace.n as f64 * herm_eig(&factor)?.log_det()?;
                }
                (next, factor, 0)
            }
            Method::Bkm => {
                let p = bkm_e_projection_with(rho, constraint, &self.cfg.bkm)?;
                (p.state, p.dual, p.iterations)
            }
            Method::Burg => {
                let p = burg_e_projection_with(rho, constraint, &self.cfg.burg)?;
                (p.state, p.dual, p.iterations)
            }
        };
        self.trace.iterates.push(next);
        self.trace.steps.push(StepRecord {
            side,
            factor,
            inner_iterations: inner,
        });
        Ok(())
    }

    fn residual(&self) -> Result<f64> {
        let t = &self.trace;
        marginal_residual(t.final_state(), t.n, t.m, &t.targets)
    }
}

/// Runs `method` from `rho0` (normalized to unit trace; must be positive definite).
pub fn alternating_projections(method: Method, rho0: &ChoiMatrix, cfg: &ScalingConfig) -> Result<ScalingTrace> {
    cfg.validate()?;
    let (n, m) = (rho0.n(), rho0.m());
    let targets = cfg.targets_for(n, m)?;
    let input_trace = rho0.matrix().real_trace();
    let start = DensityMatrix::normalized(rho0.matrix().clone())?;
    let preprocess = method == Method::Sld && !targets.is_uniform();
    let mut driver = Driver {
        pi1: targets.constraint(Subsystem::First, n, m)?,
        pi2: targets.constraint(Subsystem::Second, n, m)?,
        trace: ScalingTrace {
            method,
            n,
            m,
            targets,
            input_trace,
            iterates: vec![start],
            steps: Vec::new(),
            residuals: Vec::new(),
            capacity_log: (method == Method::Sld && n == m).then_some(0.0),
            converged: false,
            tol: cfg.tol,
            preprocessed: preprocess,
        },
        cfg: cfg.clone(),
    };
    if preprocess {
        driver.step(Subsystem::Second)?;
    }
    let mut residual = driver.residual()?;
    driver.trace.residuals.push(residual);
    for _ in 0..cfg.max_iters {
        if cfg.stop_at_tol && residual < cfg.tol {
            break;
        }
        driver.step(Subsystem::First)?;
        driver.step(Subsystem::Second)?;
        residual = driver.residual()?;
        driver.trace.residuals.push(residual);
    }
    driver.trace.converged = residual < cfg.tol;
    Ok(driver.trace)
}

/// Operator Sinkhorn: [`alternating_projections`] with [`Method::Sld`].
pub fn operator_sinkhorn(rho0: &ChoiMatrix, cfg: &ScalingConfig) -> Result<ScalingTrace> {
    alternating_projections(Method::Sld, rho0, cfg)
}

fn check_capacity_trace(trace: &ScalingTrace) -> Result<f64> {
    if trace.n != trace.m {
        return Err(Error::Unsupported(format!(
            "capacity needs square blocks, got n = {} and m = {}",
            trace.n, trace.m
        )));
    }
    if trace.method != Method::Sld || !trace.targets.is_uniform() {
        return Err(Error::Unsupported(
            "capacity is read off operator Sinkhorn runs with uniform targets".into(),
        ));
    }
    if !trace.converged {
        return Err(Error::Convergence {
            iterations: trace.sweeps(),
            residual: trace.final_residual(),
        });
    }
    let log = trace.capacity_log.expect("square operator Sinkhorn runs accumulate the capacity");
    Ok(log - trace.input_trace.ln())
}

/// `−log cap(Φ)` for the map whose Choi matrix started the run, with
/// `cap(Φ) = n · (inf_{X ≻ 0} det Φ(X) / det X)^{1/n}` (equal to one for a
/// doubly stochastic map).
pub fn neg_log_capacity(trace: &ScalingTrace) -> Result<f64> {
    check_capacity_trace(trace)
}

/// `cap(Φ) = exp(−capacity_log)` scaled back by the input trace.
pub fn capacity_from_trace(trace: &ScalingTrace) -> Result<f64> {
    Ok((-check_capacity_trace(trace)?).exp())
}

/// Classical Sinkhorn run on an entrywise positive `m × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalTrace {
    /// `iterates[0]` is the input; one entry per half-step after it.
    pub iterates: Vec<DMatrix<f64>>,
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl ClassicalTrace {
    pub fn final_matrix(&self) -> &DMatrix<f64> {
        self.iterates.last().expect("a trace always holds the input")
    }
}

/// `‖A1 − 1/m‖² + ‖Aᵀ1 − 1/n‖²`.
pub fn classical_residual(a: &DMatrix<f64>) -> f64 {
    let (m, n) = a.shape();
    let rows: f64 = a.row_iter().map(|r| (r.sum() - 1.0 / m as f64).powi(2)).sum();
    let cols: f64 = a.column_iter().map(|c| (c.sum() - 1.0 / n as f64).powi(2)).sum();
    rows + cols
}

/// `A ← (1/m) Diag(A1)^{-1} A`.
pub fn row_normalize(a: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows() as f64;
    let mut out = a.clone();
    for mut row in out.row_iter_mut() {
        let s = row.sum();
        row /= m * s;
    }
    out
}

/// `A ← (1/n) A Diag(Aᵀ1)^{-1}`.
pub fn column_normalize(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols() as f64;
    let mut out = a.clone();
    for mut col in out.column_iter_mut() {
        let s = col.sum();
        col /= n * s;
    }
    out
}

/// Alternating row and column normalization. Only uniform marginals are
/// supported.
pub fn matrix_sinkhorn(a0: &DMatrix<f64>, cfg: &ScalingConfig) -> Result<ClassicalTrace> {
    cfg.validate()?;
    if cfg.targets.is_some() {
        return Err(Error::Unsupported("classical Sinkhorn with non-uniform marginals".into()));
    }
    if a0.is_empty() || a0.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidInput("classical Sinkhorn needs an entrywise positive matrix".into()));
    }
    let mut trace = ClassicalTrace {
        iterates: vec![a0.clone()],
        residuals: vec![classical_residual(a0)],
        converged: false,
    };
    let mut residual = trace.residuals[0];
    for _ in 0..cfg.max_iters {
        if cfg.stop_at_tol && residual < cfg.tol {
            break;
        }
        let rows = row_normalize(trace.final_matrix());
        let cols = column_normalize(&rows);
        residual = classical_residual(&cols);
        trace.iterates.push(rows);
        trace.iterates.push(cols);
        trace.residuals.push(residual);
    }
    trace.converged = residual < cfg.tol;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{random_density_seeded, Ensemble};
    use crate::fixtures::reference_rho0;
    use crate::geometry::{orthogonality_residual, MetricTag};

    fn choi(rho: &DensityMatrix, n: usize, m: usize) -> ChoiMatrix {
        ChoiMatrix::new(n, m, rho.hermitian().clone()).unwrap()
    }

    fn random_state(n: usize, m: usize, seed: u64) -> DensityMatrix {
        random_density_seeded(n * m, Ensemble::Complex, seed).unwrap()
    }

    #[test]
    fn methods_parse() {
        for method in Method::ALL {
            assert_eq!(method.to_string().parse::<Method>().unwrap(), method);
        }
        assert!(matches!("newton".parse::<Method>(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn targets_validation() {
        assert!(Targets::new(HermitianMatrix::identity(2), uniform_target(2)).is_err());
        let t = Targets::new(uniform_target(2), uniform_target(3)).unwrap();
        assert!(t.is_uniform());
        let cfg = ScalingConfig {
            targets: Some(t),
            ..ScalingConfig::default()
        };
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(matches!(
            operator_sinkhorn(&choi(&rho, 2, 2), &cfg),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn maximally_mixed_is_fixed() {
        let rho = DensityMatrix::maximally_mixed(6);
        let pi1 = ConstraintSet::uniform(Subsystem::First, 2, 3);
        let (next, factor) = operator_sinkhorn_step(&rho, &pi1).unwrap();
        assert!((next.as_matrix() - rho.as_matrix()).norm() < 1e-15);
        assert!((factor.as_matrix() - HermitianMatrix::identity(3).as_matrix()).norm() < 1e-14);
        for method in Method::ALL {
            let trace = alternating_projections(method, &choi(&rho, 2, 3), &ScalingConfig::default()).unwrap();
            assert_eq!(trace.sweeps(), 0);
            assert!(trace.converged);
            assert!(trace.final_residual() < 1e-30);
        }
    }

    #[test]
    fn uniform_factor_matches_geometric_mean() {
        let rho = random_state(2, 3, 1);
        let marg = partial_trace_hermitian(&rho, 2, 3, Subsystem::First).unwrap();
        let via_mean = geometric_mean(&pd_power(&marg, -1.0).unwrap(), &uniform_target(3)).unwrap();
        let closed = pd_power(&marg, -0.5).unwrap().scaled(1.0 / 3f64.sqrt());
        assert!((via_mean.as_matrix() - closed.as_matrix()).norm() < 1e-12);
    }

    #[test]
    fn steps_fix_marginals_exactly() {
        let rho = random_state(2, 3, 2);
        for side in [Subsystem::First, Subsystem::Second] {
            let c = ConstraintSet::uniform(side, 2, 3);
            let (next, _) = operator_sinkhorn_step(&rho, &c).unwrap();
            assert!(c.violation(&next).unwrap() <= 1e-12);
            let general = ConstraintSet::new(side, 2, 3, random_density_seeded(c.target().dim(), Ensemble::Complex, 9).unwrap().into_hermitian()).unwrap();
            let (next, _) = operator_sinkhorn_step(&rho, &general).unwrap();
            assert!(general.violation(&next).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn reference_sinkhorn_runs_two_hundred_sweeps() {
        let trace = operator_sinkhorn(&choi(&reference_rho0(), 2, 2), &ScalingConfig::fixed(200)).unwrap();
        assert_eq!(trace.sweeps(), 200);
        assert_eq!(trace.iterates.len(), 401);
        assert!(trace.converged);
        assert!(trace.residuals.iter().all(|&r| r >= 0.0));
    }

    #[test]
    fn general_marginals_converge() {
        let p = random_density_seeded(2, Ensemble::Complex, 40).unwrap().into_hermitian();
        let q = random_density_seeded(2, Ensemble::Complex, 41).unwrap().into_hermitian();
        let cfg = ScalingConfig {
            targets: Some(Targets::new(p.clone(), q.clone()).unwrap()),
            max_iters: 10_000,
            ..ScalingConfig::default()
        };
        let trace = operator_sinkhorn(&choi(&random_state(2, 2, 42), 2, 2), &cfg).unwrap();
        assert!(trace.preprocessed);
        assert_eq!(trace.steps[0].side, Subsystem::Second);
        assert!(trace.converged);
        let last = trace.final_state();
        let first = partial_trace_hermitian(last, 2, 2, Subsystem::First).unwrap();
        let second = partial_trace_hermitian(last, 2, 2, Subsystem::Second).unwrap();
        assert!(first.sub(&p).frobenius() < 1e-4);
        assert!(second.sub(&q).frobenius() < 1e-4);
        assert!(capacity_from_trace(&trace).is_err());
    }

    #[test]
    fn bkm_projection_is_fixed_on_constraint_set() {
        let rho = DensityMatrix::maximally_mixed(4);
        let c = ConstraintSet::uniform(Subsystem::First, 2, 2);
        let p = bkm_e_projection(&rho, &c).unwrap();
        assert_eq!(p.iterations, 0);
        assert!(p.dual.frobenius() < 1e-15);
        let b = burg_e_projection(&rho, &c).unwrap();
        assert_eq!(b.iterations, 0);
    }

    #[test]
    fn projections_land_in_constraint_and_are_orthogonal() {
        for (n, m) in [(2, 2), (2, 3)] {
            let rho = random_state(n, m, 50);
            for side in [Subsystem::First, Subsystem::Second] {
                let c = ConstraintSet::uniform(side, n, m);
                let bkm = bkm_e_projection(&rho, &c).unwrap();
                assert!(c.violation(&bkm.state).unwrap() < 1e-9);
                assert!(orthogonality_residual(MetricTag::Bkm, &rho, &bkm.state, &c).unwrap() <= 1e-6);
                let burg = burg_e_projection(&rho, &c).unwrap();
                assert!(c.violation(&burg.state).unwrap() < 1e-10);
                assert!(orthogonality_residual(MetricTag::Congruence, &rho, &burg.state, &c).unwrap() <= 1e-6);
            }
        }
    }

    #[test]
    fn bkm_gradient_matches_finite_differences() {
        let rho = random_state(2, 2, 60);
        let c = ConstraintSet::uniform(Subsystem::First, 2, 2);
        let a = HermitianMatrix::symmetrize(crate::linalg::ComplexMatrix::from_fn(2, 2, |i, j| {
            crate::linalg::C64::new(0.3 * (i + 1) as f64, 0.2 * j as f64 - 0.1 * i as f64)
        }));
        let (_, grad) = bkm_dual_objective(&rho, &c, &a).unwrap();
        let eps = 1e-5;
        for b in canonical_hermitian_basis(2) {
            let (fp, _) = bkm_dual_objective(&rho, &c, &a.add(&b.scaled(eps))).unwrap();
            let (fm, _) = bkm_dual_objective(&rho, &c, &a.sub(&b.scaled(eps))).unwrap();
            assert!(((fp - fm) / (2.0 * eps) - grad.inner(&b)).abs() < 1e-6);
        }
    }

    #[test]
    fn capacity_of_uniform_state_is_one() {
        let trace = operator_sinkhorn(&choi(&DensityMatrix::maximally_mixed(4), 2, 2), &ScalingConfig::default()).unwrap();
        assert_eq!(capacity_from_trace(&trace).unwrap(), 1.0);
        let rect = operator_sinkhorn(&choi(&DensityMatrix::maximally_mixed(6), 2, 3), &ScalingConfig::default()).unwrap();
        assert!(matches!(capacity_from_trace(&rect), Err(Error::Unsupported(_))));
        let short = operator_sinkhorn(&choi(&random_state(2, 2, 70), 2, 2), &ScalingConfig::fixed(1)).unwrap();
        assert!(matches!(capacity_from_trace(&short), Err(Error::Convergence { .. })));
        let bkm = alternating_projections(Method::Bkm, &choi(&random_state(2, 2, 70), 2, 2), &ScalingConfig::default()).unwrap();
        assert!(matches!(capacity_from_trace(&bkm), Err(Error::Unsupported(_))));
    }

    #[test]
    fn capacity_scales_with_input_trace() {
        let rho = random_state(2, 2, 71);
        let base = operator_sinkhorn(&choi(&rho, 2, 2), &ScalingConfig::default()).unwrap();
        let doubled = ChoiMatrix::new(2, 2, rho.scaled(2.0)).unwrap();
        let scaled = operator_sinkhorn(&doubled, &ScalingConfig::default()).unwrap();
        let ratio = capacity_from_trace(&scaled).unwrap() / capacity_from_trace(&base).unwrap();
        assert!((ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn classical_sinkhorn_basics() {
        let uniform = DMatrix::from_element(2, 3, 1.0 / 6.0);
        let trace = matrix_sinkhorn(&uniform, &ScalingConfig::default()).unwrap();
        assert_eq!(trace.residuals.len(), 1);
        assert!(trace.converged);
        let a = DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.3, 0.4]);
        let trace = matrix_sinkhorn(&a, &ScalingConfig::default()).unwrap();
        assert!(trace.converged);
        for (k, it) in trace.iterates.iter().enumerate().skip(1).step_by(2) {
            for r in it.row_iter() {
                assert!((r.sum() - 0.5).abs() < 1e-15, "iterate {k}");
            }
        }
        assert!(matrix_sinkhorn(&DMatrix::from_row_slice(1, 2, &[1.0, 0.0]), &ScalingConfig::default()).is_err());
    }

    #[test]
    fn diagonal_step_is_row_normalization() {
        let a = DMatrix::from_row_slice(2, 3, &[0.1, 0.2, 0.05, 0.3, 0.15, 0.2]);
        let c = ChoiMatrix::from_diagonal_matrix(&a).unwrap();
        let rho = c.to_density().unwrap();
        let (next, _) = operator_sinkhorn_step(&rho, &ConstraintSet::uniform(Subsystem::First, 3, 2)).unwrap();
        let embedded = c.with_matrix(next.into_hermitian()).unwrap().diagonal_matrix();
        assert!((embedded - row_normalize(&a)).norm() < 1e-15);
    }
}
