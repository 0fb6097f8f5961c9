//! Slow, independent reference computations for testing `opscaling`.
//!
//! Nothing here shares code with the library: matrices are plain nalgebra
//! values and every routine takes the most direct (not the fastest) route.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;

pub mod reference;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Solves `AX + XA = Q` through the `d² × d²` system
/// `(I ⊗ A + Aᵀ ⊗ I) vec(X) = vec(Q)` with column-major `vec`.
pub fn lyapunov_vectorized(a: &CMat, q: &CMat) -> CMat {
    let d = a.nrows();
    let id = CMat::identity(d, d);
    let system = id.kronecker(a) + a.transpose().kronecker(&id);
    let rhs = DVector::from_column_slice(q.as_slice());
    let x = system.lu().solve(&rhs).expect("Kronecker sum of a positive definite matrix is invertible");
    CMat::from_column_slice(d, d, x.as_slice())
}

/// `∫₀^∞ e^{−tA} Q e^{−tA} dt` by adaptive Simpson quadrature after the
/// substitution `t = s / (1 − s)`.
pub fn lyapunov_quadrature(a: &CMat, q: &CMat, tol: f64) -> CMat {
    let d = a.nrows();
    let integrand = |s: f64| -> CMat {
        if s >= 1.0 {
            return CMat::zeros(d, d);
        }
        let t = s / (1.0 - s);
        let e = (a * c(-t)).exp();
        (&e * q * &e) * c(1.0 / ((1.0 - s) * (1.0 - s)))
    };
    let (fa, fm, fb) = (integrand(0.0), integrand(0.5), integrand(1.0));
    let whole = simpson(&fa, &fm, &fb, 1.0);
    adaptive_simpson(&integrand, 0.0, 1.0, fa, fm, fb, whole, tol, 50)
}

fn simpson(fa: &CMat, fm: &CMat, fb: &CMat, width: f64) -> CMat {
    (fa + fm * c(4.0) + fb) * c(width / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson<F: Fn(f64) -> CMat>(
    f: &F,
    a: f64,
    b: f64,
    fa: CMat,
    fm: CMat,
    fb: CMat,
    whole: CMat,
    tol: f64,
    depth: usize,
) -> CMat {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(&fa, &flm, &fm, m - a);
    let right = simpson(&fm, &frm, &fb, b - m);
    let delta = &left + &right - &whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta * c(1.0 / 15.0);
    }
    adaptive_simpson(f, a, m, fa, flm, fm.clone(), left, tol / 2.0, depth - 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// `Φ(X) = Σ_ij X_ij C_(i,j)` for a Choi matrix with `n × n` blocks of size `m`.
pub fn choi_apply(choi: &CMat, n: usize, m: usize, x: &CMat) -> CMat {
    let mut out = CMat::zeros(m, m);
    for i in 0..n {
        for j in 0..n {
            out += choi.view((i * m, j * m), (m, m)) * x[(i, j)];
        }
    }
    out
}

/// `Φ*(Y)_ij = tr(Y C_(j,i))`.
pub fn choi_apply_dual(choi: &CMat, n: usize, m: usize, y: &CMat) -> CMat {
    CMat::from_fn(n, n, |i, j| (y * choi.view((j * m, i * m), (m, m))).trace())
}

fn hermitian_log_det(a: &CMat) -> Option<f64> {
    let h = (a + a.adjoint()) * c(0.5);
    let chol = h.cholesky()?;
    Some(chol.l().diagonal().iter().map(|z| 2.0 * z.re.ln()).sum())
}

fn hermitian_inverse(a: &CMat) -> CMat {
    let h = (a + a.adjoint()) * c(0.5);
    let inv = h.cholesky().expect("positive definite").inverse();
    (&inv + inv.adjoint()) * c(0.5)
}

fn lower(t: &CMat) -> CMat {
    CMat::from_fn(t.nrows(), t.ncols(), |i, j| if j <= i { t[(i, j)] } else { c(0.0) })
}

/// `log det Φ(TT†) − log det(TT†)`, `None` outside the domain.
fn capacity_objective(choi: &CMat, n: usize, t: &CMat) -> Option<f64> {
    let x = t * t.adjoint();
    Some(hermitian_log_det(&choi_apply(choi, n, n, &x))? - hermitian_log_det(&x)?)
}

/// `inf_{X ≻ 0} det Φ(X) / det X` for a square-block Choi matrix, by
/// Barzilai–Borwein gradient descent over lower-triangular factors
/// `X = TT†` with random restarts. Returns the smallest value found.
pub fn capacity_brute_force<R: Rng>(choi: &CMat, n: usize, restarts: usize, rng: &mut R) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..restarts.max(1) {
        let mut t = lower(&CMat::from_fn(n, n, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        }));
        for i in 0..n {
            t[(i, i)] = c(t[(i, i)].norm() + 0.5);
        }
        let Some(mut f) = capacity_objective(choi, n, &t) else { continue };
        let grad = |t: &CMat| -> CMat {
            let x = t * t.adjoint();
            let y = hermitian_inverse(&choi_apply(choi, n, n, &x));
            let g = choi_apply_dual(choi, n, n, &y) - hermitian_inverse(&x);
            lower(&((g * t) * c(2.0)))
        };
        let mut g = grad(&t);
        let mut alpha = 1e-2;
        for _ in 0..20_000 {
            let gn2 = g.norm_squared();
            if gn2.sqrt() < 1e-13 {
                break;
            }
            let mut step = alpha;
            let mut moved = None;
            while step > 1e-18 {
                let trial = &t - &g * c(step);
                if let Some(ft) = capacity_objective(choi, n, &trial) {
                    if ft <= f - 1e-4 * step * gn2 + 1e-15 * (1.0 + f.abs()) {
                        moved = Some((trial, ft));
                        break;
                    }
                }
                step *= 0.5;
            }
            let Some((next, fnext)) = moved else { break };
            let gnext = grad(&next);
            let s = &next - &t;
            let yv = &gnext - &g;
            let sy: f64 = s.iter().zip(yv.iter()).map(|(a, b)| (a.conj() * b).re).sum();
            alpha = if sy > 0.0 { (s.norm_squared() / sy).clamp(1e-8, 1e4) } else { 1e-2 };
            t = next;
            f = fnext;
            g = gnext;
        }
        best = best.min(f.exp());
    }
    best
}

/// Row/column sum constraints for a flattened (row-major) `m × n` matrix.
fn marginal_constraints(m: usize, n: usize, columns: bool) -> (DMatrix<f64>, DVector<f64>) {
    let rows = m + if columns { n } else { 0 };
    let mut a = DMatrix::zeros(rows, m * n);
    let mut b = DVector::zeros(rows);
    for i in 0..m {
        for j in 0..n {
            a[(i, i * n + j)] = 1.0;
        }
        b[i] = 1.0 / m as f64;
    }
    if columns {
        for j in 0..n {
            for i in 0..m {
                a[(m + j, i * n + j)] = 1.0;
            }
            b[m + j] = 1.0 / n as f64;
        }
    }
    (a, b)
}

/// `min Σ b log(b/a)` over entrywise positive `B` with rows summing to `1/m`
/// (and columns to `1/n` when `columns`), by Newton's method on a null-space
/// parameterization. Returns the minimizer and the minimum.
pub fn kl_projection(a: &DMatrix<f64>, columns: bool) -> (DMatrix<f64>, f64) {
    let (m, n) = a.shape();
    let (cons, rhs) = marginal_constraints(m, n, columns);
    let gram = cons.transpose() * &cons;
    let eig = nalgebra::SymmetricEigen::new(gram);
    let kernel: Vec<usize> = (0..m * n).filter(|&k| eig.eigenvalues[k].abs() < 1e-10).collect();
    let null = DMatrix::from_fn(m * n, kernel.len(), |r, k| eig.eigenvectors[(r, kernel[k])]);
    let a_flat = DVector::from_iterator(m * n, (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| a[(i, j)]));
    let mut b = DVector::from_element(m * n, 1.0 / (m * n) as f64);
    debug_assert!((&cons * &b - &rhs).norm() < 1e-12);
    let objective = |b: &DVector<f64>| b.iter().zip(a_flat.iter()).map(|(x, y)| x * (x / y).ln()).sum::<f64>();
    for _ in 0..200 {
        let grad_full = DVector::from_iterator(m * n, b.iter().zip(a_flat.iter()).map(|(x, y)| (x / y).ln() + 1.0));
        let grad = null.transpose() * &grad_full;
        if grad.norm() < 1e-14 {
            break;
        }
        let hess = null.transpose() * DMatrix::from_diagonal(&b.map(|x| 1.0 / x)) * &null;
        let dz = hess.cholesky().expect("KL Hessian is positive definite").solve(&(-&grad));
        let db = &null * &dz;
        let mut t = 1.0;
        while b.iter().zip(db.iter()).any(|(x, d)| x + t * d <= 0.0) {
            t *= 0.5;
        }
        let f0 = objective(&b);
        while t > 1e-16 && objective(&(&b + &db * t)) > f0 + 1e-4 * t * grad.dot(&dz) + 1e-16 {
            t *= 0.5;
        }
        b += db * t;
    }
    let value = objective(&b);
    (DMatrix::from_row_slice(m, n, b.as_slice()), value)
}

/// Classical Sinkhorn half-steps for an entrywise positive `m × n` matrix:
/// rows to `1/m`, then columns to `1/n`, for `sweeps` sweeps.
pub fn classical_sinkhorn_iterates(a: &DMatrix<f64>, sweeps: usize) -> Vec<DMatrix<f64>> {
    let (m, n) = a.shape();
    let mut out = vec![a.clone()];
    let mut cur = a.clone();
    for _ in 0..sweeps {
        for i in 0..m {
            let s: f64 = (0..n).map(|j| cur[(i, j)]).sum();
            for j in 0..n {
                cur[(i, j)] /= m as f64 * s;
            }
        }
        out.push(cur.clone());
        for j in 0..n {
            let s: f64 = (0..m).map(|i| cur[(i, j)]).sum();
            for i in 0..m {
                cur[(i, j)] /= n as f64 * s;
            }
        }
        out.push(cur.clone());
    }
    out
}
