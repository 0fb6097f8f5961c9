mod common;

use common::{max_abs, random_hermitian, random_pd};
use opscaling::channels::seeded_rng;
use opscaling::divergences::{divergence, DivergenceTag};
use opscaling::geometry::{e_rep, MetricTag};
use opscaling::linalg::{
    geometric_mean, herm_eig, matrix_function, partial_trace, solve_lyapunov, MatrixFunction,
};
use opscaling::{ChoiMatrix, ComplexMatrix, HermitianMatrix, Subsystem, C64};
use opscaling_oracles::{lyapunov_quadrature, lyapunov_vectorized};
use proptest::prelude::*;

fn pd_inverse(a: &HermitianMatrix) -> HermitianMatrix {
    matrix_function(a, MatrixFunction::Inverse).unwrap()
}

#[test]
fn lyapunov_matches_vectorized_solve() {
    let mut rng = seeded_rng(11);
    for d in 1..=4 {
        for _ in 0..25 {
            let a = random_pd(d, &mut rng);
            let q = random_hermitian(d, &mut rng);
            let x = solve_lyapunov(&a, &q).unwrap();
            let reference = lyapunov_vectorized(a.as_matrix(), q.as_matrix());
            let gap = max_abs(&(x.as_matrix() - &reference));
            assert!(gap <= 1e-9, "d = {d}: gap {gap:e}");
        }
    }
}

#[test]
fn lyapunov_matches_quadrature() {
    let mut rng = seeded_rng(12);
    for d in 1..=3 {
        let a = random_pd(d, &mut rng).shifted(0.5);
        let q = random_hermitian(d, &mut rng);
        let x = solve_lyapunov(&a, &q).unwrap();
        let reference = lyapunov_quadrature(a.as_matrix(), q.as_matrix(), 1e-10);
        let gap = max_abs(&(x.as_matrix() - &reference));
        assert!(gap <= 1e-6, "d = {d}: gap {gap:e}");
    }
}

#[test]
fn sld_e_rep_matches_quadrature() {
    let mut rng = seeded_rng(13);
    let rho = random_pd(3, &mut rng).shifted(1.0);
    let rho = rho.scaled(1.0 / rho.real_trace());
    let x = random_hermitian(3, &mut rng);
    let l = e_rep(MetricTag::Sld, &herm_eig(&rho).unwrap(), &x).unwrap();
    let two_x = x.scaled(2.0);
    let reference = lyapunov_quadrature(rho.as_matrix(), two_x.as_matrix(), 1e-10);
    let gap = max_abs(&(l.as_matrix() - &reference));
    assert!(gap <= 1e-6, "gap {gap:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_mapping(seed in any::<u64>(), d in 1usize..5) {
        let mut rng = seeded_rng(seed);
        let a = random_pd(d, &mut rng);
        let mut expected: Vec<f64> = herm_eig(&a).unwrap().eigenvalues.iter().map(|x| x.ln()).collect();
        let mut got = herm_eig(&matrix_function(&a, MatrixFunction::Log).unwrap()).unwrap().eigenvalues;
        expected.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        for (x, y) in expected.iter().zip(&got) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()));
        }
        let back = matrix_function(&matrix_function(&a, MatrixFunction::Log).unwrap(), MatrixFunction::Exp).unwrap();
        prop_assert!(back.sub(&a).frobenius() <= 1e-10 * (1.0 + a.frobenius()));
    }

    #[test]
    fn geometric_mean_symmetry_and_riccati(seed in any::<u64>(), d in 1usize..5) {
        let mut rng = seeded_rng(seed);
        let a = random_pd(d, &mut rng);
        let b = random_pd(d, &mut rng);
        let ab = geometric_mean(&a, &b).unwrap();
        let ba = geometric_mean(&b, &a).unwrap();
        let scale = 1.0 + ab.frobenius();
        prop_assert!(ab.sub(&ba).frobenius() <= 1e-9 * scale);
        let riccati = ab.as_matrix() * pd_inverse(&a).as_matrix() * ab.as_matrix() - b.as_matrix();
        prop_assert!(riccati.norm() <= 1e-9 * (1.0 + b.frobenius()));
    }

    #[test]
    fn partial_trace_is_linear(seed in any::<u64>(), n in 1usize..4, m in 1usize..4, s in -3.0f64..3.0) {
        let mut rng = seeded_rng(seed);
        let x = random_hermitian(n * m, &mut rng);
        let y = random_hermitian(n * m, &mut rng);
        let combo = x.as_matrix() * C64::new(s, 0.0) + y.as_matrix();
        for side in [Subsystem::First, Subsystem::Second] {
            let lhs = partial_trace(&combo, n, m, side).unwrap();
            let rhs = partial_trace(x.as_matrix(), n, m, side).unwrap() * C64::new(s, 0.0)
                + partial_trace(y.as_matrix(), n, m, side).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + combo.norm()));
        }
    }

    #[test]
    fn scaling_composes(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
        let mut rng = seeded_rng(seed);
        let choi = ChoiMatrix::new(n, m, random_pd(n * m, &mut rng)).unwrap();
        let general = |d: usize, rng: &mut rand_chacha::ChaCha8Rng| -> ComplexMatrix {
            random_hermitian(d, rng).as_matrix() + random_hermitian(d, rng).as_matrix() * C64::new(0.0, 1.0)
        };
        let (l1, l2) = (general(m, &mut rng), general(m, &mut rng));
        let (r1, r2) = (general(n, &mut rng), general(n, &mut rng));
        let twice = choi.scale(&l1, &r1).unwrap().scale(&l2, &r2).unwrap();
        let once = choi.scale(&(&l2 * &l1), &(&r1 * &r2)).unwrap();
        let gap = twice.matrix().sub(once.matrix()).frobenius();
        prop_assert!(gap <= 1e-10 * (1.0 + once.matrix().frobenius()), "gap {}", gap);
    }

    #[test]
    fn divergences_are_nonnegative(seed in any::<u64>(), d in 1usize..5) {
        let mut rng = seeded_rng(seed);
        let rho = random_pd(d, &mut rng);
        let sigma = random_pd(d, &mut rng);
        let rho = rho.scaled(1.0 / rho.real_trace());
        let sigma = sigma.scaled(1.0 / sigma.real_trace());
        for tag in DivergenceTag::ALL {
            if tag == DivergenceTag::Kl {
                continue;
            }
            let value = divergence(tag, &rho, &sigma).unwrap();
            prop_assert!(value >= -1e-10, "{} gave {}", tag, value);
        }
    }
}
