#![allow(dead_code)]

use opscaling::channels::{random_density, seeded_rng, Ensemble};
use opscaling::{ChoiMatrix, ComplexMatrix, DensityMatrix, HermitianMatrix, C64};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> HermitianMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    HermitianMatrix::symmetrize(g)
}

pub fn random_pd<R: Rng>(d: usize, rng: &mut R) -> HermitianMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    HermitianMatrix::symmetrize(&g * g.adjoint()).shifted(0.1)
}

pub fn random_state(n: usize, m: usize, seed: u64) -> DensityMatrix {
    let mut rng = seeded_rng(seed);
    random_density(n * m, Ensemble::Complex, &mut rng).unwrap()
}

pub fn choi_of(rho: &DensityMatrix, n: usize, m: usize) -> ChoiMatrix {
    ChoiMatrix::new(n, m, rho.hermitian().clone()).unwrap()
}

pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
