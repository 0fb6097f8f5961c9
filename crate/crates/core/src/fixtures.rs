//! Built-in reference instance.

use crate::channels::DensityMatrix;
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64};

const RHO0_RE: [[f64; 4]; 4] = [
    [0.2703, 0.0136, 0.0567, 0.1015],
    [0.0136, 0.3054, 0.1197, -0.0880],
    [0.0567, 0.1197, 0.2162, 0.0938],
    [0.1015, -0.0880, 0.0938, 0.2081],
];

const RHO0_IM: [[f64; 4]; 4] = [
    [0.0, 0.1050, -0.0746, -0.0678],
    [-0.1050, 0.0, -0.0485, -0.0650],
    [0.0746, 0.0485, 0.0, -0.0463],
    [0.0678, 0.0650, 0.0463, 0.0],
];

/// The 4×4 reference state (a 2⊗2 Choi matrix), given to four decimals.
pub fn reference_rho0() -> DensityMatrix {
    let m = ComplexMatrix::from_fn(4, 4, |i, j| C64::new(RHO0_RE[i][j], RHO0_IM[i][j]));
    DensityMatrix::normalized(HermitianMatrix::new(m).expect("reference state is Hermitian"))
        .expect("reference state is a density matrix")
}

/// Diagonal part of [`reference_rho0`], renormalized (the classical case).
pub fn reference_rho0_diagonal() -> DensityMatrix {
    let d: Vec<f64> = (0..4).map(|i| RHO0_RE[i][i]).collect();
    DensityMatrix::normalized(HermitianMatrix::from_real_diagonal(&d)).expect("positive diagonal")
}
