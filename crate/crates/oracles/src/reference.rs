//! Expected 4×4 outputs for the built-in reference input, to four decimals,
//! as `(re, im)` entries.

pub type Expected = [[(f64, f64); 4]; 4];

pub const SLD_OUTPUT: Expected = [
    [(0.2386, 0.0), (-0.0545, 0.0790), (0.0803, -0.0070), (0.1130, -0.0568)],
    [(-0.0545, -0.0790), (0.2614, 0.0), (0.1484, -0.0409), (-0.0803, 0.0070)],
    [(0.0803, 0.0070), (0.1484, 0.0409), (0.2614, 0.0), (0.0545, -0.0790)],
    [(0.1130, 0.0568), (-0.0803, -0.0070), (0.0545, 0.0790), (0.2386, 0.0)],
];

pub const BKM_OUTPUT: Expected = [
    [(0.2363, 0.0), (-0.0601, 0.0694), (0.0700, -0.0039), (0.1215, -0.0405)],
    [(-0.0601, -0.0694), (0.2637, 0.0), (0.1535, -0.0279), (-0.0700, 0.0039)],
    [(0.0700, 0.0039), (0.1535, 0.0279), (0.2637, 0.0), (0.0601, -0.0694)],
    [(0.1215, 0.0405), (-0.0700, -0.0039), (0.0601, 0.0694), (0.2363, 0.0)],
];

pub const BURG_OUTPUT: Expected = [
    [(0.2154, 0.0), (-0.0861, 0.0094), (0.0126, -0.0150), (0.1484, 0.0278)],
    [(-0.0861, -0.0094), (0.2846, 0.0), (0.2196, 0.0537), (-0.0126, 0.0150)],
    [(0.0126, 0.0150), (0.2196, -0.0537), (0.2853, 0.0), (0.0918, -0.0096)],
    [(0.1484, -0.0278), (-0.0126, -0.0150), (0.0918, 0.0096), (0.2147, 0.0)],
];

/// Largest entrywise modulus of the difference between `m` and `expected`.
pub fn max_entry_gap(m: &crate::CMat, expected: &Expected) -> f64 {
    let mut worst = 0.0f64;
    for (i, row) in expected.iter().enumerate() {
        for (j, &(re, im)) in row.iter().enumerate() {
            worst = worst.max((m[(i, j)] - num_complex::Complex64::new(re, im)).norm());
        }
    }
    worst
}
