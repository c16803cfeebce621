//! Matrix exponential helpers for small generators.

use nalgebra::{DMatrix, DVector};

/// Matrix exponential by scaling-and-squaring with Pade approximation
/// (nalgebra's implementation, accurate to ~1e-13 for the small, well
/// conditioned generators used here; s <= 32 supported).
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().exp()
}

/// exp(m t) v.
pub fn expm_apply(m: &DMatrix<f64>, t: f64, v: &DVector<f64>) -> DVector<f64> {
    expm(&(m * t)) * v
}

/// Integral of the matrix exponential: J(t) = \int_0^t exp(m s) ds, computed
/// from the block identity exp([[m, I], [0, 0]] t) = [[exp(mt), J(t)], [0, I]].
pub fn expm_integral(m: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(m * t));
    block
        .view_mut((0, n), (n, n))
        .copy_from(&(DMatrix::identity(n, n) * t));
    let e = expm(&block);
    e.view((0, n), (n, n)).into_owned()
}
