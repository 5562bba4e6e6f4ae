//! Implicit diffusion-reaction solves on the radial grid.

use crate::grid::RadialGrid;

/// Thomas algorithm for `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i`.
///
/// `a[0]` and `c[n-1]` are ignored. Stable without pivoting for the
/// diagonally dominant M-matrices assembled here.
pub fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64]) {
    let n = d.len();
    assert!(n >= 1 && a.len() == n && b.len() == n && c.len() == n);
    let mut cp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    d[0] /= b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        d[i] = (d[i] - a[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= cp[i] * d[i + 1];
    }
}

/// Solves `(1 + decay) x - diffusion · Δ x = rhs` in place, with the
/// no-flux closure of [`RadialGrid::laplacian_slice`].
pub fn solve_shifted_laplacian(grid: &RadialGrid, diffusion: f64, decay: f64, rhs: &mut [f64]) {
    let n = grid.cells();
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut c = vec![0.0; n];
    for i in 0..n {
        let (lo, up) = grid.laplacian_coefficients(i);
        a[i] = -diffusion * lo;
        c[i] = -diffusion * up;
        b[i] = 1.0 + decay + diffusion * (lo + up);
    }
    solve_tridiagonal(&a, &b, &c, rhs);
}
