//! Continuous algebraic Riccati equation by the matrix sign function.
//!
//! For `AᵀP + PA − PBR⁻¹BᵀP + Q = 0` the Hamiltonian
//! `H = [[A, −BR⁻¹Bᵀ], [−Q, −Aᵀ]]` is iterated with Newton's scheme
//! `Z ← ½(Z + Z⁻¹)` until it reaches `W = sign(H)`. The stabilizing solution
//! spans the stable invariant subspace `ker(W + I) = range([I; P])`, so `P`
//! is the least-squares solution of `[W₁₂; W₂₂ + I]·P = −[W₁₁ + I; W₂₁]`.

use alloc::format;

use nalgebra::DMatrix;

use crate::{Error, Result};

pub const MAX_ITERATIONS: usize = 100;
pub const TOLERANCE: f64 = 1e-12;

/// Solves the CARE for the stabilizing, positive semidefinite `P`.
///
/// `a` is n×n, `b` n×m, `q` n×n symmetric PSD and `r` m×m symmetric
/// positive definite.
pub fn care_solve(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let m = b.ncols();
    if a.ncols() != n || b.nrows() != n || q.shape() != (n, n) || r.shape() != (m, m) {
        return Err(Error::RiccatiFailed(
            "inconsistent matrix dimensions".into(),
        ));
    }
    if [a, b, q, r]
        .iter()
        .any(|mat| mat.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::NonFinite("care_solve"));
    }
    let r_inv = r
        .clone()
        .cholesky()
        .ok_or_else(|| Error::RiccatiFailed("R is not positive definite".into()))?
        .inverse();
    let g = b * r_inv * b.transpose();

    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-&g));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));

    let w = matrix_sign(h)?;

    let identity = DMatrix::<f64>::identity(n, n);
    let mut lhs = DMatrix::zeros(2 * n, n);
    lhs.view_mut((0, 0), (n, n))
        .copy_from(&w.view((0, n), (n, n)));
    lhs.view_mut((n, 0), (n, n))
        .copy_from(&(w.view((n, n), (n, n)) + &identity));
    let mut rhs = DMatrix::zeros(2 * n, n);
    rhs.view_mut((0, 0), (n, n))
        .copy_from(&(-(w.view((0, 0), (n, n)) + &identity)));
    rhs.view_mut((n, 0), (n, n))
        .copy_from(&(-w.view((n, 0), (n, n))));

    let p = lhs
        .clone()
        .svd(true, true)
        .solve(&rhs, f64::EPSILON * (2 * n) as f64)
        .map_err(|e| Error::RiccatiFailed(format!("subspace extraction: {e}")))?;
    // The stable subspace must be a graph [I; P]; otherwise the pair is not stabilizable.
    if (&lhs * &p - &rhs).norm() > 1e-6 * rhs.norm().max(1.0) {
        return Err(Error::RiccatiFailed(
            "stable subspace is not a graph over the state; (A, B) is not stabilizable".into(),
        ));
    }
    let p = (&p + p.transpose()) * 0.5;

    let eig = p.clone().symmetric_eigen();
    let scale = p.norm().max(1.0);
    if eig.eigenvalues.iter().any(|&l| l < -1e-9 * scale) {
        return Err(Error::RiccatiFailed(
            "extracted P is indefinite; (A, B) is probably not stabilizable".into(),
        ));
    }
    let abscissa = (a - &g * &p)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if abscissa >= 0.0 {
        return Err(Error::RiccatiFailed(
            "closed loop A − BR⁻¹BᵀP is not Hurwitz".into(),
        ));
    }
    Ok(p)
}

/// Newton iteration for sign(H).
fn matrix_sign(h: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut z = h;
    for _ in 0..MAX_ITERATIONS {
        let inv = z.clone().try_inverse().ok_or_else(|| {
            Error::RiccatiFailed("Hamiltonian has eigenvalues on the imaginary axis".into())
        })?;
        let next = (&z + inv) * 0.5;
        let delta = (&next - &z).norm();
        z = next;
        if !delta.is_finite() {
            break;
        }
        // Relative test: ‖Z‖ grows with ‖H‖ and rounding stalls an absolute one.
        if delta < TOLERANCE * z.norm().max(1.0) {
            return Ok(z);
        }
    }
    Err(Error::RiccatiNoConvergence {
        iterations: MAX_ITERATIONS,
    })
}

/// Frobenius norm of the CARE residual.
pub fn care_residual(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> f64 {
    let r_inv = r
        .clone()
        .try_inverse()
        .unwrap_or_else(|| DMatrix::from_element(1, 1, f64::NAN));
    let res = a.transpose() * p + p * a - p * b * r_inv * b.transpose() * p + q;
    res.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scalar(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    #[test]
    fn scalar_integrator() {
        let p = care_solve(&scalar(0.0), &scalar(1.0), &scalar(1.0), &scalar(1.0)).unwrap();
        assert_relative_eq!(p[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn scalar_unstable_without_state_cost() {
        // p² − 2p = 0; p = 2 is the root with 1 − p < 0.
        let p = care_solve(&scalar(1.0), &scalar(1.0), &scalar(0.0), &scalar(1.0)).unwrap();
        assert_relative_eq!(p[(0, 0)], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn double_integrator_closed_form() {
        // A = [[0,1],[0,0]], B = [0;1], Q = I, R = 1:
        // P = [[√3, 1], [1, √3]].
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let p = care_solve(&a, &b, &DMatrix::identity(2, 2), &scalar(1.0)).unwrap();
        let s3 = libm::sqrt(3.0);
        assert_relative_eq!(
            p,
            DMatrix::from_row_slice(2, 2, &[s3, 1.0, 1.0, s3]),
            epsilon = 1e-11
        );
    }

    #[test]
    fn unstabilizable_pair_fails() {
        // Unstable mode with no input authority.
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        assert!(care_solve(&a, &b, &DMatrix::identity(2, 2), &scalar(1.0)).is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = DMatrix::identity(2, 2);
        assert!(care_solve(&a, &scalar(1.0), &a, &scalar(1.0)).is_err());
        assert!(care_solve(&scalar(0.0), &scalar(1.0), &scalar(1.0), &scalar(-1.0)).is_err());
    }
}
