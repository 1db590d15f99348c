//! Step-by-step symplectic normal form, kept separate from the production
//! path in [`super::williamson`] so the two can check each other.
//!
//! The transformation is assembled from three elementary symplectic maps,
//! each applied to the Hamiltonian matrix in turn:
//!
//! 1. squeeze each `pᵢ` so the p-block becomes the identity,
//! 2. rotate the `xᵢ` (and the `pᵢ` alongside) to diagonalize the x-block,
//! 3. squeeze each mode `xᵢ × pᵢ` so both blocks equal `diag(Δ)`.
//!
//! The rotation uses a cyclic Jacobi sweep rather than LAPACK-style
//! tridiagonal QR.

use nalgebra::{Matrix3, Matrix6};

use super::{check_stability, GaussianSpectrum, QuadraticCoefficients};
use crate::error::Result;

/// The canonical symplectic form `Γ = [[0, I], [−I, 0]]`.
pub fn canonical_form() -> Matrix6<f64> {
    let mut g = Matrix6::zeros();
    for i in 0..3 {
        g[(i, 3 + i)] = 1.0;
        g[(3 + i, i)] = -1.0;
    }
    g
}

/// Block-diagonal symplectic map `diag(A, A^{-T})`.
fn block_map(a: &Matrix3<f64>, a_inv_t: &Matrix3<f64>) -> Matrix6<f64> {
    let mut s = Matrix6::zeros();
    s.fixed_view_mut::<3, 3>(0, 0).copy_from(a);
    s.fixed_view_mut::<3, 3>(3, 3).copy_from(a_inv_t);
    s
}

/// Eigen-decomposition of a real symmetric 3×3 matrix by cyclic Jacobi
/// rotations. Returns `(eigenvalues, eigenvectors as columns)`.
pub(crate) fn jacobi_eigen(mut a: Matrix3<f64>) -> ([f64; 3], Matrix3<f64>) {
    let mut v = Matrix3::identity();
    for _sweep in 0..64 {
        let off = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
        let scale = a.diagonal().norm_squared().max(f64::MIN_POSITIVE);
        if off <= 1e-32 * scale {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a[(p, q)];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut rot = Matrix3::identity();
            rot[(p, p)] = c;
            rot[(q, q)] = c;
            rot[(p, q)] = s;
            rot[(q, p)] = -s;
            a = rot.transpose() * a * rot;
            a[(p, q)] = 0.0;
            a[(q, p)] = 0.0;
            v *= rot;
        }
    }
    ([a[(0, 0)], a[(1, 1)], a[(2, 2)]], v)
}

/// Williamson normal form built by the squeeze / rotate / squeeze sequence.
///
/// Gapless modes are not supported here (step 3 would divide by zero); the
/// production path handles them.
pub fn williamson_three_step(coeffs: &QuadraticCoefficients) -> Result<GaussianSpectrum> {
    check_stability(coeffs)?;
    let h = coeffs.hamiltonian_matrix();
    let eps = coeffs.eps();

    // step 1: x → P^{1/2} x', p → P^{-1/2} p'
    let root = Matrix3::from_diagonal(&eps.map(f64::sqrt).into());
    let inv_root = Matrix3::from_diagonal(&eps.map(|e| 1.0 / e.sqrt()).into());
    let s1 = block_map(&root, &inv_root);
    let h1 = s1.transpose() * h * s1;

    // step 2: rotate x (and p, which stays the identity)
    let x1: Matrix3<f64> = h1.fixed_view::<3, 3>(0, 0).into();
    let (vals, vecs) = jacobi_eigen(x1);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    let rot = Matrix3::from_fn(|i, j| vecs[(i, order[j])]);
    let s2 = block_map(&rot, &rot);
    let h2 = s2.transpose() * h1 * s2;

    // step 3: per-mode squeeze x → Δ^{-1/2} x, p → Δ^{1/2} p
    let deltas: [f64; 3] = std::array::from_fn(|k| h2[(k, k)].max(0.0).sqrt());
    let sq_x = Matrix3::from_diagonal(&deltas.map(|d| 1.0 / d.sqrt()).into());
    let sq_p = Matrix3::from_diagonal(&deltas.map(f64::sqrt).into());
    let s3 = block_map(&sq_x, &sq_p);

    let s = s1 * s2 * s3;
    let covariance = s * s.transpose() * 0.5;
    let ground_energy_correction = 0.5 * (deltas.iter().sum::<f64>() - eps.iter().sum::<f64>());
    Ok(GaussianSpectrum { deltas, symplectic: s, covariance, ground_energy_correction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn jacobi_diagonalizes() {
        let a = Matrix3::new(2.0, 0.3, -0.7, 0.3, 1.0, 0.2, -0.7, 0.2, 3.0);
        let (vals, v) = jacobi_eigen(a);
        let d = v.transpose() * a * v;
        for i in 0..3 {
            assert_abs_diff_eq!(d[(i, i)], vals[i], epsilon = 1e-13);
            for j in 0..3 {
                if i != j {
                    assert_abs_diff_eq!(d[(i, j)], 0.0, epsilon = 1e-13);
                }
            }
        }
        assert_abs_diff_eq!(v.transpose() * v, Matrix3::identity(), epsilon = 1e-14);
        assert_abs_diff_eq!(vals.iter().sum::<f64>(), 6.0, epsilon = 1e-13);
    }

    #[test]
    fn gamma_is_antisymmetric_and_squares_to_minus_one() {
        let g = canonical_form();
        assert_eq!(g.transpose(), -g);
        assert_eq!(g * g, -Matrix6::identity());
    }

    #[test]
    fn three_step_matches_production() {
        let q = QuadraticCoefficients { eps1: 1.4, eps2: 0.8, eps3: 1.0, tau12: 0.3, tau13: 0.42, tau23: -0.2 };
        let a = williamson_three_step(&q).unwrap();
        let b = super::super::williamson(&q).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(a.deltas[i], b.deltas[i], epsilon = 1e-12);
        }
        // S is unique up to per-mode signs, so compare the covariance
        assert_abs_diff_eq!(a.covariance, b.covariance, epsilon = 1e-12);
    }
}
