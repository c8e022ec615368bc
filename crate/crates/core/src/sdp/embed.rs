//! Real-symmetric embedding of complex Hermitian SDPs.

use num_complex::Complex;

use super::{Constraint, SdpProblem};
use crate::numerics::{CMatrix, Real};

/// `T(X) = [[Re X, -Im X], [Im X, Re X]]`, stored with zero imaginary parts.
pub fn embed_matrix<T: Real>(x: &CMatrix<T>) -> CMatrix<T> {
    let n = x.rows();
    CMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = x[(i % n, j % n)];
        let v = match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        };
        Complex::new(v, T::zero())
    })
}

/// Inverse of [`embed_matrix`]. Averages the redundant quadrants, which is
/// the orthogonal projection onto embedded matrices and preserves PSD.
pub fn unembed_matrix<T: Real>(y: &CMatrix<T>) -> CMatrix<T> {
    let n = y.rows() / 2;
    let half = T::lit(0.5);
    CMatrix::from_fn(n, n, |i, j| {
        let re = (y[(i, j)].re + y[(i + n, j + n)].re) * half;
        let im = (y[(i + n, j)].re - y[(i, j + n)].re) * half;
        Complex::new(re, im)
    })
}

/// Equivalent problem over real-symmetric `2n x 2n` blocks.
///
/// `<T(A), T(X)> = 2 Re tr(A X)`, so coefficients are halved and the optimal
/// value is unchanged; an optimal `Y` maps back through [`unembed_matrix`].
pub fn embed_hermitian<T: Real>(problem: &SdpProblem<T>) -> SdpProblem<T> {
    let half = T::lit(0.5);
    let emb = |m: &CMatrix<T>| embed_matrix(m).scale(half);
    SdpProblem {
        block_dim: 2 * problem.block_dim,
        n_blocks: problem.n_blocks,
        objective: problem.objective.iter().map(emb).collect(),
        constraints: problem
            .constraints
            .iter()
            .map(|c| Constraint {
                coeffs: c.coeffs.iter().map(emb).collect(),
                sense: c.sense,
                rhs: c.rhs,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{hermitian_eig, sample_complex_gaussian, SeededRng};

    #[test]
    fn identity_maps_to_identity() {
        assert_eq!(embed_matrix(&CMatrix::<f64>::identity(2)), CMatrix::identity(4));
    }

    #[test]
    fn pauli_y_spectrum_doubles() {
        let x = CMatrix::from_row_major(
            2,
            2,
            vec![
                Complex::new(0.0, 0.0),
                Complex::new(0.0, -1.0),
                Complex::new(0.0, 1.0),
                Complex::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let eig = hermitian_eig(&embed_matrix(&x)).unwrap();
        let expected = [-1.0f64, -1.0, 1.0, 1.0];
        for (l, e) in eig.eigenvalues.iter().zip(expected) {
            assert!((l - e).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_is_exact_and_inner_products_double() {
        let mut rng = SeededRng::new(3, 3);
        let g: CMatrix<f64> = sample_complex_gaussian(&mut rng, 5, 5);
        let a = g.hermitian_part();
        let g2: CMatrix<f64> = sample_complex_gaussian(&mut rng, 5, 5);
        let b = g2.hermitian_part();
        assert_eq!(unembed_matrix(&embed_matrix(&a)), a);
        let lhs = embed_matrix(&a).inner(&embed_matrix(&b));
        assert!((lhs - 2.0 * a.inner(&b)).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn embedding_preserves_psd_spectrum() {
        let mut rng = SeededRng::new(4, 4);
        let g: CMatrix<f64> = sample_complex_gaussian(&mut rng, 4, 2);
        let x = &g * &g.adjoint();
        let ex = hermitian_eig(&x).unwrap().eigenvalues;
        let ey = hermitian_eig(&embed_matrix(&x)).unwrap().eigenvalues;
        for (i, l) in ex.iter().enumerate() {
            assert!((ey[2 * i] - l).abs() < 1e-10 && (ey[2 * i + 1] - l).abs() < 1e-10);
        }
    }
}
