use num_complex::Complex;

use super::{CMatrix, LinalgError, Real};

const MAX_SWEEPS: usize = 64;

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigDecomposition<T> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Unit-norm eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: CMatrix<T>,
}

impl<T: Real> EigDecomposition<T> {
    /// `V diag(f(λ)) V^H`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> CMatrix<T> {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let scaled: Vec<T> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (k, &s) in scaled.iter().enumerate() {
                    if s != T::zero() {
                        acc += v[(i, k)] * v[(j, k)].conj() * s;
                    }
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc.conj();
            }
            out[(i, i)].im = T::zero();
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix<T> {
        self.reconstruct_with(|l| l)
    }

    pub fn max_eigenvalue(&self) -> T {
        *self.eigenvalues.last().expect("non-empty decomposition")
    }

    /// Eigenvector paired with the largest eigenvalue.
    pub fn principal_vector(&self) -> CMatrix<T> {
        self.eigenvectors.col(self.eigenvalues.len() - 1)
    }
}

fn hermitian_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(16.0))
}

fn check_hermitian<T: Real>(a: &CMatrix<T>) -> Result<(), LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let tol = hermitian_tolerance::<T>() * a.frobenius_norm();
    let defect = a.hermitian_defect();
    if defect > tol {
        return Err(LinalgError::NotHermitian {
            asymmetry: defect.to_f64().unwrap_or(f64::NAN),
            tolerance: tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Cyclic complex Jacobi. Returns the (unsorted) diagonal and, if requested,
/// the accumulated unitary.
fn jacobi<T: Real>(a: &CMatrix<T>, want_vectors: bool) -> (Vec<T>, Option<CMatrix<T>>) {
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = want_vectors.then(|| CMatrix::identity(n));
    let scale = m.frobenius_norm();
    if scale == T::zero() || n == 1 {
        return ((0..n).map(|i| m[(i, i)].re).collect(), v);
    }
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= eps * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r <= T::min_positive_value() {
                    continue;
                }
                let e = apq / r;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (r + r);
                let t = if theta == T::zero() {
                    T::one()
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // J = diag(1, conj(e)) * [[c, s], [-s, c]] acting on (p, q).
                let jpp = Complex::new(c, T::zero());
                let jpq = Complex::new(s, T::zero());
                let jqp = e.conj() * (-s);
                let jqq = e.conj() * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * jpp + akq * jqp;
                    m[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    m[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                m[(p, q)] = Complex::new(T::zero(), T::zero());
                m[(q, p)] = Complex::new(T::zero(), T::zero());
                m[(p, p)].im = T::zero();
                m[(q, q)].im = T::zero();
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * jpp + vkq * jqp;
                        v[(k, q)] = vkp * jpq + vkq * jqq;
                    }
                }
            }
        }
    }
    ((0..n).map(|i| m[(i, i)].re).collect(), v)
}

/// Rotates a vector so its largest-magnitude entry is real and nonnegative.
fn fix_phase<T: Real>(v: &mut CMatrix<T>, col: usize) {
    let n = v.rows();
    let mut best = 0;
    let mut best_mag = T::lit(-1.0);
    for i in 0..n {
        let mag = v[(i, col)].norm();
        if mag > best_mag {
            best_mag = mag;
            best = i;
        }
    }
    if best_mag <= T::zero() {
        return;
    }
    let rot = v[(best, col)].conj() / best_mag;
    for i in 0..n {
        v[(i, col)] *= rot;
    }
    v[(best, col)].im = T::zero();
}

/// Full eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig<T: Real>(a: &CMatrix<T>) -> Result<EigDecomposition<T>, LinalgError> {
    check_hermitian(a)?;
    let n = a.rows();
    let (diag, v) = jacobi(a, true);
    let v = v.expect("vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));
    let mut vectors = CMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new)] = v[(i, old)];
        }
        fix_phase(&mut vectors, new);
    }
    Ok(EigDecomposition {
        eigenvalues: order.iter().map(|&i| diag[i]).collect(),
        eigenvectors: vectors,
    })
}

/// Householder reduction to a real symmetric tridiagonal `(d, e)` with the
/// same spectrum; `e[i]` couples `i` and `i + 1`.
fn tridiagonalize<T: Real>(a: &CMatrix<T>) -> (Vec<T>, Vec<T>) {
    let n = a.rows();
    let zero = Complex::new(T::zero(), T::zero());
    let mut m = a.hermitian_part().into_vec();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    for k in 0..n.saturating_sub(1) {
        d[k] = m[k * n + k].re;
        let lo = k + 1;
        let alpha = (lo..n).map(|i| m[i * n + k].norm_sqr()).sum::<T>().sqrt();
        e[k] = alpha;
        if alpha == T::zero() {
            continue;
        }
        let x0 = m[lo * n + k];
        let phase = if x0.norm() > T::zero() {
            x0 / x0.norm()
        } else {
            Complex::new(T::one(), T::zero())
        };
        for i in lo..n {
            v[i] = m[i * n + k];
        }
        v[lo] += phase * alpha;
        let vnorm2: T = (lo..n).map(|i| v[i].norm_sqr()).sum();
        let tau = T::lit(2.0) / vnorm2;
        // p = tau A v, q = p - (tau / 2)(v^H p) v, A <- A - v q^H - q v^H.
        for i in lo..n {
            let mut acc = zero;
            for j in lo..n {
                acc += m[i * n + j] * v[j];
            }
            p[i] = acc * tau;
        }
        let vhp: T = (lo..n).map(|i| (v[i].conj() * p[i]).re).sum();
        let kk = tau * vhp * T::lit(0.5);
        for i in lo..n {
            p[i] -= v[i] * kk;
        }
        for i in lo..n {
            for j in lo..n {
                m[i * n + j] = m[i * n + j] - v[i] * p[j].conj() - p[i] * v[j].conj();
            }
        }
    }
    if n > 0 {
        d[n - 1] = m[(n - 1) * n + n - 1].re;
    }
    (d, e)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL. `None` if an
/// eigenvalue fails to converge.
fn tridiagonal_eigenvalues<T: Real>(mut d: Vec<T>, mut e: Vec<T>) -> Option<Vec<T>> {
    let n = d.len();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return None;
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r } else { -r });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Some(d)
}

/// Eigenvalues of a Hermitian matrix, ascending, without eigenvectors.
pub fn hermitian_eigenvalues<T: Real>(a: &CMatrix<T>) -> Result<Vec<T>, LinalgError> {
    check_hermitian(a)?;
    let (d, e) = tridiagonalize(a);
    let mut vals = match tridiagonal_eigenvalues(d, e) {
        Some(v) => v,
        None => jacobi(a, false).0,
    };
    vals.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(vals)
}

/// Smallest eigenvalue of a Hermitian matrix, without forming eigenvectors.
pub fn min_eigenvalue<T: Real>(a: &CMatrix<T>) -> Result<T, LinalgError> {
    Ok(hermitian_eigenvalues(a)?.first().copied().unwrap_or(T::infinity()))
}

/// Frobenius-nearest positive semidefinite matrix: `V max(Λ, 0) V^H`.
pub fn project_psd<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>, LinalgError> {
    let eig = hermitian_eig(a)?;
    if eig.eigenvalues.iter().all(|&l| l >= T::zero()) {
        return Ok(a.hermitian_part());
    }
    Ok(eig.reconstruct_with(|l| l.max(T::zero())))
}

/// Lower-triangular `L` with `L L^H = A`.
///
/// Fails when a pivot drops to or below `floor`.
pub(crate) fn cholesky_with_floor<T: Real>(a: &CMatrix<T>, floor: T) -> Result<CMatrix<T>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::DimensionMismatch(format!(
            "cholesky of {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > floor) || !d.is_finite() {
            return Err(LinalgError::NotPositiveDefinite {
                index: j,
                pivot: d.to_f64().unwrap_or(f64::NAN),
            });
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex::new(djj, T::zero());
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>, LinalgError> {
    cholesky_with_floor(a, T::zero())
}

/// Solves `L X = B` for lower-triangular `L`.
pub(crate) fn forward_solve<T: Real>(l: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let n = l.rows();
    assert_eq!(b.rows(), n);
    let mut x = b.clone();
    for c in 0..b.cols() {
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    x
}

/// Solves `L^H X = B` for lower-triangular `L`.
pub(crate) fn backward_solve_adjoint<T: Real>(l: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let n = l.rows();
    assert_eq!(b.rows(), n);
    let mut x = b.clone();
    for c in 0..b.cols() {
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in (i + 1)..n {
                s -= l[(k, i)].conj() * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)].conj();
        }
    }
    x
}

/// `L^{-1} A L^{-H}` for Hermitian `A`, symmetrized.
pub(crate) fn congruence_inverse<T: Real>(l: &CMatrix<T>, a: &CMatrix<T>) -> CMatrix<T> {
    let y = forward_solve(l, a);
    forward_solve(l, &y.adjoint()).hermitian_part()
}

/// Inverse of a Hermitian positive definite matrix from its Cholesky factor.
#[cfg(test)]
pub(crate) fn inverse_from_cholesky<T: Real>(l: &CMatrix<T>) -> CMatrix<T> {
    let n = l.rows();
    let linv = forward_solve(l, &CMatrix::identity(n));
    (&linv.adjoint() * &linv).hermitian_part()
}

/// Unit vector maximizing `u^H A u / u^H B u`.
///
/// Uses the symmetric reduction `L^{-1} A L^{-H}` with `B = L L^H`.
pub fn principal_generalized_eigvec<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>, LinalgError> {
    check_hermitian(a)?;
    check_hermitian(b)?;
    if a.rows() != b.rows() {
        return Err(LinalgError::DimensionMismatch(format!(
            "pencil sizes {} and {}",
            a.rows(),
            b.rows()
        )));
    }
    let floor = T::lit(1e-12) * b.frobenius_norm();
    let l = cholesky_with_floor(b, floor)?;
    let reduced = congruence_inverse(&l, a);
    let eig = hermitian_eig(&reduced)?;
    let y = eig.principal_vector();
    let mut u = backward_solve_adjoint(&l, &y).normalized();
    fix_phase(&mut u, 0);
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{sample_complex_gaussian, SeededRng};
    use proptest::prelude::*;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix<f64> {
        let mut rng = SeededRng::new(seed, 0);
        let g = sample_complex_gaussian(&mut rng, n, n);
        g.hermitian_part()
    }

    fn random_psd(n: usize, rank: usize, rng: &mut SeededRng) -> CMatrix<f64> {
        let g = sample_complex_gaussian(rng, n, rank);
        (&g * &g.adjoint()).hermitian_part()
    }

    fn residual_ok(a: &CMatrix<f64>, eig: &EigDecomposition<f64>) -> bool {
        let bound = 1e-8 * (1.0 + a.frobenius_norm());
        (0..a.rows()).all(|i| {
            let v = eig.eigenvectors.col(i);
            let av = a * &v;
            (&av - &v.scale(eig.eigenvalues[i])).norm() <= bound
        })
    }

    fn orthonormal(v: &CMatrix<f64>) -> bool {
        let g = &v.adjoint() * v;
        (&g - &CMatrix::identity(v.cols())).max_abs() <= 1e-8
    }

    #[test]
    fn identity_eigenvalues() {
        let eig = hermitian_eig(&CMatrix::<f64>::identity(3)).unwrap();
        for l in eig.eigenvalues {
            assert!((l - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_matrix_gives_basis_vectors() {
        let a = CMatrix::from_real_diagonal(&[-2.0, 0.0, 5.0]);
        let eig = hermitian_eig(&a).unwrap();
        assert_eq!(eig.eigenvalues, vec![-2.0, 0.0, 5.0]);
        for k in 0..3 {
            for i in 0..3 {
                let expected = if i == k { 1.0 } else { 0.0 };
                assert!((eig.eigenvectors[(i, k)] - Complex::new(expected, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let a = random_hermitian(8, 11);
        let eig = hermitian_eig(&a).unwrap();
        assert!((&eig.reconstruct() - &a).frobenius_norm() <= 1e-8);
        assert!(residual_ok(&a, &eig));
        assert!(orthonormal(&eig.eigenvectors));
    }

    #[test]
    fn phase_convention_makes_largest_entry_real() {
        let eig = hermitian_eig(&random_hermitian(5, 3)).unwrap();
        for k in 0..5 {
            let col = eig.eigenvectors.col(k);
            let (idx, _) = col
                .as_slice()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
                .unwrap();
            assert_eq!(col.as_slice()[idx].im, 0.0);
            assert!(col.as_slice()[idx].re > 0.0);
        }
    }

    #[test]
    fn rejects_non_hermitian_and_non_square() {
        let mut a = CMatrix::<f64>::identity(2);
        a[(0, 1)] = Complex::new(1.0, 0.0);
        assert!(matches!(hermitian_eig(&a), Err(LinalgError::NotHermitian { .. })));
        assert!(matches!(
            hermitian_eig(&CMatrix::<f64>::zeros(2, 3)),
            Err(LinalgError::DimensionMismatch(_))
        ));
        assert!(matches!(project_psd(&a), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn works_in_single_precision() {
        let a64 = random_hermitian(6, 5);
        let a32 = CMatrix::<f32>::from_fn(6, 6, |i, j| {
            let z = a64[(i, j)];
            Complex::new(z.re as f32, z.im as f32)
        });
        let eig = hermitian_eig(&a32).unwrap();
        let err = (&eig.reconstruct() - &a32).frobenius_norm();
        assert!(err <= 1e-4 * (1.0 + a32.frobenius_norm()), "err {err}");
    }

    #[test]
    fn psd_fixed_point_and_clipping() {
        let mut rng = SeededRng::new(2, 0);
        let p = random_psd(4, 4, &mut rng);
        assert!((&project_psd(&p).unwrap() - &p).max_abs() <= 1e-10);
        let d = CMatrix::from_real_diagonal(&[1.0, -1.0]);
        let pd = project_psd(&d).unwrap();
        assert!((&pd - &CMatrix::from_real_diagonal(&[1.0, 0.0])).max_abs() <= 1e-15);
    }

    #[test]
    fn psd_projection_beats_sampled_psd_matrices() {
        let mut rng = SeededRng::new(7, 1);
        let a = random_hermitian(4, 99);
        let p = project_psd(&a).unwrap();
        let dist = (&a - &p).frobenius_norm();
        for i in 0..1000 {
            let x = random_psd(4, 1 + i % 4, &mut rng).scale(0.1 + (i % 7) as f64 * 0.3);
            assert!(dist <= (&a - &x).frobenius_norm() + 1e-12);
        }
        assert!(min_eigenvalue(&p).unwrap() >= -1e-10);
    }

    #[test]
    fn cholesky_reconstructs_and_rejects_indefinite() {
        let mut rng = SeededRng::new(3, 3);
        let b = &random_psd(5, 5, &mut rng) + &CMatrix::identity(5);
        let l = cholesky(&b).unwrap();
        assert!((&(&l * &l.adjoint()) - &b).max_abs() <= 1e-12);
        let inv = inverse_from_cholesky(&l);
        assert!((&(&inv * &b) - &CMatrix::identity(5)).max_abs() <= 1e-10);
        let bad = CMatrix::from_real_diagonal(&[1.0, -1.0]);
        assert!(matches!(
            cholesky(&bad),
            Err(LinalgError::NotPositiveDefinite { index: 1, .. })
        ));
    }

    #[test]
    fn generalized_identity_b_reduces_to_ordinary_problem() {
        let a = CMatrix::from_real_diagonal(&[1.0, 3.0, 2.0]);
        let u = principal_generalized_eigvec(&a, &CMatrix::identity(3)).unwrap();
        assert!((u[(1, 0)] - Complex::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn generalized_rank_one_a() {
        let v = CMatrix::column(vec![
            Complex::new(1.0, 0.5),
            Complex::new(-0.3, 2.0),
            Complex::new(0.0, -1.0),
        ]);
        let u = principal_generalized_eigvec(&v.outer(), &CMatrix::identity(3)).unwrap();
        let align: f64 = u.dot(&v).norm() / v.norm();
        assert!((align - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generalized_rejects_singular_b() {
        let a = CMatrix::<f64>::identity(2);
        let b = CMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(
            principal_generalized_eigvec(&a, &b),
            Err(LinalgError::NotPositiveDefinite { .. })
        ));
    }

    fn rayleigh(a: &CMatrix<f64>, b: &CMatrix<f64>, u: &CMatrix<f64>) -> f64 {
        a.quad_form(u) / b.quad_form(u)
    }

    /// Random-sphere sampling followed by projected gradient ascent on the
    /// Rayleigh ratio from the best samples.
    fn sampled_rayleigh_max(a: &CMatrix<f64>, b: &CMatrix<f64>, rng: &mut SeededRng) -> f64 {
        let n = a.rows();
        let mut samples: Vec<(f64, CMatrix<f64>)> = (0..100_000)
            .map(|_| {
                let u = sample_complex_gaussian(rng, n, 1).normalized();
                (rayleigh(a, b, &u), u)
            })
            .collect();
        samples.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
        let mut best = samples[0].0;
        for (_, start) in samples.iter().take(10) {
            // Backtracking ascent along the Rayleigh-ratio gradient.
            let mut u = start.clone();
            let mut r = rayleigh(a, b, &u);
            let mut step = 1.0;
            for _ in 0..5_000 {
                let grad = (&(a * &u) - &(b * &u).scale(r)).scale(1.0 / b.quad_form(&u));
                let mut next = u.clone();
                next.axpy(step, &grad);
                let next = next.normalized();
                let rn = rayleigh(a, b, &next);
                if rn > r {
                    u = next;
                    r = rn;
                    step *= 1.5;
                } else {
                    step *= 0.5;
                    if step < 1e-14 {
                        break;
                    }
                }
            }
            best = best.max(r);
        }
        best
    }

    #[test]
    fn generalized_matches_sampling_oracle() {
        let mut rng = SeededRng::new(1234, 5);
        let a = random_psd(4, 2, &mut rng);
        let b = &random_psd(4, 4, &mut rng) + &CMatrix::identity(4).scale(0.1);
        let u = principal_generalized_eigvec(&a, &b).unwrap();
        let value = rayleigh(&a, &b, &u);
        let sampled = sampled_rayleigh_max(&a, &b, &mut rng);
        assert!(sampled <= value * (1.0 + 1e-12), "sample {sampled} beats {value}");
        assert!(sampled >= value * (1.0 - 1e-3), "oracle {sampled} vs {value}");
    }

    fn hermitian_strategy(max_n: usize) -> impl Strategy<Value = CMatrix<f64>> {
        (1..=max_n, any::<u64>(), 0.01f64..100.0).prop_map(|(n, seed, scale)| random_hermitian(n, seed).scale(scale))
    }

    #[test]
    fn eigenvalues_only_matches_full_decomposition() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (8, 4), (12, 5)] {
            let a = random_hermitian(n, seed);
            let full = hermitian_eig(&a).unwrap().eigenvalues;
            let only = hermitian_eigenvalues(&a).unwrap();
            for (x, y) in full.iter().zip(&only) {
                assert!((x - y).abs() <= 1e-12 * a.frobenius_norm().max(1.0), "{x} vs {y}");
            }
        }
        let d = CMatrix::<f64>::from_real_diagonal(&[3.0, -1.0, 2.0]);
        assert_eq!(hermitian_eigenvalues(&d).unwrap(), vec![-1.0, 2.0, 3.0]);
        assert_eq!(
            hermitian_eigenvalues(&CMatrix::<f64>::zeros(4, 4)).unwrap(),
            vec![0.0; 4]
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn eigenvalues_only_agree(a in hermitian_strategy(16)) {
            let full = hermitian_eig(&a).unwrap().eigenvalues;
            let only = hermitian_eigenvalues(&a).unwrap();
            let scale = a.frobenius_norm().max(1.0);
            for (x, y) in full.iter().zip(&only) {
                prop_assert!((x - y).abs() <= 1e-11 * scale);
            }
        }

        #[test]
        fn eig_reconstruction_holds(a in hermitian_strategy(24)) {
            let eig = hermitian_eig(&a).unwrap();
            let err = (&eig.reconstruct() - &a).frobenius_norm();
            prop_assert!(err <= 1e-8 * (1.0 + a.frobenius_norm()));
            prop_assert!(residual_ok(&a, &eig));
            prop_assert!(orthonormal(&eig.eigenvectors));
            prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn psd_projection_is_idempotent(a in hermitian_strategy(10)) {
            let p = project_psd(&a).unwrap();
            let pp = project_psd(&p).unwrap();
            prop_assert!((&pp - &p).max_abs() <= 1e-10 * (1.0 + p.max_abs()));
        }

        #[test]
        fn generalized_vector_is_scale_invariant(seed in any::<u64>(), c in 0.001f64..1000.0) {
            let mut rng = SeededRng::new(seed, 9);
            let a = random_psd(5, 3, &mut rng);
            let b = &random_psd(5, 5, &mut rng) + &CMatrix::identity(5);
            let u1 = principal_generalized_eigvec(&a, &b).unwrap();
            let u2 = principal_generalized_eigvec(&a.scale(c), &b.scale(c)).unwrap();
            prop_assert!((u1.dot(&u2).norm() - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn large_matrix_reconstruction() {
        let a = random_hermitian(64, 77);
        let eig = hermitian_eig(&a).unwrap();
        assert!((&eig.reconstruct() - &a).frobenius_norm() <= 1e-8 * (1.0 + a.frobenius_norm()));
    }
}
