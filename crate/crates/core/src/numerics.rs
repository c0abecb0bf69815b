//! Dense complex linear algebra: cyclic Jacobi for Hermitian matrices and
//! one-sided Jacobi for the SVD.
//!
//! Dimensions here are small (tens), so both solvers trade speed for
//! accuracy: Jacobi methods deliver eigenvalues and singular values with
//! small relative error, which the nuclear-norm solver and the Hankel norm
//! identities rely on.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const MAX_SWEEPS: usize = 100;
const HERMITIAN_TOL: f64 = 1e-12;
/// Relative clamp threshold for negative eigenvalues in [`sqrt_psd`].
pub const PSD_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("matrix is empty")]
    Empty,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("{op}: no convergence after {sweeps} sweeps (residual {residual:.3e})")]
    NoConvergence {
        op: &'static str,
        sweeps: usize,
        residual: f64,
    },
    #[error("matrix is indefinite: eigenvalue {eigenvalue:.3e} below -{PSD_CLAMP:e}*{lambda_max:.3e}")]
    Indefinite { eigenvalue: f64, lambda_max: f64 },
    #[error("matrix is singular")]
    Singular,
}

type Result<T> = std::result::Result<T, NumericsError>;

/// Hermitian matrix, stored exactly symmetric: `m[(i, j)] == conj(m[(j, i)])`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMatrix(CMatrix);

impl HermMatrix {
    /// Validates Hermitian symmetry up to round-off and then symmetrizes the
    /// storage exactly.
    pub fn new(m: CMatrix) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows == 0 {
            return Err(NumericsError::Empty);
        }
        if rows != cols {
            return Err(NumericsError::NotSquare { rows, cols });
        }
        let scale = m.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        let mut asymmetry = 0.0f64;
        for i in 0..rows {
            for j in i..cols {
                asymmetry = asymmetry.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if asymmetry > HERMITIAN_TOL * scale {
            return Err(NumericsError::NotHermitian { asymmetry });
        }
        Ok(Self::symmetrized(m))
    }

    fn symmetrized(mut m: CMatrix) -> Self {
        let n = m.nrows();
        for i in 0..n {
            m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        HermMatrix(m)
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(NumericsError::Empty);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(NumericsError::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        HermMatrix(CMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        HermMatrix(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(d[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    /// Real diagonal.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    /// `D A D` for a real diagonal `D`.
    pub fn scale_symmetric(&self, d: &[f64]) -> HermMatrix {
        let n = self.dim();
        HermMatrix::symmetrized(CMatrix::from_fn(n, n, |i, j| self.0[(i, j)] * (d[i] * d[j])))
    }

    /// Principal submatrix on the given indices, in order.
    pub fn submatrix(&self, idx: &[usize]) -> HermMatrix {
        let m = idx.len();
        HermMatrix(CMatrix::from_fn(m, m, |a, b| self.0[(idx[a], idx[b])]))
    }
}

/// `A = Q diag(λ) Q*` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomp {
    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `Q f(Λ) Q*`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> HermMatrix {
        let q = &self.eigenvectors;
        let n = q.nrows();
        let mut scaled = q.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let s = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        HermMatrix::symmetrized(scaled * q.adjoint())
    }

    pub fn reconstruct(&self) -> HermMatrix {
        self.apply_fn(|x| x)
    }
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Rotation that diagonalizes the 2x2 Hermitian block `[[alpha, beta], [conj(beta), gamma]]`.
///
/// Returns the unitary `U` as `(u_pp, u_pq, u_qp, u_qq)` with `U* B U` diagonal.
fn jacobi_rotation(alpha: f64, gamma: f64, beta: Complex64) -> (Complex64, Complex64, Complex64, Complex64) {
    let b = beta.norm();
    let phase = beta / b;
    let tau = (gamma - alpha) / (2.0 * b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let e = phase.conj();
    (Complex64::new(c, 0.0), Complex64::new(s, 0.0), -e * s, e * c)
}

fn rotate_columns(m: &mut CMatrix, p: usize, q: usize, u: (Complex64, Complex64, Complex64, Complex64)) {
    let (upp, upq, uqp, uqq) = u;
    for i in 0..m.nrows() {
        let mp = m[(i, p)];
        let mq = m[(i, q)];
        m[(i, p)] = mp * upp + mq * uqp;
        m[(i, q)] = mp * upq + mq * uqq;
    }
}

fn rotate_rows_adjoint(m: &mut CMatrix, p: usize, q: usize, u: (Complex64, Complex64, Complex64, Complex64)) {
    let (upp, upq, uqp, uqq) = u;
    for j in 0..m.ncols() {
        let mp = m[(p, j)];
        let mq = m[(q, j)];
        m[(p, j)] = upp.conj() * mp + uqp.conj() * mq;
        m[(q, j)] = upq.conj() * mp + uqq.conj() * mq;
    }
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi.
pub fn herm_eig(a: &HermMatrix) -> Result<SpectralDecomp> {
    let n = a.dim();
    let mut m = a.as_matrix().clone();
    let mut q = CMatrix::identity(n, n);
    let scale = frobenius(&m).max(f64::MIN_POSITIVE);
    let target = 1e-15 * scale;

    let mut converged = n == 1;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n - 1 {
            for r in (p + 1)..n {
                let beta = m[(p, r)];
                let b = beta.norm();
                if b <= f64::MIN_POSITIVE {
                    continue;
                }
                let alpha = m[(p, p)].re;
                let gamma = m[(r, r)].re;
                // skip rotations that cannot change the diagonal in floating point
                if b < 1e-18 * (alpha.abs() + gamma.abs()) {
                    m[(p, r)] = Complex64::new(0.0, 0.0);
                    m[(r, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let u = jacobi_rotation(alpha, gamma, beta);
                rotate_columns(&mut m, p, r, u);
                rotate_rows_adjoint(&mut m, p, r, u);
                m[(p, r)] = Complex64::new(0.0, 0.0);
                m[(r, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(r, r)] = Complex64::new(m[(r, r)].re, 0.0);
                rotate_columns(&mut q, p, r, u);
            }
        }
        converged = off_diagonal_norm(&m) <= target;
    }
    if !converged {
        return Err(NumericsError::NoConvergence {
            op: "herm_eig",
            sweeps,
            residual: off_diagonal_norm(&m),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| q[(i, order[j])]);
    Ok(SpectralDecomp {
        eigenvalues,
        eigenvectors,
    })
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[-PSD_CLAMP * λ_max, 0)` are clamped to zero.
pub fn sqrt_psd(a: &HermMatrix) -> Result<HermMatrix> {
    let eig = herm_eig(a)?;
    check_psd(&eig)?;
    Ok(eig.apply_fn(|x| x.max(0.0).sqrt()))
}

pub(crate) fn check_psd(eig: &SpectralDecomp) -> Result<()> {
    let lmax = eig.lambda_max().max(0.0);
    let lmin = eig.lambda_min();
    if lmin < -PSD_CLAMP * lmax.max(f64::MIN_POSITIVE) {
        return Err(NumericsError::Indefinite {
            eigenvalue: lmin,
            lambda_max: lmax,
        });
    }
    Ok(())
}

/// Thin singular value decomposition `A = U diag(σ) V*`, `σ` descending.
///
/// `U` is `m x k` and `V` is `n x k` with `k = min(m, n)`; both have
/// orthonormal columns.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.singular_values.iter().enumerate() {
            for i in 0..us.nrows() {
                us[(i, j)] *= s;
            }
        }
        us * self.v.adjoint()
    }

    pub fn nuclear_norm(&self) -> f64 {
        self.singular_values.iter().sum()
    }
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(a: &CMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(NumericsError::Empty);
    }
    if m < n {
        let t = svd(&a.adjoint())?;
        return Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        });
    }

    let mut w = a.clone();
    let mut v = CMatrix::identity(n, n);
    let mut converged = n == 1;
    let mut sweeps = 0;
    let mut worst = 0.0f64;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        converged = true;
        worst = 0.0;
        for p in 0..n - 1 {
            for r in (p + 1)..n {
                let mut alpha = 0.0;
                let mut gamma = 0.0;
                let mut beta = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    alpha += w[(i, p)].norm_sqr();
                    gamma += w[(i, r)].norm_sqr();
                    beta += w[(i, p)].conj() * w[(i, r)];
                }
                let b = beta.norm();
                if b <= f64::MIN_POSITIVE {
                    continue;
                }
                let rel = b / (alpha * gamma).sqrt();
                worst = worst.max(rel);
                if rel <= 1e-15 {
                    continue;
                }
                converged = false;
                let u = jacobi_rotation(alpha, gamma, beta);
                rotate_columns(&mut w, p, r, u);
                rotate_columns(&mut v, p, r, u);
            }
        }
    }
    if !converged {
        return Err(NumericsError::NoConvergence {
            op: "svd",
            sweeps,
            residual: worst,
        });
    }

    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let singular_values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let tiny = singular_values[0] * 1e-18;

    let mut u = CMatrix::zeros(m, n);
    let mut filled = vec![false; n];
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > tiny {
            let col = w.column(j) / Complex64::new(norms[j], 0.0);
            u.set_column(k, &col);
            filled[k] = true;
        }
    }
    complete_orthonormal(&mut u, &filled);
    let v = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(Svd { u, singular_values, v })
}

/// Fills the unfilled columns of `u` with an orthonormal completion.
fn complete_orthonormal(u: &mut CMatrix, filled: &[bool]) {
    let m = u.nrows();
    let mut candidate = 0;
    for k in 0..filled.len() {
        if filled[k] {
            continue;
        }
        loop {
            let mut x = CVector::zeros(m);
            x[candidate % m] = Complex64::new(1.0, 0.0);
            candidate += 1;
            for _pass in 0..2 {
                for (j, &done) in filled.iter().enumerate() {
                    if done || j < k {
                        let col = u.column(j).clone_owned();
                        let proj = col.dotc(&x);
                        x -= col * proj;
                    }
                }
            }
            let nrm = x.norm();
            if nrm > 1e-8 {
                u.set_column(k, &(x / Complex64::new(nrm, 0.0)));
                break;
            }
        }
    }
}

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> Result<f64> {
    Ok(svd(a)?.singular_values[0])
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn solve(a: &CMatrix, b: &CVector) -> Result<CVector> {
    a.clone().lu().solve(b).ok_or(NumericsError::Singular)
}

pub fn real_vector(values: &[f64]) -> CVector {
    CVector::from_iterator(values.len(), values.iter().map(|&x| Complex64::new(x, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    pub(crate) fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        HermMatrix::new((&a + a.adjoint()) * c(0.5)).unwrap()
    }

    fn check_decomp(a: &HermMatrix, eig: &SpectralDecomp) {
        let recon = eig.reconstruct();
        let err = frobenius(&(recon.as_matrix() - a.as_matrix()));
        assert!(err <= 1e-10 * (1.0 + frobenius(a.as_matrix())), "recon {err}");
        let q = &eig.eigenvectors;
        let gram = q.adjoint() * q;
        let err = frobenius(&(gram - CMatrix::identity(a.dim(), a.dim())));
        assert!(err <= 1e-10, "orthogonality {err}");
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_identity() {
        let eig = herm_eig(&HermMatrix::identity(3)).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn eig_diagonal() {
        let eig = herm_eig(&HermMatrix::from_diagonal(&[4.0, 1.0])).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 4.0]);
        assert!((eig.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((eig.eigenvectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    /// Characteristic polynomial by Faddeev–LeVerrier, roots from the real
    /// companion matrix (the polynomial of a Hermitian matrix is real).
    fn charpoly_roots(a: &HermMatrix) -> Vec<f64> {
        let n = a.dim();
        let am = a.as_matrix();
        let mut coeffs = vec![c(1.0)]; // c_n = 1, then c_{n-1}, ...
        let mut m = CMatrix::identity(n, n);
        for k in 1..=n {
            let am_m = am * &m;
            let ck = -am_m.trace() / c(k as f64);
            coeffs.push(ck);
            m = am_m + CMatrix::identity(n, n) * ck;
        }
        let mut comp = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            comp[(0, j)] = -coeffs[j + 1].re;
        }
        for i in 1..n {
            comp[(i, i - 1)] = 1.0;
        }
        let mut roots: Vec<f64> = comp.complex_eigenvalues().iter().map(|z| z.re).collect();
        // Newton polish on the polynomial itself
        for r in roots.iter_mut() {
            for _ in 0..5 {
                let (mut p, mut dp) = (0.0, 0.0);
                for cf in &coeffs {
                    dp = dp * *r + p;
                    p = p * *r + cf.re;
                }
                if dp != 0.0 {
                    *r -= p / dp;
                }
            }
        }
        roots.sort_by(f64::total_cmp);
        roots
    }

    #[test]
    fn eig_matches_characteristic_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = random_hermitian(5, &mut rng);
        let eig = herm_eig(&a).unwrap();
        check_decomp(&a, &eig);
        let roots = charpoly_roots(&a);
        for (x, y) in eig.eigenvalues.iter().zip(&roots) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn eig_random_battery() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 8, 20, 50] {
            let a = random_hermitian(n, &mut rng);
            check_decomp(&a, &herm_eig(&a).unwrap());
        }
    }

    #[test]
    fn eig_spectrum_invariant_under_unitary_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_hermitian(6, &mut rng);
        let q = herm_eig(&random_hermitian(6, &mut rng)).unwrap().eigenvectors;
        let b = HermMatrix::new(&q * a.as_matrix() * q.adjoint()).unwrap();
        let ea = herm_eig(&a).unwrap().eigenvalues;
        let eb = herm_eig(&b).unwrap().eigenvalues;
        for (x, y) in ea.iter().zip(&eb) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn hermitian_check_rejects_asymmetric() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(1.0)]);
        assert!(matches!(HermMatrix::new(m), Err(NumericsError::NotHermitian { .. })));
        assert_eq!(HermMatrix::new(CMatrix::zeros(0, 0)), Err(NumericsError::Empty));
    }

    #[test]
    fn sqrt_examples() {
        let r = sqrt_psd(&HermMatrix::identity(3)).unwrap();
        assert!(frobenius(&(r.as_matrix() - CMatrix::identity(3, 3))) < 1e-14);

        let r = sqrt_psd(&HermMatrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert!((r.get(0, 0).re - 2.0).abs() < 1e-14);
        assert!((r.get(1, 1).re - 3.0).abs() < 1e-14);
        assert!(r.get(0, 1).norm() < 1e-14);

        // Szegő Gram on {0, 0.5}
        let k = HermMatrix::from_real(&[vec![1.0, 1.0], vec![1.0, 4.0 / 3.0]]).unwrap();
        let r = sqrt_psd(&k).unwrap();
        let sq = r.as_matrix() * r.as_matrix();
        assert!(frobenius(&(sq - k.as_matrix())) < 1e-10);
    }

    #[test]
    fn sqrt_clamps_roundoff_and_rejects_indefinite() {
        let k = HermMatrix::from_real(&[vec![1.0, 1.0], vec![1.0, 1.0 - 1e-14]]).unwrap();
        assert!(sqrt_psd(&k).is_ok());
        let k = HermMatrix::from_diagonal(&[1.0, -0.5]);
        match sqrt_psd(&k) {
            Err(NumericsError::Indefinite { eigenvalue, .. }) => assert_eq!(eigenvalue, -0.5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn svd_examples() {
        let s = svd(&CMatrix::zeros(3, 3)).unwrap();
        assert!(s.singular_values.iter().all(|&x| x == 0.0));
        assert!(frobenius(&(s.reconstruct())) == 0.0);

        let d = CMatrix::from_row_slice(2, 2, &[c(3.0), c(0.0), c(0.0), c(-2.0)]);
        let s = svd(&d).unwrap();
        assert!((s.singular_values[0] - 3.0).abs() < 1e-15);
        assert!((s.singular_values[1] - 2.0).abs() < 1e-15);
        assert_eq!(operator_norm(&d).unwrap(), 3.0);

        let u = CVector::from_vec(vec![c(2.0), c(0.0), c(0.0)]);
        let v = CVector::from_vec(vec![c(0.0), Complex64::new(0.0, 3.0), c(0.0)]);
        let r1 = &u * v.transpose();
        let s = svd(&r1).unwrap();
        assert!((s.singular_values[0] - 6.0).abs() < 1e-14);
        assert!(s.singular_values[1..].iter().all(|&x| x < 1e-14));
        assert!((operator_norm(&r1).unwrap() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn svd_random_rectangular() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (m, n) in [(1, 1), (4, 4), (6, 3), (3, 6), (12, 12), (50, 50)] {
            let a = CMatrix::from_fn(m, n, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let s = svd(&a).unwrap();
            let err = frobenius(&(s.reconstruct() - &a));
            assert!(err <= 1e-10 * (1.0 + frobenius(&a)), "{m}x{n}: {err}");
            assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
            let k = m.min(n);
            assert!(frobenius(&(s.u.adjoint() * &s.u - CMatrix::identity(k, k))) < 1e-10);
            assert!(frobenius(&(s.v.adjoint() * &s.v - CMatrix::identity(k, k))) < 1e-10);
            // independent check against nalgebra's bidiagonal SVD
            let reference = a.clone().singular_values();
            let top = reference.iter().cloned().fold(0.0, f64::max);
            assert!((operator_norm(&a).unwrap() - top).abs() <= 1e-12 * (1.0 + top));
        }
    }

    #[test]
    fn svd_rank_deficient_has_orthonormal_u() {
        let u = CVector::from_vec(vec![c(1.0), c(1.0), c(0.0), c(0.0)]);
        let a = &u * u.adjoint();
        let s = svd(&a).unwrap();
        assert!(frobenius(&(s.u.adjoint() * &s.u - CMatrix::identity(4, 4))) < 1e-10);
        assert!(frobenius(&(s.reconstruct() - &a)) < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn sqrt_squares_back(seed in 0u64..10_000, n in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = CMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let a = HermMatrix::new(&b * b.adjoint()).unwrap();
            let r = sqrt_psd(&a).unwrap();
            let err = frobenius(&(r.as_matrix() * r.as_matrix() - a.as_matrix()));
            proptest::prop_assert!(err <= 1e-8 * (1.0 + frobenius(a.as_matrix())));
        }
    }
}
