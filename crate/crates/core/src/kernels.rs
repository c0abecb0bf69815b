//! Point sets, kernel models and Gram matrices.
//!
//! Conventions: `K[(i, j)] = k(x_i, x_j)`, the kernel function `k_{x_j}` has
//! value vector `K[:, j]`, and for value vectors `f, g` the inner product of
//! the restricted space is `⟨f, g⟩ = g* K⁻¹ f`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numerics::{herm_eig, CMatrix, CVector, HermMatrix, SpectralDecomp};
use crate::{Error, FuncValues, Result};

/// Points must stay this far inside the unit disc or ball.
pub const BOUNDARY_MARGIN: f64 = 1e-12;
/// Gram matrices with a larger condition number are refused.
pub const MAX_CONDITION: f64 = 1e12;
/// Tolerance (relative to `max(1, λ_max)`) for negative eigenvalues of `1 - 1/K`.
pub const PICK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Point {
    Disc(Complex64),
    Ball(Vec<Complex64>),
    Abstract(usize),
}

impl Point {
    pub fn real(x: f64) -> Self {
        Point::Disc(Complex64::new(x, 0.0))
    }

    /// Coordinates in `C^d`, or `None` for abstract points.
    fn coords(&self) -> Option<&[Complex64]> {
        match self {
            Point::Disc(z) => Some(std::slice::from_ref(z)),
            Point::Ball(v) => Some(v),
            Point::Abstract(_) => None,
        }
    }

    pub fn euclidean_norm(&self) -> Option<f64> {
        self.coords()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
    }

    fn validate(&self) -> Result<()> {
        match self.euclidean_norm() {
            Some(r) if r.is_nan() || r >= 1.0 - BOUNDARY_MARGIN => Err(Error::InvalidPoint(format!(
                "{self} has norm {r}, must be < 1 - {BOUNDARY_MARGIN:e}"
            ))),
            Some(_) if matches!(self, Point::Ball(v) if v.is_empty()) => {
                Err(Error::InvalidPoint("ball point with no coordinates".into()))
            }
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let z = |z: &Complex64| {
            if z.im == 0.0 {
                format!("{}", z.re)
            } else {
                format!("{}{:+}i", z.re, z.im)
            }
        };
        match self {
            Point::Disc(w) => write!(f, "{}", z(w)),
            Point::Ball(v) => {
                let parts: Vec<String> = v.iter().map(z).collect();
                write!(f, "({})", parts.join(";"))
            }
            Point::Abstract(i) => write!(f, "#{i}"),
        }
    }
}

/// Ordered list of pairwise distinct points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("empty point set".into()));
        }
        for p in &points {
            p.validate()?;
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] == points[j] {
                    return Err(Error::InvalidPoint(format!(
                        "duplicate point {} at positions {i} and {j}",
                        points[i]
                    )));
                }
            }
        }
        Ok(PointSet { points })
    }

    pub fn disc_real(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| Point::real(x)).collect())
    }

    pub fn disc(zs: &[Complex64]) -> Result<Self> {
        Self::new(zs.iter().map(|&z| Point::Disc(z)).collect())
    }

    pub fn abstract_indices(n: usize) -> Result<Self> {
        Self::new((0..n).map(Point::Abstract).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn get(&self, i: usize) -> Result<&Point> {
        self.points.get(i).ok_or(Error::Index {
            index: i,
            len: self.points.len(),
        })
    }

    pub fn subset(&self, idx: &[usize]) -> Result<PointSet> {
        let pts = idx.iter().map(|&i| self.get(i).cloned()).collect::<Result<Vec<_>>>()?;
        PointSet::new(pts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelVariant {
    /// `1 / (1 - z conj(w))` on the disc.
    Szego,
    /// `1 / (1 - ⟨z, w⟩)` on the ball of `C^d`.
    DruryArveson { d: usize },
    /// `1 / (1 - ⟨b_i, b_j⟩)` on abstract indices.
    NormalizedEmbedding { vectors: Vec<Vec<Complex64>> },
    /// Kernel values given directly on abstract indices.
    ExplicitGram(HermMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    pub variant: KernelVariant,
    /// When set, the kernel is renormalized so that `k(x0, y) = 1`.
    pub basepoint: Option<Point>,
}

impl KernelModel {
    pub fn szego() -> Self {
        Self::from_variant(KernelVariant::Szego)
    }

    pub fn drury_arveson(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("Drury-Arveson dimension must be >= 1".into()));
        }
        Ok(Self::from_variant(KernelVariant::DruryArveson { d }))
    }

    pub fn embedding(vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        for (i, v) in vectors.iter().enumerate() {
            let r: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if r.is_nan() || r >= 1.0 {
                return Err(Error::InvalidPoint(format!("embedding vector {i} has norm {r} >= 1")));
            }
        }
        Ok(Self::from_variant(KernelVariant::NormalizedEmbedding { vectors }))
    }

    pub fn explicit(matrix: HermMatrix) -> Result<Self> {
        if let Some(i) = matrix.diagonal().iter().position(|&d| d.is_nan() || d <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "explicit Gram has non-positive diagonal entry at {i}"
            )));
        }
        Ok(Self::from_variant(KernelVariant::ExplicitGram(matrix)))
    }

    fn from_variant(variant: KernelVariant) -> Self {
        KernelModel {
            variant,
            basepoint: None,
        }
    }

    pub fn name(&self) -> String {
        let base = match &self.variant {
            KernelVariant::Szego => "szego".to_string(),
            KernelVariant::DruryArveson { d } => format!("da{d}"),
            KernelVariant::NormalizedEmbedding { .. } => "embedding".to_string(),
            KernelVariant::ExplicitGram(_) => "gram".to_string(),
        };
        match &self.basepoint {
            Some(p) => format!("{base}@{p}"),
            None => base,
        }
    }

    fn eval_raw(&self, x: &Point, y: &Point) -> Result<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        match (&self.variant, x, y) {
            (KernelVariant::Szego, Point::Disc(z), Point::Disc(w)) => Ok(one / (one - z * w.conj())),
            (KernelVariant::DruryArveson { d }, _, _) => {
                let (a, b) = (ball_coords(x, *d)?, ball_coords(y, *d)?);
                Ok(one / (one - inner(a, b)))
            }
            (KernelVariant::NormalizedEmbedding { vectors }, Point::Abstract(i), Point::Abstract(j)) => {
                let a = vectors.get(*i).ok_or(Error::Index {
                    index: *i,
                    len: vectors.len(),
                })?;
                let b = vectors.get(*j).ok_or(Error::Index {
                    index: *j,
                    len: vectors.len(),
                })?;
                Ok(one / (one - inner(a, b)))
            }
            (KernelVariant::ExplicitGram(m), Point::Abstract(i), Point::Abstract(j)) => {
                let n = m.dim();
                if *i >= n || *j >= n {
                    return Err(Error::Index {
                        index: (*i).max(*j),
                        len: n,
                    });
                }
                Ok(m.get(*i, *j))
            }
            _ => Err(Error::PointMismatch(format!(
                "{} cannot evaluate at ({x}, {y})",
                self.name()
            ))),
        }
    }
}

fn ball_coords(p: &Point, d: usize) -> Result<&[Complex64]> {
    match p {
        Point::Ball(v) if v.len() == d => Ok(v),
        Point::Disc(z) if d == 1 => Ok(std::slice::from_ref(z)),
        _ => Err(Error::PointMismatch(format!("{p} is not a point of the ball in C^{d}"))),
    }
}

/// `⟨a, b⟩ = Σ a_i conj(b_i)`.
fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// `k(x, y)`, including basepoint renormalization when the model carries one.
pub fn eval_kernel(model: &KernelModel, x: &Point, y: &Point) -> Result<Complex64> {
    let kxy = model.eval_raw(x, y)?;
    let Some(x0) = &model.basepoint else {
        return Ok(kxy);
    };
    let k00 = model.eval_raw(x0, x0)?;
    let kx0 = model.eval_raw(x, x0)?;
    let k0y = model.eval_raw(x0, y)?;
    if kx0.norm() == 0.0 {
        return Err(Error::VanishingKernel(x.to_string()));
    }
    if k0y.norm() == 0.0 {
        return Err(Error::VanishingKernel(y.to_string()));
    }
    Ok(kxy * k00 / (kx0 * k0y))
}

/// Renormalizes `model` at `x0`: `k̂(x,y) = k(x,y) k(x0,x0) / (k(x,x0) k(x0,y))`.
///
/// Explicit Grams are renormalized entrywise; other models record the
/// basepoint. Already-normalized models are returned unchanged.
pub fn normalize(model: &KernelModel, x0: &Point) -> Result<KernelModel> {
    if is_normalized_at(model, x0)? {
        return Ok(model.clone());
    }
    match &model.variant {
        KernelVariant::ExplicitGram(m) => {
            let Point::Abstract(b) = *x0 else {
                return Err(Error::PointMismatch(format!(
                    "{x0} is not an index of an explicit Gram"
                )));
            };
            let n = m.dim();
            if b >= n {
                return Err(Error::Index { index: b, len: n });
            }
            let k00 = m.get(b, b);
            for i in 0..n {
                if m.get(i, b).norm() == 0.0 {
                    return Err(Error::VanishingKernel(format!("#{i}")));
                }
            }
            let mut out = CMatrix::from_fn(n, n, |i, j| m.get(i, j) * k00 / (m.get(i, b) * m.get(b, j)));
            // the basepoint row and column are exactly one
            for i in 0..n {
                out[(i, b)] = Complex64::new(1.0, 0.0);
                out[(b, i)] = Complex64::new(1.0, 0.0);
            }
            KernelModel::explicit(HermMatrix::new(out)?)
        }
        _ => {
            // validates k(x0, x0) and the model/point pairing
            model.eval_raw(x0, x0)?;
            Ok(KernelModel {
                variant: model.variant.clone(),
                basepoint: Some(x0.clone()),
            })
        }
    }
}

fn is_normalized_at(model: &KernelModel, x0: &Point) -> Result<bool> {
    if model.basepoint.as_ref() == Some(x0) {
        return Ok(true);
    }
    if model.basepoint.is_some() {
        return Ok(false);
    }
    Ok(match (&model.variant, x0) {
        (KernelVariant::Szego, Point::Disc(z)) => z.norm() == 0.0,
        (KernelVariant::DruryArveson { .. }, p) => p.euclidean_norm() == Some(0.0),
        (KernelVariant::NormalizedEmbedding { vectors }, Point::Abstract(i)) => {
            vectors.get(*i).is_some_and(|v| v.iter().all(|z| z.norm() == 0.0))
        }
        (KernelVariant::ExplicitGram(m), Point::Abstract(b)) if *b < m.dim() => {
            (0..m.dim()).all(|j| m.get(*b, j) == Complex64::new(1.0, 0.0))
        }
        _ => false,
    })
}

/// Kernel matrix on a point set together with the factorizations every other
/// module needs. All caches are computed at construction.
#[derive(Debug, Clone)]
pub struct Gram {
    k: HermMatrix,
    khalf: HermMatrix,
    khalf_inv: HermMatrix,
    kinv: HermMatrix,
    spectrum: SpectralDecomp,
    condition_number: f64,
}

impl Gram {
    /// Refuses matrices that are not positive definite or whose condition
    /// number exceeds [`MAX_CONDITION`].
    pub fn from_matrix(k: HermMatrix) -> Result<Self> {
        let spectrum = herm_eig(&k)?;
        let (lmin, lmax) = (spectrum.lambda_min(), spectrum.lambda_max());
        let condition_number = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
        if lmax.is_nan() || lmax <= 0.0 || condition_number.is_nan() || condition_number > MAX_CONDITION {
            return Err(Error::IllConditioned {
                condition: condition_number,
                limit: MAX_CONDITION,
            });
        }
        let khalf = spectrum.apply_fn(f64::sqrt);
        let khalf_inv = spectrum.apply_fn(|x| 1.0 / x.sqrt());
        let kinv = spectrum.apply_fn(|x| 1.0 / x);
        Ok(Gram {
            k,
            khalf,
            khalf_inv,
            kinv,
            spectrum,
            condition_number,
        })
    }

    pub fn dim(&self) -> usize {
        self.k.dim()
    }

    pub fn k(&self) -> &HermMatrix {
        &self.k
    }

    pub fn khalf(&self) -> &HermMatrix {
        &self.khalf
    }

    pub fn khalf_inv(&self) -> &HermMatrix {
        &self.khalf_inv
    }

    pub fn kinv(&self) -> &HermMatrix {
        &self.kinv
    }

    pub fn spectrum(&self) -> &SpectralDecomp {
        &self.spectrum
    }

    pub fn condition_number(&self) -> f64 {
        self.condition_number
    }

    pub fn kxx(&self, i: usize) -> f64 {
        self.k.get(i, i).re
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.dim() {
            Ok(())
        } else {
            Err(Error::Index {
                index: i,
                len: self.dim(),
            })
        }
    }

    pub fn check_len(&self, f: &FuncValues) -> Result<()> {
        if f.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.dim(),
                got: f.len(),
            })
        }
    }

    /// Value vector of the kernel function `k_{x_i}`.
    pub fn kernel_function(&self, i: usize) -> FuncValues {
        self.k.as_matrix().column(i).clone_owned()
    }

    /// `⟨f, g⟩ = g* K⁻¹ f`.
    pub fn inner(&self, f: &FuncValues, g: &FuncValues) -> Complex64 {
        g.dotc(&(self.kinv.as_matrix() * f))
    }

    pub fn norm(&self, f: &FuncValues) -> f64 {
        self.inner(f, f).re.max(0.0).sqrt()
    }

    /// Coefficients `c = K⁻¹ f` with `f = Σ c_j k_{x_j}`.
    pub fn coefficients(&self, f: &FuncValues) -> CVector {
        self.kinv.as_matrix() * f
    }

    /// Gram of the sub-restriction on `idx`.
    pub fn restrict(&self, idx: &[usize]) -> Result<Gram> {
        for &i in idx {
            self.check_index(i)?;
        }
        Gram::from_matrix(self.k.submatrix(idx))
    }
}

/// Assembles the kernel matrix of `model` on `pts`.
pub fn kernel_matrix(model: &KernelModel, pts: &PointSet) -> Result<HermMatrix> {
    let n = pts.len();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = eval_kernel(model, &pts.points()[i], &pts.points()[j])?;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    Ok(HermMatrix::new(m)?)
}

pub fn gram(model: &KernelModel, pts: &PointSet) -> Result<Gram> {
    Gram::from_matrix(kernel_matrix(model, pts)?)
}

/// Vectors `b(x_i)` in a ball with `k(x_i, x_j) = 1 / (1 - ⟨b(x_i), b(x_j)⟩)`.
///
/// Factors `F = 1 - 1/K` (entrywise) as `B B*`; the embedding dimension is the
/// numerical rank of `F`.
pub fn pick_embedding(k: &HermMatrix) -> Result<Vec<Vec<Complex64>>> {
    let n = k.dim();
    let one = Complex64::new(1.0, 0.0);
    let mut f = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let kij = k.get(i, j);
            if kij.norm() == 0.0 {
                return Err(Error::NotCompletePick { eigenvalue: f64::NAN });
            }
            f[(i, j)] = one - one / kij;
        }
    }
    let f = HermMatrix::new(f)?;
    let eig = herm_eig(&f)?;
    let scale = eig.lambda_max().max(1.0);
    if eig.lambda_min() < -PICK_TOL * scale {
        return Err(Error::NotCompletePick {
            eigenvalue: eig.lambda_min(),
        });
    }
    let keep: Vec<usize> = (0..n).rev().filter(|&j| eig.eigenvalues[j] > 1e-14 * scale).collect();
    let vectors = (0..n)
        .map(|i| {
            keep.iter()
                .map(|&j| eig.eigenvectors[(i, j)] * eig.eigenvalues[j].sqrt())
                .collect()
        })
        .collect();
    Ok(vectors)
}

/// `S(b_i, b_j)` for a list of ball vectors.
pub fn embedding_kernel(vectors: &[Vec<Complex64>]) -> Result<HermMatrix> {
    let n = vectors.len();
    let one = Complex64::new(1.0, 0.0);
    Ok(HermMatrix::new(CMatrix::from_fn(n, n, |i, j| {
        one / (one - inner(&vectors[i], &vectors[j]))
    }))?)
}

/// `d_k(x_i, x_j) = sqrt(1 - |k(x_i,x_j)|² / (k(x_i,x_i) k(x_j,x_j)))`.
pub fn dk(k: &HermMatrix, i: usize, j: usize) -> f64 {
    if i == j {
        return 0.0;
    }
    let kij = k.get(i, j).norm();
    let cos2 = kij * kij / (k.get(i, i).re * k.get(j, j).re);
    (1.0 - cos2).clamp(0.0, 1.0).sqrt()
}

/// Unimodular `ω` with `⟨k_y, k_x⟩ = ω ⟨k_x, k_y⟩`, i.e. `K(i,j) / conj(K(i,j))`.
pub fn omega_phase(k: &HermMatrix, i: usize, j: usize) -> Complex64 {
    let kij = k.get(i, j);
    if kij.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        let u = kij / kij.norm();
        u / u.conj()
    }
}

/// Value vector from real parts.
pub fn real_values(xs: &[f64]) -> FuncValues {
    DVector::from_iterator(xs.len(), xs.iter().map(|&x| Complex64::new(x, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::frobenius;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_disc(rng: &mut ChaCha8Rng, rmax: f64) -> Complex64 {
        let r = rmax * rng.gen::<f64>().sqrt();
        Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
    }

    fn random_ball(rng: &mut ChaCha8Rng, d: usize, rmax: f64) -> Vec<Complex64> {
        let v: Vec<Complex64> = (0..d)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let r = rmax * rng.gen::<f64>();
        v.into_iter().map(|z| z * (r / n)).collect()
    }

    #[test]
    fn eval_examples() {
        let s = KernelModel::szego();
        let k = eval_kernel(&s, &Point::real(0.5), &Point::real(0.5)).unwrap();
        assert!((k.re - 4.0 / 3.0).abs() < 1e-15 && k.im == 0.0);
        let k = eval_kernel(&s, &Point::real(0.3), &Point::real(0.5)).unwrap();
        assert!((k.re - 1.0 / 0.85).abs() < 1e-15);
        let da = KernelModel::drury_arveson(2).unwrap();
        let o = Point::Ball(vec![c(0.0, 0.0); 2]);
        assert_eq!(eval_kernel(&da, &o, &o).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn eval_rejects_mismatched_points() {
        let s = KernelModel::szego();
        assert!(matches!(
            eval_kernel(&s, &Point::Abstract(0), &Point::real(0.1)),
            Err(Error::PointMismatch(_))
        ));
        let da = KernelModel::drury_arveson(3).unwrap();
        let p = Point::Ball(vec![c(0.1, 0.0); 2]);
        assert!(eval_kernel(&da, &p, &p).is_err());
    }

    #[test]
    fn point_set_validation() {
        assert!(PointSet::disc_real(&[0.1, 0.1]).is_err());
        assert!(PointSet::disc_real(&[1.0]).is_err());
        assert!(PointSet::disc_real(&[1.0 - 1e-13]).is_err());
        assert!(PointSet::disc_real(&[0.999]).is_ok());
        assert!(PointSet::new(vec![Point::Ball(vec![c(0.8, 0.0), c(0.0, 0.7)])]).is_err());
    }

    #[test]
    fn hermitian_symmetry_of_kernels() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = KernelModel::szego();
        let da = KernelModel::drury_arveson(3).unwrap();
        for _ in 0..100 {
            let (z, w) = (
                Point::Disc(random_disc(&mut rng, 0.99)),
                Point::Disc(random_disc(&mut rng, 0.99)),
            );
            let a = eval_kernel(&s, &z, &w).unwrap();
            let b = eval_kernel(&s, &w, &z).unwrap();
            assert!((a - b.conj()).norm() <= 1e-14 * a.norm());
            let (z, w) = (
                Point::Ball(random_ball(&mut rng, 3, 0.99)),
                Point::Ball(random_ball(&mut rng, 3, 0.99)),
            );
            let a = eval_kernel(&da, &z, &w).unwrap();
            let b = eval_kernel(&da, &w, &z).unwrap();
            assert!((a - b.conj()).norm() <= 1e-14 * a.norm());
        }
    }

    #[test]
    fn gram_examples() {
        let pts = PointSet::disc_real(&[0.0, 0.5]).unwrap();
        let g = gram(&KernelModel::szego(), &pts).unwrap();
        let expect = HermMatrix::from_real(&[vec![1.0, 1.0], vec![1.0, 4.0 / 3.0]]).unwrap();
        assert!(frobenius(&(g.k().as_matrix() - expect.as_matrix())) < 1e-15);

        let one = PointSet::disc_real(&[0.7]).unwrap();
        let g = gram(&KernelModel::szego(), &one).unwrap();
        assert_eq!(g.dim(), 1);
        assert!((g.kxx(0) - 1.0 / 0.51).abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let zs: Vec<Complex64> = (0..6).map(|_| random_disc(&mut rng, 0.9)).collect();
        let pts = PointSet::disc(&zs).unwrap();
        let a = kernel_matrix(&KernelModel::szego(), &pts).unwrap();
        let b = kernel_matrix(&KernelModel::drury_arveson(1).unwrap(), &pts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gram_refuses_near_coincident_points() {
        let pts = PointSet::disc_real(&[0.5, 0.5 + 1e-9]).unwrap();
        assert!(matches!(
            gram(&KernelModel::szego(), &pts),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn gram_caches_are_consistent() {
        let pts = PointSet::disc(&[c(0.1, 0.2), c(-0.5, 0.3), c(0.6, -0.6)]).unwrap();
        let g = gram(&KernelModel::szego(), &pts).unwrap();
        let r = g.khalf().as_matrix();
        assert!(frobenius(&(r * r - g.k().as_matrix())) < 1e-12);
        let ri = g.khalf_inv().as_matrix();
        assert!(frobenius(&(r * ri - CMatrix::identity(3, 3))) < 1e-12);
        // reproducing property ⟨f, k_x⟩ = f(x)
        let f = DVector::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.3, 0.3)]);
        for i in 0..3 {
            assert!((g.inner(&f, &g.kernel_function(i)) - f[i]).norm() < 1e-12);
        }
        assert!((g.norm(&g.kernel_function(1)) - g.kxx(1).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn normalize_examples() {
        let s = KernelModel::szego();
        assert_eq!(normalize(&s, &Point::real(0.0)).unwrap(), s);

        let m = HermMatrix::from_real(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let model = KernelModel::explicit(m).unwrap();
        let n = normalize(&model, &Point::Abstract(0)).unwrap();
        let KernelVariant::ExplicitGram(nm) = &n.variant else {
            panic!()
        };
        let expect = HermMatrix::from_real(&[vec![1.0, 1.0], vec![1.0, 4.0]]).unwrap();
        assert!(frobenius(&(nm.as_matrix() - expect.as_matrix())) < 1e-15);
        assert_eq!(normalize(&n, &Point::Abstract(0)).unwrap(), n);
    }

    #[test]
    fn normalize_off_origin_and_idempotence() {
        let x0 = Point::Disc(c(0.3, -0.2));
        let s = normalize(&KernelModel::szego(), &x0).unwrap();
        let ys = [c(0.5, 0.1), c(-0.4, -0.4), c(0.0, 0.8)];
        for y in ys {
            let v = eval_kernel(&s, &x0, &Point::Disc(y)).unwrap();
            assert!((v - c(1.0, 0.0)).norm() < 1e-14);
        }
        let twice = normalize(&s, &x0).unwrap();
        let pts = PointSet::disc(&ys).unwrap();
        let a = kernel_matrix(&s, &pts).unwrap();
        let b = kernel_matrix(&twice, &pts).unwrap();
        assert!(frobenius(&(a.as_matrix() - b.as_matrix())) < 1e-14);
        // renormalizing at a second point equals normalizing the raw kernel there
        let x1 = Point::Disc(c(-0.1, 0.5));
        let again = normalize(&s, &x1).unwrap();
        let direct = normalize(&KernelModel::szego(), &x1).unwrap();
        let a = kernel_matrix(&again, &pts).unwrap();
        let b = kernel_matrix(&direct, &pts).unwrap();
        assert!(frobenius(&(a.as_matrix() - b.as_matrix())) < 1e-13);
    }

    #[test]
    fn normalize_rejects_vanishing_kernel() {
        let m = HermMatrix::from_real(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let model = KernelModel::explicit(m).unwrap();
        assert!(matches!(
            normalize(&model, &Point::Abstract(0)),
            Err(Error::VanishingKernel(_))
        ));
    }

    #[test]
    fn pick_embedding_examples() {
        let pts = PointSet::disc_real(&[0.2, 0.5]).unwrap();
        let g = gram(&KernelModel::szego(), &pts).unwrap();
        let b = pick_embedding(g.k()).unwrap();
        assert_eq!(b[0].len(), 1);
        assert!((b[0][0].norm() - 0.2).abs() < 1e-12);
        assert!((b[1][0].norm() - 0.5).abs() < 1e-12);
        let back = embedding_kernel(&b).unwrap();
        assert!(frobenius(&(back.as_matrix() - g.k().as_matrix())) < 1e-12);

        let single = HermMatrix::from_real(&[vec![3.0]]).unwrap();
        let b = pick_embedding(&single).unwrap();
        let r2: f64 = b[0].iter().map(|z| z.norm_sqr()).sum();
        assert!((r2 - (1.0 - 1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn pick_embedding_rejects_indefinite() {
        // normalized at index 0; F = [[0,0,0],[0,0.5,0.9],[0,0.9,0.5]] is indefinite
        let f = [[0.0, 0.0, 0.0], [0.0, 0.5, 0.9], [0.0, 0.9, 0.5]];
        let rows: Vec<Vec<f64>> = f.iter().map(|r| r.iter().map(|x| 1.0 / (1.0 - x)).collect()).collect();
        let k = HermMatrix::from_real(&rows).unwrap();
        let fm = HermMatrix::from_real(&f.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        assert!(herm_eig(&fm).unwrap().lambda_min() < -0.3);
        assert!(matches!(pick_embedding(&k), Err(Error::NotCompletePick { .. })));
    }

    #[test]
    fn pick_embedding_round_trip_da() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 1..=4 {
            for n in [1, 5, 12] {
                let pts: Vec<Point> = (0..n).map(|_| Point::Ball(random_ball(&mut rng, d, 0.95))).collect();
                let pts = PointSet::new(pts).unwrap();
                let k = kernel_matrix(&KernelModel::drury_arveson(d).unwrap(), &pts).unwrap();
                let b = pick_embedding(&k).unwrap();
                assert!(b[0].len() <= d);
                let back = embedding_kernel(&b).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        let e = (back.get(i, j) - k.get(i, j)).norm();
                        assert!(e <= 1e-8 * k.get(i, j).norm(), "d={d} n={n}: {e}");
                    }
                }
            }
        }
    }

    #[test]
    fn dk_examples() {
        let pts = PointSet::disc_real(&[0.0, 0.37, 0.3, 0.5]).unwrap();
        let g = gram(&KernelModel::szego(), &pts).unwrap();
        assert!((dk(g.k(), 0, 1) - 0.37).abs() < 1e-15);
        // pseudohyperbolic |x - y| / |1 - x y|
        let expect = 0.2 / 0.85;
        assert!((dk(g.k(), 2, 3) - expect).abs() < 1e-15);
        assert!((expect - 0.235294).abs() < 1e-6);
        assert_eq!(dk(g.k(), 2, 2), 0.0);
    }

    #[test]
    fn dk_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let zs: Vec<Complex64> = (0..10).map(|_| random_disc(&mut rng, 0.95)).collect();
        let pts = PointSet::disc(&zs).unwrap();
        let k = kernel_matrix(&KernelModel::szego(), &pts).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                assert!((dk(&k, i, j) - dk(&k, j, i)).abs() < 1e-15);
                let d = dk(&k, i, j);
                assert!((0.0..=1.0).contains(&d));
                for l in 0..10 {
                    assert!(d <= dk(&k, i, l) + dk(&k, l, j) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn omega_examples() {
        let real = HermMatrix::from_real(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert_eq!(omega_phase(&real, 0, 1), c(1.0, 0.0));
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let m = HermMatrix::new(m).unwrap();
        assert!((omega_phase(&m, 0, 1) - c(-1.0, 0.0)).norm() < 1e-15);
        let z = HermMatrix::identity(2);
        assert_eq!(omega_phase(&z, 0, 1), c(1.0, 0.0));
        let w = omega_phase(&m, 1, 0);
        assert!((w.norm() - 1.0).abs() < 1e-15);
    }
}
