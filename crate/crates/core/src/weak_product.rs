//! Weak product norms `‖h‖_{H¹}` on finite restrictions.
//!
//! With `R = K^{1/2}`, a pair `(f, g) = (R a, R b)` has `‖f‖‖g‖ = |a||b|` and
//! pointwise product `f∘g = diag(R a bᵀ Rᵀ)`. Summing pairs gives
//!
//! ```text
//! ‖h‖_{H¹} = min { ‖N‖_* : diag(R N Rᵀ) = h },     Rᵀ = conj(R).
//! ```
//!
//! The constraint map `A(N) = diag(R N Rᵀ)` has adjoint
//! `A*(y) = R diag(y) conj(R)` and `A A* = G` with `G_ij = K_ij²`. The dual
//! of the program is `max |y* h| / ‖A*(y)‖`, which is the Han norm
//! expression, so every dual iterate certifies a lower bound.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::estimate::relative_gap;
use crate::kernels::Gram;
use crate::numerics::{herm_eig, operator_norm, svd, CMatrix, CVector, HermMatrix, Svd};
use crate::{Error, FuncValues, NormEstimate, Result};

#[derive(Debug, Clone)]
pub struct H1Problem<'a> {
    pub g: &'a Gram,
    pub h: FuncValues,
}

impl<'a> H1Problem<'a> {
    pub fn new(g: &'a Gram, h: FuncValues) -> Result<Self> {
        g.check_len(&h)?;
        Ok(H1Problem { g, h })
    }
}

#[derive(Debug, Clone)]
pub struct H1Options {
    /// Relative primal-dual gap at which the solver stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Soft-threshold step; defaults to the mean singular value of the
    /// least-norm feasible point.
    pub step: Option<f64>,
    /// Iterations between bound evaluations.
    pub check_every: usize,
}

impl Default for H1Options {
    fn default() -> Self {
        H1Options {
            tol: 1e-6,
            max_iter: 20000,
            step: None,
            check_every: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FactorizationCertificate {
    pub pairs: Vec<(FuncValues, FuncValues)>,
    pub cost: f64,
}

impl FactorizationCertificate {
    /// `Σ f_n g_n` pointwise.
    pub fn product_sum(&self) -> FuncValues {
        let n = self.pairs.first().map_or(0, |(f, _)| f.len());
        self.pairs
            .iter()
            .fold(FuncValues::zeros(n), |acc, (f, g)| acc + f.component_mul(g))
    }
}

const FEASIBILITY_TOL: f64 = 1e-9;

/// The linear constraint map and its Gram operator.
pub(crate) struct ConstraintMap {
    r: CMatrix,
    rbar: CMatrix,
    ginv: CMatrix,
}

impl ConstraintMap {
    pub(crate) fn new(g: &Gram) -> Result<Self> {
        let r = g.khalf().as_matrix().clone();
        let rbar = r.map(|z| z.conj());
        let k = g.k().as_matrix();
        let gmat = HermMatrix::new(k.map(|z| z * z))?;
        let eig = herm_eig(&gmat)?;
        let cutoff = 1e-14 * eig.lambda_max();
        let ginv = eig.apply_fn(|x| if x > cutoff { 1.0 / x } else { 0.0 }).into_inner();
        Ok(ConstraintMap { r, rbar, ginv })
    }

    /// `diag(R N Rᵀ)`.
    pub(crate) fn forward(&self, n: &CMatrix) -> CVector {
        let rn = &self.r * n;
        CVector::from_fn(rn.nrows(), |i, _| {
            (0..rn.ncols()).map(|b| rn[(i, b)] * self.r[(i, b)]).sum()
        })
    }

    /// `R diag(y) conj(R)`.
    pub(crate) fn adjoint(&self, y: &CVector) -> CMatrix {
        let mut ry = self.r.clone();
        for (j, yj) in y.iter().enumerate() {
            for i in 0..ry.nrows() {
                ry[(i, j)] *= yj;
            }
        }
        ry * &self.rbar
    }

    /// Orthogonal projection onto `{N : A(N) = h}`, with one refinement step.
    fn project(&self, z: &CMatrix, h: &CVector) -> CMatrix {
        let once = z - self.adjoint(&(&self.ginv * (self.forward(z) - h)));
        &once - self.adjoint(&(&self.ginv * (self.forward(&once) - h)))
    }

    /// Whether `A(N) = h` holds closely enough for `‖N‖_*` to bound the norm.
    fn feasible(&self, n: &CMatrix, h: &CVector) -> bool {
        (self.forward(n) - h).norm() <= FEASIBILITY_TOL * h.norm()
    }

    /// Projection of a matrix onto the range of `A*`, expressed as `y`.
    fn dual_coordinates(&self, y: &CMatrix) -> CVector {
        &self.ginv * self.forward(y)
    }

    /// `|y* h| / ‖A*(y)‖`, a lower bound for `‖h‖_{H¹}`.
    fn dual_bound(&self, y: &CVector, h: &CVector) -> Result<f64> {
        let num = y.dotc(h).norm();
        if num == 0.0 {
            return Ok(0.0);
        }
        let den = operator_norm(&self.adjoint(y))?;
        Ok(if den > 0.0 { num / den } else { 0.0 })
    }
}

fn soft_threshold(s: &Svd, t: f64) -> CMatrix {
    let shrunk = Svd {
        u: s.u.clone(),
        singular_values: s.singular_values.iter().map(|&x| (x - t).max(0.0)).collect(),
        v: s.v.clone(),
    };
    shrunk.reconstruct()
}

fn polar_part(s: &Svd) -> CMatrix {
    let tiny = s.singular_values[0] * 1e-12;
    let mut u = s.u.clone();
    for (j, &x) in s.singular_values.iter().enumerate() {
        if x <= tiny {
            u.column_mut(j).fill(Complex64::new(0.0, 0.0));
        }
    }
    u * s.v.adjoint()
}

pub(crate) struct Solution {
    pub estimate: NormEstimate,
    pub n: CMatrix,
    pub map: ConstraintMap,
}

/// Douglas-Rachford splitting between the nuclear norm and the affine
/// constraint.
pub(crate) fn solve(p: &H1Problem, opts: &H1Options) -> Result<Solution> {
    let dim = p.g.dim();
    let map = ConstraintMap::new(p.g)?;
    let h = &p.h;
    if h.iter().all(|z| z.norm() == 0.0) {
        return Ok(Solution {
            estimate: NormEstimate::exact(0.0, "zero"),
            n: CMatrix::zeros(dim, dim),
            map,
        });
    }
    let y0 = &map.ginv * h;
    let w0 = map.adjoint(&y0);
    let s0 = svd(&w0)?;
    let mut upper = if map.feasible(&w0, h) {
        s0.nuclear_norm()
    } else {
        f64::INFINITY
    };
    let mut best = w0.clone();
    let mut lower = map
        .dual_bound(&y0, h)?
        .max(map.dual_bound(&map.dual_coordinates(&polar_part(&s0)), h)?);
    let t = opts
        .step
        .unwrap_or_else(|| s0.nuclear_norm() / dim as f64)
        .max(f64::MIN_POSITIVE);
    let method = "douglas-rachford";
    if relative_gap(lower, upper) < opts.tol {
        return Ok(Solution {
            estimate: NormEstimate::bracket(lower, upper, 0, method, true),
            n: best,
            map,
        });
    }
    let mut w = w0;
    for it in 1..=opts.max_iter {
        let sw = svd(&w)?;
        let x = soft_threshold(&sw, t);
        let z = map.project(&(&x * Complex64::new(2.0, 0.0) - &w), h);
        let step = &z - &x;
        if it % opts.check_every == 0 || it == opts.max_iter {
            let sz = svd(&z)?;
            let nz = sz.nuclear_norm();
            if nz < upper && map.feasible(&z, h) {
                upper = nz;
                best = z.clone();
            }
            let sub = &w - &x;
            lower = lower
                .max(map.dual_bound(&map.dual_coordinates(&sub), h)?)
                .max(map.dual_bound(&map.dual_coordinates(&polar_part(&sz)), h)?);
            if relative_gap(lower, upper) < opts.tol {
                return Ok(Solution {
                    estimate: NormEstimate::bracket(lower, upper, it, method, true),
                    n: best,
                    map,
                });
            }
        }
        w += step;
    }
    Ok(Solution {
        estimate: NormEstimate::bracket(lower, upper, opts.max_iter, method, false),
        n: best,
        map,
    })
}

/// `‖h‖_{H¹(k|_V)}` with default solver options.
pub fn h1_norm(p: &H1Problem) -> Result<NormEstimate> {
    h1_norm_with(p, &H1Options::default())
}

pub fn h1_norm_with(p: &H1Problem, opts: &H1Options) -> Result<NormEstimate> {
    Ok(solve(p, opts)?.estimate)
}

/// Explicit factorization `h = Σ f_n g_n` from the SVD of the optimal `N`.
pub fn h1_certificate(p: &H1Problem) -> Result<FactorizationCertificate> {
    let sol = solve(p, &H1Options::default())?;
    if !sol.estimate.converged {
        return Err(Error::NotConverged(format!(
            "h1_norm gap {:.3e} after {} iterations",
            sol.estimate.gap, sol.estimate.iters
        )));
    }
    let dim = p.g.dim();
    if sol.estimate.upper == 0.0 {
        return Ok(FactorizationCertificate {
            pairs: Vec::new(),
            cost: 0.0,
        });
    }
    let s = svd(&sol.n)?;
    let tiny = s.singular_values[0] * 1e-14;
    let mut pairs = Vec::new();
    let mut cost = 0.0;
    for (k, &sigma) in s.singular_values.iter().enumerate() {
        if sigma <= tiny {
            continue;
        }
        let root = Complex64::new(sigma.sqrt(), 0.0);
        let u = s.u.column(k) * root;
        let vbar = s.v.column(k).map(|z| z.conj()) * root;
        let f = &sol.map.r * u;
        let g = &sol.map.r * vbar;
        cost += p.g.norm(&f) * p.g.norm(&g);
        pairs.push((f, g));
    }
    debug_assert!(pairs.iter().all(|(f, _)| f.len() == dim));
    Ok(FactorizationCertificate { pairs, cost })
}

/// `Σ_n |h(x_n)| / k(x_n, x_n)`.
pub fn h1_diag_formula(k: &HermMatrix, h: &FuncValues) -> f64 {
    h.iter().enumerate().map(|(i, z)| z.norm() / k.get(i, i).re).sum()
}

/// Best `Σ ‖f_n‖‖g_n‖` over `max_rank` pairs found by local descent from 64
/// seeded starts.
///
/// Works in the Cholesky basis `K = L L*`, independent of the square-root
/// whitening used by [`h1_norm`]. For fixed `G` the least-norm `F` is explicit,
/// leaving the smooth objective
/// `φ(G) = ½ h* Q⁻¹ h + ½ ‖G‖²`, `Q = K ∘ (LG)(LG)*`, minimized by BFGS.
pub fn h1_norm_bruteforce(p: &H1Problem, max_rank: usize) -> Result<f64> {
    h1_norm_bruteforce_seeded(p, max_rank, 64, 0x5eed)
}

pub fn h1_norm_bruteforce_seeded(p: &H1Problem, max_rank: usize, starts: usize, seed: u64) -> Result<f64> {
    let h = &p.h;
    if h.iter().all(|z| z.norm() == 0.0) {
        return Ok(0.0);
    }
    let n = p.g.dim();
    let r = max_rank.max(1);
    let k = p.g.k().as_matrix();
    let l = k
        .clone()
        .cholesky()
        .ok_or(crate::numerics::NumericsError::Singular)?
        .l();
    let obj = ReducedObjective { l: &l, k, h };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..starts {
        let g0 = DMatrix::from_fn(n, r, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let g = bfgs(&obj, g0, 2000);
        if let Some(cost) = obj.factor_cost(&g) {
            best = best.min(cost);
        }
    }
    Ok(best)
}

struct ReducedObjective<'a> {
    l: &'a CMatrix,
    k: &'a CMatrix,
    h: &'a CVector,
}

impl ReducedObjective<'_> {
    /// `z = Q⁻¹ h` and `L G`.
    fn multiplier(&self, g: &CMatrix) -> Option<(CVector, CMatrix)> {
        let p = self.l * g;
        let q = self.k.component_mul(&(&p * p.adjoint()));
        let z = q.cholesky()?.solve(self.h);
        z.iter().all(|x| x.re.is_finite() && x.im.is_finite()).then_some((z, p))
    }

    fn value_grad(&self, g: &CMatrix) -> Option<(f64, CMatrix)> {
        let (z, p) = self.multiplier(g)?;
        let value = 0.5 * self.h.dotc(&z).re + 0.5 * g.norm_squared();
        let n = z.len();
        let kz = CMatrix::from_fn(n, n, |i, j| z[i].conj() * self.k[(i, j)] * z[j]);
        let w = kz * p.map(|x| x.conj());
        Some((value, g - self.l.adjoint() * w.map(|x| x.conj())))
    }

    /// Balanced `Σ ‖F_k‖‖G_k‖` for the least-norm `F`, if the constraint holds.
    fn factor_cost(&self, g: &CMatrix) -> Option<f64> {
        let (z, p) = self.multiplier(g)?;
        // F = L* (diag(z) conj(P))
        let n = z.len();
        let zp = CMatrix::from_fn(n, p.ncols(), |i, k| z[i] * p[(i, k)].conj());
        let f = self.l.adjoint() * zp;
        let lf = self.l * &f;
        let resid: f64 = (0..n)
            .map(|i| ((0..f.ncols()).map(|k| lf[(i, k)] * p[(i, k)]).sum::<Complex64>() - self.h[i]).norm())
            .fold(0.0, f64::max);
        (resid <= 1e-9 * (1.0 + self.h.amax_abs()))
            .then(|| (0..f.ncols()).map(|k| f.column(k).norm() * g.column(k).norm()).sum())
    }
}

trait AmaxAbs {
    fn amax_abs(&self) -> f64;
}

impl AmaxAbs for CVector {
    fn amax_abs(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn pack(m: &CMatrix) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_iterator(2 * m.len(), m.iter().flat_map(|z| [z.re, z.im]))
}

fn unpack(x: &nalgebra::DVector<f64>, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_iterator(rows, cols, x.as_slice().chunks(2).map(|c| Complex64::new(c[0], c[1])))
}

/// BFGS with Armijo backtracking on the real coordinates of `G`.
fn bfgs(obj: &ReducedObjective, g0: CMatrix, max_iter: usize) -> CMatrix {
    let (rows, cols) = g0.shape();
    let Some((mut fx, grad)) = obj.value_grad(&g0) else {
        return g0;
    };
    let mut x = pack(&g0);
    let mut gx = pack(&grad);
    let dim = x.len();
    let mut hinv = nalgebra::DMatrix::<f64>::identity(dim, dim);
    for _ in 0..max_iter {
        if gx.norm() <= 1e-12 * (1.0 + fx) {
            break;
        }
        let mut d = -(&hinv * &gx);
        if d.dot(&gx) >= 0.0 {
            hinv.fill_with_identity();
            d = -gx.clone();
        }
        let slope = d.dot(&gx);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn = &x + &d * step;
            if let Some((fn_, gn)) = obj.value_grad(&unpack(&xn, rows, cols)) {
                if fn_ <= fx + 1e-4 * step * slope {
                    accepted = Some((xn, fn_, pack(&gn)));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            break;
        };
        let s = &xn - &x;
        let y = &gn - &gx;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            let rho = 1.0 / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            hinv +=
                (&s * s.transpose()) * (rho * (1.0 + rho * yhy)) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        let stalled = fx - fn_ <= 1e-16 * fx.abs();
        x = xn;
        fx = fn_;
        gx = gn;
        if stalled {
            break;
        }
    }
    unpack(&x, rows, cols)
}
