//! Hankel operators `H_b` on finite restrictions.
//!
//! `H_b` maps `f` to the conjugate of a function `ψ` with
//! `⟨φ, ψ⟩ = ⟨φ f, b⟩` for all `φ`. In value coordinates, with `c = K⁻¹ b`
//! and `R = K^{1/2}`:
//!
//! ```text
//! ψ = K diag(c) conj(f),      A = R diag(c) conj(R),      ‖H_b‖ = ‖A‖.
//! ```
//!
//! `A` acts on whitened coordinates: `R⁻¹ ψ = A conj(R⁻¹ f)`. The placement of
//! the conjugations is checked by the pairing test and by `A = u uᵀ` with
//! `u = R e_x` for `b = k_x`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kernels::{omega_phase, Gram};
use crate::numerics::{herm_eig, operator_norm, CMatrix, CVector, HermMatrix};
use crate::weak_product::{h1_norm, H1Problem};
use crate::{FuncValues, Result};

#[derive(Debug, Clone)]
pub struct HankelRep {
    pub b: FuncValues,
    /// Whitened representative `R diag(K⁻¹ b) conj(R)`.
    pub a: CMatrix,
    pub norm: f64,
    coeffs: CVector,
    k: CMatrix,
    kinv: CMatrix,
}

impl HankelRep {
    /// Values of `ψ` where `H_b f = conj(ψ)`.
    pub fn apply(&self, f: &FuncValues) -> FuncValues {
        let cf = CVector::from_fn(f.len(), |i, _| self.coeffs[i] * f[i].conj());
        &self.k * cf
    }

    /// `|⟨φ, ψ⟩ - ⟨φ f, b⟩|` for `H_b f = conj(ψ)`.
    pub fn pairing_defect(&self, phi: &FuncValues, f: &FuncValues) -> f64 {
        let psi = self.apply(f);
        let lhs = psi.dotc(&(&self.kinv * phi));
        let rhs = self.b.dotc(&(&self.kinv * phi.component_mul(f)));
        (lhs - rhs).norm()
    }
}

pub fn hankel_matrix(g: &Gram, b: &FuncValues) -> Result<HankelRep> {
    g.check_len(b)?;
    let coeffs = g.coefficients(b);
    let r = g.khalf().as_matrix();
    let mut rc = r.clone();
    for (j, cj) in coeffs.iter().enumerate() {
        for i in 0..rc.nrows() {
            rc[(i, j)] *= cj;
        }
    }
    let a = rc * r.map(|z| z.conj());
    let norm = operator_norm(&a)?;
    Ok(HankelRep {
        b: b.clone(),
        a,
        norm,
        coeffs,
        k: g.k().as_matrix().clone(),
        kinv: g.kinv().as_matrix().clone(),
    })
}

/// `‖b‖_Han = ‖H_b‖`.
pub fn han_norm(g: &Gram, b: &FuncValues) -> Result<f64> {
    Ok(hankel_matrix(g, b)?.norm)
}

/// Lower bound for `‖b‖_Han` from the pairing `|⟨b, h⟩| / ‖h‖_{H¹}`.
///
/// Probes are products `f g` of unit vectors of the Cholesky basis, then
/// random products improved by alternating ascent, up to `n_probe` in total.
/// The best product is finally rescaled by its computed `H¹` norm.
pub fn han_norm_dual(g: &Gram, b: &FuncValues, n_probe: usize) -> Result<f64> {
    g.check_len(b)?;
    let n = g.dim();
    if b.iter().all(|z| z.norm() == 0.0) {
        return Ok(0.0);
    }
    let l = g
        .k()
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or(crate::numerics::NumericsError::Singular)?
        .l();
    let cbar = g.coefficients(b).map(|z| z.conj());
    // ⟨f g, b⟩ = aᵀ M β for f = L a, g = L β
    let mut m = l.transpose();
    for (j, cj) in cbar.iter().enumerate() {
        for i in 0..n {
            m[(i, j)] *= cj;
        }
    }
    let m = m * &l;

    let mut best = (0.0, CVector::zeros(n), CVector::zeros(n));
    let consider = |a: CVector, beta: CVector, best: &mut (f64, CVector, CVector)| {
        let v = (a.transpose() * &m * &beta)[(0, 0)].norm();
        if v > best.0 {
            *best = (v, a, beta);
        }
    };
    let mut used = 0;
    'pairs: for i in 0..n {
        for j in i..n {
            if used >= n_probe {
                break 'pairs;
            }
            let (ei, ej) = (unit(n, i), unit(n, j));
            consider(ei, ej, &mut best);
            used += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xd0a1);
    while used < n_probe {
        let beta0 = DMatrix::from_fn(n, 1, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let (a, beta) = ascend(&m, beta0.column(0).normalize(), 500);
        consider(a, beta, &mut best);
        used += 1;
    }
    // refine the winner
    let (a, beta) = ascend(&m, best.2.clone(), 500);
    consider(a, beta, &mut best);

    let (raw, a, beta) = best;
    let h = (&l * a).component_mul(&(&l * beta));
    let pairing = g.inner(b, &h).norm();
    let h1 = h1_norm(&H1Problem::new(g, h)?)?;
    let rescaled = if h1.upper > 0.0 { pairing / h1.upper } else { 0.0 };
    Ok(raw.max(rescaled))
}

fn unit(n: usize, i: usize) -> CVector {
    let mut e = CVector::zeros(n);
    e[i] = Complex64::new(1.0, 0.0);
    e
}

/// Alternating maximization of `|aᵀ M β|` over unit `a, β`.
fn ascend(m: &CMatrix, mut beta: CVector, iters: usize) -> (CVector, CVector) {
    let mut a = CVector::zeros(m.nrows());
    let mut prev = 0.0;
    for _ in 0..iters {
        let mb = m * &beta;
        let nb = mb.norm();
        if nb == 0.0 {
            break;
        }
        a = mb.map(|z| z.conj()) / Complex64::new(nb, 0.0);
        let ma = m.transpose() * &a;
        let na = ma.norm();
        if na == 0.0 {
            break;
        }
        beta = ma.map(|z| z.conj()) / Complex64::new(na, 0.0);
        if (na - prev).abs() <= 1e-15 * na {
            break;
        }
        prev = na;
    }
    (a, beta)
}

/// `‖P_u - P_v‖` for the unit kernel directions `u = k_{x_i}/√k(x_i,x_i)`.
///
/// In an orthonormal basis `{u, w}` of their span, `P_u - P_v` is
/// `[[1-|α|², -αβ], [-conj(α)β, -β²]]` with `α = ⟨v, u⟩`, `β = √(1-|α|²)`.
pub fn projection_diff_norm(k: &HermMatrix, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Ok(0.0);
    }
    let alpha = k.get(i, j) / (k.get(i, i).re * k.get(j, j).re).sqrt();
    let beta = (1.0 - alpha.norm_sqr()).max(0.0).sqrt();
    let d = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(beta * beta, 0.0),
            -alpha * beta,
            -alpha.conj() * beta,
            Complex64::new(-beta * beta, 0.0),
        ],
    );
    let eig = herm_eig(&HermMatrix::new(d)?)?;
    Ok(eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs())))
}

/// `b_x - conj(ω) b_y` with `b_x = k_x / k(x,x)` and `ω` from [`omega_phase`].
pub fn metric_symbol(g: &Gram, i: usize, j: usize) -> Result<FuncValues> {
    g.check_index(i)?;
    g.check_index(j)?;
    let w = omega_phase(g.k(), i, j);
    let bx = g.kernel_function(i) / Complex64::new(g.kxx(i), 0.0);
    let by = g.kernel_function(j) / Complex64::new(g.kxx(j), 0.0);
    Ok(bx - by * w.conj())
}

/// The two operator norms `‖u uᵀ - conj(ω) v vᵀ‖` and `‖u u* - τ v v*‖` with
/// `τ = ω ⟨u,v⟩ / ⟨v,u⟩`, which coincide for unit `u, v`.
pub fn unit_vector_norms(u: &CVector, v: &CVector, omega: Complex64) -> Result<(f64, f64)> {
    let uv = v.dotc(u);
    let tau = if uv.norm() == 0.0 {
        omega
    } else {
        omega * uv / uv.conj()
    };
    let sym = u * u.transpose() - v * v.transpose() * omega.conj();
    let herm = u * u.adjoint() - v * v.adjoint() * tau;
    Ok((operator_norm(&sym)?, operator_norm(&herm)?))
}
