//! Pointwise estimates on the `H^p` scale: Hardy quadrature for powers of the
//! Szegő kernel, kernel-function bounds and `δ_x` dual-norm bound pairs.

use serde::{Deserialize, Serialize};

use crate::hankel::han_norm;
use crate::kernels::{eval_kernel, gram, pick_embedding, Gram, KernelModel, Point, PointSet};
use crate::weak_product::{h1_norm, H1Problem};
use crate::{Error, Result};

/// Initial trapezoid node count on `[0, π]`.
pub const MIN_NODES: usize = 4096;
/// Largest node count before the quadrature gives up.
pub const MAX_NODES: usize = 1 << 24;
/// Relative change between doublings at which the quadrature stops.
pub const QUAD_TOL: f64 = 1e-8;

/// Exponent `p` with its conjugate `q` and interpolation parameter `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PExponent {
    pub p: f64,
    /// `f64::INFINITY` when `p = 1`.
    pub q: f64,
    pub theta: f64,
}

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidArgument(format!("exponent p = {p} must lie in [1, inf)")));
        }
        let q = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
        Ok(PExponent {
            p,
            q,
            theta: (p - 1.0) / p,
        })
    }

    pub fn q_is_infinite(&self) -> bool {
        self.q.is_infinite()
    }

    /// `1/p + 1/q`, which should be one.
    pub fn conjugacy(&self) -> f64 {
        1.0 / self.p + if self.q_is_infinite() { 0.0 } else { 1.0 / self.q }
    }
}

/// A radius `r` and the diagonal kernel value `1 / (1 - r²)` it corresponds to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub r: f64,
    pub kxx: f64,
}

impl RadialProfile {
    pub fn from_r(r: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::InvalidArgument(format!("radius {r} must lie in [0, 1)")));
        }
        Ok(RadialProfile {
            r,
            kxx: 1.0 / ((1.0 - r) * (1.0 + r)),
        })
    }

    /// Requires `k(x,x) >= 1`, as for a kernel normalized at some point.
    pub fn from_kxx(kxx: f64) -> Result<Self> {
        if !kxx.is_finite() || kxx < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "k(x,x) = {kxx} < 1; the kernel is not normalized"
            )));
        }
        Ok(RadialProfile {
            r: (1.0 - 1.0 / kxx).sqrt(),
            kxx,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub nodes: usize,
    pub rel_change: f64,
    pub converged: bool,
}

/// `(1/2π) ∫ |1 - r e^{it}|^{-s} dt` by the trapezoid rule.
///
/// The substitution `e^{it} = (w + a)/(1 + a w)`, `w = e^{iu}`, spreads the
/// peak at `t = 0`; `a` is chosen so the transformed integrand has comparable
/// peaks at `u = 0` and `u = π`. The integrand is even in `u`, so only `[0, π]`
/// is sampled and every doubling reuses the previous nodes.
pub fn circle_mean(r: f64, s: f64) -> Result<QuadratureEstimate> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!("radius {r} must lie in [0, 1)")));
    }
    if r == 0.0 || s == 0.0 {
        return Ok(QuadratureEstimate {
            value: 1.0,
            nodes: 1,
            rel_change: 0.0,
            converged: true,
        });
    }
    let a = (1.0 - ((1.0 - r) * (1.0 + r)).sqrt()) / r;
    let c0 = ((1.0 - r) * (1.0 + a)).powi(2);
    let c1 = 4.0 * (1.0 - r * a) * (r - a);
    let one_m_a2 = (1.0 - a) * (1.0 + a);
    let f = |u: f64| {
        let (sh, ch) = (0.5 * u).sin_cos();
        let num = c0 + c1 * sh * sh;
        let den = (1.0 - a) * (1.0 - a) + 4.0 * a * ch * ch;
        num.powf(-0.5 * s) * den.powf(0.5 * s - 1.0) * one_m_a2
    };

    let target = (64.0 / (1.0 - a)).ceil();
    let mut n = MIN_NODES;
    while (n as f64) < target && n < MAX_NODES {
        n *= 2;
    }
    let pi = std::f64::consts::PI;
    let mut sum = 0.5 * (f(0.0) + f(pi)) + (1..n).map(|j| f(pi * j as f64 / n as f64)).sum::<f64>();
    let mut mean = sum / n as f64;
    loop {
        if n >= MAX_NODES {
            return Ok(QuadratureEstimate {
                value: mean,
                nodes: n,
                rel_change: f64::NAN,
                converged: false,
            });
        }
        let odd: f64 = (0..n).map(|j| f(pi * (2 * j + 1) as f64 / (2 * n) as f64)).sum();
        sum += odd;
        n *= 2;
        let next = sum / n as f64;
        let change = (next - mean).abs() / next.abs();
        mean = next;
        if change < QUAD_TOL {
            return Ok(QuadratureEstimate {
                value: mean,
                nodes: n,
                rel_change: change,
                converged: true,
            });
        }
    }
}

/// `‖s_r^α‖_{H^p}` on the circle, `s_r(t) = 1 / (1 - r e^{it})`.
pub fn hardy_norm_power(r: f64, p: PExponent, alpha: f64) -> Result<QuadratureEstimate> {
    let mut q = circle_mean(r, alpha * p.p)?;
    q.value = q.value.powf(1.0 / p.p);
    Ok(q)
}

fn diagonal_profile(model: &KernelModel, x: &Point) -> Result<RadialProfile> {
    RadialProfile::from_kxx(eval_kernel(model, x, x)?.re)
}

/// Upper bound for `‖k_x‖` in `H^p(k)` by the Hardy norm of the Szegő
/// kernel at the radius with the same diagonal value.
pub fn kernel_hq_upper(model: &KernelModel, x: &Point, p: PExponent) -> Result<f64> {
    let prof = diagonal_profile(model, x)?;
    finite(hardy_norm_power(prof.r, p, 1.0)?)
}

/// Upper bound for `‖k_x^{2/p}‖` in `H^p(k)`: `‖s_r^{2/p}‖_{H^p}`.
pub fn kernel_power_upper(model: &KernelModel, x: &Point, p: PExponent) -> Result<f64> {
    let prof = diagonal_profile(model, x)?;
    finite(hardy_norm_power(prof.r, p, 2.0 / p.p)?)
}

fn finite(q: QuadratureEstimate) -> Result<f64> {
    if q.converged {
        Ok(q.value)
    } else {
        Err(Error::NotConverged(format!(
            "quadrature reached {} nodes without meeting {QUAD_TOL:e}",
            q.nodes
        )))
    }
}

/// Two-sided bounds for the dual norm of point evaluation at `x_i` on the
/// `p` level of the scale, from the endpoint values
/// `‖k_x‖_Han`, `‖k_x‖_{H²} = √k(x,x)` and `‖k_x‖_{H¹}` combined by
/// duality and log-convexity.
///
/// At `p = 1` both bounds are `‖k_x‖_Han`; at `p = 2` both are `√k(x,x)`.
pub fn delta_dual_bounds(g: &Gram, i: usize, p: PExponent) -> Result<(f64, f64)> {
    g.check_index(i)?;
    let k = g.kxx(i);
    let kx = g.kernel_function(i);
    let han = han_norm(g, &kx)?;
    if p.p == 1.0 {
        return Ok((han, han));
    }
    let h1_upper = || -> Result<f64> { Ok(h1_norm(&H1Problem::new(g, kx.clone())?)?.upper) };
    let root = k.sqrt();
    if p.p <= 2.0 {
        let s = 1.0 - 2.0 / p.q;
        let upper = root.powf(1.0 - s) * han.powf(s);
        let t = 2.0 - 2.0 / p.p;
        let a = if t < 1.0 { h1_upper()? } else { 1.0 };
        let lower = k / (a.powf(1.0 - t) * k.powf(0.5 * t));
        Ok((lower, upper))
    } else {
        let s = 1.0 - 2.0 / p.p;
        let lower = k / (root.powf(1.0 - s) * han.powf(s));
        let upper = h1_upper()?.powf(1.0 - 2.0 / p.p) * k.powf(1.0 / p.p);
        Ok((lower, upper))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThmRow {
    pub kernel: String,
    pub point: String,
    pub p: f64,
    pub k_xx: f64,
    pub lower: f64,
    pub upper: f64,
    /// `√(lower·upper) / k(x,x)^{1/p}`.
    pub ratio_a: f64,
    /// `kernel_hq_upper(x, 1) / (1 + log k(x,x))`.
    pub ratio_c: f64,
    /// The same ratio computed through the Pick embedding into the ball.
    pub ratio_d: f64,
}

pub const THM_COLUMNS: [&str; 9] = [
    "kernel", "point", "p", "k_xx", "lower", "upper", "ratio_a", "ratio_c", "ratio_d",
];

/// One row per `(x, p)` comparing the computed bounds with the predicted
/// growth rates.
pub fn thmc1_report(model: &KernelModel, xs: &[Point], ps: &[PExponent]) -> Result<Vec<ThmRow>> {
    let pts = PointSet::new(xs.to_vec())?;
    let g = gram(model, &pts)?;
    let emb = pick_embedding(g.k())?;
    let one = PExponent::new(1.0)?;
    let mut rows = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        let k = g.kxx(i);
        let log_scale = 1.0 + k.ln();
        let ratio_c = kernel_hq_upper(model, x, one)? / log_scale;
        let bnorm = emb[i].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().min(1.0 - 1e-16);
        let ratio_d = finite(hardy_norm_power(bnorm, one, 1.0)?)? / log_scale;
        for &p in ps {
            let (lower, upper) = delta_dual_bounds(&g, i, p)?;
            rows.push(ThmRow {
                kernel: model.name(),
                point: x.to_string(),
                p: p.p,
                k_xx: k,
                lower,
                upper,
                ratio_a: (lower * upper).sqrt() / k.powf(1.0 / p.p),
                ratio_c,
                ratio_d,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{gram, PointSet};
    use num_complex::Complex64;

    /// `Σ ((s/2)_n / n!)² r^{2n}` from the binomial series of `(1 - r e^{it})^{-s/2}`.
    fn series_mean(r: f64, s: f64) -> f64 {
        let (mut c, mut total, mut rn) = (1.0, 1.0, 1.0);
        for n in 0..200_000 {
            c *= (0.5 * s + n as f64) / (n as f64 + 1.0);
            rn *= r * r;
            let term = c * c * rn;
            total += term;
            if term < 1e-18 * total {
                break;
            }
        }
        total
    }

    #[test]
    fn exponent_conjugacy() {
        for p in [1.0, 1.1, 4.0 / 3.0, 2.0, 3.0, 10.0] {
            let e = PExponent::new(p).unwrap();
            assert!((e.conjugacy() - 1.0).abs() <= 1e-14);
            assert!((0.0..1.0).contains(&e.theta));
        }
        assert!(PExponent::new(1.0).unwrap().q_is_infinite());
        assert!(PExponent::new(0.5).is_err());
        assert!(PExponent::new(f64::NAN).is_err());
    }

    #[test]
    fn radial_profile_round_trip() {
        for r in [0.0, 0.3, 0.9, 0.999999] {
            let a = RadialProfile::from_r(r).unwrap();
            let b = RadialProfile::from_kxx(a.kxx).unwrap();
            assert!((a.r - b.r).abs() < 1e-9);
        }
        assert!(RadialProfile::from_kxx(0.5).is_err());
        assert!(RadialProfile::from_r(1.0).is_err());
    }

    #[test]
    fn hardy_examples() {
        let two = PExponent::new(2.0).unwrap();
        let v = hardy_norm_power(0.6, two, 1.0).unwrap();
        assert!((v.value - 1.25).abs() < 1e-8);
        for p in [1.0, 2.5] {
            let v = hardy_norm_power(0.0, PExponent::new(p).unwrap(), 0.7).unwrap();
            assert_eq!(v.value, 1.0);
        }
    }

    #[test]
    fn parseval_closed_form() {
        let two = PExponent::new(2.0).unwrap();
        for r in [0.0, 0.5, 0.9, 0.99, 0.9999] {
            let v = hardy_norm_power(r, two, 1.0).unwrap();
            let exact = 1.0 / (1.0 - r * r);
            assert!(v.converged);
            assert!((v.value * v.value - exact).abs() <= 1e-8 * exact, "r={r}");
        }
    }

    #[test]
    fn quadrature_matches_series() {
        for r in [0.3, 0.7, 0.9, 0.97] {
            for s in [0.5, 1.0, 1.5, 3.0, 4.0] {
                let q = circle_mean(r, s).unwrap();
                let e = series_mean(r, s);
                assert!((q.value - e).abs() <= 1e-8 * e, "r={r} s={s}: {} vs {e}", q.value);
            }
        }
    }

    #[test]
    fn near_boundary_converges() {
        let q = circle_mean(1.0 - 1e-6, 1.0).unwrap();
        assert!(q.converged);
        let pi = std::f64::consts::PI;
        let asym = (16.0 / (1.0 - (1.0 - 1e-6f64).powi(2))).ln() / pi;
        assert!((q.value - asym).abs() < 1e-4 * asym);
        let q3 = circle_mean(1.0 - 1e-6, 3.0).unwrap();
        assert!(q3.converged && q3.value > 1e11);
    }

    #[test]
    fn kernel_bounds_examples() {
        let two = PExponent::new(2.0).unwrap();
        let one = PExponent::new(1.0).unwrap();
        let m = crate::numerics::HermMatrix::from_real(&[vec![4.0]]).unwrap();
        let model = KernelModel::explicit(m).unwrap();
        assert!((kernel_hq_upper(&model, &Point::Abstract(0), two).unwrap() - 2.0).abs() < 1e-8);
        assert!((kernel_power_upper(&model, &Point::Abstract(0), two).unwrap() - 2.0).abs() < 1e-8);
        let s = KernelModel::szego();
        assert!((kernel_hq_upper(&s, &Point::real(0.0), one).unwrap() - 1.0).abs() < 1e-15);
        let x = Point::real(0.7);
        let k: f64 = 1.0 / 0.51;
        assert!((kernel_hq_upper(&s, &x, two).unwrap() - k.sqrt()).abs() < 1e-8);
        // the literal power bound at p = 1 is the full diagonal value
        assert!((kernel_power_upper(&s, &x, one).unwrap() - k).abs() < 1e-8 * k);
    }

    #[test]
    fn log_growth_band() {
        let one = PExponent::new(1.0).unwrap();
        let s = KernelModel::szego();
        let ratios: Vec<f64> = (0..10)
            .map(|j| {
                let r = 1.0 - 0.1 * 10f64.powf(-5.0 * j as f64 / 9.0);
                let k = 1.0 / (1.0 - r * r);
                kernel_hq_upper(&s, &Point::real(r), one).unwrap() / (1.0 + k.ln())
            })
            .collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi / lo <= 2.0, "{ratios:?}");
    }

    #[test]
    fn delta_bounds_examples() {
        let g = gram(&KernelModel::szego(), &PointSet::disc_real(&[0.0, 0.5]).unwrap()).unwrap();
        let (lo, hi) = delta_dual_bounds(&g, 1, PExponent::new(2.0).unwrap()).unwrap();
        let e = (4.0f64 / 3.0).sqrt();
        assert!((lo - e).abs() < 1e-8 && (hi - e).abs() < 1e-8);
        let (lo, hi) = delta_dual_bounds(&g, 1, PExponent::new(1.0).unwrap()).unwrap();
        assert!((hi - 4.0 / 3.0).abs() < 1e-8 && lo <= hi);

        let m = crate::numerics::HermMatrix::from_real(&[vec![100.0]]).unwrap();
        let g = Gram::from_matrix(m).unwrap();
        let (lo, hi) = delta_dual_bounds(&g, 0, PExponent::new(4.0).unwrap()).unwrap();
        let mid = 100f64.powf(0.25);
        assert!(lo <= mid * (1.0 + 1e-9) && mid <= hi * (1.0 + 1e-9), "{lo} {hi}");
    }

    #[test]
    fn delta_bounds_nonincreasing_in_p() {
        let zs = [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.8, 0.1),
            Complex64::new(-0.3, 0.6),
        ];
        let g = gram(&KernelModel::szego(), &PointSet::disc(&zs).unwrap()).unwrap();
        let ps = [1.0, 1.25, 1.5, 2.0, 3.0, 6.0];
        for i in 0..3 {
            let b: Vec<(f64, f64)> = ps
                .iter()
                .map(|&p| delta_dual_bounds(&g, i, PExponent::new(p).unwrap()).unwrap())
                .collect();
            for w in b.windows(2) {
                assert!(w[1].1 <= w[0].1 * (1.0 + 1e-9), "{b:?}");
                assert!(w[1].0 <= w[0].0 * (1.0 + 1e-9), "{b:?}");
            }
            for (lo, hi) in b {
                assert!(lo <= hi * (1.0 + 1e-12), "{lo} {hi}");
            }
        }
    }

    #[test]
    fn report_examples() {
        let s = KernelModel::szego();
        let two = PExponent::new(2.0).unwrap();
        let rows = thmc1_report(&s, &[Point::real(0.6)], &[two]).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].ratio_a - 1.0).abs() < 1e-8);

        let one = PExponent::new(1.0).unwrap();
        let rows = thmc1_report(&s, &[Point::real(0.9), Point::real(0.99), Point::real(0.999)], &[one]).unwrap();
        let c: Vec<f64> = rows.iter().map(|r| r.ratio_c).collect();
        let (lo, hi) = c.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi / lo <= 2.0);
        for r in &rows {
            assert!((r.ratio_c - r.ratio_d).abs() < 1e-8);
            assert!(r.ratio_a.is_finite());
        }

        let da = KernelModel::drury_arveson(2).unwrap();
        let ray = |t: f64| Point::Ball(vec![Complex64::new(0.6 * t, 0.0), Complex64::new(0.0, 0.8 * t)]);
        let d_rows = thmc1_report(&da, &[ray(0.9), ray(0.99)], &[one]).unwrap();
        let s_rows = thmc1_report(&s, &[Point::real(0.9), Point::real(0.99)], &[one]).unwrap();
        for (a, b) in d_rows.iter().zip(&s_rows) {
            assert!((a.ratio_d - b.ratio_c).abs() < 1e-8);
        }
    }
}
