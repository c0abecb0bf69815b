//! Interpolating-sequence tests on finite truncations and the two
//! counterexample families.
//!
//! Separation and the Carleson constant read the kernel matrix directly, so
//! they work on truncations too ill-conditioned for a [`Gram`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::kernels::{dk, kernel_matrix, Gram, KernelModel, PointSet};
use crate::numerics::{herm_eig, CMatrix, HermMatrix};
use crate::{Error, FuncValues, Result};

pub const DEFAULT_DELTA_MIN: f64 = 0.05;
pub const DEFAULT_C_MAX: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule317 {
    /// `y_n = 2^{2^n}`.
    DoubleExp,
    /// `y_n = (n!)²`; `n = 1` repeats `y_0 = 1` and is skipped.
    FactorialSq,
}

impl Rule317 {
    /// `ln y_n`, or `None` for indices outside the sequence.
    pub fn log_y(self, n: usize) -> Option<f64> {
        match (self, n) {
            (_, 0) => Some(0.0),
            (Rule317::DoubleExp, n) if n < 1000 => Some(2f64.powi(n as i32) * std::f64::consts::LN_2),
            (Rule317::FactorialSq, 1) => None,
            (Rule317::FactorialSq, n) => Some(2.0 * (2..=n).map(|m| (m as f64).ln()).sum::<f64>()),
            _ => None,
        }
    }

    fn indices(self) -> impl Iterator<Item = usize> {
        (0..1000).filter(move |&n| self.log_y(n).is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum Generator {
    /// `x_n = 1 - ratio^n`, `n = 0, 1, ...`.
    DiscGeometric {
        ratio: f64,
    },
    DiscCustom {
        points: Vec<Complex64>,
    },
    /// Orthogonal directions with radii `r_n`; `None` uses `1 - r_n² = 4^{-n}`.
    Example316 {
        #[serde(default)]
        radii: Option<Vec<f64>>,
    },
    Example317 {
        rule: Rule317,
        j_max: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    #[serde(flatten)]
    pub generator: Generator,
    /// Truncation length.
    pub n: usize,
}

impl SequenceSpec {
    /// Points of a disc sequence truncated to `n` terms.
    pub fn points(&self) -> Result<PointSet> {
        match &self.generator {
            Generator::DiscGeometric { ratio } => {
                if !(0.0 < *ratio && *ratio < 1.0) {
                    return Err(Error::InvalidArgument(format!("ratio {ratio} must lie in (0, 1)")));
                }
                PointSet::disc_real(&(0..self.n).map(|k| 1.0 - ratio.powi(k as i32)).collect::<Vec<_>>())
            }
            Generator::DiscCustom { points } => {
                if self.n > points.len() {
                    return Err(Error::InvalidArgument(format!(
                        "truncation {} exceeds the {} listed points",
                        self.n,
                        points.len()
                    )));
                }
                PointSet::disc(&points[..self.n])
            }
            _ => Err(Error::InvalidArgument("generator has no disc points".into())),
        }
    }

    /// Kernel matrix of the truncation: Szegő for disc sequences, explicit for
    /// the orthogonal-direction family.
    pub fn kernel_matrix(&self) -> Result<HermMatrix> {
        match &self.generator {
            Generator::Example316 { radii } => {
                let w = match radii {
                    Some(r) => weights_from_radii(&r[..self.n.min(r.len())])?,
                    None => example316_weights(self.n),
                };
                Ok(example316_matrix(&w))
            }
            Generator::Example317 { .. } => Err(Error::InvalidArgument(
                "the log-domain family has no finite kernel matrix".into(),
            )),
            _ => kernel_matrix(&KernelModel::szego(), &self.points()?),
        }
    }
}

/// `x_n = 1 - 1/n` for `n = 1..=count`.
pub fn harmonic_points(count: usize) -> Result<PointSet> {
    PointSet::disc_real(&(1..=count).map(|n| 1.0 - 1.0 / n as f64).collect::<Vec<_>>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Interpolating,
    NotSeparated,
    CarlesonUnbounded,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpCertificate {
    pub delta: f64,
    pub carleson: f64,
    /// `‖f_n‖² k(x_n, x_n)` for the dual basis; empty if the Gram was refused.
    pub dual_norms: Vec<f64>,
    pub verdict: Verdict,
}

/// `min_{m≠n} d_k(x_m, x_n)`.
pub fn weak_separation(k: &HermMatrix) -> Result<f64> {
    let n = k.dim();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "weak separation needs at least two points".into(),
        ));
    }
    let mut best = 1.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            best = best.min(dk(k, i, j));
        }
    }
    Ok(best)
}

/// Best `C` with `Σ |f(x_n)|² / k(x_n,x_n) ≤ C ‖f‖²` on the span of the
/// kernel functions: the top eigenvalue of `D^{1/2} K D^{1/2}`, `D = diag(1/k(x_n,x_n))`,
/// which shares its nonzero spectrum with `K^{1/2} D K^{1/2}`.
pub fn carleson_constant(k: &HermMatrix) -> Result<f64> {
    let d: Vec<f64> = k.diagonal().iter().map(|x| 1.0 / x.sqrt()).collect();
    Ok(herm_eig(&k.scale_symmetric(&d))?.lambda_max())
}

#[derive(Debug, Clone)]
pub struct DualBasis {
    /// Values of `f_n`: `f_n(x_k) = δ_{nk}`.
    pub functions: Vec<FuncValues>,
    /// `‖f_n‖² = (K⁻¹)_{nn}`.
    pub norms_sq: Vec<f64>,
    /// `‖f_n‖² k(x_n, x_n)`.
    pub scaled: Vec<f64>,
}

impl DualBasis {
    pub fn max_scaled(&self) -> f64 {
        self.scaled.iter().cloned().fold(0.0, f64::max)
    }
}

/// Minimal-norm functions with `f_n(x_k) = δ_{nk}`; `f_n = Σ_m (K⁻¹)_{mn} k_{x_m}`.
pub fn dual_basis(g: &Gram) -> DualBasis {
    let n = g.dim();
    let kinv = g.kinv();
    let functions = (0..n)
        .map(|i| {
            let mut e = FuncValues::zeros(n);
            e[i] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();
    let norms_sq: Vec<f64> = (0..n).map(|i| kinv.get(i, i).re).collect();
    let scaled = norms_sq.iter().enumerate().map(|(i, s)| s * g.kxx(i)).collect();
    DualBasis {
        functions,
        norms_sq,
        scaled,
    }
}

/// Weak separation and the Carleson condition against the given thresholds.
pub fn is_interpolating(k: &HermMatrix, delta_min: f64, c_max: f64) -> Result<InterpCertificate> {
    if !(delta_min > 0.0 && c_max > 0.0) {
        return Err(Error::InvalidArgument("thresholds must be positive".into()));
    }
    let delta = if k.dim() < 2 { 1.0 } else { weak_separation(k)? };
    let carleson = carleson_constant(k)?;
    let gram = Gram::from_matrix(k.clone());
    let dual_norms = gram.as_ref().map(|g| dual_basis(g).scaled).unwrap_or_default();
    let verdict = if delta < delta_min {
        Verdict::NotSeparated
    } else if carleson > c_max {
        Verdict::CarlesonUnbounded
    } else if gram.is_err() {
        Verdict::Inconclusive
    } else {
        Verdict::Interpolating
    };
    Ok(InterpCertificate {
        delta,
        carleson,
        dual_norms,
        verdict,
    })
}

/// `1 - r_n² = 4^{-n}` for `n < count`, so `r_0 = 0`.
pub fn example316_weights(count: usize) -> Vec<f64> {
    (0..count).map(|n| 0.25f64.powi(n as i32)).collect()
}

/// `1 - r_n²` for a radius list.
pub fn weights_from_radii(radii: &[f64]) -> Result<Vec<f64>> {
    radii
        .iter()
        .map(|&r| {
            if (0.0..1.0).contains(&r) {
                Ok((1.0 - r) * (1.0 + r))
            } else {
                Err(Error::InvalidArgument(format!("radius {r} must lie in [0, 1)")))
            }
        })
        .collect()
}

/// `K(n,j) = 1` off the diagonal, `K(n,n) = 1 / w_n` with `w_n = 1 - r_n²`.
pub fn example316_matrix(weights: &[f64]) -> HermMatrix {
    let n = weights.len();
    let m = CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(if i == j { 1.0 / weights[i] } else { 1.0 }, 0.0)
    });
    HermMatrix::new(m).expect("real symmetric by construction")
}

/// `sup_j Σ_n |K(n,j)| / K(n,n)` over the first `n` weights, from the matrix.
pub fn example316_sup(weights: &[f64], n: usize) -> Result<f64> {
    if n == 0 || n > weights.len() {
        return Err(Error::InvalidArgument(format!(
            "truncation {n} must lie in 1..={}",
            weights.len()
        )));
    }
    let k = example316_matrix(&weights[..n]);
    Ok((0..n)
        .map(|j| (0..n).map(|m| k.get(m, j).norm() / k.get(m, m).re).sum::<f64>())
        .fold(0.0, f64::max))
}

/// `1 + Σ_n w_n - min_n w_n`.
pub fn example316_closed_form(weights: &[f64]) -> f64 {
    let min = weights.iter().cloned().fold(f64::INFINITY, f64::min);
    1.0 + weights.iter().sum::<f64>() - min
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example317Value {
    pub j: usize,
    pub ratio: f64,
    /// `Σ_n (1 - x_n²) / (1 - x_n x_j)` over the summed terms.
    pub numerator: f64,
    pub log_k: f64,
    pub terms: usize,
    /// Bound on the omitted tail of the numerator.
    pub tail_bound: f64,
}

/// `Σ_n (1-x_n²)/(1-x_n x_j) / log k(x_j,x_j)` for `x_n = 1 - 1/y_n`, in the
/// log domain.
///
/// With `a = 1/y_n`, `b = 1/y_j` each term is `(2-a) a / (a + b - ab) ≤ 2 y_j / y_n`.
/// Summation stops once a term drops below `1e-18` of the sum; the rest is
/// bounded geometrically.
pub fn example317_ratio(rule: Rule317, j: usize) -> Result<Example317Value> {
    let lj = match rule.log_y(j) {
        Some(l) if j >= 1 && l > 0.0 => l,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "index {j} is not a valid point with k > 1 for {rule:?}"
            )))
        }
    };
    let b = (-lj).exp();
    let log_k = lj - (2.0 - b).ln();
    let mut numerator = 0.0;
    let mut terms = 0;
    let mut last_n = 0;
    for n in rule.indices() {
        let Some(ln) = rule.log_y(n) else { break };
        let a = (-ln).exp();
        let term = if ln <= lj {
            // a/b = y_j/y_n ≥ 1
            (2.0 - a) / (1.0 + (1.0 - a) * (ln - lj).exp())
        } else {
            let rho = (lj - ln).exp();
            (2.0 - a) * rho / (rho + 1.0 - a)
        };
        numerator += term;
        terms += 1;
        last_n = n;
        if n > j && 2.0 * (lj - ln).exp() < 1e-18 * numerator {
            break;
        }
    }
    let next: Vec<f64> = rule
        .indices()
        .skip_while(|&m| m <= last_n)
        .take(2)
        .filter_map(|m| rule.log_y(m))
        .collect();
    let tail_bound = match next.as_slice() {
        [l1, l2] => {
            let decay = (l1 - l2).exp();
            2.0 * (lj - l1).exp() / (1.0 - decay)
        }
        _ => f64::INFINITY,
    };
    Ok(Example317Value {
        j,
        ratio: numerator / log_k,
        numerator,
        log_k,
        terms,
        tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{gram, KernelModel};
    use crate::weak_product::h1_diag_formula;

    fn szego_matrix(xs: &[f64]) -> HermMatrix {
        kernel_matrix(&KernelModel::szego(), &PointSet::disc_real(xs).unwrap()).unwrap()
    }

    #[test]
    fn separation_examples() {
        assert!((weak_separation(&szego_matrix(&[0.0, 0.6])).unwrap() - 0.6).abs() < 1e-15);
        assert!(weak_separation(&szego_matrix(&[0.5, 0.5 + 1e-6])).unwrap() < 1e-5);
        assert_eq!(weak_separation(&HermMatrix::identity(3)).unwrap(), 1.0);
        assert!(weak_separation(&HermMatrix::identity(1)).is_err());
    }

    #[test]
    fn harmonic_separation_decays() {
        let d =
            |n| weak_separation(&kernel_matrix(&KernelModel::szego(), &harmonic_points(n).unwrap()).unwrap()).unwrap();
        let (d10, d30) = (d(10), d(30));
        assert!(d30 < 0.5 * d10, "{d10} {d30}");
        // consecutive gap (1/n - 1/(n+1)) / (1 - (1-1/n)(1-1/(n+1))) = 1/(2n)
        assert!((d30 - 1.0 / 58.0).abs() < 1e-9);
    }

    #[test]
    fn carleson_examples() {
        assert!((carleson_constant(&szego_matrix(&[0.4])).unwrap() - 1.0).abs() < 1e-14);
        let diag = HermMatrix::from_diagonal(&[2.0, 7.0]);
        assert!((carleson_constant(&diag).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn carleson_matches_whitened_form() {
        let xs = [0.0, 0.5, 0.75, 0.875, 0.9375];
        let g = gram(&KernelModel::szego(), &PointSet::disc_real(&xs).unwrap()).unwrap();
        let r = g.khalf().as_matrix();
        let d = CMatrix::from_diagonal(&FuncValues::from_fn(5, |i, _| Complex64::new(1.0 / g.kxx(i), 0.0)));
        let m = HermMatrix::new(r * d * r).unwrap();
        let direct = herm_eig(&m).unwrap().lambda_max();
        assert!((carleson_constant(g.k()).unwrap() - direct).abs() < 1e-10 * direct);
    }

    #[test]
    fn carleson_monotone_under_adding_points() {
        let spec = SequenceSpec {
            generator: Generator::DiscGeometric { ratio: 0.5 },
            n: 12,
        };
        let k = spec.kernel_matrix().unwrap();
        let mut prev = 0.0;
        for n in 1..=12 {
            let c = carleson_constant(&k.submatrix(&(0..n).collect::<Vec<_>>())).unwrap();
            assert!(c >= prev - 1e-10);
            assert!(c >= 1.0 - 1e-10);
            prev = c;
        }
    }

    #[test]
    fn dual_basis_examples() {
        let g = gram(&KernelModel::szego(), &PointSet::disc_real(&[0.6]).unwrap()).unwrap();
        let d = dual_basis(&g);
        assert!((d.norms_sq[0] - 0.64).abs() < 1e-14);
        assert!((d.scaled[0] - 1.0).abs() < 1e-14);

        let g = Gram::from_matrix(HermMatrix::identity(3)).unwrap();
        let d = dual_basis(&g);
        assert_eq!(d.functions[1][1], Complex64::new(1.0, 0.0));
        assert!(d.scaled.iter().all(|s| (s - 1.0).abs() < 1e-15));

        let spec = SequenceSpec {
            generator: Generator::DiscGeometric { ratio: 0.5 },
            n: 8,
        };
        let g = Gram::from_matrix(spec.kernel_matrix().unwrap()).unwrap();
        let d = dual_basis(&g);
        // f_n(x_k) = δ_{nk}: ⟨f_n, k_{x_k}⟩ reproduces the value
        for (n, f) in d.functions.iter().enumerate() {
            for k in 0..8 {
                let v = g.inner(f, &g.kernel_function(k));
                let e = if n == k { 1.0 } else { 0.0 };
                assert!((v - Complex64::new(e, 0.0)).norm() < 1e-10);
            }
            assert!((g.norm(f).powi(2) - d.norms_sq[n]).abs() < 1e-8 * d.norms_sq[n]);
        }
        assert!(d.max_scaled() < 2000.0, "{}", d.max_scaled());
    }

    #[test]
    fn interpolation_verdicts() {
        let c = is_interpolating(&szego_matrix(&[0.0, 0.6]), 0.1, 10.0).unwrap();
        assert_eq!(c.verdict, Verdict::Interpolating);
        let c = is_interpolating(&szego_matrix(&[0.5, 0.5 + 1e-6]), 0.05, 100.0).unwrap();
        assert_eq!(c.verdict, Verdict::NotSeparated);
        let k = kernel_matrix(&KernelModel::szego(), &harmonic_points(30).unwrap()).unwrap();
        let c = is_interpolating(&k, DEFAULT_DELTA_MIN, DEFAULT_C_MAX).unwrap();
        assert_eq!(c.verdict, Verdict::NotSeparated);
        assert!(c.dual_norms.is_empty());
        assert!(is_interpolating(&k, 0.0, 1.0).is_err());
    }

    #[test]
    fn example316_values() {
        let w = example316_weights(20);
        assert_eq!(w[0], 1.0);
        for n in [1, 5, 10, 20] {
            let s = example316_sup(&w, n).unwrap();
            assert!((s - example316_closed_form(&w[..n])).abs() < 1e-12);
        }
        assert_eq!(example316_sup(&w, 1).unwrap(), 1.0);
        let k = example316_matrix(&w[..6]);
        for j in 0..6 {
            let h = k.as_matrix().column(j).clone_owned();
            let expect = 1.0 + (0..6).filter(|&m| m != j).map(|m| w[m]).sum::<f64>();
            assert!((h1_diag_formula(&k, &h) - expect).abs() < 1e-14);
        }
        let r = [0.0, 0.5, 0.9];
        let wr = weights_from_radii(&r).unwrap();
        assert!((example316_sup(&wr, 3).unwrap() - (1.0 + 1.0 + 0.75)).abs() < 1e-12);
    }

    #[test]
    fn example317_values() {
        for rule in [Rule317::DoubleExp, Rule317::FactorialSq] {
            let v: Vec<f64> = (3..=9).map(|j| example317_ratio(rule, j).unwrap().ratio).collect();
            for w in v.windows(2) {
                assert!(w[1] < w[0], "{rule:?}: {v:?}");
            }
            assert!(v[6] < 0.5 * v[0], "{rule:?}: {v:?}");
            let e = example317_ratio(rule, 5).unwrap();
            assert!(e.tail_bound < 1e-15 * e.numerator);
        }
        let d2 = example317_ratio(Rule317::DoubleExp, 2).unwrap().ratio;
        let d8 = example317_ratio(Rule317::DoubleExp, 8).unwrap().ratio;
        assert!(d8 < d2);
        let one = example317_ratio(Rule317::DoubleExp, 1).unwrap();
        assert!(one.ratio.is_finite() && one.ratio >= 1.0 / 4f64.ln());
        assert!(example317_ratio(Rule317::FactorialSq, 1).is_err());
        assert!(example317_ratio(Rule317::DoubleExp, 0).is_err());
    }

    #[test]
    fn example317_matches_direct_sum() {
        // small j: direct f64 evaluation of Σ (1-x_n²)/(1-x_n x_j)
        let rule = Rule317::FactorialSq;
        let j = 3;
        let xs: Vec<f64> = rule
            .indices()
            .take(30)
            .filter_map(|n| rule.log_y(n))
            .map(|l| 1.0 - (-l).exp())
            .collect();
        let xj = 1.0 - 1.0 / 36.0;
        let direct: f64 = xs.iter().map(|x| (1.0 - x * x) / (1.0 - x * xj)).sum();
        let v = example317_ratio(rule, j).unwrap();
        assert!((v.numerator - direct).abs() < 1e-10 * direct);
        assert!((v.log_k + (1.0 - xj * xj).ln()).abs() < 1e-12);
    }

    #[test]
    fn spec_json_round_trip() {
        let s: SequenceSpec = serde_json::from_str(r#"{"generator":"disc_geometric","ratio":0.5,"n":4}"#).unwrap();
        assert_eq!(s.points().unwrap().len(), 4);
        let s: SequenceSpec = serde_json::from_str(r#"{"generator":"example316","n":5}"#).unwrap();
        assert_eq!(s.kernel_matrix().unwrap().dim(), 5);
        let s: SequenceSpec =
            serde_json::from_str(r#"{"generator":"example317","rule":"factorial_sq","j_max":9,"n":0}"#).unwrap();
        assert!(s.kernel_matrix().is_err());
        let back: SequenceSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
