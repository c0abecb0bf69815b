//! Command dispatch: each command calls library operations and packs the
//! results into a [`Report`].

use serde_json::Value;

use hplab_core::battery::run_battery;
use hplab_core::hankel::{han_norm, han_norm_dual, metric_symbol};
use hplab_core::hp_scale::{thmc1_report, PExponent, THM_COLUMNS};
use hplab_core::io::{complex, KernelDoc, KernelKind};
use hplab_core::kernels::{dk, gram, kernel_matrix, normalize, pick_embedding, Gram, KernelModel, Point, PointSet};
use hplab_core::numerics::herm_eig;
use hplab_core::sequences::{
    example316_closed_form, example316_sup, example316_weights, example317_ratio, harmonic_points, is_interpolating,
    weights_from_radii, DEFAULT_C_MAX, DEFAULT_DELTA_MIN,
};
use hplab_core::weak_product::{h1_norm, H1Problem};
use hplab_core::{Complex64, FuncValues};

use crate::config::{CommandKind, ExperimentConfig, HanMethod, Params, PlotKind};
use crate::plot::{plot, Table};
use crate::report::{Cell, Report};
use crate::CliError;

const DEFAULT_PROBES: usize = 64;

/// A report plus an optional `(kind, message)` flag that turns the exit
/// status nonzero.
pub struct Outcome {
    pub report: Report,
    pub flagged: Option<(&'static str, String)>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome { report, flagged: None }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    match cfg.command {
        CommandKind::Gram => gram_cmd(cfg, p),
        CommandKind::H1 => h1_cmd(cfg, p),
        CommandKind::Hannorm => hannorm_cmd(cfg, p),
        CommandKind::Dk => dk_cmd(cfg, p),
        CommandKind::Pick => pick_cmd(cfg),
        CommandKind::Thmc1 => thmc1_cmd(cfg, p),
        CommandKind::Interpseq => interpseq_cmd(cfg, p),
        CommandKind::Example316 => example316_cmd(p),
        CommandKind::Example317 => example317_cmd(p),
        CommandKind::Selftest => selftest_cmd(cfg, p),
        CommandKind::Plot => plot_cmd(p),
    }
}

fn doc(cfg: &ExperimentConfig) -> Result<&KernelDoc, CliError> {
    cfg.kernel
        .as_ref()
        .ok_or_else(|| CliError::Usage("this command needs a kernel (--kernel or \"kernel\")".into()))
}

fn load(cfg: &ExperimentConfig) -> Result<(KernelModel, PointSet), CliError> {
    let (model, pts) = doc(cfg)?.load()?;
    if pts.is_empty() {
        return Err(CliError::Usage("no points given".into()));
    }
    Ok((model, pts))
}

fn load_gram(cfg: &ExperimentConfig) -> Result<Gram, CliError> {
    let (model, pts) = load(cfg)?;
    Ok(gram(&model, &pts)?)
}

fn load_matrix(cfg: &ExperimentConfig) -> Result<hplab_core::numerics::HermMatrix, CliError> {
    let (model, pts) = load(cfg)?;
    Ok(kernel_matrix(&model, &pts)?)
}

fn usize_field(name: &str, text: &str) -> Result<usize, CliError> {
    text.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{name}: '{text}' is not an index")))
}

/// `kx:i`, `metric:i,j` or a value list such as `1,[0,1]`.
fn symbol(g: &Gram, p: &Params) -> Result<FuncValues, CliError> {
    let text = p
        .symbol
        .as_deref()
        .ok_or_else(|| CliError::Usage("a symbol is required (--symbol)".into()))?;
    if let Some(i) = text.strip_prefix("kx:") {
        let i = usize_field("kx", i)?;
        g.check_index(i)?;
        return Ok(g.kernel_function(i));
    }
    if let Some(rest) = text.strip_prefix("metric:") {
        let (i, j) = rest
            .split_once(',')
            .ok_or_else(|| CliError::Usage("metric symbol is metric:i,j".into()))?;
        return Ok(metric_symbol(g, usize_field("metric", i)?, usize_field("metric", j)?)?);
    }
    let values: Vec<Value> =
        serde_json::from_str(&format!("[{text}]")).map_err(|e| CliError::Usage(format!("symbol '{text}': {e}")))?;
    let values: Vec<Complex64> = values.iter().map(complex).collect::<Result<_, _>>()?;
    let f = FuncValues::from_vec(values);
    g.check_len(&f)?;
    Ok(f)
}

fn gram_cmd(cfg: &ExperimentConfig, p: &Params) -> Result<Outcome, CliError> {
    let k = load_matrix(cfg)?;
    let n = k.dim();
    if p.spectrum {
        let eig = herm_eig(&k).map_err(hplab_core::Error::from)?;
        let rows = eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &l)| vec![Cell::Int(i), Cell::Num(l)])
            .collect();
        return Ok(table(&["index", "eigenvalue"], rows, Some(PlotKind::Spectrum)).into());
    }
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let z = k.get(i, j);
            rows.push(vec![Cell::Int(i), Cell::Int(j), Cell::Num(z.re), Cell::Num(z.im)]);
        }
    }
    Ok(table(&["i", "j", "re", "im"], rows, None).into())
}

fn h1_cmd(cfg: &ExperimentConfig, p: &Params) -> Result<Outcome, CliError> {
    let g = load_gram(cfg)?;
    let h = symbol(&g, p)?;
    let est = h1_norm(&H1Problem::new(&g, h)?)?;
    let flagged = (!est.converged).then(|| {
        let msg = format!(
            "h1_norm did not converge: relative gap {:.3e} after {} iterations",
            est.gap, est.iters
        );
        ("not_converged", msg)
    });
    let json = serde_json::to_value(&est).map_err(|e| CliError::Numerical(e.to_string()))?;
    Ok(Outcome {
        report: Report::Json(json),
        flagged,
    })
}

fn hannorm_cmd(cfg: &ExperimentConfig, p: &Params) -> Result<Outcome, CliError> {
    let g = load_gram(cfg)?;
    let b = symbol(&g, p)?;
    let value = match p.method.unwrap_or_default() {
        HanMethod::Primal => han_norm(&g, &b)?,
        HanMethod::Dual => han_norm_dual(&g, &b, p.probes.unwrap_or(DEFAULT_PROBES))?,
    };
    Ok(Report::Scalar(value).into())
}

fn dk_cmd(cfg: &ExperimentConfig, p: &Params) -> Result<Outcome, CliError> {
    let k = load_matrix(cfg)?;
    let n = k.dim();
    match (p.i, p.j) {
        (Some(i), Some(j)) => {
            for idx in [i, j] {
                if idx >= n {
                    return Err(hplab_core::Error::Index { index: idx, len: n }.into());
                }
            }
            Ok(Report::Scalar(dk(&k, i, j)).into())
        }
        (None, None) => {
            let rows = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .map(|(i, j)| vec![Cell::Int(i), Cell::Int(j), Cell::Num(dk(&k, i, j))])
                .collect();
            Ok(table(&["i", "j", "dk"], rows, None).into())
        }
        _ => Err(CliError::Usage("give both i and j, or neither".into())),
    }
}

fn pick_cmd(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let k = load_matrix(cfg)?;
    let b = pick_embedding(&k)?;
    let rows = b
        .iter()
        .enumerate()
        .flat_map(|(i, v)| {
            v.iter()
                .enumerate()
                .map(move |(c, z)| vec![Cell::Int(i), Cell::Int(c), Cell::Num(z.re), Cell::Num(z.im)])
        })
        .collect();
    Ok(table(&["point", "coord", "re", "im"], rows, None).into())
}

fn thmc1_cmd(cfg: &ExperimentConfig, p: &Params) -> Result<Outcome, CliError> {
    let d = doc(cfg)?;
    let ps =
        p.p.as_deref()
            .unwrap_or(&[1.0, 2.0])
            .iter()
            .map(|&x| PExponent::new(x))
            .collect::<Result<Vec<_>, _>>()?;
    let (model, xs) = match &p.radii {
        Some(radii) => {
            let (model, xs): (KernelModel, Vec<Point>) = match d.kernel {
                KernelKind::Szego => (KernelModel::szego(), radii.iter().map(|&r| Point::real(r)).collect()),
                KernelKind::Da => {
                    let dim = d.d.ok_or_else(|| CliError::Usage("--kernel da needs --d".into()))?;
                    let axis = |r: f64| {
                        let mut v = vec![Complex64::new(0.0, 0.0); dim];
                        v[0] = Complex64::new(r, 0.0);
                        Point::Ball(v)
                    };
                    (
                        KernelModel::drury_arveson(dim)?,
                        radii.iter().map(|&r| axis(r)).collect(),
                    )
                }
                KernelKind::Gram => return Err(CliError::Usage("radii need a szego or da kernel".into())),
            };
            match d.basepoint {
                Some(b) => {
                    let x0 = xs.get(b).ok_or(hplab_core::Error::Index {
                        index: b,
                        len: xs.len(),
                    })?;
                    (normalize(&model, x0)?, xs)
                }
                None => (model, xs),
            }
        }
        None => {
            let (model, pts) = load(cfg)?;
            (model, pts.points().to_vec())
        }
    };
    let rows = thmc1_report(&model, &xs, &ps)?
        .into_iter()
        .map(|r| {
            vec![
                Cell::Text(r.kernel),
                Cell::Text(r.point),
                Cell::Num(r.p),
                Cell::Num(r.k_xx),
                Cell::Num(r.lower),
                Cell::Num(r.upper),
                Cell::Num(r.ratio_a),
                Cell::Num(r.ratio_c),
                Cell::Num(r.ratio_d),
            ]
        })
        .collect();
    Ok(table(&THM_COLUMNS, rows, Some(PlotKind::RatioVsLogk)).into())
}

fn interpseq_cmd(cfg: &ExperimentConfig, p: &Params) -> Result<Outcome, CliError> {
    let k = match (&p.sequence, p.harmonic, &cfg.kernel) {
        (Some(seq), None, None) => seq.kernel_matrix()?,
        (None, Some(n), None) => kernel_matrix(&KernelModel::szego(), &harmonic_points(n)?)?,
        (None, None, Some(_)) => load_matrix(cfg)?,
        _ => {
            return Err(CliError::Usage(
                "give exactly one of a sequence, a harmonic length or a kernel with points".into(),
            ))
        }
    };
    let cert = is_interpolating(
        &k,
        p.delta_min.unwrap_or(DEFAULT_DELTA_MIN),
        p.c_max.unwrap_or(DEFAULT_C_MAX),
    )?;
    let json = serde_json::to_value(&cert).map_err(|e| CliError::Numerical(e.to_string()))?;
    Ok(Report::Json(json).into())
}

fn example316_cmd(p: &Params) -> Result<Outcome, CliError> {
    let n = p.n.unwrap_or(10);
    let w = match &p.radii {
        Some(r) => {
            if r.len() < n {
                return Err(CliError::Usage(format!("{} radii given for n = {n}", r.len())));
            }
            weights_from_radii(&r[..n])?
        }
        None => example316_weights(n),
    };
    let rows = (1..=n)
        .map(|m| {
            Ok(vec![
                Cell::Int(m),
                Cell::Num(example316_sup(&w, m)?),
                Cell::Num(example316_closed_form(&w[..m])),
            ])
        })
        .collect::<Result<_, CliError>>()?;
    Ok(table(&["n", "sup", "closed_form"], rows, None).into())
}

fn example317_cmd(p: &Params) -> Result<Outcome, CliError> {
    let rule = p
        .rule
        .ok_or_else(|| CliError::Usage("a rule is required (--rule)".into()))?;
    let j_max = p.j_max.unwrap_or(9);
    let rows = (1..=j_max)
        .filter(|&j| rule.log_y(j).is_some())
        .map(|j| {
            let v = example317_ratio(rule, j)?;
            Ok(vec![
                Cell::Int(v.j),
                Cell::Num(v.log_k),
                Cell::Num(v.numerator),
                Cell::Num(v.ratio),
                Cell::Int(v.terms),
                Cell::Num(v.tail_bound),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    if rows.is_empty() {
        return Err(CliError::Usage(format!("no valid indices up to {j_max} for {rule:?}")));
    }
    Ok(table(
        &["j", "log_k", "numerator", "ratio", "terms", "tail_bound"],
        rows,
        Some(PlotKind::Decay),
    )
    .into())
}

fn selftest_cmd(cfg: &ExperimentConfig, p: &Params) -> Result<Outcome, CliError> {
    let results = run_battery(cfg.seed, p.tol_scale.unwrap_or(1.0), &p.only);
    if results.is_empty() {
        return Err(CliError::Usage(format!("no criterion matches {:?}", p.only)));
    }
    let mut text = String::new();
    for r in &results {
        text.push_str(&format!("{r}\n"));
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    text.push_str(&format!("{} passed, {failed} failed\n", results.len() - failed));
    Ok(Outcome {
        report: Report::Text(text),
        flagged: (failed > 0).then(|| {
            (
                "criteria_failed",
                format!("{failed} of {} criteria failed", results.len()),
            )
        }),
    })
}

fn plot_cmd(p: &Params) -> Result<Outcome, CliError> {
    let path = p
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("plot needs an input table".into()))?;
    let kind = p.kind.ok_or_else(|| CliError::Usage("plot needs a kind".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(Report::Text(plot(&Table::from_csv(&text)?, kind)?).into())
}

fn table(columns: &[&str], rows: Vec<Vec<Cell>>, plot: Option<PlotKind>) -> Report {
    Report::Table {
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
        plot,
    }
}
