//! JSON kernel documents and compact point lists.
//!
//! ```json
//! {"kernel": "szego", "points": [0.1, [0.2, -0.3]], "basepoint": 0}
//! {"kernel": "da", "d": 2, "points": [[0.1, [0.0, 0.2]], [0.3, 0.0]]}
//! {"kernel": "gram", "gram": [[2, [0, 1]], [[0, -1], 2]]}
//! ```
//!
//! Complex numbers are written as a bare real or an `[re, im]` pair. Disc
//! points are complex numbers; ball points are arrays of `d` complex
//! coordinates. `basepoint` is an index into the point list at which the
//! kernel is renormalized.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::kernels::{normalize, KernelModel, Point, PointSet};
use crate::numerics::{CMatrix, HermMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Szego,
    Da,
    Gram,
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "szego" => Ok(KernelKind::Szego),
            "da" | "drury-arveson" => Ok(KernelKind::Da),
            "gram" => Ok(KernelKind::Gram),
            other => Err(Error::Parse(format!(
                "unknown kernel '{other}' (expected szego, da or gram)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDoc {
    pub kernel: KernelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<Value>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<usize>,
}

impl KernelDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Model (normalized at `basepoint` if given) and point set.
    pub fn load(&self) -> Result<(KernelModel, PointSet)> {
        let (model, pts) = match self.kernel {
            KernelKind::Szego => {
                let pts = self
                    .require_points()?
                    .iter()
                    .map(|v| Ok(Point::Disc(complex(v)?)))
                    .collect::<Result<Vec<_>>>()?;
                (KernelModel::szego(), PointSet::new(pts)?)
            }
            KernelKind::Da => {
                let d = self.d.ok_or_else(|| Error::Parse("kernel 'da' needs \"d\"".into()))?;
                let pts = self
                    .require_points()?
                    .iter()
                    .map(|v| ball_point(v, d))
                    .collect::<Result<Vec<_>>>()?;
                (KernelModel::drury_arveson(d)?, PointSet::new(pts)?)
            }
            KernelKind::Gram => {
                let rows = self
                    .gram
                    .as_ref()
                    .ok_or_else(|| Error::Parse("kernel 'gram' needs \"gram\"".into()))?;
                let m = complex_matrix(rows)?;
                let n = m.dim();
                (KernelModel::explicit(m)?, PointSet::abstract_indices(n)?)
            }
        };
        match self.basepoint {
            Some(b) => {
                let x0 = pts.get(b)?.clone();
                Ok((normalize(&model, &x0)?, pts))
            }
            None => Ok((model, pts)),
        }
    }

    /// Document for points already parsed, e.g. by [`parse_point_list`].
    pub fn from_points(kind: KernelKind, d: Option<usize>, points: &[Point]) -> Self {
        KernelDoc {
            kernel: kind,
            d,
            points: Some(points.iter().map(point_value).collect()),
            gram: None,
            basepoint: None,
        }
    }

    fn require_points(&self) -> Result<&[Value]> {
        self.points
            .as_deref()
            .ok_or_else(|| Error::Parse(format!("kernel '{:?}' needs \"points\"", self.kernel).to_lowercase()))
    }
}

/// A bare number or an `[re, im]` pair.
pub fn complex(v: &Value) -> Result<Complex64> {
    match v {
        Value::Number(x) => Ok(Complex64::new(num(x)?, 0.0)),
        Value::Array(a) if a.len() == 2 => match (&a[0], &a[1]) {
            (Value::Number(re), Value::Number(im)) => Ok(Complex64::new(num(re)?, num(im)?)),
            _ => Err(Error::Parse(format!("expected [re, im], got {v}"))),
        },
        _ => Err(Error::Parse(format!("expected a number or [re, im], got {v}"))),
    }
}

/// Inverse of the document point syntax: `[re, im]`, a list of those, or an index.
pub fn point_value(p: &Point) -> Value {
    let c = |z: &Complex64| serde_json::json!([z.re, z.im]);
    match p {
        Point::Disc(z) => c(z),
        Point::Ball(v) => Value::Array(v.iter().map(c).collect()),
        Point::Abstract(i) => Value::from(*i),
    }
}

fn num(x: &serde_json::Number) -> Result<f64> {
    x.as_f64()
        .ok_or_else(|| Error::Parse(format!("{x} is not a finite number")))
}

fn ball_point(v: &Value, d: usize) -> Result<Point> {
    match v {
        Value::Array(a) if a.len() == d => Ok(Point::Ball(a.iter().map(complex).collect::<Result<_>>()?)),
        Value::Number(_) if d == 1 => Ok(Point::Ball(vec![complex(v)?])),
        _ => Err(Error::Parse(format!("expected {d} coordinates, got {v}"))),
    }
}

pub fn complex_matrix(rows: &[Vec<Value>]) -> Result<HermMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse("empty gram".into()));
    }
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Parse(format!(
                "gram row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = complex(v)?;
        }
    }
    Ok(HermMatrix::new(m)?)
}

/// Parses the compact list form `"[0.0],[0.5,0.1]"`.
///
/// For disc kernels a point is `[re]` or `[re, im]`; for a ball of dimension
/// `d` it is `d` reals or `2d` interleaved `re, im` values.
pub fn parse_point_list(text: &str, kind: KernelKind, d: usize) -> Result<Vec<Point>> {
    let wrapped = format!("[{text}]");
    let groups: Vec<Vec<f64>> =
        serde_json::from_str(&wrapped).map_err(|e| Error::Parse(format!("point list '{text}': {e}")))?;
    groups
        .into_iter()
        .map(|g| match (kind, g.as_slice()) {
            (KernelKind::Szego, [re]) => Ok(Point::Disc(Complex64::new(*re, 0.0))),
            (KernelKind::Szego, [re, im]) => Ok(Point::Disc(Complex64::new(*re, *im))),
            (KernelKind::Da, c) if c.len() == d => Ok(Point::Ball(c.iter().map(|&x| Complex64::new(x, 0.0)).collect())),
            (KernelKind::Da, c) if c.len() == 2 * d => {
                Ok(Point::Ball(c.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect()))
            }
            (KernelKind::Gram, [i]) if *i >= 0.0 && i.fract() == 0.0 => Ok(Point::Abstract(*i as usize)),
            _ => Err(Error::Parse(format!("cannot read {g:?} as a {kind:?} point"))),
        })
        .collect()
}
