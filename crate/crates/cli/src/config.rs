//! Experiment configuration, from a JSON file or from command-line flags.

use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use hplab_core::io::{parse_point_list, KernelDoc, KernelKind};
use hplab_core::sequences::{Rule317, SequenceSpec};
use hplab_core::DEFAULT_SEED;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Gram,
    H1,
    Hannorm,
    Dk,
    Pick,
    Thmc1,
    Interpseq,
    Example316,
    Example317,
    Selftest,
    Plot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PlotKind {
    RatioVsLogk,
    Decay,
    Spectrum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum HanMethod {
    /// Operator norm of the Hankel matrix.
    #[default]
    Primal,
    /// Lower bound from pairings with products.
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RuleArg {
    #[value(alias = "double_exp")]
    Doubleexp,
    #[value(alias = "factorial_sq")]
    Factorialsq,
}

impl From<RuleArg> for Rule317 {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Doubleexp => Rule317::DoubleExp,
            RuleArg::Factorialsq => Rule317::FactorialSq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SequenceArg {
    /// `x_n = 1 - ratio^n`, `n = 0..N-1`.
    Geometric,
    /// `x_n = 1 - 1/n`, `n = 1..=N`.
    Harmonic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// Command parameters; each command reads the ones it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// `kx:i`, `metric:i,j`, or a list of values such as `1,[0,1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub spectrum: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<HanMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceSpec>,
    /// Length of the `1 - 1/n` sequence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonic: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<Rule317>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub only: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<PlotKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelDoc>,
    #[serde(default)]
    pub params: Params,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    fn new(command: CommandKind) -> Self {
        ExperimentConfig {
            command,
            kernel: None,
            params: Params::default(),
            seed: DEFAULT_SEED,
            output: None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// szego, da or gram.
    #[arg(long)]
    pub kernel: Option<KernelKind>,
    /// Ball dimension for `da`.
    #[arg(long)]
    pub d: Option<usize>,
    /// Compact point list, e.g. "[0.0],[0.5,0.1]".
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
    /// Gram matrix as JSON rows, for `--kernel gram`.
    #[arg(long, allow_hyphen_values = true)]
    pub gram: Option<String>,
    /// Renormalize the kernel at this point index.
    #[arg(long)]
    pub basepoint: Option<usize>,
}

impl KernelArgs {
    fn doc(&self) -> Result<Option<KernelDoc>, CliError> {
        let Some(kind) = self.kernel else {
            if self.points.is_some() || self.gram.is_some() {
                return Err(CliError::Usage("--points and --gram need --kernel".into()));
            }
            return Ok(None);
        };
        let mut doc = match kind {
            KernelKind::Gram => {
                let text = self
                    .gram
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("--kernel gram needs --gram".into()))?;
                let rows = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("--gram: {e}")))?;
                KernelDoc {
                    kernel: kind,
                    d: None,
                    points: None,
                    gram: Some(rows),
                    basepoint: None,
                }
            }
            _ => {
                let d = match kind {
                    KernelKind::Da => Some(self.d.ok_or_else(|| CliError::Usage("--kernel da needs --d".into()))?),
                    _ => None,
                };
                let pts = match &self.points {
                    Some(text) => parse_point_list(text, kind, d.unwrap_or(1))?,
                    None => Vec::new(),
                };
                KernelDoc::from_points(kind, d, &pts)
            }
        };
        doc.basepoint = self.basepoint;
        Ok(Some(doc))
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Kernel matrix entries, or its eigenvalues with --spectrum.
    Gram {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        spectrum: bool,
    },
    /// Weak-product norm of a symbol.
    H1 {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, allow_hyphen_values = true)]
        symbol: String,
    },
    /// Hankel norm of a symbol.
    Hannorm {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, allow_hyphen_values = true)]
        symbol: String,
        #[arg(long, value_enum)]
        method: Option<HanMethod>,
        /// Probe count for --method dual.
        #[arg(long)]
        probes: Option<usize>,
    },
    /// Kernel pseudo-metric, for one pair or all pairs.
    Dk {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, requires = "j")]
        i: Option<usize>,
        #[arg(long, requires = "i")]
        j: Option<usize>,
    },
    /// Ball vectors b(x_i) with k = S(b(x), b(y)).
    Pick {
        #[command(flatten)]
        kernel: KernelArgs,
    },
    /// Bounds on point evaluation across the scale against predicted growth.
    Thmc1 {
        #[command(flatten)]
        kernel: KernelArgs,
        /// Radii of points on the first axis; defaults to the --points list.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        p: Vec<f64>,
    },
    /// Separation and Carleson tests for a truncated sequence.
    Interpseq {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, value_enum)]
        sequence: Option<SequenceArg>,
        #[arg(long, default_value_t = 0.5)]
        ratio: f64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        delta_min: Option<f64>,
        #[arg(long)]
        c_max: Option<f64>,
    },
    /// Han norm supremum for orthogonal directions, N = 1..=n.
    Example316 {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
    /// Han-to-log ratio along a sparse radial sequence.
    Example317 {
        #[arg(long, value_enum)]
        rule: RuleArg,
        #[arg(long, default_value_t = 9)]
        jmax: usize,
    },
    /// Seeded acceptance battery.
    Selftest {
        /// Criterion names or numbers.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Multiplies every tolerance.
        #[arg(long)]
        tol_scale: Option<f64>,
    },
    /// SVG plot of a CSV table.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
    },
}

impl Command {
    pub fn into_config(self) -> Result<ExperimentConfig, CliError> {
        let (kind, kernel) = match &self {
            Command::Gram { kernel, .. } => (CommandKind::Gram, Some(kernel)),
            Command::H1 { kernel, .. } => (CommandKind::H1, Some(kernel)),
            Command::Hannorm { kernel, .. } => (CommandKind::Hannorm, Some(kernel)),
            Command::Dk { kernel, .. } => (CommandKind::Dk, Some(kernel)),
            Command::Pick { kernel } => (CommandKind::Pick, Some(kernel)),
            Command::Thmc1 { kernel, .. } => (CommandKind::Thmc1, Some(kernel)),
            Command::Interpseq { kernel, .. } => (CommandKind::Interpseq, Some(kernel)),
            Command::Example316 { .. } => (CommandKind::Example316, None),
            Command::Example317 { .. } => (CommandKind::Example317, None),
            Command::Selftest { .. } => (CommandKind::Selftest, None),
            Command::Plot { .. } => (CommandKind::Plot, None),
        };
        let mut cfg = ExperimentConfig::new(kind);
        if let Some(k) = kernel {
            cfg.kernel = k.doc()?;
        }
        let p = &mut cfg.params;
        match self {
            Command::Gram { spectrum, .. } => p.spectrum = spectrum,
            Command::H1 { symbol, .. } => p.symbol = Some(symbol),
            Command::Hannorm {
                symbol, method, probes, ..
            } => {
                p.symbol = Some(symbol);
                p.method = method;
                p.probes = probes;
            }
            Command::Dk { i, j, .. } => {
                p.i = i;
                p.j = j;
            }
            Command::Pick { .. } => {}
            Command::Thmc1 { radii, p: ps, .. } => {
                p.radii = radii;
                p.p = Some(ps);
            }
            Command::Interpseq {
                sequence,
                ratio,
                n,
                delta_min,
                c_max,
                ..
            } => {
                match (sequence, n) {
                    (Some(SequenceArg::Geometric), Some(n)) => {
                        p.sequence = Some(SequenceSpec {
                            generator: hplab_core::sequences::Generator::DiscGeometric { ratio },
                            n,
                        })
                    }
                    (Some(SequenceArg::Harmonic), Some(n)) => p.harmonic = Some(n),
                    (Some(_), None) => return Err(CliError::Usage("--sequence needs --n".into())),
                    (None, _) => {}
                }
                p.delta_min = delta_min;
                p.c_max = c_max;
            }
            Command::Example316 { n, radii } => {
                p.n = Some(n);
                p.radii = radii;
            }
            Command::Example317 { rule, jmax } => {
                p.rule = Some(rule.into());
                p.j_max = Some(jmax);
            }
            Command::Selftest { only, tol_scale } => {
                p.only = only;
                p.tol_scale = tol_scale;
            }
            Command::Plot { input, kind } => {
                p.input = Some(input);
                p.kind = Some(kind);
            }
        }
        Ok(cfg)
    }
}
