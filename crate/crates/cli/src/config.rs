//! Run configuration: flag parsing helpers, the optional TOML run file and
//! belief files.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use cfmm_forge::belief::DEFAULT_TIME_STEPS;
use cfmm_forge::{
    BeliefSpec, CurveFamily, GbmParams, MarketParams, PriceGrid, RatioDensity, RatioTable,
    SizeDistribution, SuccessRule, Table2d,
};
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::formats::read_columns;

pub const DEFAULT_BUDGET: f64 = 2.0;
pub const DEFAULT_GRID: GridSpec = GridSpec {
    p_min: 1e-4,
    p_max: 1e4,
    n: 2001,
};
pub const DEFAULT_AXIS: GridSpec = GridSpec {
    p_min: 1e-3,
    p_max: 1e3,
    n: 61,
};
pub const DEFAULT_TOL: f64 = 1e-3;
pub const SEED_ENV: &str = "CFMM_FORGE_SEED";

/// Values from `--config`. Every key mirrors the flag of the same name;
/// relative paths resolve against the file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunFile {
    pub belief: Option<PathBuf>,
    pub family: Option<String>,
    pub budget: Option<f64>,
    pub px: Option<f64>,
    pub py: Option<f64>,
    pub grid: Option<String>,
    pub out: Option<PathBuf>,
    pub fee: Option<String>,
    pub linear_term: Option<String>,
    pub sim: Option<String>,
    pub seed: Option<u64>,
    pub q: Option<f64>,
    pub rule: Option<String>,
    pub size: Option<String>,
    pub assert_bounds: Option<bool>,
    pub tol: Option<f64>,
    pub axis: Option<String>,
    pub alloc: Option<PathBuf>,
    pub table_2d: Option<PathBuf>,
}

impl RunFile {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = read_text(path)?;
        let mut file: Self = toml::from_str(&text)
            .map_err(|e| CliError::input(format!("{}: {}", path.display(), e.message())))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut file.belief,
            &mut file.out,
            &mut file.alloc,
            &mut file.table_2d,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(file)
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Resolved configuration echoed as `# key = value` lines in every output.
#[derive(Debug, Default, Clone)]
pub struct Header {
    lines: Vec<(String, String)>,
}

impl Header {
    pub fn new(command: &str) -> Self {
        let mut h = Self::default();
        h.push("command", command);
        h
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn lines(&self) -> impl Iterator<Item = String> + '_ {
        self.lines.iter().map(|(k, v)| format!("{k} = {v}"))
    }
}

/// Flag value if given, else the file value, else the default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn fields<const N: usize>(text: &str, what: &str) -> CliResult<[f64; N]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(CliError::input(format!(
            "{what} expects {N} comma-separated values, got `{text}`"
        )));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p
            .parse()
            .map_err(|_| CliError::input(format!("{what}: `{p}` is not a number")))?;
    }
    Ok(out)
}

fn count(v: f64, what: &str) -> CliResult<u64> {
    if v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(53) {
        Ok(v as u64)
    } else {
        Err(CliError::input(format!(
            "{what} must be a nonnegative integer, got {v}"
        )))
    }
}

/// Log grid bounds and size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub p_min: f64,
    pub p_max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn parse(text: &str) -> CliResult<Self> {
        let [p_min, p_max, n] = fields::<3>(text, "grid")?;
        Ok(Self {
            p_min,
            p_max,
            n: count(n, "grid size")? as usize,
        })
    }

    pub fn build(&self) -> CliResult<PriceGrid> {
        Ok(PriceGrid::log_spaced(self.p_min, self.p_max, self.n)?)
    }

    /// Both ends pushed out by `decades`, keeping the density per decade.
    pub fn widened(&self, decades: f64) -> Self {
        let span = (self.p_max / self.p_min).log10();
        let per_decade = (self.n - 1) as f64 / span;
        let factor = 10f64.powf(decades);
        Self {
            p_min: self.p_min / factor,
            p_max: self.p_max * factor,
            n: ((span + 2.0 * decades) * per_decade).round() as usize + 1,
        }
    }

    /// Log-spaced axis points.
    pub fn points(&self) -> CliResult<Vec<f64>> {
        Ok(self.build()?.points().to_vec())
    }
}

impl Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{}", self.p_min, self.p_max, self.n)
    }
}

pub fn parse_fee(text: &str) -> CliResult<(f64, f64)> {
    let [delta, s] = fields::<2>(text, "fee")?;
    Ok((delta, s))
}

/// `k,eps,steps[,seed]`.
pub fn parse_sim(text: &str) -> CliResult<(f64, f64, u64, Option<u64>)> {
    let n = text.split(',').count();
    if n == 3 {
        let [k, eps, steps] = fields::<3>(text, "sim")?;
        Ok((k, eps, count(steps, "sim steps")?, None))
    } else {
        let [k, eps, steps, seed] = fields::<4>(text, "sim")?;
        Ok((
            k,
            eps,
            count(steps, "sim steps")?,
            Some(count(seed, "sim seed")?),
        ))
    }
}

pub fn seed_from_env() -> CliResult<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::input(format!("{SEED_ENV} must be an integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

pub fn parse_rule(text: &str) -> CliResult<SuccessRule> {
    match text {
        "strict-spot" => Ok(SuccessRule::StrictSpot),
        "overall-rate" => Ok(SuccessRule::OverallRate),
        _ => Err(CliError::input(format!(
            "rule must be strict-spot or overall-rate, got `{text}`"
        ))),
    }
}

pub fn parse_size(text: &str) -> CliResult<SizeDistribution> {
    match text {
        "fixed" => Ok(SizeDistribution::Fixed),
        "uniform" => Ok(SizeDistribution::Uniform),
        "exponential" => Ok(SizeDistribution::Exponential),
        _ => Err(CliError::input(format!(
            "size must be fixed, uniform or exponential, got `{text}`"
        ))),
    }
}

pub fn market(budget: f64, px: f64, py: f64) -> CliResult<MarketParams> {
    Ok(MarketParams::new(px, py, budget)?)
}

/// `kappa` or `lvr:c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearChoice {
    Kappa,
    Lvr(f64),
}

impl LinearChoice {
    pub fn parse(text: &str) -> CliResult<Self> {
        if text == "kappa" {
            return Ok(Self::Kappa);
        }
        if let Some(c) = text.strip_prefix("lvr:") {
            let c: f64 = c
                .parse()
                .map_err(|_| CliError::input(format!("lvr cost `{c}` is not a number")))?;
            if c >= 0.0 && c.is_finite() {
                return Ok(Self::Lvr(c));
            }
        }
        Err(CliError::input(format!(
            "linear term must be kappa or lvr:c with c >= 0, got `{text}`"
        )))
    }
}

/// Reference market makers with a known optimal liquidity shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    ConstantProduct,
    Weighted(f64),
    Lmsr,
    Lognormal(f64),
    Concentrated(f64, f64),
}

impl Family {
    pub fn parse(text: &str) -> CliResult<Self> {
        let (name, param) = match text.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (text, None),
        };
        let number = |p: &str| -> CliResult<f64> {
            p.trim()
                .parse()
                .map_err(|_| CliError::input(format!("family parameter `{p}` is not a number")))
        };
        let family = match (name, param) {
            ("constant-product", None) => Self::ConstantProduct,
            ("lmsr", None) => Self::Lmsr,
            ("weighted", Some(p)) => Self::Weighted(number(p)?),
            ("lognormal", Some(p)) => Self::Lognormal(number(p)?),
            ("concentrated", Some(p)) => {
                let [lo, hi] = fields::<2>(p, "concentrated range")?;
                Self::Concentrated(lo, hi)
            }
            _ => {
                return Err(CliError::input(format!(
                    "unknown family `{text}`; expected constant-product, weighted:α, lmsr, \
                     lognormal:σ or concentrated:lo,hi"
                )))
            }
        };
        family.belief(1.0, 1.0).validate()?;
        if let Self::Weighted(a) = family {
            if !(a > 0.0 && a.is_finite()) {
                return Err(CliError::input(format!("weight must be positive, got {a}")));
            }
        }
        Ok(family)
    }

    /// The belief whose optimum is this market maker.
    pub fn belief(&self, px: f64, py: f64) -> BeliefSpec {
        match *self {
            Self::ConstantProduct => BeliefSpec::UniformRect { px, py },
            Self::Weighted(alpha) => BeliefSpec::weighted(alpha, px, py),
            Self::Lmsr => BeliefSpec::LmsrRect { px, py },
            Self::Lognormal(sigma) => BeliefSpec::lognormal_ratio(sigma, px, py),
            Self::Concentrated(lo, hi) => BeliefSpec::Ratio {
                density: RatioDensity::Indicator { lo, hi },
                px,
                py,
            },
        }
    }

    /// Closed-form trading curve, if the family has one.
    pub fn curve(&self) -> Option<CurveFamily> {
        match *self {
            Self::ConstantProduct => Some(CurveFamily::ConstantProduct),
            Self::Weighted(alpha) => Some(CurveFamily::WeightedProduct { alpha }),
            Self::Lmsr => Some(CurveFamily::Lmsr),
            Self::Lognormal(_) => None,
            Self::Concentrated(p_lo, p_hi) => Some(CurveFamily::Concentrated { p_lo, p_hi }),
        }
    }

    /// Optimal liquidity up to a constant factor.
    pub fn shape(&self, p: f64) -> f64 {
        match *self {
            Self::ConstantProduct => p.sqrt(),
            Self::Weighted(alpha) => p.powf(alpha / (alpha + 1.0)),
            Self::Lmsr => p / (1.0 + p),
            Self::Lognormal(sigma) => (-(p.ln().powi(2)) / (4.0 * sigma * sigma)).exp(),
            Self::Concentrated(lo, hi) => {
                if (lo..=hi).contains(&p) {
                    p.sqrt()
                } else {
                    0.0
                }
            }
        }
    }
}

impl Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::ConstantProduct => write!(f, "constant-product"),
            Self::Weighted(a) => write!(f, "weighted:{a}"),
            Self::Lmsr => write!(f, "lmsr"),
            Self::Lognormal(s) => write!(f, "lognormal:{s}"),
            Self::Concentrated(lo, hi) => write!(f, "concentrated:{lo},{hi}"),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn zero() -> f64 {
    0.0
}

fn time_steps() -> usize {
    DEFAULT_TIME_STEPS
}

/// A belief file, tagged by `kind`.
#[derive(Debug, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "kebab-case",
    rename_all_fields = "kebab-case",
    deny_unknown_fields
)]
pub enum BeliefFile {
    Uniform {
        #[serde(default = "one")]
        px: f64,
        #[serde(default = "one")]
        py: f64,
    },
    Weighted {
        alpha: f64,
        #[serde(default = "one")]
        px: f64,
        #[serde(default = "one")]
        py: f64,
    },
    Power {
        exponent: f64,
        #[serde(default = "one")]
        px: f64,
        #[serde(default = "one")]
        py: f64,
    },
    Lmsr {
        #[serde(default = "one")]
        px: f64,
        #[serde(default = "one")]
        py: f64,
    },
    Lognormal {
        sigma: f64,
        #[serde(default = "one")]
        px: f64,
        #[serde(default = "one")]
        py: f64,
    },
    Concentrated {
        lo: f64,
        hi: f64,
        #[serde(default = "one")]
        px: f64,
        #[serde(default = "one")]
        py: f64,
    },
    /// Ratio density from a `p,h` CSV.
    RatioTable {
        path: PathBuf,
        #[serde(default = "one")]
        px: f64,
        #[serde(default = "one")]
        py: f64,
    },
    /// Two-dimensional table from a `p_x,p_y,psi` CSV.
    #[serde(rename = "table-2d")]
    Table2d { path: PathBuf },
    Gbm {
        #[serde(default = "one")]
        px: f64,
        #[serde(default = "one")]
        py: f64,
        #[serde(default = "zero")]
        mu_x: f64,
        #[serde(default = "zero")]
        mu_y: f64,
        sigma_x: f64,
        sigma_y: f64,
        gamma: f64,
        #[serde(default = "time_steps")]
        t_steps: usize,
    },
}

impl BeliefFile {
    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::input(format!("{origin}: {}", e.message())))
    }

    /// Reads and validates the belief at `path`.
    pub fn load(path: &Path) -> CliResult<BeliefSpec> {
        let file = Self::parse(&read_text(path)?, &path.display().to_string())?;
        let dir = path.parent().unwrap_or(Path::new(""));
        let spec = file.into_spec(dir)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn into_spec(self, dir: &Path) -> CliResult<BeliefSpec> {
        let ratio = |density, px, py| BeliefSpec::Ratio { density, px, py };
        Ok(match self {
            Self::Uniform { px, py } => BeliefSpec::UniformRect { px, py },
            Self::Weighted { alpha, px, py } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(CliError::input(format!(
                        "alpha must be positive, got {alpha}"
                    )));
                }
                BeliefSpec::weighted(alpha, px, py)
            }
            Self::Power { exponent, px, py } => BeliefSpec::PowerRect { exponent, px, py },
            Self::Lmsr { px, py } => BeliefSpec::LmsrRect { px, py },
            Self::Lognormal { sigma, px, py } => ratio(RatioDensity::Lognormal { sigma }, px, py),
            Self::Concentrated { lo, hi, px, py } => {
                ratio(RatioDensity::Indicator { lo, hi }, px, py)
            }
            Self::RatioTable { path, px, py } => {
                let path = dir.join(path);
                let [p, h] = read_columns::<2>(&path, &["p", "h"])?;
                ratio(RatioDensity::Tabulated(RatioTable::new(p, h)?), px, py)
            }
            Self::Table2d { path } => {
                let path = dir.join(path);
                BeliefSpec::Table2d(table_from_columns(&path)?)
            }
            Self::Gbm {
                px,
                py,
                mu_x,
                mu_y,
                sigma_x,
                sigma_y,
                gamma,
                t_steps,
            } => BeliefSpec::GbmDiscounted {
                params: GbmParams {
                    px,
                    py,
                    mu_x,
                    mu_y,
                    sigma_x,
                    sigma_y,
                    gamma,
                },
                t_steps,
            },
        })
    }
}

/// A `p_x,p_y,psi` CSV in row-major order over a tensor grid.
fn table_from_columns(path: &Path) -> CliResult<Table2d> {
    let [x, y, v] = read_columns::<3>(path, &["p_x", "p_y", "psi"])?;
    // p_y varies fastest, so its axis repeats after the first row
    let ny = match y.first() {
        Some(&y0) => y
            .iter()
            .skip(1)
            .position(|&b| b == y0)
            .map_or(y.len(), |i| i + 1),
        None => 0,
    };
    let malformed = || {
        CliError::input(format!(
            "{}: rows must enumerate a full p_x × p_y grid with p_y varying fastest",
            path.display()
        ))
    };
    if ny == 0 || v.len() % ny != 0 {
        return Err(malformed());
    }
    let nx = v.len() / ny;
    let px: Vec<f64> = (0..nx).map(|i| x[i * ny]).collect();
    let py: Vec<f64> = y[..ny].to_vec();
    for i in 0..nx {
        for j in 0..ny {
            if x[i * ny + j] != px[i] || y[i * ny + j] != py[j] {
                return Err(malformed());
            }
        }
    }
    Ok(Table2d::new(px, py, v)?)
}
