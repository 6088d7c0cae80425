//! Beliefs `ψ(p_X, p_Y)` over future numeraire prices and their compiled
//! ratio-space summaries.
//!
//! Every belief is reduced to functions of the exchange rate `p = p_X/p_Y`:
//! the ratio weight `w(p) = φψ(θ)·sin θ` with `θ = cot⁻¹ p` and
//! `φψ(θ) = ∫ ψ(r cos θ, r sin θ) dr`, the first moments `m_X`, `m_Y` and
//! the total mass `N_ψ`. Beliefs are never normalized.

mod gbm;
mod table;

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::numerics::{
    cumulative_log, integrate_closed, tail_above, tail_below, trapezoid_log, GaussLegendre,
    PriceGrid,
};
use crate::{Error, Result};

use gbm::GbmKernel;
pub use gbm::{gbm_snapshot_density, GbmParams};
pub use table::{RatioTable, Table2d};

/// Radial quadrature nodes used when none are given.
pub const DEFAULT_RADIAL_NODES: usize = 256;
/// Time nodes for the discounted GBM belief when none are given.
pub const DEFAULT_TIME_STEPS: usize = 200;

/// One-dimensional density `h(p)` over the exchange rate `p = p_X/p_Y`.
#[derive(Debug, Clone, PartialEq)]
pub enum RatioDensity {
    /// `h = 1`.
    Uniform,
    /// `h = 1` on `[lo, hi]`, zero elsewhere.
    Indicator {
        lo: f64,
        hi: f64,
    },
    /// `h = exp(-(ln p)²/(2σ²))/p`.
    Lognormal {
        sigma: f64,
    },
    /// `h = p^exponent`.
    Power {
        exponent: f64,
    },
    /// `h = p/(1+p)²`.
    Lmsr,
    Tabulated(RatioTable),
}

impl RatioDensity {
    pub fn eval(&self, p: f64) -> f64 {
        if !(p > 0.0) {
            return 0.0;
        }
        match self {
            Self::Uniform => 1.0,
            Self::Indicator { lo, hi } => {
                if p >= *lo && p <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Lognormal { sigma } => {
                let l = p.ln();
                (-l * l / (2.0 * sigma * sigma)).exp() / p
            }
            Self::Power { exponent } => p.powf(*exponent),
            Self::Lmsr => p / ((1.0 + p) * (1.0 + p)),
            Self::Tabulated(t) => t.eval(p),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Indicator { lo, hi } if !(*lo > 0.0 && hi > lo && hi.is_finite()) => Err(
                Error::InvalidParams(format!("indicator needs 0 < lo < hi, got [{lo}, {hi}]")),
            ),
            Self::Lognormal { sigma } if !(*sigma > 0.0 && sigma.is_finite()) => Err(
                Error::InvalidParams(format!("lognormal sigma must be positive, got {sigma}")),
            ),
            Self::Power { exponent } if !exponent.is_finite() => {
                Err(Error::InvalidParams("power exponent must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Uncompiled description of a belief.
#[derive(Debug, Clone, PartialEq)]
pub enum BeliefSpec {
    /// `ψ = 1` on `(0, P_X] × (0, P_Y]`.
    UniformRect {
        px: f64,
        py: f64,
    },
    /// `ψ = (p_X/p_Y)^exponent` on the rectangle.
    PowerRect {
        exponent: f64,
        px: f64,
        py: f64,
    },
    /// `ψ = p_X p_Y/(p_X + p_Y)²` on the rectangle.
    LmsrRect {
        px: f64,
        py: f64,
    },
    /// `ψ = h(p_X/p_Y)` on the rectangle.
    Ratio {
        density: RatioDensity,
        px: f64,
        py: f64,
    },
    /// `ψ = ∫ e^{-γt} ρ_t dt` for independent GBM prices.
    GbmDiscounted {
        params: GbmParams,
        t_steps: usize,
    },
    Table2d(Table2d),
    /// `factor · inner`.
    Scaled {
        factor: f64,
        inner: Box<BeliefSpec>,
    },
}

impl BeliefSpec {
    /// Belief whose optimum is the weighted product market maker with
    /// weight ratio `alpha`.
    pub fn weighted(alpha: f64, px: f64, py: f64) -> Self {
        Self::PowerRect {
            exponent: (alpha - 1.0) / (alpha + 1.0),
            px,
            py,
        }
    }

    pub fn lognormal_ratio(sigma: f64, px: f64, py: f64) -> Self {
        Self::Ratio {
            density: RatioDensity::Lognormal { sigma },
            px,
            py,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self::Scaled {
            factor,
            inner: Box::new(self),
        }
    }

    /// The `(h, P_X, P_Y)` form for beliefs of type `h(p_X/p_Y)` on a
    /// rectangle, if this is one.
    pub fn ratio_form(&self) -> Option<(RatioDensity, f64, f64)> {
        match self {
            Self::UniformRect { px, py } => Some((RatioDensity::Uniform, *px, *py)),
            Self::PowerRect { exponent, px, py } => Some((
                RatioDensity::Power {
                    exponent: *exponent,
                },
                *px,
                *py,
            )),
            Self::LmsrRect { px, py } => Some((RatioDensity::Lmsr, *px, *py)),
            Self::Ratio { density, px, py } => Some((density.clone(), *px, *py)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((density, px, py)) = self.ratio_form() {
            if !(px > 0.0 && py > 0.0 && px.is_finite() && py.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "support rectangle needs positive finite bounds, got ({px}, {py})"
                )));
            }
            return density.validate();
        }
        match self {
            Self::GbmDiscounted { params, t_steps } => {
                params.validate()?;
                if *t_steps < 2 {
                    return Err(Error::InvalidParams("need at least two time steps".into()));
                }
                Ok(())
            }
            Self::Scaled { factor, inner } => {
                if !(*factor > 0.0 && factor.is_finite()) {
                    return Err(Error::InvalidParams(format!(
                        "scale factor must be positive, got {factor}"
                    )));
                }
                inner.validate()
            }
            _ => Ok(()),
        }
    }

    /// `ψ(p_X, p_Y)`; zero outside the support.
    pub fn psi(&self, p_x: f64, p_y: f64) -> f64 {
        if !(p_x > 0.0 && p_y > 0.0) {
            return 0.0;
        }
        if let Some((density, px, py)) = self.ratio_form() {
            if p_x > px || p_y > py {
                return 0.0;
            }
            return density.eval(p_x / p_y);
        }
        match self {
            Self::GbmDiscounted { params, t_steps } => GbmKernel::new(params, *t_steps)
                .map(|k| k.psi(p_x, p_y))
                .unwrap_or(0.0),
            Self::Table2d(t) => t.eval(p_x, p_y),
            Self::Scaled { factor, inner } => factor * inner.psi(p_x, p_y),
            _ => unreachable!("ratio forms handled above"),
        }
    }
}

/// `ψ(p_X, p_Y)` for `spec`.
pub fn eval_psi(spec: &BeliefSpec, p_x: f64, p_y: f64) -> f64 {
    spec.psi(p_x, p_y)
}

/// Grid-sampled ratio weight, moments and mass of a belief.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefSummary {
    grid: PriceGrid,
    w: Vec<f64>,
    m_x: Vec<f64>,
    m_y: Vec<f64>,
    mass: f64,
    truncated: f64,
}

impl BeliefSummary {
    /// The additive identity on `grid`.
    pub fn zero(grid: &PriceGrid) -> Self {
        let n = grid.len();
        Self {
            grid: grid.clone(),
            w: alloc::vec![0.0; n],
            m_x: alloc::vec![0.0; n],
            m_y: alloc::vec![0.0; n],
            mass: 0.0,
            truncated: 0.0,
        }
    }

    /// Assembles a summary from ray samples: `w`, and the mass, `p_X`- and
    /// `p_Y`-moment densities per unit `p`.
    fn assemble(
        grid: &PriceGrid,
        w: Vec<f64>,
        mass_density: &[f64],
        mx_density: &[f64],
        my_density: &[f64],
    ) -> Result<Self> {
        let per_log =
            |d: &[f64]| -> Vec<f64> { d.iter().zip(grid.points()).map(|(v, p)| v * p).collect() };
        let gm = per_log(mass_density);
        let gx = per_log(mx_density);
        let gy = per_log(my_density);

        let mass = integrate_closed(grid, &gm);
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::ZeroMass);
        }
        let outside = edge_mass(grid, &gm);
        let truncated = if outside.is_finite() {
            (outside / mass).min(1.0)
        } else {
            1.0
        };

        let below = tail_below(grid, &gx);
        let m_x = cumulative_log(grid, &gx)
            .into_iter()
            .map(|c| below + c)
            .collect();
        let cum_y = cumulative_log(grid, &gy);
        let total_y = trapezoid_log(grid, &gy) + tail_above(grid, &gy);
        let m_y = cum_y.into_iter().map(|c| (total_y - c).max(0.0)).collect();

        Ok(Self {
            grid: grid.clone(),
            w,
            m_x,
            m_y,
            mass,
            truncated,
        })
    }

    pub fn grid(&self) -> &PriceGrid {
        &self.grid
    }

    /// Ratio weight `w(p)` on the grid.
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    /// `m_X(p) = ∬ p_X ψ 1{p_X/p_Y ≤ p}`.
    pub fn m_x(&self) -> &[f64] {
        &self.m_x
    }

    /// `m_Y(p) = ∬ p_Y ψ 1{p_X/p_Y ≥ p}`.
    pub fn m_y(&self) -> &[f64] {
        &self.m_y
    }

    /// Total mass `N_ψ`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Estimated fraction of `N_ψ` outside the grid.
    pub fn truncated_fraction(&self) -> f64 {
        self.truncated
    }

    /// Every field multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let s = |v: &[f64]| v.iter().map(|x| alpha * x).collect();
        Self {
            grid: self.grid.clone(),
            w: s(&self.w),
            m_x: s(&self.m_x),
            m_y: s(&self.m_y),
            mass: alpha * self.mass,
            truncated: self.truncated,
        }
    }
}

// Mass beyond the grid ends; infinite if a nonzero edge does not decay.
fn edge_mass(grid: &PriceGrid, g: &[f64]) -> f64 {
    let n = g.len();
    let lo = tail_below(grid, g);
    let hi = tail_above(grid, g);
    let stuck = |edge: f64, tail: f64| edge > 0.0 && tail == 0.0;
    if stuck(g[0], lo) || stuck(g[n - 1], hi) {
        return f64::INFINITY;
    }
    lo + hi
}

/// Pointwise sum of two summaries on the same grid.
pub fn add_beliefs(a: &BeliefSummary, b: &BeliefSummary) -> Result<BeliefSummary> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    let add = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(u, v)| u + v).collect();
    let mass = a.mass + b.mass;
    let truncated = if mass > 0.0 {
        (a.truncated * a.mass + b.truncated * b.mass) / mass
    } else {
        0.0
    };
    Ok(BeliefSummary {
        grid: a.grid.clone(),
        w: add(&a.w, &b.w),
        m_x: add(&a.m_x, &b.m_x),
        m_y: add(&a.m_y, &b.m_y),
        mass,
        truncated,
    })
}

// Direction of the ray through (p, 1): (cos θ, sin θ) with θ = cot⁻¹ p.
pub(crate) fn ray(p: f64) -> (f64, f64) {
    let norm = (1.0 + p * p).sqrt();
    (p / norm, 1.0 / norm)
}

/// Summary of `ψ = h(p_X/p_Y)` on `(0, P_X] × (0, P_Y]` from closed-form
/// ray integrals; no 2-D quadrature.
pub fn compile_ratio(
    density: &RatioDensity,
    px: f64,
    py: f64,
    grid: &PriceGrid,
) -> Result<BeliefSummary> {
    BeliefSpec::Ratio {
        density: density.clone(),
        px,
        py,
    }
    .validate()?;
    let n = grid.len();
    let (mut w, mut md, mut mxd, mut myd) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for &q in grid.points() {
        let h = density.eval(q);
        // largest p_Y on the ray p_X = q·p_Y inside the rectangle
        let r = (px / q).min(py);
        w.push(h * r);
        md.push(h * r * r / 2.0);
        mxd.push(h * q * r * r * r / 3.0);
        myd.push(h * r * r * r / 3.0);
    }
    BeliefSummary::assemble(grid, w, &md, &mxd, &myd)
}

enum RayIntegrator<'a> {
    Rect {
        spec: &'a BeliefSpec,
        px: f64,
        py: f64,
    },
    Table(&'a Table2d),
    Gbm(GbmKernel),
    Scaled(f64, Box<RayIntegrator<'a>>),
}

impl<'a> RayIntegrator<'a> {
    fn new(spec: &'a BeliefSpec) -> Result<Self> {
        if let Some((_, px, py)) = spec.ratio_form() {
            return Ok(Self::Rect { spec, px, py });
        }
        Ok(match spec {
            BeliefSpec::GbmDiscounted { params, t_steps } => {
                Self::Gbm(GbmKernel::new(params, *t_steps)?)
            }
            BeliefSpec::Table2d(t) => Self::Table(t),
            BeliefSpec::Scaled { factor, inner } => {
                Self::Scaled(*factor, Box::new(Self::new(inner)?))
            }
            _ => unreachable!("ratio forms handled above"),
        })
    }

    // [∫ψ dr, ∫ψ r dr, ∫ψ r² dr] along direction (c, s)
    fn moments(&self, c: f64, s: f64, gl: &GaussLegendre) -> [f64; 3] {
        match self {
            Self::Rect { spec, px, py } => {
                let r_max = (px / c).min(py / s);
                let mut out = [0.0; 3];
                for (r, wr) in gl.nodes_on(0.0, r_max) {
                    let v = wr * spec.psi(r * c, r * s);
                    out[0] += v;
                    out[1] += v * r;
                    out[2] += v * r * r;
                }
                out
            }
            Self::Table(t) => {
                let ((x0, x1), (y0, y1)) = t.hull();
                let r_in = (x0 / c).max(y0 / s);
                let r_out = (x1 / c).min(y1 / s);
                let mut out = [0.0; 3];
                if !(r_out > r_in) {
                    return out;
                }
                // integrate in u = ln r, dr = r du
                for (u, wu) in gl.nodes_on(r_in.ln(), r_out.ln()) {
                    let r = u.exp();
                    let v = wu * r * t.eval(r * c, r * s);
                    out[0] += v;
                    out[1] += v * r;
                    out[2] += v * r * r;
                }
                out
            }
            Self::Gbm(k) => k.ray_moments(c, s, gl),
            Self::Scaled(f, inner) => inner.moments(c, s, gl).map(|v| f * v),
        }
    }
}

/// Summary of an arbitrary belief by radial quadrature along each ray
/// `θ = cot⁻¹ p` of the grid.
pub fn compile_2d(spec: &BeliefSpec, grid: &PriceGrid, radial_n: usize) -> Result<BeliefSummary> {
    if radial_n < 64 {
        return Err(Error::InvalidParams(format!(
            "radial quadrature needs at least 64 nodes, got {radial_n}"
        )));
    }
    spec.validate()?;
    let integrator = RayIntegrator::new(spec)?;
    let gl = GaussLegendre::new(radial_n);
    let n = grid.len();
    let (mut w, mut md, mut mxd, mut myd) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for &p in grid.points() {
        let (c, s) = ray(p);
        let [f0, f1, f2] = integrator.moments(c, s, &gl);
        // dθ = sin²θ dp along the grid of rates
        w.push(f0 * s);
        md.push(f1 * s * s);
        mxd.push(f2 * c * s * s);
        myd.push(f2 * s * s * s);
    }
    BeliefSummary::assemble(grid, w, &md, &mxd, &myd)
}

/// Summary of the time-discounted GBM belief.
pub fn compile_gbm_discounted(
    params: &GbmParams,
    grid: &PriceGrid,
    t_steps: usize,
) -> Result<BeliefSummary> {
    compile_2d(
        &BeliefSpec::GbmDiscounted {
            params: *params,
            t_steps,
        },
        grid,
        DEFAULT_RADIAL_NODES,
    )
}
