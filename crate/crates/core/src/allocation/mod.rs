//! Liquidity allocations, the reserve curves they induce, closed-form
//! reference market makers, and trade execution.
//!
//! `L(p) = dY/d ln p` is the capital density at exchange rate `p`. Reserves
//! are anchored at the initial spot `p0`:
//! `Y(p) = Y0 + ∫_{p0}^{p} L(q)/q dq` and `X(p) = X0 + ∫_{p}^{p0} L(q)/q² dq`.

mod curve;
mod lmsr;
mod trade;

use alloc::format;
use alloc::vec::Vec;

use crate::numerics::{cumulative_log, integral_to, split_at, PriceGrid};
use crate::{Error, Result};

pub use curve::{reference_curve, CurveFamily, TradingCurve};
pub use lmsr::{lmsr_cost, lmsr_cost_roundtrip, lmsr_trading_value};
pub use trade::{execute_trade, SuccessRule, TradeRequest, TradeResult, TradeSide};

/// Lagrange multipliers reported by the optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multipliers {
    pub lambda_b: f64,
    pub lambda_x: f64,
    pub lambda_y: f64,
}

/// Liquidity `L(p)` on a grid with its initial reserves.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    grid: PriceGrid,
    liquidity: Vec<f64>,
    p0: f64,
    x0: f64,
    y0: f64,
    multipliers: Option<Multipliers>,
}

impl Allocation {
    /// Allocation with reserves `Y0 = ∫₀^{p0} L/p dp` and
    /// `X0 = ∫_{p0}^∞ L/p² dp`, the integrals closed beyond the grid by
    /// power-law tails.
    pub fn new(grid: &PriceGrid, liquidity: Vec<f64>, p0: f64) -> Result<Self> {
        crate::numerics::check_len(grid, &liquidity)?;
        if liquidity.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(Error::InvalidParams(
                "liquidity must be finite and nonnegative".into(),
            ));
        }
        if !grid.contains(p0) {
            return Err(Error::InvalidBounds(format!(
                "initial spot {p0} outside the grid [{}, {}]",
                grid.p_min(),
                grid.p_max()
            )));
        }
        let (y0, x0) = initial_reserves(grid, &liquidity, p0);
        Ok(Self {
            grid: grid.clone(),
            liquidity,
            p0,
            x0,
            y0,
            multipliers: None,
        })
    }

    /// Allocation with explicitly given reserves.
    pub fn from_parts(
        grid: &PriceGrid,
        liquidity: Vec<f64>,
        p0: f64,
        x0: f64,
        y0: f64,
    ) -> Result<Self> {
        let mut a = Self::new(grid, liquidity, p0)?;
        a.x0 = x0;
        a.y0 = y0;
        Ok(a)
    }

    pub(crate) fn with_multipliers(mut self, m: Multipliers) -> Self {
        self.multipliers = Some(m);
        self
    }

    pub fn grid(&self) -> &PriceGrid {
        &self.grid
    }

    pub fn liquidity(&self) -> &[f64] {
        &self.liquidity
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn multipliers(&self) -> Option<Multipliers> {
        self.multipliers
    }

    /// Numeraire value of the initial reserves.
    pub fn value_at(&self, px: f64, py: f64) -> f64 {
        px * self.x0 + py * self.y0
    }

    /// `L(p)` interpolated linearly in `ln p`; zero off the grid.
    pub fn liquidity_at(&self, p: f64) -> f64 {
        self.grid.interpolate(&self.liquidity, p).unwrap_or(0.0)
    }

    /// `a·L`; multipliers rescale as `1/a²`.
    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            liquidity: self.liquidity.iter().map(|l| a * l).collect(),
            p0: self.p0,
            x0: a * self.x0,
            y0: a * self.y0,
            multipliers: self.multipliers.map(|m| Multipliers {
                lambda_b: m.lambda_b / (a * a),
                lambda_x: m.lambda_x / (a * a),
                lambda_y: m.lambda_y / (a * a),
            }),
        }
    }

    /// Capital inside the band `[p̂/(1+ε), p̂(1+ε)]`, integrated directly
    /// from `L`.
    pub fn band_capital(&self, p_hat: f64, eps: f64) -> Result<BandCapital> {
        check_band(p_hat, eps)?;
        let (lo, hi) = (p_hat / (1.0 + eps), p_hat * (1.0 + eps));
        let amount = integral_to(&self.grid, &self.liquidity, hi)
            - integral_to(&self.grid, &self.liquidity, lo);
        Ok(BandCapital {
            amount: amount.max(0.0),
            clamped: !(self.grid.contains(lo) && self.grid.contains(hi)),
        })
    }
}

fn initial_reserves(grid: &PriceGrid, liquidity: &[f64], p0: f64) -> (f64, f64) {
    let over_p: Vec<f64> = liquidity
        .iter()
        .zip(grid.points())
        .map(|(l, p)| l / p)
        .collect();
    let y0 = split_at(grid, liquidity, p0).0;
    let x0 = split_at(grid, &over_p, p0).1;
    (y0, x0)
}

/// Y reserves spanned by the slippage band around `p̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandCapital {
    pub amount: f64,
    /// The band reached past the grid and was cut at its ends.
    pub clamped: bool,
}

fn check_band(p_hat: f64, eps: f64) -> Result<()> {
    if !(p_hat > 0.0 && eps > 0.0 && p_hat.is_finite() && eps.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "band needs p_hat > 0 and eps > 0, got ({p_hat}, {eps})"
        )));
    }
    Ok(())
}

/// `|L_ε(p̂)| = Y(p̂(1+ε)) − Y(p̂/(1+ε))`.
pub fn band_capital(curve: &TradingCurve, p_hat: f64, eps: f64) -> Result<BandCapital> {
    check_band(p_hat, eps)?;
    let (lo, hi) = (p_hat / (1.0 + eps), p_hat * (1.0 + eps));
    let clamped = curve.family() == CurveFamily::Tabulated
        && !(curve.grid().contains(lo) && curve.grid().contains(hi));
    Ok(BandCapital {
        amount: (curve.y_of(hi) - curve.y_of(lo)).max(0.0),
        clamped,
    })
}

/// Tabulated reserve curve of an allocation, anchored at `(p0, X0, Y0)`.
pub fn reserves_from_liquidity(alloc: &Allocation) -> Result<TradingCurve> {
    let grid = alloc.grid();
    let l = alloc.liquidity();
    let over_p: Vec<f64> = l.iter().zip(grid.points()).map(|(l, p)| l / p).collect();
    let cy = cumulative_log(grid, l);
    let cx = cumulative_log(grid, &over_p);
    let ay = integral_to(grid, l, alloc.p0());
    let ax = integral_to(grid, &over_p, alloc.p0());
    let y = cy.iter().map(|c| (alloc.y0() + c - ay).max(0.0)).collect();
    let x = cx.iter().map(|c| (alloc.x0() + ax - c).max(0.0)).collect();
    TradingCurve::tabulated(grid, y, x, alloc.p0())
}

/// `L(p) = dY/d ln p` of a curve: analytic for closed-form families,
/// central differences in `ln p` for tabulated ones.
pub fn liquidity_from_curve(curve: &TradingCurve) -> Result<Allocation> {
    let grid = curve.grid();
    let liquidity: Vec<f64> = match curve.analytic_liquidity(grid.p_min()) {
        Some(_) => grid
            .points()
            .iter()
            .map(|&p| curve.analytic_liquidity(p).unwrap_or(0.0))
            .collect(),
        None => {
            let y = curve.y_samples();
            let h = grid.log_step();
            let n = y.len();
            (0..n)
                .map(|i| {
                    let d = match i {
                        0 => (y[1] - y[0]) / h,
                        _ if i == n - 1 => (y[n - 1] - y[n - 2]) / h,
                        _ => (y[i + 1] - y[i - 1]) / (2.0 * h),
                    };
                    d.max(0.0)
                })
                .collect()
        }
    };
    let p0 = curve.p0().clamp(grid.p_min(), grid.p_max());
    Allocation::from_parts(
        grid,
        liquidity,
        p0,
        curve.x_of(curve.p0()),
        curve.y_of(curve.p0()),
    )
}
