use alloc::format;

use super::TradingCurve;
use crate::{Error, Result};

/// Direction of a trade, from the trader's point of view in asset Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TradeSide {
    /// Trader pays `k` Y and receives X; the pool's Y grows.
    SellY,
    /// Trader receives `k` Y and pays X; the pool's Y shrinks.
    BuyY,
}

/// Which exchange rate must stay inside the slippage band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SuccessRule {
    /// The realized average rate `k/Δx`.
    #[default]
    OverallRate,
    /// The post-trade spot rate.
    StrictSpot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeRequest {
    pub side: TradeSide,
    /// Units of Y exchanged.
    pub k: f64,
    /// Reference rate.
    pub p_hat: f64,
    /// Slippage tolerance as a fraction.
    pub eps: f64,
    pub rule: SuccessRule,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeResult {
    /// X moved between trader and pool (positive).
    pub delta_x: f64,
    /// Y moved between trader and pool (positive).
    pub delta_y: f64,
    /// `delta_y / delta_x`.
    pub overall_rate: f64,
    pub pre_spot: f64,
    /// Spot after the trade if it executes.
    pub post_spot: f64,
    pub succeeded: bool,
    /// `(overall_rate − p̂)/p̂`.
    pub slippage: f64,
    /// Pool Y after the call; equal to the starting value on failure.
    pub y_after: f64,
}

/// Executes `req` against `curve` holding `y` units of Y. Pure: the new state
/// is returned in the result, and failed trades leave it unchanged.
pub fn execute_trade(curve: &TradingCurve, y: f64, req: &TradeRequest) -> Result<TradeResult> {
    if !(req.k > 0.0 && req.k.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "trade size must be positive, got {}",
            req.k
        )));
    }
    if !(req.p_hat > 0.0 && req.eps > 0.0) {
        return Err(Error::InvalidParams(
            "reference rate and slippage tolerance must be positive".into(),
        ));
    }
    let pre = curve.spot_at(y)?;
    let y_new = match req.side {
        TradeSide::SellY => y + req.k,
        TradeSide::BuyY => y - req.k,
    };
    let degenerate = req.k < 1e-12 * curve.y_of(curve.p0()).abs().max(y.abs());
    let (post, delta_x, rate) = if degenerate {
        (pre, req.k / pre, pre)
    } else {
        let post = curve.spot_at(y_new)?;
        let dx = (curve.x_of(pre) - curve.x_of(post)).abs();
        (post, dx, req.k / dx)
    };

    let upper = req.p_hat * (1.0 + req.eps);
    let lower = req.p_hat / (1.0 + req.eps);
    let checked = match req.rule {
        SuccessRule::OverallRate => rate,
        SuccessRule::StrictSpot => post,
    };
    let succeeded = match req.side {
        TradeSide::SellY => checked <= upper,
        TradeSide::BuyY => checked >= lower,
    };
    Ok(TradeResult {
        delta_x,
        delta_y: req.k,
        overall_rate: rate,
        pre_spot: pre,
        post_spot: post,
        succeeded,
        slippage: (rate - req.p_hat) / req.p_hat,
        y_after: if succeeded { y_new } else { y },
    })
}
