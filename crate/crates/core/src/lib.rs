//! Belief-driven liquidity provisioning for two-asset constant function
//! market makers.
//!
//! A liquidity provider states a belief `ψ(p_X, p_Y)` over future numeraire
//! prices of the two assets. This crate compiles the belief into a ratio
//! weight over exchange rates, solves the convex program that minimizes
//! expected trade failure under a budget, and turns the resulting liquidity
//! density `L(p)` into an executable trading curve. The inverse direction
//! (curve to belief class), the profit/loss objectives, and a size-k trade
//! Markov chain simulator are provided alongside.
//!
//! The crate is `no_std` and needs only `alloc`. File formats and the
//! command-line front end live in the companion `cfmm-forge-cli` crate.

#![no_std]
// negated float comparisons deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod allocation;
pub mod belief;
mod error;
pub mod numerics;
pub mod objectives;
pub mod optimizer;
pub mod simulator;

pub use error::{Error, Result};

pub use allocation::{
    band_capital, execute_trade, liquidity_from_curve, lmsr_cost, lmsr_cost_roundtrip,
    lmsr_trading_value, reference_curve, reserves_from_liquidity, Allocation, BandCapital,
    CurveFamily, Multipliers, SuccessRule, TradeRequest, TradeResult, TradeSide, TradingCurve,
};
pub use belief::{
    add_beliefs, compile_2d, compile_gbm_discounted, compile_ratio, eval_psi, gbm_snapshot_density,
    BeliefSpec, BeliefSummary, GbmParams, RatioDensity, RatioTable, Table2d,
};
pub use numerics::{bisect, integrate_log, make_log_grid, PriceGrid, Weight};
pub use objectives::{
    divergence_loss, fee_revenue, inefficiency, inefficiency_direct, kappa, lvr_rate, net_profit,
    reserve_value, FeeParams, LvrWeight,
};
pub use optimizer::{
    invert_allocation, inverted_summary, kkt_residuals, solve_cop, solve_with_linear_term,
    KktReport, LinearKind, LinearTerm, MarketParams,
};
pub use simulator::{
    failure_bounds, simulate, stationary_check, SimConfig, SimStats, SizeDistribution, StateVisits,
};
