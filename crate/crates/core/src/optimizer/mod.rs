//! The liquidity-provision convex program, solved through its KKT
//! conditions.
//!
//! Minimizing the expected inefficiency `(1/N_ψ)∫ w(p)/L(p) dp` subject to
//! `P_X X0 + P_Y Y0 = B` gives, wherever `w(p) > 0`,
//! `L(p) = p·√(w/λ_X)` above `p0` and `L(p) = √(p·w/λ_Y)` below, with
//! `λ_X = P_X λ_B` and `λ_Y = P_Y λ_B`. An optional linear term `∫ g L dp`
//! enters the stationarity denominator and `λ_B` is then found by bisection.

mod inverse;
mod kkt;

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::allocation::{Allocation, Multipliers};
use crate::belief::BeliefSummary;
use crate::numerics::{bisect, check_len, PriceGrid};
use crate::{Error, Result};

pub use inverse::{invert_allocation, inverted_summary};
pub use kkt::{kkt_residuals, KktReport};

/// Weights below this fraction of `max w` are treated as zero.
pub const SUPPORT_THRESHOLD: f64 = 1e-14;
/// Largest admissible share of belief mass outside the grid.
const MAX_TRUNCATION: f64 = 0.01;

/// Initial numeraire prices and the budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    pub px: f64,
    pub py: f64,
    pub budget: f64,
}

impl MarketParams {
    pub fn new(px: f64, py: f64, budget: f64) -> Result<Self> {
        let m = Self { px, py, budget };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.px, self.py, self.budget]
            .iter()
            .any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return Err(Error::InvalidParams(format!(
                "prices and budget must be positive, got P_X = {}, P_Y = {}, B = {}",
                self.px, self.py, self.budget
            )));
        }
        Ok(())
    }

    /// Initial spot rate `P_X/P_Y`.
    pub fn p0(&self) -> f64 {
        self.px / self.py
    }

    /// Budget pressure `P_side·c_side(p)` per unit `λ_B` at rate `p`.
    pub(crate) fn pressure(&self, p: f64) -> f64 {
        if p >= self.p0() {
            self.px / (p * p)
        } else {
            self.py / p
        }
    }

    pub(crate) fn spent(&self, a: &Allocation) -> f64 {
        a.value_at(self.px, self.py)
    }
}

/// Whether a [`LinearTerm`] is a cost or a value in the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearKind {
    /// `+∫ c L dp` is added to the minimized objective.
    Cost,
    /// `−∫ c L dp`: a value the provider wants to keep.
    Value,
}

/// A term linear in `L`, sampled on a grid: `∫ g(p) L(p) dp` with signed
/// cost density `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTerm {
    grid: PriceGrid,
    coefficients: Vec<f64>,
    kind: LinearKind,
}

impl LinearTerm {
    pub fn new(grid: &PriceGrid, coefficients: Vec<f64>, kind: LinearKind) -> Result<Self> {
        check_len(grid, &coefficients)?;
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParams("linear term must be finite".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            coefficients,
            kind,
        })
    }

    pub fn zero(grid: &PriceGrid) -> Self {
        Self {
            grid: grid.clone(),
            coefficients: alloc::vec![0.0; grid.len()],
            kind: LinearKind::Cost,
        }
    }

    /// A per-unit-liquidity cost `ℓ(p) ≥ 0`.
    pub fn per_liquidity_cost(grid: &PriceGrid, cost: Vec<f64>) -> Result<Self> {
        Self::new(grid, cost, LinearKind::Cost)
    }

    /// A constant cost `c` per unit liquidity.
    pub fn uniform_cost(grid: &PriceGrid, c: f64) -> Result<Self> {
        Self::new(grid, alloc::vec![c; grid.len()], LinearKind::Cost)
    }

    /// The expected reserve value `∫ κ L dp`, kept as a value.
    pub fn divergence_value(grid: &PriceGrid, kappa: Vec<f64>) -> Result<Self> {
        Self::new(grid, kappa, LinearKind::Value)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            coefficients: self.coefficients.iter().map(|c| a * c).collect(),
            kind: self.kind,
        }
    }

    pub fn grid(&self) -> &PriceGrid {
        &self.grid
    }

    pub fn kind(&self) -> LinearKind {
        self.kind
    }

    /// The unsigned samples (`κ` for a value term, `ℓ` for a cost).
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Signed cost density `g` (positive means cost).
    pub fn cost_density(&self) -> Vec<f64> {
        match self.kind {
            LinearKind::Cost => self.coefficients.clone(),
            LinearKind::Value => self.coefficients.iter().map(|c| -c).collect(),
        }
    }

    /// `∫ g L dp` with the signed density.
    pub fn apply(&self, liquidity: &[f64]) -> f64 {
        let g: Vec<f64> = self
            .cost_density()
            .iter()
            .zip(liquidity)
            .zip(self.grid.points())
            .map(|((g, l), p)| g * l * p)
            .collect();
        crate::numerics::integrate_closed(&self.grid, &g)
    }
}

/// `w/N_ψ`, zeroed below the support threshold.
pub(crate) fn effective_weight(summary: &BeliefSummary) -> Result<Vec<f64>> {
    let mass = summary.mass();
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::ZeroMass);
    }
    let w_max = summary.w().iter().cloned().fold(0.0, f64::max);
    if !(w_max > 0.0) {
        return Err(Error::DegenerateBelief);
    }
    Ok(summary
        .w()
        .iter()
        .map(|&w| {
            if w >= SUPPORT_THRESHOLD * w_max {
                w / mass
            } else {
                0.0
            }
        })
        .collect())
}

fn check_inputs(summary: &BeliefSummary, market: &MarketParams) -> Result<Vec<f64>> {
    market.validate()?;
    let grid = summary.grid();
    if !grid.contains(market.p0()) {
        return Err(Error::InvalidBounds(format!(
            "initial spot {} outside the grid [{}, {}]",
            market.p0(),
            grid.p_min(),
            grid.p_max()
        )));
    }
    let w = effective_weight(summary)?;
    let fraction = summary.truncated_fraction();
    if fraction > MAX_TRUNCATION {
        return Err(Error::TruncationDominated { fraction });
    }
    Ok(w)
}

/// Optimal allocation for `summary` under `market`.
pub fn solve_cop(summary: &BeliefSummary, market: &MarketParams) -> Result<Allocation> {
    let w = check_inputs(summary, market)?;
    let grid = summary.grid();
    let unit: Vec<f64> = grid
        .points()
        .iter()
        .zip(&w)
        .map(|(&p, &w)| (w / market.pressure(p)).sqrt())
        .collect();
    let spent = market.spent(&Allocation::new(grid, unit.clone(), market.p0())?);
    let scale = market.budget / spent;
    let liquidity = unit.into_iter().map(|l| l * scale).collect();
    let lambda_b = (spent / market.budget).powi(2);
    Ok(
        Allocation::new(grid, liquidity, market.p0())?.with_multipliers(Multipliers {
            lambda_b,
            lambda_x: market.px * lambda_b,
            lambda_y: market.py * lambda_b,
        }),
    )
}

/// Optimal allocation when the objective also carries `∫ g L dp`.
pub fn solve_with_linear_term(
    summary: &BeliefSummary,
    term: &LinearTerm,
    market: &MarketParams,
) -> Result<Allocation> {
    let w = check_inputs(summary, market)?;
    let grid = summary.grid();
    if term.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let g = term.cost_density();
    let pressure: Vec<f64> = grid.points().iter().map(|&p| market.pressure(p)).collect();

    let liquidity_at = |lambda: f64| -> Vec<f64> {
        w.iter()
            .zip(&pressure)
            .zip(&g)
            .map(|((&w, &c), &g)| {
                if w > 0.0 {
                    (w / (lambda * c + g)).sqrt()
                } else {
                    0.0
                }
            })
            .collect()
    };
    let excess = |lambda: f64| -> f64 {
        let a = Allocation::new(grid, liquidity_at(lambda), market.p0());
        match a {
            Ok(a) => market.spent(&a) - market.budget,
            Err(_) => f64::INFINITY,
        }
    };

    // smallest λ_B keeping every denominator positive on the support
    let floor = w
        .iter()
        .zip(&pressure)
        .zip(&g)
        .filter(|((w, _), _)| **w > 0.0)
        .map(|((_, c), g)| -g / c)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut lo = if floor > 0.0 {
        floor * (1.0 + 1e-9)
    } else {
        1.0
    };
    if floor > 0.0 {
        if !(excess(lo) > 0.0) {
            return Err(Error::InfeasibleLinearTerm);
        }
    } else {
        let mut tries = 0;
        while !(excess(lo) > 0.0) {
            lo *= 1e-2;
            tries += 1;
            if tries > 300 || lo == 0.0 {
                return Err(Error::InfeasibleLinearTerm);
            }
        }
    }
    let mut hi = lo * 2.0;
    let mut tries = 0;
    while excess(hi) > 0.0 {
        hi *= 10.0;
        tries += 1;
        if tries > 300 || !hi.is_finite() {
            return Err(Error::InfeasibleLinearTerm);
        }
    }

    // bisect in ln λ; spent falls monotonically as λ grows
    let root = bisect(|u| excess(u.exp()), lo.ln(), hi.ln(), 1e-15)?;
    let lambda_b = root.exp();
    let alloc = Allocation::new(grid, liquidity_at(lambda_b), market.p0())?;
    Ok(alloc.with_multipliers(Multipliers {
        lambda_b,
        lambda_x: market.px * lambda_b,
        lambda_y: market.py * lambda_b,
    }))
}
