use alloc::vec::Vec;

use super::{effective_weight, LinearTerm, MarketParams};
use crate::allocation::Allocation;
use crate::belief::BeliefSummary;
use crate::numerics::integrate_closed;
use crate::{Error, Result};

/// Optimality diagnostics of an allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    pub lambda_b: f64,
    pub lambda_x: f64,
    pub lambda_y: f64,
    /// `max |λ_B·c(p) + g − w/(N L²)| / c(p)` over the support of `w`, where
    /// `c(p)` is the budget pressure per unit `λ_B`. Dividing by `c(p)` keeps
    /// the residual on the scale of `λ_B` across many decades of `p`.
    pub stationarity_residual: f64,
    /// `max L·λ_L(p)` over points with `w = 0`.
    pub complementary_slackness: f64,
    /// `|P_X X0 + P_Y Y0 − B|`.
    pub budget_residual: f64,
    /// Deviation of the stored `(X0, Y0)` from the reserve integrals of `L`.
    pub reserve_residuals: (f64, f64),
    /// `(1/N_ψ)∫ w/L dp`.
    pub inefficiency: f64,
    /// `λ_Y Y0 + λ_X X0 + ∫ g L dp`, which equals the inefficiency at a
    /// stationary point.
    pub multiplier_value: f64,
}

impl KktReport {
    /// `|inefficiency − multiplier_value| / inefficiency`.
    pub fn objective_gap(&self) -> f64 {
        (self.inefficiency - self.multiplier_value).abs() / self.inefficiency
    }
}

/// KKT residuals of `alloc` for `summary`, with an optional linear term.
pub fn kkt_residuals(
    alloc: &Allocation,
    summary: &BeliefSummary,
    term: Option<&LinearTerm>,
    market: &MarketParams,
) -> Result<KktReport> {
    let grid = alloc.grid();
    if summary.grid() != grid || term.is_some_and(|t| t.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    let m = alloc
        .multipliers()
        .ok_or_else(|| Error::InvalidParams("allocation carries no multipliers".into()))?;
    let w = effective_weight(summary)?;
    let g = term.map_or_else(|| alloc::vec![0.0; grid.len()], |t| t.cost_density());
    let l = alloc.liquidity();

    let mut stationarity: f64 = 0.0;
    let mut slackness: f64 = 0.0;
    let mut ratio = Vec::with_capacity(l.len());
    for (i, &p) in grid.points().iter().enumerate() {
        let pressure = m.lambda_b * market.pressure(p) + g[i];
        if w[i] > 0.0 {
            let r = if l[i] > 0.0 {
                (pressure - w[i] / (l[i] * l[i])).abs() / market.pressure(p)
            } else {
                f64::INFINITY
            };
            stationarity = stationarity.max(r);
            ratio.push(if l[i] > 0.0 {
                w[i] / l[i] * p
            } else {
                f64::INFINITY
            });
        } else {
            slackness = slackness.max(l[i] * pressure.abs());
            ratio.push(0.0);
        }
    }

    let check = Allocation::new(grid, l.to_vec(), alloc.p0())?;
    let linear = term.map_or(0.0, |t| t.apply(l));
    Ok(KktReport {
        lambda_b: m.lambda_b,
        lambda_x: m.lambda_x,
        lambda_y: m.lambda_y,
        stationarity_residual: stationarity,
        complementary_slackness: slackness,
        budget_residual: (market.spent(alloc) - market.budget).abs(),
        reserve_residuals: (
            (alloc.x0() - check.x0()).abs(),
            (alloc.y0() - check.y0()).abs(),
        ),
        inefficiency: integrate_closed(grid, &ratio),
        multiplier_value: m.lambda_y * alloc.y0() + m.lambda_x * alloc.x0() + linear,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::{compile_ratio, RatioDensity};
    use crate::numerics::PriceGrid;
    use crate::optimizer::solve_cop;

    #[test]
    fn optimum_is_stationary_and_tight() {
        let grid = PriceGrid::standard();
        let m = MarketParams::new(1.0, 1.0, 2.0).unwrap();
        let s = compile_ratio(&RatioDensity::Uniform, 1.0, 1.0, &grid).unwrap();
        let a = solve_cop(&s, &m).unwrap();
        let r = kkt_residuals(&a, &s, None, &m).unwrap();
        assert!(r.stationarity_residual < 1e-8 * r.lambda_b);
        assert!(r.budget_residual < 1e-8 * 2.0);
        assert!(r.objective_gap() < 1e-3);
        assert!((r.inefficiency - 8.0).abs() < 1e-2, "{}", r.inefficiency);
    }

    #[test]
    fn perturbation_breaks_stationarity() {
        let grid = PriceGrid::standard();
        let m = MarketParams::new(1.0, 1.0, 2.0).unwrap();
        let s = compile_ratio(&RatioDensity::Uniform, 1.0, 1.0, &grid).unwrap();
        let a = solve_cop(&s, &m).unwrap();
        let i = grid.nearest(1.0);
        let mut l = a.liquidity().to_vec();
        l[i] *= 1.01;
        let b = Allocation::from_parts(&grid, l, 1.0, a.x0(), a.y0())
            .unwrap()
            .with_multipliers(a.multipliers().unwrap());
        let r = kkt_residuals(&b, &s, None, &m).unwrap();
        assert!(r.stationarity_residual >= 1e-3 * r.lambda_b);
    }
}
