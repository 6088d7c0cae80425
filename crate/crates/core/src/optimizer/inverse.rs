use alloc::vec::Vec;

use super::MarketParams;
use crate::allocation::Allocation;
use crate::belief::{compile_ratio, BeliefSpec, BeliefSummary, RatioDensity, RatioTable};
use crate::Result;

fn ratio_density(alloc: &Allocation) -> Result<RatioDensity> {
    let grid = alloc.grid();
    let h: Vec<f64> = alloc
        .liquidity()
        .iter()
        .zip(grid.points())
        .map(|(l, p)| l * l / p)
        .collect();
    Ok(RatioDensity::Tabulated(RatioTable::new(
        grid.points().to_vec(),
        h,
    )?))
}

/// A belief for which `alloc` is optimal: `ψ(p_X, p_Y) = L(q)²/q` with
/// `q = p_X/p_Y` on `(0, P_X] × (0, P_Y]`.
pub fn invert_allocation(alloc: &Allocation, market: &MarketParams) -> Result<BeliefSpec> {
    market.validate()?;
    Ok(BeliefSpec::Ratio {
        density: ratio_density(alloc)?,
        px: market.px,
        py: market.py,
    })
}

/// Summary of the inverted belief compiled in ratio space on the
/// allocation's own grid, so every sample is reproduced exactly.
pub fn inverted_summary(alloc: &Allocation, market: &MarketParams) -> Result<BeliefSummary> {
    market.validate()?;
    compile_ratio(&ratio_density(alloc)?, market.px, market.py, alloc.grid())
}
