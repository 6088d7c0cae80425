//! Randomized invariants of the optimizer, curves and objectives.

use cfmm_forge::{
    compile_ratio, execute_trade, lvr_rate, reference_curve, reserve_value,
    reserves_from_liquidity, solve_cop, Allocation, CurveFamily, LvrWeight, MarketParams,
    PriceGrid, RatioDensity, SuccessRule, TradeRequest, TradeSide,
};
use proptest::prelude::*;

fn grid() -> PriceGrid {
    PriceGrid::log_spaced(1e-3, 1e3, 401).unwrap()
}

fn close(a: &[f64], b: &[f64], factor: f64, tol: f64) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (factor * x - y).abs() <= tol * y.abs().max(factor * x.abs()))
}

/// A smooth positive liquidity profile.
fn profile(g: &PriceGrid, a: f64, b: f64, c: f64) -> Vec<f64> {
    g.points()
        .iter()
        .map(|p| p.powf(a) * (b * (c * p.ln()).sin()).exp() / (1.0 + p))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn belief_scale_does_not_move_the_optimum(exponent in -0.3f64..0.3, alpha in 1e-3f64..1e3) {
        let g = grid();
        let m = MarketParams::new(1.0, 1.0, 2.0).unwrap();
        let s = compile_ratio(&RatioDensity::Power { exponent }, 1.0, 1.0, &g).unwrap();
        let a = solve_cop(&s, &m).unwrap();
        let b = solve_cop(&s.scaled(alpha), &m).unwrap();
        prop_assert!(close(a.liquidity(), b.liquidity(), 1.0, 1e-12));
    }

    #[test]
    fn liquidity_is_linear_in_budget(budget in 1e-3f64..1e3, px in 0.2f64..5.0, py in 0.2f64..5.0) {
        let g = grid();
        let s = compile_ratio(&RatioDensity::Lmsr, px, py, &g).unwrap();
        let one = solve_cop(&s, &MarketParams::new(px, py, 1.0).unwrap()).unwrap();
        let many = solve_cop(&s, &MarketParams::new(px, py, budget).unwrap()).unwrap();
        prop_assert!(close(one.liquidity(), many.liquidity(), budget, 1e-12));
        prop_assert!((px * many.x0() + py * many.y0() - budget).abs() < 1e-9 * budget);
    }

    #[test]
    fn reserves_are_monotone(a in -0.5f64..1.5, b in 0.0f64..0.5, c in 0.1f64..2.0) {
        let g = grid();
        let alloc = Allocation::new(&g, profile(&g, a, b, c), 1.0).unwrap();
        let curve = reserves_from_liquidity(&alloc).unwrap();
        prop_assert!(curve.y_samples().windows(2).all(|w| w[1] > w[0]));
        prop_assert!(curve.x_samples().windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn sell_then_buy_returns_the_same_x(y in 0.2f64..5.0, k in 1e-4f64..0.1) {
        let g = grid();
        let curve = reference_curve(CurveFamily::ConstantProduct, 1.0, 1.0, &g).unwrap();
        let req = |side| TradeRequest { side, k, p_hat: 1.0, eps: 1e6, rule: SuccessRule::OverallRate };
        let sell = execute_trade(&curve, y, &req(TradeSide::SellY)).unwrap();
        let buy = execute_trade(&curve, sell.y_after, &req(TradeSide::BuyY)).unwrap();
        prop_assert!((buy.y_after - y).abs() < 1e-12 * y.max(1.0));
        prop_assert!((sell.delta_x - buy.delta_x).abs() <= 1e-9 * sell.delta_x);
    }

    #[test]
    fn overall_rate_lies_between_the_spots(y in 0.2f64..5.0, k in 1e-4f64..0.1, sell in any::<bool>()) {
        let g = grid();
        let curve = reference_curve(CurveFamily::WeightedProduct { alpha: 3.0 }, 1.0, 1.0, &g).unwrap();
        let side = if sell { TradeSide::SellY } else { TradeSide::BuyY };
        let r = execute_trade(&curve, y, &TradeRequest { side, k, p_hat: 1.0, eps: 1e6, rule: SuccessRule::OverallRate }).unwrap();
        let (lo, hi) = (r.pre_spot.min(r.post_spot), r.pre_spot.max(r.post_spot));
        prop_assert!(r.overall_rate >= lo * (1.0 - 1e-9) && r.overall_rate <= hi * (1.0 + 1e-9));
    }

    #[test]
    fn reserve_value_and_lvr_are_linear(scale in 1e-2f64..1e2, a in 0.0f64..1.0) {
        let g = grid();
        let s = compile_ratio(&RatioDensity::Uniform, 1.0, 1.0, &g).unwrap();
        let alloc = Allocation::new(&g, profile(&g, a, 0.1, 0.5), 1.0).unwrap();
        let big = alloc.scaled(scale);
        let nu = reserve_value(&alloc, &s).unwrap();
        prop_assert!((reserve_value(&big, &s).unwrap() - scale * nu).abs() < 1e-10 * scale * nu.abs());
        let sigma2 = vec![0.04; g.len()];
        let weight = LvrWeight::Density(g.points().iter().map(|p| (-(p.ln()).powi(2)).exp()).collect());
        let lvr = lvr_rate(&alloc, &weight, &sigma2).unwrap();
        prop_assert!((lvr_rate(&big, &weight, &sigma2).unwrap() - scale * lvr).abs() < 1e-10 * scale * lvr);
    }
}
