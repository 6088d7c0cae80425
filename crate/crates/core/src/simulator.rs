//! Size-k trade Markov chain against a trading curve.
//!
//! Each step a trade arrives with probability `q`; it buys or sells `k`
//! units of Y with equal probability and executes only if it satisfies the
//! slippage rule, otherwise the reserves stay put. With a fixed size the
//! reachable states form the lattice `y0 + n·k`, tracked by the integer `n`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocation::{
    band_capital, execute_trade, SuccessRule, TradeRequest, TradeSide, TradingCurve,
};
use crate::{Error, Result};

/// Distribution of trade sizes; `k` in [`SimConfig`] is the mean.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SizeDistribution {
    /// Every trade has size `k`.
    #[default]
    Fixed,
    /// Uniform on `(0, 2k]`.
    Uniform,
    /// Exponential with mean `k`.
    Exponential,
}

impl SizeDistribution {
    fn draw<R: Rng>(&self, k: f64, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match self {
            Self::Fixed => k,
            Self::Uniform => 2.0 * k * (1.0 - u),
            Self::Exponential => -k * (1.0 - u).ln(),
        }
    }

    /// `E[min(1, S/band)]`, the small-trade approximation of the failure
    /// probability.
    pub fn expected_failure(&self, k: f64, band: f64) -> f64 {
        match self {
            Self::Fixed => (k / band).min(1.0),
            Self::Uniform => {
                if 2.0 * k <= band {
                    k / band
                } else {
                    1.0 - band / (4.0 * k)
                }
            }
            Self::Exponential => k / band * (1.0 - (-band / k).exp()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Trade size in units of Y (the mean for random sizes).
    pub k: f64,
    /// Per-step arrival probability.
    pub q: f64,
    pub eps: f64,
    pub p_hat: f64,
    /// Measured steps after the burn-in.
    pub steps: u64,
    /// Defaults to `10·(band/k)²`.
    pub burn_in: Option<u64>,
    pub seed: u64,
    pub rule: SuccessRule,
    pub size: SizeDistribution,
    /// Stop once this many measured trades have arrived.
    pub max_trades: Option<u64>,
}

impl SimConfig {
    pub fn new(k: f64, eps: f64, steps: u64, seed: u64) -> Self {
        Self {
            k,
            q: 0.5,
            eps,
            p_hat: 1.0,
            steps,
            burn_in: None,
            seed,
            rule: SuccessRule::StrictSpot,
            size: SizeDistribution::Fixed,
            max_trades: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "k must be positive, got {}",
                self.k
            )));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::InvalidParams(format!(
                "q must lie in (0, 1), got {}",
                self.q
            )));
        }
        if !(self.eps > 0.0 && self.p_hat > 0.0) {
            return Err(Error::InvalidParams(
                "eps and p_hat must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Occupancy of lattice states `y0 + n·k` over the measured steps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateVisits {
    pub y0: f64,
    pub k: f64,
    /// `(n, visits)` in increasing `n`.
    pub counts: Vec<(i64, u64)>,
}

impl StateVisits {
    pub fn y_at(&self, n: i64) -> f64 {
        self.y0 + n as f64 * self.k
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|c| c.1).sum()
    }

    /// Total-variation distance from uniform over the visited states.
    pub fn tv_from_uniform(&self) -> f64 {
        let total = self.total() as f64;
        if total == 0.0 {
            return 0.0;
        }
        let m = self.counts.len() as f64;
        0.5 * self
            .counts
            .iter()
            .map(|&(_, c)| (c as f64 / total - 1.0 / m).abs())
            .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    pub attempted: u64,
    pub succeeded: u64,
    pub failed: u64,
    pub failure_rate: f64,
    /// Empty when trade sizes are random.
    pub visits: StateVisits,
    /// Band capital `|L_ε(p̂)|` of the curve.
    pub band: f64,
    pub bound_lo: f64,
    pub bound_hi: f64,
    pub tv_distance_uniform: f64,
    pub burn_in: u64,
}

impl SimStats {
    /// Binomial standard error of the failure rate.
    pub fn standard_error(&self) -> f64 {
        let f = self.failure_rate;
        (f * (1.0 - f) / (self.attempted.max(1) as f64)).sqrt()
    }

    /// Whether the failure rate lies within the bounds widened by
    /// `sigmas` standard errors.
    pub fn within_bounds(&self, sigmas: f64) -> bool {
        let slack = sigmas * self.standard_error();
        self.failure_rate >= self.bound_lo - slack && self.failure_rate <= self.bound_hi + slack
    }
}

/// `(k/(band + k), min(1, k/|band − k|))`.
pub fn failure_bounds(k: f64, band: f64) -> (f64, f64) {
    let lo = k / (band + k);
    let hi = (k / (band - k).abs()).min(1.0);
    (lo.min(hi), hi.max(lo))
}

/// Runs the chain from the state with spot `p̂`. Deterministic in the seed;
/// arrivals, directions and sizes draw from separate streams so thinning
/// arrivals does not change the sequence of trades.
pub fn simulate(curve: &TradingCurve, cfg: &SimConfig) -> Result<SimStats> {
    cfg.validate()?;
    let band = band_capital(curve, cfg.p_hat, cfg.eps)?.amount;
    let burn_in = cfg.burn_in.unwrap_or_else(|| {
        let r = band / cfg.k;
        (10.0 * r * r).ceil().min(1e9) as u64
    });
    let y0 = curve.y_of(cfg.p_hat);
    let stream = |s: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(s);
        rng
    };
    let mut arrivals = stream(0);
    let mut directions = stream(1);
    let mut sizes = stream(2);

    let fixed = cfg.size == SizeDistribution::Fixed;
    let mut n: i64 = 0;
    let mut y = y0;
    let mut cache: BTreeMap<(i64, bool), bool> = BTreeMap::new();
    let mut visits: BTreeMap<i64, u64> = BTreeMap::new();
    let (mut attempted, mut succeeded) = (0u64, 0u64);

    for step in 0..burn_in.saturating_add(cfg.steps) {
        let measuring = step >= burn_in;
        if arrivals.random::<f64>() < cfg.q {
            let sell = directions.random::<bool>();
            let size = cfg.size.draw(cfg.k, &mut sizes);
            let req = TradeRequest {
                side: if sell {
                    TradeSide::SellY
                } else {
                    TradeSide::BuyY
                },
                k: size,
                p_hat: cfg.p_hat,
                eps: cfg.eps,
                rule: cfg.rule,
            };
            let ok = if fixed {
                *cache.entry((n, sell)).or_insert_with(|| {
                    let y = y0 + n as f64 * cfg.k;
                    execute_trade(curve, y, &req).is_ok_and(|r| r.succeeded)
                })
            } else {
                match execute_trade(curve, y, &req) {
                    Ok(r) if r.succeeded => {
                        y = r.y_after;
                        true
                    }
                    _ => false,
                }
            };
            if ok && fixed {
                n += if sell { 1 } else { -1 };
            }
            if measuring {
                attempted += 1;
                succeeded += ok as u64;
            }
        }
        if measuring {
            if fixed {
                *visits.entry(n).or_insert(0) += 1;
            }
            if cfg.max_trades.is_some_and(|m| attempted >= m) {
                break;
            }
        }
    }

    let visits = StateVisits {
        y0,
        k: cfg.k,
        counts: visits.into_iter().collect(),
    };
    let (bound_lo, bound_hi) = failure_bounds(cfg.k, band);
    let failed = attempted - succeeded;
    Ok(SimStats {
        attempted,
        succeeded,
        failed,
        failure_rate: if attempted > 0 {
            failed as f64 / attempted as f64
        } else {
            0.0
        },
        tv_distance_uniform: visits.tv_from_uniform(),
        visits,
        band,
        bound_lo,
        bound_hi,
        burn_in,
    })
}

/// Total-variation distance of the occupancy from uniform; refuses when a
/// visited state has fewer than 100 visits.
pub fn stationary_check(stats: &SimStats) -> Result<f64> {
    let min_visits = stats.visits.counts.iter().map(|c| c.1).min().unwrap_or(0);
    if min_visits < 100 {
        return Err(Error::InsufficientSamples { min_visits });
    }
    Ok(stats.visits.tv_from_uniform())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{reference_curve, CurveFamily};
    use crate::numerics::PriceGrid;

    fn cp() -> TradingCurve {
        let grid = PriceGrid::log_spaced(1e-2, 1e2, 101).unwrap();
        reference_curve(CurveFamily::ConstantProduct, 1.0, 1.0, &grid).unwrap()
    }

    #[test]
    fn bound_formula() {
        assert_eq!(failure_bounds(1.0, 1.0), (0.5, 1.0));
        let (lo, hi) = failure_bounds(0.02, 0.190909);
        assert!((lo - 0.094827).abs() < 1e-6);
        assert!((hi - 0.117021).abs() < 1e-6);
        let (lo, hi) = failure_bounds(1e-4, 1.0);
        assert!((lo - 1e-4).abs() < 2e-8 && (hi - 1e-4).abs() < 2e-8);
    }

    #[test]
    fn oversized_trades_always_fail() {
        let mut cfg = SimConfig::new(0.5, 0.21, 20_000, 7);
        cfg.burn_in = Some(0);
        let s = simulate(&cp(), &cfg).unwrap();
        assert_eq!(s.failure_rate, 1.0);
        assert_eq!(s.visits.counts.len(), 1);
        assert_eq!(stationary_check(&s).unwrap(), 0.0);
    }

    #[test]
    fn deterministic_in_the_seed() {
        let cfg = SimConfig::new(0.04, 0.21, 50_000, 11);
        let a = simulate(&cp(), &cfg).unwrap();
        let b = simulate(&cp(), &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate(&cp(), &SimConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn states_lie_on_the_lattice() {
        let cfg = SimConfig::new(0.04, 0.21, 50_000, 3);
        let s = simulate(&cp(), &cfg).unwrap();
        let c = cp();
        for &(n, _) in &s.visits.counts {
            let y = s.visits.y_at(n);
            let back = (y - s.visits.y0) / cfg.k;
            assert!((back - n as f64).abs() < 1e-12);
            assert!(c.spot_at(y).unwrap() <= 1.21 + 1e-12);
        }
    }

    #[test]
    fn too_few_samples_are_reported() {
        let cfg = SimConfig::new(0.01, 0.21, 100, 3);
        let s = simulate(
            &cp(),
            &SimConfig {
                burn_in: Some(0),
                ..cfg
            },
        )
        .unwrap();
        assert!(matches!(
            stationary_check(&s),
            Err(Error::InsufficientSamples { .. })
        ));
    }
}
