#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// LMSR cost `C(r) = ln Σ exp(−r_i)` for two share balances.
pub fn lmsr_cost(shares: [f64; 2]) -> f64 {
    let m = (-shares[0]).max(-shares[1]);
    m + ((-shares[0] - m).exp() + (-shares[1] - m).exp()).ln()
}

/// The LMSR trading function `f(x, y) = 2 − e^{−x} − e^{−y}`.
pub fn lmsr_trading_value(x: f64, y: f64) -> f64 {
    2.0 - (-x).exp() - (-y).exp()
}

/// The trading function evaluated through the cost function,
/// `f = 2 − exp(C(r))`. A strictly decreasing map of `C`, so the two share
/// the same level sets.
pub fn lmsr_cost_roundtrip(shares: [f64; 2]) -> f64 {
    2.0 - lmsr_cost(shares).exp()
}
