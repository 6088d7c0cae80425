//! Scalar objectives of an allocation under a belief: expected inefficiency,
//! fee revenue, expected reserve value, divergence loss, LVR and net profit.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::allocation::Allocation;
use crate::belief::{BeliefSpec, BeliefSummary};
use crate::numerics::{check_len, integrate_closed, GaussLegendre, PriceGrid};
use crate::optimizer::{effective_weight, LinearTerm, SUPPORT_THRESHOLD};
use crate::{Error, Result};

/// Fee schedule and trading assumptions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeeParams {
    /// Proportional fee.
    pub delta: f64,
    /// Mean trade size in numeraire.
    pub s: f64,
    /// Traded volume per unit time.
    pub rate: f64,
}

impl FeeParams {
    pub fn new(delta: f64, s: f64) -> Result<Self> {
        let f = Self {
            delta,
            s,
            rate: 1.0,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.delta) || !(self.s > 0.0) || !(self.rate >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "need 0 <= delta < 1, s > 0, rate >= 0; got ({}, {}, {})",
                self.delta, self.s, self.rate
            )));
        }
        Ok(())
    }
}

fn check_grid(alloc: &Allocation, summary: &BeliefSummary) -> Result<()> {
    if alloc.grid() != summary.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `(1/N_ψ)∫ w(p)/L(p) dp`; infinite if `L` vanishes where `w` does not.
pub fn inefficiency(alloc: &Allocation, summary: &BeliefSummary) -> Result<f64> {
    check_grid(alloc, summary)?;
    let w = effective_weight(summary)?;
    let mut g = Vec::with_capacity(w.len());
    for ((&w, &l), &p) in w.iter().zip(alloc.liquidity()).zip(alloc.grid().points()) {
        if w > 0.0 {
            if !(l > 0.0) {
                return Ok(f64::INFINITY);
            }
            g.push(w / l * p);
        } else {
            g.push(0.0);
        }
    }
    Ok(integrate_closed(alloc.grid(), &g))
}

/// Inefficiency from the belief itself, `(1/N_ψ)∬ ψ/(p_Y L(p_X/p_Y))`,
/// evaluated in `(q, p_Y)` coordinates with `q = p_X/p_Y`: the outer
/// integral runs over the grid rates, the inner one is Gauss–Legendre in
/// `p_Y`.
pub fn inefficiency_direct(alloc: &Allocation, spec: &BeliefSpec, inner_n: usize) -> Result<f64> {
    spec.validate()?;
    let gl = GaussLegendre::new(inner_n.max(8));
    let grid = alloc.grid();
    let columns: Vec<(f64, f64)> = grid
        .points()
        .iter()
        .map(|&q| column(spec, q, &gl))
        .collect();
    // same support rule as the optimizer: negligible columns carry no weight
    let floor = SUPPORT_THRESHOLD * columns.iter().map(|c| c.0).fold(0.0, f64::max);
    let mut mass = Vec::with_capacity(grid.len());
    let mut ratio = Vec::with_capacity(grid.len());
    let mut missing = false;
    for ((&q, &l), &(m0, m1)) in grid.points().iter().zip(alloc.liquidity()).zip(&columns) {
        // per d ln q: ∬ ψ y dq dy and ∬ ψ/L dq dy
        mass.push(m1 * q);
        if m0 > floor {
            if l > 0.0 {
                ratio.push(m0 / l * q);
            } else {
                missing = true;
                ratio.push(0.0);
            }
        } else {
            ratio.push(0.0);
        }
    }
    let n = integrate_closed(grid, &mass);
    if !(n > 0.0) {
        return Err(Error::ZeroMass);
    }
    if missing {
        return Ok(f64::INFINITY);
    }
    Ok(integrate_closed(grid, &ratio) / n)
}

// (∫ ψ(q y, y) dy, ∫ ψ(q y, y) y dy) along the column of fixed ratio q
fn column(spec: &BeliefSpec, q: f64, gl: &GaussLegendre) -> (f64, f64) {
    let mut acc = (0.0, 0.0);
    let mut add = |y: f64, wy: f64| {
        let v = wy * spec.psi(q * y, y);
        acc.0 += v;
        acc.1 += v * y;
    };
    if let Some((_, px, py)) = spec.ratio_form() {
        let top = py.min(px / q);
        for (y, wy) in gl.nodes_on(0.0, top) {
            add(y, wy);
        }
    } else if let BeliefSpec::Table2d(t) = spec {
        let ((x0, x1), (y0, y1)) = t.hull();
        let (lo, hi) = (y0.max(x0 / q), y1.min(x1 / q));
        if hi > lo {
            for (u, wu) in gl.nodes_on(lo.ln(), hi.ln()) {
                let y = u.exp();
                add(y, wu * y);
            }
        }
    } else {
        let panels = 48;
        let (a, b) = (-24.0f64, 24.0f64);
        let width = (b - a) / panels as f64;
        for k in 0..panels {
            let lo = a + k as f64 * width;
            for (u, wu) in gl.nodes_on(lo, lo + width) {
                let y = u.exp();
                add(y, wu * y);
            }
        }
    }
    acc
}

/// Expected fee revenue per unit time, `δ·ρ·(1 − s·inefficiency)`. May be
/// negative when `s` is large against the liquidity.
pub fn fee_revenue(alloc: &Allocation, summary: &BeliefSummary, fees: &FeeParams) -> Result<f64> {
    fees.validate()?;
    if fees.delta == 0.0 {
        return Ok(0.0);
    }
    Ok(fees.delta * fees.rate * (1.0 - fees.s * inefficiency(alloc, summary)?))
}

/// `κ(p) = (m_X(p)/p² + m_Y(p)/p)/N_ψ` as a value term.
pub fn kappa(summary: &BeliefSummary) -> Result<LinearTerm> {
    let n = summary.mass();
    if !(n > 0.0) {
        return Err(Error::ZeroMass);
    }
    let k = summary
        .grid()
        .points()
        .iter()
        .zip(summary.m_x().iter().zip(summary.m_y()))
        .map(|(&p, (mx, my))| (mx / (p * p) + my / p) / n)
        .collect();
    LinearTerm::divergence_value(summary.grid(), k)
}

/// Expected future value of the reserves, `ν = ∫ L κ dp`.
pub fn reserve_value(alloc: &Allocation, summary: &BeliefSummary) -> Result<f64> {
    check_grid(alloc, summary)?;
    let k = kappa(summary)?;
    Ok(-k.apply(alloc.liquidity()))
}

/// Shortfall `C − ν` against a caller-chosen counterfactual value `C`.
pub fn divergence_loss(
    alloc: &Allocation,
    summary: &BeliefSummary,
    counterfactual: f64,
) -> Result<f64> {
    Ok(counterfactual - reserve_value(alloc, summary)?)
}

/// Where the LVR accrues, normalized to unit total weight.
#[derive(Debug, Clone, PartialEq)]
pub enum LvrWeight {
    PointMass(f64),
    /// Density over `p` on the allocation grid; normalized on use.
    Density(Vec<f64>),
}

/// `∫ weight(p)·σ²(p)·L(p) dp`, up to the usual constant factor.
pub fn lvr_rate(alloc: &Allocation, weight: &LvrWeight, sigma2: &[f64]) -> Result<f64> {
    let grid = alloc.grid();
    check_len(grid, sigma2)?;
    if sigma2.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::InvalidParams(
            "variance profile must be nonnegative".into(),
        ));
    }
    match weight {
        LvrWeight::PointMass(p) => {
            let s2 = grid.interpolate(sigma2, *p).unwrap_or(0.0);
            Ok(s2 * alloc.liquidity_at(*p))
        }
        LvrWeight::Density(d) => {
            let norm = density_norm(grid, d)?;
            let g: Vec<f64> = d
                .iter()
                .zip(sigma2)
                .zip(alloc.liquidity())
                .zip(grid.points())
                .map(|(((d, s), l), p)| d * s * l * p)
                .collect();
            Ok(integrate_closed(grid, &g) / norm)
        }
    }
}

fn density_norm(grid: &PriceGrid, d: &[f64]) -> Result<f64> {
    check_len(grid, d)?;
    let per_log: Vec<f64> = d.iter().zip(grid.points()).map(|(d, p)| d * p).collect();
    let norm = integrate_closed(grid, &per_log);
    if !(norm > 0.0) || d.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidParams(
            "LVR weight must be nonnegative with positive mass".into(),
        ));
    }
    Ok(norm)
}

impl LvrWeight {
    /// The LVR as a per-liquidity cost `c·weight·σ²` for the optimizer.
    pub fn linear_term(&self, grid: &PriceGrid, sigma2: &[f64], c: f64) -> Result<LinearTerm> {
        check_len(grid, sigma2)?;
        let cost = match self {
            LvrWeight::Density(d) => {
                let norm = density_norm(grid, d)?;
                d.iter()
                    .zip(sigma2)
                    .map(|(d, s)| c * d * s / norm)
                    .collect()
            }
            LvrWeight::PointMass(_) => {
                return Err(Error::InvalidParams(
                    "a point mass has no density on the grid".into(),
                ))
            }
        };
        LinearTerm::per_liquidity_cost(grid, cost)
    }
}

/// Fee revenue minus `∫ loss·L dp`.
pub fn net_profit(
    alloc: &Allocation,
    summary: &BeliefSummary,
    fees: &FeeParams,
    loss: &LinearTerm,
) -> Result<f64> {
    if loss.grid() != alloc.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(fee_revenue(alloc, summary, fees)? - loss.apply(alloc.liquidity()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::{compile_ratio, RatioDensity};
    use crate::optimizer::{solve_cop, MarketParams};

    fn setup() -> (BeliefSummary, Allocation) {
        let grid = PriceGrid::standard();
        let s = compile_ratio(&RatioDensity::Uniform, 1.0, 1.0, &grid).unwrap();
        let a = solve_cop(&s, &MarketParams::new(1.0, 1.0, 2.0).unwrap()).unwrap();
        (s, a)
    }

    #[test]
    fn uniform_inefficiency_is_eight() {
        let (s, a) = setup();
        let v = inefficiency(&a, &s).unwrap();
        assert!((v - 8.0).abs() < 1e-2, "{v}");
        let half = inefficiency(&a.scaled(2.0), &s).unwrap();
        assert!((half - v / 2.0).abs() < 1e-12 * v);
        let spec = BeliefSpec::UniformRect { px: 1.0, py: 1.0 };
        let d = inefficiency_direct(&a, &spec, 64).unwrap();
        assert!((d - v).abs() < 1e-3 * v, "{d} vs {v}");
    }

    #[test]
    fn missing_liquidity_is_infinitely_inefficient() {
        let (s, a) = setup();
        let mut l = a.liquidity().to_vec();
        l[1000] = 0.0;
        let b = Allocation::new(a.grid(), l, 1.0).unwrap();
        assert_eq!(inefficiency(&b, &s).unwrap(), f64::INFINITY);
    }

    #[test]
    fn fee_examples() {
        let (s, a) = setup();
        let f = FeeParams::new(0.003, 0.01).unwrap();
        assert!((fee_revenue(&a, &s, &f).unwrap() - 0.00276).abs() < 1e-4);
        let none = FeeParams::new(0.0, 0.01).unwrap();
        assert_eq!(fee_revenue(&a, &s, &none).unwrap(), 0.0);
        let tiny = FeeParams::new(0.003, 1e-12).unwrap();
        assert!((fee_revenue(&a, &s, &tiny).unwrap() - 0.003).abs() < 1e-12);
    }

    #[test]
    fn kappa_of_the_unit_square() {
        let (s, _) = setup();
        let k = kappa(&s).unwrap();
        let grid = s.grid();
        let i = grid.nearest(1.0);
        assert!((k.coefficients()[i] - 1.0 / 3.0).abs() < 1e-3);
        let j = grid.nearest(0.5);
        let p = grid.points()[j];
        assert!((k.coefficients()[j] - (1.0 / (2.0 * p) - 1.0 / 6.0)).abs() < 1e-3);
        let scaled: Vec<f64> = k
            .coefficients()
            .iter()
            .zip(grid.points())
            .map(|(k, p)| k * p * p)
            .collect();
        assert!(scaled.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn reserve_value_is_linear() {
        let (s, a) = setup();
        let v = reserve_value(&a, &s).unwrap();
        assert!((v - 8.0 / 9.0).abs() < 1e-2 * v, "{v}");
        let v3 = reserve_value(&a.scaled(3.0), &s).unwrap();
        assert!((v3 - 3.0 * v).abs() < 1e-12 * v3);
        assert!(divergence_loss(&a, &s, v).unwrap().abs() < 1e-15);
        let zero = Allocation::new(a.grid(), alloc::vec![0.0; a.grid().len()], 1.0).unwrap();
        assert_eq!(reserve_value(&zero, &s).unwrap(), 0.0);
    }

    #[test]
    fn lvr_examples() {
        let (_, a) = setup();
        let grid = a.grid().clone();
        let ones = alloc::vec![1.0; grid.len()];
        let at_one = lvr_rate(&a, &LvrWeight::PointMass(1.0), &ones).unwrap();
        assert!((at_one - 0.5).abs() < 1e-3);
        let d = LvrWeight::Density(
            grid.points()
                .iter()
                .map(|p| (-(p.ln()).powi(2)).exp() / p)
                .collect(),
        );
        let v = lvr_rate(&a, &d, &ones).unwrap();
        let v2 = lvr_rate(&a.scaled(2.0), &d, &ones).unwrap();
        assert!((v2 - 2.0 * v).abs() < 1e-12 * v2);
    }

    #[test]
    fn net_profit_components() {
        let (s, a) = setup();
        let f = FeeParams::new(0.003, 0.01).unwrap();
        let zero = LinearTerm::zero(a.grid());
        assert_eq!(
            net_profit(&a, &s, &f, &zero).unwrap(),
            fee_revenue(&a, &s, &f).unwrap()
        );
        let cost = LinearTerm::uniform_cost(a.grid(), 1e-6).unwrap();
        let none = FeeParams::new(0.0, 0.01).unwrap();
        assert!(net_profit(&a, &s, &none, &cost).unwrap() <= 0.0);
    }
}
