use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::PriceGrid;
use crate::{Error, Result};

/// Weight multiplying the sampled values inside `∫ values(p)·weight(p) dp`.
#[derive(Debug, Clone, Copy)]
pub enum Weight<'a> {
    One,
    InvP,
    InvP2,
    Custom(&'a [f64]),
}

/// Trapezoid rule in `ln p` over the grid: `∫ f(p)·weight(p) dp` truncated to
/// `[p_min, p_max]`.
pub fn integrate_log(grid: &PriceGrid, values: &[f64], weight: Weight<'_>) -> Result<f64> {
    check_len(grid, values)?;
    if let Weight::Custom(w) = weight {
        check_len(grid, w)?;
    }
    let g: Vec<f64> = grid
        .points()
        .iter()
        .zip(values)
        .enumerate()
        .map(|(i, (&p, &f))| match weight {
            Weight::One => f * p,
            Weight::InvP => f,
            Weight::InvP2 => f / p,
            Weight::Custom(w) => f * w[i] * p,
        })
        .collect();
    Ok(trapezoid_log(grid, &g))
}

pub(crate) fn check_len(grid: &PriceGrid, values: &[f64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            found: values.len(),
        });
    }
    Ok(())
}

/// `∫ g d(ln p)` over the grid, where `g` already carries the `p` Jacobian.
pub fn trapezoid_log(grid: &PriceGrid, g: &[f64]) -> f64 {
    let inner: f64 = g[1..g.len() - 1].iter().sum();
    grid.log_step() * (inner + 0.5 * (g[0] + g[g.len() - 1]))
}

/// Running trapezoid integral of `g d(ln p)` from `p_min` to each grid point.
pub fn cumulative_log(grid: &PriceGrid, g: &[f64]) -> Vec<f64> {
    let h = grid.log_step();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(g.len());
    out.push(0.0);
    for w in g.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// `∫_{p_min}^{p} g d(ln p)` with the integrand interpolated linearly in `ln p`
/// inside the cell holding `p`. `p` is clamped to the grid.
pub fn integral_to(grid: &PriceGrid, g: &[f64], p: f64) -> f64 {
    let h = grid.log_step();
    let (i, t) = match grid.locate(p) {
        Some(cell) => cell,
        None if p < grid.p_min() => return 0.0,
        None => (grid.len() - 2, 1.0),
    };
    let head: f64 = (0..i).map(|j| 0.5 * h * (g[j] + g[j + 1])).sum();
    let g_at = g[i] + t * (g[i + 1] - g[i]);
    head + 0.5 * t * h * (g[i] + g_at)
}

/// Power-law estimate of `∫_0^{p_min} g d(ln p)` from the two lowest samples.
/// Zero when either sample vanishes or the fitted tail is not integrable.
pub fn tail_below(grid: &PriceGrid, g: &[f64]) -> f64 {
    power_tail(g[0], g[1], grid.log_step())
}

/// Power-law estimate of `∫_{p_max}^∞ g d(ln p)` from the two highest samples.
pub fn tail_above(grid: &PriceGrid, g: &[f64]) -> f64 {
    let n = g.len();
    power_tail(g[n - 1], g[n - 2], grid.log_step())
}

// g decays like exp(-a·|s - s_edge|) away from the edge sample `edge`.
fn power_tail(edge: f64, inner: f64, h: f64) -> f64 {
    // same-signed samples only; a sign change means no clean power law
    if !(edge * inner > 0.0) {
        return 0.0;
    }
    let decay = (inner / edge).ln() / h;
    if decay > 1e-9 {
        edge / decay
    } else {
        0.0
    }
}

/// Trapezoid over the grid plus power-law tail closures on both sides: an
/// estimate of `∫_0^∞ g d(ln p)`.
pub fn integrate_closed(grid: &PriceGrid, g: &[f64]) -> f64 {
    tail_below(grid, g) + trapezoid_log(grid, g) + tail_above(grid, g)
}

/// `(∫_0^{p} g, ∫_p^∞ g)` in `d(ln p)`, each including its tail closure.
pub fn split_at(grid: &PriceGrid, g: &[f64], p: f64) -> (f64, f64) {
    let left = integral_to(grid, g, p);
    let total = trapezoid_log(grid, g);
    (
        tail_below(grid, g) + left,
        (total - left).max(0.0) + tail_above(grid, g),
    )
}
