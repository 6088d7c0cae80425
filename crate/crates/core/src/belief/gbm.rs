use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::numerics::GaussLegendre;
use crate::{Error, Result};

/// Independent geometric Brownian motions for the numeraire prices of X and
/// Y, discounted at rate `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams {
    pub px: f64,
    pub py: f64,
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub gamma: f64,
}

impl GbmParams {
    /// Equal volatility, zero log-drift, both prices starting at 1.
    pub fn symmetric(sigma: f64, gamma: f64) -> Self {
        Self {
            px: 1.0,
            py: 1.0,
            mu_x: 0.5 * sigma * sigma,
            mu_y: 0.5 * sigma * sigma,
            sigma_x: sigma,
            sigma_y: sigma,
            gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.px,
            self.py,
            self.mu_x,
            self.mu_y,
            self.sigma_x,
            self.sigma_y,
            self.gamma,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("gbm parameters must be finite".into()));
        }
        if !(self.px > 0.0 && self.py > 0.0) {
            return Err(Error::InvalidParams(format!(
                "initial prices must be positive, got ({}, {})",
                self.px, self.py
            )));
        }
        if !(self.sigma_x > 0.0 && self.sigma_y > 0.0 && self.gamma > 0.0) {
            return Err(Error::InvalidParams(
                "sigma_x, sigma_y and gamma must be positive".into(),
            ));
        }
        Ok(())
    }

    // log-means at time t
    fn log_means(&self, t: f64) -> (f64, f64) {
        (
            self.px.ln() + (self.mu_x - 0.5 * self.sigma_x * self.sigma_x) * t,
            self.py.ln() + (self.mu_y - 0.5 * self.sigma_y * self.sigma_y) * t,
        )
    }

    /// Discounting horizon where `e^{-γT}` reaches `1e-6`.
    pub fn horizon(&self) -> f64 {
        1e6f64.ln() / self.gamma
    }
}

/// Joint density of `(p_X, p_Y)` at time `t`: a product of two lognormals.
pub fn gbm_snapshot_density(params: &GbmParams, t: f64, p_x: f64, p_y: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    if !(p_x > 0.0 && p_y > 0.0) {
        return Ok(0.0);
    }
    let (a, b) = params.log_means(t);
    let vx = params.sigma_x * params.sigma_x * t;
    let vy = params.sigma_y * params.sigma_y * t;
    let ex = (p_x.ln() - a).powi(2) / (2.0 * vx);
    let ey = (p_y.ln() - b).powi(2) / (2.0 * vy);
    Ok((-ex - ey).exp() / (p_x * p_y * 2.0 * PI * (vx * vy).sqrt()))
}

/// Time nodes and trapezoid-in-`ln t` weights (with discounting folded in).
#[derive(Debug, Clone)]
pub(crate) struct GbmKernel {
    params: GbmParams,
    nodes: Vec<(f64, f64)>,
}

impl GbmKernel {
    pub(crate) fn new(params: &GbmParams, t_steps: usize) -> Result<Self> {
        params.validate()?;
        if t_steps < 2 {
            return Err(Error::InvalidParams("need at least two time steps".into()));
        }
        let lo = (1e-4 / params.gamma).ln();
        let hi = params.horizon().ln();
        let h = (hi - lo) / (t_steps - 1) as f64;
        let nodes = (0..t_steps)
            .map(|i| {
                let t = (lo + h * i as f64).exp();
                let edge = if i == 0 || i == t_steps - 1 { 0.5 } else { 1.0 };
                (t, edge * h * t * (-params.gamma * t).exp())
            })
            .collect();
        Ok(Self {
            params: *params,
            nodes,
        })
    }

    pub(crate) fn psi(&self, p_x: f64, p_y: f64) -> f64 {
        self.nodes
            .iter()
            .map(|&(t, wt)| wt * gbm_snapshot_density(&self.params, t, p_x, p_y).unwrap_or(0.0))
            .sum()
    }

    /// Radial moments `∫ ψ(r c, r s) r^k dr` for k = 0, 1, 2 along the ray
    /// with direction `(c, s)`. Each time slice is a Gaussian in `u = ln r`,
    /// so the quadrature window is centred per slice.
    pub(crate) fn ray_moments(&self, c: f64, s: f64, gl: &GaussLegendre) -> [f64; 3] {
        let (lc, ls) = (c.ln(), s.ln());
        let mut out = [0.0; 3];
        for &(t, wt) in &self.nodes {
            let (a, b) = self.params.log_means(t);
            let vx = self.params.sigma_x.powi(2) * t;
            let vy = self.params.sigma_y.powi(2) * t;
            // residual exponent at the ray's peak; below this nothing survives
            let d = (a - lc) - (b - ls);
            if d * d / (2.0 * (vx + vy)) > 700.0 {
                continue;
            }
            let prec = 1.0 / vx + 1.0 / vy;
            let var = 1.0 / prec;
            let centre = ((a - lc) / vx + (b - ls) / vy) * var;
            let half = 12.0 * var.sqrt() + var;
            let norm = wt / (c * s * 2.0 * PI * (vx * vy).sqrt());
            for (u, wu) in gl.nodes_on(centre - half, centre + half) {
                let e = -(u + lc - a).powi(2) / (2.0 * vx) - (u + ls - b).powi(2) / (2.0 * vy);
                // ρ·r^{k+1} with ρ carrying 1/r²
                let base = norm * wu * (e - u).exp();
                let r = u.exp();
                out[0] += base;
                out[1] += base * r;
                out[2] += base * r * r;
            }
        }
        out
    }
}
