use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::numerics::{MonotoneCubic, PriceGrid};
use crate::{Error, Result};

/// Shape of a trading curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveFamily {
    /// Reserves interpolated from grid samples.
    Tabulated,
    /// `x·y = K`.
    ConstantProduct,
    /// `x^α·y = K`.
    WeightedProduct { alpha: f64 },
    /// `2 − e^{−x} − e^{−y} = 2 − K`, with `K ∈ (0, 1]`.
    Lmsr,
    /// Constant product restricted to `[p_lo, p_hi]`.
    Concentrated { p_lo: f64, p_hi: f64 },
}

impl CurveFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Tabulated => "tabulated",
            Self::ConstantProduct => "constant-product",
            Self::WeightedProduct { .. } => "weighted-product",
            Self::Lmsr => "lmsr",
            Self::Concentrated { .. } => "concentrated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Table {
    y: MonotoneCubic,
    x: MonotoneCubic,
}

/// Reserve functions `Y(p)` (nondecreasing) and `X(p)` (nonincreasing).
#[derive(Debug, Clone, PartialEq)]
pub struct TradingCurve {
    grid: PriceGrid,
    family: CurveFamily,
    level: f64,
    p0: f64,
    y: Vec<f64>,
    x: Vec<f64>,
    table: Option<Table>,
}

impl TradingCurve {
    /// Closed-form curve of `family` with level constant `level`, initially
    /// at spot `p0`.
    pub fn closed_form(family: CurveFamily, level: f64, p0: f64, grid: &PriceGrid) -> Result<Self> {
        if !(level > 0.0 && level.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "level constant must be positive, got {level}"
            )));
        }
        if !(p0 > 0.0 && p0.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "spot must be positive, got {p0}"
            )));
        }
        match family {
            CurveFamily::Tabulated => {
                return Err(Error::InvalidParams(
                    "tabulated curves are built from samples".into(),
                ))
            }
            CurveFamily::WeightedProduct { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                return Err(Error::InvalidParams(format!(
                    "alpha must be positive, got {alpha}"
                )))
            }
            CurveFamily::Lmsr if level > 1.0 => {
                return Err(Error::InvalidParams(format!(
                    "lmsr level must lie in (0, 1], got {level}"
                )))
            }
            CurveFamily::Concentrated { p_lo, p_hi }
                if !(p_lo > 0.0 && p_hi > p_lo && p_hi.is_finite()) =>
            {
                return Err(Error::InvalidParams(format!(
                    "concentrated range needs 0 < p_lo < p_hi, got [{p_lo}, {p_hi}]"
                )))
            }
            _ => {}
        }
        let mut curve = Self {
            grid: grid.clone(),
            family,
            level,
            p0,
            y: Vec::new(),
            x: Vec::new(),
            table: None,
        };
        curve.y = grid.points().iter().map(|&p| curve.y_of(p)).collect();
        curve.x = grid.points().iter().map(|&p| curve.x_of(p)).collect();
        Ok(curve)
    }

    /// Curve interpolating reserve samples monotone-cubically in `ln p`.
    pub fn tabulated(grid: &PriceGrid, y: Vec<f64>, x: Vec<f64>, p0: f64) -> Result<Self> {
        let logs = grid.log_points().to_vec();
        let table = Table {
            y: MonotoneCubic::new(logs.clone(), y.clone())?,
            x: MonotoneCubic::new(logs, x.clone())?,
        };
        if y.windows(2).any(|w| w[1] < w[0]) || x.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParams(
                "Y(p) must be nondecreasing and X(p) nonincreasing".into(),
            ));
        }
        Ok(Self {
            grid: grid.clone(),
            family: CurveFamily::Tabulated,
            level: f64::NAN,
            p0,
            y,
            x,
            table: Some(table),
        })
    }

    pub fn grid(&self) -> &PriceGrid {
        &self.grid
    }

    pub fn family(&self) -> CurveFamily {
        self.family
    }

    /// Level constant `K` of a closed-form family; NaN when tabulated.
    pub fn level(&self) -> f64 {
        self.level
    }

    /// Initial spot rate.
    pub fn p0(&self) -> f64 {
        self.p0
    }

    /// `Y(p)` sampled on the grid.
    pub fn y_samples(&self) -> &[f64] {
        &self.y
    }

    /// `X(p)` sampled on the grid.
    pub fn x_samples(&self) -> &[f64] {
        &self.x
    }

    pub fn y_of(&self, p: f64) -> f64 {
        let k = self.level;
        match self.family {
            CurveFamily::Tabulated => self.table().y.eval(p.ln()),
            CurveFamily::ConstantProduct => (p * k).sqrt(),
            CurveFamily::WeightedProduct { alpha } => {
                let e = alpha / (alpha + 1.0);
                p.powf(e) * (k / alpha.powf(alpha)).powf(1.0 / (alpha + 1.0))
            }
            CurveFamily::Lmsr => ((1.0 + p) / k).ln(),
            CurveFamily::Concentrated { p_lo, p_hi } => {
                let q = p.clamp(p_lo, p_hi);
                k.sqrt() * (q.sqrt() - p_lo.sqrt())
            }
        }
    }

    pub fn x_of(&self, p: f64) -> f64 {
        let k = self.level;
        match self.family {
            CurveFamily::Tabulated => self.table().x.eval(p.ln()),
            CurveFamily::ConstantProduct => (k / p).sqrt(),
            CurveFamily::WeightedProduct { alpha } => alpha * self.y_of(p) / p,
            CurveFamily::Lmsr => ((1.0 + p) / (p * k)).ln(),
            CurveFamily::Concentrated { p_lo, p_hi } => {
                let q = p.clamp(p_lo, p_hi);
                k.sqrt() * (1.0 / q.sqrt() - 1.0 / p_hi.sqrt())
            }
        }
    }

    /// Analytic `L(p) = dY/d ln p`; `None` for tabulated curves.
    pub fn analytic_liquidity(&self, p: f64) -> Option<f64> {
        let k = self.level;
        Some(match self.family {
            CurveFamily::Tabulated => return None,
            CurveFamily::ConstantProduct => 0.5 * (p * k).sqrt(),
            CurveFamily::WeightedProduct { alpha } => alpha / (alpha + 1.0) * self.y_of(p),
            CurveFamily::Lmsr => p / (1.0 + p),
            CurveFamily::Concentrated { p_lo, p_hi } => {
                if p > p_lo && p < p_hi {
                    0.5 * (p * k).sqrt()
                } else {
                    0.0
                }
            }
        })
    }

    /// Range of `Y` reachable along the curve.
    pub fn y_range(&self) -> (f64, f64) {
        let k = self.level;
        match self.family {
            CurveFamily::Tabulated => (self.y[0], self.y[self.y.len() - 1]),
            CurveFamily::ConstantProduct | CurveFamily::WeightedProduct { .. } => {
                (0.0, f64::INFINITY)
            }
            CurveFamily::Lmsr => ((1.0 / k).ln(), f64::INFINITY),
            CurveFamily::Concentrated { p_hi, .. } => (0.0, self.y_of(p_hi)),
        }
    }

    /// Spot rate at reserves `y` (smallest one where the rate is an interval).
    pub fn spot_at(&self, y: f64) -> Result<f64> {
        let (lo, hi) = self.y_range();
        let open_low = !matches!(
            self.family,
            CurveFamily::Tabulated | CurveFamily::Concentrated { .. }
        );
        if y.is_nan() || y > hi || y < lo || (open_low && y <= lo) {
            return Err(Error::InsufficientReserves(format!(
                "Y reserve {y} outside the curve's range [{lo}, {hi}]"
            )));
        }
        let k = self.level;
        Ok(match self.family {
            CurveFamily::Tabulated => self
                .table()
                .y
                .inverse(y)
                .map(f64::exp)
                .expect("y checked against the tabulated range"),
            CurveFamily::ConstantProduct => y * y / k,
            CurveFamily::WeightedProduct { alpha } => {
                let scale = (k / alpha.powf(alpha)).powf(1.0 / (alpha + 1.0));
                (y / scale).powf((alpha + 1.0) / alpha)
            }
            CurveFamily::Lmsr => k * y.exp() - 1.0,
            CurveFamily::Concentrated { p_lo, .. } => (y / k.sqrt() + p_lo.sqrt()).powi(2),
        })
    }

    fn table(&self) -> &Table {
        self.table
            .as_ref()
            .expect("tabulated curve carries its interpolants")
    }
}

/// Closed-form reference curve of `family` with level `level`, at spot `p0`.
pub fn reference_curve(
    family: CurveFamily,
    level: f64,
    p0: f64,
    grid: &PriceGrid,
) -> Result<TradingCurve> {
    TradingCurve::closed_form(family, level, p0, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PriceGrid {
        PriceGrid::log_spaced(1e-3, 1e3, 401).unwrap()
    }

    #[test]
    fn constant_product_spot_is_y_over_x() {
        let c = reference_curve(CurveFamily::ConstantProduct, 1.0, 1.0, &grid()).unwrap();
        assert_eq!(c.y_of(1.0), 1.0);
        assert_eq!(c.x_of(1.0), 1.0);
        assert_eq!(c.spot_at(1.0).unwrap(), 1.0);
        let p = 3.7;
        assert!((c.y_of(p) / c.x_of(p) - p).abs() < 1e-12);
    }

    #[test]
    fn weighted_product_keeps_its_invariant() {
        let alpha = 4.0;
        let c = reference_curve(CurveFamily::WeightedProduct { alpha }, 5.0, 1.0, &grid()).unwrap();
        for p in [0.01, 0.5, 2.0, 90.0] {
            let (x, y) = (c.x_of(p), c.y_of(p));
            assert!((x.powf(alpha) * y - 5.0).abs() < 1e-10 * 5.0);
            assert!((alpha * y / x - p).abs() < 1e-12 * p);
            assert!((c.spot_at(y).unwrap() - p).abs() < 1e-10 * p);
        }
    }

    #[test]
    fn lmsr_values() {
        let c = reference_curve(CurveFamily::Lmsr, 1.0, 1.0, &grid()).unwrap();
        assert!((c.y_of(1.0) - 2f64.ln()).abs() < 1e-15);
        let (x, y) = (c.x_of(2.5), c.y_of(2.5));
        assert!((2.0 - (-x).exp() - (-y).exp() - 1.0).abs() < 1e-12);
        assert!(reference_curve(CurveFamily::Lmsr, 1.5, 1.0, &grid()).is_err());
    }

    #[test]
    fn concentrated_is_flat_outside_its_range() {
        let fam = CurveFamily::Concentrated {
            p_lo: 0.5,
            p_hi: 2.0,
        };
        let c = reference_curve(fam, 1.0, 1.0, &grid()).unwrap();
        assert_eq!(c.y_of(0.1), 0.0);
        assert_eq!(c.x_of(5.0), 0.0);
        assert_eq!(c.analytic_liquidity(0.5), Some(0.0));
        assert_eq!(c.analytic_liquidity(3.0), Some(0.0));
        assert!((c.analytic_liquidity(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(c.spot_at(-0.1).is_err());
        assert!((c.spot_at(0.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters() {
        let g = grid();
        assert!(
            reference_curve(CurveFamily::WeightedProduct { alpha: 0.0 }, 1.0, 1.0, &g).is_err()
        );
        let bad = CurveFamily::Concentrated {
            p_lo: 2.0,
            p_hi: 1.0,
        };
        assert!(reference_curve(bad, 1.0, 1.0, &g).is_err());
        assert!(reference_curve(CurveFamily::ConstantProduct, -1.0, 1.0, &g).is_err());
    }
}
