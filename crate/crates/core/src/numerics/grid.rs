use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Log-uniformly spaced exchange rates (units: Y per X).
#[derive(Debug, Clone, PartialEq)]
pub struct PriceGrid {
    points: Vec<f64>,
    log_points: Vec<f64>,
    log_step: f64,
}

impl PriceGrid {
    pub const MIN_POINTS: usize = 16;

    /// `n` points with `points[0] == p_min` and `points[n - 1] == p_max`.
    pub fn log_spaced(p_min: f64, p_max: f64, n: usize) -> Result<Self> {
        Self::build(p_min, p_max, n, Self::MIN_POINTS)
    }

    /// The working grid used throughout: `[1e-4, 1e4]` with 2001 points.
    pub fn standard() -> Self {
        Self::log_spaced(1e-4, 1e4, 2001).expect("standard grid bounds are valid")
    }

    pub(crate) fn build(p_min: f64, p_max: f64, n: usize, min_points: usize) -> Result<Self> {
        if !(p_min.is_finite() && p_max.is_finite()) || p_min <= 0.0 || p_max <= p_min {
            return Err(Error::InvalidBounds(format!(
                "need 0 < p_min < p_max, got p_min = {p_min}, p_max = {p_max}"
            )));
        }
        if n < min_points.max(2) {
            return Err(Error::InvalidBounds(format!(
                "need at least {} points, got {n}",
                min_points.max(2)
            )));
        }
        let lo = p_min.ln();
        let hi = p_max.ln();
        let log_step = (hi - lo) / (n - 1) as f64;
        let mut log_points: Vec<f64> = (0..n).map(|i| lo + i as f64 * log_step).collect();
        log_points[n - 1] = hi;
        let mut points: Vec<f64> = log_points.iter().map(|s| s.exp()).collect();
        points[0] = p_min;
        points[n - 1] = p_max;
        Ok(Self {
            points,
            log_points,
            log_step,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn log_points(&self) -> &[f64] {
        &self.log_points
    }

    pub fn log_step(&self) -> f64 {
        self.log_step
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn p_min(&self) -> f64 {
        self.points[0]
    }

    pub fn p_max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn contains(&self, p: f64) -> bool {
        p >= self.p_min() && p <= self.p_max()
    }

    /// Cell `i` and fractional position `t ∈ [0, 1]` (in `ln p`) such that
    /// `points[i] ≤ p ≤ points[i + 1]`. `None` outside the grid.
    pub fn locate(&self, p: f64) -> Option<(usize, f64)> {
        if !(p > 0.0) || !self.contains(p) {
            return None;
        }
        let n = self.points.len();
        let s = p.ln();
        let raw = (s - self.log_points[0]) / self.log_step;
        let mut i = (raw.floor().max(0.0) as usize).min(n - 2);
        // guard against rounding at cell borders
        while i > 0 && self.log_points[i] > s {
            i -= 1;
        }
        while i + 2 < n && self.log_points[i + 1] < s {
            i += 1;
        }
        let t = ((s - self.log_points[i]) / self.log_step).clamp(0.0, 1.0);
        Some((i, t))
    }

    /// Index of the grid point nearest to `p` in log distance.
    pub fn nearest(&self, p: f64) -> usize {
        match self.locate(p) {
            Some((i, t)) if t > 0.5 => i + 1,
            Some((i, _)) => i,
            None if p < self.p_min() => 0,
            None => self.points.len() - 1,
        }
    }

    /// Linear interpolation of grid samples in `ln p`; `None` outside the grid.
    pub fn interpolate(&self, values: &[f64], p: f64) -> Option<f64> {
        let (i, t) = self.locate(p)?;
        Some(values[i] + t * (values[i + 1] - values[i]))
    }
}

/// Builds a log-uniform grid; `n ≥ 16`.
pub fn make_log_grid(p_min: f64, p_max: f64, n: usize) -> Result<PriceGrid> {
    PriceGrid::log_spaced(p_min, p_max, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_interval_is_rejected() {
        assert!(matches!(
            make_log_grid(1.0, 1.0, 64),
            Err(Error::InvalidBounds(_))
        ));
        assert!(make_log_grid(0.0, 1.0, 64).is_err());
        assert!(make_log_grid(2.0, 1.0, 64).is_err());
        assert!(make_log_grid(1.0, 2.0, 15).is_err());
    }

    #[test]
    fn three_point_grid_is_symmetric_around_one() {
        let g = PriceGrid::build(0.25, 4.0, 3, 3).unwrap();
        assert_eq!(g.points()[0], 0.25);
        assert!((g.points()[1] - 1.0).abs() < 1e-15);
        assert_eq!(g.points()[2], 4.0);
    }

    #[test]
    fn midpoint_of_symmetric_grid_is_one() {
        let g = make_log_grid(1e-3, 1e3, 601).unwrap();
        assert!((g.points()[300] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_spacing_is_uniform() {
        let g = PriceGrid::standard();
        let h = g.log_step();
        for w in g.points().windows(2) {
            assert!(w[1] > w[0]);
            let d = w[1].ln() - w[0].ln();
            assert!(((d - h) / h).abs() < 1e-9);
        }
        for w in g.log_points().windows(2) {
            assert!(((w[1] - w[0] - h) / h).abs() < 1e-12);
        }
    }

    #[test]
    fn locate_finds_enclosing_cell() {
        let g = make_log_grid(0.5, 8.0, 17).unwrap();
        for (i, &p) in g.points().iter().enumerate() {
            let (j, t) = g.locate(p).unwrap();
            let back = g.log_points()[j] + t * g.log_step();
            assert!((back - p.ln()).abs() < 1e-12, "point {i}");
        }
        assert!(g.locate(0.49).is_none());
        assert!(g.locate(8.01).is_none());
        assert_eq!(g.nearest(1e-9), 0);
        assert_eq!(g.nearest(1e9), 16);
    }
}
