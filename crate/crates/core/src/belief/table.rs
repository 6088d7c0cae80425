use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Tabulated 1-D density over exchange rates, linear in `ln p` and zero
/// outside the tabulated range.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTable {
    p: Vec<f64>,
    log_p: Vec<f64>,
    h: Vec<f64>,
}

impl RatioTable {
    pub fn new(p: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if p.len() != h.len() {
            return Err(Error::LengthMismatch {
                expected: p.len(),
                found: h.len(),
            });
        }
        if p.len() < 2 {
            return Err(Error::InvalidParams(
                "ratio table needs at least two rows".into(),
            ));
        }
        if p.iter().any(|&v| !(v > 0.0 && v.is_finite())) || p.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParams(
                "ratio table rates must be positive and strictly increasing".into(),
            ));
        }
        if h.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidParams(
                "ratio table densities must be finite and >= 0".into(),
            ));
        }
        let log_p = p.iter().map(|v| v.ln()).collect();
        Ok(Self { p, log_p, h })
    }

    pub fn rates(&self) -> &[f64] {
        &self.p
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    pub fn eval(&self, q: f64) -> f64 {
        if !(q > 0.0) {
            return 0.0;
        }
        let n = self.log_p.len();
        let (first, last) = (self.log_p[0], self.log_p[n - 1]);
        // rates rebuilt from a ray direction carry a few ulps of error
        let slack = EDGE_SLACK * (last - first).abs().max(1.0);
        let u = q.ln();
        if u < first - slack || u > last + slack {
            return 0.0;
        }
        let u = u.clamp(first, last);
        match self.log_p.binary_search_by(|v| v.total_cmp(&u)) {
            Ok(i) => self.h[i],
            Err(i) => {
                let (a, b) = (self.log_p[i - 1], self.log_p[i]);
                let t = (u - a) / (b - a);
                self.h[i - 1] + t * (self.h[i] - self.h[i - 1])
            }
        }
    }
}

/// Samples of `ψ(p_X, p_Y)` on a tensor grid, bilinear in `(ln p_X, ln p_Y)`
/// and zero outside the hull.
#[derive(Debug, Clone, PartialEq)]
pub struct Table2d {
    px: Vec<f64>,
    py: Vec<f64>,
    log_px: Vec<f64>,
    log_py: Vec<f64>,
    // row-major: values[i * py.len() + j] = ψ(px[i], py[j])
    values: Vec<f64>,
}

impl Table2d {
    pub fn new(px: Vec<f64>, py: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        for axis in [&px, &py] {
            if axis.len() < 2
                || axis.iter().any(|&v| !(v > 0.0 && v.is_finite()))
                || axis.windows(2).any(|w| !(w[1] > w[0]))
            {
                return Err(Error::InvalidParams(
                    "table axes need two or more positive, strictly increasing rates".into(),
                ));
            }
        }
        if values.len() != px.len() * py.len() {
            return Err(Error::LengthMismatch {
                expected: px.len() * py.len(),
                found: values.len(),
            });
        }
        if values.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidParams(
                "table densities must be finite and >= 0".into(),
            ));
        }
        let log_px = px.iter().map(|v| v.ln()).collect();
        let log_py = py.iter().map(|v| v.ln()).collect();
        Ok(Self {
            px,
            py,
            log_px,
            log_py,
            values,
        })
    }

    /// Builds a table by sampling `f` on the tensor grid.
    pub fn sample<F: FnMut(f64, f64) -> f64>(px: Vec<f64>, py: Vec<f64>, mut f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(px.len() * py.len());
        for &x in &px {
            for &y in &py {
                values.push(f(x, y));
            }
        }
        Self::new(px, py, values)
    }

    pub fn px(&self) -> &[f64] {
        &self.px
    }

    pub fn py(&self) -> &[f64] {
        &self.py
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn hull(&self) -> ((f64, f64), (f64, f64)) {
        (
            (self.px[0], self.px[self.px.len() - 1]),
            (self.py[0], self.py[self.py.len() - 1]),
        )
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        if !(x > 0.0 && y > 0.0) {
            return 0.0;
        }
        let (Some((i, tx)), Some((j, ty))) =
            (cell(&self.log_px, x.ln()), cell(&self.log_py, y.ln()))
        else {
            return 0.0;
        };
        let ny = self.py.len();
        let v = |a: usize, b: usize| self.values[a * ny + b];
        let lo = v(i, j) + ty * (v(i, j + 1) - v(i, j));
        let hi = v(i + 1, j) + ty * (v(i + 1, j + 1) - v(i + 1, j));
        lo + tx * (hi - lo)
    }
}

/// Log-space tolerance at the table edges, relative to the table span.
const EDGE_SLACK: f64 = 1e-12;

fn cell(axis: &[f64], u: f64) -> Option<(usize, f64)> {
    let n = axis.len();
    let slack = EDGE_SLACK * (axis[n - 1] - axis[0]).abs().max(1.0);
    if u < axis[0] - slack || u > axis[n - 1] + slack {
        return None;
    }
    let u = u.clamp(axis[0], axis[n - 1]);
    let i = axis.partition_point(|&v| v <= u).clamp(1, n - 1) - 1;
    Some((i, ((u - axis[i]) / (axis[i + 1] - axis[i])).clamp(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn ratio_table_is_exact_at_nodes_and_zero_outside() {
        let t = RatioTable::new(vec![0.5, 1.0, 2.0], vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(t.eval(1.0), 3.0);
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(0.49), 0.0);
        assert_eq!(t.eval(2.01), 0.0);
        assert!((t.eval(2f64.sqrt()) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn bilinear_in_log_coordinates() {
        let t =
            Table2d::sample(vec![1.0, 4.0], vec![1.0, 4.0], |x, y| x.ln() + 2.0 * y.ln()).unwrap();
        let got = t.eval(2.0, 2.0);
        assert!((got - 3.0 * 2f64.ln()).abs() < 1e-12);
        assert_eq!(t.eval(0.5, 2.0), 0.0);
        assert_eq!(t.eval(4.0, 4.0), 4f64.ln() * 3.0);
    }

    #[test]
    fn rejects_negative_density() {
        assert!(Table2d::new(vec![1.0, 2.0], vec![1.0, 2.0], vec![0.0, 1.0, -1.0, 0.0]).is_err());
        assert!(RatioTable::new(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
    }
}
