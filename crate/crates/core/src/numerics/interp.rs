use alloc::vec::Vec;

use crate::{Error, Result};

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch–Carlson
/// slopes). Monotone data yield a monotone interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                expected: xs.len(),
                found: ys.len(),
            });
        }
        if xs.len() < 2 || xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParams(
                "interpolation abscissae must be strictly increasing".into(),
            ));
        }
        let slopes = pchip_slopes(&xs, &ys);
        Ok(Self { xs, ys, slopes })
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    fn cell(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Value at `x`, held constant beyond the end points.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.cell(x);
        self.hermite(i, x)
    }

    fn hermite(&self, i: usize, x: f64) -> f64 {
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i]
            + h10 * h * self.slopes[i]
            + h01 * self.ys[i + 1]
            + h11 * h * self.slopes[i + 1]
    }

    /// Smallest `x` in range with `eval(x) == y` for monotone data, found by
    /// bisection inside the bracketing cell. `None` if `y` is out of range.
    pub fn inverse(&self, y: f64) -> Option<f64> {
        let n = self.ys.len();
        let increasing = self.ys[n - 1] >= self.ys[0];
        let key = |v: f64| if increasing { v } else { -v };
        let target = key(y);
        if target < key(self.ys[0]) || target > key(self.ys[n - 1]) || y.is_nan() {
            return None;
        }
        // first node whose value reaches the target
        let j = self.ys.partition_point(|&v| key(v) < target);
        if j == 0 {
            return Some(self.xs[0]);
        }
        let i = j - 1;
        let (mut a, mut b) = (self.xs[i], self.xs[i + 1]);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if key(self.hermite(i, mid)) < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        Some(0.5 * (a + b))
    }
}

fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
    if n == 2 {
        return alloc::vec![delta[0], delta[0]];
    }
    let mut d = alloc::vec![0.0; n];
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a == 0.0 || b == 0.0 || (a > 0.0) != (b > 0.0) {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s > 0.0) != (d0 > 0.0) || d0 == 0.0 {
        0.0
    } else if (d0 > 0.0) != (d1 > 0.0) && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn reproduces_nodes_and_stays_monotone() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        // a step-like monotone profile that breaks naive cubic splines
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| if x < 4.0 { 0.0 } else { 1.0 + x * 0.01 })
            .collect();
        let c = MonotoneCubic::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((c.eval(*x) - y).abs() < 1e-14);
        }
        let mut prev = f64::NEG_INFINITY;
        for k in 0..2000 {
            let v = c.eval(k as f64 * 0.005);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn inverse_round_trips() {
        let xs: Vec<f64> = (0..50).map(|i| -3.0 + i as f64 * 0.12).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| (0.5 * x).exp()).collect();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        for k in 1..40 {
            let x = -2.9 + k as f64 * 0.13;
            let y = c.eval(x);
            let back = c.inverse(y).unwrap();
            assert!((back - x).abs() < 1e-10, "{x} -> {back}");
        }
        assert!(c.inverse(1e-9).is_none());
        // decreasing data
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 10.0 - x).collect();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        assert!((c.inverse(3.5).unwrap() - 6.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_abscissae() {
        assert!(MonotoneCubic::new(alloc::vec![0.0, 0.0], alloc::vec![1.0, 2.0]).is_err());
        assert!(MonotoneCubic::new(alloc::vec![0.0, 1.0], alloc::vec![1.0]).is_err());
    }
}
