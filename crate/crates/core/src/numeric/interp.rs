//! Shape-preserving piecewise-cubic Hermite interpolation (PCHIP).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Slope at node `k` for the segment to its right.
    d_right: Vec<f64>,
    /// Slope at node `k` for the segment to its left.
    d_left: Vec<f64>,
    kinks: Vec<f64>,
}

fn endpoint_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// PCHIP node slopes for one smooth piece.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let m: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![m[0], m[0]];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        let (m0, m1) = (m[k - 1], m[k]);
        if m0 == 0.0 || m1 == 0.0 || m0.signum() != m1.signum() {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / m0 + w2 / m1);
        }
    }
    d[0] = endpoint_slope(h[0], h[1], m[0], m[1]);
    d[n - 1] = endpoint_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
    d
}

impl MonotoneCubic {
    /// Build the interpolant. `x` must be strictly increasing with at least
    /// two points.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::with_kinks(x, y, &[])
    }

    /// As [`new`](Self::new), but the slope may jump at any node whose
    /// abscissa appears in `kinks`; each side uses one-sided slopes.
    pub fn with_kinks(x: Vec<f64>, y: Vec<f64>, kinks: &[f64]) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::InvalidParameter(
                "interpolation needs at least two (x, y) pairs of equal length".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "interpolation abscissae must be strictly increasing".into(),
            ));
        }
        let n = x.len();
        let mut cuts = vec![0];
        cuts.extend((1..n - 1).filter(|&k| kinks.contains(&x[k])));
        cuts.push(n - 1);

        let mut d_right = vec![0.0; n];
        let mut d_left = vec![0.0; n];
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let d = pchip_slopes(&x[a..=b], &y[a..=b]);
            d_right[a..b].copy_from_slice(&d[..b - a]);
            d_left[a + 1..=b].copy_from_slice(&d[1..]);
        }
        let kinks = cuts[1..cuts.len() - 1].iter().map(|&k| x[k]).collect();
        Ok(Self {
            x,
            y,
            d_right,
            d_left,
            kinks,
        })
    }

    /// Nodes at which the slope is allowed to jump.
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    pub fn xs(&self) -> &[f64] {
        &self.x
    }

    pub fn ys(&self) -> &[f64] {
        &self.y
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.clamp(1, n - 1) - 1,
        }
    }

    fn hermite(&self, k: usize, x: f64) -> (f64, f64) {
        let h = self.x[k + 1] - self.x[k];
        let s = (x - self.x[k]) / h;
        let (y0, y1, d0, d1) = (
            self.y[k],
            self.y[k + 1],
            self.d_right[k],
            self.d_left[k + 1],
        );
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * d1;
        let slope = (6.0 * s2 - 6.0 * s) / h * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * d0
            + (-6.0 * s2 + 6.0 * s) / h * y1
            + (3.0 * s2 - 2.0 * s) * d1;
        (value, slope)
    }

    /// Value at `x`, clamped to the end values outside the table.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x <= self.x[0] {
            return self.y[0];
        }
        if x >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let k = self.segment(x);
        self.hermite(k, x).0
    }

    /// First derivative at `x` (zero outside the table).
    pub fn derivative(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x < self.x[0] || x > self.x[n - 1] {
            return 0.0;
        }
        let k = self.segment(x);
        self.hermite(k, x).1
    }

    /// For nondecreasing data: the largest `x` with `eval(x) <= v`, clamped to
    /// the table range.
    pub fn inverse(&self, v: f64) -> f64 {
        let n = self.x.len();
        if v < self.y[0] {
            return self.x[0];
        }
        if v >= self.y[n - 1] {
            return self.x[n - 1];
        }
        // Last node whose value is <= v.
        let k = self
            .y
            .partition_point(|&y| y <= v)
            .saturating_sub(1)
            .min(n - 2);
        let (mut lo, mut hi) = (self.x[k], self.x[k + 1]);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.hermite(k, mid).0 <= v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_nodes_and_linear_data() {
        let x = vec![0.0, 0.1, 0.5, 0.7, 1.0];
        let y: Vec<f64> = x.iter().map(|t| 2.0 * t + 1.0).collect();
        let p = MonotoneCubic::new(x.clone(), y.clone()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((p.eval(*a) - b).abs() < 1e-15);
        }
        assert!((p.eval(0.33) - 1.66).abs() < 1e-14);
        assert!((p.derivative(0.33) - 2.0).abs() < 1e-12);
        assert!((p.inverse(1.66) - 0.33).abs() < 1e-12);
    }

    #[test]
    fn kinks_keep_each_side_exact() {
        let x: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let f = |t: f64| {
            if t <= 0.5 {
                10.0 * t
            } else {
                5.0 + 0.1 * (t - 0.5)
            }
        };
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let p = MonotoneCubic::with_kinks(x.clone(), y.clone(), &[0.5]).unwrap();
        assert_eq!(p.kinks(), &[0.5]);
        for t in [0.01, 0.26, 0.49, 0.51, 0.52, 0.77, 0.99] {
            assert!((p.eval(t) - f(t)).abs() < 1e-13, "{t}");
        }
        let smooth = MonotoneCubic::new(x, y).unwrap();
        assert!((smooth.eval(0.51) - f(0.51)).abs() > 1e-4);
    }

    #[test]
    fn rejects_unsorted_abscissae() {
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn preserves_monotonicity(steps in proptest::collection::vec(0.0f64..1.0, 3..30),
                                  probes in proptest::collection::vec(0.0f64..1.0, 50)) {
            let n = steps.len();
            let x: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let mut acc = 0.0;
            let y: Vec<f64> = steps.iter().map(|s| { acc += s * s * s; acc }).collect();
            let p = MonotoneCubic::new(x, y).unwrap();
            let mut sorted = probes.clone();
            sorted.sort_by(f64::total_cmp);
            for w in sorted.windows(2) {
                prop_assert!(p.eval(w[1]) >= p.eval(w[0]) - 1e-12);
            }
        }
    }
}
