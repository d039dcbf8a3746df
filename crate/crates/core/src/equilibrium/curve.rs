use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numeric::{fmt_sig17, MonotoneCubic};

/// A tabulated, strictly increasing equilibrium bid function.
///
/// Types below `threshold` do not bid (they abstain, modelled as a bid of 0).
/// Between nodes the curve is a monotone cubic.
#[derive(Debug, Clone, PartialEq)]
pub struct BidCurve {
    threshold: f64,
    win_probs: Vec<f64>,
    interp: MonotoneCubic,
}

/// One tabulated point of a [`BidCurve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveNode {
    pub t: f64,
    pub bid: f64,
    pub win_prob: f64,
}

impl BidCurve {
    pub fn new(
        types: Vec<f64>,
        bids: Vec<f64>,
        win_probs: Vec<f64>,
        threshold: f64,
    ) -> Result<Self> {
        Self::with_kinks(types, bids, win_probs, threshold, &[])
    }

    /// A curve whose slope jumps at the listed node types.
    pub fn with_kinks(
        types: Vec<f64>,
        bids: Vec<f64>,
        win_probs: Vec<f64>,
        threshold: f64,
        kinks: &[f64],
    ) -> Result<Self> {
        if win_probs.len() != types.len() {
            return Err(Error::InvalidParameter(
                "bid curve needs one win probability per node".into(),
            ));
        }
        if types.first().is_some_and(|&t0| t0 != threshold) {
            return Err(Error::InvalidParameter(
                "bid curve must start at its threshold type".into(),
            ));
        }
        if let Some(w) = bids.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(format!(
                "bids must be strictly increasing; violated after type {}",
                types[w]
            )));
        }
        Ok(Self {
            threshold,
            win_probs,
            interp: MonotoneCubic::with_kinks(types, bids, kinks)?,
        })
    }

    /// Lowest participating type.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn upper(&self) -> f64 {
        *self.interp.xs().last().expect("non-empty curve")
    }

    pub fn len(&self) -> usize {
        self.interp.xs().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nodes(&self) -> impl Iterator<Item = CurveNode> + '_ {
        self.interp
            .xs()
            .iter()
            .zip(self.interp.ys())
            .zip(&self.win_probs)
            .map(|((&t, &bid), &win_prob)| CurveNode { t, bid, win_prob })
    }

    pub fn min_bid(&self) -> f64 {
        self.interp.ys()[0]
    }

    pub fn max_bid(&self) -> f64 {
        *self.interp.ys().last().expect("non-empty curve")
    }

    /// Bid of type `t`; 0 for abstaining types below the threshold.
    pub fn bid_at(&self, t: f64) -> f64 {
        if t < self.threshold {
            0.0
        } else {
            self.interp.eval(t)
        }
    }

    /// Highest participating type whose bid does not exceed `b`, or `None`
    /// when `b` is below every participating bid.
    pub fn type_for_bid(&self, b: f64) -> Option<f64> {
        if b < self.min_bid() {
            None
        } else {
            Some(self.interp.inverse(b))
        }
    }

    /// The same curve with every bid raised by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        let types = self.interp.xs().to_vec();
        let bids = self.interp.ys().iter().map(|b| b + delta).collect();
        Self {
            threshold: self.threshold,
            win_probs: self.win_probs.clone(),
            interp: MonotoneCubic::with_kinks(types, bids, self.interp.kinks())
                .expect("shift keeps nodes valid"),
        }
    }

    /// CSV with header `type,bid,win_prob`, one row per node.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("type,bid,win_prob\n");
        for n in self.nodes() {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_sig17(n.t),
                fmt_sig17(n.bid),
                fmt_sig17(n.win_prob)
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> BidCurve {
        let t = vec![0.2, 0.4, 0.6, 0.8, 1.0];
        let b: Vec<f64> = t.iter().map(|x| 0.1 + x).collect();
        let q = t.clone();
        BidCurve::new(t, b, q, 0.2).unwrap()
    }

    #[test]
    fn abstains_below_threshold() {
        let c = sample();
        assert_eq!(c.bid_at(0.1), 0.0);
        assert!((c.bid_at(0.2) - 0.3).abs() < 1e-15);
        assert!((c.bid_at(0.5) - 0.6).abs() < 1e-14);
    }

    #[test]
    fn inverse_lookup() {
        let c = sample();
        assert_eq!(c.type_for_bid(0.29), None);
        assert!((c.type_for_bid(0.75).unwrap() - 0.65).abs() < 1e-12);
        assert_eq!(c.type_for_bid(5.0), Some(1.0));
    }

    #[test]
    fn rejects_flat_bids() {
        assert!(BidCurve::new(vec![0.0, 0.5], vec![0.1, 0.1], vec![0.0, 0.5], 0.0).is_err());
        assert!(BidCurve::new(vec![0.1, 0.5], vec![0.1, 0.2], vec![0.0, 0.5], 0.0).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let csv = sample().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("type,bid,win_prob"));
        assert_eq!(
            lines.next(),
            Some("0.20000000000000001,0.30000000000000004,0.20000000000000001")
        );
        assert_eq!(csv.lines().count(), 6);
    }
}
