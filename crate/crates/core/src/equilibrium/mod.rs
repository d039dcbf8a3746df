//! Equilibrium bid functions for the three selling mechanisms.

mod curve;
pub mod public;
pub mod secret;
pub mod tioli;

pub use curve::{BidCurve, CurveNode};
pub use public::{
    bid_public_reserve, bid_public_reserve_with_nodes, expected_payment_public,
    reserve_for_threshold, threshold_for_reserve, ThresholdClamp,
};
pub use secret::{
    bid_secret_at, bid_secret_reserve, bid_secret_reserve_with_nodes, reserve_price_distribution,
    winning_prob_secret, ReservePoint, SecretReserveSpec,
};
pub use tioli::{bid_tioli, tioli_alpha, tioli_alpha_binomial, tioli_pricing, TioliSpec};

use crate::numeric::chebyshev_nodes;

/// Default number of Chebyshev nodes in a tabulated bid curve.
pub const DEFAULT_NODES: usize = 513;

/// `n` Chebyshev nodes on `[lo, hi]` merged with the `extra` points that fall
/// inside, sorted, with near-duplicates removed.
pub(crate) fn curve_nodes(lo: f64, hi: f64, n: usize, extra: &[f64]) -> Vec<f64> {
    let mut nodes = chebyshev_nodes(lo, hi, n.max(2));
    nodes.extend(extra.iter().copied().filter(|&x| x > lo && x < hi));
    nodes.sort_by(f64::total_cmp);
    let gap = 1e-12 * (hi - lo).max(f64::MIN_POSITIVE);
    let mut out: Vec<f64> = Vec::with_capacity(nodes.len());
    for x in nodes {
        match out.last() {
            Some(&prev) if x - prev <= gap => {
                // keep exact endpoints
                if x == hi {
                    *out.last_mut().expect("non-empty") = hi;
                }
            }
            _ => out.push(x),
        }
    }
    out
}
