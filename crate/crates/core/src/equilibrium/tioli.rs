//! First-price auction followed, when no bid meets the reserve, by a
//! take-it-or-leave-it (TIOLI) offer.
//!
//! With probability `ν` the seller posts price `p` to every bidder and sells to
//! one acceptor chosen uniformly. Types in `[t_p, t_r)` skip the auction and
//! accept; types from `t_r` up bid in the auction.

use super::public::{bid_from_threshold, threshold_curve};
use super::{BidCurve, DEFAULT_NODES};
use crate::distributions::AuctionEnv;
use crate::error::{Error, Result};
use crate::preferences::LossParams;

/// A fully priced TIOLI mechanism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TioliSpec {
    /// Auction reserve `r`.
    pub reserve: f64,
    /// Probability `ν` that the offer is made.
    pub second_stage_prob: f64,
    /// Posted price `p = (1+η) t_p`.
    pub posted_price: f64,
    pub t_p: f64,
    pub t_r: f64,
    /// Ex-ante probability multiplier: a type in `[t_p, t_r)` gets the good with
    /// probability `α F₁(t_r)`.
    pub alpha: f64,
}

impl TioliSpec {
    /// Prices the mechanism with thresholds `t_p < t_r` and offer probability `ν`.
    pub fn from_thresholds(
        env: &AuctionEnv,
        params: &LossParams,
        t_r: f64,
        t_p: f64,
        nu: f64,
    ) -> Result<Self> {
        let alpha = tioli_alpha(nu, t_p, t_r, env)?;
        let (reserve, posted_price) = tioli_pricing(t_r, t_p, alpha, env, params)?;
        Ok(Self {
            reserve,
            second_stage_prob: nu,
            posted_price,
            t_p,
            t_r,
            alpha,
        })
    }

    /// The `t_p → t_r` limit at multiplier `alpha`: the offer is accepted only
    /// by a null set of types but still shapes the auction reserve.
    pub fn limit(env: &AuctionEnv, params: &LossParams, t_r: f64, alpha: f64) -> Result<Self> {
        let (reserve, posted_price) = tioli_pricing(t_r, t_r, alpha, env, params)?;
        Ok(Self {
            reserve,
            second_stage_prob: alpha,
            posted_price,
            t_p: t_r,
            t_r,
            alpha,
        })
    }

    /// Probability that type `t` ends up with the good.
    pub fn win_prob(&self, env: &AuctionEnv, t: f64) -> f64 {
        if t >= self.t_r {
            env.opp_cdf(t)
        } else if t >= self.t_p {
            self.alpha * env.opp_cdf(self.t_r)
        } else {
            0.0
        }
    }
}

fn check_thresholds(env: &AuctionEnv, t_p: f64, t_r: f64) -> Result<()> {
    if !(t_r > 0.0 && t_r <= env.upper()) {
        return Err(Error::Domain {
            what: "auction threshold type",
            value: t_r,
            domain: format!("(0, {}]", env.upper()),
        });
    }
    if !(0.0..t_r).contains(&t_p) {
        return Err(Error::Domain {
            what: "posted-price threshold type",
            value: t_p,
            domain: format!("[0, {t_r})"),
        });
    }
    Ok(())
}

fn check_nu(nu: f64) -> Result<()> {
    if (0.0..=1.0).contains(&nu) {
        Ok(())
    } else {
        Err(Error::domain("offer probability", nu, 0.0, 1.0))
    }
}

/// `α = ν (1 - ρᴺ) / (N (1 - ρ))` with `ρ = F(t_p)/F(t_r)`, evaluated as the
/// geometric mean `ν Σ_{j<N} ρʲ / N`, which stays accurate as `ρ → 1`.
pub fn tioli_alpha(nu: f64, t_p: f64, t_r: f64, env: &AuctionEnv) -> Result<f64> {
    check_nu(nu)?;
    check_thresholds(env, t_p, t_r)?;
    let rho = env.dist.cdf_at(t_p) / env.dist.cdf_at(t_r);
    let n = env.n_bidders;
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..n {
        sum += term;
        term *= rho;
    }
    Ok(nu * sum / n as f64)
}

/// The same multiplier as an expectation over the number `k` of rival
/// claimants: `ν Σ_k C(N-1,k) (1-ρ)ᵏ ρ^(N-1-k) / (k+1)`.
pub fn tioli_alpha_binomial(nu: f64, t_p: f64, t_r: f64, env: &AuctionEnv) -> Result<f64> {
    check_nu(nu)?;
    check_thresholds(env, t_p, t_r)?;
    let rho = env.dist.cdf_at(t_p) / env.dist.cdf_at(t_r);
    let m = env.n_bidders - 1;
    let mut binom = 1.0;
    let mut sum = 0.0;
    for k in 0..=m {
        sum += binom * (1.0 - rho).powi(k as i32) * rho.powi((m - k) as i32) / (k + 1) as f64;
        binom = binom * (m - k) as f64 / (k + 1) as f64;
    }
    Ok(nu * sum)
}

/// Reserve and posted price that make `t_r` and `t_p` the marginal types:
///
/// `p = (1+η) t_p`,
/// `r = t_r[(1-α)(1+η) + η(λ-1)(1-α)α F₁(t_r)] + (1+η) α t_p`.
///
/// `t_p = t_r` is accepted as the limiting construction.
pub fn tioli_pricing(
    t_r: f64,
    t_p: f64,
    alpha: f64,
    env: &AuctionEnv,
    params: &LossParams,
) -> Result<(f64, f64)> {
    if !(t_r > 0.0 && t_r < env.upper()) {
        return Err(Error::Domain {
            what: "auction threshold type",
            value: t_r,
            domain: format!("(0, {})", env.upper()),
        });
    }
    if !(0.0..=t_r).contains(&t_p) {
        return Err(Error::domain("posted-price threshold type", t_p, 0.0, t_r));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain {
            what: "alpha",
            value: alpha,
            domain: "[0, 1)".into(),
        });
    }
    let k = 1.0 + params.eta;
    let f1 = env.opp_cdf(t_r);
    let r = t_r * ((1.0 - alpha) * k + params.attachment() * (1.0 - alpha) * alpha * f1)
        + k * alpha * t_p;
    Ok((r, k * t_p))
}

/// Auction-stage bids: the public-reserve bid function with boundary bid `r`
/// at the threshold `t_r`.
pub fn bid_tioli(env: &AuctionEnv, t_r: f64, r: f64, params: &LossParams) -> Result<BidCurve> {
    threshold_curve(env, params, t_r, r, DEFAULT_NODES)
}

/// Single auction-stage bid, for spot checks.
pub fn bid_tioli_at(
    env: &AuctionEnv,
    t_r: f64,
    r: f64,
    params: &LossParams,
    t: f64,
) -> Result<f64> {
    bid_from_threshold(env, params, t_r, r, t)
}
