//! Deterministic public reserve price.

use super::{curve_nodes, BidCurve, DEFAULT_NODES};
use crate::distributions::AuctionEnv;
use crate::error::{Error, Result};
use crate::numeric::{integrate, QuadOptions};
use crate::preferences::{mwtp, LossParams};

/// Reserve price that makes `t_r` the marginal type: `r = (1 + η) t_r`.
pub fn reserve_for_threshold(env: &AuctionEnv, t_r: f64, params: &LossParams) -> Result<f64> {
    if !(0.0..=env.upper()).contains(&t_r) {
        return Err(Error::domain("threshold type", t_r, 0.0, env.upper()));
    }
    Ok((1.0 + params.eta) * t_r)
}

/// How a reserve price maps into the type space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdClamp {
    Interior,
    /// `r <= 0`: every type participates.
    NonBinding,
    /// `r >= (1 + η) t̄`: no type participates.
    FullExclusion,
}

/// Marginal type for reserve `r`, `t_r = r / (1 + η)`, clamped to `[0, t̄]`.
pub fn threshold_for_reserve(
    env: &AuctionEnv,
    r: f64,
    params: &LossParams,
) -> (f64, ThresholdClamp) {
    let t = r / (1.0 + params.eta);
    if t <= 0.0 {
        (
            0.0,
            if t < 0.0 {
                ThresholdClamp::NonBinding
            } else {
                ThresholdClamp::Interior
            },
        )
    } else if t >= env.upper() {
        (env.upper(), ThresholdClamp::FullExclusion)
    } else {
        (t, ThresholdClamp::Interior)
    }
}

/// Bid of type `t >= t_r` when the marginal type `t_r` bids `boundary_bid` and
/// every participating type is exposed to attachment `F₁`:
///
/// `F₁(t) β(t) = ∫_{t_r}^t s (1 + η + η(λ-1) F₁(s)) f₁(s) ds + F₁(t_r) · boundary_bid`.
///
/// The ratio is evaluated with `f₁(s) / F₁(t)` inside the integral so small
/// types do not lose precision.
pub(crate) fn bid_from_threshold(
    env: &AuctionEnv,
    params: &LossParams,
    t_r: f64,
    boundary_bid: f64,
    t: f64,
) -> Result<f64> {
    if t <= t_r {
        return Ok(boundary_bid);
    }
    let n = env.n_bidders as i32;
    let f_t = env.dist.cdf_at(t);
    let integrand = |s: f64| {
        let f_s = env.dist.cdf_at(s);
        let ratio = (n - 1) as f64 * env.dist.pdf_at(s) / f_t * (f_s / f_t).powi(n - 2);
        s * (1.0 + params.eta + params.attachment() * env.opp_cdf(s)) * ratio
    };
    let integral = integrate(integrand, t_r, t, &QuadOptions::default())?;
    let boundary = if t_r > 0.0 {
        boundary_bid * (env.dist.cdf_at(t_r) / f_t).powi(n - 1)
    } else {
        0.0
    };
    Ok(integral + boundary)
}

pub(crate) fn threshold_curve(
    env: &AuctionEnv,
    params: &LossParams,
    t_r: f64,
    boundary_bid: f64,
    nodes: usize,
) -> Result<BidCurve> {
    if !(0.0..env.upper()).contains(&t_r) {
        return Err(Error::Domain {
            what: "threshold type",
            value: t_r,
            domain: format!("[0, {})", env.upper()),
        });
    }
    env.dist.require_regular()?;
    let types = curve_nodes(t_r, env.upper(), nodes, &[]);
    let bids = types
        .iter()
        .map(|&t| bid_from_threshold(env, params, t_r, boundary_bid, t))
        .collect::<Result<Vec<_>>>()?;
    let win = types.iter().map(|&t| env.opp_cdf(t)).collect();
    BidCurve::new(types, bids, win, t_r)
}

/// Equilibrium bids under a public reserve with marginal type `t_r`.
///
/// The threshold type bids `r = (1 + η) t_r`; with `t_r = 0` the bid at 0 is
/// its limit, 0.
pub fn bid_public_reserve(env: &AuctionEnv, t_r: f64, params: &LossParams) -> Result<BidCurve> {
    bid_public_reserve_with_nodes(env, t_r, params, DEFAULT_NODES)
}

pub fn bid_public_reserve_with_nodes(
    env: &AuctionEnv,
    t_r: f64,
    params: &LossParams,
    nodes: usize,
) -> Result<BidCurve> {
    let r = reserve_for_threshold(env, t_r, params)?;
    threshold_curve(env, params, t_r, r, nodes)
}

/// Interim expected payment of type `t`:
/// `∫_{t_r}^t MWTP(x; F₁(x)) f₁(x) dx + (1 + η) F₁(t_r) t_r` for `t >= t_r`, else 0.
pub fn expected_payment_public(
    env: &AuctionEnv,
    t_r: f64,
    params: &LossParams,
    t: f64,
) -> Result<f64> {
    if !(0.0..=env.upper()).contains(&t) {
        return Err(Error::domain("type", t, 0.0, env.upper()));
    }
    reserve_for_threshold(env, t_r, params)?;
    if t < t_r {
        return Ok(0.0);
    }
    let integral = integrate(
        |x| mwtp(x, env.opp_cdf(x), params) * env.opp_pdf(x),
        t_r,
        t,
        &QuadOptions::default(),
    )?;
    Ok(integral + (1.0 + params.eta) * env.opp_cdf(t_r) * t_r)
}
