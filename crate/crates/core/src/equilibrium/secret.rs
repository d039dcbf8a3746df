//! Secret and random reserve prices drawn through a power-law distribution of
//! threshold types, `F₀(x) = (x / t̃_r̄)^K` on `[0, t̃_r̄]`.
//!
//! A type-`t` bidder wins with probability `q(t) = F₀(min(t, t̃_r̄)) F₁(t)`, and
//! the committed reserve for a drawn threshold `t̃` is the equilibrium bid
//! `β(t̃)`. Bids use the partially integrated form of the payment integral,
//!
//! `β(t) = (1+η)(t - ∫₀ᵗ q/q(t)) + η(λ-1)(q(t) t - ∫₀ᵗ q²/q(t)) / 2`,
//!
//! with the ratios `q(s)/q(t)` taken in log space; for large `K` both `q(s)`
//! and `q(t)` underflow long before their ratio does.

use super::{curve_nodes, BidCurve, DEFAULT_NODES};
use crate::distributions::AuctionEnv;
use crate::error::{Error, Result};
use crate::numeric::{chebyshev_nodes, integrate_with_breaks, linspace, QuadOptions};
use crate::preferences::LossParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecretReserveSpec {
    t_bar_r: f64,
    k: f64,
}

impl SecretReserveSpec {
    /// `t_bar_r` is the largest threshold type, in `(0, t̄]`; `k > 0`.
    pub fn new(env: &AuctionEnv, t_bar_r: f64, k: f64) -> Result<Self> {
        if !(t_bar_r > 0.0 && t_bar_r <= env.upper()) {
            return Err(Error::Domain {
                what: "largest threshold type",
                value: t_bar_r,
                domain: format!("(0, {}]", env.upper()),
            });
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "K must be positive, got {k}"
            )));
        }
        Ok(Self { t_bar_r, k })
    }

    /// Largest threshold type `t̃_r̄`.
    pub fn t_bar_r(&self) -> f64 {
        self.t_bar_r
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `F₀(x)`, 0 below zero and 1 from `t̃_r̄` on.
    pub fn f0(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= self.t_bar_r {
            1.0
        } else {
            (x / self.t_bar_r).powf(self.k)
        }
    }

    pub fn f0_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 || x > self.t_bar_r {
            0.0
        } else {
            self.k / self.t_bar_r * (x / self.t_bar_r).powf(self.k - 1.0)
        }
    }

    /// Inverse of `F₀`, for drawing thresholds.
    pub fn quantile(&self, u: f64) -> f64 {
        self.t_bar_r * u.clamp(0.0, 1.0).powf(1.0 / self.k)
    }

    fn ln_f0(&self, x: f64) -> f64 {
        self.k * (x.min(self.t_bar_r) / self.t_bar_r).ln()
    }

    /// Break points that resolve the steep rise of `F₀` just below `t̃_r̄`
    /// (and, for an upper limit `t`, of `F₀(s)/F₀(t)` just below `t`).
    pub(crate) fn steep_breaks(&self, t: f64) -> Vec<f64> {
        let mut breaks = vec![self.t_bar_r];
        for centre in [self.t_bar_r, t] {
            for m in [
                0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 512.0,
            ] {
                let x = centre * (1.0 - m / self.k);
                if x > 0.0 {
                    breaks.push(x);
                }
            }
        }
        breaks
    }
}

/// `q(t) = F₀(min(t, t̃_r̄)) F₁(t)`.
pub fn winning_prob_secret(spec: &SecretReserveSpec, env: &AuctionEnv, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    spec.f0(t) * env.opp_cdf(t.min(env.upper()))
}

/// `q′(t)`.
pub(crate) fn winning_prob_secret_slope(spec: &SecretReserveSpec, env: &AuctionEnv, t: f64) -> f64 {
    spec.f0_pdf(t) * env.opp_cdf(t) + spec.f0(t) * env.opp_pdf(t)
}

fn ln_win_prob(spec: &SecretReserveSpec, env: &AuctionEnv, s: f64) -> f64 {
    if s <= 0.0 {
        return f64::NEG_INFINITY;
    }
    spec.ln_f0(s) + (env.n_bidders - 1) as f64 * env.dist.cdf_at(s).ln()
}

/// Equilibrium bid of type `t` under the secret scheme (the committed reserve
/// when `t` is drawn as the threshold).
pub fn bid_secret_at(
    spec: &SecretReserveSpec,
    env: &AuctionEnv,
    params: &LossParams,
    t: f64,
) -> Result<f64> {
    if !(0.0..=env.upper()).contains(&t) {
        return Err(Error::domain("type", t, 0.0, env.upper()));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let ln_qt = ln_win_prob(spec, env, t);
    let opts = QuadOptions::default();
    let breaks = spec.steep_breaks(t);
    let ratio = integrate_with_breaks(
        |s| (ln_win_prob(spec, env, s) - ln_qt).exp(),
        0.0,
        t,
        &breaks,
        &opts,
    )?;
    let material = (1.0 + params.eta) * (t - ratio);
    if params.attachment() == 0.0 {
        return Ok(material);
    }
    let squared = integrate_with_breaks(
        |s| {
            let l = ln_win_prob(spec, env, s);
            (2.0 * l - ln_qt).exp()
        },
        0.0,
        t,
        &breaks,
        &opts,
    )?;
    let q_t = ln_qt.exp();
    Ok(material + 0.5 * params.attachment() * (q_t * t - squared))
}

/// Nodes for a secret-scheme curve: the default Chebyshev grid, ten times as
/// dense within `0.1 t̃_r̄` of the kink at `t̃_r̄`, plus 256 quantiles of `F₀` so
/// the steep part of `q` is tabulated however large `K` is.
fn secret_nodes(spec: &SecretReserveSpec, env: &AuctionEnv, nodes: usize) -> Vec<f64> {
    let upper = env.upper();
    let base = chebyshev_nodes(0.0, upper, nodes);
    let top = spec.t_bar_r;
    let mut extra = Vec::new();
    for (lo, hi) in [(0.9 * top, top), (top, (1.1 * top).min(upper))] {
        if hi > lo {
            let in_window = base.iter().filter(|&&t| t >= lo && t <= hi).count().max(2);
            extra.extend(chebyshev_nodes(lo, hi, 10 * in_window));
        }
    }
    extra.extend((1..=256).map(|j| spec.quantile(j as f64 / 256.0)));
    curve_nodes(0.0, upper, nodes, &extra)
}

/// Equilibrium bid curve under the secret scheme; every type participates.
pub fn bid_secret_reserve(
    spec: &SecretReserveSpec,
    env: &AuctionEnv,
    params: &LossParams,
) -> Result<BidCurve> {
    bid_secret_reserve_with_nodes(spec, env, params, DEFAULT_NODES)
}

pub fn bid_secret_reserve_with_nodes(
    spec: &SecretReserveSpec,
    env: &AuctionEnv,
    params: &LossParams,
    nodes: usize,
) -> Result<BidCurve> {
    env.dist.require_regular()?;
    let types = secret_nodes(spec, env, nodes);
    let bids = types
        .iter()
        .map(|&t| bid_secret_at(spec, env, params, t))
        .collect::<Result<Vec<_>>>()?;
    let win = types
        .iter()
        .map(|&t| winning_prob_secret(spec, env, t))
        .collect();
    BidCurve::with_kinks(types, bids, win, 0.0, &[spec.t_bar_r])
}

/// One point of the committed reserve-price distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservePoint {
    /// Drawn threshold type `t̃_r`.
    pub threshold_type: f64,
    /// `F₀(t̃_r)`: probability that the drawn threshold is at most this type.
    pub cdf: f64,
    /// Committed reserve `r(t̃_r) = β(t̃_r)`.
    pub reserve: f64,
}

/// The reserve-price distribution, tabulated at `points` evenly spaced
/// thresholds on `[0, t̃_r̄]`: the push-forward of `F₀` through the bid map.
pub fn reserve_price_distribution(
    spec: &SecretReserveSpec,
    env: &AuctionEnv,
    params: &LossParams,
    points: usize,
) -> Result<Vec<ReservePoint>> {
    linspace(0.0, spec.t_bar_r, points.max(2))
        .into_iter()
        .map(|t| {
            Ok(ReservePoint {
                threshold_type: t,
                cdf: spec.f0(t),
                reserve: bid_secret_at(spec, env, params, t)?,
            })
        })
        .collect()
}
