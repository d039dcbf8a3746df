//! Optimal threshold types and reserve prices.
//!
//! Every optimum is located from an analytic first-order condition; revenue is
//! only evaluated to choose among its roots and the two corners.

use crate::distributions::AuctionEnv;
use crate::equilibrium::{reserve_for_threshold, tioli_alpha, SecretReserveSpec, TioliSpec};
use crate::error::{Error, Result};
use crate::numeric::{bisect_secant, integrate, scan_roots, QuadOptions};
use crate::preferences::LossParams;
use crate::revenue::{
    bound_payment, revenue_public, revenue_tioli, revenue_upper_bound, RevenueReport,
};

/// Root tolerance in type units.
pub const ROOT_TOL: f64 = 1e-10;
const SCAN_CELLS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReserveSolution {
    pub threshold: f64,
    pub reserve: f64,
    /// `threshold == 0`: nobody is excluded.
    pub is_corner: bool,
    /// First-order condition at `threshold`; near zero for interior optima.
    pub foc_residual: f64,
    pub revenue: f64,
}

/// `V(t) - tˢ/(1+η) + η(λ-1)/(1+η) · (1-F(t))/f(t) · f₁(t) t`.
///
/// Revenue decreases in the threshold where this is positive.
pub fn public_foc(env: &AuctionEnv, params: &LossParams, t: f64) -> f64 {
    let k = 1.0 + params.eta;
    let attached = params.attachment() / k * env.dist.inverse_hazard_at(t) * env.opp_pdf(t) * t;
    env.dist.virtual_value_at(t) - env.seller_value / k + attached
}

/// `f(t)` times [`public_foc`]; finite on the whole support.
fn public_foc_scaled(env: &AuctionEnv, params: &LossParams, t: f64) -> f64 {
    let k = 1.0 + params.eta;
    let f = env.dist.pdf_at(t);
    let tail = 1.0 - env.dist.cdf_at(t);
    t * f - tail - env.seller_value * f / k + params.attachment() / k * tail * env.opp_pdf(t) * t
}

/// `(1 + η + η(λ-1)F₁(t)/2) V(t) - tˢ`, the bound's first-order condition.
pub fn bound_foc(env: &AuctionEnv, params: &LossParams, t: f64) -> f64 {
    bound_payment(env, params, t) / (t * env.opp_cdf(t)) * env.dist.virtual_value_at(t)
        - env.seller_value
}

fn bound_foc_scaled(env: &AuctionEnv, params: &LossParams, t: f64) -> f64 {
    let c = 1.0 + params.eta + 0.5 * params.attachment() * env.opp_cdf(t);
    let f = env.dist.pdf_at(t);
    c * (t * f - (1.0 - env.dist.cdf_at(t))) - env.seller_value * f
}

/// Compare revenue at `0`, every root of `foc` and `t̄`, keeping the first
/// (smallest) maximiser. `foc` is scaled so that `dR/dt = -c F₁(t) foc(t)` for a
/// positive constant `c`; candidates are ranked by integrating that slope, which
/// stays accurate when revenue differences fall below quadrature tolerance.
fn best_threshold<G, R>(env: &AuctionEnv, foc: G, objective: R) -> Result<(f64, f64)>
where
    G: Fn(f64) -> f64,
    R: Fn(f64) -> Result<f64>,
{
    let upper = env.upper();
    let mut candidates = vec![0.0];
    candidates.extend(scan_roots(&foc, 0.0, upper, SCAN_CELLS, ROOT_TOL));
    candidates.push(upper);
    let slope_opts = QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-11,
        max_intervals: 4000,
    };
    let mut best = (0.0, 0.0);
    let mut level = 0.0;
    for w in candidates.windows(2) {
        level -= integrate(|t| env.opp_cdf(t) * foc(t), w[0], w[1], &slope_opts)?;
        if level > best.1 {
            best = (w[1], level);
        }
    }
    Ok((best.0, objective(best.0)?))
}

/// The risk-neutral optimum: the root of `V(t) = tˢ`.
pub fn optimal_threshold_risk_neutral(env: &AuctionEnv) -> Result<f64> {
    env.dist.require_regular()?;
    let upper = env.upper();
    bisect_secant(
        |t| {
            let f = env.dist.pdf_at(t);
            t * f - (1.0 - env.dist.cdf_at(t)) - env.seller_value * f
        },
        0.0,
        upper,
        ROOT_TOL,
    )
}

/// Revenue-maximising public reserve for loss-averse bidders.
pub fn optimal_threshold_public(env: &AuctionEnv, params: &LossParams) -> Result<ReserveSolution> {
    env.dist.require_regular()?;
    let (threshold, revenue) = best_threshold(
        env,
        |t| public_foc_scaled(env, params, t),
        |t| Ok(revenue_public(env, params, t)?.revenue),
    )?;
    Ok(ReserveSolution {
        threshold,
        reserve: reserve_for_threshold(env, threshold, params)?,
        is_corner: threshold == 0.0,
        foc_residual: public_foc(env, params, threshold),
        revenue,
    })
}

/// Maximiser `t̂` of the upper bound on revenue.
pub fn upper_bound_threshold(env: &AuctionEnv, params: &LossParams) -> Result<ReserveSolution> {
    env.dist.require_regular()?;
    let (threshold, revenue) = best_threshold(
        env,
        |t| bound_foc_scaled(env, params, t),
        |t| Ok(revenue_upper_bound(env, params, t)?.revenue),
    )?;
    Ok(ReserveSolution {
        threshold,
        reserve: (1.0 + params.eta + 0.5 * params.attachment() * env.opp_cdf(threshold))
            * threshold,
        is_corner: threshold == 0.0,
        foc_residual: bound_foc(env, params, threshold),
        revenue,
    })
}

/// The near-optimal secret scheme: largest threshold at the bound's optimum
/// and `F₀(x) = (x / t̂)^K`.
pub fn construct_secret_scheme(
    env: &AuctionEnv,
    params: &LossParams,
    k: f64,
) -> Result<SecretReserveSpec> {
    let bound = upper_bound_threshold(env, params)?;
    SecretReserveSpec::new(env, bound.threshold, k)
}

/// How the public optimum moves from `N` to `N + 1` bidders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparativeStatic {
    pub n: usize,
    pub threshold: f64,
    pub threshold_next: f64,
    /// `ln F(t*) < -1/(N-1)`: the marginal density `f₁(t*)` falls as `N` grows.
    pub condition_holds: bool,
    /// Sign of `t*(N+1) - t*(N)`.
    pub dtr_dn_sign: i8,
    /// Sign of `dt*/dN` with `N` treated as continuous (implicit function theorem).
    pub derivative_sign: i8,
    /// `F(t*) < (N-1)/N`: `f₁(t*)` falls from `N` to `N + 1`.
    pub discrete_condition_holds: bool,
    /// Either optimum is the corner `t* = 0`.
    pub corner: bool,
}

impl ComparativeStatic {
    /// The continuous-`N` condition predicts the direction of the derivative.
    pub fn derivative_agrees(&self) -> bool {
        self.corner || self.condition_holds == (self.derivative_sign > 0)
    }

    /// The continuous-`N` condition predicts the direction of the finite step.
    pub fn step_agrees(&self) -> bool {
        self.corner || self.condition_holds == (self.dtr_dn_sign > 0)
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

pub fn exclusion_comparative_static(
    env: &AuctionEnv,
    params: &LossParams,
) -> Result<ComparativeStatic> {
    let n = env.n_bidders;
    let here = optimal_threshold_public(env, params)?;
    let next_env = AuctionEnv::new(env.dist.clone(), n + 1, env.seller_value)?;
    let next = optimal_threshold_public(&next_env, params)?;
    let t = here.threshold;
    let corner = here.is_corner || next.is_corner;
    let (condition_holds, derivative_sign, discrete) = if here.is_corner {
        (false, 0, false)
    } else {
        let big_f = env.dist.cdf_at(t);
        let condition = big_f.ln() < -1.0 / (n - 1) as f64;
        // dt*/dN = -∂_N G / ∂_t G, with ∂_N f₁ = f₁ (1/(N-1) + ln F).
        let d_n = params.attachment() / (1.0 + params.eta) * (1.0 - big_f) / env.dist.pdf_at(t)
            * env.opp_pdf(t)
            * t
            * (1.0 / (n - 1) as f64 + big_f.ln());
        let h = 1e-6 * env.upper();
        let d_t = (public_foc(env, params, t + h) - public_foc(env, params, t - h)) / (2.0 * h);
        (
            condition,
            sign(-d_n / d_t),
            big_f < (n - 1) as f64 / n as f64,
        )
    };
    Ok(ComparativeStatic {
        n,
        threshold: t,
        threshold_next: next.threshold,
        condition_holds,
        dtr_dn_sign: sign(next.threshold - t),
        derivative_sign,
        discrete_condition_holds: discrete,
        corner,
    })
}

/// A dominating auction-then-TIOLI construction and how it compares with the
/// public auction at the same threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TioliOutcome {
    pub spec: TioliSpec,
    pub revenue: RevenueReport,
    pub public_revenue: RevenueReport,
    pub improvement: f64,
    /// False for risk-neutral bidders, where the offer never helps.
    pub improves: bool,
}

/// Sets `t_p = t_r - epsilon` and the offer probability `ν` that makes
/// `α = 1/2`, at `t_r` (default: the public optimum).
pub fn optimize_tioli(
    env: &AuctionEnv,
    params: &LossParams,
    epsilon: f64,
    t_r: Option<f64>,
) -> Result<TioliOutcome> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let t_r = match t_r {
        Some(t) => t,
        None => optimal_threshold_public(env, params)?.threshold,
    };
    let t_p = t_r - epsilon;
    if !(t_p > 0.0) {
        return Err(Error::Infeasible(format!(
            "posted-price threshold t_r - epsilon = {t_p} is not positive"
        )));
    }
    let per_unit_nu = tioli_alpha(1.0, t_p, t_r, env)?;
    let nu = 0.5 / per_unit_nu;
    if nu > 1.0 {
        return Err(Error::Infeasible(format!(
            "alpha = 1/2 needs offer probability {nu} > 1; reduce epsilon"
        )));
    }
    let spec = TioliSpec::from_thresholds(env, params, t_r, t_p, nu)?;
    let revenue = revenue_tioli(env, params, &spec)?;
    let public_revenue = revenue_public(env, params, t_r)?;
    let improvement = revenue.revenue - public_revenue.revenue;
    Ok(TioliOutcome {
        spec,
        revenue,
        public_revenue,
        improvement,
        improves: improvement > 0.0,
    })
}
