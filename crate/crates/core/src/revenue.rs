//! Expected seller revenue for each mechanism and the attachment upper bound.
//!
//! Payment double integrals `∫ P(t) f(t) dt` with `P(t) = ∫^t h` are swapped
//! into single integrals `∫ h(s) (1 - F(s)) ds`.

use std::fmt;

use crate::distributions::AuctionEnv;
use crate::equilibrium::secret::winning_prob_secret_slope;
use crate::equilibrium::{
    reserve_for_threshold, winning_prob_secret, SecretReserveSpec, TioliSpec,
};
use crate::error::{Error, Result};
use crate::numeric::{fmt_sig17, integrate, integrate_with_breaks, QuadOptions};
use crate::optimizer::{
    optimal_threshold_public, optimal_threshold_risk_neutral, optimize_tioli, upper_bound_threshold,
};
use crate::preferences::LossParams;

/// A selling mechanism with all its parameters fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MechanismSpec {
    PublicReserve { reserve: f64 },
    SecretRandomReserve(SecretReserveSpec),
    AuctionThenTioli(TioliSpec),
}

impl MechanismSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MechanismSpec::PublicReserve { .. } => "public",
            MechanismSpec::SecretRandomReserve(_) => "secret",
            MechanismSpec::AuctionThenTioli(_) => "tioli",
        }
    }
}

impl fmt::Display for MechanismSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MechanismSpec::PublicReserve { reserve } => write!(f, "r={}", fmt_sig17(*reserve)),
            MechanismSpec::SecretRandomReserve(s) => {
                write!(
                    f,
                    "t_bar_r={} K={}",
                    fmt_sig17(s.t_bar_r()),
                    fmt_sig17(s.k())
                )
            }
            MechanismSpec::AuctionThenTioli(s) => write!(
                f,
                "r={} p={} nu={} t_r={} t_p={} alpha={}",
                fmt_sig17(s.reserve),
                fmt_sig17(s.posted_price),
                fmt_sig17(s.second_stage_prob),
                fmt_sig17(s.t_r),
                fmt_sig17(s.t_p),
                fmt_sig17(s.alpha)
            ),
        }
    }
}

/// Expected revenue and its decomposition.
///
/// `revenue = N · per_bidder_payment + no_trade_term`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevenueReport {
    /// `None` for the upper bound, which no mechanism attains.
    pub mechanism: Option<MechanismSpec>,
    pub revenue: f64,
    pub trade_prob: f64,
    /// `tˢ` times the no-trade probability.
    pub no_trade_term: f64,
    pub per_bidder_payment: f64,
}

impl RevenueReport {
    fn assemble(
        env: &AuctionEnv,
        mechanism: Option<MechanismSpec>,
        per_bidder: f64,
        no_trade: f64,
    ) -> Self {
        let no_trade_term = no_trade * env.seller_value;
        Self {
            mechanism,
            revenue: env.n_bidders as f64 * per_bidder + no_trade_term,
            trade_prob: 1.0 - no_trade,
            no_trade_term,
            per_bidder_payment: per_bidder,
        }
    }
}

fn opts() -> QuadOptions {
    QuadOptions::default()
}

/// `h(s) = f₁(s) s (1 + η + η(λ-1) F₁(s))`, the density of expected payment.
pub(crate) fn payment_density(env: &AuctionEnv, params: &LossParams, s: f64) -> f64 {
    env.opp_pdf(s) * s * (1.0 + params.eta + params.attachment() * env.opp_cdf(s))
}

/// Ex-ante expected payment of one bidder in an auction whose marginal type
/// `t_r` bids `boundary_bid`.
pub(crate) fn auction_stage_payment(
    env: &AuctionEnv,
    params: &LossParams,
    t_r: f64,
    boundary_bid: f64,
) -> Result<f64> {
    if t_r >= env.upper() {
        return Ok(0.0);
    }
    let tail = integrate(
        |s| payment_density(env, params, s) * (1.0 - env.dist.cdf_at(s)),
        t_r,
        env.upper(),
        &opts(),
    )?;
    Ok(tail + env.opp_cdf(t_r) * boundary_bid * (1.0 - env.dist.cdf_at(t_r)))
}

fn check_threshold(env: &AuctionEnv, t: f64) -> Result<()> {
    if (0.0..=env.upper()).contains(&t) {
        Ok(())
    } else {
        Err(Error::domain("threshold type", t, 0.0, env.upper()))
    }
}

/// Revenue of a first-price auction with public reserve `(1+η) t_r`.
pub fn revenue_public(env: &AuctionEnv, params: &LossParams, t_r: f64) -> Result<RevenueReport> {
    let reserve = reserve_for_threshold(env, t_r, params)?;
    let per_bidder = auction_stage_payment(env, params, t_r, reserve)?;
    Ok(RevenueReport::assemble(
        env,
        Some(MechanismSpec::PublicReserve { reserve }),
        per_bidder,
        env.none_above(t_r),
    ))
}

/// `P̂(t) = (1+η) t F₁(t) + η(λ-1) t F₁(t)² / 2`: the largest expected payment
/// the threshold type can be charged once fully attached.
pub fn bound_payment(env: &AuctionEnv, params: &LossParams, t: f64) -> f64 {
    let f1 = env.opp_cdf(t);
    (1.0 + params.eta) * t * f1 + 0.5 * params.attachment() * t * f1 * f1
}

/// The upper bound on revenue over all threshold-type schemes with highest
/// threshold `t_hat`.
pub fn revenue_upper_bound(
    env: &AuctionEnv,
    params: &LossParams,
    t_hat: f64,
) -> Result<RevenueReport> {
    check_threshold(env, t_hat)?;
    let per_bidder = if t_hat >= env.upper() {
        0.0
    } else {
        let tail = integrate(
            |s| payment_density(env, params, s) * (1.0 - env.dist.cdf_at(s)),
            t_hat,
            env.upper(),
            &opts(),
        )?;
        tail + bound_payment(env, params, t_hat) * (1.0 - env.dist.cdf_at(t_hat))
    };
    Ok(RevenueReport::assemble(
        env,
        None,
        per_bidder,
        env.none_above(t_hat),
    ))
}

/// Probability that the drawn reserve exceeds every bid: `E_{F₀}[F(t̃)ᴺ]`,
/// integrated over the quantile `u` of the threshold draw.
pub fn secret_no_trade_prob(env: &AuctionEnv, spec: &SecretReserveSpec) -> Result<f64> {
    integrate(|u| env.none_above(spec.quantile(u)), 0.0, 1.0, &opts())
}

/// Revenue of the secret scheme: `N ∫ q′(s) s (1+η+η(λ-1)q(s)) (1-F(s)) ds`
/// plus the seller's value when the drawn reserve is not met.
pub fn revenue_secret(
    env: &AuctionEnv,
    params: &LossParams,
    spec: &SecretReserveSpec,
) -> Result<RevenueReport> {
    let breaks = spec.steep_breaks(spec.t_bar_r());
    let per_bidder = integrate_with_breaks(
        |s| {
            let q = winning_prob_secret(spec, env, s);
            winning_prob_secret_slope(spec, env, s)
                * s
                * (1.0 + params.eta + params.attachment() * q)
                * (1.0 - env.dist.cdf_at(s))
        },
        0.0,
        env.upper(),
        &breaks,
        &opts(),
    )?;
    Ok(RevenueReport::assemble(
        env,
        Some(MechanismSpec::SecretRandomReserve(*spec)),
        per_bidder,
        secret_no_trade_prob(env, spec)?,
    ))
}

/// Revenue of the auction followed by a TIOLI offer: auction-stage payments,
/// sales at the posted price, and the seller's value when nothing sells.
pub fn revenue_tioli(
    env: &AuctionEnv,
    params: &LossParams,
    spec: &TioliSpec,
) -> Result<RevenueReport> {
    let auction = auction_stage_payment(env, params, spec.t_r, spec.reserve)?;
    let below_r = env.none_above(spec.t_r);
    let below_p = env.none_above(spec.t_p);
    let offer_sales = spec.second_stage_prob * (below_r - below_p);
    let per_bidder = auction + offer_sales * spec.posted_price / env.n_bidders as f64;
    let no_trade = below_p + (below_r - below_p) - offer_sales;
    Ok(RevenueReport::assemble(
        env,
        Some(MechanismSpec::AuctionThenTioli(*spec)),
        per_bidder,
        no_trade,
    ))
}

/// Revenue of any fully specified mechanism.
pub fn revenue_of(
    env: &AuctionEnv,
    params: &LossParams,
    mechanism: &MechanismSpec,
) -> Result<RevenueReport> {
    match mechanism {
        MechanismSpec::PublicReserve { reserve } => {
            let t_r = (reserve / (1.0 + params.eta)).clamp(0.0, env.upper());
            let mut report = revenue_public(env, params, t_r)?;
            report.mechanism = Some(*mechanism);
            Ok(report)
        }
        MechanismSpec::SecretRandomReserve(spec) => revenue_secret(env, params, spec),
        MechanismSpec::AuctionThenTioli(spec) => revenue_tioli(env, params, spec),
    }
}

/// Settings for [`compare_mechanisms`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareConfig {
    /// Exponent of the threshold distribution in the secret scheme.
    pub secret_k: f64,
    /// Gap `t_r - t_p` of the TIOLI construction; `None` means `10⁻³ t̄`.
    pub tioli_epsilon: Option<f64>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            secret_k: 1e4,
            tioli_epsilon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub name: &'static str,
    pub report: RevenueReport,
    pub param_summary: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn row(&self, name: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// Revenue differences `rows[i] - rows[j]` for every ordered pair `i < j`.
    pub fn deltas(&self) -> Vec<(&'static str, &'static str, f64)> {
        let mut out = Vec::new();
        for (i, a) in self.rows.iter().enumerate() {
            for b in &self.rows[i + 1..] {
                out.push((a.name, b.name, a.report.revenue - b.report.revenue));
            }
        }
        out
    }
}

/// Every mechanism at its own optimum (or near-optimal construction), plus the
/// upper bound: `no_reserve`, `public_rn_threshold`, `public_optimal`,
/// `secret_random`, `auction_tioli`, `upper_bound`.
pub fn compare_mechanisms(
    env: &AuctionEnv,
    params: &LossParams,
    config: &CompareConfig,
) -> Result<ComparisonReport> {
    let mut rows = Vec::new();
    let public_row = |name, t_r: f64| -> Result<ComparisonRow> {
        Ok(ComparisonRow {
            name,
            report: revenue_public(env, params, t_r)?,
            param_summary: format!("t_r={}", fmt_sig17(t_r)),
        })
    };
    rows.push(public_row("no_reserve", 0.0)?);
    let t_rn = optimal_threshold_risk_neutral(env)?;
    rows.push(public_row("public_rn_threshold", t_rn)?);
    let public = optimal_threshold_public(env, params)?;
    rows.push(public_row("public_optimal", public.threshold)?);

    let bound = upper_bound_threshold(env, params)?;
    let secret = SecretReserveSpec::new(env, bound.threshold, config.secret_k)?;
    rows.push(ComparisonRow {
        name: "secret_random",
        report: revenue_secret(env, params, &secret)?,
        param_summary: MechanismSpec::SecretRandomReserve(secret).to_string(),
    });

    let epsilon = config.tioli_epsilon.unwrap_or(1e-3 * env.upper());
    let tioli = match optimize_tioli(env, params, epsilon, Some(public.threshold)) {
        Ok(outcome) if outcome.improves => ComparisonRow {
            name: "auction_tioli",
            param_summary: MechanismSpec::AuctionThenTioli(outcome.spec).to_string(),
            report: outcome.revenue,
        },
        Ok(_) | Err(Error::Infeasible(_)) | Err(Error::Domain { .. }) => {
            // The offer is never made: the auction alone at the public optimum.
            let mut report = revenue_public(env, params, public.threshold)?;
            let spec = TioliSpec {
                reserve: public.reserve,
                second_stage_prob: 0.0,
                posted_price: 0.0,
                t_p: public.threshold,
                t_r: public.threshold,
                alpha: 0.0,
            };
            report.mechanism = Some(MechanismSpec::AuctionThenTioli(spec));
            ComparisonRow {
                name: "auction_tioli",
                report,
                param_summary: format!("no improvement; nu=0 t_r={}", fmt_sig17(public.threshold)),
            }
        }
        Err(e) => return Err(e),
    };
    rows.push(tioli);

    rows.push(ComparisonRow {
        name: "upper_bound",
        report: revenue_upper_bound(env, params, bound.threshold)?,
        param_summary: format!("t_hat={}", fmt_sig17(bound.threshold)),
    });
    Ok(ComparisonReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::TypeDistribution;

    fn unif(n: usize, ts: f64) -> AuctionEnv {
        AuctionEnv::new(TypeDistribution::uniform(1.0).unwrap(), n, ts).unwrap()
    }

    #[test]
    fn public_closed_forms() {
        let env = unif(2, 0.0);
        let rn = revenue_public(&env, &LossParams::risk_neutral(), 0.5).unwrap();
        assert!((rn.revenue - 5.0 / 12.0).abs() < 1e-12);
        assert!((rn.trade_prob - 0.75).abs() < 1e-15);

        let p = LossParams::new(1.0, 2.0).unwrap();
        let la = revenue_public(&env, &p, 0.0).unwrap();
        assert!((la.revenue - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(la.trade_prob, 1.0);
    }

    #[test]
    fn full_exclusion_keeps_the_good() {
        let env = unif(3, 0.3);
        let p = LossParams::new(1.0, 2.0).unwrap();
        let r = revenue_public(&env, &p, 1.0).unwrap();
        assert_eq!(r.trade_prob, 0.0);
        assert!((r.revenue - 0.3).abs() < 1e-15);
    }

    #[test]
    fn bound_example_and_reduction() {
        let env = unif(2, 0.0);
        let p = LossParams::new(1.0, 2.0).unwrap();
        let b = revenue_upper_bound(&env, &p, 0.5).unwrap();
        assert!((b.revenue - 97.0 / 96.0).abs() < 1e-12);
        let rn = LossParams::risk_neutral();
        let env = unif(3, 0.2);
        for t in [0.0, 0.3, 0.7] {
            let a = revenue_upper_bound(&env, &rn, t).unwrap().revenue;
            let b = revenue_public(&env, &rn, t).unwrap().revenue;
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn decomposition_identity() {
        let env = unif(3, 0.2);
        let p = LossParams::new(0.5, 3.0).unwrap();
        let spec = SecretReserveSpec::new(&env, 0.55, 50.0).unwrap();
        let tioli = TioliSpec::from_thresholds(&env, &p, 0.5, 0.45, 0.6).unwrap();
        let reports = [
            revenue_public(&env, &p, 0.4).unwrap(),
            revenue_upper_bound(&env, &p, 0.4).unwrap(),
            revenue_secret(&env, &p, &spec).unwrap(),
            revenue_tioli(&env, &p, &tioli).unwrap(),
        ];
        for r in reports {
            assert!((r.revenue - (3.0 * r.per_bidder_payment + r.no_trade_term)).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&r.trade_prob));
        }
    }

    #[test]
    fn tioli_without_offer_is_the_public_auction() {
        let env = unif(2, 0.1);
        let p = LossParams::new(1.0, 2.0).unwrap();
        let spec = TioliSpec::from_thresholds(&env, &p, 0.45, 0.3, 0.0).unwrap();
        let a = revenue_tioli(&env, &p, &spec).unwrap();
        let b = revenue_public(&env, &p, 0.45).unwrap();
        assert!((a.revenue - b.revenue).abs() < 1e-14);
        assert!((a.trade_prob - b.trade_prob).abs() < 1e-15);
    }

    #[test]
    fn mechanism_labels() {
        let m = MechanismSpec::PublicReserve { reserve: 0.5 };
        assert_eq!(m.name(), "public");
        assert_eq!(m.to_string(), "r=0.5");
    }
}
