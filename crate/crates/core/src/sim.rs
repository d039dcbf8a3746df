//! Independent checks of the analytic results: a seeded Monte Carlo auction
//! simulator and a grid search for profitable deviations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distributions::AuctionEnv;
use crate::equilibrium::{
    bid_public_reserve, bid_secret_reserve, bid_tioli, reserve_for_threshold,
    threshold_for_reserve, BidCurve, ThresholdClamp, TioliSpec,
};
use crate::error::{Error, Result};
use crate::numeric::{fmt_sig17, linspace};
use crate::preferences::{binary_expected_utility, LossParams};
use crate::revenue::MechanismSpec;

/// Draws are split into this many chunks, each with its own RNG stream, so
/// results do not depend on the number of worker threads.
pub const SIM_CHUNKS: u64 = 64;
const HISTOGRAM_BINS: usize = 20;

/// A mechanism together with the bid curve bidders are assumed to follow.
#[derive(Debug, Clone, PartialEq)]
pub struct SimMechanism {
    pub spec: MechanismSpec,
    pub curve: BidCurve,
}

impl SimMechanism {
    /// Pairs `spec` with its equilibrium bid curve.
    pub fn equilibrium(env: &AuctionEnv, params: &LossParams, spec: MechanismSpec) -> Result<Self> {
        let curve = match &spec {
            MechanismSpec::PublicReserve { reserve } => {
                let (t_r, clamp) = threshold_for_reserve(env, *reserve, params);
                if clamp == ThresholdClamp::FullExclusion {
                    return Err(Error::InvalidParameter(format!(
                        "reserve {reserve} excludes every type"
                    )));
                }
                bid_public_reserve(env, t_r, params)?
            }
            MechanismSpec::SecretRandomReserve(s) => bid_secret_reserve(s, env, params)?,
            MechanismSpec::AuctionThenTioli(s) => bid_tioli(env, s.t_r, s.reserve, params)?,
        };
        Ok(Self { spec, curve })
    }

    /// Any curve, e.g. a perturbed one, under the rules of `spec`.
    pub fn with_curve(spec: MechanismSpec, curve: BidCurve) -> Self {
        Self { spec, curve }
    }

    fn public_reserve(&self) -> Option<f64> {
        match self.spec {
            MechanismSpec::PublicReserve { reserve } => Some(reserve),
            MechanismSpec::AuctionThenTioli(s) => Some(s.reserve),
            MechanismSpec::SecretRandomReserve(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub draws: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub mechanism: &'static str,
    pub draws: u64,
    pub seed: u64,
    pub revenue_mean: f64,
    pub revenue_se: f64,
    pub trade_prob: f64,
    pub trade_prob_se: f64,
    /// Sales by winner type, in equal bins over `[0, t̄]`.
    pub allocation_histogram: Vec<u64>,
    pub no_trade: u64,
}

impl SimReport {
    pub const CSV_HEADER: &'static str = "mechanism,draws,seed,revenue_mean,revenue_se,trade_prob";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.mechanism,
            self.draws,
            self.seed,
            fmt_sig17(self.revenue_mean),
            fmt_sig17(self.revenue_se),
            fmt_sig17(self.trade_prob)
        )
    }
}

/// Running moments of one chunk, merged pairwise.
#[derive(Debug, Clone)]
struct Partial {
    n: u64,
    mean: f64,
    m2: f64,
    trades: u64,
    histogram: Vec<u64>,
}

impl Partial {
    fn new() -> Self {
        Self {
            n: 0,
            mean: 0.0,
            m2: 0.0,
            trades: 0,
            histogram: vec![0; HISTOGRAM_BINS],
        }
    }

    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(a: Partial, b: Partial) -> Partial {
        if a.n == 0 {
            return b;
        }
        if b.n == 0 {
            return a;
        }
        let n = a.n + b.n;
        let d = b.mean - a.mean;
        let mean = a.mean + d * b.n as f64 / n as f64;
        let m2 = a.m2 + b.m2 + d * d * a.n as f64 * b.n as f64 / n as f64;
        let histogram = a
            .histogram
            .iter()
            .zip(&b.histogram)
            .map(|(x, y)| x + y)
            .collect();
        Partial {
            n,
            mean,
            m2,
            trades: a.trades + b.trades,
            histogram,
        }
    }
}

fn reduce_pairwise(mut parts: Vec<Partial>) -> Partial {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => Partial::merge(a, b),
                None => a,
            });
        }
        parts = next;
    }
    parts.pop().unwrap_or_else(Partial::new)
}

/// Outcome of one simulated auction: the sale price and winner type, if any.
fn run_once<R: Rng>(
    env: &AuctionEnv,
    mech: &SimMechanism,
    rng: &mut R,
    types: &mut [f64],
    bids: &mut [f64],
) -> Option<(f64, f64)> {
    let curve = &mech.curve;
    for (t, b) in types.iter_mut().zip(bids.iter_mut()) {
        *t = env.dist.quantile(rng.gen::<f64>());
        // Abstention is a bid of -∞: below any reserve, including zero.
        *b = if *t < curve.threshold() {
            f64::NEG_INFINITY
        } else {
            curve.bid_at(*t)
        };
    }
    let top = bids.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let leaders: Vec<usize> = (0..bids.len()).filter(|&i| bids[i] == top).collect();
    let pick = |rng: &mut R, from: &[usize]| from[rng.gen_range(0..from.len())];

    let reserve = match &mech.spec {
        MechanismSpec::SecretRandomReserve(s) => {
            let drawn = s.quantile(rng.gen::<f64>());
            curve.bid_at(drawn)
        }
        _ => mech.public_reserve().expect("public reserve"),
    };
    if top > f64::NEG_INFINITY && top >= reserve {
        let w = pick(rng, &leaders);
        return Some((top, types[w]));
    }
    if let MechanismSpec::AuctionThenTioli(s) = &mech.spec {
        if rng.gen::<f64>() < s.second_stage_prob {
            let takers: Vec<usize> = (0..types.len()).filter(|&i| types[i] >= s.t_p).collect();
            if !takers.is_empty() {
                let w = pick(rng, &takers);
                return Some((s.posted_price, types[w]));
            }
        }
    }
    None
}

/// Monte Carlo revenue and trade frequency of `mech` when every bidder
/// follows its curve.
pub fn simulate_auction(env: &AuctionEnv, mech: &SimMechanism, cfg: &SimConfig) -> SimReport {
    let chunks = SIM_CHUNKS.min(cfg.draws.max(1));
    let base = cfg.draws / chunks;
    let extra = cfg.draws % chunks;
    let upper = env.upper();
    let parts: Vec<Partial> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c);
            let n = base + u64::from(c < extra);
            let mut part = Partial::new();
            let mut types = vec![0.0; env.n_bidders];
            let mut bids = vec![0.0; env.n_bidders];
            for _ in 0..n {
                match run_once(env, mech, &mut rng, &mut types, &mut bids) {
                    Some((price, winner)) => {
                        part.trades += 1;
                        let bin = ((winner / upper * HISTOGRAM_BINS as f64) as usize)
                            .min(HISTOGRAM_BINS - 1);
                        part.histogram[bin] += 1;
                        part.push(price);
                    }
                    None => part.push(env.seller_value),
                }
            }
            part
        })
        .collect();
    let total = reduce_pairwise(parts);
    let n = total.n.max(1) as f64;
    let variance = if total.n > 1 {
        total.m2 / (n - 1.0)
    } else {
        0.0
    };
    let trade_prob = total.trades as f64 / n;
    SimReport {
        mechanism: mech.spec.name(),
        draws: cfg.draws,
        seed: cfg.seed,
        revenue_mean: total.mean,
        revenue_se: (variance / n).sqrt(),
        trade_prob,
        trade_prob_se: (trade_prob * (1.0 - trade_prob) / n).sqrt(),
        allocation_histogram: total.histogram,
        no_trade: total.n - total.trades,
    }
}

/// A unilateral deviation from the equilibrium strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Deviation {
    /// Bid this amount in the auction.
    Bid(f64),
    /// Stay out (and refuse any posted offer).
    Abstain,
    /// Stay out of the auction and accept the posted offer.
    AcceptOffer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpeReport {
    /// Largest gain of a deviation over the equilibrium strategy, with the
    /// reference point held at the equilibrium outcome.
    pub max_gain: f64,
    pub worst_type: f64,
    pub worst_deviation: Deviation,
    /// `(types, bids)` in the grids.
    pub grid_sizes: (usize, usize),
    /// Types for which abstaining is also a strict personal equilibrium and
    /// gives a higher expected utility than the computed strategy.
    pub ppe_violations: usize,
}

impl UpeReport {
    /// The deviating bid; 0 for abstention, the posted price for the offer.
    pub fn worst_deviation_bid(&self, spec: &MechanismSpec) -> f64 {
        match (self.worst_deviation, spec) {
            (Deviation::Bid(b), _) => b,
            (Deviation::AcceptOffer, MechanismSpec::AuctionThenTioli(s)) => s.posted_price,
            _ => 0.0,
        }
    }
}

/// Win probability and payment on a win of each deviation, with every rival
/// following `mech.curve`.
struct Outcomes<'a> {
    env: &'a AuctionEnv,
    mech: &'a SimMechanism,
}

impl Outcomes<'_> {
    fn outcome(&self, d: Deviation) -> (f64, f64) {
        let curve = &self.mech.curve;
        let beats = |b: f64| curve.type_for_bid(b).unwrap_or(0.0).max(curve.threshold());
        match (d, &self.mech.spec) {
            (Deviation::Abstain, _) => (0.0, 0.0),
            (Deviation::AcceptOffer, MechanismSpec::AuctionThenTioli(s)) => {
                (s.alpha * self.env.opp_cdf(s.t_r), s.posted_price)
            }
            (Deviation::AcceptOffer, _) => (0.0, 0.0),
            (Deviation::Bid(b), MechanismSpec::SecretRandomReserve(s)) => {
                let tau = curve.type_for_bid(b).unwrap_or(0.0);
                (self.env.opp_cdf(tau) * s.f0(tau), b)
            }
            (Deviation::Bid(b), _) => {
                let reserve = self.mech.public_reserve().expect("public reserve");
                if b >= reserve {
                    (self.env.opp_cdf(beats(b)), b)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }

    /// The strategy the curve prescribes for type `t`.
    fn on_path(&self, t: f64) -> Deviation {
        let curve = &self.mech.curve;
        if t >= curve.threshold() {
            return Deviation::Bid(curve.bid_at(t));
        }
        match &self.mech.spec {
            MechanismSpec::AuctionThenTioli(s) if t >= s.t_p => Deviation::AcceptOffer,
            _ => Deviation::Abstain,
        }
    }
}

/// Default deviation grid: `n` bids evenly spaced on `[0, 1.1 · max bid]`.
pub fn default_bid_grid(curve: &BidCurve, n: usize) -> Vec<f64> {
    linspace(0.0, 1.1 * curve.max_bid(), n)
}

/// Checks the unacclimating-personal-equilibrium condition on a grid: for
/// each type, hold the reference at the equilibrium outcome and try every
/// bid in `bid_grid`, abstention and (after an auction with a TIOLI stage)
/// the posted offer.
pub fn upe_check(
    env: &AuctionEnv,
    params: &LossParams,
    mech: &SimMechanism,
    type_grid: &[f64],
    bid_grid: &[f64],
) -> UpeReport {
    let outcomes = Outcomes { env, mech };
    let mut deviations: Vec<Deviation> = bid_grid.iter().map(|&b| Deviation::Bid(b)).collect();
    deviations.push(Deviation::Abstain);
    if matches!(mech.spec, MechanismSpec::AuctionThenTioli(_)) {
        deviations.push(Deviation::AcceptOffer);
    }
    let table: Vec<(f64, f64)> = deviations.iter().map(|&d| outcomes.outcome(d)).collect();

    let mut report = UpeReport {
        max_gain: f64::NEG_INFINITY,
        worst_type: f64::NAN,
        worst_deviation: Deviation::Abstain,
        grid_sizes: (type_grid.len(), bid_grid.len()),
        ppe_violations: 0,
    };
    for &t in type_grid {
        let eq = outcomes.on_path(t);
        let (q_eq, pay_eq) = outcomes.outcome(eq);
        let eu_eq = binary_expected_utility(q_eq, pay_eq, q_eq, t, params);
        // The on-path strategy is always a candidate, so gains are never negative.
        let mut best = (0.0, eq);
        let mut best_unattached = if q_eq > 0.0 {
            binary_expected_utility(q_eq, pay_eq, 0.0, t, params)
        } else {
            f64::NEG_INFINITY
        };
        for (&d, &(q, pay)) in deviations.iter().zip(&table) {
            let gain = binary_expected_utility(q, pay, q_eq, t, params) - eu_eq;
            if gain > best.0 {
                best = (gain, d);
            }
            if q > 0.0 {
                best_unattached =
                    best_unattached.max(binary_expected_utility(q, pay, 0.0, t, params));
            }
        }
        if best.0 > report.max_gain {
            report.max_gain = best.0;
            report.worst_type = t;
            report.worst_deviation = best.1;
        }
        let abstention_is_upe = best_unattached < -1e-12;
        if abstention_is_upe && eu_eq < 0.0 {
            report.ppe_violations += 1;
        }
    }
    report
}

/// `|F₁(t_r)(1+η) t_r - F₁(t_r) r|` for the public reserve implied by `t_r`.
pub fn marginal_type_check(env: &AuctionEnv, params: &LossParams, t_r: f64) -> Result<f64> {
    let r = reserve_for_threshold(env, t_r, params)?;
    let f1 = env.opp_cdf(t_r);
    Ok((f1 * (1.0 + params.eta) * t_r - f1 * r).abs())
}

/// Indifference residuals of a TIOLI spec, from expected utilities:
/// `t_r`, expecting to wait for the offer, against bidding `r`; and `t_p`,
/// expecting never to buy, against accepting `p`. Both are per unit of `F₁(t_r)`.
pub fn tioli_marginal_check(env: &AuctionEnv, params: &LossParams, spec: &TioliSpec) -> (f64, f64) {
    let f1 = env.opp_cdf(spec.t_r);
    let q_offer = spec.alpha * f1;
    let t = spec.t_r;
    let bid = binary_expected_utility(f1, spec.reserve, q_offer, t, params);
    let wait = binary_expected_utility(q_offer, spec.posted_price, q_offer, t, params);
    let t = spec.t_p;
    let accept = binary_expected_utility(q_offer, spec.posted_price, 0.0, t, params);
    ((bid - wait).abs() / f1, accept.abs() / f1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::TypeDistribution;

    fn unif(n: usize, ts: f64) -> AuctionEnv {
        AuctionEnv::new(TypeDistribution::uniform(1.0).unwrap(), n, ts).unwrap()
    }

    #[test]
    fn deterministic_for_a_seed() {
        let env = unif(2, 0.0);
        let p = LossParams::risk_neutral();
        let m = SimMechanism::equilibrium(&env, &p, MechanismSpec::PublicReserve { reserve: 0.5 })
            .unwrap();
        let cfg = SimConfig {
            draws: 20_000,
            seed: 9,
        };
        let a = simulate_auction(&env, &m, &cfg);
        let b = simulate_auction(&env, &m, &cfg);
        assert_eq!(a, b);
        let c = simulate_auction(
            &env,
            &m,
            &SimConfig {
                draws: 20_000,
                seed: 10,
            },
        );
        assert_ne!(a.revenue_mean, c.revenue_mean);
        assert_eq!(
            a.allocation_histogram.iter().sum::<u64>() + a.no_trade,
            20_000
        );
        assert_eq!(a.allocation_histogram[..10].iter().sum::<u64>(), 0);
    }

    #[test]
    fn unmeetable_reserve_never_trades() {
        let env = unif(3, 0.25);
        let p = LossParams::new(1.0, 2.0).unwrap();
        let curve = bid_public_reserve(&env, 0.2, &p).unwrap();
        let m = SimMechanism::with_curve(MechanismSpec::PublicReserve { reserve: 10.0 }, curve);
        let r = simulate_auction(
            &env,
            &m,
            &SimConfig {
                draws: 5_000,
                seed: 1,
            },
        );
        assert_eq!(r.trade_prob, 0.0);
        assert_eq!(r.revenue_mean, 0.25);
        assert_eq!(r.no_trade, 5_000);
    }

    #[test]
    fn pairwise_merge_matches_direct_moments() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let parts = xs
            .chunks(77)
            .map(|c| {
                let mut p = Partial::new();
                c.iter().for_each(|&x| p.push(x));
                p
            })
            .collect();
        let total = reduce_pairwise(parts);
        let mean = xs.iter().sum::<f64>() / 1000.0;
        let m2: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        assert_eq!(total.n, 1000);
        assert!((total.mean - mean).abs() < 1e-12);
        assert!((total.m2 - m2).abs() < 1e-9);
    }

    #[test]
    fn equilibrium_passes_and_shift_is_caught() {
        let env = unif(2, 0.0);
        let p = LossParams::new(1.0, 2.0).unwrap();
        let m = SimMechanism::equilibrium(&env, &p, MechanismSpec::PublicReserve { reserve: 0.8 })
            .unwrap();
        let types = env.type_grid(201);
        let bids = default_bid_grid(&m.curve, 401);
        let ok = upe_check(&env, &p, &m, &types, &bids);
        assert!(ok.max_gain <= 1e-6, "{ok:?}");
        assert_eq!(ok.ppe_violations, 0);

        let bad = SimMechanism::with_curve(m.spec, m.curve.shifted(0.05));
        let caught = upe_check(&env, &p, &bad, &types, &bids);
        assert!(caught.max_gain > 1e-3);
        let t = caught.worst_type;
        assert!(caught.worst_deviation_bid(&bad.spec) < bad.curve.bid_at(t));
    }

    #[test]
    fn marginal_residuals() {
        let env = unif(3, 0.0);
        let p = LossParams::new(0.7, 2.5).unwrap();
        assert!(marginal_type_check(&env, &p, 0.4).unwrap() <= 1e-12);
        assert!(marginal_type_check(&env, &LossParams::risk_neutral(), 0.4).unwrap() <= 1e-12);
        let spec = TioliSpec::from_thresholds(&env, &p, 0.45, 0.44, 0.6).unwrap();
        let (a, b) = tioli_marginal_check(&env, &p, &spec);
        assert!(a <= 1e-10 && b <= 1e-10);
    }
}
