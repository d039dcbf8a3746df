//! Invariants that hold across the parameter space.

use proptest::prelude::*;
use reserve_core::equilibrium::{
    bid_public_reserve, bid_secret_reserve, reserve_for_threshold, SecretReserveSpec,
};
use reserve_core::numeric::linspace;
use reserve_core::optimizer::{optimal_threshold_public, upper_bound_threshold};
use reserve_core::revenue::{
    revenue_public, revenue_secret, revenue_upper_bound, secret_no_trade_prob, MechanismSpec,
};
use reserve_core::sim::{upe_check, SimMechanism};
use reserve_core::{AuctionEnv, LossParams, TypeDistribution};

fn family() -> impl Strategy<Value = TypeDistribution> {
    prop_oneof![
        (0.5f64..3.0).prop_map(|u| TypeDistribution::uniform(u).unwrap()),
        (1.0f64..4.0).prop_map(|a| TypeDistribution::power(a, 1.0).unwrap()),
        (0.2f64..4.0).prop_map(|rate| TypeDistribution::truncated_exponential(rate, 1.0).unwrap()),
    ]
}

fn params() -> impl Strategy<Value = LossParams> {
    (0.0f64..2.0, 1.0f64..4.0).prop_map(|(eta, lambda)| LossParams::new(eta, lambda).unwrap())
}

fn env() -> impl Strategy<Value = AuctionEnv> {
    (family(), 2usize..8, 0.0f64..0.5).prop_map(|(d, n, ts)| {
        let ts = ts * d.upper();
        AuctionEnv::new(d, n, ts).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn order_statistic_identities(d in family(), n in 2usize..20, u in 0.01f64..0.99) {
        let t = u * d.upper();
        let f1 = d.order_stat_cdf(n, t).unwrap();
        let big_f = d.cdf(t).unwrap();
        prop_assert!((f1 * big_f - big_f.powi(n as i32)).abs() < 1e-14);
        let h = 1e-6 * d.upper();
        let numeric = (d.order_stat_cdf(n, t + h).unwrap() - d.order_stat_cdf(n, t - h).unwrap()) / (2.0 * h);
        let exact = d.order_stat_pdf(n, t).unwrap();
        prop_assert!((numeric - exact).abs() < 1e-6 * exact.abs().max(1.0));
    }

    #[test]
    fn virtual_value_is_monotone_when_regular(d in family()) {
        prop_assume!(d.check_regularity(512).regular);
        let grid = linspace(0.01 * d.upper(), d.upper(), 200);
        let vs: Vec<f64> = grid.iter().map(|&t| d.virtual_value(t).unwrap()).collect();
        for w in vs.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn reserve_rises_with_threshold(e in env(), p in params(), a in 0.05f64..0.9, b in 0.05f64..0.9) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-6);
        let r_lo = reserve_for_threshold(&e, lo * e.upper(), &p).unwrap();
        let r_hi = reserve_for_threshold(&e, hi * e.upper(), &p).unwrap();
        prop_assert!(r_hi > r_lo);
    }

    #[test]
    fn public_bids_increase_in_type(e in env(), p in params(), u in 0.0f64..0.9) {
        let curve = bid_public_reserve(&e, u * e.upper(), &p).unwrap();
        let bids: Vec<f64> = curve.nodes().map(|n| n.bid).collect();
        for w in bids.windows(2) {
            prop_assert!(w[1] > w[0]);
        }
        prop_assert!(bids.iter().all(|&b| b >= 0.0));
    }

    #[test]
    fn secret_bids_increase_in_type(e in env(), p in params(), u in 0.2f64..0.9, k in 1.0f64..200.0) {
        let spec = SecretReserveSpec::new(&e, u * e.upper(), k).unwrap();
        let curve = bid_secret_reserve(&spec, &e, &p).unwrap();
        let bids: Vec<f64> = curve.nodes().filter(|n| n.win_prob > 0.0).map(|n| n.bid).collect();
        for w in bids.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn bound_dominates_public_revenue(e in env(), p in params(), u in 0.0f64..1.0) {
        let t = u * e.upper();
        let public = revenue_public(&e, &p, t).unwrap().revenue;
        let bound = revenue_upper_bound(&e, &p, t).unwrap().revenue;
        prop_assert!(bound >= public - 1e-9);
    }

    #[test]
    fn optima_dominate_arbitrary_thresholds(e in env(), p in params(), u in 0.0f64..1.0) {
        let t = u * e.upper();
        let best = optimal_threshold_public(&e, &p).unwrap();
        prop_assert!(best.revenue >= revenue_public(&e, &p, t).unwrap().revenue - 1e-9);
        let bound = upper_bound_threshold(&e, &p).unwrap();
        prop_assert!(bound.revenue >= revenue_upper_bound(&e, &p, t).unwrap().revenue - 1e-9);
        prop_assert!(bound.revenue >= best.revenue - 1e-9);
    }

    #[test]
    fn trade_and_no_trade_probabilities_sum_to_one(e in env(), p in params(), u in 0.2f64..0.9, k in 1.0f64..500.0) {
        let spec = SecretReserveSpec::new(&e, u * e.upper(), k).unwrap();
        let report = revenue_secret(&e, &p, &spec).unwrap();
        let none = secret_no_trade_prob(&e, &spec).unwrap();
        prop_assert!((report.trade_prob + none - 1.0).abs() < 1e-12);
        prop_assert!((report.no_trade_term - e.seller_value * none).abs() < 1e-12);
        let public = revenue_public(&e, &p, u * e.upper()).unwrap();
        prop_assert!((0.0..=1.0).contains(&public.trade_prob));
        prop_assert!((public.revenue - e.n_bidders as f64 * public.per_bidder_payment - public.no_trade_term).abs() < 1e-12);
    }

    #[test]
    fn risk_neutral_reserve_is_threshold(e in env(), u in 0.0f64..1.0) {
        let t = u * e.upper();
        prop_assert_eq!(reserve_for_threshold(&e, t, &LossParams::risk_neutral()).unwrap(), t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn upe_gain_vanishes_under_grid_refinement(e in env(), p in params(), u in 0.1f64..0.8, k in 2usize..40) {
        let t_r = u * e.upper();
        let reserve = reserve_for_threshold(&e, t_r, &p).unwrap();
        let mech = SimMechanism::equilibrium(&e, &p, MechanismSpec::PublicReserve { reserve }).unwrap();
        let types = e.type_grid(41);
        let top = 1.1 * mech.curve.max_bid();
        let coarse = upe_check(&e, &p, &mech, &types, &linspace(0.0, top, k + 1));
        let fine = upe_check(&e, &p, &mech, &types, &linspace(0.0, top, 2 * k + 1));
        prop_assert!(coarse.max_gain >= 0.0);
        prop_assert!(fine.max_gain >= coarse.max_gain);
        prop_assert!(fine.max_gain < 1e-6);
        prop_assert_eq!(fine.ppe_violations, 0);
    }
}
