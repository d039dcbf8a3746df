use std::fs::File;
use std::io::{self, Write};

use anyhow::{Context, Result};
use reserve_core::equilibrium::{
    bid_public_reserve, bid_secret_reserve, bid_tioli, reserve_for_threshold,
    reserve_price_distribution,
};
use reserve_core::numeric::fmt_sig17;
use reserve_core::optimizer::{
    construct_secret_scheme, optimal_threshold_public, optimal_threshold_risk_neutral,
    optimize_tioli, upper_bound_threshold, TioliOutcome,
};
use reserve_core::revenue::{
    compare_mechanisms, revenue_of, revenue_secret, CompareConfig, MechanismSpec,
};
use reserve_core::sim::{
    default_bid_grid, simulate_auction, upe_check, SimConfig, SimMechanism, SimReport,
};
use reserve_core::{AuctionEnv, BidCurve, LossParams, SecretReserveSpec};

use crate::args::{
    BidCurveArgs, Common, CompareArgs, MechanismArgs, MechanismKind, OptimizeArgs, SecretArgs,
    SimulateArgs, SweepArgs, TioliArgs, Usage, VerifyArgs,
};

fn num(x: f64) -> String {
    fmt_sig17(x)
}

fn writer(common: &Common) -> Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match &common.out {
        Some(path) => {
            Box::new(File::create(path).with_context(|| format!("creating {}", path.display()))?)
        }
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn epsilon(env: &AuctionEnv, given: Option<f64>) -> f64 {
    given.unwrap_or(1e-3 * env.upper())
}

fn tioli_outcome(
    env: &AuctionEnv,
    params: &LossParams,
    tr: Option<f64>,
    eps: Option<f64>,
) -> Result<TioliOutcome> {
    Ok(optimize_tioli(env, params, epsilon(env, eps), tr)?)
}

fn mechanism(env: &AuctionEnv, params: &LossParams, m: &MechanismArgs) -> Result<MechanismSpec> {
    Ok(match m.mechanism {
        MechanismKind::Public => {
            let t_r = match m.tr {
                Some(t) => t,
                None => optimal_threshold_public(env, params)?.threshold,
            };
            MechanismSpec::PublicReserve {
                reserve: reserve_for_threshold(env, t_r, params)?,
            }
        }
        MechanismKind::Secret => {
            MechanismSpec::SecretRandomReserve(secret_spec(env, params, m.tr, m.k)?)
        }
        MechanismKind::Tioli => {
            MechanismSpec::AuctionThenTioli(tioli_outcome(env, params, m.tr, m.epsilon)?.spec)
        }
    })
}

fn secret_spec(
    env: &AuctionEnv,
    params: &LossParams,
    tr: Option<f64>,
    k: f64,
) -> Result<SecretReserveSpec> {
    Ok(match tr {
        Some(t) => SecretReserveSpec::new(env, t, k)?,
        None => construct_secret_scheme(env, params, k)?,
    })
}

fn curve_for(
    env: &AuctionEnv,
    params: &LossParams,
    spec: &MechanismSpec,
    t_r: Option<f64>,
) -> Result<BidCurve> {
    Ok(match spec {
        MechanismSpec::PublicReserve { reserve } => {
            let t = match t_r {
                Some(t) => t,
                None => reserve / (1.0 + params.eta),
            };
            bid_public_reserve(env, t, params)?
        }
        MechanismSpec::SecretRandomReserve(s) => bid_secret_reserve(s, env, params)?,
        MechanismSpec::AuctionThenTioli(s) => bid_tioli(env, s.t_r, s.reserve, params)?,
    })
}

pub fn bid_curve(args: &BidCurveArgs) -> Result<()> {
    let env = args.common.env()?;
    let params = args.common.params()?;
    let spec = mechanism(&env, &params, &args.mechanism)?;
    let curve = curve_for(&env, &params, &spec, args.mechanism.tr)?;
    let mut out = writer(&args.common)?;
    match &spec {
        MechanismSpec::SecretRandomReserve(s) => {
            out.write_record(["type", "bid", "win_prob", "F0"])?;
            for node in curve.nodes() {
                out.write_record([
                    num(node.t),
                    num(node.bid),
                    num(node.win_prob),
                    num(s.f0(node.t)),
                ])?;
            }
        }
        _ => {
            out.write_record(["type", "bid", "win_prob"])?;
            for node in curve.nodes() {
                out.write_record([num(node.t), num(node.bid), num(node.win_prob)])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

const OPTIMUM_HEADER: [&str; 9] = [
    "N",
    "eta",
    "lambda",
    "tS",
    "tr_star",
    "r_star",
    "tRN",
    "revenue",
    "is_corner",
];

fn optimum_row(env: &AuctionEnv, params: &LossParams) -> Result<(Vec<String>, f64, f64)> {
    let best = optimal_threshold_public(env, params)?;
    let t_rn = optimal_threshold_risk_neutral(env)?;
    let row = vec![
        env.n_bidders.to_string(),
        num(params.eta),
        num(params.lambda),
        num(env.seller_value),
        num(best.threshold),
        num(best.reserve),
        num(t_rn),
        num(best.revenue),
        best.is_corner.to_string(),
    ];
    Ok((row, best.threshold, t_rn))
}

pub fn optimize(args: &OptimizeArgs) -> Result<()> {
    let env = args.common.env()?;
    let params = args.common.params()?;
    let best = optimal_threshold_public(&env, &params)?;
    let (row, _, t_rn) = optimum_row(&env, &params)?;
    let mut out = writer(&args.common)?;
    out.write_record(OPTIMUM_HEADER)?;
    out.write_record(&row)?;
    out.flush()?;
    eprintln!(
        "tr_star={} r_star={} tRN={} revenue={}{}",
        num(best.threshold),
        num(best.reserve),
        num(t_rn),
        num(best.revenue),
        if best.is_corner { " (corner)" } else { "" }
    );
    Ok(())
}

pub fn sweep_n(args: &SweepArgs) -> Result<()> {
    let params = args.common.params()?;
    let mut out = writer(&args.common)?;
    let mut header = OPTIMUM_HEADER.to_vec();
    header.extend(["ln_F_tr", "neg_inv_N_minus_1", "increase_condition"]);
    out.write_record(&header)?;
    for n in args.common.n.lo..=args.common.n.hi {
        let env = args.common.env_with_n(n)?;
        let (mut row, t_r, _) = optimum_row(&env, &params)?;
        let ln_f = env.dist.cdf(t_r)?.ln();
        let bound = -1.0 / (n - 1) as f64;
        row.extend([num(ln_f), num(bound), (ln_f < bound).to_string()]);
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn secret_scheme(args: &SecretArgs) -> Result<()> {
    let env = args.common.env()?;
    let params = args.common.params()?;
    if args.grid < 2 {
        return Err(Usage(format!("--grid must be at least 2, got {}", args.grid)).into());
    }
    let spec = secret_spec(&env, &params, args.tr, args.k)?;
    let table = reserve_price_distribution(&spec, &env, &params, args.grid)?;
    let mut out = writer(&args.common)?;
    out.write_record(["threshold_type", "F0", "reserve"])?;
    for p in table {
        out.write_record([num(p.threshold_type), num(p.cdf), num(p.reserve)])?;
    }
    out.flush()?;
    let report = revenue_secret(&env, &params, &spec)?;
    let bound = upper_bound_threshold(&env, &params)?;
    eprintln!(
        "t_bar_r={} K={} revenue={} trade_prob={} bound={}",
        num(spec.t_bar_r()),
        num(spec.k()),
        num(report.revenue),
        num(report.trade_prob),
        num(bound.revenue)
    );
    Ok(())
}

pub fn tioli(args: &TioliArgs) -> Result<()> {
    let env = args.common.env()?;
    let params = args.common.params()?;
    let o = tioli_outcome(&env, &params, args.tr, args.epsilon)?;
    let mut out = writer(&args.common)?;
    out.write_record([
        "t_r",
        "t_p",
        "nu",
        "alpha",
        "reserve",
        "posted_price",
        "revenue",
        "public_revenue",
        "improvement",
    ])?;
    let s = o.spec;
    out.write_record([
        num(s.t_r),
        num(s.t_p),
        num(s.second_stage_prob),
        num(s.alpha),
        num(s.reserve),
        num(s.posted_price),
        num(o.revenue.revenue),
        num(o.public_revenue.revenue),
        num(o.improvement),
    ])?;
    out.flush()?;
    Ok(())
}

fn simulate_spec(
    env: &AuctionEnv,
    params: &LossParams,
    spec: MechanismSpec,
    cfg: &SimConfig,
) -> Result<SimReport> {
    let mech = SimMechanism::equilibrium(env, params, spec)?;
    Ok(simulate_auction(env, &mech, cfg))
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let env = args.common.env()?;
    let params = args.common.params()?;
    let config = CompareConfig {
        secret_k: args.k,
        tioli_epsilon: args.epsilon,
    };
    let report = compare_mechanisms(&env, &params, &config)?;
    let mut out = writer(&args.common)?;
    let mut header = vec!["mechanism", "revenue", "trade_prob", "param_summary"];
    if args.simulate.is_some() {
        header.extend([
            "sim_revenue",
            "sim_revenue_se",
            "sim_trade_prob",
            "sim_trade_prob_se",
        ]);
    }
    out.write_record(&header)?;
    for row in &report.rows {
        let mut record = vec![
            row.name.to_string(),
            num(row.report.revenue),
            num(row.report.trade_prob),
            row.param_summary.clone(),
        ];
        if let Some(draws) = args.simulate {
            match row.report.mechanism {
                Some(spec) => {
                    let cfg = SimConfig {
                        draws,
                        seed: args.common.seed,
                    };
                    let sim = simulate_spec(&env, &params, spec, &cfg)?;
                    record.extend([
                        num(sim.revenue_mean),
                        num(sim.revenue_se),
                        num(sim.trade_prob),
                        num(sim.trade_prob_se),
                    ]);
                }
                None => record.extend(std::iter::repeat_n(String::new(), 4)),
            }
        }
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let env = args.common.env()?;
    let params = args.common.params()?;
    if args.draws == 0 {
        return Err(Usage("--draws must be positive".into()).into());
    }
    let spec = mechanism(&env, &params, &args.mechanism)?;
    let cfg = SimConfig {
        draws: args.draws,
        seed: args.common.seed,
    };
    let sim = simulate_spec(&env, &params, spec, &cfg)?;
    let analytic = revenue_of(&env, &params, &spec)?;
    let mut out = writer(&args.common)?;
    out.write_record(SimReport::CSV_HEADER.split(','))?;
    out.write_record([
        sim.mechanism.to_string(),
        sim.draws.to_string(),
        sim.seed.to_string(),
        num(sim.revenue_mean),
        num(sim.revenue_se),
        num(sim.trade_prob),
    ])?;
    out.flush()?;
    eprintln!(
        "analytic revenue={} trade_prob={}; simulated {} ± {}",
        num(analytic.revenue),
        num(analytic.trade_prob),
        num(sim.revenue_mean),
        num(sim.revenue_se)
    );
    Ok(())
}

pub fn verify_upe(args: &VerifyArgs) -> Result<()> {
    let env = args.common.env()?;
    let params = args.common.params()?;
    if args.grid < 2 || args.bids < 2 {
        return Err(Usage("--grid and --bids must be at least 2".into()).into());
    }
    let spec = mechanism(&env, &params, &args.mechanism)?;
    let mut mech = SimMechanism::equilibrium(&env, &params, spec)?;
    if args.perturb != 0.0 {
        mech = SimMechanism::with_curve(spec, mech.curve.shifted(args.perturb));
    }
    let types = env.type_grid(args.grid);
    let bids = default_bid_grid(&mech.curve, args.bids);
    let report = upe_check(&env, &params, &mech, &types, &bids);
    let mut out = writer(&args.common)?;
    out.write_record([
        "mechanism",
        "types",
        "bids",
        "perturb",
        "max_gain",
        "worst_type",
        "worst_deviation_bid",
        "ppe_violations",
    ])?;
    out.write_record([
        spec.name().to_string(),
        args.grid.to_string(),
        args.bids.to_string(),
        num(args.perturb),
        num(report.max_gain),
        num(report.worst_type),
        num(report.worst_deviation_bid(&spec)),
        report.ppe_violations.to_string(),
    ])?;
    out.flush()?;
    Ok(())
}
