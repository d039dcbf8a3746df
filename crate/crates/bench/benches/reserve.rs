use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use reserve_core::equilibrium::{bid_public_reserve, bid_secret_reserve};
use reserve_core::optimizer::{
    construct_secret_scheme, optimal_threshold_public, upper_bound_threshold,
};
use reserve_core::revenue::{compare_mechanisms, revenue_secret, CompareConfig, MechanismSpec};
use reserve_core::sim::{default_bid_grid, simulate_auction, upe_check, SimConfig, SimMechanism};
use reserve_core::{AuctionEnv, LossParams, TypeDistribution};

fn cell(n: usize) -> (AuctionEnv, LossParams) {
    (
        AuctionEnv::new(TypeDistribution::uniform(1.0).unwrap(), n, 0.2).unwrap(),
        LossParams::new(1.0, 2.0).unwrap(),
    )
}

fn bid_curves(c: &mut Criterion) {
    let (env, p) = cell(3);
    let secret = construct_secret_scheme(&env, &p, 1e4).unwrap();
    let mut group = c.benchmark_group("bid_curve");
    group.bench_function("public", |b| {
        b.iter(|| bid_public_reserve(&env, black_box(0.45), &p).unwrap())
    });
    group.bench_function("secret_k1e4", |b| {
        b.iter(|| bid_secret_reserve(black_box(&secret), &env, &p).unwrap())
    });
    group.finish();
}

fn optimizers(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimize");
    for n in [2, 5, 20] {
        let (env, p) = cell(n);
        group.bench_with_input(BenchmarkId::new("public", n), &n, |b, _| {
            b.iter(|| optimal_threshold_public(black_box(&env), &p).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("bound", n), &n, |b, _| {
            b.iter(|| upper_bound_threshold(black_box(&env), &p).unwrap())
        });
    }
    group.finish();
}

fn revenues(c: &mut Criterion) {
    let (env, p) = cell(2);
    let mut group = c.benchmark_group("revenue");
    for k in [1e1, 1e4] {
        let spec = construct_secret_scheme(&env, &p, k).unwrap();
        group.bench_with_input(BenchmarkId::new("secret", k), &spec, |b, s| {
            b.iter(|| revenue_secret(&env, &p, s).unwrap())
        });
    }
    group.sample_size(20);
    group.bench_function("compare_all", |b| {
        b.iter(|| compare_mechanisms(&env, &p, &CompareConfig::default()).unwrap())
    });
    group.finish();
}

fn checks(c: &mut Criterion) {
    let (env, p) = cell(3);
    let t_r = optimal_threshold_public(&env, &p).unwrap();
    let mech = SimMechanism::equilibrium(
        &env,
        &p,
        MechanismSpec::PublicReserve {
            reserve: t_r.reserve,
        },
    )
    .unwrap();
    let mut group = c.benchmark_group("check");
    group.sample_size(20);
    group.bench_function("simulate_100k", |b| {
        b.iter(|| {
            simulate_auction(
                &env,
                &mech,
                &SimConfig {
                    draws: 100_000,
                    seed: black_box(1),
                },
            )
        })
    });
    let types = env.type_grid(201);
    let bids = default_bid_grid(&mech.curve, 401);
    group.bench_function("upe_201x401", |b| {
        b.iter(|| upe_check(&env, &p, &mech, &types, &bids))
    });
    group.finish();
}

criterion_group!(benches, bid_curves, optimizers, revenues, checks);
criterion_main!(benches);
