use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use irs_ofdm::channel::Grouping;
use irs_ofdm::numerics::dft;
use irs_ofdm::optimizer::{algorithm2, allocate_power, sa_init, sca_subproblem, waterfill, LinkModel};
use irs_ofdm::protocol::{ls_estimate, make_zc_pilot, simulate_training};
use irs_ofdm::rng::{stream, Purpose};
use irs_ofdm::{ChannelRealization, ScaSettings, SystemConfig, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(cfg: &SystemConfig) -> LinkModel {
    let real = ChannelRealization::generate(cfg, &mut stream(cfg.seed, 0, Purpose::Channel));
    let vp = real.grouped(&Grouping::from_config(cfg).unwrap());
    LinkModel::new(&real.h_d, &vp)
}

fn kernels(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x: Vec<C64> = (0..64).map(|_| C64::new(rng.random(), rng.random())).collect();
    c.bench_function("dft_64", |b| b.iter(|| dft(black_box(&x))));

    let cnr: Vec<f64> = (0..64).map(|_| -rng.random::<f64>().ln()).collect();
    c.bench_function("waterfill_64", |b| b.iter(|| waterfill(black_box(&cnr), 64.0).unwrap()));

    let cfg = SystemConfig::default();
    let model = instance(&cfg);
    let init = sa_init(
        model.h_d(),
        model.vp(),
        cfg.i_sa,
        &mut stream(cfg.seed, 0, Purpose::SaInit),
    );
    let p = allocate_power(&model, init.as_slice(), &cfg).unwrap().p;
    let settings = ScaSettings::default();
    c.bench_function("sca_subproblem_m20", |b| {
        b.iter(|| sca_subproblem(black_box(init.as_slice()), &p, &model, cfg.noise_floor(), &settings))
    });
    c.bench_function("algorithm2_m20", |b| {
        b.iter(|| algorithm2(&model, &cfg, black_box(&init), &settings).unwrap())
    });

    let grouped = SystemConfig {
        m_x: 10,
        m_y: 10,
        b_x: 2,
        b_y: 2,
        ..SystemConfig::default()
    };
    let model = instance(&grouped);
    let pilot = make_zc_pilot(grouped.n, grouped.pilot_power(), grouped.zc_root);
    let received = simulate_training(model.h_d(), model.vp(), &pilot, grouped.sigma2, &mut rng);
    c.bench_function("ls_estimate_k25", |b| {
        b.iter(|| ls_estimate(black_box(&received), &pilot, grouped.l, grouped.l0()).unwrap())
    });
}

criterion_group!(benches, kernels);
criterion_main!(benches);
