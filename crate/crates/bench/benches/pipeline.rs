use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tempwave::analysis::fit_sinc_width;
use tempwave::apparatus::{filtered_reference, gate_convolve, projection_set};
use tempwave::config::RunConfig;
use tempwave::pipeline::run;
use tempwave::signal_prep::spectrum_to_temporal;

fn stages(c: &mut Criterion) {
    let cfg = RunConfig::default();
    let exp = cfg.experiment().unwrap();
    let spec = exp.state.spectrum(&exp.grid.conjugate()).unwrap();
    let env = spectrum_to_temporal(&spec);
    let reference = filtered_reference(&spec, &exp.filter).unwrap();
    let set = projection_set(&env, &reference).unwrap();

    c.bench_function("spectrum_to_temporal_4096", |b| {
        b.iter(|| spectrum_to_temporal(black_box(&spec)))
    });
    c.bench_function("filtered_reference_exact", |b| {
        b.iter(|| filtered_reference(black_box(&spec), &exp.filter).unwrap())
    });
    c.bench_function("gate_convolve_79fs", |b| {
        b.iter(|| gate_convolve(black_box(&set.d), &exp.gate).unwrap())
    });

    let r = run(&cfg).unwrap();
    let env = r.reconstruction.envelope();
    let mag = env.magnitude();
    c.bench_function("fit_sinc_width", |b| {
        b.iter(|| fit_sinc_width(env.grid(), black_box(&mag), Some(&r.reconstruction.mask.valid), None).unwrap())
    });
}

fn end_to_end(c: &mut Criterion) {
    let noiseless = RunConfig::default();
    let spl = RunConfig::parse("noise = spl").unwrap();
    c.bench_function("run_noiseless_slit", |b| b.iter(|| run(black_box(&noiseless)).unwrap()));
    c.bench_function("run_spl_slit", |b| b.iter(|| run(black_box(&spl)).unwrap()));
}

criterion_group!(benches, stages, end_to_end);
criterion_main!(benches);
