use cait_bench::{lights, smart_home, writers};
use cait_core::models::Variant;
use cait_core::{build_lts, canonicalize, reductions, weak_bisimilar, weak_bisimilar_across, Mode};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

const BUDGET: usize = 200_000;

fn canonical_form(c: &mut Criterion) {
    let (u, net) = smart_home(Variant::Gps);
    // a handful of reachable states, not just the initial one
    let mut states = vec![canonicalize(&net)];
    for _ in 0..8 {
        let next = reductions(states.last().unwrap(), &u).unwrap();
        states.push(next[0].1.clone());
    }
    c.bench_function("canonicalize/smart_home_gps", |b| {
        b.iter(|| {
            for s in &states {
                black_box(canonicalize(black_box(s)));
            }
        })
    });
}

fn transition_systems(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_lts");
    group.sample_size(10);
    let (u, net) = smart_home(Variant::Proximity);
    group.bench_function("smart_home_proximity/intensional", |b| {
        b.iter(|| build_lts(&net, &u, Mode::Intensional, BUDGET).unwrap().num_states())
    });
    let (u, net) = lights(Variant::Gps);
    group.bench_function("lights_gps/extensional", |b| {
        b.iter(|| build_lts(&net, &u, Mode::Extensional, BUDGET).unwrap().num_states())
    });
    group.finish();
}

fn bisimulation(c: &mut Criterion) {
    let (u, split, seq) = writers();
    c.bench_function("bisim/writers", |b| {
        b.iter(|| weak_bisimilar(&split, &seq, &u, BUDGET).unwrap().is_bisimilar())
    });
    let (ul, l) = lights(Variant::Proximity);
    let (ur, r) = lights(Variant::Gps);
    let mut group = c.benchmark_group("bisim");
    group.sample_size(10);
    group.bench_function("lights", |b| {
        b.iter(|| weak_bisimilar_across(&l, &ul, &r, &ur, BUDGET).unwrap().is_bisimilar())
    });
    group.finish();
}

criterion_group!(benches, canonical_form, transition_systems, bisimulation);
criterion_main!(benches);
