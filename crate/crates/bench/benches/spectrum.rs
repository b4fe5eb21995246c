use criterion::{criterion_group, criterion_main, Criterion};
use lhsl_core::{
    find_modes, phase_diagram_from_modes, renormalize_discrete, supercell_abcd, Band, HybridLineSpec,
    PhaseDiagramOptions, QubitSpec, RenormOptions, ScanOptions,
};
use std::hint::black_box;

fn bench_abcd(c: &mut Criterion) {
    let spec = HybridLineSpec::with_defaults(2.0, 200).unwrap();
    let w = 0.35 * spec.sl.omega_sl();
    c.bench_function("supercell_abcd", |b| b.iter(|| supercell_abcd(black_box(&spec.sl), black_box(w))));
}

fn bench_modes(c: &mut Criterion) {
    let spec = HybridLineSpec::with_defaults(2.0, 200).unwrap();
    let opts = ScanOptions::default();
    let mut group = c.benchmark_group("find_modes");
    group.sample_size(10);
    group.bench_function("band1_n200", |b| b.iter(|| find_modes(black_box(&spec), Band::Band1, &opts)));
    group.finish();
}

fn mode_list() -> (HybridLineSpec, Vec<f64>) {
    let spec = HybridLineSpec::with_defaults(2.0, 200).unwrap();
    let mut freqs: Vec<f64> = lhsl_core::find_all_modes(&spec, &ScanOptions::default())
        .unwrap()
        .modes
        .iter()
        .map(|m| m.omega)
        .collect();
    freqs.sort_by(f64::total_cmp);
    (spec, freqs)
}

fn bench_renormalize(c: &mut Criterion) {
    let (spec, freqs) = mode_list();
    let wsl = spec.sl.omega_sl();
    let edges = spec.edges();
    let q = QubitSpec::new(wsl, 0.045 * wsl).unwrap();
    let opts = RenormOptions::default();
    c.bench_function("renormalize_discrete", |b| {
        b.iter(|| renormalize_discrete(black_box(&freqs), &q, &edges, &opts))
    });

    let d0: Vec<f64> = (0..8).map(|i| (0.5 + 0.125 * i as f64) * wsl).collect();
    let g: Vec<f64> = (0..40).map(|j| 0.0025 * j as f64 * wsl).collect();
    let pd = PhaseDiagramOptions::default();
    let mut group = c.benchmark_group("phase_diagram");
    group.sample_size(10);
    group.bench_function("8x40", |b| {
        b.iter(|| phase_diagram_from_modes(black_box(&freqs), &edges, wsl, &d0, &g, &pd))
    });
    group.finish();
}

criterion_group!(benches, bench_abcd, bench_modes, bench_renormalize);
criterion_main!(benches);
