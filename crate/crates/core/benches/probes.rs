use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use divlab_core::divergences::ParamPoint;
use divlab_core::exec::ExecMode;
use divlab_core::lab::{
    probe_dpi, probe_joint, run_sweep, Axis, Direction, DpiConfig, GridSpec, JointFunctional,
    ProbeConfig, SweepConfig,
};
use std::hint::black_box;

const MODES: [(&str, ExecMode); 2] = [
    ("sequential", ExecMode::Sequential),
    ("parallel", ExecMode::Parallel),
];

fn joint(c: &mut Criterion) {
    let mut group = c.benchmark_group("probe_joint");
    group.sample_size(10);
    let pt = ParamPoint::new(1.5, -0.5, 1.0);
    for dim in [2, 4] {
        for (name, mode) in MODES {
            let cfg = ProbeConfig {
                dim,
                samples: 400,
                seed: 7,
                mode,
                ..ProbeConfig::default()
            };
            group.bench_with_input(BenchmarkId::new(name, dim), &cfg, |b, cfg| {
                b.iter(|| {
                    black_box(
                        probe_joint(JointFunctional::psi(pt), Direction::Convex, cfg).unwrap(),
                    )
                })
            });
        }
    }
    group.finish();
}

fn dpi(c: &mut Criterion) {
    let mut group = c.benchmark_group("probe_dpi");
    group.sample_size(10);
    for (name, mode) in MODES {
        let cfg = DpiConfig {
            dim: 2,
            channels: 20,
            state_pairs: 20,
            seed: 3,
            mode,
        };
        group.bench_function(name, |b| {
            b.iter(|| black_box(probe_dpi(0.7, 1.3, &cfg).unwrap()))
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_sweep");
    group.sample_size(10);
    let grid = GridSpec::Pqs {
        p: Axis {
            start: -1.0,
            end: 2.0,
            step: 0.5,
        },
        q: Axis {
            start: -1.0,
            end: 1.0,
            step: 0.5,
        },
        s: Axis::single(1.0),
    };
    for (name, mode) in MODES {
        let cfg = SweepConfig {
            grid: grid.clone(),
            samples: 50,
            seed: 11,
            mode,
            ..SweepConfig::default()
        };
        group.bench_function(name, |b| b.iter(|| black_box(run_sweep(&cfg).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, joint, dpi, sweep);
criterion_main!(benches);
