use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fkcorr::lattice::{build_box, BoundarySpec};
use fkcorr::model::{ModelGraph, ModelParams};
use fkcorr::rng::StreamKey;
use fkcorr::sampler::SwendsenWang;
use fkcorr::Exec;

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("swendsen_wang_sweep");
    group.sample_size(20);
    for side in [64.0, 256.0] {
        let domain = build_box(1.0, [[0.0, 0.0], [side - 1.0, side - 1.0]]).unwrap();
        let graph = ModelGraph::new(&domain, &BoundarySpec::free()).unwrap();
        let key = StreamKey::new(1, 0);
        for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
            let mut sw = SwendsenWang::new(&graph, ModelParams::critical(), exec);
            let mut t = 0;
            group.bench_with_input(BenchmarkId::new(name, side as usize), &side, |b, _| {
                b.iter(|| {
                    sw.sweep(&graph, &key, t, true);
                    t += 1;
                })
            });
        }
    }
    group.finish();
}

fn bonds(c: &mut Criterion) {
    let mut group = c.benchmark_group("bond_draw");
    group.sample_size(20);
    let domain = build_box(1.0, [[0.0, 0.0], [255.0, 255.0]]).unwrap();
    let graph = ModelGraph::new(&domain, &BoundarySpec::free()).unwrap();
    let key = StreamKey::new(2, 0);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        let mut sw = SwendsenWang::new(&graph, ModelParams::critical(), exec);
        let mut t = 0;
        group.bench_function(name, |b| {
            b.iter(|| {
                sw.draw_bonds(&graph, &key, t);
                t += 1;
            })
        });
    }
    group.finish();
}

criterion_group!(benches, sweeps, bonds);
criterion_main!(benches);
