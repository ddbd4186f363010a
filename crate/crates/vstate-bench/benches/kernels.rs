use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use vstate::exactnum::{find_b2p, RelElem};
use vstate::linearization::{lambda_2p, multiplier};
use vstate::reduction::{jet_symbolic, ls_solve, LsConfig};
use vstate::spectral::eval_g;
use vstate_bench::near_annulus_state;

fn bench_eval_g(c: &mut Criterion) {
    let mut group = c.benchmark_group("eval_g");
    for n in [16usize, 32, 64] {
        let m = LsConfig::with_n(n).m;
        let (lambda, state) = near_annulus_state(2, n, 1e-2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, _| {
            bch.iter(|| eval_g(black_box(lambda), black_box(&state), m).unwrap())
        });
    }
    group.finish();
}

fn bench_ls_solve(c: &mut Criterion) {
    let b = vstate::exactnum::b2p_f64(2);
    let lambda = (1.0 + b * b) / 2.0 + 1e-3;
    let cfg = LsConfig::default();
    c.bench_function("ls_solve/p2_t1e-2", |bch| {
        bch.iter(|| ls_solve(black_box(lambda), 1e-2, 0.05, 2, &cfg).unwrap())
    });
}

fn bench_symbolic(c: &mut Criterion) {
    let mut group = c.benchmark_group("jet_symbolic");
    group.sample_size(10);
    for (p, order) in [(2u32, 3u32), (3, 4)] {
        group.bench_with_input(BenchmarkId::new(format!("p{}", p), order), &order, |bch, &k| {
            bch.iter(|| jet_symbolic(p, k).unwrap())
        });
    }
    group.finish();
}

fn bench_multiplier_dets(c: &mut Criterion) {
    c.bench_function("multiplier_dets/p4_n50", |bch| {
        bch.iter(|| {
            let b = RelElem::b(4);
            let lam = lambda_2p(&b);
            (1..=50u32)
                .map(|n| multiplier(2 * n, &lam, &b).det())
                .collect::<Vec<_>>()
        })
    });
    c.bench_function("find_b2p/p3_256", |bch| bch.iter(|| find_b2p(black_box(3), 256)));
}

criterion_group!(benches, bench_eval_g, bench_ls_solve, bench_symbolic, bench_multiplier_dets);
criterion_main!(benches);
