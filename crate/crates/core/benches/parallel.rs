//! Data-parallel kernels on the default pool against a single worker.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use entire_julia::construction::{build_schedule, cardioid_c, smallest_valid_r, Params};
use entire_julia::dimension::{squared_distance_transform, whitney_decompose};
use entire_julia::exec;
use entire_julia::grid::{PixelGrid, Window};
use entire_julia::quadratic::{filled_julia_mask, julia_points_iim};
use entire_julia::render::render_fates;
use num_complex::Complex64;

fn modes() -> [(&'static str, usize); 2] {
    [("parallel", 0), ("sequential", 1)]
}

fn fates(c: &mut Criterion) {
    let mu = Complex64::new(0.5, 0.0);
    let r = smallest_valid_r(cardioid_c(mu).unwrap(), 3).unwrap();
    let s = build_schedule(&Params::exploratory(mu, 3, r, 4).unwrap()).unwrap();
    let l1 = s.log_r(1);
    let w = Window::annulus(l1.add_f64(-4f64.ln()), l1.add_f64(4f64.ln()));
    let mut g = c.benchmark_group("render_fates_256");
    g.sample_size(10);
    for (name, threads) in modes() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exec::with_threads(threads, || render_fates(&s, w, 256, 256, 32).unwrap()))
        });
    }
    g.finish();
}

fn mask(c: &mut Criterion) {
    let mut g = c.benchmark_group("filled_julia_mask_512");
    g.sample_size(10);
    for (name, threads) in modes() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                exec::with_threads(threads, || {
                    filled_julia_mask(
                        Complex64::new(0.24, 0.0),
                        Window::square(2.0),
                        512,
                        512,
                        200,
                    )
                    .unwrap()
                })
            })
        });
    }
    g.finish();
}

fn iim(c: &mut Criterion) {
    let mut g = c.benchmark_group("julia_points_iim_1e5");
    g.sample_size(10);
    for (name, threads) in modes() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                exec::with_threads(threads, || {
                    julia_points_iim(Complex64::new(0.24, 0.0), 100_000, 1).unwrap()
                })
            })
        });
    }
    g.finish();
}

fn whitney(c: &mut Criterion) {
    let n = 1024;
    let mut m = PixelGrid::new(Window::square(0.5), n, n).unwrap();
    for x in n / 4..3 * n / 4 {
        m.set(x, n / 2, 1);
    }
    let mut g = c.benchmark_group("whitney_1024");
    g.sample_size(10);
    for (name, threads) in modes() {
        g.bench_function(BenchmarkId::new("distance_transform", name), |b| {
            b.iter(|| exec::with_threads(threads, || squared_distance_transform(&m)))
        });
        g.bench_function(BenchmarkId::new("decompose", name), |b| {
            b.iter(|| exec::with_threads(threads, || whitney_decompose(&m, 10).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, fates, mask, iim, whitney);
criterion_main!(benches);
