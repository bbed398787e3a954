use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dampflow::dynamics::{Integrator, Scheme, State};
use dampflow::greens::assemble_symbol;
use dampflow::spectral::{Grid, RealField, Spectral};

fn gaussian_state(grid: Grid) -> State {
    let half = 0.5 * grid.length();
    let bump = move |x: [f64; 3]| 0.1 * (-0.03 * (0..3).map(|j| (x[j] - half).powi(2)).sum::<f64>()).exp();
    let a = RealField::from_fn(grid, 1, |_, x| bump(x));
    let u = RealField::from_fn(grid, 3, |c, x| bump(x) * (1.0 + c as f64));
    State::new(a, u, 0.0, 1.0).unwrap()
}

/// `(label, pool)` pairs: one worker against every available core.
#[cfg(feature = "parallel")]
fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let all = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut sizes = vec![1];
    if all > 1 {
        sizes.push(all);
    }
    sizes
        .into_iter()
        .map(|n| (format!("{n}-thread"), rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()))
        .collect()
}

fn each_pool(mut f: impl FnMut(&str, &dyn Fn(&mut (dyn FnMut() + Send)))) {
    #[cfg(feature = "parallel")]
    for (label, pool) in pools() {
        f(&label, &|work: &mut (dyn FnMut() + Send)| pool.install(work));
    }
    #[cfg(not(feature = "parallel"))]
    f("sequential", &|work: &mut (dyn FnMut() + Send)| work());
}

fn pipeline(c: &mut Criterion) {
    let grid = Grid::new(3, 64, 200.0).unwrap();
    let sp = Spectral::new(grid);
    let state = gaussian_state(grid);
    let spec = state.to_spectral(&sp).unwrap();
    let integ = Integrator::new(&sp, Scheme::StrangExponential, 0.02, true, false).unwrap();

    let mut group = c.benchmark_group("64^3");
    group.sample_size(10);
    each_pool(|label, install| {
        group.bench_function(BenchmarkId::new("forward_fft", label), |b| {
            b.iter(|| install(&mut || drop(black_box(sp.forward(state.u()).unwrap()))))
        });
        group.bench_function(BenchmarkId::new("nonlinear_rhs", label), |b| {
            b.iter(|| install(&mut || drop(black_box(integ.nonlinear(&spec)))))
        });
        group.bench_function(BenchmarkId::new("assemble_symbol", label), |b| {
            b.iter(|| install(&mut || drop(black_box(assemble_symbol(1.0, &sp).unwrap()))))
        });
        group.bench_function(BenchmarkId::new("strang_step", label), |b| {
            b.iter(|| install(&mut || drop(black_box(integ.step(&spec)))))
        });
    });
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
