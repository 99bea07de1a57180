use criterion::{black_box, criterion_group, criterion_main, Criterion};
use disclab_core::bisect::{exhaustive_extremal_bisection, local_search_bisection, Direction};
use disclab_core::cutembed::greedy_expectation_embed;
use disclab_core::factors::{kk_factor_driver, solve_rho_lambda};
use disclab_core::oracle::oracle_max_disc;
use disclab_core::probkit::check_binomial_half;
use disclab_core::rational::q;
use disclab_core::switchembed::{certify_guest_regular, certify_host, main_switch_embed, SwitchParams};
use disclab_core::{bipartite_construction, random_coloring, random_regular_graph, Color, Graph};

fn bisection(c: &mut Criterion) {
    let f16 = random_regular_graph(16, 4, 1).unwrap();
    c.bench_function("exhaustive_bisection_n16", |b| b.iter(|| exhaustive_extremal_bisection(black_box(&f16), Direction::Max).unwrap()));
    let f200 = random_regular_graph(200, 6, 2).unwrap();
    c.bench_function("local_search_bisection_n200", |b| b.iter(|| local_search_bisection(black_box(&f200), Direction::Max, 400, 3).unwrap()));
}

fn embedding(c: &mut Criterion) {
    let col = random_coloring(60, 1, 2, 4).unwrap();
    let f = Graph::cycle(60);
    c.bench_function("greedy_expectation_n60", |b| b.iter(|| greedy_expectation_embed(black_box(&f), &col, Color::Red).unwrap()));
    let col8 = random_coloring(8, 1, 2, 5).unwrap();
    let f8 = Graph::cycle(8);
    c.bench_function("oracle_max_disc_n8", |b| b.iter(|| oracle_max_disc(black_box(&f8), &col8).unwrap()));
    let params = SwitchParams::default();
    let host = random_coloring(120, 1, 2, 6).unwrap();
    let guest = random_regular_graph(120, 4, 7).unwrap();
    let hc = certify_host(&host, &params.beta, 8).unwrap();
    let gc = certify_guest_regular(&guest, 9).unwrap();
    c.bench_function("main_switch_n120", |b| b.iter(|| main_switch_embed(black_box(&guest), &gc, &host, &hc, &params, 10).unwrap()));
}

fn factors(c: &mut Criterion) {
    c.bench_function("rho_lambda_k2_to_10", |b| b.iter(|| (2..=10).map(|k| solve_rho_lambda(black_box(k)).unwrap()).count()));
    let col = bipartite_construction(60, 1, 3).unwrap();
    c.bench_function("kk_driver_n60_k3", |b| b.iter(|| kk_factor_driver(black_box(&col), 3, &q(1, 10), 0).unwrap()));
}

fn probability(c: &mut Criterion) {
    c.bench_function("binomial_half_n500", |b| b.iter(|| check_binomial_half(black_box(500))));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bisection, embedding, factors, probability
}
criterion_main!(benches);
