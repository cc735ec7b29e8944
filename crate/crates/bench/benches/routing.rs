use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use mmtp_bench::plan_requests;
use mmtp_core::graph::BuildOptions;
use mmtp_core::router::plan;
use mmtp_core::synth::{grid_city, grid_city_graph, minimetro_feed, minimetro_osm};
use mmtp_core::{build_graph, build_graph_from_osm, deserialize_graph, serialize_graph, RoutingProfile};

fn grid_plan(c: &mut Criterion) {
    let graph = grid_city_graph();
    let requests = plan_requests(&graph, 64, 7);
    let profile = RoutingProfile::default();
    let mut i = 0;
    c.bench_function("plan/grid_city", |b| {
        b.iter(|| {
            i = (i + 1) % requests.len();
            plan(&graph, &requests[i], &profile, None).ok()
        })
    });
    let mut single = requests.clone();
    for r in &mut single {
        r.num_itineraries = 1;
    }
    c.bench_function("plan/grid_city/one_itinerary", |b| {
        b.iter(|| {
            i = (i + 1) % single.len();
            plan(&graph, &single[i], &profile, None).ok()
        })
    });
}

fn build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build");
    group.sample_size(10);
    group.bench_function("grid_city", |b| {
        b.iter_batched(
            grid_city,
            |(street, feed)| build_graph(street, &feed).unwrap(),
            BatchSize::LargeInput,
        )
    });
    let (osm, feed) = (minimetro_osm(), minimetro_feed());
    group.bench_function("minimetro", |b| {
        b.iter(|| build_graph_from_osm(&osm, &feed, &BuildOptions::default()).unwrap())
    });
    let bytes = serialize_graph(&grid_city_graph());
    group.bench_function("load/grid_city", |b| b.iter(|| deserialize_graph(&bytes).unwrap()));
    group.finish();
}

criterion_group!(benches, grid_plan, build);
criterion_main!(benches);
