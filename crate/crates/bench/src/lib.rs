//! Workloads shared by the benchmarks.

use mmtp_core::synth::tuesday;
use mmtp_core::{GtfsTime, MultimodalGraph, PlanRequest};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Vertex-to-vertex transit requests departing between 07:00 and 09:00.
pub fn plan_requests(graph: &MultimodalGraph, n: usize, seed: u64) -> Vec<PlanRequest> {
    let mut rng = StdRng::seed_from_u64(seed);
    let vertices = &graph.street.vertices;
    (0..n)
        .map(|_| {
            let o = vertices[rng.random_range(0..vertices.len())].point;
            let d = vertices[rng.random_range(0..vertices.len())].point;
            PlanRequest::new(o, d, tuesday(), GtfsTime(rng.random_range(7 * 3600..9 * 3600)))
        })
        .collect()
}
