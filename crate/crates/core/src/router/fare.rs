use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Itinerary, LegKind};
use crate::graph::MultimodalGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FareRule {
    pub base_fare: f64,
    pub per_km: f64,
}

/// Fare rules keyed by GTFS route_type. Route types without a rule ride free.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FareConfig(pub BTreeMap<u16, FareRule>);

impl FareConfig {
    pub fn with_rule(mut self, route_type: u16, base_fare: f64, per_km: f64) -> Self {
        self.0.insert(route_type, FareRule { base_fare, per_km });
        self
    }

    pub fn leg_fare(&self, route_type: u16, distance_m: f64) -> f64 {
        self.0
            .get(&route_type)
            .map_or(0.0, |r| r.base_fare + r.per_km * (distance_m / 1000.0))
    }
}

/// Sum over transit legs of `base + per_km * km` for the leg's route type.
pub fn estimate_fare(itinerary: &Itinerary, config: &FareConfig, graph: &MultimodalGraph) -> f64 {
    itinerary
        .legs
        .iter()
        .filter(|l| l.kind == LegKind::Transit)
        .filter_map(|l| {
            let route = graph.route(l.route_id.as_deref()?)?;
            Some(config.leg_fare(route.route_type, l.distance_m))
        })
        .sum()
}
