//! OpenStreetMap XML ingestion and street-network extraction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geo::{BoundingBox, GeoPoint};

mod extract;
mod parse;

pub use extract::{extract_street_network, highway_permissions, ExtractError, StreetEdge, StreetNetwork, StreetVertex, VertexId};
pub use parse::{parse_osm_xml, XmlError};

pub type Tags = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OsmNode {
    pub id: i64,
    pub point: GeoPoint,
    pub tags: Tags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OsmWay {
    pub id: i64,
    pub node_refs: Vec<i64>,
    pub tags: Tags,
}

/// Nodes and ways of one extract. Relations are not retained.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OsmDocument {
    /// From the `<bounds>` element, when the file has one.
    pub bounds: Option<BoundingBox>,
    pub nodes: BTreeMap<i64, OsmNode>,
    /// Document order.
    pub ways: Vec<OsmWay>,
}

impl OsmDocument {
    /// `(way id, node id)` for every way reference with no matching node.
    pub fn dangling_refs(&self) -> Vec<(i64, i64)> {
        self.ways
            .iter()
            .flat_map(|w| w.node_refs.iter().map(move |r| (w.id, *r)))
            .filter(|(_, r)| !self.nodes.contains_key(r))
            .collect()
    }

    /// `<bounds>` when present, otherwise the extremes of all nodes.
    pub fn bbox(&self) -> Option<BoundingBox> {
        let from_nodes = BoundingBox::from_points(self.nodes.values().map(|n| n.point));
        match (self.bounds, from_nodes) {
            (Some(mut b), Some(n)) => {
                b.extend(GeoPoint::new(n.min_lat, n.min_lon));
                b.extend(GeoPoint::new(n.max_lat, n.max_lon));
                Some(b)
            }
            (b, n) => b.or(n),
        }
    }

    pub fn resolved_points<'a>(&'a self, way: &'a OsmWay) -> impl Iterator<Item = GeoPoint> + 'a {
        way.node_refs.iter().filter_map(|r| self.nodes.get(r).map(|n| n.point))
    }
}
