use std::collections::BTreeMap;
use std::fmt;

use log::{info, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{OsmDocument, OsmWay};
use crate::geo::{haversine_m, BoundingBox, GeoPoint};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtractError {
    #[error("no routable street edges in the extract")]
    EmptyNetwork,
}

/// Dense index into [`StreetNetwork::vertices`]. Vertices are numbered in
/// ascending OSM node id order, so comparing ids compares OSM ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreetVertex {
    pub osm_id: i64,
    pub point: GeoPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreetEdge {
    pub from_vertex: VertexId,
    pub to_vertex: VertexId,
    pub length_m: f64,
    pub way_id: i64,
    pub highway_class: String,
    pub walk_permitted: bool,
    pub drive_permitted: bool,
    /// Driving only from `from_vertex` to `to_vertex`. Walking is always
    /// bidirectional.
    pub oneway_drive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreetNetwork {
    pub vertices: Vec<StreetVertex>,
    pub edges: Vec<StreetEdge>,
    pub bbox: BoundingBox,
}

impl StreetNetwork {
    pub fn point(&self, v: VertexId) -> GeoPoint {
        self.vertices[v.index()].point
    }
}

/// `(walk, drive)` permissions for a `highway=*` value; `None` when the class
/// is not routable.
pub fn highway_permissions(class: &str) -> Option<(bool, bool)> {
    match class {
        "footway" | "path" | "pedestrian" | "steps" => Some((true, false)),
        "residential" | "unclassified" | "tertiary" | "secondary" | "primary" | "trunk" | "service" | "living_street" => Some((true, true)),
        "motorway" | "motorway_link" => Some((false, true)),
        _ => None,
    }
}

fn routable(way: &OsmWay) -> Option<(&str, bool, bool)> {
    let class = way.tags.get("highway")?;
    let (walk, drive) = highway_permissions(class)?;
    if way.tags.get("access").is_some_and(|v| v == "no") || way.tags.get("area").is_some_and(|v| v == "yes") {
        return None;
    }
    Some((class, walk, drive))
}

/// Builds the walk/drive street graph: one vertex per node on a routable
/// way, one edge per consecutive node pair.
pub fn extract_street_network(doc: &OsmDocument) -> Result<StreetNetwork, ExtractError> {
    let mut ways: Vec<&OsmWay> = doc.ways.iter().collect();
    ways.sort_by_key(|w| w.id);

    let mut used: BTreeMap<i64, u32> = BTreeMap::new();
    let mut kept = Vec::new();
    for way in ways {
        let Some((class, walk, drive)) = routable(way) else {
            continue;
        };
        let mut refs: Vec<i64> = Vec::with_capacity(way.node_refs.len());
        for r in &way.node_refs {
            if doc.nodes.contains_key(r) {
                refs.push(*r);
            } else {
                warn!("way {}: dropping dangling node ref {}", way.id, r);
            }
        }
        if refs.len() < 2 {
            info!("way {}: fewer than two resolvable nodes, skipped", way.id);
            continue;
        }
        let oneway = way.tags.get("oneway").map(String::as_str);
        if matches!(oneway, Some("-1" | "reverse")) {
            refs.reverse();
        }
        let oneway_drive = drive && matches!(oneway, Some("yes" | "true" | "1" | "-1" | "reverse"));
        for r in &refs {
            used.insert(*r, 0);
        }
        kept.push((way.id, class.to_owned(), walk, drive, oneway_drive, refs));
    }

    let vertices: Vec<StreetVertex> = used
        .iter_mut()
        .enumerate()
        .map(|(i, (osm_id, slot))| {
            *slot = i as u32;
            StreetVertex {
                osm_id: *osm_id,
                point: doc.nodes[osm_id].point,
            }
        })
        .collect();

    let mut edges = Vec::new();
    for (way_id, class, walk, drive, oneway_drive, refs) in kept {
        for pair in refs.windows(2) {
            let (a, b) = (VertexId(used[&pair[0]]), VertexId(used[&pair[1]]));
            let length_m = haversine_m(vertices[a.index()].point, vertices[b.index()].point);
            if length_m <= 0.0 {
                info!("way {way_id}: skipping zero-length segment {} -> {}", pair[0], pair[1]);
                continue;
            }
            edges.push(StreetEdge {
                from_vertex: a,
                to_vertex: b,
                length_m,
                way_id,
                highway_class: class.clone(),
                walk_permitted: walk,
                drive_permitted: drive,
                oneway_drive,
            });
        }
    }
    if edges.is_empty() {
        return Err(ExtractError::EmptyNetwork);
    }

    let mut bbox = doc.bbox().unwrap_or_else(|| BoundingBox::around(vertices[0].point));
    for v in &vertices {
        bbox.extend(v.point);
    }
    Ok(StreetNetwork { vertices, edges, bbox })
}
