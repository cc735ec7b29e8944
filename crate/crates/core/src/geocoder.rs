//! Place-name lookup over named OSM nodes and ways.

use serde::{Deserialize, Serialize};

use crate::geo::GeoPoint;
use crate::osm::{OsmDocument, Tags};

pub const DEFAULT_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaceSource {
    Node(i64),
    Way(i64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceEntry {
    pub name: String,
    pub point: GeoPoint,
    pub source: PlaceSource,
    /// `key=value` of the first categorizing tag, e.g. `amenity=townhall`.
    pub kind: String,
}

#[derive(Debug, Clone, Default)]
pub struct GeocodeIndex {
    entries: Vec<PlaceEntry>,
    normalized: Vec<String>,
}

/// Case-folds and collapses runs of whitespace to one space.
pub fn normalize_name(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

const KIND_KEYS: [&str; 8] = ["amenity", "shop", "tourism", "leisure", "railway", "place", "building", "highway"];

fn kind_of(tags: &Tags) -> String {
    KIND_KEYS
        .iter()
        .find_map(|k| tags.get(*k).map(|v| format!("{k}={v}")))
        .unwrap_or_else(|| "place".to_owned())
}

fn name_of(tags: &Tags) -> Option<&str> {
    tags.get("name").map(|n| n.trim()).filter(|n| !n.is_empty())
}

/// One entry per named node or way; ways sit at the mean of their resolved
/// node coordinates.
pub fn build_place_index(doc: &OsmDocument) -> GeocodeIndex {
    let mut entries = Vec::new();
    for node in doc.nodes.values() {
        if let Some(name) = name_of(&node.tags) {
            entries.push(PlaceEntry {
                name: name.to_owned(),
                point: node.point,
                source: PlaceSource::Node(node.id),
                kind: kind_of(&node.tags),
            });
        }
    }
    for way in &doc.ways {
        let Some(name) = name_of(&way.tags) else {
            continue;
        };
        let points: Vec<GeoPoint> = doc.resolved_points(way).collect();
        if points.is_empty() {
            continue;
        }
        let n = points.len() as f64;
        let lat = points.iter().map(|p| p.lat).sum::<f64>() / n;
        let lon = points.iter().map(|p| p.lon).sum::<f64>() / n;
        entries.push(PlaceEntry {
            name: name.to_owned(),
            point: GeoPoint::new(lat, lon),
            source: PlaceSource::Way(way.id),
            kind: kind_of(&way.tags),
        });
    }
    GeocodeIndex::new(entries)
}

impl GeocodeIndex {
    pub fn new(entries: Vec<PlaceEntry>) -> Self {
        let normalized = entries.iter().map(|e| normalize_name(&e.name)).collect();
        Self { entries, normalized }
    }

    pub fn entries(&self) -> &[PlaceEntry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<PlaceEntry> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact matches, then prefix, then substring; shorter names first
    /// within a tier, then lexicographic.
    pub fn search(&self, query: &str, limit: usize) -> Vec<&PlaceEntry> {
        let q = normalize_name(query);
        if q.is_empty() || limit == 0 {
            return Vec::new();
        }
        let mut hits: Vec<(u8, usize, &str, usize)> = self
            .normalized
            .iter()
            .enumerate()
            .filter_map(|(i, name)| {
                let tier = if *name == q {
                    0
                } else if name.starts_with(&q) {
                    1
                } else if name.contains(&q) {
                    2
                } else {
                    return None;
                };
                Some((tier, name.chars().count(), name.as_str(), i))
            })
            .collect();
        hits.sort_by(|a, b| {
            (a.0, a.1, a.2)
                .cmp(&(b.0, b.1, b.2))
                .then_with(|| self.entries[a.3].name.cmp(&self.entries[b.3].name))
                .then_with(|| self.entries[a.3].source.cmp(&self.entries[b.3].source))
        });
        hits.into_iter().take(limit).map(|h| &self.entries[h.3]).collect()
    }
}

pub fn geocode<'a>(index: &'a GeocodeIndex, query: &str, limit: usize) -> Vec<&'a PlaceEntry> {
    index.search(query, limit)
}
