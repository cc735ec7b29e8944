use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use thiserror::Error;

use super::{OsmDocument, OsmNode, OsmWay, Tags};
use crate::geo::{BoundingBox, GeoPoint};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("XML error at byte {position}: {reason}")]
pub struct XmlError {
    pub position: u64,
    pub reason: String,
}

enum Open {
    Node(OsmNode),
    Way(OsmWay),
    Root,
    /// Anything else, including relations; its children are skipped.
    Other,
}

pub fn parse_osm_xml(bytes: &[u8]) -> Result<OsmDocument, XmlError> {
    let mut reader = Reader::from_reader(bytes);
    reader.config_mut().trim_text(true);
    let mut doc = OsmDocument::default();
    let mut stack: Vec<Open> = Vec::new();
    let mut buf = Vec::new();

    loop {
        let position = reader.buffer_position();
        let err = |reason: String| XmlError { position, reason };
        let event = reader.read_event_into(&mut buf).map_err(|e| err(e.to_string()))?;
        match event {
            Event::Start(e) => {
                let open = open_element(&e, &mut doc, stack.last_mut()).map_err(err)?;
                stack.push(open);
            }
            Event::Empty(e) => {
                let open = open_element(&e, &mut doc, stack.last_mut()).map_err(err)?;
                close_element(open, &mut doc).map_err(err)?;
            }
            Event::End(_) => {
                let open = stack.pop().ok_or_else(|| err("unbalanced end tag".into()))?;
                close_element(open, &mut doc).map_err(err)?;
            }
            Event::Eof => {
                if !stack.is_empty() {
                    return Err(err("unexpected end of document".into()));
                }
                break;
            }
            _ => {}
        }
        buf.clear();
    }
    Ok(doc)
}

fn attrs(e: &BytesStart<'_>) -> Result<Vec<(String, String)>, String> {
    e.attributes()
        .map(|a| {
            let a = a.map_err(|e| e.to_string())?;
            let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
            let value = a.unescape_value().map_err(|e| e.to_string())?.into_owned();
            Ok((key, value))
        })
        .collect()
}

fn attr<'a>(list: &'a [(String, String)], key: &str) -> Option<&'a str> {
    list.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn num<T: std::str::FromStr>(list: &[(String, String)], key: &str, element: &str) -> Result<T, String> {
    let v = attr(list, key).ok_or_else(|| format!("<{element}> without {key}"))?;
    v.parse().map_err(|_| format!("<{element}> has invalid {key} {v:?}"))
}

fn open_element(e: &BytesStart<'_>, doc: &mut OsmDocument, parent: Option<&mut Open>) -> Result<Open, String> {
    let name = e.name();
    let name = name.as_ref();
    if matches!(parent, Some(Open::Other)) {
        return Ok(Open::Other);
    }
    Ok(match name {
        b"node" => {
            let a = attrs(e)?;
            let point = GeoPoint::new(num(&a, "lat", "node")?, num(&a, "lon", "node")?);
            if !point.is_valid() {
                return Err(format!("node coordinates ({}, {}) out of range", point.lat, point.lon));
            }
            Open::Node(OsmNode {
                id: num(&a, "id", "node")?,
                point,
                tags: Tags::new(),
            })
        }
        b"way" => {
            let a = attrs(e)?;
            Open::Way(OsmWay {
                id: num(&a, "id", "way")?,
                node_refs: Vec::new(),
                tags: Tags::new(),
            })
        }
        b"nd" => {
            if let Some(Open::Way(way)) = parent {
                way.node_refs.push(num(&attrs(e)?, "ref", "nd")?);
            }
            Open::Other
        }
        b"tag" => {
            let a = attrs(e)?;
            let (k, v) = (attr(&a, "k"), attr(&a, "v"));
            if let (Some(k), Some(v)) = (k, v) {
                match parent {
                    Some(Open::Node(n)) => {
                        n.tags.insert(k.to_owned(), v.to_owned());
                    }
                    Some(Open::Way(w)) => {
                        w.tags.insert(k.to_owned(), v.to_owned());
                    }
                    _ => {}
                }
            }
            Open::Other
        }
        b"bounds" => {
            let a = attrs(e)?;
            doc.bounds = Some(BoundingBox {
                min_lat: num(&a, "minlat", "bounds")?,
                min_lon: num(&a, "minlon", "bounds")?,
                max_lat: num(&a, "maxlat", "bounds")?,
                max_lon: num(&a, "maxlon", "bounds")?,
            });
            Open::Other
        }
        b"osm" if parent.is_none() => Open::Root,
        _ => Open::Other,
    })
}

fn close_element(open: Open, doc: &mut OsmDocument) -> Result<(), String> {
    match open {
        Open::Node(n) => {
            if doc.nodes.insert(n.id, n).is_some() {
                return Err("duplicate node id".into());
            }
        }
        Open::Way(w) => doc.ways.push(w),
        Open::Root | Open::Other => {}
    }
    Ok(())
}
