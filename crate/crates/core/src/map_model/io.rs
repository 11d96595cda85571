//! JSON map documents.
//!
//! ```json
//! {"frame": "ego", "pose": {"rotation": [w, x, y, z], "translation": [x, y, z]},
//!  "elements": [{"id": "a", "label": "divider", "is_main": false, "points": [[0, 0], [1, 0]]}]}
//! ```

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Frame, Label, MapElement, VectorMap};
use crate::error::{Error, Result};
use crate::geometry::{Point2, Polyline, Pose, Quaternion};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapDoc {
    frame: Frame,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pose: Option<PoseDoc>,
    elements: Vec<ElementDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseDoc {
    rotation: [f64; 4],
    translation: [f64; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementDoc {
    id: String,
    label: String,
    #[serde(default)]
    is_main: bool,
    points: Vec<[f64; 2]>,
}

/// Parses a map document, validating every invariant.
pub fn map_from_json(text: &str) -> Result<VectorMap> {
    let doc: MapDoc = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;

    let pose = match doc.pose {
        Some(p) => {
            let [w, x, y, z] = p.rotation;
            Some(
                Pose::new(Quaternion::new(w, x, y, z), p.translation)
                    .map_err(|e| Error::parse("pose", e.to_string()))?,
            )
        }
        None if doc.frame == Frame::Ego => {
            return Err(Error::parse("pose", "ego-frame map requires a pose"));
        }
        None => None,
    };

    let mut seen = HashSet::new();
    let mut elements = Vec::with_capacity(doc.elements.len());
    for el in doc.elements {
        let at = |field: &str| format!("element '{}' field '{field}'", el.id);
        let label: Label = el
            .label
            .parse()
            .map_err(|_| Error::parse(at("label"), format!("unknown label \"{}\"", el.label)))?;
        if !seen.insert(el.id.clone()) {
            return Err(Error::parse(at("id"), "duplicate element id"));
        }
        let element = MapElement {
            polyline: Polyline::new(el.points.iter().map(|&p| Point2::from(p)).collect()),
            id: el.id.clone(),
            label,
            is_main: el.is_main,
        };
        element
            .validate()
            .map_err(|e| Error::parse(at("points"), strip_prefix(e)))?;
        elements.push(element);
    }

    Ok(VectorMap {
        elements,
        frame: doc.frame,
        pose,
    })
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::InvalidInput(msg) => msg,
        other => other.to_string(),
    }
}

/// Serializes a map as a pretty-printed document with a trailing newline.
pub fn map_to_json(map: &VectorMap) -> String {
    let doc = MapDoc {
        frame: map.frame,
        pose: map.pose.map(|p| PoseDoc {
            rotation: [p.rotation.w, p.rotation.x, p.rotation.y, p.rotation.z],
            translation: p.translation,
        }),
        elements: map
            .elements
            .iter()
            .map(|e| ElementDoc {
                id: e.id.clone(),
                label: e.label.as_str().to_string(),
                is_main: e.is_main,
                points: e.polyline.points().iter().map(|p| [p.x, p.y]).collect(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("map document serializes");
    text.push('\n');
    text
}

pub fn load_map(path: impl AsRef<Path>) -> Result<VectorMap> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    map_from_json(&text)
}

pub fn save_map(map: &VectorMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, map_to_json(map)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
