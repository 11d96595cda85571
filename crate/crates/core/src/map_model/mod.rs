//! The vector-map data model: labeled elements, maps tagged with their frame,
//! and concatenation of a main map with secondary instances.

mod io;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{is_simple_polygon, transform_to_world, Polyline, Pose};

pub use io::{load_map, map_from_json, map_to_json, save_map};

/// Road element class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    /// Closed quadrilateral, stored as four open vertices.
    PedCrossing,
    Divider,
    Boundary,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::PedCrossing, Label::Divider, Label::Boundary];

    pub fn as_str(&self) -> &'static str {
        match self {
            Label::PedCrossing => "ped_crossing",
            Label::Divider => "divider",
            Label::Boundary => "boundary",
        }
    }

    /// Whether elements of this class are closed quadrilaterals.
    pub fn is_closed(&self) -> bool {
        matches!(self, Label::PedCrossing)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ped_crossing" => Ok(Label::PedCrossing),
            "divider" => Ok(Label::Divider),
            "boundary" => Ok(Label::Boundary),
            other => Err(Error::InvalidInput(format!("unknown label \"{other}\""))),
        }
    }
}

/// Coordinate frame a map is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Ego,
    World,
}

/// One labeled map element.
#[derive(Debug, Clone, PartialEq)]
pub struct MapElement {
    pub id: String,
    pub label: Label,
    pub polyline: Polyline,
    /// Set for elements that came from the main (accumulated) map.
    pub is_main: bool,
}

impl MapElement {
    pub fn new(id: impl Into<String>, label: Label, polyline: Polyline, is_main: bool) -> Self {
        MapElement {
            id: id.into(),
            label,
            polyline,
            is_main,
        }
    }

    /// Checks the per-element invariants, reporting the first violation.
    pub fn validate(&self) -> Result<()> {
        let pts = self.polyline.points();
        if pts.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "element '{}': polyline has {} vertices, need at least 2",
                self.id,
                pts.len()
            )));
        }
        if let Some(i) = pts.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "element '{}': vertex {i} is not finite",
                self.id
            )));
        }
        if self.label.is_closed() {
            if pts.len() != 4 {
                return Err(Error::InvalidInput(format!(
                    "element '{}': ped_crossing needs exactly 4 vertices, got {}",
                    self.id,
                    pts.len()
                )));
            }
            if !is_simple_polygon(pts) {
                return Err(Error::InvalidInput(format!(
                    "element '{}': ped_crossing is not a simple quadrilateral",
                    self.id
                )));
            }
        }
        Ok(())
    }

    /// Geometry used for proximity and distance tests: the closed ring for
    /// quadrilaterals, the polyline itself otherwise.
    pub fn outline(&self) -> Polyline {
        if self.label.is_closed() {
            self.polyline.closed()
        } else {
            self.polyline.clone()
        }
    }
}

/// A set of map elements in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorMap {
    pub elements: Vec<MapElement>,
    pub frame: Frame,
    /// Ego→world pose; required for ego-frame maps.
    pub pose: Option<Pose>,
}

impl VectorMap {
    pub fn world(elements: Vec<MapElement>) -> Self {
        VectorMap {
            elements,
            frame: Frame::World,
            pose: None,
        }
    }

    pub fn ego(elements: Vec<MapElement>, pose: Pose) -> Self {
        VectorMap {
            elements,
            frame: Frame::Ego,
            pose: Some(pose),
        }
    }

    pub fn empty_world() -> Self {
        VectorMap::world(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&MapElement> {
        self.elements.iter().find(|e| e.id == id)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame == Frame::Ego && self.pose.is_none() {
            return Err(Error::InvalidInput("ego-frame map has no pose".into()));
        }
        let mut seen = HashSet::new();
        for e in &self.elements {
            e.validate()?;
            if !seen.insert(e.id.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "duplicate element id '{}'",
                    e.id
                )));
            }
        }
        Ok(())
    }

    /// The same map expressed in the world frame.
    pub fn to_world(&self) -> Result<VectorMap> {
        match self.frame {
            Frame::World => Ok(VectorMap::world(self.elements.clone())),
            Frame::Ego => {
                let pose = self
                    .pose
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("ego-frame map has no pose".into()))?;
                let elements = self
                    .elements
                    .iter()
                    .map(|e| {
                        Ok(MapElement {
                            polyline: transform_to_world(&e.polyline, pose)?,
                            ..e.clone()
                        })
                    })
                    .collect::<Result<_>>()?;
                Ok(VectorMap::world(elements))
            }
        }
    }

    pub(crate) fn require_world(&self, what: &str) -> Result<()> {
        if self.frame != Frame::World {
            return Err(Error::InvalidInput(format!(
                "{what} requires a world-frame map"
            )));
        }
        Ok(())
    }
}

/// Brings every map into the world frame and concatenates them.
///
/// Elements of `main` are flagged `is_main`, all others are not. Ids become
/// `"<source-index>:<original-id>"` with `main` as source 0 and the
/// secondaries numbered from 1.
pub fn concatenate(main: &VectorMap, secondaries: &[VectorMap]) -> Result<VectorMap> {
    let mut elements =
        Vec::with_capacity(main.len() + secondaries.iter().map(VectorMap::len).sum::<usize>());
    for (source, map) in std::iter::once(main).chain(secondaries).enumerate() {
        let world = map.to_world()?;
        elements.extend(world.elements.into_iter().map(|e| MapElement {
            id: format!("{source}:{}", e.id),
            is_main: source == 0,
            ..e
        }));
    }
    Ok(VectorMap::world(elements))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    fn line(id: &str, label: Label, pts: &[(f64, f64)]) -> MapElement {
        MapElement::new(id, label, Polyline::from(pts), false)
    }

    fn map_of(n: usize, prefix: &str) -> VectorMap {
        VectorMap::world(
            (0..n)
                .map(|i| {
                    line(
                        &format!("{prefix}{i}"),
                        Label::Divider,
                        &[(i as f64, 0.0), (i as f64, 1.0)],
                    )
                })
                .collect(),
        )
    }

    #[test]
    fn concatenate_counts_and_flags() {
        let main = map_of(3, "m");
        let secondaries = [map_of(2, "s"), map_of(2, "s")];
        let conc = concatenate(&main, &secondaries).unwrap();
        assert_eq!(conc.len(), 7);
        assert_eq!(conc.elements.iter().filter(|e| e.is_main).count(), 3);
        assert_eq!(conc.frame, Frame::World);
        conc.validate().unwrap();
        assert_eq!(conc.elements[3].id, "1:s0");
        assert_eq!(conc.elements[5].id, "2:s0");
    }

    #[test]
    fn concatenate_bootstrap() {
        let conc = concatenate(&VectorMap::empty_world(), &[map_of(2, "s")]).unwrap();
        assert_eq!(conc.len(), 2);
        assert!(conc.elements.iter().all(|e| !e.is_main));
    }

    #[test]
    fn concatenate_transforms_ego_maps() {
        let ego = VectorMap::ego(
            vec![line("a", Label::Boundary, &[(1.0, 0.0), (2.0, 0.0)])],
            Pose::from_yaw(5.0, 5.0, std::f64::consts::FRAC_PI_2),
        );
        let conc = concatenate(&VectorMap::empty_world(), &[ego]).unwrap();
        let pts = conc.elements[0].polyline.points();
        // rotation matrix [[0,-1],[1,0]]
        assert!(pts[0].distance(Point2::new(5.0, 6.0)) < 1e-12);
        assert!(pts[1].distance(Point2::new(5.0, 7.0)) < 1e-12);
    }

    #[test]
    fn ego_without_pose_is_rejected() {
        let bad = VectorMap {
            elements: vec![],
            frame: Frame::Ego,
            pose: None,
        };
        assert!(concatenate(&VectorMap::empty_world(), std::slice::from_ref(&bad)).is_err());
        assert!(bad.validate().is_err());
    }

    #[test]
    fn crossing_invariants() {
        let good = line(
            "c",
            Label::PedCrossing,
            &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
        );
        good.validate().unwrap();
        let triangle = line(
            "t",
            Label::PedCrossing,
            &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)],
        );
        assert!(triangle.validate().is_err());
        let bowtie = line(
            "b",
            Label::PedCrossing,
            &[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)],
        );
        assert!(bowtie.validate().is_err());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut m = map_of(2, "x");
        m.elements[1].id = "x0".into();
        assert!(m.validate().is_err());
    }

    #[test]
    fn label_parse() {
        assert_eq!("divider".parse::<Label>().unwrap(), Label::Divider);
        assert!("lane".parse::<Label>().is_err());
    }
}
