//! Fusion of overlapping vector HD-map instances into one global map.
//!
//! The pipeline brings every instance into the world frame, links same-label
//! elements that come within a proximity threshold of each other, and merges
//! each connected chain: open polylines by projecting their vertices onto a
//! base polyline, pedestrian crossings through a blurred coverage grid and a
//! minimum-area rectangle. [`metrics`] holds the curve-similarity measures
//! used to score a map against ground truth, and [`synth`] produces noisy
//! instances from a known map for end-to-end testing.
//!
//! ```
//! use polymerge::{merge_maps, Label, MapElement, MergeConfig, Polyline, VectorMap};
//!
//! let main = VectorMap::world(vec![MapElement::new(
//!     "lane", Label::Divider, Polyline::from([(0.0, 0.0), (10.0, 0.0)]), true,
//! )]);
//! let seen = VectorMap::world(vec![MapElement::new(
//!     "obs", Label::Divider, Polyline::from([(5.0, 0.2), (15.0, 0.2)]), false,
//! )]);
//! let merged = merge_maps(&main, &[seen], &MergeConfig::default()).unwrap();
//! assert_eq!(merged.len(), 1);
//! assert!(merged.elements[0].polyline.last().unwrap().x > 14.0);
//! ```

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod map_model;
pub mod metrics;
pub mod polyline_merger;
pub mod proximity_graph;
pub mod quad_merger;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{
    project_point_to_polyline, project_point_to_segment, transform_to_world, Point2, Polyline,
    Pose, Projection, Quaternion,
};
pub use map_model::{concatenate, load_map, save_map, Frame, Label, MapElement, VectorMap};
pub use metrics::{discrete_frechet, evaluate_map, match_elements, pcm, EvalReport};
pub use polyline_merger::{
    merge_chain, merge_maps, merge_maps_with_report, merge_point, merge_polyline, smooth,
    ExtensionPoint, ExtensionRule, MergeConfig, MergeReport,
};
pub use proximity_graph::{build_graph, merge_chains, polyline_merge_check, ProximityGraph};
pub use quad_merger::{
    blur_coverage, merge_quads, min_rotated_rect, rasterize_coverage, threshold_region,
    CoverageGrid,
};
pub use synth::{generate_instances, NoiseConfig};
