//! Synthetic map instances: a ground-truth map seen from a sequence of ego
//! poses, cropped to the sensor window, with element dropout and Gaussian
//! vertex noise.
//!
//! Instance `k` draws from a ChaCha8 stream seeded with `seed ^ k`, so the
//! output is a pure function of the ground truth, poses and configuration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{is_simple_polygon, signed_area, BoundingBox, Point2, Polyline, Pose};
use crate::map_model::{Label, MapElement, VectorMap};
use crate::quad_merger::min_rotated_rect;

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    /// Per-coordinate vertex noise standard deviation, meters.
    pub sigma: f64,
    /// Per-element omission probability in `[0, 1)`.
    pub dropout: f64,
    /// Crop window `(width, height)` in meters: width across the ego y axis,
    /// height along the ego x (driving) axis.
    pub window: (f64, f64),
    pub n_instances: usize,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            sigma: 0.2,
            dropout: 0.0,
            window: (30.0, 60.0),
            n_instances: 15,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidInput(format!(
                "sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        if !(self.dropout >= 0.0 && self.dropout < 1.0) {
            return Err(Error::InvalidInput(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout
            )));
        }
        if !(self.window.0 > 0.0 && self.window.1 > 0.0) {
            return Err(Error::InvalidInput(
                "window extents must be positive".into(),
            ));
        }
        if self.n_instances == 0 {
            return Err(Error::InvalidInput("need at least one instance".into()));
        }
        Ok(())
    }
}

/// Liang–Barsky clip of segment `[p, q]` to `|x| <= hx, |y| <= hy`.
fn clip_segment(p: Point2, q: Point2, hx: f64, hy: f64) -> Option<(f64, f64)> {
    let d = q - p;
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (den, num) in [
        (-d.x, p.x + hx),
        (d.x, hx - p.x),
        (-d.y, p.y + hy),
        (d.y, hy - p.y),
    ] {
        if den == 0.0 {
            if num < 0.0 {
                return None;
            }
        } else {
            let r = num / den;
            if den < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// Splits a polyline into the pieces that lie inside the window. Pieces with
/// fewer than two distinct vertices are discarded.
pub fn clip_polyline(polyline: &Polyline, hx: f64, hy: f64) -> Vec<Polyline> {
    let mut pieces = Vec::new();
    let mut run: Vec<Point2> = Vec::new();
    let finish = |run: &mut Vec<Point2>, pieces: &mut Vec<Polyline>| {
        run.dedup();
        if run.len() >= 2 {
            pieces.push(Polyline::new(std::mem::take(run)));
        }
        run.clear();
    };
    for (p, q) in polyline.segments() {
        match clip_segment(p, q, hx, hy) {
            Some((t0, t1)) => {
                let inside = |t: f64| {
                    if t == 0.0 {
                        p
                    } else if t == 1.0 {
                        q
                    } else {
                        p + (q - p) * t
                    }
                };
                if run.is_empty() {
                    run.push(inside(t0));
                }
                run.push(inside(t1));
                if t1 < 1.0 {
                    finish(&mut run, &mut pieces);
                }
            }
            None => finish(&mut run, &mut pieces),
        }
    }
    finish(&mut run, &mut pieces);
    pieces
}

/// Sutherland–Hodgman clip of a closed ring to the window.
pub fn clip_polygon(ring: &[Point2], hx: f64, hy: f64) -> Vec<Point2> {
    // each edge: inside test value f(p) >= 0
    let edges: [fn(Point2, f64, f64) -> f64; 4] = [
        |p, hx, _| p.x + hx,
        |p, hx, _| hx - p.x,
        |p, _, hy| p.y + hy,
        |p, _, hy| hy - p.y,
    ];
    let mut poly = ring.to_vec();
    for f in edges {
        if poly.is_empty() {
            break;
        }
        let input = std::mem::take(&mut poly);
        for i in 0..input.len() {
            let cur = input[i];
            let prev = input[(i + input.len() - 1) % input.len()];
            let (fc, fp) = (f(cur, hx, hy), f(prev, hx, hy));
            if fc >= 0.0 {
                if fp < 0.0 {
                    poly.push(prev + (cur - prev) * (fp / (fp - fc)));
                }
                poly.push(cur);
            } else if fp >= 0.0 {
                poly.push(prev + (cur - prev) * (fp / (fp - fc)));
            }
        }
    }
    poly.dedup();
    if poly.len() > 1 && poly.first() == poly.last() {
        poly.pop();
    }
    poly
}

fn inside_window(p: Point2, hx: f64, hy: f64) -> bool {
    p.x.abs() <= hx && p.y.abs() <= hy
}

/// The noise-free view of `gt` from `pose`: expressed in the ego frame and
/// cropped to the window. Open polylines are split where they leave the
/// window; partly visible crossings are clipped and refit to a rectangle.
pub fn crop_to_window(gt: &VectorMap, pose: &Pose, window: (f64, f64)) -> Result<VectorMap> {
    gt.require_world("crop_to_window")?;
    let pose = Pose::new(pose.rotation, pose.translation)?;
    let to_ego = pose.inverse();
    let (hx, hy) = (window.1 * 0.5, window.0 * 0.5);
    let mut elements = Vec::new();
    for e in &gt.elements {
        let local = Polyline::new(
            e.polyline
                .points()
                .iter()
                .map(|&p| to_ego.apply(p))
                .collect(),
        );
        if e.label.is_closed() {
            let pts = local.points();
            let quad = if pts.iter().all(|&p| inside_window(p, hx, hy)) {
                Some(local.clone())
            } else {
                let clipped = clip_polygon(pts, hx, hy);
                if clipped.len() >= 3 && signed_area(&clipped).abs() > 1e-9 {
                    min_rotated_rect(&clipped).ok()
                } else {
                    None
                }
            };
            if let Some(q) = quad {
                elements.push(MapElement::new(e.id.clone(), e.label, q, false));
            }
        } else {
            let pieces = clip_polyline(&local, hx, hy);
            let split = pieces.len() > 1;
            for (k, piece) in pieces.into_iter().enumerate() {
                let id = if split {
                    format!("{}.{k}", e.id)
                } else {
                    e.id.clone()
                };
                elements.push(MapElement::new(id, e.label, piece, false));
            }
        }
    }
    Ok(VectorMap::ego(elements, pose))
}

fn reorder_around_centroid(pts: &mut [Point2]) {
    let n = pts.len() as f64;
    let c = pts.iter().fold(Point2::default(), |acc, &p| acc + p) * (1.0 / n);
    pts.sort_by(|a, b| {
        let aa = (a.y - c.y).atan2(a.x - c.x);
        let bb = (b.y - c.y).atan2(b.x - c.x);
        aa.total_cmp(&bb)
    });
}

fn perturb(view: VectorMap, cfg: &NoiseConfig, rng: &mut ChaCha8Rng) -> VectorMap {
    let noise = (cfg.sigma > 0.0).then(|| Normal::new(0.0, cfg.sigma).expect("finite sigma"));
    let pose = view.pose;
    let mut elements = Vec::with_capacity(view.elements.len());
    for mut e in view.elements {
        let dropped = cfg.dropout > 0.0 && rng.gen::<f64>() < cfg.dropout;
        if let Some(noise) = &noise {
            for p in e.polyline.points_mut() {
                p.x += noise.sample(rng);
                p.y += noise.sample(rng);
            }
        }
        if dropped {
            continue;
        }
        if e.label == Label::PedCrossing && !is_simple_polygon(e.polyline.points()) {
            reorder_around_centroid(e.polyline.points_mut());
            if !is_simple_polygon(e.polyline.points()) {
                continue;
            }
        }
        elements.push(e);
    }
    VectorMap {
        elements,
        frame: view.frame,
        pose,
    }
}

/// Generates one ego-frame instance per pose.
pub fn generate_instances(
    gt: &VectorMap,
    poses: &[Pose],
    cfg: &NoiseConfig,
) -> Result<Vec<VectorMap>> {
    cfg.validate()?;
    if poses.is_empty() {
        return Err(Error::InvalidInput(
            "no poses to generate instances from".into(),
        ));
    }
    poses
        .iter()
        .enumerate()
        .map(|(k, pose)| {
            let view = crop_to_window(gt, pose, cfg.window)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ k as u64);
            Ok(perturb(view, cfg, &mut rng))
        })
        .collect()
}

/// `n` evenly spaced poses along the longer axis of the map's bounding box,
/// through its center, heading along that axis.
pub fn pose_path(gt: &VectorMap, n: usize) -> Result<Vec<Pose>> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one pose".into()));
    }
    let bbox = gt
        .elements
        .iter()
        .filter_map(|e| e.polyline.bounding_box())
        .reduce(BoundingBox::union)
        .ok_or_else(|| Error::InvalidInput("map has no elements".into()))?;
    let center = Point2::new(
        (bbox.min.x + bbox.max.x) * 0.5,
        (bbox.min.y + bbox.max.y) * 0.5,
    );
    let (start, end, yaw) = if bbox.width() >= bbox.height() {
        (
            Point2::new(bbox.min.x, center.y),
            Point2::new(bbox.max.x, center.y),
            0.0,
        )
    } else {
        (
            Point2::new(center.x, bbox.min.y),
            Point2::new(center.x, bbox.max.y),
            std::f64::consts::FRAC_PI_2,
        )
    };
    Ok((0..n)
        .map(|k| {
            let t = if n == 1 {
                0.5
            } else {
                k as f64 / (n - 1) as f64
            };
            let p = start + (end - start) * t;
            Pose::from_yaw(p.x, p.y, yaw)
        })
        .collect())
}

#[derive(Serialize)]
struct ManifestEntry {
    instance: String,
    rotation: [f64; 4],
    translation: [f64; 3],
}

#[derive(Serialize)]
struct Manifest {
    seed: u64,
    sigma: f64,
    dropout: f64,
    window: [f64; 2],
    poses: Vec<ManifestEntry>,
}

/// File name of instance `k`.
pub fn instance_file_name(k: usize) -> String {
    format!("instance_{k}.json")
}

/// The `poses.json` manifest listing every instance file with its pose.
pub fn poses_manifest_json(poses: &[Pose], cfg: &NoiseConfig) -> String {
    let manifest = Manifest {
        seed: cfg.seed,
        sigma: cfg.sigma,
        dropout: cfg.dropout,
        window: [cfg.window.0, cfg.window.1],
        poses: poses
            .iter()
            .enumerate()
            .map(|(k, p)| ManifestEntry {
                instance: instance_file_name(k),
                rotation: [p.rotation.w, p.rotation.x, p.rotation.y, p.rotation.z],
                translation: p.translation,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    text
}

/// A straight multi-lane road along +x from `x = 0` to `x = length`:
/// boundaries at `y = ±7`, dividers at `y = -3.5, 0, 3.5`, and a crossing
/// 4 m wide spanning the carriageway at a quarter and three quarters of the
/// length. Polyline vertices are spaced `spacing` meters apart.
pub fn road_scene(length: f64, spacing: f64) -> VectorMap {
    let steps = (length / spacing).ceil().max(1.0) as usize;
    let line = |y: f64| {
        Polyline::new(
            (0..=steps)
                .map(|i| Point2::new((i as f64 * spacing).min(length), y))
                .collect(),
        )
    };
    let mut elements = vec![
        MapElement::new("boundary_left", Label::Boundary, line(7.0), false),
        MapElement::new("boundary_right", Label::Boundary, line(-7.0), false),
        MapElement::new("divider_left", Label::Divider, line(3.5), false),
        MapElement::new("divider_center", Label::Divider, line(0.0), false),
        MapElement::new("divider_right", Label::Divider, line(-3.5), false),
    ];
    for (k, frac) in [0.25, 0.75].into_iter().enumerate() {
        let x = length * frac;
        elements.push(MapElement::new(
            format!("crossing_{k}"),
            Label::PedCrossing,
            Polyline::from([
                (x - 2.0, -6.5),
                (x + 2.0, -6.5),
                (x + 2.0, 6.5),
                (x - 2.0, 6.5),
            ]),
            false,
        ));
    }
    VectorMap::world(elements)
}
