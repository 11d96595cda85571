//! Planar primitives, point-to-segment projection and the ego→world frame
//! transform.
//!
//! Everything here is a pure function of its arguments.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Segments shorter than this are treated as a single point.
pub const DEGENERATE_SEGMENT: f64 = 1e-12;

/// Quaternions whose norm is within this distance of 1 are silently
/// normalized; anything further off is rejected.
pub const UNIT_QUATERNION_TOLERANCE: f64 = 1e-6;

/// A point in a planar metric frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z component of the 3D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        Point2::new((self.x + other.x) * 0.5, (self.y + other.y) * 0.5)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2::new(x, y)
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2::new(x, y)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point2,
    pub max: Point2,
}

impl BoundingBox {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point2>) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = *iter.next()?;
        let mut bb = BoundingBox {
            min: first,
            max: first,
        };
        for p in iter {
            bb.min.x = bb.min.x.min(p.x);
            bb.min.y = bb.min.y.min(p.y);
            bb.max.x = bb.max.x.max(p.x);
            bb.max.y = bb.max.y.max(p.y);
        }
        Some(bb)
    }

    pub fn union(self, other: BoundingBox) -> BoundingBox {
        BoundingBox {
            min: Point2::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Point2::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }

    /// Euclidean gap between the two boxes; zero when they overlap. A lower
    /// bound on the distance between any point of one box and any of the other.
    pub fn gap(self, other: BoundingBox) -> f64 {
        let dx = (other.min.x - self.max.x)
            .max(self.min.x - other.max.x)
            .max(0.0);
        let dy = (other.min.y - self.max.y)
            .max(self.min.y - other.max.y)
            .max(0.0);
        (dx * dx + dy * dy).sqrt()
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// An ordered vertex sequence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polyline(Vec<Point2>);

impl Polyline {
    pub fn new(points: Vec<Point2>) -> Self {
        Polyline(points)
    }

    pub fn points(&self) -> &[Point2] {
        &self.0
    }

    pub fn points_mut(&mut self) -> &mut Vec<Point2> {
        &mut self.0
    }

    pub fn into_points(self) -> Vec<Point2> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Point2> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Point2> {
        self.0.last().copied()
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn arc_length(&self) -> f64 {
        self.segments().map(|(a, b)| a.distance(b)).sum()
    }

    pub fn reversed(&self) -> Polyline {
        Polyline(self.0.iter().rev().copied().collect())
    }

    /// The polyline with its first vertex repeated at the end.
    pub fn closed(&self) -> Polyline {
        let mut pts = self.0.clone();
        if let Some(&first) = pts.first() {
            pts.push(first);
        }
        Polyline(pts)
    }

    pub fn bounding_box(&self) -> Option<BoundingBox> {
        BoundingBox::from_points(&self.0)
    }

    pub fn translated(&self, offset: Point2) -> Polyline {
        Polyline(self.0.iter().map(|&p| p + offset).collect())
    }
}

impl From<Vec<Point2>> for Polyline {
    fn from(points: Vec<Point2>) -> Self {
        Polyline(points)
    }
}

impl<P: Into<Point2> + Copy> From<&[P]> for Polyline {
    fn from(points: &[P]) -> Self {
        Polyline(points.iter().map(|&p| p.into()).collect())
    }
}

impl<P: Into<Point2> + Copy, const N: usize> From<[P; N]> for Polyline {
    fn from(points: [P; N]) -> Self {
        Polyline(points.iter().map(|&p| p.into()).collect())
    }
}

/// Closest point of a segment (or polyline) to a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// The clamped foot point on the segment.
    pub point: Point2,
    /// Index of the segment `[v[i], v[i+1]]` the foot lies on.
    pub segment_index: usize,
    /// Clamped segment parameter in `[0, 1]`.
    pub t: f64,
    pub distance: f64,
}

/// Projects `a` onto the closed segment `[b, c]`.
///
/// The parameter is clamped to `[0, 1]`, so points beyond either end project
/// onto that endpoint. A segment shorter than [`DEGENERATE_SEGMENT`] projects
/// everything onto `b` with `t = 0`.
pub fn project_point_to_segment(a: Point2, b: Point2, c: Point2) -> Projection {
    let bc = c - b;
    let len_sq = bc.dot(bc);
    let t = if len_sq.sqrt() < DEGENERATE_SEGMENT {
        0.0
    } else {
        ((a - b).dot(bc) / len_sq).clamp(0.0, 1.0)
    };
    let point = if t == 0.0 {
        b
    } else if t == 1.0 {
        c
    } else {
        b + bc * t
    };
    Projection {
        point,
        segment_index: 0,
        t,
        distance: a.distance(point),
    }
}

/// Projects `a` onto the nearest segment of `polyline`. Ties go to the lowest
/// segment index.
pub fn project_point_to_polyline(a: Point2, polyline: &Polyline) -> Result<Projection> {
    if polyline.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "cannot project onto a polyline with {} vertices",
            polyline.len()
        )));
    }
    let mut best: Option<Projection> = None;
    for (i, (b, c)) in polyline.segments().enumerate() {
        let mut pr = project_point_to_segment(a, b, c);
        pr.segment_index = i;
        if best.is_none_or(|cur| pr.distance < cur.distance) {
            best = Some(pr);
        }
    }
    Ok(best.expect("at least one segment"))
}

/// Minimum distance from `a` to any segment of `polyline` (≥ 2 vertices).
pub(crate) fn distance_to_polyline(a: Point2, polyline: &Polyline) -> f64 {
    polyline
        .segments()
        .map(|(b, c)| project_point_to_segment(a, b, c).distance)
        .fold(f64::INFINITY, f64::min)
}

/// Foot of `a` on the infinite line through `b` and `c`, with its line
/// parameter. `None` if the segment is degenerate.
pub fn project_point_to_line(a: Point2, b: Point2, c: Point2) -> Option<(Point2, f64)> {
    let bc = c - b;
    let len_sq = bc.dot(bc);
    if len_sq.sqrt() < DEGENERATE_SEGMENT {
        return None;
    }
    let s = (a - b).dot(bc) / len_sq;
    Some((b + bc * s, s))
}

/// Quaternion `w + xi + yj + zk`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// Rotation by `yaw` radians about the z axis.
    pub fn from_yaw(yaw: f64) -> Self {
        let (s, c) = (yaw * 0.5).sin_cos();
        Quaternion::new(c, 0.0, 0.0, s)
    }

    pub fn pure(v: [f64; 3]) -> Self {
        Quaternion::new(0.0, v[0], v[1], v[2])
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn conjugate(&self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Multiplicative inverse; equals the conjugate for unit quaternions.
    pub fn inverse(&self) -> Self {
        let n2 = self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z;
        let c = self.conjugate();
        Quaternion::new(c.w / n2, c.x / n2, c.y / n2, c.z / n2)
    }

    /// Hamilton product `self * rhs`.
    pub fn hamilton(&self, rhs: &Quaternion) -> Quaternion {
        let (a1, b1, c1, d1) = (self.w, self.x, self.y, self.z);
        let (a2, b2, c2, d2) = (rhs.w, rhs.x, rhs.y, rhs.z);
        Quaternion::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }

    /// `q v q⁻¹` for a 3-vector `v`.
    pub fn rotate(&self, v: [f64; 3]) -> [f64; 3] {
        let r = self
            .hamilton(&Quaternion::pure(v))
            .hamilton(&self.inverse());
        [r.x, r.y, r.z]
    }

    /// Rescales to unit norm, rejecting quaternions that are not already
    /// within [`UNIT_QUATERNION_TOLERANCE`] of unit length.
    pub fn normalized(&self) -> Result<Quaternion> {
        let n = self.norm();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_QUATERNION_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "rotation quaternion has norm {n}, expected 1"
            )));
        }
        Ok(Quaternion::new(
            self.w / n,
            self.x / n,
            self.y / n,
            self.z / n,
        ))
    }
}

/// Rigid ego→world pose: rotation quaternion and translation in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Quaternion,
    pub translation: [f64; 3],
}

impl Pose {
    /// Builds a pose, normalizing the rotation.
    pub fn new(rotation: Quaternion, translation: [f64; 3]) -> Result<Self> {
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("pose translation is not finite".into()));
        }
        Ok(Pose {
            rotation: rotation.normalized()?,
            translation,
        })
    }

    pub fn identity() -> Self {
        Pose {
            rotation: Quaternion::IDENTITY,
            translation: [0.0; 3],
        }
    }

    /// Planar pose at `(x, y)` heading `yaw` radians.
    pub fn from_yaw(x: f64, y: f64, yaw: f64) -> Self {
        Pose {
            rotation: Quaternion::from_yaw(yaw),
            translation: [x, y, 0.0],
        }
    }

    /// The world→ego pose.
    pub fn inverse(&self) -> Pose {
        let q_inv = self.rotation.inverse();
        let t = q_inv.rotate(self.translation);
        Pose {
            rotation: q_inv,
            translation: [-t[0], -t[1], -t[2]],
        }
    }

    /// Applies the pose to one planar point. The point is lifted to z = 0 and
    /// the rotated z component is dropped.
    pub fn apply(&self, p: Point2) -> Point2 {
        let r = self.rotation.rotate([p.x, p.y, 0.0]);
        Point2::new(r[0] + self.translation[0], r[1] + self.translation[1])
    }
}

/// Maps every vertex through `pose` (`q ν q⁻¹ + T`).
pub fn transform_to_world(polyline: &Polyline, pose: &Pose) -> Result<Polyline> {
    let pose = Pose::new(pose.rotation, pose.translation)?;
    Ok(Polyline::new(
        polyline.points().iter().map(|&p| pose.apply(p)).collect(),
    ))
}

/// Signed area (positive for counter-clockwise rings). The ring is implicitly
/// closed.
pub fn signed_area(ring: &[Point2]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += ring[i].cross(ring[(i + 1) % n]);
    }
    acc * 0.5
}

/// Point-in-polygon test for an implicitly closed ring. Points on the
/// boundary count as inside.
pub fn point_in_polygon(p: Point2, ring: &[Point2]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        if on_segment(p, a, b) {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn on_segment(p: Point2, a: Point2, b: Point2) -> bool {
    const EPS: f64 = 1e-12;
    let ab = b - a;
    let ap = p - a;
    if ab.cross(ap).abs() > EPS * ab.norm().max(1.0) {
        return false;
    }
    let d = ap.dot(ab);
    d >= -EPS && d <= ab.dot(ab) + EPS
}

fn orientation(a: Point2, b: Point2, c: Point2) -> i8 {
    let v = (b - a).cross(c - a);
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Whether closed segments `[p1, p2]` and `[q1, q2]` share any point.
pub fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let o1 = orientation(p1, p2, q1);
    let o2 = orientation(p1, p2, q2);
    let o3 = orientation(q1, q2, p1);
    let o4 = orientation(q1, q2, p2);
    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && on_segment(q1, p1, p2))
        || (o2 == 0 && on_segment(q2, p1, p2))
        || (o3 == 0 && on_segment(p1, q1, q2))
        || (o4 == 0 && on_segment(p2, q1, q2))
}

/// True when the implicitly closed ring has distinct vertices, non-zero area
/// and no two non-adjacent edges touching.
pub fn is_simple_polygon(ring: &[Point2]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if ring[i] == ring[j] {
                return false;
            }
        }
    }
    if signed_area(ring).abs() <= 0.0 {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}
