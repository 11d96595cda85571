//! Merging of similar open polylines and the full map-merge pipeline.
//!
//! A source polyline is folded onto a base polyline vertex by vertex. Each
//! source vertex `A` is projected onto the current base; depending on where
//! the foot `B` lands, one of four things happens:
//!
//! 1. `B` is inside a segment: the midpoint of `A` and `B` is inserted there.
//! 2. `B` is a vertex: that vertex is replaced by the midpoint.
//! 3. `B` is the first vertex and `A` lies before it: a new first vertex is
//!    prepended.
//! 4. `B` is the last vertex and `A` lies past it: a new last vertex is
//!    appended.
//!
//! For 3 and 4 the new vertex is either the foot of `A` on the terminal line or
//! `A` itself, see [`ExtensionRule`]. With a positive span the terminal line
//! runs through the last `span` meters of the polyline instead of the last
//! segment, and 3 or 4 applies whenever `A` projects into that stretch and lies
//! beyond all of its vertices along the line. Short noisy end segments then
//! cannot turn an extension into an interior update that folds the polyline
//! back.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{project_point_to_line, project_point_to_polyline, Point2, Polyline};
use crate::map_model::{concatenate, Label, MapElement, VectorMap};
use crate::metrics::discrete_frechet;
use crate::proximity_graph::{self, merge_chains, ProximityGraph};
use crate::quad_merger::merge_quads;

/// Upper bound on merge passes in [`merge_maps`], the first included.
pub const MAX_MERGE_PASSES: usize = 3;

/// Which point extends a polyline past its ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionPoint {
    /// Foot of the source vertex on the terminal segment's supporting line.
    #[default]
    Foot,
    /// The source vertex itself.
    Source,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeConfig {
    /// Proximity threshold in meters.
    pub th_prox: f64,
    /// Per-label overrides of `th_prox`.
    pub th_prox_by_label: BTreeMap<Label, f64>,
    /// Coverage cut for quadrilateral merging, in `(0, 1)`.
    pub th_cov: f64,
    /// Coverage grid resolution in meters.
    pub cell_size: f64,
    pub blur_sigma_cells: f64,
    pub smoothing_enabled: bool,
    /// Odd window length, at least 3.
    pub smoothing_window: usize,
    /// Extension rule used by [`merge_chain`]. Defaults to appending the
    /// source vertex, with the terminal direction taken over 2 m.
    pub extension: ExtensionRule,
}

impl Default for MergeConfig {
    fn default() -> Self {
        MergeConfig {
            th_prox: 1.0,
            th_prox_by_label: BTreeMap::new(),
            th_cov: 0.5,
            cell_size: 0.1,
            blur_sigma_cells: 2.0,
            smoothing_enabled: false,
            smoothing_window: 5,
            extension: ExtensionRule {
                point: ExtensionPoint::Source,
                span: 2.0,
            },
        }
    }
}

impl MergeConfig {
    pub fn th_prox_for(&self, label: Label) -> f64 {
        self.th_prox_by_label
            .get(&label)
            .copied()
            .unwrap_or(self.th_prox)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidInput(what));
        if !(self.th_prox > 0.0) || self.th_prox_by_label.values().any(|&t| !(t > 0.0)) {
            return bad(format!("th_prox must be positive, got {}", self.th_prox));
        }
        if !(self.th_cov > 0.0 && self.th_cov < 1.0) {
            return bad(format!("th_cov must be in (0, 1), got {}", self.th_cov));
        }
        if !(self.cell_size > 0.0) {
            return bad(format!(
                "cell_size must be positive, got {}",
                self.cell_size
            ));
        }
        if !(self.blur_sigma_cells > 0.0) {
            return bad(format!(
                "blur sigma must be positive, got {}",
                self.blur_sigma_cells
            ));
        }
        if !(self.extension.span >= 0.0) {
            return bad(format!(
                "terminal span must be non-negative, got {}",
                self.extension.span
            ));
        }
        if self.smoothing_window < 3 || self.smoothing_window.is_multiple_of(2) {
            return bad(format!(
                "smoothing window must be odd and at least 3, got {}",
                self.smoothing_window
            ));
        }
        Ok(())
    }
}

/// The merge case applied to one source vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Insert,
    Replace,
    Prepend,
    Append,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ScenarioCounts {
    pub insert: usize,
    pub replace: usize,
    pub prepend: usize,
    pub append: usize,
}

impl ScenarioCounts {
    pub fn record(&mut self, s: Scenario) {
        match s {
            Scenario::Insert => self.insert += 1,
            Scenario::Replace => self.replace += 1,
            Scenario::Prepend => self.prepend += 1,
            Scenario::Append => self.append += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.insert + self.replace + self.prepend + self.append
    }
}

/// Merges one point into `base`, extending with the foot point on the
/// terminal segment.
pub fn merge_point(a: Point2, base: &Polyline) -> Result<Polyline> {
    merge_point_with(a, base, ExtensionRule::default()).map(|(p, _)| p)
}

/// How a polyline is extended past its ends.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ExtensionRule {
    pub point: ExtensionPoint,
    /// Arc length over which the terminal direction is measured. Zero means
    /// the terminal segment alone.
    pub span: f64,
}

/// Index of the vertex where the terminal stretch of at least `span` meters
/// ending at `pts[end]` begins, walking in steps of `step` (+1 or -1).
fn stretch_start(pts: &[Point2], end: usize, step: isize, span: f64) -> usize {
    let mut i = end;
    let mut len = 0.0;
    loop {
        let next = i as isize - step;
        if next < 0 || next as usize >= pts.len() {
            return i;
        }
        len += pts[i].distance(pts[next as usize]);
        i = next as usize;
        if len >= span {
            return i;
        }
    }
}

/// Extension vertex if `a` lies past the end of `stretch`, whose last vertex is
/// the polyline's end. With `strict` only the end vertex is compared (the
/// terminal-segment rule); otherwise `a` must lie beyond every vertex of the
/// stretch along its direction.
fn extension(a: Point2, stretch: &[Point2], point: ExtensionPoint, strict: bool) -> Option<Point2> {
    let (from, end) = (stretch[0], stretch[stretch.len() - 1]);
    let (foot, s) = project_point_to_line(a, from, end)?;
    if strict {
        if s <= 1.0 {
            return None;
        }
    } else {
        let dir = end - from;
        let along = a.dot(dir);
        if stretch.iter().any(|v| v.dot(dir) >= along) {
            return None;
        }
    }
    Some(match point {
        ExtensionPoint::Foot => foot,
        ExtensionPoint::Source => a,
    })
}

/// Merges one point into `base`, reporting which scenario applied.
pub fn merge_point_with(
    a: Point2,
    base: &Polyline,
    rule: ExtensionRule,
) -> Result<(Polyline, Scenario)> {
    let pr = project_point_to_polyline(a, base)?;
    let mut pts = base.points().to_vec();
    let n = pts.len();
    let k = pr.segment_index;

    let head = stretch_start(&pts, 0, -1, rule.span);
    let tail = stretch_start(&pts, n - 1, 1, rule.span);
    let at_head = if rule.span > 0.0 {
        k < head
    } else {
        k == 0 && pr.t == 0.0
    };
    let at_tail = if rule.span > 0.0 {
        k >= tail
    } else {
        k == n - 2 && pr.t == 1.0
    };
    let literal = rule.span == 0.0;
    if at_head {
        let stretch: Vec<Point2> = pts[..=head].iter().rev().copied().collect();
        if let Some(p) = extension(a, &stretch, rule.point, literal) {
            pts.insert(0, p);
            return Ok((Polyline::new(pts), Scenario::Prepend));
        }
    }
    if at_tail {
        if let Some(p) = extension(a, &pts[tail..], rule.point, literal) {
            pts.push(p);
            return Ok((Polyline::new(pts), Scenario::Append));
        }
    }

    let mid = a.midpoint(pr.point);
    if pr.t == 0.0 {
        pts[k] = mid;
        Ok((Polyline::new(pts), Scenario::Replace))
    } else if pr.t == 1.0 {
        pts[k + 1] = mid;
        Ok((Polyline::new(pts), Scenario::Replace))
    } else {
        pts.insert(k + 1, mid);
        Ok((Polyline::new(pts), Scenario::Insert))
    }
}

/// Folds every vertex of `source`, in order, into `base`.
pub fn merge_polyline(source: &Polyline, base: &Polyline) -> Result<Polyline> {
    let mut counts = ScenarioCounts::default();
    merge_polyline_with(source, base, ExtensionRule::default(), &mut counts)
}

pub fn merge_polyline_with(
    source: &Polyline,
    base: &Polyline,
    rule: ExtensionRule,
    counts: &mut ScenarioCounts,
) -> Result<Polyline> {
    if source.len() < 2 || base.len() < 2 {
        return Err(Error::InvalidInput(
            "merging needs polylines with at least 2 vertices".into(),
        ));
    }
    let mut merged = base.clone();
    for &a in source.points() {
        let (next, scenario) = merge_point_with(a, &merged, rule)?;
        counts.record(scenario);
        merged = next;
    }
    Ok(merged)
}

/// Centered moving average over `window` vertices. The window shrinks near
/// the ends so it stays centered; the endpoints never move.
pub fn smooth(p: &Polyline, window: usize) -> Result<Polyline> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "smoothing window must be odd and at least 3, got {window}"
        )));
    }
    let pts = p.points();
    let n = pts.len();
    let half = window / 2;
    let out = (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            if h == 0 {
                return pts[i];
            }
            let sum = pts[i - h..=i + h]
                .iter()
                .fold(Point2::default(), |acc, &q| acc + q);
            sum * (1.0 / (2 * h + 1) as f64)
        })
        .collect();
    Ok(Polyline::new(out))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberReport {
    pub id: String,
    /// Whether the member was reversed to match the base's direction.
    pub reversed: bool,
    pub scenarios: ScenarioCounts,
}

/// Result of merging one chain of open polylines.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainMerge {
    pub element: MapElement,
    /// Merged members in merge order, excluding the base.
    pub members: Vec<MemberReport>,
}

fn by_length_then_id(a: &(f64, &MapElement), b: &(f64, &MapElement)) -> std::cmp::Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.id.cmp(&b.1.id))
}

/// Merges a chain of same-label open polylines into one element.
///
/// The base is the main-map element (the longest one if there are several,
/// or the longest overall if there are none; ties go to the smaller id). The
/// other members are merged in order of decreasing arc length, each reversed
/// first if that brings it Fréchet-closer to the current base.
pub fn merge_chain(chain: &[MapElement], config: &MergeConfig) -> Result<ChainMerge> {
    if chain.len() < 2 {
        return Err(Error::InvalidInput(
            "a chain needs at least 2 elements".into(),
        ));
    }
    let label = chain[0].label;
    if chain.iter().any(|e| e.label != label) {
        return Err(Error::InvalidInput(
            "chain mixes labels; the proximity graph should never produce this".into(),
        ));
    }
    if label.is_closed() {
        return Err(Error::InvalidInput(
            "quadrilateral chains are merged with merge_quads".into(),
        ));
    }

    let mut ranked: Vec<(f64, &MapElement)> =
        chain.iter().map(|e| (e.polyline.arc_length(), e)).collect();
    ranked.sort_by(by_length_then_id);
    let base_pos = ranked.iter().position(|(_, e)| e.is_main).unwrap_or(0);
    let (_, base) = ranked.remove(base_pos);

    let mut merged = base.polyline.clone();
    let mut members = Vec::with_capacity(ranked.len());
    for (_, e) in ranked {
        let line = e.polyline.clone();
        let forward = discrete_frechet(&line, &merged)?;
        let reversed_line = line.reversed();
        let backward = discrete_frechet(&reversed_line, &merged)?;
        let reversed = backward < forward;
        let source = if reversed { &reversed_line } else { &line };
        let mut counts = ScenarioCounts::default();
        merged = merge_polyline_with(source, &merged, config.extension, &mut counts)?;
        members.push(MemberReport {
            id: e.id.clone(),
            reversed,
            scenarios: counts,
        });
    }
    if config.smoothing_enabled {
        merged = smooth(&merged, config.smoothing_window)?;
    }
    Ok(ChainMerge {
        element: MapElement::new(base.id.clone(), label, merged, true),
        members,
    })
}

/// What happened to one chain during [`merge_maps`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    /// 1-based merge pass.
    pub pass: usize,
    pub label: Label,
    pub output_id: String,
    /// Ids of every chain element as seen in that pass.
    pub chain: Vec<String>,
    pub members: Vec<MemberReport>,
    /// Quadrilateral merge fell back to the largest input.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct MergeReport {
    pub input_elements: usize,
    pub output_elements: usize,
    pub passes: usize,
    pub chains: Vec<ChainReport>,
}

impl MergeReport {
    pub fn fallbacks(&self) -> usize {
        self.chains.iter().filter(|c| c.fallback).count()
    }
}

fn merge_pass(
    map: &VectorMap,
    graph: &ProximityGraph,
    config: &MergeConfig,
    pass: usize,
    report: &mut MergeReport,
) -> Result<VectorMap> {
    let chains = merge_chains(graph);
    let mut chain_of: HashMap<usize, usize> = HashMap::new();
    for (c, chain) in chains.iter().enumerate() {
        for &i in &chain.indices {
            chain_of.insert(i, c);
        }
    }
    let mut merged: Vec<Option<MapElement>> = Vec::with_capacity(chains.len());
    for chain in &chains {
        let elements: Vec<MapElement> = chain
            .indices
            .iter()
            .map(|&i| map.elements[i].clone())
            .collect();
        let label = elements[0].label;
        let (element, members, fallback) = if label.is_closed() {
            let q = merge_quads(&elements, config)?;
            (q.element, Vec::new(), q.fallback)
        } else {
            let c = merge_chain(&elements, config)?;
            (c.element, c.members, false)
        };
        report.chains.push(ChainReport {
            pass,
            label,
            output_id: element.id.clone(),
            chain: chain.ids.clone(),
            members,
            fallback,
        });
        merged.push(Some(element));
    }

    // merged chains take the position of their first member
    let mut out = Vec::with_capacity(map.len());
    for (i, e) in map.elements.iter().enumerate() {
        match chain_of.get(&i) {
            Some(&c) => {
                if let Some(m) = merged[c].take() {
                    out.push(m);
                }
            }
            None => out.push(MapElement {
                is_main: true,
                ..e.clone()
            }),
        }
    }
    Ok(VectorMap::world(out))
}

/// Drops the `"<source>:"` prefix from ids that stay unique without it.
fn restore_ids(map: &mut VectorMap) {
    let stripped: Vec<Option<String>> = map
        .elements
        .iter()
        .map(|e| {
            e.id.split_once(':')
                .filter(|(src, _)| !src.is_empty() && src.bytes().all(|b| b.is_ascii_digit()))
                .map(|(_, rest)| rest.to_string())
        })
        .collect();
    let mut uses: HashMap<&str, usize> = HashMap::new();
    for (e, s) in map.elements.iter().zip(&stripped) {
        *uses.entry(s.as_deref().unwrap_or(&e.id)).or_default() += 1;
    }
    let new_ids: Vec<String> = map
        .elements
        .iter()
        .zip(&stripped)
        .map(|(e, s)| match s {
            Some(s) if uses[s.as_str()] == 1 => s.clone(),
            _ => e.id.clone(),
        })
        .collect();
    let unique: HashSet<&str> = new_ids.iter().map(String::as_str).collect();
    if unique.len() != new_ids.len() {
        return;
    }
    for (e, id) in map.elements.iter_mut().zip(new_ids) {
        e.id = id;
    }
}

/// Merges secondary maps into a main map. See [`merge_maps_with_report`].
pub fn merge_maps(
    main: &VectorMap,
    secondaries: &[VectorMap],
    config: &MergeConfig,
) -> Result<VectorMap> {
    merge_maps_with_report(main, secondaries, config).map(|(m, _)| m)
}

/// Concatenates the maps, builds the proximity graph, merges every chain and
/// passes isolated elements through. The merged map is then re-checked for
/// same-label pairs that became close; those are merged again, for at most
/// [`MAX_MERGE_PASSES`] passes in total. Every output element is main.
pub fn merge_maps_with_report(
    main: &VectorMap,
    secondaries: &[VectorMap],
    config: &MergeConfig,
) -> Result<(VectorMap, MergeReport)> {
    config.validate()?;
    main.validate()?;
    for s in secondaries {
        s.validate()?;
    }
    let conc = concatenate(main, secondaries)?;
    let mut report = MergeReport {
        input_elements: conc.len(),
        ..MergeReport::default()
    };
    let th = |label: Label| config.th_prox_for(label);

    let graph = proximity_graph::build_graph_by_label(&conc, th)?;
    let mut out = merge_pass(&conc, &graph, config, 1, &mut report)?;
    report.passes = 1;
    while report.passes < MAX_MERGE_PASSES {
        let graph = proximity_graph::build_graph_all_pairs(&out, th);
        if graph.edges.is_empty() {
            break;
        }
        report.passes += 1;
        out = merge_pass(&out, &graph, config, report.passes, &mut report)?;
    }
    restore_ids(&mut out);
    report.output_elements = out.len();
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pl(pts: &[(f64, f64)]) -> Polyline {
        Polyline::from(pts)
    }

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    const SOURCE: ExtensionRule = ExtensionRule {
        point: ExtensionPoint::Source,
        span: 0.0,
    };

    #[test]
    fn scenario_insert() {
        let (out, s) = merge_point_with(
            p(1.0, 1.0),
            &pl(&[(0.0, 0.0), (2.0, 0.0)]),
            ExtensionRule::default(),
        )
        .unwrap();
        assert_eq!(s, Scenario::Insert);
        assert_eq!(out, pl(&[(0.0, 0.0), (1.0, 0.5), (2.0, 0.0)]));
    }

    #[test]
    fn scenario_replace() {
        let base = pl(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let (out, s) = merge_point_with(p(1.0, 0.6), &base, ExtensionRule::default()).unwrap();
        assert_eq!(s, Scenario::Replace);
        assert_eq!(out, pl(&[(0.0, 0.0), (1.0, 0.3), (2.0, 0.0)]));
    }

    #[test]
    fn scenario_append_and_prepend() {
        let base = pl(&[(0.0, 0.0), (2.0, 0.0)]);
        let (out, s) = merge_point_with(p(3.0, 0.4), &base, ExtensionRule::default()).unwrap();
        assert_eq!(s, Scenario::Append);
        assert_eq!(out, pl(&[(0.0, 0.0), (2.0, 0.0), (3.0, 0.0)]));

        let (out, s) = merge_point_with(p(-1.0, 0.4), &base, ExtensionRule::default()).unwrap();
        assert_eq!(s, Scenario::Prepend);
        assert_eq!(out, pl(&[(-1.0, 0.0), (0.0, 0.0), (2.0, 0.0)]));

        let (out, _) = merge_point_with(p(3.0, 0.4), &base, SOURCE).unwrap();
        assert_eq!(out, pl(&[(0.0, 0.0), (2.0, 0.0), (3.0, 0.4)]));
    }

    #[test]
    fn endpoint_straight_above_is_replaced() {
        let base = pl(&[(0.0, 0.0), (2.0, 0.0)]);
        let (out, s) = merge_point_with(p(2.0, 0.4), &base, ExtensionRule::default()).unwrap();
        assert_eq!(s, Scenario::Replace);
        assert_eq!(out, pl(&[(0.0, 0.0), (2.0, 0.2)]));
    }

    #[test]
    fn short_sideways_end_segment() {
        let base = pl(&[(0.0, 0.0), (10.0, 0.0), (10.0, 0.3)]);
        let a = p(12.0, 0.0);

        // judged on the last segment alone, A is beside it, so the interior
        // vertex moves past the end
        let (out, s) = merge_point_with(a, &base, SOURCE).unwrap();
        assert_eq!(s, Scenario::Replace);
        assert_eq!(out, pl(&[(0.0, 0.0), (11.0, 0.0), (10.0, 0.3)]));

        let rule = ExtensionRule {
            point: ExtensionPoint::Source,
            span: 2.0,
        };
        let (out, s) = merge_point_with(a, &base, rule).unwrap();
        assert_eq!(s, Scenario::Append);
        assert_eq!(
            out,
            pl(&[(0.0, 0.0), (10.0, 0.0), (10.0, 0.3), (12.0, 0.0)])
        );

        let rule = ExtensionRule {
            point: ExtensionPoint::Foot,
            span: 2.0,
        };
        let (out, _) = merge_point_with(a, &base, rule).unwrap();
        let foot = out.last().unwrap();
        assert!((foot.y - 0.03 * foot.x).abs() < 1e-12);
    }

    #[test]
    fn span_rule_keeps_spec_cases() {
        let rule = MergeConfig::default().extension;
        let base = pl(&[(0.0, 0.0), (2.0, 0.0)]);
        let (_, s) = merge_point_with(p(1.0, 1.0), &base, rule).unwrap();
        assert_eq!(s, Scenario::Insert);
        let (out, s) = merge_point_with(p(2.0, 0.4), &base, rule).unwrap();
        assert_eq!(s, Scenario::Replace);
        assert_eq!(out, pl(&[(0.0, 0.0), (2.0, 0.2)]));
        let (_, s) = merge_point_with(p(-1.0, 0.4), &base, rule).unwrap();
        assert_eq!(s, Scenario::Prepend);

        let p3 = pl(&[(0.0, 0.0), (1.0, 0.5), (3.0, -1.0), (4.0, 0.0)]);
        let mut counts = ScenarioCounts::default();
        assert_eq!(
            merge_polyline_with(&p3, &p3, rule, &mut counts).unwrap(),
            p3
        );
    }

    #[test]
    fn duplicate_merge_is_identity() {
        let base = pl(&[(0.0, 0.0), (1.0, 0.5), (3.0, -1.0), (4.0, 0.0)]);
        assert_eq!(merge_polyline(&base, &base).unwrap(), base);
    }

    #[test]
    fn collinear_extension_grows_base() {
        let base = pl(&[(0.0, 0.0), (2.0, 0.0)]);
        let source = pl(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]);
        let out = merge_polyline(&source, &base).unwrap();
        assert_eq!(
            out,
            pl(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)])
        );
    }

    #[test]
    fn smoothing() {
        let straight = pl(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0), (4.0, 4.0)]);
        let s = smooth(&straight, 3).unwrap();
        for (a, b) in s.points().iter().zip(straight.points()) {
            assert!(a.distance(*b) < 1e-12);
        }

        let zigzag = pl(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 0.0)]);
        let s = smooth(&zigzag, 3).unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(s.first(), zigzag.first());
        assert_eq!(s.last(), zigzag.last());
        assert!(s.points()[1..4].iter().all(|q| q.y.abs() < 1.0));

        let wide = smooth(&zigzag, 7).unwrap();
        assert_eq!(wide.first(), zigzag.first());
        assert_eq!(wide.last(), zigzag.last());

        assert!(smooth(&zigzag, 4).is_err());
    }

    fn el(id: &str, pts: &[(f64, f64)], is_main: bool) -> MapElement {
        MapElement::new(id, Label::Divider, pl(pts), is_main)
    }

    #[test]
    fn chain_base_is_main_element() {
        let m = el("m", &[(0.0, 0.0), (2.0, 0.0)], true);
        let s = el("s", &[(0.0, 0.4), (1.0, 0.4), (5.0, 0.4)], false);
        let out = merge_chain(&[s.clone(), m.clone()], &MergeConfig::default()).unwrap();
        assert_eq!(out.element.id, "m");
        assert!(out.element.is_main);
        let mut counts = ScenarioCounts::default();
        let expected = merge_polyline_with(
            &s.polyline,
            &m.polyline,
            MergeConfig::default().extension,
            &mut counts,
        )
        .unwrap();
        assert_eq!(out.element.polyline, expected);
    }

    #[test]
    fn chain_of_identical_secondaries() {
        let a = el("a", &[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)], false);
        let b = el("b", &[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)], false);
        let out = merge_chain(&[b, a.clone()], &MergeConfig::default()).unwrap();
        assert_eq!(out.element.id, "a");
        assert_eq!(out.element.polyline, a.polyline);
    }

    #[test]
    fn anti_parallel_member_is_reversed() {
        let base = el("a", &[(0.0, 0.0), (5.0, 0.0), (10.0, 0.0)], false);
        let rev = el("b", &[(9.0, 0.2), (5.0, 0.2), (1.0, 0.2)], false);
        let out = merge_chain(&[base, rev], &MergeConfig::default()).unwrap();
        assert!(out.members[0].reversed);
        let xs: Vec<f64> = out.element.polyline.points().iter().map(|q| q.x).collect();
        assert!(xs.windows(2).all(|w| w[0] <= w[1]), "{xs:?}");
    }

    #[test]
    fn chain_rejects_mixed_labels() {
        let a = el("a", &[(0.0, 0.0), (1.0, 0.0)], false);
        let b = MapElement::new("b", Label::Boundary, pl(&[(0.0, 0.0), (1.0, 0.0)]), false);
        assert!(merge_chain(&[a, b], &MergeConfig::default()).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(MergeConfig::default().validate().is_ok());
        for bad in [
            MergeConfig {
                th_prox: 0.0,
                ..Default::default()
            },
            MergeConfig {
                th_cov: 1.0,
                ..Default::default()
            },
            MergeConfig {
                cell_size: -1.0,
                ..Default::default()
            },
            MergeConfig {
                smoothing_window: 4,
                ..Default::default()
            },
            MergeConfig {
                extension: ExtensionRule {
                    point: ExtensionPoint::Foot,
                    span: -1.0,
                },
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn merge_maps_identity_and_bootstrap() {
        let main = VectorMap::world(vec![
            el("a", &[(0.0, 0.0), (10.0, 0.0)], true),
            el("b", &[(0.0, 5.0), (10.0, 5.0)], true),
        ]);
        let out = merge_maps(&main, &[], &MergeConfig::default()).unwrap();
        assert_eq!(out, main);
        let out = merge_maps(&main, &[VectorMap::empty_world()], &MergeConfig::default()).unwrap();
        assert_eq!(out, main);

        let mut secondary = main.clone();
        secondary
            .elements
            .iter_mut()
            .for_each(|e| e.is_main = false);
        let out = merge_maps(
            &VectorMap::empty_world(),
            &[secondary],
            &MergeConfig::default(),
        )
        .unwrap();
        assert_eq!(out, main);
    }

    #[test]
    fn merge_maps_collapses_duplicates() {
        let main = VectorMap::world(vec![el("a", &[(0.0, 0.0), (10.0, 0.0)], true)]);
        let s1 = VectorMap::world(vec![el("x", &[(0.0, 0.2), (10.0, 0.2)], false)]);
        let s2 = VectorMap::world(vec![el("x", &[(5.0, -0.2), (15.0, -0.2)], false)]);
        let (out, report) =
            merge_maps_with_report(&main, &[s1, s2], &MergeConfig::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.elements[0].id, "a");
        assert_eq!(report.input_elements, 3);
        assert_eq!(report.chains.len(), 1);
        assert_eq!(report.chains[0].members.len(), 2);
        assert!(out.elements[0].polyline.last().unwrap().x > 14.0);
    }

    #[test]
    fn restore_ids_keeps_prefix_on_collision() {
        let mut m = VectorMap::world(vec![
            el("1:x", &[(0.0, 0.0), (1.0, 0.0)], true),
            el("2:x", &[(0.0, 5.0), (1.0, 5.0)], true),
            el("0:y", &[(0.0, 9.0), (1.0, 9.0)], true),
        ]);
        restore_ids(&mut m);
        let ids: Vec<_> = m.elements.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, vec!["1:x", "2:x", "y"]);
    }
}
