//! Curve similarity (discrete Fréchet distance, partial curve mapping) and the
//! estimated-vs-ground-truth evaluation report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{project_point_to_polyline, Point2, Polyline};
use crate::map_model::{Label, MapElement, VectorMap};
use crate::proximity_graph::polyline_merge_check;

/// Discrete Fréchet distance: the minimum over monotone couplings of the
/// largest pointwise distance.
pub fn discrete_frechet(p: &Polyline, q: &Polyline) -> Result<f64> {
    let (p, q) = (p.points(), q.points());
    if p.is_empty() || q.is_empty() {
        return Err(Error::InvalidInput(
            "discrete Fréchet distance of an empty polyline".into(),
        ));
    }
    let mut prev = vec![0.0; q.len()];
    let mut cur = vec![0.0; q.len()];
    for (i, &pi) in p.iter().enumerate() {
        for (j, &qj) in q.iter().enumerate() {
            let d = pi.distance(qj);
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => d.max(cur[j - 1]),
                (_, 0) => d.max(prev[0]),
                _ => d.max(prev[j].min(cur[j - 1]).min(prev[j - 1])),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[q.len() - 1])
}

fn cumulative_lengths(pts: &[Point2]) -> Vec<f64> {
    let mut cum = Vec::with_capacity(pts.len());
    let mut acc = 0.0;
    cum.push(0.0);
    for w in pts.windows(2) {
        acc += w[0].distance(w[1]);
        cum.push(acc);
    }
    cum
}

fn point_at(pts: &[Point2], cum: &[f64], s: f64) -> Point2 {
    let total = *cum.last().unwrap();
    let s = s.clamp(0.0, total);
    // first segment whose end reaches s
    let k = cum.partition_point(|&c| c < s).clamp(1, pts.len() - 1);
    let seg = cum[k] - cum[k - 1];
    if seg <= 0.0 {
        return pts[k];
    }
    let t = ((s - cum[k - 1]) / seg).clamp(0.0, 1.0);
    pts[k - 1] + (pts[k] - pts[k - 1]) * t
}

/// Partial curve mapping between an estimated curve and a reference curve.
///
/// Both curves are parameterized by arc length and the shorter one is slid
/// along the longer. Candidate offsets are the arc positions of the longer
/// curve's vertices plus the positions where the shorter curve's endpoints
/// project onto it, all clamped so the shorter curve fits. For each offset
/// the area between the curves is integrated with the trapezoid rule over
/// every breakpoint of either curve; the smallest area divided by the
/// reference arc length is returned.
pub fn pcm(estimate: &Polyline, reference: &Polyline) -> Result<f64> {
    if estimate.len() < 2 || reference.len() < 2 {
        return Err(Error::InvalidInput(
            "partial curve mapping needs polylines with at least 2 vertices".into(),
        ));
    }
    let ref_len = reference.arc_length();
    let est_len = estimate.arc_length();
    if ref_len < 1e-12 || est_len < 1e-12 {
        return Err(Error::InvalidInput(
            "partial curve mapping of a zero-length curve".into(),
        ));
    }
    let (short, long) = if est_len <= ref_len {
        (estimate, reference)
    } else {
        (reference, estimate)
    };
    let (sp, lp) = (short.points(), long.points());
    let (sc, lc) = (cumulative_lengths(sp), cumulative_lengths(lp));
    let (ls, ll) = (*sc.last().unwrap(), *lc.last().unwrap());
    let max_offset = (ll - ls).max(0.0);

    let mut offsets: Vec<f64> = lc.iter().map(|&c| c.clamp(0.0, max_offset)).collect();
    for (end, shift) in [(sp[0], 0.0), (sp[sp.len() - 1], ls)] {
        let pr = project_point_to_polyline(end, long)?;
        let along = lc[pr.segment_index] + pr.t * (lc[pr.segment_index + 1] - lc[pr.segment_index]);
        offsets.push((along - shift).clamp(0.0, max_offset));
    }
    offsets.sort_by(f64::total_cmp);
    offsets.dedup();

    let mut best = f64::INFINITY;
    for &o in &offsets {
        let mut ss: Vec<f64> = sc.clone();
        ss.extend(lc.iter().map(|&c| c - o).filter(|&s| s > 0.0 && s < ls));
        ss.sort_by(f64::total_cmp);
        ss.dedup();
        let gap = |s: f64| point_at(sp, &sc, s).distance(point_at(lp, &lc, o + s));
        let mut area = 0.0;
        let mut prev_s = ss[0];
        let mut prev_d = gap(prev_s);
        for &s in &ss[1..] {
            let d = gap(s);
            area += 0.5 * (prev_d + d) * (s - prev_s);
            prev_s = s;
            prev_d = d;
        }
        best = best.min(area);
    }
    Ok(best / ref_len)
}

/// The eight ways to walk a closed ring: every starting corner in both
/// directions. Returned rings are explicitly closed.
fn ring_alignments(ring: &[Point2]) -> Vec<Polyline> {
    let n = ring.len();
    let mut out = Vec::with_capacity(2 * n);
    for start in 0..n {
        let fwd: Vec<Point2> = (0..=n).map(|k| ring[(start + k) % n]).collect();
        let rev: Vec<Point2> = (0..=n).map(|k| ring[(start + n - k) % n]).collect();
        out.push(Polyline::new(fwd));
        out.push(Polyline::new(rev));
    }
    out
}

/// Discrete Fréchet distance between two elements. Quadrilaterals are compared
/// as closed rings, minimized over the estimate's starting corner and winding.
pub fn element_frechet(est: &MapElement, gt: &MapElement) -> Result<f64> {
    if est.label.is_closed() && gt.label.is_closed() {
        let reference = gt.polyline.closed();
        ring_alignments(est.polyline.points())
            .iter()
            .map(|r| discrete_frechet(r, &reference))
            .try_fold(f64::INFINITY, |acc, d| d.map(|d| acc.min(d)))
    } else {
        discrete_frechet(&est.polyline, &gt.polyline)
    }
}

/// Partial curve mapping between two elements; quadrilaterals are compared as
/// closed rings like in [`element_frechet`].
pub fn element_pcm(est: &MapElement, gt: &MapElement) -> Result<f64> {
    if est.label.is_closed() && gt.label.is_closed() {
        let reference = gt.polyline.closed();
        ring_alignments(est.polyline.points())
            .iter()
            .map(|r| pcm(r, &reference))
            .try_fold(f64::INFINITY, |acc, d| d.map(|d| acc.min(d)))
    } else {
        pcm(&est.polyline, &gt.polyline)
    }
}

/// Correspondences between an estimated and a ground-truth map.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Matching {
    /// `(estimated id, ground-truth id)`, in estimated-map order.
    pub pairs: Vec<(String, String)>,
    pub unmatched_est: Vec<String>,
    pub unmatched_gt: Vec<String>,
}

/// Pairs every estimated element with the proximity-compatible ground-truth
/// element of smallest Fréchet distance (ties by ground-truth id).
pub fn match_elements(est: &VectorMap, gt: &VectorMap, th_prox: f64) -> Result<Matching> {
    est.require_world("match_elements")?;
    gt.require_world("match_elements")?;
    let mut out = Matching::default();
    let mut gt_hit = vec![false; gt.len()];
    for e in &est.elements {
        let mut best: Option<(f64, &str, usize)> = None;
        for (k, g) in gt.elements.iter().enumerate() {
            if !polyline_merge_check(e, g, th_prox) {
                continue;
            }
            let d = element_frechet(e, g)?;
            let better = match best {
                None => true,
                Some((bd, bid, _)) => d < bd || (d == bd && g.id.as_str() < bid),
            };
            if better {
                best = Some((d, &g.id, k));
            }
        }
        match best {
            Some((_, gid, k)) => {
                gt_hit[k] = true;
                out.pairs.push((e.id.clone(), gid.to_string()));
            }
            None => out.unmatched_est.push(e.id.clone()),
        }
    }
    out.unmatched_gt = gt
        .elements
        .iter()
        .zip(&gt_hit)
        .filter(|(_, &hit)| !hit)
        .map(|(g, _)| g.id.clone())
        .collect();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    Pcm,
    Df,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Pcm => "pcm",
            Metric::Df => "df",
        }
    }
}

/// Summary statistics; `std` is the population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
}

impl Stats {
    /// `None` for an empty sample. Values are sorted first so the result does
    /// not depend on input order.
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Some(Stats {
            mean: mean.clamp(v[0], v[v.len() - 1]),
            min: v[0],
            max: v[v.len() - 1],
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub label: Label,
    pub kind: String,
    pub metric: Metric,
    pub stats: Option<Stats>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnmatchedCounts {
    pub label: Label,
    pub kind: String,
    pub estimated: usize,
    pub ground_truth: usize,
}

/// Per-label metric summaries of one kind of estimated map.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub unmatched: Vec<UnmatchedCounts>,
}

impl EvalReport {
    pub fn row(&self, label: Label, kind: &str, metric: Metric) -> Option<&EvalRow> {
        self.rows
            .iter()
            .find(|r| r.label == label && r.kind == kind && r.metric == metric)
    }

    /// Appends the rows of another report (e.g. instances next to merged).
    pub fn extend(&mut self, other: EvalReport) {
        self.rows.extend(other.rows);
        self.unmatched.extend(other.unmatched);
    }

    /// CSV with columns `label,kind,metric,mean,min,max,std,count`. Empty
    /// statistics are left blank; unmatched element counts are appended as
    /// `unmatched_est` / `unmatched_gt` rows.
    pub fn to_csv(&self) -> String {
        fn fmt4(v: f64) -> String {
            // avoid printing "-0.0000"
            let s = format!("{:.4}", v);
            if s == "-0.0000" {
                "0.0000".into()
            } else {
                s
            }
        }
        let mut out = String::from("label,kind,metric,mean,min,max,std,count\n");
        for r in &self.rows {
            let stats = match r.stats {
                Some(s) => format!(
                    "{},{},{},{}",
                    fmt4(s.mean),
                    fmt4(s.min),
                    fmt4(s.max),
                    fmt4(s.std)
                ),
                None => ",,,".into(),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.label,
                r.kind,
                r.metric.as_str(),
                stats,
                r.count
            );
        }
        for u in &self.unmatched {
            let _ = writeln!(
                out,
                "{},{},unmatched_est,,,,,{}",
                u.label, u.kind, u.estimated
            );
            let _ = writeln!(
                out,
                "{},{},unmatched_gt,,,,,{}",
                u.label, u.kind, u.ground_truth
            );
        }
        out
    }
}

/// Collects matched-pair metrics over any number of (estimate, ground truth)
/// map pairs before summarizing them into one [`EvalReport`].
#[derive(Debug, Clone, Default)]
pub struct EvalAccumulator {
    pcm: BTreeMap<Label, Vec<f64>>,
    df: BTreeMap<Label, Vec<f64>>,
    unmatched_est: BTreeMap<Label, usize>,
    unmatched_gt: BTreeMap<Label, usize>,
}

impl EvalAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, est: &VectorMap, gt: &VectorMap, th_prox: f64) -> Result<()> {
        let matching = match_elements(est, gt, th_prox)?;
        let est_by_id: BTreeMap<&str, &MapElement> =
            est.elements.iter().map(|e| (e.id.as_str(), e)).collect();
        let gt_by_id: BTreeMap<&str, &MapElement> =
            gt.elements.iter().map(|e| (e.id.as_str(), e)).collect();
        for (eid, gid) in &matching.pairs {
            let (e, g) = (est_by_id[eid.as_str()], gt_by_id[gid.as_str()]);
            self.df
                .entry(g.label)
                .or_default()
                .push(element_frechet(e, g)?);
            self.pcm
                .entry(g.label)
                .or_default()
                .push(element_pcm(e, g)?);
        }
        for id in &matching.unmatched_est {
            *self
                .unmatched_est
                .entry(est_by_id[id.as_str()].label)
                .or_default() += 1;
        }
        for id in &matching.unmatched_gt {
            *self
                .unmatched_gt
                .entry(gt_by_id[id.as_str()].label)
                .or_default() += 1;
        }
        Ok(())
    }

    /// Matched-pair Fréchet distances for one label.
    pub fn df_values(&self, label: Label) -> &[f64] {
        self.df.get(&label).map_or(&[], Vec::as_slice)
    }

    pub fn pcm_values(&self, label: Label) -> &[f64] {
        self.pcm.get(&label).map_or(&[], Vec::as_slice)
    }

    pub fn finish(&self, kind: &str) -> EvalReport {
        let mut report = EvalReport::default();
        for label in Label::ALL {
            for (metric, values) in [
                (Metric::Pcm, self.pcm_values(label)),
                (Metric::Df, self.df_values(label)),
            ] {
                report.rows.push(EvalRow {
                    label,
                    kind: kind.to_string(),
                    metric,
                    stats: Stats::of(values),
                    count: values.len(),
                });
            }
            report.unmatched.push(UnmatchedCounts {
                label,
                kind: kind.to_string(),
                estimated: self.unmatched_est.get(&label).copied().unwrap_or(0),
                ground_truth: self.unmatched_gt.get(&label).copied().unwrap_or(0),
            });
        }
        report
    }
}

/// Evaluates one estimated map against ground truth; rows are tagged with the
/// kind `"estimated"`.
pub fn evaluate_map(est: &VectorMap, gt: &VectorMap, th_prox: f64) -> Result<EvalReport> {
    let mut acc = EvalAccumulator::new();
    acc.add(est, gt, th_prox)?;
    Ok(acc.finish("estimated"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pl(pts: &[(f64, f64)]) -> Polyline {
        Polyline::from(pts)
    }

    #[test]
    fn frechet_examples() {
        let p = pl(&[(0.0, 0.0), (1.0, 2.0), (3.0, 1.0)]);
        assert_eq!(discrete_frechet(&p, &p).unwrap(), 0.0);
        assert_eq!(
            discrete_frechet(
                &pl(&[(0.0, 0.0), (1.0, 0.0)]),
                &pl(&[(0.0, 1.0), (1.0, 1.0)])
            )
            .unwrap(),
            1.0
        );
        // enumeration of the three monotone couplings of a 2x3 table gives √2
        let d = discrete_frechet(
            &pl(&[(0.0, 0.0), (2.0, 0.0)]),
            &pl(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]),
        )
        .unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert!(discrete_frechet(&Polyline::default(), &p).is_err());
    }

    #[test]
    fn pcm_identity_and_subsection() {
        let q = pl(&[(0.0, 0.0), (3.0, 1.0), (7.0, 1.0), (10.0, 0.0)]);
        assert!(pcm(&q, &q).unwrap().abs() < 1e-9);

        let reference = pl(&[(0.0, 0.0), (10.0, 0.0)]);
        let piece = pl(&[(4.3, 0.0), (5.3, 0.0)]);
        assert!(pcm(&piece, &reference).unwrap().abs() < 1e-6);
    }

    #[test]
    fn pcm_parallel_offset_is_linear() {
        let q = pl(&[(0.0, 0.0), (5.0, 0.0), (10.0, 0.0)]);
        let a = pcm(&q.translated(Point2::new(0.0, 0.3)), &q).unwrap();
        let b = pcm(&q.translated(Point2::new(0.0, 0.6)), &q).unwrap();
        assert!((a - 0.3).abs() < 1e-9);
        assert!((b - 2.0 * a).abs() < 1e-6);
    }

    #[test]
    fn pcm_rejects_zero_length() {
        let q = pl(&[(1.0, 1.0), (1.0, 1.0)]);
        assert!(pcm(&q, &pl(&[(0.0, 0.0), (1.0, 0.0)])).is_err());
    }

    #[test]
    fn crossing_distance_ignores_corner_order() {
        let a = MapElement::new(
            "a",
            Label::PedCrossing,
            pl(&[(0.0, 0.0), (4.0, 0.0), (4.0, 2.0), (0.0, 2.0)]),
            false,
        );
        let b = MapElement::new(
            "b",
            Label::PedCrossing,
            pl(&[(4.0, 2.0), (4.0, 0.0), (0.0, 0.0), (0.0, 2.0)]),
            false,
        );
        assert_eq!(element_frechet(&b, &a).unwrap(), 0.0);
        assert!(element_pcm(&b, &a).unwrap().abs() < 1e-12);
    }

    fn divider(id: &str, y: f64) -> MapElement {
        MapElement::new(id, Label::Divider, pl(&[(0.0, y), (10.0, y)]), false)
    }

    #[test]
    fn matching_prefers_frechet_closer() {
        let gt = VectorMap::world(vec![divider("g1", 0.0), divider("g2", 1.0)]);
        let est = VectorMap::world(vec![divider("e", 0.6)]);
        let m = match_elements(&est, &gt, 1.0).unwrap();
        assert_eq!(m.pairs, vec![("e".to_string(), "g2".to_string())]);
        assert!(m.unmatched_est.is_empty());
        assert_eq!(m.unmatched_gt, vec!["g1".to_string()]);
    }

    #[test]
    fn hallucinated_element_is_unmatched() {
        let gt = VectorMap::world(vec![divider("g", 0.0)]);
        let est = VectorMap::world(vec![divider("g", 0.0), divider("ghost", 10.0)]);
        let m = match_elements(&est, &gt, 1.0).unwrap();
        assert_eq!(m.pairs.len(), 1);
        assert_eq!(m.unmatched_est, vec!["ghost".to_string()]);
    }

    #[test]
    fn report_translation_and_csv() {
        let gt = VectorMap::world(vec![divider("a", 0.0), divider("b", 5.0)]);
        let est = VectorMap::world(
            gt.elements
                .iter()
                .map(|e| MapElement {
                    polyline: e.polyline.translated(Point2::new(0.5, 0.0)),
                    ..e.clone()
                })
                .collect(),
        );
        let report = evaluate_map(&est, &gt, 1.0).unwrap();
        let row = report.row(Label::Divider, "estimated", Metric::Df).unwrap();
        assert_eq!(row.count, 2);
        let s = row.stats.unwrap();
        assert!((s.mean - 0.5).abs() < 1e-9 && (s.max - 0.5).abs() < 1e-9);
        assert!(report
            .row(Label::Boundary, "estimated", Metric::Df)
            .unwrap()
            .stats
            .is_none());

        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("label,kind,metric,mean,min,max,std,count")
        );
        assert!(csv.contains("divider,estimated,df,0.5000,0.5000,0.5000,0.0000,2"));
        assert!(csv.contains("boundary,estimated,df,,,,,0"));
    }

    #[test]
    fn stats_ordering() {
        let s = Stats::of(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!((s.min, s.mean, s.max), (1.0, 2.0, 3.0));
        assert!((s.std - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(Stats::of(&[]).is_none());
    }
}
