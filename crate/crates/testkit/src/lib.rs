//! Brute-force references for the polymerge test suites. Nothing here shares
//! code with the library; every routine is the most literal computation of
//! its quantity.

pub type Pt = (f64, f64);

pub fn dist(a: Pt, b: Pt) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Distance from `a` to the closest of `samples + 1` evenly spaced points of
/// segment `[b, c]`, and that point.
pub fn dense_segment_argmin(a: Pt, b: Pt, c: Pt, samples: usize) -> (f64, Pt) {
    let mut best = (f64::INFINITY, b);
    for i in 0..=samples {
        let t = i as f64 / samples as f64;
        let p = (b.0 + t * (c.0 - b.0), b.1 + t * (c.1 - b.1));
        let d = dist(a, p);
        if d < best.0 {
            best = (d, p);
        }
    }
    best
}

/// Discrete Fréchet distance by enumerating every monotone coupling from
/// `(0, 0)` to `(n-1, m-1)`. Exponential; keep inputs tiny.
pub fn frechet_by_enumeration(p: &[Pt], q: &[Pt]) -> f64 {
    fn walk(p: &[Pt], q: &[Pt], i: usize, j: usize, worst: f64, best: &mut f64) {
        let worst = worst.max(dist(p[i], q[j]));
        if i == p.len() - 1 && j == q.len() - 1 {
            *best = best.min(worst);
            return;
        }
        if i + 1 < p.len() {
            walk(p, q, i + 1, j, worst, best);
        }
        if j + 1 < q.len() {
            walk(p, q, i, j + 1, worst, best);
        }
        if i + 1 < p.len() && j + 1 < q.len() {
            walk(p, q, i + 1, j + 1, worst, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(p, q, 0, 0, 0.0, &mut best);
    best
}

/// Distance from `a` to a polyline, as the minimum over densely sampled
/// segment points. `samples` per segment.
pub fn dense_polyline_distance(a: Pt, line: &[Pt], samples: usize) -> f64 {
    line.windows(2)
        .map(|w| dense_segment_argmin(a, w[0], w[1], samples).0)
        .fold(f64::INFINITY, f64::min)
}

/// Exact point-to-segment distance written out independently: the closest
/// point is an endpoint or the perpendicular foot when it falls inside.
pub fn segment_distance(a: Pt, b: Pt, c: Pt) -> f64 {
    let (dx, dy) = (c.0 - b.0, c.1 - b.1);
    let len2 = dx * dx + dy * dy;
    let mut best = dist(a, b).min(dist(a, c));
    if len2 > 0.0 {
        let t = ((a.0 - b.0) * dx + (a.1 - b.1) * dy) / len2;
        if (0.0..=1.0).contains(&t) {
            best = best.min(dist(a, (b.0 + t * dx, b.1 + t * dy)));
        }
    }
    best
}

/// Smallest area of a rectangle enclosing `points` over orientations
/// `0, step, 2·step, …` up to 90°.
pub fn rect_area_by_sweep(points: &[Pt], step_degrees: f64) -> f64 {
    let steps = (90.0 / step_degrees).round() as usize;
    let mut best = f64::INFINITY;
    for k in 0..=steps {
        let th = (k as f64 * step_degrees).to_radians();
        let (s, c) = th.sin_cos();
        let (mut umin, mut umax, mut vmin, mut vmax) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for &(x, y) in points {
            let u = x * c + y * s;
            let v = -x * s + y * c;
            umin = umin.min(u);
            umax = umax.max(u);
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        }
        best = best.min((umax - umin) * (vmax - vmin));
    }
    best
}

/// Shoelace area (absolute).
pub fn polygon_area(ring: &[Pt]) -> f64 {
    let n = ring.len();
    let mut acc = 0.0;
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        acc += a.0 * b.1 - b.0 * a.1;
    }
    acc.abs() * 0.5
}

fn ccw(ring: &[Pt]) -> Vec<Pt> {
    let n = ring.len();
    let mut signed = 0.0;
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        signed += a.0 * b.1 - b.0 * a.1;
    }
    let mut v = ring.to_vec();
    if signed < 0.0 {
        v.reverse();
    }
    v
}

/// Intersection area of two convex polygons by clipping one against the
/// half-planes of the other.
pub fn convex_intersection_area(a: &[Pt], b: &[Pt]) -> f64 {
    let clip = ccw(b);
    let mut poly = ccw(a);
    for i in 0..clip.len() {
        let (e0, e1) = (clip[i], clip[(i + 1) % clip.len()]);
        let side = |p: Pt| (e1.0 - e0.0) * (p.1 - e0.1) - (e1.1 - e0.1) * (p.0 - e0.0);
        let input = std::mem::take(&mut poly);
        if input.is_empty() {
            break;
        }
        for k in 0..input.len() {
            let cur = input[k];
            let prev = input[(k + input.len() - 1) % input.len()];
            let (sc, sp) = (side(cur), side(prev));
            let cut = |t: f64| (prev.0 + t * (cur.0 - prev.0), prev.1 + t * (cur.1 - prev.1));
            if sc >= 0.0 {
                if sp < 0.0 {
                    poly.push(cut(sp / (sp - sc)));
                }
                poly.push(cur);
            } else if sp >= 0.0 {
                poly.push(cut(sp / (sp - sc)));
            }
        }
    }
    if poly.len() < 3 {
        0.0
    } else {
        polygon_area(&poly)
    }
}

/// Intersection over union of two convex polygons.
pub fn convex_iou(a: &[Pt], b: &[Pt]) -> f64 {
    let inter = convex_intersection_area(a, b);
    inter / (polygon_area(a) + polygon_area(b) - inter)
}

/// Even-odd point-in-polygon with boundary points counted inside.
pub fn contains(ring: &[Pt], p: Pt) -> bool {
    let n = ring.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        if segment_distance(p, a, b) < 1e-12 {
            return true;
        }
        if (a.1 > p.1) != (b.1 > p.1) && p.0 < a.0 + (p.1 - a.1) * (b.0 - a.0) / (b.1 - a.1) {
            inside = !inside;
        }
    }
    inside
}

/// Arc length-resampled partial curve mapping reference: slides the shorter
/// curve along the longer in `offset_step` increments and integrates the
/// pointwise gap with `n` midpoint samples. Normalized by the reference
/// curve's length.
pub fn pcm_by_offset_sweep(est: &[Pt], reference: &[Pt], offset_step: f64, n: usize) -> f64 {
    fn length(c: &[Pt]) -> f64 {
        c.windows(2).map(|w| dist(w[0], w[1])).sum()
    }
    fn at(c: &[Pt], s: f64) -> Pt {
        let mut left = s.max(0.0);
        for w in c.windows(2) {
            let l = dist(w[0], w[1]);
            if left <= l && l > 0.0 {
                let t = left / l;
                return (
                    w[0].0 + t * (w[1].0 - w[0].0),
                    w[0].1 + t * (w[1].1 - w[0].1),
                );
            }
            left -= l;
        }
        *c.last().unwrap()
    }
    let (le, lr) = (length(est), length(reference));
    let (short, long, ls, ll) = if le <= lr {
        (est, reference, le, lr)
    } else {
        (reference, est, lr, le)
    };
    let steps = ((ll - ls) / offset_step).floor() as usize;
    let mut best = f64::INFINITY;
    for k in 0..=steps {
        let o = (k as f64 * offset_step).min(ll - ls);
        let mut area = 0.0;
        for i in 0..n {
            let s = (i as f64 + 0.5) / n as f64 * ls;
            area += dist(at(short, s), at(long, o + s)) * ls / n as f64;
        }
        best = best.min(area);
    }
    best / lr
}

/// One element as seen by [`naive_edges`]: label tag, main flag, vertices,
/// and whether the vertices form a closed ring.
pub struct NaiveElement {
    pub label: u8,
    pub main: bool,
    pub points: Vec<Pt>,
    pub closed: bool,
}

fn min_vertex_gap(a: &NaiveElement, b: &NaiveElement) -> f64 {
    let segs = |e: &NaiveElement| {
        let mut s: Vec<(Pt, Pt)> = e.points.windows(2).map(|w| (w[0], w[1])).collect();
        if e.closed {
            s.push((*e.points.last().unwrap(), e.points[0]));
        }
        s
    };
    let one_way = |from: &NaiveElement, to: &NaiveElement| {
        let to_segs = segs(to);
        from.points
            .iter()
            .flat_map(|&p| to_segs.iter().map(move |&(b, c)| segment_distance(p, b, c)))
            .fold(f64::INFINITY, f64::min)
    };
    one_way(a, b).min(one_way(b, a))
}

/// Proximity edges by checking every ordered pair: an edge joins two
/// same-label elements, not both main, when some vertex of one lies strictly
/// within `th` of the other.
pub fn naive_edges(
    elements: &[NaiveElement],
    th: f64,
) -> std::collections::BTreeSet<(usize, usize)> {
    let mut edges = std::collections::BTreeSet::new();
    for i in 0..elements.len() {
        for j in 0..elements.len() {
            let (a, b) = (&elements[i], &elements[j]);
            if i == j || a.label != b.label || (a.main && b.main) {
                continue;
            }
            if min_vertex_gap(a, b) < th {
                edges.insert((i.min(j), i.max(j)));
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_small_case() {
        let p = [(0.0, 0.0), (2.0, 0.0)];
        let q = [(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)];
        assert!((frechet_by_enumeration(&p, &q) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn iou_of_shifted_squares() {
        let a = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let b = [(0.5, 0.0), (1.5, 0.0), (1.5, 1.0), (0.5, 1.0)];
        assert!((convex_iou(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_of_triangle() {
        let tri = [(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)];
        assert!((rect_area_by_sweep(&tri, 0.1) - 12.0).abs() < 1e-9);
    }
}
