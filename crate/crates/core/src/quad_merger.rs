//! Merging of overlapping quadrilaterals (pedestrian crossings).
//!
//! The quads are rasterized into a coverage grid, blurred with a Gaussian in
//! full-convolution mode, cut at a coverage threshold, and the surviving cells
//! are wrapped in a minimum-area rotated rectangle.

use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon, signed_area, BoundingBox, Point2, Polyline};
use crate::map_model::MapElement;
use crate::polyline_merger::MergeConfig;

/// Per-cell coverage in `[0, 1]`, row-major with `width` cells per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageGrid {
    /// World position of the lower-left corner of cell `(0, 0)`.
    pub origin: Point2,
    pub cell_size: f64,
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl CoverageGrid {
    pub fn value(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn cell_center(&self, col: usize, row: usize) -> Point2 {
        Point2::new(
            self.origin.x + (col as f64 + 0.5) * self.cell_size,
            self.origin.y + (row as f64 + 0.5) * self.cell_size,
        )
    }

    /// Sum of values times cell area.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_size * self.cell_size
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Rasterizes quads onto a grid covering their union bounding box plus one
/// cell of padding. A cell's value is the fraction of quads containing its
/// center (boundary inclusive).
pub fn rasterize_coverage(quads: &[Polyline], cell_size: f64) -> Result<CoverageGrid> {
    if quads.is_empty() {
        return Err(Error::InvalidInput("no quadrilaterals to rasterize".into()));
    }
    if !(cell_size > 0.0) {
        return Err(Error::InvalidInput(format!(
            "cell size {cell_size} must be positive"
        )));
    }
    let bbox = quads
        .iter()
        .filter_map(Polyline::bounding_box)
        .reduce(BoundingBox::union)
        .ok_or_else(|| Error::InvalidInput("empty quadrilateral".into()))?;

    const PAD: usize = 1;
    let origin = Point2::new(
        bbox.min.x - PAD as f64 * cell_size,
        bbox.min.y - PAD as f64 * cell_size,
    );
    let width = (bbox.width() / cell_size).ceil() as usize + 2 * PAD;
    let height = (bbox.height() / cell_size).ceil() as usize + 2 * PAD;
    let mut grid = CoverageGrid {
        origin,
        cell_size,
        width,
        height,
        values: vec![0.0; width * height],
    };

    let n = quads.len() as f64;
    for quad in quads {
        let ring = quad.points();
        let Some(qb) = quad.bounding_box() else {
            continue;
        };
        // only scan cells whose centers can fall inside this quad
        let c0 = (((qb.min.x - origin.x) / cell_size - 0.5).floor().max(0.0)) as usize;
        let c1 = (((qb.max.x - origin.x) / cell_size - 0.5).ceil() as usize).min(width - 1);
        let r0 = (((qb.min.y - origin.y) / cell_size - 0.5).floor().max(0.0)) as usize;
        let r1 = (((qb.max.y - origin.y) / cell_size - 0.5).ceil() as usize).min(height - 1);
        for row in r0..=r1 {
            for col in c0..=c1 {
                if point_in_polygon(grid.cell_center(col, row), ring) {
                    grid.values[row * width + col] += 1.0;
                }
            }
        }
    }
    for v in &mut grid.values {
        *v /= n;
    }
    Ok(grid)
}

/// Discrete Gaussian taps over `[-r, r]` with `r = ⌈3σ⌉`, normalized to sum 1.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

/// Full-mode 1D convolution: output length `len + taps - 1`.
fn convolve_full(input: &[f64], kernel: &[f64], out: &mut [f64]) {
    for (i, &v) in input.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        for (k, &w) in kernel.iter().enumerate() {
            out[i + k] += v * w;
        }
    }
}

/// Gaussian blur with full-convolution edge handling: the grid grows by the
/// kernel radius on every side, so no coverage mass is clipped.
pub fn blur_coverage(grid: &CoverageGrid, sigma_cells: f64) -> Result<CoverageGrid> {
    if !(sigma_cells > 0.0) {
        return Err(Error::InvalidInput(format!(
            "blur sigma {sigma_cells} must be positive"
        )));
    }
    let kernel = gaussian_kernel(sigma_cells);
    let radius = kernel.len() / 2;
    let (w, h) = (grid.width, grid.height);
    let (ow, oh) = (w + 2 * radius, h + 2 * radius);

    // rows first
    let mut tmp = vec![0.0; ow * h];
    for row in 0..h {
        convolve_full(
            &grid.values[row * w..(row + 1) * w],
            &kernel,
            &mut tmp[row * ow..(row + 1) * ow],
        );
    }
    let mut out = vec![0.0; ow * oh];
    let mut column = vec![0.0; h];
    let mut column_out = vec![0.0; oh];
    for col in 0..ow {
        for row in 0..h {
            column[row] = tmp[row * ow + col];
        }
        column_out.iter_mut().for_each(|v| *v = 0.0);
        convolve_full(&column, &kernel, &mut column_out);
        for row in 0..oh {
            out[row * ow + col] = column_out[row].min(1.0);
        }
    }

    Ok(CoverageGrid {
        origin: Point2::new(
            grid.origin.x - radius as f64 * grid.cell_size,
            grid.origin.y - radius as f64 * grid.cell_size,
        ),
        cell_size: grid.cell_size,
        width: ow,
        height: oh,
        values: out,
    })
}

/// Centers of the cells whose value is at least `th_cov`.
pub fn threshold_region(grid: &CoverageGrid, th_cov: f64) -> Result<Vec<Point2>> {
    let mut out = Vec::new();
    for row in 0..grid.height {
        for col in 0..grid.width {
            if grid.value(col, row) >= th_cov {
                out.push(grid.cell_center(col, row));
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyRegion { threshold: th_cov });
    }
    Ok(out)
}

/// Convex hull by monotone chain, counter-clockwise, without collinear points.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if (b - a).cross(p - a) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Minimum-area enclosing rectangle via rotating calipers: one side is
/// collinear with an edge of the convex hull. Returned counter-clockwise.
pub fn min_rotated_rect(points: &[Point2]) -> Result<Polyline> {
    if points.len() < 3 {
        return Err(Error::Degenerate(format!(
            "need at least 3 points for a bounding rectangle, got {}",
            points.len()
        )));
    }
    let hull = convex_hull(points);
    if hull.len() < 3 || signed_area(&hull) <= 0.0 {
        return Err(Error::Degenerate("points are collinear".into()));
    }

    let n = hull.len();
    let mut best: Option<(f64, [Point2; 4])> = None;
    for i in 0..n {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        let edge = b - a;
        let len = edge.norm();
        if len == 0.0 {
            continue;
        }
        let u = edge * (1.0 / len);
        let v = Point2::new(-u.y, u.x);
        let (mut umin, mut umax, mut vmin, mut vmax) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for &p in &hull {
            let d = p - a;
            let (pu, pv) = (d.dot(u), d.dot(v));
            umin = umin.min(pu);
            umax = umax.max(pu);
            vmin = vmin.min(pv);
            vmax = vmax.max(pv);
        }
        let area = (umax - umin) * (vmax - vmin);
        if best.as_ref().is_none_or(|(ba, _)| area < *ba) {
            let corner = |pu: f64, pv: f64| a + u * pu + v * pv;
            best = Some((
                area,
                [
                    corner(umin, vmin),
                    corner(umax, vmin),
                    corner(umax, vmax),
                    corner(umin, vmax),
                ],
            ));
        }
    }
    let (_, rect) = best.ok_or_else(|| Error::Degenerate("empty hull".into()))?;
    Ok(Polyline::new(rect.to_vec()))
}

/// Outcome of merging one chain of quadrilaterals.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadMerge {
    pub element: MapElement,
    /// True when no cell reached the threshold and the largest input quad was
    /// returned unchanged.
    pub fallback: bool,
}

/// Merges a chain of crossings into one rectangle.
///
/// Every selected cell contributes its four corners to the rectangle fit, so
/// the result covers the selected cells' full footprint.
pub fn merge_quads(chain: &[MapElement], config: &MergeConfig) -> Result<QuadMerge> {
    if chain.len() < 2 {
        return Err(Error::InvalidInput(
            "a quad chain needs at least 2 elements".into(),
        ));
    }
    if let Some(e) = chain.iter().find(|e| !e.label.is_closed()) {
        return Err(Error::InvalidInput(format!(
            "element '{}' is not a quadrilateral element",
            e.id
        )));
    }
    let id = chain
        .iter()
        .filter(|e| e.is_main)
        .map(|e| &e.id)
        .min()
        .or_else(|| chain.iter().map(|e| &e.id).min())
        .expect("non-empty chain")
        .clone();
    let label = chain[0].label;

    let quads: Vec<Polyline> = chain.iter().map(|e| e.polyline.clone()).collect();
    let grid = rasterize_coverage(&quads, config.cell_size)?;
    let blurred = blur_coverage(&grid, config.blur_sigma_cells)?;
    let region = match threshold_region(&blurred, config.th_cov) {
        Ok(r) => r,
        Err(Error::EmptyRegion { .. }) => return Ok(fallback(chain, id)),
        Err(e) => return Err(e),
    };
    let half = config.cell_size * 0.5;
    let footprint: Vec<Point2> = region
        .iter()
        .flat_map(|&c| {
            [
                Point2::new(c.x - half, c.y - half),
                Point2::new(c.x + half, c.y - half),
                Point2::new(c.x + half, c.y + half),
                Point2::new(c.x - half, c.y + half),
            ]
        })
        .collect();
    let rect = min_rotated_rect(&footprint)?;
    Ok(QuadMerge {
        element: MapElement::new(id, label, rect, true),
        fallback: false,
    })
}

fn fallback(chain: &[MapElement], id: String) -> QuadMerge {
    let largest = chain
        .iter()
        .max_by(|a, b| {
            signed_area(a.polyline.points())
                .abs()
                .total_cmp(&signed_area(b.polyline.points()).abs())
                .then_with(|| b.id.cmp(&a.id))
        })
        .expect("non-empty chain");
    QuadMerge {
        element: MapElement::new(id, largest.label, largest.polyline.clone(), true),
        fallback: true,
    }
}
