use polymerge::metrics::element_frechet;
use polymerge::synth::{pose_path, road_scene};
use polymerge::{
    generate_instances, match_elements, merge_chain, merge_maps, merge_point, merge_polyline,
    project_point_to_polyline, Label, MapElement, MergeConfig, NoiseConfig, Point2, Polyline,
    VectorMap,
};

fn line(y: f64, xs: impl Iterator<Item = f64>) -> Polyline {
    Polyline::new(xs.map(|x| Point2::new(x, y)).collect())
}

#[test]
fn parallel_offset_is_halved() {
    let base = line(0.0, (0..=100).map(|i| i as f64 * 0.1));
    let source = line(0.4, (0..5).map(|i| 0.55 + 2.0 * i as f64));
    let out = merge_polyline(&source, &base).unwrap();
    assert_eq!(out.len(), base.len() + source.len());
    let inserted: Vec<Point2> = out
        .points()
        .iter()
        .copied()
        .filter(|p| p.y != 0.0)
        .collect();
    assert_eq!(inserted.len(), source.len());
    for (p, s) in inserted.iter().zip(source.points()) {
        assert!((p.y - 0.2).abs() < 1e-9, "{p:?}");
        assert!((p.x - s.x).abs() < 1e-9);
    }
}

#[test]
fn three_parallel_lines_fold_within_the_band() {
    let chain: Vec<MapElement> = [0.0, 0.2, 0.4]
        .iter()
        .enumerate()
        .map(|(k, &y)| {
            MapElement::new(
                format!("l{k}"),
                Label::Divider,
                line(y, (0..=10).map(f64::from)),
                false,
            )
        })
        .collect();
    let merged = merge_chain(&chain, &MergeConfig::default()).unwrap();
    assert_eq!(merged.element.id, "l0");
    let pts = merged.element.polyline.points();
    assert!(pts.iter().all(|p| p.y >= 0.0 && p.y <= 0.4), "{pts:?}");
    // the shared end vertex is replaced twice: 0 -> 0.1 -> 0.25
    let last = *pts.last().unwrap();
    assert!(
        (last.x - 10.0).abs() < 1e-12 && (last.y - 0.25).abs() < 1e-12,
        "{last:?}"
    );
}

#[test]
fn prepend_mirrors_append() {
    let base = Polyline::from([(0.0, 0.0), (2.0, 0.0)]);
    let out = merge_point(Point2::new(-1.0, 0.4), &base).unwrap();
    assert_eq!(out, Polyline::from([(-1.0, 0.0), (0.0, 0.0), (2.0, 0.0)]));
    let out = merge_point(Point2::new(3.0, 0.4), &base).unwrap();
    assert_eq!(out, Polyline::from([(0.0, 0.0), (2.0, 0.0), (3.0, 0.0)]));
}

fn scene_instances(sigma: f64, seed: u64) -> (VectorMap, Vec<VectorMap>) {
    let gt = road_scene(100.0, 1.0);
    let poses = pose_path(&gt, 10).unwrap();
    let cfg = NoiseConfig {
        sigma,
        dropout: 0.0,
        n_instances: poses.len(),
        seed,
        ..NoiseConfig::default()
    };
    let instances = generate_instances(&gt, &poses, &cfg).unwrap();
    (gt, instances)
}

/// Every merged element paired with its ground-truth match and their DF.
fn matched_df(est: &VectorMap, gt: &VectorMap) -> Vec<(MapElement, MapElement, f64)> {
    let m = match_elements(est, gt, 1.0).unwrap();
    assert!(
        m.unmatched_est.is_empty() && m.unmatched_gt.is_empty(),
        "{m:?}"
    );
    m.pairs
        .iter()
        .map(|(e, g)| {
            let (e, g) = (est.get(e).unwrap(), gt.get(g).unwrap());
            (e.clone(), g.clone(), element_frechet(e, g).unwrap())
        })
        .collect()
}

fn assert_reconstructs(merged: &VectorMap, gt: &VectorMap, crossing_tolerance: f64) {
    assert_eq!(merged.len(), gt.len());
    for (e, g, df) in matched_df(merged, gt) {
        if e.label.is_closed() {
            assert!(df < crossing_tolerance, "{}: {df}", e.id);
            continue;
        }
        let y = g.polyline.first().unwrap().y;
        assert!(
            e.polyline.points().iter().all(|p| (p.y - y).abs() < 1e-9),
            "{}",
            e.id
        );
        let xs = (e.polyline.first().unwrap().x, e.polyline.last().unwrap().x);
        let (lo, hi) = (xs.0.min(xs.1), xs.0.max(xs.1));
        assert!(
            lo.abs() < 1e-9 && (hi - 100.0).abs() < 1e-9,
            "{}: {xs:?}",
            e.id
        );
        assert!(df <= 0.5 + 1e-9, "{}: {df}", e.id);
    }
}

#[test]
fn noiseless_instances_merge_back_to_ground_truth() {
    let (gt, instances) = scene_instances(0.0, 7);
    let merged = merge_maps(
        &VectorMap::empty_world(),
        &instances,
        &MergeConfig::default(),
    )
    .unwrap();
    // rasterized at 0.1 m cells
    assert_reconstructs(&merged, &gt, 0.15);
}

#[test]
fn online_and_batch_both_reconstruct_noiseless_input() {
    let (gt, instances) = scene_instances(0.0, 3);
    let config = MergeConfig::default();
    let batch = merge_maps(&VectorMap::empty_world(), &instances, &config).unwrap();
    let mut online = VectorMap::empty_world();
    for inst in &instances {
        online = merge_maps(&online, std::slice::from_ref(inst), &config).unwrap();
    }
    assert_reconstructs(&batch, &gt, 0.15);
    // each online step blurs the running crossing again, eroding its edges
    assert_reconstructs(&online, &gt, 1.0);
}

#[test]
fn merged_vertices_stay_near_the_inputs() {
    let (_, instances) = scene_instances(0.2, 11);
    let config = MergeConfig::default();
    let merged = merge_maps(&VectorMap::empty_world(), &instances, &config).unwrap();
    let world: Vec<MapElement> = instances
        .iter()
        .flat_map(|m| m.to_world().unwrap().elements)
        .collect();
    for e in merged.elements.iter().filter(|e| !e.label.is_closed()) {
        for &p in e.polyline.points() {
            let d = world
                .iter()
                .filter(|w| w.label == e.label)
                .map(|w| project_point_to_polyline(p, &w.polyline).unwrap().distance)
                .fold(f64::INFINITY, f64::min);
            assert!(
                d < config.th_prox,
                "{} vertex {p:?} is {d} m from every input",
                e.id
            );
        }
    }
}
