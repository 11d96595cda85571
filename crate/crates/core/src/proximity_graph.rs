//! Network generation: which polylines are close enough to be merged, and the
//! connected chains they form.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::geometry::{distance_to_polyline, BoundingBox, Polyline};
use crate::map_model::{Label, MapElement, VectorMap};

/// True iff the two elements share a label and some vertex of either lies
/// strictly closer than `th_prox` to the other's geometry.
///
/// Quadrilaterals are compared through their closed outline.
pub fn polyline_merge_check(a: &MapElement, b: &MapElement, th_prox: f64) -> bool {
    if a.label != b.label {
        return false;
    }
    let (oa, ob) = (a.outline(), b.outline());
    match (oa.bounding_box(), ob.bounding_box()) {
        (Some(ba), Some(bb)) if ba.gap(bb) >= th_prox => return false,
        (None, _) | (_, None) => return false,
        _ => {}
    }
    outlines_close(&oa, &ob, th_prox)
}

fn outlines_close(a: &Polyline, b: &Polyline, th_prox: f64) -> bool {
    if a.len() < 2 || b.len() < 2 {
        return false;
    }
    a.points()
        .iter()
        .any(|&p| distance_to_polyline(p, b) < th_prox)
        || b.points()
            .iter()
            .any(|&p| distance_to_polyline(p, a) < th_prox)
}

/// Undirected graph over the elements of a concatenated map. Node `i` is
/// element `i`; edges are stored as `(min, max)` index pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProximityGraph {
    pub nodes: Vec<String>,
    pub edges: BTreeSet<(usize, usize)>,
}

impl ProximityGraph {
    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.edges.insert((a.min(b), a.max(b)));
        }
    }

    /// Edges as id pairs, each pair sorted.
    pub fn id_edges(&self) -> BTreeSet<(String, String)> {
        self.edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (&self.nodes[a], &self.nodes[b]);
                if x <= y {
                    (x.clone(), y.clone())
                } else {
                    (y.clone(), x.clone())
                }
            })
            .collect()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }
}

struct Candidate {
    outline: Polyline,
    bbox: Option<BoundingBox>,
}

fn candidates(map: &VectorMap) -> Vec<Candidate> {
    map.elements
        .iter()
        .map(|e| {
            let outline = e.outline();
            let bbox = outline.bounding_box();
            Candidate { outline, bbox }
        })
        .collect()
}

fn close(
    map: &VectorMap,
    cands: &[Candidate],
    i: usize,
    j: usize,
    th_prox: &impl Fn(Label) -> f64,
) -> bool {
    let label = map.elements[i].label;
    if label != map.elements[j].label {
        return false;
    }
    let th_prox = th_prox(label);
    match (cands[i].bbox, cands[j].bbox) {
        (Some(a), Some(b)) if a.gap(b) < th_prox => {
            outlines_close(&cands[i].outline, &cands[j].outline, th_prox)
        }
        _ => false,
    }
}

/// Builds the merge network: every secondary element is tested against every
/// other element, so main–main pairs never get an edge.
pub fn build_graph(m_conc: &VectorMap, th_prox: f64) -> Result<ProximityGraph> {
    build_graph_by_label(m_conc, |_| th_prox)
}

/// [`build_graph`] with a proximity threshold chosen per label.
pub fn build_graph_by_label(
    m_conc: &VectorMap,
    th_prox: impl Fn(Label) -> f64,
) -> Result<ProximityGraph> {
    m_conc.require_world("build_graph")?;
    let cands = candidates(m_conc);
    let mut g = ProximityGraph {
        nodes: m_conc.elements.iter().map(|e| e.id.clone()).collect(),
        edges: BTreeSet::new(),
    };
    for (i, ei) in m_conc.elements.iter().enumerate() {
        if ei.is_main {
            continue;
        }
        for j in 0..m_conc.len() {
            if j != i && close(m_conc, &cands, i, j, &th_prox) {
                g.add_edge(i, j);
            }
        }
    }
    Ok(g)
}

/// Like [`build_graph`] but ignoring the main flag: every same-label pair is
/// tested. Used to re-check an already merged map.
pub(crate) fn build_graph_all_pairs(
    map: &VectorMap,
    th_prox: impl Fn(Label) -> f64,
) -> ProximityGraph {
    let cands = candidates(map);
    let mut g = ProximityGraph {
        nodes: map.elements.iter().map(|e| e.id.clone()).collect(),
        edges: BTreeSet::new(),
    };
    for i in 0..map.len() {
        for j in (i + 1)..map.len() {
            if close(map, &cands, i, j, &th_prox) {
                g.add_edge(i, j);
            }
        }
    }
    g
}

/// A connected component of the proximity graph with at least two nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    /// Node indices in ascending order.
    pub indices: Vec<usize>,
    pub ids: Vec<String>,
}

/// Connected components with two or more nodes, ordered by smallest member.
pub fn merge_chains(g: &ProximityGraph) -> Vec<Chain> {
    let adj = g.adjacency();
    let mut seen = vec![false; g.nodes.len()];
    let mut chains = Vec::new();
    for start in 0..g.nodes.len() {
        if seen[start] || adj[start].is_empty() {
            continue;
        }
        let mut stack = vec![start];
        let mut members = Vec::new();
        seen[start] = true;
        while let Some(n) = stack.pop() {
            members.push(n);
            for &m in &adj[n] {
                if !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        members.sort_unstable();
        chains.push(Chain {
            ids: members.iter().map(|&i| g.nodes[i].clone()).collect(),
            indices: members,
        });
    }
    chains
}
