//! One complete graph per frame.

use std::collections::BTreeMap;

use super::{centroid_distance, pair_key, FrameObjects};

/// Class label and confidence stored on a per-frame node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeLabel {
    pub cl: String,
    pub clc: f64,
}

/// Complete graph over the objects of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SgfGraph {
    /// Graph id: the frame id.
    pub fid: u64,
    pub nodes: BTreeMap<u64, NodeLabel>,
    /// Centroid distance of every unordered object pair.
    pub edges: BTreeMap<(u64, u64), f64>,
}

impl SgfGraph {
    /// Build the complete graph of one frame.
    pub fn from_frame(frame: &FrameObjects) -> Self {
        let mut nodes = BTreeMap::new();
        let mut edges = BTreeMap::new();
        for (i, a) in frame.objects.iter().enumerate() {
            nodes.insert(
                a.oid,
                NodeLabel {
                    cl: a.cl.clone(),
                    clc: a.clc,
                },
            );
            for b in &frame.objects[i + 1..] {
                edges.insert(pair_key(a.oid, b.oid), centroid_distance(&a.centroid, &b.centroid));
            }
        }
        SgfGraph {
            fid: frame.fid,
            nodes,
            edges,
        }
    }

    /// Object ids carrying class `cl` (all objects when `cl` is `None`).
    pub fn oids_with_class(&self, cl: Option<&str>) -> Vec<u64> {
        self.nodes
            .iter()
            .filter(|(_, l)| cl.is_none_or(|c| l.cl == c))
            .map(|(o, _)| *o)
            .collect()
    }
}

/// The per-frame graphs of a video, in ascending frame order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SgfSet {
    pub graphs: Vec<SgfGraph>,
}

impl SgfSet {
    /// Total node count over all frames (equals the number of object instances).
    pub fn total_nodes(&self) -> usize {
        self.graphs.iter().map(|g| g.nodes.len()).sum()
    }

    /// Total edge count over all frames.
    pub fn total_edges(&self) -> usize {
        self.graphs.iter().map(|g| g.edges.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ObjectObs;

    fn frame(fid: u64, oids: &[u64]) -> FrameObjects {
        FrameObjects {
            fid,
            objects: oids
                .iter()
                .map(|&o| ObjectObs {
                    oid: o,
                    cl: "person".into(),
                    clc: 0.5,
                    centroid: [o as f64 * 3.0, o as f64 * 4.0],
                })
                .collect(),
        }
    }

    #[test]
    fn per_frame_graphs_are_complete() {
        let set = SgfSet {
            graphs: vec![
                SgfGraph::from_frame(&frame(29, &[1, 2, 4, 5])),
                SgfGraph::from_frame(&frame(31, &[1, 2])),
                SgfGraph::from_frame(&frame(80, &[64, 66])),
            ],
        };
        let shape: Vec<(u64, usize, usize)> = set
            .graphs
            .iter()
            .map(|g| (g.fid, g.nodes.len(), g.edges.len()))
            .collect();
        assert_eq!(shape, vec![(29, 4, 6), (31, 2, 1), (80, 2, 1)]);
        assert_eq!(set.total_nodes(), 8);
        assert_eq!(set.graphs[1].edges[&(1, 2)], 5.0);
    }

    #[test]
    fn single_object_frame_has_no_edges() {
        let g = SgfGraph::from_frame(&frame(1, &[7]));
        assert_eq!((g.nodes.len(), g.edges.len()), (1, 0));
    }
}
