//! One graph per video: a node per object id, aggregate distance edges.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{centroid_distance, pair_key, FrameObjects};

/// A per-video node: every frame the object appears in and its class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SgvNode {
    pub oid: u64,
    /// Class label → highest confidence seen with that label.
    pub labels: BTreeMap<String, f64>,
    /// `(fid, objects in that frame)` sorted by count descending, then fid ascending.
    pub frames: Vec<(u64, usize)>,
}

impl SgvNode {
    /// Whether the node ever carried class label `cl` (always true for `None`).
    pub fn has_class(&self, cl: Option<&str>) -> bool {
        cl.is_none_or(|c| self.labels.contains_key(c))
    }

    /// Frame ids of the node in ascending order.
    pub fn sorted_fids(&self) -> Vec<u64> {
        let mut f: Vec<u64> = self.frames.iter().map(|(f, _)| *f).collect();
        f.sort_unstable();
        f
    }

    fn add_frame(&mut self, fid: u64, n: usize) {
        let pos = self
            .frames
            .partition_point(|&(f, m)| m > n || (m == n && f < fid));
        self.frames.insert(pos, (fid, n));
    }
}

/// One side of an edge label: an extreme distance and the frames attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeExtreme {
    pub dist: f64,
    pub frames: Vec<u64>,
}

/// Aggregate edge: smallest and largest centroid distance of a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SgvEdge {
    pub min: EdgeExtreme,
    pub max: EdgeExtreme,
}

impl SgvEdge {
    /// Label of a pair first seen at frame `fid` with distance `d`.
    pub fn first(fid: u64, d: f64) -> Self {
        SgvEdge {
            min: EdgeExtreme {
                dist: d,
                frames: vec![fid],
            },
            max: EdgeExtreme {
                dist: d,
                frames: vec![fid],
            },
        }
    }

    /// Fold one more observation into the label.
    pub fn observe(&mut self, fid: u64, d: f64) {
        if d < self.min.dist {
            self.min = EdgeExtreme {
                dist: d,
                frames: vec![fid],
            };
        } else if d == self.min.dist {
            self.min.frames.push(fid);
        }
        if d > self.max.dist {
            self.max = EdgeExtreme {
                dist: d,
                frames: vec![fid],
            };
        } else if d == self.max.dist {
            self.max.frames.push(fid);
        }
    }
}

/// Structural summary written into every per-video graph header.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphCharacteristics {
    pub components: usize,
    pub largest_component: usize,
    pub smallest_component: usize,
    pub singletons: usize,
    pub max_component_frames: usize,
    pub min_component_frames: usize,
    pub max_degree: usize,
    pub min_degree: usize,
    pub avg_degree: f64,
}

/// Frame-level summary of a graph: how many frames it covers and which
/// frames hold the most objects.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSummary {
    pub frame_count: usize,
    pub max_objs: usize,
    pub max_obj_frames: Vec<u64>,
}

/// The per-video graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SgvGraph {
    pub nodes: BTreeMap<u64, SgvNode>,
    pub edges: BTreeMap<(u64, u64), SgvEdge>,
}

impl SgvGraph {
    /// Fold one frame into the graph (node and edge label update).
    pub fn update(&mut self, frame: &FrameObjects) {
        let n = frame.len();
        for o in &frame.objects {
            let node = self.nodes.entry(o.oid).or_insert_with(|| SgvNode {
                oid: o.oid,
                labels: BTreeMap::new(),
                frames: Vec::new(),
            });
            let c = node.labels.entry(o.cl.clone()).or_insert(o.clc);
            *c = c.max(o.clc);
            node.add_frame(frame.fid, n);
        }
        for (i, a) in frame.objects.iter().enumerate() {
            for b in &frame.objects[i + 1..] {
                let d = centroid_distance(&a.centroid, &b.centroid);
                self.edges
                    .entry(pair_key(a.oid, b.oid))
                    .and_modify(|e| e.observe(frame.fid, d))
                    .or_insert_with(|| SgvEdge::first(frame.fid, d));
            }
        }
    }

    /// Connected components as sorted oid sets, ordered by smallest member.
    pub fn components(&self) -> Vec<BTreeSet<u64>> {
        let mut index: HashMap<u64, usize> = HashMap::new();
        let ids: Vec<u64> = self.nodes.keys().copied().collect();
        for (i, o) in ids.iter().enumerate() {
            index.insert(*o, i);
        }
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b) in self.edges.keys() {
            let (ra, rb) = (find(&mut parent, index[&a]), find(&mut parent, index[&b]));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: BTreeMap<usize, BTreeSet<u64>> = BTreeMap::new();
        for (i, o) in ids.iter().enumerate() {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().insert(*o);
        }
        groups.into_values().collect()
    }

    /// Degree of every node.
    pub fn degrees(&self) -> BTreeMap<u64, usize> {
        let mut d: BTreeMap<u64, usize> = self.nodes.keys().map(|o| (*o, 0)).collect();
        for &(a, b) in self.edges.keys() {
            *d.get_mut(&a).expect("edge endpoint is a node") += 1;
            *d.get_mut(&b).expect("edge endpoint is a node") += 1;
        }
        d
    }

    /// Component, frame and degree statistics.
    pub fn characteristics(&self) -> GraphCharacteristics {
        let comps = self.components();
        let sizes: Vec<usize> = comps.iter().map(BTreeSet::len).collect();
        let comp_frames: Vec<usize> = comps
            .iter()
            .map(|c| {
                c.iter()
                    .flat_map(|o| self.nodes[o].frames.iter().map(|(f, _)| *f))
                    .collect::<BTreeSet<u64>>()
                    .len()
            })
            .collect();
        let degrees: Vec<usize> = self.degrees().into_values().collect();
        GraphCharacteristics {
            components: comps.len(),
            largest_component: sizes.iter().copied().max().unwrap_or(0),
            smallest_component: sizes.iter().copied().min().unwrap_or(0),
            singletons: sizes.iter().filter(|&&s| s == 1).count(),
            max_component_frames: comp_frames.iter().copied().max().unwrap_or(0),
            min_component_frames: comp_frames.iter().copied().min().unwrap_or(0),
            max_degree: degrees.iter().copied().max().unwrap_or(0),
            min_degree: degrees.iter().copied().min().unwrap_or(0),
            avg_degree: if degrees.is_empty() {
                0.0
            } else {
                degrees.iter().sum::<usize>() as f64 / degrees.len() as f64
            },
        }
    }

    /// Frames covered by the graph, derived from the node labels.
    pub fn frame_summary(&self) -> FrameSummary {
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        for node in self.nodes.values() {
            for &(f, n) in &node.frames {
                counts.insert(f, n);
            }
        }
        let max_objs = counts.values().copied().max().unwrap_or(0);
        FrameSummary {
            frame_count: counts.len(),
            max_objs,
            max_obj_frames: counts
                .iter()
                .filter(|(_, n)| **n == max_objs)
                .map(|(f, _)| *f)
                .collect(),
        }
    }

    /// The subgraph induced by `oids`.
    pub fn subgraph<'a>(&self, oids: impl IntoIterator<Item = &'a u64>) -> SgvGraph {
        let keep: BTreeSet<u64> = oids.into_iter().copied().collect();
        SgvGraph {
            nodes: self
                .nodes
                .iter()
                .filter(|(o, _)| keep.contains(o))
                .map(|(o, n)| (*o, n.clone()))
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|((a, b), _)| keep.contains(a) && keep.contains(b))
                .map(|(k, e)| (*k, e.clone()))
                .collect(),
        }
    }
}

/// Streaming builder that retires objects unseen for `th_track` frames.
///
/// Every `th_track` frames the builder checkpoints: nodes whose last
/// sighting is at least `th_track` frames old, together with their incident
/// edges, move from the working graph to the completed graph. A retired
/// object that reappears (a tracker re-using an id) is moved back, so the
/// finished graph never depends on `th_track`.
#[derive(Debug, Clone)]
pub struct SgvBuilder {
    th_track: u64,
    active: SgvGraph,
    completed: SgvGraph,
    last_seen: HashMap<u64, u64>,
    adjacency: HashMap<u64, BTreeSet<u64>>,
    next_checkpoint: u64,
    checkpoints: usize,
}

impl SgvBuilder {
    /// New builder flushing every `th_track` frames (at least 1).
    pub fn new(th_track: u64) -> Self {
        let th_track = th_track.max(1);
        SgvBuilder {
            th_track,
            active: SgvGraph::default(),
            completed: SgvGraph::default(),
            last_seen: HashMap::new(),
            adjacency: HashMap::new(),
            next_checkpoint: th_track,
            checkpoints: 0,
        }
    }

    fn restore(&mut self, oid: u64) {
        if let Some(node) = self.completed.nodes.remove(&oid) {
            self.active.nodes.insert(oid, node);
            for nb in self.adjacency.get(&oid).into_iter().flatten() {
                let key = pair_key(oid, *nb);
                if let Some(e) = self.completed.edges.remove(&key) {
                    self.active.edges.insert(key, e);
                }
            }
        }
    }

    fn checkpoint(&mut self, fid: u64) {
        self.checkpoints += 1;
        let stale: Vec<u64> = self
            .active
            .nodes
            .keys()
            .filter(|o| fid.saturating_sub(self.last_seen[o]) >= self.th_track)
            .copied()
            .collect();
        for oid in stale {
            let node = self.active.nodes.remove(&oid).expect("stale node is active");
            self.completed.nodes.insert(oid, node);
            for nb in self.adjacency.get(&oid).into_iter().flatten() {
                let key = pair_key(oid, *nb);
                if let Some(e) = self.active.edges.remove(&key) {
                    self.completed.edges.insert(key, e);
                }
            }
        }
    }

    /// Fold one non-empty frame into the graph.
    pub fn push(&mut self, frame: &FrameObjects) {
        while frame.fid > self.next_checkpoint {
            let at = self.next_checkpoint;
            self.checkpoint(at);
            self.next_checkpoint += self.th_track;
        }
        for o in &frame.objects {
            self.restore(o.oid);
            self.last_seen.insert(o.oid, frame.fid);
        }
        for (i, a) in frame.objects.iter().enumerate() {
            for b in &frame.objects[i + 1..] {
                self.adjacency.entry(a.oid).or_default().insert(b.oid);
                self.adjacency.entry(b.oid).or_default().insert(a.oid);
            }
        }
        self.active.update(frame);
    }

    /// Number of checkpoints taken so far.
    pub fn checkpoints(&self) -> usize {
        self.checkpoints
    }

    /// Nodes currently held in the working (not yet flushed) graph.
    pub fn active_nodes(&self) -> usize {
        self.active.nodes.len()
    }

    /// Current state of the whole graph (working plus completed parts).
    pub fn snapshot(&self) -> SgvGraph {
        let mut g = self.completed.clone();
        g.nodes
            .extend(self.active.nodes.iter().map(|(k, v)| (*k, v.clone())));
        g.edges
            .extend(self.active.edges.iter().map(|(k, v)| (*k, v.clone())));
        g
    }

    /// Finish the pass and return the complete per-video graph.
    pub fn finish(self) -> SgvGraph {
        let mut g = self.completed;
        g.nodes.extend(self.active.nodes);
        g.edges.extend(self.active.edges);
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ObjectObs;

    fn frame(fid: u64, objs: &[(u64, f64, f64)]) -> FrameObjects {
        FrameObjects {
            fid,
            objects: objs
                .iter()
                .map(|&(o, x, y)| ObjectObs {
                    oid: o,
                    cl: "person".into(),
                    clc: 0.5,
                    centroid: [x, y],
                })
                .collect(),
        }
    }

    #[test]
    fn example_trace_has_six_nodes_and_two_components() {
        let mut g = SgvGraph::default();
        g.update(&frame(29, &[(1, 0., 0.), (2, 1., 0.), (4, 2., 0.), (5, 3., 0.)]));
        g.update(&frame(31, &[(1, 0., 0.), (2, 5., 0.)]));
        g.update(&frame(80, &[(64, 0., 0.), (66, 0., 9.)]));
        assert_eq!(g.nodes.len(), 6);
        let comps = g.components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], [1, 2, 4, 5].into_iter().collect());
        assert_eq!(comps[1], [64, 66].into_iter().collect());
        assert_eq!(g.nodes[&1].frames, vec![(29, 4), (31, 2)]);
        let c = g.characteristics();
        assert_eq!((c.components, c.largest_component, c.smallest_component), (2, 4, 2));
        assert_eq!((c.max_degree, c.min_degree, c.singletons), (3, 1, 0));
        assert_eq!((c.max_component_frames, c.min_component_frames), (2, 1));
        let s = g.frame_summary();
        assert_eq!((s.frame_count, s.max_objs, s.max_obj_frames), (3, 4, vec![29]));
    }

    #[test]
    fn first_observation_labels_both_extremes() {
        let mut g = SgvGraph::default();
        g.update(&frame(3, &[(1, 0., 0.), (2, 6., 8.)]));
        let e = &g.edges[&(1, 2)];
        assert_eq!(e.min, EdgeExtreme { dist: 10.0, frames: vec![3] });
        assert_eq!(e.max, EdgeExtreme { dist: 10.0, frames: vec![3] });
    }

    #[test]
    fn edge_update_rule() {
        let mut e = SgvEdge {
            min: EdgeExtreme { dist: 10.0, frames: vec![5] },
            max: EdgeExtreme { dist: 20.0, frames: vec![9] },
        };
        e.observe(12, 10.0);
        assert_eq!(e.min.frames, vec![5, 12]);
        assert_eq!(e.max, EdgeExtreme { dist: 20.0, frames: vec![9] });
        e.observe(13, 25.0);
        assert_eq!(e.max, EdgeExtreme { dist: 25.0, frames: vec![13] });
        e.observe(14, 15.0);
        assert_eq!(e.min.frames, vec![5, 12]);
        assert_eq!(e.max.frames, vec![13]);
    }

    #[test]
    fn frame_labels_sort_by_count_then_fid() {
        let mut g = SgvGraph::default();
        g.update(&frame(1, &[(1, 0., 0.)]));
        g.update(&frame(2, &[(1, 0., 0.), (2, 1., 1.)]));
        g.update(&frame(3, &[(1, 0., 0.)]));
        g.update(&frame(4, &[(1, 0., 0.), (3, 1., 1.)]));
        assert_eq!(g.nodes[&1].frames, vec![(2, 2), (4, 2), (1, 1), (3, 1)]);
    }

    #[test]
    fn class_confidence_keeps_the_maximum_per_label() {
        let mut g = SgvGraph::default();
        let mut f = frame(1, &[(1, 0., 0.)]);
        f.objects[0].clc = 0.4;
        g.update(&f);
        f.fid = 2;
        f.objects[0].clc = 0.9;
        g.update(&f);
        f.fid = 3;
        f.objects[0].clc = 0.6;
        f.objects[0].cl = "bag".into();
        g.update(&f);
        assert_eq!(g.nodes[&1].labels["person"], 0.9);
        assert_eq!(g.nodes[&1].labels["bag"], 0.6);
    }

    #[test]
    fn flushing_never_changes_the_result() {
        let frames: Vec<FrameObjects> = (1..=40u64)
            .map(|f| {
                let mut objs = vec![(1, f as f64, 0.0)];
                if f % 7 != 0 {
                    objs.push((2, 0.0, f as f64));
                }
                if f < 10 || f > 30 {
                    objs.push((3, 5.0, 5.0));
                }
                if f > 12 && f < 18 {
                    objs.push((4, 9.0, 1.0));
                }
                frame(f, &objs)
            })
            .collect();
        let mut reference = SgvGraph::default();
        frames.iter().for_each(|f| reference.update(f));
        for th in [1, 2, 3, 5, 8, 40, 1000] {
            let mut b = SgvBuilder::new(th);
            frames.iter().for_each(|f| b.push(f));
            if th <= 5 {
                assert!(b.checkpoints() > 0);
            }
            assert_eq!(b.finish(), reference, "th_track = {th}");
        }
        let mut b = SgvBuilder::new(3);
        frames[..20].iter().for_each(|f| b.push(f));
        assert!(b.active_nodes() < b.snapshot().nodes.len());
    }
}
