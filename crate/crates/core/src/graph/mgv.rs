//! A set of balanced per-video graphs that never split a connected component.
//!
//! Frames are streamed once. Every frame's objects form a clique, so they
//! belong to exactly one connected component. For each frame the builder
//! applies one of three cases:
//!
//! 1. the frame's objects touch components of a single graph: those
//!    components merge (with any new objects) inside that graph;
//! 2. they touch components of several graphs: the graph holding the
//!    largest touched component (lowest graph index on ties) receives all
//!    touched components, which merge there;
//! 3. they touch nothing: a new component is created, in a new graph when
//!    the last graph would exceed its balance target `μ + δ` and fewer than
//!    `maxGraph` graphs exist, otherwise in the last graph (overflow is
//!    allowed; data is never dropped).
//!
//! `δ` is the slack of the last graph: the size of its smallest multi-node
//! component (node balancing) or the frame count of its shortest
//! multi-frame component (frame balancing), 0 when there is none.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::sgv::{SgvBuilder, SgvGraph};
use super::FrameObjects;
use crate::error::{Error, Result};

/// Quantity the graphs are balanced on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BalanceBy {
    Node,
    Frame,
}

impl BalanceBy {
    /// Lowercase name used in files and on the command line.
    pub fn as_str(self) -> &'static str {
        match self {
            BalanceBy::Node => "node",
            BalanceBy::Frame => "frame",
        }
    }
}

impl std::str::FromStr for BalanceBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "node" => Ok(BalanceBy::Node),
            "frame" => Ok(BalanceBy::Frame),
            other => Err(Error::Config(format!("unknown balance mode {other:?}"))),
        }
    }
}

/// Partitioning parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgvParams {
    pub balance_by: BalanceBy,
    /// Smallest useful graph size (frames or nodes, per `balance_by`).
    pub min_graph_size: u64,
}

impl MgvParams {
    /// Parameters that produce at most `max_graph` graphs for a video with
    /// `frame_count` frames and `uo` objects.
    pub fn for_max_graph(balance_by: BalanceBy, max_graph: u64, frame_count: u64, uo: u64) -> Self {
        let total = match balance_by {
            BalanceBy::Node => uo,
            BalanceBy::Frame => frame_count,
        };
        MgvParams {
            balance_by,
            min_graph_size: (total / max_graph.max(1)).max(1),
        }
    }
}

/// A connected component: its objects and the frames they appear in.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub oids: BTreeSet<u64>,
    pub frames: BTreeSet<u64>,
}

/// One member graph of the set.
#[derive(Debug, Clone, PartialEq)]
pub struct MgvGraph {
    pub index: usize,
    pub graph: SgvGraph,
    pub components: Vec<Component>,
    /// Balance slack of this graph at the end of the pass.
    pub delta: u64,
}

impl MgvGraph {
    /// Frames covered by this graph.
    pub fn frame_count(&self) -> usize {
        self.components.iter().map(|c| c.frames.len()).sum()
    }
}

/// The finished partition.
#[derive(Debug, Clone, PartialEq)]
pub struct MgvSet {
    pub graphs: Vec<MgvGraph>,
    pub balance_by: BalanceBy,
    pub max_graph: u64,
    pub mu: f64,
}

impl MgvSet {
    /// Graphs whose balanced quantity lies outside `[μ − δ, μ + δ]`.
    ///
    /// Informational only: the last graph is usually under-filled and a
    /// single oversized component can force a graph above its target.
    pub fn unbalanced_graphs(&self) -> Vec<usize> {
        self.graphs
            .iter()
            .filter(|g| {
                let q = match self.balance_by {
                    BalanceBy::Node => g.graph.nodes.len() as f64,
                    BalanceBy::Frame => g.frame_count() as f64,
                };
                let d = g.delta as f64;
                q < self.mu - d || q > self.mu + d
            })
            .map(|g| g.index)
            .collect()
    }
}

/// Streaming builder for [`MgvSet`].
#[derive(Debug, Clone)]
pub struct MgvBuilder {
    balance_by: BalanceBy,
    max_graph: u64,
    mu: f64,
    store: SgvBuilder,
    comps: HashMap<usize, Component>,
    comp_graph: HashMap<usize, usize>,
    graph_comps: Vec<BTreeSet<usize>>,
    oid_comp: HashMap<u64, usize>,
    next_comp: usize,
}

impl MgvBuilder {
    /// Builder for a video with `frame_count` frames and `uo` unique objects.
    pub fn new(params: MgvParams, frame_count: u64, uo: u64, th_track: u64) -> Result<Self> {
        if params.min_graph_size == 0 {
            return Err(Error::Config("min_graph_size must be at least 1".into()));
        }
        let total = match params.balance_by {
            BalanceBy::Node => uo,
            BalanceBy::Frame => frame_count,
        };
        let max_graph = (total / params.min_graph_size).max(1);
        Ok(MgvBuilder {
            balance_by: params.balance_by,
            max_graph,
            mu: total as f64 / max_graph as f64,
            store: SgvBuilder::new(th_track),
            comps: HashMap::new(),
            comp_graph: HashMap::new(),
            graph_comps: Vec::new(),
            oid_comp: HashMap::new(),
            next_comp: 0,
        })
    }

    /// Upper bound on the number of graphs.
    pub fn max_graph(&self) -> u64 {
        self.max_graph
    }

    /// Balance target per graph.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Number of graphs created so far.
    pub fn graph_count(&self) -> usize {
        self.graph_comps.len()
    }

    fn delta(&self, g: usize) -> u64 {
        self.graph_comps[g]
            .iter()
            .map(|c| {
                let comp = &self.comps[c];
                match self.balance_by {
                    BalanceBy::Node => comp.oids.len(),
                    BalanceBy::Frame => comp.frames.len(),
                }
            })
            .filter(|&q| q > 1)
            .min()
            .unwrap_or(0) as u64
    }

    fn quantity(&self, g: usize) -> usize {
        self.graph_comps[g]
            .iter()
            .map(|c| match self.balance_by {
                BalanceBy::Node => self.comps[c].oids.len(),
                BalanceBy::Frame => self.comps[c].frames.len(),
            })
            .sum()
    }

    fn insert_component(&mut self, g: usize, comp: Component) {
        let id = self.next_comp;
        self.next_comp += 1;
        for o in &comp.oids {
            self.oid_comp.insert(*o, id);
        }
        self.comps.insert(id, comp);
        self.comp_graph.insert(id, g);
        self.graph_comps[g].insert(id);
    }

    fn remove_component(&mut self, id: usize) -> Component {
        let g = self.comp_graph.remove(&id).expect("component has a graph");
        self.graph_comps[g].remove(&id);
        self.comps.remove(&id).expect("component exists")
    }

    /// Fold one non-empty frame into the partition.
    pub fn push(&mut self, frame: &FrameObjects) {
        if frame.is_empty() {
            return;
        }
        self.store.push(frame);
        let oids: BTreeSet<u64> = frame.objects.iter().map(|o| o.oid).collect();
        let touched: BTreeSet<usize> = oids
            .iter()
            .filter_map(|o| self.oid_comp.get(o).copied())
            .collect();

        let target = if touched.is_empty() {
            let added = match self.balance_by {
                BalanceBy::Node => oids.len(),
                BalanceBy::Frame => 1,
            };
            match self.graph_comps.len() {
                0 => self.new_graph(),
                n => {
                    let last = n - 1;
                    let over = (self.quantity(last) + added) as f64
                        > self.mu + self.delta(last) as f64;
                    if over && (n as u64) < self.max_graph {
                        self.new_graph()
                    } else {
                        last
                    }
                }
            }
        } else {
            // Largest touched component decides; ties go to the lowest graph index.
            touched
                .iter()
                .map(|c| (self.comps[c].oids.len(), self.comp_graph[c]))
                .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
                .map(|(_, g)| g)
                .expect("touched is non-empty")
        };

        let mut merged = Component {
            oids,
            frames: BTreeSet::from([frame.fid]),
        };
        for id in touched {
            let c = self.remove_component(id);
            merged.oids.extend(c.oids);
            merged.frames.extend(c.frames);
        }
        self.insert_component(target, merged);
    }

    fn new_graph(&mut self) -> usize {
        self.graph_comps.push(BTreeSet::new());
        self.graph_comps.len() - 1
    }

    /// Finish the pass and materialise every member graph.
    pub fn finish(self) -> MgvSet {
        let deltas: Vec<u64> = (0..self.graph_comps.len()).map(|g| self.delta(g)).collect();
        let whole = self.store.finish();
        let graphs = (0..self.graph_comps.len())
            .map(|g| {
                let mut components: Vec<Component> = self.graph_comps[g]
                    .iter()
                    .map(|c| self.comps[c].clone())
                    .collect();
                components.sort_by_key(|c| *c.oids.first().expect("component is non-empty"));
                let graph = whole.subgraph(components.iter().flat_map(|c| c.oids.iter()));
                MgvGraph {
                    index: g,
                    graph,
                    components,
                    delta: deltas[g],
                }
            })
            .collect();
        MgvSet {
            graphs,
            balance_by: self.balance_by,
            max_graph: self.max_graph,
            mu: self.mu,
        }
    }
}

/// Assignment of every object to the member graph holding it.
pub fn graph_of_objects(set: &MgvSet) -> BTreeMap<u64, usize> {
    set.graphs
        .iter()
        .flat_map(|g| g.graph.nodes.keys().map(move |o| (*o, g.index)))
        .collect()
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
                    centroid: [o as f64, fid as f64],
                })
                .collect(),
        }
    }

    #[test]
    fn first_frame_creates_one_graph_with_one_component() {
        let mut b = MgvBuilder::new(
            MgvParams { balance_by: BalanceBy::Node, min_graph_size: 1 },
            10,
            3,
            10,
        )
        .unwrap();
        b.push(&frame(1, &[1, 2, 3]));
        let set = b.finish();
        assert_eq!(set.graphs.len(), 1);
        assert_eq!(set.graphs[0].components.len(), 1);
        assert_eq!(set.graphs[0].graph.nodes.len(), 3);
    }

    #[test]
    fn touching_two_graphs_shifts_components() {
        // Node balancing with μ = 1: every disjoint frame opens a new graph.
        let mut b = MgvBuilder::new(
            MgvParams { balance_by: BalanceBy::Node, min_graph_size: 1 },
            10,
            4,
            10,
        )
        .unwrap();
        b.push(&frame(1, &[1, 2]));
        b.push(&frame(2, &[3, 4]));
        assert_eq!(b.graph_count(), 2);
        b.push(&frame(3, &[2, 3]));
        let set = b.finish();
        assert_eq!(set.graphs[0].components.len(), 1);
        assert_eq!(
            set.graphs[0].components[0].oids,
            [1, 2, 3, 4].into_iter().collect()
        );
        assert_eq!(set.graphs[0].components[0].frames, [1, 2, 3].into_iter().collect());
        assert!(set.graphs[1].components.is_empty());
        assert_eq!(set.graphs[0].graph.edges.len(), 3);
    }

    #[test]
    fn touching_one_graph_merges_inside_it() {
        let mut b = MgvBuilder::new(
            MgvParams { balance_by: BalanceBy::Frame, min_graph_size: 100 },
            10,
            4,
            10,
        )
        .unwrap();
        b.push(&frame(1, &[1, 2]));
        b.push(&frame(2, &[3, 4]));
        b.push(&frame(3, &[2, 3, 9]));
        let set = b.finish();
        assert_eq!(set.graphs.len(), 1);
        assert_eq!(set.graphs[0].components.len(), 1);
        assert_eq!(set.graphs[0].components[0].oids.len(), 5);
    }

    #[test]
    fn frame_balancing_opens_a_graph_once_the_target_is_reached() {
        // F = 12, min size 4 → maxGraph = 3, μ = 4.
        let mut b = MgvBuilder::new(
            MgvParams { balance_by: BalanceBy::Frame, min_graph_size: 4 },
            12,
            10,
            12,
        )
        .unwrap();
        assert_eq!((b.max_graph(), b.mu()), (3, 4.0));
        // Component {1,2} seen in 2 frames → δ = 2; target μ + δ = 6.
        for f in 1..=2 {
            b.push(&frame(f, &[1, 2]));
        }
        for f in 3..=6 {
            b.push(&frame(f, &[10 + f]));
        }
        assert_eq!(b.graph_count(), 1, "6 frames fit within μ + δ");
        b.push(&frame(7, &[30]));
        assert_eq!(b.graph_count(), 2, "a 7th disjoint frame opens graph 2");
        let set = b.finish();
        assert_eq!(set.graphs[0].frame_count(), 6);
        assert_eq!(set.graphs[1].frame_count(), 1);
    }

    #[test]
    fn graph_count_never_exceeds_the_maximum() {
        let mut b = MgvBuilder::new(
            MgvParams { balance_by: BalanceBy::Node, min_graph_size: 2 },
            20,
            20,
            20,
        )
        .unwrap();
        for f in 1..=20 {
            b.push(&frame(f, &[f]));
        }
        let set = b.finish();
        assert_eq!(set.graphs.len(), 10);
        assert_eq!(set.graphs.iter().map(|g| g.graph.nodes.len()).sum::<usize>(), 20);
    }
}
