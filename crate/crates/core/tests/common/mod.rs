//! Independent reference implementations ("oracles") and trace suites
//! shared by the integration and acceptance tests.
//!
//! The oracles work straight from in-memory traces and relations — no graph
//! models, data files or traversal order — so agreement with the library
//! checks the models and traversals, not just the clustering primitives.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use situ_core::approach::ApproachOutput;
use situ_core::cluster::kmeans_elbow;
use situ_core::groups::{update_output_clusters, ClusterOutput, SizeQuery};
use situ_core::rpp::{smatch, ArrableRelation, JoinCondition, Value};
use situ_core::synth::{generate, presets, GroundTruth};
use situ_core::trace::{Frame, Trace};

/// Seeded trace suite: `count` traces of 300–3000 frames with 3–20 objects.
pub fn trace_suite(count: u64) -> Vec<(u64, Trace)> {
    (1..=count)
        .map(|seed| {
            let frames = 300 + (seed * 977) % 2701;
            let objects = 3 + ((seed * 7) % 18) as usize;
            let (trace, _) = generate(&presets::random_groups(seed, frames, objects), seed)
                .expect("suite scenario generates");
            (seed, trace)
        })
        .collect()
}

/// Noise-free traces whose groups never change membership.
pub fn stable_suite(count: u64) -> Vec<(u64, Trace, GroundTruth)> {
    (1..=count)
        .map(|seed| {
            let frames = 300 + (seed * 311) % 900;
            let (trace, gt) =
                generate(&presets::stable_groups(seed, frames), seed).expect("stable scenario generates");
            (seed, trace, gt)
        })
        .collect()
}

/// Class-filtered objects of a frame, sorted by oid, with their centroids.
fn frame_points(frame: &Frame, cl: Option<&str>) -> (Vec<u64>, Vec<[f64; 2]>) {
    let mut recs: Vec<_> = frame
        .records
        .iter()
        .filter(|r| cl.is_none_or(|c| r.cl == c))
        .collect();
    recs.sort_by_key(|r| r.oid);
    (
        recs.iter().map(|r| r.oid).collect(),
        recs.iter().map(|r| r.bb.centroid()).collect(),
    )
}

/// Exhaustive group detection: cluster every frame holding at least three
/// objects, in frame order.
pub fn baseline_oracle(trace: &Trace, query: SizeQuery, cl: Option<&str>) -> ClusterOutput {
    let mut out = ClusterOutput::default();
    let mut s = query.s;
    for frame in &trace.frames {
        let (oids, points) = frame_points(frame, cl);
        if points.len() < 3 {
            continue;
        }
        let c = kmeans_elbow(&points).expect("clustering succeeds");
        let clusters: Vec<Vec<u64>> = c
            .members()
            .into_iter()
            .map(|m| m.into_iter().map(|i| oids[i]).collect())
            .collect();
        s = update_output_clusters(&mut out, frame.fid, s, query.p, &clusters);
    }
    out
}

/// Per-video graph structure recomputed from scratch.
pub struct GraphOracle {
    pub nodes: BTreeSet<u64>,
    pub edges: BTreeSet<(u64, u64)>,
    pub components: BTreeSet<BTreeSet<u64>>,
}

pub fn graph_oracle(trace: &Trace) -> GraphOracle {
    let mut nodes = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for f in &trace.frames {
        let oids: Vec<u64> = f.records.iter().map(|r| r.oid).collect();
        for (i, &a) in oids.iter().enumerate() {
            nodes.insert(a);
            for &b in &oids[i + 1..] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
    }
    // Connected components by repeated flooding.
    let mut adj: BTreeMap<u64, Vec<u64>> = nodes.iter().map(|&n| (n, Vec::new())).collect();
    for &(a, b) in &edges {
        adj.get_mut(&a).unwrap().push(b);
        adj.get_mut(&b).unwrap().push(a);
    }
    let mut seen = BTreeSet::new();
    let mut components = BTreeSet::new();
    for &n in &nodes {
        if seen.contains(&n) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut stack = vec![n];
        while let Some(x) = stack.pop() {
            if comp.insert(x) {
                seen.insert(x);
                stack.extend(adj[&x].iter().copied());
            }
        }
        components.insert(comp);
    }
    GraphOracle {
        nodes,
        edges,
        components,
    }
}

/// Brute-force monotone runs with stride 1: a step `[f−1, f]` counts when
/// both objects are present in both frames, the centroid distance changes
/// by more than `eps` and in the requested direction; consecutive steps
/// merge into one interval.
pub fn monotone_oracle(trace: &Trace, closer: bool, eps: f64) -> ApproachOutput {
    let mut pos: BTreeMap<u64, BTreeMap<u64, [f64; 2]>> = BTreeMap::new();
    for f in &trace.frames {
        for r in &f.records {
            pos.entry(r.oid).or_default().insert(f.fid, r.bb.centroid());
        }
    }
    let oids: Vec<u64> = pos.keys().copied().collect();
    let mut out = ApproachOutput::default();
    for (i, &a) in oids.iter().enumerate() {
        for &b in &oids[i + 1..] {
            let (pa, pb) = (&pos[&a], &pos[&b]);
            let dist = |f: u64| -> Option<f64> {
                let (x, y) = (pa.get(&f)?, pb.get(&f)?);
                Some(((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt())
            };
            let mut intervals: Vec<[u64; 2]> = Vec::new();
            for &f in pa.keys() {
                let (Some(prev), Some(cur)) = (f.checked_sub(1).and_then(dist), dist(f)) else {
                    continue;
                };
                let trend = if closer { cur < prev } else { cur > prev };
                if trend && (cur - prev).abs() > eps {
                    match intervals.last_mut() {
                        Some(last) if last[1] == f - 1 => last[1] = f,
                        _ => intervals.push([f - 1, f]),
                    }
                }
            }
            if !intervals.is_empty() {
                out.pairs.insert((a, b), intervals);
            }
        }
    }
    out
}

fn key_text(v: &Value) -> String {
    v.to_string()
}

/// Exhaustive join over every element pair of every group pair: the set
/// of matching (left key, right key) pairs and the comparisons performed.
pub fn exhaustive_join(
    left: &ArrableRelation,
    right: &ArrableRelation,
    cond: &JoinCondition,
) -> (BTreeSet<(String, String)>, usize) {
    let lk = left.relation.column(&left.key).unwrap();
    let rk = right.relation.column(&right.key).unwrap();
    let lc = left.relation.column(&cond.left).unwrap();
    let rc = right.relation.column(&cond.right).unwrap();
    let seq = |v: &Value| -> Vec<Vec<f64>> {
        match v {
            Value::Seq(s) => s
                .iter()
                .map(|e| match e {
                    Value::Vector(x) => x.clone(),
                    _ => panic!("vector elements expected"),
                })
                .collect(),
            _ => panic!("sequence expected"),
        }
    };
    let mut pairs = BTreeSet::new();
    let mut comparisons = 0;
    for lrow in &left.relation.rows {
        for rrow in &right.relation.rows {
            let mut hit = false;
            for a in seq(&lrow[lc]) {
                for b in seq(&rrow[rc]) {
                    comparisons += 1;
                    let d = smatch(&a, &b, cond.metric).unwrap();
                    let ok = match cond.op {
                        situ_core::rpp::CmpOp::Lt => d < cond.threshold,
                        situ_core::rpp::CmpOp::Le => d <= cond.threshold,
                        situ_core::rpp::CmpOp::Gt => d > cond.threshold,
                        situ_core::rpp::CmpOp::Ge => d >= cond.threshold,
                    };
                    hit |= ok;
                }
            }
            if hit {
                pairs.insert((key_text(&lrow[lk]), key_text(&rrow[rk])));
            }
        }
    }
    (pairs, comparisons)
}

/// A trace with its data file and whole-video models built in memory.
pub struct Bundle {
    pub trace: Trace,
    pub idf: situ_core::graph::idf::Idf,
    pub sgf: situ_core::graph::bgf::SgfFile,
    pub sgv: situ_core::graph::bgf::SgvFile,
}

pub fn bundle(trace: Trace) -> Bundle {
    use situ_core::graph::build::{build_models, BuildConfig, ModelKind};
    use situ_core::graph::idf::{idf_bytes, Idf};
    let sgf = build_models(&trace, &BuildConfig::new(ModelKind::Sgf)).unwrap();
    let sgv = build_models(&trace, &BuildConfig::new(ModelKind::Sgv)).unwrap();
    let idf = Idf::from_bytes(idf_bytes(&trace.chars, &sgf.frames).unwrap()).unwrap();
    Bundle {
        idf,
        sgf: sgf.sgf.unwrap(),
        sgv: sgv.sgv.unwrap(),
        trace,
    }
}

/// Member graphs of the partitioned model with at most `max_graph` graphs.
pub fn mgv_members(
    trace: &Trace,
    balance: situ_core::graph::mgv::BalanceBy,
    max_graph: u64,
) -> Vec<situ_core::graph::bgf::SgvFile> {
    use situ_core::graph::build::{build_models, BuildConfig, ModelKind};
    use situ_core::graph::mgv::MgvParams;
    let p = MgvParams::for_max_graph(balance, max_graph, trace.chars.frame_count, trace.meta.uo as u64);
    let cfg = BuildConfig::new(ModelKind::Mgv).with_mgv(balance, p.min_graph_size);
    build_models(trace, &cfg).unwrap().mgv_files()
}

/// Uniform draw in `[0, 1)`.
fn unit(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    use rand_chacha::rand_core::RngCore;
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// `count` random directions in `[-1, 1]^dim`.
fn random_centres(rng: &mut rand_chacha::ChaCha8Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| unit(rng) * 2.0 - 1.0).collect())
        .collect()
}

/// Random relation `(gid, t, fv)` with `groups` groups of 1..=`max_len`
/// rows. With `centres`, vectors are small perturbations of a few shared
/// directions (clustered similarity); otherwise they are uniform.
pub fn random_relation(
    rng: &mut rand_chacha::ChaCha8Rng,
    groups: usize,
    max_len: usize,
    dim: usize,
    centres: Option<usize>,
) -> situ_core::rpp::RppRelation {
    let centre_vecs = random_centres(rng, centres.unwrap_or(0), dim);
    relation_around(rng, groups, max_len, dim, &centre_vecs)
}

/// Two random relations whose vectors perturb the same `centres`
/// directions, so elements of both sides are frequently similar.
pub fn clustered_pair(
    rng: &mut rand_chacha::ChaCha8Rng,
    groups: usize,
    max_len: usize,
    dim: usize,
    centres: usize,
) -> (situ_core::rpp::RppRelation, situ_core::rpp::RppRelation) {
    let centre_vecs = random_centres(rng, centres, dim);
    (
        relation_around(rng, groups, max_len, dim, &centre_vecs),
        relation_around(rng, groups, max_len, dim, &centre_vecs),
    )
}

fn relation_around(
    rng: &mut rand_chacha::ChaCha8Rng,
    groups: usize,
    max_len: usize,
    dim: usize,
    centre_vecs: &[Vec<f64>],
) -> situ_core::rpp::RppRelation {
    use situ_core::rpp::{Column, ColumnKind, RppRelation};
    let mut rows = Vec::new();
    for g in 0..groups {
        let len = 1 + (unit(rng) * max_len as f64) as usize % max_len;
        for t in 0..len {
            let v: Vec<f64> = if centre_vecs.is_empty() {
                (0..dim).map(|_| unit(rng) * 2.0 - 1.0).collect()
            } else {
                let c = &centre_vecs[(unit(rng) * centre_vecs.len() as f64) as usize % centre_vecs.len()];
                c.iter().map(|x| x + (unit(rng) - 0.5) * 0.02).collect()
            };
            rows.push(vec![Value::Int(g as i64), Value::Int(t as i64), Value::Vector(v)]);
        }
    }
    RppRelation::new(
        vec![
            Column::new("gid", ColumnKind::Numeric),
            Column::new("t", ColumnKind::Numeric),
            Column::new("fv", ColumnKind::Vector(dim)),
        ],
        rows,
    )
    .unwrap()
}

/// The two-sided join example: left groups 1 and 2, right groups 5, 7 and
/// 8. Group 1 matches group 8 on their first elements; group 2 matches
/// group 7 on group 2's second element and group 7's middle element, which
/// end-element compression removes. Threshold 0.5 under the euclidean
/// metric means a raw distance of at most 1.
pub fn join_fixture() -> (ArrableRelation, ArrableRelation, JoinCondition) {
    use situ_core::rpp::{r2a, Column, ColumnKind, Metric, RppRelation};
    let rel = |rows: &[(i64, i64, [f64; 2])]| {
        RppRelation::new(
            vec![
                Column::new("oid", ColumnKind::Numeric),
                Column::new("fid", ColumnKind::Numeric),
                Column::new("fv", ColumnKind::Vector(2)),
            ],
            rows.iter()
                .map(|&(o, f, v)| vec![Value::Int(o), Value::Int(f), Value::Vector(v.to_vec())])
                .collect(),
        )
        .unwrap()
    };
    let left = rel(&[
        (1, 1, [0.0, 0.0]),
        (1, 2, [0.0, 5.0]),
        (2, 1, [10.0, 0.0]),
        (2, 2, [20.0, 0.0]),
    ]);
    let right = rel(&[
        (5, 1, [50.0, 50.0]),
        (7, 1, [30.0, 10.0]),
        (7, 2, [20.0, 0.5]),
        (7, 3, [40.0, 10.0]),
        (8, 1, [0.3, 0.0]),
        (8, 2, [60.0, 60.0]),
    ]);
    (
        r2a(&left, "oid", "fid").unwrap(),
        r2a(&right, "oid", "fid").unwrap(),
        JoinCondition::similar("fv", "fv", Metric::Euclidean, 0.5),
    )
}
