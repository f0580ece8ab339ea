//! Group detection: which objects form clusters of a queried size, and in
//! which frames.
//!
//! Every algorithm clusters the bounding-box centroids of one frame at a
//! time with K-means + Elbow (or, for the heuristic, cheaper simple
//! clustering with carried centroids) and feeds the clusters through
//! [`update_output_clusters`]. They differ only in *which* frames get
//! clustered:
//!
//! * the baseline clusters every frame holding at least three objects;
//! * [`gc_heuristic`] walks the per-frame graphs in order and re-runs full
//!   clustering only when a heuristic (object-set dissimilarity, quality
//!   drop or cluster growth) or the dropped-frame budget asks for it;
//! * [`histogram_of_objects`] visits frames by decreasing object count and
//!   stops once no remaining frame can hold a qualifying group;
//! * [`vertex_traversal`] walks each vertex's frame list of a per-video
//!   graph (or one member of a partition) by decreasing object count.
//!
//! Outputs of disjoint member graphs are merged by
//! [`compose_clustering_results`]; accuracy is scored with
//! [`f1_against_baseline`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{kmeans_elbow, silhouette_scaled, simple_cluster, Clustering, Point};
use crate::error::{Error, Result};
use crate::graph::bgf::{SgfFile, SgvFile};
use crate::graph::idf::Idf;
use crate::text::{from_runs, to_runs};

/// Upper end of a size query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Clusters of exactly `s` objects.
    Exact,
    /// Clusters of more than `s` objects.
    Star,
    /// The largest clusters (at least `s` objects).
    Max,
    /// Clusters of `s..=p` objects.
    Upto(usize),
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Exact => f.write_str("exact"),
            Bound::Star => f.write_str("*"),
            Bound::Max => f.write_str("max"),
            Bound::Upto(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Bound {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "=" => Ok(Bound::Exact),
            "*" | "star" => Ok(Bound::Star),
            "max" => Ok(Bound::Max),
            _ => s
                .parse()
                .map(Bound::Upto)
                .map_err(|_| Error::Config(format!("size bound must be exact, *, max or a number, got {s:?}"))),
        }
    }
}

/// Which group sizes to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeQuery {
    pub s: usize,
    pub p: Bound,
}

impl SizeQuery {
    /// Checked constructor: `s ≥ 1` and `s ≤ p` for numeric bounds. A
    /// numeric bound equal to `s` is normalised to [`Bound::Exact`].
    pub fn new(s: usize, p: Bound) -> Result<Self> {
        if s < 1 {
            return Err(Error::Config("group size s must be at least 1".into()));
        }
        let p = match p {
            Bound::Upto(p) if p < s => {
                return Err(Error::Config(format!("size range [{s}, {p}] is empty")))
            }
            Bound::Upto(p) if p == s => Bound::Exact,
            other => other,
        };
        Ok(SizeQuery { s, p })
    }

    /// Largest groups of at least two objects.
    pub fn largest() -> Self {
        SizeQuery { s: 2, p: Bound::Max }
    }
}

/// Clustering-invocation counters and phase timings of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    /// K-means + Elbow executions.
    pub kmeans_calls: usize,
    /// Simple-clustering executions.
    pub simple_calls: usize,
    /// Frames fetched from the data file.
    pub fetches: usize,
    /// Frames the traversal looked at.
    pub visited_frames: usize,
    pub fetch_time: Duration,
    pub compute_time: Duration,
    pub traversal_time: Duration,
}

impl GroupStats {
    /// Sum of counters and times over several runs.
    pub fn total<'a>(all: impl IntoIterator<Item = &'a GroupStats>) -> GroupStats {
        all.into_iter().fold(GroupStats::default(), |mut a, b| {
            a.kmeans_calls += b.kmeans_calls;
            a.simple_calls += b.simple_calls;
            a.fetches += b.fetches;
            a.visited_frames += b.visited_frames;
            a.fetch_time += b.fetch_time;
            a.compute_time += b.compute_time;
            a.traversal_time += b.traversal_time;
            a
        })
    }
}

/// Detected groups: every reported object set with the frames it was found in.
///
/// Entries are keyed by their (sorted) object set, so the output does not
/// depend on the order in which frames were visited.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClusterOutput {
    pub entries: BTreeMap<Vec<u64>, BTreeSet<u64>>,
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    size: usize,
    oids: Vec<u64>,
    frames: Vec<[u64; 2]>,
}

impl ClusterOutput {
    /// Record that `oids` form a cluster in frame `fid`.
    pub fn add(&mut self, oids: Vec<u64>, fid: u64) {
        self.entries.entry(oids).or_default().insert(fid);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every frame holding at least one reported cluster.
    pub fn frames(&self) -> BTreeSet<u64> {
        self.entries.values().flatten().copied().collect()
    }

    /// Size of the largest reported cluster (0 when empty).
    pub fn max_size(&self) -> usize {
        self.entries.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// JSON document `[{size, oids, frames: [[a,b],…]}]`.
    pub fn to_json(&self) -> Result<String> {
        let docs: Vec<EntryDoc> = self
            .entries
            .iter()
            .map(|(oids, frames)| EntryDoc {
                size: oids.len(),
                oids: oids.clone(),
                frames: to_runs(frames),
            })
            .collect();
        Ok(serde_json::to_string_pretty(&docs)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let docs: Vec<EntryDoc> = serde_json::from_str(text)?;
        let mut out = ClusterOutput::default();
        for d in docs {
            if d.size != d.oids.len() {
                return Err(Error::Validation(format!(
                    "entry {:?} declares size {}",
                    d.oids, d.size
                )));
            }
            let mut oids = d.oids;
            oids.sort_unstable();
            out.entries.entry(oids).or_default().extend(from_runs(&d.frames));
        }
        Ok(out)
    }
}

/// Fold one frame's clusters into the output; returns the (possibly raised) `s`.
///
/// For [`Bound::Max`], `s` acts as a floor that rises to the largest size
/// seen: a strictly larger cluster discards everything recorded so far and
/// an equal-size cluster is added. Other bounds filter by size and leave
/// `s` unchanged.
pub fn update_output_clusters(
    oc: &mut ClusterOutput,
    fid: u64,
    s: usize,
    p: Bound,
    clusters: &[Vec<u64>],
) -> usize {
    let mut s = s;
    for c in clusters.iter().filter(|c| !c.is_empty()) {
        let size = c.len();
        let keep = match p {
            Bound::Max if size > s => {
                oc.entries.clear();
                s = size;
                true
            }
            Bound::Max => size == s,
            Bound::Exact => size == s,
            Bound::Star => size > s,
            Bound::Upto(hi) => s <= size && size <= hi,
        };
        if keep {
            let mut oids = c.clone();
            oids.sort_unstable();
            oc.add(oids, fid);
        }
    }
    s
}

/// Merge the outputs of component-disjoint member graphs.
///
/// For [`Bound::Max`] only entries of the globally largest size survive;
/// otherwise all entries are kept.
pub fn compose_clustering_results(outputs: &[ClusterOutput], p: Bound) -> ClusterOutput {
    let top = outputs.iter().map(ClusterOutput::max_size).max().unwrap_or(0);
    let mut out = ClusterOutput::default();
    for o in outputs {
        for (oids, frames) in &o.entries {
            if p != Bound::Max || oids.len() == top {
                out.entries
                    .entry(oids.clone())
                    .or_default()
                    .extend(frames.iter().copied());
            }
        }
    }
    out
}

/// F1 score of the candidate's frame set against the baseline's.
///
/// Two empty outputs score 1.
pub fn f1_against_baseline(candidate: &ClusterOutput, baseline: &ClusterOutput) -> f64 {
    f1_of_frames(&candidate.frames(), &baseline.frames())
}

/// F1 of two frame sets (1 when both are empty).
pub fn f1_of_frames(candidate: &BTreeSet<u64>, baseline: &BTreeSet<u64>) -> f64 {
    if candidate.is_empty() && baseline.is_empty() {
        return 1.0;
    }
    let tp = candidate.intersection(baseline).count() as f64;
    if tp == 0.0 {
        return 0.0;
    }
    let p = tp / candidate.len() as f64;
    let r = tp / baseline.len() as f64;
    2.0 * p * r / (p + r)
}

/// Trigger for re-running full clustering in [`gc_heuristic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Heuristic {
    /// Jaccard dissimilarity of consecutive object sets ≥ threshold.
    JaccardDistance(f64),
    /// Relative drop of the scaled Silhouette score ≥ threshold.
    ClusterQuality(f64),
    /// Largest simple-clustering cluster larger than the last full result's.
    ClusterSize,
}

/// Configuration of [`gc_heuristic`]; the dropped-frame budget is `α · fps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicConfig {
    pub heuristic: Heuristic,
    pub alpha: f64,
}

impl HeuristicConfig {
    pub fn new(heuristic: Heuristic, alpha: f64) -> Result<Self> {
        let th = match heuristic {
            Heuristic::JaccardDistance(t) | Heuristic::ClusterQuality(t) => Some(t),
            Heuristic::ClusterSize => None,
        };
        if th.is_some_and(|t| !(0.0..=1.0).contains(&t)) {
            return Err(Error::Config("heuristic thresholds must lie in [0, 1]".into()));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Config("alpha must be a finite non-negative factor".into()));
        }
        Ok(HeuristicConfig { heuristic, alpha })
    }

    /// Parse a heuristic name (`jd`, `cq`, `cs`) with its threshold.
    pub fn parse(name: &str, threshold: Option<f64>, alpha: f64) -> Result<Self> {
        let need = |t: Option<f64>| {
            t.ok_or_else(|| Error::Config(format!("heuristic {name} needs a threshold")))
        };
        let h = match name.to_ascii_lowercase().as_str() {
            "jd" => Heuristic::JaccardDistance(need(threshold)?),
            "cq" => Heuristic::ClusterQuality(need(threshold)?),
            "cs" => Heuristic::ClusterSize,
            _ => return Err(Error::Config(format!("unknown heuristic {name:?}"))),
        };
        HeuristicConfig::new(h, alpha)
    }
}

/// Output and counters of one detection run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupResult {
    pub output: ClusterOutput,
    pub stats: GroupStats,
}

/// Shared per-run machinery: IDF access, clustering and timing.
struct Runner<'a> {
    idf: &'a Idf,
    cl: Option<&'a str>,
    stats: GroupStats,
    started: Instant,
}

struct FramePoints {
    oids: Vec<u64>,
    points: Vec<Point>,
}

impl<'a> Runner<'a> {
    fn new(idf: &'a Idf, cl: Option<&'a str>) -> Self {
        Runner {
            idf,
            cl,
            stats: GroupStats::default(),
            started: Instant::now(),
        }
    }

    /// Class-filtered objects of `fid` restricted to `allowed`, by oid.
    fn points(&mut self, fid: u64, allowed: impl Fn(u64) -> bool) -> Result<FramePoints> {
        let t = Instant::now();
        let mut records = self.idf.fetch_required(fid)?;
        self.stats.fetches += 1;
        self.stats.fetch_time += t.elapsed();
        records.retain(|r| self.cl.is_none_or(|c| r.cl == c) && allowed(r.oid));
        records.sort_by_key(|r| r.oid);
        Ok(FramePoints {
            oids: records.iter().map(|r| r.oid).collect(),
            points: records.iter().map(|r| r.bb.centroid()).collect(),
        })
    }

    fn full(&mut self, fp: &FramePoints) -> Result<Clustering> {
        let t = Instant::now();
        let c = kmeans_elbow(&fp.points);
        self.stats.kmeans_calls += 1;
        self.stats.compute_time += t.elapsed();
        c
    }

    fn simple(&mut self, fp: &FramePoints, centroids: &[Point]) -> Result<Clustering> {
        let t = Instant::now();
        let c = simple_cluster(&fp.points, centroids);
        self.stats.simple_calls += 1;
        self.stats.compute_time += t.elapsed();
        c
    }

    fn quality(&mut self, c: &Clustering, fp: &FramePoints) -> Option<f64> {
        let t = Instant::now();
        let q = silhouette_scaled(c, &fp.points).ok();
        self.stats.compute_time += t.elapsed();
        q
    }

    fn finish(mut self, output: ClusterOutput) -> GroupResult {
        let total = self.started.elapsed();
        self.stats.traversal_time = total.saturating_sub(self.stats.fetch_time + self.stats.compute_time);
        GroupResult {
            output,
            stats: self.stats,
        }
    }
}

fn clusters_of(c: &Clustering, oids: &[u64]) -> Vec<Vec<u64>> {
    c.members()
        .into_iter()
        .filter(|m| !m.is_empty())
        .map(|m| m.into_iter().map(|i| oids[i]).collect())
        .collect()
}

/// Heuristic clustering over the per-frame graphs.
///
/// Frames with at most two (class-filtered) objects are skipped; frames with
/// fewer than `s` objects are dropped and counted. Full K-means + Elbow runs
/// on the first eligible frame, once the dropped-frame count reaches
/// `α · fps`, whenever the selected heuristic fires, and — with
/// `generate_baseline` — on every frame holding at least three objects,
/// which yields the exhaustive baseline. Otherwise the frame is clustered by
/// one nearest-centroid pass with the previous frame's centroids; an empty
/// cluster in that pass forces full clustering.
pub fn gc_heuristic(
    sgf: &SgfFile,
    idf: &Idf,
    query: SizeQuery,
    cfg: HeuristicConfig,
    cl: Option<&str>,
    generate_baseline: bool,
) -> Result<GroupResult> {
    let th_drop = cfg.alpha * sgf.chars.fps as f64;
    let mut run = Runner::new(idf, cl);
    let mut oc = ClusterOutput::default();
    let mut s = query.s;
    let mut dropped = 0usize;
    let mut prev_oids: Option<BTreeSet<u64>> = None;
    let mut carried: Option<Vec<Point>> = None;
    let mut last_quality: Option<f64> = None;
    let mut last_largest = 0usize;
    for g in &sgf.set.graphs {
        let labeled = g.oids_with_class(cl);
        let n = labeled.len();
        run.stats.visited_frames += 1;
        if n <= 2 {
            continue;
        }
        if n < s && !generate_baseline {
            dropped += 1;
            continue;
        }
        let set: BTreeSet<u64> = labeled.iter().copied().collect();
        let jd_fires = match (cfg.heuristic, &prev_oids) {
            (Heuristic::JaccardDistance(th), Some(prev)) => {
                let inter = set.intersection(prev).count() as f64;
                let union = set.union(prev).count() as f64;
                1.0 - inter / union >= th
            }
            _ => false,
        };
        prev_oids = Some(set.clone());
        let fp = run.points(g.fid, |o| set.contains(&o))?;
        let full_now = generate_baseline
            || carried.is_none()
            || dropped as f64 >= th_drop
            || jd_fires;
        let clustering = if full_now {
            None
        } else {
            let centroids = carried.as_deref().expect("carried centroids");
            let sc = run.simple(&fp, centroids)?;
            let fires = !sc.empty_clusters.is_empty()
                || match cfg.heuristic {
                    Heuristic::ClusterQuality(th) => match (last_quality, run.quality(&sc, &fp)) {
                        (Some(qj), Some(qf)) if qf < qj => (qj - qf) / qj >= th,
                        _ => false,
                    },
                    Heuristic::ClusterSize => sc.largest_size() > last_largest,
                    Heuristic::JaccardDistance(_) => false,
                };
            (!fires).then_some(sc)
        };
        let clustering = match clustering {
            Some(sc) => sc,
            None => {
                let c = run.full(&fp)?;
                dropped = 0;
                last_largest = c.largest_size();
                if matches!(cfg.heuristic, Heuristic::ClusterQuality(_)) {
                    last_quality = run.quality(&c, &fp);
                }
                c
            }
        };
        s = update_output_clusters(&mut oc, g.fid, s, query.p, &clusters_of(&clustering, &fp.oids));
        carried = Some(clustering.centroids);
    }
    Ok(run.finish(oc))
}

/// Exhaustive baseline over the per-frame graphs: full clustering of every
/// frame with at least three (class-filtered) objects.
pub fn baseline_sgf(sgf: &SgfFile, idf: &Idf, query: SizeQuery, cl: Option<&str>) -> Result<GroupResult> {
    let cfg = HeuristicConfig {
        heuristic: Heuristic::ClusterSize,
        alpha: 0.0,
    };
    gc_heuristic(sgf, idf, query, cfg, cl, true)
}

/// Histogram of objects: bucket frames by object count, then cluster
/// buckets from the fullest down, stopping once the count falls below `s`
/// (which rises as larger groups are found when the query asks for the
/// largest groups).
pub fn histogram_of_objects(
    sgf: &SgfFile,
    idf: &Idf,
    query: SizeQuery,
    cl: Option<&str>,
) -> Result<GroupResult> {
    let mut run = Runner::new(idf, cl);
    let mut buckets: BTreeMap<usize, Vec<(u64, BTreeSet<u64>)>> = BTreeMap::new();
    for g in &sgf.set.graphs {
        let labeled: BTreeSet<u64> = g.oids_with_class(cl).into_iter().collect();
        let n = labeled.len();
        if n > 2 && n >= query.s {
            buckets.entry(n).or_default().push((g.fid, labeled));
        }
    }
    let mut oc = ClusterOutput::default();
    let mut s = query.s;
    'outer: for (n, frames) in buckets.iter().rev() {
        for (fid, labeled) in frames {
            if *n < s {
                break 'outer;
            }
            run.stats.visited_frames += 1;
            let fp = run.points(*fid, |o| labeled.contains(&o))?;
            let c = run.full(&fp)?;
            s = update_output_clusters(&mut oc, *fid, s, query.p, &clusters_of(&c, &fp.oids));
        }
    }
    Ok(run.finish(oc))
}

/// Vertex traversal over a per-video graph (whole video or one member).
///
/// Unless in baseline mode, the frames holding the graph's maximum object
/// count are clustered first (they give the largest achievable `s` early).
/// Then every (class-matching) vertex's frame list is walked by decreasing
/// object count, stopping at counts below `s` (below 3 in baseline mode);
/// each frame is visited at most once, and the walk ends as soon as every
/// frame of the graph has been visited.
pub fn vertex_traversal(
    file: &SgvFile,
    idf: &Idf,
    query: SizeQuery,
    cl: Option<&str>,
    generate_baseline: bool,
) -> Result<GroupResult> {
    let graph = &file.graph;
    let mut run = Runner::new(idf, cl);
    let mut oc = ClusterOutput::default();
    let mut s = query.s;
    let mut visited: HashSet<u64> = HashSet::new();
    let total = file.summary.frame_count;
    let in_graph = |o: u64| graph.nodes.contains_key(&o);

    // Visits a frame once; returns whether every frame has now been visited.
    let mut visit = |fid: u64, n: usize, s: &mut usize, run: &mut Runner| -> Result<bool> {
        if visited.insert(fid) {
            run.stats.visited_frames += 1;
            if n >= 3 {
                let fp = run.points(fid, in_graph)?;
                if fp.points.len() >= 3 {
                    let c = run.full(&fp)?;
                    *s = update_output_clusters(&mut oc, fid, *s, query.p, &clusters_of(&c, &fp.oids));
                }
            }
        }
        Ok(visited.len() >= total)
    };

    let mut done = total == 0;
    if !generate_baseline && file.summary.max_objs >= s.max(3) {
        for &fid in &file.summary.max_obj_frames {
            done = visit(fid, file.summary.max_objs, &mut s, &mut run)?;
        }
    }
    'nodes: for node in graph.nodes.values().filter(|n| n.has_class(cl)) {
        if done {
            break;
        }
        for &(fid, n) in &node.frames {
            let floor = if generate_baseline { 3 } else { s };
            if n < floor {
                break;
            }
            if visit(fid, n, &mut s, &mut run)? {
                break 'nodes;
            }
        }
    }
    Ok(run.finish(oc))
}

/// Run [`vertex_traversal`] over every member graph concurrently (at most
/// `threads` at a time; `None` uses all cores) and compose the outputs.
pub fn vertex_traversal_members(
    members: &[SgvFile],
    idf: &Idf,
    query: SizeQuery,
    cl: Option<&str>,
    generate_baseline: bool,
    threads: Option<usize>,
) -> Result<(ClusterOutput, Vec<GroupResult>)> {
    let work = || {
        members
            .par_iter()
            .map(|m| vertex_traversal(m, idf, query, cl, generate_baseline))
            .collect::<Result<Vec<_>>>()
    };
    let results = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let outputs: Vec<ClusterOutput> = results.iter().map(|r| r.output.clone()).collect();
    Ok((compose_clustering_results(&outputs, query.p), results))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u64]) -> Vec<u64> {
        v.to_vec()
    }

    #[test]
    fn larger_cluster_resets_max_output() {
        let mut oc = ClusterOutput::default();
        let s = update_output_clusters(&mut oc, 1, 2, Bound::Max, &[ids(&[1, 2, 3])]);
        assert_eq!(s, 3);
        let s = update_output_clusters(&mut oc, 2, s, Bound::Max, &[ids(&[1, 2, 3, 4, 5]), ids(&[6])]);
        assert_eq!(s, 5);
        assert_eq!(oc.entries.len(), 1);
        assert_eq!(oc.entries[&ids(&[1, 2, 3, 4, 5])], BTreeSet::from([2]));
        let s = update_output_clusters(&mut oc, 3, s, Bound::Max, &[ids(&[5, 4, 3, 2, 1])]);
        assert_eq!(s, 5);
        assert_eq!(oc.entries.len(), 1);
        assert_eq!(oc.entries[&ids(&[1, 2, 3, 4, 5])], BTreeSet::from([2, 3]));
        update_output_clusters(&mut oc, 4, s, Bound::Max, &[ids(&[7, 8, 9, 10, 11])]);
        assert_eq!(oc.entries.len(), 2);
    }

    #[test]
    fn size_filters() {
        let clusters = [ids(&[1]), ids(&[2, 3, 4]), ids(&[5, 6, 7, 8, 9])];
        let mut oc = ClusterOutput::default();
        update_output_clusters(&mut oc, 1, 2, Bound::Upto(4), &clusters);
        assert_eq!(oc.entries.keys().cloned().collect::<Vec<_>>(), vec![ids(&[2, 3, 4])]);
        let mut oc = ClusterOutput::default();
        update_output_clusters(&mut oc, 1, 3, Bound::Star, &clusters);
        assert_eq!(oc.max_size(), 5);
        assert_eq!(oc.entries.len(), 1);
        let mut oc = ClusterOutput::default();
        update_output_clusters(&mut oc, 1, 1, Bound::Exact, &clusters);
        assert_eq!(oc.entries.keys().cloned().collect::<Vec<_>>(), vec![ids(&[1])]);
        let mut oc = ClusterOutput::default();
        let s = update_output_clusters(&mut oc, 1, 6, Bound::Max, &clusters);
        assert_eq!((s, oc.is_empty()), (6, true));
    }

    #[test]
    fn compose_keeps_globally_largest() {
        let mk = |oids: &[u64], f: u64| {
            let mut o = ClusterOutput::default();
            o.add(oids.to_vec(), f);
            o
        };
        let outs = [mk(&[1, 2, 3, 4], 1), mk(&[10, 11, 12, 13, 14, 15, 16], 2), mk(&[20, 21, 22, 23, 24, 25, 26], 3)];
        let c = compose_clustering_results(&outs, Bound::Max);
        assert_eq!(c.entries.len(), 2);
        assert!(c.entries.keys().all(|k| k.len() == 7));
        assert_eq!(compose_clustering_results(&outs[..1], Bound::Max), outs[0]);
        assert!(compose_clustering_results(&[ClusterOutput::default(), ClusterOutput::default()], Bound::Max).is_empty());
        assert_eq!(compose_clustering_results(&outs, Bound::Star).entries.len(), 3);
    }

    #[test]
    fn f1_cases() {
        let mk = |r: std::ops::RangeInclusive<u64>| {
            let mut o = ClusterOutput::default();
            for f in r {
                o.add(vec![1, 2], f);
            }
            o
        };
        assert_eq!(f1_against_baseline(&mk(1..=10), &mk(1..=10)), 1.0);
        assert!((f1_against_baseline(&mk(1..=8), &mk(1..=10)) - 8.0 / 9.0).abs() < 1e-12);
        assert_eq!(f1_against_baseline(&mk(1..=5), &mk(6..=10)), 0.0);
        assert_eq!(f1_against_baseline(&ClusterOutput::default(), &ClusterOutput::default()), 1.0);
    }

    #[test]
    fn json_round_trip() {
        let mut o = ClusterOutput::default();
        for f in [1, 2, 3, 7] {
            o.add(vec![3, 4], f);
        }
        o.add(vec![1, 5, 9], 4);
        let text = o.to_json().unwrap();
        assert!(text.contains("[\n      1,\n      3\n    ]") || text.contains("\"frames\""));
        assert_eq!(ClusterOutput::from_json(&text).unwrap(), o);
    }

    #[test]
    fn query_parsing() {
        assert_eq!("max".parse::<Bound>().unwrap(), Bound::Max);
        assert_eq!("*".parse::<Bound>().unwrap(), Bound::Star);
        assert_eq!(SizeQuery::new(3, Bound::Upto(3)).unwrap().p, Bound::Exact);
        assert!(SizeQuery::new(4, Bound::Upto(3)).is_err());
        assert!(SizeQuery::new(0, Bound::Max).is_err());
        assert!(HeuristicConfig::parse("jd", None, 1.0).is_err());
        assert!(HeuristicConfig::parse("cq", Some(1.5), 1.0).is_err());
        assert!(HeuristicConfig::parse("xx", None, 1.0).is_err());
        assert_eq!(
            HeuristicConfig::parse("CS", None, 1.0).unwrap().heuristic,
            Heuristic::ClusterSize
        );
    }
}
