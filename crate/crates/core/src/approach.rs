//! Approach detection: intervals over which two objects move monotonically
//! closer together (or farther apart).
//!
//! Distances are sampled every `k` frames. A step whose distance change
//! exceeds `ε` in the queried direction extends the pair's open interval
//! when that interval ends at the previous sample, and opens a new interval
//! `[f−k, f]` otherwise. [`detect_sgv`] walks each edge of a per-video
//! graph and looks the boxes up in the data file; [`detect_sgf`] streams the
//! per-frame graphs and reads distances straight from their edge labels.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::bgf::{SgfFile, SgvFile};
use crate::graph::idf::Idf;
use crate::graph::pair_key;
use crate::trace::{TraceMeta, VideoCharacteristics};

/// Default perturbation filter, pixels.
pub const DEFAULT_EPSILON: f64 = 5.0;

/// Which monotone trend to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    MovingCloser,
    FarApart,
}

impl Direction {
    fn holds(self, prev: f64, cur: f64) -> bool {
        match self {
            Direction::MovingCloser => cur < prev,
            Direction::FarApart => cur > prev,
        }
    }
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "moving_closer" | "closer" | "approach" => Ok(Direction::MovingCloser),
            "far_apart" | "apart" | "retreat" => Ok(Direction::FarApart),
            _ => Err(Error::Config(format!("unknown direction {s:?}"))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::MovingCloser => "moving_closer",
            Direction::FarApart => "far_apart",
        })
    }
}

/// How the sampling stride `k` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KMode {
    HalfFps,
    Fps,
    /// Adaptive rule with half the average object duration.
    AdaptiveHalf,
    /// Adaptive rule with the full average object duration.
    AdaptiveFull,
    Fixed(u64),
}

impl FromStr for KMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase().replace('-', "_");
        match s.as_str() {
            "half_fps" => Ok(KMode::HalfFps),
            "fps" => Ok(KMode::Fps),
            "adaptive_half" => Ok(KMode::AdaptiveHalf),
            "adaptive_full" => Ok(KMode::AdaptiveFull),
            _ => {
                let n = s.strip_prefix("fixed:").unwrap_or(&s);
                match n.parse::<u64>() {
                    Ok(k) if k >= 1 => Ok(KMode::Fixed(k)),
                    _ => Err(Error::Config(format!(
                        "k mode must be half_fps, fps, adaptive_half, adaptive_full or a positive integer, got {s:?}"
                    ))),
                }
            }
        }
    }
}

impl fmt::Display for KMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KMode::HalfFps => f.write_str("half_fps"),
            KMode::Fps => f.write_str("fps"),
            KMode::AdaptiveHalf => f.write_str("adaptive_half"),
            KMode::AdaptiveFull => f.write_str("adaptive_full"),
            KMode::Fixed(k) => write!(f, "{k}"),
        }
    }
}

/// Parameters of approach detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproachConfig {
    pub direction: Direction,
    /// Minimum distance change per step, pixels.
    pub epsilon: f64,
    pub k_mode: KMode,
}

impl Default for ApproachConfig {
    fn default() -> Self {
        ApproachConfig {
            direction: Direction::MovingCloser,
            epsilon: DEFAULT_EPSILON,
            k_mode: KMode::AdaptiveHalf,
        }
    }
}

impl ApproachConfig {
    pub fn new(direction: Direction, epsilon: f64, k_mode: KMode) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::Config("epsilon must be a finite non-negative distance".into()));
        }
        if k_mode == KMode::Fixed(0) {
            return Err(Error::Config("a fixed k must be at least 1".into()));
        }
        Ok(ApproachConfig {
            direction,
            epsilon,
            k_mode,
        })
    }
}

/// The adaptive stride rule.
///
/// When either duration is shorter than half a second of video the larger
/// one is used, otherwise the smaller; `half` halves the average duration
/// first. The result is rounded down and at least 1.
pub fn adaptive_k(min_duration: f64, avg_duration: f64, fps: u32, half: bool) -> u64 {
    let avg = if half { avg_duration / 2.0 } else { avg_duration };
    let half_second = fps as f64 / 2.0;
    let k = if min_duration < half_second || avg < half_second {
        min_duration.max(avg)
    } else {
        min_duration.min(avg)
    };
    (k.floor() as u64).max(1)
}

/// Sampling stride for a video; the average duration is `F / UO`.
pub fn choose_k(meta: &TraceMeta, chars: &VideoCharacteristics, mode: KMode) -> Result<u64> {
    let fps = chars.fps;
    Ok(match mode {
        KMode::Fixed(k) => k.max(1),
        KMode::HalfFps => (fps as u64 / 2).max(1),
        KMode::Fps => (fps as u64).max(1),
        KMode::AdaptiveHalf | KMode::AdaptiveFull => {
            if meta.uo == 0 {
                return Err(Error::NoObjects);
            }
            let avg = chars.frame_count as f64 / meta.uo as f64;
            adaptive_k(meta.min_duration as f64, avg, fps, mode == KMode::AdaptiveHalf)
        }
    })
}

/// Closed frame intervals per normalised object pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ApproachOutput {
    pub pairs: BTreeMap<(u64, u64), Vec<[u64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct PairDoc {
    a: u64,
    b: u64,
    intervals: Vec<[u64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct OutputDoc {
    pairs: Vec<PairDoc>,
}

impl ApproachOutput {
    /// Total number of detected intervals.
    pub fn count_instances(&self) -> usize {
        self.pairs.values().map(Vec::len).sum()
    }

    /// JSON document `{"pairs":[{"a","b","intervals":[[s,e],…]}]}`.
    pub fn to_json(&self) -> Result<String> {
        let doc = OutputDoc {
            pairs: self
                .pairs
                .iter()
                .map(|(&(a, b), iv)| PairDoc {
                    a,
                    b,
                    intervals: iv.clone(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: OutputDoc = serde_json::from_str(text)?;
        let mut out = ApproachOutput::default();
        for p in doc.pairs {
            if out.pairs.insert(pair_key(p.a, p.b), p.intervals).is_some() {
                return Err(Error::Validation(format!("pair ({}, {}) listed twice", p.a, p.b)));
            }
        }
        Ok(out)
    }
}

/// Key-wise union of outputs from component-disjoint member graphs.
pub fn compose_approach(outputs: &[ApproachOutput]) -> Result<ApproachOutput> {
    let mut out = ApproachOutput::default();
    for o in outputs {
        for (k, v) in &o.pairs {
            if out.pairs.insert(*k, v.clone()).is_some() {
                return Err(Error::Disjointness(format!(
                    "pair ({}, {}) reported by two member graphs",
                    k.0, k.1
                )));
            }
        }
    }
    Ok(out)
}

/// Counters and phase timings of one detection run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ApproachStats {
    /// Distinct frames read from the data file.
    pub fetches: usize,
    /// Distance comparisons performed.
    pub comparisons: usize,
    pub fetch_time: Duration,
    pub compute_time: Duration,
    pub traversal_time: Duration,
}

/// Output, stride and counters of one detection run.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproachResult {
    pub output: ApproachOutput,
    pub k: u64,
    pub stats: ApproachStats,
}

/// Interval bookkeeping shared by both detectors: a firing step
/// `[prev, f]` extends the last interval if it ends at `prev`.
fn record(intervals: &mut Vec<[u64; 2]>, prev: u64, f: u64) {
    match intervals.last_mut() {
        Some(last) if last[1] == prev => last[1] = f,
        _ => intervals.push([prev, f]),
    }
}

fn fires(cfg: &ApproachConfig, prev: f64, cur: f64) -> bool {
    (cur - prev).abs() > cfg.epsilon && cfg.direction.holds(prev, cur)
}

/// Detection over a per-video graph (whole video or one member).
///
/// For every edge whose endpoints match `cl`, the pair is sampled at
/// `f_s, f_s + k, …, ≤ f_e`, where `[f_s, f_e]` is the intersection of the
/// two objects' frame spans. A sampled frame in which either object is
/// absent yields no distance, so neither that step nor the next one is
/// compared; the stride itself never shifts.
pub fn detect_sgv(
    file: &SgvFile,
    idf: &Idf,
    cfg: &ApproachConfig,
    cl: Option<&str>,
) -> Result<ApproachResult> {
    let started = Instant::now();
    let k = choose_k(&file.meta, &file.chars, cfg.k_mode)?;
    let graph = &file.graph;
    let mut stats = ApproachStats::default();
    let spans: HashMap<u64, (u64, u64, BTreeSet<u64>)> = graph
        .nodes
        .values()
        .filter(|n| n.has_class(cl))
        .map(|n| {
            let fids: BTreeSet<u64> = n.frames.iter().map(|(f, _)| *f).collect();
            let first = *fids.first().expect("node observed in a frame");
            let last = *fids.last().expect("node observed in a frame");
            (n.oid, (first, last, fids))
        })
        .collect();
    let mut cache: HashMap<u64, HashMap<u64, [f64; 2]>> = HashMap::new();
    let mut output = ApproachOutput::default();
    for &(a, b) in graph.edges.keys() {
        let (Some(sa), Some(sb)) = (spans.get(&a), spans.get(&b)) else {
            continue;
        };
        let (fs, fe) = (sa.0.max(sb.0), sa.1.min(sb.1));
        let mut intervals = Vec::new();
        let mut prev: Option<f64> = None;
        let mut f = fs;
        while f <= fe {
            if !cache.contains_key(&f) {
                let t = Instant::now();
                let fetched = idf.fetch(f)?;
                stats.fetch_time += t.elapsed();
                let centroids = match fetched {
                    Some(records) => {
                        stats.fetches += 1;
                        records.iter().map(|r| (r.oid, r.bb.centroid())).collect()
                    }
                    None if sa.2.contains(&f) || sb.2.contains(&f) => {
                        return Err(Error::DataIntegrity(format!(
                            "frame {f} of the graph is missing from the data file"
                        )))
                    }
                    None => HashMap::new(),
                };
                cache.insert(f, centroids);
            }
            let t = Instant::now();
            let frame = &cache[&f];
            let cur = match (frame.get(&a), frame.get(&b)) {
                (Some(pa), Some(pb)) => Some((pa[0] - pb[0]).hypot(pa[1] - pb[1])),
                _ => None,
            };
            if let (Some(p), Some(c)) = (prev, cur) {
                stats.comparisons += 1;
                if fires(cfg, p, c) {
                    record(&mut intervals, f - k, f);
                }
            }
            stats.compute_time += t.elapsed();
            prev = cur;
            f += k;
        }
        if !intervals.is_empty() {
            output.pairs.insert((a, b), intervals);
        }
    }
    stats.traversal_time = started
        .elapsed()
        .saturating_sub(stats.fetch_time + stats.compute_time);
    Ok(ApproachResult { output, k, stats })
}

/// Detection over the per-frame graphs in one pass.
///
/// Each pair keeps the frame and distance of its last sample. A sighting
/// whose gap to that sample is a multiple of `k` becomes the new sample;
/// only a gap of exactly `k` is compared. Other sightings are ignored.
pub fn detect_sgf(file: &SgfFile, cfg: &ApproachConfig, cl: Option<&str>) -> Result<ApproachResult> {
    let started = Instant::now();
    let k = choose_k(&file.meta, &file.chars, cfg.k_mode)?;
    let mut stats = ApproachStats::default();
    let mut last: HashMap<(u64, u64), (u64, f64)> = HashMap::new();
    let mut output = ApproachOutput::default();
    for g in &file.set.graphs {
        let f = g.fid;
        for (&(a, b), &d) in &g.edges {
            if let Some(c) = cl {
                if g.nodes[&a].cl != c || g.nodes[&b].cl != c {
                    continue;
                }
            }
            match last.get_mut(&(a, b)) {
                None => {
                    last.insert((a, b), (f, d));
                }
                Some(entry) => {
                    let gap = f - entry.0;
                    if gap % k != 0 {
                        continue;
                    }
                    if gap == k {
                        stats.comparisons += 1;
                        if fires(cfg, entry.1, d) {
                            record(output.pairs.entry((a, b)).or_default(), entry.0, f);
                        }
                    }
                    *entry = (f, d);
                }
            }
        }
    }
    stats.compute_time = started.elapsed();
    Ok(ApproachResult { output, k, stats })
}

/// Run [`detect_sgv`] over every member graph concurrently (at most
/// `threads` at a time; `None` uses all cores) and compose the outputs.
pub fn detect_members(
    members: &[SgvFile],
    idf: &Idf,
    cfg: &ApproachConfig,
    cl: Option<&str>,
    threads: Option<usize>,
) -> Result<(ApproachOutput, Vec<ApproachResult>)> {
    let work = || {
        members
            .par_iter()
            .map(|m| detect_sgv(m, idf, cfg, cl))
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
    let outputs: Vec<ApproachOutput> = results.iter().map(|r| r.output.clone()).collect();
    Ok((compose_approach(&outputs)?, results))
}
