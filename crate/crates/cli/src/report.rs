//! Report documents printed by the detection and comparison subcommands.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use situ_core::approach::{ApproachOutput, ApproachStats};
use situ_core::groups::GroupStats;

use crate::args::Format;

fn ms(d: Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e3
}

/// Counters and phase timings (milliseconds) of one run or member graph.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsDoc {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kmeans_calls: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub simple_calls: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub visited_frames: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub comparisons: Option<usize>,
    pub fetches: usize,
    pub fetch_ms: f64,
    pub traversal_ms: f64,
    pub compute_ms: f64,
}

impl From<&GroupStats> for StatsDoc {
    fn from(s: &GroupStats) -> Self {
        StatsDoc {
            kmeans_calls: Some(s.kmeans_calls),
            simple_calls: Some(s.simple_calls),
            visited_frames: Some(s.visited_frames),
            comparisons: None,
            fetches: s.fetches,
            fetch_ms: ms(s.fetch_time),
            traversal_ms: ms(s.traversal_time),
            compute_ms: ms(s.compute_time),
        }
    }
}

impl From<&ApproachStats> for StatsDoc {
    fn from(s: &ApproachStats) -> Self {
        StatsDoc {
            kmeans_calls: None,
            simple_calls: None,
            visited_frames: None,
            comparisons: Some(s.comparisons),
            fetches: s.fetches,
            fetch_ms: ms(s.fetch_time),
            traversal_ms: ms(s.traversal_time),
            compute_ms: ms(s.compute_time),
        }
    }
}

/// Summary of one detection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDoc {
    pub model: String,
    pub algorithm: String,
    /// Distinct reported object sets (groups) or pairs (approach).
    pub results: usize,
    /// Frames with a reported group, or detected intervals.
    pub instances: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<u64>,
    pub stats: StatsDoc,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub per_graph: Vec<StatsDoc>,
}

/// Candidate run, optional baseline run and their agreement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub kind: String,
    pub query: String,
    pub candidate: RunDoc,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub baseline: Option<RunDoc>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub identical: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub planted: Option<usize>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serialises") + "\n",
            Format::Table => self.table(),
        }
    }

    fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} query: {}", self.kind, self.query);
        let runs: Vec<(&str, &RunDoc)> = std::iter::once(("candidate", &self.candidate))
            .chain(self.baseline.as_ref().map(|b| ("baseline", b)))
            .collect();
        let _ = write!(out, "{:<16}", "");
        for (name, _) in &runs {
            let _ = write!(out, "{name:>16}");
        }
        out.push('\n');
        let row = |out: &mut String, label: &str, f: &dyn Fn(&RunDoc) -> String| {
            let _ = write!(out, "{label:<16}");
            for (_, r) in &runs {
                let _ = write!(out, "{:>16}", f(r));
            }
            out.push('\n');
        };
        row(&mut out, "model", &|r| r.model.clone());
        row(&mut out, "algorithm", &|r| r.algorithm.clone());
        row(&mut out, "results", &|r| r.results.to_string());
        row(&mut out, "instances", &|r| r.instances.to_string());
        let opt = |v: Option<usize>| v.map_or("-".into(), |x| x.to_string());
        row(&mut out, "kmeans_calls", &|r| opt(r.stats.kmeans_calls));
        row(&mut out, "simple_calls", &|r| opt(r.stats.simple_calls));
        row(&mut out, "comparisons", &|r| opt(r.stats.comparisons));
        row(&mut out, "fetches", &|r| r.stats.fetches.to_string());
        row(&mut out, "fetch_ms", &|r| format!("{:.3}", r.stats.fetch_ms));
        row(&mut out, "traversal_ms", &|r| format!("{:.3}", r.stats.traversal_ms));
        row(&mut out, "compute_ms", &|r| format!("{:.3}", r.stats.compute_ms));
        if let Some(f1) = self.f1 {
            let _ = writeln!(out, "f1: {f1}");
        }
        if let Some(p) = self.planted {
            let _ = writeln!(out, "planted: {p}");
        }
        out
    }
}

/// Frame-level incidences `(a, b, frame)` of an approach output.
pub fn approach_incidences(o: &ApproachOutput) -> BTreeSet<(u64, u64, u64)> {
    o.pairs
        .iter()
        .flat_map(|(&(a, b), ivs)| ivs.iter().flat_map(move |iv| (iv[0]..=iv[1]).map(move |f| (a, b, f))))
        .collect()
}

/// F1 of two sets (1.0 when both are empty).
pub fn f1_of_sets<T: Ord>(candidate: &BTreeSet<T>, baseline: &BTreeSet<T>) -> f64 {
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
