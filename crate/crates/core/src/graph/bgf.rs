//! Base graph files (BGF): text representation of the graph models.
//!
//! Layout:
//!
//! * `# key value` header lines: the model tag, the video characteristics,
//!   the trace meta information and the graph's own summary and
//!   characteristics (plus partition bookkeeping for member graphs);
//! * `g fid n_nodes n_edges` lines opening each per-frame graph (per-frame
//!   model only);
//! * `v` lines: vertex id, then tab-separated `label:confidence` pairs and,
//!   for the per-video models, `fid:n` pairs in label order;
//! * `u` lines: both endpoint ids, then either the distance (per-frame
//!   model) or the `min,f,…` and `max,f,…` labels (per-video models).
//!
//! All fields are tab-separated.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::mgv::BalanceBy;
use super::sgf::{NodeLabel, SgfGraph, SgfSet};
use super::sgv::{EdgeExtreme, FrameSummary, GraphCharacteristics, SgvEdge, SgvGraph, SgvNode};
use crate::error::{Error, Result};
use crate::text::{fmt_f64, fmt_ids, header_line, parse_f64, parse_ids, parse_u64, split_header};
use crate::trace::{
    chars_header_lines, meta_header_lines, HeaderFields, TraceMeta, VideoCharacteristics,
    CHAR_KEYS, META_KEYS,
};

/// Partition bookkeeping stored in a member graph's header.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberInfo {
    pub index: usize,
    pub count: usize,
    pub balance_by: BalanceBy,
    pub max_graph: u64,
    pub mu: f64,
    pub delta: u64,
}

/// A per-video graph file (whole-video graph or one member of a partition).
#[derive(Debug, Clone, PartialEq)]
pub struct SgvFile {
    pub chars: VideoCharacteristics,
    pub meta: TraceMeta,
    pub summary: FrameSummary,
    pub characteristics: GraphCharacteristics,
    /// Present for member graphs of a partition.
    pub member: Option<MemberInfo>,
    pub graph: SgvGraph,
    pub extra_headers: Vec<String>,
}

impl SgvFile {
    /// Wrap a graph, computing its summary and characteristics.
    pub fn new(
        chars: VideoCharacteristics,
        meta: TraceMeta,
        graph: SgvGraph,
        member: Option<MemberInfo>,
    ) -> Self {
        SgvFile {
            summary: graph.frame_summary(),
            characteristics: graph.characteristics(),
            chars,
            meta,
            member,
            graph,
            extra_headers: Vec::new(),
        }
    }
}

/// The per-frame graph file.
#[derive(Debug, Clone, PartialEq)]
pub struct SgfFile {
    pub chars: VideoCharacteristics,
    pub meta: TraceMeta,
    pub set: SgfSet,
    pub extra_headers: Vec<String>,
}

const SUMMARY_KEYS: [&str; 3] = ["graph_frames", "graph_max_objs", "graph_max_obj_frames"];
const CHARACTERISTIC_KEYS: [&str; 9] = [
    "components",
    "largest_component",
    "smallest_component",
    "singletons",
    "max_component_frames",
    "min_component_frames",
    "max_degree",
    "min_degree",
    "avg_degree",
];
const MEMBER_KEYS: [&str; 6] = [
    "graph_index",
    "graph_count",
    "balance_by",
    "max_graph",
    "mu",
    "delta",
];

fn io_err(e: std::io::Error) -> Error {
    Error::io("<bgf>", e)
}

fn write_lines(out: &mut impl Write, lines: &[String]) -> Result<()> {
    for l in lines {
        writeln!(out, "{l}").map_err(io_err)?;
    }
    Ok(())
}

/// Serialise a per-video graph file.
pub fn write_sgv(out: &mut impl Write, f: &SgvFile) -> Result<()> {
    let model = if f.member.is_some() { "mgv" } else { "sgv" };
    let mut lines = vec![header_line("model", model)];
    lines.extend(chars_header_lines(&f.chars));
    lines.extend(meta_header_lines(&f.meta));
    let s = &f.summary;
    lines.push(header_line("graph_frames", s.frame_count));
    lines.push(header_line("graph_max_objs", s.max_objs));
    lines.push(header_line("graph_max_obj_frames", fmt_ids(&s.max_obj_frames)));
    let c = &f.characteristics;
    lines.push(header_line("components", c.components));
    lines.push(header_line("largest_component", c.largest_component));
    lines.push(header_line("smallest_component", c.smallest_component));
    lines.push(header_line("singletons", c.singletons));
    lines.push(header_line("max_component_frames", c.max_component_frames));
    lines.push(header_line("min_component_frames", c.min_component_frames));
    lines.push(header_line("max_degree", c.max_degree));
    lines.push(header_line("min_degree", c.min_degree));
    lines.push(header_line("avg_degree", fmt_f64(c.avg_degree)));
    if let Some(m) = &f.member {
        lines.push(header_line("graph_index", m.index));
        lines.push(header_line("graph_count", m.count));
        lines.push(header_line("balance_by", m.balance_by.as_str()));
        lines.push(header_line("max_graph", m.max_graph));
        lines.push(header_line("mu", fmt_f64(m.mu)));
        lines.push(header_line("delta", m.delta));
    }
    lines.extend(f.extra_headers.iter().cloned());
    write_lines(out, &lines)?;
    for node in f.graph.nodes.values() {
        let mut line = format!("v\t{}", node.oid);
        for (cl, clc) in &node.labels {
            line.push_str(&format!("\t{cl}:{}", fmt_f64(*clc)));
        }
        for (fid, n) in &node.frames {
            line.push_str(&format!("\t{fid}:{n}"));
        }
        writeln!(out, "{line}").map_err(io_err)?;
    }
    for ((a, b), e) in &f.graph.edges {
        writeln!(
            out,
            "u\t{a}\t{b}\t{},{}\t{},{}",
            fmt_f64(e.min.dist),
            fmt_ids(&e.min.frames),
            fmt_f64(e.max.dist),
            fmt_ids(&e.max.frames)
        )
        .map_err(io_err)?;
    }
    Ok(())
}

/// Serialise the per-frame graph file.
pub fn write_sgf(out: &mut impl Write, f: &SgfFile) -> Result<()> {
    let mut lines = vec![header_line("model", "sgf")];
    lines.extend(chars_header_lines(&f.chars));
    lines.extend(meta_header_lines(&f.meta));
    lines.extend(f.extra_headers.iter().cloned());
    write_lines(out, &lines)?;
    for g in &f.set.graphs {
        writeln!(out, "g\t{}\t{}\t{}", g.fid, g.nodes.len(), g.edges.len()).map_err(io_err)?;
        for (oid, l) in &g.nodes {
            writeln!(out, "v\t{oid}\t{}:{}", l.cl, fmt_f64(l.clc)).map_err(io_err)?;
        }
        for ((a, b), d) in &g.edges {
            writeln!(out, "u\t{a}\t{b}\t{}", fmt_f64(*d)).map_err(io_err)?;
        }
    }
    Ok(())
}

/// Header lines of a graph file split into recognised fields and the rest.
struct Header {
    model: String,
    fields: HeaderFields,
    extra: Vec<String>,
}

fn err(line: usize, m: impl Into<String>) -> Error {
    Error::parse(line, m)
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| err(line, format!("not a number: {s:?}")))
}

/// Read the `#` header, returning the first non-header line (if any).
fn read_header(lines: &mut impl Iterator<Item = (usize, String)>) -> Result<(Header, Option<(usize, String)>)> {
    let mut model = None;
    let mut fields = HeaderFields::default();
    let mut extra = Vec::new();
    let all_keys: Vec<&str> = SUMMARY_KEYS
        .iter()
        .chain(&CHARACTERISTIC_KEYS)
        .chain(&MEMBER_KEYS)
        .copied()
        .collect();
    for (no, line) in lines.by_ref() {
        if !line.starts_with('#') {
            let model = model.ok_or_else(|| err(no, "missing model header"))?;
            return Ok((Header { model, fields, extra }, Some((no, line))));
        }
        match split_header(&line) {
            Some(("model", v)) if model.is_none() => model = Some(v.to_string()),
            Some((k, v))
                if fields.offer(&CHAR_KEYS, no, k, v)
                    || fields.offer(&META_KEYS, no, k, v)
                    || fields.offer(&all_keys, no, k, v) => {}
            _ => extra.push(line.clone()),
        }
    }
    let model = model.ok_or_else(|| err(0, "missing model header"))?;
    Ok((Header { model, fields, extra }, None))
}

impl HeaderFields {
    fn value(&self, key: &str) -> Result<(usize, String)> {
        self.get_raw(key)
            .ok_or_else(|| err(0, format!("missing header key {key:?}")))
    }

    fn parse_num<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let (line, v) = self.value(key)?;
        num(&v, line)
    }

    fn parse_float(&self, key: &str) -> Result<f64> {
        let (line, v) = self.value(key)?;
        parse_f64(&v).map_err(|m| err(line, m))
    }
}

fn parse_summary(h: &HeaderFields) -> Result<FrameSummary> {
    let (line, frames) = h.value("graph_max_obj_frames")?;
    Ok(FrameSummary {
        frame_count: h.parse_num("graph_frames")?,
        max_objs: h.parse_num("graph_max_objs")?,
        max_obj_frames: parse_ids(&frames).map_err(|m| err(line, m))?,
    })
}

fn parse_characteristics(h: &HeaderFields) -> Result<GraphCharacteristics> {
    Ok(GraphCharacteristics {
        components: h.parse_num("components")?,
        largest_component: h.parse_num("largest_component")?,
        smallest_component: h.parse_num("smallest_component")?,
        singletons: h.parse_num("singletons")?,
        max_component_frames: h.parse_num("max_component_frames")?,
        min_component_frames: h.parse_num("min_component_frames")?,
        max_degree: h.parse_num("max_degree")?,
        min_degree: h.parse_num("min_degree")?,
        avg_degree: h.parse_float("avg_degree")?,
    })
}

fn parse_member(h: &HeaderFields) -> Result<MemberInfo> {
    let (_, mode) = h.value("balance_by")?;
    Ok(MemberInfo {
        index: h.parse_num("graph_index")?,
        count: h.parse_num("graph_count")?,
        balance_by: mode.parse()?,
        max_graph: h.parse_num("max_graph")?,
        mu: h.parse_float("mu")?,
        delta: h.parse_num("delta")?,
    })
}

fn parse_label(tok: &str, line: usize) -> Result<(String, f64)> {
    let (cl, clc) = tok
        .split_once(':')
        .ok_or_else(|| err(line, format!("expected label:confidence, got {tok:?}")))?;
    Ok((cl.to_string(), parse_f64(clc).map_err(|m| err(line, m))?))
}

fn parse_extreme(tok: &str, line: usize) -> Result<EdgeExtreme> {
    let (d, frames) = tok
        .split_once(',')
        .ok_or_else(|| err(line, format!("expected dist,f,…, got {tok:?}")))?;
    let frames = parse_ids(frames).map_err(|m| err(line, m))?;
    if frames.is_empty() {
        return Err(err(line, "edge extreme without frames"));
    }
    Ok(EdgeExtreme {
        dist: parse_f64(d).map_err(|m| err(line, m))?,
        frames,
    })
}

fn numbered_lines(input: impl BufRead) -> impl Iterator<Item = (usize, String)> {
    input
        .lines()
        .map_while(|l| l.ok())
        .enumerate()
        .map(|(i, l)| (i + 1, l))
}

/// Parse a per-video graph file.
pub fn read_sgv(input: impl BufRead) -> Result<SgvFile> {
    let mut lines = numbered_lines(input);
    let (h, first) = read_header(&mut lines)?;
    if h.model != "sgv" && h.model != "mgv" {
        return Err(err(1, format!("expected a per-video graph file, found model {:?}", h.model)));
    }
    let member = if h.model == "mgv" {
        Some(parse_member(&h.fields)?)
    } else {
        None
    };
    let mut graph = SgvGraph::default();
    for (no, line) in first.into_iter().chain(lines) {
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split('\t').collect();
        match toks[0] {
            "v" if toks.len() >= 2 => {
                let oid: u64 = num(toks[1], no)?;
                let mut node = SgvNode {
                    oid,
                    labels: BTreeMap::new(),
                    frames: Vec::new(),
                };
                for tok in &toks[2..] {
                    let (a, b) = tok
                        .split_once(':')
                        .ok_or_else(|| err(no, format!("bad vertex label {tok:?}")))?;
                    if let Ok(fid) = parse_u64(a) {
                        node.frames.push((fid, num(b, no)?));
                    } else {
                        let (cl, clc) = parse_label(tok, no)?;
                        node.labels.insert(cl, clc);
                    }
                }
                if graph.nodes.insert(oid, node).is_some() {
                    return Err(err(no, format!("duplicate vertex {oid}")));
                }
            }
            "u" if toks.len() == 5 => {
                let a: u64 = num(toks[1], no)?;
                let b: u64 = num(toks[2], no)?;
                let e = SgvEdge {
                    min: parse_extreme(toks[3], no)?,
                    max: parse_extreme(toks[4], no)?,
                };
                graph.edges.insert((a, b), e);
            }
            _ => return Err(err(no, format!("unrecognised graph line {line:?}"))),
        }
    }
    Ok(SgvFile {
        chars: h.fields.chars()?,
        meta: h
            .fields
            .meta()?
            .ok_or_else(|| err(0, "graph file lacks meta information"))?,
        summary: parse_summary(&h.fields)?,
        characteristics: parse_characteristics(&h.fields)?,
        member,
        graph,
        extra_headers: h.extra,
    })
}

/// Parse the per-frame graph file.
pub fn read_sgf(input: impl BufRead) -> Result<SgfFile> {
    let mut lines = numbered_lines(input);
    let (h, first) = read_header(&mut lines)?;
    if h.model != "sgf" {
        return Err(err(1, format!("expected a per-frame graph file, found model {:?}", h.model)));
    }
    let mut set = SgfSet::default();
    let mut expected: Option<(usize, usize, usize)> = None;
    let check = |g: Option<&SgfGraph>, exp: Option<(usize, usize, usize)>| -> Result<()> {
        if let (Some(g), Some((no, n, e))) = (g, exp) {
            if g.nodes.len() != n || g.edges.len() != e {
                return Err(err(no, format!("graph {} declares {n} nodes/{e} edges", g.fid)));
            }
        }
        Ok(())
    };
    for (no, line) in first.into_iter().chain(lines) {
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split('\t').collect();
        match toks[0] {
            "g" if toks.len() == 4 => {
                check(set.graphs.last(), expected)?;
                let fid: u64 = num(toks[1], no)?;
                if set.graphs.last().is_some_and(|g| g.fid >= fid) {
                    return Err(err(no, "per-frame graphs out of ascending order"));
                }
                expected = Some((no, num(toks[2], no)?, num(toks[3], no)?));
                set.graphs.push(SgfGraph {
                    fid,
                    nodes: BTreeMap::new(),
                    edges: BTreeMap::new(),
                });
            }
            "v" if toks.len() == 3 => {
                let g = set
                    .graphs
                    .last_mut()
                    .ok_or_else(|| err(no, "vertex before any graph"))?;
                let (cl, clc) = parse_label(toks[2], no)?;
                g.nodes.insert(num(toks[1], no)?, NodeLabel { cl, clc });
            }
            "u" if toks.len() == 4 => {
                let g = set
                    .graphs
                    .last_mut()
                    .ok_or_else(|| err(no, "edge before any graph"))?;
                let d = parse_f64(toks[3]).map_err(|m| err(no, m))?;
                g.edges.insert((num(toks[1], no)?, num(toks[2], no)?), d);
            }
            _ => return Err(err(no, format!("unrecognised graph line {line:?}"))),
        }
    }
    check(set.graphs.last(), expected)?;
    Ok(SgfFile {
        chars: h.fields.chars()?,
        meta: h
            .fields
            .meta()?
            .ok_or_else(|| err(0, "graph file lacks meta information"))?,
        set,
        extra_headers: h.extra,
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Load a per-video graph file from disk.
pub fn load_sgv(path: impl AsRef<Path>) -> Result<SgvFile> {
    read_sgv(open(path.as_ref())?)
}

/// Load the per-frame graph file from disk.
pub fn load_sgf(path: impl AsRef<Path>) -> Result<SgfFile> {
    read_sgf(open(path.as_ref())?)
}

fn save(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write a per-video graph file to disk.
pub fn save_sgv(path: impl AsRef<Path>, f: &SgvFile) -> Result<()> {
    save(path.as_ref(), |w| write_sgv(w, f))
}

/// Write the per-frame graph file to disk.
pub fn save_sgf(path: impl AsRef<Path>, f: &SgfFile) -> Result<()> {
    save(path.as_ref(), |w| write_sgf(w, f))
}

/// Render a per-video graph file as a string.
pub fn sgv_to_string(f: &SgvFile) -> Result<String> {
    let mut buf = Vec::new();
    write_sgv(&mut buf, f)?;
    Ok(String::from_utf8(buf).expect("writer emits UTF-8"))
}

/// Render the per-frame graph file as a string.
pub fn sgf_to_string(f: &SgfFile) -> Result<String> {
    let mut buf = Vec::new();
    write_sgf(&mut buf, f)?;
    Ok(String::from_utf8(buf).expect("writer emits UTF-8"))
}
