//! Extraction-trace data model and the raw data file (RDF) format.
//!
//! An RDF file is UTF-8 text made of three kinds of lines:
//!
//! * `# key value` header lines carrying the video characteristics and the
//!   per-video meta information (unknown `#` lines are kept verbatim),
//! * `//` comment lines,
//! * tab-separated data rows with the columns
//!   `fid oid cl clc bb fv pv pcv ts`, grouped by ascending frame id.
//!
//! Vectors are bracketed comma-separated floats; the composite timestamp is
//! written `fid:rank`, where `rank` is the 1-based position of the row
//! within its frame.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{
    fmt_f64, fmt_ids, fmt_vec, header_line, parse_f64, parse_ids, parse_u64, parse_vec,
    split_header,
};

/// Axis-aligned detection rectangle in pixels (origin top-left, y down).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    /// Build a box, checking corner ordering and non-negativity.
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, String> {
        if !(x_min <= x_max && y_min <= y_max) {
            return Err(format!(
                "bounding box corners out of order: [{x_min},{y_min},{x_max},{y_max}]"
            ));
        }
        if x_min < 0.0 || y_min < 0.0 {
            return Err("bounding box has negative coordinates".into());
        }
        Ok(BoundingBox {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// Midpoint of the rectangle.
    pub fn centroid(&self) -> [f64; 2] {
        [
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
        ]
    }

    /// Euclidean distance between the centroids of two boxes.
    pub fn centroid_distance(&self, other: &BoundingBox) -> f64 {
        let a = self.centroid();
        let b = other.centroid();
        (a[0] - b[0]).hypot(a[1] - b[1])
    }

    fn to_vec(self) -> [f64; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }
}

/// Composite timestamp: frame id plus 1-based rank within the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Timestamp {
    pub fid: u64,
    pub rank: u32,
}

/// One row of an extraction trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub fid: u64,
    pub oid: u64,
    pub cl: String,
    pub clc: f64,
    pub bb: BoundingBox,
    pub fv: Vec<f64>,
    /// Flattened pose key points `x1,y1,x2,y2,…`; empty when absent.
    pub pv: Vec<f64>,
    /// One confidence per pose key point; empty when absent.
    pub pcv: Vec<f64>,
    pub ts: Timestamp,
}

/// All records of one frame, in rank order.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub fid: u64,
    pub records: Vec<DetectionRecord>,
}

/// Per-video characteristics carried in every file header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoCharacteristics {
    /// Identifier whose prefix encodes the video type (S, M, L, MS, MR).
    pub video_id: String,
    pub length_seconds: f64,
    /// Total number of frames F of the video (including empty frames).
    pub frame_count: u64,
    pub fps: u32,
    pub width: u32,
    pub height: u32,
    /// ISO-8601 generation timestamp.
    pub generation_datetime: String,
    pub pipeline_info: String,
    /// Frames after which the tracker forgets an unseen object.
    pub th_track: u64,
}

impl VideoCharacteristics {
    /// Check the invariants `F ≥ 1`, `fps ≥ 1`, `th_track ≥ 1`.
    pub fn validate(&self) -> Result<()> {
        if self.frame_count < 1 || self.fps < 1 || self.th_track < 1 {
            return Err(Error::Validation(
                "frame count, fps and th_track must all be at least 1".into(),
            ));
        }
        if self.video_id.is_empty() || self.video_id.contains(char::is_whitespace) {
            return Err(Error::Validation(
                "video id must be a non-empty token without whitespace".into(),
            ));
        }
        Ok(())
    }
}

/// Aggregates over a whole trace, consumed by every analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub max_objs: usize,
    pub min_objs: usize,
    pub avg_objs: f64,
    pub nonempty_frames: usize,
    pub unique_oids: Vec<u64>,
    /// Number of unique object ids.
    pub uo: usize,
    /// Number of (frame, object) instances.
    pub oi: usize,
    /// Fewest frames any object appears in.
    pub min_duration: usize,
    pub max_obj_frames: Vec<u64>,
    pub min_obj_frames: Vec<u64>,
}

/// Compute [`TraceMeta`] from frame-grouped records.
pub fn compute_meta<'a>(frames: impl IntoIterator<Item = &'a Frame>) -> TraceMeta {
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    let mut per_frame: Vec<(u64, usize)> = Vec::new();
    for frame in frames {
        if frame.records.is_empty() {
            continue;
        }
        per_frame.push((frame.fid, frame.records.len()));
        for r in &frame.records {
            *counts.entry(r.oid).or_default() += 1;
        }
    }
    let oi: usize = per_frame.iter().map(|(_, n)| n).sum();
    let max_objs = per_frame.iter().map(|(_, n)| *n).max().unwrap_or(0);
    let min_objs = per_frame.iter().map(|(_, n)| *n).min().unwrap_or(0);
    let nonempty = per_frame.len();
    TraceMeta {
        max_objs,
        min_objs,
        avg_objs: if nonempty == 0 {
            0.0
        } else {
            oi as f64 / nonempty as f64
        },
        nonempty_frames: nonempty,
        unique_oids: counts.keys().copied().collect(),
        uo: counts.len(),
        oi,
        min_duration: counts.values().copied().min().unwrap_or(0),
        max_obj_frames: per_frame
            .iter()
            .filter(|(_, n)| *n == max_objs)
            .map(|(f, _)| *f)
            .collect(),
        min_obj_frames: per_frame
            .iter()
            .filter(|(_, n)| *n == min_objs)
            .map(|(f, _)| *f)
            .collect(),
    }
}

/// A fully loaded trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub chars: VideoCharacteristics,
    pub meta: TraceMeta,
    pub frames: Vec<Frame>,
    /// Unrecognised `#` lines, preserved verbatim.
    pub extra_headers: Vec<String>,
    /// `//` comment lines, preserved verbatim.
    pub comments: Vec<String>,
}

impl Trace {
    /// Iterate over every record in (fid, rank) order.
    pub fn records(&self) -> impl Iterator<Item = &DetectionRecord> {
        self.frames.iter().flat_map(|f| f.records.iter())
    }
}

pub(crate) const CHAR_KEYS: [&str; 9] = [
    "video_id",
    "length_seconds",
    "frames",
    "fps",
    "width",
    "height",
    "generated",
    "pipeline",
    "th_track",
];

pub(crate) const META_KEYS: [&str; 10] = [
    "max_objs",
    "min_objs",
    "avg_objs",
    "nonempty_frames",
    "uo",
    "oi",
    "min_duration",
    "unique_oids",
    "max_obj_frames",
    "min_obj_frames",
];

const COLUMNS_VALUE: &str = "fid oid cl clc bb fv pv pcv ts";

/// Header lines for the video characteristics, in canonical order.
pub(crate) fn chars_header_lines(c: &VideoCharacteristics) -> Vec<String> {
    vec![
        header_line("video_id", &c.video_id),
        header_line("length_seconds", fmt_f64(c.length_seconds)),
        header_line("frames", c.frame_count),
        header_line("fps", c.fps),
        header_line("width", c.width),
        header_line("height", c.height),
        header_line("generated", &c.generation_datetime),
        header_line("pipeline", &c.pipeline_info),
        header_line("th_track", c.th_track),
    ]
}

/// Header lines for the meta information, in canonical order.
pub(crate) fn meta_header_lines(m: &TraceMeta) -> Vec<String> {
    vec![
        header_line("max_objs", m.max_objs),
        header_line("min_objs", m.min_objs),
        header_line("avg_objs", fmt_f64(m.avg_objs)),
        header_line("nonempty_frames", m.nonempty_frames),
        header_line("uo", m.uo),
        header_line("oi", m.oi),
        header_line("min_duration", m.min_duration),
        header_line("unique_oids", fmt_ids(&m.unique_oids)),
        header_line("max_obj_frames", fmt_ids(&m.max_obj_frames)),
        header_line("min_obj_frames", fmt_ids(&m.min_obj_frames)),
    ]
}

/// Accumulates recognised `# key value` pairs until they can be assembled.
#[derive(Debug, Default)]
pub(crate) struct HeaderFields {
    values: BTreeMap<String, (usize, String)>,
}

impl HeaderFields {
    /// Record `key` if it belongs to `keys`; returns whether it was consumed.
    pub(crate) fn offer(&mut self, keys: &[&str], line_no: usize, key: &str, value: &str) -> bool {
        if keys.contains(&key) {
            self.values
                .insert(key.to_string(), (line_no, value.to_string()));
            true
        } else {
            false
        }
    }

    pub(crate) fn get_raw(&self, key: &str) -> Option<(usize, String)> {
        self.values.get(key).cloned()
    }

    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.values.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn req(&self, key: &str) -> Result<(usize, &str)> {
        self.get(key)
            .ok_or_else(|| Error::parse(0, format!("missing header key {key:?}")))
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let (line, v) = self.req(key)?;
        v.parse()
            .map_err(|_| Error::parse(line, format!("bad value for {key}: {v:?}")))
    }

    fn float(&self, key: &str) -> Result<f64> {
        let (line, v) = self.req(key)?;
        parse_f64(v).map_err(|m| Error::parse(line, m))
    }

    fn ids(&self, key: &str) -> Result<Vec<u64>> {
        let (line, v) = self.req(key)?;
        parse_ids(v).map_err(|m| Error::parse(line, m))
    }

    pub(crate) fn has_any(&self, keys: &[&str]) -> bool {
        keys.iter().any(|k| self.values.contains_key(*k))
    }

    /// Assemble the video characteristics; all keys are required.
    pub(crate) fn chars(&self) -> Result<VideoCharacteristics> {
        let c = VideoCharacteristics {
            video_id: self.req("video_id")?.1.to_string(),
            length_seconds: self.float("length_seconds")?,
            frame_count: self.num("frames")?,
            fps: self.num("fps")?,
            width: self.num("width")?,
            height: self.num("height")?,
            generation_datetime: self.req("generated")?.1.to_string(),
            pipeline_info: self.req("pipeline")?.1.to_string(),
            th_track: self.num("th_track")?,
        };
        c.validate()?;
        Ok(c)
    }

    /// Assemble the meta block; either all keys are present or none is.
    pub(crate) fn meta(&self) -> Result<Option<TraceMeta>> {
        if !self.has_any(&META_KEYS) {
            return Ok(None);
        }
        Ok(Some(TraceMeta {
            max_objs: self.num("max_objs")?,
            min_objs: self.num("min_objs")?,
            avg_objs: self.float("avg_objs")?,
            nonempty_frames: self.num("nonempty_frames")?,
            uo: self.num("uo")?,
            oi: self.num("oi")?,
            min_duration: self.num("min_duration")?,
            unique_oids: self.ids("unique_oids")?,
            max_obj_frames: self.ids("max_obj_frames")?,
            min_obj_frames: self.ids("min_obj_frames")?,
        }))
    }
}

/// Class labels are single tokens that cannot be confused with numbers or
/// with the separators of any of the text formats.
pub fn validate_class_label(cl: &str) -> Result<(), String> {
    let first = cl.chars().next().ok_or("empty class label")?;
    if first.is_ascii_digit() || first == '-' || first == '.' {
        return Err(format!("class label must not start like a number: {cl:?}"));
    }
    if cl
        .chars()
        .any(|c| c.is_whitespace() || matches!(c, ':' | ';' | ',' | '[' | ']' | '#'))
    {
        return Err(format!("class label contains a reserved character: {cl:?}"));
    }
    Ok(())
}

fn at_line<T>(r: Result<T, String>, line: usize) -> Result<T> {
    r.map_err(|m| Error::parse(line, m))
}

/// Parse one tab-separated data row (shared with the IDF object entries).
pub(crate) fn parse_row(cols: &[&str], line: usize) -> Result<DetectionRecord> {
    if cols.len() != 9 {
        return Err(Error::parse(
            line,
            format!("expected 9 tab-separated columns, found {}", cols.len()),
        ));
    }
    let fid = at_line(parse_u64(cols[0]), line)?;
    let oid = at_line(parse_u64(cols[1]), line)?;
    if fid == 0 || oid == 0 {
        return Err(Error::parse(line, "frame and object ids must be positive"));
    }
    let cl = cols[2].to_string();
    at_line(validate_class_label(&cl), line)?;
    let clc = at_line(parse_f64(cols[3]), line)?;
    if !(0.0..=1.0).contains(&clc) {
        return Err(Error::parse(line, format!("confidence out of [0,1]: {clc}")));
    }
    let bbv = at_line(parse_vec(cols[4]), line)?;
    if bbv.len() != 4 {
        return Err(Error::parse(line, "bounding box needs exactly 4 values"));
    }
    let bb = at_line(BoundingBox::new(bbv[0], bbv[1], bbv[2], bbv[3]), line)?;
    let fv = at_line(parse_vec(cols[5]), line)?;
    let pv = at_line(parse_vec(cols[6]), line)?;
    let pcv = at_line(parse_vec(cols[7]), line)?;
    if pv.len() % 2 != 0 || pcv.len() * 2 != pv.len() {
        return Err(Error::parse(
            line,
            "pose vector must hold x,y pairs with one confidence per key point",
        ));
    }
    let (tf, tr) = cols[8]
        .split_once(':')
        .ok_or_else(|| Error::parse(line, "timestamp must be fid:rank"))?;
    let ts = Timestamp {
        fid: at_line(parse_u64(tf), line)?,
        rank: at_line(parse_u64(tr), line)? as u32,
    };
    Ok(DetectionRecord {
        fid,
        oid,
        cl,
        clc,
        bb,
        fv,
        pv,
        pcv,
        ts,
    })
}

/// Render one record as its tab-separated columns.
pub(crate) fn fmt_row(r: &DetectionRecord) -> String {
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}:{}",
        r.fid,
        r.oid,
        r.cl,
        fmt_f64(r.clc),
        fmt_vec(&r.bb.to_vec()),
        fmt_vec(&r.fv),
        fmt_vec(&r.pv),
        fmt_vec(&r.pcv),
        r.ts.fid,
        r.ts.rank
    )
}

/// Check the per-frame invariants of a record list (shared with IDF).
pub(crate) fn check_frame(
    fid: u64,
    records: &[DetectionRecord],
    line: usize,
    fv_dim: &mut Option<usize>,
) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (i, r) in records.iter().enumerate() {
        if r.fid != fid || r.ts.fid != fid {
            return Err(Error::parse(line, format!("row does not belong to frame {fid}")));
        }
        if r.ts.rank as usize != i + 1 {
            return Err(Error::parse(
                line,
                format!("rank {} in frame {fid} should be {}", r.ts.rank, i + 1),
            ));
        }
        if !seen.insert(r.oid) {
            return Err(Error::parse(
                line,
                format!("object {} appears twice in frame {fid}", r.oid),
            ));
        }
        match fv_dim {
            Some(d) if *d != r.fv.len() => {
                return Err(Error::Dimension {
                    line,
                    expected: *d,
                    found: r.fv.len(),
                })
            }
            None => *fv_dim = Some(r.fv.len()),
            _ => {}
        }
    }
    Ok(())
}

/// Header portion of an RDF file.
#[derive(Debug, Clone, PartialEq)]
pub struct RdfHeader {
    pub chars: VideoCharacteristics,
    pub meta: Option<TraceMeta>,
    pub extra_headers: Vec<String>,
    pub comments: Vec<String>,
}

/// Streaming RDF reader yielding one [`Frame`] at a time in ascending fid order.
pub struct RdfReader<R: BufRead> {
    input: R,
    header: RdfHeader,
    line_no: usize,
    pending: Option<(usize, DetectionRecord)>,
    last_fid: u64,
    fv_dim: Option<usize>,
    done: bool,
}

impl RdfReader<BufReader<File>> {
    /// Open an RDF file and read its header.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        RdfReader::new(BufReader::new(file))
    }
}

impl<R: BufRead> RdfReader<R> {
    /// Read the header section from `input`; data rows are read lazily.
    pub fn new(mut input: R) -> Result<Self> {
        let mut fields = HeaderFields::default();
        let mut extra_headers = Vec::new();
        let mut comments = Vec::new();
        let mut line_no = 0;
        let mut pending = None;
        let mut buf = String::new();
        loop {
            buf.clear();
            let n = input
                .read_line(&mut buf)
                .map_err(|e| Error::io("<rdf>", e))?;
            if n == 0 {
                break;
            }
            line_no += 1;
            let line = buf.trim_end_matches(['\n', '\r']);
            if line.starts_with("//") {
                comments.push(line.to_string());
            } else if line.starts_with('#') {
                match split_header(line) {
                    Some(("columns", v)) => {
                        if v != COLUMNS_VALUE {
                            return Err(Error::parse(line_no, "unexpected column layout"));
                        }
                    }
                    Some((k, v))
                        if fields.offer(&CHAR_KEYS, line_no, k, v)
                            || fields.offer(&META_KEYS, line_no, k, v) => {}
                    _ => extra_headers.push(line.to_string()),
                }
            } else if line.is_empty() {
                continue;
            } else {
                let cols: Vec<&str> = line.split('\t').collect();
                pending = Some((line_no, parse_row(&cols, line_no)?));
                break;
            }
        }
        let chars = fields.chars()?;
        let meta = fields.meta()?;
        let reader = RdfReader {
            input,
            header: RdfHeader {
                chars,
                meta,
                extra_headers,
                comments,
            },
            line_no,
            pending,
            last_fid: 0,
            fv_dim: None,
            done: false,
        };
        if let Some((l, r)) = &reader.pending {
            reader.check_bounds(r, *l)?;
        }
        Ok(reader)
    }

    /// The parsed header.
    pub fn header(&self) -> &RdfHeader {
        &self.header
    }

    fn check_bounds(&self, r: &DetectionRecord, line: usize) -> Result<()> {
        let c = &self.header.chars;
        if r.bb.x_max > c.width as f64 || r.bb.y_max > c.height as f64 {
            return Err(Error::parse(line, "bounding box exceeds the frame size"));
        }
        Ok(())
    }

    fn next_row(&mut self) -> Result<Option<(usize, DetectionRecord)>> {
        if let Some(p) = self.pending.take() {
            return Ok(Some(p));
        }
        let mut buf = String::new();
        loop {
            buf.clear();
            let n = self
                .input
                .read_line(&mut buf)
                .map_err(|e| Error::io("<rdf>", e))?;
            if n == 0 {
                return Ok(None);
            }
            self.line_no += 1;
            let line = buf.trim_end_matches(['\n', '\r']);
            if line.is_empty() {
                continue;
            }
            if line.starts_with("//") {
                self.header.comments.push(line.to_string());
                continue;
            }
            if line.starts_with('#') {
                return Err(Error::parse(self.line_no, "header line after data rows"));
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let r = parse_row(&cols, self.line_no)?;
            self.check_bounds(&r, self.line_no)?;
            return Ok(Some((self.line_no, r)));
        }
    }

    /// Read the next frame, or `None` at end of input.
    pub fn next_frame(&mut self) -> Result<Option<Frame>> {
        if self.done {
            return Ok(None);
        }
        let Some((first_line, first)) = self.next_row()? else {
            self.done = true;
            return Ok(None);
        };
        let fid = first.fid;
        if fid <= self.last_fid {
            return Err(Error::parse(
                first_line,
                format!("frame {fid} out of ascending order"),
            ));
        }
        let mut records = vec![first];
        loop {
            match self.next_row()? {
                Some((l, r)) if r.fid == fid => {
                    let _ = l;
                    records.push(r);
                }
                Some(other) => {
                    self.pending = Some(other);
                    break;
                }
                None => break,
            }
        }
        check_frame(fid, &records, first_line, &mut self.fv_dim)?;
        self.last_fid = fid;
        Ok(Some(Frame { fid, records }))
    }
}

impl<R: BufRead> Iterator for RdfReader<R> {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_frame().transpose()
    }
}

/// Load an RDF trace from any buffered reader.
pub fn read_rdf(input: impl BufRead) -> Result<Trace> {
    let mut reader = RdfReader::new(input)?;
    let mut frames = Vec::new();
    while let Some(f) = reader.next_frame()? {
        frames.push(f);
    }
    let header = reader.header;
    let meta = match header.meta {
        Some(m) => m,
        None => compute_meta(&frames),
    };
    Ok(Trace {
        chars: header.chars,
        meta,
        frames,
        extra_headers: header.extra_headers,
        comments: header.comments,
    })
}

/// Load an RDF trace from a file.
pub fn parse_rdf(path: impl AsRef<Path>) -> Result<Trace> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_rdf(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Load an RDF trace from an in-memory string.
pub fn parse_rdf_str(text: &str) -> Result<Trace> {
    read_rdf(text.as_bytes())
}

/// Serialise a trace; frames must be in ascending fid order with ranks 1..n.
pub fn write_rdf(out: &mut impl Write, trace: &Trace) -> Result<()> {
    let mut last = 0u64;
    for f in &trace.frames {
        if f.fid <= last {
            return Err(Error::Order(format!("frame {} after frame {last}", f.fid)));
        }
        last = f.fid;
        for (i, r) in f.records.iter().enumerate() {
            if r.fid != f.fid || r.ts.fid != f.fid || r.ts.rank as usize != i + 1 {
                return Err(Error::Order(format!(
                    "record {}:{} out of order in frame {}",
                    r.ts.fid, r.ts.rank, f.fid
                )));
            }
        }
    }
    let io = |e| Error::io("<rdf>", e);
    let mut lines = chars_header_lines(&trace.chars);
    lines.extend(meta_header_lines(&trace.meta));
    lines.extend(trace.extra_headers.iter().cloned());
    lines.extend(trace.comments.iter().cloned());
    lines.push(header_line("columns", COLUMNS_VALUE));
    for l in lines {
        writeln!(out, "{l}").map_err(io)?;
    }
    for r in trace.records() {
        writeln!(out, "{}", fmt_row(r)).map_err(io)?;
    }
    Ok(())
}

/// Serialise a trace into a string.
pub fn write_rdf_string(trace: &Trace) -> Result<String> {
    let mut buf = Vec::new();
    write_rdf(&mut buf, trace)?;
    Ok(String::from_utf8(buf).expect("writer emits UTF-8"))
}

/// Serialise a trace into a file.
pub fn write_rdf_file(path: impl AsRef<Path>, trace: &Trace) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_rdf(&mut w, trace)?;
    w.flush().map_err(|e| Error::io(path, e))
}
