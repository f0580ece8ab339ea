//! Frame-indexed data file (IDF): per-frame object attributes with a
//! byte-offset index for random access.
//!
//! Layout: a `#` header with the model tag, the video characteristics and
//! one `# index fid offset` line per stored frame, followed by one line per
//! frame: the frame id, a tab, then the frame's objects separated by `;`,
//! each object being its tab-separated attributes
//! (`oid cl clc bb fv pv pcv ts`). Offsets count bytes from the first data
//! line, so the index does not depend on its own length.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
#[cfg(unix)]
use std::os::unix::fs::FileExt;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::text::{header_line, split_header};
use crate::trace::{
    chars_header_lines, check_frame, fmt_row, parse_row, DetectionRecord, Frame, HeaderFields,
    VideoCharacteristics, CHAR_KEYS,
};

fn frame_line(frame: &Frame) -> String {
    let mut line = frame.fid.to_string();
    line.push('\t');
    for (i, r) in frame.records.iter().enumerate() {
        if i > 0 {
            line.push(';');
        }
        let row = fmt_row(r);
        // Drop the leading fid column: the frame id opens the line.
        line.push_str(row.split_once('\t').expect("row has columns").1);
    }
    line.push('\n');
    line
}

/// Serialise frames (ascending fid, non-empty) into IDF bytes.
pub fn write_idf(out: &mut impl Write, chars: &VideoCharacteristics, frames: &[Frame]) -> Result<()> {
    let io = |e| Error::io("<idf>", e);
    let mut header = vec![header_line("model", "idf")];
    header.extend(chars_header_lines(chars));
    let mut body = Vec::with_capacity(frames.len());
    let mut offset = 0u64;
    let mut last = 0u64;
    for f in frames.iter().filter(|f| !f.records.is_empty()) {
        if f.fid <= last {
            return Err(Error::Order(format!("frame {} after frame {last}", f.fid)));
        }
        last = f.fid;
        let line = frame_line(f);
        header.push(format!("# index {} {offset}", f.fid));
        offset += line.len() as u64;
        body.push(line);
    }
    for l in header {
        writeln!(out, "{l}").map_err(io)?;
    }
    for l in body {
        out.write_all(l.as_bytes()).map_err(io)?;
    }
    Ok(())
}

/// Serialise frames into an in-memory IDF.
pub fn idf_bytes(chars: &VideoCharacteristics, frames: &[Frame]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_idf(&mut buf, chars, frames)?;
    Ok(buf)
}

/// Parse one data line into its frame.
fn parse_frame_line(line: &str, line_no: usize, fv_dim: &mut Option<usize>) -> Result<Frame> {
    let (fid_s, rest) = line
        .split_once('\t')
        .ok_or_else(|| Error::parse(line_no, "frame line without objects"))?;
    let mut records = Vec::new();
    for entry in rest.split(';') {
        let mut cols = vec![fid_s];
        cols.extend(entry.split('\t'));
        records.push(parse_row(&cols, line_no)?);
    }
    let fid = records[0].fid;
    check_frame(fid, &records, line_no, fv_dim)?;
    Ok(Frame { fid, records })
}

#[derive(Debug)]
struct ParsedHeader {
    chars: VideoCharacteristics,
    index: Vec<(u64, u64)>,
    data_start: u64,
}

fn parse_header(input: &mut impl BufRead) -> Result<ParsedHeader> {
    let mut fields = HeaderFields::default();
    let mut index = Vec::new();
    let mut consumed = 0u64;
    let mut line_no = 0usize;
    let mut model_seen = false;
    let mut buf = String::new();
    loop {
        let peek = input.fill_buf().map_err(|e| Error::io("<idf>", e))?;
        if peek.first() != Some(&b'#') {
            break;
        }
        buf.clear();
        let n = input
            .read_line(&mut buf)
            .map_err(|e| Error::io("<idf>", e))?;
        consumed += n as u64;
        line_no += 1;
        let line = buf.trim_end_matches('\n');
        match split_header(line) {
            Some(("model", "idf")) => model_seen = true,
            Some(("index", v)) => {
                let (f, o) = v
                    .split_once(' ')
                    .ok_or_else(|| Error::parse(line_no, "index line needs fid and offset"))?;
                let f = f.parse().map_err(|_| Error::parse(line_no, "bad index fid"))?;
                let o = o.parse().map_err(|_| Error::parse(line_no, "bad index offset"))?;
                index.push((f, o));
            }
            Some((k, v)) if fields.offer(&CHAR_KEYS, line_no, k, v) => {}
            _ => return Err(Error::parse(line_no, format!("unexpected IDF header {line:?}"))),
        }
    }
    if !model_seen {
        return Err(Error::parse(1, "missing IDF model header"));
    }
    if index.windows(2).any(|w| w[0].0 >= w[1].0 || w[0].1 >= w[1].1) {
        return Err(Error::DataIntegrity("IDF index is not strictly ascending".into()));
    }
    Ok(ParsedHeader {
        chars: fields.chars()?,
        index,
        data_start: consumed,
    })
}

/// Parse a whole IDF document (header plus every frame).
pub fn read_idf_document(bytes: &[u8]) -> Result<(VideoCharacteristics, Vec<Frame>)> {
    let mut cursor = bytes;
    let h = parse_header(&mut cursor)?;
    let mut frames = Vec::new();
    let mut fv_dim = None;
    let mut offset = 0u64;
    let mut idx = h.index.iter();
    for (i, line) in cursor.split_inclusive(|b| *b == b'\n').enumerate() {
        let text = std::str::from_utf8(line)
            .map_err(|_| Error::parse(i + 1, "IDF data is not UTF-8"))?;
        let frame = parse_frame_line(text.trim_end_matches('\n'), i + 1, &mut fv_dim)?;
        match idx.next() {
            Some(&(f, o)) if f == frame.fid && o == offset => {}
            _ => {
                return Err(Error::DataIntegrity(format!(
                    "index entry for frame {} does not match its position",
                    frame.fid
                )))
            }
        }
        offset += line.len() as u64;
        frames.push(frame);
    }
    if idx.next().is_some() {
        return Err(Error::DataIntegrity("index lists frames missing from the data".into()));
    }
    Ok((h.chars, frames))
}

#[derive(Debug)]
enum Source {
    Memory(Arc<Vec<u8>>),
    #[cfg(unix)]
    File(File),
}

/// Random-access reader over an IDF.
///
/// Fetches are `&self` and thread-safe, so one reader can serve concurrent
/// analyses of several member graphs.
#[derive(Debug)]
pub struct Idf {
    pub chars: VideoCharacteristics,
    index: BTreeMap<u64, (u64, u64)>,
    data_start: u64,
    source: Source,
    fetches: AtomicUsize,
}

impl Idf {
    fn from_header(h: ParsedHeader, data_len: u64, source: Source) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, &(fid, off)) in h.index.iter().enumerate() {
            let end = h.index.get(i + 1).map(|x| x.1).unwrap_or(data_len);
            if end > data_len || off >= end {
                return Err(Error::DataIntegrity(format!(
                    "index offset of frame {fid} outside the data section"
                )));
            }
            index.insert(fid, (off, end - off));
        }
        Ok(Idf {
            chars: h.chars,
            index,
            data_start: h.data_start,
            source,
            fetches: AtomicUsize::new(0),
        })
    }

    /// Reader over an in-memory IDF.
    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self> {
        let h = parse_header(&mut bytes.as_slice())?;
        let data_len = bytes.len() as u64 - h.data_start;
        Idf::from_header(h, data_len, Source::Memory(Arc::new(bytes)))
    }

    /// Reader over an IDF on disk; only the header is read eagerly.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let len = file.metadata().map_err(|e| Error::io(path, e))?.len();
        let mut reader = BufReader::new(file.try_clone().map_err(|e| Error::io(path, e))?);
        let h = parse_header(&mut reader)?;
        let data_len = len - h.data_start;
        #[cfg(unix)]
        {
            Idf::from_header(h, data_len, Source::File(file))
        }
        #[cfg(not(unix))]
        {
            drop(reader);
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            Idf::from_header(h, data_len, Source::Memory(Arc::new(bytes)))
        }
    }

    /// Stored frame ids in ascending order.
    pub fn frame_ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.index.keys().copied()
    }

    /// Byte offset (from the data section) and length of a frame's line.
    pub fn offset_of(&self, fid: u64) -> Option<(u64, u64)> {
        self.index.get(&fid).copied()
    }

    /// Number of frame fetches served so far.
    pub fn fetch_count(&self) -> usize {
        self.fetches.load(Ordering::Relaxed)
    }

    /// Records of frame `fid`, or `None` when the frame holds no object.
    pub fn fetch(&self, fid: u64) -> Result<Option<Vec<DetectionRecord>>> {
        let Some(&(off, len)) = self.index.get(&fid) else {
            return Ok(None);
        };
        self.fetches.fetch_add(1, Ordering::Relaxed);
        let start = self.data_start + off;
        let bytes = match &self.source {
            Source::Memory(b) => b[start as usize..(start + len) as usize].to_vec(),
            #[cfg(unix)]
            Source::File(f) => {
                let mut buf = vec![0u8; len as usize];
                f.read_exact_at(&mut buf, start)
                    .map_err(|e| Error::io("<idf>", e))?;
                buf
            }
        };
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::DataIntegrity(format!("frame {fid} is not UTF-8")))?;
        let frame = parse_frame_line(text.trim_end_matches('\n'), 0, &mut None)?;
        if frame.fid != fid {
            return Err(Error::DataIntegrity(format!(
                "index of frame {fid} points at frame {}",
                frame.fid
            )));
        }
        Ok(Some(frame.records))
    }

    /// Like [`Idf::fetch`] but a missing frame is a data-integrity error.
    pub fn fetch_required(&self, fid: u64) -> Result<Vec<DetectionRecord>> {
        self.fetch(fid)?.ok_or_else(|| {
            Error::DataIntegrity(format!("frame {fid} is missing from the data file"))
        })
    }
}

/// Write an IDF to disk.
pub fn save_idf(path: impl AsRef<Path>, chars: &VideoCharacteristics, frames: &[Frame]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_idf(&mut w, chars, frames)?;
    w.flush().map_err(|e| Error::io(path, e))
}
