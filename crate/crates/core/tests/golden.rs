//! Golden-file round trips for the trace, graph and data file formats.
//!
//! Every golden file must parse and re-serialise to the same bytes, and
//! building models from the golden trace must reproduce the golden model
//! files. Set `SITU_BLESS_GOLDEN=1` to rewrite the goldens from the current
//! writers (review the diff before committing).

use std::path::{Path, PathBuf};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use situ_core::graph::bgf::{read_sgf, read_sgv, sgf_to_string, sgv_to_string};
use situ_core::graph::build::{build_models, BuildConfig, ModelKind};
use situ_core::graph::idf::{idf_bytes, read_idf_document, save_idf, Idf};
use situ_core::graph::mgv::BalanceBy;
use situ_core::synth::{generate, presets};
use situ_core::trace::{parse_rdf_str, write_rdf_string};

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn blessing() -> bool {
    std::env::var_os("SITU_BLESS_GOLDEN").is_some()
}

/// Compare `bytes` with the golden file `name` (or rewrite it when blessing).
fn check_golden(name: &str, bytes: &[u8]) {
    let path = golden_dir().join(name);
    if blessing() {
        std::fs::write(&path, bytes).unwrap();
        return;
    }
    let want = std::fs::read(&path).unwrap_or_else(|e| panic!("golden {name}: {e}"));
    assert!(want == bytes, "{name} differs from its golden file");
}

fn golden_text(name: &str) -> String {
    std::fs::read_to_string(golden_dir().join(name)).unwrap()
}

const MODEL_FILES: [&str; 5] = [
    "sample.sgf.bgf",
    "sample.sgv.bgf",
    "sample.mgv.0.bgf",
    "sample.mgv.1.bgf",
    "sample.idf",
];

#[test]
fn rdf_parses_and_writes_byte_identically() {
    let text = golden_text("sample.rdf");
    let trace = parse_rdf_str(&text).unwrap();
    assert_eq!(trace.comments.len(), 1);
    assert_eq!(trace.extra_headers, vec!["# camera north-gate".to_string()]);
    check_golden("sample.rdf", write_rdf_string(&trace).unwrap().as_bytes());
}

#[test]
fn built_models_match_goldens() {
    let trace = parse_rdf_str(&golden_text("sample.rdf")).unwrap();
    let cfg = BuildConfig::new(ModelKind::All).with_mgv(BalanceBy::Node, 2);
    let built = build_models(&trace, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = built.write(dir.path(), "sample").unwrap();
    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, MODEL_FILES);
    for name in MODEL_FILES {
        check_golden(name, &std::fs::read(dir.path().join(name)).unwrap());
    }
}

#[test]
fn model_goldens_parse_and_write_byte_identically() {
    for name in ["sample.sgv.bgf", "sample.mgv.0.bgf", "sample.mgv.1.bgf"] {
        let text = golden_text(name);
        let f = read_sgv(text.as_bytes()).unwrap();
        assert_eq!(sgv_to_string(&f).unwrap(), text, "{name}");
    }
    let text = golden_text("sample.sgf.bgf");
    let f = read_sgf(text.as_bytes()).unwrap();
    assert_eq!(sgf_to_string(&f).unwrap(), text);

    let bytes = std::fs::read(golden_dir().join("sample.idf")).unwrap();
    let (chars, frames) = read_idf_document(&bytes).unwrap();
    assert_eq!(idf_bytes(&chars, &frames).unwrap(), bytes);
}

#[test]
fn golden_data_file_fetches_every_frame() {
    let trace = parse_rdf_str(&golden_text("sample.rdf")).unwrap();
    let idf = Idf::open(golden_dir().join("sample.idf")).unwrap();
    let fids: Vec<u64> = idf.frame_ids().collect();
    assert_eq!(fids, vec![1, 2, 4, 5, 9]);
    for frame in &trace.frames {
        assert_eq!(idf.fetch(frame.fid).unwrap().unwrap(), frame.records);
    }
    assert_eq!(idf.fetch(3).unwrap(), None);
}

#[test]
fn one_hundred_random_frame_fetches_match_the_trace() {
    let (trace, _) = generate(&presets::random_groups(5, 1200, 12), 5).unwrap();
    let frames: Vec<_> = trace.frames.iter().filter(|f| !f.records.is_empty()).cloned().collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.idf");
    save_idf(&path, &trace.chars, &frames).unwrap();
    let raw = std::fs::read(&path).unwrap();
    let data_start = raw.len() - frames_data_len(&raw);

    let idf = Idf::open(&path).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let frame = &frames[(rng.next_u64() % frames.len() as u64) as usize];
        let (off, len) = idf.offset_of(frame.fid).unwrap();
        // The indexed byte range holds exactly this frame's line.
        let line = &raw[data_start + off as usize..data_start + (off + len) as usize];
        assert!(line.starts_with(format!("{}\t", frame.fid).as_bytes()));
        assert!(line.ends_with(b"\n"));
        assert_eq!(idf.fetch(frame.fid).unwrap().unwrap(), frame.records);
    }
    assert_eq!(idf.fetch_count(), 100);
}

/// Length of the data section: everything after the last header line.
fn frames_data_len(raw: &[u8]) -> usize {
    let mut pos = 0;
    while raw[pos..].starts_with(b"#") {
        pos += raw[pos..].iter().position(|&b| b == b'\n').unwrap() + 1;
    }
    raw.len() - pos
}
