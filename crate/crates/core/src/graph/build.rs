//! One-pass construction of the graph models and their files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::bgf::{save_sgf, save_sgv, MemberInfo, SgfFile, SgvFile};
use super::idf::save_idf;
use super::mgv::{BalanceBy, MgvBuilder, MgvParams, MgvSet};
use super::sgf::{SgfGraph, SgfSet};
use super::sgv::SgvBuilder;
use super::FrameObjects;
use crate::error::{Error, Result};
use crate::trace::{compute_meta, Frame, RdfReader, Trace, TraceMeta, VideoCharacteristics};

/// Which graph model(s) to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Sgf,
    Sgv,
    Mgv,
    All,
}

impl ModelKind {
    fn wants_sgf(self) -> bool {
        matches!(self, ModelKind::Sgf | ModelKind::All)
    }
    fn wants_sgv(self) -> bool {
        matches!(self, ModelKind::Sgv | ModelKind::All)
    }
    fn wants_mgv(self) -> bool {
        matches!(self, ModelKind::Mgv | ModelKind::All)
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgf" => Ok(ModelKind::Sgf),
            "sgv" => Ok(ModelKind::Sgv),
            "mgv" => Ok(ModelKind::Mgv),
            "all" => Ok(ModelKind::All),
            _ => Err(Error::Config(format!("unknown model {s:?}"))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Sgf => "sgf",
            ModelKind::Sgv => "sgv",
            ModelKind::Mgv => "mgv",
            ModelKind::All => "all",
        })
    }
}

/// Edge label kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeType {
    /// Per-frame centroid distance (per-frame model).
    Distance,
    /// Minimum/maximum centroid distance with attaining frames (per-video models).
    MinMaxDistance,
    /// Spatial relation of bounding boxes; accepted but not implemented.
    BoundingBoxSpatial,
}

impl FromStr for EdgeType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', ' '], "-").as_str() {
            "distance" => Ok(EdgeType::Distance),
            "min-max-distance" | "minmax" => Ok(EdgeType::MinMaxDistance),
            "bbox-spatial" | "bounding-box-spatial" => Ok(EdgeType::BoundingBoxSpatial),
            _ => Err(Error::Config(format!("unknown edge type {s:?}"))),
        }
    }
}

/// Parameters of [`build_models`].
#[derive(Debug, Clone, PartialEq)]
pub struct BuildConfig {
    pub model: ModelKind,
    /// `None` picks each model's own edge type.
    pub edge_type: Option<EdgeType>,
    /// Flush horizon in frames; `None` uses the trace's tracker horizon.
    pub th_track: Option<u64>,
    /// Partition balance mode (required for the partitioned model).
    pub balance_by: Option<BalanceBy>,
    /// Minimum member-graph size (required for the partitioned model).
    pub min_graph_size: Option<u64>,
}

impl BuildConfig {
    pub fn new(model: ModelKind) -> Self {
        BuildConfig {
            model,
            edge_type: None,
            th_track: None,
            balance_by: None,
            min_graph_size: None,
        }
    }

    /// Set the partition parameters.
    pub fn with_mgv(mut self, balance_by: BalanceBy, min_graph_size: u64) -> Self {
        self.balance_by = Some(balance_by);
        self.min_graph_size = Some(min_graph_size);
        self
    }

    fn validate(&self) -> Result<()> {
        match (self.model, self.edge_type) {
            (_, None) => {}
            (ModelKind::Sgf, Some(EdgeType::Distance)) => {}
            (ModelKind::Sgf, Some(EdgeType::BoundingBoxSpatial)) => {
                return Err(Error::NotImplemented(
                    "bounding-box spatial edges for the per-frame model".into(),
                ))
            }
            (ModelKind::Sgv | ModelKind::Mgv, Some(EdgeType::MinMaxDistance)) => {}
            (m, Some(e)) => {
                return Err(Error::Config(format!("edge type {e:?} is not valid for model {m}")))
            }
        }
        if self.model.wants_mgv() {
            if self.balance_by.is_none() || self.min_graph_size.is_none() {
                return Err(Error::Config(
                    "the partitioned model needs balance_by and min_graph_size".into(),
                ));
            }
        }
        if self.th_track == Some(0) {
            return Err(Error::Config("th_track must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything one build pass produces.
#[derive(Debug, Clone)]
pub struct BuiltModels {
    pub chars: VideoCharacteristics,
    pub meta: TraceMeta,
    /// Non-empty frames, kept for the data file.
    pub frames: Vec<Frame>,
    pub sgf: Option<SgfFile>,
    pub sgv: Option<SgvFile>,
    pub mgv: Option<MgvSet>,
    /// Checkpoints performed by the per-video builder.
    pub checkpoints: usize,
}

impl BuiltModels {
    /// The partitioned model as one file per member graph.
    pub fn mgv_files(&self) -> Vec<SgvFile> {
        let Some(set) = &self.mgv else {
            return Vec::new();
        };
        set.graphs
            .iter()
            .map(|g| {
                SgvFile::new(
                    self.chars.clone(),
                    self.meta.clone(),
                    g.graph.clone(),
                    Some(MemberInfo {
                        index: g.index,
                        count: set.graphs.len(),
                        balance_by: set.balance_by,
                        max_graph: set.max_graph,
                        mu: set.mu,
                        delta: g.delta,
                    }),
                )
            })
            .collect()
    }

    /// Write every built model plus the data file into `dir` as
    /// `{stem}.sgf.bgf`, `{stem}.sgv.bgf`, `{stem}.mgv.{i}.bgf` and
    /// `{stem}.idf`; returns the written paths.
    pub fn write(&self, dir: impl AsRef<Path>, stem: &str) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        let mut paths = Vec::new();
        if let Some(f) = &self.sgf {
            let p = dir.join(format!("{stem}.sgf.bgf"));
            save_sgf(&p, f)?;
            paths.push(p);
        }
        if let Some(f) = &self.sgv {
            let p = dir.join(format!("{stem}.sgv.bgf"));
            save_sgv(&p, f)?;
            paths.push(p);
        }
        for f in self.mgv_files() {
            let i = f.member.as_ref().expect("member graph").index;
            let p = dir.join(format!("{stem}.mgv.{i}.bgf"));
            save_sgv(&p, &f)?;
            paths.push(p);
        }
        let p = dir.join(format!("{stem}.idf"));
        save_idf(&p, &self.chars, &self.frames)?;
        paths.push(p);
        Ok(paths)
    }
}

/// Build the requested models from a stream of frames in one pass.
///
/// `meta` supplies the frame/object totals the partitioned model needs up
/// front; it is recomputed from the stream for the file headers when absent.
pub fn build_from_frames(
    chars: &VideoCharacteristics,
    meta: Option<&TraceMeta>,
    frames: impl IntoIterator<Item = Result<Frame>>,
    cfg: &BuildConfig,
) -> Result<BuiltModels> {
    cfg.validate()?;
    let th_track = cfg.th_track.unwrap_or(chars.th_track).max(1);
    let mut sgf = cfg.model.wants_sgf().then(SgfSet::default);
    let mut sgv = cfg.model.wants_sgv().then(|| SgvBuilder::new(th_track));
    let mut mgv = match (cfg.model.wants_mgv(), cfg.balance_by, cfg.min_graph_size) {
        (true, Some(b), Some(m)) => {
            let uo = meta
                .ok_or_else(|| {
                    Error::Config("the partitioned model needs the trace meta information".into())
                })?
                .uo as u64;
            Some(MgvBuilder::new(
                MgvParams {
                    balance_by: b,
                    min_graph_size: m,
                },
                chars.frame_count,
                uo,
                th_track,
            )?)
        }
        _ => None,
    };
    let mut kept = Vec::new();
    for frame in frames {
        let frame = frame?;
        if frame.records.is_empty() {
            continue;
        }
        let objs = FrameObjects::from_frame(&frame);
        if let Some(set) = &mut sgf {
            set.graphs.push(SgfGraph::from_frame(&objs));
        }
        if let Some(b) = &mut sgv {
            b.push(&objs);
        }
        if let Some(b) = &mut mgv {
            b.push(&objs);
        }
        kept.push(frame);
    }
    let meta = match meta {
        Some(m) => m.clone(),
        None => compute_meta(&kept),
    };
    let checkpoints = sgv.as_ref().map(|b| b.checkpoints()).unwrap_or(0);
    Ok(BuiltModels {
        sgf: sgf.map(|set| SgfFile {
            chars: chars.clone(),
            meta: meta.clone(),
            set,
            extra_headers: Vec::new(),
        }),
        sgv: sgv.map(|b| SgvFile::new(chars.clone(), meta.clone(), b.finish(), None)),
        mgv: mgv.map(MgvBuilder::finish),
        chars: chars.clone(),
        meta,
        frames: kept,
        checkpoints,
    })
}

/// Build the requested models from an in-memory trace.
pub fn build_models(trace: &Trace, cfg: &BuildConfig) -> Result<BuiltModels> {
    build_from_frames(
        &trace.chars,
        Some(&trace.meta),
        trace.frames.iter().cloned().map(Ok),
        cfg,
    )
}

/// Build the requested models from an RDF file, streaming its frames.
///
/// When the file carries no meta header and the partitioned model is
/// requested, a preliminary scan computes the totals it needs.
pub fn build_models_from_path(path: impl AsRef<Path>, cfg: &BuildConfig) -> Result<BuiltModels> {
    let path = path.as_ref();
    let reader = RdfReader::open(path)?;
    let chars = reader.header().chars.clone();
    let mut meta = reader.header().meta.clone();
    if meta.is_none() && cfg.model.wants_mgv() {
        let frames = RdfReader::open(path)?.collect::<Result<Vec<_>>>()?;
        meta = Some(compute_meta(&frames));
    }
    build_from_frames(&chars, meta.as_ref(), reader, cfg)
}
