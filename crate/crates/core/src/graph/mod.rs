//! Graph models of a trace and their file representations.
//!
//! * [`sgf`]: one complete graph per frame, edges labelled with the
//!   centroid distance of that frame.
//! * [`sgv`]: one graph per video, one node per object id, edges labelled
//!   with the minimum and maximum distance ever observed and the frames
//!   attaining them.
//! * [`mgv`]: a set of balanced graphs whose union is the per-video graph,
//!   with no connected component split across graphs.
//!
//! [`bgf`] reads and writes the graph files, [`idf`] the frame-indexed data
//! file used to fetch object attributes, and [`build`] generates every
//! model in a single streaming pass over a trace.

pub mod bgf;
pub mod build;
pub mod idf;
pub mod mgv;
pub mod sgf;
pub mod sgv;

use crate::trace::Frame;

/// One object of a frame as seen by the graph builders.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectObs {
    pub oid: u64,
    pub cl: String,
    pub clc: f64,
    pub centroid: [f64; 2],
}

/// The objects of one frame keyed by object id (ascending).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameObjects {
    pub fid: u64,
    pub objects: Vec<ObjectObs>,
}

impl FrameObjects {
    /// Extract the per-object observations of a trace frame.
    pub fn from_frame(frame: &Frame) -> Self {
        let mut objects: Vec<ObjectObs> = frame
            .records
            .iter()
            .map(|r| ObjectObs {
                oid: r.oid,
                cl: r.cl.clone(),
                clc: r.clc,
                centroid: r.bb.centroid(),
            })
            .collect();
        objects.sort_by_key(|o| o.oid);
        FrameObjects {
            fid: frame.fid,
            objects,
        }
    }

    /// Number of objects in the frame.
    pub fn len(&self) -> usize {
        self.objects.len()
    }

    /// Whether the frame holds no object.
    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }
}

/// Euclidean distance between two centroids (pixels).
///
/// Every model computes distances through this one function so the values
/// stored in graph labels and those recomputed from bounding boxes agree
/// bit for bit.
pub fn centroid_distance(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Normalised unordered pair key (smaller id first).
pub fn pair_key(a: u64, b: u64) -> (u64, u64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}
