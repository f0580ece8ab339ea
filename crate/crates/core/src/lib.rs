//! Graph-based situation analysis over video content-extraction traces.
//!
//! The crate ingests per-frame object detections (the raw data file, see
//! [`trace`]), builds three graph representations of a video ([`graph`]):
//! one complete graph per frame, one aggregate graph per video, and a set
//! of component-disjoint balanced graphs, and answers two families of
//! situation queries over them:
//!
//! * groups of objects of a given size or the largest groups
//!   ([`groups`], built on the clustering primitives in [`cluster`]);
//! * pairs of objects moving monotonically closer or farther apart
//!   ([`approach`]).
//!
//! Order-preserving relational operators over the same traces live in
//! [`rpp`], and [`synth`] generates traces with planted ground truth so
//! every algorithm can be checked against an exhaustive oracle.

pub mod approach;
pub mod cluster;
pub mod error;
pub mod graph;
pub mod groups;
pub mod rpp;
pub mod synth;
pub mod text;
pub mod trace;

pub use error::{Error, Result};
