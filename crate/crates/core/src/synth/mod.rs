//! Synthetic trace generator with planted, machine-readable ground truth.
//!
//! A [`ScenarioSpec`] scripts every object (entry/exit frames, waypoints,
//! box size, feature-vector seed), the extraction noise (centroid jitter,
//! missed detections, identity switches) and the situations planted in the
//! video. [`generate`] turns a spec and a seed into a [`Trace`] plus the
//! matching [`GroundTruth`]; the output is a pure function of both.
//!
//! Randomness uses ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64(seed)`, one stream per object (`set_stream(oid)`). Every
//! object draws, per frame of its scripted span and in this order: two
//! uniforms turned into two normals by Box–Muller (x/y jitter), one uniform
//! for the miss test, one uniform for the confidence, then one normal per
//! feature dimension. Uniforms are `(next_u64 >> 11) · 2⁻⁵³`. The draw
//! sequence does not depend on the noise settings, so changing σ or the
//! miss probability never reshuffles the other quantities.

pub mod presets;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{
    compute_meta, validate_class_label, write_rdf_file, BoundingBox, DetectionRecord, Frame,
    Timestamp, Trace, VideoCharacteristics,
};

/// Version tag written into spec and ground-truth documents.
pub const FORMAT_VERSION: u32 = 1;

/// Largest cosine similarity allowed between two objects' base feature vectors.
pub const MAX_BASE_COSINE: f64 = 0.6;

/// Standard deviation of the per-frame feature-vector noise.
pub const FV_NOISE: f64 = 0.01;

fn default_version() -> u32 {
    FORMAT_VERSION
}
fn default_video_id() -> String {
    "S_synth".into()
}
fn default_fv_dim() -> usize {
    8
}
fn default_generated() -> String {
    "2024-01-01T00:00:00Z".into()
}

/// Scripted position of an object at a frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub frame: u64,
    pub x: f64,
    pub y: f64,
}

/// Script of one object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectScript {
    pub oid: u64,
    pub cl: String,
    /// First frame the object is present.
    pub entry: u64,
    /// Last frame the object is present.
    pub exit: u64,
    /// Centroid waypoints in ascending frame order; positions between them
    /// are interpolated linearly and held constant outside them.
    pub waypoints: Vec<Waypoint>,
    /// Box width and height in pixels.
    pub size: [f64; 2],
    pub fv_seed: u64,
}

impl ObjectScript {
    /// Stationary object present over `[entry, exit]`.
    pub fn stationary(oid: u64, cl: &str, entry: u64, exit: u64, at: [f64; 2]) -> Self {
        ObjectScript {
            oid,
            cl: cl.into(),
            entry,
            exit,
            waypoints: vec![Waypoint {
                frame: entry,
                x: at[0],
                y: at[1],
            }],
            size: [20.0, 40.0],
            fv_seed: oid,
        }
    }

    /// Object moving linearly from `from` at `entry` to `to` at `exit`.
    pub fn linear(oid: u64, cl: &str, entry: u64, exit: u64, from: [f64; 2], to: [f64; 2]) -> Self {
        let mut s = ObjectScript::stationary(oid, cl, entry, exit, from);
        s.waypoints.push(Waypoint {
            frame: exit,
            x: to[0],
            y: to[1],
        });
        s
    }

    /// Scripted (noise-free) centroid at frame `f`.
    pub fn position(&self, f: u64) -> [f64; 2] {
        let w = &self.waypoints;
        let i = w.partition_point(|p| p.frame <= f);
        if i == 0 {
            return [w[0].x, w[0].y];
        }
        if i == w.len() {
            return [w[i - 1].x, w[i - 1].y];
        }
        let (a, b) = (&w[i - 1], &w[i]);
        let t = (f - a.frame) as f64 / (b.frame - a.frame) as f64;
        [a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)]
    }

    fn present(&self, f: u64) -> bool {
        self.entry <= f && f <= self.exit
    }
}

/// Scheduled identity switch: from `frame` on, `oid` is reported as `new_oid`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdSwitch {
    pub oid: u64,
    pub frame: u64,
    pub new_oid: u64,
}

/// Extraction noise model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Standard deviation of the centroid jitter, pixels.
    #[serde(default)]
    pub sigma: f64,
    /// Probability that a present object is not detected in a frame.
    #[serde(default)]
    pub miss_prob: f64,
    #[serde(default)]
    pub id_switches: Vec<IdSwitch>,
}

/// A situation planted by the script.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlantedSituation {
    /// `members` stay within `radius` of their common centre over `frames`.
    Group {
        members: Vec<u64>,
        frames: [u64; 2],
        radius: f64,
    },
    /// The pair's scripted distance decreases over `frames`.
    Approach { pair: [u64; 2], frames: [u64; 2] },
    /// The pair's scripted distance increases over `frames`.
    Retreat { pair: [u64; 2], frames: [u64; 2] },
}

/// Complete description of a synthetic video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default = "default_video_id")]
    pub video_id: String,
    pub frame_count: u64,
    pub fps: u32,
    pub width: u32,
    pub height: u32,
    /// Tracker horizon; defaults to the whole video.
    #[serde(default)]
    pub th_track: Option<u64>,
    #[serde(default = "default_fv_dim")]
    pub fv_dim: usize,
    #[serde(default = "default_generated")]
    pub generated: String,
    pub objects: Vec<ObjectScript>,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub situations: Vec<PlantedSituation>,
}

impl ScenarioSpec {
    /// Empty scenario with the given geometry.
    pub fn new(frame_count: u64, fps: u32, width: u32, height: u32) -> Self {
        ScenarioSpec {
            version: FORMAT_VERSION,
            video_id: default_video_id(),
            frame_count,
            fps,
            width,
            height,
            th_track: None,
            fv_dim: default_fv_dim(),
            generated: default_generated(),
            objects: Vec::new(),
            noise: NoiseSpec::default(),
            situations: Vec::new(),
        }
    }

    /// Load a spec from JSON.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Load a spec from a JSON file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ScenarioSpec::from_json(&text)
    }

    fn object(&self, oid: u64) -> Result<&ObjectScript> {
        self.objects
            .iter()
            .find(|o| o.oid == oid)
            .ok_or_else(|| Error::Validation(format!("situation refers to unknown object {oid}")))
    }

    /// Check every structural and planted-situation invariant.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.version != FORMAT_VERSION {
            return bad(format!("unsupported scenario version {}", self.version));
        }
        if self.frame_count < 1 || self.fps < 1 || self.width < 1 || self.height < 1 {
            return bad("frame count, fps, width and height must be positive".into());
        }
        if self.th_track == Some(0) {
            return bad("th_track must be at least 1".into());
        }
        if self.fv_dim < 2 {
            return bad("feature vectors need at least 2 dimensions".into());
        }
        let mut seen = BTreeSet::new();
        for o in &self.objects {
            if o.oid == 0 || !seen.insert(o.oid) {
                return bad(format!("object id {} is zero or repeated", o.oid));
            }
            validate_class_label(&o.cl).map_err(Error::Validation)?;
            if o.entry < 1 || o.entry > o.exit || o.exit > self.frame_count {
                return bad(format!("object {} has span outside the video", o.oid));
            }
            if o.waypoints.is_empty()
                || o.waypoints.windows(2).any(|w| w[0].frame >= w[1].frame)
                || o.waypoints.iter().any(|w| !w.x.is_finite() || !w.y.is_finite())
            {
                return bad(format!("object {} needs ascending finite waypoints", o.oid));
            }
            if !(o.size[0] > 0.0
                && o.size[1] > 0.0
                && o.size[0] <= self.width as f64
                && o.size[1] <= self.height as f64)
            {
                return bad(format!("object {} has a box that does not fit the frame", o.oid));
            }
        }
        let n = &self.noise;
        if !(n.sigma >= 0.0 && n.sigma.is_finite()) || !(0.0..1.0).contains(&n.miss_prob) {
            return bad("noise needs sigma ≥ 0 and miss probability in [0, 1)".into());
        }
        for s in &n.id_switches {
            let o = self.object(s.oid)?;
            if !o.present(s.frame) || s.new_oid == 0 || !seen.insert(s.new_oid) {
                return bad(format!(
                    "identity switch of {} must fall in its span and use a fresh id",
                    s.oid
                ));
            }
        }
        for sit in &self.situations {
            self.validate_situation(sit)?;
        }
        Ok(())
    }

    fn validate_situation(&self, sit: &PlantedSituation) -> Result<()> {
        let span_ok = |o: &ObjectScript, [a, b]: [u64; 2]| a <= b && o.present(a) && o.present(b);
        match sit {
            PlantedSituation::Group {
                members,
                frames,
                radius,
            } => {
                let objs = members
                    .iter()
                    .map(|&m| self.object(m))
                    .collect::<Result<Vec<_>>>()?;
                if objs.len() < 2 || objs.iter().any(|o| !span_ok(o, *frames)) {
                    return Err(Error::Validation(format!(
                        "group {members:?} needs ≥ 2 members present over {frames:?}"
                    )));
                }
                for f in frames[0]..=frames[1] {
                    let pts: Vec<[f64; 2]> = objs.iter().map(|o| o.position(f)).collect();
                    let c = centre(&pts);
                    if pts.iter().any(|p| dist(p, &c) > *radius) {
                        return Err(Error::Validation(format!(
                            "group {members:?} exceeds radius {radius} at frame {f}"
                        )));
                    }
                }
            }
            PlantedSituation::Approach { pair, frames } | PlantedSituation::Retreat { pair, frames } => {
                let (a, b) = (self.object(pair[0])?, self.object(pair[1])?);
                if pair[0] == pair[1] || !span_ok(a, *frames) || !span_ok(b, *frames) {
                    return Err(Error::Validation(format!(
                        "pair {pair:?} must be two objects present over {frames:?}"
                    )));
                }
                let closer = matches!(sit, PlantedSituation::Approach { .. });
                let d = |f| dist(&a.position(f), &b.position(f));
                let monotone = (frames[0]..frames[1]).all(|f| {
                    if closer {
                        d(f + 1) <= d(f)
                    } else {
                        d(f + 1) >= d(f)
                    }
                });
                let net = d(frames[1]) - d(frames[0]);
                if !monotone || (closer && net >= 0.0) || (!closer && net <= 0.0) {
                    return Err(Error::Validation(format!(
                        "scripted distance of pair {pair:?} is not monotone over {frames:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn centre(pts: &[[f64; 2]]) -> [f64; 2] {
    let n = pts.len() as f64;
    [
        pts.iter().map(|p| p[0]).sum::<f64>() / n,
        pts.iter().map(|p| p[1]).sum::<f64>() / n,
    ]
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Planted group in the ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTruth {
    pub size: usize,
    pub oids: Vec<u64>,
    pub frames: [u64; 2],
}

/// Planted approach or retreat in the ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTruth {
    pub pair: [u64; 2],
    pub frames: [u64; 2],
}

/// Machine-readable record of what a generated trace contains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub version: u32,
    pub seed: u64,
    pub video_id: String,
    pub groups: Vec<GroupTruth>,
    pub approaches: Vec<PairTruth>,
    pub retreats: Vec<PairTruth>,
}

impl GroundTruth {
    /// Derive the ground truth of `spec` (independent of the noise draws).
    pub fn of(spec: &ScenarioSpec, seed: u64) -> Self {
        let mut gt = GroundTruth {
            version: FORMAT_VERSION,
            seed,
            video_id: spec.video_id.clone(),
            groups: Vec::new(),
            approaches: Vec::new(),
            retreats: Vec::new(),
        };
        for sit in &spec.situations {
            match sit {
                PlantedSituation::Group {
                    members, frames, ..
                } => {
                    let mut oids = members.clone();
                    oids.sort_unstable();
                    gt.groups.push(GroupTruth {
                        size: oids.len(),
                        oids,
                        frames: *frames,
                    });
                }
                PlantedSituation::Approach { pair, frames } => gt.approaches.push(PairTruth {
                    pair: [pair[0].min(pair[1]), pair[0].max(pair[1])],
                    frames: *frames,
                }),
                PlantedSituation::Retreat { pair, frames } => gt.retreats.push(PairTruth {
                    pair: [pair[0].min(pair[1]), pair[0].max(pair[1])],
                    frames: *frames,
                }),
            }
        }
        gt
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Uniform draw in [0, 1) with 53 random bits.
pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Two independent standard normals by the Box–Muller transform.
pub fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = 1.0 - uniform(rng); // (0, 1]: keeps the logarithm finite
    let u2 = uniform(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let t = std::f64::consts::TAU * u2;
    (r * t.cos(), r * t.sin())
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let (a, b) = normal_pair(rng);
        out.push(a);
        out.push(b);
    }
    out.truncate(n);
    out
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    let r = (x * s).round() / s;
    if r == 0.0 {
        0.0 // normalise -0
    } else {
        r
    }
}

/// Base feature vectors in object order: each drawn from the object's
/// `fv_seed`, redrawn from the same stream while its cosine similarity to an
/// earlier object's base exceeds [`MAX_BASE_COSINE`].
fn base_vectors(spec: &ScenarioSpec) -> Result<BTreeMap<u64, Vec<f64>>> {
    const MAX_DRAWS: usize = 10_000;
    let mut out: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    let mut order: Vec<&ObjectScript> = spec.objects.iter().collect();
    order.sort_by_key(|o| o.oid);
    for o in order {
        let mut rng = ChaCha8Rng::seed_from_u64(o.fv_seed);
        let mut draws = 0;
        let v = loop {
            let v = unit(normals(&mut rng, spec.fv_dim));
            if out.values().all(|u| cosine(u, &v) <= MAX_BASE_COSINE) {
                break v;
            }
            draws += 1;
            if draws == MAX_DRAWS {
                return Err(Error::Validation(format!(
                    "no sufficiently distinct feature vector for object {}; raise fv_dim",
                    o.oid
                )));
            }
        };
        out.insert(o.oid, v);
    }
    Ok(out)
}

/// Generate the trace and ground truth of `spec` for `seed`.
pub fn generate(spec: &ScenarioSpec, seed: u64) -> Result<(Trace, GroundTruth)> {
    spec.validate()?;
    let bases = base_vectors(spec)?;
    let mut rngs: BTreeMap<u64, ChaCha8Rng> = spec
        .objects
        .iter()
        .map(|o| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(o.oid);
            (o.oid, r)
        })
        .collect();
    let (w, h) = (spec.width as f64, spec.height as f64);
    let mut frames = Vec::new();
    for f in 1..=spec.frame_count {
        let mut records = Vec::new();
        for o in spec.objects.iter().filter(|o| o.present(f)) {
            let rng = rngs.get_mut(&o.oid).expect("stream per object");
            let (jx, jy) = normal_pair(rng);
            let miss = uniform(rng) < spec.noise.miss_prob;
            let clc = round_to(0.6 + 0.4 * uniform(rng), 2);
            let fv_noise = normals(rng, spec.fv_dim);
            if miss {
                continue;
            }
            let p = o.position(f);
            let (bw, bh) = (o.size[0], o.size[1]);
            let cx = p[0] + spec.noise.sigma * jx;
            let cy = p[1] + spec.noise.sigma * jy;
            let x_min = round_to((cx - bw / 2.0).clamp(0.0, w - bw), 2);
            let y_min = round_to((cy - bh / 2.0).clamp(0.0, h - bh), 2);
            let bb = BoundingBox::new(
                x_min,
                y_min,
                round_to(x_min + bw, 2).min(w),
                round_to(y_min + bh, 2).min(h),
            )
            .map_err(Error::Validation)?;
            let fv = bases[&o.oid]
                .iter()
                .zip(&fv_noise)
                .map(|(b, n)| round_to(b + FV_NOISE * n, 4))
                .collect();
            let oid = spec
                .noise
                .id_switches
                .iter()
                .filter(|s| s.oid == o.oid && s.frame <= f)
                .max_by_key(|s| s.frame)
                .map_or(o.oid, |s| s.new_oid);
            records.push(DetectionRecord {
                fid: f,
                oid,
                cl: o.cl.clone(),
                clc,
                bb,
                fv,
                pv: Vec::new(),
                pcv: Vec::new(),
                ts: Timestamp { fid: f, rank: 0 },
            });
        }
        if records.is_empty() {
            continue;
        }
        records.sort_by_key(|r| r.oid);
        for (i, r) in records.iter_mut().enumerate() {
            r.ts.rank = i as u32 + 1;
        }
        frames.push(Frame { fid: f, records });
    }
    let chars = VideoCharacteristics {
        video_id: spec.video_id.clone(),
        length_seconds: spec.frame_count as f64 / spec.fps as f64,
        frame_count: spec.frame_count,
        fps: spec.fps,
        width: spec.width,
        height: spec.height,
        generation_datetime: spec.generated.clone(),
        pipeline_info: format!("synthetic-generator-v{FORMAT_VERSION}/chacha8/seed={seed}"),
        th_track: spec.th_track.unwrap_or(spec.frame_count),
    };
    let trace = Trace {
        meta: compute_meta(&frames),
        chars,
        frames,
        extra_headers: Vec::new(),
        comments: Vec::new(),
    };
    Ok((trace, GroundTruth::of(spec, seed)))
}

/// Generate and write `{stem}.rdf` and `{stem}.gt.json` into `dir`.
pub fn generate_files(
    spec: &ScenarioSpec,
    seed: u64,
    dir: impl AsRef<Path>,
    stem: &str,
) -> Result<(Trace, GroundTruth)> {
    let dir = dir.as_ref();
    let (trace, gt) = generate(spec, seed)?;
    write_rdf_file(dir.join(format!("{stem}.rdf")), &trace)?;
    let gt_path = dir.join(format!("{stem}.gt.json"));
    std::fs::write(&gt_path, gt.to_json()?).map_err(|e| Error::io(&gt_path, e))?;
    Ok((trace, gt))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_stationary() -> ScenarioSpec {
        let mut s = ScenarioSpec::new(100, 30, 640, 480);
        for (i, at) in [[100.0, 100.0], [110.0, 100.0], [105.0, 110.0]].into_iter().enumerate() {
            s.objects
                .push(ObjectScript::stationary(i as u64 + 1, "person", 1, 100, at));
        }
        s.situations.push(PlantedSituation::Group {
            members: vec![1, 2, 3],
            frames: [1, 100],
            radius: 10.0,
        });
        s
    }

    #[test]
    fn noiseless_group_ground_truth() {
        let (trace, gt) = generate(&three_stationary(), 1).unwrap();
        assert_eq!(trace.frames.len(), 100);
        assert_eq!(
            gt.groups,
            vec![GroupTruth {
                size: 3,
                oids: vec![1, 2, 3],
                frames: [1, 100]
            }]
        );
        let bb = &trace.frames[50].records[0].bb;
        assert_eq!(bb.centroid(), [100.0, 100.0]);
    }

    #[test]
    fn generation_is_deterministic() {
        let mut s = three_stationary();
        s.noise.sigma = 2.0;
        s.noise.miss_prob = 0.1;
        let a = generate(&s, 9).unwrap();
        let b = generate(&s, 9).unwrap();
        assert_eq!(a, b);
        let c = generate(&s, 10).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn converging_pair_ground_truth() {
        let mut s = ScenarioSpec::new(80, 30, 640, 480);
        s.objects
            .push(ObjectScript::linear(1, "person", 10, 60, [100.0, 200.0], [250.0, 200.0]));
        s.objects
            .push(ObjectScript::linear(2, "person", 10, 60, [500.0, 200.0], [350.0, 200.0]));
        s.situations.push(PlantedSituation::Approach {
            pair: [2, 1],
            frames: [10, 60],
        });
        let (_, gt) = generate(&s, 3).unwrap();
        assert_eq!(
            gt.approaches,
            vec![PairTruth {
                pair: [1, 2],
                frames: [10, 60]
            }]
        );
    }

    #[test]
    fn inconsistent_specs_are_rejected() {
        let mut s = three_stationary();
        s.situations.push(PlantedSituation::Group {
            members: vec![1, 2],
            frames: [50, 120],
            radius: 50.0,
        });
        assert!(matches!(generate(&s, 1), Err(Error::Validation(_))));
        let mut s = three_stationary();
        s.situations[0] = PlantedSituation::Group {
            members: vec![1, 2, 3],
            frames: [1, 100],
            radius: 1.0,
        };
        assert!(matches!(s.validate(), Err(Error::Validation(_))));
        let mut s = three_stationary();
        s.situations = vec![PlantedSituation::Approach {
            pair: [1, 2],
            frames: [1, 100],
        }];
        assert!(matches!(s.validate(), Err(Error::Validation(_))));
    }

    #[test]
    fn feature_vectors_separate_objects() {
        let mut s = ScenarioSpec::new(50, 30, 640, 480);
        for i in 1..=12 {
            s.objects.push(ObjectScript::stationary(
                i,
                "person",
                1,
                50,
                [20.0 + 40.0 * i as f64, 200.0],
            ));
        }
        let (trace, _) = generate(&s, 5).unwrap();
        let first = &trace.frames[0].records;
        let last = &trace.frames[49].records;
        for (a, b) in first.iter().zip(last) {
            assert!(1.0 - cosine(&a.fv, &b.fv) < 0.05);
        }
        for (i, a) in first.iter().enumerate() {
            for b in &first[i + 1..] {
                assert!(1.0 - cosine(&a.fv, &b.fv) > 0.3);
            }
        }
    }

    #[test]
    fn id_switch_and_spec_json() {
        let mut s = three_stationary();
        s.noise.id_switches.push(IdSwitch {
            oid: 2,
            frame: 40,
            new_oid: 20,
        });
        let text = serde_json::to_string(&s).unwrap();
        let back = ScenarioSpec::from_json(&text).unwrap();
        assert_eq!(back, s);
        let (trace, _) = generate(&s, 2).unwrap();
        assert!(trace.frames[38].records.iter().any(|r| r.oid == 2));
        let f40: Vec<u64> = trace.frames[39].records.iter().map(|r| r.oid).collect();
        assert_eq!(f40, vec![1, 3, 20]);
        assert_eq!(trace.meta.uo, 4);
    }
}
