//! Parameterised scenario families used by tests, benchmarks and fixtures.
//!
//! Every preset is a pure function of its arguments; the randomness used to
//! lay a scenario out comes from its own ChaCha8 stream ([`LAYOUT_STREAM`]),
//! independent of the generator's per-object streams.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{normal_pair, uniform, ObjectScript, PlantedSituation, ScenarioSpec, Waypoint};

/// Stream id reserved for scenario layout draws.
pub const LAYOUT_STREAM: u64 = u64::MAX;

const WIDTH: u32 = 1280;
const HEIGHT: u32 = 720;
const FPS: u32 = 30;
const MARGIN: f64 = 80.0;

fn layout_rng(seed: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(LAYOUT_STREAM);
    r
}

fn below(rng: &mut ChaCha8Rng, n: u64) -> u64 {
    ((uniform(rng) * n as f64) as u64).min(n - 1)
}

fn point(rng: &mut ChaCha8Rng) -> [f64; 2] {
    [
        MARGIN + uniform(rng) * (WIDTH as f64 - 2.0 * MARGIN),
        MARGIN + uniform(rng) * (HEIGHT as f64 - 2.0 * MARGIN),
    ]
}

fn offset(rng: &mut ChaCha8Rng, radius: f64) -> [f64; 2] {
    let r = radius * uniform(rng).sqrt();
    let t = std::f64::consts::TAU * uniform(rng);
    [r * t.cos(), r * t.sin()]
}

fn shifted(waypoints: &[Waypoint], d: [f64; 2]) -> Vec<Waypoint> {
    waypoints
        .iter()
        .map(|w| Waypoint {
            frame: w.frame,
            x: w.x + d[0],
            y: w.y + d[1],
        })
        .collect()
}

/// Random moving groups with extraction noise: objects arrive in clusters
/// of 1–4 that share a piecewise-linear path (fixed member offsets within
/// 15 px), each cluster present over a random span of at least 30 % of the
/// video. Noise: σ = 1 px jitter, 2 % missed detections.
pub fn random_groups(seed: u64, frame_count: u64, n_objects: usize) -> ScenarioSpec {
    let mut rng = layout_rng(seed);
    let mut spec = ScenarioSpec::new(frame_count, FPS, WIDTH, HEIGHT);
    spec.video_id = format!("M_rand{seed}");
    spec.noise.sigma = 1.0;
    spec.noise.miss_prob = 0.02;
    let mut oid = 1;
    while (oid as usize) <= n_objects {
        let left = n_objects - oid as usize + 1;
        let size = (1 + below(&mut rng, 4) as usize).min(left);
        let len = ((0.3 + 0.7 * uniform(&mut rng)) * frame_count as f64).max(1.0) as u64;
        let len = len.min(frame_count);
        let entry = 1 + below(&mut rng, frame_count - len + 1);
        let exit = entry + len - 1;
        let stops = 2 + below(&mut rng, 3);
        let path: Vec<Waypoint> = (0..stops)
            .map(|i| {
                let p = point(&mut rng);
                Waypoint {
                    frame: entry + i * (len - 1) / (stops - 1).max(1),
                    x: p[0],
                    y: p[1],
                }
            })
            .collect();
        let mut path = path;
        path.dedup_by_key(|w| w.frame);
        let members: Vec<u64> = (oid..oid + size as u64).collect();
        for &m in &members {
            let d = offset(&mut rng, 15.0);
            spec.objects.push(ObjectScript {
                oid: m,
                cl: "person".into(),
                entry,
                exit,
                waypoints: shifted(&path, d),
                size: [20.0, 40.0],
                fv_seed: seed.wrapping_mul(1_000_003).wrapping_add(m),
            });
        }
        if size >= 2 {
            spec.situations.push(PlantedSituation::Group {
                members,
                frames: [entry, exit],
                radius: 30.0,
            });
        }
        oid += size as u64;
    }
    spec
}

/// Noise-free video with temporally constant grouping: 2–4 groups of 2–5
/// objects, separated by at least 200 px, all present throughout and
/// drifting rigidly together.
pub fn stable_groups(seed: u64, frame_count: u64) -> ScenarioSpec {
    let mut rng = layout_rng(seed);
    let mut spec = ScenarioSpec::new(frame_count, FPS, WIDTH, HEIGHT);
    spec.video_id = format!("S_stable{seed}");
    let groups = 2 + below(&mut rng, 3) as usize;
    let mut centres: Vec<[f64; 2]> = Vec::new();
    while centres.len() < groups {
        let c = point(&mut rng);
        let c = [c[0] * 0.7, c[1] * 0.7];
        if centres
            .iter()
            .all(|o| (o[0] - c[0]).hypot(o[1] - c[1]) >= 200.0)
        {
            centres.push(c);
        }
    }
    let drift = [uniform(&mut rng) * 200.0, uniform(&mut rng) * 100.0];
    let mut oid = 1;
    for c in centres {
        let size = 2 + below(&mut rng, 4);
        let members: Vec<u64> = (oid..oid + size).collect();
        for &m in &members {
            let d = offset(&mut rng, 12.0);
            let from = [c[0] + d[0], c[1] + d[1]];
            let to = [from[0] + drift[0], from[1] + drift[1]];
            let mut o = ObjectScript::linear(m, "person", 1, frame_count, from, to);
            o.fv_seed = seed.wrapping_mul(7919).wrapping_add(m);
            spec.objects.push(o);
        }
        spec.situations.push(PlantedSituation::Group {
            members,
            frames: [1, frame_count],
            radius: 24.0,
        });
        oid += size;
    }
    spec
}

/// One stationary group of 4 among 6 objects, noise-free.
pub fn one_group_among_six(frame_count: u64) -> ScenarioSpec {
    let mut spec = ScenarioSpec::new(frame_count, FPS, WIDTH, HEIGHT);
    spec.video_id = "S_group4of6".into();
    let at = [
        [300.0, 300.0],
        [312.0, 300.0],
        [300.0, 312.0],
        [312.0, 312.0],
        [900.0, 150.0],
        [950.0, 600.0],
    ];
    for (i, p) in at.into_iter().enumerate() {
        spec.objects
            .push(ObjectScript::stationary(i as u64 + 1, "person", 1, frame_count, p));
    }
    spec.situations.push(PlantedSituation::Group {
        members: vec![1, 2, 3, 4],
        frames: [1, frame_count],
        radius: 10.0,
    });
    spec
}

/// Long video whose largest group (8 objects plus a distant pair) exists
/// only during a short window; the rest of the video holds 4 wandering
/// objects before the window and 4 different ones after it.
pub fn sparse_largest_group(seed: u64, frame_count: u64, window: u64) -> ScenarioSpec {
    let mut rng = layout_rng(seed);
    let mut spec = ScenarioSpec::new(frame_count, FPS, WIDTH, HEIGHT);
    spec.video_id = format!("L_sparse{seed}");
    let a = frame_count / 2 - window / 2;
    let b = a + window - 1;
    let mut oid = 1;
    for (entry, exit) in [(1, a - 1), (b + 1, frame_count)] {
        for _ in 0..4 {
            let mut o = ObjectScript::linear(oid, "person", entry, exit, point(&mut rng), point(&mut rng));
            o.fv_seed = seed.wrapping_mul(104_729).wrapping_add(oid);
            spec.objects.push(o);
            oid += 1;
        }
    }
    let centre = [350.0 + 100.0 * uniform(&mut rng), 360.0];
    let members: Vec<u64> = (oid..oid + 8).collect();
    for (i, &m) in members.iter().enumerate() {
        let t = std::f64::consts::TAU * i as f64 / 8.0;
        let p = [centre[0] + 12.0 * t.cos(), centre[1] + 12.0 * t.sin()];
        let mut o = ObjectScript::stationary(m, "person", a, b, p);
        o.fv_seed = seed.wrapping_mul(104_729).wrapping_add(m);
        spec.objects.push(o);
    }
    oid += 8;
    for (i, p) in [[1050.0, 300.0], [1062.0, 310.0]].into_iter().enumerate() {
        let m = oid + i as u64;
        let mut o = ObjectScript::stationary(m, "person", a, b, p);
        o.fv_seed = seed.wrapping_mul(104_729).wrapping_add(m);
        spec.objects.push(o);
    }
    spec.situations.push(PlantedSituation::Group {
        members,
        frames: [a, b],
        radius: 13.0,
    });
    spec
}

/// Pair events in disjoint time windows, so only the planted pair's
/// distance ever changes: `windows` windows of 200 frames separated by
/// 40-frame gaps. Each window holds one pair that approaches, retreats,
/// approaches then retreats, or (one window) stays still. Distances move
/// by at least 250 px over a monotone leg. `sigma` sets the jitter.
pub fn pair_events(seed: u64, windows: u64, sigma: f64) -> ScenarioSpec {
    const LEN: u64 = 200;
    const GAP: u64 = 40;
    let mut rng = layout_rng(seed);
    let frame_count = GAP + windows * (LEN + GAP);
    let mut spec = ScenarioSpec::new(frame_count, FPS, WIDTH, HEIGHT);
    spec.video_id = format!("M_pairs{seed}");
    spec.noise.sigma = sigma;
    let still = below(&mut rng, windows);
    for w in 0..windows {
        let entry = GAP + w * (LEN + GAP) + 1;
        let exit = entry + LEN - 1;
        let mid = entry + LEN / 2;
        let (a, b) = (2 * w + 1, 2 * w + 2);
        let centre = [640.0 + (uniform(&mut rng) - 0.5) * 200.0, 360.0 + (uniform(&mut rng) - 0.5) * 100.0];
        let theta = std::f64::consts::PI * (uniform(&mut rng) - 0.5) * 0.5;
        let u = [theta.cos(), theta.sin()];
        let far = 560.0 + 60.0 * uniform(&mut rng);
        let near = 80.0 + 60.0 * uniform(&mut rng);
        let kind = if w == still { 3 } else { below(&mut rng, 3) };
        // Distance at the waypoints of this window.
        let legs: Vec<(u64, f64)> = match kind {
            0 => vec![(entry, far), (exit, near)],
            1 => vec![(entry, near), (exit, far)],
            2 => vec![(entry, far), (mid, near), (exit, far)],
            _ => vec![(entry, (far + near) / 2.0)],
        };
        for (oid, sign) in [(a, -1.0), (b, 1.0)] {
            spec.objects.push(ObjectScript {
                oid,
                cl: "person".into(),
                entry,
                exit,
                waypoints: legs
                    .iter()
                    .map(|&(f, d)| Waypoint {
                        frame: f,
                        x: centre[0] + sign * d / 2.0 * u[0],
                        y: centre[1] + sign * d / 2.0 * u[1],
                    })
                    .collect(),
                size: [20.0, 40.0],
                fv_seed: seed.wrapping_mul(15_485_863).wrapping_add(oid),
            });
        }
        let pair = [a, b];
        match kind {
            0 => spec.situations.push(PlantedSituation::Approach {
                pair,
                frames: [entry, exit],
            }),
            1 => spec.situations.push(PlantedSituation::Retreat {
                pair,
                frames: [entry, exit],
            }),
            2 => {
                spec.situations.push(PlantedSituation::Approach {
                    pair,
                    frames: [entry, mid],
                });
                spec.situations.push(PlantedSituation::Retreat {
                    pair,
                    frames: [mid, exit],
                });
            }
            _ => {}
        }
    }
    spec
}

/// Objects wandering on random piecewise-linear paths, noise-free; used
/// where only the trace itself (not a planted truth) serves as oracle.
pub fn wanderers(seed: u64, frame_count: u64, n_objects: usize) -> ScenarioSpec {
    let mut rng = layout_rng(seed);
    let mut spec = ScenarioSpec::new(frame_count, FPS, WIDTH, HEIGHT);
    spec.video_id = format!("S_wander{seed}");
    for oid in 1..=n_objects as u64 {
        let len = ((0.5 + 0.5 * uniform(&mut rng)) * frame_count as f64) as u64;
        let len = len.clamp(1, frame_count);
        let entry = 1 + below(&mut rng, frame_count - len + 1);
        let exit = entry + len - 1;
        let stops = 2 + below(&mut rng, 4);
        let mut waypoints: Vec<Waypoint> = (0..stops)
            .map(|i| {
                let p = point(&mut rng);
                Waypoint {
                    frame: entry + i * (len - 1) / (stops - 1),
                    x: p[0],
                    y: p[1],
                }
            })
            .collect();
        waypoints.dedup_by_key(|w| w.frame);
        let (jx, _) = normal_pair(&mut rng);
        spec.objects.push(ObjectScript {
            oid,
            cl: if jx > 1.0 { "car".into() } else { "person".into() },
            entry,
            exit,
            waypoints,
            size: [20.0, 40.0],
            fv_seed: seed.wrapping_mul(31).wrapping_add(oid),
        });
    }
    spec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::generate;

    #[test]
    fn presets_validate() {
        for seed in 0..5 {
            random_groups(seed, 300, 12).validate().unwrap();
            stable_groups(seed, 200).validate().unwrap();
            sparse_largest_group(seed, 2000, 20).validate().unwrap();
            pair_events(seed, 7, 2.0).validate().unwrap();
            wanderers(seed, 300, 6).validate().unwrap();
        }
        one_group_among_six(100).validate().unwrap();
    }

    #[test]
    fn random_groups_respect_object_count() {
        let (trace, _) = generate(&random_groups(3, 300, 17), 3).unwrap();
        assert_eq!(trace.meta.uo, 17);
    }
}
