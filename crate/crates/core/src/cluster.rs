//! Deterministic K-means, Elbow-based choice of K and Silhouette quality.
//!
//! These are the primitives shared by every group-detection algorithm.
//! Everything here is a pure function of its inputs: initialisation is
//! greedy farthest-first starting from the first point, and every tie
//! (initial centroid choice, nearest centroid, best K) resolves to the
//! lowest index, so identical inputs produce bit-identical clusterings.

use crate::error::{Error, Result};

/// A 2-D point (bounding-box centroid, in pixels).
pub type Point = [f64; 2];

/// Lloyd iterations stop after this many rounds.
pub const MAX_ITER: usize = 50;

/// Lloyd iterations stop once no centroid moves farther than this (pixels).
pub const TOL: f64 = 1e-3;

/// Result of one clustering of a point list.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub k: usize,
    /// Cluster index of every input point.
    pub assignments: Vec<usize>,
    pub centroids: Vec<Point>,
    /// Sum of squared distances from points to their assigned centroid.
    pub sse: f64,
    /// Clusters that received no point (their centroid was kept unchanged).
    pub empty_clusters: Vec<usize>,
}

impl Clustering {
    /// Point indices of every cluster, in cluster order (possibly empty).
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.assignments.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    /// Size of the largest cluster.
    pub fn largest_size(&self) -> usize {
        self.members().iter().map(Vec::len).max().unwrap_or(0)
    }
}

fn dist2(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

fn dist(a: &Point, b: &Point) -> f64 {
    dist2(a, b).sqrt()
}

/// Index of the nearest centroid; ties go to the lowest index.
fn nearest(p: &Point, centroids: &[Point]) -> usize {
    let mut best = 0;
    let mut best_d = dist2(p, &centroids[0]);
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = dist2(p, c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

/// One assignment pass followed by one centroid update.
fn assign_and_update(points: &[Point], centroids: &[Point]) -> Clustering {
    let k = centroids.len();
    let assignments: Vec<usize> = points.iter().map(|p| nearest(p, centroids)).collect();
    let mut sums = vec![[0.0f64; 2]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(&assignments) {
        sums[c][0] += p[0];
        sums[c][1] += p[1];
        counts[c] += 1;
    }
    let mut next = centroids.to_vec();
    let mut empty = Vec::new();
    for j in 0..k {
        if counts[j] == 0 {
            empty.push(j);
        } else {
            next[j] = [sums[j][0] / counts[j] as f64, sums[j][1] / counts[j] as f64];
        }
    }
    let sse = points
        .iter()
        .zip(&assignments)
        .map(|(p, &c)| dist2(p, &next[c]))
        .sum();
    Clustering {
        k,
        assignments,
        centroids: next,
        sse,
        empty_clusters: empty,
    }
}

/// Greedy farthest-first seeding: the first point, then repeatedly the
/// point whose distance to the chosen set is largest (lowest index on ties).
pub fn farthest_first(points: &[Point], k: usize) -> Vec<Point> {
    let mut chosen = vec![0usize];
    let mut min_d: Vec<f64> = points.iter().map(|p| dist2(p, &points[0])).collect();
    while chosen.len() < k {
        let mut best: Option<usize> = None;
        for (i, &d) in min_d.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            if best.is_none_or(|b| d > min_d[b]) {
                best = Some(i);
            }
        }
        let b = best.expect("k ≤ number of points");
        chosen.push(b);
        for (i, p) in points.iter().enumerate() {
            min_d[i] = min_d[i].min(dist2(p, &points[b]));
        }
    }
    chosen.into_iter().map(|i| points[i]).collect()
}

/// Lloyd's K-means from farthest-first seeding (or the given centroids).
pub fn kmeans(points: &[Point], k: usize, init: Option<&[Point]>) -> Result<Clustering> {
    kmeans_with_history(points, k, init).map(|(c, _)| c)
}

/// [`kmeans`] that also returns the SSE after every iteration.
pub fn kmeans_with_history(
    points: &[Point],
    k: usize,
    init: Option<&[Point]>,
) -> Result<(Clustering, Vec<f64>)> {
    if k == 0 || k > points.len() {
        return Err(Error::Param(format!(
            "K = {k} outside 1..={} for K-means",
            points.len()
        )));
    }
    let mut centroids = match init {
        Some(c) if c.len() == k => c.to_vec(),
        Some(c) => {
            return Err(Error::Param(format!(
                "{} initial centroids supplied for K = {k}",
                c.len()
            )))
        }
        None => farthest_first(points, k),
    };
    let mut history = Vec::new();
    let mut result = None;
    for _ in 0..MAX_ITER {
        let step = assign_and_update(points, &centroids);
        let shift = step
            .centroids
            .iter()
            .zip(&centroids)
            .map(|(a, b)| dist(a, b))
            .fold(0.0, f64::max);
        history.push(step.sse);
        centroids.clone_from(&step.centroids);
        result = Some(step);
        if shift < TOL {
            break;
        }
    }
    Ok((result.expect("at least one iteration"), history))
}

/// One nearest-centroid pass with carried centroids, then one recompute.
///
/// Clusters that receive no point keep their centroid and are listed in
/// [`Clustering::empty_clusters`].
pub fn simple_cluster(points: &[Point], centroids: &[Point]) -> Result<Clustering> {
    if centroids.is_empty() {
        return Err(Error::Param("simple clustering needs at least one centroid".into()));
    }
    Ok(assign_and_update(points, centroids))
}

/// SSE of the K-means clustering for every K in `1..=points.len()`.
pub fn elbow_curve(points: &[Point]) -> Result<Vec<f64>> {
    (1..=points.len())
        .map(|k| kmeans(points, k, None).map(|c| c.sse))
        .collect()
}

/// Choose K at the largest discrete second difference of the SSE curve.
///
/// The curve covers K = 1..=n; interior K (2..=n−1) are scored by
/// `SSE(K−1) − 2·SSE(K) + SSE(K+1)` and ties go to the smaller K.
///
/// Limitations worth knowing: with three points the only interior K is 2;
/// and because the curve starts at K = 1, nested structure dominates, so
/// well-separated groups whose centres themselves form tighter super-groups
/// are under-counted. Layouts with one dominant group and equal-sized
/// satellite groups are recovered exactly.
pub fn elbow(points: &[Point]) -> Result<usize> {
    if points.len() < 3 {
        return Err(Error::Param(format!(
            "the elbow method needs at least 3 points, got {}",
            points.len()
        )));
    }
    let sse = elbow_curve(points)?;
    let mut best_k = 2;
    let mut best = f64::NEG_INFINITY;
    for k in 2..points.len() {
        let d2 = sse[k - 2] - 2.0 * sse[k - 1] + sse[k];
        if d2 > best {
            best = d2;
            best_k = k;
        }
    }
    Ok(best_k)
}

/// K-means with K chosen by [`elbow`].
pub fn kmeans_elbow(points: &[Point]) -> Result<Clustering> {
    let k = elbow(points)?;
    kmeans(points, k, None)
}

/// Mean Silhouette coefficient shifted into `[0, 2]`.
///
/// Singleton clusters contribute 0; empty clusters are ignored. Fails with
/// [`Error::UndefinedQuality`] when fewer than two non-empty clusters exist
/// or every non-empty cluster is a singleton.
pub fn silhouette_scaled(clustering: &Clustering, points: &[Point]) -> Result<f64> {
    let clusters: Vec<Vec<usize>> = clustering
        .members()
        .into_iter()
        .filter(|m| !m.is_empty())
        .collect();
    if clusters.len() < 2 {
        return Err(Error::UndefinedQuality("fewer than two clusters".into()));
    }
    if clusters.iter().all(|m| m.len() == 1) {
        return Err(Error::UndefinedQuality("every cluster is a singleton".into()));
    }
    let mean_to = |i: usize, members: &[usize]| -> f64 {
        let others: Vec<&usize> = members.iter().filter(|&&j| j != i).collect();
        others.iter().map(|&&j| dist(&points[i], &points[j])).sum::<f64>() / others.len() as f64
    };
    let mut total = 0.0;
    for (ci, members) in clusters.iter().enumerate() {
        if members.len() == 1 {
            continue;
        }
        for &i in members {
            let a = mean_to(i, members);
            let b = clusters
                .iter()
                .enumerate()
                .filter(|(cj, _)| *cj != ci)
                .map(|(_, m)| mean_to(i, m))
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                total += (b - a) / denom;
            }
        }
    }
    Ok(total / points.len() as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive minimum-SSE partition into exactly `k` non-empty groups.
    fn brute_force_partition(points: &[Point], k: usize) -> Vec<usize> {
        let n = points.len();
        let mut best = (f64::INFINITY, vec![]);
        let total = k.pow(n as u32);
        for code in 0..total {
            let mut labels = Vec::with_capacity(n);
            let mut c = code;
            for _ in 0..n {
                labels.push(c % k);
                c /= k;
            }
            if (0..k).any(|j| !labels.contains(&j)) {
                continue;
            }
            let mut sse = 0.0;
            for j in 0..k {
                let ms: Vec<&Point> = (0..n).filter(|&i| labels[i] == j).map(|i| &points[i]).collect();
                let cx = ms.iter().map(|p| p[0]).sum::<f64>() / ms.len() as f64;
                let cy = ms.iter().map(|p| p[1]).sum::<f64>() / ms.len() as f64;
                sse += ms.iter().map(|p| dist2(p, &[cx, cy])).sum::<f64>();
            }
            if sse < best.0 {
                best = (sse, labels);
            }
        }
        best.1
    }

    fn same_partition(a: &[usize], b: &[usize]) -> bool {
        a.len() == b.len()
            && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
    }

    #[test]
    fn two_separated_pairs_match_the_optimal_partition() {
        let pts = [[0.0, 0.0], [0.0, 1.0], [10.0, 10.0], [10.0, 11.0]];
        let c = kmeans(&pts, 2, None).unwrap();
        assert_eq!(c.members(), vec![vec![0, 1], vec![2, 3]]);
        assert!(same_partition(&c.assignments, &brute_force_partition(&pts, 2)));
    }

    #[test]
    fn k_equal_to_n_gives_zero_sse_and_k_one_gives_the_mean() {
        let pts = [[1.0, 2.0], [5.0, 2.0], [3.0, 8.0]];
        let c = kmeans(&pts, 3, None).unwrap();
        assert_eq!(c.sse, 0.0);
        assert_eq!(c.members().iter().filter(|m| m.len() == 1).count(), 3);
        let c = kmeans(&pts, 1, None).unwrap();
        assert_eq!(c.centroids, vec![[3.0, 4.0]]);
    }

    #[test]
    fn k_out_of_range_is_a_parameter_error() {
        let pts = [[0.0, 0.0], [1.0, 1.0]];
        assert!(matches!(kmeans(&pts, 0, None), Err(Error::Param(_))));
        assert!(matches!(kmeans(&pts, 3, None), Err(Error::Param(_))));
    }

    #[test]
    fn simple_cluster_cases() {
        let pts = [[0.0, 0.0], [10.0, 10.0]];
        let c = simple_cluster(&pts, &pts).unwrap();
        assert_eq!(c.assignments, vec![0, 1]);
        assert_eq!(c.sse, 0.0);

        let pts = [[0.0, 0.0], [0.5, 0.2], [100.0, 100.0], [100.3, 99.8]];
        let km = kmeans(&pts, 2, None).unwrap();
        let sc = simple_cluster(&pts, &[[1.0, 1.0], [99.0, 99.0]]).unwrap();
        assert!(same_partition(&km.assignments, &sc.assignments));

        let far = simple_cluster(&pts, &[[-1000.0, -1000.0], [5000.0, 5000.0]]).unwrap();
        assert_eq!(far.assignments, vec![0; 4]);
        assert_eq!(far.empty_clusters, vec![1]);
        assert_eq!(far.centroids[1], [5000.0, 5000.0]);
    }

    #[test]
    fn elbow_on_three_triples_is_three() {
        let centres = [[0.0, 0.0], [200.0, 0.0], [100.0, 173.2]];
        let offsets = [[0.0, 0.0], [3.0, 1.0], [1.0, 4.0]];
        let pts: Vec<Point> = centres
            .iter()
            .flat_map(|c| offsets.iter().map(move |o| [c[0] + o[0], c[1] + o[1]]))
            .collect();
        assert_eq!(elbow(&pts).unwrap(), 3);
    }

    #[test]
    fn elbow_on_two_pairs_is_two() {
        let pts = [[0.0, 0.0], [0.0, 1.0], [50.0, 50.0], [50.0, 51.0]];
        assert_eq!(elbow(&pts).unwrap(), 2);
    }

    #[test]
    fn elbow_on_three_collinear_points_is_stable() {
        // Only K = 2 is interior for three points, so the answer is forced.
        let pts = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert_eq!(elbow(&pts).unwrap(), 2);
        assert_eq!(elbow(&pts).unwrap(), 2);
        assert!(matches!(elbow(&pts[..2]), Err(Error::Param(_))));
    }

    #[test]
    fn silhouette_cases() {
        let pts = [[0.0, 0.0], [0.0, 1.0], [1000.0, 0.0], [1000.0, 1.0]];
        let good = kmeans(&pts, 2, None).unwrap();
        assert!(silhouette_scaled(&good, &pts).unwrap() > 1.9);

        let swapped = Clustering {
            assignments: vec![0, 1, 1, 0],
            ..good.clone()
        };
        assert!(silhouette_scaled(&swapped, &pts).unwrap() < 1.0);

        // Both members of the pair are as far from each other as from the third point.
        let tri = [[0.0, 0.0], [2.0, 0.0], [1.0, 3f64.sqrt()]];
        let c = Clustering {
            k: 2,
            assignments: vec![0, 0, 1],
            centroids: vec![[1.0, 0.0], tri[2]],
            sse: 2.0,
            empty_clusters: vec![],
        };
        assert!((silhouette_scaled(&c, &tri).unwrap() - 1.0).abs() < 1e-12);

        let one = kmeans(&pts, 1, None).unwrap();
        assert!(matches!(silhouette_scaled(&one, &pts), Err(Error::UndefinedQuality(_))));
        let singletons = kmeans(&pts, 4, None).unwrap();
        assert!(matches!(
            silhouette_scaled(&singletons, &pts),
            Err(Error::UndefinedQuality(_))
        ));
    }
}
