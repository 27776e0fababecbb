//! K-means over flat point sets: k-means++ seeding, Lloyd iterations with
//! triangle-inequality pruning, and best-of-restarts selection.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sampling::squared_distance_slices as sq_dist;

pub const DEFAULT_MAX_ITERS: usize = 50;
pub const DEFAULT_RESTARTS: usize = 5;

/// Borrowed view of `len` points of dimension `dim`, stored row-major.
#[derive(Debug, Clone, Copy)]
pub struct PointSet<'a> {
    data: &'a [f64],
    dim: usize,
}

impl<'a> PointSet<'a> {
    pub fn new(data: &'a [f64], dim: usize) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::ShapeMismatch(format!(
                "{} coordinates do not form points of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { data, dim })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub centers: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
    pub sse: f64,
    /// Lloyd iterations performed (center update + reassignment).
    pub iterations: usize,
    pub converged: bool,
    /// SSE after each assignment step, starting with the seed assignment.
    pub sse_history: Vec<f64>,
    /// Point-to-center distance evaluations made during assignment.
    pub distance_evals: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assignment {
    /// Compare every point against every center.
    Naive,
    /// Skip centers that the triangle inequality proves are farther than
    /// the current best.
    Pruned,
}

fn check_k(points: &PointSet<'_>, k: usize) -> Result<()> {
    if k == 0 || points.len() < k {
        return Err(Error::PoolTooSmall {
            pool: points.len(),
            requested: k,
        });
    }
    Ok(())
}

/// Picks an index with probability proportional to `weights`; when every
/// weight is zero, picks uniformly among `fallback`.
pub(crate) fn weighted_or_uniform<R: Rng + ?Sized>(
    weights: &[f64],
    fallback: &[usize],
    rng: &mut R,
) -> usize {
    match WeightedIndex::new(weights) {
        Ok(dist) => dist.sample(rng),
        Err(_) => fallback[rng.random_range(0..fallback.len())],
    }
}

/// Indices chosen by k-means++ seeding: the first uniformly, each next one
/// with probability proportional to its squared distance to the nearest
/// chosen point.
pub fn kmeanspp_indices<R: Rng + ?Sized>(points: &PointSet<'_>, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    check_k(points, k)?;
    let len = points.len();
    let mut chosen = vec![rng.random_range(0..len)];
    let mut nearest: Vec<f64> = (0..len)
        .map(|i| sq_dist(points.point(i), points.point(chosen[0])))
        .collect();
    while chosen.len() < k {
        let remaining: Vec<usize> = (0..len).filter(|i| !chosen.contains(i)).collect();
        let next = weighted_or_uniform(&nearest, &remaining, rng);
        chosen.push(next);
        let c = points.point(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.point(i), c));
        }
    }
    Ok(chosen)
}

pub fn kmeanspp_seed<R: Rng + ?Sized>(points: &PointSet<'_>, k: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    Ok(kmeanspp_indices(points, k, rng)?
        .into_iter()
        .map(|i| points.point(i).to_vec())
        .collect())
}

fn sse_of(points: &PointSet<'_>, centers: &[Vec<f64>], assignment: &[usize]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &c)| sq_dist(points.point(i), &centers[c]))
        .sum()
}

/// Nearest center for every point (ties to the lowest index) and the
/// squared distance to it.
fn assign(
    points: &PointSet<'_>,
    centers: &[Vec<f64>],
    previous: Option<&[usize]>,
    mode: Assignment,
) -> (Vec<(usize, f64)>, u64) {
    let k = centers.len();
    let center_gaps: Vec<f64> = match mode {
        Assignment::Naive => Vec::new(),
        Assignment::Pruned => (0..k * k)
            .map(|ij| sq_dist(&centers[ij / k], &centers[ij % k]))
            .collect(),
    };
    let results: Vec<((usize, f64), u64)> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let x = points.point(i);
            match mode {
                Assignment::Naive => {
                    let mut best = (0, sq_dist(x, &centers[0]));
                    for (j, c) in centers.iter().enumerate().skip(1) {
                        let d = sq_dist(x, c);
                        if d < best.1 {
                            best = (j, d);
                        }
                    }
                    (best, k as u64)
                }
                Assignment::Pruned => {
                    let start = previous.map_or(0, |p| p[i]);
                    let mut best = (start, sq_dist(x, &centers[start]));
                    let mut evals = 1;
                    for j in (0..k).filter(|&j| j != start) {
                        // d(c_best, c_j) > 2 d(x, c_best) implies d(x, c_j) > d(x, c_best)
                        if center_gaps[best.0 * k + j] > 4.0 * best.1 * (1.0 + 1e-9) {
                            continue;
                        }
                        let d = sq_dist(x, &centers[j]);
                        evals += 1;
                        if d < best.1 || (d == best.1 && j < best.0) {
                            best = (j, d);
                        }
                    }
                    (best, evals)
                }
            }
        })
        .collect();
    let evals = results.iter().map(|r| r.1).sum();
    (results.into_iter().map(|r| r.0).collect(), evals)
}

/// Means of assigned points, in point-index order. Empty clusters keep
/// their previous center.
fn update_centers(points: &PointSet<'_>, assignment: &[usize], centers: &mut [Vec<f64>]) -> Vec<usize> {
    let dim = points.dim();
    let mut sums = vec![vec![0.0; dim]; centers.len()];
    let mut counts = vec![0usize; centers.len()];
    for (i, &c) in assignment.iter().enumerate() {
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(points.point(i)) {
            *s += x;
        }
    }
    let mut empty = Vec::new();
    for (c, (sum, count)) in sums.into_iter().zip(&counts).enumerate() {
        if *count == 0 {
            empty.push(c);
        } else {
            centers[c] = sum.into_iter().map(|s| s / *count as f64).collect();
        }
    }
    empty
}

pub fn lloyd(points: &PointSet<'_>, seeds: &[Vec<f64>], max_iters: usize) -> Result<Clustering> {
    lloyd_with(points, seeds, max_iters, Assignment::Pruned)
}

pub fn lloyd_with(
    points: &PointSet<'_>,
    seeds: &[Vec<f64>],
    max_iters: usize,
    mode: Assignment,
) -> Result<Clustering> {
    check_k(points, seeds.len())?;
    if seeds.iter().any(|s| s.len() != points.dim()) {
        return Err(Error::ShapeMismatch("seed dimension differs from points".into()));
    }
    let mut centers = seeds.to_vec();
    let (assigned, mut distance_evals) = assign(points, &centers, None, mode);
    let mut sse_history = vec![assigned.iter().map(|a| a.1).sum::<f64>()];
    let mut assignment: Vec<usize> = assigned.iter().map(|a| a.0).collect();
    let mut nearest: Vec<f64> = assigned.iter().map(|a| a.1).collect();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iters {
        iterations += 1;
        for c in update_centers(points, &assignment, &mut centers) {
            // empty cluster: move it onto the point farthest from its center
            let far = nearest
                .iter()
                .enumerate()
                .fold(0, |best, (i, &d)| if d > nearest[best] { i } else { best });
            centers[c] = points.point(far).to_vec();
            nearest[far] = 0.0;
        }
        let (assigned, evals) = assign(points, &centers, Some(&assignment), mode);
        distance_evals += evals;
        let next: Vec<usize> = assigned.iter().map(|a| a.0).collect();
        nearest = assigned.iter().map(|a| a.1).collect();
        let sse: f64 = nearest.iter().sum();
        debug_assert!(
            sse <= sse_history.last().unwrap() * (1.0 + 1e-12) + 1e-12,
            "SSE increased"
        );
        sse_history.push(sse);
        let stable = next == assignment;
        assignment = next;
        if stable {
            converged = true;
            break;
        }
    }
    if !converged {
        update_centers(points, &assignment, &mut centers);
    }
    let sse = sse_of(points, &centers, &assignment);
    Ok(Clustering {
        centers,
        assignment,
        sse,
        iterations,
        converged,
        sse_history,
        distance_evals,
    })
}

/// Runs k-means++ seeding followed by Lloyd `restarts` times and keeps the
/// lowest-SSE clustering (first one on ties).
pub fn best_of_restarts<R: Rng + ?Sized>(
    points: &PointSet<'_>,
    k: usize,
    restarts: usize,
    max_iters: usize,
    rng: &mut R,
) -> Result<Clustering> {
    if restarts == 0 {
        return Err(Error::InvalidConfig("need at least one k-means restart".into()));
    }
    let mut best: Option<Clustering> = None;
    for _ in 0..restarts {
        let seeds = kmeanspp_seed(points, k, rng)?;
        let run = lloyd(points, &seeds, max_iters)?;
        if best.as_ref().is_none_or(|b| run.sse < b.sse) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_clusters() -> Vec<f64> {
        vec![
            0.0, 0.0, 0.1, 0.0, 0.0, 0.1, // near origin
            5.0, 5.0, 5.1, 5.0, 5.0, 5.1, // near (5, 5)
        ]
    }

    #[test]
    fn seeds_at_means_converge_in_one_iteration() {
        let data = two_clusters();
        let pts = PointSet::new(&data, 2).unwrap();
        let seeds = vec![vec![0.1 / 3.0, 0.1 / 3.0], vec![5.0 + 0.1 / 3.0, 5.0 + 0.1 / 3.0]];
        let c = lloyd(&pts, &seeds, 50).unwrap();
        assert_eq!(c.iterations, 1);
        assert!(c.converged);
        assert_eq!(c.assignment, vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn k_equals_h_has_zero_sse() {
        let data = two_clusters();
        let pts = PointSet::new(&data, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = best_of_restarts(&pts, 6, 5, 50, &mut rng).unwrap();
        assert_eq!(c.sse, 0.0);
    }

    #[test]
    fn k1_seed_is_a_pool_point() {
        let data = two_clusters();
        let pts = PointSet::new(&data, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let idx = kmeanspp_indices(&pts, 1, &mut rng).unwrap();
        assert_eq!(idx.len(), 1);
        assert!(idx[0] < 6);
    }

    #[test]
    fn identical_points_fall_back_to_uniform() {
        let data = vec![0.3; 10];
        let pts = PointSet::new(&data, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut idx = kmeanspp_indices(&pts, 3, &mut rng).unwrap();
        idx.sort_unstable();
        idx.dedup();
        assert_eq!(idx.len(), 3);
    }

    #[test]
    fn pool_smaller_than_k_errors() {
        let data = vec![0.0; 4];
        let pts = PointSet::new(&data, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(kmeanspp_indices(&pts, 3, &mut rng).is_err());
        assert!(best_of_restarts(&pts, 1, 0, 50, &mut rng).is_err());
    }

    #[test]
    fn empty_cluster_is_repaired() {
        let data = two_clusters();
        let pts = PointSet::new(&data, 2).unwrap();
        // third seed is far from everything and never wins a point at first
        let seeds = vec![vec![0.0, 0.0], vec![5.0, 5.0], vec![100.0, 100.0]];
        let c = lloyd(&pts, &seeds, 50).unwrap();
        let mut used = c.assignment.clone();
        used.sort_unstable();
        used.dedup();
        assert_eq!(used, vec![0, 1, 2]);
        assert!(c.sse < c.sse_history[0]);
    }

    #[test]
    fn restarts_one_equals_single_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data: Vec<f64> = (0..200).map(|_| rng.random()).collect();
        let pts = PointSet::new(&data, 2).unwrap();
        let best = best_of_restarts(&pts, 4, 1, 50, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let seeds = kmeanspp_seed(&pts, 4, &mut rng).unwrap();
        assert_eq!(best, lloyd(&pts, &seeds, 50).unwrap());
    }

    #[test]
    fn best_of_restarts_beats_each_restart() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let data: Vec<f64> = (0..600).map(|_| rng.random()).collect();
        let pts = PointSet::new(&data, 3).unwrap();
        let best = best_of_restarts(&pts, 5, 5, 50, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let seeds = kmeanspp_seed(&pts, 5, &mut rng).unwrap();
            assert!(best.sse <= lloyd(&pts, &seeds, 50).unwrap().sse);
        }
    }

    #[test]
    fn sse_is_monotone_and_centers_are_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data: Vec<f64> = (0..3000).map(|_| rng.random()).collect();
        let pts = PointSet::new(&data, 3).unwrap();
        let seeds = kmeanspp_seed(&pts, 6, &mut rng).unwrap();
        let c = lloyd(&pts, &seeds, 200).unwrap();
        assert!(c.sse_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(c.converged);
        for (k, center) in c.centers.iter().enumerate() {
            let members: Vec<usize> = (0..pts.len()).filter(|&i| c.assignment[i] == k).collect();
            for d in 0..3 {
                let mean = members.iter().map(|&i| pts.point(i)[d]).sum::<f64>() / members.len() as f64;
                assert_abs_diff_eq!(center[d], mean, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn pruning_saves_work_without_changing_results() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let data: Vec<f64> = (0..4000).map(|_| rng.random()).collect();
        let pts = PointSet::new(&data, 2).unwrap();
        let seeds = kmeanspp_seed(&pts, 8, &mut rng).unwrap();
        let naive = lloyd_with(&pts, &seeds, 50, Assignment::Naive).unwrap();
        let pruned = lloyd_with(&pts, &seeds, 50, Assignment::Pruned).unwrap();
        assert_eq!(naive.assignment, pruned.assignment);
        assert_eq!(naive.sse, pruned.sse);
        assert!(pruned.distance_evals < naive.distance_evals);
    }
}
