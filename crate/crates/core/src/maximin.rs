//! Maximizes the minimum squared distance to a set of centers over the
//! product of simplices.
//!
//! The objective is a pointwise minimum of convex quadratics, so it is
//! nonconvex to maximize and its maxima tend to sit on vertices. The
//! solver enumerates every pure profile when that is affordable and runs
//! multistart projected-gradient ascent from uniform random interior
//! points, keeping the best candidate.

use std::cmp::Ordering;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::StrategyProfile;
use crate::sampling::{sample_uniform, squared_distance_slices as sq_dist};

#[derive(Debug, Clone)]
pub struct MaximinProblem {
    centers: Vec<StrategyProfile>,
    num_players: usize,
    num_actions: usize,
}

impl MaximinProblem {
    pub fn new(centers: Vec<StrategyProfile>) -> Result<Self> {
        let first = centers.first().ok_or(Error::NoCenters)?;
        let (num_players, num_actions) = (first.num_players(), first.num_actions());
        if centers
            .iter()
            .any(|c| c.num_players() != num_players || c.num_actions() != num_actions)
        {
            return Err(Error::ShapeMismatch("centers have different shapes".into()));
        }
        if let Some(i) = centers.iter().position(|c| !c.is_valid(1e-9)) {
            return Err(Error::InvalidStrategy(format!("center {i} is not on the simplex")));
        }
        Ok(Self {
            centers,
            num_players,
            num_actions,
        })
    }

    pub fn centers(&self) -> &[StrategyProfile] {
        &self.centers
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn eval(&self, x: &[f64]) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (i, c) in self.centers.iter().enumerate() {
            let d = sq_dist(x, c.as_slice());
            if d < best.0 {
                best = (d, i);
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    /// The returned point is a pure profile.
    Vertex,
    /// Best point found by ascent; no global guarantee.
    LocalOptimum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximinSolution {
    pub point: StrategyProfile,
    /// Minimum squared distance from `point` to the centers.
    pub objective: f64,
    pub certificate: Certificate,
    /// False when vertex enumeration was skipped for exceeding the cap.
    pub vertices_enumerated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub initial_step: f64,
    pub min_step: f64,
    /// Largest `m^n` for which every pure profile is evaluated.
    pub max_vertices: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iters: 500,
            initial_step: 0.5,
            min_step: 1e-8,
            max_vertices: 1 << 20,
        }
    }
}

/// `min_i ||x - c_i||^2`.
pub fn objective(x: &StrategyProfile, centers: &[StrategyProfile]) -> Result<f64> {
    if centers.is_empty() {
        return Err(Error::NoCenters);
    }
    centers.iter().try_fold(f64::INFINITY, |best, c| {
        Ok(best.min(crate::sampling::squared_distance(x, c)?))
    })
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    project_simplex_in_place(&mut out);
    out
}

pub(crate) fn project_simplex_in_place(v: &mut [f64]) {
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - theta).max(0.0));
}

#[derive(Debug, Clone)]
struct Candidate {
    point: Vec<f64>,
    objective: f64,
}

/// Higher objective wins; exact ties go to the lexicographically smaller
/// point.
fn better(a: &Candidate, b: &Candidate) -> bool {
    match a.objective.total_cmp(&b.objective) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.point.iter().zip(&b.point).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()) == Some(Ordering::Less),
    }
}

fn best_vertex(problem: &MaximinProblem) -> Candidate {
    let (n, m) = (problem.num_players, problem.num_actions);
    // ||e_a - c||^2 = sum_p (1 - 2 c_p[a_p] + ||c_p||^2)
    let norms: Vec<Vec<f64>> = problem
        .centers
        .iter()
        .map(|c| c.strategies().map(|s| s.iter().map(|x| x * x).sum()).collect())
        .collect();
    let mut actions = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let obj = problem
            .centers
            .iter()
            .zip(&norms)
            .map(|(c, norm)| {
                actions
                    .iter()
                    .enumerate()
                    .map(|(p, &a)| 1.0 - 2.0 * c.player(p)[a] + norm[p])
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        if best.as_ref().is_none_or(|b| obj > b.0) {
            best = Some((obj, actions.clone()));
        }
        // odometer increment, last player fastest
        let mut p = n;
        loop {
            if p == 0 {
                let (_, acts) = best.expect("at least one vertex");
                let point = StrategyProfile::pure(m, &acts).into_flat();
                let objective = problem.eval(&point).0;
                return Candidate { point, objective };
            }
            p -= 1;
            actions[p] += 1;
            if actions[p] < m {
                break;
            }
            actions[p] = 0;
        }
    }
}

fn ascend(problem: &MaximinProblem, start: Vec<f64>, config: &SolverConfig) -> Candidate {
    let m = problem.num_actions;
    let mut x = start;
    let (mut fx, mut active) = problem.eval(&x);
    let mut trial = vec![0.0; x.len()];
    for _ in 0..config.max_iters {
        let center = problem.centers[active].as_slice();
        let mut step = config.initial_step;
        let mut moved = false;
        while step >= config.min_step {
            for ((t, xi), ci) in trial.iter_mut().zip(&x).zip(center) {
                *t = xi + step * 2.0 * (xi - ci);
            }
            trial.chunks_mut(m).for_each(project_simplex_in_place);
            let (ft, at) = problem.eval(&trial);
            if ft > fx {
                std::mem::swap(&mut x, &mut trial);
                fx = ft;
                active = at;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Candidate { point: x, objective: fx }
}

fn is_vertex(point: &[f64]) -> bool {
    point.iter().all(|&x| x.abs() <= 1e-12 || (x - 1.0).abs() <= 1e-12)
}

pub fn solve<R: Rng + ?Sized>(problem: &MaximinProblem, config: &SolverConfig, rng: &mut R) -> Result<MaximinSolution> {
    let (n, m) = (problem.num_players, problem.num_actions);
    let vertex_count = u32::try_from(n).ok().and_then(|e| m.checked_pow(e));
    let enumerate = vertex_count.is_some_and(|c| c <= config.max_vertices);
    if !enumerate {
        log::warn!(
            "{m}^{n} pure profiles exceed the vertex cap {}; relying on {} ascent restarts",
            config.max_vertices,
            config.restarts
        );
    }
    let starts: Vec<Vec<f64>> = (0..config.restarts)
        .map(|_| sample_uniform(n, m, rng).into_flat())
        .collect();
    let mut candidates: Vec<Candidate> = starts
        .into_par_iter()
        .map(|s| ascend(problem, s, config))
        .collect();
    if enumerate {
        candidates.insert(0, best_vertex(problem));
    }
    let best = candidates
        .into_iter()
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .ok_or_else(|| Error::InvalidConfig("solver needs vertex enumeration or at least one restart".into()))?;
    let certificate = if is_vertex(&best.point) {
        Certificate::Vertex
    } else {
        Certificate::LocalOptimum
    };
    Ok(MaximinSolution {
        point: StrategyProfile::from_flat_unchecked(m, best.point),
        objective: best.objective,
        certificate,
        vertices_enumerated: enumerate,
    })
}
