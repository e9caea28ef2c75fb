//! The grey wolf optimizer.
//!
//! A population of candidate positions is pulled toward the three best
//! solutions found so far (alpha, beta, delta). Coordinate updates follow the
//! encircling equations: per leader, `D = |C * leader - x|` and
//! `X_i = leader - A * D`, with the new position the mean of the three
//! leader-relative moves. The exploration coefficient `a` falls linearly from
//! 2 to 0 across iterations.
//!
//! The three wolves currently holding the best-ever fitness values act as
//! leaders and keep their positions for the iteration; every other wolf is
//! updated, clamped into the carrier box, and re-evaluated. Leader roles are
//! reassigned after each evaluation batch, ties broken by lowest wolf index,
//! which keeps the best-fitness trace non-increasing.
//!
//! Determinism: every wolf draws from its own seed-derived stream, so
//! evaluating candidates concurrently cannot change any result.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::space::{clamp, decode, DecodedSolution, Position, SearchSpace};

use crate::error::{Error, Result};
use crate::rng::{self, tags, StreamRng};

/// Run parameters. Defaults mirror the calibration setup: 10 wolves for 30
/// iterations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GwoConfig {
    pub pop_size: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Candidates injected into the initial population (clamped first).
    #[serde(default)]
    pub seeded_candidates: Vec<Position>,
}

impl GwoConfig {
    pub fn new(pop_size: usize, iterations: usize, seed: u64) -> Self {
        GwoConfig {
            pop_size,
            iterations,
            seed,
            seeded_candidates: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.pop_size < 4 {
            return Err(Error::invalid_argument(format!(
                "population must hold alpha, beta, delta and at least one follower; got {}",
                self.pop_size
            )));
        }
        if self.iterations == 0 {
            return Err(Error::invalid_argument("iterations must be positive"));
        }
        if self.seeded_candidates.len() > self.pop_size {
            return Err(Error::invalid_argument(format!(
                "{} seeded candidates exceed population size {}",
                self.seeded_candidates.len(),
                self.pop_size
            )));
        }
        Ok(())
    }
}

impl Default for GwoConfig {
    fn default() -> Self {
        GwoConfig::new(10, 30, 0)
    }
}

/// The three best candidates found so far, ordered by fitness.
#[derive(Debug, Clone)]
pub struct Leaders {
    pub alpha: (Position, f64),
    pub beta: (Position, f64),
    pub delta: (Position, f64),
}

/// Convergence record of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trace {
    /// Best fitness after each iteration; non-increasing.
    pub best_fitness_per_iteration: Vec<f64>,
    pub wall_time_seconds: f64,
    pub evaluations: u64,
}

impl Trace {
    /// CSV export with columns `iteration,best_fitness`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "iteration,best_fitness")?;
        for (i, f) in self.best_fitness_per_iteration.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, f)?;
        }
        Ok(())
    }
}

/// Run metadata exported alongside the trace CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub pop_size: usize,
    pub iterations: usize,
    pub wall_time_seconds: f64,
    pub evaluations: u64,
}

impl RunMetadata {
    pub fn from_run(config: &GwoConfig, trace: &Trace) -> Self {
        RunMetadata {
            seed: config.seed,
            pop_size: config.pop_size,
            iterations: config.iterations,
            wall_time_seconds: trace.wall_time_seconds,
            evaluations: trace.evaluations,
        }
    }
}

/// Outcome of an optimization run.
#[derive(Debug, Clone)]
pub struct GwoResult {
    pub solution: DecodedSolution,
    pub position: Position,
    pub fitness: f64,
    pub trace: Trace,
}

/// Exploration coefficient `a(t) = 2 * (1 - t/T)`, the linear slide from 2
/// down to 0.
pub fn coefficient_a(t: usize, total: usize) -> Result<f64> {
    if total == 0 {
        return Err(Error::invalid_argument("total iterations must be positive"));
    }
    if t > total {
        return Err(Error::invalid_argument(format!(
            "iteration index {t} exceeds total {total}"
        )));
    }
    Ok(2.0 * (1.0 - t as f64 / total as f64))
}

/// Coefficient vectors `A = 2a*r1 - a` and `C = 2*r2`.
pub fn coefficient_vectors(a: f64, r1: &[f64], r2: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if r1.len() != r2.len() {
        return Err(Error::invalid_argument(format!(
            "r1 has {} components, r2 has {}",
            r1.len(),
            r2.len()
        )));
    }
    let a_vec = r1.iter().map(|&r| 2.0 * a * r - a).collect();
    let c_vec = r2.iter().map(|&r| 2.0 * r).collect();
    Ok((a_vec, c_vec))
}

/// One encircling move toward a leader: `D = |C*leader - x|`,
/// `result = leader - A*D`.
pub fn encircle_step(x: &Position, leader: &Position, a: &[f64], c: &[f64]) -> Result<Position> {
    let n = x.len();
    if leader.len() != n || a.len() != n || c.len() != n {
        return Err(Error::invalid_argument(format!(
            "encircle_step length mismatch: x={}, leader={}, A={}, C={}",
            n,
            leader.len(),
            a.len(),
            c.len()
        )));
    }
    let coords = (0..n)
        .map(|i| {
            let d = (c[i] * leader.coords[i] - x.coords[i]).abs();
            leader.coords[i] - a[i] * d
        })
        .collect();
    Ok(Position::new(coords))
}

/// Full position update for one wolf: independent `(r1, r2)` vectors are
/// drawn per leader (alpha first, then beta, then delta; within a leader the
/// whole `r1` vector is drawn before `r2`, components in dimension order),
/// and the three encircling moves are averaged componentwise.
pub fn pack_update(
    x: &Position,
    leaders: &Leaders,
    a: f64,
    rng: &mut StreamRng,
) -> Result<Position> {
    let n = x.len();
    let mut acc = vec![0.0; n];
    for (leader, _) in [&leaders.alpha, &leaders.beta, &leaders.delta] {
        let r1: Vec<f64> = (0..n).map(|_| rng::uniform01(rng)).collect();
        let r2: Vec<f64> = (0..n).map(|_| rng::uniform01(rng)).collect();
        let (a_vec, c_vec) = coefficient_vectors(a, &r1, &r2)?;
        let xi = encircle_step(x, leader, &a_vec, &c_vec)?;
        for (s, v) in acc.iter_mut().zip(xi.coords) {
            *s += v;
        }
    }
    Ok(Position::new(acc.into_iter().map(|s| s / 3.0).collect()))
}

fn sanitize(f: f64) -> f64 {
    if f.is_finite() {
        f
    } else {
        f64::INFINITY
    }
}

/// Indices of the three best wolves by `(fitness, index)`.
fn leader_indices(fitness: &[f64]) -> [usize; 3] {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| {
        fitness[a]
            .partial_cmp(&fitness[b])
            .expect("fitness sanitized to non-NaN")
            .then(a.cmp(&b))
    });
    [order[0], order[1], order[2]]
}

/// Minimize `objective` over `space`.
///
/// The initial population is the clamped seeded candidates plus uniform
/// random positions up to `pop_size`. Each iteration moves every non-leader
/// wolf, clamps it, evaluates the whole population (exactly
/// `pop_size * (iterations + 1)` objective calls in total), and refreshes the
/// leader roles. Non-finite objective values are treated as `+inf` and the
/// run continues.
pub fn gwo_optimize<F>(objective: F, space: &SearchSpace, config: &GwoConfig) -> Result<GwoResult>
where
    F: Fn(&DecodedSolution) -> f64 + Sync,
{
    config.validate()?;
    let start = Instant::now();
    let n = config.pop_size;

    let mut positions: Vec<Position> = Vec::with_capacity(n);
    for cand in &config.seeded_candidates {
        positions.push(clamp(cand, space)?);
    }
    let mut init_rng = rng::stream(config.seed, tags::GWO_INIT, 0);
    while positions.len() < n {
        let coords = space
            .dims()
            .iter()
            .map(|d| {
                let (lo, hi) = d.carrier();
                rng::uniform(&mut init_rng, lo, hi)
            })
            .collect();
        positions.push(Position::new(coords));
    }

    let mut wolf_rngs: Vec<StreamRng> = (0..n)
        .map(|i| rng::stream(config.seed, tags::GWO_WOLF, i as u64))
        .collect();

    let evaluate = |positions: &[Position]| -> Result<Vec<f64>> {
        let decoded: Vec<DecodedSolution> = positions
            .iter()
            .map(|p| decode(p, space))
            .collect::<Result<_>>()?;
        Ok(decoded
            .par_iter()
            .map(|sol| sanitize(objective(sol)))
            .collect())
    };

    let mut fitness = evaluate(&positions)?;
    let mut evaluations = n as u64;
    let mut leaders = leader_indices(&fitness);

    let mut best_per_iteration = Vec::with_capacity(config.iterations);
    for round in 0..config.iterations {
        // Canonical schedule: the first update round uses a = 2.
        let a = coefficient_a(round, config.iterations)?;
        let snapshot = Leaders {
            alpha: (positions[leaders[0]].clone(), fitness[leaders[0]]),
            beta: (positions[leaders[1]].clone(), fitness[leaders[1]]),
            delta: (positions[leaders[2]].clone(), fitness[leaders[2]]),
        };
        for i in 0..n {
            if leaders.contains(&i) {
                continue;
            }
            let moved = pack_update(&positions[i], &snapshot, a, &mut wolf_rngs[i])?;
            positions[i] = clamp(&moved, space)?;
        }
        fitness = evaluate(&positions)?;
        evaluations += n as u64;
        leaders = leader_indices(&fitness);
        best_per_iteration.push(fitness[leaders[0]]);
    }

    let best = leaders[0];
    Ok(GwoResult {
        solution: decode(&positions[best], space)?,
        position: positions[best].clone(),
        fitness: fitness[best],
        trace: Trace {
            best_fitness_per_iteration: best_per_iteration,
            wall_time_seconds: start.elapsed().as_secs_f64(),
            evaluations,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gwo::space::DimensionSpec;
    use crate::rng::uniform01;

    fn sphere(sol: &DecodedSolution) -> f64 {
        sol.iter().map(|v| v.as_real().unwrap().powi(2)).sum()
    }

    #[test]
    fn coefficient_a_schedule_endpoints() {
        assert_eq!(coefficient_a(0, 30).unwrap(), 2.0);
        assert_eq!(coefficient_a(30, 30).unwrap(), 0.0);
        assert_eq!(coefficient_a(15, 30).unwrap(), 1.0);
        assert!(coefficient_a(0, 0).is_err());
        assert!(coefficient_a(31, 30).is_err());
    }

    #[test]
    fn coefficient_vectors_examples() {
        let (a, c) = coefficient_vectors(2.0, &[0.5], &[0.5]).unwrap();
        assert_eq!((a[0], c[0]), (0.0, 1.0));
        let (a, c) = coefficient_vectors(0.0, &[0.9], &[1.0]).unwrap();
        assert_eq!((a[0], c[0]), (0.0, 2.0));
        let (a, c) = coefficient_vectors(1.0, &[1.0], &[0.0]).unwrap();
        assert_eq!((a[0], c[0]), (1.0, 0.0));
        assert!(coefficient_vectors(1.0, &[0.5, 0.5], &[0.5]).is_err());
    }

    #[test]
    fn encircle_step_examples() {
        let step = |x: f64, l: f64, a: f64, c: f64| {
            encircle_step(
                &Position::new(vec![x]),
                &Position::new(vec![l]),
                &[a],
                &[c],
            )
            .unwrap()
            .coords[0]
        };
        // A = 0 collapses onto the leader.
        assert_eq!(step(3.0, 5.0, 0.0, 1.0), 5.0);
        // Origin leader is a fixed point.
        assert_eq!(step(0.0, 0.0, 0.7, 1.3), 0.0);
        // D = |1*2 - 1| = 1, result = 2 - 1*1 = 1.
        assert_eq!(step(1.0, 2.0, 1.0, 1.0), 1.0);

        assert!(encircle_step(
            &Position::new(vec![1.0, 2.0]),
            &Position::new(vec![1.0]),
            &[0.0],
            &[1.0]
        )
        .is_err());
    }

    fn leaders_at(p: &[f64]) -> Leaders {
        let pos = Position::new(p.to_vec());
        Leaders {
            alpha: (pos.clone(), 0.0),
            beta: (pos.clone(), 0.0),
            delta: (pos, 0.0),
        }
    }

    #[test]
    fn pack_update_collapses_when_a_is_zero() {
        let mut rng = rng::stream(9, tags::GWO_WOLF, 0);
        let x = Position::new(vec![3.0, -1.0]);
        let leaders = leaders_at(&[0.5, 0.25]);
        let moved = pack_update(&x, &leaders, 0.0, &mut rng).unwrap();
        for (m, l) in moved.coords.iter().zip([0.5, 0.25]) {
            assert!((m - l).abs() < 1e-12);
        }
    }

    #[test]
    fn pack_update_fixed_point_at_leaders() {
        let mut rng = rng::stream(11, tags::GWO_WOLF, 0);
        let x = Position::new(vec![1.5, 2.5]);
        let leaders = leaders_at(&[1.5, 2.5]);
        let moved = pack_update(&x, &leaders, 0.0, &mut rng).unwrap();
        for (m, l) in moved.coords.iter().zip([1.5, 2.5]) {
            assert!((m - l).abs() < 1e-12);
        }
    }

    #[test]
    fn pack_update_matches_hand_traced_equations() {
        // Replay the exact random transcript on a second stream and evaluate
        // the encircling equations independently, leader by leader.
        let seed = 20240131;
        let x = [0.7, -0.4];
        let alpha = [1.0, 0.5];
        let beta = [0.2, -0.1];
        let delta = [-0.6, 0.9];
        let a = 1.25;

        let leaders = Leaders {
            alpha: (Position::new(alpha.to_vec()), 0.1),
            beta: (Position::new(beta.to_vec()), 0.2),
            delta: (Position::new(delta.to_vec()), 0.3),
        };
        let mut rng_impl = rng::stream(seed, tags::GWO_WOLF, 5);
        let moved = pack_update(&Position::new(x.to_vec()), &leaders, a, &mut rng_impl).unwrap();

        let mut rng_trace = rng::stream(seed, tags::GWO_WOLF, 5);
        let mut expected = [0.0f64; 2];
        for leader in [alpha, beta, delta] {
            let r1: Vec<f64> = (0..2).map(|_| uniform01(&mut rng_trace)).collect();
            let r2: Vec<f64> = (0..2).map(|_| uniform01(&mut rng_trace)).collect();
            for dim in 0..2 {
                let a_coef = 2.0 * a * r1[dim] - a;
                let c_coef = 2.0 * r2[dim];
                let d = (c_coef * leader[dim] - x[dim]).abs();
                expected[dim] += leader[dim] - a_coef * d;
            }
        }
        for (m, e) in moved.coords.iter().zip(expected) {
            assert!((m - e / 3.0).abs() < 1e-15, "got {m}, expected {}", e / 3.0);
        }
    }

    #[test]
    fn constant_objective_returns_constant() {
        let space = SearchSpace::continuous_box(3, -1.0, 1.0).unwrap();
        let result = gwo_optimize(|_| 7.0, &space, &GwoConfig::new(6, 10, 1)).unwrap();
        assert_eq!(result.fitness, 7.0);
        assert!(crate::gwo::space::in_bounds(&result.solution, &space));
    }

    #[test]
    fn sphere_converges() {
        let space = SearchSpace::continuous_box(5, -5.0, 5.0).unwrap();
        let result = gwo_optimize(sphere, &space, &GwoConfig::new(15, 100, 3)).unwrap();
        assert!(result.fitness < 1e-2, "fitness {}", result.fitness);
    }

    #[test]
    fn trace_is_monotone_and_counts_evaluations() {
        let space = SearchSpace::continuous_box(4, -5.0, 5.0).unwrap();
        let config = GwoConfig::new(8, 25, 17);
        let result = gwo_optimize(sphere, &space, &config).unwrap();
        assert_eq!(result.trace.evaluations, 8 * 26);
        assert_eq!(result.trace.best_fitness_per_iteration.len(), 25);
        for w in result.trace.best_fitness_per_iteration.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn reruns_are_bit_identical() {
        let space = SearchSpace::new(vec![
            DimensionSpec::continuous(-5.0, 5.0),
            DimensionSpec::integer(0, 9),
            DimensionSpec::categorical(4),
        ])
        .unwrap();
        let objective = |sol: &DecodedSolution| {
            sol[0].as_real().unwrap().powi(2)
                + sol[1].as_int().unwrap() as f64
                + sol[2].as_index().unwrap() as f64
        };
        let config = GwoConfig::new(7, 20, 99);
        let a = gwo_optimize(objective, &space, &config).unwrap();
        let b = gwo_optimize(objective, &space, &config).unwrap();
        assert_eq!(a.position, b.position);
        assert_eq!(
            a.trace.best_fitness_per_iteration,
            b.trace.best_fitness_per_iteration
        );
        assert_eq!(a.fitness.to_bits(), b.fitness.to_bits());
    }

    #[test]
    fn seeded_candidate_bounds_final_fitness() {
        let space = SearchSpace::continuous_box(3, -5.0, 5.0).unwrap();
        let seeded = Position::new(vec![0.1, -0.1, 0.05]);
        let f_star = sphere(&decode(&seeded, &space).unwrap());
        let mut config = GwoConfig::new(6, 5, 2);
        config.seeded_candidates = vec![seeded];
        let result = gwo_optimize(sphere, &space, &config).unwrap();
        assert!(result.fitness <= f_star);
    }

    #[test]
    fn non_finite_objective_becomes_infinity() {
        let space = SearchSpace::continuous_box(2, -1.0, 1.0).unwrap();
        let result = gwo_optimize(|_| f64::NAN, &space, &GwoConfig::new(5, 3, 4)).unwrap();
        assert_eq!(result.fitness, f64::INFINITY);
        assert_eq!(result.trace.evaluations, 5 * 4);
    }

    #[test]
    fn rejects_bad_configs() {
        let space = SearchSpace::continuous_box(2, -1.0, 1.0).unwrap();
        assert!(gwo_optimize(sphere, &space, &GwoConfig::new(3, 10, 0)).is_err());
        assert!(gwo_optimize(sphere, &space, &GwoConfig::new(4, 0, 0)).is_err());
        let mut config = GwoConfig::new(4, 5, 0);
        config.seeded_candidates = vec![Position::new(vec![0.0, 0.0]); 5];
        assert!(gwo_optimize(sphere, &space, &config).is_err());
    }

    #[test]
    fn trace_csv_has_expected_columns() {
        let trace = Trace {
            best_fitness_per_iteration: vec![3.0, 1.5, 1.5],
            wall_time_seconds: 0.01,
            evaluations: 40,
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("iteration,best_fitness"));
        assert_eq!(lines.next(), Some("1,3"));
        assert_eq!(lines.next(), Some("2,1.5"));
    }
}
