//! Synchronous lattice dynamics.
//!
//! Each step, every cell draws `b` inputs through its sampler, takes
//! their majority, and outputs the minority instead with probability
//! epsilon. All randomness comes from [`crate::rng`] keys, so a step is a
//! pure function of `(grid, sampler, params, t, seed)`.

use crate::grid::{Spin, SpinGrid};
use crate::model::{ModelSpec, NeighborSampler};
use crate::{par, rng, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateParams {
    b: u32,
    k: u32,
    epsilon: f64,
}

impl UpdateParams {
    /// `b` odd in 1..=255, epsilon in [0, 1/2].
    pub fn new(b: u32, epsilon: f64) -> Result<UpdateParams> {
        if b == 0 || b % 2 == 0 || b > 255 {
            return Err(Error::InvalidParameter(format!(
                "draw count b must be odd and in 1..=255, got {b}"
            )));
        }
        if !epsilon.is_finite() || !(0.0..=0.5).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in [0, 0.5], got {epsilon}"
            )));
        }
        Ok(UpdateParams { b, k: (b + 1) / 2, epsilon })
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    /// Majority threshold `(b + 1) / 2`.
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<UpdateParams> {
        UpdateParams::new(self.b, epsilon)
    }
}

/// Majority spin of an odd-length multiset.
pub fn majority_of(samples: &[Spin]) -> Result<Spin> {
    if samples.len() % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "majority needs an odd number of samples, got {}",
            samples.len()
        )));
    }
    let minus = samples.iter().filter(|&&s| s == Spin::Minus).count();
    Ok(if 2 * minus > samples.len() { Spin::Minus } else { Spin::Plus })
}

/// Sampler resolved against a concrete grid side and step.
enum Draws<'a> {
    Offsets(&'a [(i32, i32)]),
    /// Centered box; `side = R` covers the torus exactly once per key.
    Box { side: u64 },
}

fn resolve<'a>(sampler: &'a NeighborSampler, params: &UpdateParams, t: u32, r: u32) -> Result<Draws<'a>> {
    match sampler {
        NeighborSampler::FixedOffsets(offsets) => {
            if offsets.len() != params.b() as usize {
                return Err(Error::InvalidParameter(format!(
                    "{} offsets for draw count b={}",
                    offsets.len(),
                    params.b()
                )));
            }
            Ok(Draws::Offsets(offsets))
        }
        NeighborSampler::UniformBox { side } => {
            if *side % 2 == 0 {
                return Err(Error::InvalidParameter(format!("box side must be odd, got {side}")));
            }
            if *side > r {
                return Err(Error::InvalidParameter(format!(
                    "box side {side} exceeds grid side {r}"
                )));
            }
            Ok(Draws::Box { side: *side as u64 })
        }
        NeighborSampler::ScheduledBox(schedule) => {
            if schedule.cap() != r {
                return Err(Error::InvalidParameter(format!(
                    "schedule cap {} does not match grid side {r}",
                    schedule.cap()
                )));
            }
            Ok(Draws::Box { side: schedule.side_at(t)? as u64 })
        }
        NeighborSampler::WholeGrid => Ok(Draws::Box { side: r as u64 }),
    }
}

#[inline(always)]
fn wrap(v: i64, r: u32) -> u32 {
    v.rem_euclid(r as i64) as u32
}

#[inline(always)]
fn cell_update(
    prev: &SpinGrid,
    x: u32,
    y: u32,
    t: u32,
    seed: u64,
    params: &UpdateParams,
    draws: &Draws<'_>,
) -> Spin {
    let r = prev.side();
    let b = params.b();
    let mut minus = 0u32;
    match draws {
        Draws::Offsets(offsets) => {
            for &(dx, dy) in offsets.iter() {
                let sx = wrap(x as i64 + dx as i64, r);
                let sy = wrap(y as i64 + dy as i64, r);
                if prev.get(sx, sy) == Spin::Minus {
                    minus += 1;
                }
            }
        }
        Draws::Box { side } => {
            let half = ((side - 1) / 2) as i64;
            for j in 0..b {
                let raw = rng::key_value(seed, t, x, y, j);
                let pick = rng::uniform_below(raw, side * side);
                let sx = wrap(x as i64 + (pick % side) as i64 - half, r);
                let sy = wrap(y as i64 + (pick / side) as i64 - half, r);
                if prev.get(sx, sy) == Spin::Minus {
                    minus += 1;
                }
            }
        }
    }
    let majority = if 2 * minus > b { Spin::Minus } else { Spin::Plus };
    // Error flip: emit the minority exactly when u < epsilon. Keyed per
    // cell-step at draw index b, after the b neighbor draws.
    let u = rng::unit_f64(rng::key_value(seed, t, x, y, b));
    if u < params.epsilon() {
        majority.flipped()
    } else {
        majority
    }
}

/// One synchronous step at time index `t`, producing a fresh grid.
pub fn step(grid: &SpinGrid, sampler: &NeighborSampler, params: &UpdateParams, t: u32, seed: u64) -> Result<SpinGrid> {
    let draws = resolve(sampler, params, t, grid.side())?;
    let r = grid.side();
    let cells = par::map_indexed(grid.cell_count(), |i| {
        let x = (i % r as usize) as u32;
        let y = (i / r as usize) as u32;
        cell_update(grid, x, y, t, seed, params, &draws)
    });
    Ok(SpinGrid::from_cells(r, cells))
}

/// Sequential reference path; bit-identical to [`step`].
pub fn step_seq(grid: &SpinGrid, sampler: &NeighborSampler, params: &UpdateParams, t: u32, seed: u64) -> Result<SpinGrid> {
    let draws = resolve(sampler, params, t, grid.side())?;
    let r = grid.side();
    let cells = par::map_indexed_seq(grid.cell_count(), |i| {
        let x = (i % r as usize) as u32;
        let y = (i / r as usize) as u32;
        cell_update(grid, x, y, t, seed, params, &draws)
    });
    Ok(SpinGrid::from_cells(r, cells))
}

#[derive(Clone)]
pub struct RunResult {
    /// Density after each step; index 0 is the initial grid.
    pub densities: Vec<f64>,
    pub final_grid: SpinGrid,
}

/// Runs `steps` synchronous updates with forward step indices `1..=steps`
/// as the time keys. A scheduled sampler must have been built with this
/// run's horizon: the schedule is read backward from the final step.
pub fn run(initial: &SpinGrid, model: &ModelSpec, steps: u32, seed: u64) -> Result<RunResult> {
    if let NeighborSampler::ScheduledBox(schedule) = &model.sampler {
        if schedule.horizon() != steps {
            return Err(Error::InvalidParameter(format!(
                "run of {steps} steps under a schedule with horizon {}",
                schedule.horizon()
            )));
        }
    }
    let mut grid = initial.clone();
    let mut densities = Vec::with_capacity(steps as usize + 1);
    densities.push(grid.density());
    for u in 1..=steps {
        grid = step(&grid, &model.sampler, &model.params, u, seed)?;
        densities.push(grid.density());
    }
    Ok(RunResult { densities, final_grid: grid })
}

/// Mean density over the last half of a trajectory: steps `T/2+1 ..= T`,
/// the whole-run convention for "late-time density".
pub fn late_mean(densities: &[f64]) -> f64 {
    let t = densities.len() - 1;
    if t == 0 {
        return densities[0];
    }
    let from = t / 2 + 1;
    let tail = &densities[from..];
    tail.iter().sum::<f64>() / tail.len() as f64
}
