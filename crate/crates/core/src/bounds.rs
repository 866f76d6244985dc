//! Non-ergodicity bound pipeline.
//!
//! For the scheduled-box model with ranges `gamma_t = g * p^(t+1) * k^t`,
//! the probability that the origin disagrees with an all-plus start is
//! bounded by a sum over layered "explanation" shapes: each disagreement
//! traces back through levels of `k` spoiled draw lines ending in error
//! sites. This module evaluates that sum exactly on small heights
//! ([`s_direct`]), dominates it analytically by iterating a scalar map
//! ([`h_map`], [`iterate_epsilon`], [`tilde_x`]), and packages the result
//! as a machine-checkable certificate ([`certify_nonergodic`]).
//!
//! Two routes exist for every ingredient: enumeration oracles
//! ([`kappa_exact`], [`exact_small_t`]) against closed forms
//! ([`kappa_bound`], [`stirling2`]), so each inequality is testable.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::grid::{Spin, SpinGrid};
use crate::meanfield;
use crate::model::{ModelName, ModelSpec, NeighborSampler, RangeSchedule, ScheduleKind};
use crate::sim::UpdateParams;
use crate::{par, rng, sim, Error, Result};

/// Absolute tolerance when a certified inequality is checked in floats.
const CHECK_TOL: f64 = 1e-12;
/// Largest line count whose set partitions may be enumerated.
const PARTITION_BUDGET: u32 = 12;
/// Largest shape height and branching factor for exact enumeration.
const HEIGHT_BUDGET: u32 = 4;
const BRANCH_BUDGET: u32 = 3;
/// Largest range size accepted by the exact small-horizon oracle.
const SMALL_T_GAMMA_BUDGET: u64 = 10_000;

fn check_odd_b(b: u32) -> Result<u32> {
    if b == 0 || b % 2 == 0 || b > 255 {
        return Err(Error::InvalidParameter(format!(
            "draw count b must be odd and in 1..=255, got {b}"
        )));
    }
    Ok((b + 1) / 2)
}

fn check_unit_half(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || !(0.0..=0.5).contains(&v) {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in [0, 0.5], got {v}"
        )));
    }
    Ok(())
}

/// Per-line capacity `C = C(b, k)^(1/k)`: the growth constant that one
/// spoiled draw line contributes to the shape sum.
pub fn capacity(b: u32) -> Result<f64> {
    let k = check_odd_b(b)?;
    Ok(meanfield::choose_f(b, k).powf(1.0 / k as f64))
}

fn factorial_big(n: u32) -> BigUint {
    (1..=n as u64).map(BigUint::from).product()
}

fn binom_big(n: u32, r: u32) -> BigUint {
    if r > n {
        return BigUint::from(0u32);
    }
    factorial_big(n) / (factorial_big(r) * factorial_big(n - r))
}

/// Walks every set partition of `items` labeled elements, reporting block
/// sizes. Insertion order makes the walk deterministic.
fn walk_partitions(items: u32, sizes: &mut Vec<u32>, visit: &mut impl FnMut(&[u32])) {
    if items == 0 {
        visit(sizes);
        return;
    }
    for i in 0..sizes.len() {
        sizes[i] += 1;
        walk_partitions(items - 1, sizes, visit);
        sizes[i] -= 1;
    }
    sizes.push(1);
    walk_partitions(items - 1, sizes, visit);
    sizes.pop();
}

/// Count of set partitions of `items` elements by block count, computed
/// by explicit enumeration. Index `m` holds the count with `m` blocks.
pub fn partition_histogram(items: u32) -> Result<Vec<u64>> {
    if items > PARTITION_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "partition enumeration capped at {PARTITION_BUDGET} items, asked for {items}"
        )));
    }
    let mut hist = vec![0u64; items as usize + 1];
    walk_partitions(items, &mut Vec::new(), &mut |sizes: &[u32]| {
        hist[sizes.len()] += 1;
    });
    Ok(hist)
}

/// Number of ways to connect `n` sites, each emitting `k` draw lines,
/// to exactly `m` sites one level down: set partitions of the `k n`
/// labeled lines into `m` unlabeled non-empty groups, counted by
/// enumeration. Zero when `m` is 0 or exceeds `k n`.
pub fn kappa_exact(n: u32, m: u32, k: u32) -> Result<u64> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter(format!(
            "kappa needs n >= 1 and k >= 1, got n={n} k={k}"
        )));
    }
    let lines = n
        .checked_mul(k)
        .filter(|&l| l <= PARTITION_BUDGET)
        .ok_or_else(|| {
            Error::BudgetExceeded(format!(
                "kappa enumeration capped at {PARTITION_BUDGET} lines, asked for {n}*{k}"
            ))
        })?;
    let hist = partition_histogram(lines)?;
    Ok(hist.get(m as usize).copied().unwrap_or(0))
}

/// Partition counts by the triangular recurrence
/// `S(N, m) = m S(N-1, m) + S(N-1, m-1)`: the independent cross-check
/// route for [`kappa_exact`].
pub fn stirling2(items: u32, blocks: u32) -> Result<u64> {
    if items > 25 {
        return Err(Error::BudgetExceeded(format!(
            "recurrence table capped at 25 items to stay in 64 bits, asked for {items}"
        )));
    }
    if blocks > items {
        return Ok(0);
    }
    // row[m] holds S(i, m) for the current i.
    let mut row = vec![0u64; items as usize + 1];
    row[0] = 1;
    for i in 1..=items as usize {
        for m in (1..=i).rev() {
            row[m] = (m as u64) * row[m] + row[m - 1];
        }
        row[0] = 0;
    }
    Ok(row[blocks as usize])
}

/// Closed-form domination of [`kappa_exact`]:
/// `(kn)! * C(kn - 1, m - 1) / m!`, evaluated exactly in integers.
pub fn kappa_bound(n: u32, m: u32, k: u32) -> Result<f64> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter(format!(
            "kappa needs n >= 1 and k >= 1, got n={n} k={k}"
        )));
    }
    let lines = n.checked_mul(k).ok_or_else(|| {
        Error::InvalidParameter(format!("line count n*k overflows for n={n} k={k}"))
    })?;
    if m == 0 || m > lines {
        return Ok(0.0);
    }
    let exact = factorial_big(lines) * binom_big(lines - 1, m - 1) / factorial_big(m);
    Ok(exact.to_f64().unwrap_or(f64::INFINITY))
}

/// Layer profile of one explanation: `n[t]` sites at backward level `t`,
/// `e[t]` of them error sites. Level 0 is the observed cell; the final
/// level consists of error sites only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphShape {
    k: u32,
    n: Vec<u32>,
    e: Vec<u32>,
}

impl GraphShape {
    pub fn new(k: u32, n: Vec<u32>, e: Vec<u32>) -> Result<GraphShape> {
        let fail = |msg: String| Err(Error::InvalidParameter(msg));
        if k == 0 {
            return fail("branching factor k must be >= 1".into());
        }
        if n.is_empty() || n.len() != e.len() {
            return fail(format!(
                "layer vectors must be equal-length and non-empty, got {} and {}",
                n.len(),
                e.len()
            ));
        }
        if n[0] != 1 {
            return fail(format!("a shape starts from a single site, got n[0]={}", n[0]));
        }
        let last = n.len() - 1;
        for t in 0..=last {
            if n[t] == 0 {
                return fail(format!("layer {t} is empty"));
            }
            if e[t] > n[t] {
                return fail(format!("e[{t}]={} exceeds n[{t}]={}", e[t], n[t]));
            }
        }
        if e[last] != n[last] {
            return fail(format!(
                "the final layer must be all error sites, got e={} of n={}",
                e[last], n[last]
            ));
        }
        for t in 0..last {
            let lines = k * (n[t] - e[t]);
            if n[t + 1] > lines {
                return fail(format!(
                    "layer {} has {} sites but only {lines} incoming lines",
                    t + 1,
                    n[t + 1]
                ));
            }
        }
        Ok(GraphShape { k, n, e })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Height `t_m`: index of the final, all-error layer.
    pub fn height(&self) -> u32 {
        (self.n.len() - 1) as u32
    }

    pub fn sites(&self) -> &[u32] {
        &self.n
    }

    pub fn errors(&self) -> &[u32] {
        &self.e
    }

    /// Lines beyond the minimum needed to reach the next layer:
    /// `r[t] = k (n[t] - e[t]) - n[t+1]` for each `t` below the height.
    pub fn excess(&self) -> Vec<u32> {
        (0..self.n.len() - 1)
            .map(|t| self.k * (self.n[t] - self.e[t]) - self.n[t + 1])
            .collect()
    }

    pub fn error_total(&self) -> u32 {
        self.e.iter().sum()
    }

    /// True when every layer uses all its lines: no collisions anywhere.
    pub fn is_tree(&self) -> bool {
        self.excess().iter().all(|&r| r == 0)
    }
}

/// Visits every shape of exact height `t_m` in lexicographic order of the
/// interleaved `(e[t], n[t+1])` choices.
pub fn enumerate_shapes(t_m: u32, k: u32, visit: &mut dyn FnMut(&GraphShape)) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("branching factor k must be >= 1".into()));
    }
    if t_m > HEIGHT_BUDGET || k > BRANCH_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "shape enumeration capped at height {HEIGHT_BUDGET} and k <= {BRANCH_BUDGET}, \
             asked for height {t_m} with k={k}"
        )));
    }
    fn build(
        k: u32,
        t_m: usize,
        n: &mut Vec<u32>,
        e: &mut Vec<u32>,
        visit: &mut dyn FnMut(&GraphShape),
    ) {
        let t = e.len();
        let cur = n[t];
        if t == t_m {
            e.push(cur);
            let shape = GraphShape::new(k, n.clone(), e.clone()).expect("built valid");
            visit(&shape);
            e.pop();
            return;
        }
        for errors in 0..cur {
            e.push(errors);
            let lines = k * (cur - errors);
            for next in 1..=lines {
                n.push(next);
                build(k, t_m, n, e, visit);
                n.pop();
            }
            e.pop();
        }
    }
    build(k, t_m as usize, &mut vec![1], &mut Vec::new(), visit);
    Ok(())
}

fn schedule_gamma(gamma: &ScheduleKind, t: u32) -> Result<f64> {
    let value = gamma.gamma_value(t);
    if !value.is_finite() || value < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "range at backward index {t} must be >= 1, got {value}"
        )));
    }
    Ok(value)
}

/// Weight of one shape in the explanation sum: per layer, the choice of
/// error sites, the dominated line-arrangement count, error and capacity
/// factors, and a `1/gamma_t` penalty per excess line; the final layer
/// contributes `eps0` per error site.
pub fn shape_weight(
    shape: &GraphShape,
    epsilon: f64,
    eps0: f64,
    b: u32,
    gamma: &ScheduleKind,
) -> Result<f64> {
    let k = check_odd_b(b)?;
    if k != shape.k() {
        return Err(Error::InvalidParameter(format!(
            "shape built for k={}, but b={b} implies k={k}",
            shape.k()
        )));
    }
    check_unit_half("epsilon", epsilon)?;
    check_unit_half("eps0", eps0)?;
    let c = capacity(b)?;
    let n = shape.sites();
    let e = shape.errors();
    let last = n.len() - 1;
    let mut weight = eps0.powi(n[last] as i32);
    for t in 0..last {
        let free = n[t] - e[t];
        let lines = k * free;
        let excess = lines - n[t + 1];
        weight *= meanfield::choose_f(n[t], e[t])
            * kappa_bound(free, n[t + 1], k)?
            * epsilon.powi(e[t] as i32)
            * c.powi(lines as i32)
            / schedule_gamma(gamma, t as u32)?.powi(excess as i32);
    }
    Ok(weight)
}

/// Exact value of the height-`t_m` explanation sum, by enumeration over
/// every shape. Summation follows the deterministic enumeration order,
/// so the result is reproducible bit for bit.
pub fn s_direct(t_m: u32, epsilon: f64, eps0: f64, b: u32, gamma: &ScheduleKind) -> Result<f64> {
    let k = check_odd_b(b)?;
    check_unit_half("epsilon", epsilon)?;
    check_unit_half("eps0", eps0)?;
    let mut total = 0.0;
    let mut failed = None;
    enumerate_shapes(t_m, k, &mut |shape| {
        if failed.is_some() {
            return;
        }
        match shape_weight(shape, epsilon, eps0, b, gamma) {
            Ok(w) => total += w,
            Err(err) => failed = Some(err),
        }
    })?;
    match failed {
        Some(err) => Err(err),
        None => Ok(total),
    }
}

/// One level of the analytic domination: folding the deepest layer of a
/// height-`t` sum into a seed value turns `x` into
/// `(C x + k^t C / gamma_(t-1))^k + epsilon`. At `t = 0` there is no
/// previous range and the ratio term vanishes.
pub fn h_map(x: f64, t: u32, epsilon: f64, b: u32, gamma: &ScheduleKind) -> Result<f64> {
    let k = check_odd_b(b)?;
    check_unit_half("epsilon", epsilon)?;
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidParameter(format!("seed x must be >= 0, got {x}")));
    }
    let c = capacity(b)?;
    let ratio = if t == 0 {
        0.0
    } else {
        (k as f64).powi(t as i32) / schedule_gamma(gamma, t - 1)?
    };
    Ok((c * x + ratio * c).powi(k as i32) + epsilon)
}

/// Fixed-point budget of the iteration,
/// `(1/C) (1/(C k))^(1/(k-1)) - k/g`. Negative when `g` is too small;
/// callers gate on [`condition_check`].
pub fn tilde_x(b: u32, g: f64) -> Result<f64> {
    let k = check_odd_b(b)?;
    if k < 2 {
        return Err(Error::InvalidParameter(
            "the iteration budget needs b >= 3 (k >= 2)".into(),
        ));
    }
    check_g(g)?;
    let c = capacity(b)?;
    Ok((1.0 / c) * (1.0 / (c * k as f64)).powf(1.0 / (k as f64 - 1.0)) - k as f64 / g)
}

fn check_g(g: f64) -> Result<()> {
    if !g.is_finite() || g < 1.0 {
        return Err(Error::InvalidParameter(format!("schedule base g must be >= 1, got {g}")));
    }
    Ok(())
}

/// The shared right-hand side of both admissibility inequalities:
/// `(1/C) (1/(C k))^(1/(k-1)) - (1/(C k))^(k/(k-1))`.
fn admissibility_threshold(b: u32) -> Result<f64> {
    let k = check_odd_b(b)? as f64;
    if k < 2.0 {
        return Err(Error::InvalidParameter(
            "admissibility needs b >= 3 (k >= 2)".into(),
        ));
    }
    let c = capacity(b)?;
    let base = 1.0 / (c * k);
    Ok((1.0 / c) * base.powf(1.0 / (k - 1.0)) - base.powf(k / (k - 1.0)))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Check {
    pub pass: bool,
    /// Remaining room; negative means the inequality fails by that much.
    pub slack: f64,
}

fn check_at(slack: f64) -> Check {
    Check { pass: slack >= -CHECK_TOL, slack }
}

/// The two admissibility inequalities for the geometric range family
/// `gamma_t = g k^t`: the range-growth load `k/g` must fit under the
/// threshold, and the error rate must fit in what is left.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConditionReport {
    pub range_growth: Check,
    pub error_rate: Check,
}

impl ConditionReport {
    pub fn pass(&self) -> bool {
        self.range_growth.pass && self.error_rate.pass
    }
}

pub fn condition_check(epsilon: f64, b: u32, g: f64) -> Result<ConditionReport> {
    let k = check_odd_b(b)? as f64;
    check_unit_half("epsilon", epsilon)?;
    check_g(g)?;
    let threshold = admissibility_threshold(b)?;
    let range_slack = threshold - k / g;
    Ok(ConditionReport {
        range_growth: check_at(range_slack),
        error_rate: check_at(range_slack - epsilon),
    })
}

/// Iterates the domination map `x -> (C x + k C / g)^k + epsilon` from
/// `epsilon`, the form [`h_map`] takes on the family `gamma_t = g k^t`
/// where `k^t / gamma_(t-1)` is the constant `k/g`. Returns all
/// `t_m + 1` iterates; the last one dominates the height-`t_m` sum.
pub fn iterate_epsilon(epsilon: f64, t_m: u32, b: u32, g: f64) -> Result<Vec<f64>> {
    let report = condition_check(epsilon, b, g)?;
    if !report.pass() {
        return Err(Error::ConditionViolated(format!(
            "iteration needs the admissibility conditions: range-growth slack {:.3e}, \
             error-rate slack {:.3e}",
            report.range_growth.slack, report.error_rate.slack
        )));
    }
    let k = check_odd_b(b)?;
    let c = capacity(b)?;
    let ratio = k as f64 / g;
    let mut seq = Vec::with_capacity(t_m as usize + 1);
    seq.push(epsilon);
    for _ in 0..t_m {
        let x = *seq.last().expect("non-empty");
        seq.push((c * x + ratio * c).powi(k as i32) + epsilon);
    }
    Ok(seq)
}

/// Validated parameter set for the certified bound: ranges
/// `gamma_t = g p^(t+1) k^t` and error rate `epsilon = delta eps_prime`.
#[derive(Clone, Copy, Debug)]
pub struct BoundParams {
    b: u32,
    k: u32,
    capacity: f64,
    g: f64,
    p: f64,
    delta: f64,
    eps_prime: f64,
}

impl BoundParams {
    pub fn new(b: u32, g: f64, p: f64, delta: f64, eps_prime: f64) -> Result<BoundParams> {
        let k = check_odd_b(b)?;
        if k < 2 {
            return Err(Error::InvalidParameter("the bound needs b >= 3".into()));
        }
        check_g(g)?;
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidParameter(format!("ratio p must be > 1, got {p}")));
        }
        if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "scale delta must lie in (0, 1), got {delta}"
            )));
        }
        if !eps_prime.is_finite() || eps_prime < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "base error rate eps_prime must be >= 0, got {eps_prime}"
            )));
        }
        if delta * eps_prime > 0.5 {
            return Err(Error::InvalidParameter(format!(
                "epsilon = delta * eps_prime = {} exceeds 1/2",
                delta * eps_prime
            )));
        }
        Ok(BoundParams { b, k, capacity: capacity(b)?, g, p, delta, eps_prime })
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eps_prime(&self) -> f64 {
        self.eps_prime
    }

    /// The model error rate the bound applies to.
    pub fn epsilon(&self) -> f64 {
        self.delta * self.eps_prime
    }
}

/// The certified disagreement bound `delta * p/(p-1) * tilde_x`: the
/// geometric sum over heights of the per-height budget, each height
/// discounted by `p^-t_m` and the whole sum scaled by `delta`. Refuses
/// when any admissibility inequality fails, naming it.
pub fn theorem_bound(params: &BoundParams) -> Result<f64> {
    let report = condition_check(params.eps_prime, params.b, params.g)?;
    if !report.range_growth.pass {
        return Err(Error::ConditionViolated(format!(
            "range growth k/g exceeds the admissibility threshold by {:.3e}",
            -report.range_growth.slack
        )));
    }
    if !report.error_rate.pass {
        return Err(Error::ConditionViolated(format!(
            "error rate eps_prime exceeds its admissible room by {:.3e}",
            -report.error_rate.slack
        )));
    }
    let power = params.p * params.delta.powi(params.k as i32 - 1);
    if power > 1.0 + CHECK_TOL {
        return Err(Error::ConditionViolated(format!(
            "height discount needs p * delta^(k-1) <= 1, got {power}"
        )));
    }
    Ok(params.delta * params.p / (params.p - 1.0) * tilde_x(params.b, params.g)?)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CertificateChecks {
    pub range_growth: Check,
    pub error_rate: Check,
    pub delta_power: Check,
}

/// Machine-checkable non-ergodicity certificate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Certificate {
    pub b: u32,
    pub k: u32,
    #[serde(rename = "C")]
    pub capacity: f64,
    pub g: f64,
    pub p: f64,
    pub delta: f64,
    pub eps_prime: f64,
    pub epsilon: f64,
    pub tilde_x: f64,
    pub bound: f64,
    pub checks: CertificateChecks,
    pub pass: bool,
}

/// Builds the certificate at the extremal admissible error rate
/// `eps_prime = threshold - k/g`. Inadmissible parameters produce a
/// failing certificate, not an error; only structurally invalid inputs
/// (even `b`, `p <= 1`, `delta` outside `(0,1)`) are rejected.
pub fn certify_nonergodic(g: f64, p: f64, delta: f64, b: u32) -> Result<Certificate> {
    let k = check_odd_b(b)?;
    if k < 2 {
        return Err(Error::InvalidParameter("certification needs b >= 3".into()));
    }
    check_g(g)?;
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidParameter(format!("ratio p must be > 1, got {p}")));
    }
    if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "scale delta must lie in (0, 1), got {delta}"
        )));
    }
    let threshold = admissibility_threshold(b)?;
    let eps_prime = threshold - k as f64 / g;
    let epsilon = delta * eps_prime;
    let power = p * delta.powi(k as i32 - 1);
    let checks = CertificateChecks {
        range_growth: check_at(threshold - k as f64 / g),
        // At the extremal choice the error-rate inequality is tight; what
        // can still fail is the rate being a rate at all.
        error_rate: Check { pass: eps_prime >= 0.0 && epsilon <= 0.5, slack: eps_prime },
        delta_power: check_at(1.0 - power),
    };
    let tx = tilde_x(b, g)?;
    let bound = delta * p / (p - 1.0) * tx;
    let pass = checks.range_growth.pass
        && checks.error_rate.pass
        && checks.delta_power.pass
        && bound.is_finite()
        && bound < 0.5;
    Ok(Certificate {
        b,
        k,
        capacity: capacity(b)?,
        g,
        p,
        delta,
        eps_prime,
        epsilon,
        tilde_x: tx,
        bound,
        checks,
        pass,
    })
}

/// Monte Carlo estimate of the quantity the certificate bounds: the
/// probability that a cell disagrees with an all-plus start after
/// `steps` scheduled-box updates. Every cell is an observation of the
/// origin by translation invariance; the error bar comes from replica
/// spread.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub observations: u64,
    pub replicas: u32,
}

pub fn mc_minus_estimate(
    cert: &Certificate,
    steps: u32,
    side: u32,
    replicas: u32,
    seed: u64,
) -> Result<McEstimate> {
    if replicas < 2 {
        return Err(Error::InvalidParameter(format!(
            "the spread estimate needs >= 2 replicas, got {replicas}"
        )));
    }
    let params = UpdateParams::new(cert.b, cert.epsilon)?;
    let schedule = RangeSchedule::new(
        ScheduleKind::Proof { g: cert.g, p: cert.p, k: cert.k },
        steps,
        side,
    )?;
    let model = ModelSpec::new(
        ModelName::IntermediateScheduled,
        NeighborSampler::ScheduledBox(schedule),
        params,
    )?;
    let initial = SpinGrid::filled(side, Spin::Plus)?;
    let outcomes: Vec<Result<f64>> = par::map_indexed(replicas as usize, |r| {
        sim::run(&initial, &model, steps, rng::replica_seed(seed, r as u64))
            .map(|out| out.final_grid.minus_fraction())
    });
    let mut values = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        values.push(outcome?);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(McEstimate {
        mean,
        std_error: (var / n).sqrt(),
        observations: replicas as u64 * side as u64 * side as u64,
        replicas,
    })
}

/// Exact disagreement probability after one or two steps of a box or
/// whole-grid model with `gamma` candidate sites per draw, starting from
/// all plus. Horizon two sums over set partitions of the `b` draws
/// (which draws hit the same site), with falling-factorial collision
/// probabilities; distinct sites then flip independently.
pub fn exact_small_t(t: u32, gamma: u64, b: u32, epsilon: f64) -> Result<f64> {
    let k = check_odd_b(b)?;
    check_unit_half("epsilon", epsilon)?;
    if b > 9 {
        return Err(Error::BudgetExceeded(format!(
            "partition enumeration over draws capped at b = 9, got {b}"
        )));
    }
    if gamma == 0 {
        return Err(Error::InvalidParameter("range gamma must be >= 1".into()));
    }
    if gamma > SMALL_T_GAMMA_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "exact oracle capped at gamma = {SMALL_T_GAMMA_BUDGET}, got {gamma}"
        )));
    }
    match t {
        0 => Err(Error::InvalidParameter(
            "horizon 0 has no update to analyze".into(),
        )),
        1 => Ok(epsilon),
        2 => {
            // P(majority of the draw multiset is minus), by collision
            // pattern. A partition into m blocks occurs with probability
            // gamma (gamma-1) ... (gamma-m+1) / gamma^b.
            let mut maj_minus = 0.0;
            walk_partitions(b, &mut Vec::new(), &mut |sizes: &[u32]| {
                let m = sizes.len();
                let mut pattern = 1.0;
                for i in 0..m as u64 {
                    pattern *= gamma.saturating_sub(i) as f64;
                }
                if pattern == 0.0 {
                    return;
                }
                pattern /= (gamma as f64).powi(b as i32);
                let mut minus_given_pattern = 0.0;
                for mask in 0u32..(1 << m) {
                    let mut weight = 1.0;
                    let mut minus_draws = 0;
                    for (i, &size) in sizes.iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            weight *= epsilon;
                            minus_draws += size;
                        } else {
                            weight *= 1.0 - epsilon;
                        }
                    }
                    if minus_draws >= k {
                        minus_given_pattern += weight;
                    }
                }
                maj_minus += pattern * minus_given_pattern;
            });
            Ok(epsilon + (1.0 - 2.0 * epsilon) * maj_minus)
        }
        _ => Err(Error::BudgetExceeded(format!(
            "exact enumeration covers horizons 1 and 2, got {t}"
        ))),
    }
}

/// No-collision limit of the horizon-two value: distinct sites always,
/// so the minus count is binomial.
pub fn small_t_no_collision(b: u32, epsilon: f64) -> Result<f64> {
    check_unit_half("epsilon", epsilon)?;
    Ok(epsilon + (1.0 - 2.0 * epsilon) * meanfield::majority_prob(epsilon, b)?)
}

// ---- Oracle suites -------------------------------------------------------
//
// Each suite returns Ok(()) on pass, a Inconsistency error on a violated
// inequality, and BudgetExceeded when asked beyond the enumeration caps.

/// Enumerated partition counts against both the closed-form domination
/// and the recurrence route, plus the boundary identities.
pub fn kappa_suite(max_n: u32, max_recurrence_items: u32) -> Result<()> {
    for k in [2u32, 3] {
        for n in 1..=max_n {
            let lines = n * k;
            for m in 0..=lines + 1 {
                let exact = kappa_exact(n, m, k)?;
                if m == 0 || m > lines {
                    if exact != 0 {
                        return Err(Error::Inconsistency(format!(
                            "kappa({n},{m},{k}) = {exact}, expected 0 outside 1..={lines}"
                        )));
                    }
                    continue;
                }
                let bound = kappa_bound(n, m, k)?;
                if (exact as f64) > bound * (1.0 + 1e-12) {
                    return Err(Error::Inconsistency(format!(
                        "kappa({n},{m},{k}) = {exact} exceeds its domination {bound}"
                    )));
                }
                if m == lines && exact != 1 {
                    return Err(Error::Inconsistency(format!(
                        "kappa({n},{lines},{k}) = {exact}, expected exactly 1"
                    )));
                }
            }
        }
    }
    for items in 0..=max_recurrence_items {
        let hist = partition_histogram(items)?;
        for m in 0..=items {
            let recurrence = stirling2(items, m)?;
            let enumerated = hist[m as usize];
            if enumerated != recurrence {
                return Err(Error::Inconsistency(format!(
                    "partition count ({items} items, {m} blocks): \
                     enumeration {enumerated} vs recurrence {recurrence}"
                )));
            }
        }
    }
    Ok(())
}

/// Exact height sums against the iterated domination and its fixed-point
/// budget, on the family `gamma_t = g k^t` at the extremal error rate.
pub fn recursion_suite(max_height: u32) -> Result<()> {
    let (b, g) = (3u32, 48.0);
    let epsilon = admissibility_threshold(b)? - 2.0 / g;
    let gamma = ScheduleKind::Geometric { g, p: 2.0 };
    let budget = tilde_x(b, g)?;
    for t_m in 0..=max_height {
        let exact = s_direct(t_m, epsilon, epsilon, b, &gamma)?;
        let iterated = *iterate_epsilon(epsilon, t_m, b, g)?
            .last()
            .expect("non-empty");
        if exact > iterated * (1.0 + 1e-12) {
            return Err(Error::Inconsistency(format!(
                "height {t_m}: exact sum {exact} exceeds iterated domination {iterated}"
            )));
        }
        if iterated > budget * (1.0 + 1e-12) {
            return Err(Error::Inconsistency(format!(
                "height {t_m}: iterate {iterated} exceeds fixed-point budget {budget}"
            )));
        }
    }
    Ok(())
}

/// Every collision-free shape must pay at least `t_m (k-1) + 1` error
/// sites: the floor that makes the per-height discount work.
pub fn tree_suite(max_height: u32) -> Result<()> {
    for k in [2u32, 3] {
        for t_m in 0..=max_height {
            let floor = t_m * (k - 1) + 1;
            let mut trees = 0u64;
            let mut violation = None;
            enumerate_shapes(t_m, k, &mut |shape| {
                if shape.is_tree() {
                    trees += 1;
                    if shape.error_total() < floor && violation.is_none() {
                        violation = Some(format!(
                            "tree shape {:?}/{:?} has {} errors, floor is {floor}",
                            shape.sites(),
                            shape.errors(),
                            shape.error_total()
                        ));
                    }
                }
            })?;
            if let Some(v) = violation {
                return Err(Error::Inconsistency(format!("k={k} height={t_m}: {v}")));
            }
            if trees == 0 {
                return Err(Error::Inconsistency(format!(
                    "k={k} height={t_m}: no collision-free shape enumerated"
                )));
            }
        }
    }
    Ok(())
}

/// Internal consistency of the exact small-horizon oracle: collision
/// probabilities normalize, horizon one is the error rate, and growing
/// ranges approach the no-collision limit from above.
pub fn small_t_suite(gamma: u64) -> Result<()> {
    for b in [3u32, 5] {
        let mut total = 0.0;
        walk_partitions(b, &mut Vec::new(), &mut |sizes: &[u32]| {
            let mut pattern = 1.0;
            for i in 0..sizes.len() as u64 {
                pattern *= gamma.saturating_sub(i) as f64;
            }
            total += pattern / (gamma as f64).powi(b as i32);
        });
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Inconsistency(format!(
                "collision pattern probabilities for b={b}, gamma={gamma} sum to {total}"
            )));
        }
    }
    let epsilon = 0.1;
    let one = exact_small_t(1, gamma, 3, epsilon)?;
    if (one - epsilon).abs() > 1e-15 {
        return Err(Error::Inconsistency(format!(
            "horizon-one value {one} differs from the error rate {epsilon}"
        )));
    }
    let limit = small_t_no_collision(3, epsilon)?;
    let mut prev = f64::INFINITY;
    let mut g = gamma;
    loop {
        let value = exact_small_t(2, g, 3, epsilon)?;
        if value > prev + 1e-12 {
            return Err(Error::Inconsistency(format!(
                "horizon-two value rose from {prev} to {value} as the range grew to {g}"
            )));
        }
        if value < limit - 1e-12 {
            return Err(Error::Inconsistency(format!(
                "horizon-two value {value} fell below its no-collision limit {limit}"
            )));
        }
        prev = value;
        if g >= SMALL_T_GAMMA_BUDGET {
            break;
        }
        g = (g * 10).min(SMALL_T_GAMMA_BUDGET);
    }
    if (prev - limit).abs() > 1e-2 {
        return Err(Error::Inconsistency(format!(
            "horizon-two value {prev} at gamma={SMALL_T_GAMMA_BUDGET} is not near \
             its no-collision limit {limit}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric_gk(g: f64, k: u32) -> ScheduleKind {
        ScheduleKind::Geometric { g, p: k as f64 }
    }

    #[test]
    fn capacity_closed_forms() {
        assert!((capacity(3).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!((capacity(5).unwrap() - 10f64.powf(1.0 / 3.0)).abs() < 1e-15);
        assert!((capacity(1).unwrap() - 1.0).abs() < 1e-15);
        assert!(capacity(4).is_err());
        assert!(capacity(0).is_err());
    }

    #[test]
    fn kappa_exact_counts_partitions() {
        // Partitions of 4 lines into 3 blocks: the classic count 6.
        assert_eq!(kappa_exact(2, 3, 2).unwrap(), 6);
        // One way to keep every line separate.
        assert_eq!(kappa_exact(2, 4, 2).unwrap(), 1);
        assert_eq!(kappa_exact(3, 9, 3).unwrap(), 1);
        // One way to merge everything.
        assert_eq!(kappa_exact(2, 1, 2).unwrap(), 1);
        // Nothing outside 1..=kn.
        assert_eq!(kappa_exact(2, 5, 2).unwrap(), 0);
        assert_eq!(kappa_exact(2, 0, 2).unwrap(), 0);
    }

    #[test]
    fn kappa_exact_refuses_beyond_its_budget() {
        assert!(matches!(kappa_exact(7, 3, 2), Err(Error::BudgetExceeded(_))));
        assert!(matches!(kappa_exact(5, 3, 3), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn recurrence_matches_known_values() {
        assert_eq!(stirling2(0, 0).unwrap(), 1);
        assert_eq!(stirling2(4, 2).unwrap(), 7);
        assert_eq!(stirling2(5, 3).unwrap(), 25);
        assert_eq!(stirling2(4, 3).unwrap(), 6);
        let bell12: u64 = (0..=12).map(|m| stirling2(12, m).unwrap()).sum();
        assert_eq!(bell12, 4_213_597);
    }

    #[test]
    fn kappa_bound_closed_forms() {
        assert_eq!(kappa_bound(1, 1, 2).unwrap(), 2.0);
        assert_eq!(kappa_bound(1, 2, 2).unwrap(), 1.0);
        assert_eq!(kappa_bound(2, 3, 2).unwrap(), 12.0);
        assert_eq!(kappa_bound(2, 5, 2).unwrap(), 0.0);
        assert_eq!(kappa_bound(2, 0, 2).unwrap(), 0.0);
    }

    #[test]
    fn kappa_suite_passes_at_full_budget() {
        kappa_suite(3, 12).unwrap();
    }

    #[test]
    fn kappa_suite_refuses_a_raised_budget() {
        assert!(matches!(kappa_suite(7, 12), Err(Error::BudgetExceeded(_))));
        assert!(matches!(kappa_suite(3, 13), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn shapes_validate_their_layer_constraints() {
        assert!(GraphShape::new(2, vec![1], vec![1]).is_ok());
        assert!(GraphShape::new(2, vec![1, 2], vec![0, 2]).is_ok());
        // Start must be a single site.
        assert!(GraphShape::new(2, vec![2, 2], vec![0, 2]).is_err());
        // Final layer must be all errors.
        assert!(GraphShape::new(2, vec![1, 2], vec![0, 1]).is_err());
        // Errors cannot exceed sites.
        assert!(GraphShape::new(2, vec![1, 2], vec![2, 2]).is_err());
        // Next layer cannot exceed available lines.
        assert!(GraphShape::new(2, vec![1, 3], vec![0, 3]).is_err());
        // No empty layers.
        assert!(GraphShape::new(2, vec![1, 0], vec![0, 0]).is_err());
    }

    #[test]
    fn shape_counts_at_small_heights() {
        let mut count = 0u32;
        enumerate_shapes(0, 2, &mut |_| count += 1).unwrap();
        assert_eq!(count, 1);
        count = 0;
        enumerate_shapes(1, 2, &mut |_| count += 1).unwrap();
        assert_eq!(count, 2);
        count = 0;
        enumerate_shapes(2, 2, &mut |_| count += 1).unwrap();
        assert_eq!(count, 8);
    }

    #[test]
    fn shape_enumeration_refuses_beyond_its_budget() {
        assert!(matches!(
            enumerate_shapes(5, 2, &mut |_| {}),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(matches!(
            enumerate_shapes(2, 4, &mut |_| {}),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn excess_counts_unused_lines() {
        let shape = GraphShape::new(2, vec![1, 2, 1], vec![0, 1, 1]).unwrap();
        assert_eq!(shape.excess(), vec![0, 1]);
        assert!(!shape.is_tree());
        assert_eq!(shape.error_total(), 2);
        let tree = GraphShape::new(2, vec![1, 2, 2], vec![0, 1, 2]).unwrap();
        assert_eq!(tree.excess(), vec![0, 0]);
        assert!(tree.is_tree());
    }

    #[test]
    fn shape_weight_frozen_example() {
        // Height 1, one site feeding one site over a range of 48, final
        // error weight 0.02: 1 * 2 * 3 / 48 * 0.02 = 0.0025.
        let shape = GraphShape::new(2, vec![1, 1], vec![0, 1]).unwrap();
        let gamma = ScheduleKind::Constant { gamma: 48.0 };
        let w = shape_weight(&shape, 0.3, 0.02, 3, &gamma).unwrap();
        assert!((w - 0.0025).abs() < 1e-15);
    }

    #[test]
    fn shape_weight_rejects_mismatched_branching() {
        let shape = GraphShape::new(3, vec![1, 1], vec![0, 1]).unwrap();
        let gamma = ScheduleKind::Constant { gamma: 48.0 };
        assert!(shape_weight(&shape, 0.1, 0.1, 3, &gamma).is_err());
    }

    #[test]
    fn direct_sum_closed_forms() {
        let gamma = geometric_gk(48.0, 2);
        // Height 0 is exactly the seed weight.
        let s0 = s_direct(0, 0.3, 0.07, 3, &gamma).unwrap();
        assert!((s0 - 0.07).abs() < 1e-15);
        // Height 1 with eps0 = 1/24: 6 eps0 / 48 + 3 eps0^2 = 1/96.
        let eps0 = 1.0 / 24.0;
        let s1 = s_direct(1, 0.1, eps0, 3, &gamma).unwrap();
        assert!((s1 - 1.0 / 96.0).abs() < 1e-15);
    }

    #[test]
    fn direct_sum_grows_with_the_seed() {
        let gamma = geometric_gk(48.0, 2);
        let lo = s_direct(2, 0.02, 0.01, 3, &gamma).unwrap();
        let hi = s_direct(2, 0.02, 0.02, 3, &gamma).unwrap();
        assert!(lo < hi);
    }

    #[test]
    fn h_map_frozen_example() {
        // b=3, g=48, eps=1/24 at x=0: (2 sqrt(3) / 48)^2 + 1/24 = 0.046875.
        let gamma = geometric_gk(48.0, 2);
        let h = h_map(0.0, 1, 1.0 / 24.0, 3, &gamma).unwrap();
        assert!((h - 0.046875).abs() < 1e-15);
        // On the g k^t family the map does not depend on t.
        let h3 = h_map(0.0, 3, 1.0 / 24.0, 3, &gamma).unwrap();
        assert!((h - h3).abs() < 1e-15);
    }

    #[test]
    fn h_map_degenerate_form() {
        // Zero noise and no ratio term leaves (C x)^k.
        let gamma = ScheduleKind::Constant { gamma: 48.0 };
        let h = h_map(0.5, 0, 0.0, 3, &gamma).unwrap();
        assert!((h - 0.75).abs() < 1e-15);
    }

    #[test]
    fn tilde_x_closed_forms() {
        assert!((tilde_x(3, 48.0).unwrap() - 0.125).abs() < 1e-15);
        // Large g approaches 1/(C^2 k) = 1/6.
        assert!((tilde_x(3, 1e15).unwrap() - 1.0 / 6.0).abs() < 1e-9);
        // g = 12 lands exactly on zero.
        assert!(tilde_x(3, 12.0).unwrap().abs() < 1e-12);
        assert!(tilde_x(1, 48.0).is_err());
    }

    #[test]
    fn condition_boundary_cases() {
        // b = 3 threshold is 1/12: g = 24 puts k/g right on it.
        let at = condition_check(0.0, 3, 24.0).unwrap();
        assert!(at.range_growth.pass);
        assert!(at.range_growth.slack.abs() < 1e-12);
        let over = condition_check(0.0, 3, 23.0).unwrap();
        assert!(!over.range_growth.pass);
        // At g = 48 the admissible error room is exactly 1/24.
        let room = condition_check(1.0 / 24.0, 3, 48.0).unwrap();
        assert!(room.pass());
        assert!(room.error_rate.slack.abs() < 1e-12);
        let crowded = condition_check(1.0 / 24.0 + 1e-6, 3, 48.0).unwrap();
        assert!(!crowded.error_rate.pass);
        let full = condition_check(0.5, 3, 48.0).unwrap();
        assert!(!full.pass());
    }

    #[test]
    fn iteration_is_monotone_and_capped() {
        let eps = 1.0 / 24.0;
        assert_eq!(iterate_epsilon(eps, 0, 3, 48.0).unwrap(), vec![eps]);
        let seq = iterate_epsilon(eps, 1, 3, 48.0).unwrap();
        assert!((seq[1] - 0.0625).abs() < 1e-15);
        let long = iterate_epsilon(eps, 1000, 3, 48.0).unwrap();
        let budget = tilde_x(3, 48.0).unwrap();
        for pair in long.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-15, "iterates decreased");
        }
        for &x in &long {
            assert!(x <= budget + 1e-12, "iterate {x} broke the budget {budget}");
        }
        // At the extremal rate the fixed point is tangent, so the
        // approach is only ~1/n; it still closes in on the budget.
        assert!(budget - long[1000] < 5e-3);
        // Below the extremal rate the fixed point attracts geometrically.
        let strict = iterate_epsilon(0.02, 1000, 3, 48.0).unwrap();
        assert!((strict[1000] - strict[999]).abs() < 1e-12);
        assert!(strict[1000] < budget);
    }

    #[test]
    fn iteration_refuses_inadmissible_rates() {
        assert!(matches!(
            iterate_epsilon(0.2, 3, 3, 48.0),
            Err(Error::ConditionViolated(_))
        ));
    }

    #[test]
    fn theorem_bound_frozen_example() {
        let params = BoundParams::new(3, 48.0, 2.0, 0.1, 1.0 / 24.0).unwrap();
        assert!((theorem_bound(&params).unwrap() - 0.025).abs() < 1e-12);
        assert!((params.epsilon() - 1.0 / 240.0).abs() < 1e-15);
        // Linear in delta.
        let small = BoundParams::new(3, 48.0, 2.0, 0.01, 1.0 / 24.0).unwrap();
        assert!((theorem_bound(&small).unwrap() - 0.0025).abs() < 1e-12);
    }

    #[test]
    fn theorem_bound_names_its_refusals() {
        let crowded = BoundParams::new(3, 48.0, 2.0, 0.1, 0.2).unwrap();
        assert!(matches!(theorem_bound(&crowded), Err(Error::ConditionViolated(_))));
        let heavy = BoundParams::new(3, 48.0, 3.0, 0.5, 1.0 / 24.0).unwrap();
        assert!(matches!(theorem_bound(&heavy), Err(Error::ConditionViolated(_))));
    }

    #[test]
    fn certificate_passes_the_reference_parameters() {
        let cert = certify_nonergodic(48.0, 2.0, 0.1, 3).unwrap();
        assert!(cert.pass);
        assert!((cert.bound - 0.025).abs() < 1e-12);
        assert!((cert.eps_prime - 1.0 / 24.0).abs() < 1e-12);
        assert!((cert.epsilon - 1.0 / 240.0).abs() < 1e-12);
        assert!((cert.tilde_x - 0.125).abs() < 1e-12);
        assert!((cert.capacity - 3f64.sqrt()).abs() < 1e-12);
        assert!(cert.checks.range_growth.pass);
        assert!(cert.checks.error_rate.pass);
        assert!(cert.checks.delta_power.pass);
    }

    #[test]
    fn certificate_fails_when_the_range_grows_too_fast() {
        let cert = certify_nonergodic(12.0, 2.0, 0.1, 3).unwrap();
        assert!(!cert.pass);
        assert!(!cert.checks.range_growth.pass);
        assert!(!cert.checks.error_rate.pass);
        assert!(cert.eps_prime < 0.0);
    }

    #[test]
    fn certificate_fails_when_the_bound_is_vacuous() {
        let cert = certify_nonergodic(48.0, 1.0001, 0.499, 3).unwrap();
        assert!(!cert.pass);
        assert!(cert.checks.delta_power.pass);
        assert!(cert.bound >= 0.5);
    }

    #[test]
    fn certificate_rejects_structural_nonsense() {
        assert!(certify_nonergodic(48.0, 2.0, 0.1, 4).is_err());
        assert!(certify_nonergodic(48.0, 2.0, 0.1, 1).is_err());
        assert!(certify_nonergodic(48.0, 1.0, 0.1, 3).is_err());
        assert!(certify_nonergodic(48.0, 2.0, 0.0, 3).is_err());
        assert!(certify_nonergodic(48.0, 2.0, 1.0, 3).is_err());
        assert!(certify_nonergodic(0.5, 2.0, 0.1, 3).is_err());
    }

    #[test]
    fn small_horizon_oracle_frozen_values() {
        assert_eq!(exact_small_t(1, 9, 3, 0.1).unwrap(), 0.1);
        // gamma = 9 collisions push the value above the binomial limit.
        let v9 = exact_small_t(2, 9, 3, 0.1).unwrap();
        assert!((v9 - 0.14017777777777778).abs() < 1e-9);
        let nc = small_t_no_collision(3, 0.1).unwrap();
        assert!((nc - 0.1224).abs() < 1e-15);
        let v_big = exact_small_t(2, 10_000, 3, 0.1).unwrap();
        assert!(v_big > nc && v_big - nc < 5e-4);
    }

    #[test]
    fn small_horizon_oracle_refuses_beyond_its_budget() {
        assert!(matches!(exact_small_t(3, 9, 3, 0.1), Err(Error::BudgetExceeded(_))));
        assert!(matches!(
            exact_small_t(2, 10_001, 3, 0.1),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(exact_small_t(0, 9, 3, 0.1).is_err());
        assert!(matches!(exact_small_t(2, 9, 11, 0.1), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn suites_pass_at_reference_budgets() {
        recursion_suite(3).unwrap();
        tree_suite(4).unwrap();
        small_t_suite(9).unwrap();
    }

    #[test]
    fn suites_refuse_raised_budgets() {
        assert!(matches!(recursion_suite(5), Err(Error::BudgetExceeded(_))));
        assert!(matches!(tree_suite(5), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn mc_estimate_runs_the_certified_model() {
        let cert = certify_nonergodic(48.0, 2.0, 0.1, 3).unwrap();
        let est = mc_minus_estimate(&cert, 3, 31, 3, 41).unwrap();
        assert!(est.mean >= 0.0 && est.mean <= 1.0);
        assert!(est.std_error >= 0.0);
        assert_eq!(est.observations, 3 * 31 * 31);
        assert_eq!(est.replicas, 3);
        // Replica count below two cannot produce a spread.
        assert!(mc_minus_estimate(&cert, 3, 31, 1, 41).is_err());
    }
}
