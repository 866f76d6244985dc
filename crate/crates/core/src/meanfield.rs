//! Density-map analysis of the infinite-range limit.
//!
//! When draws come from the whole grid, the plus-density evolves by the
//! scalar map `rho' = epsilon + (1 - 2 epsilon) * M(rho)`, where `M` is
//! the probability that a majority of `b` independent samples at density
//! `rho` are plus. This module locates the map's fixed points, classifies
//! their stability, and finds the error rate at which the ordered pair of
//! fixed points disappears.

use crate::{Error, Result};

/// Root-finding tolerance on `|f(rho) - rho|`.
const ROOT_TOL: f64 = 1e-12;
/// Grid spacing of the sign-change scan.
const SCAN_STEP: f64 = 1e-3;
/// A fixed point counts as "above one half" if it clears this margin.
const UPPER_MARGIN: f64 = 1e-6;
/// Required agreement between the two critical-epsilon routes.
const CRITICAL_AGREEMENT: f64 = 1e-6;

/// The scalar density map for one `(b, epsilon)` pair.
#[derive(Clone, Copy, Debug)]
pub struct DensityMap {
    b: u32,
    k: u32,
    epsilon: f64,
}

impl DensityMap {
    pub fn new(b: u32, epsilon: f64) -> Result<DensityMap> {
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
        Ok(DensityMap { b, k: (b + 1) / 2, epsilon })
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `P(majority of b draws is plus)` at plus-density `rho`.
    pub fn majority(&self, rho: f64) -> f64 {
        let mut sum = 0.0;
        for j in self.k..=self.b {
            sum += choose_f(self.b, j) * rho.powi(j as i32) * (1.0 - rho).powi((self.b - j) as i32);
        }
        sum
    }

    /// `d/drho` of [`Self::majority`]: `k * C(b, k) * rho^(k-1) * (1-rho)^(b-k)`.
    pub fn majority_deriv(&self, rho: f64) -> f64 {
        self.k as f64
            * choose_f(self.b, self.k)
            * rho.powi(self.k as i32 - 1)
            * (1.0 - rho).powi((self.b - self.k) as i32)
    }

    pub fn eval(&self, rho: f64) -> f64 {
        self.epsilon + (1.0 - 2.0 * self.epsilon) * self.majority(rho)
    }

    pub fn deriv(&self, rho: f64) -> f64 {
        (1.0 - 2.0 * self.epsilon) * self.majority_deriv(rho)
    }

    fn gap(&self, rho: f64) -> f64 {
        self.eval(rho) - rho
    }

    /// Slope of `M` at the symmetric point, `k * C(b, k) / 2^(b-1)`.
    fn majority_deriv_half(&self) -> f64 {
        self.k as f64 * choose_f(self.b, self.k) / 2f64.powi(self.b as i32 - 1)
    }
}

pub(crate) fn choose_f(n: u32, r: u32) -> f64 {
    let r = r.min(n - r);
    let mut acc = 1.0;
    for i in 0..r {
        acc = acc * (n - r + i + 1) as f64 / (i + 1) as f64;
    }
    acc
}

fn check_rho(rho: f64) -> Result<()> {
    if !rho.is_finite() || !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!(
            "density must lie in [0, 1], got {rho}"
        )));
    }
    Ok(())
}

/// `P(majority of b independent draws is plus)` at plus-density `rho`.
pub fn majority_prob(rho: f64, b: u32) -> Result<f64> {
    check_rho(rho)?;
    Ok(DensityMap::new(b, 0.0)?.majority(rho))
}

/// One application of the density map.
pub fn mf_map(rho: f64, epsilon: f64, b: u32) -> Result<f64> {
    check_rho(rho)?;
    Ok(DensityMap::new(b, epsilon)?.eval(rho))
}

/// Analytic derivative of the density map in `rho`.
pub fn mf_map_deriv(rho: f64, epsilon: f64, b: u32) -> Result<f64> {
    check_rho(rho)?;
    Ok(DensityMap::new(b, epsilon)?.deriv(rho))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stability {
    Stable,
    Unstable,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FixedPoint {
    pub rho: f64,
    pub stability: Stability,
}

#[derive(Clone, Debug)]
pub struct FixedPointReport {
    pub b: u32,
    pub epsilon: f64,
    /// Ascending in `rho`; always contains the symmetric point 1/2.
    pub points: Vec<FixedPoint>,
}

/// Locates every fixed point of the density map by a sign-change scan
/// refined with bisection, and classifies stability by `|f'| < 1`.
pub fn find_fixed_points(epsilon: f64, b: u32) -> Result<FixedPointReport> {
    let map = DensityMap::new(b, epsilon)?;
    let mut roots: Vec<f64> = Vec::new();
    let push = |rho: f64, roots: &mut Vec<f64>| {
        if roots.iter().all(|&r| (r - rho).abs() > 1e-9) {
            roots.push(rho);
        }
    };
    let n = (1.0 / SCAN_STEP) as u32;
    let mut prev_rho = 0.0;
    let mut prev_gap = map.gap(0.0);
    for i in 0..=n {
        let rho = if i == n { 1.0 } else { i as f64 * SCAN_STEP };
        let gap = map.gap(rho);
        if gap.abs() <= ROOT_TOL {
            push(rho, &mut roots);
        } else if i > 0 && prev_gap.abs() > ROOT_TOL && (prev_gap < 0.0) != (gap < 0.0) {
            if let Some(root) = bisect(&map, prev_rho, rho) {
                push(root, &mut roots);
            }
        }
        prev_rho = rho;
        prev_gap = gap;
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let points = roots
        .into_iter()
        .map(|rho| FixedPoint {
            rho,
            stability: if map.deriv(rho).abs() < 1.0 {
                Stability::Stable
            } else {
                Stability::Unstable
            },
        })
        .collect();
    Ok(FixedPointReport { b, epsilon, points })
}

fn bisect(map: &DensityMap, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut glo = map.gap(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gmid = map.gap(mid);
        if gmid.abs() <= ROOT_TOL {
            return Some(mid);
        }
        if (glo < 0.0) != (gmid < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            glo = gmid;
        }
        if hi - lo < f64::EPSILON * 4.0 {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    (map.gap(mid).abs() <= ROOT_TOL).then_some(mid)
}

#[derive(Clone, Copy, Debug)]
pub struct CriticalEpsilon {
    /// Canonical value: the closed-form root of the slope condition.
    pub value: f64,
    /// Epsilon where the slope at 1/2 passes through one.
    pub slope_route: f64,
    /// Epsilon where the upper fixed point stops existing, found by
    /// bisection on the existence predicate.
    pub scan_route: f64,
}

/// Error rate below which an ordered fixed point above 1/2 exists.
/// Computed two independent ways; disagreement beyond 1e-6 is an error.
pub fn critical_epsilon(b: u32) -> Result<CriticalEpsilon> {
    let probe = DensityMap::new(b, 0.0)?;
    // Slope route: (1 - 2 eps) * M'(1/2) = 1 exactly.
    let slope_route = 0.5 * (1.0 - 1.0 / probe.majority_deriv_half());

    // Scan route: bisection on existence of a fixed point above 1/2.
    let exists = |eps: f64| -> bool {
        let map = DensityMap::new(b, eps).expect("validated above");
        let lo = 0.5 + UPPER_MARGIN;
        if map.gap(lo) > 0.0 {
            return true;
        }
        let mut prev = map.gap(lo);
        for i in 1..=500 {
            let rho = lo + (1.0 - lo) * i as f64 / 500.0;
            let cur = map.gap(rho);
            if (prev < 0.0) != (cur < 0.0) {
                return true;
            }
            prev = cur;
        }
        false
    };
    let scan_route = if !exists(0.0) {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 0.5f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if exists(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    if (slope_route - scan_route).abs() > CRITICAL_AGREEMENT {
        return Err(Error::Inconsistency(format!(
            "critical epsilon routes disagree: slope {slope_route} vs scan {scan_route}"
        )));
    }
    Ok(CriticalEpsilon { value: slope_route, slope_route, scan_route })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_prob_matches_the_cubic() {
        // b = 3: M(rho) = 3 rho^2 - 2 rho^3, so M(0.6) = 0.648.
        assert!((majority_prob(0.6, 3).unwrap() - 0.648).abs() < 1e-15);
        assert_eq!(majority_prob(0.0, 5).unwrap(), 0.0);
        assert_eq!(majority_prob(1.0, 5).unwrap(), 1.0);
        assert!((majority_prob(0.5, 7).unwrap() - 0.5).abs() < 1e-15);
        // b = 1 is the identity.
        assert!((majority_prob(0.37, 1).unwrap() - 0.37).abs() < 1e-15);
    }

    #[test]
    fn map_blends_majority_with_noise() {
        // eps + (1 - 2 eps) M(0.6) = 0.1 + 0.8 * 0.648 = 0.6184.
        assert!((mf_map(0.6, 0.1, 3).unwrap() - 0.6184).abs() < 1e-15);
        // Full noise pins the map at 1/2.
        assert!((mf_map(0.9, 0.5, 5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn map_has_odd_symmetry_about_the_center() {
        for b in [3u32, 5, 7] {
            for eps in [0.0, 0.07, 0.25, 0.5] {
                for i in 0..=1000 {
                    let rho = i as f64 / 1000.0;
                    let a = mf_map(rho, eps, b).unwrap();
                    let c = mf_map(1.0 - rho, eps, b).unwrap();
                    assert!(
                        (a + c - 1.0).abs() < 1e-14,
                        "asymmetry at b={b} eps={eps} rho={rho}"
                    );
                }
            }
        }
    }

    #[test]
    fn map_is_monotone_in_rho() {
        for b in [3u32, 5] {
            for eps in [0.0, 0.1, 0.4] {
                let mut prev = mf_map(0.0, eps, b).unwrap();
                for i in 1..=1000 {
                    let cur = mf_map(i as f64 / 1000.0, eps, b).unwrap();
                    assert!(cur >= prev - 1e-15);
                    prev = cur;
                }
            }
        }
    }

    #[test]
    fn analytic_derivative_matches_central_differences() {
        let h = 1e-6;
        for b in [3u32, 5, 7] {
            for eps in [0.0, 0.1, 0.3] {
                for rho in [0.1, 0.35, 0.5, 0.82] {
                    let analytic = mf_map_deriv(rho, eps, b).unwrap();
                    let numeric = (mf_map(rho + h, eps, b).unwrap()
                        - mf_map(rho - h, eps, b).unwrap())
                        / (2.0 * h);
                    assert!(
                        (analytic - numeric).abs() < 1e-6,
                        "derivative mismatch at b={b} eps={eps} rho={rho}"
                    );
                }
            }
        }
    }

    #[test]
    fn noiseless_map_has_the_three_classic_fixed_points() {
        let report = find_fixed_points(0.0, 3).unwrap();
        let rhos: Vec<f64> = report.points.iter().map(|p| p.rho).collect();
        assert_eq!(rhos.len(), 3);
        assert!((rhos[0] - 0.0).abs() < 1e-12);
        assert!((rhos[1] - 0.5).abs() < 1e-12);
        assert!((rhos[2] - 1.0).abs() < 1e-12);
        assert_eq!(report.points[0].stability, Stability::Stable);
        assert_eq!(report.points[1].stability, Stability::Unstable);
        assert_eq!(report.points[2].stability, Stability::Stable);
    }

    #[test]
    fn subcritical_noise_keeps_a_symmetric_ordered_pair() {
        let report = find_fixed_points(0.1, 3).unwrap();
        assert_eq!(report.points.len(), 3);
        let lo = report.points[0];
        let mid = report.points[1];
        let hi = report.points[2];
        assert!((mid.rho - 0.5).abs() < 1e-12);
        assert_eq!(mid.stability, Stability::Unstable);
        assert!((lo.rho + hi.rho - 1.0).abs() < 1e-9, "pair is not symmetric");
        assert!(hi.rho > 0.8 && hi.rho < 0.9);
        assert_eq!(lo.stability, Stability::Stable);
        assert_eq!(hi.stability, Stability::Stable);
        // Each reported point satisfies the residual tolerance.
        for p in &report.points {
            assert!((mf_map(p.rho, 0.1, 3).unwrap() - p.rho).abs() <= 1e-12);
        }
    }

    #[test]
    fn supercritical_noise_leaves_only_the_center() {
        for eps in [0.2, 0.5] {
            let report = find_fixed_points(eps, 3).unwrap();
            assert_eq!(report.points.len(), 1, "eps = {eps}");
            assert!((report.points[0].rho - 0.5).abs() < 1e-12);
            assert_eq!(report.points[0].stability, Stability::Stable);
        }
    }

    #[test]
    fn critical_epsilon_closed_forms() {
        let c3 = critical_epsilon(3).unwrap();
        assert!((c3.value - 1.0 / 6.0).abs() < 1e-9);
        let c5 = critical_epsilon(5).unwrap();
        assert!((c5.value - 7.0 / 30.0).abs() < 1e-9);
        let c1 = critical_epsilon(1).unwrap();
        assert!(c1.value.abs() < 1e-9);
    }

    #[test]
    fn critical_epsilon_routes_agree() {
        for b in [1u32, 3, 5, 7, 9] {
            let c = critical_epsilon(b).unwrap();
            assert!(
                (c.slope_route - c.scan_route).abs() <= 1e-6,
                "routes disagree at b={b}: {} vs {}",
                c.slope_route,
                c.scan_route
            );
        }
    }

    #[test]
    fn fixed_points_exist_exactly_below_critical() {
        let c5 = critical_epsilon(5).unwrap().value;
        let below = find_fixed_points(c5 - 1e-3, 5).unwrap();
        assert_eq!(below.points.len(), 3);
        let above = find_fixed_points(c5 + 1e-3, 5).unwrap();
        assert_eq!(above.points.len(), 1);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(majority_prob(1.2, 3).is_err());
        assert!(majority_prob(0.5, 4).is_err());
        assert!(mf_map(0.5, 0.6, 3).is_err());
        assert!(mf_map(0.5, -0.1, 3).is_err());
        assert!(find_fixed_points(0.1, 0).is_err());
    }
}
