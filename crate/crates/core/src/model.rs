//! Update models: neighbor samplers, shrinking-range schedules, and the
//! named catalog with its JSON configuration schema.

use serde::Deserialize;

use crate::grid::MAX_SIDE;
use crate::sim::UpdateParams;
use crate::{Error, Result};

/// Self, north, east: the eroder rule's neighborhood.
pub const TOOM_NEC_OFFSETS: [(i32, i32); 3] = [(0, 0), (0, 1), (1, 0)];

/// Self plus the four axis neighbors.
pub const SYM5_OFFSETS: [(i32, i32); 5] = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)];

/// Range-size formula in backward time: `gamma_value(t)` is the number of
/// candidate sites `t` steps before the observation.
#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleKind {
    Constant { gamma: f64 },
    /// `g * p^t`.
    Geometric { g: f64, p: f64 },
    /// `g * p^(t+1) * k^t`: the geometric family with an extra decay
    /// factor per level, used by the certified bound.
    Proof { g: f64, p: f64, k: u32 },
}

impl ScheduleKind {
    /// Raw range value at backward index `t`, before rounding.
    pub fn gamma_value(&self, t: u32) -> f64 {
        match *self {
            ScheduleKind::Constant { gamma } => gamma,
            ScheduleKind::Geometric { g, p } => g * p.powi(t as i32),
            ScheduleKind::Proof { g, p, k } => g * p.powi(t as i32 + 1) * (k as f64).powi(t as i32),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            ScheduleKind::Constant { gamma } => {
                if !gamma.is_finite() || gamma < 1.0 {
                    return bad(format!("constant range must be >= 1, got {gamma}"));
                }
            }
            ScheduleKind::Geometric { g, p } | ScheduleKind::Proof { g, p, .. } => {
                if !g.is_finite() || g < 1.0 {
                    return bad(format!("schedule base g must be >= 1, got {g}"));
                }
                if !p.is_finite() || p <= 1.0 {
                    return bad(format!("schedule ratio p must be > 1, got {p}"));
                }
                if let ScheduleKind::Proof { k, .. } = *self {
                    if k == 0 {
                        return bad("schedule factor k must be >= 1".into());
                    }
                }
            }
        }
        Ok(())
    }
}

/// A backward-time range sequence pinned to a run: `horizon` is the total
/// number of steps and `cap` the grid side that bounds every box.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeSchedule {
    kind: ScheduleKind,
    horizon: u32,
    cap: u32,
}

impl RangeSchedule {
    pub fn new(kind: ScheduleKind, horizon: u32, cap: u32) -> Result<RangeSchedule> {
        kind.validate()?;
        if horizon == 0 {
            return Err(Error::InvalidParameter("schedule horizon must be >= 1".into()));
        }
        if cap == 0 || cap > MAX_SIDE {
            return Err(Error::InvalidParameter(format!(
                "schedule cap must be in 1..={MAX_SIDE}, got {cap}"
            )));
        }
        Ok(RangeSchedule { kind, horizon, cap })
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// Range size at backward index `t`, rounded to the nearest integer.
    pub fn gamma_at(&self, t: u32) -> Result<u64> {
        if t >= self.horizon {
            return Err(Error::InvalidParameter(format!(
                "backward index {t} out of range for horizon {}",
                self.horizon
            )));
        }
        let raw = self.kind.gamma_value(t).round();
        Ok(if raw >= u64::MAX as f64 { u64::MAX } else { raw as u64 })
    }

    /// Box side used at forward step `u` (1-based): the smallest odd `l`
    /// with `l^2 >= gamma`, capped at the largest odd value <= `cap`.
    /// Forward step `u` reads the backward index `horizon - u`, so the
    /// range is largest on the first step and shrinks toward the last.
    pub fn side_at(&self, u: u32) -> Result<u32> {
        if u == 0 || u > self.horizon {
            return Err(Error::InvalidParameter(format!(
                "forward step {u} out of range for horizon {}",
                self.horizon
            )));
        }
        let gamma = self.gamma_at(self.horizon - u)?;
        let cap_odd = if self.cap % 2 == 0 { self.cap - 1 } else { self.cap };
        Ok(odd_side_for(gamma).min(cap_odd as u64) as u32)
    }
}

/// Smallest odd `l` with `l^2 >= gamma`.
fn odd_side_for(gamma: u64) -> u64 {
    let root = gamma.isqrt();
    let ceil = if root * root == gamma { root } else { root + 1 };
    if ceil % 2 == 0 {
        ceil + 1
    } else {
        ceil.max(1)
    }
}

/// Where a cell's `b` input draws come from.
#[derive(Clone, Debug, PartialEq)]
pub enum NeighborSampler {
    /// Deterministic neighborhood given as torus offsets.
    FixedOffsets(Vec<(i32, i32)>),
    /// Uniform draws, with replacement, from the odd-sided box centered
    /// on the updating cell.
    UniformBox { side: u32 },
    /// A box whose side follows a [`RangeSchedule`].
    ScheduledBox(RangeSchedule),
    /// Uniform draws from the entire torus; identical to a centered box
    /// whose side equals the grid side.
    WholeGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelName {
    ToomNec,
    Sym5,
    IntermediateFixed,
    IntermediateScheduled,
    MeanField,
    Custom,
}

impl ModelName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelName::ToomNec => "toom-nec",
            ModelName::Sym5 => "sym5",
            ModelName::IntermediateFixed => "intermediate-fixed",
            ModelName::IntermediateScheduled => "intermediate-scheduled",
            ModelName::MeanField => "meanfield",
            ModelName::Custom => "custom",
        }
    }
}

impl std::fmt::Display for ModelName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub name: ModelName,
    pub sampler: NeighborSampler,
    pub params: UpdateParams,
}

impl ModelSpec {
    pub fn new(name: ModelName, sampler: NeighborSampler, params: UpdateParams) -> Result<ModelSpec> {
        if let NeighborSampler::FixedOffsets(offsets) = &sampler {
            if offsets.len() != params.b() as usize {
                return Err(Error::InvalidParameter(format!(
                    "{} offsets for draw count b={}",
                    offsets.len(),
                    params.b()
                )));
            }
        }
        if let NeighborSampler::UniformBox { side } = sampler {
            if side % 2 == 0 || side == 0 {
                return Err(Error::InvalidParameter(format!(
                    "box side must be odd, got {side}"
                )));
            }
        }
        Ok(ModelSpec { name, sampler, params })
    }
}

/// Schedule section of the model configuration. For `kind = "constant"`,
/// `g` is the constant range itself and `p` must be absent.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub kind: String,
    pub g: f64,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(rename = "T")]
    pub steps: u32,
}

/// Model configuration as found in run config files.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    #[serde(default)]
    pub b: Option<u32>,
    pub epsilon: f64,
    #[serde(default)]
    pub l: Option<u32>,
    #[serde(default)]
    pub offsets: Option<Vec<(i32, i32)>>,
    #[serde(default)]
    pub schedule: Option<ScheduleConfig>,
    #[serde(rename = "R")]
    pub side: u32,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Builds a validated [`ModelSpec`] from a configuration. Each catalog
/// entry states exactly which fields it takes; anything else is rejected.
pub fn build_model(cfg: &ModelConfig) -> Result<ModelSpec> {
    if cfg.side == 0 || cfg.side > MAX_SIDE {
        return Err(Error::InvalidParameter(format!(
            "R must be in 1..={MAX_SIDE}, got {}",
            cfg.side
        )));
    }
    let reject = |field: &str, name: &str| {
        Err(Error::InvalidParameter(format!(
            "field {field:?} does not apply to model {name:?}"
        )))
    };
    let need_b = || {
        cfg.b
            .ok_or_else(|| Error::InvalidParameter(format!("model {:?} requires b", cfg.name)))
    };
    let fixed_b = |expected: u32| -> Result<u32> {
        match cfg.b {
            None => Ok(expected),
            Some(b) if b == expected => Ok(expected),
            Some(b) => Err(Error::InvalidParameter(format!(
                "model {:?} has b={expected}, got b={b}",
                cfg.name
            ))),
        }
    };

    match cfg.name.as_str() {
        "toom-nec" | "sym5" => {
            if cfg.l.is_some() {
                return reject("l", &cfg.name);
            }
            if cfg.schedule.is_some() {
                return reject("schedule", &cfg.name);
            }
            if cfg.offsets.is_some() {
                return reject("offsets", &cfg.name);
            }
            let (name, offsets): (ModelName, &[(i32, i32)]) = if cfg.name == "toom-nec" {
                (ModelName::ToomNec, &TOOM_NEC_OFFSETS)
            } else {
                (ModelName::Sym5, &SYM5_OFFSETS)
            };
            let b = fixed_b(offsets.len() as u32)?;
            let params = UpdateParams::new(b, cfg.epsilon)?;
            ModelSpec::new(name, NeighborSampler::FixedOffsets(offsets.to_vec()), params)
        }
        "intermediate-fixed" => {
            if cfg.schedule.is_some() {
                return reject("schedule", &cfg.name);
            }
            if cfg.offsets.is_some() {
                return reject("offsets", &cfg.name);
            }
            let params = UpdateParams::new(need_b()?, cfg.epsilon)?;
            let l = cfg
                .l
                .ok_or_else(|| Error::InvalidParameter("intermediate-fixed requires l".into()))?;
            if l > cfg.side {
                return Err(Error::InvalidParameter(format!(
                    "box side l={l} exceeds grid side R={}",
                    cfg.side
                )));
            }
            ModelSpec::new(
                ModelName::IntermediateFixed,
                NeighborSampler::UniformBox { side: l },
                params,
            )
        }
        "intermediate-scheduled" => {
            if cfg.l.is_some() {
                return reject("l", &cfg.name);
            }
            if cfg.offsets.is_some() {
                return reject("offsets", &cfg.name);
            }
            let params = UpdateParams::new(need_b()?, cfg.epsilon)?;
            let sc = cfg.schedule.as_ref().ok_or_else(|| {
                Error::InvalidParameter("intermediate-scheduled requires schedule".into())
            })?;
            let kind = match sc.kind.as_str() {
                "constant" => {
                    if sc.p.is_some() {
                        return Err(Error::InvalidParameter(
                            "constant schedule takes no p".into(),
                        ));
                    }
                    ScheduleKind::Constant { gamma: sc.g }
                }
                "geometric" => ScheduleKind::Geometric {
                    g: sc.g,
                    p: sc.p.ok_or_else(|| {
                        Error::InvalidParameter("geometric schedule requires p".into())
                    })?,
                },
                "proof" => ScheduleKind::Proof {
                    g: sc.g,
                    p: sc.p.ok_or_else(|| {
                        Error::InvalidParameter("proof schedule requires p".into())
                    })?,
                    k: params.k(),
                },
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "schedule kind must be constant|geometric|proof, got {other:?}"
                    )))
                }
            };
            let schedule = RangeSchedule::new(kind, sc.steps, cfg.side)?;
            ModelSpec::new(
                ModelName::IntermediateScheduled,
                NeighborSampler::ScheduledBox(schedule),
                params,
            )
        }
        "meanfield" => {
            if cfg.l.is_some() {
                return reject("l", &cfg.name);
            }
            if cfg.schedule.is_some() {
                return reject("schedule", &cfg.name);
            }
            if cfg.offsets.is_some() {
                return reject("offsets", &cfg.name);
            }
            let params = UpdateParams::new(need_b()?, cfg.epsilon)?;
            ModelSpec::new(ModelName::MeanField, NeighborSampler::WholeGrid, params)
        }
        "custom" => {
            if cfg.l.is_some() {
                return reject("l", &cfg.name);
            }
            if cfg.schedule.is_some() {
                return reject("schedule", &cfg.name);
            }
            let offsets = cfg
                .offsets
                .clone()
                .ok_or_else(|| Error::InvalidParameter("custom requires offsets".into()))?;
            let b = match cfg.b {
                None => offsets.len() as u32,
                Some(b) if b as usize == offsets.len() => b,
                Some(b) => {
                    return Err(Error::InvalidParameter(format!(
                        "b={b} disagrees with {} offsets",
                        offsets.len()
                    )))
                }
            };
            let params = UpdateParams::new(b, cfg.epsilon)?;
            ModelSpec::new(ModelName::Custom, NeighborSampler::FixedOffsets(offsets), params)
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown model {other:?}; catalog: toom-nec, sym5, intermediate-fixed, \
             intermediate-scheduled, meanfield, custom"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(g: f64, p: f64, horizon: u32, cap: u32) -> RangeSchedule {
        RangeSchedule::new(ScheduleKind::Geometric { g, p }, horizon, cap).unwrap()
    }

    #[test]
    fn constant_range_is_flat() {
        let s = RangeSchedule::new(ScheduleKind::Constant { gamma: 25.0 }, 10, 101).unwrap();
        for t in 0..10 {
            assert_eq!(s.gamma_at(t).unwrap(), 25);
        }
    }

    #[test]
    fn geometric_range_doubles() {
        let s = geometric(48.0, 2.0, 8, 1001);
        assert_eq!(s.gamma_at(0).unwrap(), 48);
        assert_eq!(s.gamma_at(3).unwrap(), 384);
    }

    #[test]
    fn proof_range_carries_the_extra_factor() {
        let s = RangeSchedule::new(
            ScheduleKind::Proof { g: 48.0, p: 2.0, k: 2 },
            8,
            100_001,
        )
        .unwrap();
        // g * p^(t+1) * k^t
        assert_eq!(s.gamma_at(0).unwrap(), 96);
        assert_eq!(s.gamma_at(1).unwrap(), 384);
        assert_eq!(s.gamma_at(2).unwrap(), 1536);
    }

    #[test]
    fn out_of_range_indices_are_rejected() {
        let s = geometric(48.0, 2.0, 8, 1001);
        assert!(s.gamma_at(8).is_err());
        assert!(s.side_at(0).is_err());
        assert!(s.side_at(9).is_err());
    }

    #[test]
    fn side_is_the_smallest_odd_root() {
        assert_eq!(odd_side_for(25), 5);
        assert_eq!(odd_side_for(26), 7);
        assert_eq!(odd_side_for(1), 1);
        assert_eq!(odd_side_for(2), 3);
        assert_eq!(odd_side_for(9), 3);
        assert_eq!(odd_side_for(10), 5);
    }

    #[test]
    fn side_caps_at_the_largest_odd_value_within_the_grid() {
        let s = RangeSchedule::new(ScheduleKind::Constant { gamma: 1e6 }, 4, 121).unwrap();
        assert_eq!(s.side_at(1).unwrap(), 121);
        let even_cap = RangeSchedule::new(ScheduleKind::Constant { gamma: 1e6 }, 4, 120).unwrap();
        assert_eq!(even_cap.side_at(1).unwrap(), 119);
    }

    #[test]
    fn forward_steps_shrink_the_side() {
        let s = RangeSchedule::new(
            ScheduleKind::Proof { g: 48.0, p: 2.0, k: 2 },
            6,
            100_001,
        )
        .unwrap();
        let mut prev = u32::MAX;
        for u in 1..=6 {
            let side = s.side_at(u).unwrap();
            assert!(side <= prev, "side grew from {prev} to {side} at step {u}");
            assert_eq!(side % 2, 1);
            prev = side;
        }
        // Last forward step reads backward index 0.
        assert_eq!(s.side_at(6).unwrap(), odd_side_for(96) as u32);
    }

    fn base_config() -> ModelConfig {
        ModelConfig {
            name: "toom-nec".into(),
            b: None,
            epsilon: 0.05,
            l: None,
            offsets: None,
            schedule: None,
            side: 64,
            seed: None,
        }
    }

    #[test]
    fn catalog_builds_the_named_neighborhoods() {
        let toom = build_model(&base_config()).unwrap();
        assert_eq!(toom.name, ModelName::ToomNec);
        assert_eq!(toom.params.b(), 3);
        assert_eq!(
            toom.sampler,
            NeighborSampler::FixedOffsets(TOOM_NEC_OFFSETS.to_vec())
        );

        let mut cfg = base_config();
        cfg.name = "sym5".into();
        let sym = build_model(&cfg).unwrap();
        assert_eq!(sym.params.b(), 5);
        assert_eq!(sym.sampler, NeighborSampler::FixedOffsets(SYM5_OFFSETS.to_vec()));
    }

    #[test]
    fn intermediate_fixed_requires_an_odd_box_within_the_grid() {
        let mut cfg = base_config();
        cfg.name = "intermediate-fixed".into();
        cfg.b = Some(5);
        cfg.l = Some(5);
        assert!(build_model(&cfg).is_ok());
        cfg.l = Some(4);
        assert!(build_model(&cfg).is_err());
        cfg.l = Some(65);
        assert!(build_model(&cfg).is_err());
        cfg.l = None;
        assert!(build_model(&cfg).is_err());
    }

    #[test]
    fn contradictory_fields_are_rejected() {
        let mut cfg = base_config();
        cfg.b = Some(5); // toom-nec has b = 3
        assert!(build_model(&cfg).is_err());

        let mut cfg = base_config();
        cfg.l = Some(3); // fixed-offset models take no box side
        assert!(build_model(&cfg).is_err());

        let mut cfg = base_config();
        cfg.name = "meanfield".into();
        assert!(build_model(&cfg).is_err()); // b required
        cfg.b = Some(5);
        assert!(build_model(&cfg).is_ok());

        let mut cfg = base_config();
        cfg.name = "nonsense".into();
        assert!(build_model(&cfg).is_err());
    }

    #[test]
    fn custom_offsets_must_match_b_and_be_odd_in_count() {
        let mut cfg = base_config();
        cfg.name = "custom".into();
        cfg.offsets = Some(vec![(0, 0), (2, 1), (-1, -2)]);
        let m = build_model(&cfg).unwrap();
        assert_eq!(m.params.b(), 3);

        cfg.b = Some(5);
        assert!(build_model(&cfg).is_err());
        cfg.b = None;
        cfg.offsets = Some(vec![(0, 0), (1, 0)]);
        assert!(build_model(&cfg).is_err()); // even draw count
    }

    #[test]
    fn scheduled_model_wires_k_from_b() {
        let mut cfg = base_config();
        cfg.name = "intermediate-scheduled".into();
        cfg.b = Some(3);
        cfg.schedule = Some(ScheduleConfig {
            kind: "proof".into(),
            g: 48.0,
            p: Some(2.0),
            steps: 5,
        });
        cfg.side = 201;
        let m = build_model(&cfg).unwrap();
        match m.sampler {
            NeighborSampler::ScheduledBox(ref s) => {
                assert_eq!(*s.kind(), ScheduleKind::Proof { g: 48.0, p: 2.0, k: 2 });
                assert_eq!(s.horizon(), 5);
                assert_eq!(s.cap(), 201);
            }
            ref other => panic!("expected scheduled box, got {other:?}"),
        }
    }

    #[test]
    fn schedule_validation_rejects_bad_parameters() {
        assert!(RangeSchedule::new(ScheduleKind::Geometric { g: 0.5, p: 2.0 }, 4, 100).is_err());
        assert!(RangeSchedule::new(ScheduleKind::Geometric { g: 48.0, p: 1.0 }, 4, 100).is_err());
        assert!(RangeSchedule::new(ScheduleKind::Constant { gamma: 0.0 }, 4, 100).is_err());
        assert!(RangeSchedule::new(ScheduleKind::Constant { gamma: 9.0 }, 0, 100).is_err());
        assert!(RangeSchedule::new(ScheduleKind::Constant { gamma: 9.0 }, 4, 0).is_err());
    }

    #[test]
    fn config_json_rejects_unknown_keys() {
        let ok: std::result::Result<ModelConfig, _> = serde_json::from_str(
            r#"{"name": "sym5", "epsilon": 0.1, "R": 32}"#,
        );
        assert!(ok.is_ok());
        let bad: std::result::Result<ModelConfig, _> = serde_json::from_str(
            r#"{"name": "sym5", "epsilon": 0.1, "R": 32, "epsilonn": 0.2}"#,
        );
        assert!(bad.is_err());
    }
}
