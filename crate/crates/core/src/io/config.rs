//! Scenario configuration files.
//!
//! Flat, sectioned key-value format (TOML) with units spelled out in the
//! key names (d_ps_m, t_r_s, ...) so a misread unit shows up as a typo.
//! Unknown keys are rejected. Two preset families are built in: the
//! constant-field reaction-time setup (`exp1`) and the collaborative
//! assembly setup (`exp2-v` / `exp2-vh`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ResumePolicy, SafetyParams};
use crate::geometry::Point3;
use crate::sim::{Condition, HandModel, Latency, RobotScript, Scenario, Trigger};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub label: String,
    pub dt_s: f64,
    pub duration_s: f64,
    pub seed: u64,
    pub safety: SafetySection,
    pub robot: RobotSection,
    pub hand: HandSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetySection {
    pub d_ps_m: f64,
    pub d_hmax_m: f64,
    pub k_r: f64,
    pub k_h: f64,
    pub t_r_s: f64,
    pub d_pdd_m: f64,
    pub v_intent_mps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_ha_fixed_m: Option<f64>,
    pub hysteresis_m: f64,
    /// "never" or "when_clear".
    pub resume: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resume_margin_m: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSection {
    pub start: [f64; 3],
    pub waypoints: Vec<[f64; 3]>,
    pub speed_mps: f64,
    pub obeys_stop: bool,
    pub cycle: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandSection {
    /// "static", "scripted", or "reactive".
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waypoints: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_mps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub home: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_fixed_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_mean_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_std_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retreat_speed_mps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retreat_accel_mps2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter_amplitude_mps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retreat_distance_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub return_when_clear_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub return_speed_mps: Option<f64>,
    /// "haptic" or "visual".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trigger: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visual_threshold_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visual_latency_mean_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visual_latency_std_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visual_miss_prob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visual_recheck_s: Option<f64>,
}

fn pt(a: [f64; 3]) -> Point3 {
    Point3::new(a[0], a[1], a[2])
}

fn arr(p: Point3) -> [f64; 3] {
    [p.x, p.y, p.z]
}

fn require<T>(opt: Option<T>, key: &str, kind: &str) -> Result<T> {
    opt.ok_or_else(|| Error::invalid(format!("hand.{key} is required for kind \"{kind}\"")))
}

impl ScenarioConfig {
    pub fn into_scenario(self) -> Result<Scenario> {
        let resume = match self.safety.resume.as_str() {
            "never" => ResumePolicy::Never,
            "when_clear" => ResumePolicy::WhenClear {
                margin: self.safety.resume_margin_m.unwrap_or(0.05),
            },
            other => {
                return Err(Error::invalid(format!(
                    "safety.resume must be \"never\" or \"when_clear\", got \"{other}\""
                )))
            }
        };
        let params = SafetyParams {
            d_ps: self.safety.d_ps_m,
            d_hmax: self.safety.d_hmax_m,
            k_r: self.safety.k_r,
            k_h: self.safety.k_h,
            t_r: self.safety.t_r_s,
            d_pdd: self.safety.d_pdd_m,
            v_intent: self.safety.v_intent_mps,
            d_ha_fixed: self.safety.d_ha_fixed_m,
            hysteresis: self.safety.hysteresis_m,
            resume,
        };

        let robot = RobotScript {
            start: pt(self.robot.start),
            waypoints: self.robot.waypoints.iter().copied().map(pt).collect(),
            speed: self.robot.speed_mps,
            obeys_stop: self.robot.obeys_stop,
            cycle: self.robot.cycle,
        };

        let h = self.hand;
        let hand = match h.kind.as_str() {
            "static" => HandModel::Static {
                position: pt(require(h.position, "position", "static")?),
            },
            "scripted" => HandModel::Scripted {
                start: pt(require(h.start, "start", "scripted")?),
                waypoints: require(h.waypoints, "waypoints", "scripted")?
                    .iter()
                    .copied()
                    .map(pt)
                    .collect(),
                speed: require(h.speed_mps, "speed_mps", "scripted")?,
            },
            "reactive" => {
                let latency = match (h.latency_fixed_s, h.latency_mean_s, h.latency_std_s) {
                    (Some(v), None, None) => Latency::Fixed(v),
                    (None, Some(mean), Some(std)) => Latency::Normal { mean, std },
                    _ => {
                        return Err(Error::invalid(
                            "reactive hand needs either latency_fixed_s or \
                             latency_mean_s + latency_std_s",
                        ))
                    }
                };
                let trigger = match require(h.trigger.as_deref(), "trigger", "reactive")? {
                    "haptic" => Trigger::HapticEvent,
                    "visual" => Trigger::VisualDistance {
                        threshold: require(h.visual_threshold_m, "visual_threshold_m", "reactive")?,
                        latency_mean: require(
                            h.visual_latency_mean_s,
                            "visual_latency_mean_s",
                            "reactive",
                        )?,
                        latency_std: require(
                            h.visual_latency_std_s,
                            "visual_latency_std_s",
                            "reactive",
                        )?,
                        miss_prob: require(h.visual_miss_prob, "visual_miss_prob", "reactive")?,
                        recheck: require(h.visual_recheck_s, "visual_recheck_s", "reactive")?,
                    },
                    other => {
                        return Err(Error::invalid(format!(
                            "hand.trigger must be \"haptic\" or \"visual\", got \"{other}\""
                        )))
                    }
                };
                HandModel::Reactive {
                    home: pt(require(h.home, "home", "reactive")?),
                    latency,
                    retreat_speed: require(h.retreat_speed_mps, "retreat_speed_mps", "reactive")?,
                    retreat_accel: require(h.retreat_accel_mps2, "retreat_accel_mps2", "reactive")?,
                    trigger,
                    jitter_amplitude: require(
                        h.jitter_amplitude_mps,
                        "jitter_amplitude_mps",
                        "reactive",
                    )?,
                    retreat_distance: require(h.retreat_distance_m, "retreat_distance_m", "reactive")?,
                    return_when_clear: require(
                        h.return_when_clear_m,
                        "return_when_clear_m",
                        "reactive",
                    )?,
                    return_speed: require(h.return_speed_mps, "return_speed_mps", "reactive")?,
                }
            }
            other => {
                return Err(Error::invalid(format!(
                    "hand.kind must be \"static\", \"scripted\", or \"reactive\", got \"{other}\""
                )))
            }
        };

        let scenario = Scenario {
            label: self.label,
            robot,
            hand,
            params,
            dt: self.dt_s,
            duration: self.duration_s,
            seed: self.seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_scenario(sc: &Scenario) -> Self {
        let (resume, resume_margin_m) = match sc.params.resume {
            ResumePolicy::Never => ("never".to_string(), None),
            ResumePolicy::WhenClear { margin } => ("when_clear".to_string(), Some(margin)),
        };
        let safety = SafetySection {
            d_ps_m: sc.params.d_ps,
            d_hmax_m: sc.params.d_hmax,
            k_r: sc.params.k_r,
            k_h: sc.params.k_h,
            t_r_s: sc.params.t_r,
            d_pdd_m: sc.params.d_pdd,
            v_intent_mps: sc.params.v_intent,
            d_ha_fixed_m: sc.params.d_ha_fixed,
            hysteresis_m: sc.params.hysteresis,
            resume,
            resume_margin_m,
        };
        let robot = RobotSection {
            start: arr(sc.robot.start),
            waypoints: sc.robot.waypoints.iter().copied().map(arr).collect(),
            speed_mps: sc.robot.speed,
            obeys_stop: sc.robot.obeys_stop,
            cycle: sc.robot.cycle,
        };
        let mut hand = HandSection {
            kind: String::new(),
            position: None,
            start: None,
            waypoints: None,
            speed_mps: None,
            home: None,
            latency_fixed_s: None,
            latency_mean_s: None,
            latency_std_s: None,
            retreat_speed_mps: None,
            retreat_accel_mps2: None,
            jitter_amplitude_mps: None,
            retreat_distance_m: None,
            return_when_clear_m: None,
            return_speed_mps: None,
            trigger: None,
            visual_threshold_m: None,
            visual_latency_mean_s: None,
            visual_latency_std_s: None,
            visual_miss_prob: None,
            visual_recheck_s: None,
        };
        match &sc.hand {
            HandModel::Static { position } => {
                hand.kind = "static".into();
                hand.position = Some(arr(*position));
            }
            HandModel::Scripted { start, waypoints, speed } => {
                hand.kind = "scripted".into();
                hand.start = Some(arr(*start));
                hand.waypoints = Some(waypoints.iter().copied().map(arr).collect());
                hand.speed_mps = Some(*speed);
            }
            HandModel::Reactive {
                home,
                latency,
                retreat_speed,
                retreat_accel,
                trigger,
                jitter_amplitude,
                retreat_distance,
                return_when_clear,
                return_speed,
            } => {
                hand.kind = "reactive".into();
                hand.home = Some(arr(*home));
                match latency {
                    Latency::Fixed(v) => hand.latency_fixed_s = Some(*v),
                    Latency::Normal { mean, std } => {
                        hand.latency_mean_s = Some(*mean);
                        hand.latency_std_s = Some(*std);
                    }
                }
                hand.retreat_speed_mps = Some(*retreat_speed);
                hand.retreat_accel_mps2 = Some(*retreat_accel);
                hand.jitter_amplitude_mps = Some(*jitter_amplitude);
                hand.retreat_distance_m = Some(*retreat_distance);
                hand.return_when_clear_m = Some(*return_when_clear);
                hand.return_speed_mps = Some(*return_speed);
                match trigger {
                    Trigger::HapticEvent => hand.trigger = Some("haptic".into()),
                    Trigger::VisualDistance {
                        threshold,
                        latency_mean,
                        latency_std,
                        miss_prob,
                        recheck,
                    } => {
                        hand.trigger = Some("visual".into());
                        hand.visual_threshold_m = Some(*threshold);
                        hand.visual_latency_mean_s = Some(*latency_mean);
                        hand.visual_latency_std_s = Some(*latency_std);
                        hand.visual_miss_prob = Some(*miss_prob);
                        hand.visual_recheck_s = Some(*recheck);
                    }
                }
            }
        }
        ScenarioConfig {
            label: sc.label.clone(),
            dt_s: sc.dt,
            duration_s: sc.duration,
            seed: sc.seed,
            safety,
            robot,
            hand,
        }
    }
}

/// Parse a scenario from TOML text.
pub fn load_scenario_str(text: &str) -> Result<Scenario> {
    let config: ScenarioConfig =
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    config.into_scenario()
}

/// Serialize a scenario back to TOML.
pub fn save_scenario(sc: &Scenario) -> String {
    toml::to_string_pretty(&ScenarioConfig::from_scenario(sc))
        .expect("scenario config serializes")
}

/// Load from a file path, or fall back to a built-in preset name
/// (`exp1`, `exp2`, `exp2-v`, `exp2-vh`) when no such file exists.
pub fn load_scenario(path_or_preset: &str) -> Result<Scenario> {
    let path = Path::new(path_or_preset);
    if path.exists() {
        let text = std::fs::read_to_string(path)?;
        return load_scenario_str(&text);
    }
    preset(path_or_preset).ok_or_else(|| {
        Error::invalid(format!(
            "no such file or preset: {path_or_preset} \
             (presets: exp1, exp2, exp2-v, exp2-vh)"
        ))
    })
}

/// Built-in preset by name. `exp2` is the haptic-and-visual variant.
pub fn preset(name: &str) -> Option<Scenario> {
    match name {
        "exp1" => Some(preset_reaction_time()),
        "exp2" | "exp2-vh" => Some(preset_assembly(Condition::VisualHaptic)),
        "exp2-v" => Some(preset_assembly(Condition::Visual)),
        _ => None,
    }
}

/// Reaction-time protocol: constant-dimension field (d_ps 0.20 m, fixed
/// activation distance 0.40 m), robot approaching the recorded hand
/// position slowly, hand retreating on the haptic warning.
pub fn preset_reaction_time() -> Scenario {
    Scenario {
        label: "exp1".into(),
        robot: RobotScript {
            start: Point3::new(1.0, 0.0, 0.0),
            waypoints: vec![Point3::new(0.0, 0.0, 0.0)],
            speed: 0.1,
            obeys_stop: true,
            cycle: false,
        },
        hand: HandModel::Reactive {
            home: Point3::new(0.0, 0.0, 0.0),
            latency: Latency::Normal { mean: 0.3243, std: 0.0715 },
            retreat_speed: 1.0,
            retreat_accel: 50.0,
            trigger: Trigger::HapticEvent,
            jitter_amplitude: 0.05,
            retreat_distance: 0.8,
            return_when_clear: 1.2,
            return_speed: 0.3,
        },
        params: SafetyParams {
            d_ps: 0.20,
            d_ha_fixed: Some(0.40),
            resume: ResumePolicy::Never,
            ..SafetyParams::default()
        },
        dt: 0.001,
        duration: 12.0,
        seed: 1,
    }
}

/// Collaborative assembly: the robot cycles between the parts bin and a
/// delivery point next to the worker's hand; the worker retreats on the
/// condition-matched cue. The reaction-time budget t_r is set above the
/// measured mean so the field absorbs the slow tail of the latency
/// distribution.
pub fn preset_assembly(condition: Condition) -> Scenario {
    let home = Point3::new(0.0, 0.0, 0.0);
    let trigger = match condition {
        Condition::VisualHaptic => Trigger::HapticEvent,
        Condition::Visual => Trigger::VisualDistance {
            threshold: 0.45,
            latency_mean: 0.7,
            latency_std: 0.3,
            miss_prob: 0.3,
            recheck: 0.5,
        },
    };
    let latency = match condition {
        Condition::VisualHaptic => Latency::Normal { mean: 0.3243, std: 0.0715 },
        Condition::Visual => Latency::Fixed(0.0), // visual trigger draws its own
    };
    Scenario {
        label: condition.label().into(),
        robot: RobotScript {
            start: Point3::new(1.18, 0.6, 0.3),
            waypoints: vec![Point3::new(0.18, 0.0, 0.0), Point3::new(1.18, 0.6, 0.3)],
            speed: 0.25,
            obeys_stop: true,
            cycle: true,
        },
        hand: HandModel::Reactive {
            home,
            latency,
            retreat_speed: 0.6,
            retreat_accel: 8.0,
            trigger,
            jitter_amplitude: 0.05,
            retreat_distance: 0.6,
            return_when_clear: 0.8,
            return_speed: 0.3,
        },
        params: SafetyParams {
            d_ps: 0.25,
            d_pdd: 0.4,
            t_r: 0.55,
            resume: ResumePolicy::WhenClear { margin: 0.05 },
            ..SafetyParams::default()
        },
        dt: 0.001,
        duration: 60.0,
        seed: 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp1_preset_matches_protocol_constants() {
        let sc = preset("exp1").unwrap();
        assert_eq!(sc.params.d_ps, 0.20);
        assert_eq!(sc.params.d_ha_fixed, Some(0.40));
        sc.validate().unwrap();
    }

    #[test]
    fn exp2_presets_match_protocol_constants() {
        for name in ["exp2", "exp2-v", "exp2-vh"] {
            let sc = preset(name).unwrap();
            assert_eq!(sc.params.d_ps, 0.25);
            assert_eq!(sc.params.d_pdd, 0.40);
            assert_eq!(sc.params.d_ha_fixed, None);
            sc.validate().unwrap();
        }
        assert_eq!(preset("exp2-v").unwrap().label, "v");
        assert_eq!(preset("exp2-vh").unwrap().label, "vh");
    }

    #[test]
    fn round_trip_preserves_scenario() {
        for name in ["exp1", "exp2-v", "exp2-vh"] {
            let sc = preset(name).unwrap();
            let text = save_scenario(&sc);
            let back = load_scenario_str(&text).unwrap();
            assert_eq!(sc, back, "round trip of {name}");
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut text = save_scenario(&preset_reaction_time());
        text.push_str("\nnot_a_real_key = 1\n");
        let err = load_scenario_str(&text).unwrap_err();
        assert!(matches!(err, Error::Parse(_)), "{err}");
    }

    #[test]
    fn invariant_violation_names_the_problem() {
        let mut sc = preset_reaction_time();
        sc.params.d_ps = 2.0; // > d_hmax
        let text = save_scenario(&sc);
        let err = load_scenario_str(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("d_ps"), "error should name the invariant: {msg}");
    }

    #[test]
    fn missing_conditional_field_is_an_error() {
        let sc = preset_reaction_time();
        let mut config = ScenarioConfig::from_scenario(&sc);
        config.hand.home = None;
        let err = config.into_scenario().unwrap_err();
        assert!(err.to_string().contains("hand.home"), "{err}");
    }

    #[test]
    fn unknown_preset_or_path_is_an_error() {
        assert!(load_scenario("definitely-not-a-preset").is_err());
    }
}
