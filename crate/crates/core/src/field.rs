//! The haptic potential field scalar pipeline.
//!
//! Weighted relative velocity, signed approaching speed, haptic radius
//! extension, and the resulting haptic activation distance. All functions
//! here are pure; the monitor composes them per sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{tcp_hand_distance, Point3, Vector3};
use crate::monitor::PoseSample;

/// Positions closer than this are treated as coincident: the approach
/// direction is undefined below it.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-6;

/// Robot resume behavior after a latched stop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ResumePolicy {
    /// Stay stopped for the rest of the stream.
    Never,
    /// Resume once the separation exceeds d_ps + margin (meters).
    WhenClear { margin: f64 },
}

/// All SSM/HPF constants, with the monitor's hysteresis and resume policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyParams {
    /// Protective separation distance (m); crossing it mandates a stop.
    pub d_ps: f64,
    /// Maximum haptic activation distance (m); robot reachability bound.
    pub d_hmax: f64,
    /// Weight on the robot TCP velocity.
    pub k_r: f64,
    /// Weight on the hand velocity.
    pub k_h: f64,
    /// Operator reaction time to haptic stimuli (s).
    pub t_r: f64,
    /// Potentially dangerous distance (m); metrics-only threshold.
    pub d_pdd: f64,
    /// Hand speed separating intentional movement from jitter (m/s).
    pub v_intent: f64,
    /// When set, the activation distance is held constant at this value
    /// instead of following the velocity-dependent formula (the constant-
    /// dimension field used in the reaction-time protocol).
    pub d_ha_fixed: Option<f64>,
    /// Extra margin (m) required before the haptic warning clears.
    pub hysteresis: f64,
    pub resume: ResumePolicy,
}

impl Default for SafetyParams {
    fn default() -> Self {
        SafetyParams {
            d_ps: 0.25,
            d_hmax: 1.3,
            k_r: 1.0,
            k_h: 1.0,
            t_r: 0.3243,
            d_pdd: 0.4,
            v_intent: 0.1,
            d_ha_fixed: None,
            hysteresis: 0.02,
            resume: ResumePolicy::Never,
        }
    }
}

impl SafetyParams {
    pub fn validate(&self) -> Result<()> {
        let fin = [
            self.d_ps, self.d_hmax, self.k_r, self.k_h, self.t_r, self.d_pdd,
            self.v_intent, self.hysteresis,
        ];
        if fin.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("safety params must be finite"));
        }
        if !(self.d_ps > 0.0) {
            return Err(Error::invalid("d_ps must be > 0"));
        }
        if self.d_ps > self.d_hmax {
            return Err(Error::invalid("d_ps must be <= d_hmax"));
        }
        if self.k_r < 0.0 || self.k_h < 0.0 {
            return Err(Error::invalid("k_r and k_h must be >= 0"));
        }
        if !(self.t_r > 0.0) {
            return Err(Error::invalid("t_r must be > 0"));
        }
        if self.d_pdd < self.d_ps {
            return Err(Error::invalid("d_pdd must be >= d_ps"));
        }
        if !(self.v_intent > 0.0) {
            return Err(Error::invalid("v_intent must be > 0"));
        }
        if self.hysteresis < 0.0 {
            return Err(Error::invalid("hysteresis must be >= 0"));
        }
        if let Some(fixed) = self.d_ha_fixed {
            if !fixed.is_finite() || fixed < self.d_ps || fixed > self.d_hmax {
                return Err(Error::invalid("d_ha_fixed must lie in [d_ps, d_hmax]"));
            }
        }
        if let ResumePolicy::WhenClear { margin } = self.resume {
            if !margin.is_finite() || margin < 0.0 {
                return Err(Error::invalid("resume margin must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

/// Per-sample field state: the intermediate quantities and the resulting
/// activation distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldEvaluation {
    /// Weighted relative velocity.
    pub v_w: Vector3,
    /// Signed approaching speed; positive means net closing motion.
    pub v_a: f64,
    /// Haptic radius extension (m).
    pub r_h: f64,
    /// Haptic activation distance (m).
    pub d_ha: f64,
    /// Current TCP-hand distance (m).
    pub d: f64,
}

/// k_r * v_r - k_h * v_h, componentwise.
pub fn weighted_relative_velocity(v_r: Vector3, v_h: Vector3, k_r: f64, k_h: f64) -> Vector3 {
    v_r * k_r - v_h * k_h
}

/// Projection of the weighted relative velocity onto the unit vector from
/// TCP toward the hand. Positive values mean the gap is closing.
pub fn approaching_speed(v_w: Vector3, tcp: Point3, hand: Point3) -> Result<f64> {
    let sep = hand - tcp;
    match sep.normalized(COINCIDENCE_TOLERANCE) {
        Some(u) => Ok(v_w.dot(u)),
        None => Err(Error::DegenerateGeometry),
    }
}

/// Extra field margin earned by closing motion: v_a * t_r when approaching,
/// zero otherwise (including exactly zero approach speed).
pub fn haptic_radius(v_a: f64, t_r: f64) -> f64 {
    if v_a <= 0.0 {
        0.0
    } else {
        v_a * t_r
    }
}

/// d_ha = min(d_hmax, d_ps + r_h); always within [d_ps, d_hmax].
pub fn haptic_activation_distance(d_ps: f64, r_h: f64, d_hmax: f64) -> Result<f64> {
    if !(d_ps > 0.0) || d_ps > d_hmax || r_h < 0.0 || !r_h.is_finite() {
        return Err(Error::invalid(
            "require 0 < d_ps <= d_hmax and finite r_h >= 0",
        ));
    }
    Ok(d_hmax.min(d_ps + r_h))
}

/// Full per-sample pipeline: relative velocity, approach speed, haptic
/// radius, activation distance, and the TCP-hand distance.
pub fn evaluate_field(sample: &PoseSample, params: &SafetyParams) -> Result<FieldEvaluation> {
    params.validate()?;
    sample.validate()?;
    let v_w = weighted_relative_velocity(sample.tcp_v, sample.hand_v, params.k_r, params.k_h);
    let v_a = approaching_speed(v_w, sample.tcp, sample.hand)?;
    let r_h = haptic_radius(v_a, params.t_r);
    let d_ha = match params.d_ha_fixed {
        Some(fixed) => fixed,
        None => haptic_activation_distance(params.d_ps, r_h, params.d_hmax)?,
    };
    Ok(FieldEvaluation {
        v_w,
        v_a,
        r_h,
        d_ha,
        d: tcp_hand_distance(sample.tcp, sample.hand),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: f64, y: f64, z: f64) -> Vector3 {
        Vector3::new(x, y, z)
    }
    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    #[test]
    fn weighted_relative_velocity_examples() {
        let out = weighted_relative_velocity(v(0.2, 0.0, 0.0), v(-0.1, 0.0, 0.0), 1.0, 1.0);
        assert!((out.x - 0.3).abs() < 1e-15);
        assert_eq!((out.y, out.z), (0.0, 0.0));
        assert_eq!(
            weighted_relative_velocity(Vector3::ZERO, Vector3::ZERO, 1.0, 1.0),
            Vector3::ZERO
        );
        let out = weighted_relative_velocity(v(0.1, 0.2, 0.0), v(0.05, 0.0, 0.0), 2.0, 0.5);
        assert!((out.x - 0.175).abs() < 1e-15);
        assert!((out.y - 0.4).abs() < 1e-15);
        assert_eq!(out.z, 0.0);
    }

    #[test]
    fn approaching_speed_examples() {
        let tcp = p(0.0, 0.0, 0.0);
        let va = approaching_speed(v(0.3, 0.0, 0.0), tcp, p(1.0, 0.0, 0.0)).unwrap();
        assert!((va - 0.3).abs() < 1e-15);
        let va = approaching_speed(v(0.3, 0.0, 0.0), tcp, p(-1.0, 0.0, 0.0)).unwrap();
        assert!((va + 0.3).abs() < 1e-15);
        let va = approaching_speed(v(0.3, 0.4, 0.0), tcp, p(0.0, 1.0, 0.0)).unwrap();
        assert!((va - 0.4).abs() < 1e-15);
    }

    #[test]
    fn approaching_speed_coincident_is_degenerate() {
        let tcp = p(0.5, 0.5, 0.5);
        let err = approaching_speed(v(0.1, 0.0, 0.0), tcp, tcp).unwrap_err();
        assert!(matches!(err, Error::DegenerateGeometry));
    }

    #[test]
    fn haptic_radius_cases() {
        assert_eq!(haptic_radius(-0.1, 0.3243), 0.0);
        assert_eq!(haptic_radius(0.0, 0.3243), 0.0);
        assert!((haptic_radius(0.5, 0.3243) - 0.16215).abs() < 1e-12);
    }

    #[test]
    fn activation_distance_cases() {
        assert!((haptic_activation_distance(0.25, 0.10, 1.3).unwrap() - 0.35).abs() < 1e-12);
        assert!((haptic_activation_distance(0.25, 2.0, 1.3).unwrap() - 1.3).abs() < 1e-12);
        assert!((haptic_activation_distance(0.25, 0.0, 1.3).unwrap() - 0.25).abs() < 1e-12);
        assert!(haptic_activation_distance(0.0, 0.1, 1.3).is_err());
        assert!(haptic_activation_distance(1.4, 0.1, 1.3).is_err());
        assert!(haptic_activation_distance(0.25, -0.1, 1.3).is_err());
    }

    fn sample(tcp: Point3, tcp_v: Vector3, hand: Point3, hand_v: Vector3) -> PoseSample {
        PoseSample { t: 1.0, tcp, tcp_v, hand, hand_v }
    }

    #[test]
    fn evaluate_field_head_on_approach() {
        let params = SafetyParams { t_r: 0.3243, ..SafetyParams::default() };
        let s = sample(
            p(0.0, 0.0, 0.0),
            v(0.5, 0.0, 0.0),
            p(1.0, 0.0, 0.0),
            Vector3::ZERO,
        );
        let eval = evaluate_field(&s, &params).unwrap();
        assert!((eval.d_ha - 0.41215).abs() < 1e-12);
        assert!((eval.d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evaluate_field_both_static_collapses_to_d_ps() {
        let params = SafetyParams::default();
        let s = sample(p(0.0, 0.0, 0.0), Vector3::ZERO, p(1.0, 0.0, 0.0), Vector3::ZERO);
        let eval = evaluate_field(&s, &params).unwrap();
        assert_eq!(eval.d_ha, params.d_ps);
        assert_eq!(eval.r_h, 0.0);
    }

    #[test]
    fn evaluate_field_receding_robot_collapses_to_d_ps() {
        let params = SafetyParams::default();
        let s = sample(
            p(0.0, 0.0, 0.0),
            v(-0.4, 0.0, 0.0),
            p(1.0, 0.0, 0.0),
            Vector3::ZERO,
        );
        let eval = evaluate_field(&s, &params).unwrap();
        assert!(eval.v_a < 0.0);
        assert_eq!(eval.d_ha, params.d_ps);
    }

    #[test]
    fn fixed_activation_distance_overrides_formula() {
        let params = SafetyParams {
            d_ps: 0.2,
            d_ha_fixed: Some(0.4),
            ..SafetyParams::default()
        };
        let s = sample(
            p(0.0, 0.0, 0.0),
            v(0.5, 0.0, 0.0),
            p(1.0, 0.0, 0.0),
            Vector3::ZERO,
        );
        let eval = evaluate_field(&s, &params).unwrap();
        assert_eq!(eval.d_ha, 0.4);
    }

    #[test]
    fn params_invariants_enforced() {
        let mut p = SafetyParams::default();
        p.d_ps = 2.0; // > d_hmax
        assert!(p.validate().is_err());
        let mut p = SafetyParams::default();
        p.d_pdd = 0.1; // < d_ps
        assert!(p.validate().is_err());
        let mut p = SafetyParams::default();
        p.t_r = 0.0;
        assert!(p.validate().is_err());
        let mut p = SafetyParams::default();
        p.d_ha_fixed = Some(0.1); // < d_ps
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn haptic_radius_nondecreasing_and_zero_below(
            a in -2.0f64..2.0, b in -2.0f64..2.0, t_r in 0.01f64..2.0
        ) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(haptic_radius(lo, t_r) <= haptic_radius(hi, t_r));
            if hi <= 0.0 {
                prop_assert_eq!(haptic_radius(hi, t_r), 0.0);
            }
        }

        #[test]
        fn activation_distance_clamped_and_monotone(
            d_ps in 0.05f64..1.0, extra in 0.0f64..1.0,
            r1 in 0.0f64..3.0, r2 in 0.0f64..3.0
        ) {
            let d_hmax = d_ps + extra;
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            let a = haptic_activation_distance(d_ps, lo, d_hmax).unwrap();
            let b = haptic_activation_distance(d_ps, hi, d_hmax).unwrap();
            prop_assert!(a <= b + 1e-15);
            prop_assert!(d_ps <= a && a <= d_hmax);
            prop_assert!(d_ps <= b && b <= d_hmax);
        }

        #[test]
        fn approaching_speed_antisymmetric_under_velocity_negation(
            vx in -1.0f64..1.0, vy in -1.0f64..1.0, vz in -1.0f64..1.0,
            hx in -1.0f64..1.0, hy in -1.0f64..1.0, hz in -1.0f64..1.0,
        ) {
            let tcp = p(0.0, 0.0, 0.0);
            let hand = p(hx + 2.0, hy, hz); // keep away from the TCP
            let w = v(vx, vy, vz);
            let fwd = approaching_speed(w, tcp, hand).unwrap();
            let rev = approaching_speed(-w, tcp, hand).unwrap();
            prop_assert!((fwd + rev).abs() < 1e-12);
        }

        #[test]
        fn weight_extremes_select_one_velocity(
            rx in -1.0f64..1.0, ry in -1.0f64..1.0, rz in -1.0f64..1.0,
            hx in -1.0f64..1.0, hy in -1.0f64..1.0, hz in -1.0f64..1.0,
        ) {
            let v_r = v(rx, ry, rz);
            let v_h = v(hx, hy, hz);
            prop_assert_eq!(weighted_relative_velocity(v_r, v_h, 1.0, 0.0), v_r);
            prop_assert_eq!(weighted_relative_velocity(v_r, v_h, 0.0, 1.0), -v_h);
        }
    }
}
