//! Per-sample safety state machine.
//!
//! Classifies each pose sample into a proximity zone, emits edge-triggered
//! haptic and stop events, and latches the stop condition. A monitor
//! instance is single-owner: exactly one caller advances it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{self, FieldEvaluation, ResumePolicy, SafetyParams, COINCIDENCE_TOLERANCE};
use crate::geometry::{tcp_hand_distance, Point3, Vector3};

/// One timestamped snapshot of TCP and hand positions/velocities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseSample {
    /// Monotonic time (s).
    pub t: f64,
    pub tcp: Point3,
    pub tcp_v: Vector3,
    pub hand: Point3,
    pub hand_v: Vector3,
}

impl PoseSample {
    pub fn validate(&self) -> Result<()> {
        if !self.t.is_finite()
            || !self.tcp.is_finite()
            || !self.tcp_v.is_finite()
            || !self.hand.is_finite()
            || !self.hand_v.is_finite()
        {
            return Err(Error::invalid("pose sample must be finite"));
        }
        Ok(())
    }
}

/// Proximity zone. Boundaries are closed toward the safer-for-human
/// classification: d = d_ps maps to Stop, d = d_ha maps to Haptic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    Stop,
    Haptic,
    Safe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    HapticOn,
    HapticOff,
    RobotStop,
    RobotResume,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorEvent {
    pub t: f64,
    pub kind: EventKind,
}

/// Result of advancing the monitor by one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub zone: Zone,
    pub eval: FieldEvaluation,
    pub events: Vec<MonitorEvent>,
}

/// Stateful safety monitor. Feed samples in time order via [`Monitor::step`].
#[derive(Debug, Clone)]
pub struct Monitor {
    params: SafetyParams,
    zone: Zone,
    haptic_active: bool,
    stop_latched: bool,
    last_t: Option<f64>,
    last_eval: Option<FieldEvaluation>,
}

impl Monitor {
    pub fn new(params: SafetyParams) -> Result<Self> {
        params.validate()?;
        Ok(Monitor {
            params,
            zone: Zone::Safe,
            haptic_active: false,
            stop_latched: false,
            last_t: None,
            last_eval: None,
        })
    }

    pub fn params(&self) -> &SafetyParams {
        &self.params
    }

    pub fn zone(&self) -> Zone {
        self.zone
    }

    pub fn haptic_active(&self) -> bool {
        self.haptic_active
    }

    pub fn stop_latched(&self) -> bool {
        self.stop_latched
    }

    pub fn last_evaluation(&self) -> Option<&FieldEvaluation> {
        self.last_eval.as_ref()
    }

    /// Back to the pristine state: zone Safe, no latches, no haptic, and a
    /// fresh timestamp stream.
    pub fn reset(&mut self) {
        self.zone = Zone::Safe;
        self.haptic_active = false;
        self.stop_latched = false;
        self.last_t = None;
        self.last_eval = None;
    }

    /// Advance by one sample: evaluate the field, classify the zone, and
    /// emit any edge-triggered events.
    ///
    /// While the stop is latched the robot is commanded to zero velocity,
    /// so its velocity contribution to the relative-velocity term is zeroed
    /// and the field relaxes to hand-motion-driven size only. Coincident
    /// TCP/hand positions classify as Stop rather than erroring the stream.
    pub fn step(&mut self, sample: &PoseSample) -> Result<StepOutput> {
        sample.validate()?;
        if let Some(prev) = self.last_t {
            if sample.t <= prev {
                return Err(Error::Stream {
                    index: 0,
                    reason: format!(
                        "non-monotonic timestamp: {} after {}",
                        sample.t, prev
                    ),
                });
            }
        }
        self.last_t = Some(sample.t);

        let mut effective = *sample;
        if self.stop_latched {
            effective.tcp_v = Vector3::ZERO;
        }

        let (eval, degenerate) = match field::evaluate_field(&effective, &self.params) {
            Ok(eval) => (eval, false),
            Err(Error::DegenerateGeometry) => (self.degenerate_eval(&effective), true),
            Err(e) => return Err(e),
        };

        let zone = if degenerate || eval.d <= self.params.d_ps {
            Zone::Stop
        } else if eval.d <= eval.d_ha {
            Zone::Haptic
        } else if self.haptic_active && eval.d <= eval.d_ha + self.params.hysteresis {
            // Hold the warning until the hand is clear of the chatter band.
            Zone::Haptic
        } else {
            Zone::Safe
        };

        let mut events = Vec::new();
        let was_inside = self.haptic_active;
        let now_inside = zone != Zone::Safe;
        if now_inside && !was_inside {
            events.push(MonitorEvent { t: sample.t, kind: EventKind::HapticOn });
        }
        if !now_inside && was_inside {
            events.push(MonitorEvent { t: sample.t, kind: EventKind::HapticOff });
        }

        if zone == Zone::Stop && !self.stop_latched {
            self.stop_latched = true;
            events.push(MonitorEvent { t: sample.t, kind: EventKind::RobotStop });
        } else if self.stop_latched {
            if let ResumePolicy::WhenClear { margin } = self.params.resume {
                if eval.d > self.params.d_ps + margin {
                    self.stop_latched = false;
                    events.push(MonitorEvent { t: sample.t, kind: EventKind::RobotResume });
                }
            }
        }

        self.zone = zone;
        self.haptic_active = now_inside;
        self.last_eval = Some(eval);
        Ok(StepOutput { zone, eval, events })
    }

    /// Maximum-conservatism evaluation for coincident TCP/hand: no defined
    /// approach direction, so no velocity margin, and the distance is
    /// whatever tiny separation remains.
    fn degenerate_eval(&self, sample: &PoseSample) -> FieldEvaluation {
        let v_w = field::weighted_relative_velocity(
            sample.tcp_v,
            sample.hand_v,
            self.params.k_r,
            self.params.k_h,
        );
        FieldEvaluation {
            v_w,
            v_a: 0.0,
            r_h: 0.0,
            d_ha: self.params.d_ha_fixed.unwrap_or(self.params.d_ps),
            d: tcp_hand_distance(sample.tcp, sample.hand),
        }
    }
}

/// True when two positions are close enough to count as coincident for the
/// degenerate-geometry rule.
pub fn is_coincident(a: Point3, b: Point3) -> bool {
    (a - b).norm() < COINCIDENCE_TOLERANCE
}
