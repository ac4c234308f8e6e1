//! Deterministic fixed-timestep scenario engine.
//!
//! A scenario pairs a scripted robot with a hand agent and runs them in
//! lockstep through the safety monitor. Everything is driven by a single
//! seeded ChaCha8 stream, so identical config + seed yields an identical
//! trace on any platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{FieldEvaluation, SafetyParams};
use crate::geometry::{Point3, Vector3};
use crate::monitor::{Monitor, MonitorEvent, PoseSample, Zone};

/// Piecewise-linear TCP motion along waypoints at constant speed with
/// exact arrival. With `cycle` the waypoint list repeats forever.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotScript {
    pub start: Point3,
    pub waypoints: Vec<Point3>,
    /// Constant segment speed (m/s).
    pub speed: f64,
    /// Hold position while the monitor's stop is latched.
    pub obeys_stop: bool,
    pub cycle: bool,
}

impl RobotScript {
    pub fn validate(&self) -> Result<()> {
        if !(self.speed > 0.0) || !self.speed.is_finite() {
            return Err(Error::invalid("robot speed must be finite and > 0"));
        }
        if self.waypoints.is_empty() {
            return Err(Error::invalid("robot script needs at least one waypoint"));
        }
        if !self.start.is_finite() || self.waypoints.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("robot waypoints must be finite"));
        }
        Ok(())
    }
}

/// Per-trial reaction latency: either a fixed value or a draw from a
/// normal truncated to mean +/- 3 sigma (floored at zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Latency {
    Fixed(f64),
    Normal { mean: f64, std: f64 },
}

impl Latency {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Latency::Fixed(v) => {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::invalid("latency must be finite and >= 0"));
                }
            }
            Latency::Normal { mean, std } => {
                if !mean.is_finite() || mean < 0.0 || !std.is_finite() || std < 0.0 {
                    return Err(Error::invalid("latency mean/std must be finite and >= 0"));
                }
            }
        }
        Ok(())
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Latency::Fixed(v) => v,
            Latency::Normal { mean, std } => draw_truncated_normal(rng, mean, std, 3.0),
        }
    }
}

/// Symmetric truncation keeps the mean at `mean`; the zero floor only
/// matters for distributions pushed close to the origin.
pub fn draw_truncated_normal(rng: &mut ChaCha8Rng, mean: f64, std: f64, n_sigma: f64) -> f64 {
    if std == 0.0 {
        return mean.max(0.0);
    }
    let dist = Normal::new(mean, std).expect("validated std");
    loop {
        let v = dist.sample(rng);
        if (v - mean).abs() <= n_sigma * std && v >= 0.0 {
            return v;
        }
    }
}

/// What makes the reactive hand start its retreat countdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Trigger {
    /// React to the haptic warning (the VH condition).
    HapticEvent,
    /// React to seeing the robot within `threshold` meters (the V
    /// condition). The cue is noticed with probability `1 - miss_prob`
    /// per attempt, re-attempted every `recheck` seconds while inside,
    /// and reaction latency is drawn per noticed cue.
    VisualDistance {
        threshold: f64,
        latency_mean: f64,
        latency_std: f64,
        miss_prob: f64,
        recheck: f64,
    },
}

impl Trigger {
    pub fn validate(&self) -> Result<()> {
        if let Trigger::VisualDistance { threshold, latency_mean, latency_std, miss_prob, recheck } = *self {
            if !(threshold > 0.0) {
                return Err(Error::invalid("visual threshold must be > 0"));
            }
            if latency_mean < 0.0 || latency_std < 0.0 {
                return Err(Error::invalid("visual latency mean/std must be >= 0"));
            }
            if !(0.0..=1.0).contains(&miss_prob) {
                return Err(Error::invalid("miss probability must be in [0, 1]"));
            }
            if !(recheck > 0.0) {
                return Err(Error::invalid("recheck interval must be > 0"));
            }
        }
        Ok(())
    }
}

/// Hand agent behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HandModel {
    Static {
        position: Point3,
    },
    Scripted {
        start: Point3,
        waypoints: Vec<Point3>,
        speed: f64,
    },
    Reactive {
        home: Point3,
        latency: Latency,
        /// Retreat speed (m/s); must exceed the intentionality threshold.
        retreat_speed: f64,
        /// Acceleration limit (m/s^2); infinity steps straight to speed.
        retreat_accel: f64,
        trigger: Trigger,
        /// Sub-threshold velocity noise amplitude (m/s).
        jitter_amplitude: f64,
        /// Retreat until this far from the TCP (m).
        retreat_distance: f64,
        /// Walk back to `home` once the TCP is at least this far away (m).
        return_when_clear: f64,
        /// Speed of the walk back (m/s).
        return_speed: f64,
    },
}

impl HandModel {
    pub fn validate(&self, params: &SafetyParams) -> Result<()> {
        match self {
            HandModel::Static { position } => {
                if !position.is_finite() {
                    return Err(Error::invalid("hand position must be finite"));
                }
            }
            HandModel::Scripted { start, waypoints, speed } => {
                if !(speed.is_finite() && *speed > 0.0) {
                    return Err(Error::invalid("hand speed must be finite and > 0"));
                }
                if waypoints.is_empty() {
                    return Err(Error::invalid("scripted hand needs at least one waypoint"));
                }
                if !start.is_finite() || waypoints.iter().any(|p| !p.is_finite()) {
                    return Err(Error::invalid("hand waypoints must be finite"));
                }
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
                if !home.is_finite() {
                    return Err(Error::invalid("hand home must be finite"));
                }
                latency.validate()?;
                trigger.validate()?;
                if !(*retreat_speed > params.v_intent) {
                    return Err(Error::invalid("retreat_speed must exceed v_intent"));
                }
                if !(*retreat_accel > 0.0) {
                    return Err(Error::invalid("retreat_accel must be > 0"));
                }
                if !(*jitter_amplitude < params.v_intent) || *jitter_amplitude < 0.0 {
                    return Err(Error::invalid(
                        "jitter_amplitude must be in [0, v_intent)",
                    ));
                }
                if !(*retreat_distance > 0.0) || !(*return_when_clear > 0.0) {
                    return Err(Error::invalid("retreat/return distances must be > 0"));
                }
                if !(*return_speed > 0.0) || !return_speed.is_finite() {
                    return Err(Error::invalid("return_speed must be finite and > 0"));
                }
            }
        }
        Ok(())
    }
}

/// Declarative simulation setup. The seed controls every random choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Free-form tag used to group traces in reports (e.g. "v", "vh").
    pub label: String,
    pub robot: RobotScript,
    pub hand: HandModel,
    pub params: SafetyParams,
    /// Fixed timestep (s).
    pub dt: f64,
    /// Total simulated time (s).
    pub duration: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid("dt must be finite and > 0"));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::invalid("duration must be finite and > 0"));
        }
        self.params.validate()?;
        self.robot.validate()?;
        self.hand.validate(&self.params)?;
        Ok(())
    }

    /// Hash of the full config including the seed; two scenarios with the
    /// same fingerprint produce byte-identical traces.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("scenario serializes");
        let digest = Sha256::digest(&canonical);
        hex::encode(&digest[..16])
    }
}

/// One recorded simulation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub sample: PoseSample,
    pub zone: Zone,
    pub eval: FieldEvaluation,
    pub events: Vec<MonitorEvent>,
}

/// Fully deterministic time-series result of one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub scenario: Scenario,
    pub fingerprint: String,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn dt(&self) -> f64 {
        self.scenario.dt
    }
}

// ---------------------------------------------------------------------------
// Agents

struct WaypointFollower {
    pos: Point3,
    targets: Vec<Point3>,
    next: usize,
    speed: f64,
    cycle: bool,
}

impl WaypointFollower {
    fn new(start: Point3, targets: Vec<Point3>, speed: f64, cycle: bool) -> Self {
        WaypointFollower { pos: start, targets, next: 0, speed, cycle }
    }

    /// Advance by dt with exact arrival; leftover budget continues into the
    /// next segment. Returns (position, realized velocity).
    fn advance(&mut self, dt: f64) -> (Point3, Vector3) {
        let old = self.pos;
        let mut budget = self.speed * dt;
        // Guards against a degenerate cycle whose waypoints all coincide
        // with the current position, which would never consume budget.
        let mut zero_segments = 0;
        while budget > 0.0 && self.next < self.targets.len() {
            let target = self.targets[self.next];
            let gap = target - self.pos;
            let dist = gap.norm();
            if dist <= budget {
                if dist == 0.0 {
                    zero_segments += 1;
                    if zero_segments > self.targets.len() {
                        break;
                    }
                } else {
                    zero_segments = 0;
                }
                self.pos = target;
                budget -= dist;
                self.next += 1;
                if self.cycle && self.next == self.targets.len() {
                    self.next = 0;
                }
            } else {
                self.pos = self.pos + gap * (budget / dist);
                budget = 0.0;
            }
        }
        ((self.pos), (self.pos - old) * (1.0 / dt))
    }
}

struct RobotAgent {
    follower: WaypointFollower,
    obeys_stop: bool,
}

impl RobotAgent {
    fn new(script: &RobotScript) -> Self {
        RobotAgent {
            follower: WaypointFollower::new(
                script.start,
                script.waypoints.clone(),
                script.speed,
                script.cycle,
            ),
            obeys_stop: script.obeys_stop,
        }
    }

    fn advance(&mut self, dt: f64, stop_latched: bool) -> (Point3, Vector3) {
        if stop_latched && self.obeys_stop {
            (self.follower.pos, Vector3::ZERO)
        } else {
            self.follower.advance(dt)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum HandPhase {
    Idle,
    Pending { react_at: f64 },
    Retreating,
    Holding,
    Returning,
}

enum HandAgent {
    Static {
        pos: Point3,
    },
    Scripted {
        follower: WaypointFollower,
    },
    Reactive {
        model: ReactiveModel,
        pos: Point3,
        motion_v: Vector3,
        phase: HandPhase,
        /// Visual-cue bookkeeping: inside the threshold, next attempt time.
        cue_inside: bool,
        cue_next_attempt: f64,
    },
}

/// Owned copy of the reactive parameters, to keep the agent free of
/// borrows into the scenario.
struct ReactiveModel {
    home: Point3,
    latency: Latency,
    retreat_speed: f64,
    retreat_accel: f64,
    trigger: Trigger,
    jitter_amplitude: f64,
    retreat_distance: f64,
    return_when_clear: f64,
    return_speed: f64,
}

impl HandAgent {
    fn new(model: &HandModel) -> Self {
        match model {
            HandModel::Static { position } => HandAgent::Static { pos: *position },
            HandModel::Scripted { start, waypoints, speed } => HandAgent::Scripted {
                follower: WaypointFollower::new(*start, waypoints.clone(), *speed, false),
            },
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
            } => HandAgent::Reactive {
                model: ReactiveModel {
                    home: *home,
                    latency: *latency,
                    retreat_speed: *retreat_speed,
                    retreat_accel: *retreat_accel,
                    trigger: *trigger,
                    jitter_amplitude: *jitter_amplitude,
                    retreat_distance: *retreat_distance,
                    return_when_clear: *return_when_clear,
                    return_speed: *return_speed,
                },
                pos: *home,
                motion_v: Vector3::ZERO,
                phase: HandPhase::Idle,
                cue_inside: false,
                cue_next_attempt: 0.0,
            },
        }
    }

    /// Advance one step. `haptic_active` is the monitor state after the
    /// previous sample (one-step sensory delay, as with a real device).
    fn step(
        &mut self,
        dt: f64,
        t: f64,
        tcp: Point3,
        haptic_active: bool,
        rng: &mut ChaCha8Rng,
    ) -> (Point3, Vector3) {
        match self {
            HandAgent::Static { pos } => (*pos, Vector3::ZERO),
            HandAgent::Scripted { follower } => follower.advance(dt),
            HandAgent::Reactive { model, pos, motion_v, phase, cue_inside, cue_next_attempt } => {
                let d = (*pos - tcp).norm();

                // Trigger logic: only while not already reacting.
                let receptive = matches!(*phase, HandPhase::Idle | HandPhase::Returning);
                if receptive {
                    match model.trigger {
                        Trigger::HapticEvent => {
                            if haptic_active {
                                let latency = model.latency.draw(rng);
                                *phase = HandPhase::Pending { react_at: t + latency };
                            }
                        }
                        Trigger::VisualDistance {
                            threshold,
                            latency_mean,
                            latency_std,
                            miss_prob,
                            recheck,
                        } => {
                            if d <= threshold {
                                if !*cue_inside {
                                    *cue_inside = true;
                                    *cue_next_attempt = t;
                                }
                                if t >= *cue_next_attempt {
                                    if rng.gen::<f64>() >= miss_prob {
                                        let latency = draw_truncated_normal(
                                            rng,
                                            latency_mean,
                                            latency_std,
                                            3.0,
                                        )
                                        .max(0.05);
                                        *phase =
                                            HandPhase::Pending { react_at: t + latency };
                                    } else {
                                        *cue_next_attempt = t + recheck;
                                    }
                                }
                            } else {
                                *cue_inside = false;
                            }
                        }
                    }
                }

                // Phase transitions and commanded velocity.
                let mut target_v = Vector3::ZERO;
                match *phase {
                    HandPhase::Idle => {}
                    HandPhase::Pending { react_at } => {
                        if t >= react_at {
                            *phase = HandPhase::Retreating;
                        }
                    }
                    HandPhase::Retreating => {
                        if d >= model.retreat_distance {
                            *phase = HandPhase::Holding;
                        } else {
                            let away = (*pos - tcp)
                                .normalized(1e-9)
                                .unwrap_or(Vector3::new(1.0, 0.0, 0.0));
                            target_v = away * model.retreat_speed;
                        }
                    }
                    HandPhase::Holding => {
                        if d >= model.return_when_clear {
                            *phase = HandPhase::Returning;
                        }
                    }
                    HandPhase::Returning => {
                        let to_home = model.home - *pos;
                        if to_home.norm() < 1e-4 {
                            *pos = model.home;
                            *motion_v = Vector3::ZERO;
                            *phase = HandPhase::Idle;
                        } else {
                            let dir = to_home.normalized(1e-9).unwrap();
                            target_v = dir * model.return_speed.min(to_home.norm() / dt);
                        }
                    }
                }

                // Acceleration-limited tracking of the commanded velocity.
                let dv = target_v - *motion_v;
                let max_dv = model.retreat_accel * dt;
                *motion_v = if model.retreat_accel.is_infinite() || dv.norm() <= max_dv {
                    target_v
                } else {
                    *motion_v + dv.normalized(1e-12).unwrap_or(Vector3::ZERO) * max_dv
                };

                // Sub-threshold jitter on top of the commanded motion.
                let jitter = random_in_ball(rng, model.jitter_amplitude);
                let vel = *motion_v + jitter;
                *pos = *pos + vel * dt;
                (*pos, vel)
            }
        }
    }
}

/// Uniform draw from the closed ball of the given radius.
fn random_in_ball(rng: &mut ChaCha8Rng, radius: f64) -> Vector3 {
    if radius == 0.0 {
        return Vector3::ZERO;
    }
    loop {
        let v = Vector3::new(
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
        );
        if v.dot(v) <= 1.0 {
            return v * radius;
        }
    }
}

/// SplitMix64 step; used to derive independent per-trial seeds.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------------------
// Scenario execution

/// Run a scenario to completion. The trace has ceil(duration/dt) steps at
/// timestamps (k+1)*dt; identical config + seed gives an identical trace.
pub fn run_scenario(sc: &Scenario) -> Result<Trace> {
    sc.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let mut robot = RobotAgent::new(&sc.robot);
    let mut hand = HandAgent::new(&sc.hand);
    let mut monitor = Monitor::new(sc.params)?;

    let n_steps = (sc.duration / sc.dt).ceil() as usize;
    let mut steps = Vec::with_capacity(n_steps);
    for k in 0..n_steps {
        let t = (k as f64 + 1.0) * sc.dt;
        let stop = monitor.stop_latched();
        let (tcp, tcp_v) = robot.advance(sc.dt, stop);
        let (hand_pos, hand_v) = hand.step(sc.dt, t, tcp, monitor.haptic_active(), &mut rng);
        let sample = PoseSample { t, tcp, tcp_v, hand: hand_pos, hand_v };
        let out = monitor.step(&sample)?;
        steps.push(TraceStep { sample, zone: out.zone, eval: out.eval, events: out.events });
    }

    Ok(Trace { fingerprint: sc.fingerprint(), scenario: sc.clone(), steps })
}

/// One reaction-time trial: the latency the hand was configured with and
/// the stopwatch measurement, or `None` when the field was never entered
/// or no intentional movement followed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionTrial {
    pub latency: f64,
    pub measured: Option<f64>,
}

/// Reaction-time protocol: repeat the scenario `trials` times with fresh
/// per-trial seeds. The stopwatch starts at the first sample with
/// d <= d_ha and stops at the first later sample whose hand speed exceeds
/// the intentionality threshold.
///
/// When the scenario's latency is distributional, each trial draws one
/// value up front and runs with it fixed, so the configured latency is
/// known per trial.
pub fn measure_reaction_time(sc: &Scenario, trials: usize) -> Result<Vec<ReactionTrial>> {
    sc.validate()?;
    let base_latency = match &sc.hand {
        HandModel::Reactive { latency, trigger: Trigger::HapticEvent, .. } => *latency,
        _ => {
            return Err(Error::invalid(
                "reaction-time measurement needs a reactive hand with a haptic trigger",
            ))
        }
    };

    let mut results = Vec::with_capacity(trials);
    for trial in 0..trials {
        let seed = derive_seed(sc.seed, trial as u64);
        let mut draw_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, u64::MAX));
        let latency = base_latency.draw(&mut draw_rng);

        let mut trial_sc = sc.clone();
        trial_sc.seed = seed;
        if let HandModel::Reactive { latency: l, .. } = &mut trial_sc.hand {
            *l = Latency::Fixed(latency);
        }
        let trace = run_scenario(&trial_sc)?;
        results.push(ReactionTrial { latency, measured: stopwatch(&trace) });
    }
    Ok(results)
}

fn stopwatch(trace: &Trace) -> Option<f64> {
    let v_intent = trace.scenario.params.v_intent;
    let start = trace
        .steps
        .iter()
        .find(|s| s.eval.d <= s.eval.d_ha)
        .map(|s| s.sample.t)?;
    trace
        .steps
        .iter()
        .filter(|s| s.sample.t > start)
        .find(|s| s.sample.hand_v.norm() > v_intent)
        .map(|s| s.sample.t - start)
}

/// Feedback condition of the assembly comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Visual,
    VisualHaptic,
}

impl Condition {
    pub fn label(&self) -> &'static str {
        match self {
            Condition::Visual => "v",
            Condition::VisualHaptic => "vh",
        }
    }
}

/// Collaborative-assembly protocol: one trace per simulated subject, with
/// the hand model matched to the feedback condition and the robot cycling
/// between the parts bin and the workbench delivery point.
pub fn run_assembly_experiment(
    condition: Condition,
    subjects: usize,
    seed: u64,
) -> Result<Vec<Trace>> {
    let mut traces = Vec::with_capacity(subjects);
    for subject in 0..subjects {
        let mut sc = crate::io::config::preset_assembly(condition);
        sc.seed = derive_seed(seed, subject as u64);
        traces.push(run_scenario(&sc)?);
    }
    Ok(traces)
}
