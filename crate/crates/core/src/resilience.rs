//! Coverage resilience for mission-critical users: UE mobility simulation,
//! per-step received-power series, threshold-based signal-drop detection,
//! recovery-trajectory optimization and the three-phase recovery schedule
//! (reaction, stationary hover, return).

#![allow(clippy::needless_range_loop)]

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{dist2, distance_to_building, Aoi, Building, Point2, Scene};
use crate::optim::{Adam, PlateauTracker};
use crate::placement::{collision_penalty, PlacementHyper};
use crate::propagation::{received_power, PropagationConfig, TxConfig};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Waypoint draws attempted before declaring a region fully blocked.
const TRACK_SAMPLING_BUDGET: usize = 10_000;

#[derive(Debug, Error)]
pub enum ResilienceError {
    #[error("mobility region is fully blocked after {0} draws")]
    RegionBlocked(usize),
    #[error("recovery trajectory did not converge within {iterations} iterations ({remaining:.1} m from target)")]
    NonConvergence {
        iterations: usize,
        remaining: f64,
        partial: Vec<Point2>,
    },
    #[error("drop duration {duration} is too short for a recovery schedule")]
    DegenerateDrop { duration: usize },
}

/// Mobility region for a simulated UE.
#[derive(Debug, Clone)]
pub enum UeRegion {
    /// Random-waypoint walk inside the AOI's square spawn zone
    /// (side `2 r`), clipped to the scene extent.
    AoiSquare(Aoi),
    /// Scripted constant-speed traversal of a fixed polyline.
    Waypoints(Vec<Point2>),
}

/// Uniform-step 2D track of one UE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeTrack {
    pub positions: Vec<Point2>,
    pub step_duration_s: f64,
}

impl UeTrack {
    pub fn steps(&self) -> usize {
        self.positions.len()
    }
}

/// Simulates a UE for `steps` samples at `speed` m/s, one sample per
/// `step_duration_s`. Positions stay inside the scene and outside building
/// footprints; deterministic for a fixed seed.
pub fn simulate_ue_track(
    region: &UeRegion,
    steps: usize,
    speed: f64,
    step_duration_s: f64,
    seed: u64,
    scene: &Scene,
) -> Result<UeTrack, ResilienceError> {
    match region {
        UeRegion::Waypoints(waypoints) => {
            let mut positions = Vec::with_capacity(steps);
            let mut leg = 0usize;
            let mut pos = waypoints[0];
            let mut budget = speed * step_duration_s;
            positions.push(pos);
            while positions.len() < steps {
                let mut remaining = budget;
                while remaining > 0.0 && leg + 1 < waypoints.len() {
                    let target = waypoints[leg + 1];
                    let d = dist2(pos, target);
                    if d <= remaining {
                        pos = target;
                        remaining -= d;
                        leg += 1;
                    } else {
                        let f = remaining / d;
                        pos = [pos[0] + (target[0] - pos[0]) * f, pos[1] + (target[1] - pos[1]) * f];
                        remaining = 0.0;
                    }
                }
                positions.push(pos);
                budget = speed * step_duration_s;
            }
            Ok(UeTrack {
                positions,
                step_duration_s,
            })
        }
        UeRegion::AoiSquare(aoi) => {
            let lo = scene.clamp([aoi.center[0] - aoi.radius, aoi.center[1] - aoi.radius]);
            let hi = scene.clamp([aoi.center[0] + aoi.radius, aoi.center[1] + aoi.radius]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draws = 0usize;
            let mut sample_free = |rng: &mut ChaCha8Rng| -> Result<Point2, ResilienceError> {
                loop {
                    if draws >= TRACK_SAMPLING_BUDGET {
                        return Err(ResilienceError::RegionBlocked(draws));
                    }
                    draws += 1;
                    let p = [rng.gen_range(lo[0]..=hi[0]), rng.gen_range(lo[1]..=hi[1])];
                    if !scene.buildings.iter().any(|b| b.footprint_contains(p)) {
                        return Ok(p);
                    }
                }
            };
            let mut pos = sample_free(&mut rng)?;
            let mut target = sample_free(&mut rng)?;
            let mut positions = Vec::with_capacity(steps);
            positions.push(pos);
            while positions.len() < steps {
                let mut remaining = speed * step_duration_s;
                let mut next = pos;
                while remaining > 1e-12 {
                    let d = dist2(next, target);
                    if d <= remaining {
                        next = target;
                        remaining -= d;
                        target = sample_free(&mut rng)?;
                    } else {
                        let f = remaining / d;
                        next = [
                            next[0] + (target[0] - next[0]) * f,
                            next[1] + (target[1] - next[1]) * f,
                        ];
                        remaining = 0.0;
                    }
                }
                // A step that would end inside a footprint re-targets and
                // holds position for this sample.
                if scene.buildings.iter().any(|b| b.footprint_contains(next)) {
                    target = sample_free(&mut rng)?;
                    next = pos;
                }
                positions.push(next);
                pos = next;
            }
            Ok(UeTrack {
                positions,
                step_duration_s,
            })
        }
    }
}

/// Received power in Watts at every track step from one transmitter.
pub fn received_power_series(
    track: &UeTrack,
    tx: &TxConfig,
    scene: &Scene,
    cfg: &PropagationConfig,
) -> Vec<f64> {
    track
        .positions
        .iter()
        .map(|p| received_power(scene, tx, [p[0], p[1], cfg.rx_height_m], cfg))
        .collect()
}

/// Detector thresholds: power floor, consecutive-sample confirmation count,
/// and spurious-peak tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Drop threshold in Watts.
    pub t_min_watts: f64,
    /// Consecutive below-threshold samples required to confirm a drop.
    pub c_min: usize,
    /// Consecutive above-threshold samples tolerated inside a drop.
    pub s_p: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            t_min_watts: 1e-14,
            c_min: 3,
            s_p: 5,
        }
    }
}

/// Confirmed coverage-loss interval: first and last below-threshold steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropEvent {
    pub t_start: usize,
    pub t_end: usize,
}

impl DropEvent {
    pub fn duration(&self) -> usize {
        self.t_end - self.t_start
    }

    /// Middle step of the drop interval.
    pub fn t_mid(&self) -> usize {
        (self.t_start + self.t_end) / 2
    }
}

/// Scans a power series for confirmed drops: a drop opens after `c_min`
/// consecutive samples below `t_min`, tolerates up to `s_p` consecutive
/// above-threshold samples, and closes at the last below-threshold sample
/// once the tolerance is exceeded (or the series ends). Events are disjoint
/// and ordered.
pub fn detect_drops(series: &[f64], cfg: &DetectorConfig) -> Vec<DropEvent> {
    #[derive(Clone, Copy)]
    enum State {
        Scanning,
        Confirming { start: usize, run: usize },
        InDrop { start: usize, last_below: usize, peaks: usize },
    }
    let mut events = Vec::new();
    let mut state = State::Scanning;
    for (t, p) in series.iter().enumerate() {
        let below = *p < cfg.t_min_watts;
        state = match state {
            State::Scanning => {
                if below {
                    if cfg.c_min <= 1 {
                        State::InDrop {
                            start: t,
                            last_below: t,
                            peaks: 0,
                        }
                    } else {
                        State::Confirming { start: t, run: 1 }
                    }
                } else {
                    State::Scanning
                }
            }
            State::Confirming { start, run } => {
                if below {
                    if run + 1 >= cfg.c_min {
                        State::InDrop {
                            start,
                            last_below: t,
                            peaks: 0,
                        }
                    } else {
                        State::Confirming {
                            start,
                            run: run + 1,
                        }
                    }
                } else {
                    State::Scanning
                }
            }
            State::InDrop {
                start,
                last_below,
                peaks,
            } => {
                if below {
                    State::InDrop {
                        start,
                        last_below: t,
                        peaks: 0,
                    }
                } else if peaks + 1 > cfg.s_p {
                    events.push(DropEvent {
                        t_start: start,
                        t_end: last_below,
                    });
                    State::Scanning
                } else {
                    State::InDrop {
                        start,
                        last_below,
                        peaks: peaks + 1,
                    }
                }
            }
        };
    }
    if let State::InDrop {
        start, last_below, ..
    } = state
    {
        events.push(DropEvent {
            t_start: start,
            t_end: last_below,
        });
    }
    events
}

/// Settings for the recovery-trajectory descent: distance pull plus the
/// placement collision wall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryHyper {
    pub kappa_b: f64,
    pub c_b: f64,
    pub learning_rate: f64,
    pub decay: f64,
    pub patience: usize,
    pub convergence_radius_m: f64,
    pub max_iterations: usize,
}

impl Default for RecoveryHyper {
    fn default() -> Self {
        let p = PlacementHyper::default();
        Self {
            kappa_b: p.kappa_b,
            c_b: p.c_b,
            learning_rate: 6.0,
            decay: 0.5,
            patience: 3,
            convergence_radius_m: 5.0,
            max_iterations: 2000,
        }
    }
}

/// Distance-plus-collision loss driving the recovery flight.
pub fn recovery_loss(p: Point2, target: Point2, blocking: &[Building], hyper: &RecoveryHyper) -> f64 {
    dist2(p, target) + collision_penalty(&[p], blocking, hyper.kappa_b, hyper.c_b)
}

/// Gradient descent from `abs_start` toward `target`, avoiding blocking
/// buildings; returns the iterate trace (starting point included) once it
/// ends within the convergence radius of the target.
pub fn recovery_trajectory(
    abs_start: Point2,
    target: Point2,
    scene: &Scene,
    hyper: &RecoveryHyper,
) -> Result<Vec<Point2>, ResilienceError> {
    let blocking = scene.blocking_buildings(hyper.c_b);
    let mut pos = abs_start;
    let mut trace = vec![pos];
    let mut adam = Adam::new(hyper.learning_rate, 2);
    let mut plateau = PlateauTracker::new(hyper.patience.max(1));
    let mut lr = hyper.learning_rate;
    for _ in 0..hyper.max_iterations {
        if dist2(pos, target) <= hyper.convergence_radius_m {
            return Ok(trace);
        }
        let d = dist2(pos, target);
        let mut grad = if d > 0.0 {
            [(pos[0] - target[0]) / d, (pos[1] - target[1]) / d]
        } else {
            [0.0, 0.0]
        };
        for b in &blocking {
            let db = distance_to_building(pos, b);
            let e = (hyper.kappa_b * (hyper.c_b - db)).exp();
            let dd = crate::geometry::distance_to_building_grad(pos, b);
            grad[0] += -hyper.kappa_b * e * dd[0];
            grad[1] += -hyper.kappa_b * e * dd[1];
        }
        let mut flat = [pos[0], pos[1]];
        adam.step(&mut flat, &grad);
        pos = [flat[0], flat[1]];
        trace.push(pos);
        if plateau.observe(recovery_loss(pos, target, &blocking, hyper)) {
            lr *= hyper.decay;
            adam.learning_rate = lr;
        }
    }
    if dist2(pos, target) <= hyper.convergence_radius_m {
        return Ok(trace);
    }
    Err(ResilienceError::NonConvergence {
        iterations: hyper.max_iterations,
        remaining: dist2(pos, target),
        partial: trace,
    })
}

/// The three recovery phases mapped onto the drop interval: `reaction`
/// occupies the steps from `t_start + 1` through the middle step,
/// `stationary` holds the final trajectory point until `t_end - 1`, and
/// `return_path` retraces the reaction waypoints in reverse after the drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverySchedule {
    pub drop: DropEvent,
    pub reaction: Vec<Point2>,
    pub stationary: Point2,
    pub return_path: Vec<Point2>,
}

/// Resamples the trajectory into `floor(T_d / 2)` equally spaced points by
/// arc length (trajectory end included) and builds the phase schedule.
pub fn build_recovery_schedule(
    trajectory: &[Point2],
    drop: DropEvent,
) -> Result<RecoverySchedule, ResilienceError> {
    let duration = drop.duration();
    if duration < 2 || trajectory.is_empty() {
        return Err(ResilienceError::DegenerateDrop { duration });
    }
    let n_points = duration / 2;
    let mut cumulative = vec![0.0];
    for w in trajectory.windows(2) {
        let last = *cumulative.last().unwrap();
        cumulative.push(last + dist2(w[0], w[1]));
    }
    let total = *cumulative.last().unwrap();
    let end = *trajectory.last().unwrap();
    let mut reaction = Vec::with_capacity(n_points);
    for j in 0..n_points {
        if total == 0.0 {
            reaction.push(end);
            continue;
        }
        let s = (j + 1) as f64 / n_points as f64 * total;
        // Walk the polyline to arc length s.
        let k = cumulative.partition_point(|c| *c < s).min(trajectory.len() - 1);
        let (lo, hi) = (cumulative[k - 1], cumulative[k]);
        let f = if hi > lo { (s - lo) / (hi - lo) } else { 1.0 };
        let (a, b) = (trajectory[k - 1], trajectory[k]);
        reaction.push([a[0] + (b[0] - a[0]) * f, a[1] + (b[1] - a[1]) * f]);
    }
    let mut return_path = reaction.clone();
    return_path.reverse();
    Ok(RecoverySchedule {
        drop,
        reaction,
        stationary: end,
        return_path,
    })
}

/// Recomputes the received-power series with the ABS flying the recovery
/// schedule inside the open drop interval and holding its deployment
/// position everywhere else. Steps outside the drop keep their original
/// values bit for bit.
pub fn apply_recovery(
    track: &UeTrack,
    series_before: &[f64],
    schedule: &RecoverySchedule,
    tx: &TxConfig,
    scene: &Scene,
    cfg: &PropagationConfig,
) -> Vec<f64> {
    let mut out = series_before.to_vec();
    let drop = schedule.drop;
    let t_mid = drop.t_mid();
    for t in (drop.t_start + 1)..drop.t_end {
        if t >= track.steps() {
            break;
        }
        let pos = if t <= t_mid {
            schedule.reaction[t - drop.t_start - 1]
        } else {
            schedule.stationary
        };
        let moved = TxConfig {
            position: [pos[0], pos[1], tx.position[2]],
            ..*tx
        };
        let ue = track.positions[t];
        out[t] = received_power(scene, &moved, [ue[0], ue[1], cfg.rx_height_m], cfg);
    }
    out
}
