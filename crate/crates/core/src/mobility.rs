//! Device movement models and access-point handover.
//!
//! Movement is time-stepped: the engine advances every device once per
//! mobility tick and re-associates it to the nearest in-range access point.

use rand::Rng;

use crate::domain::{nearest_access_point_from, AccessPoint, Position};

/// Movement law for one device.
#[derive(Debug, Clone, PartialEq)]
pub enum MobilityModel {
    /// Constant velocity, reflecting at the arena walls.
    Linear { velocity_mps: (f64, f64) },
    /// Constant angular velocity around a fixed center.
    Circular { center: Position, radius_m: f64, angular_velocity_rad_s: f64 },
    /// Travel toward uniformly drawn waypoints at a per-leg speed, pausing
    /// on arrival.
    RandomWaypoint { speed_mps: (f64, f64), pause_s: f64, arena_size_m: f64 },
}

/// Model-specific progress of one device.
#[derive(Debug, Clone, PartialEq)]
pub enum MobilityPhase {
    Linear { velocity_mps: (f64, f64) },
    Circular { angle_rad: f64 },
    RandomWaypoint { waypoint: Position, speed_mps: f64, pause_left_s: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityState {
    pub position: Position,
    pub phase: MobilityPhase,
}

impl MobilityState {
    /// Initial state at the device's spawn point. Circular devices start on
    /// the circle at angle zero; waypoint devices start "arrived" so the
    /// first advance draws a fresh destination.
    pub fn init(model: &MobilityModel, start: Position) -> Self {
        match model {
            MobilityModel::Linear { velocity_mps } => MobilityState {
                position: start,
                phase: MobilityPhase::Linear { velocity_mps: *velocity_mps },
            },
            MobilityModel::Circular { center, radius_m, .. } => MobilityState {
                position: Position::new(center.x + radius_m, center.y),
                phase: MobilityPhase::Circular { angle_rad: 0.0 },
            },
            MobilityModel::RandomWaypoint { .. } => MobilityState {
                position: start,
                phase: MobilityPhase::RandomWaypoint {
                    waypoint: start,
                    speed_mps: 0.0,
                    pause_left_s: 0.0,
                },
            },
        }
    }
}

/// Advances one device by `dt` seconds. Deterministic given the state, the
/// model, and the RNG stream position.
pub fn advance<R: Rng>(
    state: &mut MobilityState,
    model: &MobilityModel,
    arena_size_m: f64,
    dt: f64,
    rng: &mut R,
) {
    match (&mut state.phase, model) {
        (MobilityPhase::Linear { velocity_mps }, MobilityModel::Linear { .. }) => {
            let (mut x, mut y) = (state.position.x, state.position.y);
            let (mut vx, mut vy) = *velocity_mps;
            x += vx * dt;
            y += vy * dt;
            reflect(&mut x, &mut vx, arena_size_m);
            reflect(&mut y, &mut vy, arena_size_m);
            state.position = Position::new(x, y);
            *velocity_mps = (vx, vy);
        }
        (
            MobilityPhase::Circular { angle_rad },
            MobilityModel::Circular { center, radius_m, angular_velocity_rad_s },
        ) => {
            *angle_rad += angular_velocity_rad_s * dt;
            state.position = Position::new(
                center.x + radius_m * angle_rad.cos(),
                center.y + radius_m * angle_rad.sin(),
            );
        }
        (
            MobilityPhase::RandomWaypoint { waypoint, speed_mps, pause_left_s },
            MobilityModel::RandomWaypoint { speed_mps: speed_range, pause_s, arena_size_m: arena },
        ) => {
            let mut budget = dt;
            while budget > 1e-12 {
                if *pause_left_s > 0.0 {
                    let consumed = pause_left_s.min(budget);
                    *pause_left_s -= consumed;
                    budget -= consumed;
                    continue;
                }
                let to_wp = crate::domain::distance(state.position, *waypoint);
                if to_wp <= 1e-9 {
                    // Arrived: rest, then head somewhere new.
                    *pause_left_s = *pause_s;
                    *waypoint =
                        Position::new(rng.gen_range(0.0..*arena), rng.gen_range(0.0..*arena));
                    *speed_mps = if speed_range.0 == speed_range.1 {
                        speed_range.0
                    } else {
                        rng.gen_range(speed_range.0..speed_range.1)
                    };
                    if *pause_s == 0.0 && *speed_mps == 0.0 {
                        break; // degenerate config: nothing can move
                    }
                    continue;
                }
                if *speed_mps <= 0.0 {
                    break;
                }
                let reachable = *speed_mps * budget;
                if reachable >= to_wp {
                    state.position = *waypoint;
                    budget -= to_wp / *speed_mps;
                } else {
                    let f = reachable / to_wp;
                    state.position = Position::new(
                        state.position.x + (waypoint.x - state.position.x) * f,
                        state.position.y + (waypoint.y - state.position.y) * f,
                    );
                    budget = 0.0;
                }
            }
        }
        _ => unreachable!("mobility state does not match its model"),
    }
}

fn reflect(coord: &mut f64, velocity: &mut f64, arena: f64) {
    // Speeds and tick lengths keep displacements well under one arena
    // width, but fold repeatedly to stay safe for extreme configs.
    let mut guard = 0;
    while (*coord < 0.0 || *coord > arena) && guard < 64 {
        if *coord < 0.0 {
            *coord = -*coord;
            *velocity = -*velocity;
        } else {
            *coord = 2.0 * arena - *coord;
            *velocity = -*velocity;
        }
        guard += 1;
    }
    *coord = coord.clamp(0.0, arena);
}

/// Association change produced by one handover check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Handover {
    /// Still attached to the same access point (or still out of coverage).
    None,
    /// Re-associated; `from` is absent when entering coverage.
    Switch { from: Option<u32>, to: u32 },
    /// Left coverage of every access point.
    Lost { from: u32 },
}

impl Handover {
    /// Association after applying this event to `previous`.
    pub fn association(&self, previous: Option<u32>) -> Option<u32> {
        match self {
            Handover::None => previous,
            Handover::Switch { to, .. } => Some(*to),
            Handover::Lost { .. } => None,
        }
    }
}

/// Re-associates a device to the nearest in-range access point.
pub fn handover(
    position: Position,
    radio_range_m: f64,
    previous: Option<u32>,
    aps: &[AccessPoint],
) -> Handover {
    let now = nearest_access_point_from(position, radio_range_m, aps);
    match (previous, now) {
        (Some(a), Some(b)) if a == b => Handover::None,
        (from, Some(to)) => Handover::Switch { from, to },
        (Some(from), None) => Handover::Lost { from },
        (None, None) => Handover::None,
    }
}
