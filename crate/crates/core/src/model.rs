//! Analytic queuing and cost model.
//!
//! Pure functions over offered load, admission capacity, and server
//! parameters. The allocator uses them as its response-time predictor; the
//! simulator itself measures latency empirically, so these formulas are
//! unit-tested against hand-evaluated fixtures rather than against the
//! event loop.

use thiserror::Error;

use crate::domain::MobileDevice;

/// Load gap below which the queuing cost saturates to its cap.
pub const SATURATION_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// Offered load meets or exceeds total drain rate; the waiting time is
    /// undefined and the allocator treats the target as infeasible.
    #[error("unstable: offered {offered} tasks/s >= capacity {capacity} tasks/s")]
    Unstable { offered: f64, capacity: f64 },
}

/// Sum of the devices' individual arrival rates.
pub fn aggregate_arrival_rate(devices: &[MobileDevice]) -> f64 {
    devices.iter().map(|d| d.arrival_rate).sum()
}

/// Fraction of offered load a location admits: 1 when capacity exceeds the
/// load, `capacity / load` otherwise. No offered load means full admission.
pub fn acceptance_fraction(capacity: f64, offered: f64) -> f64 {
    if offered == 0.0 || capacity > offered {
        1.0
    } else {
        capacity / offered
    }
}

/// Admitted (executed) rate.
pub fn execution_rate(offered: f64, acceptance: f64) -> f64 {
    offered * acceptance
}

/// Mean waiting time at a pool of `servers` parallel servers, each draining
/// `per_server_rate` tasks per second, under offered load `offered`:
///
/// `servers * offered / (servers * per_server_rate - offered) + 1 / per_server_rate`
///
/// Errors when the pool cannot carry the load.
pub fn avg_waiting_time(servers: u32, offered: f64, per_server_rate: f64) -> Result<f64, ModelError> {
    let capacity = servers as f64 * per_server_rate;
    if capacity <= offered {
        return Err(ModelError::Unstable { offered, capacity });
    }
    Ok(servers as f64 * offered / (capacity - offered) + 1.0 / per_server_rate)
}

/// Queuing cost `executed / (offered - executed) * q_unit`, capped at
/// `cq_max`. Full admission leaves no headroom and saturates the cost.
pub fn queuing_cost(executed: f64, offered: f64, q_unit: f64, cq_max: f64) -> f64 {
    let gap = offered - executed;
    if gap <= SATURATION_EPSILON {
        return cq_max;
    }
    (executed / gap * q_unit).min(cq_max)
}

/// Service delay cost: network delay plus queuing cost, both in
/// seconds-equivalent units.
pub fn service_delay_cost(network_delay: f64, queuing_cost: f64) -> f64 {
    network_delay + queuing_cost
}

/// Network delay and queuing cost with their exact sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayCost {
    pub network_delay: f64,
    pub queuing_cost: f64,
    pub total: f64,
}

impl DelayCost {
    pub fn new(network_delay: f64, queuing_cost: f64) -> Self {
        Self { network_delay, queuing_cost, total: service_delay_cost(network_delay, queuing_cost) }
    }
}

/// Location-level snapshot of the analytic model.
#[derive(Debug, Clone, PartialEq)]
pub struct QueuingEstimate {
    /// Offered load routed to the location, tasks/s.
    pub offered: f64,
    pub acceptance: f64,
    pub execution_rate: f64,
    /// `None` when the pool is unstable under the offered load.
    pub waiting_time: Option<f64>,
    pub servers: u32,
    pub per_server_rate: f64,
}

/// Evaluates admission, execution rate, and waiting time for one location.
/// `servers` is the summed server count of its nodes and `per_server_rate`
/// the arithmetic mean of their per-server rates.
pub fn location_estimate(
    admission_capacity: f64,
    offered: f64,
    servers: u32,
    per_server_rate: f64,
) -> QueuingEstimate {
    let acceptance = acceptance_fraction(admission_capacity, offered);
    let executed = execution_rate(offered, acceptance);
    QueuingEstimate {
        offered,
        acceptance,
        execution_rate: executed,
        waiting_time: avg_waiting_time(servers, offered, per_server_rate).ok(),
        servers,
        per_server_rate,
    }
}
