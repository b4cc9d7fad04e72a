//! Broker federation: response-time composition over local and leased
//! resources, availability of a node set, and the allocation decision.
//!
//! All functions here are pure over an immutable snapshot; the engine
//! serializes snapshot production, so independent what-if evaluations can
//! run concurrently.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::domain::{distance, Broker, CostParams, MobileDevice, Topology};
use crate::model::{self, DelayCost};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FederationError {
    #[error("unknown id {0}")]
    UnknownId(u32),
    #[error("candidate time list is empty")]
    EmptyCandidateTimes,
    #[error("candidate time {0} is not positive")]
    NonpositiveTime(f64),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("no feasible node and no cloud sink available")]
    NoFeasibleNode,
}

/// Response time split into its local and leased components.
/// `total_s` is exactly the sum of the two parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseEstimate {
    pub local_s: f64,
    pub leased_s: f64,
    pub total_s: f64,
}

/// Where an allocated request executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AllocationKind {
    Local,
    Leased,
    Cloud,
}

impl AllocationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AllocationKind::Local => "local",
            AllocationKind::Leased => "leased",
            AllocationKind::Cloud => "cloud",
        }
    }
}

/// Outcome of one allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationDecision {
    pub node_id: u32,
    pub kind: AllocationKind,
    pub predicted_response_s: f64,
    pub cost: f64,
    pub availability: f64,
}

/// Feasibility limits plus the energy-aware selection switch.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraints {
    pub max_price: f64,
    pub min_availability: f64,
    pub energy_aware: bool,
    /// Near-tie window: among candidates within this margin of the best
    /// response time the one with least cumulative energy wins.
    pub energy_tie_window_s: f64,
}

impl Default for Constraints {
    fn default() -> Self {
        Self {
            max_price: f64::INFINITY,
            min_availability: 0.0,
            energy_aware: false,
            energy_tie_window_s: 0.05,
        }
    }
}

/// One allocation candidate carrying its predicted response time and the
/// live energy reading used for near-tie selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub node_id: u32,
    pub kind: AllocationKind,
    pub response_s: f64,
    pub price: f64,
    pub availability: f64,
    pub energy_j: f64,
}

/// Network delay from a user through its broker and out to every leased
/// peer: `beta1 * (d(broker, user) + sum of broker-to-peer distances)`.
/// Per-edge latency overrides replace the distance term for that leg.
pub fn network_delay(
    broker: &Broker,
    device: &MobileDevice,
    topo: &Topology,
    params: &CostParams,
) -> Result<f64, FederationError> {
    let mut delay = leg_delay(topo, params, broker.id, device.id, broker.position, device.position);
    for peer_id in &broker.leased_brokers {
        let peer = topo.broker(*peer_id).ok_or(FederationError::UnknownId(*peer_id))?;
        delay += leg_delay(topo, params, *peer_id, broker.id, peer.position, broker.position);
    }
    Ok(delay)
}

/// Delay of one backbone or access leg: the configured override when the
/// topology has one, otherwise distance scaled by `beta1`.
pub(crate) fn leg_delay(
    topo: &Topology,
    params: &CostParams,
    a: u32,
    b: u32,
    pa: crate::domain::Position,
    pb: crate::domain::Position,
) -> f64 {
    match topo.edge_latency_override(a, b) {
        Some(latency) => latency,
        None => params.beta1_s_per_m * distance(pa, pb),
    }
}

/// Total price of serving at a location: local node prices plus leased
/// node prices.
pub fn total_location_cost(local_prices: &[f64], leased_prices: &[f64]) -> f64 {
    local_prices.iter().sum::<f64>() + leased_prices.iter().sum::<f64>()
}

/// Local response time: harmonic aggregation of the member node times plus
/// the user access delay and the fixed hop cost toward the cloud tier.
pub fn local_response_time(
    node_times: &[f64],
    broker_user_distance_m: f64,
    params: &CostParams,
) -> Result<f64, FederationError> {
    Ok(harmonic(node_times)?
        + params.beta2_s_per_m * broker_user_distance_m
        + params.hop_count as f64 * params.cloud_comm_cost_s)
}

/// Leased response time: harmonic aggregation of the leased node times plus
/// the delay cost of every active lease. No active lease contributes zero.
pub fn leased_response_time(node_times: &[f64], delay_costs: &[f64]) -> Result<f64, FederationError> {
    if node_times.is_empty() && delay_costs.is_empty() {
        return Ok(0.0);
    }
    Ok(harmonic(node_times)? + delay_costs.iter().sum::<f64>())
}

fn harmonic(times: &[f64]) -> Result<f64, FederationError> {
    if times.is_empty() {
        return Err(FederationError::EmptyCandidateTimes);
    }
    let mut inv_sum = 0.0;
    for t in times {
        if *t <= 0.0 {
            return Err(FederationError::NonpositiveTime(*t));
        }
        inv_sum += 1.0 / t;
    }
    Ok(1.0 / inv_sum)
}

/// Combines the local and leased components; the total is their exact sum.
pub fn response_time(local_s: f64, leased_s: f64) -> ResponseEstimate {
    ResponseEstimate { local_s, leased_s, total_s: local_s + leased_s }
}

/// Availability of a node set: one minus the product of the individual
/// failure probabilities, accumulated one node at a time. An empty set has
/// availability zero.
pub fn availability(failure_probs: &[f64]) -> Result<f64, FederationError> {
    if failure_probs.is_empty() {
        return Ok(0.0);
    }
    let mut joint_failure = 1.0;
    for p in failure_probs {
        if !(0.0..=1.0).contains(p) {
            return Err(FederationError::ProbabilityOutOfRange(*p));
        }
        joint_failure *= p;
    }
    Ok(1.0 - joint_failure)
}

/// A leasable node as seen from the requesting broker, annotated with the
/// delay cost of reaching it.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaseCandidate {
    pub node_id: u32,
    pub location_id: u32,
    pub broker_id: u32,
    pub delay_cost: DelayCost,
}

/// Enumerates the fog nodes reachable through the broker's leased peers.
/// The delay cost combines the broker-to-peer leg with the queuing cost of
/// the peer's location under its currently offered load.
pub fn lease_candidates(
    broker: &Broker,
    topo: &Topology,
    params: &CostParams,
    offered_by_location: &BTreeMap<u32, f64>,
) -> Result<Vec<LeaseCandidate>, FederationError> {
    let mut out = Vec::new();
    for peer_id in &broker.leased_brokers {
        let peer = topo.broker(*peer_id).ok_or(FederationError::UnknownId(*peer_id))?;
        let location =
            topo.location_of_broker(*peer_id).ok_or(FederationError::UnknownId(*peer_id))?;
        let h = leg_delay(topo, params, *peer_id, broker.id, peer.position, broker.position);
        let offered = offered_by_location.get(&location.id).copied().unwrap_or(0.0);
        let acceptance = model::acceptance_fraction(location.queue_capacity, offered);
        let executed = model::execution_rate(offered, acceptance);
        let c_q = model::queuing_cost(executed, offered, params.q_unit, params.cq_max);
        for node_id in &location.node_ids {
            out.push(LeaseCandidate {
                node_id: *node_id,
                location_id: location.id,
                broker_id: *peer_id,
                delay_cost: DelayCost::new(h, c_q),
            });
        }
    }
    out.sort_by_key(|c| c.node_id);
    Ok(out)
}

/// Picks the serving node for one request.
///
/// Local candidates are searched first, then leasable ones, then the cloud
/// sinks; within a tier only candidates with price and availability inside
/// the constraints compete, and the minimal response time wins. Ties break
/// to the lowest node id. With `energy_aware` set, candidates within the
/// near-tie window of the best time are re-ranked by cumulative energy.
pub fn allocate(
    locals: &[Candidate],
    leased: &[Candidate],
    cloud: &[Candidate],
    constraints: &Constraints,
) -> Result<AllocationDecision, FederationError> {
    for tier in [locals, leased, cloud] {
        if let Some(chosen) = pick_within_tier(tier, constraints) {
            return Ok(AllocationDecision {
                node_id: chosen.node_id,
                kind: chosen.kind,
                predicted_response_s: chosen.response_s,
                cost: chosen.price,
                availability: chosen.availability,
            });
        }
    }
    Err(FederationError::NoFeasibleNode)
}

fn is_feasible(c: &Candidate, constraints: &Constraints) -> bool {
    c.price <= constraints.max_price && c.availability >= constraints.min_availability
}

fn pick_within_tier<'a>(tier: &'a [Candidate], constraints: &Constraints) -> Option<&'a Candidate> {
    let mut best: Option<&Candidate> = None;
    for c in tier.iter().filter(|c| is_feasible(c, constraints)) {
        best = Some(match best {
            None => c,
            Some(b) => {
                if c.response_s < b.response_s
                    || (c.response_s == b.response_s && c.node_id < b.node_id)
                {
                    c
                } else {
                    b
                }
            }
        });
    }
    let best = best?;
    if !constraints.energy_aware {
        return Some(best);
    }
    // Among near-ties prefer the coolest node, then the lowest id.
    let cutoff = best.response_s + constraints.energy_tie_window_s;
    tier.iter()
        .filter(|c| is_feasible(c, constraints) && c.response_s <= cutoff)
        .min_by(|a, b| {
            a.energy_j
                .total_cmp(&b.energy_j)
                .then_with(|| a.node_id.cmp(&b.node_id))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Edge, FogLocation, FogNode, Position};
    use crate::mobility::MobilityModel;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::collections::BTreeSet;

    fn params_with_beta1(beta1: f64) -> CostParams {
        CostParams {
            beta1_s_per_m: beta1,
            beta2_s_per_m: 0.0,
            q_unit: 0.05,
            hop_count: 0,
            cloud_comm_cost_s: 0.0,
            cq_max: 1e6,
        }
    }

    /// One requesting broker at the origin plus peers laid out on the x
    /// axis at the given distances, all leased.
    fn lease_topology(peer_distances: &[f64], nodes_per_peer: usize) -> Topology {
        let mut topo = Topology {
            arena_size_m: 10_000.0,
            nodes_per_location_bounds: (1, 10),
            ..Default::default()
        };
        let mut next_id = 1u32;
        let mut alloc = || {
            let id = next_id;
            next_id += 1;
            id
        };
        let home_broker = alloc();
        let home_loc = alloc();
        let home_node = alloc();
        topo.locations.push(FogLocation {
            id: home_loc,
            broker_id: home_broker,
            node_ids: vec![home_node],
            queue_capacity: 100.0,
        });
        topo.fog_nodes.push(FogNode {
            id: home_node,
            location_id: home_loc,
            server_count: 1,
            service_rate: 10.0,
            price: 1.0,
            failure_prob: 0.05,
            power_idle_w: 50.0,
            power_busy_w: 150.0,
        });
        let mut leased = BTreeSet::new();
        for d in peer_distances {
            let peer_broker = alloc();
            let peer_loc = alloc();
            leased.insert(peer_broker);
            let mut node_ids = Vec::new();
            for _ in 0..nodes_per_peer {
                let node = alloc();
                node_ids.push(node);
                topo.fog_nodes.push(FogNode {
                    id: node,
                    location_id: peer_loc,
                    server_count: 1,
                    service_rate: 10.0,
                    price: 2.0,
                    failure_prob: 0.05,
                    power_idle_w: 50.0,
                    power_busy_w: 150.0,
                });
            }
            topo.locations.push(FogLocation {
                id: peer_loc,
                broker_id: peer_broker,
                node_ids,
                queue_capacity: 100.0,
            });
            topo.brokers.push(Broker {
                id: peer_broker,
                location_id: peer_loc,
                position: Position::new(*d, 0.0),
                leased_brokers: BTreeSet::new(),
                link_bandwidth_bps: 1e10,
            });
        }
        topo.brokers.push(Broker {
            id: home_broker,
            location_id: home_loc,
            position: Position::new(0.0, 0.0),
            leased_brokers: leased,
            link_bandwidth_bps: 1e10,
        });
        topo.brokers.sort_by_key(|b| b.id);
        topo
    }

    fn device_at(x: f64, y: f64) -> MobileDevice {
        MobileDevice {
            id: 900,
            position: Position::new(x, y),
            arrival_rate: 1.0,
            mobility: MobilityModel::Linear { velocity_mps: (0.0, 0.0) },
            radio_range_m: 250.0,
        }
    }

    #[test]
    fn network_delay_sums_user_and_lease_legs() {
        let topo = lease_topology(&[200.0, 300.0], 1);
        let broker = topo.broker(1).unwrap();
        let device = device_at(100.0, 0.0);
        let h = network_delay(broker, &device, &topo, &params_with_beta1(0.001)).unwrap();
        assert_relative_eq!(h, 0.6, max_relative = 1e-12);
    }

    #[test]
    fn network_delay_zero_coefficient() {
        let topo = lease_topology(&[200.0, 300.0], 1);
        let broker = topo.broker(1).unwrap();
        let device = device_at(100.0, 0.0);
        let h = network_delay(broker, &device, &topo, &params_with_beta1(0.0)).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn network_delay_without_leases() {
        let topo = lease_topology(&[], 1);
        let broker = topo.broker(1).unwrap();
        let device = device_at(250.0, 0.0);
        let h = network_delay(broker, &device, &topo, &params_with_beta1(0.002)).unwrap();
        assert_relative_eq!(h, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn network_delay_honors_edge_override() {
        let mut topo = lease_topology(&[], 1);
        let device = device_at(250.0, 0.0);
        topo.edges.push(Edge { a: 1, b: device.id, latency_override_s: Some(0.125) });
        let broker = topo.broker(1).unwrap();
        let h = network_delay(broker, &device, &topo, &params_with_beta1(0.002)).unwrap();
        assert_eq!(h, 0.125);
    }

    #[test]
    fn total_location_cost_fixtures() {
        assert_relative_eq!(
            total_location_cost(&[1.0, 2.0], &[3.0]),
            6.0,
            max_relative = 1e-12
        );
        assert_eq!(total_location_cost(&[], &[]), 0.0);
        assert_eq!(total_location_cost(&[5.0], &[]), 5.0);
    }

    #[test]
    fn local_response_time_fixtures() {
        let mut p = params_with_beta1(0.0);
        assert_relative_eq!(
            local_response_time(&[2.0, 2.0], 0.0, &p).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            local_response_time(&[3.0], 0.0, &p).unwrap(),
            3.0,
            max_relative = 1e-12
        );
        p.beta2_s_per_m = 0.001;
        p.hop_count = 2;
        p.cloud_comm_cost_s = 0.05;
        assert_relative_eq!(
            local_response_time(&[1.0, 1.0, 1.0, 1.0], 100.0, &p).unwrap(),
            0.45,
            max_relative = 1e-12
        );
        assert_eq!(
            local_response_time(&[], 0.0, &p),
            Err(FederationError::EmptyCandidateTimes)
        );
        assert_eq!(
            local_response_time(&[1.0, -2.0], 0.0, &p),
            Err(FederationError::NonpositiveTime(-2.0))
        );
    }

    #[test]
    fn leased_response_time_fixtures() {
        assert_relative_eq!(
            leased_response_time(&[2.0, 2.0], &[0.1, 0.2]).unwrap(),
            1.3,
            max_relative = 1e-12
        );
        assert_eq!(leased_response_time(&[], &[]).unwrap(), 0.0);
        assert_relative_eq!(leased_response_time(&[4.0], &[]).unwrap(), 4.0, max_relative = 1e-12);
        assert_eq!(
            leased_response_time(&[], &[0.1]),
            Err(FederationError::EmptyCandidateTimes)
        );
    }

    #[test]
    fn response_time_fixtures() {
        let r = response_time(1.0, 1.3);
        assert_relative_eq!(r.total_s, 2.3, max_relative = 1e-12);
        assert_eq!(response_time(4.2, 0.0).total_s, 4.2);
        assert_eq!(response_time(0.0, 0.0).total_s, 0.0);
        assert_eq!(r.total_s, r.local_s + r.leased_s);
    }

    #[test]
    fn availability_fixtures() {
        assert_relative_eq!(availability(&[0.1, 0.2]).unwrap(), 0.98, max_relative = 1e-12);
        assert_eq!(availability(&[0.0]).unwrap(), 1.0);
        assert_eq!(availability(&[]).unwrap(), 0.0);
        assert_eq!(
            availability(&[0.5, 1.5]),
            Err(FederationError::ProbabilityOutOfRange(1.5))
        );
    }

    #[test]
    fn availability_loop_matches_closed_form() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=20);
            let probs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let loop_result = availability(&probs).unwrap();
            let closed = 1.0 - probs.iter().product::<f64>();
            assert!((loop_result - closed).abs() <= 1e-12);
        }
    }

    #[test]
    fn availability_monotone_when_adding_node() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=10);
            let mut probs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let base = availability(&probs).unwrap();
            probs.push(rng.gen_range(0.0..1.0f64).min(0.999_999));
            let grown = availability(&probs).unwrap();
            assert!(grown >= base - 1e-15);
        }
    }

    #[test]
    fn lease_candidates_enumerates_peer_nodes() {
        let topo = lease_topology(&[200.0, 300.0], 2);
        let broker = topo.broker(1).unwrap();
        let loads = BTreeMap::new();
        let cands =
            lease_candidates(broker, &topo, &params_with_beta1(0.001), &loads).unwrap();
        assert_eq!(cands.len(), 4);

        let topo = lease_topology(&[], 2);
        let broker = topo.broker(1).unwrap();
        let cands =
            lease_candidates(broker, &topo, &params_with_beta1(0.001), &loads).unwrap();
        assert!(cands.is_empty());

        let topo = lease_topology(&[400.0], 3);
        let broker = topo.broker(1).unwrap();
        let cands =
            lease_candidates(broker, &topo, &params_with_beta1(0.001), &loads).unwrap();
        assert_eq!(cands.len(), 3);
        for c in &cands {
            assert!(c.delay_cost.total > 0.0);
        }
    }

    fn candidate(id: u32, kind: AllocationKind, response: f64) -> Candidate {
        Candidate {
            node_id: id,
            kind,
            response_s: response,
            price: 1.0,
            availability: 1.0,
            energy_j: 0.0,
        }
    }

    #[test]
    fn allocate_picks_minimum_response_time() {
        let locals = vec![
            candidate(1, AllocationKind::Local, 5.0),
            candidate(2, AllocationKind::Local, 3.0),
            candidate(3, AllocationKind::Local, 7.0),
        ];
        let d = allocate(&locals, &[], &[], &Constraints::default()).unwrap();
        assert_eq!(d.node_id, 2);
        assert_eq!(d.kind, AllocationKind::Local);
    }

    #[test]
    fn allocate_escalates_when_locals_infeasible() {
        let mut locals = vec![candidate(1, AllocationKind::Local, 1.0)];
        locals[0].availability = 0.2;
        let leased = vec![candidate(9, AllocationKind::Leased, 4.0)];
        let cons = Constraints { min_availability: 0.9, ..Constraints::default() };
        let d = allocate(&locals, &leased, &[], &cons).unwrap();
        assert_eq!(d.node_id, 9);
        assert_eq!(d.kind, AllocationKind::Leased);
    }

    #[test]
    fn allocate_ties_break_to_lowest_id() {
        let locals = vec![
            candidate(7, AllocationKind::Local, 3.0),
            candidate(4, AllocationKind::Local, 3.0),
        ];
        let d = allocate(&locals, &[], &[], &Constraints::default()).unwrap();
        assert_eq!(d.node_id, 4);
    }

    #[test]
    fn allocate_errors_without_cloud() {
        let mut locals = vec![candidate(1, AllocationKind::Local, 1.0)];
        locals[0].price = 99.0;
        let cons = Constraints { max_price: 10.0, ..Constraints::default() };
        assert_eq!(allocate(&locals, &[], &[], &cons), Err(FederationError::NoFeasibleNode));
        let cloud = vec![candidate(50, AllocationKind::Cloud, 2.0)];
        let d = allocate(&locals, &[], &cloud, &cons).unwrap();
        assert_eq!(d.kind, AllocationKind::Cloud);
    }

    #[test]
    fn allocate_energy_aware_prefers_cool_near_tie() {
        let mut locals = vec![
            candidate(1, AllocationKind::Local, 1.00),
            candidate(2, AllocationKind::Local, 1.02),
            candidate(3, AllocationKind::Local, 2.00),
        ];
        locals[0].energy_j = 500.0;
        locals[1].energy_j = 100.0;
        locals[2].energy_j = 0.0;
        let cons = Constraints {
            energy_aware: true,
            energy_tie_window_s: 0.05,
            ..Constraints::default()
        };
        let d = allocate(&locals, &[], &[], &cons).unwrap();
        // Node 3 is outside the window despite being coolest.
        assert_eq!(d.node_id, 2);
    }

    /// Independent reference: filter each tier, then scan for the best.
    fn brute_force(
        locals: &[Candidate],
        leased: &[Candidate],
        cloud: &[Candidate],
        cons: &Constraints,
    ) -> Option<u32> {
        for tier in [locals, leased, cloud] {
            let feasible: Vec<&Candidate> = tier
                .iter()
                .filter(|c| c.price <= cons.max_price && c.availability >= cons.min_availability)
                .collect();
            if feasible.is_empty() {
                continue;
            }
            let t_min = feasible.iter().map(|c| c.response_s).fold(f64::INFINITY, f64::min);
            let mut pool: Vec<&&Candidate> = if cons.energy_aware {
                feasible
                    .iter()
                    .filter(|c| c.response_s <= t_min + cons.energy_tie_window_s)
                    .collect()
            } else {
                feasible.iter().filter(|c| c.response_s == t_min).collect()
            };
            pool.sort_by(|a, b| {
                if cons.energy_aware {
                    a.energy_j
                        .total_cmp(&b.energy_j)
                        .then_with(|| a.node_id.cmp(&b.node_id))
                } else {
                    a.node_id.cmp(&b.node_id)
                }
            });
            return Some(pool[0].node_id);
        }
        None
    }

    #[test]
    fn allocate_matches_brute_force_on_random_instances() {
        let mut rng = StdRng::seed_from_u64(20250810);
        for case in 0..1000 {
            let n_local = rng.gen_range(0..=3);
            let n_leased = rng.gen_range(0..=2);
            let n_cloud = rng.gen_range(0..=1usize);
            let mut next_id = 0u32;
            let mut make = |kind: AllocationKind, rng: &mut StdRng| {
                next_id += 1;
                Candidate {
                    node_id: next_id,
                    kind,
                    // Coarse grid so exact ties actually occur.
                    response_s: rng.gen_range(1..=8) as f64 * 0.5,
                    price: rng.gen_range(0..=4) as f64,
                    availability: rng.gen_range(0..=10) as f64 / 10.0,
                    energy_j: rng.gen_range(0..=5) as f64 * 100.0,
                }
            };
            let locals: Vec<Candidate> =
                (0..n_local).map(|_| make(AllocationKind::Local, &mut rng)).collect();
            let leased: Vec<Candidate> =
                (0..n_leased).map(|_| make(AllocationKind::Leased, &mut rng)).collect();
            let cloud: Vec<Candidate> =
                (0..n_cloud).map(|_| make(AllocationKind::Cloud, &mut rng)).collect();
            let cons = Constraints {
                max_price: rng.gen_range(0..=4) as f64,
                min_availability: rng.gen_range(0..=10) as f64 / 10.0,
                energy_aware: rng.gen_bool(0.5),
                energy_tie_window_s: 0.5,
            };
            let got = allocate(&locals, &leased, &cloud, &cons).ok().map(|d| d.node_id);
            let want = brute_force(&locals, &leased, &cloud, &cons);
            assert_eq!(got, want, "case {case} diverged");
        }
    }

    #[test]
    fn allocate_invariant_under_response_scaling() {
        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..200 {
            let locals: Vec<Candidate> = (0..rng.gen_range(1..=6))
                .map(|i| Candidate {
                    node_id: i,
                    kind: AllocationKind::Local,
                    response_s: rng.gen_range(0.1..10.0),
                    price: 1.0,
                    availability: 1.0,
                    energy_j: 0.0,
                })
                .collect();
            let cons = Constraints::default();
            let base = allocate(&locals, &[], &[], &cons).unwrap().node_id;
            let scale = rng.gen_range(0.001..1000.0);
            let scaled: Vec<Candidate> = locals
                .iter()
                .map(|c| Candidate { response_s: c.response_s * scale, ..*c })
                .collect();
            assert_eq!(allocate(&scaled, &[], &[], &cons).unwrap().node_id, base);
        }
    }
}
