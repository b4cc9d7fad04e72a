//! Entities and the topology graph consumed by every other module.
//!
//! All types here are immutable once a scenario is built; the engine keeps
//! its own mutable runtime state and treats the topology as read-only.

use std::collections::BTreeSet;
use std::fmt;

use crate::mobility::MobilityModel;

/// Planar coordinate in meters inside the square arena.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Euclidean distance in meters. Symmetric, zero iff the points coincide.
pub fn distance(a: Position, b: Position) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// A compute node: `server_count` parallel servers, each draining
/// `service_rate` unit-size tasks per second.
#[derive(Debug, Clone, PartialEq)]
pub struct FogNode {
    pub id: u32,
    pub location_id: u32,
    pub server_count: u32,
    /// Tasks per second per server for unit task size.
    pub service_rate: f64,
    /// Cost units charged per executed task.
    pub price: f64,
    pub failure_prob: f64,
    pub power_idle_w: f64,
    pub power_busy_w: f64,
}

impl FogNode {
    /// Total drain rate of the node in unit tasks per second.
    pub fn capacity(&self) -> f64 {
        self.server_count as f64 * self.service_rate
    }
}

/// Per-location coordinator. `leased_brokers` lists the peers this broker
/// may lease capacity from.
#[derive(Debug, Clone, PartialEq)]
pub struct Broker {
    pub id: u32,
    pub location_id: u32,
    pub position: Position,
    pub leased_brokers: BTreeSet<u32>,
    pub link_bandwidth_bps: f64,
}

/// A site grouping several fog nodes under one broker.
#[derive(Debug, Clone, PartialEq)]
pub struct FogLocation {
    pub id: u32,
    pub broker_id: u32,
    pub node_ids: Vec<u32>,
    /// Admission capacity in tasks per second.
    pub queue_capacity: f64,
}

/// A request source. `position` is the spawn point; the engine tracks the
/// live position as the device moves.
#[derive(Debug, Clone, PartialEq)]
pub struct MobileDevice {
    pub id: u32,
    pub position: Position,
    /// Tasks per second offered by this device.
    pub arrival_rate: f64,
    pub mobility: MobilityModel,
    pub radio_range_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccessPoint {
    pub id: u32,
    pub position: Position,
}

/// Fixed-latency, infinite-capacity overflow sink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudSink {
    pub id: u32,
    pub latency_s: f64,
    pub price: f64,
}

/// Coefficients of the delay/cost model.
#[derive(Debug, Clone, PartialEq)]
pub struct CostParams {
    /// Backbone delay per meter of broker-to-broker or broker-to-user path.
    pub beta1_s_per_m: f64,
    /// Access delay per meter between user and serving broker.
    pub beta2_s_per_m: f64,
    /// Queuing cost unit, expressed in seconds-equivalent.
    pub q_unit: f64,
    /// Hop count toward the cloud tier.
    pub hop_count: u32,
    /// Per-hop cloud communication cost in seconds.
    pub cloud_comm_cost_s: f64,
    /// Saturation cap for the queuing cost term.
    pub cq_max: f64,
}

/// Undirected link between two entities, optionally overriding the
/// distance-derived latency for that leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub latency_override_s: Option<f64>,
}

/// A unit of offloaded work. `size` is service demand in unit tasks:
/// size 1.0 occupies one server for `1 / service_rate` seconds on average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Request {
    pub id: u64,
    pub device_id: u32,
    pub size: f64,
    pub created_at: f64,
}

/// The whole simulated world. Ids are unique across every entity kind.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Topology {
    pub devices: Vec<MobileDevice>,
    pub fog_nodes: Vec<FogNode>,
    pub brokers: Vec<Broker>,
    pub locations: Vec<FogLocation>,
    pub access_points: Vec<AccessPoint>,
    pub cloud_sinks: Vec<CloudSink>,
    pub edges: Vec<Edge>,
    pub arena_size_m: f64,
    /// Expected node count per location, checked by validation.
    pub nodes_per_location_bounds: (u32, u32),
}

impl Topology {
    pub fn broker(&self, id: u32) -> Option<&Broker> {
        self.brokers.iter().find(|b| b.id == id)
    }

    pub fn location(&self, id: u32) -> Option<&FogLocation> {
        self.locations.iter().find(|l| l.id == id)
    }

    pub fn fog_node(&self, id: u32) -> Option<&FogNode> {
        self.fog_nodes.iter().find(|n| n.id == id)
    }

    pub fn location_of_broker(&self, broker_id: u32) -> Option<&FogLocation> {
        self.locations.iter().find(|l| l.broker_id == broker_id)
    }

    /// Member nodes of a location, in id order.
    pub fn nodes_of_location(&self, location_id: u32) -> Vec<&FogNode> {
        let mut nodes: Vec<&FogNode> = self
            .fog_nodes
            .iter()
            .filter(|n| n.location_id == location_id)
            .collect();
        nodes.sort_by_key(|n| n.id);
        nodes
    }

    /// Latency override for the undirected leg (a, b), if configured.
    pub fn edge_latency_override(&self, a: u32, b: u32) -> Option<f64> {
        self.edges
            .iter()
            .find(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
            .and_then(|e| e.latency_override_s)
    }
}

/// A single broken invariant. Violations are data, not failures: callers
/// decide whether to proceed.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    MissingBroker { location_id: u32 },
    MultipleBrokers { location_id: u32, count: usize },
    DuplicateId { id: u32 },
    EmptyLocation { location_id: u32 },
    NodeCountOutOfBounds { location_id: u32, count: usize, min: u32, max: u32 },
    DanglingReference { from: String, id: u32 },
    BrokerGraphDisconnected,
    SelfLease { broker_id: u32 },
    PositionOutOfArena { id: u32 },
    BadParameter { id: u32, what: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingBroker { location_id } => {
                write!(f, "location {location_id}: missing broker")
            }
            Violation::MultipleBrokers { location_id, count } => {
                write!(f, "location {location_id}: {count} brokers, expected exactly one")
            }
            Violation::DuplicateId { id } => write!(f, "duplicate id {id}"),
            Violation::EmptyLocation { location_id } => {
                write!(f, "location {location_id}: no fog nodes")
            }
            Violation::NodeCountOutOfBounds { location_id, count, min, max } => write!(
                f,
                "location {location_id}: {count} nodes outside configured bounds {min}..={max}"
            ),
            Violation::DanglingReference { from, id } => {
                write!(f, "{from} references unknown id {id}")
            }
            Violation::BrokerGraphDisconnected => write!(f, "broker graph is not connected"),
            Violation::SelfLease { broker_id } => {
                write!(f, "broker {broker_id} leases from itself")
            }
            Violation::PositionOutOfArena { id } => {
                write!(f, "entity {id}: position outside arena")
            }
            Violation::BadParameter { id, what } => write!(f, "entity {id}: {what}"),
        }
    }
}

/// Outcome of [`validate_topology`]: empty means the topology is sound.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            write!(f, "ok")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// Checks id uniqueness, broker-per-location structure, node-count bounds,
/// reference integrity, positions, and broker backbone connectivity.
pub fn validate_topology(t: &Topology) -> ValidationReport {
    let mut violations = Vec::new();

    let mut seen = BTreeSet::new();
    let mut check_id = |id: u32, violations: &mut Vec<Violation>| {
        if !seen.insert(id) {
            violations.push(Violation::DuplicateId { id });
        }
    };
    for d in &t.devices {
        check_id(d.id, &mut violations);
    }
    for n in &t.fog_nodes {
        check_id(n.id, &mut violations);
    }
    for b in &t.brokers {
        check_id(b.id, &mut violations);
    }
    for l in &t.locations {
        check_id(l.id, &mut violations);
    }
    for a in &t.access_points {
        check_id(a.id, &mut violations);
    }
    for c in &t.cloud_sinks {
        check_id(c.id, &mut violations);
    }

    let in_arena = |p: Position| {
        p.x.is_finite()
            && p.y.is_finite()
            && (0.0..=t.arena_size_m).contains(&p.x)
            && (0.0..=t.arena_size_m).contains(&p.y)
    };

    let (min_nodes, max_nodes) = t.nodes_per_location_bounds;
    for l in &t.locations {
        let brokers_here = t.brokers.iter().filter(|b| b.location_id == l.id).count();
        match brokers_here {
            0 => violations.push(Violation::MissingBroker { location_id: l.id }),
            1 => {}
            n => violations.push(Violation::MultipleBrokers { location_id: l.id, count: n }),
        }
        if l.node_ids.is_empty() {
            violations.push(Violation::EmptyLocation { location_id: l.id });
        } else {
            let count = l.node_ids.len();
            if count < min_nodes as usize || count > max_nodes as usize {
                violations.push(Violation::NodeCountOutOfBounds {
                    location_id: l.id,
                    count,
                    min: min_nodes,
                    max: max_nodes,
                });
            }
        }
        for nid in &l.node_ids {
            if t.fog_node(*nid).is_none() {
                violations.push(Violation::DanglingReference {
                    from: format!("location {}", l.id),
                    id: *nid,
                });
            }
        }
        if t.broker(l.broker_id).is_none() {
            violations.push(Violation::DanglingReference {
                from: format!("location {}", l.id),
                id: l.broker_id,
            });
        }
        if l.queue_capacity < 0.0 || !l.queue_capacity.is_finite() {
            violations.push(Violation::BadParameter {
                id: l.id,
                what: "queue capacity must be finite and nonnegative".into(),
            });
        }
    }

    for n in &t.fog_nodes {
        if t.location(n.location_id).is_none() {
            violations.push(Violation::DanglingReference {
                from: format!("fog node {}", n.id),
                id: n.location_id,
            });
        }
        if n.server_count < 1 {
            violations.push(Violation::BadParameter { id: n.id, what: "server count < 1".into() });
        }
        if n.service_rate <= 0.0 || n.service_rate.is_nan() {
            violations
                .push(Violation::BadParameter { id: n.id, what: "service rate must be > 0".into() });
        }
        if n.price < 0.0 {
            violations.push(Violation::BadParameter { id: n.id, what: "negative price".into() });
        }
        if !(0.0..=1.0).contains(&n.failure_prob) {
            violations.push(Violation::BadParameter {
                id: n.id,
                what: "failure probability outside [0, 1]".into(),
            });
        }
        if n.power_idle_w < 0.0 || n.power_busy_w < n.power_idle_w {
            violations.push(Violation::BadParameter {
                id: n.id,
                what: "power profile must satisfy busy >= idle >= 0".into(),
            });
        }
    }

    for b in &t.brokers {
        if t.location(b.location_id).is_none() {
            violations.push(Violation::DanglingReference {
                from: format!("broker {}", b.id),
                id: b.location_id,
            });
        }
        if !in_arena(b.position) {
            violations.push(Violation::PositionOutOfArena { id: b.id });
        }
        if b.leased_brokers.contains(&b.id) {
            violations.push(Violation::SelfLease { broker_id: b.id });
        }
        for peer in &b.leased_brokers {
            if *peer != b.id && t.broker(*peer).is_none() {
                violations.push(Violation::DanglingReference {
                    from: format!("broker {}", b.id),
                    id: *peer,
                });
            }
        }
    }

    for d in &t.devices {
        if !in_arena(d.position) {
            violations.push(Violation::PositionOutOfArena { id: d.id });
        }
        if d.arrival_rate < 0.0 || !d.arrival_rate.is_finite() {
            violations.push(Violation::BadParameter {
                id: d.id,
                what: "arrival rate must be finite and nonnegative".into(),
            });
        }
        if d.radio_range_m <= 0.0 || d.radio_range_m.is_nan() {
            violations
                .push(Violation::BadParameter { id: d.id, what: "radio range must be > 0".into() });
        }
    }

    for a in &t.access_points {
        if !in_arena(a.position) {
            violations.push(Violation::PositionOutOfArena { id: a.id });
        }
    }

    for e in &t.edges {
        for end in [e.a, e.b] {
            let known = t.broker(end).is_some()
                || t.fog_node(end).is_some()
                || t.access_points.iter().any(|a| a.id == end)
                || t.devices.iter().any(|d| d.id == end)
                || t.cloud_sinks.iter().any(|c| c.id == end);
            if !known {
                violations
                    .push(Violation::DanglingReference { from: "edge".into(), id: end });
            }
        }
    }

    if !broker_backbone_connected(t) {
        violations.push(Violation::BrokerGraphDisconnected);
    }

    ValidationReport { violations }
}

/// BFS over broker-to-broker edges; a lone broker is trivially connected.
fn broker_backbone_connected(t: &Topology) -> bool {
    if t.brokers.len() <= 1 {
        return true;
    }
    let broker_ids: BTreeSet<u32> = t.brokers.iter().map(|b| b.id).collect();
    let mut reached = BTreeSet::new();
    let mut frontier = vec![t.brokers[0].id];
    reached.insert(t.brokers[0].id);
    while let Some(cur) = frontier.pop() {
        for e in &t.edges {
            let next = if e.a == cur {
                e.b
            } else if e.b == cur {
                e.a
            } else {
                continue;
            };
            if broker_ids.contains(&next) && reached.insert(next) {
                frontier.push(next);
            }
        }
    }
    reached.len() == broker_ids.len()
}

/// Id of the in-range access point closest to the device; ties break to the
/// lowest id, and `None` means the device is out of coverage.
pub fn nearest_access_point(device: &MobileDevice, aps: &[AccessPoint]) -> Option<u32> {
    nearest_access_point_from(device.position, device.radio_range_m, aps)
}

/// Position-based variant used by the engine while devices move.
pub fn nearest_access_point_from(
    position: Position,
    radio_range_m: f64,
    aps: &[AccessPoint],
) -> Option<u32> {
    let mut best: Option<(f64, u32)> = None;
    for ap in aps {
        let d = distance(position, ap.position);
        if d > radio_range_m {
            continue;
        }
        best = match best {
            None => Some((d, ap.id)),
            Some((bd, bid)) => {
                if d < bd || (d == bd && ap.id < bid) {
                    Some((d, ap.id))
                } else {
                    Some((bd, bid))
                }
            }
        };
    }
    best.map(|(_, id)| id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn device_at(x: f64, y: f64) -> MobileDevice {
        MobileDevice {
            id: 1000,
            position: Position::new(x, y),
            arrival_rate: 1.0,
            mobility: MobilityModel::Linear { velocity_mps: (0.0, 0.0) },
            radio_range_m: 250.0,
        }
    }

    #[test]
    fn distance_fixtures() {
        assert_relative_eq!(
            distance(Position::new(0.0, 0.0), Position::new(3.0, 4.0)),
            5.0,
            max_relative = 1e-12
        );
        assert_eq!(distance(Position::new(7.0, 7.0), Position::new(7.0, 7.0)), 0.0);
        assert_relative_eq!(
            distance(Position::new(0.0, 0.0), Position::new(1.0, 1.0)),
            std::f64::consts::SQRT_2,
            max_relative = 1e-12
        );
    }

    #[test]
    fn nearest_access_point_picks_closest_in_range() {
        let aps = vec![
            AccessPoint { id: 10, position: Position::new(10.0, 0.0) },
            AccessPoint { id: 11, position: Position::new(50.0, 0.0) },
        ];
        assert_eq!(nearest_access_point(&device_at(0.0, 0.0), &aps), Some(10));
    }

    #[test]
    fn nearest_access_point_none_when_out_of_range() {
        let aps = vec![
            AccessPoint { id: 10, position: Position::new(300.0, 0.0) },
            AccessPoint { id: 11, position: Position::new(0.0, 400.0) },
        ];
        assert_eq!(nearest_access_point(&device_at(0.0, 0.0), &aps), None);
    }

    #[test]
    fn nearest_access_point_tie_breaks_by_lowest_id() {
        let aps = vec![
            AccessPoint { id: 12, position: Position::new(100.0, 0.0) },
            AccessPoint { id: 11, position: Position::new(-100.0, 0.0) },
        ];
        let mut dev = device_at(0.0, 0.0);
        dev.radio_range_m = 150.0;
        assert_eq!(nearest_access_point(&dev, &aps), Some(11));
    }

    fn tiny_valid_topology() -> Topology {
        let brokers = vec![
            Broker {
                id: 1,
                location_id: 100,
                position: Position::new(100.0, 100.0),
                leased_brokers: BTreeSet::from([2]),
                link_bandwidth_bps: 1e10,
            },
            Broker {
                id: 2,
                location_id: 101,
                position: Position::new(800.0, 800.0),
                leased_brokers: BTreeSet::from([1]),
                link_bandwidth_bps: 1e10,
            },
        ];
        let fog_nodes = vec![
            FogNode {
                id: 10,
                location_id: 100,
                server_count: 2,
                service_rate: 5.0,
                price: 1.0,
                failure_prob: 0.05,
                power_idle_w: 50.0,
                power_busy_w: 150.0,
            },
            FogNode {
                id: 11,
                location_id: 101,
                server_count: 2,
                service_rate: 5.0,
                price: 1.0,
                failure_prob: 0.05,
                power_idle_w: 50.0,
                power_busy_w: 150.0,
            },
        ];
        let locations = vec![
            FogLocation { id: 100, broker_id: 1, node_ids: vec![10], queue_capacity: 10.0 },
            FogLocation { id: 101, broker_id: 2, node_ids: vec![11], queue_capacity: 10.0 },
        ];
        Topology {
            devices: vec![],
            fog_nodes,
            brokers,
            locations,
            access_points: vec![],
            cloud_sinks: vec![],
            edges: vec![Edge { a: 1, b: 2, latency_override_s: None }],
            arena_size_m: 1000.0,
            nodes_per_location_bounds: (1, 5),
        }
    }

    #[test]
    fn validate_accepts_sound_topology() {
        let report = validate_topology(&tiny_valid_topology());
        assert!(report.is_ok(), "unexpected violations: {report}");
    }

    #[test]
    fn validate_flags_missing_broker() {
        let mut t = tiny_valid_topology();
        t.brokers.retain(|b| b.id != 2);
        t.edges.clear();
        let report = validate_topology(&t);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::MissingBroker { location_id: 101 })));
    }

    #[test]
    fn validate_flags_duplicate_id() {
        let mut t = tiny_valid_topology();
        t.fog_nodes[1].id = 10;
        t.locations[1].node_ids = vec![10];
        let report = validate_topology(&t);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::DuplicateId { id: 10 })));
    }

    #[test]
    fn validate_flags_disconnected_brokers() {
        let mut t = tiny_valid_topology();
        t.edges.clear();
        let report = validate_topology(&t);
        assert!(report.violations.contains(&Violation::BrokerGraphDisconnected));
    }

    #[test]
    fn validate_flags_self_lease() {
        let mut t = tiny_valid_topology();
        t.brokers[0].leased_brokers.insert(1);
        let report = validate_topology(&t);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::SelfLease { broker_id: 1 })));
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(
            ax in 0.0..1000.0f64, ay in 0.0..1000.0f64,
            bx in 0.0..1000.0f64, by in 0.0..1000.0f64,
            cx in 0.0..1000.0f64, cy in 0.0..1000.0f64,
        ) {
            let a = Position::new(ax, ay);
            let b = Position::new(bx, by);
            let c = Position::new(cx, cy);
            let ab = distance(a, b);
            let ba = distance(b, a);
            let ac = distance(a, c);
            let cb = distance(c, b);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, ba);
            // Floating-point slack for the triangle inequality.
            prop_assert!(ab <= ac + cb + 1e-9);
            if ax == bx && ay == by {
                prop_assert_eq!(ab, 0.0);
            } else {
                prop_assert!(ab > 0.0);
            }
        }

        #[test]
        fn nearest_access_point_matches_brute_force(
            dx in 0.0..1000.0f64, dy in 0.0..1000.0f64,
            aps in proptest::collection::vec((0.0..1000.0f64, 0.0..1000.0f64), 0..12),
        ) {
            let aps: Vec<AccessPoint> = aps
                .iter()
                .enumerate()
                .map(|(i, (x, y))| AccessPoint { id: i as u32, position: Position::new(*x, *y) })
                .collect();
            let dev = device_at(dx, dy);
            let got = nearest_access_point(&dev, &aps);
            match got {
                None => {
                    for ap in &aps {
                        prop_assert!(distance(dev.position, ap.position) > dev.radio_range_m);
                    }
                }
                Some(id) => {
                    let chosen = aps.iter().find(|a| a.id == id).unwrap();
                    let cd = distance(dev.position, chosen.position);
                    prop_assert!(cd <= dev.radio_range_m);
                    for ap in &aps {
                        let d = distance(dev.position, ap.position);
                        prop_assert!(d > cd || (d == cd && ap.id >= id));
                    }
                }
            }
        }
    }
}
