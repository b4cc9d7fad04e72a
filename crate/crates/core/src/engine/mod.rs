//! Deterministic single-threaded event loop.
//!
//! One run owns its RNG streams, node runtimes, and metric buffers, so
//! independent runs (seed or parameter sweeps) can execute in parallel
//! without shared state.
//!
//! Request path: a device emits a request (exponential interarrivals),
//! survives the packet-loss coin, reaches its serving access point's home
//! broker, and the allocator places it on a local node, a leased node at a
//! peer location, or a cloud sink. Fog-bound requests pay a transit delay
//! (access leg, plus the backbone leg when leased), then queue for one of
//! the node's parallel servers; cloud-bound requests complete after the
//! sink's fixed latency.

mod estimator;
mod events;
mod node;
mod rng;

pub use estimator::LoadEstimator;
pub use rng::RngStreams;

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::{Distribution, Exp};
use thiserror::Error;

use crate::domain::{
    distance, nearest_access_point_from, validate_topology, FogLocation, FogNode, Position,
    Request, ValidationReport,
};
use crate::federation::{
    self, allocate, AllocationDecision, AllocationKind, Candidate, FederationError,
};
use crate::mobility::{advance, handover, Handover, MobilityState};
use crate::model;
use crate::report::{p95, LatencySample, MetricsRecord, MetricsReport, RunSummary};
use crate::scenario::{AllocationPolicy, Scenario};

use events::{CompletionTarget, Event, EventQueue, Job};
use node::{Admission, NodeRuntime};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("scenario failed validation:\n{0}")]
    InvalidScenario(ValidationReport),
    #[error("event queue corruption: time regressed from {from} to {to}")]
    ClockRegression { from: f64, to: f64 },
    #[error(
        "conservation violated: generated {generated} != completed {completed} \
         + dropped {dropped} + rejected {rejected} + in-flight {in_flight}"
    )]
    ConservationViolated {
        generated: u64,
        completed: u64,
        dropped: u64,
        rejected: u64,
        in_flight: u64,
    },
}

/// Per-run switches that are not part of the scenario itself.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Route every request through the lowest-id location's broker,
    /// regardless of device position. Models a single-site deployment for
    /// baseline comparisons.
    pub confine_to_lowest_location: bool,
}

/// Runs the scenario to its horizon with the default options.
pub fn run(scenario: &Scenario, seed: u64) -> Result<MetricsReport, EngineError> {
    run_with(scenario, seed, &RunOptions::default())
}

/// Runs the scenario to its horizon. Identical `(scenario, seed, options)`
/// triples produce identical reports.
pub fn run_with(
    scenario: &Scenario,
    seed: u64,
    options: &RunOptions,
) -> Result<MetricsReport, EngineError> {
    let report = validate_topology(&scenario.topology);
    if !report.is_ok() {
        return Err(EngineError::InvalidScenario(report));
    }
    Simulation::new(scenario, seed, options).run()
}

/// Poisson arrival times (exponential interarrivals) with the given mean,
/// strictly below the horizon. An infinite mean yields no arrivals.
pub fn generate_arrivals<R: Rng>(
    mean_interarrival_s: f64,
    horizon_s: f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut out = Vec::new();
    if !mean_interarrival_s.is_finite() || mean_interarrival_s <= 0.0 {
        return out;
    }
    let exp = Exp::new(1.0 / mean_interarrival_s).expect("positive rate");
    let mut t = exp.sample(rng);
    while t < horizon_s {
        out.push(t);
        t += exp.sample(rng);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delivery {
    Delivered,
    Dropped,
}

/// One Bernoulli packet-loss trial.
pub fn apply_packet_loss<R: Rng>(rng: &mut R, error_rate: f64) -> Delivery {
    let dropped = match error_rate {
        r if r <= 0.0 => false,
        r if r >= 1.0 => true,
        r => rng.gen_bool(r),
    };
    if dropped {
        Delivery::Dropped
    } else {
        Delivery::Delivered
    }
}

/// Energy over an interval given the accumulated busy server-seconds:
/// idle power for the idle share, busy power for `busy_server_seconds /
/// servers`.
pub fn account_energy(
    power_idle_w: f64,
    power_busy_w: f64,
    busy_server_seconds: f64,
    servers: u32,
    interval_s: f64,
) -> f64 {
    let busy_time = busy_server_seconds / servers as f64;
    power_idle_w * (interval_s - busy_time) + power_busy_w * busy_time
}

#[derive(Debug, Default)]
struct Counters {
    generated: u64,
    completed_local: u64,
    completed_leased: u64,
    completed_cloud: u64,
    dropped_loss: u64,
    dropped_coverage: u64,
    rejected_overflow: u64,
    rejected_infeasible: u64,
    in_flight: u64,
    handovers: u64,
}

impl Counters {
    fn completed(&self) -> u64 {
        self.completed_local + self.completed_leased + self.completed_cloud
    }
    fn dropped(&self) -> u64 {
        self.dropped_loss + self.dropped_coverage
    }
    fn rejected(&self) -> u64 {
        self.rejected_overflow + self.rejected_infeasible
    }
}

struct DeviceRuntime {
    position: Position,
    mobility: MobilityState,
    association: Option<u32>,
    /// Pregenerated arrival times, earliest first.
    arrivals: std::collections::VecDeque<f64>,
}

struct Simulation<'a> {
    scenario: &'a Scenario,
    seed: u64,
    rng: RngStreams,
    queue: EventQueue,
    now: f64,
    devices: Vec<DeviceRuntime>,
    nodes: Vec<NodeRuntime>,
    node_index: BTreeMap<u32, usize>,
    /// Access point id -> home broker id (nearest broker, ties to low id).
    ap_home_broker: BTreeMap<u32, u32>,
    confined_broker: Option<u32>,
    estimator: LoadEstimator,
    counters: Counters,
    intervals: Vec<MetricsRecord>,
    latencies: Vec<LatencySample>,
    last_metrics_t: f64,
    next_request_id: u64,
    served_devices: BTreeSet<u32>,
}

impl<'a> Simulation<'a> {
    fn new(scenario: &'a Scenario, seed: u64, options: &'a RunOptions) -> Self {
        let topo = &scenario.topology;
        let mut rng = RngStreams::new(seed);
        let horizon = scenario.config.run.duration_s;

        let nodes: Vec<NodeRuntime> = topo
            .fog_nodes
            .iter()
            .map(|n| NodeRuntime::new(n, scenario.config.nodes.queue_limit))
            .collect();
        let node_index: BTreeMap<u32, usize> =
            nodes.iter().enumerate().map(|(i, n)| (n.node_id, i)).collect();

        let ap_home_broker: BTreeMap<u32, u32> = topo
            .access_points
            .iter()
            .map(|ap| {
                let mut best: Option<(f64, u32)> = None;
                for b in &topo.brokers {
                    let d = distance(ap.position, b.position);
                    best = match best {
                        None => Some((d, b.id)),
                        Some((bd, bid)) if d < bd || (d == bd && b.id < bid) => Some((d, b.id)),
                        keep => keep,
                    };
                }
                (ap.id, best.map(|(_, id)| id).expect("at least one broker"))
            })
            .collect();

        let confined_broker = options.confine_to_lowest_location.then(|| {
            let lowest = topo.locations.iter().map(|l| l.id).min().expect("locations");
            topo.location(lowest).expect("location").broker_id
        });

        let devices: Vec<DeviceRuntime> = topo
            .devices
            .iter()
            .map(|d| {
                let mean = if d.arrival_rate > 0.0 { 1.0 / d.arrival_rate } else { f64::INFINITY };
                let mobility = MobilityState::init(&d.mobility, d.position);
                let position = mobility.position;
                DeviceRuntime {
                    position,
                    mobility,
                    association: nearest_access_point_from(
                        position,
                        d.radio_range_m,
                        &topo.access_points,
                    ),
                    arrivals: generate_arrivals(mean, horizon, &mut rng.arrivals).into(),
                }
            })
            .collect();

        let estimator = LoadEstimator::new(
            scenario.config.model.estimator_window_s,
            scenario.config.model.estimator_alpha,
            topo.locations.iter().map(|l| l.id),
        );

        Self {
            scenario,
            seed,
            rng,
            queue: EventQueue::default(),
            now: 0.0,
            devices,
            nodes,
            node_index,
            ap_home_broker,
            confined_broker,
            estimator,
            counters: Counters::default(),
            intervals: Vec::new(),
            latencies: Vec::new(),
            last_metrics_t: 0.0,
            next_request_id: 0,
            served_devices: BTreeSet::new(),
        }
    }

    fn horizon(&self) -> f64 {
        self.scenario.config.run.duration_s
    }

    fn run(mut self) -> Result<MetricsReport, EngineError> {
        let horizon = self.horizon();
        for idx in 0..self.devices.len() {
            if let Some(t) = self.devices[idx].arrivals.pop_front() {
                self.queue.schedule(t, Event::RequestArrival { device_idx: idx });
            }
        }
        let tick = self.scenario.config.mobility.tick_s;
        if tick <= horizon && !self.devices.is_empty() {
            self.queue.schedule(tick, Event::MobilityTick);
        }
        self.queue
            .schedule(self.scenario.config.run.metrics_interval_s.min(horizon), Event::MetricsTick);
        let window = self.scenario.config.model.estimator_window_s;
        if window <= horizon {
            self.queue.schedule(window, Event::LeaseRefresh);
        }

        while let Some(scheduled) = self.queue.pop() {
            if scheduled.at > horizon {
                break;
            }
            if scheduled.at < self.now {
                return Err(EngineError::ClockRegression { from: self.now, to: scheduled.at });
            }
            self.now = scheduled.at;
            self.handle(scheduled.event);
        }

        for rt in &mut self.nodes {
            rt.advance_to(horizon);
        }
        self.finish()
    }

    fn handle(&mut self, event: Event) {
        match event {
            Event::RequestArrival { device_idx } => self.on_request_arrival(device_idx),
            Event::ServiceStart { node_idx, job } => self.on_service_start(node_idx, job),
            Event::ServiceComplete { target, job } => self.on_service_complete(target, job),
            Event::MobilityTick => self.on_mobility_tick(),
            Event::MetricsTick => self.on_metrics_tick(),
            Event::LeaseRefresh => self.on_lease_refresh(),
        }
    }

    fn on_request_arrival(&mut self, device_idx: usize) {
        if let Some(t) = self.devices[device_idx].arrivals.pop_front() {
            self.queue.schedule(t, Event::RequestArrival { device_idx });
        }
        self.counters.generated += 1;

        let per = self.scenario.config.workload.packet_error_rate;
        if apply_packet_loss(&mut self.rng.loss, per) == Delivery::Dropped {
            self.counters.dropped_loss += 1;
            return;
        }

        let Some(broker_id) = self.home_broker(device_idx) else {
            self.counters.dropped_coverage += 1;
            return;
        };

        let w = &self.scenario.config.workload;
        let size = if w.large_task_fraction > 0.0
            && self.rng.arrivals.gen::<f64>() < w.large_task_fraction
        {
            w.large_task_size
        } else {
            w.small_task_size
        };
        let request = Request {
            id: self.next_request_id,
            device_id: self.scenario.topology.devices[device_idx].id,
            size,
            created_at: self.now,
        };
        self.next_request_id += 1;

        match self.allocate_request(device_idx, broker_id) {
            Ok(decision) => self.dispatch(request, device_idx, broker_id, &decision),
            Err(FederationError::NoFeasibleNode) => {
                self.counters.rejected_infeasible += 1;
            }
            Err(err) => unreachable!("allocation failed on validated topology: {err}"),
        }
    }

    fn home_broker(&self, device_idx: usize) -> Option<u32> {
        // Even a confined deployment still needs radio coverage.
        let ap = self.devices[device_idx].association?;
        Some(match self.confined_broker {
            Some(b) => b,
            None => self.ap_home_broker[&ap],
        })
    }

    /// Predicted time a node would take for one more request, given the
    /// capacity-proportional share of its location's offered load. `None`
    /// means the node cannot carry its share.
    fn node_time(&self, node: &FogNode, location: &FogLocation) -> Option<f64> {
        let offered = self.estimator.estimate(location.id);
        let total_capacity: f64 = location
            .node_ids
            .iter()
            .filter_map(|id| self.scenario.topology.fog_node(*id))
            .map(|n| n.capacity())
            .sum();
        let share = if total_capacity > 0.0 { node.capacity() / total_capacity } else { 0.0 };
        model::avg_waiting_time(node.server_count, offered * share, node.service_rate).ok()
    }

    /// Availability of the redundancy pool backing a node: its location's
    /// member set.
    fn location_availability(&self, location: &FogLocation) -> f64 {
        let probs: Vec<f64> = location
            .node_ids
            .iter()
            .filter_map(|id| self.scenario.topology.fog_node(*id))
            .map(|n| n.failure_prob)
            .collect();
        federation::availability(&probs).unwrap_or(0.0)
    }

    fn allocate_request(
        &mut self,
        device_idx: usize,
        broker_id: u32,
    ) -> Result<AllocationDecision, FederationError> {
        let topo = &self.scenario.topology;
        let params = &self.scenario.params;
        let broker = topo.broker(broker_id).expect("validated broker");
        let home = topo.location_of_broker(broker_id).expect("validated location");
        let device_pos = self.devices[device_idx].position;
        let d_bu = distance(broker.position, device_pos);

        let mut locals = Vec::new();
        let home_avail = self.location_availability(home);
        for node_id in &home.node_ids {
            let node = topo.fog_node(*node_id).expect("validated node");
            let Some(t_node) = self.node_time(node, home) else { continue };
            let Ok(response) = federation::local_response_time(&[t_node], d_bu, params) else {
                continue;
            };
            locals.push(Candidate {
                node_id: node.id,
                kind: AllocationKind::Local,
                response_s: federation::response_time(response, 0.0).total_s,
                price: node.price,
                availability: home_avail,
                energy_j: self.nodes[self.node_index[&node.id]].projected_energy_j(self.now),
            });
        }

        let mut leased = Vec::new();
        for lc in federation::lease_candidates(broker, topo, params, self.estimator.estimates())? {
            let node = topo.fog_node(lc.node_id).expect("validated node");
            let location = topo.location(lc.location_id).expect("validated location");
            let Some(t_node) = self.node_time(node, location) else { continue };
            let Ok(response) = federation::leased_response_time(&[t_node], &[lc.delay_cost.total])
            else {
                continue;
            };
            leased.push(Candidate {
                node_id: node.id,
                kind: AllocationKind::Leased,
                response_s: federation::response_time(0.0, response).total_s,
                price: node.price,
                availability: self.location_availability(location),
                energy_j: self.nodes[self.node_index[&node.id]].projected_energy_j(self.now),
            });
        }

        let cloud: Vec<Candidate> = topo
            .cloud_sinks
            .iter()
            .map(|sink| Candidate {
                node_id: sink.id,
                kind: AllocationKind::Cloud,
                response_s: sink.latency_s,
                price: sink.price,
                availability: 1.0,
                energy_j: 0.0,
            })
            .collect();

        let constraints = &self.scenario.constraints;
        match self.scenario.config.model.allocation {
            AllocationPolicy::Fra => allocate(&locals, &leased, &cloud, constraints),
            AllocationPolicy::Random => {
                for tier in [&locals, &leased, &cloud] {
                    let feasible: Vec<&Candidate> = tier
                        .iter()
                        .filter(|c| {
                            c.price <= constraints.max_price
                                && c.availability >= constraints.min_availability
                        })
                        .collect();
                    if feasible.is_empty() {
                        continue;
                    }
                    let pick = feasible[self.rng.policy.gen_range(0..feasible.len())];
                    return Ok(AllocationDecision {
                        node_id: pick.node_id,
                        kind: pick.kind,
                        predicted_response_s: pick.response_s,
                        cost: pick.price,
                        availability: pick.availability,
                    });
                }
                Err(FederationError::NoFeasibleNode)
            }
        }
    }

    fn dispatch(
        &mut self,
        request: Request,
        device_idx: usize,
        broker_id: u32,
        decision: &AllocationDecision,
    ) {
        self.counters.in_flight += 1;
        let topo = &self.scenario.topology;
        let params = &self.scenario.params;
        match decision.kind {
            AllocationKind::Cloud => {
                let sink = topo
                    .cloud_sinks
                    .iter()
                    .find(|s| s.id == decision.node_id)
                    .expect("cloud decision targets a sink");
                self.queue.schedule(
                    self.now + sink.latency_s,
                    Event::ServiceComplete {
                        target: CompletionTarget::Cloud(sink.id),
                        job: Job { request, kind: AllocationKind::Cloud },
                    },
                );
            }
            kind => {
                let node = topo.fog_node(decision.node_id).expect("fog decision targets a node");
                self.estimator.record_arrival(node.location_id, request.size);
                let broker = topo.broker(broker_id).expect("validated broker");
                let access_leg = params.beta2_s_per_m
                    * distance(broker.position, self.devices[device_idx].position);
                let transit = match kind {
                    AllocationKind::Local => {
                        access_leg + params.hop_count as f64 * params.cloud_comm_cost_s
                    }
                    AllocationKind::Leased => {
                        let target = topo
                            .location(node.location_id)
                            .and_then(|l| topo.broker(l.broker_id))
                            .expect("validated lease target");
                        access_leg
                            + federation::leg_delay(
                                topo,
                                params,
                                broker.id,
                                target.id,
                                broker.position,
                                target.position,
                            )
                    }
                    AllocationKind::Cloud => unreachable!(),
                };
                self.queue.schedule(
                    self.now + transit,
                    Event::ServiceStart {
                        node_idx: self.node_index[&node.id],
                        job: Job { request, kind },
                    },
                );
            }
        }
    }

    fn draw_service_time(&mut self, node_idx: usize, size: f64) -> f64 {
        let rate = self.nodes[node_idx].service_rate / size;
        Exp::new(rate).expect("positive rate").sample(&mut self.rng.service)
    }

    fn on_service_start(&mut self, node_idx: usize, job: Job) {
        match self.nodes[node_idx].present(self.now, job) {
            Admission::Started(job) => {
                let duration = self.draw_service_time(node_idx, job.request.size);
                self.queue.schedule(
                    self.now + duration,
                    Event::ServiceComplete { target: CompletionTarget::Fog(node_idx), job },
                );
            }
            Admission::Queued => {}
            Admission::Rejected(_) => {
                self.counters.rejected_overflow += 1;
                self.counters.in_flight -= 1;
            }
        }
    }

    fn on_service_complete(&mut self, target: CompletionTarget, job: Job) {
        let node_id = match target {
            CompletionTarget::Fog(node_idx) => {
                let latency = self.now - job.request.created_at;
                self.nodes[node_idx].finish_one(self.now, latency);
                if let Some(next) = self.nodes[node_idx].pop_next() {
                    let duration = self.draw_service_time(node_idx, next.request.size);
                    self.queue.schedule(
                        self.now + duration,
                        Event::ServiceComplete {
                            target: CompletionTarget::Fog(node_idx),
                            job: next,
                        },
                    );
                }
                self.nodes[node_idx].node_id
            }
            CompletionTarget::Cloud(sink_id) => sink_id,
        };
        match job.kind {
            AllocationKind::Local => self.counters.completed_local += 1,
            AllocationKind::Leased => self.counters.completed_leased += 1,
            AllocationKind::Cloud => self.counters.completed_cloud += 1,
        }
        self.counters.in_flight -= 1;
        self.served_devices.insert(job.request.device_id);
        self.latencies.push(LatencySample {
            request_id: job.request.id,
            created_at_s: job.request.created_at,
            completed_at_s: self.now,
            node_id,
            kind: job.kind,
        });
    }

    fn on_mobility_tick(&mut self) {
        let topo = &self.scenario.topology;
        let tick = self.scenario.config.mobility.tick_s;
        for (idx, dev) in self.devices.iter_mut().enumerate() {
            let spec = &topo.devices[idx];
            advance(&mut dev.mobility, &spec.mobility, topo.arena_size_m, tick, &mut self.rng.mobility);
            dev.position = dev.mobility.position;
            let event = handover(dev.position, spec.radio_range_m, dev.association, &topo.access_points);
            if let Handover::Switch { .. } = event {
                self.counters.handovers += 1;
            }
            dev.association = event.association(dev.association);
        }
        let next = self.now + tick;
        if next <= self.horizon() {
            self.queue.schedule(next, Event::MobilityTick);
        }
    }

    fn on_metrics_tick(&mut self) {
        let interval = self.now - self.last_metrics_t;
        if interval > 0.0 {
            for rt in &mut self.nodes {
                rt.advance_to(self.now);
                let utilization = rt.interval_busy_ss / (rt.servers as f64 * interval);
                let mean_latency = if rt.interval_completed > 0 {
                    rt.interval_latency_sum_s / rt.interval_completed as f64
                } else {
                    0.0
                };
                self.intervals.push(MetricsRecord {
                    t_s: self.now,
                    node_id: rt.node_id,
                    utilization,
                    queue_len: rt.queue.len(),
                    completed: rt.interval_completed,
                    mean_latency_s: mean_latency,
                    energy_j: rt.interval_energy_j,
                });
                rt.reset_interval();
            }
            self.last_metrics_t = self.now;
        }
        if self.now < self.horizon() {
            let next = (self.now + self.scenario.config.run.metrics_interval_s).min(self.horizon());
            self.queue.schedule(next, Event::MetricsTick);
        }
    }

    fn on_lease_refresh(&mut self) {
        self.estimator.roll_window();
        let next = self.now + self.scenario.config.model.estimator_window_s;
        if next <= self.horizon() {
            self.queue.schedule(next, Event::LeaseRefresh);
        }
    }

    fn finish(self) -> Result<MetricsReport, EngineError> {
        let c = &self.counters;
        let generated = c.generated;
        let (completed, dropped, rejected) = (c.completed(), c.dropped(), c.rejected());
        if generated != completed + dropped + rejected + c.in_flight {
            return Err(EngineError::ConservationViolated {
                generated,
                completed,
                dropped,
                rejected,
                in_flight: c.in_flight,
            });
        }

        let latencies_s: Vec<f64> = self.latencies.iter().map(|s| s.latency_s()).collect();
        let mean_latency_s = if latencies_s.is_empty() {
            0.0
        } else {
            latencies_s.iter().sum::<f64>() / latencies_s.len() as f64
        };
        let summary = RunSummary {
            duration_s: self.scenario.config.run.duration_s,
            seed: self.seed,
            devices: self.scenario.topology.devices.len() as u32,
            locations: self.scenario.topology.locations.len() as u32,
            fog_nodes: self.scenario.topology.fog_nodes.len() as u32,
            generated,
            completed,
            completed_local: c.completed_local,
            completed_leased: c.completed_leased,
            completed_cloud: c.completed_cloud,
            dropped,
            dropped_loss: c.dropped_loss,
            dropped_coverage: c.dropped_coverage,
            rejected,
            in_flight: c.in_flight,
            handovers: c.handovers,
            supported_users: self.served_devices.len() as u32,
            mean_latency_s,
            p95_latency_s: p95(&latencies_s),
            total_energy_j: self.nodes.iter().map(|n| n.energy_j).sum(),
        };
        Ok(MetricsReport { intervals: self.intervals, latencies: self.latencies, summary })
    }
}

/// Per-node cumulative energy at the end of a run, in node-id order.
/// Convenience for energy-balance analyses.
pub fn per_node_energy(report: &MetricsReport) -> BTreeMap<u32, f64> {
    let mut map: BTreeMap<u32, f64> = BTreeMap::new();
    for r in &report.intervals {
        *map.entry(r.node_id).or_insert(0.0) += r.energy_j;
    }
    map
}
