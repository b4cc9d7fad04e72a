//! Mutable per-node state: parallel servers, a FIFO queue, and lazily
//! integrated busy-time and energy accumulators.

use std::collections::VecDeque;

use crate::domain::FogNode;
use crate::engine::events::Job;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Admission {
    /// A server was free; the caller draws the service time.
    Started(Job),
    Queued,
    /// Queue bound hit; the job bounces back to the caller.
    Rejected(Job),
}

#[derive(Debug, Clone)]
pub(crate) struct NodeRuntime {
    pub node_id: u32,
    pub servers: u32,
    pub service_rate: f64,
    pub queue_limit: Option<u32>,
    pub power_idle_w: f64,
    pub power_busy_w: f64,

    pub busy: u32,
    pub queue: VecDeque<Job>,
    last_update_s: f64,

    pub busy_server_seconds: f64,
    pub energy_j: f64,

    // Current metrics interval.
    pub interval_busy_ss: f64,
    pub interval_energy_j: f64,
    pub interval_completed: u64,
    pub interval_latency_sum_s: f64,
}

impl NodeRuntime {
    pub fn new(node: &FogNode, queue_limit: Option<u32>) -> Self {
        Self {
            node_id: node.id,
            servers: node.server_count,
            service_rate: node.service_rate,
            queue_limit,
            power_idle_w: node.power_idle_w,
            power_busy_w: node.power_busy_w,
            busy: 0,
            queue: VecDeque::new(),
            last_update_s: 0.0,
            busy_server_seconds: 0.0,
            energy_j: 0.0,
            interval_busy_ss: 0.0,
            interval_energy_j: 0.0,
            interval_completed: 0,
            interval_latency_sum_s: 0.0,
        }
    }

    /// Integrates busy time and energy up to `t`.
    pub fn advance_to(&mut self, t: f64) {
        let dt = t - self.last_update_s;
        if dt <= 0.0 {
            return;
        }
        let busy_ss = self.busy as f64 * dt;
        let busy_frac = self.busy as f64 / self.servers as f64;
        let energy = (self.power_idle_w * (1.0 - busy_frac) + self.power_busy_w * busy_frac) * dt;
        self.busy_server_seconds += busy_ss;
        self.energy_j += energy;
        self.interval_busy_ss += busy_ss;
        self.interval_energy_j += energy;
        self.last_update_s = t;
    }

    /// Energy reading at `t` without mutating the accumulators; keeps
    /// allocation snapshots consistent across nodes updated at different
    /// times.
    pub fn projected_energy_j(&self, t: f64) -> f64 {
        let dt = (t - self.last_update_s).max(0.0);
        let busy_frac = self.busy as f64 / self.servers as f64;
        self.energy_j
            + (self.power_idle_w * (1.0 - busy_frac) + self.power_busy_w * busy_frac) * dt
    }

    /// A request reaches the node: start it on a free server, queue it, or
    /// bounce it when the queue bound is hit.
    pub fn present(&mut self, t: f64, job: Job) -> Admission {
        self.advance_to(t);
        if self.busy < self.servers {
            self.busy += 1;
            return Admission::Started(job);
        }
        if let Some(limit) = self.queue_limit {
            if self.queue.len() >= limit as usize {
                return Admission::Rejected(job);
            }
        }
        self.queue.push_back(job);
        Admission::Queued
    }

    /// Books one completion with its end-to-end latency.
    pub fn finish_one(&mut self, t: f64, latency_s: f64) {
        self.advance_to(t);
        debug_assert!(self.busy > 0, "completion on an idle node");
        self.busy -= 1;
        self.interval_completed += 1;
        self.interval_latency_sum_s += latency_s;
    }

    /// Pulls the next queued job onto the freed server, if any.
    pub fn pop_next(&mut self) -> Option<Job> {
        let job = self.queue.pop_front()?;
        self.busy += 1;
        Some(job)
    }

    pub fn reset_interval(&mut self) {
        self.interval_busy_ss = 0.0;
        self.interval_energy_j = 0.0;
        self.interval_completed = 0;
        self.interval_latency_sum_s = 0.0;
    }
}
