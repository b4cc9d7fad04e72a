//! The event queue: a min-heap keyed by (timestamp, sequence number), so
//! simultaneous events dispatch in scheduling order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::domain::Request;
use crate::federation::AllocationKind;

/// A request in flight toward or inside a node.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Job {
    pub request: Request,
    pub kind: AllocationKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum CompletionTarget {
    /// Index into the engine's node runtimes.
    Fog(usize),
    /// Cloud sink id; no runtime to update.
    Cloud(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Event {
    /// A device emits a request.
    RequestArrival { device_idx: usize },
    /// A dispatched request reaches its node and service starts (or the
    /// request queues).
    ServiceStart { node_idx: usize, job: Job },
    /// Service finishes at a fog node or the cloud sink returns.
    ServiceComplete { target: CompletionTarget, job: Job },
    MobilityTick,
    MetricsTick,
    LeaseRefresh,
}

#[derive(Debug)]
pub(crate) struct Scheduled {
    pub at: f64,
    pub seq: u64,
    pub event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.at == other.at && self.seq == other.seq
    }
}
impl Eq for Scheduled {}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want earliest first.
        other
            .at
            .total_cmp(&self.at)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Default)]
pub(crate) struct EventQueue {
    heap: BinaryHeap<Scheduled>,
    next_seq: u64,
}

impl EventQueue {
    pub fn schedule(&mut self, at: f64, event: Event) {
        debug_assert!(at.is_finite(), "non-finite event time");
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Scheduled { at, seq, event });
    }

    pub fn pop(&mut self) -> Option<Scheduled> {
        self.heap.pop()
    }
}
