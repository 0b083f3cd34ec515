//! Event queue of the simulation: a min-heap ordered by time with an
//! insertion sequence number as the tie-break, so runs with identical
//! configs replay identically.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// What happens when an event fires. `token` indexes the engine's pending
/// request table.
#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    RequestArrival { proxy: usize, class: usize },
    SearchComplete { token: usize },
    TransferComplete { token: usize },
    PortRelease { proxy: usize, partition: usize, class: usize },
    SessionEnd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub seq: u64,
    pub kind: EventKind,
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap and we want earliest first.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Time-ordered event queue. Events beyond the horizon are discarded at
/// insertion; the run ends at the horizon anyway and this keeps every
/// queued timestamp inside [0, horizon].
#[derive(Debug)]
pub struct EventQueue {
    heap: BinaryHeap<Event>,
    horizon: f64,
    next_seq: u64,
}

impl EventQueue {
    pub fn new(horizon: f64) -> Self {
        Self { heap: BinaryHeap::new(), horizon, next_seq: 0 }
    }

    /// Schedules `kind` at `time`; returns false if the event fell past the
    /// horizon and was dropped.
    pub fn push(&mut self, time: f64, kind: EventKind) -> bool {
        debug_assert!(time >= 0.0);
        if time > self.horizon {
            return false;
        }
        self.heap.push(Event { time, seq: self.next_seq, kind });
        self.next_seq += 1;
        true
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
