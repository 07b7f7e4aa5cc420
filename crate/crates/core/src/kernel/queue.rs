//! Future event set ordered by `(time, seq)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    BurstArrival(usize),
    SegmentEnd(usize),
    SimulationEnd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub seq: u64,
    pub kind: EventKind,
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Event>,
    next_seq: u64,
    clock: f64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Schedules `kind` at `time`. Scheduling into the past is a bug.
    pub fn schedule(&mut self, time: f64, kind: EventKind) -> u64 {
        assert!(
            time >= self.clock && !time.is_nan(),
            "event {kind:?} scheduled at {time} before clock {}",
            self.clock
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event { time, seq, kind });
        seq
    }

    pub fn peek(&self) -> Option<&Event> {
        self.heap.peek()
    }

    /// Removes the earliest event and advances the clock to it.
    pub fn pop(&mut self) -> Option<Event> {
        let ev = self.heap.pop()?;
        assert!(ev.time >= self.clock, "event queue went backwards");
        self.clock = ev.time;
        Some(ev)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn min_order() {
        let mut q = EventQueue::new();
        q.schedule(5.0, EventKind::SimulationEnd);
        q.schedule(3.0, EventKind::BurstArrival(0));
        assert_eq!(q.pop().unwrap().time, 3.0);
        assert_eq!(q.clock(), 3.0);
        assert_eq!(q.pop().unwrap().time, 5.0);
        assert!(q.pop().is_none());
    }

    #[test]
    fn ties_by_insertion() {
        let mut q = EventQueue::new();
        let a = q.schedule(3.0, EventKind::BurstArrival(1));
        let b = q.schedule(3.0, EventKind::BurstArrival(2));
        assert!(a < b);
        assert_eq!(q.pop().unwrap().kind, EventKind::BurstArrival(1));
        assert_eq!(q.pop().unwrap().kind, EventKind::BurstArrival(2));
    }

    #[test]
    #[should_panic]
    fn past_scheduling_panics() {
        let mut q = EventQueue::new();
        q.schedule(3.0, EventKind::SimulationEnd);
        q.pop();
        q.schedule(2.0, EventKind::SimulationEnd);
    }

    #[test]
    fn random_pushes_pop_sorted() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut q = EventQueue::new();
        let mut oracle = Vec::new();
        for i in 0..100_000 {
            // Coarse times force many ties.
            let t = rng.random_range(0..1000) as f64;
            let seq = q.schedule(t, EventKind::BurstArrival(i));
            oracle.push((t, seq));
        }
        oracle.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let popped: Vec<(f64, u64)> = std::iter::from_fn(|| q.pop()).map(|e| (e.time, e.seq)).collect();
        assert_eq!(popped, oracle);
    }
}
