//! Deterministic discrete-event engine.
//!
//! Events fire in `(fire_at, seq)` order, where `seq` is a monotone
//! insertion counter: two events scheduled for the same instant execute
//! in the order they were scheduled. A single run is strictly
//! single-threaded; independent runs share nothing mutable.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use super::time::SimTime;

/// Handle returned by [`EventQueue::schedule`], usable for cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventId(u64);

#[derive(Debug)]
struct Queued<A> {
    fire_at: SimTime,
    seq: u64,
    action: A,
}

impl<A> PartialEq for Queued<A> {
    fn eq(&self, other: &Self) -> bool {
        self.fire_at == other.fire_at && self.seq == other.seq
    }
}
impl<A> Eq for Queued<A> {}
impl<A> PartialOrd for Queued<A> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<A> Ord for Queued<A> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.fire_at, self.seq).cmp(&(other.fire_at, other.seq))
    }
}

/// Something that consumes the events popped by the engine.
pub trait Handler<A> {
    fn handle(&mut self, queue: &mut EventQueue<A>, action: A);
}

impl<A, F: FnMut(&mut EventQueue<A>, A)> Handler<A> for F {
    fn handle(&mut self, queue: &mut EventQueue<A>, action: A) {
        self(queue, action)
    }
}

/// Time-ordered event queue with deterministic tie-breaking.
#[derive(Debug)]
pub struct EventQueue<A> {
    heap: BinaryHeap<Reverse<Queued<A>>>,
    now: SimTime,
    next_seq: u64,
    cancelled: HashSet<u64>,
    scheduled: u64,
    cancelled_count: u64,
    executed: u64,
}

impl<A> Default for EventQueue<A> {
    fn default() -> Self {
        Self::new()
    }
}

impl<A> EventQueue<A> {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            now: SimTime::ZERO,
            next_seq: 0,
            cancelled: HashSet::new(),
            scheduled: 0,
            cancelled_count: 0,
            executed: 0,
        }
    }

    /// Current simulation time.
    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Enqueue `action` to fire at `at`.
    ///
    /// Scheduling in the past is a contract violation and aborts the run.
    pub fn schedule(&mut self, at: SimTime, action: A) -> EventId {
        assert!(
            at >= self.now,
            "schedule in the past: at={} now={}",
            at,
            self.now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.scheduled += 1;
        self.heap.push(Reverse(Queued {
            fire_at: at,
            seq,
            action,
        }));
        EventId(seq)
    }

    /// Schedule relative to the current time.
    pub fn schedule_in(&mut self, delay: SimTime, action: A) -> EventId {
        self.schedule(self.now + delay, action)
    }

    /// Cancel a pending event. Cancelling an already-fired or unknown id is
    /// a no-op and returns false.
    pub fn cancel(&mut self, id: EventId) -> bool {
        if id.0 >= self.next_seq || !self.cancelled.insert(id.0) {
            return false;
        }
        self.cancelled_count += 1;
        true
    }

    /// Run every event with `fire_at <= until`, in order, leaving the clock
    /// at `until`. Returns the number of events executed by this call.
    pub fn run_until<H: Handler<A>>(&mut self, until: SimTime, handler: &mut H) -> u64 {
        let start_executed = self.executed;
        while let Some(Reverse(head)) = self.heap.peek() {
            if head.fire_at > until {
                break;
            }
            let Reverse(ev) = self.heap.pop().unwrap();
            if self.cancelled.remove(&ev.seq) {
                continue;
            }
            debug_assert!(ev.fire_at >= self.now, "clock must not decrease");
            self.now = ev.fire_at;
            self.executed += 1;
            handler.handle(self, ev.action);
        }
        if until > self.now {
            self.now = until;
        }
        self.executed - start_executed
    }

    pub fn is_empty(&self) -> bool {
        self.heap.len() == self.cancelled.len()
    }

    /// (scheduled, cancelled, executed) so far.
    pub fn counters(&self) -> (u64, u64, u64) {
        (self.scheduled, self.cancelled_count, self.executed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect_run(
        queue: &mut EventQueue<u32>,
        until: SimTime,
    ) -> (Vec<(SimTime, u32)>, u64) {
        let mut log = Vec::new();
        let n = queue.run_until(until, &mut |q: &mut EventQueue<u32>, a| {
            log.push((q.now(), a));
        });
        (log, n)
    }

    #[test]
    fn single_event_fires_at_its_time() {
        let mut q = EventQueue::new();
        q.schedule(SimTime::from_millis(5), 1);
        let (log, n) = collect_run(&mut q, SimTime::from_millis(10));
        assert_eq!(n, 1);
        assert_eq!(log, vec![(SimTime::from_millis(5), 1)]);
        assert_eq!(q.now(), SimTime::from_millis(10));
    }

    #[test]
    fn equal_timestamps_fire_in_insertion_order() {
        let mut q = EventQueue::new();
        q.schedule(SimTime::from_millis(5), 1);
        q.schedule(SimTime::from_millis(5), 2);
        let (log, _) = collect_run(&mut q, SimTime::from_millis(10));
        assert_eq!(log, vec![
            (SimTime::from_millis(5), 1),
            (SimTime::from_millis(5), 2),
        ]);
    }

    #[test]
    fn cancelled_event_never_executes() {
        let mut q = EventQueue::new();
        let id = q.schedule(SimTime::from_millis(5), 1);
        assert!(q.cancel(id));
        assert!(!q.cancel(id));
        let (log, n) = collect_run(&mut q, SimTime::from_millis(10));
        assert_eq!(n, 0);
        assert!(log.is_empty());
        let (scheduled, cancelled, executed) = q.counters();
        assert_eq!(executed, scheduled - cancelled);
    }

    #[test]
    fn empty_queue_run_advances_clock() {
        let mut q: EventQueue<u32> = EventQueue::new();
        let (log, n) = collect_run(&mut q, SimTime::from_secs(1));
        assert_eq!(n, 0);
        assert!(log.is_empty());
        assert_eq!(q.now(), SimTime::from_secs(1));
    }

    #[test]
    fn run_boundary_is_inclusive() {
        let mut q = EventQueue::new();
        q.schedule(SimTime::from_millis(1), 1);
        q.schedule(SimTime::from_millis(2), 2);
        q.schedule(SimTime::from_millis(3), 3);
        let (log, n) = collect_run(&mut q, SimTime::from_millis(2));
        assert_eq!(n, 2);
        assert_eq!(log.len(), 2);
        // the third event is still pending
        let (log2, n2) = collect_run(&mut q, SimTime::from_millis(3));
        assert_eq!(n2, 1);
        assert_eq!(log2, vec![(SimTime::from_millis(3), 3)]);
    }

    #[test]
    fn child_scheduled_during_run_executes_in_same_run() {
        // action 0 schedules a child one millisecond later
        let mut q = EventQueue::new();
        q.schedule(SimTime::from_millis(1), 0u32);
        let mut log = Vec::new();
        q.run_until(SimTime::from_millis(10), &mut |q: &mut EventQueue<u32>, a| {
            log.push((q.now(), a));
            if a == 0 {
                q.schedule_in(SimTime::from_millis(1), 99);
            }
        });
        assert_eq!(log, vec![
            (SimTime::from_millis(1), 0),
            (SimTime::from_millis(2), 99),
        ]);
    }

    #[test]
    #[should_panic(expected = "schedule in the past")]
    fn scheduling_in_the_past_panics() {
        let mut q = EventQueue::new();
        q.schedule(SimTime::from_millis(5), 1);
        q.run_until(SimTime::from_millis(10), &mut |_: &mut EventQueue<u32>, _| {});
        q.schedule(SimTime::from_millis(5), 2);
    }

    #[test]
    fn executed_equals_scheduled_minus_cancelled() {
        let mut q = EventQueue::new();
        let mut ids = Vec::new();
        for i in 0..100u32 {
            ids.push(q.schedule(SimTime::from_micros(i as u64 * 10), i));
        }
        for id in ids.iter().step_by(3) {
            q.cancel(*id);
        }
        q.run_until(SimTime::from_secs(1), &mut |_: &mut EventQueue<u32>, _| {});
        let (scheduled, cancelled, executed) = q.counters();
        assert_eq!(executed, scheduled - cancelled);
        assert!(q.is_empty());
    }
}
