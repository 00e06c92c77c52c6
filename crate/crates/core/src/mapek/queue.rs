//! Multi-producer, single-consumer FIFO of incoming events.

use std::collections::VecDeque;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use thiserror::Error;

use super::knowledge::{EventSource, IncomingEvent};
use crate::statechart::EventName;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("event queue is closed")]
pub struct QueueClosed;

#[derive(Debug, Default)]
struct Inner {
    events: VecDeque<IncomingEvent>,
    next_seq: u64,
    closed: bool,
}

/// Cloneable handle; all clones share one queue.
#[derive(Debug, Clone, Default)]
pub struct EventQueue {
    inner: Arc<(Mutex<Inner>, Condvar)>,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an event and returns its sequence number (the first is 1).
    pub fn enqueue(&self, name: EventName, source: EventSource) -> Result<u64, QueueClosed> {
        self.push(name, source, None)
    }

    /// Appends an event produced by the state timer of `generation`.
    pub fn enqueue_timer(&self, name: EventName, generation: u64) -> Result<u64, QueueClosed> {
        self.push(name, EventSource::Internal, Some(generation))
    }

    fn push(&self, name: EventName, source: EventSource, timer_generation: Option<u64>) -> Result<u64, QueueClosed> {
        let (lock, cvar) = &*self.inner;
        let mut inner = lock.lock().unwrap();
        if inner.closed {
            return Err(QueueClosed);
        }
        inner.next_seq += 1;
        let seq = inner.next_seq;
        inner.events.push_back(IncomingEvent {
            name,
            source,
            seq,
            timer_generation,
        });
        cvar.notify_one();
        Ok(seq)
    }

    pub fn try_dequeue(&self) -> Option<IncomingEvent> {
        self.inner.0.lock().unwrap().events.pop_front()
    }

    /// Blocks up to `timeout` for an event. Returns `None` on timeout or once closed and drained.
    pub fn dequeue_timeout(&self, timeout: Duration) -> Option<IncomingEvent> {
        let (lock, cvar) = &*self.inner;
        let guard = lock.lock().unwrap();
        let (mut guard, _) = cvar
            .wait_timeout_while(guard, timeout, |inner| inner.events.is_empty() && !inner.closed)
            .unwrap();
        guard.events.pop_front()
    }

    pub fn len(&self) -> usize {
        self.inner.0.lock().unwrap().events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Rejects further producers and wakes any blocked consumer.
    pub fn close(&self) {
        let (lock, cvar) = &*self.inner;
        lock.lock().unwrap().closed = true;
        cvar.notify_all();
    }

    pub fn is_closed(&self) -> bool {
        self.inner.0.lock().unwrap().closed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statechart::event;
    use std::thread;

    #[test]
    fn first_seq_is_one() {
        let q = EventQueue::new();
        assert_eq!(q.enqueue(event("switch"), EventSource::Controller), Ok(1));
        assert_eq!(q.enqueue(event("switch"), EventSource::Controller), Ok(2));
        assert_eq!(q.len(), 2);
    }

    #[test]
    fn producer_thread_orders_after_earlier_events() {
        let q = EventQueue::new();
        q.enqueue(event("clean"), EventSource::Controller).unwrap();
        let producer = q.clone();
        thread::spawn(move || producer.enqueue(event("arriveSpot"), EventSource::Internal).unwrap())
            .join()
            .unwrap();
        assert_eq!(q.try_dequeue().unwrap().name, "clean");
        let e = q.try_dequeue().unwrap();
        assert_eq!((e.name.as_str(), e.source, e.seq), ("arriveSpot", EventSource::Internal, 2));
    }

    #[test]
    fn closed_queue_rejects() {
        let q = EventQueue::new();
        q.close();
        assert_eq!(q.enqueue(event("switch"), EventSource::Controller), Err(QueueClosed));
        assert!(q.dequeue_timeout(Duration::from_millis(1)).is_none());
    }

    #[test]
    fn blocking_dequeue_wakes_on_push() {
        let q = EventQueue::new();
        let producer = q.clone();
        let h = thread::spawn(move || {
            thread::sleep(Duration::from_millis(20));
            producer.enqueue(event("e"), EventSource::Device).unwrap();
        });
        let got = q.dequeue_timeout(Duration::from_secs(5)).unwrap();
        assert_eq!(got.source, EventSource::Device);
        h.join().unwrap();
    }
}
