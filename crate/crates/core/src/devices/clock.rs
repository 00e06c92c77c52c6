use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

#[derive(Debug)]
struct Entry<T> {
    at_ms: u64,
    seq: u64,
    item: T,
}

impl<T> PartialEq for Entry<T> {
    fn eq(&self, other: &Self) -> bool {
        (self.at_ms, self.seq) == (other.at_ms, other.seq)
    }
}

impl<T> Eq for Entry<T> {}

impl<T> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Entry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.at_ms, self.seq).cmp(&(other.at_ms, other.seq))
    }
}

/// Millisecond simulation clock with an agenda of pending items.
///
/// Items due at the same instant fire in scheduling order. Time only moves
/// forward.
#[derive(Debug)]
pub struct VirtualClock<T> {
    now_ms: u64,
    next_seq: u64,
    pending: BinaryHeap<Reverse<Entry<T>>>,
}

impl<T> Default for VirtualClock<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> VirtualClock<T> {
    pub fn new() -> Self {
        Self {
            now_ms: 0,
            next_seq: 0,
            pending: BinaryHeap::new(),
        }
    }

    pub fn now_ms(&self) -> u64 {
        self.now_ms
    }

    pub fn schedule_after(&mut self, delay_ms: u64, item: T) {
        let at_ms = self.now_ms.saturating_add(delay_ms);
        self.next_seq += 1;
        self.pending.push(Reverse(Entry {
            at_ms,
            seq: self.next_seq,
            item,
        }));
    }

    pub fn next_due(&self) -> Option<u64> {
        self.pending.peek().map(|Reverse(e)| e.at_ms)
    }

    /// Pops the earliest item due at or before `until_ms`, moving the clock to its time.
    pub fn pop_due(&mut self, until_ms: u64) -> Option<T> {
        if self.next_due()? > until_ms {
            return None;
        }
        let Reverse(entry) = self.pending.pop()?;
        self.now_ms = self.now_ms.max(entry.at_ms);
        Some(entry.item)
    }

    /// Moves the clock forward to `t_ms`; earlier times are ignored.
    pub fn advance_to(&mut self, t_ms: u64) {
        self.now_ms = self.now_ms.max(t_ms);
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_in_time_then_schedule_order() {
        let mut c = VirtualClock::new();
        c.schedule_after(500, "b");
        c.schedule_after(100, "a");
        c.schedule_after(500, "c");
        assert_eq!(c.pop_due(1000), Some("a"));
        assert_eq!(c.now_ms(), 100);
        assert_eq!(c.pop_due(1000), Some("b"));
        assert_eq!(c.pop_due(1000), Some("c"));
        assert_eq!(c.now_ms(), 500);
        assert_eq!(c.pop_due(1000), None);
    }

    #[test]
    fn respects_horizon_and_never_rewinds() {
        let mut c = VirtualClock::new();
        c.schedule_after(2000, ());
        assert_eq!(c.pop_due(1999), None);
        c.advance_to(1500);
        c.advance_to(10);
        assert_eq!(c.now_ms(), 1500);
        assert_eq!(c.pop_due(2000), Some(()));
        assert_eq!(c.now_ms(), 2000);
    }
}
