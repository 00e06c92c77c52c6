use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use super::device::{DwellRequest, SimulatedDevice};
use crate::mapek::{DeviceSink, EventQueue, EventSource};
use crate::statechart::EventName;

/// A simulated device on the wall clock; its emissions enter `queue` as device events.
#[derive(Clone)]
pub struct LiveDevice {
    device: Arc<Mutex<SimulatedDevice>>,
    queue: EventQueue,
    started: Instant,
}

impl LiveDevice {
    pub fn new(device: SimulatedDevice, queue: EventQueue) -> Self {
        Self {
            device: Arc::new(Mutex::new(device)),
            queue,
            started: Instant::now(),
        }
    }

    pub fn snapshot(&self) -> SimulatedDevice {
        self.device.lock().unwrap().clone()
    }

    fn now_ms(&self) -> u64 {
        self.started.elapsed().as_millis() as u64
    }

    fn schedule(&self, dwell: Option<DwellRequest>) {
        let Some(d) = dwell else { return };
        let this = self.clone();
        thread::spawn(move || {
            thread::sleep(Duration::from_millis(d.delay_ms));
            let emission = this.device.lock().unwrap().fire_emission(this.now_ms(), d.generation);
            if let Some(em) = emission {
                if this.queue.enqueue(em.event, EventSource::Device).is_ok() {
                    this.schedule(em.next_dwell);
                }
            }
        });
    }
}

impl DeviceSink for LiveDevice {
    fn deliver(&mut self, event: &EventName) -> Result<(), String> {
        let dwell = self.device.lock().unwrap().receive(self.now_ms(), event);
        self.schedule(dwell);
        Ok(())
    }
}
