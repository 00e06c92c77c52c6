//! `evolve run`: the converter on the wall clock behind TCP endpoints.
//!
//! Controller and device connections carry newline-delimited event names.
//! The control endpoint takes `start`, `stop`, `status` and `exit`, one per
//! line, and answers each with one JSON line.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::mpsc::{self, Sender};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use log::{info, warn};

use super::paper::render_paper_record;
use super::LogStyle;
use crate::devices::{LiveDevice, SimulatedDevice};
use crate::mapek::{
    run_loop, ControlCommand, ControlReply, ControlRequest, Converter, DeviceSink, EventQueue, EventSource,
    LoopOptions, StepRecord,
};
use crate::statechart::EventName;

pub type SharedOut = Arc<Mutex<Box<dyn Write + Send>>>;

/// Where forwarded events go.
pub enum DeviceEndpoint {
    Simulated(SimulatedDevice),
    /// Connect to an external device at `host:port`.
    External(String),
}

pub struct RunSetup {
    pub converter: Converter,
    pub device: DeviceEndpoint,
    pub listen: String,
    pub control: String,
    pub style: LogStyle,
    pub paused: bool,
}

fn note(out: &SharedOut, msg: &str) {
    info!("{msg}");
    let mut w = out.lock().unwrap();
    let _ = writeln!(w, "# {msg}");
    let _ = w.flush();
}

struct TcpSink {
    stream: TcpStream,
}

impl DeviceSink for TcpSink {
    fn deliver(&mut self, event: &EventName) -> Result<(), String> {
        self.stream
            .write_all(format!("{event}\n").as_bytes())
            .and_then(|_| self.stream.flush())
            .map_err(|e| e.to_string())
    }
}

/// Reads event names from `stream` into the queue until EOF.
fn pump_events(stream: TcpStream, queue: EventQueue, source: EventSource, out: SharedOut, who: String) {
    let reader = BufReader::new(stream);
    for line in reader.lines() {
        let Ok(line) = line else { break };
        let name = line.trim();
        if name.is_empty() {
            continue;
        }
        match EventName::new(name) {
            Ok(e) => {
                if queue.enqueue(e, source).is_err() {
                    return;
                }
            }
            Err(e) => note(&out, &format!("{who}: ignored {name:?}: {e}")),
        }
    }
    note(&out, &format!("{who} disconnected"));
}

fn serve_control(stream: TcpStream, tx: Sender<ControlRequest>, out: SharedOut, exit_done: Sender<()>) {
    let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_default();
    let Ok(mut writer) = stream.try_clone() else { return };
    for line in BufReader::new(stream).lines() {
        let Ok(line) = line else { break };
        if line.trim().is_empty() {
            continue;
        }
        let reply = match line.parse::<ControlCommand>() {
            Err(e) => ControlReply::Error(e.to_string()),
            Ok(cmd) => {
                let (rtx, rrx) = mpsc::channel();
                if tx.send(ControlRequest::with_reply(cmd, rtx)).is_err() {
                    break;
                }
                match rrx.recv() {
                    Ok(r) => r,
                    Err(_) => break,
                }
            }
        };
        let _ = writeln!(writer, "{}", reply.to_json_line()).and_then(|_| writer.flush());
        if matches!(reply, ControlReply::Ack { command: ControlCommand::Exit, .. }) {
            let _ = exit_done.send(());
            return;
        }
    }
    note(&out, &format!("control {peer} disconnected"));
}

/// Binds, passes `listening controller=<addr> control=<addr>` to `announce`,
/// then runs until `exit`, writing the trace to `out`. Errors are bind or
/// connect failures.
pub fn run(setup: RunSetup, out: SharedOut, announce: &mut dyn FnMut(&str)) -> io::Result<()> {
    let RunSetup {
        mut converter,
        device,
        listen,
        control,
        style,
        paused,
    } = setup;
    let controller_listener = TcpListener::bind(&listen)?;
    let control_listener = TcpListener::bind(&control)?;
    let queue = EventQueue::new();

    let mut sink: Box<dyn DeviceSink> = match device {
        DeviceEndpoint::Simulated(d) => Box::new(LiveDevice::new(d, queue.clone())),
        DeviceEndpoint::External(addr) => {
            let stream = TcpStream::connect(&addr)?;
            stream.set_nodelay(true)?;
            let reader = stream.try_clone()?;
            let (q, o) = (queue.clone(), out.clone());
            thread::spawn(move || pump_events(reader, q, EventSource::Device, o, format!("device {addr}")));
            Box::new(TcpSink { stream })
        }
    };

    announce(&format!(
        "listening controller={} control={}",
        controller_listener.local_addr()?,
        control_listener.local_addr()?
    ));

    {
        let (queue, out) = (queue.clone(), out.clone());
        thread::spawn(move || {
            for conn in controller_listener.incoming() {
                let Ok(stream) = conn else { continue };
                let who = format!("controller {}", stream.peer_addr().map(|a| a.to_string()).unwrap_or_default());
                note(&out, &format!("{who} connected"));
                let (q, o) = (queue.clone(), out.clone());
                thread::spawn(move || pump_events(stream, q, EventSource::Controller, o, who));
            }
        });
    }

    let (ctl_tx, ctl_rx) = mpsc::channel();
    let (done_tx, done_rx) = mpsc::channel();
    {
        let out = out.clone();
        thread::spawn(move || {
            for conn in control_listener.incoming() {
                let Ok(stream) = conn else { continue };
                let (tx, o, d) = (ctl_tx.clone(), out.clone(), done_tx.clone());
                thread::spawn(move || serve_control(stream, tx, o, d));
            }
        });
    }

    let trace_out = out.clone();
    let mut trace = move |r: &StepRecord| {
        let text = match style {
            LogStyle::Tabular => r.to_trace_line() + "\n",
            LogStyle::Paper => render_paper_record(r),
        };
        let mut w = trace_out.lock().unwrap();
        if let Err(e) = w.write_all(text.as_bytes()).and_then(|_| w.flush()) {
            warn!("trace output failed: {e}");
        }
    };
    let options = LoopOptions {
        autostart: !paused,
        ..LoopOptions::default()
    };
    let status = run_loop(&mut converter, &queue, sink.as_mut(), &ctl_rx, &mut trace, &options);
    // let the control connection deliver the exit acknowledgement
    let _ = done_rx.recv_timeout(Duration::from_secs(1));
    note(&out, &format!("{status:?}"));
    Ok(())
}
