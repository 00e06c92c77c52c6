//! The converter on loopback sockets with a simulated light bulb: sends
//! three `switch` events and drives the control endpoint.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::sync::{mpsc, Arc, Mutex};
use std::thread;
use std::time::Duration;

use evolve::cli::{run, DeviceEndpoint, LogStyle, RunSetup, SharedOut};
use evolve::devices::{builtin_handlers, DeviceKind, HandlerConfig, SimulatedDevice};
use evolve::evolution::gate_for_runtime;
use evolve::fixtures;
use evolve::mapek::{Converter, Knowledge};

fn main() {
    let pair = gate_for_runtime(&fixtures::light_bulb_pair()).unwrap();
    let (handlers, _) = builtin_handlers(DeviceKind::LightBulb, &HandlerConfig::default());
    let setup = RunSetup {
        converter: Converter::new(Knowledge::build(&pair, handlers).unwrap()),
        device: DeviceEndpoint::Simulated(SimulatedDevice::light_bulb()),
        listen: "127.0.0.1:0".into(),
        control: "127.0.0.1:0".into(),
        style: LogStyle::Tabular,
        paused: false,
    };
    let out: SharedOut = Arc::new(Mutex::new(Box::new(std::io::stdout())));
    let (tx, rx) = mpsc::channel();
    let server = thread::spawn(move || run(setup, out, &mut |line| tx.send(line.to_string()).unwrap()));

    let banner = rx.recv().unwrap();
    let addr = |key: &str| banner.split_whitespace().find_map(|w| w.strip_prefix(key)).unwrap().to_string();
    let mut controller = TcpStream::connect(addr("controller=")).unwrap();
    let mut control = TcpStream::connect(addr("control=")).unwrap();
    let mut replies = BufReader::new(control.try_clone().unwrap());
    let mut ask = |cmd: &str| {
        writeln!(control, "{cmd}").unwrap();
        let mut line = String::new();
        replies.read_line(&mut line).unwrap();
        println!("> {cmd}\n< {}", line.trim());
    };

    for _ in 0..3 {
        writeln!(controller, "switch").unwrap();
        thread::sleep(Duration::from_millis(100));
        ask("status");
    }
    ask("exit");
    server.join().unwrap().unwrap();
}
