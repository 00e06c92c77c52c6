//! Conversion-time sweep with both methods and the ordering checks.
//! Usage: `exp2_sweep [runs]` (default 20000; 0 skips simulation).

use evolve::ctmc::{exp2, Exp2Config};

fn main() {
    let runs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20_000);
    let cfg = Exp2Config {
        times: vec![0.0, 20.0, 60.0, 100.0, 200.0],
        runs,
        ..Exp2Config::default()
    };
    let table = exp2(&cfg).unwrap();
    println!("{:<9} {:>5} {:>5} {:>10} {:>10} method", "model", "conv", "T", "reach", "lost");
    for r in &table.rows {
        let conv = r.conv_mean_s.map_or("-".into(), |c| c.to_string());
        println!("{:<9} {conv:>5} {:>5} {:>10.6} {:>10.4} {:?}", r.model, r.t, r.reach_prob, r.expected_lost, r.method);
    }
    println!("{}", table.verdicts().summary_line());
}
