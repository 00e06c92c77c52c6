//! The two Exp. 2 chains: listing, state space size, and the two measures
//! at a few horizons.

use evolve::ctmc::{baseline_model, build_explicit, expected_lost, proposed_model, reach_probability, Exp2Params};
use num_rational::Rational64;

fn main() {
    let p = Exp2Params::with_conv_mean(Rational64::new(1, 4));
    println!("{}", proposed_model(&p));
    for (name, model) in [("baseline", baseline_model(&p)), ("proposed conv=0.25", proposed_model(&p))] {
        let mc = build_explicit(&model).unwrap();
        println!("{name}: {} states, {} transitions", mc.num_states(), mc.transition_count());
        for t in [20.0, 60.0, 100.0] {
            let reach = reach_probability(&mc, |s| s.int("emb_st") == p.st_max, t);
            println!("  T={t:>5}: P(emb_st = st_max) = {reach:.6}, E[lost] = {:.4}", expected_lost(&mc, t));
        }
    }
}
