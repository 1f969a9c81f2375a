//! Computes and compares the situation curves of the two bundled
//! smart-home scenarios.
//!
//! Run with `cargo run --example situation_curves`.

// ANCHOR: curves
use scpn::scenario::{self, builtin_fixtures};
use scpn::ssa;

fn main() {
    let fixtures = builtin_fixtures();
    let mut series = Vec::new();
    for doc in &fixtures {
        let net = scenario::to_net(doc).expect("fixtures build");
        let cfg = scenario::game_config(doc);
        let opts = scenario::ssa_options(doc);
        let s = ssa::situation_series(&doc.scenario_id, &net, &cfg, &opts)
            .expect("fixtures produce a curve");
        print!("{}", ssa::to_csv(&s));
        println!();
        series.push(s);
    }

    let report = ssa::compare(&series[0], &series[1]).expect("same horizon");
    for stats in [&report.left, &report.right] {
        println!(
            "{}: peak {:.6} at tau {}, half-peak at {:?}, area {:.6}",
            stats.scenario_id, stats.peak, stats.peak_tau, stats.time_to_half_peak, stats.auc
        );
    }
    println!("verdict: {}", report.verdict);
}
// ANCHOR_END: curves
