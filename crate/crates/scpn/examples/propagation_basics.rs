//! Builds a three-device net by hand, inspects the threat subnet and
//! its attack paths, then fires one stochastic propagation step.
//!
//! Run with `cargo run --example propagation_basics`.

use std::collections::{BTreeMap, BTreeSet};

use scpn::net::{
    build_net, enumerate_attack_paths, fire_step, threat_subnet, Asset, Connection, ThreatToken,
    Vulnerability,
};

fn main() {
    // ANCHOR: build
    // A router compromised by a worm, with two reachable devices.
    let worm = "worm".to_string();
    let assets = [
        Asset {
            id: "router".into(),
            name: "edge router".into(),
            asset_level: 5,
            vulnerabilities: vec![Vulnerability {
                vul_id: "RTR-1".into(),
                impact: 8.0,
                exploitable_by: BTreeSet::from([worm.clone()]),
            }],
        },
        Asset {
            id: "camera".into(),
            name: "ip camera".into(),
            asset_level: 2,
            vulnerabilities: vec![Vulnerability {
                vul_id: "CAM-1".into(),
                impact: 6.0,
                exploitable_by: BTreeSet::from([worm.clone()]),
            }],
        },
        Asset {
            id: "printer".into(),
            name: "office printer".into(),
            asset_level: 1,
            vulnerabilities: vec![Vulnerability {
                vul_id: "PRN-1".into(),
                impact: 4.0,
                exploitable_by: BTreeSet::from([worm.clone()]),
            }],
        },
    ];
    let connections = [
        Connection {
            source: "router".into(),
            target: "camera".into(),
            path_level: 4,
            exploitability: 4,
        },
        Connection {
            source: "router".into(),
            target: "printer".into(),
            path_level: 2,
            exploitability: 2,
        },
        Connection {
            source: "camera".into(),
            target: "printer".into(),
            path_level: 1,
            exploitability: 5,
        },
    ];
    let threats = [ThreatToken {
        threat_id: worm.clone(),
        color: worm.clone(),
    }];
    // The worm starts on the router.
    let infections = BTreeMap::from([(worm.clone(), BTreeSet::from(["router".to_string()]))]);

    let net = build_net(&assets, &connections, &threats, &infections).unwrap();
    // ANCHOR_END: build

    // ANCHOR: paths
    // The subnet holds every node the worm touches or can exploit.
    let subnet = threat_subnet(&net, &worm).unwrap();
    println!("subnet nodes: {:?}", subnet.nodes);

    // Two ways from the router to the printer, in lexicographic order.
    let paths = enumerate_attack_paths(&net, &worm, "router", "printer").unwrap();
    for path in &paths {
        let mut nodes = vec!["router".to_string()];
        nodes.extend(path.iter().map(|c| c.target.clone()));
        println!("attack path: {}", nodes.join("->"));
    }
    // ANCHOR_END: paths

    // ANCHOR: firing
    // One synchronous step: each transition whose source is infected
    // fires with probability exploitability / 5. A seed fixes the draw.
    let after = fire_step(&net, 42, 0);
    for (id, place) in &after.places {
        println!("{id}: {} worm token(s)", place.token_count(&worm));
    }
    // ANCHOR_END: firing
}
