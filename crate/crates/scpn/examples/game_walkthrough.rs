//! Walks through the attacker/defender game on a two-node net: state,
//! legal moves, one-step rewards, and the solved horizon value.
//!
//! Run with `cargo run --example game_walkthrough`.

use std::collections::{BTreeMap, BTreeSet};

use scpn::game::{self, GameConfig, GameState};
use scpn::net::{build_net, Asset, Connection, ThreatToken, Vulnerability};

fn main() {
    // ANCHOR: setup
    // An infected workstation with one hop to a file server.
    let threat = "ransomware".to_string();
    let assets = [
        Asset {
            id: "workstation".into(),
            name: "desk machine".into(),
            asset_level: 3,
            vulnerabilities: vec![Vulnerability {
                vul_id: "WKS-1".into(),
                impact: 10.0,
                exploitable_by: BTreeSet::from([threat.clone()]),
            }],
        },
        Asset {
            id: "server".into(),
            name: "file server".into(),
            asset_level: 4,
            vulnerabilities: vec![Vulnerability {
                vul_id: "SRV-1".into(),
                impact: 5.0,
                exploitable_by: BTreeSet::from([threat.clone()]),
            }],
        },
    ];
    let connections = [Connection {
        source: "workstation".into(),
        target: "server".into(),
        path_level: 2,
        exploitability: 3,
    }];
    let threats = [ThreatToken {
        threat_id: threat.clone(),
        color: threat.clone(),
    }];
    let infections =
        BTreeMap::from([(threat.clone(), BTreeSet::from(["workstation".to_string()]))]);
    let net = build_net(&assets, &connections, &threats, &infections).unwrap();

    // Epoch-zero state of the ransomware subnet.
    let state = GameState::from_net(&net, &threat, 0).unwrap();
    // ANCHOR_END: setup

    // ANCHOR: rewards
    // Standing damage: the workstation is infected (level 3, impact 10)
    // and its outgoing path is live (level 2, exploitability 3).
    println!("attacker reward: {}", game::attacker_reward(&state));

    let (attacks, defenses) = game::legal_actions(&state);
    println!("attacker can: {attacks:?}");
    println!("defender can: {defenses:?}");

    // Each defense is assessed by restored damage minus its cost.
    let cfg = GameConfig {
        horizon: 2,
        ..GameConfig::default()
    };
    for d in &defenses {
        println!(
            "{d:?}: variation {:.3}",
            game::strategy_variation(&state, d, &cfg)
        );
    }
    // ANCHOR_END: rewards

    // ANCHOR: solve
    // Worst-case discounted damage over the horizon, with the root
    // moves both players commit to.
    let solution = game::solve(&state, &cfg);
    println!(
        "value {:.3}, attacker plays {:?}, defender plays {:?}",
        solution.value, solution.attacker_policy, solution.defender_policy
    );
    // ANCHOR_END: solve
}
