//! Shared helpers for the integration suites: independent reference
//! implementations (path search, exhaustive game-tree evaluation) and
//! seeded generators for random nets, states, and scenario documents.
//!
//! The reference implementations deliberately use different algorithms
//! from the library (an iterative worklist instead of recursive
//! depth-first search, a memo-free tree walk instead of the memoized
//! solver) so agreement between the two is evidence, not tautology.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand::rngs::StdRng;

use scpn::game::{self, DefenderAction, GameConfig, GameState};
use scpn::net::{self, Asset, Connection, ScpnNet, ThreatToken, Vulnerability};
use scpn::scenario::{AssetDoc, ConnectionDoc, ScenarioDoc, VulnerabilityDoc};
use scpn::ssa::{RolloutMode, SsaOptions};

/// Every simple path between two nodes of a directed edge list, as node
/// sequences, found with an iterative worklist. Results come back
/// sorted lexicographically.
pub fn brute_force_simple_paths(
    edges: &[(String, String)],
    entry: &str,
    target: &str,
) -> Vec<Vec<String>> {
    let mut found = Vec::new();
    let mut work = vec![vec![entry.to_string()]];
    while let Some(prefix) = work.pop() {
        let last = prefix.last().expect("prefixes are never empty").clone();
        // A simple path ends the first time it reaches the target: any
        // continuation would have to revisit it.
        if last == target && (prefix.len() > 1 || entry == target) {
            found.push(prefix);
            continue;
        }
        for (source, next) in edges {
            if *source == last && !prefix.contains(next) {
                let mut longer = prefix.clone();
                longer.push(next.clone());
                work.push(longer);
            }
        }
    }
    found.sort();
    found
}

/// Converts the library's connection-sequence paths into the node
/// sequences the brute-force search produces.
pub fn paths_as_node_sequences(entry: &str, paths: &[Vec<Connection>]) -> Vec<Vec<String>> {
    paths
        .iter()
        .map(|path| {
            let mut nodes = vec![entry.to_string()];
            nodes.extend(path.iter().map(|c| c.target.clone()));
            nodes
        })
        .collect()
}

/// Damage standing on the element a defender move touches, rebuilt from
/// the public damage functions: the node plus its incident paths, or
/// the one path being cut.
fn oracle_acted_damage(s: &GameState, action: &DefenderAction) -> f64 {
    match action {
        DefenderAction::Idle => 0.0,
        DefenderAction::FixVulnerability(id) | DefenderAction::RemoveNode(id) => {
            let node = s.node(id).expect("action targets a known node");
            let incident: f64 = s
                .path_states
                .iter()
                .filter(|p| &p.source == id || &p.target == id)
                .map(|p| game::path_damage(p, &s.node_states))
                .sum();
            game::node_damage(node) + incident
        }
        DefenderAction::CutPath { source, target } => game::path_damage(
            s.path(source, target).expect("action targets a known path"),
            &s.node_states,
        ),
    }
}

/// Reference game value: plain exhaustive recursion over the full tree
/// with no memoization, kept as close to the definitions as possible.
/// Ties break toward the first action in the deterministic ordering,
/// matching the solver.
pub fn oracle_value(s: &GameState, cfg: &GameConfig, depth: u32) -> f64 {
    if depth == 0 {
        return 0.0;
    }
    let (attacker_actions, defender_actions) = game::legal_actions(s);

    let mut best_d = defender_actions[0].clone();
    for d in &defender_actions[1..] {
        if game::strategy_variation(s, d, cfg) > game::strategy_variation(s, &best_d, cfg) {
            best_d = d.clone();
        }
    }
    let defender_term = match best_d {
        DefenderAction::Idle => 0.0,
        _ => -oracle_acted_damage(s, &best_d) + game::strategy_variation(s, &best_d, cfg),
    };

    let mut best_ev = f64::NEG_INFINITY;
    for a in &attacker_actions {
        let ev: f64 = game::transition(s, a, &best_d)
            .expect("legal actions transition cleanly")
            .iter()
            .map(|(succ, p)| p * oracle_value(succ, cfg, depth - 1))
            .sum();
        if ev > best_ev {
            best_ev = ev;
        }
    }
    game::attacker_reward(s) + defender_term + cfg.discount * best_ev
}

/// The threat id every generated net and scenario uses.
pub const GENERATED_THREAT: &str = "worm";

/// Raw ingredients of a generated net, kept separate so tests can
/// relabel or extend them and rebuild.
pub struct NetParts {
    pub assets: Vec<Asset>,
    pub connections: Vec<Connection>,
    pub infected: BTreeSet<String>,
}

/// Random ingredients for a single-threat net with at most `max_nodes`
/// nodes and `max_paths` connections. Most nodes expose an exploitable
/// vulnerability and at least one starts infected, so the resulting
/// game trees are non-trivial.
pub fn random_net_parts(rng: &mut StdRng, max_nodes: usize, max_paths: usize) -> NetParts {
    let node_count = rng.gen_range(1..=max_nodes);
    let ids: Vec<String> = (0..node_count).map(|i| format!("H{i}")).collect();

    let assets: Vec<Asset> = ids
        .iter()
        .map(|id| {
            let mut vulnerabilities = Vec::new();
            if rng.gen_bool(0.75) {
                vulnerabilities.push(Vulnerability {
                    vul_id: format!("{id}-V1"),
                    impact: f64::from(rng.gen_range(0..=100u32)) / 10.0,
                    exploitable_by: BTreeSet::from([GENERATED_THREAT.to_string()]),
                });
            }
            Asset {
                id: id.clone(),
                name: format!("host {id}"),
                asset_level: rng.gen_range(1..=5u8),
                vulnerabilities,
            }
        })
        .collect();

    // Shuffle all distinct ordered pairs and keep a random prefix, so
    // connections are unique and never self-loops.
    let mut pairs = Vec::new();
    for i in 0..node_count {
        for j in 0..node_count {
            if i != j {
                pairs.push((i, j));
            }
        }
    }
    pairs.shuffle(rng);
    let path_count = rng.gen_range(0..=max_paths.min(pairs.len()));
    let connections: Vec<Connection> = pairs[..path_count]
        .iter()
        .map(|&(i, j)| Connection {
            source: ids[i].clone(),
            target: ids[j].clone(),
            path_level: rng.gen_range(1..=5u8),
            exploitability: rng.gen_range(1..=5u8),
        })
        .collect();

    let mut infected = BTreeSet::new();
    for _ in 0..rng.gen_range(1..=2u32) {
        infected.insert(ids[rng.gen_range(0..ids.len())].clone());
    }
    NetParts {
        assets,
        connections,
        infected,
    }
}

/// Builds the net the parts describe.
pub fn build_from_parts(parts: &NetParts) -> ScpnNet {
    let threats = [ThreatToken {
        threat_id: GENERATED_THREAT.to_string(),
        color: GENERATED_THREAT.to_string(),
    }];
    let infections = BTreeMap::from([(GENERATED_THREAT.to_string(), parts.infected.clone())]);
    net::build_net(&parts.assets, &parts.connections, &threats, &infections)
        .expect("generated nets satisfy the construction rules")
}

/// A random small net with one threat; see [`random_net_parts`].
pub fn random_net(rng: &mut StdRng, max_nodes: usize, max_paths: usize) -> ScpnNet {
    build_from_parts(&random_net_parts(rng, max_nodes, max_paths))
}

/// Renames node `H{i}` to `R{perm[i]}` everywhere, producing a net that
/// differs from the original only in labels (and hence in canonical
/// ordering).
pub fn relabel_parts(parts: &NetParts, perm: &[usize]) -> NetParts {
    let rename = |id: &str| -> String {
        let i: usize = id[1..].parse().expect("generated ids are H<i>");
        format!("R{}", perm[i])
    };
    NetParts {
        assets: parts
            .assets
            .iter()
            .map(|a| Asset {
                id: rename(&a.id),
                name: a.name.clone(),
                asset_level: a.asset_level,
                vulnerabilities: a.vulnerabilities.clone(),
            })
            .collect(),
        connections: parts
            .connections
            .iter()
            .map(|c| Connection {
                source: rename(&c.source),
                target: rename(&c.target),
                path_level: c.path_level,
                exploitability: c.exploitability,
            })
            .collect(),
        infected: parts.infected.iter().map(|id| rename(id)).collect(),
    }
}

/// A game state drawn from `net` with randomly toggled infection,
/// removal, mitigation, and cut flags: arbitrary but well-formed
/// states for probing the transition function.
pub fn random_state(rng: &mut StdRng, net: &ScpnNet, threat_id: &str) -> GameState {
    let mut s = GameState::from_net(net, threat_id, 0).expect("threat exists in the net");
    for node in &mut s.node_states {
        if rng.gen_bool(0.35) {
            node.infected = !node.infected;
        }
        if rng.gen_bool(0.2) {
            node.removed = true;
        }
        if rng.gen_bool(0.2) {
            node.mitigated = true;
        }
    }
    for path in &mut s.path_states {
        if rng.gen_bool(0.25) {
            path.cut = true;
        }
    }
    s
}

/// A random directed graph on up to `max_nodes` nodes, as (nodes,
/// edges). Each ordered pair becomes an edge with probability 0.3.
pub fn random_digraph(rng: &mut StdRng, max_nodes: usize) -> (Vec<String>, Vec<(String, String)>) {
    let node_count = rng.gen_range(2..=max_nodes);
    let ids: Vec<String> = (0..node_count).map(|i| format!("G{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..node_count {
        for j in 0..node_count {
            if i != j && rng.gen_bool(0.3) {
                edges.push((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    (ids, edges)
}

/// Wraps a raw digraph into a net where every node is vulnerable to the
/// generated threat, so the threat subnet covers the whole graph and
/// the library's path search sees exactly these edges.
pub fn digraph_as_net(nodes: &[String], edges: &[(String, String)]) -> ScpnNet {
    let assets: Vec<Asset> = nodes
        .iter()
        .map(|id| Asset {
            id: id.clone(),
            name: format!("host {id}"),
            asset_level: 3,
            vulnerabilities: vec![Vulnerability {
                vul_id: format!("{id}-V1"),
                impact: 5.0,
                exploitable_by: BTreeSet::from([GENERATED_THREAT.to_string()]),
            }],
        })
        .collect();
    let connections: Vec<Connection> = edges
        .iter()
        .map(|(source, target)| Connection {
            source: source.clone(),
            target: target.clone(),
            path_level: 3,
            exploitability: 3,
        })
        .collect();
    let threats = [ThreatToken {
        threat_id: GENERATED_THREAT.to_string(),
        color: GENERATED_THREAT.to_string(),
    }];
    let infections = BTreeMap::from([(
        GENERATED_THREAT.to_string(),
        BTreeSet::from([nodes[0].clone()]),
    )]);
    net::build_net(&assets, &connections, &threats, &infections)
        .expect("digraph wrappers satisfy the construction rules")
}

/// A random valid scenario document: random topology, random but
/// in-range game and aggregation settings, occasional CVSS annotations
/// and multi-threat declarations.
pub fn random_scenario(rng: &mut StdRng, index: usize) -> ScenarioDoc {
    let node_count = rng.gen_range(1..=6);
    let ids: Vec<String> = (0..node_count).map(|i| format!("A{i}")).collect();
    let mut threats = vec![GENERATED_THREAT.to_string()];
    if rng.gen_bool(0.3) {
        threats.push("rootkit".to_string());
    }

    let assets: Vec<AssetDoc> = ids
        .iter()
        .map(|id| {
            let mut vulnerabilities = Vec::new();
            for v in 0..rng.gen_range(0..=2u32) {
                vulnerabilities.push(VulnerabilityDoc {
                    vul_id: format!("{id}-V{v}"),
                    impact: f64::from(rng.gen_range(0..=100u32)) / 10.0,
                    cvss_base_score: if rng.gen_bool(0.5) {
                        Some(f64::from(rng.gen_range(0..=100u32)) / 10.0)
                    } else {
                        None
                    },
                    exploitable_by: vec![threats[rng.gen_range(0..threats.len())].clone()],
                });
            }
            AssetDoc {
                id: id.clone(),
                name: format!("asset {id}"),
                asset_level: rng.gen_range(1..=5u8),
                vulnerabilities,
            }
        })
        .collect();

    let mut pairs = Vec::new();
    for i in 0..node_count {
        for j in 0..node_count {
            if i != j {
                pairs.push((i, j));
            }
        }
    }
    pairs.shuffle(rng);
    let path_count = rng.gen_range(0..=pairs.len().min(6));
    let connections: Vec<ConnectionDoc> = pairs[..path_count]
        .iter()
        .map(|&(i, j)| ConnectionDoc {
            source: ids[i].clone(),
            target: ids[j].clone(),
            path_level: rng.gen_range(1..=5u8),
            exploitability: rng.gen_range(1..=5u8),
        })
        .collect();

    let mut initial_infections = BTreeMap::new();
    for threat in &threats {
        if rng.gen_bool(0.8) {
            let mut places = BTreeSet::new();
            for _ in 0..rng.gen_range(1..=2u32) {
                places.insert(ids[rng.gen_range(0..ids.len())].clone());
            }
            initial_infections.insert(threat.clone(), places.into_iter().collect());
        }
    }

    ScenarioDoc {
        scenario_id: format!("generated-{index}"),
        threats,
        initial_infections,
        game: GameConfig {
            discount: f64::from(rng.gen_range(0..=99u32)) / 100.0,
            horizon: rng.gen_range(1..=12),
            restore_fraction: f64::from(rng.gen_range(0..=100u32)) / 100.0,
            cut_penalty: f64::from(rng.gen_range(0..=300u32)) / 100.0,
            removal_penalty: f64::from(rng.gen_range(0..=300u32)) / 100.0,
        },
        ssa: SsaOptions {
            radix: 1.5 + f64::from(rng.gen_range(0..=85u32)) / 10.0,
            mode: if rng.gen_bool(0.5) {
                RolloutMode::Expectation
            } else {
                RolloutMode::MonteCarlo
            },
            trials: rng.gen_range(1..=50),
            seed: rng.gen_range(0..=i64::MAX as u64),
        },
        assets,
        connections,
    }
}
