//! Stochastic colored Petri net core.
//!
//! Places are IoT assets, colored tokens are threats sitting on a
//! compromised asset, and transitions fire tokens along directed
//! connections with a probability derived from the connection's
//! exploitability rank. The module builds validated nets, slices out
//! the subnet affected by one threat, enumerates simple attack paths,
//! and performs one seeded Monte-Carlo firing step.
//!
//! All query operations are pure and return results in lexicographic
//! id order, so repeated calls and CSV dumps are diffable.
//!
//! ```
//! use std::collections::{BTreeMap, BTreeSet};
//! use scpn::net::{build_net, enumerate_attack_paths, fire_step, Asset, Connection,
//!     ThreatToken, Vulnerability};
//!
//! // An infected gateway with one hop to a vulnerable sensor.
//! let worm = "worm".to_string();
//! let assets = [
//!     Asset { id: "a".into(), name: "gateway".into(), asset_level: 5,
//!         vulnerabilities: vec![] },
//!     Asset { id: "b".into(), name: "sensor".into(), asset_level: 1,
//!         vulnerabilities: vec![Vulnerability { vul_id: "B-1".into(), impact: 4.0,
//!             exploitable_by: BTreeSet::from([worm.clone()]) }] },
//! ];
//! let connections = [Connection { source: "a".into(), target: "b".into(),
//!     path_level: 2, exploitability: 5 }];
//! let threats = [ThreatToken { threat_id: worm.clone(), color: worm.clone() }];
//! let infections = BTreeMap::from([(worm.clone(), BTreeSet::from(["a".to_string()]))]);
//! let net = build_net(&assets, &connections, &threats, &infections).unwrap();
//!
//! // One simple path leads from the gateway to the sensor.
//! let paths = enumerate_attack_paths(&net, &worm, "a", "b").unwrap();
//! assert_eq!(paths.len(), 1);
//!
//! // Exploitability 5 always fires, so one step infects the sensor.
//! let after = fire_step(&net, 7, 0);
//! assert!(after.places["b"].infected_by(&worm));
//! ```

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Token multiplicity saturates here: more tokens mean a more serious
/// compromise, but unbounded counts would blow up the state space.
pub const TOKEN_CAP: u32 = 3;

/// Maps the 1-5 exploitability rank of a connection to the probability
/// that a propagation attempt over it succeeds.
pub fn firing_probability(exploitability: u8) -> f64 {
    f64::from(exploitability) / 5.0
}

/// Validation errors raised while constructing or querying a net.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    /// Two assets, threats, connections, or vulnerabilities share an id.
    #[error("duplicate identifier: {0}")]
    DuplicateId(String),
    /// A connection endpoint names a place that does not exist.
    #[error("connection endpoint names no existing place: {0}")]
    DanglingEndpoint(String),
    /// A threat id is not in the net's threat list.
    #[error("unknown threat: {0}")]
    UnknownThreat(String),
    /// A place id is not in the net's place set.
    #[error("unknown place: {0}")]
    UnknownPlace(String),
    /// A connection loops back onto its own source.
    #[error("connection source equals target: {0}")]
    SelfLoop(String),
}

/// A weakness of one asset, with the damage magnitude an exploiting
/// threat can realize and the set of threats able to exploit it.
#[derive(Debug, Clone, PartialEq)]
pub struct Vulnerability {
    pub vul_id: String,
    /// Damage magnitude on the 0-10 scale.
    pub impact: f64,
    /// Threat ids that can exploit this vulnerability.
    pub exploitable_by: BTreeSet<String>,
}

/// One IoT device: a place of the net.
#[derive(Debug, Clone, PartialEq)]
pub struct Asset {
    pub id: String,
    pub name: String,
    /// Importance rank, 1 (lowest) to 5 (highest).
    pub asset_level: u8,
    pub vulnerabilities: Vec<Vulnerability>,
}

impl Asset {
    /// True when any vulnerability of this asset is exploitable by
    /// `threat_id`.
    pub fn vulnerable_to(&self, threat_id: &str) -> bool {
        self.vulnerabilities
            .iter()
            .any(|v| v.exploitable_by.contains(threat_id))
    }

    /// Largest impact among vulnerabilities exploitable by `threat_id`,
    /// or 0 when none is.
    pub fn max_exploitable_impact(&self, threat_id: &str) -> f64 {
        self.vulnerabilities
            .iter()
            .filter(|v| v.exploitable_by.contains(threat_id))
            .map(|v| v.impact)
            .fold(0.0, f64::max)
    }
}

/// One threat type; the token color that marks compromised places.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ThreatToken {
    pub threat_id: String,
    /// Display tag for listings and plots.
    pub color: String,
}

/// A place plus its current marking: how many tokens of each threat
/// sit on the asset. Multiplicity is capped at [`TOKEN_CAP`].
#[derive(Debug, Clone, PartialEq)]
pub struct Place {
    pub asset: Asset,
    /// threat id -> token count (absent means zero).
    pub tokens: BTreeMap<String, u32>,
}

impl Place {
    /// Token count for one threat.
    pub fn token_count(&self, threat_id: &str) -> u32 {
        self.tokens.get(threat_id).copied().unwrap_or(0)
    }

    /// True when at least one token of the threat sits here.
    pub fn infected_by(&self, threat_id: &str) -> bool {
        self.token_count(threat_id) > 0
    }

    fn deposit(&mut self, threat_id: &str) {
        let count = self.tokens.entry(threat_id.to_string()).or_insert(0);
        *count = (*count + 1).min(TOKEN_CAP);
    }
}

/// A directed propagation path between two places.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Connection {
    pub source: String,
    pub target: String,
    /// Importance rank of the path, 1-5.
    pub path_level: u8,
    /// How usable the path is for an attacker, 1-5.
    pub exploitability: u8,
}

impl Connection {
    /// `source->target`, the display form used in errors and listings.
    pub fn label(&self) -> String {
        format!("{}->{}", self.source, self.target)
    }
}

/// The possibility of one threat propagating over one connection,
/// together with its success probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub connection: Connection,
    pub threat_id: String,
    /// Probability in [0, 1] that a firing attempt succeeds.
    pub firing_probability: f64,
}

/// The full net: places, connections, transitions, and threat colors.
///
/// Construct through [`build_net`], which validates referential
/// integrity and derives the transition set.
#[derive(Debug, Clone, PartialEq)]
pub struct ScpnNet {
    /// Places keyed by asset id.
    pub places: BTreeMap<String, Place>,
    /// Connections sorted by (source, target).
    pub connections: Vec<Connection>,
    /// Transitions sorted by (source, target, threat).
    pub transitions: Vec<Transition>,
    /// Threat colors sorted by id.
    pub threats: Vec<ThreatToken>,
}

impl ScpnNet {
    /// True when the threat id is declared in this net.
    pub fn has_threat(&self, threat_id: &str) -> bool {
        self.threats.iter().any(|t| t.threat_id == threat_id)
    }
}

/// The slice of the net affected by a single threat: every node that is
/// infected or exploitable, and every connection between such nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreatSubnet {
    pub threat_id: String,
    /// Affected place ids, sorted.
    pub nodes: Vec<String>,
    /// Connections with both endpoints in `nodes`, sorted.
    pub paths: Vec<Connection>,
}

/// Builds a validated net.
///
/// Each initially infected place receives exactly one token of the
/// threat, and one transition is generated per (connection, threat)
/// pair whose target asset has a vulnerability exploitable by that
/// threat. Errors name the offending identifier.
pub fn build_net(
    assets: &[Asset],
    connections: &[Connection],
    threats: &[ThreatToken],
    initial_infections: &BTreeMap<String, BTreeSet<String>>,
) -> Result<ScpnNet, NetError> {
    // Places, with id uniqueness.
    let mut places: BTreeMap<String, Place> = BTreeMap::new();
    for asset in assets {
        let mut seen_vulns = BTreeSet::new();
        for vuln in &asset.vulnerabilities {
            if !seen_vulns.insert(vuln.vul_id.clone()) {
                return Err(NetError::DuplicateId(vuln.vul_id.clone()));
            }
        }
        let place = Place {
            asset: asset.clone(),
            tokens: BTreeMap::new(),
        };
        if places.insert(asset.id.clone(), place).is_some() {
            return Err(NetError::DuplicateId(asset.id.clone()));
        }
    }

    // Threat colors, with id uniqueness.
    let mut sorted_threats = threats.to_vec();
    sorted_threats.sort();
    for pair in sorted_threats.windows(2) {
        if pair[0].threat_id == pair[1].threat_id {
            return Err(NetError::DuplicateId(pair[0].threat_id.clone()));
        }
    }

    // Connections: endpoints resolve, no self-loops, no duplicates.
    let mut sorted_connections = connections.to_vec();
    sorted_connections.sort();
    let mut seen_edges = BTreeSet::new();
    for conn in &sorted_connections {
        if conn.source == conn.target {
            return Err(NetError::SelfLoop(conn.label()));
        }
        for endpoint in [&conn.source, &conn.target] {
            if !places.contains_key(endpoint) {
                return Err(NetError::DanglingEndpoint(endpoint.clone()));
            }
        }
        if !seen_edges.insert((conn.source.clone(), conn.target.clone())) {
            return Err(NetError::DuplicateId(conn.label()));
        }
    }

    // Initial marking: one token per (threat, place) infection entry.
    for (threat_id, place_ids) in initial_infections {
        if !sorted_threats.iter().any(|t| &t.threat_id == threat_id) {
            return Err(NetError::UnknownThreat(threat_id.clone()));
        }
        for place_id in place_ids {
            let place = places
                .get_mut(place_id)
                .ok_or_else(|| NetError::UnknownPlace(place_id.clone()))?;
            place.deposit(threat_id);
        }
    }

    // Transition generation: a threat can move over a connection only
    // when the target asset exposes a matching vulnerability.
    let mut transitions = Vec::new();
    for conn in &sorted_connections {
        let target = &places[&conn.target];
        for threat in &sorted_threats {
            if target.asset.vulnerable_to(&threat.threat_id) {
                transitions.push(Transition {
                    connection: conn.clone(),
                    threat_id: threat.threat_id.clone(),
                    firing_probability: firing_probability(conn.exploitability),
                });
            }
        }
    }

    Ok(ScpnNet {
        places,
        connections: sorted_connections,
        transitions,
        threats: sorted_threats,
    })
}

/// Extracts the subnet of one threat: infected places union places
/// vulnerable to the threat, plus every connection between them.
pub fn threat_subnet(net: &ScpnNet, threat_id: &str) -> Result<ThreatSubnet, NetError> {
    if !net.has_threat(threat_id) {
        return Err(NetError::UnknownThreat(threat_id.to_string()));
    }
    let nodes: Vec<String> = net
        .places
        .values()
        .filter(|p| p.infected_by(threat_id) || p.asset.vulnerable_to(threat_id))
        .map(|p| p.asset.id.clone())
        .collect(); // BTreeMap iteration keeps this sorted.
    let node_set: BTreeSet<&String> = nodes.iter().collect();
    let paths: Vec<Connection> = net
        .connections
        .iter()
        .filter(|c| node_set.contains(&c.source) && node_set.contains(&c.target))
        .cloned()
        .collect();
    Ok(ThreatSubnet {
        threat_id: threat_id.to_string(),
        nodes,
        paths,
    })
}

/// Enumerates every simple directed path from `entry` to `target` that
/// uses only connections of the threat's subnet.
///
/// Paths are returned as connection sequences in lexicographic order of
/// their node sequences. `entry == target` yields one zero-length path;
/// an unreachable target yields an empty list.
pub fn enumerate_attack_paths(
    net: &ScpnNet,
    threat_id: &str,
    entry: &str,
    target: &str,
) -> Result<Vec<Vec<Connection>>, NetError> {
    for place_id in [entry, target] {
        if !net.places.contains_key(place_id) {
            return Err(NetError::UnknownPlace(place_id.to_string()));
        }
    }
    let subnet = threat_subnet(net, threat_id)?;

    if entry == target {
        return Ok(vec![Vec::new()]);
    }

    // Adjacency restricted to the subnet, neighbors in sorted order so
    // the depth-first emission order is lexicographic.
    let mut adjacency: BTreeMap<&str, Vec<&Connection>> = BTreeMap::new();
    for conn in &subnet.paths {
        adjacency.entry(&conn.source).or_default().push(conn);
    }

    let mut found = Vec::new();
    let mut stack = Vec::new();
    let mut visited = BTreeSet::new();
    visited.insert(entry.to_string());
    dfs_paths(
        entry,
        target,
        &adjacency,
        &mut visited,
        &mut stack,
        &mut found,
    );
    Ok(found)
}

fn dfs_paths(
    here: &str,
    target: &str,
    adjacency: &BTreeMap<&str, Vec<&Connection>>,
    visited: &mut BTreeSet<String>,
    stack: &mut Vec<Connection>,
    found: &mut Vec<Vec<Connection>>,
) {
    let Some(next) = adjacency.get(here) else {
        return;
    };
    for conn in next {
        if visited.contains(&conn.target) {
            continue;
        }
        stack.push((*conn).clone());
        if conn.target == target {
            found.push(stack.clone());
        } else {
            visited.insert(conn.target.clone());
            dfs_paths(&conn.target, target, adjacency, visited, stack, found);
            visited.remove(&conn.target);
        }
        stack.pop();
    }
}

/// Performs one synchronous Monte-Carlo firing step and returns the
/// successor net.
///
/// Enabledness is read from the pre-step marking: every transition
/// whose source place holds a matching token fires independently with
/// its firing probability, depositing a token copy at the target. The
/// source keeps its token: compromise persists when an attack spreads.
/// Identical `(net, rng_seed, step_index)` always produce a
/// bit-identical successor.
pub fn fire_step(net: &ScpnNet, rng_seed: u64, step_index: u64) -> ScpnNet {
    let mut rng = step_rng(rng_seed, step_index);
    let mut next = net.clone();
    for transition in &net.transitions {
        // One draw per transition keeps the stream aligned with the
        // transition list regardless of the current marking.
        let draw: f64 = rng.gen();
        let enabled = net.places[&transition.connection.source].infected_by(&transition.threat_id);
        if enabled && draw < transition.firing_probability {
            next.places
                .get_mut(&transition.connection.target)
                .expect("validated net has all endpoints")
                .deposit(&transition.threat_id);
        }
    }
    next
}

/// Deterministic per-step RNG: the 32-byte seed embeds the caller seed,
/// the step index, and a domain tag so distinct steps never share a
/// stream.
fn step_rng(rng_seed: u64, step_index: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&rng_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&step_index.to_le_bytes());
    seed[16..32].copy_from_slice(b"scpn/fire-step/1");
    ChaCha8Rng::from_seed(seed)
}
