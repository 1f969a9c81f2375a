//! Finite-horizon attacker/defender game over one threat subnet.
//!
//! The state tracks, per node, whether it is infected, still
//! vulnerable, mitigated, or removed, and per path whether the defender
//! has cut it. Each epoch both players move: the defender's action
//! applies first and deterministically, then the attacker's propagation
//! attempt succeeds with the path's firing probability. The value of a
//! state is the worst-case discounted damage over the remaining
//! horizon, computed by backward recursion with memoization:
//!
//! * the defender picks the action with the best immediate assessment
//!   (damage restored, weighted by the restore fraction, minus the
//!   performance cost of the countermeasure);
//! * the attacker, knowing that choice, picks the propagation with the
//!   highest expected continuation value.
//!
//! Ties go to the first action in the deterministic ordering, with
//! `Idle` ordered before every active move, so solving is reproducible.
//!
//! ```
//! use std::collections::{BTreeMap, BTreeSet};
//! use scpn::game::{self, DefenderAction, GameConfig, GameState};
//! use scpn::net::{build_net, Asset, Connection, ThreatToken, Vulnerability};
//!
//! // One infected workstation, one reachable file server.
//! let threat = "ransomware".to_string();
//! let assets = [
//!     Asset { id: "wks".into(), name: "workstation".into(), asset_level: 3,
//!         vulnerabilities: vec![Vulnerability { vul_id: "W-1".into(), impact: 10.0,
//!             exploitable_by: BTreeSet::from([threat.clone()]) }] },
//!     Asset { id: "srv".into(), name: "server".into(), asset_level: 4,
//!         vulnerabilities: vec![Vulnerability { vul_id: "S-1".into(), impact: 5.0,
//!             exploitable_by: BTreeSet::from([threat.clone()]) }] },
//! ];
//! let connections = [Connection { source: "wks".into(), target: "srv".into(),
//!     path_level: 2, exploitability: 3 }];
//! let threats = [ThreatToken { threat_id: threat.clone(), color: threat.clone() }];
//! let infections = BTreeMap::from([(threat.clone(), BTreeSet::from(["wks".to_string()]))]);
//! let net = build_net(&assets, &connections, &threats, &infections).unwrap();
//!
//! let state = GameState::from_net(&net, &threat, 0).unwrap();
//! // Node damage 3 * 10/10 plus path damage 2 * 3/5.
//! assert!((game::attacker_reward(&state) - 4.2).abs() < 1e-12);
//!
//! // Removing the infected workstation beats every other defense.
//! let cfg = GameConfig { horizon: 2, ..GameConfig::default() };
//! let solution = game::solve(&state, &cfg);
//! assert_eq!(solution.defender_policy, DefenderAction::RemoveNode("wks".into()));
//! assert!((solution.value - 0.3).abs() < 1e-12);
//! ```

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{firing_probability, threat_subnet, NetError, ScpnNet};

/// Errors raised by game operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    /// An action was not legal in the state it was applied to.
    #[error("illegal action: {0}")]
    IllegalAction(String),
    /// The claimed successor state cannot be reached by any single
    /// defender action.
    #[error("state mismatch: {0}")]
    StateMismatch(String),
}

/// Per-node game state.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub place_id: String,
    /// Importance rank of the asset, 1-5.
    pub asset_level: u8,
    /// A threat token sits on the node.
    pub infected: bool,
    /// The node still exposes a vulnerability the threat can exploit.
    pub vulnerable: bool,
    /// Largest impact (0-10) among vulnerabilities exploitable by the
    /// current threat.
    pub max_exploitable_impact: f64,
    /// The defender has taken the node out of the network.
    pub removed: bool,
    /// The defender has fixed the vulnerability.
    pub mitigated: bool,
}

/// Per-path game state.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    pub source: String,
    pub target: String,
    /// Importance rank of the path, 1-5.
    pub path_level: u8,
    /// Usability rank of the path, 1-5.
    pub exploitability: u8,
    /// The defender has severed the path.
    pub cut: bool,
}

/// Joint state of one threat subnet at a decision epoch.
///
/// Node and path lists are kept in lexicographic id order, so equal
/// states compare equal field by field.
#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    pub threat_id: String,
    /// Decision epoch; bookkeeping only, the value of a state depends
    /// on its flags and the remaining depth.
    pub tau: u32,
    pub node_states: Vec<NodeState>,
    pub path_states: Vec<PathState>,
}

impl GameState {
    /// Builds the epoch-`tau` state of `threat_id`'s subnet: infection
    /// from token presence, vulnerability flags from the asset data,
    /// and no defender measure applied yet.
    pub fn from_net(net: &ScpnNet, threat_id: &str, tau: u32) -> Result<GameState, NetError> {
        let subnet = threat_subnet(net, threat_id)?;
        let node_states = subnet
            .nodes
            .iter()
            .map(|id| {
                let place = &net.places[id];
                NodeState {
                    place_id: id.clone(),
                    asset_level: place.asset.asset_level,
                    infected: place.infected_by(threat_id),
                    vulnerable: place.asset.vulnerable_to(threat_id),
                    max_exploitable_impact: place.asset.max_exploitable_impact(threat_id),
                    removed: false,
                    mitigated: false,
                }
            })
            .collect();
        let path_states = subnet
            .paths
            .iter()
            .map(|c| PathState {
                source: c.source.clone(),
                target: c.target.clone(),
                path_level: c.path_level,
                exploitability: c.exploitability,
                cut: false,
            })
            .collect();
        Ok(GameState {
            threat_id: threat_id.to_string(),
            tau,
            node_states,
            path_states,
        })
    }

    /// Node lookup by place id.
    pub fn node(&self, place_id: &str) -> Option<&NodeState> {
        self.node_states.iter().find(|n| n.place_id == place_id)
    }

    pub(crate) fn node_mut(&mut self, place_id: &str) -> Option<&mut NodeState> {
        self.node_states.iter_mut().find(|n| n.place_id == place_id)
    }

    /// Path lookup by endpoints.
    pub fn path(&self, source: &str, target: &str) -> Option<&PathState> {
        self.path_states
            .iter()
            .find(|p| p.source == source && p.target == target)
    }

    fn path_mut(&mut self, source: &str, target: &str) -> Option<&mut PathState> {
        self.path_states
            .iter_mut()
            .find(|p| p.source == source && p.target == target)
    }

    /// Compact key over the mutable flags; the static structure (ids,
    /// levels, impacts) is fixed within one solve, and `tau` does not
    /// influence the value.
    fn dynamic_key(&self) -> Vec<u8> {
        let mut key = Vec::with_capacity(self.node_states.len() + self.path_states.len());
        for n in &self.node_states {
            key.push(
                u8::from(n.infected)
                    | (u8::from(n.vulnerable) << 1)
                    | (u8::from(n.mitigated) << 2)
                    | (u8::from(n.removed) << 3),
            );
        }
        for p in &self.path_states {
            key.push(u8::from(p.cut));
        }
        key
    }
}

/// One attacker move. `Idle` orders before every propagation, and
/// propagations order by (source, target).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum AttackerAction {
    Idle,
    Propagate { source: String, target: String },
}

/// One defender move. The derived ordering (`Idle`, then fixes, cuts,
/// removals, each by id) is the tie-break order used by the solver.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum DefenderAction {
    Idle,
    FixVulnerability(String),
    CutPath { source: String, target: String },
    RemoveNode(String),
}

/// Tunable constants of the game; the `[game]` section of a scenario
/// file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    /// Discount on future damage, in [0, 1).
    pub discount: f64,
    /// Number of look-ahead epochs, at least 1.
    pub horizon: u32,
    /// Fraction of the removed damage credited to a countermeasure,
    /// in [0, 1].
    pub restore_fraction: f64,
    /// Performance cost per path level of cutting a path.
    pub cut_penalty: f64,
    /// Performance cost per asset level of removing a node.
    pub removal_penalty: f64,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            discount: 0.9,
            horizon: 10,
            restore_fraction: 0.5,
            cut_penalty: 0.2,
            removal_penalty: 0.6,
        }
    }
}

/// Damage an infected node currently inflicts: its importance scaled by
/// the worst exploitable impact. Removed or mitigated nodes inflict
/// nothing.
pub fn node_damage(n: &NodeState) -> f64 {
    if n.infected && !n.removed && !n.mitigated {
        f64::from(n.asset_level) * n.max_exploitable_impact / 10.0
    } else {
        0.0
    }
}

/// Damage an uncut path currently inflicts: its importance scaled by
/// its usability, counted only while the source node is infected and
/// still on the network.
pub fn path_damage(p: &PathState, node_states: &[NodeState]) -> f64 {
    if p.cut {
        return 0.0;
    }
    match node_states.iter().find(|n| n.place_id == p.source) {
        Some(src) if src.infected && !src.removed => {
            f64::from(p.path_level) * f64::from(p.exploitability) / 5.0
        }
        _ => 0.0,
    }
}

/// One-step damage of the whole state: every infected node plus every
/// path emanating from one, each path counted once.
pub fn attacker_reward(s: &GameState) -> f64 {
    let nodes: f64 = s.node_states.iter().map(node_damage).sum();
    let paths: f64 = s
        .path_states
        .iter()
        .map(|p| path_damage(p, &s.node_states))
        .sum();
    nodes + paths
}

/// One-step reward of the defender for the move that turned `s_before`
/// into `s_after`: the standing damage counts against the defender, and
/// the move is credited with the damage it restored minus its
/// performance cost.
///
/// `s_after` must be reachable from `s_before` by exactly one legal
/// defender action (`Idle` included); the epoch counter is unchanged by
/// defender moves.
pub fn defender_reward(
    s_before: &GameState,
    s_after: &GameState,
    cfg: &GameConfig,
) -> Result<f64, GameError> {
    let (_, defender_actions) = legal_actions(s_before);
    for action in &defender_actions {
        let candidate = apply_defender(s_before, action);
        if candidate == *s_after {
            return Ok(-attacker_reward(s_before) + strategy_variation(s_before, action, cfg));
        }
    }
    Err(GameError::StateMismatch(
        "no single defender action maps the first state onto the second".to_string(),
    ))
}

/// Immediate assessment of one defender move: restored damage weighted
/// by the restore fraction, minus the performance cost of the
/// countermeasure.
pub fn strategy_variation(s: &GameState, action: &DefenderAction, cfg: &GameConfig) -> f64 {
    let after = apply_defender(s, action);
    let restored = attacker_reward(s) - attacker_reward(&after);
    cfg.restore_fraction * restored - performance_cost(s, action, cfg)
}

/// Network-performance cost of a countermeasure. Fixing a vulnerability
/// is free; cutting a path or removing a node degrades the network in
/// proportion to the importance of what was lost.
pub fn performance_cost(s: &GameState, action: &DefenderAction, cfg: &GameConfig) -> f64 {
    match action {
        DefenderAction::Idle | DefenderAction::FixVulnerability(_) => 0.0,
        DefenderAction::CutPath { source, target } => {
            let path = s.path(source, target).expect("legal action targets a path");
            cfg.cut_penalty * f64::from(path.path_level)
        }
        DefenderAction::RemoveNode(id) => {
            let node = s.node(id).expect("legal action targets a node");
            cfg.removal_penalty * f64::from(node.asset_level)
        }
    }
}

/// Applies one defender action; the epoch counter is left unchanged.
pub(crate) fn apply_defender(s: &GameState, action: &DefenderAction) -> GameState {
    let mut next = s.clone();
    match action {
        DefenderAction::Idle => {}
        DefenderAction::FixVulnerability(id) => {
            let node = next.node_mut(id).expect("legal action targets a node");
            node.mitigated = true;
            node.vulnerable = false;
        }
        DefenderAction::CutPath { source, target } => {
            next.path_mut(source, target)
                .expect("legal action targets a path")
                .cut = true;
        }
        DefenderAction::RemoveNode(id) => {
            next.node_mut(id)
                .expect("legal action targets a node")
                .removed = true;
        }
    }
    next
}

/// True when a propagation attempt over (source, target) can do
/// anything in `s`: the path is uncut, the source is infected and still
/// on the network, and the target is exploitable and not yet infected.
pub(crate) fn propagate_enabled(s: &GameState, source: &str, target: &str) -> bool {
    let Some(path) = s.path(source, target) else {
        return false;
    };
    let (Some(src), Some(tgt)) = (s.node(source), s.node(target)) else {
        return false;
    };
    !path.cut
        && src.infected
        && !src.removed
        && tgt.vulnerable
        && !tgt.mitigated
        && !tgt.removed
        && !tgt.infected
}

/// Every legal move of both players, in the deterministic tie-break
/// order (`Idle` first).
pub fn legal_actions(s: &GameState) -> (Vec<AttackerAction>, Vec<DefenderAction>) {
    let mut attacker = vec![AttackerAction::Idle];
    for p in &s.path_states {
        if propagate_enabled(s, &p.source, &p.target) {
            attacker.push(AttackerAction::Propagate {
                source: p.source.clone(),
                target: p.target.clone(),
            });
        }
    }

    let mut defender = vec![DefenderAction::Idle];
    for n in &s.node_states {
        // A vulnerability can be patched before the threat arrives;
        // once the node is infected or removed, patching is pointless.
        if n.vulnerable && !n.mitigated && !n.infected && !n.removed {
            defender.push(DefenderAction::FixVulnerability(n.place_id.clone()));
        }
    }
    for p in &s.path_states {
        if !p.cut {
            defender.push(DefenderAction::CutPath {
                source: p.source.clone(),
                target: p.target.clone(),
            });
        }
    }
    for n in &s.node_states {
        if !n.removed {
            defender.push(DefenderAction::RemoveNode(n.place_id.clone()));
        }
    }
    (attacker, defender)
}

/// Applies one joint move and returns every successor with its
/// probability.
///
/// The defender's action applies first and deterministically. A
/// propagation attempt that is still enabled afterwards succeeds with
/// the path's firing probability (success listed first) and fails with
/// the complement; a disabled or idle attack yields a single successor.
/// The epoch counter increments in every successor, and probabilities
/// always sum to one.
pub fn transition(
    s: &GameState,
    a: &AttackerAction,
    d: &DefenderAction,
) -> Result<Vec<(GameState, f64)>, GameError> {
    let (attacker_legal, defender_legal) = legal_actions(s);
    if !attacker_legal.contains(a) {
        return Err(GameError::IllegalAction(format!("{a:?}")));
    }
    if !defender_legal.contains(d) {
        return Err(GameError::IllegalAction(format!("{d:?}")));
    }
    Ok(successors(s, a, d))
}

/// `transition` without the legality checks, for the solver's inner
/// loop where actions come straight from `legal_actions`.
fn successors(s: &GameState, a: &AttackerAction, d: &DefenderAction) -> Vec<(GameState, f64)> {
    let mut base = apply_defender(s, d);
    base.tau += 1;
    match a {
        AttackerAction::Idle => vec![(base, 1.0)],
        AttackerAction::Propagate { source, target } => {
            // Re-checked after the defender's move: a cut path, a
            // removed endpoint, or a fixed target nullifies the attempt.
            if !propagate_enabled(&base, source, target) {
                return vec![(base, 1.0)];
            }
            let p = firing_probability(
                base.path(source, target)
                    .expect("enabled propagation has a path")
                    .exploitability,
            );
            let mut success = base.clone();
            success
                .node_mut(target)
                .expect("enabled propagation has a target")
                .infected = true;
            if p >= 1.0 {
                vec![(success, 1.0)]
            } else {
                vec![(success, p), (base, 1.0 - p)]
            }
        }
    }
}

/// Damage attributable to the subnet element a defender move acts on:
/// the node's own damage plus its incident paths, or the single path
/// for a cut. This is the slice of the standing damage the move's
/// assessment is scoped to.
fn acted_damage(s: &GameState, action: &DefenderAction) -> f64 {
    match action {
        DefenderAction::Idle => 0.0,
        DefenderAction::FixVulnerability(id) | DefenderAction::RemoveNode(id) => {
            let node = s.node(id).expect("legal action targets a node");
            let incident: f64 = s
                .path_states
                .iter()
                .filter(|p| &p.source == id || &p.target == id)
                .map(|p| path_damage(p, &s.node_states))
                .sum();
            node_damage(node) + incident
        }
        DefenderAction::CutPath { source, target } => {
            let path = s.path(source, target).expect("legal action targets a path");
            path_damage(path, &s.node_states)
        }
    }
}

/// The defender-side term of the recursive value for one move: the
/// acted element's standing damage counts against the defender, and the
/// move's assessment counts for it. `Idle` contributes nothing.
fn defender_value_term(s: &GameState, action: &DefenderAction, cfg: &GameConfig) -> f64 {
    match action {
        DefenderAction::Idle => 0.0,
        _ => -acted_damage(s, action) + strategy_variation(s, action, cfg),
    }
}

type Memo = HashMap<(Vec<u8>, u32), f64>;

/// Worst-case discounted damage of `s` over `depth_remaining` epochs.
///
/// Depth 0 is the horizon boundary, where the attacker's one-step
/// damage and the idle defender's counter-assessment cancel exactly, so
/// the truncated value is zero. Deeper values add the one-step damage,
/// the chosen defender move's value term, and the discounted
/// expectation over the chosen attack's successors. Results are
/// memoized on (state flags, depth) within one call.
pub fn total_reward(s: &GameState, cfg: &GameConfig, depth_remaining: u32) -> f64 {
    let mut memo = Memo::new();
    value(s, cfg, depth_remaining, &mut memo)
}

/// Root solution of the game: the value of `s` over the configured
/// horizon and the move each player makes at the root epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub value: f64,
    pub attacker_policy: AttackerAction,
    pub defender_policy: DefenderAction,
}

/// Solves the game from `s` by backward recursion over `cfg.horizon`
/// epochs.
///
/// Per epoch the defender commits to the move with the best immediate
/// assessment; the attacker, seeing it, commits to the propagation with
/// the best expected continuation. Ties break toward the first action
/// in the deterministic ordering, so the result is reproducible.
pub fn solve(s: &GameState, cfg: &GameConfig) -> SolveResult {
    let mut memo = Memo::new();
    let (value, attacker_policy, defender_policy) = choose(s, cfg, cfg.horizon, &mut memo);
    SolveResult {
        value,
        attacker_policy,
        defender_policy,
    }
}

fn value(s: &GameState, cfg: &GameConfig, depth: u32, memo: &mut Memo) -> f64 {
    if depth == 0 {
        return 0.0;
    }
    let key = (s.dynamic_key(), depth);
    if let Some(v) = memo.get(&key) {
        return *v;
    }
    let (v, _, _) = choose(s, cfg, depth, memo);
    memo.insert((s.dynamic_key(), depth), v);
    v
}

fn choose(
    s: &GameState,
    cfg: &GameConfig,
    depth: u32,
    memo: &mut Memo,
) -> (f64, AttackerAction, DefenderAction) {
    if depth == 0 {
        return (0.0, AttackerAction::Idle, DefenderAction::Idle);
    }
    let (attacker_actions, defender_actions) = legal_actions(s);

    // Defender first: best immediate assessment, first in order on ties.
    let mut best_d = defender_actions[0].clone();
    let mut best_var = strategy_variation(s, &best_d, cfg);
    for d in &defender_actions[1..] {
        let var = strategy_variation(s, d, cfg);
        if var > best_var {
            best_var = var;
            best_d = d.clone();
        }
    }

    // Attacker second: best expected continuation given that defense.
    let mut best_a = attacker_actions[0].clone();
    let mut best_ev = f64::NEG_INFINITY;
    for a in &attacker_actions {
        let ev: f64 = successors(s, a, &best_d)
            .iter()
            .map(|(succ, p)| p * value(succ, cfg, depth - 1, memo))
            .sum();
        if ev > best_ev {
            best_ev = ev;
            best_a = a.clone();
        }
    }

    let v = attacker_reward(s) + defender_value_term(s, &best_d, cfg) + cfg.discount * best_ev;
    (v, best_a, best_d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{build_net, Asset, Connection, ThreatToken, Vulnerability};
    use std::collections::{BTreeMap, BTreeSet};

    const EPS: f64 = 1e-9;

    fn vuln(id: &str, impact: f64, threats: &[&str]) -> Vulnerability {
        Vulnerability {
            vul_id: id.to_string(),
            impact,
            exploitable_by: threats.iter().map(|t| t.to_string()).collect(),
        }
    }

    fn asset(id: &str, level: u8, vulns: Vec<Vulnerability>) -> Asset {
        Asset {
            id: id.to_string(),
            name: id.to_string(),
            asset_level: level,
            vulnerabilities: vulns,
        }
    }

    fn conn(source: &str, target: &str, path_level: u8, exploitability: u8) -> Connection {
        Connection {
            source: source.to_string(),
            target: target.to_string(),
            path_level,
            exploitability,
        }
    }

    fn net_state(
        assets: Vec<Asset>,
        connections: Vec<Connection>,
        threat: &str,
        infected: &[&str],
    ) -> GameState {
        let threats = vec![ThreatToken {
            threat_id: threat.to_string(),
            color: threat.to_string(),
        }];
        let mut infections: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        infections.insert(
            threat.to_string(),
            infected.iter().map(|p| p.to_string()).collect(),
        );
        let net = build_net(&assets, &connections, &threats, &infections).unwrap();
        GameState::from_net(&net, threat, 0).unwrap()
    }

    /// Smart-home subnet with TV (N2) and tablet (N3) infected.
    fn smart_home_state() -> GameState {
        let t = "tv-malware";
        net_state(
            vec![
                asset("N1", 5, vec![vuln("HUB-ADMIN-1", 10.0, &[t])]),
                asset(
                    "N2",
                    4,
                    vec![
                        vuln("CVE-2008-4866", 10.0, &[t]),
                        vuln("CVE-2009-0385", 10.0, &[t]),
                    ],
                ),
                asset(
                    "N3",
                    5,
                    vec![
                        vuln("TAB-BYTECODE-1", 2.0, &[t]),
                        vuln("TAB-MANIFEST-1", 2.0, &[t]),
                        vuln("TAB-PRIV-1", 10.0, &[t]),
                        vuln("TAB-SLEEP-1", 5.0, &[t]),
                    ],
                ),
                asset("N4", 3, vec![]),
                asset("N5", 2, vec![vuln("THERM-FW-1", 5.0, &[t])]),
                asset("N6", 5, vec![vuln("LOCK-ZB-1", 10.0, &[t])]),
            ],
            vec![
                conn("N2", "N1", 5, 3),
                conn("N2", "N3", 5, 4),
                conn("N3", "N5", 3, 1),
                conn("N3", "N6", 1, 1),
            ],
            t,
            &["N2", "N3"],
        )
    }

    #[test]
    fn node_damage_scales_level_by_worst_impact() {
        let s = smart_home_state();
        assert!((node_damage(s.node("N2").unwrap()) - 4.0).abs() < EPS);
        assert!((node_damage(s.node("N3").unwrap()) - 5.0).abs() < EPS);
        // Uninfected nodes inflict nothing.
        assert_eq!(node_damage(s.node("N1").unwrap()), 0.0);
    }

    #[test]
    fn path_damage_needs_an_active_infected_source() {
        let s = smart_home_state();
        let p = s.path("N2", "N3").unwrap();
        assert!((path_damage(p, &s.node_states) - 4.0).abs() < EPS);

        let mut cut = p.clone();
        cut.cut = true;
        assert_eq!(path_damage(&cut, &s.node_states), 0.0);

        // Uninfected source: the hub-to-nothing direction has none, so
        // check a path whose source is clean.
        let clean = s.path("N3", "N5").unwrap();
        let mut nodes = s.node_states.clone();
        nodes.iter_mut().for_each(|n| n.infected = false);
        assert_eq!(path_damage(clean, &nodes), 0.0);
    }

    #[test]
    fn attacker_reward_sums_nodes_and_paths_once() {
        let s = smart_home_state();
        // Nodes 4.0 + 5.0; paths 3.0 + 4.0 + 0.6 + 0.2.
        assert!((attacker_reward(&s) - 16.8).abs() < EPS);

        let mut clean = s.clone();
        clean
            .node_states
            .iter_mut()
            .for_each(|n| n.infected = false);
        assert_eq!(attacker_reward(&clean), 0.0);
    }

    #[test]
    fn single_infected_isolated_node_rewards_its_own_damage() {
        let s = net_state(
            vec![asset("A", 5, vec![vuln("V", 10.0, &["w"])])],
            vec![],
            "w",
            &["A"],
        );
        assert!((attacker_reward(&s) - 5.0).abs() < EPS);
    }

    #[test]
    fn defender_reward_matches_hand_computed_moves() {
        let s = smart_home_state();
        let cfg = GameConfig::default();

        // Idle restores nothing: the standing damage counts in full.
        let idle_after = s.clone();
        let r = defender_reward(&s, &idle_after, &cfg).unwrap();
        assert!((r - (-16.8)).abs() < EPS);

        // Cutting TV->tablet restores 4.0 at a cost of 0.2 x 5.
        let cut = DefenderAction::CutPath {
            source: "N2".to_string(),
            target: "N3".to_string(),
        };
        let after = apply_defender(&s, &cut);
        let r = defender_reward(&s, &after, &cfg).unwrap();
        assert!((r - (-15.8)).abs() < EPS);

        // On an all-clean state only the variation term remains.
        let mut clean = s.clone();
        clean
            .node_states
            .iter_mut()
            .for_each(|n| n.infected = false);
        let after = apply_defender(&clean, &cut);
        let r = defender_reward(&clean, &after, &cfg).unwrap();
        assert!((r - (-1.0)).abs() < EPS); // no damage restored, cost 0.2 x 5

        // A state no single action reaches is rejected.
        let mut bogus = s.clone();
        bogus.node_states[0].removed = true;
        bogus.path_states[0].cut = true;
        assert!(matches!(
            defender_reward(&s, &bogus, &cfg),
            Err(GameError::StateMismatch(_))
        ));
    }

    #[test]
    fn legal_actions_follow_the_enabling_rules() {
        let s = smart_home_state();
        let (attacker, defender) = legal_actions(&s);
        // N2->N3 is excluded: its target is already infected.
        assert_eq!(
            attacker,
            vec![
                AttackerAction::Idle,
                AttackerAction::Propagate {
                    source: "N2".to_string(),
                    target: "N1".to_string()
                },
                AttackerAction::Propagate {
                    source: "N3".to_string(),
                    target: "N5".to_string()
                },
                AttackerAction::Propagate {
                    source: "N3".to_string(),
                    target: "N6".to_string()
                },
            ]
        );
        // Idle + fix {N1,N5,N6} + cut x4 + remove x5.
        assert_eq!(defender.len(), 13);
        let fixes = defender
            .iter()
            .filter(|d| matches!(d, DefenderAction::FixVulnerability(_)))
            .count();
        assert_eq!(fixes, 3);
    }

    #[test]
    fn terminal_state_leaves_only_idle() {
        let mut s = smart_home_state();
        s.node_states.iter_mut().for_each(|n| n.removed = true);
        s.path_states.iter_mut().for_each(|p| p.cut = true);
        let (attacker, defender) = legal_actions(&s);
        assert_eq!(attacker, vec![AttackerAction::Idle]);
        assert_eq!(defender, vec![DefenderAction::Idle]);
    }

    #[test]
    fn single_enabled_path_gives_attacker_two_actions() {
        let s = net_state(
            vec![
                asset("A", 3, vec![vuln("VA", 10.0, &["w"])]),
                asset("B", 4, vec![vuln("VB", 5.0, &["w"])]),
            ],
            vec![conn("A", "B", 2, 3)],
            "w",
            &["A"],
        );
        let (attacker, _) = legal_actions(&s);
        assert_eq!(attacker.len(), 2);
    }

    #[test]
    fn transition_idle_idle_increments_tau_only() {
        let s = smart_home_state();
        let succ = transition(&s, &AttackerAction::Idle, &DefenderAction::Idle).unwrap();
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].1, 1.0);
        let mut expect = s.clone();
        expect.tau = 1;
        assert_eq!(succ[0].0, expect);
    }

    #[test]
    fn transition_splits_on_firing_probability() {
        // TV infected, tablet clean: propagation over the rank-4 path.
        let t = "tv-malware";
        let s = net_state(
            vec![
                asset("N2", 4, vec![vuln("CVE-2008-4866", 10.0, &[t])]),
                asset("N3", 5, vec![vuln("TAB-PRIV-1", 10.0, &[t])]),
            ],
            vec![conn("N2", "N3", 5, 4)],
            t,
            &["N2"],
        );
        let a = AttackerAction::Propagate {
            source: "N2".to_string(),
            target: "N3".to_string(),
        };
        let succ = transition(&s, &a, &DefenderAction::Idle).unwrap();
        assert_eq!(succ.len(), 2);
        assert!((succ[0].1 - 0.8).abs() < EPS);
        assert!((succ[1].1 - 0.2).abs() < EPS);
        assert!(succ[0].0.node("N3").unwrap().infected);
        assert!(!succ[1].0.node("N3").unwrap().infected);
        assert!((succ[0].1 + succ[1].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn defender_cut_nullifies_the_same_epoch_attack() {
        let t = "tv-malware";
        let s = net_state(
            vec![
                asset("N2", 4, vec![vuln("CVE-2008-4866", 10.0, &[t])]),
                asset("N3", 5, vec![vuln("TAB-PRIV-1", 10.0, &[t])]),
            ],
            vec![conn("N2", "N3", 5, 4)],
            t,
            &["N2"],
        );
        let a = AttackerAction::Propagate {
            source: "N2".to_string(),
            target: "N3".to_string(),
        };
        let d = DefenderAction::CutPath {
            source: "N2".to_string(),
            target: "N3".to_string(),
        };
        let succ = transition(&s, &a, &d).unwrap();
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].1, 1.0);
        assert!(!succ[0].0.node("N3").unwrap().infected);
        assert!(succ[0].0.path("N2", "N3").unwrap().cut);
    }

    #[test]
    fn transition_rejects_illegal_actions() {
        let s = smart_home_state();
        // N2->N3's target is already infected, so the attack is illegal.
        let a = AttackerAction::Propagate {
            source: "N2".to_string(),
            target: "N3".to_string(),
        };
        assert!(matches!(
            transition(&s, &a, &DefenderAction::Idle),
            Err(GameError::IllegalAction(_))
        ));
        let mut cut_state = s.clone();
        cut_state.path_states[0].cut = true;
        let d = DefenderAction::CutPath {
            source: cut_state.path_states[0].source.clone(),
            target: cut_state.path_states[0].target.clone(),
        };
        assert!(matches!(
            transition(&cut_state, &AttackerAction::Idle, &d),
            Err(GameError::IllegalAction(_))
        ));
    }

    #[test]
    fn truncated_value_is_zero_at_the_horizon_boundary() {
        let s = smart_home_state();
        let cfg = GameConfig::default();
        assert_eq!(total_reward(&s, &cfg, 0), 0.0);
    }

    #[test]
    fn zero_discount_collapses_to_the_one_step_sum() {
        let s = smart_home_state();
        let cfg = GameConfig {
            discount: 0.0,
            ..GameConfig::default()
        };
        let one = total_reward(&s, &cfg, 1);
        for depth in 2..6 {
            assert!((total_reward(&s, &cfg, depth) - one).abs() < EPS);
        }
    }

    #[test]
    fn two_node_value_matches_hand_rolled_recursion() {
        // A (level 3, impact 10) infected; path A->B (level 2, rank 3);
        // B (level 4, impact 5) clean. Removing A assesses at
        // 0.5 x 4.2 - 0.6 x 3 = 0.3, beating the cut's 0.2 and idling,
        // and leaves a dead subnet, so the two-epoch value is 0.3.
        let s = net_state(
            vec![
                asset("A", 3, vec![vuln("VA", 10.0, &["w"])]),
                asset("B", 4, vec![vuln("VB", 5.0, &["w"])]),
            ],
            vec![conn("A", "B", 2, 3)],
            "w",
            &["A"],
        );
        let cfg = GameConfig {
            horizon: 2,
            ..GameConfig::default()
        };
        let result = solve(&s, &cfg);
        assert!((result.value - 0.3).abs() < EPS);
        assert_eq!(
            result.defender_policy,
            DefenderAction::RemoveNode("A".to_string())
        );
        assert_eq!(result.attacker_policy, AttackerAction::Idle);
        assert!((total_reward(&s, &cfg, 2) - 0.3).abs() < EPS);
    }

    #[test]
    fn frozen_state_value_is_a_discounted_geometric_sum() {
        // One isolated infected node: the best defense is to idle
        // (removal assesses at 0.5 x 5 - 0.6 x 5 < 0), so each epoch
        // re-counts the same 5.0 damage, discounted.
        let s = net_state(
            vec![asset("A", 5, vec![vuln("V", 10.0, &["w"])])],
            vec![],
            "w",
            &["A"],
        );
        let cfg = GameConfig::default();
        assert!((total_reward(&s, &cfg, 1) - 5.0).abs() < EPS);
        assert!((total_reward(&s, &cfg, 2) - 9.5).abs() < EPS);
        // Closed form: 5 x (1 - 0.9^h) / 0.1.
        let h = 10;
        let expect = 5.0 * (1.0 - 0.9f64.powi(h)) / 0.1;
        assert!((total_reward(&s, &cfg, h as u32) - expect).abs() < EPS);
    }

    #[test]
    fn solver_gives_idle_policies_when_nothing_is_actionable() {
        let mut s = smart_home_state();
        s.node_states.iter_mut().for_each(|n| n.removed = true);
        s.path_states.iter_mut().for_each(|p| p.cut = true);
        let cfg = GameConfig::default();
        let result = solve(&s, &cfg);
        assert_eq!(result.value, 0.0);
        assert_eq!(result.attacker_policy, AttackerAction::Idle);
        assert_eq!(result.defender_policy, DefenderAction::Idle);
        assert_eq!(result.value, total_reward(&s, &cfg, cfg.horizon));
    }

    /// Memo-free reference recursion with the same semantics.
    fn value_no_memo(s: &GameState, cfg: &GameConfig, depth: u32) -> f64 {
        if depth == 0 {
            return 0.0;
        }
        let (attacker_actions, defender_actions) = legal_actions(s);
        let mut best_d = defender_actions[0].clone();
        let mut best_var = strategy_variation(s, &best_d, cfg);
        for d in &defender_actions[1..] {
            let var = strategy_variation(s, d, cfg);
            if var > best_var {
                best_var = var;
                best_d = d.clone();
            }
        }
        let mut best_ev = f64::NEG_INFINITY;
        for a in &attacker_actions {
            let ev: f64 = transition(s, a, &best_d)
                .unwrap()
                .iter()
                .map(|(succ, p)| p * value_no_memo(succ, cfg, depth - 1))
                .sum();
            if ev > best_ev {
                best_ev = ev;
            }
        }
        attacker_reward(s) + defender_value_term(s, &best_d, cfg) + cfg.discount * best_ev
    }

    #[test]
    fn memoization_does_not_change_values() {
        let s = smart_home_state();
        let cfg = GameConfig {
            horizon: 4,
            ..GameConfig::default()
        };
        let plain = value_no_memo(&s, &cfg, 4);
        assert_eq!(total_reward(&s, &cfg, 4), plain);
        assert_eq!(solve(&s, &cfg).value, plain);
    }
}
