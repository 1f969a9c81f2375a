//! Scenario files: parsing with exhaustive validation, lossless
//! serialization, and the bundled smart-home fixtures.
//!
//! A scenario is a TOML document with nested sections:
//!
//! ```toml
//! scenario_id = "smart-home-scenario-1"
//! threats = ["tv-malware"]
//!
//! [initial_infections]
//! tv-malware = ["N2"]
//!
//! [game]
//! discount = 0.9
//! horizon = 10
//! restore_fraction = 0.5
//! cut_penalty = 0.2
//! removal_penalty = 0.6
//!
//! [ssa]
//! radix = 10.0
//! mode = "expectation"
//! trials = 200
//! seed = 42
//!
//! [[assets]]
//! id = "N2"
//! name = "Smart TV"
//! asset_level = 4
//!
//! [[assets.vulnerabilities]]
//! vul_id = "CVE-2008-4866"
//! impact = 10.0
//! cvss_base_score = 10.0
//! exploitable_by = ["tv-malware"]
//!
//! [[connections]]
//! source = "N2"
//! target = "N1"
//! path_level = 5
//! exploitability = 3
//! ```
//!
//! Parsing reports *all* validation problems at once, each attributed
//! to the offending field, so a hand-edited file can be repaired in one
//! pass. Serialization is canonical, and parsing a serialized document
//! returns the same value:
//!
//! ```
//! use scpn::scenario::{builtin_fixture, parse_scenario, serialize_scenario};
//!
//! let doc = builtin_fixture("smart-home-scenario-1").unwrap();
//! let text = serialize_scenario(&doc);
//! assert_eq!(parse_scenario(&text).unwrap(), doc);
//!
//! // Out-of-range values are reported with their field path.
//! let broken = text.replace("asset_level = 4", "asset_level = 40");
//! let report = parse_scenario(&broken).unwrap_err();
//! assert!(report.errors.iter().any(|e| e.to_string().contains("asset_level")));
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::GameConfig;
use crate::net::{self, NetError, ScpnNet};
use crate::ssa::SsaOptions;

/// One vulnerability entry of an asset.
///
/// Only `impact` feeds the damage model; the CVSS base score is carried
/// as optional metadata for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VulnerabilityDoc {
    pub vul_id: String,
    /// Damage magnitude on the 0-10 scale.
    pub impact: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cvss_base_score: Option<f64>,
    /// Threat ids able to exploit this vulnerability.
    pub exploitable_by: Vec<String>,
}

/// One device entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetDoc {
    pub id: String,
    pub name: String,
    /// Importance rank, 1-5.
    pub asset_level: u8,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vulnerabilities: Vec<VulnerabilityDoc>,
}

/// One directed connection entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionDoc {
    pub source: String,
    pub target: String,
    /// Importance rank, 1-5.
    pub path_level: u8,
    /// Usability rank, 1-5.
    pub exploitability: u8,
}

/// A complete, parseable scenario definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub scenario_id: String,
    /// Declared threat ids; token colors default to the id.
    pub threats: Vec<String>,
    /// threat id -> asset ids holding a token at epoch zero.
    pub initial_infections: BTreeMap<String, Vec<String>>,
    pub game: GameConfig,
    pub ssa: SsaOptions,
    pub assets: Vec<AssetDoc>,
    pub connections: Vec<ConnectionDoc>,
}

/// One validation problem, attributed to the field that caused it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    /// The document is not well-formed TOML.
    #[error("SyntaxError(line {line}): {message}")]
    SyntaxError { line: usize, message: String },
    /// A numeric field is outside its declared range.
    #[error("RangeError({field}): {message}")]
    RangeError { field: String, message: String },
    /// A reference names an id that is not declared.
    #[error("DanglingReference({field}): {message}")]
    DanglingReference { field: String, message: String },
    /// Two entries share an identifier.
    #[error("DuplicateId({field}): {message}")]
    DuplicateId { field: String, message: String },
}

/// Every problem found in one parse, so a file can be repaired in one
/// pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParseError {
    pub errors: Vec<ScenarioError>,
}

impl fmt::Display for ScenarioParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} scenario error(s):", self.errors.len())?;
        for error in &self.errors {
            writeln!(f, "  {error}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ScenarioParseError {}

/// Parses and validates a scenario document.
///
/// Returns the document only when every invariant holds; otherwise the
/// error carries the full list of problems, each attributed to a field.
pub fn parse_scenario(text: &str) -> Result<ScenarioDoc, ScenarioParseError> {
    let doc: ScenarioDoc = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|span| text[..span.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(1);
        ScenarioParseError {
            errors: vec![ScenarioError::SyntaxError {
                line,
                message: e.message().to_string(),
            }],
        }
    })?;
    let errors = validate(&doc);
    if errors.is_empty() {
        Ok(doc)
    } else {
        Err(ScenarioParseError { errors })
    }
}

/// Serializes a document to TOML with stable key order, so serializing
/// twice yields identical bytes and `parse(serialize(doc)) == doc`.
pub fn serialize_scenario(doc: &ScenarioDoc) -> String {
    toml::to_string_pretty(doc).expect("scenario documents always serialize")
}

/// The two bundled smart-home scenarios: the same six devices and four
/// connections, attacked once through the TV and once through the
/// tablet.
pub fn builtin_fixtures() -> Vec<ScenarioDoc> {
    [SCENARIO_1_TOML, SCENARIO_2_TOML]
        .iter()
        .map(|text| parse_scenario(text).expect("bundled fixtures are valid"))
        .collect()
}

/// Looks up a bundled fixture by its scenario id.
pub fn builtin_fixture(name: &str) -> Option<ScenarioDoc> {
    builtin_fixtures()
        .into_iter()
        .find(|doc| doc.scenario_id == name)
}

const SCENARIO_1_TOML: &str = include_str!("../fixtures/smart-home-scenario-1.toml");
const SCENARIO_2_TOML: &str = include_str!("../fixtures/smart-home-scenario-2.toml");

/// Builds the Petri net a document describes.
pub fn to_net(doc: &ScenarioDoc) -> Result<ScpnNet, NetError> {
    let assets: Vec<net::Asset> = doc
        .assets
        .iter()
        .map(|a| net::Asset {
            id: a.id.clone(),
            name: a.name.clone(),
            asset_level: a.asset_level,
            vulnerabilities: a
                .vulnerabilities
                .iter()
                .map(|v| net::Vulnerability {
                    vul_id: v.vul_id.clone(),
                    impact: v.impact,
                    exploitable_by: v.exploitable_by.iter().cloned().collect(),
                })
                .collect(),
        })
        .collect();
    let connections: Vec<net::Connection> = doc
        .connections
        .iter()
        .map(|c| net::Connection {
            source: c.source.clone(),
            target: c.target.clone(),
            path_level: c.path_level,
            exploitability: c.exploitability,
        })
        .collect();
    let threats: Vec<net::ThreatToken> = doc
        .threats
        .iter()
        .map(|t| net::ThreatToken {
            threat_id: t.clone(),
            color: t.clone(),
        })
        .collect();
    let infections: BTreeMap<String, BTreeSet<String>> = doc
        .initial_infections
        .iter()
        .map(|(t, places)| (t.clone(), places.iter().cloned().collect()))
        .collect();
    net::build_net(&assets, &connections, &threats, &infections)
}

/// The game constants of a document.
pub fn game_config(doc: &ScenarioDoc) -> GameConfig {
    doc.game.clone()
}

/// The assessment options of a document.
pub fn ssa_options(doc: &ScenarioDoc) -> SsaOptions {
    doc.ssa.clone()
}

/// Checks every document invariant and returns all violations.
pub fn validate(doc: &ScenarioDoc) -> Vec<ScenarioError> {
    let mut errors = Vec::new();
    let range = |errors: &mut Vec<ScenarioError>, field: &str, message: String| {
        errors.push(ScenarioError::RangeError {
            field: field.to_string(),
            message,
        });
    };

    if doc.scenario_id.is_empty() {
        range(&mut errors, "scenario_id", "must not be empty".to_string());
    }

    // Threat list: unique, non-empty.
    if doc.threats.is_empty() {
        range(
            &mut errors,
            "threats",
            "must declare at least one threat".to_string(),
        );
    }
    let mut threat_set = BTreeSet::new();
    for (i, threat) in doc.threats.iter().enumerate() {
        if !threat_set.insert(threat.clone()) {
            errors.push(ScenarioError::DuplicateId {
                field: format!("threats[{i}]"),
                message: format!("threat {threat:?} declared twice"),
            });
        }
    }

    // Assets and their vulnerabilities.
    let mut asset_ids = BTreeSet::new();
    for (i, asset) in doc.assets.iter().enumerate() {
        if !asset_ids.insert(asset.id.clone()) {
            errors.push(ScenarioError::DuplicateId {
                field: format!("assets[{i}].id"),
                message: format!("asset id {:?} declared twice", asset.id),
            });
        }
        if !(1..=5).contains(&asset.asset_level) {
            range(
                &mut errors,
                &format!("assets[{i}].asset_level"),
                format!("{} is outside 1..=5", asset.asset_level),
            );
        }
        let mut vul_ids = BTreeSet::new();
        for (j, vuln) in asset.vulnerabilities.iter().enumerate() {
            let field = format!("assets[{i}].vulnerabilities[{j}]");
            if !vul_ids.insert(vuln.vul_id.clone()) {
                errors.push(ScenarioError::DuplicateId {
                    field: format!("{field}.vul_id"),
                    message: format!(
                        "vulnerability {:?} declared twice on {:?}",
                        vuln.vul_id, asset.id
                    ),
                });
            }
            if !vuln.impact.is_finite() || !(0.0..=10.0).contains(&vuln.impact) {
                range(
                    &mut errors,
                    &format!("{field}.impact"),
                    format!("{} is outside 0..=10", vuln.impact),
                );
            }
            if let Some(score) = vuln.cvss_base_score {
                if !score.is_finite() || !(0.0..=10.0).contains(&score) {
                    range(
                        &mut errors,
                        &format!("{field}.cvss_base_score"),
                        format!("{score} is outside 0..=10"),
                    );
                }
            }
            let mut seen = BTreeSet::new();
            for (k, threat) in vuln.exploitable_by.iter().enumerate() {
                if !seen.insert(threat.clone()) {
                    errors.push(ScenarioError::DuplicateId {
                        field: format!("{field}.exploitable_by[{k}]"),
                        message: format!("threat {threat:?} listed twice"),
                    });
                }
                if !doc.threats.contains(threat) {
                    errors.push(ScenarioError::DanglingReference {
                        field: format!("{field}.exploitable_by[{k}]"),
                        message: format!("unknown threat {threat:?}"),
                    });
                }
            }
        }
    }

    // Connections.
    let mut edges = BTreeSet::new();
    for (i, conn) in doc.connections.iter().enumerate() {
        let field = format!("connections[{i}]");
        if conn.source == conn.target {
            range(
                &mut errors,
                &format!("{field}.target"),
                format!("{:?} loops back onto its source", conn.target),
            );
        }
        if !edges.insert((conn.source.clone(), conn.target.clone())) {
            errors.push(ScenarioError::DuplicateId {
                field: field.clone(),
                message: format!("connection {}->{} declared twice", conn.source, conn.target),
            });
        }
        for (endpoint, value) in [("source", &conn.source), ("target", &conn.target)] {
            if !asset_ids.contains(value) {
                errors.push(ScenarioError::DanglingReference {
                    field: format!("{field}.{endpoint}"),
                    message: format!("unknown asset {value:?}"),
                });
            }
        }
        if !(1..=5).contains(&conn.path_level) {
            range(
                &mut errors,
                &format!("{field}.path_level"),
                format!("{} is outside 1..=5", conn.path_level),
            );
        }
        if !(1..=5).contains(&conn.exploitability) {
            range(
                &mut errors,
                &format!("{field}.exploitability"),
                format!("{} is outside 1..=5", conn.exploitability),
            );
        }
    }

    // Initial infections.
    for (threat, places) in &doc.initial_infections {
        let field = format!("initial_infections.{threat}");
        if !doc.threats.contains(threat) {
            errors.push(ScenarioError::DanglingReference {
                field: field.clone(),
                message: format!("unknown threat {threat:?}"),
            });
        }
        let mut seen = BTreeSet::new();
        for (i, place) in places.iter().enumerate() {
            if !seen.insert(place.clone()) {
                errors.push(ScenarioError::DuplicateId {
                    field: format!("{field}[{i}]"),
                    message: format!("asset {place:?} listed twice"),
                });
            }
            if !asset_ids.contains(place) {
                errors.push(ScenarioError::DanglingReference {
                    field: format!("{field}[{i}]"),
                    message: format!("unknown asset {place:?}"),
                });
            }
        }
    }

    // Game constants.
    let game = &doc.game;
    if !game.discount.is_finite() || !(0.0..1.0).contains(&game.discount) {
        range(
            &mut errors,
            "game.discount",
            format!("{} is outside [0, 1)", game.discount),
        );
    }
    if game.horizon < 1 {
        range(
            &mut errors,
            "game.horizon",
            "must be at least 1".to_string(),
        );
    }
    if !game.restore_fraction.is_finite() || !(0.0..=1.0).contains(&game.restore_fraction) {
        range(
            &mut errors,
            "game.restore_fraction",
            format!("{} is outside [0, 1]", game.restore_fraction),
        );
    }
    if !game.cut_penalty.is_finite() || game.cut_penalty < 0.0 {
        range(
            &mut errors,
            "game.cut_penalty",
            format!("{} is negative", game.cut_penalty),
        );
    }
    if !game.removal_penalty.is_finite() || game.removal_penalty < 0.0 {
        range(
            &mut errors,
            "game.removal_penalty",
            format!("{} is negative", game.removal_penalty),
        );
    }

    // Assessment options.
    let ssa = &doc.ssa;
    if !ssa.radix.is_finite() || ssa.radix <= 1.0 {
        range(
            &mut errors,
            "ssa.radix",
            format!("{} must be finite and greater than 1", ssa.radix),
        );
    }
    if ssa.trials < 1 {
        range(&mut errors, "ssa.trials", "must be at least 1".to_string());
    }
    // TOML integers are signed 64-bit, so larger seeds could never be
    // written back to a file.
    if ssa.seed > i64::MAX as u64 {
        range(
            &mut errors,
            "ssa.seed",
            format!("{} does not fit the file format's integer range", ssa.seed),
        );
    }

    errors
}
