//! Parses a scenario from TOML text, shows how validation reports every
//! problem at once, and round-trips a document back to text.
//!
//! Run with `cargo run --example scenario_io`.

use scpn::scenario::{parse_scenario, serialize_scenario};

fn main() {
    // ANCHOR: roundtrip
    let text = r#"
scenario_id = "demo"
threats = ["botnet"]

[initial_infections]
botnet = ["gateway"]

[game]
discount = 0.9
horizon = 5
restore_fraction = 0.5
cut_penalty = 0.2
removal_penalty = 0.6

[ssa]
radix = 10.0
mode = "expectation"
trials = 200
seed = 42

[[assets]]
id = "gateway"
name = "home gateway"
asset_level = 5

[[assets.vulnerabilities]]
vul_id = "GW-1"
impact = 7.5
exploitable_by = ["botnet"]

[[assets]]
id = "bulb"
name = "smart bulb"
asset_level = 1

[[assets.vulnerabilities]]
vul_id = "BULB-1"
impact = 2.0
exploitable_by = ["botnet"]

[[connections]]
source = "gateway"
target = "bulb"
path_level = 1
exploitability = 5
"#;

    let doc = parse_scenario(text).expect("the document is valid");
    println!(
        "parsed {} with {} assets",
        doc.scenario_id,
        doc.assets.len()
    );

    // Serialization is canonical: parse(serialize(doc)) == doc.
    let rendered = serialize_scenario(&doc);
    assert_eq!(parse_scenario(&rendered).unwrap(), doc);
    // ANCHOR_END: roundtrip

    // ANCHOR: errors
    // Validation collects every problem instead of stopping at the first.
    let broken = text
        .replace("asset_level = 5", "asset_level = 9")
        .replace("target = \"bulb\"", "target = \"missing\"");
    let report = parse_scenario(&broken).unwrap_err();
    for error in &report.errors {
        println!("{error}");
    }
    // ANCHOR_END: errors
}
