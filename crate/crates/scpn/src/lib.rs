//! Threat-propagation modeling for IoT networks.
//!
//! The crate models an IoT deployment as a stochastic colored Petri net:
//! devices are places, threats are colored tokens, and directed
//! connections carry probabilistic transitions that spread compromise.
//! On top of the net, a two-player attacker/defender game scores the
//! worst-case damage of every threat over a finite horizon, and the
//! per-threat scores are folded into a single normalized
//! security-situation curve suitable for trend analysis.
//!
//! The pipeline, end to end:
//!
//! 1. [`scenario`] parses a scenario file (assets, vulnerabilities,
//!    connections, threats, initial infections) and validates it.
//! 2. [`net`] builds the Petri net, slices out per-threat subnets,
//!    enumerates attack paths, and offers seeded stochastic firing.
//! 3. [`game`] solves the finite-horizon attacker/defender game on a
//!    threat subnet, yielding the worst-case discounted damage.
//! 4. [`ssa`] rolls the game forward epoch by epoch, aggregates all
//!    threats into one value per epoch, and normalizes the series.
//! 5. [`cli`] exposes the whole pipeline as a command-line tool.
//!
//! # Quick start
//!
//! ```
//! use scpn::scenario::{self, builtin_fixtures};
//! use scpn::ssa;
//!
//! // Ship-with fixtures: a six-device smart home attacked two ways.
//! let doc = &builtin_fixtures()[0];
//! let net = scenario::to_net(doc).unwrap();
//! let cfg = scenario::game_config(doc);
//! let opts = scenario::ssa_options(doc);
//!
//! let series = ssa::situation_series(&doc.scenario_id, &net, &cfg, &opts).unwrap();
//! assert_eq!(series.points.len(), cfg.horizon as usize + 1);
//! // Every normalized value lies in [0, 1].
//! assert!(series.points.iter().all(|p| (0.0..=1.0).contains(&p.normalized)));
//! ```

pub mod cli;
pub mod game;
pub mod net;
pub mod scenario;
pub mod ssa;
